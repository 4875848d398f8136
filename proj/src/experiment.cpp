#include "tfm/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "tfm/error.hpp"
#include "tfm/format.hpp"

namespace tfm {

std::string to_string(SweepParam p)
{
  switch (p)
  {
  case SweepParam::Phi:
    return "phi";
  case SweepParam::Gamma:
    return "gamma";
  case SweepParam::SizeRatio:
    return "size_ratio";
  }
  return "unknown";
}

void ExperimentConfig::validate() const
{
  try
  {
    mechanism.validate();
    bid_dist.validate();
    size_dist.validate();
  }
  catch (ParameterError const &e)
  {
    throw ConfigError(e.what());
  }
  if (sweep_values.empty())
  {
    throw ConfigError("values: at least one sweep value is required");
  }
  for (double v : sweep_values)
  {
    if (!std::isfinite(v))
    {
      throw ConfigError("values: sweep values must be finite");
    }
  }
  if (runs == 0)
  {
    throw ConfigError("runs must be at least 1");
  }
  if (n == 0)
  {
    throw ConfigError("n must be at least 1");
  }
  if (jobs == 0)
  {
    throw ConfigError("jobs must be at least 1");
  }
  if (!(capacity >= 0.0) || !std::isfinite(capacity))
  {
    throw ConfigError("capacity must be finite and non-negative");
  }
  if (!(size_ratio > 0.0) || !std::isfinite(size_ratio))
  {
    throw ConfigError("size_ratio must be positive");
  }
}

ExperimentConfig ExperimentConfig::rtfm_defaults()
{
  ExperimentConfig cfg;
  cfg.mechanism        = MechanismSpec::rtfm(0.5);
  cfg.mechanism.solver = {Solver::Auto, 24};
  cfg.sweep_param      = SweepParam::Phi;
  for (int i = 0; i <= 10; ++i)
  {
    cfg.sweep_values.push_back(i / 10.0);
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::stfm_defaults()
{
  ExperimentConfig cfg;
  cfg.mechanism        = MechanismSpec::stfm(1.0);
  cfg.mechanism.solver = {Solver::Auto, 24};
  cfg.bid_dist         = BidDistribution::uniform(0.0, 5.0);
  cfg.size_dist        = BidDistribution::exponential(1.0);
  cfg.sweep_param      = SweepParam::Gamma;
  cfg.sweep_values     = {0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0};
  cfg.runs             = 100;
  return cfg;
}

namespace {

std::vector<double> parse_list(std::string const &text, std::string const &key)
{
  std::vector<double> out;
  for (auto const &piece : split_list(text))
  {
    out.push_back(parse_double(piece, key));
  }
  return out;
}

std::string read_file(std::filesystem::path const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw IoError(path.string(), "cannot open for reading");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

BidDistribution parse_distribution(std::string const &text, std::string const &key)
{
  try
  {
    return BidDistribution::parse(text);
  }
  catch (ConfigError const &)
  {
    throw;
  }
  catch (Error const &e)
  {
    throw ConfigError(key + ": " + e.what());
  }
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(std::string_view text)
{
  auto pairs = parse_key_values(text);

  bool softmax = false;
  for (auto const &[k, v] : pairs)
  {
    if ((k == "allocation" && v == "softmax") || (k == "mechanism" && v == "stfm"))
    {
      softmax = true;
    }
  }
  ExperimentConfig cfg = softmax ? stfm_defaults() : rtfm_defaults();

  bool has_solver = std::any_of(pairs.begin(), pairs.end(), [](auto const &kv) {
    return kv.first == "solver";
  });
  cfg.mechanism = MechanismSpec::from_pairs(pairs, cfg.mechanism);
  if (!has_solver)
  {
    cfg.mechanism.solver = {Solver::Auto, cfg.mechanism.solver.exhaustive_limit};
  }

  for (auto const &[key, value] : pairs)
  {
    if (key == "n")
      cfg.n = parse_u64(value, key);
    else if (key == "capacity")
      cfg.capacity = parse_double(value, key);
    else if (key == "bids")
      cfg.bid_dist = parse_distribution(value, key);
    else if (key == "sizes")
      cfg.size_dist = parse_distribution(value, key);
    else if (key == "sweep")
    {
      if (value == "phi")
        cfg.sweep_param = SweepParam::Phi;
      else if (value == "gamma")
        cfg.sweep_param = SweepParam::Gamma;
      else if (value == "size_ratio")
        cfg.sweep_param = SweepParam::SizeRatio;
      else
        throw ConfigError("sweep: expected phi, gamma or size_ratio, got '" + value + "'");
    }
    else if (key == "values")
      cfg.sweep_values = parse_list(value, key);
    else if (key == "size_ratio")
      cfg.size_ratio = parse_double(value, key);
    else if (key == "runs")
      cfg.runs = parse_u64(value, key);
    else if (key == "seed")
      cfg.seed = parse_u64(value, key);
    else if (key == "output")
      cfg.output_path = value;
    else if (key == "plot_data")
      cfg.plot_data_path = value;
    else if (key == "jobs")
      cfg.jobs = parse_u64(value, key);
    else
      throw ConfigError("unknown key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::load(std::filesystem::path const &path)
{
  return parse(read_file(path));
}

namespace {

struct Accumulator
{
  double      sum   = 0.0;
  double      sumsq = 0.0;
  std::size_t count = 0;

  void add(double x)
  {
    sum += x;
    sumsq += x * x;
    ++count;
  }
  double mean() const
  {
    return count ? sum / static_cast<double>(count) : 0.0;
  }
  double stderr_of_mean() const
  {
    if (count < 2)
    {
      return 0.0;
    }
    double const n   = static_cast<double>(count);
    double const var = std::max(0.0, (sumsq - sum * sum / n) / (n - 1.0));
    return std::sqrt(var / n);
  }
};

/// Runs `cell(i)` for every index on up to `jobs` threads; results land by index.
template <typename Fn>
std::vector<SweepRow> run_cells(std::size_t count, std::size_t jobs, Fn cell)
{
  std::vector<SweepRow>    rows(count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr       failure;
  std::mutex               failure_mutex;
  auto                     worker = [&] {
    for (std::size_t i = next++; i < count; i = next++)
    {
      try
      {
        rows[i] = cell(i);
      }
      catch (...)
      {
        std::lock_guard lock(failure_mutex);
        if (!failure)
        {
          failure = std::current_exception();
        }
      }
    }
  };
  std::size_t const        threads = std::min(jobs, count);
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t)
  {
    pool.emplace_back(worker);
  }
  worker();
  for (auto &th : pool)
  {
    th.join();
  }
  if (failure)
  {
    std::rethrow_exception(failure);
  }
  return rows;
}

std::uint64_t mempool_seed(std::uint64_t seed, std::size_t run)
{
  return derive_seed(seed, 2 * static_cast<std::uint64_t>(run));
}

std::uint64_t mechanism_seed(std::uint64_t seed, std::size_t run)
{
  return derive_seed(seed, 2 * static_cast<std::uint64_t>(run) + 1);
}

struct BlockShares
{
  double zero_fee_count     = 0.0;
  double zero_payment_count = 0.0;
  double zero_fee_size      = 0.0;
};

BlockShares block_shares(Mempool const &m, MechanismOutcome const &o)
{
  BlockShares s;
  for (auto id : o.allocation.selected)
  {
    auto const &tx = m.at(id);
    if (tx.bid == 0.0)
    {
      s.zero_fee_count += 1.0;
      s.zero_fee_size += tx.size;
    }
    if (o.payment_per_unit.at(id) == 0.0)
    {
      s.zero_payment_count += 1.0;
    }
  }
  return s;
}

}  // namespace

std::vector<SweepRow> run_rtfm_sweep(ExperimentConfig const &cfg)
{
  cfg.validate();
  if (!std::holds_alternative<RtfmRule>(cfg.mechanism.allocation))
  {
    throw ConfigError("sweep-rtfm needs allocation=rtfm");
  }
  if (cfg.sweep_param != SweepParam::Phi)
  {
    throw ConfigError("sweep-rtfm sweeps phi only");
  }
  for (double phi : cfg.sweep_values)
  {
    if (!(phi >= 0.0 && phi <= 1.0))
    {
      throw ConfigError("values: phi must lie in [0, 1]");
    }
  }

  return run_cells(cfg.sweep_values.size(), cfg.jobs, [&](std::size_t cell) {
    double const phi  = cfg.sweep_values[cell];
    auto         spec = cfg.mechanism;
    spec.allocation   = RtfmRule{phi};

    Accumulator revenue, zff, zpf, zfi;
    double      opt_total = 0.0;
    double      mech_total = 0.0;
    for (std::size_t run = 0; run < cfg.runs; ++run)
    {
      auto const   m   = sample_mempool(cfg.n, cfg.bid_dist, cfg.size_dist, mempool_seed(cfg.seed, run));
      double const opt = total_bid_value(m, optimal_allocate(m, cfg.capacity, spec.solver));
      auto const   o   = run_mechanism(spec, m, cfg.capacity, {}, mechanism_seed(cfg.seed, run));
      auto const   s   = block_shares(m, o);
      double const n   = static_cast<double>(m.size());
      revenue.add(opt > 0.0 ? o.miner_utility / opt : 1.0);
      zff.add(s.zero_fee_count / n);
      zpf.add(s.zero_payment_count / n);
      zfi.add(o.allocation.total_size > 0.0 ? s.zero_fee_size / o.allocation.total_size : 0.0);
      opt_total += opt;
      mech_total += o.miner_utility;
    }
    SweepRow row;
    row.sweep_value           = phi;
    row.normalized_revenue    = revenue.mean();
    row.revenue_stderr        = revenue.stderr_of_mean();
    row.zero_fee_fraction     = zff.mean();
    row.zff_stderr            = zff.stderr_of_mean();
    row.zero_payment_fraction = zpf.mean();
    row.zpf_stderr            = zpf.stderr_of_mean();
    row.cof        = mech_total > 0.0 ? opt_total / mech_total : std::numeric_limits<double>::infinity();
    row.cof_stderr = 0.0;
    row.zfi        = zfi.mean();
    row.zfi_stderr = zfi.stderr_of_mean();
    return row;
  });
}

std::vector<SweepRow> run_stfm_sweep(ExperimentConfig const &cfg)
{
  cfg.validate();
  if (!std::holds_alternative<SoftmaxRule>(cfg.mechanism.allocation))
  {
    throw ConfigError("sweep-stfm needs allocation=softmax");
  }
  if (cfg.sweep_param == SweepParam::Phi)
  {
    throw ConfigError("sweep-stfm sweeps gamma or size_ratio");
  }
  for (double v : cfg.sweep_values)
  {
    if (!(v > 0.0))
    {
      throw ConfigError("values: gamma and size ratios must be positive");
    }
  }

  return run_cells(cfg.sweep_values.size(), cfg.jobs, [&](std::size_t cell) {
    double const value = cfg.sweep_values[cell];
    auto         spec  = cfg.mechanism;
    double       ratio = cfg.size_ratio;
    if (cfg.sweep_param == SweepParam::Gamma)
    {
      spec.allocation = SoftmaxRule{value};
    }
    else
    {
      ratio = value;
    }

    Accumulator revenue, zff, zpf, cof, zfi;
    SolverOptions const greedy{Solver::Greedy, spec.solver.exhaustive_limit};
    for (std::size_t run = 0; run < cfg.runs; ++run)
    {
      auto const   m        = sample_mempool(cfg.n, cfg.bid_dist, cfg.size_dist, mempool_seed(cfg.seed, run));
      double const capacity = m.total_size() / ratio;
      double const best     = total_bid_value(m, optimal_allocate(m, capacity, greedy));
      auto const   o        = run_mechanism(spec, m, capacity, {}, mechanism_seed(cfg.seed, run));
      auto const   s        = block_shares(m, o);
      double const n        = static_cast<double>(m.size());
      double const u        = o.miner_utility;
      revenue.add(best > 0.0 ? u / best : 1.0);
      cof.add(u > 0.0 ? best / u : (best > 0.0 ? std::numeric_limits<double>::infinity() : 1.0));
      zff.add(s.zero_fee_count / n);
      zpf.add(s.zero_payment_count / n);
      zfi.add(o.allocation.total_size > 0.0 ? s.zero_fee_size / o.allocation.total_size : 0.0);
    }
    SweepRow row;
    row.sweep_value           = value;
    row.normalized_revenue    = revenue.mean();
    row.revenue_stderr        = revenue.stderr_of_mean();
    row.zero_fee_fraction     = zff.mean();
    row.zff_stderr            = zff.stderr_of_mean();
    row.zero_payment_fraction = zpf.mean();
    row.zpf_stderr            = zpf.stderr_of_mean();
    row.cof                   = cof.mean();
    row.cof_stderr            = cof.stderr_of_mean();
    row.zfi                   = zfi.mean();
    row.zfi_stderr            = zfi.stderr_of_mean();
    return row;
  });
}

namespace {

std::string num(double v)
{
  return format_sig(v, 10);
}

template <typename Writer>
void write_file(std::filesystem::path const &path, Writer write)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
  {
    throw IoError(path.string(), "cannot open for writing");
  }
  write(out);
  out.flush();
  if (!out)
  {
    throw IoError(path.string(), "write failed");
  }
}

}  // namespace

void emit_csv(std::vector<SweepRow> const &rows, std::ostream &out)
{
  out << "sweep_value,normalized_revenue,revenue_stderr,zero_fee_fraction,zff_stderr,cof,zfi\n";
  for (auto const &r : rows)
  {
    out << num(r.sweep_value) << ',' << num(r.normalized_revenue) << ',' << num(r.revenue_stderr)
        << ',' << num(r.zero_fee_fraction) << ',' << num(r.zff_stderr) << ',' << num(r.cof) << ','
        << num(r.zfi) << '\n';
  }
}

void emit_csv(std::vector<SweepRow> const &rows, std::filesystem::path const &path)
{
  write_file(path, [&](std::ostream &out) { emit_csv(rows, out); });
}

void emit_plot_data(std::vector<SweepRow> const &rows, std::ostream &out)
{
  out << "# sweep_value normalized_revenue revenue_stderr zero_fee_fraction zff_stderr "
         "zero_payment_fraction zpf_stderr cof cof_stderr zfi zfi_stderr\n";
  for (auto const &r : rows)
  {
    out << num(r.sweep_value) << ' ' << num(r.normalized_revenue) << ' ' << num(r.revenue_stderr)
        << ' ' << num(r.zero_fee_fraction) << ' ' << num(r.zff_stderr) << ' '
        << num(r.zero_payment_fraction) << ' ' << num(r.zpf_stderr) << ' ' << num(r.cof) << ' '
        << num(r.cof_stderr) << ' ' << num(r.zfi) << ' ' << num(r.zfi_stderr) << '\n';
  }
}

void emit_plot_data(std::vector<SweepRow> const &rows, std::filesystem::path const &path)
{
  write_file(path, [&](std::ostream &out) { emit_plot_data(rows, out); });
}

AuditConfig AuditConfig::parse(std::string_view text, std::filesystem::path const &base_dir)
{
  auto        pairs = parse_key_values(text);
  AuditConfig cfg;
  cfg.mechanism = MechanismSpec::from_pairs(pairs);

  std::optional<std::string> mempool_path;
  std::vector<double>        bids, sizes, valuations;
  for (auto const &[key, value] : pairs)
  {
    if (key == "mempool")
      mempool_path = value;
    else if (key == "bids")
      bids = parse_list(value, key);
    else if (key == "sizes")
      sizes = parse_list(value, key);
    else if (key == "valuations")
      valuations = parse_list(value, key);
    else if (key == "capacity")
      cfg.capacity = parse_double(value, key);
    else if (key == "trials")
      cfg.trials = parse_u64(value, key);
    else if (key == "seed")
      cfg.seed = parse_u64(value, key);
    else if (key == "target")
      cfg.target = parse_u64(value, key);
    else if (key == "epsilons")
      cfg.epsilons = parse_list(value, key);
    else if (key == "user")
      cfg.user = parse_u64(value, key);
    else if (key == "bid_grid")
      cfg.bid_grid = parse_list(value, key);
    else if (key == "fake_budget")
      cfg.fake_budget = parse_u64(value, key);
    else if (key == "fake_bids")
      cfg.fake_bids = parse_list(value, key);
    else if (key == "fake_size")
      cfg.fake_size = parse_double(value, key);
    else if (key == "alpha_target")
      cfg.alpha_target = parse_double(value, key);
    else if (key == "phi_ratio")
      cfg.phi_ratio = parse_double(value, key);
    else if (key == "gamma_lo")
      cfg.gamma_lo = parse_double(value, key);
    else if (key == "gamma_hi")
      cfg.gamma_hi = parse_double(value, key);
    else
      throw ConfigError("unknown key '" + key + "'");
  }

  if (mempool_path && !bids.empty())
  {
    throw ConfigError("give either mempool or bids, not both");
  }
  if (mempool_path)
  {
    std::filesystem::path p(*mempool_path);
    if (p.is_relative() && !base_dir.empty())
    {
      p = base_dir / p;
    }
    cfg.mempool = read_mempool_csv(p.string());
  }
  else
  {
    if (bids.empty())
    {
      throw ConfigError("the instance needs a mempool file or a bids list");
    }
    if (!sizes.empty() && sizes.size() != bids.size())
    {
      throw ConfigError("sizes must match bids in length");
    }
    if (!valuations.empty() && valuations.size() != bids.size())
    {
      throw ConfigError("valuations must match bids in length");
    }
    std::vector<Transaction> txs;
    for (std::size_t i = 0; i < bids.size(); ++i)
    {
      txs.push_back({static_cast<TxId>(i), sizes.empty() ? 1.0 : sizes[i], bids[i],
                     valuations.empty() ? bids[i] : valuations[i], false});
    }
    try
    {
      cfg.mempool = Mempool(std::move(txs));
    }
    catch (ParameterError const &e)
    {
      throw ConfigError(e.what());
    }
  }
  return cfg;
}

AuditConfig AuditConfig::load(std::filesystem::path const &path)
{
  return parse(read_file(path), path.parent_path());
}

std::string run_audit(AuditConfig const &cfg, std::string const &property)
{
  auto const &m = cfg.mempool;
  if (property == "zti")
  {
    return estimate_zti(cfg.mechanism, m, cfg.capacity, cfg.trials, cfg.seed).to_text();
  }
  if (property == "monotonicity")
  {
    if (!cfg.target)
    {
      throw ConfigError("monotonicity needs target = <tx id>");
    }
    return estimate_monotonicity(cfg.mechanism, m, cfg.capacity, *cfg.target, cfg.epsilons,
                                 cfg.trials, cfg.seed)
        .to_text();
  }
  if (property == "uic")
  {
    if (!cfg.user || cfg.bid_grid.empty())
    {
      throw ConfigError("uic needs user = <tx id> and bid_grid = ...");
    }
    return check_uic(cfg.mechanism, m, cfg.capacity, *cfg.user, cfg.bid_grid, cfg.trials, cfg.seed)
        .to_text();
  }
  if (property == "mic")
  {
    std::vector<double> grid = cfg.fake_bids.empty() ? std::vector<double>{0.0} : cfg.fake_bids;
    MicOptions          opts;
    opts.trials    = cfg.trials;
    opts.fake_size = cfg.fake_size;
    return search_mic_deviation(cfg.mechanism, m, cfg.capacity, cfg.fake_budget, grid, cfg.seed, opts)
        .to_text();
  }
  if (property == "cof")
  {
    auto const         r = empirical_cof(cfg.mechanism, m, cfg.capacity, cfg.trials, cfg.seed);
    std::ostringstream out;
    out << "property=cof\n";
    out << "opt_utility=" << format_sig(r.opt_utility, 10) << '\n';
    out << "mech_utility_mean=" << format_sig(r.mech_utility_mean, 10) << '\n';
    out << "cof=" << format_sig(r.cof, 10) << '\n';
    if (r.closed_form)
    {
      out << "closed_form=" << format_sig(*r.closed_form, 10) << '\n';
    }
    if (r.cov)
    {
      out << "cov=" << format_sig(*r.cov, 10) << '\n';
    }
    out << "trials=" << r.trials << "\n\n";
    return out.str();
  }
  throw ConfigError("unknown property '" + property + "' (expected zti, monotonicity, uic, mic, cof)");
}

}  // namespace tfm
