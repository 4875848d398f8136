#include "tfm/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "tfm/audit.hpp"
#include "tfm/chain.hpp"
#include "tfm/error.hpp"
#include "tfm/experiment.hpp"
#include "tfm/format.hpp"

namespace tfm {

namespace {

struct CommonFlags
{
  std::string                  config;
  std::optional<std::uint64_t> seed;
  std::string                  out;
};

void add_common(CLI::App *cmd, CommonFlags &flags, bool config_required)
{
  auto *opt = cmd->add_option("--config", flags.config, "Configuration file (key = value)");
  if (config_required)
  {
    opt->required();
  }
  cmd->add_option("--seed", flags.seed, "Base random seed");
  cmd->add_option("--out", flags.out, "Output path (default: standard output)");
}

/// Writes `text` to `path`, or to `out` when the path is empty.
void deliver(std::string const &text, std::string const &path, std::ostream &out)
{
  if (path.empty())
  {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file)
  {
    throw IoError(path, "cannot open for writing");
  }
  file << text;
  if (!file)
  {
    throw IoError(path, "write failed");
  }
}

struct SweepFlags
{
  CommonFlags                common;
  std::optional<std::size_t> jobs;
  std::optional<std::size_t> runs;
  std::string                plot_data;
};

void add_sweep(CLI::App *cmd, SweepFlags &flags)
{
  add_common(cmd, flags.common, false);
  cmd->add_option("--jobs", flags.jobs, "Concurrent sweep cells")->check(CLI::PositiveNumber);
  cmd->add_option("--runs", flags.runs, "Runs per sweep cell")->check(CLI::PositiveNumber);
  cmd->add_option("--plot-data", flags.plot_data, "Also write a whitespace table for plotting");
}

int run_sweep(SweepFlags const &flags, bool rtfm, std::ostream &out)
{
  ExperimentConfig cfg;
  if (flags.common.config.empty())
  {
    cfg = rtfm ? ExperimentConfig::rtfm_defaults() : ExperimentConfig::stfm_defaults();
  }
  else
  {
    cfg = ExperimentConfig::load(flags.common.config);
  }
  if (flags.common.seed)
    cfg.seed = *flags.common.seed;
  if (flags.jobs)
    cfg.jobs = *flags.jobs;
  if (flags.runs)
    cfg.runs = *flags.runs;
  if (!flags.common.out.empty())
    cfg.output_path = flags.common.out;
  if (!flags.plot_data.empty())
    cfg.plot_data_path = flags.plot_data;

  auto rows = rtfm ? run_rtfm_sweep(cfg) : run_stfm_sweep(cfg);
  if (cfg.output_path.empty())
  {
    emit_csv(rows, out);
  }
  else
  {
    emit_csv(rows, std::filesystem::path(cfg.output_path));
  }
  if (!cfg.plot_data_path.empty())
  {
    emit_plot_data(rows, std::filesystem::path(cfg.plot_data_path));
  }
  return 0;
}

struct MineFlags
{
  CommonFlags   common;
  std::size_t   blocks      = 5;
  double        phi         = 0.5;
  unsigned      target_bits = 240;
  std::size_t   n           = 20;
  double        capacity    = 5.0;
};

int run_mine(MineFlags const &flags, std::ostream &out, std::ostream &err)
{
  std::uint64_t   seed      = flags.common.seed.value_or(42);
  std::size_t     n         = flags.n;
  double          capacity  = flags.capacity;
  double          phi       = flags.phi;
  BidDistribution bids      = BidDistribution::censored_gaussian(4.0, 3.0);
  BidDistribution sizes     = BidDistribution::constant(1.0);
  SolverOptions   solver{Solver::Auto, 24};
  if (!flags.common.config.empty())
  {
    auto cfg = ExperimentConfig::load(flags.common.config);
    n        = cfg.n;
    capacity = cfg.capacity;
    bids     = cfg.bid_dist;
    sizes    = cfg.size_dist;
    solver   = cfg.mechanism.solver;
    if (auto const *r = std::get_if<RtfmRule>(&cfg.mechanism.allocation))
    {
      phi = r->phi;
    }
    if (!flags.common.seed)
    {
      seed = cfg.seed;
    }
  }
  if (flags.target_bits == 0 || flags.target_bits > 255)
  {
    throw ParameterError("target bits must lie in [1, 255]");
  }
  auto const difficulty = difficulty_for_phi(phi, UInt256(1) << flags.target_bits);

  std::vector<MinedBlock> chain;
  Hash32                  parent{};
  std::size_t             rand_count = 0;
  for (std::size_t h = 0; h < flags.blocks; ++h)
  {
    auto const m      = sample_mempool(n, bids, sizes, derive_seed(seed, 3 * h));
    auto const sample = rtfm_sample(m, capacity, derive_seed(seed, 3 * h + 1), solver);
    auto       block  = mine_block(parent, sample.rand_root, sample.opt_root, h, difficulty,
                                   derive_seed(seed, 3 * h + 2));
    parent            = block.block_hash;
    rand_count += block.toss == 0 ? 1 : 0;
    chain.push_back(block);
  }
  std::ostringstream log;
  write_chain_log(chain, log);
  deliver(log.str(), flags.common.out, out);
  err << "mined " << chain.size() << " blocks; uniformly sampled set confirmed in " << rand_count
      << '\n';
  return 0;
}

}  // namespace

int cli_main(int argc, char const *const *argv, std::ostream &out, std::ostream &err)
{
  CLI::App app{"Transaction fee mechanism laboratory", "tfmlab"};
  app.require_subcommand(1);

  SweepFlags rtfm_flags;
  auto      *sweep_rtfm = app.add_subcommand("sweep-rtfm", "Sweep rTFM over phi and write CSV");
  add_sweep(sweep_rtfm, rtfm_flags);

  SweepFlags stfm_flags;
  auto      *sweep_stfm =
      app.add_subcommand("sweep-stfm", "Sweep softmax TFM over gamma or size ratio and write CSV");
  add_sweep(sweep_stfm, stfm_flags);

  CommonFlags                audit_flags;
  std::string                property;
  std::optional<std::size_t> audit_trials;
  auto *audit = app.add_subcommand("audit", "Run one property auditor against a configured instance");
  add_common(audit, audit_flags, true);
  audit->add_option("--property", property, "zti, monotonicity, uic, mic or cof")
      ->required()
      ->check(CLI::IsMember({"zti", "monotonicity", "uic", "mic", "cof"}));
  audit->add_option("--trials", audit_trials, "Override the trial count")->check(CLI::PositiveNumber);

  MineFlags mine_flags;
  auto     *mine = app.add_subcommand("mine-demo", "Mine a short rTFM chain and print its log");
  add_common(mine, mine_flags.common, false);
  mine->add_option("--blocks", mine_flags.blocks, "Number of blocks")->check(CLI::PositiveNumber);
  mine->add_option("--phi", mine_flags.phi, "Coin-toss bias")->check(CLI::Range(0.0, 1.0));
  mine->add_option("--target-bits", mine_flags.target_bits, "Target difficulty 2^bits");
  mine->add_option("--n", mine_flags.n, "Mempool size")->check(CLI::PositiveNumber);
  mine->add_option("--capacity", mine_flags.capacity, "Block capacity");

  CommonFlags tune_flags;
  auto       *tune = app.add_subcommand("tune-gamma", "Search the softmax temperature for a target ratio");
  add_common(tune, tune_flags, true);

  try
  {
    app.parse(argc, argv);
  }
  catch (CLI::CallForHelp const &e)
  {
    out << app.help();
    return 0;
  }
  catch (CLI::ParseError const &e)
  {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try
  {
    if (*sweep_rtfm)
    {
      return run_sweep(rtfm_flags, true, out);
    }
    if (*sweep_stfm)
    {
      return run_sweep(stfm_flags, false, out);
    }
    if (*audit)
    {
      auto cfg = AuditConfig::load(audit_flags.config);
      if (audit_flags.seed)
        cfg.seed = *audit_flags.seed;
      if (audit_trials)
        cfg.trials = *audit_trials;
      deliver(run_audit(cfg, property), audit_flags.out, out);
      return 0;
    }
    if (*mine)
    {
      return run_mine(mine_flags, out, err);
    }
    if (*tune)
    {
      auto cfg = AuditConfig::load(tune_flags.config);
      if (tune_flags.seed)
        cfg.seed = *tune_flags.seed;
      double gamma = tune_gamma(cfg.mempool, cfg.capacity, cfg.alpha_target, cfg.phi_ratio,
                                cfg.gamma_lo, cfg.gamma_hi, cfg.trials, cfg.seed);
      auto   est   = estimate_gamma_ratio(cfg.mempool, cfg.capacity, cfg.alpha_target, gamma,
                                          cfg.trials, cfg.seed);
      std::ostringstream text;
      text << "gamma=" << format_sig(gamma, 8) << '\n'
           << "pr_cof=" << format_sig(est.pr_cof, 8) << '\n'
           << "pr_zf=" << format_sig(est.pr_zf, 8) << '\n';
      deliver(text.str(), tune_flags.out, out);
      return 0;
    }
  }
  catch (std::exception const &e)
  {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace tfm
