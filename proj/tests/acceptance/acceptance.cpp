// Acceptance suite: one PASS/FAIL line per criterion.
//
//   tfm_acceptance AC4      run one criterion
//   tfm_acceptance all      run every criterion
//
// Exit status is 0 only if every requested criterion passed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "tfm/alloc.hpp"
#include "tfm/audit.hpp"
#include "tfm/chain.hpp"
#include "tfm/cli.hpp"
#include "tfm/experiment.hpp"
#include "tfm/format.hpp"
#include "tfm/mech.hpp"
#include "tfm/rng.hpp"
#include "tfm/txpool.hpp"

using namespace tfm;

namespace {

// Tolerances, fixed by the criteria.
constexpr double kAc3RelTol       = 0.05;
constexpr double kAc4Sigmas       = 3.0;
constexpr double kAc5CofRelTol    = 0.05;
constexpr double kAc5CovRelTol    = 0.10;
constexpr double kAc6RevenueTol   = 0.03;
constexpr double kAc7CofRelTol    = 0.15;
constexpr double kAc7ZfiTol       = 0.10;
constexpr double kTrendSigmas     = 2.0;

struct Check
{
  std::string name;
  bool        ok = false;
  std::string detail;
};

struct Outcome
{
  std::vector<Check> checks;

  void add(std::string name, bool ok, std::string detail)
  {
    checks.push_back({std::move(name), ok, std::move(detail)});
  }
  bool passed() const
  {
    return std::all_of(checks.begin(), checks.end(), [](Check const &c) { return c.ok; });
  }
};

std::string fmt(double v, int digits = 4)
{
  return format_sig(v, digits);
}

Mempool five_tx_mempool()
{
  return Mempool({{0, 10, 10, 10}, {1, 10, 10, 10}, {2, 10, 5, 5}, {3, 10, 0, 0}, {4, 10, 0, 0}});
}

Mempool unit_bids(std::vector<double> const &bids)
{
  std::vector<Transaction> txs;
  for (std::size_t i = 0; i < bids.size(); ++i)
  {
    txs.push_back({i, 1.0, bids[i], bids[i]});
  }
  return Mempool(std::move(txs));
}

MechanismSpec with_auto_solver(MechanismSpec spec)
{
  spec.solver = {Solver::Auto, 24};
  return spec;
}

// Five-transaction instance under exact optimal allocation.
Outcome ac1()
{
  Outcome o;
  auto    m = five_tx_mempool();
  auto    a = optimal_allocate(m, 30, SolverOptions{Solver::Exact, 24});
  double  per_unit = 0.0;
  for (auto id : a.selected)
  {
    per_unit += m.at(id).bid;
  }
  o.add("selection", a.selected == std::vector<TxId>{0, 1, 2} && per_unit == 25.0,
        "selected " + std::to_string(a.count()) + " txs, per-unit fee sum " + fmt(per_unit));
  auto r = estimate_zti(MechanismSpec::fpa(), m, 30, 1000, 1);
  o.add("zti", r.verdict == Verdict::Violated, "zti " + to_string(r.verdict));
  return o;
}

// Split block with zero-fee filler never costs more than 1/alpha.
Outcome ac2()
{
  using Q = boost::rational<long long>;
  Outcome o;
  std::vector<Q> const alphas{Q(1, 4), Q(1, 2), Q(3, 4)};
  Rng                  rng(2024);
  int                  violations = 0, degenerate = 0;
  Q                    worst(0);

  auto exhaustive_opt = [](Mempool const &m, long long c) {
    long long best = 0;
    for (std::uint32_t mask = 0; mask < (1u << m.size()); ++mask)
    {
      long long size = 0, value = 0;
      for (std::size_t i = 0; i < m.size(); ++i)
      {
        if (mask & (1u << i))
        {
          ++size;
          value += static_cast<long long>(m[i].bid);
        }
      }
      if (size <= c)
      {
        best = std::max(best, value);
      }
    }
    return best;
  };

  for (int inst = 0; inst < 200; ++inst)
  {
    Q const   alpha = alphas[inst % 3];
    auto      n     = static_cast<std::size_t>(4 + rng.uniform_index(13));  // 4..16
    long long c     = 4 * static_cast<long long>(1 + rng.uniform_index(std::max<std::size_t>(1, n / 4)));
    std::vector<double> bids(n);
    for (auto &b : bids)
    {
      b = static_cast<double>(rng.uniform_index(11));
    }
    auto      m   = unit_bids(bids);
    long long opt = exhaustive_opt(m, c);
    auto      spec = MechanismSpec::bitcoinzf(boost::rational_cast<double>(alpha));
    auto      out  = run_mechanism(spec, m, static_cast<double>(c), {}, derive_seed(7, inst));
    auto      mech = static_cast<long long>(std::llround(out.miner_utility));
    if (static_cast<double>(mech) != out.miner_utility)
    {
      ++violations;  // integer bids must give an integer utility
      continue;
    }
    if (opt == 0)
    {
      ++degenerate;
      continue;
    }
    Q cof(opt, mech == 0 ? 1 : mech);
    if (mech == 0 || cof > 1 / alpha)
    {
      ++violations;
    }
    worst = std::max(worst, cof * alpha);
  }
  o.add("bound", violations == 0,
        "200 instances, " + std::to_string(violations) + " above 1/alpha, max cof*alpha = " +
            std::to_string(worst.numerator()) + "/" + std::to_string(worst.denominator()) +
            (degenerate ? ", " + std::to_string(degenerate) + " zero-OPT skipped" : ""));

  int exact = 0, total = 0;
  for (auto alpha : alphas)
  {
    for (long long c : {4LL, 8LL, 12LL})
    {
      for (std::size_t n : {static_cast<std::size_t>(c), static_cast<std::size_t>(c + 3), std::size_t(16)})
      {
        ++total;
        auto      m    = unit_bids(std::vector<double>(n, 7.0));
        long long opt  = exhaustive_opt(m, c);
        auto      spec = MechanismSpec::bitcoinzf(boost::rational_cast<double>(alpha));
        auto      out  = run_mechanism(spec, m, static_cast<double>(c), {}, 1);
        auto      mech = static_cast<long long>(std::llround(out.miner_utility));
        if (mech > 0 && Q(opt, mech) == 1 / alpha)
        {
          ++exact;
        }
      }
    }
  }
  o.add("equality", exact == total,
        "all-equal bids: " + std::to_string(exact) + "/" + std::to_string(total) + " exactly 1/alpha");
  return o;
}

// Softmax worst-case bound.
Outcome ac3()
{
  Outcome             o;
  std::size_t const   n = 100, c = 10;
  double const        b = 5, gamma = 1;
  std::vector<double> bids(n, 0.0);
  std::fill(bids.begin(), bids.begin() + c, b);
  auto         spec   = with_auto_solver(MechanismSpec::stfm(gamma));
  auto         r      = empirical_cof(spec, unit_bids(bids), static_cast<double>(c), 100000, 3);
  double const bound  = stfm_cof_bound(n, c, b, gamma);
  double const rel    = std::abs(r.cof - bound) / bound;
  o.add("worst-case", rel <= kAc3RelTol,
        "empirical " + fmt(r.cof) + " vs bound " + fmt(bound) + " (rel. diff " + fmt(rel, 3) + ")");

  Rng    rng(33);
  int    exceeded = 0;
  double max_ratio = 0.0;
  for (int inst = 0; inst < 50; ++inst)
  {
    auto        count = static_cast<std::size_t>(20 + rng.uniform_index(81));
    std::size_t cap   = std::max<std::size_t>(1, count / (2 + rng.uniform_index(9)));
    auto        m     = sample_mempool(count, BidDistribution::uniform(0, 5), BidDistribution::constant(1),
                                       rng.next_u64());
    double bmax = 0.0;
    for (auto const &tx : m)
    {
      bmax = std::max(bmax, tx.bid);
    }
    double const g   = 0.5 + 4.5 * rng.uniform01();
    auto         est = empirical_cof(with_auto_solver(MechanismSpec::stfm(g)), m,
                                     static_cast<double>(cap), 2000, derive_seed(34, inst));
    double const bnd   = stfm_cof_bound(count, cap, bmax, g);
    double const se    = est.opt_utility * est.mech_utility_sd / std::sqrt(double(est.trials)) /
                      (est.mech_utility_mean * est.mech_utility_mean);
    if (est.cof > bnd + 2.0 * se)
    {
      ++exceeded;
    }
    max_ratio = std::max(max_ratio, est.cof / bnd);
  }
  o.add("random", exceeded == 0,
        "50 random instances, " + std::to_string(exceeded) + " above bound, max cof/bound " +
            fmt(max_ratio, 3));
  return o;
}

// Hash-threshold coin toss frequency.
Outcome ac4()
{
  Outcome             o;
  std::size_t const   blocks = 10000;
  UInt256 const       target = UInt256(1) << 240;
  std::vector<Hash32> hashes;
  hashes.reserve(blocks);
  Difficulty mining{target, 1, 2};
  Hash32     parent{};
  for (std::size_t h = 0; h < blocks; ++h)
  {
    auto rand_root = hash_bytes("rand" + std::to_string(h));
    auto opt_root  = hash_bytes("opt" + std::to_string(h));
    auto block     = mine_block(parent, rand_root, opt_root, h, mining, derive_seed(44, h));
    parent         = block.block_hash;
    hashes.push_back(block.block_hash);
  }
  for (auto [num, den] : {std::pair<std::uint64_t, std::uint64_t>{1, 4}, {1, 2}, {3, 4}})
  {
    Difficulty  d{target, num, den};
    std::size_t zeros = 0;
    for (auto const &h : hashes)
    {
      zeros += coin_toss(h, d) == 0 ? 1 : 0;
    }
    double const phi  = d.phi();
    double const freq = double(zeros) / double(blocks);
    double const tol  = kAc4Sigmas * std::sqrt(phi * (1 - phi) / double(blocks));
    o.add("phi=" + fmt(phi, 2), std::abs(freq - phi) <= tol,
          "phi " + fmt(phi, 2) + ": " + fmt(freq) + " (tol " + fmt(tol, 2) + ")");
  }
  return o;
}

// Two-point revenue mixture.
Outcome ac5()
{
  Outcome o;
  auto    m = sample_mempool(200, BidDistribution::censored_gaussian(4, 3), BidDistribution::constant(1), 5);
  std::ostringstream cof_line, cov_line;
  bool               cof_ok = true, cov_ok = true;
  for (int k = 1; k <= 9; ++k)
  {
    double const phi = k / 10.0;
    auto r = empirical_cof(with_auto_solver(MechanismSpec::rtfm(phi)), m, 20, 10000, derive_seed(55, k));
    double const cof_ref = rtfm_cof(phi);
    double const cov_ref = rtfm_cov(phi);
    double const cov     = r.cov.value_or(NAN);
    bool const   a       = std::abs(r.cof - cof_ref) <= kAc5CofRelTol * cof_ref;
    bool const   b       = std::abs(cov - cov_ref) <= kAc5CovRelTol * cov_ref;
    cof_ok &= a;
    cov_ok &= b;
    cof_line << ' ' << fmt(phi, 1) << ':' << fmt(r.cof, 4) << '/' << fmt(cof_ref, 4);
    cov_line << ' ' << fmt(phi, 1) << ':' << fmt(cov, 3) << '/' << fmt(cov_ref, 3);
  }
  o.add("cof", cof_ok, "cof (empirical/closed form)" + cof_line.str());
  o.add("cov", cov_ok, "cov (sample/formula)" + cov_line.str());
  return o;
}

bool non_increasing(std::vector<SweepRow> const &rows, double SweepRow::*v, double SweepRow::*se)
{
  for (std::size_t i = 1; i < rows.size(); ++i)
  {
    double const margin = kTrendSigmas * std::hypot(rows[i].*se, rows[i - 1].*se);
    if (rows[i].*v > rows[i - 1].*v + margin)
    {
      return false;
    }
  }
  return true;
}

bool non_decreasing(std::vector<SweepRow> const &rows, double SweepRow::*v, double SweepRow::*se)
{
  for (std::size_t i = 1; i < rows.size(); ++i)
  {
    double const margin = kTrendSigmas * std::hypot(rows[i].*se, rows[i - 1].*se);
    if (rows[i].*v < rows[i - 1].*v - margin)
    {
      return false;
    }
  }
  return true;
}

// Revenue and zero-fee inclusion across phi.
Outcome ac6()
{
  Outcome o;
  auto    cfg  = ExperimentConfig::rtfm_defaults();
  auto    rows = run_rtfm_sweep(cfg);
  double  worst = 0.0;
  for (auto const &r : rows)
  {
    worst = std::max(worst, std::abs(r.normalized_revenue - (1.0 - r.sweep_value)));
  }
  o.add("revenue", worst <= kAc6RevenueTol, "max |revenue - (1-phi)| = " + fmt(worst, 3));
  bool const zff = non_decreasing(rows, &SweepRow::zero_fee_fraction, &SweepRow::zff_stderr);
  o.add("zero-fee", zff,
        "zero-fee fraction " + fmt(rows.front().zero_fee_fraction, 3) + " -> " +
            fmt(rows.back().zero_fee_fraction, 3) + (zff ? " non-decreasing" : " not monotone"));

  for (auto const &[label, dist] : {std::pair<std::string, BidDistribution>{"uniform", BidDistribution::uniform(0, 1)},
                                    {"exponential", BidDistribution::exponential(1.5)}})
  {
    auto alt     = cfg;
    alt.bid_dist = dist;
    auto r       = run_rtfm_sweep(alt);
    bool rev     = non_increasing(r, &SweepRow::normalized_revenue, &SweepRow::revenue_stderr);
    bool zf      = non_decreasing(r, &SweepRow::zero_fee_fraction, &SweepRow::zff_stderr);
    bool zp      = non_decreasing(r, &SweepRow::zero_payment_fraction, &SweepRow::zpf_stderr);
    o.add(label, rev && zf && zp,
          label + (rev && zf && zp ? " trends hold" : " trend broken") + " (revenue " +
              fmt(r.front().normalized_revenue, 3) + "->" + fmt(r.back().normalized_revenue, 3) + ")");
  }
  return o;
}

// Softmax sweep spot values.
Outcome ac7()
{
  Outcome o;
  struct Dist
  {
    std::string     name;
    BidDistribution bids;
    double          cof_at_5;
    double          zfi_plateau;
  };
  std::vector<Dist> const dists{
      {"D1", BidDistribution::uniform(0, 5), 1.88, 0.3},
      {"D2", BidDistribution::truncated_gaussian(5, 4), 1.63, 0.3},
      {"D3", BidDistribution::exponential(1), 2.93, 0.6},
  };
  std::ostringstream spot, low, zfi;
  bool               spot_ok = true, low_ok = true, zfi_ok = true;
  for (auto const &d : dists)
  {
    auto cfg         = ExperimentConfig::stfm_defaults();
    cfg.bid_dist     = d.bids;
    cfg.sweep_values = {0.1, 0.5, 0.9, 5.0, 10.0, 20.0, 50.0};
    auto rows        = run_stfm_sweep(cfg);
    double const c5  = rows[3].cof;
    spot_ok &= std::abs(c5 - d.cof_at_5) <= kAc7CofRelTol * d.cof_at_5;
    spot << ' ' << d.name << ':' << fmt(c5, 3) << '/' << fmt(d.cof_at_5, 3);
    double max_low = 0.0;
    for (int i = 0; i < 3; ++i)
    {
      max_low = std::max(max_low, rows[i].cof);
    }
    low_ok &= max_low < 1.5;
    low << ' ' << d.name << ':' << fmt(max_low, 3);

    auto ratio_cfg        = cfg;
    ratio_cfg.sweep_param = SweepParam::SizeRatio;
    ratio_cfg.sweep_values = {1.1, 1.3, 2.0, 4.0, 10.0};
    double lo = 1.0, hi = 0.0;
    for (double g : {10.0, 20.0, 50.0})
    {
      ratio_cfg.mechanism = MechanismSpec::stfm(g);
      for (auto const &r : run_stfm_sweep(ratio_cfg))
      {
        lo = std::min(lo, r.zfi);
        hi = std::max(hi, r.zfi);
        zfi_ok &= std::abs(r.zfi - d.zfi_plateau) <= kAc7ZfiTol;
      }
    }
    zfi << ' ' << d.name << ":[" << fmt(lo, 3) << ',' << fmt(hi, 3) << "]/" << fmt(d.zfi_plateau, 2);
  }
  o.add("cof@5", spot_ok, "cof at gamma 5 (sweep/expected)" + spot.str());
  o.add("cof<1.5", low_ok, "max cof for gamma<1" + low.str());
  o.add("zfi", zfi_ok, "zfi range for gamma>5 (observed/expected)" + zfi.str());
  return o;
}

// Incentive verdicts.
Outcome ac8()
{
  Outcome o;

  {
    std::vector<double> grid{0};
    auto r = search_mic_deviation(MechanismSpec::bitcoinf(0.75, 1), unit_bids({5, 5, 5, 5, 5}), 8, 2,
                                  grid, 8, {2000, 1.0});
    bool ok = r.verdict == Verdict::Violated && r.witness && r.witness->fakes.size() == 2;
    o.add("bitcoinf-mic", ok, "BitcoinF mic " + to_string(r.verdict));
  }

  {
    Rng                 rng(88);
    std::vector<double> grid{0, 1, 5};
    int                 fpa_bad = 0, rtfm_bad = 0;
    for (int inst = 0; inst < 20; ++inst)
    {
      auto   n = static_cast<std::size_t>(3 + rng.uniform_index(6));  // 3..8
      auto   m = sample_mempool(n, BidDistribution::uniform(0, 5), BidDistribution::exponential(1), rng.next_u64());
      double c = m.total_size() / 2.0;
      if (search_mic_deviation(MechanismSpec::fpa(), m, c, 2, grid, inst).verdict != Verdict::Satisfied)
        ++fpa_bad;
      if (search_mic_deviation(MechanismSpec::rtfm(0.3), m, c, 2, grid, inst).verdict != Verdict::Satisfied)
        ++rtfm_bad;
    }
    o.add("fpa-mic", fpa_bad == 0, "FPA mic deviations on " + std::to_string(fpa_bad) + "/20");
    o.add("rtfm-mic", rtfm_bad == 0, "rTFM mic deviations on " + std::to_string(rtfm_bad) + "/20");
  }

  {
    Mempool             m({{0, 1, 5, 5}, {1, 1, 2, 2}});
    std::vector<double> grid{3, 4, 5};
    auto                r = check_uic(MechanismSpec::fpa(), m, 1, 0, grid, 100, 1);
    o.add("fpa-uic", r.verdict == Verdict::Violated, "FPA uic " + to_string(r.verdict));
  }

  {
    double const lambda = 2;
    Mempool      m({{0, 1, 5, 5}, {1, 1, 4, 4}, {2, 1, 3, 3}, {3, 1, 1, 1}, {4, 1, 0, 0}});
    double const c = 2;
    bool const   low = is_excessively_low(lambda, m, c);
    std::vector<double> grid{2, 3, 4, 5, 6};
    auto r = check_uic(MechanismSpec::eip1559(lambda), m, c, 0, grid, 100, 1);
    o.add("eip1559-uic", !low && r.verdict == Verdict::Satisfied,
          "EIP-1559 uic " + to_string(r.verdict) + (low ? " (lambda excessively low)" : "") +
              (r.witness ? " [" + r.note + "]" : ""));
  }

  {
    std::vector<double> grid{0};
    auto r = search_mic_deviation(MechanismSpec::stfm(1), unit_bids({5, 4, 3, 2, 1, 0, 0}), 3, 1,
                                  grid, 9, {4000, 1.0});
    o.add("stfm-mic", r.verdict == Verdict::Violated, "STFM mic " + to_string(r.verdict));
  }
  return o;
}

// Fairness properties.
Outcome ac9()
{
  Outcome             o;
  auto const          m = unit_bids({4, 3, 2, 1, 0, 0});
  double const        c = 3;
  std::vector<double> eps{0.5, 1.0};
  TxId const          target = 3;
  struct Case
  {
    std::string   name;
    MechanismSpec spec;
    bool          zti;
    bool          mono;
  };
  for (auto const &k : {Case{"STFM", MechanismSpec::stfm(1), true, true},
                        Case{"rTFM", MechanismSpec::rtfm(0.3), true, true},
                        Case{"EIP-1559", MechanismSpec::eip1559(0.5), false, true},
                        Case{"Uniform", MechanismSpec::uniform(), true, false}})
  {
    auto z   = estimate_zti(k.spec, m, c, 10000, 91);
    auto mo  = estimate_monotonicity(k.spec, m, c, target, eps, 10000, 92);
    bool zok = k.zti ? z.verdict == Verdict::Satisfied : z.verdict == Verdict::Violated;
    bool mok = k.mono ? mo.verdict == Verdict::Satisfied : mo.verdict == Verdict::Violated;
    o.add(k.name, zok && mok,
          k.name + " zti " + to_string(z.verdict) + ", monotonicity " + to_string(mo.verdict));
  }
  return o;
}

std::string run_cli(std::vector<std::string> args)
{
  args.insert(args.begin(), "tfmlab");
  std::vector<char const *> argv;
  for (auto const &a : args)
  {
    argv.push_back(a.c_str());
  }
  std::ostringstream out, err;
  if (cli_main(static_cast<int>(argv.size()), argv.data(), out, err) != 0)
  {
    throw std::runtime_error("tfmlab failed: " + err.str());
  }
  return out.str();
}

std::string slurp(std::filesystem::path const &p)
{
  std::ifstream      in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Reproducibility and hash vectors.
Outcome ac10()
{
  Outcome o;
  bool    vectors =
      to_hex(hash_bytes("")) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855" &&
      to_hex(hash_bytes("abc")) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad";
  o.add("sha256", vectors, vectors ? "SHA-256 vectors match" : "SHA-256 vectors differ");

  auto dir = std::filesystem::temp_directory_path() / "tfm_acceptance_ac10";
  std::filesystem::create_directories(dir);
  auto cfg = dir / "run.cfg";
  std::ofstream(cfg) << "mechanism = rtfm\nphi = 0.4\nn = 300\ncapacity = 30\nvalues = 0,0.25,0.5,0.75,1\n"
                        "runs = 50\nseed = 11\nsolver = auto\n";

  std::vector<std::string> logs, csvs;
  for (int run = 0; run < 2; ++run)
  {
    auto log = dir / ("chain" + std::to_string(run) + ".log");
    auto csv = dir / ("sweep" + std::to_string(run) + ".csv");
    run_cli({"mine-demo", "--config", cfg.string(), "--blocks", "8", "--target-bits", "246", "--out", log.string()});
    run_cli({"sweep-rtfm", "--config", cfg.string(), "--jobs", run == 0 ? "1" : "4", "--out", csv.string()});
    logs.push_back(slurp(log));
    csvs.push_back(slurp(csv));
  }
  std::uintmax_t chain_bytes = logs[0].size();
  o.add("chain", !logs[0].empty() && logs[0] == logs[1],
        "chain log " + std::to_string(chain_bytes) + " bytes " + (logs[0] == logs[1] ? "identical" : "differs"));
  o.add("csv", !csvs[0].empty() && csvs[0] == csvs[1],
        "sweep csv " + std::to_string(csvs[0].size()) + " bytes " + (csvs[0] == csvs[1] ? "identical" : "differs"));

  std::istringstream in(logs[0]);
  auto               chain = read_chain_log(in);
  auto               diff  = difficulty_for_phi(0.4, UInt256(1) << 246);
  bool verified = !chain.empty() && std::all_of(chain.begin(), chain.end(), [&](MinedBlock const &b) {
    return verify_block(b, diff);
  });
  o.add("verify", verified, std::to_string(chain.size()) + " blocks verified");
  std::filesystem::remove_all(dir);
  return o;
}

std::map<std::string, std::function<Outcome()>> const kCriteria{
    {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5},
    {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}, {"AC10", ac10},
};

bool run_one(std::string const &id)
{
  auto const start = std::chrono::steady_clock::now();
  Outcome    outcome;
  try
  {
    outcome = kCriteria.at(id)();
  }
  catch (std::exception const &e)
  {
    outcome.add("error", false, std::string("exception: ") + e.what());
  }
  double const secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream line;
  line << id << ' ' << (outcome.passed() ? "PASS" : "FAIL") << " (" << fmt(secs, 3) << " s)";
  for (auto const &c : outcome.checks)
  {
    line << " | " << (c.ok ? "" : "[failed] ") << c.detail;
  }
  std::cout << line.str() << std::endl;
  return outcome.passed();
}

}  // namespace

int main(int argc, char **argv)
{
  std::vector<std::string> ids;
  for (int i = 1; i < argc; ++i)
  {
    std::string arg = argv[i];
    if (arg == "all")
    {
      for (int k = 1; k <= 10; ++k)
        ids.push_back("AC" + std::to_string(k));
    }
    else if (kCriteria.count(arg))
    {
      ids.push_back(arg);
    }
    else
    {
      std::cerr << "unknown criterion '" << arg << "'\n";
      return 2;
    }
  }
  if (ids.empty())
  {
    std::cerr << "usage: tfm_acceptance AC1..AC10 | all\n";
    return 2;
  }
  bool ok = true;
  for (auto const &id : ids)
  {
    ok &= run_one(id);
  }
  return ok ? 0 : 1;
}
