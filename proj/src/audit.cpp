#include "tfm/audit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "tfm/error.hpp"
#include "tfm/format.hpp"

namespace tfm {

std::string to_string(Property p)
{
  switch (p)
  {
  case Property::ZTi:
    return "zti";
  case Property::Monotonicity:
    return "monotonicity";
  case Property::UIC:
    return "uic";
  case Property::MIC:
    return "mic";
  }
  return "unknown";
}

std::string to_string(Verdict v)
{
  switch (v)
  {
  case Verdict::Satisfied:
    return "satisfied";
  case Verdict::Violated:
    return "violated";
  case Verdict::Inconclusive:
    return "inconclusive";
  }
  return "unknown";
}

namespace {

std::string witness_summary(Witness const &w)
{
  std::ostringstream out;
  char const        *sep = "";
  if (w.tx)
  {
    out << sep << "tx=" << *w.tx;
    sep = ";";
  }
  if (w.bid)
  {
    out << sep << "bid=" << format_double(*w.bid);
    sep = ";";
  }
  if (w.epsilon)
  {
    out << sep << "epsilon=" << format_double(*w.epsilon);
    sep = ";";
  }
  if (!w.fakes.empty())
  {
    out << sep << "fakes=";
    for (std::size_t i = 0; i < w.fakes.size(); ++i)
    {
      out << (i ? " " : "") << w.fakes[i].id << ':' << format_double(w.fakes[i].size) << ':'
          << format_double(w.fakes[i].bid);
    }
    sep = ";";
  }
  out << sep << "honest=" << format_double(w.honest) << ";deviating=" << format_double(w.deviating);
  return out.str();
}

std::string csv_field(std::string const &s)
{
  if (s.find_first_of(",\"\n") == std::string::npos)
  {
    return s;
  }
  std::string out = "\"";
  for (char c : s)
  {
    out += c;
    if (c == '"')
    {
      out += '"';
    }
  }
  return out + "\"";
}

}  // namespace

std::string PropertyReport::to_text() const
{
  std::ostringstream out;
  out << "property=" << to_string(property) << '\n';
  out << "verdict=" << to_string(verdict) << '\n';
  out << "trials=" << trials << '\n';
  if (witness)
  {
    out << "witness=" << witness_summary(*witness) << '\n';
    if (!witness->detail.empty())
    {
      out << "witness_detail=" << witness->detail << '\n';
    }
  }
  if (!note.empty())
  {
    out << "note=" << note << '\n';
  }
  out << '\n';
  return out.str();
}

std::string PropertyReport::csv_header()
{
  return "property,verdict,trials,witness,note";
}

std::string PropertyReport::to_csv_row() const
{
  std::string w;
  if (witness)
  {
    w = witness_summary(*witness);
    if (!witness->detail.empty())
    {
      w += ";detail=" + witness->detail;
    }
  }
  return to_string(property) + ',' + to_string(verdict) + ',' + std::to_string(trials) + ',' +
         csv_field(w) + ',' + csv_field(note);
}

namespace {

void require_trials(std::size_t trials)
{
  if (trials == 0)
  {
    throw ParameterError("trials must be at least 1");
  }
}

bool equal_sizes(Mempool const &m)
{
  return std::all_of(m.begin(), m.end(), [&](Transaction const &t) { return t.size == m[0].size; });
}

struct MeanSe
{
  double mean = 0.0;
  double se   = 0.0;
  double sd   = 0.0;
};

MeanSe mean_se(std::span<double const> xs)
{
  MeanSe r;
  if (xs.empty())
  {
    return r;
  }
  double sum = 0.0;
  for (double x : xs)
  {
    sum += x;
  }
  r.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1)
  {
    double ss = 0.0;
    for (double x : xs)
    {
      ss += (x - r.mean) * (x - r.mean);
    }
    r.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    r.se = r.sd / std::sqrt(static_cast<double>(xs.size()));
  }
  return r;
}

double tolerance(double v)
{
  return 1e-9 * std::max(1.0, std::abs(v));
}

/// Miner utility of publishing exactly `ids` out of `pool`.
double set_utility(MechanismSpec const &spec, Mempool const &pool, std::span<TxId const> ids)
{
  double lowest = std::numeric_limits<double>::infinity();
  for (auto id : ids)
  {
    lowest = std::min(lowest, pool.at(id).bid);
  }
  double total = 0.0;
  for (auto id : ids)
  {
    auto const &tx = pool.at(id);
    auto        pb = apply_payment_rule(spec, tx, lowest);
    total += tx.fake ? -tx.size * pb.burn : tx.size * pb.payment;
  }
  return total;
}

/// The optimal set the mechanism itself would pick (opt branch for rTFM).
AllocationResult intended_optimum(MechanismSpec const &spec, Mempool const &pool, double capacity)
{
  auto candidates = eligible_candidates(spec, pool);
  auto obj        = miner_objective(spec, candidates);
  return optimal_allocate(candidates, capacity, obj.payment, obj.burn, spec.solver);
}

bool included_by_optimum(MechanismSpec const &spec, Mempool const &m, double capacity, TxId target)
{
  return intended_optimum(spec, m, capacity).contains(target);
}

std::vector<std::vector<double>> fake_multisets(std::vector<double> const &values, std::size_t budget)
{
  std::vector<std::vector<double>> out;
  std::vector<double>              current;
  std::function<void(std::size_t)> rec = [&](std::size_t start) {
    out.push_back(current);
    if (current.size() == budget)
    {
      return;
    }
    for (std::size_t i = start; i < values.size(); ++i)
    {
      current.push_back(values[i]);
      rec(i);
      current.pop_back();
    }
  };
  rec(0);
  return out;
}

}  // namespace

PropertyReport estimate_zti(MechanismSpec const &spec, Mempool const &m, double capacity,
                            std::size_t trials, std::uint64_t seed)
{
  require_trials(trials);
  spec.validate();
  std::vector<Transaction> zero;
  for (auto const &tx : m)
  {
    if (!tx.fake && tx.bid == 0.0)
    {
      zero.push_back(tx);
    }
  }
  if (zero.empty())
  {
    throw PreconditionError("zero-fee inclusion needs at least one zero-bid transaction");
  }

  PropertyReport report;
  report.property = Property::ZTi;

  bool const rtfm = std::holds_alternative<RtfmRule>(spec.allocation);
  if (spec.payment == PaymentRule::PostedPrice && spec.lambda > 0.0 && !rtfm)
  {
    report.verdict = Verdict::Violated;
    report.trials  = 0;
    Witness w;
    w.tx     = zero.front().id;
    w.bid    = 0.0;
    w.detail = "b_t = 0 < lambda = " + format_double(spec.lambda) +
               ": filtered before allocation, so Pr(t in B) = 0";
    report.witness = w;
    report.note    = "analytic certificate";
    return report;
  }

  std::vector<Transaction> fits;
  for (auto const &tx : zero)
  {
    if (tx.size <= capacity)
    {
      fits.push_back(tx);
    }
  }
  std::string skipped;
  if (fits.size() < zero.size())
  {
    skipped = "; " + std::to_string(zero.size() - fits.size()) +
              " zero-fee transaction(s) larger than the block ignored";
  }
  if (fits.empty())
  {
    report.verdict = Verdict::Inconclusive;
    report.note    = "no zero-fee transaction fits in the block" + skipped;
    return report;
  }

  if (std::holds_alternative<OptimalRule>(spec.allocation))
  {
    auto outcome  = run_mechanism(spec, m, capacity, {}, seed);
    report.trials = 1;
    for (auto const &tx : fits)
    {
      if (!outcome.allocation.contains(tx.id))
      {
        report.verdict = Verdict::Violated;
        Witness w;
        w.tx     = tx.id;
        w.bid    = 0.0;
        w.detail = "deterministic optimal allocation excludes it, so Pr(t in B) = 0";
        report.witness = w;
        report.note    = "analytic certificate" + skipped;
        return report;
      }
    }
    report.verdict = Verdict::Satisfied;
    report.note    = "deterministic allocation includes every zero-fee transaction" + skipped;
    return report;
  }

  std::vector<std::size_t> counts(fits.size(), 0);
  std::size_t              missing = fits.size();
  std::size_t              t       = 0;
  for (; t < trials && missing > 0; ++t)
  {
    auto outcome = run_mechanism(spec, m, capacity, {}, derive_seed(seed, t));
    for (std::size_t i = 0; i < fits.size(); ++i)
    {
      if (outcome.allocation.contains(fits[i].id) && counts[i]++ == 0)
      {
        --missing;
      }
    }
  }
  report.trials = t;
  if (missing == 0)
  {
    report.verdict = Verdict::Satisfied;
    report.note    = "every fitting zero-fee transaction was included at least once in " +
                  std::to_string(t) + " runs" + skipped;
    return report;
  }
  report.verdict = Verdict::Inconclusive;
  std::ostringstream table;
  table << "inclusion counts over " << t << " runs:";
  for (std::size_t i = 0; i < fits.size(); ++i)
  {
    table << ' ' << fits[i].id << '=' << counts[i];
  }
  report.note = table.str() + skipped;
  return report;
}

PropertyReport estimate_monotonicity(MechanismSpec const &spec, Mempool const &m, double capacity,
                                     TxId target, std::span<double const> epsilons,
                                     std::size_t trials, std::uint64_t seed)
{
  require_trials(trials);
  spec.validate();
  double const base = m.at(target).bid;
  if (epsilons.empty())
  {
    throw ParameterError("at least one epsilon is required");
  }
  for (double e : epsilons)
  {
    if (!(e > 0.0) || !std::isfinite(e))
    {
      throw ParameterError("epsilons must be positive");
    }
  }

  PropertyReport report;
  report.property = Property::Monotonicity;

  if (std::holds_alternative<OptimalRule>(spec.allocation))
  {
    bool const at_base = included_by_optimum(spec, m, capacity, target);
    report.trials      = 1;
    for (double e : epsilons)
    {
      bool const raised = included_by_optimum(spec, m.with_bid(target, base + e), capacity, target);
      if (at_base && !raised)
      {
        report.verdict = Verdict::Violated;
        Witness w;
        w.tx        = target;
        w.bid       = base + e;
        w.epsilon   = e;
        w.honest    = 1.0;
        w.deviating = 0.0;
        w.detail    = "raising the bid removed the transaction from the optimal block";
        report.witness = w;
        return report;
      }
    }
    report.verdict = Verdict::Satisfied;
    report.note    = "knapsack dominance: raising a bid only raises the value of blocks containing "
                     "it (checked on this instance for every epsilon)";
    return report;
  }

  if (auto const *rt = std::get_if<RtfmRule>(&spec.allocation))
  {
    bool const at_base = included_by_optimum(spec, m, capacity, target);
    report.trials      = 1;
    for (double e : epsilons)
    {
      bool const raised = included_by_optimum(spec, m.with_bid(target, base + e), capacity, target);
      if (at_base && !raised && rt->phi < 1.0)
      {
        report.verdict = Verdict::Violated;
        Witness w;
        w.tx        = target;
        w.bid       = base + e;
        w.epsilon   = e;
        w.detail    = "raising the bid removed the transaction from the optimal set";
        report.witness = w;
        return report;
      }
    }
    report.verdict = Verdict::Satisfied;
    report.note    = "rand-branch inclusion does not depend on bids; opt-branch inclusion is "
                     "non-decreasing in the bid (checked for every epsilon)";
    return report;
  }

  // Monte Carlo arms with common random numbers.
  std::size_t const target_pos = m.position(target).value();
  auto probability = [&](Mempool const &pool) {
    std::size_t hits = 0;
    for (std::size_t t = 0; t < trials; ++t)
    {
      if (run_mechanism(spec, pool, capacity, {}, derive_seed(seed, t)).allocation.contains(target))
      {
        ++hits;
      }
    }
    return static_cast<double>(hits) / static_cast<double>(trials);
  };
  double const p0 = probability(m);
  report.trials   = trials;

  bool const uniform = std::holds_alternative<UniformRule>(spec.allocation);
  bool const softmax_certificate =
      std::holds_alternative<SoftmaxRule>(spec.allocation) && equal_sizes(m);

  std::ostringstream note;
  note << "P(in B | b=" << format_double(base) << ")=" << format_double(p0);
  bool all_increase = true;
  for (double e : epsilons)
  {
    auto const   raised_pool = m.with_bid(target, base + e);
    double const p1          = probability(raised_pool);
    double const n           = static_cast<double>(trials);
    double const se          = std::sqrt(p0 * (1.0 - p0) / n + p1 * (1.0 - p1) / n);
    note << "; eps=" << format_double(e) << ": " << format_double(p1);

    Witness w;
    w.tx        = target;
    w.bid       = base + e;
    w.epsilon   = e;
    w.honest    = p0;
    w.deviating = p1;

    if (uniform)
    {
      w.detail       = "uniform allocation ignores bids: the inclusion probability cannot increase";
      report.verdict = Verdict::Violated;
      report.witness = w;
      report.note    = note.str();
      return report;
    }
    if (p0 - p1 > 2.0 * se && p0 > p1)
    {
      w.detail       = "inclusion probability dropped by more than 2 pooled standard errors";
      report.verdict = Verdict::Violated;
      report.witness = w;
      report.note    = note.str();
      return report;
    }
    if (softmax_certificate)
    {
      double const gamma = std::get<SoftmaxRule>(spec.allocation).gamma;
      auto const   d0    = stfm_first_draw_distribution(m, gamma);
      auto const   d1    = stfm_first_draw_distribution(raised_pool, gamma);
      if (!(d1[target_pos] > d0[target_pos]))
      {
        all_increase = false;
      }
      continue;
    }
    if (!(p1 - p0 > 2.0 * se && p1 > p0))
    {
      all_increase = false;
    }
  }
  report.note = note.str();
  if (all_increase)
  {
    report.verdict = Verdict::Satisfied;
    if (softmax_certificate)
    {
      report.note += "; equal sizes: first-draw softmax probability strictly increases in the bid";
    }
    return report;
  }
  report.verdict = Verdict::Inconclusive;
  return report;
}

PropertyReport check_uic(MechanismSpec const &spec, Mempool const &m, double capacity, TxId user,
                         std::span<double const> bid_grid, std::size_t trials, std::uint64_t seed)
{
  require_trials(trials);
  spec.validate();
  double const theta = m.at(user).valuation;
  auto const   truth = std::find(bid_grid.begin(), bid_grid.end(), theta);
  if (truth == bid_grid.end())
  {
    throw PreconditionError("bid grid must contain the truthful bid " + format_double(theta));
  }
  bool const sampled = !std::holds_alternative<OptimalRule>(spec.allocation);
  std::size_t const runs = sampled ? trials : 1;

  std::vector<MeanSe> arms;
  arms.reserve(bid_grid.size());
  std::vector<double> utilities(runs);
  for (double bid : bid_grid)
  {
    if (!(bid >= 0.0) || !std::isfinite(bid))
    {
      throw ParameterError("grid bids must be finite and non-negative");
    }
    auto pool = m.with_bid(user, bid);
    for (std::size_t t = 0; t < runs; ++t)
    {
      utilities[t] = run_mechanism(spec, pool, capacity, {}, derive_seed(seed, t)).user_utilities.at(user);
    }
    arms.push_back(mean_se(utilities));
  }

  auto const truth_idx = static_cast<std::size_t>(truth - bid_grid.begin());
  auto const honest    = arms[truth_idx];

  PropertyReport report;
  report.property = Property::UIC;
  report.trials   = runs;

  std::optional<std::size_t> best;
  double                     best_gap = 0.0;
  std::ostringstream         note;
  note << "expected utility by bid:";
  for (std::size_t i = 0; i < arms.size(); ++i)
  {
    note << ' ' << format_double(bid_grid[i]) << "->" << format_sig(arms[i].mean, 6);
    if (i == truth_idx)
    {
      continue;
    }
    double const margin = sampled ? 2.0 * std::sqrt(honest.se * honest.se + arms[i].se * arms[i].se)
                                  : 0.0;
    double const gap = arms[i].mean - honest.mean;
    if (gap > margin + tolerance(honest.mean) && (!best || gap > best_gap))
    {
      best     = i;
      best_gap = gap;
    }
  }
  report.note = note.str();
  if (best)
  {
    report.verdict = Verdict::Violated;
    Witness w;
    w.tx        = user;
    w.bid       = bid_grid[*best];
    w.honest    = honest.mean;
    w.deviating = arms[*best].mean;
    w.detail    = "bidding " + format_double(bid_grid[*best]) + " instead of the valuation " +
               format_double(theta) + " raises expected utility";
    report.witness = w;
    return report;
  }
  report.verdict = Verdict::Satisfied;
  report.note += " (truthful bid is best on this grid)";
  return report;
}

double best_subset_utility(MechanismSpec const &spec, Mempool const &pool, double capacity)
{
  spec.validate();
  auto candidates = eligible_candidates(spec, pool);
  if (spec.payment == PaymentRule::SecondPriceLowestWinning)
  {
    std::size_t const n = candidates.size();
    if (n > 20)
    {
      throw LimitError("subset enumeration limited to 20 transactions");
    }
    double            best = 0.0;
    std::vector<TxId> ids;
    for (std::uint64_t mask = 1; mask < (std::uint64_t(1) << n); ++mask)
    {
      ids.clear();
      double size = 0.0;
      for (std::size_t i = 0; i < n; ++i)
      {
        if (mask & (std::uint64_t(1) << i))
        {
          ids.push_back(candidates[i].id);
          size += candidates[i].size;
        }
      }
      if (size <= capacity)
      {
        best = std::max(best, set_utility(spec, candidates, ids));
      }
    }
    return best;
  }
  if (candidates.size() > spec.solver.exhaustive_limit)
  {
    throw LimitError("exact deviation search limited to " +
                     std::to_string(spec.solver.exhaustive_limit) + " transactions");
  }
  auto          obj = miner_objective(spec, candidates);
  SolverOptions exact{Solver::Exact, spec.solver.exhaustive_limit};
  auto          a = optimal_allocate(candidates, capacity, obj.payment, obj.burn, exact);
  return allocation_objective(candidates, a, obj.payment, obj.burn);
}

PropertyReport search_mic_deviation(MechanismSpec const &spec, Mempool const &m, double capacity,
                                    std::size_t fake_budget, std::span<double const> fake_bid_grid,
                                    std::uint64_t seed, MicOptions const &options)
{
  spec.validate();
  if (fake_budget > 4)
  {
    throw LimitError("fake budget limited to 4");
  }
  if (fake_bid_grid.size() > 8)
  {
    throw LimitError("fake bid grid limited to 8 values");
  }
  require_trials(options.trials);
  if (!(options.fake_size > 0.0))
  {
    throw ParameterError("fake size must be positive");
  }

  std::vector<double> values(fake_bid_grid.begin(), fake_bid_grid.end());
  auto const         *split = std::get_if<SplitBlockRule>(&spec.allocation);
  if (split)
  {
    values.push_back(split->config.delta);
  }
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  auto const multisets = fake_multisets(values, fake_budget);
  TxId const first_id  = m.next_free_id();
  auto make_fakes      = [&](std::vector<double> const &bids) {
    std::vector<Transaction> fakes;
    for (std::size_t i = 0; i < bids.size(); ++i)
    {
      fakes.push_back({first_id + i, options.fake_size, bids[i], 0.0, true});
    }
    return fakes;
  };

  PropertyReport report;
  report.property = Property::MIC;

  double      honest = 0.0;
  double      honest_se = 0.0;
  std::string model;
  std::function<MeanSe(std::vector<Transaction> const &)> deviation;

  if (std::holds_alternative<OptimalRule>(spec.allocation))
  {
    honest        = run_mechanism(spec, m, capacity, {}, seed).miner_utility;
    report.trials = 1;
    model         = "deterministic: best feasible subset of real and fake transactions";
    deviation     = [&](std::vector<Transaction> const &fakes) {
      return MeanSe{best_subset_utility(spec, m.merged(fakes), capacity), 0.0, 0.0};
    };
  }
  else if (auto const *rt = std::get_if<RtfmRule>(&spec.allocation))
  {
    auto const opt = intended_optimum(spec, m, capacity);
    honest         = (1.0 - rt->phi) * set_utility(spec, m, opt.selected);
    report.trials  = 1;
    model          = "exact mixture: rand branch pays zero, opt branch best subset";
    deviation      = [&, phi = rt->phi](std::vector<Transaction> const &fakes) {
      return MeanSe{(1.0 - phi) * best_subset_utility(spec, m.merged(fakes), capacity), 0.0, 0.0};
    };
  }
  else if (split)
  {
    auto sample = [&](std::vector<Transaction> const &fakes) {
      std::vector<double> u(options.trials);
      for (std::size_t t = 0; t < options.trials; ++t)
      {
        u[t] = run_mechanism(spec, m, capacity, fakes, derive_seed(seed, t)).miner_utility;
      }
      return mean_se(u);
    };
    auto h        = sample({});
    honest        = h.mean;
    honest_se     = h.se;
    report.trials = options.trials;
    model         = "split block: fakes fill the (1 - alpha) section first";
    deviation     = sample;
  }
  else
  {
    std::vector<double> u(options.trials);
    for (std::size_t t = 0; t < options.trials; ++t)
    {
      u[t] = run_mechanism(spec, m, capacity, {}, derive_seed(seed, t)).miner_utility;
    }
    auto h        = mean_se(u);
    honest        = h.mean;
    honest_se     = h.se;
    report.trials = options.trials;
    model         = "randomized allocation: Monte Carlo honest utility vs best deterministic subset";
    deviation     = [&](std::vector<Transaction> const &fakes) {
      return MeanSe{best_subset_utility(spec, m.merged(fakes), capacity), 0.0, 0.0};
    };
  }

  std::optional<Witness> best;
  double                 best_gap = 0.0;
  for (auto const &bids : multisets)
  {
    auto   fakes  = make_fakes(bids);
    auto   dev    = deviation(fakes);
    double margin = 2.0 * std::sqrt(honest_se * honest_se + dev.se * dev.se);
    double gap    = dev.mean - honest;
    if (gap > margin + tolerance(honest) && (!best || gap > best_gap))
    {
      Witness w;
      w.fakes     = fakes;
      w.honest    = honest;
      w.deviating = dev.mean;
      w.detail    = fakes.empty() ? "deviating from the intended allocation without fakes"
                                  : std::to_string(fakes.size()) + " fake transaction(s)";
      best        = w;
      best_gap    = gap;
    }
  }

  std::ostringstream note;
  note << model << "; searched " << multisets.size() << " fake multisets (budget " << fake_budget
       << ", " << values.size() << " bid values)";
  report.note = note.str();
  if (best)
  {
    report.verdict = Verdict::Violated;
    report.witness = best;
    return report;
  }
  report.verdict = Verdict::Satisfied;
  report.note += "; no profitable deviation within search bounds";
  return report;
}

CofReport empirical_cof(MechanismSpec const &spec, Mempool const &m, double capacity,
                        std::size_t trials, std::uint64_t seed)
{
  require_trials(trials);
  spec.validate();
  CofReport r;
  r.opt_utility = total_bid_value(m, optimal_allocate(m, capacity, spec.solver));
  if (!(r.opt_utility > 0.0))
  {
    throw DegenerateInstanceError("OPT is zero: no positive bid fits in the block");
  }
  std::size_t const   runs = std::holds_alternative<OptimalRule>(spec.allocation) ? 1 : trials;
  std::vector<double> u(runs);
  for (std::size_t t = 0; t < runs; ++t)
  {
    u[t] = run_mechanism(spec, m, capacity, {}, derive_seed(seed, t)).miner_utility;
  }
  auto const stats    = mean_se(u);
  r.trials            = runs;
  r.mech_utility_mean = stats.mean;
  r.mech_utility_sd   = stats.sd;
  r.cof = stats.mean > 0.0 ? r.opt_utility / stats.mean : std::numeric_limits<double>::infinity();
  if (stats.mean > 0.0)
  {
    r.cov = stats.sd / stats.mean;
  }

  if (auto const *rt = std::get_if<RtfmRule>(&spec.allocation))
  {
    if (rt->phi < 1.0)
    {
      r.closed_form = rtfm_cof(rt->phi);
    }
  }
  else if (auto const *sb = std::get_if<SplitBlockRule>(&spec.allocation))
  {
    if (sb->config.delta == 0.0 && !sb->config.twin_delta_bids)
    {
      r.closed_form = bitcoinzf_cof_bound(sb->config.alpha);
    }
  }
  else if (auto const *sm = std::get_if<SoftmaxRule>(&spec.allocation))
  {
    if (!m.empty() && equal_sizes(m))
    {
      auto c = static_cast<std::size_t>(std::floor(capacity / m[0].size));
      c      = std::min(c, m.size());
      if (c >= 1)
      {
        double bmax = 0.0;
        for (auto const &tx : m)
        {
          bmax = std::max(bmax, tx.bid);
        }
        r.closed_form = stfm_cof_bound(m.size(), c, bmax, sm->gamma);
      }
    }
  }
  else if (std::holds_alternative<OptimalRule>(spec.allocation) &&
           spec.payment == PaymentRule::FirstPrice)
  {
    r.closed_form = 1.0;
  }
  return r;
}

double stfm_cof_bound(std::size_t n, std::size_t c, double b, double gamma)
{
  if (c == 0 || c > n)
  {
    throw DomainError("stfm_cof_bound needs 1 <= c <= n");
  }
  if (!(b >= 0.0) || !(gamma > 0.0))
  {
    throw DomainError("stfm_cof_bound needs b >= 0 and gamma > 0");
  }
  return static_cast<double>(n) / static_cast<double>(c) + 1.0 - std::exp(-b / gamma);
}

double bitcoinzf_cof_bound(double alpha)
{
  if (!(alpha > 0.0 && alpha <= 1.0))
  {
    throw DomainError("alpha must lie in (0, 1]");
  }
  return 1.0 / alpha;
}

double rtfm_cof(double phi)
{
  if (!(phi >= 0.0 && phi < 1.0))
  {
    throw DomainError("phi must lie in [0, 1)");
  }
  return 1.0 / (1.0 - phi);
}

double rtfm_cov(double phi)
{
  if (!(phi > 0.0 && phi < 1.0))
  {
    throw DomainError("phi must lie in (0, 1)");
  }
  return std::sqrt((1.0 - phi) / phi);
}

double rtfm_cov_ratio(double phi)
{
  if (!(phi > 0.0 && phi < 1.0))
  {
    throw DomainError("phi must lie in (0, 1)");
  }
  return phi / (1.0 - phi);
}

GammaEstimate estimate_gamma_ratio(Mempool const &m, double capacity, double alpha_target,
                                   double gamma, std::size_t trials, std::uint64_t seed)
{
  require_trials(trials);
  auto opt = optimal_allocate(m, capacity, SolverOptions{Solver::Auto, 24});
  std::vector<TxId> opt_ids = opt.selected;
  std::sort(opt_ids.begin(), opt_ids.end());

  GammaEstimate est;
  est.gamma        = gamma;
  std::size_t hits = 0;
  std::size_t zf   = 0;
  for (std::size_t t = 0; t < trials; ++t)
  {
    auto a   = stfm_allocate(m, capacity, gamma, derive_seed(seed, t));
    auto ids = a.selected;
    std::sort(ids.begin(), ids.end());
    if (ids == opt_ids)
    {
      ++hits;
    }
    double zero_size = 0.0;
    for (auto id : a.selected)
    {
      auto const &tx = m.at(id);
      if (tx.bid == 0.0)
      {
        zero_size += tx.size;
      }
    }
    if (a.total_size > 0.0 && zero_size >= alpha_target * a.total_size)
    {
      ++zf;
    }
  }
  est.pr_cof = static_cast<double>(hits) / static_cast<double>(trials);
  est.pr_zf  = static_cast<double>(zf) / static_cast<double>(trials);
  return est;
}

double tune_gamma(Mempool const &m, double capacity, double alpha_target, double phi_ratio,
                  double gamma_lo, double gamma_hi, std::size_t trials, std::uint64_t seed)
{
  require_trials(trials);
  if (!(gamma_lo > 0.0) || !(gamma_lo < gamma_hi) || !std::isfinite(gamma_hi))
  {
    throw ParameterError("need 0 < gamma_lo < gamma_hi < inf");
  }
  if (!(alpha_target >= 0.0 && alpha_target <= 1.0))
  {
    throw ParameterError("alpha_target must lie in [0, 1]");
  }
  if (!(phi_ratio >= 0.0))
  {
    throw ParameterError("phi_ratio must be non-negative");
  }
  if (std::isinf(phi_ratio))
  {
    return gamma_lo;
  }

  bool any_zf = false;
  auto ratio  = [&](double gamma) {
    auto est = estimate_gamma_ratio(m, capacity, alpha_target, gamma, trials, seed);
    if (est.pr_zf > 0.0)
    {
      any_zf = true;
      return est.pr_cof / est.pr_zf;
    }
    return std::numeric_limits<double>::infinity();
  };

  if (ratio(gamma_lo) <= phi_ratio)
  {
    return gamma_lo;
  }
  if (ratio(gamma_hi) > phi_ratio)
  {
    if (!any_zf)
    {
      throw InfeasibleError("pr_ZF estimated 0 across [" + format_double(gamma_lo) + ", " +
                            format_double(gamma_hi) + "]");
    }
    throw InfeasibleError("no gamma in [" + format_double(gamma_lo) + ", " +
                          format_double(gamma_hi) + "] reaches pr_CoF/pr_ZF <= " +
                          format_double(phi_ratio));
  }
  double lo = gamma_lo;
  double hi = gamma_hi;
  for (int iter = 0; iter < 60 && hi / lo > 1.0 + 1e-4; ++iter)
  {
    double mid = std::sqrt(lo * hi);
    if (ratio(mid) <= phi_ratio)
    {
      hi = mid;
    }
    else
    {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace tfm
