#include "tfm/mech.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "tfm/error.hpp"

namespace tfm {

std::string to_string(PaymentRule rule)
{
  switch (rule)
  {
  case PaymentRule::FirstPrice:
    return "fpa";
  case PaymentRule::SecondPriceLowestWinning:
    return "spa";
  case PaymentRule::PostedPrice:
    return "posted";
  }
  return "unknown";
}

std::string to_string(BurnRule rule)
{
  return rule == BurnRule::None ? "none" : "posted";
}

std::string to_string(MechType type)
{
  return type == MechType::Deterministic ? "deterministic" : "randomized";
}

MechType MechanismSpec::type() const
{
  if (std::holds_alternative<OptimalRule>(allocation) ||
      std::holds_alternative<SplitBlockRule>(allocation))
  {
    return MechType::Deterministic;
  }
  return MechType::Randomized;
}

std::string MechanismSpec::allocation_name() const
{
  struct Visitor
  {
    std::string operator()(OptimalRule const &) const { return "optimal"; }
    std::string operator()(UniformRule const &) const { return "uniform"; }
    std::string operator()(SplitBlockRule const &) const { return "splitblock"; }
    std::string operator()(SoftmaxRule const &) const { return "softmax"; }
    std::string operator()(RtfmRule const &) const { return "rtfm"; }
  };
  return std::visit(Visitor{}, allocation);
}

void MechanismSpec::validate() const
{
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
  {
    throw ParameterError("lambda must be a finite non-negative number");
  }
  if (burning == BurnRule::PostedPrice && payment != PaymentRule::PostedPrice)
  {
    throw ParameterError("posted-price burning requires posted-price payment");
  }
  if (auto const *s = std::get_if<SoftmaxRule>(&allocation))
  {
    if (!(s->gamma > 0.0) || std::isnan(s->gamma))
    {
      throw ParameterError("gamma must be positive");
    }
  }
  if (auto const *r = std::get_if<RtfmRule>(&allocation))
  {
    if (!(r->phi >= 0.0 && r->phi <= 1.0))
    {
      throw ParameterError("phi must lie in [0, 1]");
    }
  }
  if (auto const *b = std::get_if<SplitBlockRule>(&allocation))
  {
    b->config.validate();
  }
}

MechanismSpec MechanismSpec::fpa()
{
  return {};
}

MechanismSpec MechanismSpec::spa()
{
  MechanismSpec s;
  s.payment = PaymentRule::SecondPriceLowestWinning;
  return s;
}

MechanismSpec MechanismSpec::eip1559(double lambda)
{
  MechanismSpec s;
  s.payment = PaymentRule::PostedPrice;
  s.burning = BurnRule::PostedPrice;
  s.lambda  = lambda;
  return s;
}

MechanismSpec MechanismSpec::bitcoinf(double alpha, double delta)
{
  MechanismSpec s;
  s.allocation = SplitBlockRule{SplitBlockConfig{alpha, delta, true}};
  return s;
}

MechanismSpec MechanismSpec::bitcoinzf(double alpha)
{
  MechanismSpec s;
  s.allocation = SplitBlockRule{SplitBlockConfig{alpha, 0.0, false}};
  return s;
}

MechanismSpec MechanismSpec::stfm(double gamma)
{
  MechanismSpec s;
  s.allocation = SoftmaxRule{gamma};
  return s;
}

MechanismSpec MechanismSpec::rtfm(double phi)
{
  MechanismSpec s;
  s.allocation = RtfmRule{phi};
  return s;
}

MechanismSpec MechanismSpec::uniform()
{
  MechanismSpec s;
  s.allocation = UniformRule{};
  return s;
}

namespace {

std::string solver_name(Solver s)
{
  switch (s)
  {
  case Solver::Auto:
    return "auto";
  case Solver::Exact:
    return "exact";
  case Solver::Greedy:
    return "greedy";
  }
  return "unknown";
}

template <typename Rule>
void keep_or_reset(AllocationRule &rule)
{
  if (!std::holds_alternative<Rule>(rule))
  {
    rule = Rule{};
  }
}

bool parse_bool(std::string const &v, std::string const &key)
{
  if (v == "true" || v == "1" || v == "yes")
  {
    return true;
  }
  if (v == "false" || v == "0" || v == "no")
  {
    return false;
  }
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

}  // namespace

std::string MechanismSpec::to_config() const
{
  std::ostringstream out;
  out << "allocation=" << allocation_name() << '\n';
  if (auto const *s = std::get_if<SoftmaxRule>(&allocation))
  {
    out << "gamma=" << format_double(s->gamma) << '\n';
  }
  if (auto const *r = std::get_if<RtfmRule>(&allocation))
  {
    out << "phi=" << format_double(r->phi) << '\n';
  }
  if (auto const *b = std::get_if<SplitBlockRule>(&allocation))
  {
    out << "alpha=" << format_double(b->config.alpha) << '\n';
    out << "delta=" << format_double(b->config.delta) << '\n';
    out << "twin=" << (b->config.twin_delta_bids ? "true" : "false") << '\n';
  }
  out << "payment=" << to_string(payment) << '\n';
  out << "burning=" << to_string(burning) << '\n';
  out << "lambda=" << format_double(lambda) << '\n';
  out << "type=" << to_string(type()) << '\n';
  out << "solver=" << solver_name(solver.solver) << '\n';
  out << "exhaustive_limit=" << solver.exhaustive_limit << '\n';
  return out.str();
}

MechanismSpec MechanismSpec::from_pairs(KeyValues &pairs, MechanismSpec const &base)
{
  static std::set<std::string> const keys = {"mechanism", "allocation", "gamma",  "phi",
                                             "alpha",     "delta",      "twin",   "payment",
                                             "burning",   "lambda",     "type",   "solver",
                                             "exhaustive_limit"};
  std::map<std::string, std::string> kv;
  for (auto it = pairs.begin(); it != pairs.end();)
  {
    if (keys.count(it->first) != 0)
    {
      kv.emplace(it->first, it->second);
      it = pairs.erase(it);
    }
    else
    {
      ++it;
    }
  }
  auto get = [&](std::string const &key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end())
    {
      return std::nullopt;
    }
    return it->second;
  };
  auto num = [&](std::string const &key, double fallback) {
    auto v = get(key);
    return v ? parse_double(*v, key) : fallback;
  };

  MechanismSpec spec = base;
  if (auto preset = get("mechanism"))
  {
    double lambda = num("lambda", 0.0);
    if (*preset == "fpa")
      spec = fpa();
    else if (*preset == "spa")
      spec = spa();
    else if (*preset == "eip1559")
      spec = eip1559(lambda);
    else if (*preset == "bitcoinf")
      spec = bitcoinf(num("alpha", 0.75), num("delta", 1.0));
    else if (*preset == "bitcoinzf")
      spec = bitcoinzf(num("alpha", 0.75));
    else if (*preset == "stfm")
      spec = stfm(num("gamma", 1.0));
    else if (*preset == "rtfm")
      spec = rtfm(num("phi", 0.5));
    else if (*preset == "uniform")
      spec = uniform();
    else
      throw ConfigError("mechanism: unknown preset '" + *preset + "'");
  }

  if (auto a = get("allocation"))
  {
    if (*a == "optimal")
      keep_or_reset<OptimalRule>(spec.allocation);
    else if (*a == "uniform")
      keep_or_reset<UniformRule>(spec.allocation);
    else if (*a == "splitblock")
      keep_or_reset<SplitBlockRule>(spec.allocation);
    else if (*a == "softmax")
      keep_or_reset<SoftmaxRule>(spec.allocation);
    else if (*a == "rtfm")
      keep_or_reset<RtfmRule>(spec.allocation);
    else
      throw ConfigError("allocation: unknown rule '" + *a + "'");
  }
  if (auto *s = std::get_if<SoftmaxRule>(&spec.allocation))
  {
    s->gamma = num("gamma", s->gamma);
  }
  else if (get("gamma"))
  {
    throw ConfigError("gamma: only meaningful for allocation=softmax");
  }
  if (auto *r = std::get_if<RtfmRule>(&spec.allocation))
  {
    r->phi = num("phi", r->phi);
  }
  else if (get("phi"))
  {
    throw ConfigError("phi: only meaningful for allocation=rtfm");
  }
  if (auto *b = std::get_if<SplitBlockRule>(&spec.allocation))
  {
    b->config.alpha = num("alpha", b->config.alpha);
    b->config.delta = num("delta", b->config.delta);
    if (auto t = get("twin"))
    {
      b->config.twin_delta_bids = parse_bool(*t, "twin");
    }
  }
  else if (get("alpha") || get("delta") || get("twin"))
  {
    throw ConfigError("alpha/delta/twin: only meaningful for allocation=splitblock");
  }

  if (auto p = get("payment"))
  {
    if (*p == "fpa")
      spec.payment = PaymentRule::FirstPrice;
    else if (*p == "spa")
      spec.payment = PaymentRule::SecondPriceLowestWinning;
    else if (*p == "posted")
      spec.payment = PaymentRule::PostedPrice;
    else if (*p == "eip1559")
    {
      spec.payment = PaymentRule::PostedPrice;
      spec.burning = BurnRule::PostedPrice;
    }
    else
      throw ConfigError("payment: unknown rule '" + *p + "'");
  }
  if (auto q = get("burning"))
  {
    if (*q == "none")
      spec.burning = BurnRule::None;
    else if (*q == "posted")
      spec.burning = BurnRule::PostedPrice;
    else
      throw ConfigError("burning: unknown rule '" + *q + "'");
  }
  spec.lambda = num("lambda", spec.lambda);
  if (auto s = get("solver"))
  {
    if (*s == "auto")
      spec.solver.solver = Solver::Auto;
    else if (*s == "exact")
      spec.solver.solver = Solver::Exact;
    else if (*s == "greedy")
      spec.solver.solver = Solver::Greedy;
    else
      throw ConfigError("solver: unknown mode '" + *s + "'");
  }
  if (auto l = get("exhaustive_limit"))
  {
    spec.solver.exhaustive_limit = parse_u64(*l, "exhaustive_limit");
  }
  try
  {
    spec.validate();
  }
  catch (ParameterError const &e)
  {
    throw ConfigError(e.what());
  }
  if (auto t = get("type"))
  {
    if (*t != to_string(spec.type()))
    {
      throw ConfigError("type: '" + *t + "' contradicts allocation " + spec.allocation_name() +
                        " (" + to_string(spec.type()) + ")");
    }
  }
  return spec;
}

MechanismSpec MechanismSpec::from_pairs(KeyValues &pairs)
{
  return from_pairs(pairs, MechanismSpec{});
}

MechanismSpec MechanismSpec::from_config(std::string_view text)
{
  auto pairs = parse_key_values(text);
  auto spec  = from_pairs(pairs);
  if (!pairs.empty())
  {
    throw ConfigError("unknown key '" + pairs.front().first + "'");
  }
  return spec;
}

PaymentBurn apply_payment_rule(MechanismSpec const &spec, Transaction const &tx,
                               double lowest_winning_bid)
{
  PaymentBurn pb;
  switch (spec.payment)
  {
  case PaymentRule::FirstPrice:
    pb.payment = tx.bid;
    break;
  case PaymentRule::SecondPriceLowestWinning:
    pb.payment = lowest_winning_bid;
    break;
  case PaymentRule::PostedPrice:
    if (tx.bid < spec.lambda)
    {
      throw InfeasibleInclusionError("transaction " + std::to_string(tx.id) + " bids " +
                                     format_double(tx.bid) + " below the base fee " +
                                     format_double(spec.lambda));
    }
    pb.payment = tx.bid - spec.lambda;
    break;
  }
  if (spec.burning == BurnRule::PostedPrice)
  {
    pb.burn = spec.lambda;
  }
  return pb;
}

Difficulty difficulty_for_phi(double phi, UInt256 const &target)
{
  if (!(phi >= 0.0 && phi <= 1.0))
  {
    throw ParameterError("phi must lie in [0, 1]");
  }
  Difficulty d;
  d.target  = target;
  d.phi_den = std::uint64_t(1) << 32;
  d.phi_num = static_cast<std::uint64_t>(std::llround(phi * static_cast<double>(d.phi_den)));
  d.validate();
  return d;
}

MinerObjective miner_objective(MechanismSpec const &spec, Mempool const &pool)
{
  MinerObjective obj;
  obj.payment.assign(pool.size(), 0.0);
  obj.burn.assign(pool.size(), 0.0);
  for (std::size_t i = 0; i < pool.size(); ++i)
  {
    auto const &tx = pool[i];
    obj.payment[i] = spec.payment == PaymentRule::PostedPrice ? tx.bid - spec.lambda : tx.bid;
    obj.burn[i]    = spec.burning == BurnRule::PostedPrice ? spec.lambda : 0.0;
  }
  return obj;
}

Mempool eligible_candidates(MechanismSpec const &spec, Mempool const &pool)
{
  if (spec.payment != PaymentRule::PostedPrice)
  {
    return pool;
  }
  std::vector<Transaction> kept;
  for (auto const &tx : pool)
  {
    if (tx.bid >= spec.lambda)
    {
      kept.push_back(tx);
    }
  }
  return Mempool(std::move(kept));
}

MechanismOutcome run_mechanism(MechanismSpec const &spec, Mempool const &m, double capacity,
                               std::span<Transaction const> fakes, std::uint64_t seed,
                               RunOptions const &options)
{
  spec.validate();
  if (!(capacity >= 0.0) || !std::isfinite(capacity))
  {
    throw ParameterError("capacity must be a finite non-negative number");
  }
  std::vector<Transaction> fake_txs(fakes.begin(), fakes.end());
  for (auto &f : fake_txs)
  {
    if (m.contains(f.id))
    {
      throw ParameterError("fake transaction id " + std::to_string(f.id) +
                           " collides with a real transaction");
    }
    f.fake = true;
  }
  Mempool const pool       = m.merged(fake_txs);
  Mempool const candidates = eligible_candidates(spec, pool);
  Rng           rng(seed);

  MechanismOutcome out;
  bool             zero_pay = false;
  double           delta    = 0.0;

  auto const obj  = miner_objective(spec, candidates);
  auto const &pay  = obj.payment;
  auto const &burn = obj.burn;

  auto const &rule = spec.allocation;
  if (std::holds_alternative<OptimalRule>(rule))
  {
    out.allocation = optimal_allocate(candidates, capacity, pay, burn, spec.solver);
  }
  else if (std::holds_alternative<UniformRule>(rule))
  {
    out.allocation = uniform_allocate(candidates, capacity, rng);
  }
  else if (auto const *sb = std::get_if<SplitBlockRule>(&rule))
  {
    std::vector<Transaction> real;
    std::vector<Transaction> fill;
    for (auto const &tx : candidates)
    {
      (tx.fake ? fill : real).push_back(tx);
    }
    Mempool             real_pool(std::move(real));
    auto    real_obj = miner_objective(spec, real_pool);
    out.allocation   = splitblock_allocate(real_pool, capacity, sb->config, fill, rng,
                                           real_obj.payment, spec.solver);
    delta = sb->config.delta;
  }
  else if (auto const *sm = std::get_if<SoftmaxRule>(&rule))
  {
    out.allocation = stfm_allocate(candidates, capacity, sm->gamma, rng);
  }
  else if (auto const *rt = std::get_if<RtfmRule>(&rule))
  {
    auto sample = rtfm_sample(pool, candidates, capacity, pay, burn, rng, spec.solver);
    int  toss   = 1;
    if (options.toss == TossMode::Analytic)
    {
      toss = rng.uniform01() < rt->phi ? 0 : 1;
    }
    else
    {
      auto difficulty = difficulty_for_phi(rt->phi, options.target);
      auto block      = mine_block(options.parent_hash, sample.rand_root, sample.opt_root,
                                   options.height, difficulty, rng.next_u64(), options.mining);
      toss            = block.toss;
      out.block       = block;
    }
    out.coin_toss  = toss;
    zero_pay       = toss == 0;
    out.allocation = toss == 0 ? sample.rand_set : sample.opt_set;
    out.rtfm       = std::move(sample);
  }

  double lowest = std::numeric_limits<double>::infinity();
  for (auto id : out.allocation.selected)
  {
    lowest = std::min(lowest, pool.at(id).bid);
  }

  for (std::size_t k = 0; k < out.allocation.selected.size(); ++k)
  {
    auto const &tx = pool.at(out.allocation.selected[k]);
    PaymentBurn pb;
    if (zero_pay)
    {
      pb = {};
    }
    else if (out.allocation.sections[k] == Section::OneMinusAlpha)
    {
      pb = {delta, 0.0};
    }
    else
    {
      pb = apply_payment_rule(spec, tx, lowest);
    }
    out.payment_per_unit[tx.id] = pb.payment;
    out.burn_per_unit[tx.id]    = pb.burn;
    out.miner_utility += tx.fake ? -tx.size * pb.burn : tx.size * pb.payment;
  }

  for (auto const &tx : m)
  {
    auto it = out.payment_per_unit.find(tx.id);
    out.user_utilities[tx.id] =
        it == out.payment_per_unit.end()
            ? 0.0
            : (tx.valuation - it->second - out.burn_per_unit.at(tx.id)) * tx.size;
  }
  return out;
}

double miner_utility(std::span<Transaction const> block_txs, std::span<TxId const> fakes,
                     std::map<TxId, double> const &p, std::map<TxId, double> const &q)
{
  std::set<TxId> const fake_ids(fakes.begin(), fakes.end());
  double               total = 0.0;
  for (auto const &tx : block_txs)
  {
    if (fake_ids.count(tx.id) != 0)
    {
      total -= tx.size * q.at(tx.id);
    }
    else
    {
      total += tx.size * p.at(tx.id);
    }
  }
  return total;
}

void BaseFeeState::validate() const
{
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
  {
    throw ParameterError("base fee must be finite and non-negative");
  }
  if (!(step > 0.0 && step < 1.0))
  {
    throw ParameterError("base fee step must lie in (0, 1)");
  }
}

BaseFeeState update_base_fee(BaseFeeState const &state, double block_total_size,
                             double capacity_target)
{
  state.validate();
  BaseFeeState next = state;
  next.lambda = block_total_size > capacity_target ? state.lambda * (1.0 + state.step)
                                                   : state.lambda * (1.0 - state.step);
  return next;
}

bool is_excessively_low(double lambda, Mempool const &m, double capacity)
{
  double demand = 0.0;
  for (auto const &tx : m)
  {
    if (tx.valuation > lambda)
    {
      demand += tx.size;
    }
  }
  return demand <= capacity;
}

}  // namespace tfm
