#include "tfm/alloc.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <ostream>

#include "tfm/error.hpp"
#include "tfm/format.hpp"

namespace tfm {

std::string to_string(RuleTag tag)
{
  switch (tag)
  {
  case RuleTag::Optimal:
    return "optimal";
  case RuleTag::Greedy:
    return "greedy";
  case RuleTag::Uniform:
    return "uniform";
  case RuleTag::SplitBlock:
    return "splitblock";
  case RuleTag::Softmax:
    return "softmax";
  case RuleTag::Rtfm:
    return "rtfm";
  }
  return "unknown";
}

std::string to_string(Section section)
{
  switch (section)
  {
  case Section::Main:
    return "main";
  case Section::Alpha:
    return "alpha";
  case Section::OneMinusAlpha:
    return "one_minus_alpha";
  case Section::Rand:
    return "rand";
  case Section::Opt:
    return "opt";
  }
  return "unknown";
}

bool AllocationResult::contains(TxId id) const
{
  return std::find(selected.begin(), selected.end(), id) != selected.end();
}

namespace {

void check_capacity(double capacity)
{
  if (!(capacity >= 0.0) || !std::isfinite(capacity))
  {
    throw ParameterError("capacity must be a finite non-negative number");
  }
}

void check_positional(Mempool const &m, std::span<double const> values, char const *what)
{
  if (values.size() != m.size())
  {
    throw ParameterError(std::string(what) + " must have one entry per mempool transaction");
  }
}

struct Item
{
  std::size_t pos;
  double      size;
  double      value;
};

std::vector<Item> positive_items(Mempool const &m, double capacity,
                                 std::span<double const> payment, std::span<double const> burn)
{
  std::vector<Item> items;
  for (std::size_t i = 0; i < m.size(); ++i)
  {
    auto const &tx   = m[i];
    double      unit = tx.fake ? -burn[i] : payment[i];
    double      value = unit * tx.size;
    if (value > 0.0 && tx.size <= capacity)
    {
      items.push_back({i, tx.size, value});
    }
  }
  return items;
}

bool denser(Item const &a, Item const &b, Mempool const &m)
{
  double da = a.value / a.size;
  double db = b.value / b.size;
  if (da != db)
  {
    return da > db;
  }
  return m[a.pos].id < m[b.pos].id;
}

std::vector<std::size_t> greedy_select(Mempool const &m, std::vector<Item> items, double capacity)
{
  std::stable_sort(items.begin(), items.end(),
                   [&](Item const &a, Item const &b) { return denser(a, b, m); });
  std::vector<std::size_t> chosen;
  double                   used = 0.0;
  for (auto const &item : items)
  {
    if (used + item.size <= capacity)
    {
      used += item.size;
      chosen.push_back(item.pos);
    }
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

/// Depth-first branch and bound in mempool order, include branch first, so
/// among equal-objective subsets the one favouring lower ids is kept.
class KnapsackSearch
{
public:
  KnapsackSearch(Mempool const &m, std::vector<Item> items, double capacity)
    : items_(std::move(items))
    , capacity_(capacity)
  {
    std::sort(items_.begin(), items_.end(),
              [&](Item const &a, Item const &b) { return m[a.pos].id < m[b.pos].id; });
    by_density_.resize(items_.size());
    std::iota(by_density_.begin(), by_density_.end(), std::size_t{0});
    std::stable_sort(by_density_.begin(), by_density_.end(), [&](std::size_t a, std::size_t b) {
      return denser(items_[a], items_[b], m);
    });
    current_.reserve(items_.size());
  }

  std::vector<std::size_t> run()
  {
    recurse(0, 0.0, 0.0);
    std::vector<std::size_t> out;
    for (auto idx : best_)
    {
      out.push_back(items_[idx].pos);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

private:
  double bound(std::size_t depth, double used, double value) const
  {
    double room = capacity_ - used;
    for (auto idx : by_density_)
    {
      if (idx < depth)
      {
        continue;
      }
      auto const &item = items_[idx];
      if (item.size <= room)
      {
        room -= item.size;
        value += item.value;
      }
      else
      {
        value += item.value * (room / item.size);
        break;
      }
    }
    return value;
  }

  bool improves(double value) const
  {
    return value > best_value_ + 1e-9 * std::max(1.0, std::abs(best_value_));
  }

  void recurse(std::size_t depth, double used, double value)
  {
    if (depth == items_.size())
    {
      if (improves(value))
      {
        best_value_ = value;
        best_       = current_;
      }
      return;
    }
    if (!improves(bound(depth, used, value)))
    {
      return;
    }
    auto const &item = items_[depth];
    if (used + item.size <= capacity_)
    {
      current_.push_back(depth);
      recurse(depth + 1, used + item.size, value + item.value);
      current_.pop_back();
    }
    recurse(depth + 1, used, value);
  }

  std::vector<Item>        items_;
  std::vector<std::size_t> by_density_;
  double                   capacity_;
  std::vector<std::size_t> current_;
  std::vector<std::size_t> best_;
  double                   best_value_ = 0.0;
};

AllocationResult make_result(Mempool const &m, std::vector<std::size_t> const &positions,
                             double capacity, RuleTag rule, Section section)
{
  AllocationResult r;
  r.capacity = capacity;
  r.rule     = rule;
  for (auto pos : positions)
  {
    r.selected.push_back(m[pos].id);
    r.sections.push_back(section);
    r.total_size += m[pos].size;
  }
  return r;
}

}  // namespace

AllocationResult optimal_allocate(Mempool const &m, double capacity,
                                  std::span<double const> payment, std::span<double const> burn,
                                  SolverOptions const &options)
{
  check_capacity(capacity);
  check_positional(m, payment, "payment");
  check_positional(m, burn, "burn");

  bool exact = options.solver == Solver::Exact ||
               (options.solver == Solver::Auto && m.size() <= options.exhaustive_limit);
  if (exact && m.size() > options.exhaustive_limit)
  {
    throw SolverLimitError("exact knapsack limited to " + std::to_string(options.exhaustive_limit) +
                           " transactions (mempool has " + std::to_string(m.size()) +
                           "); use the greedy solver");
  }
  auto items = positive_items(m, capacity, payment, burn);
  if (exact)
  {
    KnapsackSearch search(m, std::move(items), capacity);
    return make_result(m, search.run(), capacity, RuleTag::Optimal, Section::Main);
  }
  return make_result(m, greedy_select(m, std::move(items), capacity), capacity, RuleTag::Greedy,
                     Section::Main);
}

AllocationResult optimal_allocate(Mempool const &m, double capacity, SolverOptions const &options)
{
  std::vector<double> payment(m.size());
  std::vector<double> burn(m.size(), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i)
  {
    payment[i] = m[i].bid;
  }
  return optimal_allocate(m, capacity, payment, burn, options);
}

double allocation_objective(Mempool const &m, AllocationResult const &a,
                            std::span<double const> payment, std::span<double const> burn)
{
  check_positional(m, payment, "payment");
  check_positional(m, burn, "burn");
  double total = 0.0;
  for (auto id : a.selected)
  {
    auto        pos = m.position(id).value();
    auto const &tx  = m[pos];
    total += tx.fake ? -tx.size * burn[pos] : tx.size * payment[pos];
  }
  return total;
}

double total_bid_value(Mempool const &m, AllocationResult const &a)
{
  double total = 0.0;
  for (auto id : a.selected)
  {
    total += m.at(id).total_fee();
  }
  return total;
}

namespace {

/// Lazy Fisher-Yates scan: taking a uniform permutation and keeping every
/// transaction that still fits has the same law as repeatedly drawing a
/// uniform transaction among those that fit, since a transaction that does
/// not fit now never fits later.
std::vector<std::size_t> uniform_positions(std::vector<std::size_t> pool, std::span<double const> sizes,
                                           double capacity, Rng &rng)
{
  std::vector<std::size_t> chosen;
  double                   used = 0.0;
  for (std::size_t i = 0; i < pool.size(); ++i)
  {
    auto j = i + static_cast<std::size_t>(rng.uniform_index(pool.size() - i));
    std::swap(pool[i], pool[j]);
    auto   pos  = pool[i];
    double size = sizes[pos];
    if (used + size <= capacity)
    {
      used += size;
      chosen.push_back(pos);
    }
  }
  return chosen;
}

std::vector<double> sizes_of(Mempool const &m)
{
  std::vector<double> s(m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
  {
    s[i] = m[i].size;
  }
  return s;
}

}  // namespace

AllocationResult uniform_allocate(Mempool const &m, double capacity, Rng &rng)
{
  check_capacity(capacity);
  std::vector<std::size_t> pool(m.size());
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  auto sizes = sizes_of(m);
  return make_result(m, uniform_positions(std::move(pool), sizes, capacity, rng), capacity,
                     RuleTag::Uniform, Section::Main);
}

AllocationResult uniform_allocate(Mempool const &m, double capacity, std::uint64_t seed)
{
  Rng rng(seed);
  return uniform_allocate(m, capacity, rng);
}

void SplitBlockConfig::validate() const
{
  if (!(alpha > 0.0 && alpha <= 1.0))
  {
    throw ParameterError("alpha must lie in (0, 1]");
  }
  if (!(delta >= 0.0) || !std::isfinite(delta))
  {
    throw ParameterError("delta must be non-negative");
  }
}

AllocationResult splitblock_allocate(Mempool const &m, double capacity,
                                     SplitBlockConfig const &cfg,
                                     std::span<Transaction const> fake_fill, Rng &rng,
                                     std::span<double const> alpha_payment,
                                     SolverOptions const &options)
{
  check_capacity(capacity);
  cfg.validate();
  if (!alpha_payment.empty())
  {
    check_positional(m, alpha_payment, "alpha_payment");
  }
  double const low_cap  = cfg.one_minus_alpha_capacity(capacity);
  double const high_cap = cfg.alpha_capacity(capacity);

  AllocationResult r;
  r.capacity = capacity;
  r.rule     = RuleTag::SplitBlock;

  double low_used = 0.0;
  for (auto const &fake : fake_fill)
  {
    if (m.contains(fake.id))
    {
      throw ParameterError("fake transaction id collides with mempool id");
    }
    if (low_used + fake.size <= low_cap)
    {
      low_used += fake.size;
      r.selected.push_back(fake.id);
      r.sections.push_back(Section::OneMinusAlpha);
    }
  }

  std::vector<std::size_t> low_candidates;
  for (std::size_t i = 0; i < m.size(); ++i)
  {
    auto const &tx = m[i];
    if (tx.fake)
    {
      continue;
    }
    if (tx.bid == cfg.delta || (cfg.twin_delta_bids && tx.bid > cfg.delta))
    {
      low_candidates.push_back(i);
    }
  }
  auto sizes = sizes_of(m);
  auto low   = uniform_positions(std::move(low_candidates), sizes, low_cap - low_used, rng);
  std::vector<bool> placed(m.size(), false);
  for (auto pos : low)
  {
    placed[pos] = true;
    r.selected.push_back(m[pos].id);
    r.sections.push_back(Section::OneMinusAlpha);
    low_used += m[pos].size;
  }

  std::vector<Transaction> rest;
  std::vector<double>      rest_payment;
  for (std::size_t i = 0; i < m.size(); ++i)
  {
    auto const &tx = m[i];
    if (placed[i] || tx.bid == cfg.delta)
    {
      continue;
    }
    rest.push_back(tx);
    rest_payment.push_back(alpha_payment.empty() ? tx.bid : alpha_payment[i]);
  }
  Mempool             rest_pool(std::move(rest));
  std::vector<double> rest_burn(rest_pool.size(), 0.0);
  auto high = optimal_allocate(rest_pool, high_cap, rest_payment, rest_burn, options);
  for (auto id : high.selected)
  {
    r.selected.push_back(id);
    r.sections.push_back(Section::Alpha);
  }
  r.total_size = low_used + high.total_size;
  return r;
}

namespace {

/// Sum tree over softmax weights. Parents are recomputed from their children
/// on every update, so removing weights does not accumulate cancellation error.
class WeightTree
{
public:
  explicit WeightTree(std::size_t n)
  {
    leaves_ = 1;
    while (leaves_ < std::max<std::size_t>(n, 1))
    {
      leaves_ *= 2;
    }
    tree_.assign(2 * leaves_, 0.0);
  }

  void set(std::size_t i, double w)
  {
    std::size_t node = leaves_ + i;
    tree_[node]      = w;
    for (node /= 2; node >= 1; node /= 2)
    {
      tree_[node] = tree_[2 * node] + tree_[2 * node + 1];
    }
  }

  double weight(std::size_t i) const
  {
    return tree_[leaves_ + i];
  }
  double total() const
  {
    return tree_[1];
  }

  /// Leaf whose cumulative interval contains u * total.
  std::size_t find(double u) const
  {
    double      target = u * total();
    std::size_t node   = 1;
    while (node < leaves_)
    {
      double left = tree_[2 * node];
      if (target < left || tree_[2 * node + 1] <= 0.0)
      {
        node = 2 * node;
      }
      else
      {
        target -= left;
        node = 2 * node + 1;
      }
    }
    return node - leaves_;
  }

private:
  std::size_t         leaves_ = 1;
  std::vector<double> tree_;
};

void check_gamma(double gamma)
{
  if (!(gamma > 0.0) || std::isnan(gamma))
  {
    throw ParameterError("softmax temperature gamma must be positive");
  }
}

}  // namespace

AllocationResult stfm_allocate(Mempool const &m, double capacity, double gamma, Rng &rng)
{
  check_capacity(capacity);
  check_gamma(gamma);

  std::size_t const n = m.size();
  std::vector<bool> eligible(n, false);
  std::size_t       eligible_count = 0;
  for (std::size_t i = 0; i < n; ++i)
  {
    if (m[i].size <= capacity)
    {
      eligible[i] = true;
      ++eligible_count;
    }
  }

  WeightTree tree(n);
  auto       rebuild = [&] {
    double shift = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
    {
      if (eligible[i])
      {
        shift = std::max(shift, m[i].bid);
      }
    }
    for (std::size_t i = 0; i < n; ++i)
    {
      tree.set(i, eligible[i] ? std::exp((m[i].bid - shift) / gamma) : 0.0);
    }
  };
  rebuild();

  // Largest first, so shrinking capacity retires transactions from the front.
  std::vector<std::size_t> by_size(n);
  std::iota(by_size.begin(), by_size.end(), std::size_t{0});
  std::stable_sort(by_size.begin(), by_size.end(),
                   [&](std::size_t a, std::size_t b) { return m[a].size > m[b].size; });
  std::size_t retire = 0;

  AllocationResult r;
  r.capacity = capacity;
  r.rule     = RuleTag::Softmax;
  double used = 0.0;

  while (eligible_count > 0)
  {
    if (!(tree.total() > 1e-200))
    {
      rebuild();
    }
    auto pick = tree.find(rng.uniform01());
    if (pick >= n || !eligible[pick] || tree.weight(pick) <= 0.0)
    {
      // Rounding at an interval edge; fall back to the last positive leaf.
      pick = n;
      for (std::size_t i = n; i-- > 0;)
      {
        if (eligible[i] && tree.weight(i) > 0.0)
        {
          pick = i;
          break;
        }
      }
      if (pick == n)
      {
        break;
      }
    }
    eligible[pick] = false;
    --eligible_count;
    tree.set(pick, 0.0);
    used += m[pick].size;
    r.selected.push_back(m[pick].id);
    r.sections.push_back(Section::Main);

    double room = capacity - used;
    while (retire < n && m[by_size[retire]].size > room)
    {
      auto pos = by_size[retire++];
      if (eligible[pos])
      {
        eligible[pos] = false;
        --eligible_count;
        tree.set(pos, 0.0);
      }
    }
  }
  r.total_size = used;
  return r;
}

AllocationResult stfm_allocate(Mempool const &m, double capacity, double gamma, std::uint64_t seed)
{
  Rng rng(seed);
  return stfm_allocate(m, capacity, gamma, rng);
}

std::vector<double> stfm_first_draw_distribution(Mempool const &m, double gamma)
{
  check_gamma(gamma);
  if (m.empty())
  {
    throw DomainError("softmax over an empty mempool");
  }
  double shift = -std::numeric_limits<double>::infinity();
  for (auto const &tx : m)
  {
    shift = std::max(shift, tx.bid);
  }
  // log-sum-exp: p_i = exp((b_i - shift)/gamma - log sum_j exp((b_j - shift)/gamma)).
  double sum = 0.0;
  for (auto const &tx : m)
  {
    sum += std::exp((tx.bid - shift) / gamma);
  }
  double const log_sum = std::log(sum);
  std::vector<double> p(m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
  {
    p[i] = std::exp((m[i].bid - shift) / gamma - log_sum);
  }
  return p;
}

Bytes transaction_leaf(Transaction const &tx)
{
  Bytes out(24);
  auto  put = [&](std::size_t offset, std::uint64_t v) {
    for (int i = 7; i >= 0; --i)
    {
      out[offset + static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v & 0xff);
      v >>= 8;
    }
  };
  std::uint64_t size_bits = 0;
  std::uint64_t bid_bits  = 0;
  std::memcpy(&size_bits, &tx.size, 8);
  std::memcpy(&bid_bits, &tx.bid, 8);
  put(0, tx.id);
  put(8, size_bits);
  put(16, bid_bits);
  return out;
}

Hash32 selection_root(Mempool const &m, AllocationResult const &a)
{
  if (a.selected.empty())
  {
    return Hash32{};
  }
  std::vector<Bytes> leaves;
  leaves.reserve(a.selected.size());
  for (auto id : a.selected)
  {
    leaves.push_back(transaction_leaf(m.at(id)));
  }
  return merkle_root(leaves);
}

RtfmSample rtfm_sample(Mempool const &rand_pool, Mempool const &opt_pool, double capacity,
                       std::span<double const> payment, std::span<double const> burn, Rng &rng,
                       SolverOptions const &options)
{
  RtfmSample s;
  s.rand_set = uniform_allocate(rand_pool, capacity, rng);
  s.rand_set.rule = RuleTag::Rtfm;
  std::fill(s.rand_set.sections.begin(), s.rand_set.sections.end(), Section::Rand);
  s.opt_set = optimal_allocate(opt_pool, capacity, payment, burn, options);
  s.opt_set.rule = RuleTag::Rtfm;
  std::fill(s.opt_set.sections.begin(), s.opt_set.sections.end(), Section::Opt);
  s.rand_root = selection_root(rand_pool, s.rand_set);
  s.opt_root  = selection_root(opt_pool, s.opt_set);
  return s;
}

RtfmSample rtfm_sample(Mempool const &m, double capacity, Rng &rng, SolverOptions const &options)
{
  std::vector<double> payment(m.size());
  std::vector<double> burn(m.size(), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i)
  {
    payment[i] = m[i].bid;
  }
  return rtfm_sample(m, m, capacity, payment, burn, rng, options);
}

RtfmSample rtfm_sample(Mempool const &m, double capacity, std::uint64_t seed,
                       SolverOptions const &options)
{
  Rng rng(seed);
  return rtfm_sample(m, capacity, rng, options);
}

void write_allocation_csv(Mempool const &m, AllocationResult const &a, std::ostream &out)
{
  out << "id,section,size,bid\n";
  for (std::size_t i = 0; i < a.selected.size(); ++i)
  {
    auto const &tx = m.at(a.selected[i]);
    out << tx.id << ',' << to_string(a.sections[i]) << ',' << format_double(tx.size) << ','
        << format_double(tx.bid) << '\n';
  }
}

void write_allocation_csv(Mempool const &m, RtfmSample const &s, std::ostream &out)
{
  out << "id,section,size,bid\n";
  for (auto const *set : {&s.rand_set, &s.opt_set})
  {
    for (std::size_t i = 0; i < set->selected.size(); ++i)
    {
      auto const &tx = m.at(set->selected[i]);
      out << tx.id << ',' << to_string(set->sections[i]) << ',' << format_double(tx.size) << ','
          << format_double(tx.bid) << '\n';
    }
  }
}

}  // namespace tfm
