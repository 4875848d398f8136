#include "tfm/txpool.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tfm/error.hpp"
#include "tfm/format.hpp"

namespace tfm {

void validate(Transaction const &tx)
{
  if (!std::isfinite(tx.size) || tx.size <= 0.0)
  {
    throw ParameterError("transaction " + std::to_string(tx.id) + ": size must be positive");
  }
  if (!std::isfinite(tx.bid) || tx.bid < 0.0)
  {
    throw ParameterError("transaction " + std::to_string(tx.id) + ": bid must be non-negative");
  }
  if (!std::isfinite(tx.valuation) || tx.valuation < 0.0)
  {
    throw ParameterError("transaction " + std::to_string(tx.id) +
                         ": valuation must be non-negative");
  }
}

Mempool::Mempool(std::vector<Transaction> txs, std::optional<double> capacity_hint)
  : txs_(std::move(txs))
  , capacity_hint_(capacity_hint)
{
  if (capacity_hint_ && !(*capacity_hint_ > 0.0))
  {
    throw ParameterError("mempool capacity hint must be positive");
  }
  index_.reserve(txs_.size());
  for (std::size_t i = 0; i < txs_.size(); ++i)
  {
    validate(txs_[i]);
    if (!index_.emplace(txs_[i].id, i).second)
    {
      throw ParameterError("duplicate transaction id " + std::to_string(txs_[i].id));
    }
  }
}

bool Mempool::contains(TxId id) const
{
  return index_.count(id) != 0;
}

std::optional<std::size_t> Mempool::position(TxId id) const
{
  auto it = index_.find(id);
  if (it == index_.end())
  {
    return std::nullopt;
  }
  return it->second;
}

Transaction const &Mempool::at(TxId id) const
{
  auto pos = position(id);
  if (!pos)
  {
    throw DomainError("transaction " + std::to_string(id) + " not in mempool");
  }
  return txs_[*pos];
}

double Mempool::total_size() const
{
  double total = 0.0;
  for (auto const &tx : txs_)
  {
    total += tx.size;
  }
  return total;
}

Mempool Mempool::with_bid(TxId id, double bid) const
{
  return with_bid_and_valuation(id, bid, at(id).valuation);
}

Mempool Mempool::with_bid_and_valuation(TxId id, double bid, double valuation) const
{
  auto pos = position(id);
  if (!pos)
  {
    throw DomainError("transaction " + std::to_string(id) + " not in mempool");
  }
  std::vector<Transaction> txs = txs_;
  txs[*pos].bid       = bid;
  txs[*pos].valuation = valuation;
  return Mempool(std::move(txs), capacity_hint_);
}

Mempool Mempool::merged(std::span<Transaction const> extra) const
{
  std::vector<Transaction> txs = txs_;
  txs.insert(txs.end(), extra.begin(), extra.end());
  return Mempool(std::move(txs), capacity_hint_);
}

TxId Mempool::next_free_id() const
{
  TxId next = 0;
  for (auto const &tx : txs_)
  {
    next = std::max(next, tx.id + 1);
  }
  return next;
}

void BidDistribution::validate() const
{
  auto finite = std::isfinite(a) && std::isfinite(b);
  switch (kind)
  {
  case Kind::Uniform:
    if (!finite || a < 0.0 || b < a)
    {
      throw ParameterError("uniform distribution needs 0 <= lo <= hi");
    }
    break;
  case Kind::TruncatedGaussian:
  case Kind::CensoredGaussian:
    if (!finite || b <= 0.0)
    {
      throw ParameterError("gaussian distribution needs sd > 0");
    }
    break;
  case Kind::Exponential:
    if (!std::isfinite(a) || a <= 0.0)
    {
      throw ParameterError("exponential distribution needs rate > 0");
    }
    break;
  case Kind::Constant:
    if (!std::isfinite(a) || a < 0.0)
    {
      throw ParameterError("constant distribution needs a non-negative value");
    }
    break;
  }
}

double BidDistribution::sample(Rng &rng) const
{
  switch (kind)
  {
  case Kind::Uniform:
    return rng.uniform(a, b);
  case Kind::TruncatedGaussian:
  {
    // Deep left tails make rejection hopeless; bounded retries then clamp.
    for (int attempt = 0; attempt < 1'000'000; ++attempt)
    {
      double x = rng.normal(a, b);
      if (x >= 0.0)
      {
        return x;
      }
    }
    throw ParameterError("truncated gaussian: acceptance probability too small");
  }
  case Kind::CensoredGaussian:
    return std::max(0.0, rng.normal(a, b));
  case Kind::Exponential:
    return rng.exponential(a);
  case Kind::Constant:
    return a;
  }
  return 0.0;
}

namespace {

std::string trim(std::string_view s)
{
  auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos)
  {
    return {};
  }
  auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

BidDistribution BidDistribution::parse(std::string const &text)
{
  auto open  = text.find('(');
  auto close = text.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open)
  {
    throw ConfigError("distribution '" + text + "': expected name(args)");
  }
  auto name = trim(std::string_view(text).substr(0, open));
  std::vector<double> args;
  std::stringstream   ss(text.substr(open + 1, close - open - 1));
  std::string         item;
  while (std::getline(ss, item, ','))
  {
    args.push_back(parse_double(trim(item), "distribution argument"));
  }
  auto need = [&](std::size_t count) {
    if (args.size() != count)
    {
      throw ConfigError("distribution '" + text + "': expected " + std::to_string(count) +
                        " argument(s)");
    }
  };
  BidDistribution d;
  if (name == "uniform")
  {
    need(2);
    d = uniform(args[0], args[1]);
  }
  else if (name == "truncated_gaussian")
  {
    need(2);
    d = truncated_gaussian(args[0], args[1]);
  }
  else if (name == "censored_gaussian")
  {
    need(2);
    d = censored_gaussian(args[0], args[1]);
  }
  else if (name == "exponential")
  {
    need(1);
    d = exponential(args[0]);
  }
  else if (name == "constant")
  {
    need(1);
    d = constant(args[0]);
  }
  else
  {
    throw ConfigError("unknown distribution '" + name + "'");
  }
  d.validate();
  return d;
}

std::string BidDistribution::to_string() const
{
  switch (kind)
  {
  case Kind::Uniform:
    return "uniform(" + format_double(a) + "," + format_double(b) + ")";
  case Kind::TruncatedGaussian:
    return "truncated_gaussian(" + format_double(a) + "," + format_double(b) + ")";
  case Kind::CensoredGaussian:
    return "censored_gaussian(" + format_double(a) + "," + format_double(b) + ")";
  case Kind::Exponential:
    return "exponential(" + format_double(a) + ")";
  case Kind::Constant:
    return "constant(" + format_double(a) + ")";
  }
  return {};
}

Mempool sample_mempool(std::size_t n, BidDistribution const &bids, BidDistribution const &sizes,
                       std::uint64_t seed, std::optional<BidDistribution> const &valuations)
{
  bids.validate();
  sizes.validate();
  if (sizes.kind == BidDistribution::Kind::CensoredGaussian ||
      (sizes.kind == BidDistribution::Kind::Constant && sizes.a <= 0.0))
  {
    throw ParameterError("size distribution must produce strictly positive sizes");
  }
  if (valuations)
  {
    valuations->validate();
  }

  // Separate streams keep bids stable when only the size law changes.
  Rng bid_rng(derive_seed(seed, 0));
  Rng size_rng(derive_seed(seed, 1));
  Rng val_rng(derive_seed(seed, 2));

  std::vector<Transaction> txs(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    auto &tx = txs[i];
    tx.id    = i;
    tx.bid   = bids.sample(bid_rng);
    do
    {
      tx.size = sizes.sample(size_rng);
    } while (tx.size <= 0.0);
    tx.valuation = valuations ? valuations->sample(val_rng) : tx.bid;
  }
  return Mempool(std::move(txs));
}

std::vector<Transaction> zero_fee_subset(Mempool const &m)
{
  std::vector<Transaction> out;
  std::copy_if(m.begin(), m.end(), std::back_inserter(out),
               [](Transaction const &tx) { return tx.bid == 0.0; });
  return out;
}

void write_mempool_csv(Mempool const &m, std::ostream &out)
{
  out << "id,size,bid,valuation\n";
  for (auto const &tx : m)
  {
    out << tx.id << ',' << format_double(tx.size) << ',' << format_double(tx.bid) << ','
        << format_double(tx.valuation) << '\n';
  }
}

void write_mempool_csv(Mempool const &m, std::string const &path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
  {
    throw IoError(path, "cannot open for writing");
  }
  write_mempool_csv(m, out);
  if (!out)
  {
    throw IoError(path, "write failed");
  }
}

Mempool read_mempool_csv(std::istream &in)
{
  std::string line;
  if (!std::getline(in, line) || trim(line) != "id,size,bid,valuation")
  {
    throw ConfigError("mempool csv: expected header 'id,size,bid,valuation'");
  }
  std::vector<Transaction> txs;
  std::size_t              line_no = 1;
  while (std::getline(in, line))
  {
    ++line_no;
    if (trim(line).empty())
    {
      continue;
    }
    std::stringstream        ss(line);
    std::string              cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ','))
    {
      cells.push_back(trim(cell));
    }
    if (cells.size() != 4)
    {
      throw ConfigError("mempool csv line " + std::to_string(line_no) + ": expected 4 fields");
    }
    Transaction tx;
    tx.id        = parse_u64(cells[0], "id");
    tx.size      = parse_double(cells[1], "size");
    tx.bid       = parse_double(cells[2], "bid");
    tx.valuation = parse_double(cells[3], "valuation");
    txs.push_back(tx);
  }
  return Mempool(std::move(txs));
}

Mempool read_mempool_csv(std::string const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw IoError(path, "cannot open for reading");
  }
  return read_mempool_csv(in);
}

}  // namespace tfm
