#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tfm/rng.hpp"

namespace tfm {

using TxId = std::uint64_t;

/// A bid-bearing unit of block space. Bid and valuation are per unit size.
struct Transaction
{
  TxId   id        = 0;
  double size      = 1.0;
  double bid       = 0.0;
  double valuation = 0.0;
  bool   fake      = false;

  double total_fee() const
  {
    return size * bid;
  }

  friend bool operator==(Transaction const &, Transaction const &) = default;
};

/// Throws ParameterError unless size > 0, bid >= 0 and valuation >= 0 (all finite).
void validate(Transaction const &tx);

/// Ordered, id-unique collection of outstanding transactions.
///
/// Iteration follows insertion order. Positional per-transaction vectors used
/// across the library (payments, burns, probabilities) are indexed by this order.
class Mempool
{
public:
  Mempool() = default;
  explicit Mempool(std::vector<Transaction> txs, std::optional<double> capacity_hint = {});

  std::span<Transaction const> transactions() const
  {
    return txs_;
  }
  auto begin() const
  {
    return txs_.begin();
  }
  auto end() const
  {
    return txs_.end();
  }
  std::size_t size() const
  {
    return txs_.size();
  }
  bool empty() const
  {
    return txs_.empty();
  }
  Transaction const &operator[](std::size_t pos) const
  {
    return txs_[pos];
  }

  bool                       contains(TxId id) const;
  std::optional<std::size_t> position(TxId id) const;
  /// Throws DomainError if the id is absent.
  Transaction const &at(TxId id) const;

  double                total_size() const;
  std::optional<double> capacity_hint() const
  {
    return capacity_hint_;
  }

  /// Copy with one transaction's bid replaced.
  Mempool with_bid(TxId id, double bid) const;
  /// Copy with one transaction's bid and valuation replaced.
  Mempool with_bid_and_valuation(TxId id, double bid, double valuation) const;
  /// This mempool followed by `extra` (ids must stay unique).
  Mempool merged(std::span<Transaction const> extra) const;

  /// One past the largest id; ids from here on are all free.
  TxId next_free_id() const;

private:
  std::vector<Transaction>               txs_;
  std::unordered_map<TxId, std::size_t> index_;
  std::optional<double>                  capacity_hint_;
};

/// Sampling law for bids, valuations or sizes.
struct BidDistribution
{
  enum class Kind
  {
    Uniform,
    TruncatedGaussian,
    CensoredGaussian,
    Exponential,
    Constant,
  };

  Kind   kind = Kind::Constant;
  double a    = 0.0;  // lo | mean | rate | value
  double b    = 0.0;  // hi | sd

  static BidDistribution uniform(double lo, double hi)
  {
    return {Kind::Uniform, lo, hi};
  }
  /// Gaussian conditioned on the draw being >= 0 (rejection sampling).
  static BidDistribution truncated_gaussian(double mean, double sd)
  {
    return {Kind::TruncatedGaussian, mean, sd};
  }
  /// Gaussian with negative draws clamped to exactly 0.
  static BidDistribution censored_gaussian(double mean, double sd)
  {
    return {Kind::CensoredGaussian, mean, sd};
  }
  static BidDistribution exponential(double rate)
  {
    return {Kind::Exponential, rate, 0.0};
  }
  static BidDistribution constant(double value)
  {
    return {Kind::Constant, value, 0.0};
  }

  void   validate() const;
  double sample(Rng &rng) const;

  /// Parses `uniform(0,5)`, `censored_gaussian(4,3)`, `exponential(1.5)`, ...
  static BidDistribution parse(std::string const &text);
  std::string            to_string() const;

  friend bool operator==(BidDistribution const &, BidDistribution const &) = default;
};

/// n transactions with ids 0..n-1. Valuations equal bids unless `valuations`
/// is given. Pure function of its arguments.
Mempool sample_mempool(std::size_t n, BidDistribution const &bids, BidDistribution const &sizes,
                       std::uint64_t seed,
                       std::optional<BidDistribution> const &valuations = std::nullopt);

/// Transactions with bid exactly 0, in mempool order.
std::vector<Transaction> zero_fee_subset(Mempool const &m);

/// CSV with header `id,size,bid,valuation`.
void    write_mempool_csv(Mempool const &m, std::ostream &out);
void    write_mempool_csv(Mempool const &m, std::string const &path);
Mempool read_mempool_csv(std::istream &in);
Mempool read_mempool_csv(std::string const &path);

}  // namespace tfm
