#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tfm/chain.hpp"
#include "tfm/rng.hpp"
#include "tfm/txpool.hpp"

namespace tfm {

enum class RuleTag
{
  Optimal,
  Greedy,
  Uniform,
  SplitBlock,
  Softmax,
  Rtfm,
};

/// Block region a transaction landed in.
enum class Section
{
  Main,
  Alpha,
  OneMinusAlpha,
  Rand,
  Opt,
};

std::string to_string(RuleTag tag);
std::string to_string(Section section);

/// A feasible block: selected ids (in selection order) with the section each one occupies.
struct AllocationResult
{
  std::vector<TxId>    selected;
  std::vector<Section> sections;
  double               total_size = 0.0;
  double               capacity   = 0.0;
  RuleTag              rule       = RuleTag::Optimal;

  bool        contains(TxId id) const;
  std::size_t count() const
  {
    return selected.size();
  }
  bool empty() const
  {
    return selected.empty();
  }
};

enum class Solver
{
  Auto,    ///< Exact up to the exhaustive limit, greedy beyond it.
  Exact,   ///< Branch and bound; SolverLimitError past the limit.
  Greedy,  ///< Highest value per unit size first, skipping what does not fit.
};

struct SolverOptions
{
  Solver      solver           = Solver::Exact;
  std::size_t exhaustive_limit = 24;
};

/// Knapsack over the miner's objective: real transactions contribute
/// size * payment, the miner's own fakes contribute -size * burn. `payment`
/// and `burn` are positional (mempool order). Transactions with a
/// non-positive contribution are never selected. Ties go to lower ids.
AllocationResult optimal_allocate(Mempool const &m, double capacity,
                                  std::span<double const> payment, std::span<double const> burn,
                                  SolverOptions const &options = {});

/// First-price objective: payment = bid, burn = 0.
AllocationResult optimal_allocate(Mempool const &m, double capacity,
                                  SolverOptions const &options = {});

/// Miner objective of a selection under positional payment/burn vectors.
double allocation_objective(Mempool const &m, AllocationResult const &a,
                            std::span<double const> payment, std::span<double const> burn);

/// Sum of size * bid over the selection.
double total_bid_value(Mempool const &m, AllocationResult const &a);

/// Repeatedly draws a uniformly random unselected transaction that fits.
AllocationResult uniform_allocate(Mempool const &m, double capacity, Rng &rng);
AllocationResult uniform_allocate(Mempool const &m, double capacity, std::uint64_t seed);

struct SplitBlockConfig
{
  double alpha = 1.0;  ///< Fraction of C filled by the optimizer.
  double delta = 0.0;  ///< Public constant fee of the (1 - alpha) section; 0 gives BitcoinZF.
  /// Every real user also posts a delta-fee twin of its transaction, so any
  /// real transaction may be placed in the (1 - alpha) section at fee delta.
  bool twin_delta_bids = false;

  void   validate() const;
  double alpha_capacity(double capacity) const
  {
    return alpha * capacity;
  }
  double one_minus_alpha_capacity(double capacity) const
  {
    return capacity - alpha_capacity(capacity);
  }
};

/// Fills the (1 - alpha) section first (fake_fill entries in order, then
/// uniformly from delta-fee candidates), then the alpha section by the
/// optimizer over the remaining non-delta transactions. An unfillable
/// (1 - alpha) section is left partially filled. `alpha_payment` is
/// positional for `m`; empty means payment = bid.
AllocationResult splitblock_allocate(Mempool const &m, double capacity,
                                     SplitBlockConfig const &cfg,
                                     std::span<Transaction const> fake_fill, Rng &rng,
                                     std::span<double const> alpha_payment = {},
                                     SolverOptions const &options = {});

/// Softmax-with-temperature sampling without replacement. Each draw is
/// restricted to transactions that still fit; stops when none fits.
/// Throws ParameterError unless gamma > 0.
AllocationResult stfm_allocate(Mempool const &m, double capacity, double gamma, Rng &rng);
AllocationResult stfm_allocate(Mempool const &m, double capacity, double gamma,
                               std::uint64_t seed);

/// exp(b_i / gamma) / sum_j exp(b_j / gamma), positional. Computed with a
/// max shift. Throws DomainError on an empty mempool.
std::vector<double> stfm_first_draw_distribution(Mempool const &m, double gamma);

struct RtfmSample
{
  AllocationResult rand_set;
  AllocationResult opt_set;
  Hash32           rand_root{};
  Hash32           opt_root{};
};

/// Canonical Merkle leaf of a transaction: id, size bits, bid bits (BE64 each).
Bytes transaction_leaf(Transaction const &tx);
/// Merkle root over the selected transactions in selection order; the all-zero hash when empty.
Hash32 selection_root(Mempool const &m, AllocationResult const &a);

/// Rule 1 (uniform set over `m`) and Rule 2 (first-price optimum over `m`).
RtfmSample rtfm_sample(Mempool const &m, double capacity, Rng &rng,
                       SolverOptions const &options = {});
RtfmSample rtfm_sample(Mempool const &m, double capacity, std::uint64_t seed,
                       SolverOptions const &options = {});

/// General form: uniform set over `rand_pool`, optimum over `opt_pool` under
/// the given positional payment/burn vectors (for `opt_pool`).
RtfmSample rtfm_sample(Mempool const &rand_pool, Mempool const &opt_pool, double capacity,
                       std::span<double const> payment, std::span<double const> burn, Rng &rng,
                       SolverOptions const &options = {});

/// CSV: `id,section,size,bid`.
void write_allocation_csv(Mempool const &m, AllocationResult const &a, std::ostream &out);
void write_allocation_csv(Mempool const &m, RtfmSample const &s, std::ostream &out);

}  // namespace tfm
