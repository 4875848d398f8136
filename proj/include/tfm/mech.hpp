#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>

#include "tfm/alloc.hpp"
#include "tfm/chain.hpp"
#include "tfm/format.hpp"
#include "tfm/txpool.hpp"

namespace tfm {

struct OptimalRule
{
  friend bool operator==(OptimalRule const &, OptimalRule const &) = default;
};
struct UniformRule
{
  friend bool operator==(UniformRule const &, UniformRule const &) = default;
};
struct SplitBlockRule
{
  SplitBlockConfig config;
  friend bool      operator==(SplitBlockRule const &a, SplitBlockRule const &b)
  {
    return a.config.alpha == b.config.alpha && a.config.delta == b.config.delta &&
           a.config.twin_delta_bids == b.config.twin_delta_bids;
  }
};
struct SoftmaxRule
{
  double      gamma = 1.0;
  friend bool operator==(SoftmaxRule const &, SoftmaxRule const &) = default;
};
struct RtfmRule
{
  double      phi = 0.5;
  friend bool operator==(RtfmRule const &, RtfmRule const &) = default;
};

using AllocationRule = std::variant<OptimalRule, UniformRule, SplitBlockRule, SoftmaxRule, RtfmRule>;

enum class PaymentRule
{
  FirstPrice,
  SecondPriceLowestWinning,
  PostedPrice,  ///< p = b - lambda
};

enum class BurnRule
{
  None,
  PostedPrice,  ///< q = lambda
};

enum class MechType
{
  Deterministic,
  Randomized,
};

std::string to_string(PaymentRule rule);
std::string to_string(BurnRule rule);
std::string to_string(MechType type);

struct MechanismSpec
{
  AllocationRule allocation = OptimalRule{};
  PaymentRule    payment    = PaymentRule::FirstPrice;
  BurnRule       burning    = BurnRule::None;
  double         lambda     = 0.0;
  SolverOptions  solver{};

  /// Softmax, rTFM and uniform allocations are randomized; the rest deterministic.
  MechType type() const;
  /// Throws ParameterError on an inconsistent tuple.
  void validate() const;
  std::string allocation_name() const;

  static MechanismSpec fpa();
  static MechanismSpec spa();
  static MechanismSpec eip1559(double lambda);
  /// Every user posts a delta-fee twin; the (1 - alpha) section pays delta.
  static MechanismSpec bitcoinf(double alpha, double delta);
  static MechanismSpec bitcoinzf(double alpha);
  static MechanismSpec stfm(double gamma);
  static MechanismSpec rtfm(double phi);
  static MechanismSpec uniform();

  /// `allocation=softmax`, `gamma=2`, `payment=fpa`, ... one pair per line.
  std::string          to_config() const;
  static MechanismSpec from_config(std::string_view text);
  /// Consumes the mechanism keys of `pairs` on top of `base`; other keys are left in place.
  static MechanismSpec from_pairs(KeyValues &pairs, MechanismSpec const &base);
  static MechanismSpec from_pairs(KeyValues &pairs);

  friend bool operator==(MechanismSpec const &a, MechanismSpec const &b)
  {
    return a.allocation == b.allocation && a.payment == b.payment && a.burning == b.burning &&
           a.lambda == b.lambda && a.solver.solver == b.solver.solver &&
           a.solver.exhaustive_limit == b.solver.exhaustive_limit;
  }
};

struct PaymentBurn
{
  double payment = 0.0;
  double burn    = 0.0;
};

/// Per-unit (p, q) of one included transaction. `lowest_winning_bid` is the
/// SPA clearing price. Throws InfeasibleInclusionError for a posted-price bid
/// below lambda.
PaymentBurn apply_payment_rule(MechanismSpec const &spec, Transaction const &tx,
                               double lowest_winning_bid);

/// Transactions the allocation may consider: posted-price payment drops bids below lambda.
Mempool eligible_candidates(MechanismSpec const &spec, Mempool const &pool);

/// Positional per-unit optimizer objective: payment if a real transaction is
/// included, burn if one of the miner's fakes is.
struct MinerObjective
{
  std::vector<double> payment;
  std::vector<double> burn;
};
MinerObjective miner_objective(MechanismSpec const &spec, Mempool const &pool);

enum class TossMode
{
  Analytic,  ///< Seeded Bernoulli(phi) draw.
  ProofOfWork,  ///< Mine a block over both roots and read the hash-threshold toss.
};

struct RunOptions
{
  TossMode      toss = TossMode::Analytic;
  Hash32        parent_hash{};
  std::uint64_t height = 0;
  UInt256       target = UInt256(1) << 240;
  MiningOptions mining{};
};

struct MechanismOutcome
{
  AllocationResult              allocation;
  std::map<TxId, double>        payment_per_unit;
  std::map<TxId, double>        burn_per_unit;
  std::map<TxId, double>        user_utilities;  ///< Real users only; 0 when excluded.
  double                        miner_utility = 0.0;
  std::optional<int>            coin_toss;
  std::optional<RtfmSample>     rtfm;
  std::optional<MinedBlock>     block;
};

/// Runs allocation over m plus the miner's fakes, then payments, burns and
/// both utilities. Fakes must carry ids absent from `m`; they are tagged fake.
MechanismOutcome run_mechanism(MechanismSpec const &spec, Mempool const &m, double capacity,
                               std::span<Transaction const> fakes, std::uint64_t seed,
                               RunOptions const &options = {});

/// Fee income from real included transactions minus burn on included fakes.
double miner_utility(std::span<Transaction const> block_txs, std::span<TxId const> fakes,
                     std::map<TxId, double> const &p, std::map<TxId, double> const &q);

/// Nearest rational with denominator 2^32, used to carry a real phi into a PoW toss.
Difficulty difficulty_for_phi(double phi, UInt256 const &target);

struct BaseFeeState
{
  double lambda = 0.0;
  double step   = 0.125;

  void validate() const;
};

/// lambda * (1 + step) when the block exceeds the target size, else lambda * (1 - step).
BaseFeeState update_base_fee(BaseFeeState const &state, double block_total_size,
                             double capacity_target);

/// True iff the total size of transactions with valuation above lambda fits in the block.
bool is_excessively_low(double lambda, Mempool const &m, double capacity);

}  // namespace tfm
