#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tfm/mech.hpp"
#include "tfm/txpool.hpp"

namespace tfm {

enum class Property
{
  ZTi,
  Monotonicity,
  UIC,
  MIC,
};

enum class Verdict
{
  Satisfied,
  Violated,
  Inconclusive,
};

std::string to_string(Property p);
std::string to_string(Verdict v);

/// Counterexample attached to a Violated verdict, enough to replay it.
struct Witness
{
  std::optional<TxId>      tx;
  std::optional<double>    bid;       ///< deviating bid, or the raised bid for monotonicity
  std::optional<double>    epsilon;
  std::vector<Transaction> fakes;
  double                   honest    = 0.0;  ///< utility or probability on the honest arm
  double                   deviating = 0.0;
  std::string              detail;
};

struct PropertyReport
{
  Property               property = Property::ZTi;
  Verdict                verdict  = Verdict::Inconclusive;
  std::optional<Witness> witness;
  std::size_t            trials = 0;
  std::string            note;

  /// One `key=value` per line, terminated by a blank line.
  std::string        to_text() const;
  static std::string csv_header();  ///< `property,verdict,trials,witness,note`
  std::string        to_csv_row() const;
};

/// Zero-fee transaction inclusion. Throws PreconditionError without a zero-bid
/// real transaction, ParameterError if trials == 0.
PropertyReport estimate_zti(MechanismSpec const &spec, Mempool const &m, double capacity,
                            std::size_t trials, std::uint64_t seed);

/// Inclusion probability of `target` at its bid versus bid + epsilon, other
/// bids fixed, common random numbers across the two arms.
PropertyReport estimate_monotonicity(MechanismSpec const &spec, Mempool const &m, double capacity,
                                     TxId target, std::span<double const> epsilons,
                                     std::size_t trials, std::uint64_t seed);

/// Expected utility of `user` (valuation fixed) for each bid on the grid.
/// The grid must contain the truthful bid.
PropertyReport check_uic(MechanismSpec const &spec, Mempool const &m, double capacity, TxId user,
                         std::span<double const> bid_grid, std::size_t trials, std::uint64_t seed);

struct MicOptions
{
  std::size_t trials    = 2000;  ///< Monte Carlo runs for randomized honest utilities
  double      fake_size = 1.0;
};

/// Exhaustive fake-transaction and allocation-choice deviations within bounds.
/// Throws LimitError for fake_budget > 4, more than 8 grid bids, or an
/// instance too large to enumerate.
PropertyReport search_mic_deviation(MechanismSpec const &spec, Mempool const &m, double capacity,
                                    std::size_t fake_budget, std::span<double const> fake_bid_grid,
                                    std::uint64_t seed, MicOptions const &options = {});

/// Best miner utility over every feasible subset of `pool` the miner could
/// publish, under the spec's payment and burn rules.
double best_subset_utility(MechanismSpec const &spec, Mempool const &pool, double capacity);

struct CofReport
{
  double                opt_utility       = 0.0;
  double                mech_utility_mean = 0.0;
  double                mech_utility_sd   = 0.0;
  double                cof               = 0.0;
  std::optional<double> closed_form;
  std::optional<double> cov;  ///< sample sd / mean of the mechanism's utility
  std::size_t           trials = 0;
};

/// OPT is the first-price optimum; throws DegenerateInstanceError when it is 0.
CofReport empirical_cof(MechanismSpec const &spec, Mempool const &m, double capacity,
                        std::size_t trials, std::uint64_t seed);

/// Worst-case equal-size bound n/c + 1 - exp(-b/gamma).
double stfm_cof_bound(std::size_t n, std::size_t c, double b, double gamma);
/// 1/alpha for the split block with zero-fee filler.
double bitcoinzf_cof_bound(double alpha);
/// 1/(1 - phi).
double rtfm_cof(double phi);
/// ((1 - phi)/phi)^(1/2), the stated coefficient of variation of rTFM revenue.
double rtfm_cov(double phi);
/// CoV_opt^2 / CoV_rTFM^2 = phi/(1 - phi) with CoV_opt = 1.
double rtfm_cov_ratio(double phi);

struct GammaEstimate
{
  double gamma  = 0.0;
  double pr_cof = 0.0;  ///< P(sampled set equals the optimal set)
  double pr_zf  = 0.0;  ///< P(zero-fee share of the block >= alpha_target)
};

/// Monte Carlo pr_CoF and pr_ZF at one temperature.
GammaEstimate estimate_gamma_ratio(Mempool const &m, double capacity, double alpha_target,
                                   double gamma, std::size_t trials, std::uint64_t seed);

/// Smallest gamma in [gamma_lo, gamma_hi] with pr_CoF / pr_ZF <= phi_ratio,
/// by bisection. Throws InfeasibleError when no point of the interval qualifies.
double tune_gamma(Mempool const &m, double capacity, double alpha_target, double phi_ratio,
                  double gamma_lo, double gamma_hi, std::size_t trials, std::uint64_t seed);

}  // namespace tfm
