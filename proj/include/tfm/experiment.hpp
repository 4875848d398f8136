#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tfm/audit.hpp"
#include "tfm/mech.hpp"
#include "tfm/txpool.hpp"

namespace tfm {

enum class SweepParam
{
  Phi,
  Gamma,
  SizeRatio,
};

std::string to_string(SweepParam p);

struct ExperimentConfig
{
  MechanismSpec       mechanism;
  std::size_t         n        = 1000;
  double              capacity = 100.0;  ///< rTFM sweeps; STFM sweeps derive C from size_ratio
  BidDistribution     bid_dist  = BidDistribution::censored_gaussian(4.0, 3.0);
  BidDistribution     size_dist = BidDistribution::constant(1.0);
  SweepParam          sweep_param = SweepParam::Phi;
  std::vector<double> sweep_values;
  double              size_ratio = 10.0;  ///< size(M)/C when sweeping gamma
  std::size_t         runs       = 1000;
  std::uint64_t       seed       = 42;
  std::string         output_path;
  std::string         plot_data_path;
  std::size_t         jobs = 1;

  /// Throws ConfigError on empty or non-finite sweep values, runs == 0, etc.
  void validate() const;

  /// Default phi sweep: rTFM, n = 1000, C = 100, unit sizes, phi = 0, 0.1, ..., 1.
  static ExperimentConfig rtfm_defaults();
  /// Softmax sweep: sizes Exp(1), ratio 10, gamma grid over [0.1, 50], 100 runs.
  static ExperimentConfig stfm_defaults();

  /// `key = value` text. Mechanism keys as in MechanismSpec::from_config plus
  /// n, capacity, bids, sizes, sweep, values, size_ratio, runs, seed, output,
  /// plot_data, jobs. Unknown keys are rejected.
  static ExperimentConfig parse(std::string_view text);
  static ExperimentConfig load(std::filesystem::path const &path);
};

struct SweepRow
{
  double sweep_value           = 0.0;
  double normalized_revenue    = 0.0;  ///< mean of mechanism utility / OPT
  double revenue_stderr        = 0.0;
  double zero_fee_fraction     = 0.0;  ///< confirmed bid-0 transactions / n
  double zff_stderr            = 0.0;
  double zero_payment_fraction = 0.0;  ///< confirmed zero-payment transactions / n
  double zpf_stderr            = 0.0;
  double cof                   = 0.0;
  double cof_stderr            = 0.0;
  double zfi                   = 0.0;  ///< zero-fee size share of the block
  double zfi_stderr            = 0.0;
};

/// One row per phi. Analytic coin toss; the same mempool and random stream
/// per run across every phi value.
std::vector<SweepRow> run_rtfm_sweep(ExperimentConfig const &cfg);

/// One row per gamma or size ratio. CoF is the per-run ratio of the greedy
/// utility to the softmax utility, averaged over runs.
std::vector<SweepRow> run_stfm_sweep(ExperimentConfig const &cfg);

/// `sweep_value,normalized_revenue,revenue_stderr,zero_fee_fraction,zff_stderr,cof,zfi`.
void emit_csv(std::vector<SweepRow> const &rows, std::ostream &out);
/// Throws IoError carrying the path on failure.
void emit_csv(std::vector<SweepRow> const &rows, std::filesystem::path const &path);

/// Whitespace table with a `#` header line, every SweepRow field included.
void emit_plot_data(std::vector<SweepRow> const &rows, std::ostream &out);
void emit_plot_data(std::vector<SweepRow> const &rows, std::filesystem::path const &path);

/// Instance and parameters for a single auditor run.
struct AuditConfig
{
  MechanismSpec       mechanism;
  Mempool             mempool;
  double              capacity = 1.0;
  std::size_t         trials   = 1000;
  std::uint64_t       seed     = 1;
  std::optional<TxId> target;
  std::vector<double> epsilons{0.5, 1.0};
  std::optional<TxId> user;
  std::vector<double> bid_grid;
  std::size_t         fake_budget = 2;
  std::vector<double> fake_bids;
  double              fake_size    = 1.0;
  double              alpha_target = 0.2;
  double              phi_ratio    = 2.0;
  double              gamma_lo     = 0.1;
  double              gamma_hi     = 50.0;

  /// Mempool from `mempool = <csv path>` (relative to `base_dir`) or inline
  /// `bids`, `sizes`, `valuations` lists (ids 0..n-1).
  static AuditConfig parse(std::string_view text, std::filesystem::path const &base_dir = {});
  static AuditConfig load(std::filesystem::path const &path);
};

/// Runs `property` (zti, monotonicity, uic, mic or cof) and renders the report as text.
std::string run_audit(AuditConfig const &cfg, std::string const &property);

}  // namespace tfm
