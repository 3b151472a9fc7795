#pragma once

// Per-channel-loss maximization of the key rate over (alpha0, beta).

#include <vector>

#include "scwdr/qkd_rates.hpp"

namespace scwdr {

/// Search box (low, high] on each axis plus the coarse grid resolution.
struct OptimizationBounds {
  double alpha0_low = 0.0;
  double alpha0_high = 2.0;
  double beta_low = 0.0;
  double beta_high = 1.5;
  int coarse_grid = 32;

  void validate() const;
};

struct SimplexOptions {
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  double diameter_tolerance = 1e-6;  // in box-normalized coordinates
  int max_iterations = 500;
};

struct OptimizeResult {
  double alpha0 = 0.0;
  double beta = 0.0;
  KeyRateResult rate;
  /// Best K found is <= 0: the channel is beyond the key-generation cutoff.
  bool below_cutoff = false;
  int evaluations = 0;
};

/// Maximizes K over the box: the coarse grid picks a start cell (ties go to
/// smaller alpha0, then smaller beta), then a Nelder-Mead simplex refines it.
/// `fixed` supplies everything except alpha0 and beta. When `warm_start` is
/// given, a second simplex starts there and the better of the two wins.
OptimizeResult optimize_key_rate(Scheme scheme, const ProtocolParams& fixed, double eta,
                                 const OptimizationBounds& bounds = {}, const SimplexOptions& simplex = {},
                                 const OptimizeResult* warm_start = nullptr);

struct SweepOptions {
  bool warm_start = true;
  unsigned threads = 1;  // used only without warm start
  SimplexOptions simplex{};
};

struct SweepRow {
  double loss_db = 0.0;
  double eta = 1.0;
  OptimizeResult optimum;
};

struct SweepTable {
  Scheme scheme = Scheme::Traditional;
  std::vector<SweepRow> rows;
  /// False when K increased with loss somewhere: an optimizer failure.
  bool monotone = true;
};

/// One optimized row per loss value; losses must be ascending.
SweepTable sweep(Scheme scheme, const ProtocolParams& fixed, const std::vector<double>& losses_db,
                 const OptimizationBounds& bounds = {}, const SweepOptions& options = {});

/// True when K never increases with loss, within a relative slack.
bool is_non_increasing(const std::vector<SweepRow>& rows, double relative_slack = 1e-9);

}  // namespace scwdr
