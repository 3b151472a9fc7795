#pragma once

// Asymptotic key rates of one-way SCW QKD against the collective
// beam-splitter attack, for the conventional single-detector receiver and
// for the interface used as a two-state discriminator.

#include <string_view>

#include "scwdr/interface_sim.hpp"

namespace scwdr {

enum class Scheme { Traditional, Discriminator };

std::string_view to_string(Scheme scheme);
Scheme parse_scheme(std::string_view name);

struct ChannelSpec {
  double eta = 1.0;

  static ChannelSpec from_loss_db(double loss_db);
  void validate() const;
};

/// Converts a loss in dB to a power transmission 10^(-dB/10).
double eta_from_loss_db(double loss_db);

struct ProtocolParams {
  double alpha0 = 0.5;
  double beta = 0.5;
  FilterSpec filter{};
  DetectorSpec det{};
  double f_ec = 1.25;
  double nu = 1e8;  // must equal 1 / det.T

  /// Reference receiver (0.99/1e-4 filter, 10% efficiency, 50 Hz dark counts, 3.3 ns gate, 10 ns period) with the given carrier amplitude and modulation depth.
  static ProtocolParams table2(double alpha0 = 0.5, double beta = 0.5);
  ProtocolParams with(double new_alpha0, double new_beta) const;
  void validate() const;
};

struct KeyRateResult {
  double K = 0.0;     // bits/s, may be negative
  double Q = 0.0;
  double P_B = 0.0;   // per pulse
  double chi = 0.0;   // bits
  Scheme scheme = Scheme::Traditional;
  double alpha0 = 0.0;
  double beta = 0.0;
  /// Set when a click probability left [0, 1] and was clipped.
  bool clipped = false;
};

/// Clips a linear click-model probability into [0, 1]; `clipped` is set (never
/// cleared) when that happens.
double clip_probability(double p, bool& clipped);

// Conventional receiver ---------------------------------------------------

/// Photons reaching the detector after Bob's modulation and filter, for
/// phi_A = phi_B (same_phase) or phi_A = phi_B + pi.
double n_ph_traditional(const ProtocolParams& params, double eta, bool same_phase);

/// (epsilon n_ph / T + gamma) dt, clipped to [0, 1].
double p_det(const ProtocolParams& params, double eta, bool same_phase, bool* clipped = nullptr);

/// P_det(0, pi) / (P_det(0, 0) + P_det(0, pi)).
double qber_traditional(const ProtocolParams& params, double eta);

/// Holevo information of Eve's beam-splitter copy, in bits.
double holevo_bound(double alpha0, double beta, double eta);

KeyRateResult key_rate_traditional(const ProtocolParams& params, double eta);

// Two-state discriminator --------------------------------------------------

enum class Port { Plus, Minus };

/// Mean photon number at port '+' or '-' for Alice's phase phi_A and local
/// phase phi_LO; sidebands truncated with choose_truncation(beta, 1e-12).
double n_pm_discriminator(const ProtocolParams& params, double eta, double phi_a, double phi_lo, Port port);

/// Click probability of the detector on one port, clipped to [0, 1].
double p_pm_discriminator(const ProtocolParams& params, double eta, double phi_a, double phi_lo, Port port,
                          bool* clipped = nullptr);

struct DiscriminatorQber {
  double Q = 0.0;
  double P_E = 0.0;
  double P_C = 0.0;
  bool clipped = false;
};

/// Error and correct-decoding probabilities for Alice's phase phi_a (0 by
/// default), Q = P_E / (P_C + P_E).
DiscriminatorQber qber_discriminator(const ProtocolParams& params, double eta, double phi_a = 0.0);

KeyRateResult key_rate_discriminator(const ProtocolParams& params, double eta);

KeyRateResult key_rate(Scheme scheme, const ProtocolParams& params, double eta);

}  // namespace scwdr
