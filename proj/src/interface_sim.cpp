#include "scwdr/interface_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "scwdr/parallel.hpp"

namespace scwdr {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::size_t slot(int m, int S) { return static_cast<std::size_t>(m + S); }

bool selected(int m, SidebandSelection selection) {
  switch (selection) {
    case SidebandSelection::All:
      return m != 0;
    case SidebandSelection::FirstOrder:
      return m == 1 || m == -1;
    case SidebandSelection::PlusOne:
      return m == 1;
  }
  return false;
}

}  // namespace

ModulationParams ModulationParams::make(double beta, double phi, double omega) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw DomainError("modulation depth must be finite and >= 0");
  if (!std::isfinite(phi)) throw DomainError("subcarrier phase must be finite");
  double reduced = std::fmod(phi, kTwoPi);
  if (reduced < 0.0) reduced += kTwoPi;
  if (reduced >= kTwoPi) reduced = 0.0;
  return ModulationParams{beta, omega, reduced};
}

MultimodeCoherentState::MultimodeCoherentState(Complex alpha0, ModulationParams mod,
                                               std::vector<Complex> amps)
    : alpha0_(alpha0), mod_(mod), truncation_(static_cast<int>(amps.size() / 2)), amps_(std::move(amps)) {
  if (amps_.size() % 2 != 1) throw DomainError("sideband list must have odd length 2S+1");
  for (const Complex& a : amps_) {
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) throw DomainError("non-finite sideband amplitude");
  }
}

Complex MultimodeCoherentState::amp(int m) const {
  if (std::abs(m) > truncation_) return Complex{};
  return amps_[slot(m, truncation_)];
}

void FilterSpec::validate() const {
  if (!(r >= 0.0 && r <= 1.0)) throw DomainError("filter r must lie in [0, 1]");
  if (!(rho >= 0.0 && rho <= 1.0)) throw DomainError("filter rho must lie in [0, 1]");
}

void DetectorSpec::validate() const {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw DomainError("detector epsilon must lie in [0, 1]");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw DomainError("detector gamma must be >= 0");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("detector gate duration must be > 0");
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("detector period must be > 0");
}

MultimodeCoherentState make_scw_state(Complex alpha0, const ModulationParams& mod, int S) {
  if (S < 1) throw DomainError("truncation order S must be >= 1");
  const ModulationParams m = ModulationParams::make(mod.beta, mod.phi, mod.omega);
  const std::vector<double> j = bessel_j_table(S, m.beta);
  std::vector<Complex> amps(2 * static_cast<std::size_t>(S) + 1);
  for (int k = -S; k <= S; ++k) {
    double jk = j[static_cast<std::size_t>(std::abs(k))];
    if (k < 0 && (-k) % 2 == 1) jk = -jk;
    amps[slot(k, S)] = alpha0 * jk * std::polar(1.0, k * m.phi);
  }
  return MultimodeCoherentState(alpha0, m, std::move(amps));
}

int choose_truncation(double beta, double tol) {
  if (!(tol > 0.0)) throw DomainError("truncation tolerance must be > 0");
  constexpr int kFloor = 5;
  constexpr int kTailTerms = 60;
  const double b = std::abs(beta);
  if (b == 0.0) return kFloor;
  const int top = static_cast<int>(b) + 2 * kTailTerms + kFloor;
  const std::vector<double> j = bessel_j_table(top, b);
  // tail(S) = 2 * sum_{m > S} J_m^2, accumulated from the far end
  std::vector<double> tail(static_cast<std::size_t>(top) + 1, 0.0);
  for (int m = top - 1; m >= 0; --m) {
    const double jn = j[static_cast<std::size_t>(m) + 1];
    tail[static_cast<std::size_t>(m)] = tail[static_cast<std::size_t>(m) + 1] + 2.0 * jn * jn;
  }
  for (int S = kFloor; S < top; ++S) {
    if (tail[static_cast<std::size_t>(S)] < tol) return S;
  }
  return top;
}

DualRailOutput interface_transform(const MultimodeCoherentState& input, const FilterSpec& filter,
                                   const ModulationParams& mod_lo, CoefficientMode mode,
                                   Complex path_phase) {
  filter.validate();
  const double beta = input.modulation().beta;
  if (std::abs(mod_lo.beta - beta) > 1e-12 * std::max(1.0, beta)) {
    throw DomainError("local modulation depth differs from the input state's");
  }
  if (std::abs(std::abs(path_phase) - 1.0) > 1e-12) throw DomainError("path phase must have unit modulus");

  const int S = input.truncation();
  const std::vector<double> j = bessel_j_table(S, beta);
  const double j0 = j[0];
  const double r = filter.r;

  double carrier_t = 1.0 - r;      // carrier through a filter
  double carrier_r = r;            // carrier reflected towards the local modulator
  double sideband_t = 1.0 - filter.rho;
  if (mode == CoefficientMode::Physical) {
    carrier_t = std::sqrt(1.0 - r);
    carrier_r = std::sqrt(r);
    sideband_t = std::sqrt(1.0 - filter.rho);
  }

  const Complex carrier = input.amp(0);
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  std::vector<Complex> plus(input.amps().size());
  std::vector<Complex> minus(input.amps().size());

  plus[slot(0, S)] = carrier * (carrier_t + j0 * carrier_r * carrier_t) * inv_sqrt2;
  minus[slot(0, S)] = carrier * (carrier_t - j0 * carrier_r * carrier_t) * inv_sqrt2;
  for (int m = -S; m <= S; ++m) {
    if (m == 0) continue;
    double jm = j[static_cast<std::size_t>(std::abs(m))];
    if (m < 0 && (-m) % 2 == 1) jm = -jm;
    const Complex x = sideband_t * input.amp(m);
    const Complex y = sideband_t * carrier_r * carrier * jm * std::polar(1.0, m * mod_lo.phi);
    plus[slot(m, S)] = (x + y) * inv_sqrt2;
    minus[slot(m, S)] = (x - y) * inv_sqrt2;
  }
  return DualRailOutput{MultimodeCoherentState(input.alpha0(), input.modulation(), std::move(plus)),
                        MultimodeCoherentState(input.alpha0(), input.modulation(), std::move(minus)),
                        path_phase};
}

std::pair<Complex, Complex> polarization_amplitudes(double delta_phi, int m) {
  if (m != 1 && m != -1) throw DomainError("polarization amplitudes are defined for m = +1 or -1");
  return {Complex{std::cos(0.5 * delta_phi), 0.0}, Complex{m * std::sin(0.5 * delta_phi), 0.0}};
}

double detected_photons(const MultimodeCoherentState& state, SidebandSelection selection) {
  const int S = state.truncation();
  double n = 0.0;
  for (int m = -S; m <= S; ++m) {
    if (selected(m, selection)) n += std::norm(state.amp(m));
  }
  return n;
}

double mean_sideband_photons(const MultimodeCoherentState& state) {
  return detected_photons(state, SidebandSelection::All);
}

double click_rate(const MultimodeCoherentState& state, const DetectorSpec& det, SidebandSelection selection) {
  return det.gamma + det.epsilon / det.dt * detected_photons(state, selection);
}

double expected_clicks(const MultimodeCoherentState& state, const DetectorSpec& det, double duration) {
  if (!(duration > 0.0)) throw DomainError("acquisition duration must be > 0");
  det.validate();
  return click_rate(state, det, SidebandSelection::All) * duration;
}

std::vector<PhaseScanRow> phase_scan(double beta, Complex alpha0, const FilterSpec& filter,
                                     const DetectorSpec& det, const std::vector<double>& phis,
                                     const ScanOptions& options) {
  if (phis.empty()) throw DomainError("phase scan needs at least one phase");
  det.validate();
  filter.validate();
  const int S = options.truncation > 0 ? options.truncation : choose_truncation(beta, 1e-12);
  const ModulationParams lo = ModulationParams::make(beta, 0.0);

  std::vector<PhaseScanRow> rows(phis.size());
  parallel_for(phis.size(), options.threads, [&](std::size_t i) {
    const auto state = make_scw_state(alpha0, ModulationParams::make(beta, phis[i]), S);
    const auto out = interface_transform(state, filter, lo, options.mode, options.path_phase);
    rows[i].delta_phi = phis[i];
    rows[i].rate_h = click_rate(out.plus, det, options.sidebands);
    rows[i].rate_v = click_rate(out.minus, det, options.sidebands);
  });

  double max_h = 0.0;
  double max_v = 0.0;
  for (const auto& row : rows) {
    max_h = std::max(max_h, row.rate_h);
    max_v = std::max(max_v, row.rate_v);
  }
  for (auto& row : rows) {
    row.rate_h_norm = max_h > 0.0 ? row.rate_h / max_h : 0.0;
    row.rate_v_norm = max_v > 0.0 ? row.rate_v / max_v : 0.0;
  }
  return rows;
}

double visibility(const std::vector<double>& rates) {
  if (rates.empty()) throw DomainError("visibility of an empty scan");
  const auto [lo, hi] = std::minmax_element(rates.begin(), rates.end());
  if (*lo < 0.0) throw DomainError("visibility: negative rate");
  if (*hi + *lo <= 0.0) throw DomainError("visibility undefined for all-zero rates");
  return (*hi - *lo) / (*hi + *lo);
}

std::vector<VisibilityRow> visibility_vs_beta(const std::vector<double>& betas, Complex alpha0,
                                              const FilterSpec& filter, const DetectorSpec& det,
                                              const ScanOptions& options, int scan_points) {
  if (scan_points < 4) throw DomainError("visibility scan needs at least 4 phase points");
  for (double b : betas) {
    if (!(b >= 0.0)) throw DomainError("modulation depth must be >= 0");
  }
  std::vector<double> phis(static_cast<std::size_t>(scan_points));
  for (int k = 0; k < scan_points; ++k) phis[static_cast<std::size_t>(k)] = kTwoPi * k / scan_points;

  ScanOptions inner = options;
  inner.threads = 1;
  std::vector<VisibilityRow> rows(betas.size());
  parallel_for(betas.size(), options.threads, [&](std::size_t i) {
    const auto scan = phase_scan(betas[i], alpha0, filter, det, phis, inner);
    std::vector<double> h(scan.size());
    std::transform(scan.begin(), scan.end(), h.begin(), [](const PhaseScanRow& r) { return r.rate_h; });
    rows[i] = VisibilityRow{betas[i], visibility(h)};
  });
  return rows;
}

double alpha0_for_peak_rate(double beta, const FilterSpec& filter, const DetectorSpec& det, double peak_rate,
                            CoefficientMode mode) {
  if (!(peak_rate > 0.0)) throw DomainError("peak rate must be > 0");
  if (!(beta > 0.0)) throw DomainError("peak rate tuning needs beta > 0");
  det.validate();
  const auto state = make_scw_state(Complex{1.0, 0.0}, ModulationParams::make(beta, 0.0), 1);
  const auto out = interface_transform(state, filter, ModulationParams::make(beta, 0.0), mode);
  const double per_unit = det.epsilon / det.dt * std::norm(out.plus.amp(1));
  if (!(per_unit > 0.0)) throw DomainError("configuration transmits no m = +1 light");
  return std::sqrt(peak_rate / per_unit);
}

}  // namespace scwdr
