#pragma once

// Subcarrier-wave (SCW) states, the SCW -> dual-rail interface and the
// detector click model used for interference scans.

#include <cstddef>
#include <utility>
#include <vector>

#include "scwdr/mathcore.hpp"

namespace scwdr {

/// Sinusoidal phase modulation. `omega` (rad/s) is carried as metadata.
struct ModulationParams {
  double beta = 0.0;
  double omega = 0.0;
  double phi = 0.0;

  /// Validates beta >= 0 and reduces phi to [0, 2pi).
  static ModulationParams make(double beta, double phi, double omega = 0.0);
};

/// Product of coherent states over sidebands m = -S..S; m = 0 is the carrier.
class MultimodeCoherentState {
 public:
  MultimodeCoherentState(Complex alpha0, ModulationParams mod, std::vector<Complex> amps);

  Complex alpha0() const { return alpha0_; }
  const ModulationParams& modulation() const { return mod_; }
  int truncation() const { return truncation_; }

  /// Amplitude of sideband m, |m| <= S.
  Complex amp(int m) const;
  const std::vector<Complex>& amps() const { return amps_; }

 private:
  Complex alpha0_;
  ModulationParams mod_;
  int truncation_;
  std::vector<Complex> amps_;
};

/// Carrier reflection r and sideband suppression rho, both power coefficients.
struct FilterSpec {
  double r = 0.99;
  double rho = 1e-4;

  void validate() const;
};

struct DetectorSpec {
  double epsilon = 0.1;   // quantum efficiency
  double gamma = 50.0;    // dark count rate, Hz
  double dt = 3.3e-9;     // gate duration, s
  double T = 10e-9;       // repetition period, s

  void validate() const;
};

/// How filter coefficients enter the output amplitudes.
enum class CoefficientMode {
  /// r, 1-r and 1-rho multiply amplitudes exactly as in the published
  /// output-state expression.
  Verbatim,
  /// sqrt(r), sqrt(1-r), sqrt(1-rho) on amplitudes, i.e. the coefficients
  /// treated as power transmissions.
  Physical,
};

/// The two beamsplitter output ports. Port '+' is routed to H and port '-'
/// to V; `path_phase` is the factor applied to the V arm before the PBS.
struct DualRailOutput {
  MultimodeCoherentState plus;
  MultimodeCoherentState minus;
  Complex path_phase{0.0, -1.0};
};

/// amps[m] = alpha0 J_m(beta) e^{i m phi}, m = -S..S.
MultimodeCoherentState make_scw_state(Complex alpha0, const ModulationParams& mod, int S);

/// Smallest S >= 5 whose discarded tail sum_{|m|>S} J_m(beta)^2 is below tol.
int choose_truncation(double beta, double tol = 1e-12);

/// Filters, local re-modulation of the reflected carrier with `mod_lo`, and
/// the 50:50 beamsplitter. The input and local modulation must share beta.
DualRailOutput interface_transform(const MultimodeCoherentState& input, const FilterSpec& filter,
                                   const ModulationParams& mod_lo,
                                   CoefficientMode mode = CoefficientMode::Verbatim,
                                   Complex path_phase = Complex{0.0, -1.0});

/// Single-photon polarization amplitudes for sideband m = +-1, up to a global
/// phase: (cos(dphi/2), m sin(dphi/2)).
std::pair<Complex, Complex> polarization_amplitudes(double delta_phi, int m);

/// sum over m != 0 of |amps[m]|^2.
double mean_sideband_photons(const MultimodeCoherentState& state);

/// Which sidebands reach the detector.
enum class SidebandSelection {
  All,         // every m != 0
  FirstOrder,  // m = +-1
  PlusOne,     // m = +1 only
};

/// Mean sideband photons restricted to a selection.
double detected_photons(const MultimodeCoherentState& state, SidebandSelection selection);

/// Linear click model: (gamma + epsilon/dt * n) * duration, with n the mean
/// number of sideband photons per gate.
double expected_clicks(const MultimodeCoherentState& state, const DetectorSpec& det, double duration);

/// Click rate (1/s) for a selection of sidebands.
double click_rate(const MultimodeCoherentState& state, const DetectorSpec& det,
                  SidebandSelection selection = SidebandSelection::All);

struct ScanOptions {
  SidebandSelection sidebands = SidebandSelection::All;
  CoefficientMode mode = CoefficientMode::Verbatim;
  Complex path_phase{0.0, -1.0};
  int truncation = 0;  // 0: choose_truncation(beta, 1e-12)
  unsigned threads = 1;
};

struct PhaseScanRow {
  double delta_phi = 0.0;
  double rate_h = 0.0;  // clicks/s
  double rate_v = 0.0;
  double rate_h_norm = 0.0;
  double rate_v_norm = 0.0;
};

/// Click rates of both ports for each phase difference phi_in - phi_LO
/// (phi_LO = 0), each channel normalized to its maximum over the scan.
std::vector<PhaseScanRow> phase_scan(double beta, Complex alpha0, const FilterSpec& filter,
                                     const DetectorSpec& det, const std::vector<double>& phis,
                                     const ScanOptions& options = {});

/// (max - min) / (max + min).
double visibility(const std::vector<double>& rates);

struct VisibilityRow {
  double beta = 0.0;
  double visibility = 0.0;
};

/// Visibility of the H channel over a full 2pi phase scan for each beta.
/// `scan_points` phases are spread uniformly over [0, 2pi).
std::vector<VisibilityRow> visibility_vs_beta(const std::vector<double>& betas, Complex alpha0,
                                              const FilterSpec& filter, const DetectorSpec& det,
                                              const ScanOptions& options = {}, int scan_points = 720);

/// Carrier amplitude |alpha0| giving the requested peak click rate (signal
/// only, dark counts excluded) from sideband m = +1 in the '+' port.
double alpha0_for_peak_rate(double beta, const FilterSpec& filter, const DetectorSpec& det,
                            double peak_rate, CoefficientMode mode = CoefficientMode::Verbatim);

}  // namespace scwdr
