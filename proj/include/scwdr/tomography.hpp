#pragma once

// Six-projector polarization tomography with iterative maximum-likelihood
// (R rho R) reconstruction.

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "scwdr/interface_sim.hpp"
#include "scwdr/mathcore.hpp"

namespace scwdr {

class IllPosedError : public std::runtime_error {
 public:
  explicit IllPosedError(const std::string& what) : std::runtime_error(what) {}
};

enum class Projector { H, V, D, A, R, L };

inline constexpr Projector kAllProjectors[] = {Projector::H, Projector::V, Projector::D,
                                               Projector::A, Projector::R, Projector::L};

std::string_view to_string(Projector p);
Projector parse_projector(std::string_view label);

/// Pure polarization state cH|H> + cV|V>.
struct PolarizationState {
  Complex h;
  Complex v;
};

/// 2x2 density matrix over {|H>, |V>}.
class DensityMatrix2 {
 public:
  using Matrix = Eigen::Matrix2cd;

  /// Checks Hermiticity and unit trace to 1e-12, eigenvalues >= -1e-10.
  explicit DensityMatrix2(const Matrix& m);

  static DensityMatrix2 pure(const PolarizationState& psi);
  static DensityMatrix2 maximally_mixed();
  /// (I + b.sigma)/2 for a Bloch vector |b| <= 1.
  static DensityMatrix2 from_bloch(double bx, double by, double bz);

  const Matrix& matrix() const { return m_; }
  Complex operator()(int row, int col) const { return m_(row, col); }

  /// Tr(P rho) for another operator, real part.
  double expectation(const Matrix& op) const;
  Eigen::Vector2d eigenvalues() const;

 private:
  Matrix m_;
};

DensityMatrix2 projector(Projector label);

/// Trace norm Tr|a - b|.
double trace_distance(const DensityMatrix2& a, const DensityMatrix2& b);

struct TomographyRecord {
  Projector projector = Projector::H;
  std::uint64_t counts = 0;
  double duration = 1.0;  // s
};

/// Draws Poisson counts for the six projectors H, V, D, A, R, L (in that
/// order) with means (gamma + epsilon/dt * mean_photons * <P>) * duration.
///
/// Random stream: std::mt19937_64 seeded with `seed`; uniforms on [0, 1) are
/// (word >> 11) * 2^-53. Means below 10 use multiplicative inversion, larger
/// means use the PTRS transformed-rejection sampler. The mapping from seed to
/// counts is part of the public contract.
std::vector<TomographyRecord> simulate_counts(const PolarizationState& state, double mean_photons,
                                              const DetectorSpec& det, double duration, std::uint64_t seed);

struct MleOptions {
  double tolerance = 1e-10;
  int max_iterations = 10000;
};

struct MleResult {
  DensityMatrix2 rho;
  int iterations = 0;
  bool converged = false;
  std::vector<double> log_likelihood;  // one entry per iterate, starting with I/2
};

/// Iterative R rho R maximum-likelihood reconstruction. Frequencies are the
/// per-projector count rates normalized to one.
MleResult mle_reconstruct_detailed(const std::vector<TomographyRecord>& records, const MleOptions& options = {});
DensityMatrix2 mle_reconstruct(const std::vector<TomographyRecord>& records, const MleOptions& options = {});

/// <psi| rho |psi> for a normalized target.
double fidelity(const DensityMatrix2& rho, const PolarizationState& target);

struct Table1Options {
  double alpha0 = 0.15;
  double beta = 0.15;
  /// Static extra phase on the V arm (rad); a fixed stand-in for path jitter.
  double v_phase_offset = 0.0;
};

struct Table1Row {
  double delta_phi = 0.0;
  std::string target_label;
  PolarizationState target;
  std::vector<TomographyRecord> records;
  DensityMatrix2 rho = DensityMatrix2::maximally_mixed();
  double fidelity = 0.0;
};

/// Mean photon number per gate in the single-photon term of the m = +1
/// polarization state: 2 |alpha0 J_1(beta)|^2.
double single_sideband_photons(double alpha0, double beta);

/// Tomography of the m = +1 output for dphi in {0, pi, pi/2, 3pi/2}. Row k
/// draws counts with the seed formed from the first two words w0, w1 of
/// std::seed_seq{seed & 0xffffffff, seed >> 32, k} as (w0 << 32) | w1.
std::vector<Table1Row> table1_pipeline(const DetectorSpec& det, double duration, std::uint64_t seed,
                                       const Table1Options& options = {});

// CSV (projector,counts,duration_s) and JSON ({"re": [[..]], "im": [[..]]}).
void write_records_csv(std::ostream& out, const std::vector<TomographyRecord>& records);
std::vector<TomographyRecord> read_records_csv(std::istream& in);
std::string density_matrix_json(const DensityMatrix2& rho);

}  // namespace scwdr
