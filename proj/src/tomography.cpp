#include "scwdr/tomography.hpp"

#include <array>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "json.hpp"

#include "scwdr/format.hpp"

namespace scwdr {
namespace {

using Matrix = DensityMatrix2::Matrix;

constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

PolarizationState projector_state(Projector p) {
  switch (p) {
    case Projector::H:
      return {{1.0, 0.0}, {0.0, 0.0}};
    case Projector::V:
      return {{0.0, 0.0}, {1.0, 0.0}};
    case Projector::D:
      return {{kInvSqrt2, 0.0}, {kInvSqrt2, 0.0}};
    case Projector::A:
      return {{kInvSqrt2, 0.0}, {-kInvSqrt2, 0.0}};
    case Projector::R:
      return {{kInvSqrt2, 0.0}, {0.0, kInvSqrt2}};
    case Projector::L:
      return {{kInvSqrt2, 0.0}, {0.0, -kInvSqrt2}};
  }
  throw DomainError("unknown projector");
}

Matrix outer(const PolarizationState& psi) {
  Eigen::Vector2cd v(psi.h, psi.v);
  return v * v.adjoint();
}

class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed) : engine_(seed) {}
  double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t poisson_inversion(UniformStream& rng, double mean) {
  const double u = rng.next();
  double p = std::exp(-mean);
  double cdf = p;
  std::uint64_t k = 0;
  while (u > cdf && k < 1000) {
    ++k;
    p *= mean / static_cast<double>(k);
    cdf += p;
  }
  return k;
}

// Hoermann (1993), "The transformed rejection method for generating Poisson
// random variables", algorithm PTRS.
std::uint64_t poisson_ptrs(UniformStream& rng, double mean) {
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = rng.next() - 0.5;
    const double v = rng.next();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -mean + k * loglam - std::lgamma(k + 1.0)) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

std::uint64_t poisson(UniformStream& rng, double mean) {
  if (mean <= 0.0) return 0;
  return mean < 10.0 ? poisson_inversion(rng, mean) : poisson_ptrs(rng, mean);
}

double log_likelihood(const Matrix& rho, const std::vector<Matrix>& ops, const std::vector<double>& freq) {
  double sum = 0.0;
  for (std::size_t j = 0; j < ops.size(); ++j) {
    if (freq[j] == 0.0) continue;
    const double p = (ops[j] * rho).trace().real();
    sum += freq[j] * std::log(std::max(p, std::numeric_limits<double>::min()));
  }
  return sum;
}

std::uint64_t row_seed(std::uint64_t seed, std::uint32_t row) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32), row};
  std::array<std::uint32_t, 2> words{};
  seq.generate(words.begin(), words.end());
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

}  // namespace

std::string_view to_string(Projector p) {
  switch (p) {
    case Projector::H:
      return "H";
    case Projector::V:
      return "V";
    case Projector::D:
      return "D";
    case Projector::A:
      return "A";
    case Projector::R:
      return "R";
    case Projector::L:
      return "L";
  }
  return "?";
}

Projector parse_projector(std::string_view label) {
  for (Projector p : kAllProjectors) {
    if (to_string(p) == label) return p;
  }
  throw DomainError("unknown projector label '" + std::string(label) + "'");
}

DensityMatrix2::DensityMatrix2(const Matrix& m) : m_(m) {
  if (!m.allFinite()) throw DomainError("density matrix has non-finite entries");
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-12) throw DomainError("density matrix is not Hermitian");
  if (std::abs(m.trace() - Complex{1.0, 0.0}) > 1e-12) throw DomainError("density matrix trace differs from 1");
  if (eigenvalues().minCoeff() < -1e-10) throw DomainError("density matrix is not positive semidefinite");
}

DensityMatrix2 DensityMatrix2::pure(const PolarizationState& psi) {
  const double norm = std::norm(psi.h) + std::norm(psi.v);
  if (std::abs(norm - 1.0) > 1e-9) throw DomainError("pure state is not normalized");
  Matrix m = outer(psi) / norm;
  m = 0.5 * (m + m.adjoint()).eval();
  return DensityMatrix2(m);
}

DensityMatrix2 DensityMatrix2::maximally_mixed() { return DensityMatrix2(0.5 * Matrix::Identity()); }

DensityMatrix2 DensityMatrix2::from_bloch(double bx, double by, double bz) {
  if (bx * bx + by * by + bz * bz > 1.0 + 1e-12) throw DomainError("Bloch vector longer than 1");
  Matrix m;
  m << Complex{0.5 * (1.0 + bz), 0.0}, Complex{0.5 * bx, -0.5 * by}, Complex{0.5 * bx, 0.5 * by},
      Complex{0.5 * (1.0 - bz), 0.0};
  return DensityMatrix2(m);
}

double DensityMatrix2::expectation(const Matrix& op) const { return (op * m_).trace().real(); }

Eigen::Vector2d DensityMatrix2::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

DensityMatrix2 projector(Projector label) { return DensityMatrix2::pure(projector_state(label)); }

double trace_distance(const DensityMatrix2& a, const DensityMatrix2& b) {
  const Matrix diff = a.matrix() - b.matrix();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(diff, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().sum();
}

std::vector<TomographyRecord> simulate_counts(const PolarizationState& state, double mean_photons,
                                              const DetectorSpec& det, double duration, std::uint64_t seed) {
  det.validate();
  if (!(duration > 0.0)) throw DomainError("acquisition duration must be > 0");
  if (!(mean_photons >= 0.0)) throw DomainError("mean photon number must be >= 0");
  const double norm = std::norm(state.h) + std::norm(state.v);
  if (norm > 1.0 + 1e-9) throw DomainError("polarization state norm exceeds 1");

  const Matrix rho = outer(state);
  UniformStream rng(seed);
  std::vector<TomographyRecord> records;
  records.reserve(std::size(kAllProjectors));
  for (Projector p : kAllProjectors) {
    const double prob = std::max(0.0, (projector(p).matrix() * rho).trace().real());
    const double mean = (det.gamma + det.epsilon / det.dt * mean_photons * prob) * duration;
    records.push_back(TomographyRecord{p, poisson(rng, mean), duration});
  }
  return records;
}

MleResult mle_reconstruct_detailed(const std::vector<TomographyRecord>& records, const MleOptions& options) {
  std::vector<Matrix> ops;
  std::vector<double> freq;
  Eigen::MatrixXd span(static_cast<Eigen::Index>(records.size()), 4);
  double total = 0.0;
  for (std::size_t j = 0; j < records.size(); ++j) {
    const auto& rec = records[j];
    if (!(rec.duration > 0.0)) throw DomainError("tomography record duration must be > 0");
    const Matrix op = projector(rec.projector).matrix();
    ops.push_back(op);
    const double rate = static_cast<double>(rec.counts) / rec.duration;
    freq.push_back(rate);
    total += rate;
    // real coordinates of the projector in the Pauli basis
    const auto row = static_cast<Eigen::Index>(j);
    span(row, 0) = op.trace().real();
    span(row, 1) = 2.0 * op(0, 1).real();
    span(row, 2) = -2.0 * op(0, 1).imag();
    span(row, 3) = (op(0, 0) - op(1, 1)).real();
  }
  if (records.empty() || Eigen::FullPivLU<Eigen::MatrixXd>(span).setThreshold(1e-9).rank() < 4) {
    throw IllPosedError("tomography needs at least 4 linearly independent projectors");
  }
  if (!(total > 0.0)) throw IllPosedError("tomography records contain no counts");
  for (double& f : freq) f /= total;

  Matrix rho = 0.5 * Matrix::Identity();
  MleResult result{DensityMatrix2(rho), 0, false, {log_likelihood(rho, ops, freq)}};
  for (int it = 1; it <= options.max_iterations; ++it) {
    Matrix R = Matrix::Zero();
    for (std::size_t j = 0; j < ops.size(); ++j) {
      if (freq[j] == 0.0) continue;
      const double p = (ops[j] * rho).trace().real();
      R += (freq[j] / std::max(p, std::numeric_limits<double>::min())) * ops[j];
    }
    Matrix next = R * rho * R;
    next = 0.5 * (next + next.adjoint()).eval();
    next /= next.trace().real();
    const double change = (next - rho).cwiseAbs().maxCoeff();
    rho = next;
    result.iterations = it;
    result.log_likelihood.push_back(log_likelihood(rho, ops, freq));
    if (change < options.tolerance) {
      result.converged = true;
      break;
    }
  }
  result.rho = DensityMatrix2(rho);
  return result;
}

DensityMatrix2 mle_reconstruct(const std::vector<TomographyRecord>& records, const MleOptions& options) {
  return mle_reconstruct_detailed(records, options).rho;
}

double fidelity(const DensityMatrix2& rho, const PolarizationState& target) {
  const double norm = std::norm(target.h) + std::norm(target.v);
  if (std::abs(norm - 1.0) > 1e-9) throw DomainError("fidelity target is not normalized");
  const Eigen::Vector2cd psi(target.h, target.v);
  const double f = (psi.adjoint() * rho.matrix() * psi)(0, 0).real();
  return std::clamp(f, 0.0, 1.0);
}

double single_sideband_photons(double alpha0, double beta) {
  const double amp = alpha0 * bessel_j(1, beta);
  return 2.0 * amp * amp;
}

std::vector<Table1Row> table1_pipeline(const DetectorSpec& det, double duration, std::uint64_t seed,
                                       const Table1Options& options) {
  constexpr double pi = std::numbers::pi;
  struct Setting {
    double delta_phi;
    const char* label;
    PolarizationState target;
  };
  const std::array<Setting, 4> settings{{
      {0.0, "H", {{1.0, 0.0}, {0.0, 0.0}}},
      {pi, "V", {{0.0, 0.0}, {1.0, 0.0}}},
      {0.5 * pi, "D", {{kInvSqrt2, 0.0}, {kInvSqrt2, 0.0}}},
      {1.5 * pi, "A", {{kInvSqrt2, 0.0}, {-kInvSqrt2, 0.0}}},
  }};

  const double photons = single_sideband_photons(options.alpha0, options.beta);
  std::vector<Table1Row> rows;
  for (std::uint32_t k = 0; k < settings.size(); ++k) {
    const auto& s = settings[k];
    auto [ch, cv] = polarization_amplitudes(s.delta_phi, +1);
    cv *= std::polar(1.0, options.v_phase_offset);
    Table1Row row;
    row.delta_phi = s.delta_phi;
    row.target_label = s.label;
    row.target = s.target;
    row.records = simulate_counts({ch, cv}, photons, det, duration, row_seed(seed, k));
    row.rho = mle_reconstruct(row.records);
    row.fidelity = fidelity(row.rho, s.target);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_records_csv(std::ostream& out, const std::vector<TomographyRecord>& records) {
  out << "projector,counts,duration_s\n";
  for (const auto& rec : records) {
    out << to_string(rec.projector) << ',' << rec.counts << ',' << format_number(rec.duration) << '\n';
  }
}

std::vector<TomographyRecord> read_records_csv(std::istream& in) {
  std::vector<TomographyRecord> records;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      if (line != "projector,counts,duration_s") {
        throw DomainError("records CSV: unexpected header '" + line + "'");
      }
      continue;
    }
    std::istringstream fields(line);
    std::string label;
    std::string counts;
    std::string duration;
    if (!std::getline(fields, label, ',') || !std::getline(fields, counts, ',') || !std::getline(fields, duration)) {
      throw DomainError("records CSV: malformed line " + std::to_string(line_no));
    }
    try {
      std::size_t used = 0;
      const long long c = std::stoll(counts, &used);
      if (used != counts.size() || c < 0) throw DomainError("bad counts");
      const double d = std::stod(duration, &used);
      if (used != duration.size()) throw DomainError("bad duration");
      records.push_back(TomographyRecord{parse_projector(label), static_cast<std::uint64_t>(c), d});
    } catch (const std::exception& e) {
      throw DomainError("records CSV: line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

std::string density_matrix_json(const DensityMatrix2& rho) {
  nlohmann::json re = nlohmann::json::array();
  nlohmann::json im = nlohmann::json::array();
  for (int i = 0; i < 2; ++i) {
    re.push_back({round_to_output(rho(i, 0).real()), round_to_output(rho(i, 1).real())});
    im.push_back({round_to_output(rho(i, 0).imag()), round_to_output(rho(i, 1).imag())});
  }
  return nlohmann::json{{"re", re}, {"im", im}}.dump(2);
}

}  // namespace scwdr
