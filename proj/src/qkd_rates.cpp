#include "scwdr/qkd_rates.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace scwdr {

std::string_view to_string(Scheme scheme) {
  return scheme == Scheme::Traditional ? "traditional" : "discriminator";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "traditional") return Scheme::Traditional;
  if (name == "discriminator") return Scheme::Discriminator;
  throw DomainError("unknown scheme '" + std::string(name) + "'");
}

double eta_from_loss_db(double loss_db) {
  if (!std::isfinite(loss_db)) throw DomainError("loss must be finite");
  return std::pow(10.0, -loss_db / 10.0);
}

ChannelSpec ChannelSpec::from_loss_db(double loss_db) {
  if (!(loss_db >= 0.0)) throw DomainError("channel loss must be >= 0 dB");
  ChannelSpec c{eta_from_loss_db(loss_db)};
  c.validate();
  return c;
}

void ChannelSpec::validate() const {
  if (!(eta > 0.0 && eta <= 1.0)) throw DomainError("channel transmission must lie in (0, 1]");
}

ProtocolParams ProtocolParams::table2(double alpha0, double beta) {
  ProtocolParams p;
  p.alpha0 = alpha0;
  p.beta = beta;
  p.filter = FilterSpec{0.99, 1e-4};
  p.det = DetectorSpec{0.1, 50.0, 3.3e-9, 10e-9};
  p.f_ec = 1.25;
  p.nu = 1.0 / p.det.T;
  return p;
}

ProtocolParams ProtocolParams::with(double new_alpha0, double new_beta) const {
  ProtocolParams p = *this;
  p.alpha0 = new_alpha0;
  p.beta = new_beta;
  return p;
}

void ProtocolParams::validate() const {
  if (!(alpha0 >= 0.0) || !std::isfinite(alpha0)) throw DomainError("alpha0 must be finite and >= 0");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw DomainError("beta must be finite and >= 0");
  if (!(f_ec >= 1.0)) throw DomainError("error-correction efficiency must be >= 1");
  filter.validate();
  det.validate();
  if (std::abs(nu * det.T - 1.0) > 1e-12) throw DomainError("repetition rate must equal 1/T");
}

double clip_probability(double p, bool& clipped) {
  if (p > 1.0) {
    clipped = true;
    return 1.0;
  }
  if (p < 0.0) {
    clipped = true;
    return 0.0;
  }
  return p;
}

double n_ph_traditional(const ProtocolParams& params, double eta, bool same_phase) {
  const double a2 = params.alpha0 * params.alpha0;
  if (!same_phase) return a2 * eta * (1.0 - params.filter.r);
  const double j0 = bessel_j(0, 2.0 * params.beta);
  const double j02 = j0 * j0;
  return a2 * eta * ((1.0 - params.filter.rho) * (1.0 - j02) + (1.0 - params.filter.r) * j02);
}

double p_det(const ProtocolParams& params, double eta, bool same_phase, bool* clipped) {
  const auto& det = params.det;
  const double p = (det.epsilon * n_ph_traditional(params, eta, same_phase) / det.T + det.gamma) * det.dt;
  bool local = false;
  const double out = clip_probability(p, local);
  if (clipped != nullptr && local) *clipped = true;
  return out;
}

double qber_traditional(const ProtocolParams& params, double eta) {
  const double match = p_det(params, eta, true);
  const double mismatch = p_det(params, eta, false);
  if (!(match + mismatch > 0.0)) throw DomainError("QBER undefined: no detection probability");
  return mismatch / (match + mismatch);
}

double holevo_bound(double alpha0, double beta, double eta) {
  const double exponent = alpha0 * alpha0 * (1.0 - eta) * (1.0 - bessel_j(0, 2.0 * beta));
  const double arg = 0.5 * (1.0 - std::exp(-exponent));
  return binary_entropy(std::clamp(arg, 0.0, 1.0));
}

namespace {

KeyRateResult finish(Scheme scheme, const ProtocolParams& params, double eta, double P_B, double Q, bool clipped) {
  KeyRateResult res;
  res.scheme = scheme;
  res.alpha0 = params.alpha0;
  res.beta = params.beta;
  res.Q = Q;
  res.P_B = P_B;
  res.chi = holevo_bound(params.alpha0, params.beta, eta);
  res.K = params.nu * P_B * (1.0 - params.f_ec * binary_entropy(Q) - res.chi);
  res.clipped = clipped;
  return res;
}

}  // namespace

KeyRateResult key_rate_traditional(const ProtocolParams& params, double eta) {
  params.validate();
  ChannelSpec{eta}.validate();
  bool clipped = false;
  const double match = p_det(params, eta, true, &clipped);
  const double mismatch = p_det(params, eta, false, &clipped);
  if (!(match + mismatch > 0.0)) throw DomainError("QBER undefined: no detection probability");
  const double Q = mismatch / (match + mismatch);
  return finish(Scheme::Traditional, params, eta, 0.5 * (match + mismatch), Q, clipped);
}

double n_pm_discriminator(const ProtocolParams& params, double eta, double phi_a, double phi_lo, Port port) {
  const int S = choose_truncation(params.beta, 1e-12);
  const std::vector<double> j = bessel_j_table(S, params.beta);
  const double j0 = j[0];
  const double r = params.filter.r;
  const double sign = port == Port::Plus ? 1.0 : -1.0;
  const double scale = std::sqrt(eta) * params.alpha0 / std::numbers::sqrt2;

  double n = 0.0;
  for (int m = 1; m <= S; ++m) {
    const double jm = j[static_cast<std::size_t>(m)];
    for (int s : {m, -m}) {
      const double js = (s < 0 && m % 2 == 1) ? -jm : jm;
      const Complex amp = scale * js * (1.0 - params.filter.rho) *
                          (std::polar(1.0, s * phi_a) + sign * std::polar(1.0, s * phi_lo) * r * j0);
      n += std::norm(amp);
    }
  }
  const double carrier = scale * j0 * ((1.0 - r) + sign * j0 * r * (1.0 - r));
  return n + carrier * carrier;
}

double p_pm_discriminator(const ProtocolParams& params, double eta, double phi_a, double phi_lo, Port port,
                          bool* clipped) {
  const auto& det = params.det;
  const double p = (det.epsilon * n_pm_discriminator(params, eta, phi_a, phi_lo, port) / det.T + det.gamma) * det.dt;
  bool local = false;
  const double out = clip_probability(p, local);
  if (clipped != nullptr && local) *clipped = true;
  return out;
}

DiscriminatorQber qber_discriminator(const ProtocolParams& params, double eta, double phi_a) {
  constexpr double pi = std::numbers::pi;
  DiscriminatorQber q;
  const double plus_match = p_pm_discriminator(params, eta, phi_a, phi_a, Port::Plus, &q.clipped);
  const double minus_match = p_pm_discriminator(params, eta, phi_a, phi_a, Port::Minus, &q.clipped);
  const double plus_flip = p_pm_discriminator(params, eta, phi_a, phi_a + pi, Port::Plus, &q.clipped);
  const double minus_flip = p_pm_discriminator(params, eta, phi_a, phi_a + pi, Port::Minus, &q.clipped);
  q.P_E = plus_flip * (1.0 - minus_flip) + minus_match * (1.0 - plus_match);
  q.P_C = plus_match * (1.0 - minus_match) + minus_flip * (1.0 - plus_flip);
  if (!(q.P_E + q.P_C > 0.0)) throw DomainError("QBER undefined: no decoding probability");
  q.Q = q.P_E / (q.P_C + q.P_E);
  return q;
}

KeyRateResult key_rate_discriminator(const ProtocolParams& params, double eta) {
  params.validate();
  ChannelSpec{eta}.validate();
  const DiscriminatorQber q = qber_discriminator(params, eta);
  return finish(Scheme::Discriminator, params, eta, 0.5 * (q.P_E + q.P_C), q.Q, q.clipped);
}

KeyRateResult key_rate(Scheme scheme, const ProtocolParams& params, double eta) {
  return scheme == Scheme::Traditional ? key_rate_traditional(params, eta) : key_rate_discriminator(params, eta);
}

}  // namespace scwdr
