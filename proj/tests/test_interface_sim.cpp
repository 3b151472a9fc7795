#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "scwdr/interface_sim.hpp"

using namespace scwdr;

namespace {

constexpr double kPi = std::numbers::pi;

DetectorSpec detector(double gamma) { return DetectorSpec{0.1, gamma, 3.3e-9, 10e-9}; }

std::vector<double> full_scan(int n) {
  std::vector<double> phis;
  for (int k = 0; k < n; ++k) phis.push_back(2.0 * kPi * k / n);
  return phis;
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

}  // namespace

TEST_CASE("ModulationParams reduces the phase and rejects negative depth") {
  const auto m = ModulationParams::make(0.2, 2.0 * kPi + 0.5);
  CHECK(m.phi == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(ModulationParams::make(0.2, -0.5).phi == doctest::Approx(2.0 * kPi - 0.5).epsilon(1e-14));
  CHECK_THROWS_AS(ModulationParams::make(-0.1, 0.0), DomainError);
}

TEST_CASE("make_scw_state amplitudes") {
  SUBCASE("beta = 0 leaves only the carrier") {
    const auto s = make_scw_state(Complex{1.0, 0.0}, ModulationParams::make(0.0, 1.3), 3);
    CHECK(s.amps().size() == 7);
    CHECK(s.amp(0) == Complex{1.0, 0.0});
    for (int m : {-3, -2, -1, 1, 2, 3}) CHECK(std::abs(s.amp(m)) == 0.0);
  }
  SUBCASE("beta = 0.3, phi = 0") {
    const auto s = make_scw_state(Complex{1.0, 0.0}, ModulationParams::make(0.3, 0.0), 5);
    CHECK(s.amp(1).real() == doctest::Approx(0.148318816273104).epsilon(1e-14));
    CHECK(s.amp(1).imag() == doctest::Approx(0.0));
    CHECK(s.amp(-1).real() == doctest::Approx(-0.148318816273104).epsilon(1e-14));
  }
  SUBCASE("phi = pi flips odd orders only") {
    const auto a = make_scw_state(Complex{1.0, 0.0}, ModulationParams::make(0.3, 0.0), 5);
    const auto b = make_scw_state(Complex{1.0, 0.0}, ModulationParams::make(0.3, kPi), 5);
    CHECK(std::abs(b.amp(1) + a.amp(1)) < 1e-15);
    CHECK(std::abs(b.amp(2) - a.amp(2)) < 1e-15);
  }
  CHECK(make_scw_state(Complex{1.0, 0.0}, ModulationParams::make(0.3, 0.0), 5).amp(9) == Complex{});
  CHECK_THROWS_AS(make_scw_state(Complex{1.0, 0.0}, ModulationParams::make(0.3, 0.0), 0), DomainError);
}

TEST_CASE("choose_truncation") {
  const int s015 = choose_truncation(0.15, 1e-12);
  CHECK(s015 <= 8);
  CHECK(choose_truncation(0.0, 1e-3) == 5);
  CHECK(choose_truncation(1.5, 1e-12) > s015);

  // The discarded tail really is below the tolerance.
  for (double beta : {0.15, 0.7, 1.5, 2.0}) {
    const int S = choose_truncation(beta, 1e-12);
    double tail = 0.0;
    for (int m = S + 1; m <= 60; ++m) tail += 2.0 * std::pow(std::cyl_bessel_j(m, beta), 2);
    CHECK(tail < 1e-12);
  }
  CHECK_THROWS_AS(choose_truncation(0.1, 0.0), DomainError);
}

TEST_CASE("mean_sideband_photons") {
  CHECK(mean_sideband_photons(make_scw_state(Complex{0.7, 0.0}, ModulationParams::make(0.0, 0.0), 4)) == 0.0);
  const auto s = make_scw_state(Complex{1.0, 0.0}, ModulationParams::make(0.3, 0.0), 10);
  const double j0 = std::cyl_bessel_j(0.0, 0.3);
  CHECK(mean_sideband_photons(s) == doctest::Approx(1.0 - j0 * j0).epsilon(1e-13));
  const auto scaled = make_scw_state(Complex{0.0, 3.0}, ModulationParams::make(0.3, 0.0), 10);
  CHECK(mean_sideband_photons(scaled) == doctest::Approx(9.0 * mean_sideband_photons(s)).epsilon(1e-13));
}

TEST_CASE("interface_transform hand-evaluated sideband powers") {
  const double b = 0.15;
  const FilterSpec filter{0.99, 1e-4};
  const auto s = make_scw_state(Complex{1.0, 0.0}, ModulationParams::make(b, 0.0), 8);
  const auto out = interface_transform(s, filter, ModulationParams::make(b, 0.0));
  CHECK(std::norm(out.plus.amp(1)) == doctest::Approx(0.011011263508042124).epsilon(1e-13));
  CHECK(std::norm(out.minus.amp(1)) == doctest::Approx(6.770681263115598e-07).epsilon(1e-10));

  const double j0 = std::cyl_bessel_j(0.0, b);
  const double carrier_plus = j0 * ((1.0 - 0.99) + j0 * 0.99 * (1.0 - 0.99)) / std::numbers::sqrt2;
  CHECK(out.plus.amp(0).real() == doctest::Approx(carrier_plus).epsilon(1e-14));
}

TEST_CASE("interface_transform limits") {
  const FilterSpec ideal{1.0, 0.0};
  SUBCASE("matched phases with vanishing depth empty the minus port") {
    const double b = 1e-4;
    const auto s = make_scw_state(Complex{1.0, 0.0}, ModulationParams::make(b, 0.4), 5);
    const auto out = interface_transform(s, ideal, ModulationParams::make(b, 0.4));
    CHECK(mean_sideband_photons(out.minus) < 1e-15);
    CHECK(mean_sideband_photons(out.plus) > 1e-9);
  }
  SUBCASE("a pi shift moves the m = 1 light to the minus port") {
    const double b = 0.15;
    const auto s = make_scw_state(Complex{1.0, 0.0}, ModulationParams::make(b, kPi), 6);
    const auto out = interface_transform(s, ideal, ModulationParams::make(b, 0.0));
    CHECK(std::norm(out.minus.amp(1)) > 1e3 * std::norm(out.plus.amp(1)));
  }
  SUBCASE("errors") {
    const auto s = make_scw_state(Complex{1.0, 0.0}, ModulationParams::make(0.2, 0.0), 5);
    CHECK_THROWS_AS(interface_transform(s, ideal, ModulationParams::make(0.3, 0.0)), DomainError);
    CHECK_THROWS_AS(interface_transform(s, ideal, ModulationParams::make(0.2, 0.0), CoefficientMode::Verbatim,
                                        Complex{0.0, -2.0}),
                    DomainError);
    CHECK_THROWS_AS(interface_transform(s, FilterSpec{1.2, 0.0}, ModulationParams::make(0.2, 0.0)), DomainError);
  }
}

TEST_CASE("beamsplitter conserves energy per sideband") {
  for (auto mode : {CoefficientMode::Verbatim, CoefficientMode::Physical}) {
    for (double b : {0.05, 0.15, 0.7, 1.5}) {
      for (double phi_in : {0.0, 0.9, 2.5, 4.4}) {
        for (double phi_lo : {0.0, 1.7}) {
          const FilterSpec filter{0.99, 1e-4};
          const Complex a0{0.8, -0.3};
          const int S = choose_truncation(b);
          const auto s = make_scw_state(a0, ModulationParams::make(b, phi_in), S);
          const auto out = interface_transform(s, filter, ModulationParams::make(b, phi_lo), mode);
          const double t = mode == CoefficientMode::Verbatim ? 1.0 - filter.rho : std::sqrt(1.0 - filter.rho);
          const double rr = mode == CoefficientMode::Verbatim ? filter.r : std::sqrt(filter.r);
          const double j0 = std::cyl_bessel_j(0.0, b);
          for (int m = -S; m <= S; ++m) {
            if (m == 0) continue;
            const double jm = bessel_j(m, b);
            const Complex x = t * a0 * jm * std::polar(1.0, m * phi_in);
            const Complex y = t * rr * j0 * a0 * jm * std::polar(1.0, m * phi_lo);
            const double in = std::norm(x) + std::norm(y);
            const double outp = std::norm(out.plus.amp(m)) + std::norm(out.minus.amp(m));
            if (in > 0.0) CHECK(rel_diff(outp, in) < 1e-12);
          }
        }
      }
    }
  }
}

TEST_CASE("polarization_amplitudes") {
  auto [h0, v0] = polarization_amplitudes(0.0, 1);
  CHECK(h0 == Complex{1.0, 0.0});
  CHECK(std::abs(v0) == 0.0);
  auto [hp, vp] = polarization_amplitudes(kPi, 1);
  CHECK(std::abs(hp) < 1e-15);
  CHECK(std::abs(vp) == doctest::Approx(1.0));
  auto [hd, vd] = polarization_amplitudes(kPi / 2, 1);
  CHECK(hd.real() == doctest::Approx(1.0 / std::numbers::sqrt2));
  CHECK(vd.real() == doctest::Approx(1.0 / std::numbers::sqrt2));
  auto [hm, vm] = polarization_amplitudes(kPi / 2, -1);
  CHECK(hm.real() == doctest::Approx(1.0 / std::numbers::sqrt2));
  CHECK(vm.real() == doctest::Approx(-1.0 / std::numbers::sqrt2));
  CHECK_THROWS_AS(polarization_amplitudes(0.0, 2), DomainError);
  CHECK_THROWS_AS(polarization_amplitudes(0.0, 0), DomainError);

  for (int k = 0; k <= 400; ++k) {
    const double d = -4.0 * kPi + 8.0 * kPi * k / 400;
    for (int m : {-1, 1}) {
      auto [h, v] = polarization_amplitudes(d, m);
      CHECK(std::abs(std::norm(h) + std::norm(v) - 1.0) <= 2.0 * std::numeric_limits<double>::epsilon());
    }
  }
}

TEST_CASE("polarization map agrees with the interface in the ideal filter limit") {
  const FilterSpec ideal{1.0, 0.0};
  for (double b : {0.01, 0.05, 0.1, 0.15, 0.2}) {
    for (int k = 0; k < 64; ++k) {
      const double d = 2.0 * kPi * k / 64;
      const auto s = make_scw_state(Complex{1.0, 0.0}, ModulationParams::make(b, d), 6);
      const auto out = interface_transform(s, ideal, ModulationParams::make(b, 0.0));
      const double p = std::norm(out.plus.amp(1));
      const double q = std::norm(out.minus.amp(1));
      const auto [h, v] = polarization_amplitudes(d, 1);
      CHECK(std::abs(q / (p + q) - std::norm(v)) < 1e-3);
      CHECK(std::abs(p / (p + q) - std::norm(h)) < 1e-3);
    }
  }
}

TEST_CASE("phase scan symmetries") {
  const FilterSpec filter{0.99, 1e-4};
  const DetectorSpec det = detector(100.0);
  const Complex a0{0.17, 0.0};
  const std::vector<double> phis{0.0, 0.3, 1.1, 2.0, 2.9, 4.0, 5.5};
  std::vector<double> shifted;
  std::vector<double> flipped;
  for (double p : phis) {
    shifted.push_back(p + 2.0 * kPi);
    flipped.push_back(p + kPi);
  }
  const auto a = phase_scan(0.15, a0, filter, det, phis);
  const auto b = phase_scan(0.15, a0, filter, det, shifted);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(rel_diff(a[i].rate_h, b[i].rate_h) < 1e-12);
    CHECK(rel_diff(a[i].rate_v, b[i].rate_v) < 1e-12);
  }

  ScanOptions first;
  first.sidebands = SidebandSelection::FirstOrder;
  const auto c = phase_scan(0.15, a0, filter, det, phis, first);
  const auto d = phase_scan(0.15, a0, filter, det, flipped, first);
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(rel_diff(c[i].rate_h, d[i].rate_v) < 1e-12);
    CHECK(rel_diff(c[i].rate_v, d[i].rate_h) < 1e-12);
  }

  ScanOptions threaded;
  threaded.threads = 4;
  const auto e = phase_scan(0.15, a0, filter, det, phis, threaded);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(e[i].rate_h == a[i].rate_h);

  CHECK_THROWS_AS(phase_scan(0.15, a0, filter, det, {}), DomainError);
}

TEST_CASE("phase scan peaks") {
  const auto rows = phase_scan(0.15, Complex{0.17, 0.0}, FilterSpec{}, detector(100.0), full_scan(8));
  CHECK(rows[0].rate_h_norm == 1.0);
  CHECK(rows[4].rate_v_norm == 1.0);
  for (const auto& r : rows) {
    CHECK(r.rate_h_norm <= 1.0);
    CHECK(r.rate_v_norm <= 1.0);
  }
}

TEST_CASE("expected_clicks") {
  const auto vacuum = make_scw_state(Complex{0.2, 0.0}, ModulationParams::make(0.0, 0.0), 5);
  CHECK(expected_clicks(vacuum, detector(100.0), 10.0) == doctest::Approx(1000.0).epsilon(1e-14));

  const auto s = make_scw_state(Complex{0.15, 0.0}, ModulationParams::make(0.15, 0.0), 8);
  const double rate = expected_clicks(s, detector(50.0), 1.0);
  CHECK(rate > 3e3);
  CHECK(rate < 3e4);
  CHECK(expected_clicks(s, detector(50.0), 2.0) == doctest::Approx(2.0 * rate).epsilon(1e-14));
  CHECK_THROWS_AS(expected_clicks(s, detector(50.0), 0.0), DomainError);

  double last = 0.0;
  for (double g : {0.0, 1.0, 50.0, 100.0, 1e4}) {
    const double c = expected_clicks(s, detector(g), 1.0);
    CHECK(c >= last);
    last = c;
  }
  last = 0.0;
  for (double eps : {0.0, 0.05, 0.1, 0.5, 1.0}) {
    const double c = expected_clicks(s, DetectorSpec{eps, 50.0, 3.3e-9, 10e-9}, 1.0);
    CHECK(c >= last);
    last = c;
  }
  last = 0.0;
  for (double a : {0.0, 0.01, 0.15, 1.0, 3.0}) {
    const auto st = make_scw_state(Complex{0.0, a}, ModulationParams::make(0.15, 0.0), 8);
    const double c = expected_clicks(st, detector(50.0), 1.0);
    CHECK(c >= last);
    last = c;
  }
}

TEST_CASE("visibility") {
  CHECK(visibility({1.0, 0.0, 1.0, 0.0}) == 1.0);
  CHECK(visibility({1.0, 1.0}) == 0.0);
  CHECK(visibility({3.0, 1.0}) == doctest::Approx(0.5));
  CHECK_THROWS_AS(visibility({}), DomainError);
  CHECK_THROWS_AS(visibility({0.0, 0.0}), DomainError);
  CHECK_THROWS_AS(visibility({1.0, -0.5}), DomainError);
}

TEST_CASE("first-order visibility closed form without dark counts") {
  ScanOptions first;
  first.sidebands = SidebandSelection::FirstOrder;
  for (double b : {0.05, 0.15, 0.4, 1.0}) {
    const auto rows = visibility_vs_beta({b}, Complex{1.0, 0.0}, FilterSpec{1.0, 0.0}, detector(0.0), first, 360);
    const double j0 = std::cyl_bessel_j(0.0, b);
    CHECK(rows[0].visibility == doctest::Approx(2.0 * j0 / (1.0 + j0 * j0)).epsilon(1e-12));
  }
}

TEST_CASE("visibility versus beta has a plateau") {
  const FilterSpec filter{0.99, 1e-4};
  const DetectorSpec det = detector(100.0);
  const double a0 = alpha0_for_peak_rate(0.15, filter, det, 1e4);
  const auto rows = visibility_vs_beta({0.05, 0.4, 2.0}, Complex{a0, 0.0}, filter, det);
  CHECK(rows[1].visibility >= 0.89);
  CHECK(rows[1].visibility <= 0.99);
  CHECK(rows[0].visibility < rows[1].visibility);
  CHECK(rows[2].visibility < rows[1].visibility);
}

TEST_CASE("alpha0_for_peak_rate reproduces the requested m = +1 rate") {
  const FilterSpec filter{0.99, 1e-4};
  const DetectorSpec det = detector(100.0);
  const double a0 = alpha0_for_peak_rate(0.15, filter, det, 1e4);
  const auto s = make_scw_state(Complex{a0, 0.0}, ModulationParams::make(0.15, 0.0), 8);
  const auto out = interface_transform(s, filter, ModulationParams::make(0.15, 0.0));
  CHECK(click_rate(out.plus, det, SidebandSelection::PlusOne) - det.gamma == doctest::Approx(1e4).epsilon(1e-12));
  CHECK_THROWS_AS(alpha0_for_peak_rate(0.0, filter, det, 1e4), DomainError);
  CHECK_THROWS_AS(alpha0_for_peak_rate(0.15, filter, det, 0.0), DomainError);
}
