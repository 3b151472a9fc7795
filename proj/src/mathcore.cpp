#include "scwdr/mathcore.hpp"

#include <algorithm>
#include <cmath>

namespace scwdr {
namespace {

constexpr double kSeriesLimit = 2.0;

double series_j(int n, double x) {
  // sum_k (-1)^k (x/2)^(2k+n) / (k! (k+n)!)
  const double half = 0.5 * x;
  double term = 1.0;
  for (int i = 1; i <= n; ++i) term *= half / i;
  double sum = term;
  const double h2 = half * half;
  for (int k = 1; k < 200; ++k) {
    term *= -h2 / (static_cast<double>(k) * (k + n));
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

// Miller recurrence for 0 < x, returning J_0..J_max with the normalization
// J_0 + 2 sum_k J_{2k} = 1.
std::vector<double> miller_table(int max_order, double x) {
  const double reach = std::max<double>(max_order, x);
  int start = static_cast<int>(reach + 30.0 + std::sqrt(40.0 * reach));
  if (start % 2 != 0) ++start;

  std::vector<double> j(static_cast<std::size_t>(start) + 2, 0.0);
  double next = 0.0;
  double cur = 1e-300;
  double norm = 0.0;
  for (int k = start; k >= 1; --k) {
    const double prev = 2.0 * k / x * cur - next;
    next = cur;
    cur = prev;
    j[static_cast<std::size_t>(k)] = next;
    if (std::abs(cur) > 1e250) {
      // rescale everything computed so far
      for (int i = k; i <= start; ++i) j[static_cast<std::size_t>(i)] *= 1e-250;
      cur *= 1e-250;
      next *= 1e-250;
      norm *= 1e-250;
    }
    if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * cur;
  }
  j[0] = cur;
  norm += cur;
  std::vector<double> out(static_cast<std::size_t>(max_order) + 1);
  for (int n = 0; n <= max_order; ++n) out[static_cast<std::size_t>(n)] = j[static_cast<std::size_t>(n)] / norm;
  return out;
}

}  // namespace

std::vector<double> bessel_j_table(int max_order, double x) {
  if (!std::isfinite(x)) throw DomainError("bessel_j: non-finite argument");
  if (max_order < 0) throw DomainError("bessel_j_table: negative max order");
  const bool flip = x < 0.0;
  const double ax = std::abs(x);
  std::vector<double> out;
  if (ax == 0.0) {
    out.assign(static_cast<std::size_t>(max_order) + 1, 0.0);
    out[0] = 1.0;
    return out;
  }
  if (ax <= kSeriesLimit) {
    out.resize(static_cast<std::size_t>(max_order) + 1);
    for (int n = 0; n <= max_order; ++n) out[static_cast<std::size_t>(n)] = series_j(n, ax);
  } else {
    out = miller_table(max_order, ax);
  }
  if (flip) {
    for (std::size_t n = 1; n < out.size(); n += 2) out[n] = -out[n];
  }
  return out;
}

double bessel_j(int order, double x) {
  if (!std::isfinite(x)) throw DomainError("bessel_j: non-finite argument");
  const int n = std::abs(order);
  double value = 0.0;
  if (x == 0.0) {
    value = n == 0 ? 1.0 : 0.0;
  } else if (std::abs(x) <= kSeriesLimit) {
    value = series_j(n, std::abs(x));
    if (x < 0.0 && n % 2 == 1) value = -value;
  } else {
    value = bessel_j_table(n, x)[static_cast<std::size_t>(n)];
  }
  if (order < 0 && n % 2 == 1) value = -value;
  return value;
}

double binary_entropy(double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("binary_entropy: q outside [0, 1]");
  if (q == 0.0 || q == 1.0) return 0.0;
  return -q * std::log2(q) - (1.0 - q) * std::log2(1.0 - q);
}

}  // namespace scwdr
