#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace scwdr {

using Complex = std::complex<double>;

/// Raised when an argument lies outside the domain of an operation.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Bessel function of the first kind J_n(x) for integer order.
///
/// Negative orders use J_{-n}(x) = (-1)^n J_n(x); negative arguments use
/// J_n(-x) = (-1)^n J_n(x). Power series for |x| <= 2, normalized Miller
/// (downward) recurrence above that. Absolute error is below 1e-12 for
/// |x| <= 5 and |n| <= 20.
double bessel_j(int order, double x);

/// J_0(x) ... J_{max_order}(x) in one pass.
std::vector<double> bessel_j_table(int max_order, double x);

/// Binary Shannon entropy in bits, with H(0) = H(1) = 0.
double binary_entropy(double q);

}  // namespace scwdr
