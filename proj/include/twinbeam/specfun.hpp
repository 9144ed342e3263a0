#pragma once

// Special functions and summation primitives used by the photon-statistics
// and quasi-distribution formulas. Everything that can leave double range is
// carried as a signed logarithm.

#include <cmath>
#include <limits>
#include <span>

namespace twinbeam {

/// Signed logarithm: value = sign * exp(log_magnitude). sign == 0 iff the
/// value is exactly zero (log_magnitude is then -inf).
struct SignedLog {
    double log_magnitude = -std::numeric_limits<double>::infinity();
    int sign = 0;

    static SignedLog from_value(double v);
    static SignedLog zero() { return {}; }
    double value() const;
    SignedLog operator*(const SignedLog& other) const;
};

/// ln Gamma(x) for x > 0; throws std::domain_error otherwise.
double log_gamma(double x);

/// ln C(n, k) for real 0 <= k <= n.
double log_binomial(double n, double k);

/// ln I_order(x) with sign, for order >= -1 and x >= 0. Finite for x up to
/// at least 1e4 at any order. Throws std::domain_error outside the domain or
/// where the value is infinite (x == 0 with -1 < order < 0).
SignedLog log_bessel_i(double order, double x);

/// sin(x)/x with the removable singularity handled.
double sinc(double x);

struct CompensatedSum {
    SignedLog value;
    /// log10(sum |terms| / |result|): decimal digits lost to cancellation.
    /// +inf when the result cancels to exactly zero.
    double cancellation_digits = 0.0;
};

/// Sum of signed terms given in log form, using error-free transformations
/// (cascaded TwoSum) on terms rescaled by the largest magnitude.
CompensatedSum alternating_sum(std::span<const SignedLog> terms);

}  // namespace twinbeam
