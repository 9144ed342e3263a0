#include "twinbeam/specfun.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace twinbeam {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Polynomials u_k(t) of the Debye expansion of I_nu(nu z), coefficients in
// ascending powers of t; generated from the standard recurrence
// u_{k+1} = t^2 (1 - t^2) u_k' / 2 + (1/8) int_0^t (1 - 5 s^2) u_k(s) ds.
constexpr std::array<std::array<double, 31>, 11> kDebye = {{
    {1.0},
    {0.0, 0.125, 0.0, -0.208333333333333333333},
    {0.0, 0.0, 0.0703125, 0.0, -0.401041666666666666667, 0.0, 0.334201388888888888889},
    {0.0, 0.0, 0.0, 0.0732421875, 0.0, -0.8912109375, 0.0, 1.84646267361111111111, 0.0,
     -1.02581259645061728395},
    {0.0, 0.0, 0.0, 0.0, 0.112152099609375, 0.0, -2.3640869140625, 0.0, 8.78912353515625, 0.0,
     -11.2070026162229938272, 0.0, 4.66958442342624742798},
    {0.0, 0.0, 0.0, 0.0, 0.0, 0.227108001708984375, 0.0, -7.36879435947963169643, 0.0,
     42.5349987453884548611, 0.0, -91.8182415432400173611, 0.0, 84.6362176746007346322, 0.0,
     -28.2120725582002448774},
    {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.572501420974731445313, 0.0, -26.4914304869515555246, 0.0,
     218.190511744211590479, 0.0, -699.579627376132541233, 0.0, 1059.99045252799987793, 0.0,
     -765.252468141181642299, 0.0, 212.570130039217122861},
    {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.72772750258445739746, 0.0, -108.0909197883946555, 0.0,
     1200.90291321635246277, 0.0, -5305.64697861340310838, 0.0, 11655.3933368645332478, 0.0,
     -13586.5500064341374386, 0.0, 8061.7221817373093845, 0.0, -1919.45766231840699631},
    {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 6.07404200127348303795, 0.0,
     -493.915304773088012423, 0.0, 7109.51430248936372144, 0.0, -41192.6549688975512981, 0.0,
     122200.464983017459788, 0.0, -203400.177280415534278, 0.0, 192547.001232531532359, 0.0,
     -96980.5983886375134886, 0.0, 20204.2913309661486435},
    {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 24.3805296995560638607, 0.0,
     -2499.83048181120962413, 0.0, 45218.7689813627262733, 0.0, -331645.172484563577831, 0.0,
     1268365.27332162478163, 0.0, -2813563.22658653411071, 0.0, 3763271.2976564039964, 0.0,
     -2998015.91853810675009, 0.0, 1311763.61466297720068, 0.0, -242919.187900551333459},
    {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 110.017140269246738171, 0.0,
     -13886.089753717040532, 0.0, 308186.40461266239848, 0.0, -2785618.12808645468896, 0.0,
     13288767.1664218183294, 0.0, -37567176.6607633513082, 0.0, 66344512.2747290266648, 0.0,
     -74105148.2115326577483, 0.0, 50952602.4926646422064, 0.0, -19706819.1184322269268, 0.0,
     3284469.85307203782114},
}};

constexpr double kDebyeMinOrder = 25.0;

double horner(const std::array<double, 31>& c, std::size_t degree, double t) {
    double acc = 0.0;
    for (std::size_t k = degree + 1; k-- > 0;) acc = acc * t + c[k];
    return acc;
}

// Ascending series, all terms positive for nu > -1. Rescales the running sum
// so arguments far beyond double range stay finite.
double log_bessel_series(double nu, double x) {
    const double q = 0.25 * x * x;
    constexpr double kRescale = 1e200;
    const double log_rescale = std::log(kRescale);
    double term = 1.0;
    double sum = 1.0;
    double offset = 0.0;
    for (int k = 1; k < 1000000; ++k) {
        term *= q / (k * (k + nu));
        sum += term;
        if (sum > kRescale) {
            sum /= kRescale;
            term /= kRescale;
            offset += log_rescale;
        }
        // Terms decrease once k(k+nu) > q; stop when negligible.
        if (k * (k + nu) > q && term < 1e-17 * sum) break;
    }
    return nu * std::log(0.5 * x) - log_gamma(nu + 1.0) + std::log(sum) + offset;
}

// Uniform asymptotic expansion in the order (Debye); accurate to ~1e-14 for
// nu >= 25 uniformly in x.
double log_bessel_debye(double nu, double x) {
    const double z = x / nu;
    const double root = std::sqrt(1.0 + z * z);
    const double t = 1.0 / root;
    const double eta = root + std::log(z / (1.0 + root));
    double series = 0.0;
    double nu_pow = 1.0;
    for (std::size_t k = 0; k < kDebye.size(); ++k) {
        series += horner(kDebye[k], 3 * k, t) / nu_pow;
        nu_pow *= nu;
    }
    return nu * eta - 0.5 * std::log(2.0 * std::numbers::pi * nu) - 0.5 * std::log(root) +
           std::log(series);
}

// Large-argument (Hankel) expansion, truncated at its smallest term.
double log_bessel_hankel(double nu, double x) {
    const double mu = 4.0 * nu * nu;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 500; ++k) {
        const double odd = 2.0 * k - 1.0;
        const double next = -term * (mu - odd * odd) / (8.0 * k * x);
        if (std::abs(next) >= std::abs(term) && k > 1) break;
        term = next;
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return x - 0.5 * std::log(2.0 * std::numbers::pi * x) + std::log(sum);
}

inline void two_sum(double a, double b, double& s, double& e) {
    s = a + b;
    const double bb = s - a;
    e = (a - (s - bb)) + (b - bb);
}

}  // namespace

SignedLog SignedLog::from_value(double v) {
    if (v == 0.0) return {};
    return {std::log(std::abs(v)), v > 0.0 ? 1 : -1};
}

double SignedLog::value() const {
    if (sign == 0) return 0.0;
    return sign * std::exp(log_magnitude);
}

SignedLog SignedLog::operator*(const SignedLog& other) const {
    if (sign == 0 || other.sign == 0) return {};
    return {log_magnitude + other.log_magnitude, sign * other.sign};
}

double log_gamma(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) throw std::domain_error("log_gamma: argument must be > 0");
    return boost::math::lgamma(x);
}

double log_binomial(double n, double k) {
    if (!(k >= 0.0 && k <= n)) throw std::domain_error("log_binomial: need 0 <= k <= n");
    const double small = std::min(k, n - k);
    if (small == std::floor(small) && n == std::floor(n) && small <= 100.0) {
        double acc = 0.0;
        for (int j = 1; j <= static_cast<int>(small); ++j) acc += std::log((n - small + j) / j);
        return acc;
    }
    return log_gamma(n + 1.0) - log_gamma(k + 1.0) - log_gamma(n - k + 1.0);
}

SignedLog log_bessel_i(double order, double x) {
    if (!std::isfinite(order) || order < -1.0)
        throw std::domain_error("log_bessel_i: order must be >= -1");
    if (!std::isfinite(x) || x < 0.0) throw std::domain_error("log_bessel_i: x must be >= 0");
    double nu = order;
    if (nu == -1.0) nu = 1.0;  // I_{-1} = I_1
    if (x == 0.0) {
        if (nu == 0.0) return {0.0, 1};
        if (nu > 0.0) return SignedLog::zero();
        throw std::domain_error("log_bessel_i: I_nu(0) is infinite for -1 < nu < 0");
    }
    if (nu >= kDebyeMinOrder) {
        if (x <= nu) return {log_bessel_series(nu, x), 1};
        return {log_bessel_debye(nu, x), 1};
    }
    if (x > 30.0 + 0.5 * nu * nu) return {log_bessel_hankel(nu, x), 1};
    return {log_bessel_series(nu, x), 1};
}

double sinc(double x) {
    if (std::abs(x) < 1e-4) {
        const double x2 = x * x;
        return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
    }
    return std::sin(x) / x;
}

CompensatedSum alternating_sum(std::span<const SignedLog> terms) {
    double top = -kInf;
    for (const auto& t : terms)
        if (t.sign != 0) top = std::max(top, t.log_magnitude);
    if (top == -kInf) return {SignedLog::zero(), 0.0};

    double s = 0.0;
    double c = 0.0;
    double abs_sum = 0.0;
    for (const auto& t : terms) {
        if (t.sign == 0) continue;
        const double v = t.sign * std::exp(t.log_magnitude - top);
        double e;
        two_sum(s, v, s, e);
        c += e;
        abs_sum += std::abs(v);
    }
    const double result = s + c;
    if (result == 0.0) return {SignedLog::zero(), kInf};
    SignedLog out{std::log(std::abs(result)) + top, result > 0.0 ? 1 : -1};
    return {out, std::log10(abs_sum / std::abs(result))};
}

}  // namespace twinbeam
