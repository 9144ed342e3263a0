#include "twinbeam/photostat.hpp"

#include "mpfr_real.hpp"
#include "twinbeam/specfun.hpp"

#include <gmp.h>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace twinbeam {

namespace {

constexpr double kMaxCancellationDigits = 4.0;
constexpr int kFirstEscalationDigits = 40;
constexpr int kMaxEscalationDigits = 4000;

std::vector<double> log_mandel_rice_table(double modes, double per_mode, int n_max) {
    std::vector<double> out(static_cast<std::size_t>(n_max) + 1);
    const double log_ratio = std::log(per_mode) - std::log1p(per_mode);
    out[0] = -modes * std::log1p(per_mode);
    for (int n = 0; n < n_max; ++n)
        out[n + 1] = out[n] + std::log((n + modes) / (n + 1.0)) + log_ratio;
    return out;
}

bool absent(double modes, double per_mode) { return modes == 0.0 || per_mode == 0.0; }

// Terms l = 0..m of the inclusion-exclusion sum in extended precision.
double detector_response_mpfr(const DetectorModel& d, std::int64_t m, std::int64_t n) {
    const auto N = static_cast<unsigned long>(d.pixels);
    const auto um = static_cast<unsigned long>(m);
    const auto un = static_cast<unsigned long>(n);
    mpz_t binom;
    mpz_init(binom);
    for (int digits = kFirstEscalationDigits; digits <= kMaxEscalationDigits; digits *= 2) {
        const mpfr_prec_t bits = detail::bits_for_digits(digits);
        detail::MpReal sum(bits), abs_sum(bits), term(bits), base(bits), tmp(bits);
        detail::MpReal eta(bits, d.efficiency), keep(bits, 1.0);
        mpfr_sub_d(keep.get(), keep.get(), d.dark_rate, MPFR_RNDN);  // 1 - D
        for (unsigned long l = 0; l <= um; ++l) {
            mpz_bin_uiui(binom, um, l);
            mpfr_set_z(term.get(), binom, MPFR_RNDN);
            if (l > 0) {
                mpfr_pow_ui(tmp.get(), keep.get(), l, MPFR_RNDN);
                mpfr_div(term.get(), term.get(), tmp.get(), MPFR_RNDN);
            }
            // (1 - eta (N - l) / N)^n
            mpfr_mul_ui(base.get(), eta.get(), N - l, MPFR_RNDN);
            mpfr_div_ui(base.get(), base.get(), N, MPFR_RNDN);
            mpfr_ui_sub(base.get(), 1, base.get(), MPFR_RNDN);
            mpfr_pow_ui(base.get(), base.get(), un, MPFR_RNDN);
            mpfr_mul(term.get(), term.get(), base.get(), MPFR_RNDN);
            if (l % 2 == 1) mpfr_neg(term.get(), term.get(), MPFR_RNDN);
            mpfr_add(sum.get(), sum.get(), term.get(), MPFR_RNDN);
            mpfr_abs(term.get(), term.get(), MPFR_RNDN);
            mpfr_add(abs_sum.get(), abs_sum.get(), term.get(), MPFR_RNDN);
        }
        if (sum.is_zero()) continue;
        const double lost = (abs_sum.log_abs() - sum.log_abs()) / std::log(10.0);
        if (lost > digits - 20) continue;
        // C(N, m) (1 - D)^N (-1)^m * sum
        mpz_bin_uiui(binom, N, um);
        mpfr_mul_z(sum.get(), sum.get(), binom, MPFR_RNDN);
        mpfr_pow_ui(tmp.get(), keep.get(), N, MPFR_RNDN);
        mpfr_mul(sum.get(), sum.get(), tmp.get(), MPFR_RNDN);
        if (m % 2 == 1) mpfr_neg(sum.get(), sum.get(), MPFR_RNDN);
        const double value = mpfr_get_d(sum.get(), MPFR_RNDN);
        mpz_clear(binom);
        if (value < 0.0) throw NumericalError("detector_response: negative probability");
        return std::min(value, 1.0);
    }
    mpz_clear(binom);
    std::ostringstream os;
    os << "detector_response: cancellation exceeds " << kMaxEscalationDigits
       << " digits at m = " << m << ", n = " << n;
    throw NumericalError(os.str());
}

}  // namespace

double mandel_rice(int n, double modes, double per_mode) {
    if (n < 0) throw std::domain_error("mandel_rice: n must be >= 0");
    if (!(modes > 0.0) || !(per_mode > 0.0) || !std::isfinite(modes) || !std::isfinite(per_mode))
        throw std::domain_error("mandel_rice: M and B must be positive and finite");
    double log_rising;  // ln[Gamma(n + M) / (n! Gamma(M))]
    if (n <= 100) {
        log_rising = 0.0;
        for (int j = 1; j <= n; ++j) log_rising += std::log((modes + j - 1.0) / j);
    } else {
        log_rising = log_gamma(n + modes) - log_gamma(n + 1.0) - log_gamma(modes);
    }
    return std::exp(log_rising + n * std::log(per_mode) - (n + modes) * std::log1p(per_mode));
}

std::vector<double> mandel_rice_table(double modes, double per_mode, int n_max) {
    if (n_max < 0) throw std::domain_error("mandel_rice_table: n_max must be >= 0");
    std::vector<double> out(static_cast<std::size_t>(n_max) + 1, 0.0);
    if (absent(modes, per_mode)) {
        out[0] = 1.0;
        return out;
    }
    const auto logs = log_mandel_rice_table(modes, per_mode, n_max);
    std::transform(logs.begin(), logs.end(), out.begin(), [](double v) { return std::exp(v); });
    return out;
}

int component_cutoff(double modes, double per_mode, double tail, int cap) {
    if (absent(modes, per_mode)) return 0;
    const auto p = mandel_rice_table(modes, per_mode, cap);
    double cumulative = 0.0;
    for (int n = 0; n <= cap; ++n) {
        cumulative += p[n];
        if (cumulative > 1.0 - tail) return n;
    }
    return cap;
}

PhotonCutoffs default_cutoffs(const TwinBeamParams& params) {
    validate(params);
    const int pair = component_cutoff(params.m_pairs, params.b_pairs);
    const int s = component_cutoff(params.m_noise_s, params.b_noise_s);
    const int i = component_cutoff(params.m_noise_i, params.b_noise_i);
    return {std::min(kMaxPhotonCutoff, pair + s), std::min(kMaxPhotonCutoff, pair + i)};
}

JointDistribution joint_photon_distribution(const TwinBeamParams& params, PhotonCutoffs cutoffs) {
    validate(params);
    if (cutoffs.n_s_max < 0 || cutoffs.n_i_max < 0)
        throw ValidationError("photon cutoffs must be >= 0");
    const int ns = cutoffs.n_s_max;
    const int ni = cutoffs.n_i_max;
    const int np = std::min(ns, ni);
    const auto pair = mandel_rice_table(params.m_pairs, params.b_pairs, np);
    const auto sig = mandel_rice_table(params.m_noise_s, params.b_noise_s, ns);
    const auto idl = mandel_rice_table(params.m_noise_i, params.b_noise_i, ni);
    const Eigen::Map<const Eigen::VectorXd> sv(sig.data(), ns + 1);
    const Eigen::Map<const Eigen::VectorXd> iv(idl.data(), ni + 1);

    JointDistribution out;
    out.probs = Eigen::MatrixXd::Zero(ns + 1, ni + 1);
    for (int n = 0; n <= np; ++n) {
        if (pair[n] == 0.0) continue;
        out.probs.bottomRightCorner(ns + 1 - n, ni + 1 - n).noalias() +=
            pair[n] * sv.head(ns + 1 - n) * iv.head(ni + 1 - n).transpose();
    }
    out.truncation_mass = 1.0 - out.total();
    if (out.truncation_mass > 0.5)
        throw ValidationError("photon cutoffs leave more than half of the probability outside the table");
    return out;
}

double detector_response(const DetectorModel& detector, std::int64_t m, std::int64_t n) {
    validate(detector);
    const std::int64_t N = detector.pixels;
    if (m < 0 || m > N) throw ValidationError("detector_response: need 0 <= m <= pixels");
    if (n < 0) throw ValidationError("detector_response: need n >= 0");
    const double eta = detector.efficiency;
    const double dark = detector.dark_rate;
    if (dark == 0.0 && m > n) return 0.0;

    std::vector<SignedLog> terms(static_cast<std::size_t>(m) + 1);
    const double log_keep = std::log1p(-dark);
    for (std::int64_t l = 0; l <= m; ++l) {
        const double miss = eta * static_cast<double>(N - l) / static_cast<double>(N);
        terms[l] = {log_binomial(static_cast<double>(m), static_cast<double>(l)) - l * log_keep +
                        (n == 0 ? 0.0 : n * std::log1p(-miss)),
                    (l % 2 == 0) ? 1 : -1};
    }
    const CompensatedSum sum = alternating_sum(terms);
    const int expected_sign = (m % 2 == 0) ? 1 : -1;
    if (sum.cancellation_digits <= kMaxCancellationDigits && sum.value.sign == expected_sign) {
        const double log_prefactor =
            log_binomial(static_cast<double>(N), static_cast<double>(m)) + N * log_keep;
        return std::min(1.0, std::exp(log_prefactor + sum.value.log_magnitude));
    }
    return detector_response_mpfr(detector, m, n);
}

DetectorResponseTable response_table(const DetectorModel& detector, int m_max, int n_max,
                                     ResponseMethod method) {
    validate(detector);
    if (m_max < 0 || m_max > detector.pixels)
        throw ValidationError("response_table: need 0 <= m_max <= pixels");
    if (n_max < 0) throw ValidationError("response_table: need n_max >= 0");

    DetectorResponseTable out;
    out.detector = detector;
    out.table = Eigen::MatrixXd::Zero(m_max + 1, n_max + 1);

    if (method == ResponseMethod::inclusion_exclusion) {
        for (int n = 0; n <= n_max; ++n)
            for (int m = 0; m <= m_max; ++m) out.table(m, n) = detector_response(detector, m, n);
    } else {
        const double N = static_cast<double>(detector.pixels);
        const double eta = detector.efficiency;
        const double dark = detector.dark_rate;
        // dark_law(k, j): j dark firings among the N - k pixels not hit by photons.
        Eigen::MatrixXd dark_law = Eigen::MatrixXd::Zero(m_max + 1, m_max + 1);
        for (int k = 0; k <= m_max; ++k) {
            const double free = N - k;
            if (dark == 0.0) {
                dark_law(k, 0) = 1.0;
                continue;
            }
            for (int j = 0; j + k <= m_max && j <= free; ++j) {
                dark_law(k, j) = std::exp(log_binomial(free, j) + j * std::log(dark) +
                                          (free - j) * std::log1p(-dark));
            }
        }
        // occupancy(k): probability that detected photons hit exactly k
        // distinct pixels; k above m_max never feeds back and is dropped.
        Eigen::VectorXd occupancy = Eigen::VectorXd::Zero(m_max + 1);
        occupancy(0) = 1.0;
        for (int n = 0; n <= n_max; ++n) {
            if (n > 0) {
                for (int k = std::min(n, m_max); k >= 0; --k) {
                    double v = occupancy(k) * ((1.0 - eta) + eta * k / N);
                    if (k > 0) v += occupancy(k - 1) * eta * (N - k + 1) / N;
                    occupancy(k) = v;
                }
            }
            for (int m = 0; m <= m_max; ++m) {
                double acc = 0.0;
                for (int k = 0; k <= std::min(m, n); ++k) acc += occupancy(k) * dark_law(k, m - k);
                out.table(m, n) = acc;
            }
        }
    }
    out.max_column_deficit = (1.0 - out.table.colwise().sum().array()).maxCoeff();
    return out;
}

JointDistribution photocount_distribution(const JointDistribution& photons,
                                          const DetectorResponseTable& response_s,
                                          const DetectorResponseTable& response_i) {
    validate(photons);
    const Eigen::Index ns = photons.probs.rows();
    const Eigen::Index ni = photons.probs.cols();
    if (response_s.table.cols() < ns || response_i.table.cols() < ni)
        throw ValidationError(
            "photocount_distribution: response tables do not cover the photon-number range");
    JointDistribution out;
    out.probs = response_s.table.leftCols(ns) * photons.probs *
                response_i.table.leftCols(ni).transpose();
    out.truncation_mass = 1.0 - out.total();
    return out;
}

JointDistribution forward_photocounts(const TwinBeamParams& params,
                                      const DetectorResponseTable& response_s,
                                      const DetectorResponseTable& response_i) {
    validate(params);
    const int ns = response_s.n_max();
    const int ni = response_i.n_max();
    const int np = std::min({component_cutoff(params.m_pairs, params.b_pairs), ns, ni});
    const int cs = std::min(component_cutoff(params.m_noise_s, params.b_noise_s), ns);
    const int ci = std::min(component_cutoff(params.m_noise_i, params.b_noise_i), ni);
    const auto pair = mandel_rice_table(params.m_pairs, params.b_pairs, np);
    const auto sig = mandel_rice_table(params.m_noise_s, params.b_noise_s, cs);
    const auto idl = mandel_rice_table(params.m_noise_i, params.b_noise_i, ci);

    // q(m | n): photocounts in one arm given n paired photons, noise folded in.
    auto fold = [np](const Eigen::MatrixXd& table, const std::vector<double>& noise, int n_max) {
        Eigen::MatrixXd q = Eigen::MatrixXd::Zero(table.rows(), np + 1);
        const int c = static_cast<int>(noise.size()) - 1;
        for (int n = 0; n <= np; ++n)
            for (int k = 0; k <= std::min(c, n_max - n); ++k)
                if (noise[k] != 0.0) q.col(n).noalias() += noise[k] * table.col(n + k);
        return q;
    };
    const Eigen::MatrixXd qs = fold(response_s.table, sig, ns);
    const Eigen::MatrixXd qi = fold(response_i.table, idl, ni);
    const Eigen::Map<const Eigen::VectorXd> pv(pair.data(), np + 1);

    JointDistribution out;
    out.probs = qs * pv.asDiagonal() * qi.transpose();
    out.truncation_mass = 1.0 - out.total();
    return out;
}

std::vector<double> sum_distribution(const JointDistribution& distribution) {
    validate(distribution);
    const Eigen::Index rows = distribution.probs.rows();
    const Eigen::Index cols = distribution.probs.cols();
    std::vector<double> out(static_cast<std::size_t>(rows + cols - 1), 0.0);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index k = 0; k < rows; ++k) out[k + j] += distribution.probs(k, j);
    return out;
}

double noise_reduction_factor(const FieldMoments& moments) {
    validate(moments);
    const double denominator = 2.0 * moments.mean_p + moments.mean_s + moments.mean_i;
    if (denominator == 0.0) throw ValidationError("noise_reduction_factor: zero mean intensity");
    return 1.0 + (moments.var_s + moments.var_i - 2.0 * moments.mean_p) / denominator;
}

}  // namespace twinbeam
