#include "twinbeam/qdii.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace twinbeam {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_ordering(double s) {
    if (!(s > -1.0 && s <= 1.0)) throw ValidationError("ordering parameter s must lie in (-1, 1]");
}

// Exact masses of a gamma law on the cells [0, h/2), [(j - 1/2) h, (j + 1/2) h).
// An absent component is a unit mass in cell 0.
std::vector<double> noise_cell_masses(double modes, double scale, double h, int cells) {
    std::vector<double> out(static_cast<std::size_t>(cells), 0.0);
    if (modes == 0.0 || scale == 0.0) {
        out[0] = 1.0;
        return out;
    }
    out[0] = boost::math::gamma_p(modes, 0.5 * h / scale);
    double upper_prev = boost::math::gamma_q(modes, 0.5 * h / scale);
    for (int j = 1; j < cells; ++j) {
        const double upper = boost::math::gamma_q(modes, (j + 0.5) * h / scale);
        out[j] = upper_prev - upper;
        upper_prev = upper;
    }
    return out;
}

// Masses on the grid cells [k h, (k + 1) h) themselves.
std::vector<double> aligned_cell_masses(double modes, double scale, double h, int cells) {
    std::vector<double> out(static_cast<std::size_t>(cells), 0.0);
    double upper_prev = 1.0;
    for (int k = 0; k < cells; ++k) {
        const double upper = boost::math::gamma_q(modes, (k + 1.0) * h / scale);
        out[k] = upper_prev - upper;
        upper_prev = upper;
    }
    return out;
}

Eigen::MatrixXd lower_toeplitz(const std::vector<double>& first_column) {
    const auto n = static_cast<Eigen::Index>(first_column.size());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = j; k < n; ++k) t(k, j) = first_column[k - j];
    return t;
}

// (W_s W_i)^{(M-1)/2} at a zero product: 0, 1 or +inf in log form.
double log_power_at_zero(double m_pairs) {
    if (m_pairs > 1.0) return -kInf;
    if (m_pairs == 1.0) return 0.0;
    return kInf;
}

}  // namespace

OrderingContext make_ordering_context(double b_pairs, double s) {
    check_ordering(s);
    if (!(b_pairs >= 0.0) || !std::isfinite(b_pairs))
        throw ValidationError("B_p must be finite and >= 0");
    OrderingContext c;
    c.s = s;
    c.b_p = b_pairs;
    c.b_p_s = b_pairs + 0.5 * (1.0 - s);
    c.d_p = std::sqrt(b_pairs * (b_pairs + 1.0));
    c.k_p_s = -s * b_pairs + 0.25 * (1.0 - s) * (1.0 - s);
    c.s_th_paired = 1.0 + 2.0 * (b_pairs - c.d_p);
    return c;
}

std::complex<double> characteristic_function(const TwinBeamParams& params, double s_s, double s_i,
                                             double ordering) {
    validate(params);
    check_ordering(ordering);
    using cd = std::complex<double>;
    const cd i{0.0, 1.0};
    const double shift = 0.5 * (1.0 - ordering);
    cd log_c{0.0, 0.0};
    auto factor = [&](double modes, const cd& base) {
        if (modes == 0.0) return;
        if (base == cd{0.0, 0.0}) throw ValidationError("characteristic function has a pole here");
        log_c -= modes * std::log(base);
    };
    factor(params.m_noise_s, 1.0 - i * s_s * (params.b_noise_s + shift));
    factor(params.m_noise_i, 1.0 - i * s_i * (params.b_noise_i + shift));
    const auto ctx = make_ordering_context(params.b_pairs, ordering);
    factor(params.m_pairs, 1.0 - i * (s_s + s_i) * ctx.b_p_s - ctx.k_p_s * s_s * s_i);
    return std::exp(log_c);
}

ThresholdDiagnostics ordering_threshold(const TwinBeamParams& params) {
    validate(params);
    const double weight = params.m_noise_s + params.m_noise_i + 2.0 * params.m_pairs;
    if (!(weight > 0.0)) throw ValidationError("ordering_threshold: all mode counts are zero");
    ThresholdDiagnostics t;
    t.beta = (params.m_noise_s * params.b_noise_s + params.m_noise_i * params.b_noise_i +
              2.0 * params.m_pairs * params.b_pairs) /
             weight;
    t.gamma = (params.m_noise_s * params.b_noise_s * params.b_noise_s +
               params.m_noise_i * params.b_noise_i * params.b_noise_i -
               2.0 * params.m_pairs * params.b_pairs) /
              weight;
    t.radicand = t.beta * t.beta - t.gamma;
    if (t.radicand >= 0.0) t.s_th = 1.0 + 2.0 * (t.beta - std::sqrt(t.radicand));
    return t;
}

NonclassicalityVerdict nonclassicality(const FieldMoments& moments) {
    validate(moments);
    NonclassicalityVerdict v;
    v.noise_term = moments.var_s + moments.var_i;
    v.pair_term = 2.0 * moments.mean_p;
    v.margin = v.pair_term - v.noise_term;
    v.nonclassical = v.margin > 0.0;
    return v;
}

SignedLog log_paired_qdii(const OrderingContext& ctx, double m, double w_s, double w_i) {
    if (!(m > 0.0) || !std::isfinite(m)) throw ValidationError("paired_qdii: M_p must be > 0");
    if (!(w_s >= 0.0) || !(w_i >= 0.0))
        throw ValidationError("paired_qdii: intensities must be >= 0");
    if (ctx.k_p_s == 0.0)
        throw ValidationError("paired_qdii: s is at the branch boundary of the paired kernel");
    if (!(ctx.b_p_s > 0.0)) throw ValidationError("paired_qdii: B_{p,s} must be > 0");

    const double product = w_s * w_i;
    const double log_power =
        product > 0.0 ? 0.5 * (m - 1.0) * std::log(product) : log_power_at_zero(m);

    if (ctx.sinc_branch()) {
        const double root = std::sqrt(-ctx.k_p_s);
        const double sc = sinc((w_s - w_i) / root);
        if (sc == 0.0 || log_power == -kInf) return SignedLog::zero();
        const double lm = log_power - std::log(std::numbers::pi) - log_gamma(m) -
                          m * std::log(ctx.b_p_s) - (w_s + w_i) / (2.0 * ctx.b_p_s) -
                          std::log(root) + std::log(std::abs(sc));
        return {lm, sc > 0.0 ? 1 : -1};
    }

    const double k = ctx.k_p_s;
    const double envelope = -ctx.b_p_s * (w_s + w_i) / k;
    if (ctx.d_p == 0.0) {
        // B_p = 0: the Bessel factor reduces to a product of gamma laws.
        if (product == 0.0) {
            const double lp = m > 1.0 ? -kInf : (m == 1.0 ? 0.0 : kInf);
            if (lp == -kInf) return SignedLog::zero();
            return {lp - 2.0 * log_gamma(m) - m * std::log(k) + envelope, 1};
        }
        return {(m - 1.0) * std::log(product) - 2.0 * log_gamma(m) - m * std::log(k) + envelope, 1};
    }
    if (product == 0.0) {
        // (W_s W_i)^{nu/2} I_nu(c sqrt(W_s W_i)) -> (c/2)^nu (W_s W_i)^nu / Gamma(nu + 1)
        if (m > 1.0) return SignedLog::zero();
        if (m < 1.0) return {kInf, 1};
        return {-std::log(k) + envelope, 1};
    }
    const double x = 2.0 * ctx.d_p * std::sqrt(product) / k;
    const SignedLog bessel = log_bessel_i(m - 1.0, x);
    const double lm = log_power - log_gamma(m) - std::log(k) - (m - 1.0) * std::log(ctx.d_p) +
                      envelope + bessel.log_magnitude;
    return {lm, bessel.sign};
}

double paired_qdii(const OrderingContext& ctx, double m_pairs, double w_s, double w_i) {
    const SignedLog v = log_paired_qdii(ctx, m_pairs, w_s, w_i);
    if (v.sign != 0 && v.log_magnitude > 709.0 && std::isfinite(v.log_magnitude))
        throw NumericalError("paired_qdii: value overflows double precision");
    return v.value();
}

double thermal_qdii(double modes, double per_mode, double s, double w) {
    check_ordering(s);
    if (!(modes > 0.0)) throw ValidationError("thermal_qdii: M must be > 0");
    if (!(per_mode >= 0.0)) throw ValidationError("thermal_qdii: B must be >= 0");
    if (!(w >= 0.0)) throw ValidationError("thermal_qdii: W must be >= 0");
    const double scale = per_mode + 0.5 * (1.0 - s);
    if (!(scale > 0.0)) throw ValidationError("thermal_qdii: B + (1 - s)/2 must be > 0");
    if (w == 0.0) {
        if (modes < 1.0) return kInf;
        if (modes > 1.0) return 0.0;
        return 1.0 / scale;
    }
    return std::exp((modes - 1.0) * std::log(w) - log_gamma(modes) - modes * std::log(scale) -
                    w / scale);
}

double paired_qdii_mass(const OrderingContext& ctx, double m) {
    using boost::math::quadrature::gauss_kronrod;
    // The envelope in u = (W_s + W_i)/2 is a gamma law of shape ~M and scale ~B_{p,s}.
    const double scale = ctx.sinc_branch() ? ctx.b_p_s
                                           : ctx.k_p_s / std::max(ctx.b_p_s - ctx.d_p, 1e-300);
    const double u_max = m * scale + 60.0 * std::sqrt(m) * scale + 60.0 * scale;
    auto inner = [&](double u) {
        if (u <= 0.0) return 0.0;
        auto f = [&](double v) { return paired_qdii(ctx, m, u + 0.5 * v, u - 0.5 * v); };
        return 2.0 * gauss_kronrod<double, 31>::integrate(f, 0.0, 2.0 * u, 15, 1e-10);
    };
    double total = 0.0;
    const int pieces = 16;
    for (int k = 0; k < pieces; ++k) {
        const double a = u_max * k / pieces;
        const double b = u_max * (k + 1) / pieces;
        total += gauss_kronrod<double, 31>::integrate(inner, a, b, 15, 1e-10);
    }
    return total;
}

GridSpec default_grid(const TwinBeamParams& params, double s) {
    validate(params);
    check_ordering(s);
    const double shift = 0.5 * (1.0 - s);
    const auto ctx = make_ordering_context(params.b_pairs, s);
    auto extent = [&](double m_noise, double b_noise) {
        const double b = m_noise > 0.0 ? b_noise + shift : 0.0;
        const double bp = params.m_pairs > 0.0 ? ctx.b_p_s : 0.0;
        const double mean = params.m_pairs * bp + m_noise * b;
        const double var = params.m_pairs * bp * bp + m_noise * b * b;
        return mean + 10.0 * std::sqrt(var);
    };
    GridSpec g;
    g.w_max = std::max({extent(params.m_noise_s, params.b_noise_s),
                        extent(params.m_noise_i, params.b_noise_i), 1e-3});
    // Resolve the sinc strips and the envelope scale with about four cells each.
    double feature = params.m_pairs > 0.0 ? ctx.b_p_s : g.w_max / 50.0;
    if (params.m_pairs > 0.0 && ctx.k_p_s != 0.0) feature = std::min(feature, std::sqrt(std::abs(ctx.k_p_s)));
    g.cells = static_cast<int>(std::clamp(std::ceil(4.0 * g.w_max / feature), 100.0, 800.0));
    return g;
}

QdiiGrid joint_qdii_grid(const TwinBeamParams& params, double s, const GridSpec& grid,
                         QdiiComponents components) {
    validate(params);
    check_ordering(s);
    if (!(grid.w_max > 0.0) || grid.cells < 2)
        throw ValidationError("qdii grid needs w_max > 0 and at least 2 cells");
    const int n = grid.cells;
    const double h = grid.w_max / n;
    const double shift = 0.5 * (1.0 - s);

    QdiiGrid out;
    out.ordering = s;
    out.w_s_axis.resize(n);
    for (int k = 0; k < n; ++k) out.w_s_axis[k] = (k + 0.5) * h;
    out.w_i_axis = out.w_s_axis;

    const bool noise_s = !components.paired_only && params.m_noise_s > 0.0 &&
                         params.b_noise_s + shift > 0.0;
    const bool noise_i = !components.paired_only && params.m_noise_i > 0.0 &&
                         params.b_noise_i + shift > 0.0;
    const bool pairs = params.m_pairs > 0.0 && (params.b_pairs > 0.0 || s < 1.0);

    if (!pairs) {
        if (components.paired_only)
            throw ValidationError("qdii: the paired field is absent, nothing to grid");
        // Point-mass pairs: a product of the two noise laws, averaged per cell.
        auto marginal = [&](bool present, double m, double b) {
            std::vector<double> v(n, 0.0);
            if (!present) {
                v[0] = 1.0;
            } else {
                v = aligned_cell_masses(m, b + shift, h, n);
            }
            return Eigen::Map<Eigen::VectorXd>(v.data(), n).eval();
        };
        const Eigen::VectorXd ms = marginal(noise_s, params.m_noise_s, params.b_noise_s);
        const Eigen::VectorXd mi = marginal(noise_i, params.m_noise_i, params.b_noise_i);
        out.values = ms * mi.transpose() / (h * h);
    } else {
        const auto ctx = make_ordering_context(params.b_pairs, s);
        if (ctx.k_p_s == 0.0)
            throw ValidationError("qdii: ordering is at the branch boundary of the paired kernel");
        Eigen::MatrixXd kernel(n, n);
        for (int l = 0; l < n; ++l)
            for (int k = 0; k < n; ++k)
                kernel(k, l) = paired_qdii(ctx, params.m_pairs, out.w_s_axis[k], out.w_i_axis[l]);
        Eigen::MatrixXd values = kernel;
        if (noise_s)
            values = lower_toeplitz(noise_cell_masses(params.m_noise_s, params.b_noise_s + shift, h, n)) *
                     values;
        if (noise_i)
            values = values *
                     lower_toeplitz(noise_cell_masses(params.m_noise_i, params.b_noise_i + shift, h, n))
                         .transpose();
        out.values = std::move(values);
    }
    out.normalization = out.values.sum() * h * h;
    if (grid.check_normalization && std::abs(out.normalization - 1.0) > 0.05)
        throw ValidationError("qdii grid too coarse or too small: normalization " +
                              std::to_string(out.normalization));
    return out;
}

}  // namespace twinbeam
