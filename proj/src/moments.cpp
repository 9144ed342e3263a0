#include "twinbeam/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace twinbeam {

namespace {

void check_efficiency(double eta, const char* name) {
    if (!(eta > 0.0 && eta < 1.0)) {
        std::ostringstream os;
        os << name << " must lie in the open interval (0, 1)";
        throw ValidationError(os.str());
    }
}

// Outputs at an interval endpoint may miss zero by a few ulps.
double snap_to_zero(double v, double scale) {
    return (v < 0.0 && v > -1e-12 * scale) ? 0.0 : v;
}

}  // namespace

PhotocountMoments photocount_moments(const Histogram2D& histogram) {
    validate(histogram);
    const Eigen::MatrixXd& c = histogram.counts;
    const double total = c.sum();
    PhotocountMoments m;
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
        for (Eigen::Index k = 0; k < c.rows(); ++k) {
            const double w = c(k, j) / total;
            if (w == 0.0) continue;
            const double ms = static_cast<double>(k);
            const double mi = static_cast<double>(j);
            m.mean_s += w * ms;
            m.mean_i += w * mi;
            m.mean_sq_s += w * ms * ms;
            m.mean_sq_i += w * mi * mi;
            m.cross += w * ms * mi;
        }
    }
    return m;
}

DetectedIntensityMoments dark_corrected_moments(const PhotocountMoments& si,
                                                const PhotocountMoments& dark) {
    validate(si);
    validate(dark);
    DetectedIntensityMoments d;
    d.mean_s = si.mean_s - dark.mean_s;
    d.mean_i = si.mean_i - dark.mean_i;
    d.var_s = si.mean_sq_s - si.mean_s * si.mean_s - si.mean_s - dark.mean_sq_s +
              dark.mean_s * dark.mean_s + dark.mean_s;
    d.var_i = si.mean_sq_i - si.mean_i * si.mean_i - si.mean_i - dark.mean_sq_i +
              dark.mean_i * dark.mean_i + dark.mean_i;
    d.cov = si.cross - si.mean_s * si.mean_i - dark.cross + dark.mean_s * dark.mean_i;
    d.negative_mean = d.mean_s < 0.0 || d.mean_i < 0.0;
    return d;
}

double feasibility(const DetectedIntensityMoments& detected, double eta_s, double eta_i) {
    check_efficiency(eta_s, "eta_s");
    check_efficiency(eta_i, "eta_i");
    const double alpha = eta_i / eta_s;
    const double numerator =
        detected.cov / alpha - std::min(detected.var_s, detected.var_i / (alpha * alpha));
    const double denominator = std::min(detected.mean_s, detected.mean_i / alpha);
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (denominator < 0.0) return -inf;
    if (denominator == 0.0) return numerator <= 0.0 ? inf : -inf;
    return eta_s - numerator / denominator;
}

double MomentInversionFamily::lower() const { return std::max(0.0, var_p_noise_bound); }

double MomentInversionFamily::upper() const {
    return std::max(lower(), std::min(var_p_max, var_p_pair_bound));
}

bool MomentInversionFamily::contains(double var_p) const {
    return std::isfinite(var_p) && var_p > 0.0 && var_p >= lower() && var_p <= upper();
}

MomentInversionFamily inversion_family(const DetectedIntensityMoments& detected, double eta_s,
                                       double eta_i) {
    const double margin = feasibility(detected, eta_s, eta_i);
    if (!(margin >= 0.0)) {
        std::ostringstream os;
        os << "moments are infeasible for the given efficiencies (margin " << margin << ")";
        throw InfeasibleError(os.str(), margin);
    }
    MomentInversionFamily f;
    f.detected = detected;
    f.eta_s = eta_s;
    f.eta_i = eta_i;
    f.var_p_max =
        std::min(detected.var_s / (eta_s * eta_s), detected.var_i / (eta_i * eta_i));
    f.var_p_pair_bound = detected.cov / (eta_s * eta_i);
    f.var_p_noise_bound =
        f.var_p_pair_bound - std::min(detected.mean_s / eta_s, detected.mean_i / eta_i);
    f.poissonian_pair_limit = f.var_p_noise_bound <= 0.0;
    if (!(f.var_p_max > 0.0) || !(f.var_p_pair_bound > 0.0)) {
        throw InfeasibleError("allowed interval of the paired variance is empty", margin);
    }
    return f;
}

FieldMoments family_moments_at(const MomentInversionFamily& f, double var_p) {
    const auto& d = f.detected;
    const double pair = d.cov / (f.eta_s * f.eta_i);
    FieldMoments m;
    m.var_p = var_p;
    m.mean_p = pair - var_p;
    m.mean_s = d.mean_s / f.eta_s - pair + var_p;
    m.mean_i = d.mean_i / f.eta_i - pair + var_p;
    m.var_s = d.var_s / (f.eta_s * f.eta_s) - var_p;
    m.var_i = d.var_i / (f.eta_i * f.eta_i) - var_p;
    return m;
}

FieldMoments invert_at(const MomentInversionFamily& family, double var_p) {
    if (!family.contains(var_p)) {
        std::ostringstream os;
        os << "var_p = " << var_p << " lies outside the allowed interval (" << family.lower()
           << ", " << family.upper() << "]";
        throw ValidationError(os.str());
    }
    FieldMoments m = family_moments_at(family, var_p);
    const double scale = family.var_p_pair_bound + var_p;
    m.mean_p = snap_to_zero(m.mean_p, scale);
    m.mean_s = snap_to_zero(m.mean_s, scale);
    m.mean_i = snap_to_zero(m.mean_i, scale);
    m.var_s = snap_to_zero(m.var_s, scale);
    m.var_i = snap_to_zero(m.var_i, scale);
    if (m.mean_p < 0.0 || m.mean_s < 0.0 || m.mean_i < 0.0 || m.var_s < 0.0 || m.var_i < 0.0)
        throw ValidationError("inversion produced a negative moment; check efficiencies and var_p");
    return m;
}

ModeComponent component_modes(double mean, double var) {
    if (!(mean >= 0.0) || !(var >= 0.0) || !std::isfinite(mean) || !std::isfinite(var))
        throw ValidationError("component moments must be finite and non-negative");
    if (mean == 0.0 && var == 0.0) return {};
    if (mean == 0.0)
        throw ValidationError("component has zero mean but positive variance");
    if (var == 0.0)
        throw ValidationError(
            "component has zero variance: Poissonian limit has no finite mode count");
    return {mean * mean / var, var / mean};
}

TwinBeamParams mode_parameters(const FieldMoments& moments) {
    validate(moments);
    const auto p = component_modes(moments.mean_p, moments.var_p);
    const auto s = component_modes(moments.mean_s, moments.var_s);
    const auto i = component_modes(moments.mean_i, moments.var_i);
    return {p.modes, p.per_mode, s.modes, s.per_mode, i.modes, i.per_mode};
}

FieldMoments field_moments(const TwinBeamParams& params) {
    validate(params);
    FieldMoments m;
    m.mean_p = params.m_pairs * params.b_pairs;
    m.mean_s = params.m_noise_s * params.b_noise_s;
    m.mean_i = params.m_noise_i * params.b_noise_i;
    m.var_p = m.mean_p * params.b_pairs;
    m.var_s = m.mean_s * params.b_noise_s;
    m.var_i = m.mean_i * params.b_noise_i;
    return m;
}

DetectedIntensityMoments detected_moments(const FieldMoments& moments, double eta_s,
                                          double eta_i) {
    validate(moments);
    check_efficiency(eta_s, "eta_s");
    check_efficiency(eta_i, "eta_i");
    DetectedIntensityMoments d;
    d.mean_s = eta_s * (moments.mean_p + moments.mean_s);
    d.mean_i = eta_i * (moments.mean_p + moments.mean_i);
    d.var_s = eta_s * eta_s * (moments.var_p + moments.var_s);
    d.var_i = eta_i * eta_i * (moments.var_p + moments.var_i);
    d.cov = eta_s * eta_i * (moments.mean_p + moments.var_p);
    return d;
}

}  // namespace twinbeam
