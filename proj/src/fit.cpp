#include "twinbeam/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace twinbeam {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Photocount rows beyond the photon cutoff only carry dark counts.
constexpr int kDarkMargin = 8;

int photocount_rows(const Histogram2D& h, const DetectorModel& d, bool signal) {
    const auto extent = static_cast<std::int64_t>(signal ? h.counts.rows() : h.counts.cols()) - 1;
    const std::int64_t wanted = std::max<std::int64_t>(extent, kMaxPhotonCutoff + kDarkMargin);
    return static_cast<int>(std::min(wanted, d.pixels));
}

}  // namespace

double declination(const JointDistribution& model, const Histogram2D& f) {
    validate(f);
    const double total = f.counts.sum();
    if (std::abs(total - 1.0) > 1e-9)
        throw ValidationError("declination: histogram must be normalized to total 1");
    const Eigen::Index rows = std::max(model.probs.rows(), f.counts.rows());
    const Eigen::Index cols = std::max(model.probs.cols(), f.counts.cols());
    double acc = 0.0;
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index k = 0; k < rows; ++k) {
            const double p = (k < model.probs.rows() && j < model.probs.cols()) ? model.probs(k, j) : 0.0;
            const double d = p - f.at(k, j);
            acc += d * d;
        }
    }
    return std::sqrt(acc);
}

DeclinationObjective::DeclinationObjective(const Histogram2D& histogram,
                                           const MomentInversionFamily& family,
                                           const DetectorModel& detector_s,
                                           const DetectorModel& detector_i)
    : normalized_(validate(histogram).normalized()),
      family_(family),
      response_s_(response_table(detector_s, photocount_rows(histogram, detector_s, true),
                                 kMaxPhotonCutoff)),
      response_i_(response_table(detector_i, photocount_rows(histogram, detector_i, false),
                                 kMaxPhotonCutoff)) {}

TwinBeamParams DeclinationObjective::params_at(double var_p) const {
    return mode_parameters(invert_at(family_, var_p));
}

JointDistribution DeclinationObjective::model_at(double var_p) const {
    return forward_photocounts(params_at(var_p), response_s_, response_i_);
}

double DeclinationObjective::operator()(double var_p) const {
    return declination(model_at(var_p), normalized_);
}

ReconstructionResult reconstruct(const Histogram2D& histogram, const Histogram2D& dark,
                                 const DetectorModel& detector_s, const DetectorModel& detector_i,
                                 int scan_points) {
    if (scan_points < 3) throw ValidationError("reconstruct: scan_points must be >= 3");
    validate(detector_s);
    validate(detector_i);
    const auto detected =
        dark_corrected_moments(photocount_moments(histogram), photocount_moments(dark));
    const auto family = inversion_family(detected, detector_s.efficiency, detector_i.efficiency);
    const DeclinationObjective objective(histogram, family, detector_s, detector_i);

    const double lo = family.lower();
    const double hi = family.upper();
    if (!(hi > lo)) throw InfeasibleError("allowed interval of the paired variance is empty", 0.0);
    const double cell = (hi - lo) / scan_points;

    ReconstructionResult r;
    r.family = family;
    r.scan_points = scan_points;
    auto evaluate = [&](double v) {
        double value;
        try {
            value = objective(v);
        } catch (const ValidationError&) {
            value = kInf;
        } catch (const NumericalError&) {
            value = kInf;
        }
        r.scan.push_back({v, value});
        return value;
    };

    int best = -1;
    double best_value = kInf;
    for (int k = 0; k < scan_points; ++k) {
        const double value = evaluate(lo + (k + 0.5) * cell);
        if (value < best_value) {
            best_value = value;
            best = k;
        }
    }
    if (best < 0) throw NumericalError("reconstruct: forward model failed at every scan point");

    // Golden-section search inside the bracket around the best scan point.
    const double x_best = lo + (best + 0.5) * cell;
    double a = std::max(lo, x_best - cell);
    double b = std::min(hi, x_best + cell);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = evaluate(x1);
    double f2 = evaluate(x2);
    while (b - a > kRefinementTolerance * std::abs(0.5 * (a + b))) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = evaluate(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = evaluate(x2);
        }
    }
    r.refinement_points = static_cast<int>(r.scan.size()) - scan_points;

    const auto it = std::min_element(r.scan.begin(), r.scan.end(),
                                     [](const ScanPoint& p, const ScanPoint& q) {
                                         return p.declination < q.declination;
                                     });
    r.var_p_opt = it->var_p;
    r.declination = it->declination;
    r.field_moments = invert_at(family, r.var_p_opt);
    r.params = mode_parameters(r.field_moments);

    const double width = b - a;
    const double to_edge = std::min(r.var_p_opt - lo, hi - r.var_p_opt);
    r.at_boundary = to_edge <= width ||
                    ((best == 0 || best == scan_points - 1) && to_edge <= cell);

    std::sort(r.scan.begin(), r.scan.end(),
              [](const ScanPoint& p, const ScanPoint& q) { return p.var_p < q.var_p; });
    return r;
}

}  // namespace twinbeam
