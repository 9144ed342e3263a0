#pragma once

// Least-squares declination between a model photocount distribution and a
// measured histogram, and the one-dimensional search over the paired
// variance that selects the reconstructed state.

#include "twinbeam/moments.hpp"
#include "twinbeam/photostat.hpp"

#include <vector>

namespace twinbeam {

/// Euclidean distance between p_c and a normalized histogram over the union
/// of their supports. Throws ValidationError when f does not sum to one.
double declination(const JointDistribution& model, const Histogram2D& normalized);

struct ScanPoint {
    double var_p = 0.0;
    /// +inf when the forward model failed at this point.
    double declination = 0.0;
};

struct ReconstructionResult {
    double var_p_opt = 0.0;
    TwinBeamParams params;
    FieldMoments field_moments;
    double declination = 0.0;
    /// Every evaluated point (uniform scan and refinement), sorted by var_p.
    std::vector<ScanPoint> scan;
    int scan_points = 0;
    int refinement_points = 0;
    bool at_boundary = false;
    MomentInversionFamily family;
};

/// Declination as a function of var_p for one histogram and detector pair.
/// Response tables are built once and reused for every evaluation.
class DeclinationObjective {
public:
    DeclinationObjective(const Histogram2D& histogram, const MomentInversionFamily& family,
                         const DetectorModel& detector_s, const DetectorModel& detector_i);

    /// Field moments and parameters at var_p (invert_at + mode_parameters).
    TwinBeamParams params_at(double var_p) const;
    JointDistribution model_at(double var_p) const;
    double operator()(double var_p) const;

    const MomentInversionFamily& family() const { return family_; }

private:
    Histogram2D normalized_;
    MomentInversionFamily family_;
    DetectorResponseTable response_s_;
    DetectorResponseTable response_i_;
};

/// Relative bracket width at which golden-section refinement stops.
inline constexpr double kRefinementTolerance = 1e-4;

/// Full pipeline: moments of f and dark, inversion family, uniform scan of
/// scan_points cell midpoints over the allowed var_p interval, golden-section
/// refinement of the best bracket. Throws InfeasibleError for infeasible
/// moments and NumericalError when every scan point fails.
ReconstructionResult reconstruct(const Histogram2D& histogram, const Histogram2D& dark,
                                 const DetectorModel& detector_s, const DetectorModel& detector_i,
                                 int scan_points = 200);

}  // namespace twinbeam
