#pragma once

// Moment pipeline: photocount moments -> dark-corrected detected intensity
// moments -> feasibility of the inversion -> the one-parameter family of
// pre-detection moments indexed by the paired variance -> mode parameters.

#include "twinbeam/model.hpp"

namespace twinbeam {

PhotocountMoments photocount_moments(const Histogram2D& histogram);

/// Subtracts dark-count contributions and the shot-noise term. A corrected
/// mean below zero is kept and flagged via DetectedIntensityMoments::negative_mean.
DetectedIntensityMoments dark_corrected_moments(const PhotocountMoments& signal_idler,
                                                const PhotocountMoments& dark);

/// eta_s minus the smallest signal efficiency that admits a non-negative
/// solution (alpha = eta_i / eta_s). Negative means infeasible.
double feasibility(const DetectedIntensityMoments& detected, double eta_s, double eta_i);

/// The solutions of the detection relations, parameterized by the paired
/// intensity variance var_p.
///
/// var_p_max is min(var_s / eta_s^2, var_i / eta_i^2), the point where a noise
/// variance reaches zero. Non-negativity of the noise means bounds var_p from
/// below and of the paired mean from above; lower()/upper() give the usable
/// interval. var_p = 0 is never a member: when the lower bound is zero the
/// Poissonian-pair limit is reported through poissonian_pair_limit instead.
struct MomentInversionFamily {
    DetectedIntensityMoments detected;
    double eta_s = 0.0;
    double eta_i = 0.0;
    double var_p_max = 0.0;
    /// cov / (eta_s eta_i) - min(mean_s / eta_s, mean_i / eta_i).
    double var_p_noise_bound = 0.0;
    /// cov / (eta_s eta_i): paired mean reaches zero here.
    double var_p_pair_bound = 0.0;
    bool poissonian_pair_limit = false;

    double lower() const;
    double upper() const;
    bool contains(double var_p) const;
};

MomentInversionFamily inversion_family(const DetectedIntensityMoments& detected, double eta_s,
                                       double eta_i);

/// Pre-detection moments at a given paired variance, without sign checks.
FieldMoments family_moments_at(const MomentInversionFamily& family, double var_p);

/// Pre-detection moments at var_p. Throws ValidationError when var_p is
/// outside the family or any output moment is negative.
FieldMoments invert_at(const MomentInversionFamily& family, double var_p);

struct ModeComponent {
    double modes = 0.0;       // M = mean^2 / var
    double per_mode = 0.0;    // B = var / mean
};

/// Mode count and occupation of one component from its mean and variance.
/// mean = var = 0 gives an absent component (0, 0).
ModeComponent component_modes(double mean, double var);

TwinBeamParams mode_parameters(const FieldMoments& moments);

/// Moments of the three components of a parameter set: mean = M B, var = M B^2.
FieldMoments field_moments(const TwinBeamParams& params);

/// Forward detection relations: detected moments produced by field moments.
DetectedIntensityMoments detected_moments(const FieldMoments& moments, double eta_s,
                                          double eta_i);

}  // namespace twinbeam
