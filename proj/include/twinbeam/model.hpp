#pragma once

// Shared domain types for twin-beam reconstruction, plus their validation.
// Nothing in here does physics; the other modules consume validated values.

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace twinbeam {

// ---------------------------------------------------------------------------
// Errors

/// An input violates a documented invariant. The message names the invariant.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Moments admit no non-negative pre-detection solution.
class InfeasibleError : public std::runtime_error {
public:
    InfeasibleError(const std::string& what, double margin)
        : std::runtime_error(what), margin_(margin) {}
    double margin() const noexcept { return margin_; }

private:
    double margin_;
};

/// A numerical routine could not deliver the requested accuracy.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Types

/// Six-parameter twin-beam state: M_p paired modes with B_p pairs per mode,
/// plus independent multi-thermal signal and idler noise (M_s, B_s), (M_i, B_i).
/// Mode counts are real; a zero mode count means the component is absent.
struct TwinBeamParams {
    double m_pairs = 0.0;
    double b_pairs = 0.0;
    double m_noise_s = 0.0;
    double b_noise_s = 0.0;
    double m_noise_i = 0.0;
    double b_noise_i = 0.0;

    bool operator==(const TwinBeamParams&) const = default;
};

/// Pixelated detector: per-photon efficiency, pixel count, per-pixel dark
/// probability D = <d>/N.
struct DetectorModel {
    double efficiency = 0.5;
    std::int64_t pixels = 1;
    double dark_rate = 0.0;

    bool operator==(const DetectorModel&) const = default;
};

/// Joint photocount histogram f(m_s, m_i); rows are m_s, columns are m_i.
/// Cells are reals so raw tallies and normalized tables share one type.
struct Histogram2D {
    Eigen::MatrixXd counts;
    double total_frames = 0.0;

    /// Copy scaled so the cells sum to one.
    Histogram2D normalized() const;
    /// Cell value, zero outside the stored range.
    double at(Eigen::Index m_s, Eigen::Index m_i) const;
};

/// First and second moments of a pair of counts. Also used for dark counts.
struct PhotocountMoments {
    double mean_s = 0.0;
    double mean_i = 0.0;
    double mean_sq_s = 0.0;
    double mean_sq_i = 0.0;
    double cross = 0.0;
};

/// Dark-count corrected moments of the detected integrated intensities.
struct DetectedIntensityMoments {
    double mean_s = 0.0;
    double mean_i = 0.0;
    double var_s = 0.0;
    double var_i = 0.0;
    double cov = 0.0;
    /// Set when dark correction drove a mean below zero. The value is kept.
    bool negative_mean = false;
};

/// Pre-detection moments of the paired (p) and noise (s, i) intensities.
struct FieldMoments {
    double mean_p = 0.0;
    double mean_s = 0.0;
    double mean_i = 0.0;
    double var_p = 0.0;
    double var_s = 0.0;
    double var_i = 0.0;
};

/// Truncated probability table over (n_s, n_i) or (m_s, m_i) starting at (0, 0).
struct JointDistribution {
    Eigen::MatrixXd probs;
    double truncation_mass = 0.0;

    double total() const { return probs.sum(); }
};

/// Sampled s-ordered quasi-distribution over an intensity grid. Values may be
/// negative.
struct QdiiGrid {
    std::vector<double> w_s_axis;
    std::vector<double> w_i_axis;
    Eigen::MatrixXd values;  // rows follow w_s_axis, columns w_i_axis
    double ordering = 1.0;
    double normalization = 0.0;
};

// ---------------------------------------------------------------------------
// Validation. Each overload returns its argument unchanged or throws
// ValidationError naming the violated invariant.

const TwinBeamParams& validate(const TwinBeamParams& params);
const DetectorModel& validate(const DetectorModel& detector);
const Histogram2D& validate(const Histogram2D& histogram);
const PhotocountMoments& validate(const PhotocountMoments& moments);
const FieldMoments& validate(const FieldMoments& moments);
const JointDistribution& validate(const JointDistribution& distribution);
const QdiiGrid& validate(const QdiiGrid& grid);

}  // namespace twinbeam
