#pragma once

// Photon-number and photocount statistics of the three-component twin beam:
// Mandel-Rice components, their joint convolution, the pixelated-detector
// response, the photocount forward model, the sum distribution and the
// noise-reduction factor.

#include "twinbeam/model.hpp"

#include <vector>

namespace twinbeam {

/// Cap on any photon-number cutoff.
inline constexpr int kMaxPhotonCutoff = 512;
/// Tail mass left out by the default cutoffs.
inline constexpr double kCutoffTail = 1e-10;

/// Mandel-Rice probability p(n; M, B) for M > 0, B > 0, evaluated in log space.
double mandel_rice(int n, double modes, double per_mode);

/// p(0..n_max; M, B). A component with M == 0 or B == 0 is a point mass at 0.
std::vector<double> mandel_rice_table(double modes, double per_mode, int n_max);

/// Smallest n whose cumulative mass exceeds 1 - tail, capped at `cap`.
int component_cutoff(double modes, double per_mode, double tail = kCutoffTail,
                     int cap = kMaxPhotonCutoff);

struct PhotonCutoffs {
    int n_s_max = 0;
    int n_i_max = 0;
};

/// Per-arm cutoffs: paired cutoff plus noise cutoff, capped.
PhotonCutoffs default_cutoffs(const TwinBeamParams& params);

/// Joint photon-number distribution as the two-fold convolution of the paired
/// and noise Mandel-Rice laws. Throws ValidationError when more than half the
/// mass falls outside the table.
JointDistribution joint_photon_distribution(const TwinBeamParams& params, PhotonCutoffs cutoffs);

/// Probability of m photocounts from n photons on a pixelated detector, from
/// the inclusion-exclusion sum over pixels (binomial prefactor C(N, m)).
/// The alternating sum is evaluated in double precision and recomputed with
/// MPFR when more than six digits cancel. Throws NumericalError when even
/// 4000 digits do not suffice.
double detector_response(const DetectorModel& detector, std::int64_t m, std::int64_t n);

enum class ResponseMethod {
    occupancy_recursion,   // positive-term recursion over photons (default)
    inclusion_exclusion,   // detector_response per entry
};

struct DetectorResponseTable {
    DetectorModel detector;
    /// table(m, n), m in [0, m_max], n in [0, n_max].
    Eigen::MatrixXd table;
    /// Largest 1 - column sum over the table.
    double max_column_deficit = 0.0;

    int m_max() const { return static_cast<int>(table.rows()) - 1; }
    int n_max() const { return static_cast<int>(table.cols()) - 1; }
};

DetectorResponseTable response_table(const DetectorModel& detector, int m_max, int n_max,
                                     ResponseMethod method = ResponseMethod::occupancy_recursion);

/// p_c(m_s, m_i) = sum T_s(m_s, n_s) T_i(m_i, n_i) p(n_s, n_i). Mass lost to
/// the photon or photocount truncation is reported, not renormalized.
JointDistribution photocount_distribution(const JointDistribution& photons,
                                          const DetectorResponseTable& response_s,
                                          const DetectorResponseTable& response_i);

/// Same result as photocount_distribution(joint_photon_distribution(...)) but
/// factorized through the shared pair count, which is much cheaper when the
/// noise cutoffs are large. Photon numbers are limited by the table widths.
JointDistribution forward_photocounts(const TwinBeamParams& params,
                                      const DetectorResponseTable& response_s,
                                      const DetectorResponseTable& response_i);

/// p_sum(k) = sum_{n_s + n_i = k} p(n_s, n_i).
std::vector<double> sum_distribution(const JointDistribution& distribution);

/// <(Delta(n_s - n_i))^2> / (<n_s> + <n_i>) of the three-component field.
double noise_reduction_factor(const FieldMoments& moments);

}  // namespace twinbeam
