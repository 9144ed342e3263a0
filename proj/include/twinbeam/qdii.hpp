#pragma once

// s-ordered quasi-distributions of integrated intensities (QDII) of the twin
// beam: the paired-field kernel with its sinc and Bessel branches, thermal
// noise densities, their convolution on a grid, the ordering threshold and the
// moment criterion of non-classicality.

#include "twinbeam/model.hpp"
#include "twinbeam/specfun.hpp"

#include <complex>
#include <optional>

namespace twinbeam {

/// Quantities of the paired kernel that depend only on (s, B_p).
struct OrderingContext {
    double s = 1.0;
    double b_p = 0.0;
    double b_p_s = 0.0;         // B_p + (1 - s) / 2
    double d_p = 0.0;           // sqrt(B_p (B_p + 1))
    double k_p_s = 0.0;         // -s B_p + (1 - s)^2 / 4
    double s_th_paired = 1.0;   // 1 + 2 (B_p - D_p)

    /// K < 0: oscillating sinc branch (s above the paired threshold).
    bool sinc_branch() const { return k_p_s < 0.0; }
};

/// Throws ValidationError for s outside (-1, 1] or negative B_p.
OrderingContext make_ordering_context(double b_pairs, double s);

/// Characteristic function of the three-component field at ordering s
/// (s = 1: normal ordering). Non-integer powers are taken on the principal
/// branch, which is continuous along every ray from the origin because the
/// imaginary part of each base keeps one sign there. Throws ValidationError at
/// a pole.
std::complex<double> characteristic_function(const TwinBeamParams& params, double s_s, double s_i,
                                             double ordering = 1.0);

struct ThresholdDiagnostics {
    /// Empty when the radicand beta^2 - gamma is negative.
    std::optional<double> s_th;
    double beta = 0.0;
    double gamma = 0.0;
    double radicand = 0.0;
};

/// s_th = 1 + 2 (beta - sqrt(beta^2 - gamma)). Throws ValidationError when
/// M_s + M_i + 2 M_p is zero.
ThresholdDiagnostics ordering_threshold(const TwinBeamParams& params);

struct NonclassicalityVerdict {
    /// 2 <W_p> - <(dW_s)^2> - <(dW_i)^2>.
    double margin = 0.0;
    bool nonclassical = false;
    /// M_s B_s^2 + M_i B_i^2, the left side of the equivalent mode form.
    double noise_term = 0.0;
    /// 2 M_p B_p.
    double pair_term = 0.0;
};

NonclassicalityVerdict nonclassicality(const FieldMoments& moments);

/// Paired-field QDII in log form. Throws ValidationError at the branch
/// boundary (K == 0), for negative intensities or M_p <= 0.
SignedLog log_paired_qdii(const OrderingContext& ctx, double m_pairs, double w_s, double w_i);
double paired_qdii(const OrderingContext& ctx, double m_pairs, double w_s, double w_i);

/// Gamma density of an M-mode thermal field at ordering s (scale B + (1-s)/2).
/// Throws ValidationError when that scale is not positive.
double thermal_qdii(double modes, double per_mode, double s, double w);

/// Integral of the paired QDII over the quarter plane by adaptive
/// Gauss-Kronrod quadrature in (W_s + W_i) / 2 and W_s - W_i.
double paired_qdii_mass(const OrderingContext& ctx, double m_pairs);

/// Uniform square grid with cell-centred nodes (k + 1/2) h, h = w_max / cells.
struct GridSpec {
    double w_max = 20.0;
    int cells = 200;
    /// Reject grids whose midpoint-rule normalization misses 1 by more than 5%.
    bool check_normalization = true;
};

/// Grid extent covering the bulk of every component at ordering s.
GridSpec default_grid(const TwinBeamParams& params, double s);

struct QdiiComponents {
    /// Drop both noise fields and return the paired kernel alone.
    bool paired_only = false;
};

/// Convolution of the paired kernel with the two noise densities. Noise is
/// discretized into exact cell masses (regularized incomplete gamma), so
/// integrable singularities at zero intensity, including the reference-scale
/// M ~ 1e-5 components, are represented faithfully. Raw signed values.
QdiiGrid joint_qdii_grid(const TwinBeamParams& params, double s, const GridSpec& grid,
                         QdiiComponents components = {});

}  // namespace twinbeam
