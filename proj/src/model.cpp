#include "twinbeam/model.hpp"

#include <cmath>
#include <sstream>

namespace twinbeam {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ValidationError(what);
}

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace

Histogram2D Histogram2D::normalized() const {
    validate(*this);
    Histogram2D out;
    out.counts = counts / counts.sum();
    out.total_frames = 1.0;
    return out;
}

double Histogram2D::at(Eigen::Index m_s, Eigen::Index m_i) const {
    if (m_s < 0 || m_i < 0 || m_s >= counts.rows() || m_i >= counts.cols()) return 0.0;
    return counts(m_s, m_i);
}

const TwinBeamParams& validate(const TwinBeamParams& p) {
    require(finite_nonneg(p.m_pairs), "TwinBeamParams: m_pairs must be finite and >= 0");
    require(finite_nonneg(p.b_pairs), "TwinBeamParams: b_pairs must be finite and >= 0");
    require(finite_nonneg(p.m_noise_s), "TwinBeamParams: m_noise_s must be finite and >= 0");
    require(finite_nonneg(p.b_noise_s), "TwinBeamParams: b_noise_s must be finite and >= 0");
    require(finite_nonneg(p.m_noise_i), "TwinBeamParams: m_noise_i must be finite and >= 0");
    require(finite_nonneg(p.b_noise_i), "TwinBeamParams: b_noise_i must be finite and >= 0");
    require(!(p.b_pairs > 0.0 && p.m_pairs == 0.0),
            "TwinBeamParams: m_pairs must be > 0 when b_pairs > 0");
    return p;
}

const DetectorModel& validate(const DetectorModel& d) {
    require(std::isfinite(d.efficiency) && d.efficiency > 0.0 && d.efficiency < 1.0,
            "DetectorModel: efficiency must lie in the open interval (0, 1)");
    require(d.pixels >= 1, "DetectorModel: pixels must be >= 1");
    require(std::isfinite(d.dark_rate) && d.dark_rate >= 0.0 && d.dark_rate < 1.0,
            "DetectorModel: dark_rate must lie in [0, 1)");
    return d;
}

const Histogram2D& validate(const Histogram2D& h) {
    require(h.counts.size() > 0, "Histogram2D: histogram is empty");
    require(std::isfinite(h.total_frames) && h.total_frames > 0.0,
            "Histogram2D: total_frames must be positive");
    for (Eigen::Index c = 0; c < h.counts.cols(); ++c) {
        for (Eigen::Index r = 0; r < h.counts.rows(); ++r) {
            const double v = h.counts(r, c);
            if (!finite_nonneg(v)) {
                std::ostringstream os;
                os << "Histogram2D: cell (" << r << ", " << c << ") is negative or not finite";
                throw ValidationError(os.str());
            }
        }
    }
    const double sum = h.counts.sum();
    require(std::abs(sum - h.total_frames) <= 1e-9 * h.total_frames,
            "Histogram2D: cell sum does not equal total_frames");
    return h;
}

const PhotocountMoments& validate(const PhotocountMoments& m) {
    require(std::isfinite(m.mean_s) && std::isfinite(m.mean_i) && std::isfinite(m.mean_sq_s) &&
                std::isfinite(m.mean_sq_i) && std::isfinite(m.cross),
            "PhotocountMoments: moments must be finite");
    require(m.mean_s >= 0.0 && m.mean_i >= 0.0, "PhotocountMoments: means must be >= 0");
    // Round-off in a weighted sum can put mean_sq a few ulps below mean^2.
    const double tol_s = 1e-12 * std::max(1.0, m.mean_sq_s);
    const double tol_i = 1e-12 * std::max(1.0, m.mean_sq_i);
    require(m.mean_sq_s - m.mean_s * m.mean_s >= -tol_s,
            "PhotocountMoments: signal variance is negative");
    require(m.mean_sq_i - m.mean_i * m.mean_i >= -tol_i,
            "PhotocountMoments: idler variance is negative");
    return m;
}

const FieldMoments& validate(const FieldMoments& f) {
    require(finite_nonneg(f.mean_p) && finite_nonneg(f.mean_s) && finite_nonneg(f.mean_i),
            "FieldMoments: means must be finite and >= 0");
    require(finite_nonneg(f.var_p) && finite_nonneg(f.var_s) && finite_nonneg(f.var_i),
            "FieldMoments: variances must be finite and >= 0");
    return f;
}

const JointDistribution& validate(const JointDistribution& d) {
    require(d.probs.size() > 0, "JointDistribution: table is empty");
    require(d.probs.allFinite(), "JointDistribution: entries must be finite");
    require(d.probs.minCoeff() >= -1e-12, "JointDistribution: negative probability");
    require(std::abs(d.total() + d.truncation_mass - 1.0) <= 1e-6,
            "JointDistribution: total + truncation_mass must equal 1");
    return d;
}

const QdiiGrid& validate(const QdiiGrid& g) {
    auto ascending = [](const std::vector<double>& axis) {
        if (axis.empty() || !(axis.front() >= 0.0)) return false;
        for (std::size_t k = 1; k < axis.size(); ++k)
            if (!(axis[k] > axis[k - 1])) return false;
        return true;
    };
    require(ascending(g.w_s_axis), "QdiiGrid: w_s axis must be non-negative and strictly increasing");
    require(ascending(g.w_i_axis), "QdiiGrid: w_i axis must be non-negative and strictly increasing");
    require(g.values.rows() == static_cast<Eigen::Index>(g.w_s_axis.size()) &&
                g.values.cols() == static_cast<Eigen::Index>(g.w_i_axis.size()),
            "QdiiGrid: value table does not match the axes");
    require(g.ordering > -1.0 && g.ordering <= 1.0, "QdiiGrid: ordering must lie in (-1, 1]");
    return g;
}

}  // namespace twinbeam
