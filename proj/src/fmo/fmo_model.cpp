#include "fmo/fmo_model.hpp"

#include <cmath>
#include <stdexcept>

namespace fmo {

FmoModel update_model(const FmoModel& m, const Detection& det, double lambda) {
    if (lambda <= 0.0 || lambda > 1.0)
        throw std::invalid_argument("update_model: lambda must be in (0,1]");
    FmoModel out = m;
    if (m.n_obs == 0) {
        out.mu = det.mu;
        out.r = det.r;
    } else {
        out.mu = m.mu * (1.0 - lambda) + det.mu * lambda;
        out.r = (1.0 - lambda) * m.r + lambda * det.r;
    }
    out.n_obs = m.n_obs + 1;
    return out;
}

std::optional<double> estimate_exposure_fraction(const Detection& d_prev, const Detection& d_cur) {
    if (d_prev.path.length <= 0.0 || d_cur.path.length <= 0.0) return std::nullopt;

    Vec2 dir = d_cur.path.centroid() - d_prev.path.centroid();
    if (norm(dir) <= 0.0) return std::nullopt;

    auto trailing = [&](const PixelPath& p) {
        return dot(p.front(), dir) <= dot(p.back(), dir) ? p.front() : p.back();
    };
    double gap = distance(trailing(d_prev.path), trailing(d_cur.path));
    if (gap < d_prev.path.length) return std::nullopt;  // would imply fraction > 1
    return std::min(1.0, d_prev.path.length / gap);
}

double exposure_fraction_from_timing(double fps, double exposure_seconds) {
    if (fps <= 0.0 || exposure_seconds <= 0.0)
        throw std::invalid_argument("exposure_fraction_from_timing: values must be positive");
    return std::min(1.0, fps * exposure_seconds);
}

void ExposureEstimator::add(double eps) {
    if (count_ >= kFreezeAfter) return;
    sum_ += eps;
    ++count_;
}

std::optional<double> ExposureEstimator::value() const {
    if (count_ == 0) return std::nullopt;
    return sum_ / count_;
}

}  // namespace fmo
