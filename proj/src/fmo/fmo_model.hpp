#pragma once

#include <optional>

#include "fmo/detect.hpp"

namespace fmo {

// Running FMO intrinsics plus the per-sequence exposure fraction.
struct FmoModel {
    Rgb mu;
    double r = 0.0;
    std::optional<double> epsilon;   // set once estimable, see ExposureEstimator
    int n_obs = 0;

    double epsilon_or(double fallback) const { return epsilon ? *epsilon : fallback; }
};

// Exponential forgetting update: new = (1-lambda) old + lambda detected.
FmoModel update_model(const FmoModel& m, const Detection& det, double lambda);

// Exposure fraction from two detections in consecutive frames:
// |P_{t-1}| divided by the distance between matched trajectory starts.
// The paths are oriented by the motion direction (second centroid minus
// first); "start" is the trailing endpoint. Returns nullopt when the
// geometry is degenerate (gap shorter than the path, which would imply a
// fraction above 1).
std::optional<double> estimate_exposure_fraction(const Detection& d_prev, const Detection& d_cur);

// The timing identity: exposure fraction = exposure time x frame rate.
double exposure_fraction_from_timing(double fps, double exposure_seconds);

// Running mean of exposure-fraction observations, frozen after 20.
class ExposureEstimator {
public:
    void add(double eps);
    std::optional<double> value() const;
    int count() const { return count_; }

private:
    static constexpr int kFreezeAfter = 20;
    double sum_ = 0.0;
    int count_ = 0;
};

}  // namespace fmo
