#pragma once

#include <optional>

#include "fmo/detect.hpp"
#include "fmo/fmo_model.hpp"

namespace fmo {

struct RedetectConfig {
    double window_factor = 4.0;   // window side = factor * (1/eps) * |P_{t-1}|
    double color_thresh = 0.3;    // Euclidean RGB distance to the model color
    double radius_thresh = 0.4;   // relative radius difference
};

// Window-restricted re-detection around the previous localization. Tolerates
// an object fragmented into several components of the differential image:
// components matching the model in color and radius that lie on one line are
// merged into a single detection bridging the gaps. Returns the best
// candidate (largest total area) or nothing.
std::optional<Detection> redetect(const Frame& prev, const Frame& cur, const Frame& next,
                                  const Detection& prev_det, const FmoModel& model,
                                  const RedetectConfig& cfg, const DetectorConfig& dcfg,
                                  const BinaryImage* valid = nullptr);

// 8-connected line rasterization between two pixels (both endpoints included).
PixelPath rasterize_line(Pixel a, Pixel b);

}  // namespace fmo
