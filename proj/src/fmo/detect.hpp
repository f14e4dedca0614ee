#pragma once

#include <optional>
#include <vector>

#include "fmo/image.hpp"

namespace fmo {

struct DetectorConfig {
    double binarize_thresh = 0.08;   // on [0,1] intensity scale
    double psi = 0.7;                // stroke threshold on the distance map
    double gamma = 0.2;              // area tolerance
    double min_path_len_factor = 1.0;  // minimum |P| in units of r
};

enum class DetectionSource { detector, redetector, tracker };

const char* to_string(DetectionSource s);

// One localized fast-moving object in one frame.
struct Detection {
    PixelPath path;          // trajectory P_t
    double r = 0.0;          // radius estimate, px
    Rgb mu;                  // mean color along the path
    Component component;
    double area = 0.0;       // measured component area a
    double model_area = 0.0; // expected area 2r|P| + pi r^2
    DetectionSource source = DetectionSource::detector;
};

// Intermediate quantities of the motion-model check, exposed for testing and
// for the re-detector.
struct ModelCheck {
    bool accepted = false;
    bool stroke_ok = false;           // false when thinning yields a non-stroke
    double r = 0.0;
    std::optional<PixelPath> path;    // global coordinates
    double area = 0.0;
    double model_area = 0.0;
};

// Verifies the FMO motion model for one component of the combined
// differential image: r = max of the distance map, stroke from thinning
// {d > psi r}, then the path-length and area conditions.
ModelCheck check_model(const Component& c, const DistanceMap& dmap, const DetectorConfig& cfg);

// The generic detector: differential images of a stabilized triplet combined
// per the boolean rule, then per-component model checks. `valid` (optional)
// marks pixels where all three frames carry real data; differential content
// outside it is ignored.
std::vector<Detection> detect_fmo(const Frame& prev, const Frame& cur, const Frame& next,
                                  const DetectorConfig& cfg,
                                  const BinaryImage* valid = nullptr);

// The combined binary differential image (Eq. of the boolean rule), shared by
// detector and re-detector.
BinaryImage combined_delta(const Frame& prev, const Frame& cur, const Frame& next,
                           const DetectorConfig& cfg, const BinaryImage* valid = nullptr);

// Mean color of `f` over the path pixels.
Rgb mean_color_on_path(const Frame& f, const PixelPath& path);

}  // namespace fmo
