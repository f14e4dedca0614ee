#pragma once

#include "fmo/fmo_model.hpp"
#include "fmo/image.hpp"

namespace fmo {

// Sub-pixel linear trajectory: start, orientation, length.
struct LinearSegment {
    Vec2 start;
    double beta = 0.0;   // radians, normalized to (-pi, pi]
    double length = 0.0; // px

    Vec2 dir() const { return {std::cos(beta), std::sin(beta)}; }
    Vec2 end() const { return start + dir() * length; }
    static LinearSegment from_endpoints(Vec2 s, Vec2 e);
};

// Per-pixel alpha over a working window.
struct AlphaImage {
    Rect window;
    GrayImage a;   // window-sized, values in [0,1]

    double at_global(int x, int y) const {
        return window.contains(x, y) ? a.at(x - window.x0, y - window.y0) : 0.0;
    }
};

struct TrackerConfig {
    double orientation_range_deg = 15.0;
    double orientation_step_deg = 1.0;
    double start_radius_factor = 0.5;   // of |P_{t-1}|
    double start_step = 1.0;            // px
    double length_range_factor = 0.5;   // |P_{t-1}| * (1 +- this)
    double length_step = 2.0;           // px
    double loss_threshold = 0.05;       // acceptance bound on the final loss
};

// Closed-form alpha of a disc swept along a segment:
// A(x) = min(1, (2/L) sqrt(max(r^2 - D^2(x, seg), 0))).
// Throws std::invalid_argument for zero-length segments (callers use
// disc_alpha instead).
AlphaImage alpha_matte_linear(const LinearSegment& seg, double r, const Rect& window);

// Hard disc indicator, the zero-length limit of the matte.
AlphaImage disc_alpha(Vec2 center, double r, const Rect& window);

// Composites mu over bg inside the window: (1-A) B + mu A.
Frame synthesize(const Frame& bg, const AlphaImage& alpha, Rgb mu);

// Per-channel RMS between the synthesized candidate frame and the observed
// one, over the segment bbox dilated by 2r and clipped to the frame.
double loss(const Frame& cur, const Frame& bg, const LinearSegment& seg, const FmoModel& model);

// Alpha-weighted residual RMS of a candidate: how well the painted streak
// itself matches the frame. Unlike the window-normalized loss this does not
// dilute with candidate length, so it separates real streaks from phantoms
// painted over background and is the quantity the acceptance threshold
// applies to.
double streak_rms(const Frame& cur, const Frame& bg, const LinearSegment& seg,
                  const FmoModel& model);

struct TrackResult {
    LinearSegment segment;
    double loss = 0.0;        // window-normalized objective that was minimized
    double streak_rms = 0.0;  // alpha-weighted residual at the returned segment
    bool accepted = false;    // streak_rms <= cfg.loss_threshold
};

// Three-stage coordinate descent (orientation, start, length) around the
// linear extrapolation of the previous segment. Deterministic grid search;
// each stage keeps the incumbent among its candidates, so the loss never
// increases across stages.
TrackResult track_step(const Frame& cur, const Frame& bg, const FmoModel& model,
                       const LinearSegment& prev_seg, const TrackerConfig& cfg);

}  // namespace fmo
