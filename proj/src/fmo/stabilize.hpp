#pragma once

#include <optional>
#include <random>
#include <vector>

#include "fmo/image.hpp"

namespace fmo {

// 2x3 affine transform mapping source points to destination points:
// (x,y) -> (a x + b y + tx, c x + d y + ty).
struct Affine2D {
    double a = 1, b = 0, tx = 0;
    double c = 0, d = 1, ty = 0;

    Vec2 apply(Vec2 p) const { return {a * p.x + b * p.y + tx, c * p.x + d * p.y + ty}; }
    double det() const { return a * d - b * c; }
    Affine2D inverse() const;
    // Composition: result maps p -> other(this(p)).
    Affine2D then(const Affine2D& other) const;
    static Affine2D identity() { return {}; }
    static Affine2D translation(double dx, double dy) { return {1, 0, dx, 0, 1, dy}; }
};

struct Correspondence {
    Vec2 a;        // point in frame A
    Vec2 b;        // point in frame B
    double score = 0.0;
};

struct StabilizeConfig {
    int max_corners = 400;
    int ransac_iters = 500;
    double ransac_tol = 2.0;      // px
    double match_radius = 40.0;   // px search radius for correspondences
    bool enabled = true;
};

// Harris corners sorted by response, at least 8 px apart, at most max_n.
std::vector<Vec2> detect_corners(const Frame& f, int max_n);

// Patch NCC matching of pa against pb candidates within `radius`; 11x11
// patches, correlation >= 0.8, one-to-one by mutual-best filtering.
std::vector<Correspondence> match_features(const Frame& a, const std::vector<Vec2>& pa,
                                           const Frame& b, const std::vector<Vec2>& pb,
                                           double radius);

struct RansacResult {
    Affine2D model;               // maps A-points to B-points
    std::vector<int> inliers;     // indices into the correspondence list
};

// RANSAC over minimal 3-point samples followed by a least-squares refit on
// the inlier set. Returns nullopt when degenerate (fewer than 3
// correspondences, collinear sample exhaustion, or fewer than 3 inliers).
std::optional<RansacResult> ransac_affine(const std::vector<Correspondence>& cs, int iters,
                                          double tol, std::mt19937_64& rng);

struct WarpResult {
    Frame frame;
    BinaryImage valid;   // false where the source fell out of bounds
};

// Inverse-mapped bilinear resampling of f under t; out-of-bounds pixels are
// zero-filled and flagged in the validity mask.
WarpResult warp(const Frame& f, const Affine2D& t);

// Registers `moving` onto `reference` (corners + NCC matches + RANSAC).
// Falls back to the identity transform when estimation is degenerate.
Affine2D register_frames(const Frame& reference, const Frame& moving,
                         const StabilizeConfig& cfg, std::mt19937_64& rng);

}  // namespace fmo
