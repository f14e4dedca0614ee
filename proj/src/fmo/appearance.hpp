#pragma once

#include <optional>
#include <vector>

#include "fmo/blur_operator.hpp"

namespace fmo {

struct DeblurConfig {
    double alpha = 0.01;          // TV weight
    int irls_iters = 10;
    double irls_delta = 1e-4;
    int cg_iters = 50;
    double cg_tol = 1e-6;
    double axis_spacing_deg = 15.0;
    int omega_steps = 16;         // omega grid: 0..pi inclusive
    int search_irls_iters = 3;    // reduced solver budget inside the grid search
    int search_cg_iters = 15;
    bool bilinear_texture = false;
    int sphere_n_lat = 0;         // 0 = auto: max(16, 2r)
};

int sphere_n_lat_for(double r, const DeblurConfig& cfg);

struct AppearanceResult {
    bool spherical = false;
    FlatAppearance flat;          // valid when !spherical
    SphereTexture sphere;         // valid when spherical
    double objective = 0.0;       // data L1 + alpha * TV at the solution
    std::vector<double> objective_history;   // delta-smoothed, per IRLS iteration
    GrayImage visibility;         // per-cell sample counts (sphere: n_lon x n_lat)
};

// Solves for the object appearance given one frame, a background estimate and
// the blur operator: L1 data term plus TV regularizer, by iteratively
// re-weighted least squares with warm-started conjugate gradients, the
// iterate clamped to [0,1]. Throws std::runtime_error on divergence
// (non-finite iterates).
AppearanceResult estimate_appearance(const Frame& frame, const Frame& background,
                                     const BlurOperator& op, const DeblurConfig& cfg);

struct RotationSearchResult {
    RotationParams params;
    SphereTexture texture;
    double objective = 0.0;            // from the final full-budget solve
    std::vector<double> grid_objectives;   // one per evaluated grid cell
    GrayImage visibility;
};

// Hemisphere axis directions at the given angular spacing (quasi-uniform
// rings; +z is the view axis).
std::vector<Vec3> axis_grid(double spacing_deg);

// Exhaustive search over (axis, omega): builds the rotating-sphere operator
// per cell with a reduced solver budget, keeps the objective minimizer, then
// re-solves it at full budget.
RotationSearchResult search_rotation(const Frame& frame, const Frame& background,
                                     const PixelPath& path, double r, const DeblurConfig& cfg);

// Window for appearance estimation: path bbox dilated by 2r, clipped.
Rect deblur_window(const PixelPath& path, double r, int frame_w, int frame_h);

}  // namespace fmo
