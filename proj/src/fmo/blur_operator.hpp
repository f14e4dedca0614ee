#pragma once

#include <optional>
#include <vector>

#include "fmo/image.hpp"
#include "fmo/track.hpp"

namespace fmo {

// Flat object appearance: square RGB raster with a disc support of radius r.
// Values outside the support are zero by construction.
struct FlatAppearance {
    double r = 0.0;
    int side = 0;               // 2*ceil(r)+1
    int center = 0;             // ceil(r)
    std::vector<double> rgb;    // side*side*3, row-major interleaved

    static FlatAppearance homogeneous(double r, Rgb color);
    Rgb at(int x, int y) const {
        const double* p = &rgb[(size_t(y) * side + x) * 3];
        return {p[0], p[1], p[2]};
    }
    void set(int x, int y, Rgb c) {
        double* p = &rgb[(size_t(y) * side + x) * 3];
        p[0] = c.r;
        p[1] = c.g;
        p[2] = c.b;
    }
    bool in_support(int x, int y) const {
        double dx = x - center, dy = y - center;
        return dx * dx + dy * dy <= r * r;
    }
};

// Lat-long sphere surface texture; n_lon = 2 n_lat.
struct SphereTexture {
    int n_lat = 0;
    int n_lon = 0;
    double r = 0.0;             // sphere radius, px
    std::vector<double> rgb;    // n_lat*n_lon*3

    static SphereTexture homogeneous(int n_lat, double r, Rgb color);
    Rgb at(int lat, int lon) const {
        const double* p = &rgb[(size_t(lat) * n_lon + lon) * 3];
        return {p[0], p[1], p[2]};
    }
    void set(int lat, int lon, Rgb c) {
        double* p = &rgb[(size_t(lat) * n_lon + lon) * 3];
        p[0] = c.r;
        p[1] = c.g;
        p[2] = c.b;
    }
};

struct RotationParams {
    Vec3 axis{0, 0, 1};   // unit vector, +z toward the viewer
    double omega = 0.0;   // radians per exposure, >= 0
};

// Discretized blur-and-projection operator: the object (flat raster or
// rotating sphere) is placed at K sub-step positions along the trajectory
// and averaged. Each sub-step contributes gather entries (window pixel <-
// appearance cell, weight); the adjoint scatters the same weights, so
// <Hx, y> == <x, H^T y> holds to machine precision.
class BlurOperator {
public:
    // Translation-only operator over the rasterized path (integer
    // placements, weight 1/|path|), per the path-convolution model.
    static BlurOperator translate_path(const PixelPath& path, double r, Rect window);
    // Translation-only operator over a sub-pixel segment; substeps = 0 picks
    // max(8, ceil(2 L)) (half-pixel stepping).
    static BlurOperator translate_segment(const LinearSegment& seg, double r, Rect window,
                                          int substeps = 0);
    // Rotating-sphere operator; substeps = 0 picks max(8, ceil(2 |P| / r)).
    // angle_offset is added to every sub-step angle (rotation phase at
    // exposure start).
    static BlurOperator rotate_path(const PixelPath& path, double r, Rect window,
                                    const RotationParams& rot, int n_lat,
                                    bool bilinear_texture = false, int substeps = 0,
                                    double angle_offset = 0.0);
    static BlurOperator rotate_segment(const LinearSegment& seg, double r, Rect window,
                                       const RotationParams& rot, int n_lat,
                                       bool bilinear_texture = false, int substeps = 0,
                                       double angle_offset = 0.0);

    bool spherical() const { return spherical_; }
    const Rect& window() const { return window_; }
    double radius() const { return r_; }
    int substeps() const { return substeps_; }
    int n_lat() const { return n_lat_; }
    int n_lon() const { return 2 * n_lat_; }
    int side() const { return side_; }
    int cells() const { return cells_; }          // number of appearance unknowns
    const GrayImage& alpha() const { return alpha_; }

    // Flat-mode cell layout: support pixels only.
    int cell_of(int x, int y) const { return cell_index_[size_t(y) * side_ + x]; }

    // Single-channel apply: y[window] = H x, x sized cells().
    void apply(const std::vector<double>& x, std::vector<double>& y) const;
    // g = H^T res, res sized window area.
    void apply_adjoint(const std::vector<double>& res, std::vector<double>& g) const;

    // Per-cell sample counts (how often each texel/pixel was observed).
    std::vector<int> visibility() const;

private:
    struct Entry {
        int pix;      // window pixel index
        int cell;     // appearance cell index
        double w;
    };

    static BlurOperator from_centers(const std::vector<Vec2>& centers, double r, Rect window,
                                     const std::optional<RotationParams>& rot, int n_lat,
                                     bool bilinear_texture, double omega_offset);
    void center_setup(double r);   // flat-mode cell layout

    std::vector<Entry> entries_;
    GrayImage alpha_;
    Rect window_;
    double r_ = 0.0;
    int substeps_ = 1;
    bool spherical_ = false;
    int n_lat_ = 0;
    int side_ = 0;
    int center_ = 0;
    int cells_ = 0;
    std::vector<int> cell_index_;   // flat mode: side*side -> cell or -1
};

struct ForwardImage {
    Rect window;
    Frame image;        // window-sized
    GrayImage alpha;
};

// [H F] plus the alpha matte for a flat appearance (no rotation).
ForwardImage apply_H_translate(const FlatAppearance& f, const BlurOperator& op);
// Rotating-sphere forward model.
ForwardImage apply_H_rotate(const SphereTexture& tex, const BlurOperator& op);

// Appearance-space gradient of the data term: per-channel H^T residual.
// residual(c) is window-sized; result has 3*cells() values, channel-major.
std::vector<double> adjoint_H(const std::vector<std::vector<double>>& residual,
                              const BlurOperator& op);

// Composites a forward render over a background frame per the formation
// model: out = (1 - alpha) bg + HF, inside the window.
Frame composite_over(const Frame& bg, const ForwardImage& fw);

}  // namespace fmo
