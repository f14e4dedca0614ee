#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fmo/geometry.hpp"

namespace fmo {

// Single-channel raster.
template <typename T>
class Plane {
public:
    Plane() = default;
    Plane(int width, int height, T fill = T{})
        : w_(width), h_(height), px_(static_cast<size_t>(width) * height, fill) {}

    int width() const { return w_; }
    int height() const { return h_; }
    bool empty() const { return px_.empty(); }
    bool same_size(const Plane& o) const { return w_ == o.w_ && h_ == o.h_; }

    T& at(int x, int y) { return px_[static_cast<size_t>(y) * w_ + x]; }
    const T& at(int x, int y) const { return px_[static_cast<size_t>(y) * w_ + x]; }

    // Out-of-bounds reads yield `outside`.
    T get(int x, int y, T outside = T{}) const {
        return (x >= 0 && x < w_ && y >= 0 && y < h_) ? at(x, y) : outside;
    }

    std::vector<T>& data() { return px_; }
    const std::vector<T>& data() const { return px_; }

    bool operator==(const Plane&) const = default;

private:
    int w_ = 0;
    int h_ = 0;
    std::vector<T> px_;
};

using GrayImage = Plane<double>;
using BinaryImage = Plane<std::uint8_t>;

// RGB raster, channel values in [0,1], interleaved storage.
class Frame {
public:
    Frame() = default;
    Frame(int width, int height, Rgb fill = {});

    int width() const { return w_; }
    int height() const { return h_; }
    bool empty() const { return px_.empty(); }
    bool same_size(const Frame& o) const { return w_ == o.w_ && h_ == o.h_; }

    Rgb at(int x, int y) const {
        const double* p = &px_[idx(x, y)];
        return {p[0], p[1], p[2]};
    }
    void set(int x, int y, Rgb c) {
        double* p = &px_[idx(x, y)];
        p[0] = c.r;
        p[1] = c.g;
        p[2] = c.b;
    }
    double channel(int x, int y, int c) const { return px_[idx(x, y) + c]; }
    double& channel(int x, int y, int c) { return px_[idx(x, y) + c]; }

    // Bilinear sample at sub-pixel position, clamped to image bounds.
    Rgb sample_bilinear(double x, double y) const;

    std::vector<double>& data() { return px_; }
    const std::vector<double>& data() const { return px_; }

    bool operator==(const Frame&) const = default;

private:
    size_t idx(int x, int y) const { return (static_cast<size_t>(y) * w_ + x) * 3; }

    int w_ = 0;
    int h_ = 0;
    std::vector<double> px_;
};

// 8-connected component of a binary image.
struct Component {
    int label = 0;                // dense from 1 in scan order
    std::vector<Pixel> pixels;    // sorted by (y,x)
    Rect bbox;                    // tight
    long long area() const { return static_cast<long long>(pixels.size()); }
};

// Exact Euclidean distance to the nearest background pixel center, computed
// over the component's bbox padded by 1. Zero outside the mask.
struct DistanceMap {
    Rect rect;     // padded bbox (may extend 1px beyond the frame)
    GrayImage d;   // rect.width() x rect.height()

    double at_global(int x, int y) const {
        if (!rect.contains(x, y)) return 0.0;
        return d.at(x - rect.x0, y - rect.y0);
    }
    double max_value() const;
};

// Ordered single-stroke pixel path. Arc length uses 1/sqrt(2) step costs.
struct PixelPath {
    std::vector<Pixel> pixels;
    double length = 0.0;

    Vec2 front() const { return {double(pixels.front().x), double(pixels.front().y)}; }
    Vec2 back() const { return {double(pixels.back().x), double(pixels.back().y)}; }
    Vec2 midpoint() const;
    Vec2 centroid() const;
};

// Region for IoU evaluation: either a simple polygon with sub-pixel vertices
// or a pixel mask (pixel (x,y) covers the unit square centered on it).
struct PolyRegion {
    std::vector<Vec2> polygon;   // used when non-empty
    std::vector<Pixel> mask;     // used otherwise

    static PolyRegion from_polygon(std::vector<Vec2> vertices);
    static PolyRegion from_mask(std::vector<Pixel> pixels);
    static PolyRegion from_rect(double x0, double y0, double x1, double y1);

    bool valid() const { return polygon.size() >= 3 || !mask.empty(); }
    // Continuous bounding box {min, max}.
    std::pair<Vec2, Vec2> bounds() const;
    bool contains(Vec2 p) const;
};

// --- raster primitives ------------------------------------------------------

// Per-pixel max over channels of |a-b|. Throws std::invalid_argument on
// dimension mismatch.
GrayImage abs_diff(const Frame& a, const Frame& b);

// Pixel true iff g(x) > thresh (strict).
BinaryImage binarize(const GrayImage& g, double thresh);

// dp AND dm AND NOT d0, pixelwise.
BinaryImage combine_delta(const BinaryImage& dp, const BinaryImage& dm, const BinaryImage& d0);

// 8-connectivity labeling; labels dense from 1 in raster-scan order of the
// first pixel of each component.
std::vector<Component> connected_components(const BinaryImage& b);

DistanceMap distance_transform(const Component& c);

// Topology-preserving thinning to a one-pixel-wide 8-connected skeleton.
// Never disconnects a component; idempotent.
BinaryImage thin(const BinaryImage& mask);

// Orders a skeleton into a single stroke. Returns nullopt (NotAStroke) when
// the skeleton branches or has multiple components. A single isolated pixel
// yields a length-0 path.
std::optional<PixelPath> path_from_skeleton(const BinaryImage& s);

// Intersection over union on a common rasterization. Degenerate regions give
// 0. Small regions are supersampled for sub-pixel accuracy.
double region_iou(const PolyRegion& a, const PolyRegion& b);

}  // namespace fmo
