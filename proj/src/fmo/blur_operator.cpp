#include "fmo/blur_operator.hpp"

#include <cmath>
#include <stdexcept>

namespace fmo {

FlatAppearance FlatAppearance::homogeneous(double r, Rgb color) {
    FlatAppearance f;
    f.r = r;
    f.center = int(std::ceil(r));
    f.side = 2 * f.center + 1;
    f.rgb.assign(size_t(f.side) * f.side * 3, 0.0);
    for (int y = 0; y < f.side; ++y)
        for (int x = 0; x < f.side; ++x)
            if (f.in_support(x, y)) f.set(x, y, color);
    return f;
}

SphereTexture SphereTexture::homogeneous(int n_lat, double r, Rgb color) {
    SphereTexture t;
    t.n_lat = n_lat;
    t.n_lon = 2 * n_lat;
    t.r = r;
    t.rgb.assign(size_t(t.n_lat) * t.n_lon * 3, 0.0);
    for (int i = 0; i < t.n_lat; ++i)
        for (int j = 0; j < t.n_lon; ++j) t.set(i, j, color);
    return t;
}

namespace {

std::vector<Vec2> path_centers(const PixelPath& path, int k) {
    // k positions at uniform arc-length fractions (k+1/2)/K through the
    // piecewise-linear polyline of pixel centers.
    std::vector<Vec2> centers;
    if (path.pixels.size() == 1 || path.length <= 0.0) {
        centers.assign(size_t(std::max(k, 1)),
                       {double(path.pixels.front().x), double(path.pixels.front().y)});
        return centers;
    }
    std::vector<double> cum{0.0};
    for (size_t i = 1; i < path.pixels.size(); ++i) {
        double step = (path.pixels[i].x != path.pixels[i - 1].x &&
                       path.pixels[i].y != path.pixels[i - 1].y)
                          ? std::sqrt(2.0)
                          : 1.0;
        cum.push_back(cum.back() + step);
    }
    size_t seg = 0;
    for (int s = 0; s < k; ++s) {
        double target = cum.back() * (s + 0.5) / k;
        while (seg + 1 < cum.size() - 1 && cum[seg + 1] < target) ++seg;
        double t = (target - cum[seg]) / (cum[seg + 1] - cum[seg]);
        Vec2 a{double(path.pixels[seg].x), double(path.pixels[seg].y)};
        Vec2 b{double(path.pixels[seg + 1].x), double(path.pixels[seg + 1].y)};
        centers.push_back(a + (b - a) * t);
    }
    return centers;
}

std::vector<Vec2> segment_centers(const LinearSegment& seg, int k) {
    std::vector<Vec2> centers;
    for (int s = 0; s < k; ++s) centers.push_back(seg.start + seg.dir() * (seg.length * (s + 0.5) / k));
    return centers;
}

}  // namespace

BlurOperator BlurOperator::from_centers(const std::vector<Vec2>& centers, double r, Rect window,
                                        const std::optional<RotationParams>& rot, int n_lat,
                                        bool bilinear_texture, double angle_offset) {
    if (r <= 0.0) throw std::invalid_argument("BlurOperator: radius must be positive");
    if (window.empty()) throw std::invalid_argument("BlurOperator: empty window");
    BlurOperator op;
    op.window_ = window;
    op.r_ = r;
    op.substeps_ = int(centers.size());
    op.alpha_ = GrayImage(window.width(), window.height());
    const double w = 1.0 / double(centers.size());
    const double r2 = r * r;

    if (!rot) {
        op.spherical_ = false;
        op.center_setup(r);
        const int side = op.side_;
        for (const Vec2& c : centers) {
            int wx0 = std::max(window.x0, int(std::floor(c.x - r - 1)));
            int wx1 = std::min(window.x1 - 1, int(std::ceil(c.x + r + 1)));
            int wy0 = std::max(window.y0, int(std::floor(c.y - r - 1)));
            int wy1 = std::min(window.y1 - 1, int(std::ceil(c.y + r + 1)));
            for (int y = wy0; y <= wy1; ++y) {
                for (int x = wx0; x <= wx1; ++x) {
                    // Appearance-raster coordinates of this window pixel.
                    double fx = x - c.x + op.center_;
                    double fy = y - c.y + op.center_;
                    int pix = (y - window.y0) * window.width() + (x - window.x0);
                    // Bilinear taps over the appearance raster; integer
                    // placements collapse to a single exact tap.
                    int x0 = int(std::floor(fx)), y0 = int(std::floor(fy));
                    double ax = fx - x0, ay = fy - y0;
                    const double taps[4] = {(1 - ax) * (1 - ay), ax * (1 - ay), (1 - ax) * ay,
                                            ax * ay};
                    const int offs[4][2] = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
                    for (int t = 0; t < 4; ++t) {
                        if (taps[t] <= 1e-12) continue;
                        int tx = x0 + offs[t][0], ty = y0 + offs[t][1];
                        if (tx < 0 || tx >= side || ty < 0 || ty >= side) continue;
                        int cell = op.cell_index_[size_t(ty) * side + tx];
                        if (cell < 0) continue;
                        op.entries_.push_back({pix, cell, w * taps[t]});
                        op.alpha_.data()[pix] += w * taps[t];
                    }
                }
            }
        }
    } else {
        op.spherical_ = true;
        op.n_lat_ = n_lat;
        op.cells_ = n_lat * 2 * n_lat;
        Vec3 axis = normalized(rot->axis);
        const int n_lon = 2 * n_lat;
        for (size_t k = 0; k < centers.size(); ++k) {
            double angle = angle_offset + rot->omega * (double(k) + 0.5) / double(centers.size());
            Mat3 r_inv = rotation_about_axis(axis, angle).transposed();
            const Vec2& c = centers[k];
            int x0 = std::max(window.x0, int(std::floor(c.x - r)));
            int x1 = std::min(window.x1 - 1, int(std::ceil(c.x + r)));
            int y0 = std::max(window.y0, int(std::floor(c.y - r)));
            int y1 = std::min(window.y1 - 1, int(std::ceil(c.y + r)));
            for (int y = y0; y <= y1; ++y) {
                for (int x = x0; x <= x1; ++x) {
                    double ux = x - c.x, uy = y - c.y;
                    double rho2 = ux * ux + uy * uy;
                    if (rho2 > r2) continue;
                    int pix = (y - window.y0) * window.width() + (x - window.x0);
                    op.alpha_.data()[pix] += w;
                    // Visible-hemisphere point, rotated back into material
                    // coordinates.
                    Vec3 p{ux / r, uy / r, std::sqrt(std::max(0.0, 1.0 - rho2 / r2))};
                    Vec3 s = r_inv.apply(p);
                    double lat = std::asin(std::clamp(s.y, -1.0, 1.0));
                    double lon = std::atan2(s.x, s.z);
                    if (!bilinear_texture) {
                        int i = std::clamp(int((lat + M_PI_2) / M_PI * n_lat), 0, n_lat - 1);
                        int j = ((int(std::floor((lon + M_PI) / (2 * M_PI) * n_lon)) % n_lon) +
                                 n_lon) % n_lon;
                        op.entries_.push_back({pix, i * n_lon + j, w});
                    } else {
                        double u = (lat + M_PI_2) / M_PI * n_lat - 0.5;
                        double v = (lon + M_PI) / (2 * M_PI) * n_lon - 0.5;
                        int i0 = int(std::floor(u)), j0 = int(std::floor(v));
                        double au = u - i0, av = v - j0;
                        const double taps[4] = {(1 - au) * (1 - av), au * (1 - av), (1 - au) * av,
                                                au * av};
                        const int offs[4][2] = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
                        for (int t = 0; t < 4; ++t) {
                            if (taps[t] <= 1e-12) continue;
                            int ii = std::clamp(i0 + offs[t][0], 0, n_lat - 1);
                            int jj = (((j0 + offs[t][1]) % n_lon) + n_lon) % n_lon;
                            op.entries_.push_back({pix, ii * n_lon + jj, w * taps[t]});
                        }
                    }
                }
            }
        }
    }
    return op;
}

void BlurOperator::center_setup(double r) {
    center_ = int(std::ceil(r));
    side_ = 2 * center_ + 1;
    cell_index_.assign(size_t(side_) * side_, -1);
    cells_ = 0;
    const double r2 = r * r;
    for (int y = 0; y < side_; ++y) {
        for (int x = 0; x < side_; ++x) {
            double dx = x - center_, dy = y - center_;
            if (dx * dx + dy * dy <= r2) cell_index_[size_t(y) * side_ + x] = cells_++;
        }
    }
}

BlurOperator BlurOperator::translate_path(const PixelPath& path, double r, Rect window) {
    if (path.pixels.empty()) throw std::invalid_argument("BlurOperator: empty path");
    std::vector<Vec2> centers;
    centers.reserve(path.pixels.size());
    for (const Pixel& p : path.pixels) centers.push_back({double(p.x), double(p.y)});
    return from_centers(centers, r, window, std::nullopt, 0, false, 0.0);
}

BlurOperator BlurOperator::translate_segment(const LinearSegment& seg, double r, Rect window,
                                             int substeps) {
    int k = substeps > 0 ? substeps : std::max(8, int(std::ceil(2.0 * seg.length)));
    return from_centers(segment_centers(seg, k), r, window, std::nullopt, 0, false, 0.0);
}

BlurOperator BlurOperator::rotate_path(const PixelPath& path, double r, Rect window,
                                       const RotationParams& rot, int n_lat,
                                       bool bilinear_texture, int substeps, double angle_offset) {
    if (path.pixels.empty()) throw std::invalid_argument("BlurOperator: empty path");
    int k = substeps > 0 ? substeps : std::max(8, int(std::ceil(2.0 * path.length / r)));
    return from_centers(path_centers(path, k), r, window, rot, n_lat, bilinear_texture,
                        angle_offset);
}

BlurOperator BlurOperator::rotate_segment(const LinearSegment& seg, double r, Rect window,
                                          const RotationParams& rot, int n_lat,
                                          bool bilinear_texture, int substeps,
                                          double angle_offset) {
    int k = substeps > 0 ? substeps : std::max(8, int(std::ceil(2.0 * seg.length / r)));
    return from_centers(segment_centers(seg, std::max(k, 1)), r, window, rot, n_lat,
                        bilinear_texture, angle_offset);
}

void BlurOperator::apply(const std::vector<double>& x, std::vector<double>& y) const {
    y.assign(size_t(window_.width()) * window_.height(), 0.0);
    for (const Entry& e : entries_) y[e.pix] += e.w * x[e.cell];
}

void BlurOperator::apply_adjoint(const std::vector<double>& res, std::vector<double>& g) const {
    g.assign(size_t(cells_), 0.0);
    for (const Entry& e : entries_) g[e.cell] += e.w * res[e.pix];
}

std::vector<int> BlurOperator::visibility() const {
    std::vector<int> v(size_t(cells_), 0);
    for (const Entry& e : entries_)
        if (e.w > 0) ++v[e.cell];
    return v;
}

namespace {

std::vector<double> channel_of_flat(const FlatAppearance& f, const BlurOperator& op, int c) {
    std::vector<double> x(size_t(op.cells()), 0.0);
    for (int y = 0; y < f.side; ++y)
        for (int xx = 0; xx < f.side; ++xx) {
            int cell = op.cell_of(xx, y);
            if (cell >= 0) x[cell] = f.rgb[(size_t(y) * f.side + xx) * 3 + c];
        }
    return x;
}

}  // namespace

ForwardImage apply_H_translate(const FlatAppearance& f, const BlurOperator& op) {
    if (op.spherical()) throw std::invalid_argument("apply_H_translate: rotating operator");
    if (f.side != op.side()) throw std::invalid_argument("apply_H_translate: raster size mismatch");
    ForwardImage out{op.window(), Frame(op.window().width(), op.window().height()), op.alpha()};
    std::vector<double> y;
    for (int c = 0; c < 3; ++c) {
        std::vector<double> x = channel_of_flat(f, op, c);
        op.apply(x, y);
        for (int i = 0; i < int(y.size()); ++i) out.image.data()[size_t(i) * 3 + c] = y[i];
    }
    return out;
}

ForwardImage apply_H_rotate(const SphereTexture& tex, const BlurOperator& op) {
    if (!op.spherical()) throw std::invalid_argument("apply_H_rotate: translation operator");
    if (tex.n_lat != op.n_lat())
        throw std::invalid_argument("apply_H_rotate: texture resolution mismatch");
    ForwardImage out{op.window(), Frame(op.window().width(), op.window().height()), op.alpha()};
    std::vector<double> x(size_t(op.cells())), y;
    for (int c = 0; c < 3; ++c) {
        for (int i = 0; i < op.cells(); ++i) x[i] = tex.rgb[size_t(i) * 3 + c];
        op.apply(x, y);
        for (int i = 0; i < int(y.size()); ++i) out.image.data()[size_t(i) * 3 + c] = y[i];
    }
    return out;
}

std::vector<double> adjoint_H(const std::vector<std::vector<double>>& residual,
                              const BlurOperator& op) {
    if (residual.size() != 3) throw std::invalid_argument("adjoint_H: need 3 channels");
    std::vector<double> out(size_t(op.cells()) * 3, 0.0);
    std::vector<double> g;
    for (int c = 0; c < 3; ++c) {
        op.apply_adjoint(residual[c], g);
        for (int i = 0; i < op.cells(); ++i) out[size_t(c) * op.cells() + i] = g[i];
    }
    return out;
}

Frame composite_over(const Frame& bg, const ForwardImage& fw) {
    Frame out = bg;
    Rect w = fw.window.clipped({0, 0, bg.width(), bg.height()});
    for (int y = w.y0; y < w.y1; ++y) {
        for (int x = w.x0; x < w.x1; ++x) {
            int lx = x - fw.window.x0, ly = y - fw.window.y0;
            double a = fw.alpha.at(lx, ly);
            Rgb hv = fw.image.at(lx, ly);
            Rgb b = bg.at(x, y);
            out.set(x, y, clamp01(b * (1.0 - a) + hv));
        }
    }
    return out;
}

}  // namespace fmo
