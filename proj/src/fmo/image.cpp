#include "fmo/image.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <unordered_set>

namespace fmo {

Frame::Frame(int width, int height, Rgb fill) : w_(width), h_(height) {
    px_.resize(static_cast<size_t>(width) * height * 3);
    for (int y = 0; y < h_; ++y)
        for (int x = 0; x < w_; ++x) set(x, y, fill);
}

Rgb Frame::sample_bilinear(double x, double y) const {
    x = std::clamp(x, 0.0, double(w_ - 1));
    y = std::clamp(y, 0.0, double(h_ - 1));
    int x0 = std::min(int(std::floor(x)), w_ - 2 >= 0 ? w_ - 2 : 0);
    int y0 = std::min(int(std::floor(y)), h_ - 2 >= 0 ? h_ - 2 : 0);
    if (w_ == 1) x0 = 0;
    if (h_ == 1) y0 = 0;
    double fx = x - x0, fy = y - y0;
    int x1 = std::min(x0 + 1, w_ - 1), y1 = std::min(y0 + 1, h_ - 1);
    Rgb c00 = at(x0, y0), c10 = at(x1, y0), c01 = at(x0, y1), c11 = at(x1, y1);
    return c00 * ((1 - fx) * (1 - fy)) + c10 * (fx * (1 - fy)) + c01 * ((1 - fx) * fy) +
           c11 * (fx * fy);
}

double DistanceMap::max_value() const {
    double m = 0.0;
    for (double v : d.data()) m = std::max(m, v);
    return m;
}

Vec2 PixelPath::midpoint() const {
    // Point at half the arc length.
    if (pixels.size() == 1) return front();
    double target = length / 2.0, acc = 0.0;
    for (size_t i = 1; i < pixels.size(); ++i) {
        double step = (pixels[i].x != pixels[i - 1].x && pixels[i].y != pixels[i - 1].y)
                          ? std::numbers::sqrt2
                          : 1.0;
        if (acc + step >= target) {
            double t = (target - acc) / step;
            Vec2 a{double(pixels[i - 1].x), double(pixels[i - 1].y)};
            Vec2 b{double(pixels[i].x), double(pixels[i].y)};
            return a + (b - a) * t;
        }
        acc += step;
    }
    return back();
}

Vec2 PixelPath::centroid() const {
    Vec2 c;
    for (const Pixel& p : pixels) c += {double(p.x), double(p.y)};
    return c * (1.0 / double(pixels.size()));
}

// --- basic ops ---------------------------------------------------------------

GrayImage abs_diff(const Frame& a, const Frame& b) {
    if (!a.same_size(b)) throw std::invalid_argument("abs_diff: dimension mismatch");
    GrayImage out(a.width(), a.height());
    const auto& pa = a.data();
    const auto& pb = b.data();
    auto& po = out.data();
    for (size_t i = 0, n = po.size(); i < n; ++i) {
        const double* ca = &pa[i * 3];
        const double* cb = &pb[i * 3];
        double m = std::abs(ca[0] - cb[0]);
        m = std::max(m, std::abs(ca[1] - cb[1]));
        m = std::max(m, std::abs(ca[2] - cb[2]));
        po[i] = m;
    }
    return out;
}

BinaryImage binarize(const GrayImage& g, double thresh) {
    if (thresh <= 0.0) throw std::invalid_argument("binarize: thresh must be positive");
    BinaryImage out(g.width(), g.height());
    for (size_t i = 0; i < g.data().size(); ++i) out.data()[i] = g.data()[i] > thresh ? 1 : 0;
    return out;
}

BinaryImage combine_delta(const BinaryImage& dp, const BinaryImage& dm, const BinaryImage& d0) {
    if (!dp.same_size(dm) || !dp.same_size(d0))
        throw std::invalid_argument("combine_delta: dimension mismatch");
    BinaryImage out(dp.width(), dp.height());
    for (size_t i = 0; i < out.data().size(); ++i)
        out.data()[i] = (dp.data()[i] && dm.data()[i] && !d0.data()[i]) ? 1 : 0;
    return out;
}

// --- connected components ----------------------------------------------------

std::vector<Component> connected_components(const BinaryImage& b) {
    const int w = b.width(), h = b.height();
    std::vector<int> labels(static_cast<size_t>(w) * h, 0);
    std::vector<Component> comps;
    std::vector<Pixel> stack;

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!b.at(x, y) || labels[size_t(y) * w + x]) continue;
            Component c;
            c.label = int(comps.size()) + 1;
            c.bbox = {x, y, x + 1, y + 1};
            stack.push_back({x, y});
            labels[size_t(y) * w + x] = c.label;
            while (!stack.empty()) {
                Pixel p = stack.back();
                stack.pop_back();
                c.pixels.push_back(p);
                c.bbox.x0 = std::min(c.bbox.x0, p.x);
                c.bbox.y0 = std::min(c.bbox.y0, p.y);
                c.bbox.x1 = std::max(c.bbox.x1, p.x + 1);
                c.bbox.y1 = std::max(c.bbox.y1, p.y + 1);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (!dx && !dy) continue;
                        int nx = p.x + dx, ny = p.y + dy;
                        if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                        size_t ni = size_t(ny) * w + nx;
                        if (b.at(nx, ny) && !labels[ni]) {
                            labels[ni] = c.label;
                            stack.push_back({nx, ny});
                        }
                    }
                }
            }
            std::sort(c.pixels.begin(), c.pixels.end(),
                      [](Pixel a, Pixel q) { return a.y != q.y ? a.y < q.y : a.x < q.x; });
            comps.push_back(std::move(c));
        }
    }
    return comps;
}

// --- distance transform ------------------------------------------------------

namespace {

// 1D squared-distance transform (Felzenszwalb & Huttenlocher lower envelope).
void dt1d(const std::vector<double>& f, std::vector<double>& out, std::vector<int>& v,
          std::vector<double>& z) {
    const int n = int(f.size());
    int k = 0;
    v[0] = 0;
    z[0] = -std::numeric_limits<double>::infinity();
    z[1] = std::numeric_limits<double>::infinity();
    for (int q = 1; q < n; ++q) {
        double s;
        while (true) {
            s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * (q - v[k]));
            if (s <= z[k]) {
                --k;
            } else {
                break;
            }
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = std::numeric_limits<double>::infinity();
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        double dq = q - v[k];
        out[q] = dq * dq + f[v[k]];
    }
}

}  // namespace

DistanceMap distance_transform(const Component& c) {
    if (c.pixels.empty()) throw std::invalid_argument("distance_transform: empty component");
    DistanceMap dm;
    dm.rect = c.bbox.grown(1);
    const int w = dm.rect.width(), h = dm.rect.height();
    constexpr double kInf = 1e18;

    // Squared distance, background = 0, mask = inf.
    std::vector<double> g(static_cast<size_t>(w) * h, 0.0);
    for (const Pixel& p : c.pixels)
        g[size_t(p.y - dm.rect.y0) * w + (p.x - dm.rect.x0)] = kInf;

    const int n = std::max(w, h);
    std::vector<double> f(n), dcol(n), z(n + 1);
    std::vector<int> v(n);

    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) f[y] = g[size_t(y) * w + x];
        f.resize(h);
        dcol.resize(h);
        dt1d(f, dcol, v, z);
        for (int y = 0; y < h; ++y) g[size_t(y) * w + x] = dcol[y];
        f.resize(n);
        dcol.resize(n);
    }
    dm.d = GrayImage(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) f[x] = g[size_t(y) * w + x];
        f.resize(w);
        dcol.resize(w);
        dt1d(f, dcol, v, z);
        for (int x = 0; x < w; ++x) dm.d.at(x, y) = std::sqrt(dcol[x]);
        f.resize(n);
        dcol.resize(n);
    }
    return dm;
}

// --- thinning ----------------------------------------------------------------

namespace {

// Ring offsets in circular order: N, NE, E, SE, S, SW, W, NW.
constexpr int kRing[8][2] = {{0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}};

int neighbor_count(const BinaryImage& img, int x, int y) {
    int n = 0;
    for (auto& o : kRing) n += img.get(x + o[0], y + o[1]) ? 1 : 0;
    return n;
}

// Simple-point test for (8,4) connectivity: deleting the pixel keeps both the
// foreground 8-topology and background 4-topology unchanged locally.
bool is_simple(const BinaryImage& img, int x, int y) {
    bool fg[8];
    for (int i = 0; i < 8; ++i) fg[i] = img.get(x + kRing[i][0], y + kRing[i][1]) != 0;

    // Foreground neighbors must form exactly one 8-connected group in the
    // ring, connectivity evaluated between the cells themselves (two
    // orthogonal cells like N and E touch diagonally even when the corner
    // between them is background).
    auto ring_adjacent = [&](int i, int j) {
        int dx = kRing[i][0] - kRing[j][0], dy = kRing[i][1] - kRing[j][1];
        return std::max(std::abs(dx), std::abs(dy)) == 1;
    };
    int fg_groups = 0;
    {
        bool seen[8] = {};
        for (int i = 0; i < 8; ++i) {
            if (!fg[i] || seen[i]) continue;
            ++fg_groups;
            // Flood along the ring through adjacent cells.
            int stack[8], top = 0;
            stack[top++] = i;
            seen[i] = true;
            while (top) {
                int cur = stack[--top];
                for (int j = 0; j < 8; ++j) {
                    if (fg[j] && !seen[j] && ring_adjacent(cur, j)) {
                        seen[j] = true;
                        stack[top++] = j;
                    }
                }
            }
        }
    }
    if (fg_groups != 1) return false;

    // Background 4-neighbors must form one 4-connected group within the ring;
    // in particular at least one 4-neighbor is background.
    bool bg4[4];  // N, E, S, W = ring indices 0,2,4,6
    int bg4_count = 0;
    for (int i = 0; i < 4; ++i) {
        bg4[i] = !fg[i * 2];
        bg4_count += bg4[i];
    }
    if (bg4_count == 0) return false;
    // Two background 4-neighbors are in the same group iff the diagonal
    // between them is background as well.
    int groups = 0;
    bool seen4[4] = {};
    for (int i = 0; i < 4; ++i) {
        if (!bg4[i] || seen4[i]) continue;
        ++groups;
        int stack[4], top = 0;
        stack[top++] = i;
        seen4[i] = true;
        while (top) {
            int cur = stack[--top];
            for (int j = 0; j < 4; ++j) {
                if (!bg4[j] || seen4[j]) continue;
                int a = cur * 2, b = j * 2;
                int diag = -1;
                if ((a + 2) % 8 == b) diag = (a + 1) % 8;
                if ((b + 2) % 8 == a) diag = (b + 1) % 8;
                if (diag >= 0 && !fg[diag]) {
                    seen4[j] = true;
                    stack[top++] = j;
                }
            }
        }
    }
    return groups == 1;
}

}  // namespace

BinaryImage thin(const BinaryImage& mask) {
    BinaryImage img = mask;
    const int w = img.width(), h = img.height();
    if (w == 0 || h == 0) return img;

    Component all;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (img.at(x, y)) all.pixels.push_back({x, y});
    if (all.pixels.empty()) return img;
    all.bbox = {0, 0, w, h};
    DistanceMap dm = distance_transform(all);

    std::vector<Pixel> order = all.pixels;
    std::stable_sort(order.begin(), order.end(), [&](Pixel a, Pixel b) {
        return dm.at_global(a.x, a.y) < dm.at_global(b.x, b.y);
    });

    // A stroke endpoint is preserved only when it sits on the distance ridge:
    // exactly one neighbor, and no smaller distance value than it. Spurious
    // tails left behind by uneven erosion have distance values descending
    // toward the tip, so they are consumed instead of frozen.
    auto protected_endpoint = [&](int x, int y) {
        int n = 0;
        Pixel nb;
        for (auto& o : kRing) {
            if (img.get(x + o[0], y + o[1])) {
                nb = {x + o[0], y + o[1]};
                ++n;
            }
        }
        if (n != 1) return false;
        return dm.at_global(x, y) >= dm.at_global(nb.x, nb.y);
    };

    // Peel simple pixels in increasing distance-to-background order so that
    // erosion follows distance layers and the result stays on the medial
    // axis. Sequential deletion with re-checked simplicity is topology
    // preserving at every step, so components never split or vanish; the
    // fixpoint has no deletable pixel left, which also gives idempotence.
    bool changed = true;
    while (changed) {
        changed = false;
        for (const Pixel& p : order) {
            if (!img.at(p.x, p.y)) continue;
            if (!is_simple(img, p.x, p.y)) continue;
            if (protected_endpoint(p.x, p.y)) continue;
            img.at(p.x, p.y) = 0;
            changed = true;
        }
    }
    return img;
}

// --- path extraction ---------------------------------------------------------

std::optional<PixelPath> path_from_skeleton(const BinaryImage& s) {
    std::vector<Pixel> pts;
    for (int y = 0; y < s.height(); ++y)
        for (int x = 0; x < s.width(); ++x)
            if (s.at(x, y)) pts.push_back({x, y});
    if (pts.empty()) throw std::invalid_argument("path_from_skeleton: empty skeleton");

    PixelPath path;
    if (pts.size() == 1) {
        path.pixels = pts;
        path.length = 0.0;
        return path;
    }

    std::vector<Pixel> endpoints;
    for (const Pixel& p : pts) {
        int n = neighbor_count(s, p.x, p.y);
        if (n >= 3) return std::nullopt;  // branch point
        if (n == 0) return std::nullopt;  // isolated pixel alongside others => multiple components
        if (n == 1) endpoints.push_back(p);
    }
    if (endpoints.size() != 0 && endpoints.size() != 2) return std::nullopt;

    // Walk from an endpoint (or anywhere, for a closed loop).
    Pixel start = endpoints.empty() ? pts.front() : endpoints.front();
    BinaryImage visited(s.width(), s.height());
    Pixel cur = start;
    visited.at(cur.x, cur.y) = 1;
    path.pixels.push_back(cur);
    while (true) {
        bool advanced = false;
        for (auto& o : kRing) {
            int nx = cur.x + o[0], ny = cur.y + o[1];
            if (s.get(nx, ny) && !visited.get(nx, ny)) {
                double step = (o[0] != 0 && o[1] != 0) ? std::numbers::sqrt2 : 1.0;
                path.length += step;
                cur = {nx, ny};
                visited.at(nx, ny) = 1;
                path.pixels.push_back(cur);
                advanced = true;
                break;
            }
        }
        if (!advanced) break;
    }
    if (path.pixels.size() != pts.size()) return std::nullopt;  // multiple components
    return path;
}

// --- region IoU --------------------------------------------------------------

PolyRegion PolyRegion::from_polygon(std::vector<Vec2> vertices) {
    PolyRegion r;
    r.polygon = std::move(vertices);
    return r;
}

PolyRegion PolyRegion::from_mask(std::vector<Pixel> pixels) {
    PolyRegion r;
    r.mask = std::move(pixels);
    return r;
}

PolyRegion PolyRegion::from_rect(double x0, double y0, double x1, double y1) {
    return from_polygon({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}});
}

std::pair<Vec2, Vec2> PolyRegion::bounds() const {
    Vec2 lo{1e30, 1e30}, hi{-1e30, -1e30};
    if (!polygon.empty()) {
        for (const Vec2& v : polygon) {
            lo.x = std::min(lo.x, v.x);
            lo.y = std::min(lo.y, v.y);
            hi.x = std::max(hi.x, v.x);
            hi.y = std::max(hi.y, v.y);
        }
    } else {
        for (const Pixel& p : mask) {
            lo.x = std::min(lo.x, p.x - 0.5);
            lo.y = std::min(lo.y, p.y - 0.5);
            hi.x = std::max(hi.x, p.x + 0.5);
            hi.y = std::max(hi.y, p.y + 0.5);
        }
    }
    return {lo, hi};
}

bool PolyRegion::contains(Vec2 p) const {
    if (!polygon.empty()) {
        // Even-odd crossing test.
        bool inside = false;
        size_t n = polygon.size();
        for (size_t i = 0, j = n - 1; i < n; j = i++) {
            const Vec2& a = polygon[i];
            const Vec2& b = polygon[j];
            if ((a.y > p.y) != (b.y > p.y)) {
                double xint = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
                if (p.x < xint) inside = !inside;
            }
        }
        return inside;
    }
    int px = int(std::floor(p.x + 0.5)), py = int(std::floor(p.y + 0.5));
    for (const Pixel& m : mask)
        if (m.x == px && m.y == py) return true;
    return false;
}

double region_iou(const PolyRegion& a, const PolyRegion& b) {
    if (!a.valid() || !b.valid()) return 0.0;
    auto [alo, ahi] = a.bounds();
    auto [blo, bhi] = b.bounds();
    // Quick reject on disjoint bounds.
    if (ahi.x < blo.x || bhi.x < alo.x || ahi.y < blo.y || bhi.y < alo.y) return 0.0;

    Vec2 lo{std::min(alo.x, blo.x), std::min(alo.y, blo.y)};
    Vec2 hi{std::max(ahi.x, bhi.x), std::max(ahi.y, bhi.y)};

    double min_side = std::min(std::min(ahi.x - alo.x, ahi.y - alo.y),
                               std::min(bhi.x - blo.x, bhi.y - blo.y));
    int ss = 1;
    if (min_side < 16.0) ss = std::clamp(int(std::ceil(8.0 / std::max(min_side, 0.5))), 2, 16);

    // Mask lookups go through a hash set when masks are present.
    auto key = [](int x, int y) { return (int64_t(x) << 32) ^ uint32_t(y); };
    std::unordered_set<int64_t> aset, bset;
    for (const Pixel& p : a.mask) aset.insert(key(p.x, p.y));
    for (const Pixel& p : b.mask) bset.insert(key(p.x, p.y));
    auto inside = [&](const PolyRegion& r, const std::unordered_set<int64_t>& set, Vec2 p) {
        if (!r.polygon.empty()) return r.contains(p);
        return set.count(key(int(std::floor(p.x + 0.5)), int(std::floor(p.y + 0.5)))) > 0;
    };

    int x0 = int(std::floor(lo.x + 0.5)), x1 = int(std::floor(hi.x + 0.5));
    int y0 = int(std::floor(lo.y + 0.5)), y1 = int(std::floor(hi.y + 0.5));
    long long inter = 0, uni = 0;
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            for (int sy = 0; sy < ss; ++sy) {
                for (int sx = 0; sx < ss; ++sx) {
                    Vec2 p{x - 0.5 + (sx + 0.5) / ss, y - 0.5 + (sy + 0.5) / ss};
                    bool ia = inside(a, aset, p);
                    bool ib = inside(b, bset, p);
                    inter += (ia && ib);
                    uni += (ia || ib);
                }
            }
        }
    }
    return uni > 0 ? double(inter) / double(uni) : 0.0;
}

}  // namespace fmo
