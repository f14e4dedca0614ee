#include "fmo/stabilize.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fmo {

Affine2D Affine2D::inverse() const {
    double dt = det();
    if (dt == 0.0) throw std::invalid_argument("Affine2D: singular matrix");
    double ia = d / dt, ib = -b / dt, ic = -c / dt, id = a / dt;
    return {ia, ib, -(ia * tx + ib * ty), ic, id, -(ic * tx + id * ty)};
}

Affine2D Affine2D::then(const Affine2D& o) const {
    return {o.a * a + o.b * c, o.a * b + o.b * d, o.a * tx + o.b * ty + o.tx,
            o.c * a + o.d * c, o.c * b + o.d * d, o.c * tx + o.d * ty + o.ty};
}

namespace {

GrayImage to_gray(const Frame& f) {
    GrayImage g(f.width(), f.height());
    for (int y = 0; y < f.height(); ++y) {
        for (int x = 0; x < f.width(); ++x) {
            Rgb c = f.at(x, y);
            g.at(x, y) = (c.r + c.g + c.b) / 3.0;
        }
    }
    return g;
}

}  // namespace

std::vector<Vec2> detect_corners(const Frame& f, int max_n) {
    if (f.width() < 16 || f.height() < 16)
        throw std::invalid_argument("detect_corners: frame must be at least 16x16");
    GrayImage g = to_gray(f);
    const int w = g.width(), h = g.height();

    // Structure tensor from central differences, box-accumulated over 5x5.
    GrayImage ixx(w, h), iyy(w, h), ixy(w, h);
    for (int y = 1; y < h - 1; ++y) {
        for (int x = 1; x < w - 1; ++x) {
            double gx = (g.at(x + 1, y) - g.at(x - 1, y)) * 0.5;
            double gy = (g.at(x, y + 1) - g.at(x, y - 1)) * 0.5;
            ixx.at(x, y) = gx * gx;
            iyy.at(x, y) = gy * gy;
            ixy.at(x, y) = gx * gy;
        }
    }
    GrayImage resp(w, h);
    double max_resp = 0.0;
    for (int y = 2; y < h - 2; ++y) {
        for (int x = 2; x < w - 2; ++x) {
            double sxx = 0, syy = 0, sxy = 0;
            for (int dy = -2; dy <= 2; ++dy) {
                for (int dx = -2; dx <= 2; ++dx) {
                    sxx += ixx.at(x + dx, y + dy);
                    syy += iyy.at(x + dx, y + dy);
                    sxy += ixy.at(x + dx, y + dy);
                }
            }
            double det = sxx * syy - sxy * sxy;
            double tr = sxx + syy;
            double r = det - 0.05 * tr * tr;
            resp.at(x, y) = r;
            max_resp = std::max(max_resp, r);
        }
    }
    if (max_resp <= 0.0) return {};

    // 3x3 non-maximum suppression, absolute floor relative to the strongest.
    const double floor_resp = std::max(1e-8, 0.005 * max_resp);
    std::vector<std::pair<double, Pixel>> cands;
    for (int y = 2; y < h - 2; ++y) {
        for (int x = 2; x < w - 2; ++x) {
            double r = resp.at(x, y);
            if (r < floor_resp) continue;
            bool peak = true;
            for (int dy = -1; dy <= 1 && peak; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (!dx && !dy) continue;
                    if (resp.get(x + dx, y + dy) > r) {
                        peak = false;
                        break;
                    }
                }
            if (peak) cands.push_back({r, {x, y}});
        }
    }
    std::sort(cands.begin(), cands.end(), [](const auto& l, const auto& r) {
        if (l.first != r.first) return l.first > r.first;
        return l.second.y != r.second.y ? l.second.y < r.second.y : l.second.x < r.second.x;
    });

    // Sub-pixel refinement: centroid of the near-peak plateau in a 5x5
    // neighborhood (saddle responses of symmetric junctions form flat
    // plateaus whose integer argmax is biased to one side).
    auto refine = [&](Pixel p) {
        double r0 = resp.at(p.x, p.y);
        double sx = 0, sy = 0, sw = 0;
        for (int dy = -2; dy <= 2; ++dy) {
            for (int dx = -2; dx <= 2; ++dx) {
                double r = resp.get(p.x + dx, p.y + dy);
                if (r >= 0.98 * r0) {
                    sx += p.x + dx;
                    sy += p.y + dy;
                    sw += 1.0;
                }
            }
        }
        return Vec2{sx / sw, sy / sw};
    };

    // Greedy selection with 8 px minimum separation.
    std::vector<Vec2> out;
    for (const auto& [r, p] : cands) {
        Vec2 rp = refine(p);
        bool ok = true;
        for (const Vec2& q : out) {
            double dx = q.x - rp.x, dy = q.y - rp.y;
            if (dx * dx + dy * dy < 64.0) {
                ok = false;
                break;
            }
        }
        if (ok) {
            out.push_back(rp);
            if (int(out.size()) >= max_n) break;
        }
    }
    return out;
}

namespace {

constexpr int kPatch = 5;  // 11x11 patches

// Extracts a zero-mean patch; returns false near the border or when flat.
bool extract_patch(const GrayImage& g, Vec2 p, std::vector<double>& out, double& norm_out) {
    int cx = int(std::lround(p.x)), cy = int(std::lround(p.y));
    if (cx < kPatch || cy < kPatch || cx >= g.width() - kPatch || cy >= g.height() - kPatch)
        return false;
    out.resize((2 * kPatch + 1) * (2 * kPatch + 1));
    double mean = 0.0;
    int i = 0;
    for (int dy = -kPatch; dy <= kPatch; ++dy)
        for (int dx = -kPatch; dx <= kPatch; ++dx) mean += out[i++] = g.at(cx + dx, cy + dy);
    mean /= double(out.size());
    double ss = 0.0;
    for (double& v : out) {
        v -= mean;
        ss += v * v;
    }
    norm_out = std::sqrt(ss);
    return norm_out > 1e-9;
}

}  // namespace

std::vector<Correspondence> match_features(const Frame& a, const std::vector<Vec2>& pa,
                                           const Frame& b, const std::vector<Vec2>& pb,
                                           double radius) {
    if (radius <= 0) throw std::invalid_argument("match_features: radius must be positive");
    GrayImage ga = to_gray(a), gb = to_gray(b);

    std::vector<std::vector<double>> patches_b(pb.size());
    std::vector<double> norms_b(pb.size(), -1.0);
    for (size_t j = 0; j < pb.size(); ++j)
        if (!extract_patch(gb, pb[j], patches_b[j], norms_b[j])) norms_b[j] = -1.0;

    const double r2 = radius * radius;
    std::vector<int> best_for_a(pa.size(), -1);
    std::vector<double> best_score_a(pa.size(), 0.8);  // matches below 0.8 discarded
    std::vector<double> patch_a;

    for (size_t i = 0; i < pa.size(); ++i) {
        double na;
        if (!extract_patch(ga, pa[i], patch_a, na)) continue;
        for (size_t j = 0; j < pb.size(); ++j) {
            if (norms_b[j] < 0) continue;
            double dx = pb[j].x - pa[i].x, dy = pb[j].y - pa[i].y;
            if (dx * dx + dy * dy > r2) continue;
            double dotp = 0.0;
            const auto& qb = patches_b[j];
            for (size_t k = 0; k < patch_a.size(); ++k) dotp += patch_a[k] * qb[k];
            double ncc = dotp / (na * norms_b[j]);
            if (ncc > best_score_a[i]) {
                best_score_a[i] = ncc;
                best_for_a[i] = int(j);
            }
        }
    }

    // Mutual-best: keep (i,j) only when i is also the best partner of j.
    std::vector<int> best_for_b(pb.size(), -1);
    std::vector<double> best_score_b(pb.size(), 0.8);
    for (size_t i = 0; i < pa.size(); ++i) {
        int j = best_for_a[i];
        if (j >= 0 && best_score_a[i] > best_score_b[j]) {
            best_score_b[j] = best_score_a[i];
            best_for_b[j] = int(i);
        }
    }
    std::vector<Correspondence> out;
    for (size_t i = 0; i < pa.size(); ++i) {
        int j = best_for_a[i];
        if (j >= 0 && best_for_b[j] == int(i)) out.push_back({pa[i], pb[j], best_score_a[i]});
    }
    return out;
}

namespace {

// Exact affine through 3 point pairs; false when nearly collinear.
bool affine_from_triplet(const Correspondence& c0, const Correspondence& c1,
                         const Correspondence& c2, Affine2D& out) {
    double ax0 = c0.a.x, ay0 = c0.a.y, ax1 = c1.a.x, ay1 = c1.a.y, ax2 = c2.a.x, ay2 = c2.a.y;
    double det = (ax1 - ax0) * (ay2 - ay0) - (ax2 - ax0) * (ay1 - ay0);
    if (std::abs(det) < 1e-6) return false;
    auto solve_row = [&](double b0, double b1, double b2, double& m0, double& m1, double& m2) {
        double d1 = b1 - b0, d2 = b2 - b0;
        m0 = (d1 * (ay2 - ay0) - d2 * (ay1 - ay0)) / det;
        m1 = (d2 * (ax1 - ax0) - d1 * (ax2 - ax0)) / det;
        m2 = b0 - m0 * ax0 - m1 * ay0;
    };
    solve_row(c0.b.x, c1.b.x, c2.b.x, out.a, out.b, out.tx);
    solve_row(c0.b.y, c1.b.y, c2.b.y, out.c, out.d, out.ty);
    return true;
}

// Least-squares affine on a subset: two independent 3-unknown normal systems
// sharing one Gram matrix, solved by Cramer's rule.
bool affine_least_squares(const std::vector<Correspondence>& cs, const std::vector<int>& idx,
                          Affine2D& out) {
    double sxx = 0, sxy = 0, sx = 0, syy = 0, sy = 0, n = 0;
    double bx[3] = {0, 0, 0}, by[3] = {0, 0, 0};
    for (int i : idx) {
        Vec2 p = cs[i].a, q = cs[i].b;
        sxx += p.x * p.x;
        sxy += p.x * p.y;
        syy += p.y * p.y;
        sx += p.x;
        sy += p.y;
        n += 1;
        bx[0] += p.x * q.x;
        bx[1] += p.y * q.x;
        bx[2] += q.x;
        by[0] += p.x * q.y;
        by[1] += p.y * q.y;
        by[2] += q.y;
    }
    double g[9] = {sxx, sxy, sx, sxy, syy, sy, sx, sy, n};
    double det = g[0] * (g[4] * g[8] - g[5] * g[7]) - g[1] * (g[3] * g[8] - g[5] * g[6]) +
                 g[2] * (g[3] * g[7] - g[4] * g[6]);
    if (std::abs(det) < 1e-9) return false;
    auto solve3 = [&](const double b[3], double r[3]) {
        for (int col = 0; col < 3; ++col) {
            double m[9];
            std::copy(g, g + 9, m);
            m[col] = b[0];
            m[col + 3] = b[1];
            m[col + 6] = b[2];
            r[col] = (m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
                      m[2] * (m[3] * m[7] - m[4] * m[6])) /
                     det;
        }
    };
    double rx[3], ry[3];
    solve3(bx, rx);
    solve3(by, ry);
    out = {rx[0], rx[1], rx[2], ry[0], ry[1], ry[2]};
    return true;
}

}  // namespace

std::optional<RansacResult> ransac_affine(const std::vector<Correspondence>& cs, int iters,
                                          double tol, std::mt19937_64& rng) {
    const int n = int(cs.size());
    if (n < 3) return std::nullopt;
    std::uniform_int_distribution<int> pick(0, n - 1);
    const double tol2 = tol * tol;

    std::vector<int> best_inliers;
    for (int it = 0; it < iters; ++it) {
        int i0 = pick(rng), i1 = pick(rng), i2 = pick(rng);
        if (i0 == i1 || i1 == i2 || i0 == i2) continue;
        Affine2D m;
        if (!affine_from_triplet(cs[i0], cs[i1], cs[i2], m)) continue;
        std::vector<int> inl;
        for (int i = 0; i < n; ++i) {
            Vec2 e = m.apply(cs[i].a) - cs[i].b;
            if (dot(e, e) <= tol2) inl.push_back(i);
        }
        if (inl.size() > best_inliers.size()) best_inliers = std::move(inl);
    }
    if (int(best_inliers.size()) < 3) return std::nullopt;

    RansacResult res;
    if (!affine_least_squares(cs, best_inliers, res.model)) return std::nullopt;
    res.inliers.clear();
    for (int i = 0; i < n; ++i) {
        Vec2 e = res.model.apply(cs[i].a) - cs[i].b;
        if (dot(e, e) <= tol2) res.inliers.push_back(i);
    }
    if (int(res.inliers.size()) < 3) return std::nullopt;
    return res;
}

WarpResult warp(const Frame& f, const Affine2D& t) {
    Affine2D inv = t.inverse();
    WarpResult out{Frame(f.width(), f.height()), BinaryImage(f.width(), f.height())};
    const double w1 = f.width() - 1.0, h1 = f.height() - 1.0;
    for (int y = 0; y < f.height(); ++y) {
        for (int x = 0; x < f.width(); ++x) {
            Vec2 src = inv.apply({double(x), double(y)});
            if (src.x < 0.0 || src.x > w1 || src.y < 0.0 || src.y > h1) continue;
            out.frame.set(x, y, f.sample_bilinear(src.x, src.y));
            out.valid.at(x, y) = 1;
        }
    }
    return out;
}

Affine2D register_frames(const Frame& reference, const Frame& moving, const StabilizeConfig& cfg,
                         std::mt19937_64& rng) {
    std::vector<Vec2> pr = detect_corners(reference, cfg.max_corners);
    std::vector<Vec2> pm = detect_corners(moving, cfg.max_corners);
    auto cs = match_features(moving, pm, reference, pr, cfg.match_radius);
    auto res = ransac_affine(cs, cfg.ransac_iters, cfg.ransac_tol, rng);
    if (!res) return Affine2D::identity();
    return res->model;
}

}  // namespace fmo
