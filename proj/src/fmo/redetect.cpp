#include "fmo/redetect.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fmo {

PixelPath rasterize_line(Pixel a, Pixel b) {
    PixelPath path;
    int dx = std::abs(b.x - a.x), sx = a.x < b.x ? 1 : -1;
    int dy = -std::abs(b.y - a.y), sy = a.y < b.y ? 1 : -1;
    int err = dx + dy;
    Pixel p = a;
    path.pixels.push_back(p);
    while (!(p == b)) {
        int e2 = 2 * err;
        bool moved_x = false, moved_y = false;
        if (e2 >= dy) {
            err += dy;
            p.x += sx;
            moved_x = true;
        }
        if (e2 <= dx) {
            err += dx;
            p.y += sy;
            moved_y = true;
        }
        path.length += (moved_x && moved_y) ? std::numbers::sqrt2 : 1.0;
        path.pixels.push_back(p);
    }
    return path;
}

namespace {

struct Candidate {
    Component component;   // global coordinates
    PixelPath path;
    double r = 0.0;
    Rgb mu;
    double proj_lo = 0.0, proj_hi = 0.0;  // extent along the group direction
};

}  // namespace

std::optional<Detection> redetect(const Frame& prev, const Frame& cur, const Frame& next,
                                  const Detection& prev_det, const FmoModel& model,
                                  const RedetectConfig& cfg, const DetectorConfig& dcfg,
                                  const BinaryImage* valid) {
    if (prev_det.path.length <= 0.0 || prev_det.path.pixels.empty()) return std::nullopt;
    const double eps = model.epsilon_or(0.5);
    const double full_len = prev_det.path.length / eps;   // trajectory length between frames
    const double side = cfg.window_factor * full_len;

    Vec2 c = prev_det.path.midpoint();
    Rect window{int(std::floor(c.x - side / 2)), int(std::floor(c.y - side / 2)),
                int(std::ceil(c.x + side / 2)) + 1, int(std::ceil(c.y + side / 2)) + 1};
    window = window.clipped({0, 0, cur.width(), cur.height()});
    if (window.empty()) return std::nullopt;

    BinaryImage delta = combined_delta(prev, cur, next, dcfg, valid);
    BinaryImage local(window.width(), window.height());
    for (int y = window.y0; y < window.y1; ++y)
        for (int x = window.x0; x < window.x1; ++x)
            local.at(x - window.x0, y - window.y0) = delta.at(x, y);

    // Per-component model parameters, computed exactly as in the detector.
    std::vector<Candidate> cands;
    for (Component comp : connected_components(local)) {
        for (Pixel& p : comp.pixels) {
            p.x += window.x0;
            p.y += window.y0;
        }
        comp.bbox = {comp.bbox.x0 + window.x0, comp.bbox.y0 + window.y0,
                     comp.bbox.x1 + window.x0, comp.bbox.y1 + window.y0};
        DistanceMap dmap = distance_transform(comp);
        ModelCheck mc = check_model(comp, dmap, dcfg);
        if (!mc.stroke_ok || !mc.path) continue;
        Candidate cand;
        cand.r = mc.r;
        cand.path = *mc.path;
        cand.mu = mean_color_on_path(cur, cand.path);
        cand.component = std::move(comp);
        if (norm(cand.mu - model.mu) >= cfg.color_thresh) continue;
        if (model.r <= 0.0 || std::abs(cand.r - model.r) / model.r >= cfg.radius_thresh) continue;
        cands.push_back(std::move(cand));
    }
    if (cands.empty()) return std::nullopt;

    // Principal direction of all accepted path pixels (largest-eigenvector of
    // the 2x2 scatter matrix).
    Vec2 mean;
    int npix = 0;
    for (const auto& cd : cands)
        for (const Pixel& p : cd.path.pixels) {
            mean += {double(p.x), double(p.y)};
            ++npix;
        }
    mean = mean * (1.0 / npix);
    double sxx = 0, sxy = 0, syy = 0;
    for (const auto& cd : cands)
        for (const Pixel& p : cd.path.pixels) {
            double dx = p.x - mean.x, dy = p.y - mean.y;
            sxx += dx * dx;
            sxy += dx * dy;
            syy += dy * dy;
        }
    double theta = 0.5 * std::atan2(2 * sxy, sxx - syy);
    Vec2 dir{std::cos(theta), std::sin(theta)};

    for (auto& cd : cands) {
        cd.proj_lo = 1e30;
        cd.proj_hi = -1e30;
        for (const Pixel& p : cd.path.pixels) {
            double t = dot({double(p.x), double(p.y)}, dir);
            cd.proj_lo = std::min(cd.proj_lo, t);
            cd.proj_hi = std::max(cd.proj_hi, t);
        }
    }
    std::sort(cands.begin(), cands.end(),
              [](const Candidate& a, const Candidate& b) { return a.proj_lo < b.proj_lo; });

    // Group collinear candidates: consecutive along `dir`, gaps no longer
    // than the inter-frame trajectory length, lateral deviation within 2 r0.
    auto lateral_ok = [&](const Candidate& cd) {
        for (const Pixel& p : cd.path.pixels) {
            Vec2 off = Vec2{double(p.x), double(p.y)} - mean;
            double lat = std::abs(off.x * dir.y - off.y * dir.x);
            if (lat > 2.0 * model.r) return false;
        }
        return true;
    };
    std::vector<std::vector<int>> groups;
    for (int i = 0; i < int(cands.size()); ++i) {
        bool appended = false;
        if (!groups.empty() && lateral_ok(cands[i])) {
            auto& g = groups.back();
            const Candidate& prevc = cands[g.back()];
            if (lateral_ok(cands[g.back()]) && cands[i].proj_lo - prevc.proj_hi <= full_len) {
                g.push_back(i);
                appended = true;
            }
        }
        if (!appended) groups.push_back({i});
    }

    // Best group by total area.
    int best = -1;
    double best_area = -1.0;
    for (int gi = 0; gi < int(groups.size()); ++gi) {
        double area = 0.0;
        for (int i : groups[gi]) area += double(cands[i].component.area());
        if (area > best_area) {
            best_area = area;
            best = gi;
        }
    }
    const auto& group = groups[best];

    Detection det;
    det.source = DetectionSource::redetector;
    if (group.size() == 1) {
        const Candidate& cd = cands[group[0]];
        det.path = cd.path;
        det.r = cd.r;
        det.mu = cd.mu;
        det.component = cd.component;
        det.area = double(cd.component.area());
    } else {
        // Merged detection: straight path spanning the fragments' extremes.
        const Candidate& first = cands[group.front()];
        const Candidate& last = cands[group.back()];
        auto extreme = [&](const Candidate& cd, bool lo) {
            Pixel bestp = cd.path.pixels.front();
            double bestt = dot({double(bestp.x), double(bestp.y)}, dir);
            for (const Pixel& p : cd.path.pixels) {
                double t = dot({double(p.x), double(p.y)}, dir);
                if (lo ? t < bestt : t > bestt) {
                    bestt = t;
                    bestp = p;
                }
            }
            return bestp;
        };
        det.path = rasterize_line(extreme(first, true), extreme(last, false));
        double area = 0.0, rsum = 0.0;
        Rgb musum;
        det.component.label = first.component.label;
        det.component.bbox = first.component.bbox;
        for (int i : group) {
            const Candidate& cd = cands[i];
            double a = double(cd.component.area());
            area += a;
            rsum += cd.r * a;
            musum += cd.mu * a;
            det.component.bbox = Rect::hull(det.component.bbox, cd.component.bbox);
            det.component.pixels.insert(det.component.pixels.end(), cd.component.pixels.begin(),
                                        cd.component.pixels.end());
        }
        std::sort(det.component.pixels.begin(), det.component.pixels.end(),
                  [](Pixel a, Pixel b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
        det.r = rsum / area;
        det.mu = musum * (1.0 / area);
        det.area = area;
    }
    det.model_area = 2.0 * det.r * det.path.length + M_PI * det.r * det.r;
    return det;
}

}  // namespace fmo
