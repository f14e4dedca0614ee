#include "fmo/track.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fmo {

namespace {

double normalize_angle(double a) {
    while (a > M_PI) a -= 2 * M_PI;
    while (a <= -M_PI) a += 2 * M_PI;
    return a;
}

Rect segment_window(const LinearSegment& seg, double r, int fw, int fh) {
    Vec2 e = seg.end();
    double pad = 2.0 * r;
    Rect w{int(std::floor(std::min(seg.start.x, e.x) - pad)),
           int(std::floor(std::min(seg.start.y, e.y) - pad)),
           int(std::ceil(std::max(seg.start.x, e.x) + pad)) + 1,
           int(std::ceil(std::max(seg.start.y, e.y) + pad)) + 1};
    return w.clipped({0, 0, fw, fh});
}

}  // namespace

LinearSegment LinearSegment::from_endpoints(Vec2 s, Vec2 e) {
    LinearSegment seg;
    seg.start = s;
    seg.length = distance(s, e);
    seg.beta = seg.length > 0 ? std::atan2(e.y - s.y, e.x - s.x) : 0.0;
    return seg;
}

AlphaImage alpha_matte_linear(const LinearSegment& seg, double r, const Rect& window) {
    if (seg.length <= 0.0) throw std::invalid_argument("alpha_matte_linear: zero-length segment");
    if (r <= 0.0) throw std::invalid_argument("alpha_matte_linear: radius must be positive");
    AlphaImage out{window, GrayImage(window.width(), window.height())};
    Vec2 e = seg.end();
    const double r2 = r * r, scale = 2.0 / seg.length;
    for (int y = window.y0; y < window.y1; ++y) {
        for (int x = window.x0; x < window.x1; ++x) {
            double d = point_segment_distance({double(x), double(y)}, seg.start, e);
            double v = r2 - d * d;
            if (v > 0.0)
                out.a.at(x - window.x0, y - window.y0) = std::min(1.0, scale * std::sqrt(v));
        }
    }
    return out;
}

AlphaImage disc_alpha(Vec2 center, double r, const Rect& window) {
    AlphaImage out{window, GrayImage(window.width(), window.height())};
    const double r2 = r * r;
    for (int y = window.y0; y < window.y1; ++y) {
        for (int x = window.x0; x < window.x1; ++x) {
            double dx = x - center.x, dy = y - center.y;
            if (dx * dx + dy * dy <= r2) out.a.at(x - window.x0, y - window.y0) = 1.0;
        }
    }
    return out;
}

Frame synthesize(const Frame& bg, const AlphaImage& alpha, Rgb mu) {
    Frame out = bg;
    Rect w = alpha.window.clipped({0, 0, bg.width(), bg.height()});
    for (int y = w.y0; y < w.y1; ++y) {
        for (int x = w.x0; x < w.x1; ++x) {
            double a = alpha.at_global(x, y);
            if (a <= 0.0) continue;
            out.set(x, y, bg.at(x, y) * (1.0 - a) + mu * a);
        }
    }
    return out;
}

double loss(const Frame& cur, const Frame& bg, const LinearSegment& seg, const FmoModel& model) {
    Rect w = segment_window(seg, model.r, cur.width(), cur.height());
    if (w.empty()) return std::numeric_limits<double>::infinity();
    AlphaImage alpha = seg.length > 0.0 ? alpha_matte_linear(seg, model.r, w)
                                        : disc_alpha(seg.start, model.r, w);
    double se = 0.0;
    for (int y = w.y0; y < w.y1; ++y) {
        for (int x = w.x0; x < w.x1; ++x) {
            double a = alpha.a.at(x - w.x0, y - w.y0);
            Rgb synth = bg.at(x, y) * (1.0 - a) + model.mu * a;
            Rgb d = synth - cur.at(x, y);
            se += d.r * d.r + d.g * d.g + d.b * d.b;
        }
    }
    return std::sqrt(se / (3.0 * w.width() * w.height()));
}

double streak_rms(const Frame& cur, const Frame& bg, const LinearSegment& seg,
                  const FmoModel& model) {
    Rect w = segment_window(seg, model.r, cur.width(), cur.height());
    if (w.empty()) return std::numeric_limits<double>::infinity();
    AlphaImage alpha = seg.length > 0.0 ? alpha_matte_linear(seg, model.r, w)
                                        : disc_alpha(seg.start, model.r, w);
    double se = 0.0, mass = 0.0;
    for (int y = w.y0; y < w.y1; ++y) {
        for (int x = w.x0; x < w.x1; ++x) {
            double a = alpha.a.at(x - w.x0, y - w.y0);
            if (a <= 0.0) continue;
            Rgb synth = bg.at(x, y) * (1.0 - a) + model.mu * a;
            Rgb d = synth - cur.at(x, y);
            se += a * (d.r * d.r + d.g * d.g + d.b * d.b);
            mass += a;
        }
    }
    if (mass <= 0.0) return std::numeric_limits<double>::infinity();
    return std::sqrt(se / (3.0 * mass));
}

TrackResult track_step(const Frame& cur, const Frame& bg, const FmoModel& model,
                       const LinearSegment& prev_seg, const TrackerConfig& cfg) {
    const double eps = model.epsilon_or(0.5);
    const double len_prev = prev_seg.length;
    const double gap = (1.0 / eps - 1.0) * len_prev;

    // Stage 1: orientation. The start extrapolates along each candidate
    // orientation from the previous endpoint; length carries over.
    auto extrapolate = [&](double beta) {
        LinearSegment s;
        s.beta = normalize_angle(beta);
        s.start = prev_seg.end() + Vec2{std::cos(beta), std::sin(beta)} * gap;
        s.length = len_prev;
        return s;
    };

    TrackResult best{extrapolate(prev_seg.beta), 0.0};
    best.loss = loss(cur, bg, best.segment, model);

    const double range = cfg.orientation_range_deg * M_PI / 180.0;
    const double step = cfg.orientation_step_deg * M_PI / 180.0;
    for (double db = -range; db <= range + 1e-12; db += step) {
        LinearSegment cand = extrapolate(prev_seg.beta + db);
        double l = loss(cur, bg, cand, model);
        if (l < best.loss) best = {cand, l};
    }

    // Stage 2: start point on a square grid around the stage-1 start.
    const double radius = cfg.start_radius_factor * len_prev;
    LinearSegment base = best.segment;
    for (double dy = -radius; dy <= radius + 1e-12; dy += cfg.start_step) {
        for (double dx = -radius; dx <= radius + 1e-12; dx += cfg.start_step) {
            if (dx == 0.0 && dy == 0.0) continue;  // incumbent already scored
            LinearSegment cand = base;
            cand.start = base.start + Vec2{dx, dy};
            double l = loss(cur, bg, cand, model);
            if (l < best.loss) best = {cand, l};
        }
    }

    // Stage 3: length.
    base = best.segment;
    const double lmin = len_prev * (1.0 - cfg.length_range_factor);
    const double lmax = len_prev * (1.0 + cfg.length_range_factor);
    for (double L = lmin; L <= lmax + 1e-12; L += cfg.length_step) {
        LinearSegment cand = base;
        cand.length = L;
        double l = loss(cur, bg, cand, model);
        if (l < best.loss) best = {cand, l};
    }

    best.streak_rms = streak_rms(cur, bg, best.segment, model);
    best.accepted = best.streak_rms <= cfg.loss_threshold;
    return best;
}

}  // namespace fmo
