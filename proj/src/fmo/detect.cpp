#include "fmo/detect.hpp"

#include <cmath>
#include <stdexcept>

namespace fmo {

const char* to_string(DetectionSource s) {
    switch (s) {
        case DetectionSource::detector: return "detector";
        case DetectionSource::redetector: return "redetector";
        case DetectionSource::tracker: return "tracker";
    }
    return "?";
}

ModelCheck check_model(const Component& c, const DistanceMap& dmap, const DetectorConfig& cfg) {
    ModelCheck out;
    out.area = double(c.area());
    out.r = dmap.max_value();
    if (out.r <= 0.0) return out;

    // Stroke candidate: pixels well inside the component.
    BinaryImage stroke(dmap.rect.width(), dmap.rect.height());
    for (const Pixel& p : c.pixels) {
        if (dmap.at_global(p.x, p.y) > cfg.psi * out.r)
            stroke.at(p.x - dmap.rect.x0, p.y - dmap.rect.y0) = 1;
    }
    BinaryImage sk = thin(stroke);
    auto local = path_from_skeleton(sk);
    if (!local) return out;  // branching or fragmented: not a single stroke
    out.stroke_ok = true;

    PixelPath path = *local;
    for (Pixel& p : path.pixels) {
        p.x += dmap.rect.x0;
        p.y += dmap.rect.y0;
    }
    out.path = path;
    out.model_area = 2.0 * out.r * path.length + M_PI * out.r * out.r;

    if (path.length < cfg.min_path_len_factor * out.r) return out;
    if (std::abs(out.area / out.model_area - 1.0) >= cfg.gamma) return out;
    out.accepted = true;
    return out;
}

BinaryImage combined_delta(const Frame& prev, const Frame& cur, const Frame& next,
                           const DetectorConfig& cfg, const BinaryImage* valid) {
    if (!prev.same_size(cur) || !cur.same_size(next))
        throw std::invalid_argument("detect: frame dimension mismatch");
    GrayImage dplus = abs_diff(cur, prev);
    GrayImage dzero = abs_diff(next, prev);
    GrayImage dminus = abs_diff(cur, next);
    BinaryImage delta = combine_delta(binarize(dplus, cfg.binarize_thresh),
                                      binarize(dminus, cfg.binarize_thresh),
                                      binarize(dzero, cfg.binarize_thresh));
    if (valid) {
        if (!valid->same_size(delta)) throw std::invalid_argument("detect: mask dimension mismatch");
        for (size_t i = 0; i < delta.data().size(); ++i)
            if (!valid->data()[i]) delta.data()[i] = 0;
    }
    return delta;
}

Rgb mean_color_on_path(const Frame& f, const PixelPath& path) {
    Rgb sum;
    for (const Pixel& p : path.pixels) sum += f.at(p.x, p.y);
    return sum * (1.0 / double(path.pixels.size()));
}

std::vector<Detection> detect_fmo(const Frame& prev, const Frame& cur, const Frame& next,
                                  const DetectorConfig& cfg, const BinaryImage* valid) {
    BinaryImage delta = combined_delta(prev, cur, next, cfg, valid);
    std::vector<Detection> out;
    for (Component& c : connected_components(delta)) {
        DistanceMap dmap = distance_transform(c);
        ModelCheck mc = check_model(c, dmap, cfg);
        if (!mc.accepted) continue;
        Detection det;
        det.path = *mc.path;
        det.r = mc.r;
        det.mu = mean_color_on_path(cur, det.path);
        det.component = std::move(c);
        det.area = mc.area;
        det.model_area = mc.model_area;
        det.source = DetectionSource::detector;
        out.push_back(std::move(det));
    }
    return out;  // component order = label order
}

}  // namespace fmo
