#include "fmo/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fmo {

std::string format_float(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

namespace {

[[noreturn]] void fail_at(const std::string& name, int line, const std::string& what) {
    throw std::runtime_error(name + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, const std::string& name, int line) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        fail_at(name, line, "bad number '" + s + "'");
    }
}

}  // namespace

DetectionRecord DetectionRecord::from_detection(int frame_index, const Detection& d) {
    DetectionRecord rec;
    rec.frame_index = frame_index;
    rec.source = d.source;
    rec.r = d.r;
    rec.mu = d.mu;
    rec.path.reserve(d.path.pixels.size());
    for (const Pixel& p : d.path.pixels) rec.path.push_back({double(p.x), double(p.y)});
    return rec;
}

PixelPath DetectionRecord::to_path() const {
    PixelPath p;
    for (const Vec2& v : path) {
        Pixel px{int(std::lround(v.x)), int(std::lround(v.y))};
        if (!p.pixels.empty() && px == p.pixels.back()) continue;
        if (!p.pixels.empty()) {
            Vec2 prev{double(p.pixels.back().x), double(p.pixels.back().y)};
            p.length += distance(prev, {double(px.x), double(px.y)});
        }
        p.pixels.push_back(px);
    }
    if (p.pixels.empty()) p.pixels.push_back({0, 0});
    return p;
}

PolyRegion DetectionRecord::region() const {
    if (path.empty()) return {};
    Vec2 s = path.front(), e = path.back();
    // Capsule polygon around the path chord.
    std::vector<Vec2> poly;
    Vec2 d = e - s;
    double len = norm(d);
    double base = len > 0 ? std::atan2(d.y, d.x) : 0.0;
    const int arc = 16;
    for (int i = 0; i <= arc; ++i) {
        double a = base - M_PI_2 + M_PI * i / arc;
        poly.push_back({e.x + r * std::cos(a), e.y + r * std::sin(a)});
    }
    for (int i = 0; i <= arc; ++i) {
        double a = base + M_PI_2 + M_PI * i / arc;
        poly.push_back({s.x + r * std::cos(a), s.y + r * std::sin(a)});
    }
    return PolyRegion::from_polygon(std::move(poly));
}

std::vector<FrameAnnotation> parse_annotations(std::istream& in, const std::string& name) {
    std::vector<FrameAnnotation> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto f = split_csv(line);
        if (f.size() < 7 || (f.size() - 1) % 2 != 0)
            fail_at(name, lineno, "expected frame_idx followed by at least 3 x,y pairs");
        int idx = int(parse_double(f[0], name, lineno));
        std::vector<Vec2> poly;
        for (size_t i = 1; i + 1 < f.size(); i += 2)
            poly.push_back({parse_double(f[i], name, lineno), parse_double(f[i + 1], name, lineno)});
        if (!out.empty() && idx < out.back().frame_index)
            fail_at(name, lineno, "frame indices must be non-decreasing");
        if (out.empty() || out.back().frame_index != idx) out.push_back({idx, {}});
        out.back().regions.push_back(PolyRegion::from_polygon(std::move(poly)));
    }
    return out;
}

std::vector<FrameAnnotation> read_annotations(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open");
    return parse_annotations(in, path);
}

void write_annotations(const std::string& path, const std::vector<FrameAnnotation>& anns) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    for (const auto& fa : anns) {
        for (const auto& region : fa.regions) {
            out << fa.frame_index;
            for (const Vec2& v : region.polygon)
                out << "," << format_float(v.x) << "," << format_float(v.y);
            out << "\n";
        }
    }
}

std::vector<DetectionRecord> parse_detections(std::istream& in, const std::string& name) {
    std::vector<DetectionRecord> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto f = split_csv(line);
        if (f.size() < 9) fail_at(name, lineno, "truncated detection record");
        DetectionRecord rec;
        rec.frame_index = int(parse_double(f[0], name, lineno));
        if (f[1] == "detector") rec.source = DetectionSource::detector;
        else if (f[1] == "redetector") rec.source = DetectionSource::redetector;
        else if (f[1] == "tracker") rec.source = DetectionSource::tracker;
        else fail_at(name, lineno, "unknown source '" + f[1] + "'");
        rec.r = parse_double(f[2], name, lineno);
        rec.mu = {parse_double(f[3], name, lineno), parse_double(f[4], name, lineno),
                  parse_double(f[5], name, lineno)};
        int n = int(parse_double(f[6], name, lineno));
        if (int(f.size()) != 7 + 2 * n) fail_at(name, lineno, "point count mismatch");
        for (int i = 0; i < n; ++i)
            rec.path.push_back({parse_double(f[7 + 2 * i], name, lineno),
                                parse_double(f[8 + 2 * i], name, lineno)});
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<DetectionRecord> read_detections(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open");
    return parse_detections(in, path);
}

void write_detections(const std::string& path, const std::vector<DetectionRecord>& dets) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    for (const auto& d : dets) {
        out << d.frame_index << "," << to_string(d.source) << "," << format_float(d.r) << ","
            << format_float(d.mu.r) << "," << format_float(d.mu.g) << "," << format_float(d.mu.b)
            << "," << d.path.size();
        for (const Vec2& v : d.path) out << "," << format_float(v.x) << "," << format_float(v.y);
        out << "\n";
    }
}

MatchResult match_frame(const std::vector<PolyRegion>& dets, const std::vector<PolyRegion>& gts,
                        double iou_thresh) {
    if (iou_thresh <= 0.0 || iou_thresh >= 1.0)
        throw std::invalid_argument("match_frame: threshold must be in (0,1)");
    struct Pair {
        double iou;
        int det, gt;
    };
    std::vector<Pair> pairs;
    for (int di = 0; di < int(dets.size()); ++di)
        for (int gi = 0; gi < int(gts.size()); ++gi) {
            double iou = region_iou(dets[di], gts[gi]);
            if (iou > iou_thresh) pairs.push_back({iou, di, gi});
        }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.iou != b.iou) return a.iou > b.iou;
        if (a.det != b.det) return a.det < b.det;
        return a.gt < b.gt;
    });

    MatchResult res;
    res.det_to_gt.assign(dets.size(), -1);
    std::vector<char> det_used(dets.size(), 0), gt_used(gts.size(), 0);
    for (const Pair& p : pairs) {
        if (det_used[p.det] || gt_used[p.gt]) continue;
        det_used[p.det] = gt_used[p.gt] = 1;
        res.det_to_gt[p.det] = p.gt;
        ++res.counts.tp;
    }
    res.counts.fp = long(dets.size()) - res.counts.tp;
    res.counts.fn = long(gts.size()) - res.counts.tp;
    return res;
}

Prf prf(const MatchCounts& c) {
    Prf out;
    out.precision = (c.tp + c.fp) > 0 ? 100.0 * double(c.tp) / double(c.tp + c.fp) : 0.0;
    out.recall = (c.tp + c.fn) > 0 ? 100.0 * double(c.tp) / double(c.tp + c.fn) : 0.0;
    long long denom = 2 * c.tp + c.fn + c.fp;
    out.fscore = denom > 0 ? 100.0 * 2.0 * double(c.tp) / double(denom) : 0.0;
    return out;
}

double fscore_from_pr(double p, double r) {
    return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

namespace {

Histogram make_histogram(const std::vector<double>& edges, const std::vector<double>& samples) {
    Histogram h;
    h.edges = edges;
    h.mass.assign(edges.size() - 1, 0.0);
    for (double s : samples) {
        int bin = int(h.mass.size()) - 1;
        for (size_t i = 0; i + 1 < edges.size(); ++i) {
            if (s < edges[i + 1]) {
                bin = int(i);
                break;
            }
        }
        if (s < edges.front()) bin = 0;
        h.mass[bin] += 1.0;
        ++h.total;
    }
    if (h.total > 0)
        for (double& m : h.mass) m /= double(h.total);
    return h;
}

std::pair<Vec2, Vec2> region_bbox(const PolyRegion& r) {
    return r.bounds();
}

}  // namespace

DatasetStats dataset_stats(const std::vector<FrameAnnotation>& anns,
                           const std::vector<double>& displacement_edges,
                           const std::vector<double>& iou_edges) {
    if (anns.size() < 2) throw std::invalid_argument("dataset_stats: need at least 2 frames");
    std::vector<double> disp, ious;
    for (size_t i = 0; i + 1 < anns.size(); ++i) {
        const auto& a = anns[i];
        const auto& b = anns[i + 1];
        if (b.frame_index != a.frame_index + 1) continue;
        if (a.regions.size() != 1 || b.regions.size() != 1) continue;
        auto [alo, ahi] = region_bbox(a.regions[0]);
        auto [blo, bhi] = region_bbox(b.regions[0]);
        Vec2 ca = (alo + ahi) * 0.5, cb = (blo + bhi) * 0.5;
        disp.push_back(distance(ca, cb));
        double ix = std::max(0.0, std::min(ahi.x, bhi.x) - std::max(alo.x, blo.x));
        double iy = std::max(0.0, std::min(ahi.y, bhi.y) - std::max(alo.y, blo.y));
        double inter = ix * iy;
        double ua = (ahi.x - alo.x) * (ahi.y - alo.y);
        double ub = (bhi.x - blo.x) * (bhi.y - blo.y);
        double uni = ua + ub - inter;
        ious.push_back(uni > 0 ? inter / uni : 0.0);
    }
    std::vector<double> de = displacement_edges;
    if (de.empty())
        for (int i = 0; i <= 20; ++i) de.push_back(10.0 * i);
    std::vector<double> ie = iou_edges;
    if (ie.empty())
        for (int i = 0; i <= 10; ++i) ie.push_back(0.1 * i);
    DatasetStats out;
    out.displacement = make_histogram(de, disp);
    out.bbox_iou = make_histogram(ie, ious);
    return out;
}

std::string metrics_report(const std::vector<SequenceScore>& rows) {
    std::ostringstream os;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%3s %-24s %6s %6s %6s %6s\n", "n", "Sequence name", "#",
                  "Pr.", "Rc.", "F-sc.");
    os << buf;
    double psum = 0, rsum = 0, fsum = 0;
    for (size_t i = 0; i < rows.size(); ++i) {
        Prf m = prf(rows[i].counts);
        std::snprintf(buf, sizeof(buf), "%3zu %-24s %6d %6.1f %6.1f %6.1f\n", i + 1,
                      rows[i].name.c_str(), rows[i].frames, m.precision, m.recall, m.fscore);
        os << buf;
        psum += m.precision;
        rsum += m.recall;
        fsum += m.fscore;
    }
    if (!rows.empty()) {
        double n = double(rows.size());
        std::snprintf(buf, sizeof(buf), "%3s %-24s %6s %6.1f %6.1f %6.1f\n", "", "Average", "--",
                      psum / n, rsum / n, fsum / n);
        os << buf;
    }
    return os.str();
}

std::string stats_report(const DatasetStats& stats) {
    std::ostringstream os;
    char buf[128];
    os << "object displacement [px] (normalized histogram, " << stats.displacement.total
       << " pairs)\n";
    for (size_t i = 0; i + 1 < stats.displacement.edges.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "  [%6.1f,%6.1f) %.4f\n", stats.displacement.edges[i],
                      stats.displacement.edges[i + 1], stats.displacement.mass[i]);
        os << buf;
    }
    os << "adjacent-frame bbox IoU (normalized histogram, " << stats.bbox_iou.total
       << " pairs)\n";
    for (size_t i = 0; i + 1 < stats.bbox_iou.edges.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "  [%6.2f,%6.2f) %.4f\n", stats.bbox_iou.edges[i],
                      stats.bbox_iou.edges[i + 1], stats.bbox_iou.mass[i]);
        os << buf;
    }
    return os.str();
}

MatchCounts evaluate_sequence(const std::vector<DetectionRecord>& dets,
                              const std::vector<FrameAnnotation>& anns, double iou_thresh) {
    MatchCounts total;
    // Group detections by frame.
    std::vector<std::pair<int, std::vector<PolyRegion>>> det_frames;
    for (const auto& d : dets) {
        if (det_frames.empty() || det_frames.back().first != d.frame_index)
            det_frames.push_back({d.frame_index, {}});
        det_frames.back().second.push_back(d.region());
    }
    size_t di = 0;
    for (const auto& fa : anns) {
        while (di < det_frames.size() && det_frames[di].first < fa.frame_index) {
            // Detections on frames with no annotation line are all false
            // positives (annotations list only frames containing objects).
            total.fp += long(det_frames[di].second.size());
            ++di;
        }
        std::vector<PolyRegion> dregs;
        if (di < det_frames.size() && det_frames[di].first == fa.frame_index) {
            dregs = det_frames[di].second;
            ++di;
        }
        total += match_frame(dregs, fa.regions, iou_thresh).counts;
    }
    for (; di < det_frames.size(); ++di) total.fp += long(det_frames[di].second.size());
    return total;
}

}  // namespace fmo
