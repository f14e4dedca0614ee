#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fmo/detect.hpp"

namespace fmo {

// Ground-truth regions of one frame.
struct FrameAnnotation {
    int frame_index = 0;
    std::vector<PolyRegion> regions;
};

// One detection as stored in a detections file:
// frame_idx,source,r,mu_r,mu_g,mu_b,n,x1,y1,...,xn,yn
struct DetectionRecord {
    int frame_index = 0;
    DetectionSource source = DetectionSource::detector;
    double r = 0.0;
    Rgb mu;
    std::vector<Vec2> path;

    static DetectionRecord from_detection(int frame_index, const Detection& d);
    PixelPath to_path() const;
    // Model footprint region: capsule of radius r around the path.
    PolyRegion region() const;
};

// Annotation file: UTF-8 text, one region per line,
// `frame_idx,x1,y1,...,xn,yn`; frame indices non-decreasing, empty frames
// absent. Throws std::runtime_error with file/line diagnostics.
std::vector<FrameAnnotation> parse_annotations(std::istream& in, const std::string& name);
std::vector<FrameAnnotation> read_annotations(const std::string& path);
void write_annotations(const std::string& path, const std::vector<FrameAnnotation>& anns);

std::vector<DetectionRecord> parse_detections(std::istream& in, const std::string& name);
std::vector<DetectionRecord> read_detections(const std::string& path);
void write_detections(const std::string& path, const std::vector<DetectionRecord>& dets);

// Canonical float formatting shared by the text formats (6 significant
// digits), so identical runs produce byte-identical files.
std::string format_float(double v);

struct MatchCounts {
    long long tp = 0;
    long long fp = 0;
    long long fn = 0;

    MatchCounts& operator+=(const MatchCounts& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        return *this;
    }
};

struct MatchResult {
    MatchCounts counts;
    std::vector<int> det_to_gt;   // per detection: matched gt index or -1
};

// Greedy matching by descending IoU: a detection is a true positive iff its
// IoU with some ground truth exceeds the threshold and it is that ground
// truth's highest-IoU detection (ties broken by detection order). Each
// ground truth yields at most one TP.
MatchResult match_frame(const std::vector<PolyRegion>& dets, const std::vector<PolyRegion>& gts,
                        double iou_thresh = 0.5);

struct Prf {
    double precision = 0.0;  // percent
    double recall = 0.0;
    double fscore = 0.0;
};

// precision TP/(TP+FP), recall TP/(TP+FN), F-score 2TP/(2TP+FN+FP), as
// percentages; 0/0 counts as 0.
Prf prf(const MatchCounts& c);

// F-score from precision/recall percentages (2PR/(P+R)), rounded by the
// caller; 0 when P+R == 0.
double fscore_from_pr(double p, double r);

struct Histogram {
    std::vector<double> edges;   // size bins+1
    std::vector<double> mass;    // normalized to sum 1 when any samples fell in
    long long total = 0;
};

struct DatasetStats {
    Histogram displacement;   // px between bbox centers of adjacent frames
    Histogram bbox_iou;       // axis-aligned bbox IoU of adjacent frames
};

// Motion statistics over adjacent annotated frame pairs holding exactly one
// region each. Requires at least 2 annotated frames.
DatasetStats dataset_stats(const std::vector<FrameAnnotation>& anns,
                           const std::vector<double>& displacement_edges = {},
                           const std::vector<double>& iou_edges = {});

// Per-sequence metrics table (columns #, Pr., Rc., F-sc.) plus a macro
// average row, percentages to one decimal.
struct SequenceScore {
    std::string name;
    int frames = 0;
    MatchCounts counts;
};
std::string metrics_report(const std::vector<SequenceScore>& rows);

// Text rendering of dataset statistics.
std::string stats_report(const DatasetStats& stats);

// Frame-by-frame evaluation of a detections file against annotations.
MatchCounts evaluate_sequence(const std::vector<DetectionRecord>& dets,
                              const std::vector<FrameAnnotation>& anns, double iou_thresh = 0.5);

}  // namespace fmo
