#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "fmo/eval.hpp"

using namespace fmo;

namespace {

double round1(double v) { return std::round(v * 10.0) / 10.0; }

PolyRegion square(double x0, double y0, double s) {
    return PolyRegion::from_rect(x0, y0, x0 + s, y0 + s);
}

}  // namespace

TEST_CASE("fscore_from_pr reproduces the published rows to one decimal") {
    CHECK(round1(fscore_from_pr(100.0, 45.5)) == 62.5);
    CHECK(round1(fscore_from_pr(100.0, 88.7)) == 94.0);
    CHECK(round1(fscore_from_pr(12.1, 7.3)) == 9.1);
    CHECK(fscore_from_pr(0.0, 0.0) == 0.0);
}

TEST_CASE("prf formulas and the 0/0 convention") {
    CHECK(prf({0, 0, 0}).precision == 0.0);
    CHECK(prf({0, 0, 0}).recall == 0.0);
    CHECK(prf({0, 0, 0}).fscore == 0.0);

    Prf m = prf({10, 0, 12});
    CHECK(m.precision == doctest::Approx(100.0));
    CHECK(m.recall == doctest::Approx(100.0 * 10.0 / 22.0));
    CHECK(m.fscore == doctest::Approx(100.0 * 20.0 / 32.0));
}

TEST_CASE("F-score identity: counts form equals 2PR/(P+R)") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> u(0, 40);
    for (int trial = 0; trial < 200; ++trial) {
        MatchCounts c{u(rng), u(rng), u(rng)};
        Prf m = prf(c);
        if (m.precision + m.recall > 0)
            CHECK(std::abs(m.fscore - fscore_from_pr(m.precision, m.recall)) <= 1e-9);
    }
}

TEST_CASE("match_frame: basic outcomes and the uniqueness rule") {
    auto r = match_frame({square(0, 0, 10)}, {square(2, 0, 10)});  // IoU ~ 2/3
    CHECK(r.counts.tp == 1);
    CHECK(r.counts.fp == 0);
    CHECK(r.counts.fn == 0);
    CHECK(r.det_to_gt[0] == 0);

    // Two detections covering the same ground truth: exactly one TP.
    auto two = match_frame({square(1, 0, 10), square(2, 0, 10)}, {square(0, 0, 10)});
    CHECK(two.counts.tp == 1);
    CHECK(two.counts.fp == 1);
    CHECK(two.counts.fn == 0);
    CHECK(two.det_to_gt[0] == 0);   // the higher-IoU detection wins
    CHECK(two.det_to_gt[1] == -1);

    auto none = match_frame({}, {square(0, 0, 5)});
    CHECK(none.counts.fn == 1);
    CHECK(none.counts.tp == 0);

    auto below = match_frame({square(0, 0, 10)}, {square(8, 8, 10)});  // tiny IoU
    CHECK(below.counts.tp == 0);
    CHECK(below.counts.fp == 1);
    CHECK(below.counts.fn == 1);
}

TEST_CASE("match_frame: permutation invariance in ground-truth order") {
    std::vector<PolyRegion> dets{square(0, 0, 8), square(30, 0, 8), square(60, 0, 8)};
    std::vector<PolyRegion> gts{square(1, 0, 8), square(59, 1, 8), square(31, 1, 8)};
    auto a = match_frame(dets, gts);
    std::swap(gts[0], gts[2]);
    auto b = match_frame(dets, gts);
    CHECK(a.counts.tp == b.counts.tp);
    CHECK(a.counts.fp == b.counts.fp);
    CHECK(a.counts.fn == b.counts.fn);
    CHECK(a.counts.tp == 3);
}

TEST_CASE("match bookkeeping: TP+FN equals the ground-truth count") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0, 100);
    long long total_gt = 0, tp_fn = 0;
    for (int frame = 0; frame < 30; ++frame) {
        std::vector<PolyRegion> dets, gts;
        int nd = int(u(rng)) % 4, ng = int(u(rng)) % 4;
        for (int i = 0; i < nd; ++i) dets.push_back(square(u(rng), u(rng), 6 + u(rng) / 20));
        for (int i = 0; i < ng; ++i) gts.push_back(square(u(rng), u(rng), 6 + u(rng) / 20));
        auto r = match_frame(dets, gts);
        total_gt += ng;
        tp_fn += r.counts.tp + r.counts.fn;
        CHECK(r.counts.tp <= std::min(nd, ng));
    }
    CHECK(tp_fn == total_gt);
}

TEST_CASE("annotation file round trip") {
    std::vector<FrameAnnotation> anns;
    anns.push_back({3, {PolyRegion::from_polygon({{10.25, 4.5}, {20, 4.5}, {15, 12.75}})}});
    anns.push_back({5,
                    {PolyRegion::from_polygon({{1, 1}, {9, 1}, {9, 7}, {1, 7}}),
                     PolyRegion::from_polygon({{30, 30}, {42.5, 31}, {36, 40}})}});
    write_annotations("/tmp/fmo_test_ann.txt", anns);
    auto back = read_annotations("/tmp/fmo_test_ann.txt");
    REQUIRE(back.size() == 2);
    CHECK(back[0].frame_index == 3);
    CHECK(back[1].regions.size() == 2);
    for (size_t i = 0; i < anns.size(); ++i) {
        REQUIRE(back[i].regions.size() == anns[i].regions.size());
        for (size_t j = 0; j < anns[i].regions.size(); ++j) {
            const auto& pa = anns[i].regions[j].polygon;
            const auto& pb = back[i].regions[j].polygon;
            REQUIRE(pa.size() == pb.size());
            for (size_t k = 0; k < pa.size(); ++k) {
                CHECK(pa[k].x == pb[k].x);
                CHECK(pa[k].y == pb[k].y);
            }
        }
    }

    // Decreasing frame indices are rejected.
    std::istringstream bad("5,0,0,5,0,5,5\n3,0,0,5,0,5,5\n");
    CHECK_THROWS_AS(parse_annotations(bad, "bad"), std::runtime_error);
}

TEST_CASE("detection file round trip") {
    std::vector<DetectionRecord> dets;
    DetectionRecord a;
    a.frame_index = 7;
    a.source = DetectionSource::redetector;
    a.r = 8.25;
    a.mu = {0.5, 0.25, 0.125};
    a.path = {{10, 20}, {11, 20}, {12, 21}};
    dets.push_back(a);
    write_detections("/tmp/fmo_test_det.txt", dets);
    auto back = read_detections("/tmp/fmo_test_det.txt");
    REQUIRE(back.size() == 1);
    CHECK(back[0].frame_index == 7);
    CHECK(back[0].source == DetectionSource::redetector);
    CHECK(back[0].r == 8.25);
    CHECK(back[0].mu.b == 0.125);
    REQUIRE(back[0].path.size() == 3);
    CHECK(back[0].path[2].x == 12.0);

    // Byte-identical rewrite.
    write_detections("/tmp/fmo_test_det2.txt", back);
    std::ifstream f1("/tmp/fmo_test_det.txt"), f2("/tmp/fmo_test_det2.txt");
    std::string s1((std::istreambuf_iterator<char>(f1)), {});
    std::string s2((std::istreambuf_iterator<char>(f2)), {});
    CHECK(s1 == s2);

    std::istringstream bad("1,detector,5,0.5,0.5,0.5,3,1,2,3\n");
    CHECK_THROWS_AS(parse_detections(bad, "bad"), std::runtime_error);
}

TEST_CASE("dataset_stats: degenerate and moving cases") {
    std::vector<FrameAnnotation> same;
    same.push_back({0, {square(10, 10, 8)}});
    same.push_back({1, {square(10, 10, 8)}});
    DatasetStats st = dataset_stats(same);
    CHECK(st.displacement.mass[0] == 1.0);           // displacement 0
    CHECK(st.bbox_iou.mass.back() == 1.0);           // IoU 1 in the top bin

    std::vector<FrameAnnotation> shifted;
    shifted.push_back({0, {square(10, 10, 8)}});
    shifted.push_back({1, {square(18, 10, 8)}});     // shifted by its full width
    st = dataset_stats(shifted);
    CHECK(st.bbox_iou.mass[0] == 1.0);               // IoU 0

    // Constant 30 px/frame: all mass in the [30,40) displacement bin.
    std::vector<FrameAnnotation> moving;
    for (int t = 0; t < 10; ++t) moving.push_back({t, {square(10 + 30.0 * t, 20, 8)}});
    st = dataset_stats(moving);
    CHECK(st.displacement.mass[3] == 1.0);
    CHECK(st.displacement.total == 9);

    CHECK_THROWS_AS(dataset_stats({{0, {square(0, 0, 5)}}}), std::invalid_argument);
}

TEST_CASE("metrics report formats one decimal and a macro average") {
    std::vector<SequenceScore> rows;
    rows.push_back({"volleyball", 50, {10, 0, 12}});
    rows.push_back({"frisbee", 100, {42, 0, 0}});
    std::string rep = metrics_report(rows);
    CHECK(rep.find("100.0") != std::string::npos);
    CHECK(rep.find("Average") != std::string::npos);
    CHECK(rep.find("F-sc.") != std::string::npos);
}

TEST_CASE("evaluate_sequence: spurious detections on empty frames are FPs") {
    std::vector<FrameAnnotation> anns;
    anns.push_back({2, {square(10, 10, 10)}});
    std::vector<DetectionRecord> dets;
    DetectionRecord hit;
    hit.frame_index = 2;
    hit.r = 5.0;
    hit.path = {{10, 15}, {20, 15}};  // capsule overlapping the gt square
    DetectionRecord stray = hit;
    stray.frame_index = 1;
    dets = {stray, hit};
    MatchCounts c = evaluate_sequence(dets, anns);
    CHECK(c.tp == 1);
    CHECK(c.fp == 1);
    CHECK(c.fn == 0);
}
