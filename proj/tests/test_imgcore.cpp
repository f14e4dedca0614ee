#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fmo/image.hpp"
#include "support/oracles.hpp"

using namespace fmo;

namespace {

BinaryImage image_from_rows(const std::vector<std::string>& rows) {
    BinaryImage b(int(rows[0].size()), int(rows.size()));
    for (int y = 0; y < b.height(); ++y)
        for (int x = 0; x < b.width(); ++x) b.at(x, y) = rows[y][x] == '#' ? 1 : 0;
    return b;
}

Frame random_frame(int w, int h, unsigned seed) {
    Frame f(w, h);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double& v : f.data()) v = u(rng);
    return f;
}

}  // namespace

TEST_CASE("abs_diff basics") {
    Frame a(8, 6, {0.25, 0.5, 0.75});
    GrayImage z = abs_diff(a, a);
    for (double v : z.data()) CHECK(v == 0.0);

    Frame white(4, 4, {1, 1, 1}), black(4, 4, {0, 0, 0});
    GrayImage one = abs_diff(white, black);
    for (double v : one.data()) CHECK(v == 1.0);

    Frame b(8, 7);
    CHECK_THROWS_AS(abs_diff(a, b), std::invalid_argument);
}

TEST_CASE("abs_diff equals per-pixel channel-max recomputation") {
    Frame a = random_frame(17, 11, 1);
    Frame b = random_frame(17, 11, 2);
    GrayImage d = abs_diff(a, b);
    for (int y = 0; y < a.height(); ++y) {
        for (int x = 0; x < a.width(); ++x) {
            Rgb ca = a.at(x, y), cb = b.at(x, y);
            double want = std::max({std::abs(ca.r - cb.r), std::abs(ca.g - cb.g),
                                    std::abs(ca.b - cb.b)});
            CHECK(d.at(x, y) == want);
        }
    }
}

TEST_CASE("binarize threshold rules") {
    GrayImage z(5, 5, 0.0);
    BinaryImage b = binarize(z, 0.1);
    for (auto v : b.data()) CHECK(v == 0);

    GrayImage exact(3, 3, 0.3);
    b = binarize(exact, 0.3);  // strict inequality: equal stays false
    for (auto v : b.data()) CHECK(v == 0);

    GrayImage step(10, 4);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 10; ++x) step.at(x, y) = x < 5 ? 0.0 : 1.0;
    b = binarize(step, 0.5);
    int count = 0;
    for (auto v : b.data()) count += v;
    CHECK(count == 20);

    CHECK_THROWS_AS(binarize(z, 0.0), std::invalid_argument);
}

TEST_CASE("combine_delta truth table") {
    BinaryImage t(4, 4, 1), f(4, 4, 0);
    BinaryImage all = combine_delta(t, t, f);
    for (auto v : all.data()) CHECK(v == 1);
    BinaryImage none = combine_delta(t, t, t);
    for (auto v : none.data()) CHECK(v == 0);

    // Exhaustive on 2x2: every assignment of the three inputs.
    for (int bits = 0; bits < 1 << 12; ++bits) {
        BinaryImage dp(2, 2), dm(2, 2), d0(2, 2);
        for (int i = 0; i < 4; ++i) {
            dp.data()[i] = (bits >> i) & 1;
            dm.data()[i] = (bits >> (i + 4)) & 1;
            d0.data()[i] = (bits >> (i + 8)) & 1;
        }
        BinaryImage out = combine_delta(dp, dm, d0);
        for (int i = 0; i < 4; ++i)
            CHECK(int(out.data()[i]) == ((dp.data()[i] && dm.data()[i] && !d0.data()[i]) ? 1 : 0));
    }
}

TEST_CASE("connected components: 8-connectivity and label order") {
    BinaryImage empty(6, 6);
    CHECK(connected_components(empty).empty());

    // Two diagonally touching pixels form one component.
    BinaryImage diag = image_from_rows({
        "#...",
        ".#..",
        "....",
    });
    auto comps = connected_components(diag);
    REQUIRE(comps.size() == 1);
    CHECK(comps[0].area() == 2);
    CHECK(comps[0].label == 1);
    CHECK(comps[0].bbox.width() == 2);
    CHECK(comps[0].bbox.height() == 2);
}

TEST_CASE("connected components match flood-fill oracle on random blobs") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        BinaryImage b(32, 24);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (auto& v : b.data()) v = u(rng) < 0.25 ? 1 : 0;
        auto comps = connected_components(b);
        CHECK(int(comps.size()) == oracle::flood_fill_component_count(b));
        // Labels dense from 1.
        for (size_t i = 0; i < comps.size(); ++i) CHECK(comps[i].label == int(i) + 1);
        // Areas sum to the number of set pixels.
        long long total = 0;
        for (auto& c : comps) total += c.area();
        long long set = 0;
        for (auto v : b.data()) set += v;
        CHECK(total == set);
    }
}

TEST_CASE("distance transform: single pixel and thin line") {
    Component c;
    c.pixels = {{5, 5}};
    c.bbox = {5, 5, 6, 6};
    DistanceMap dm = distance_transform(c);
    CHECK(dm.at_global(5, 5) == doctest::Approx(1.0));
    CHECK(dm.at_global(4, 5) == 0.0);  // background

    Component line;
    for (int x = 3; x < 14; ++x) line.pixels.push_back({x, 7});
    line.bbox = {3, 7, 14, 8};
    dm = distance_transform(line);
    for (int x = 3; x < 14; ++x) CHECK(dm.at_global(x, 7) == doctest::Approx(1.0));
}

TEST_CASE("distance transform: disc radius and brute-force oracle") {
    // Rasterized disc of radius 10.
    Component c;
    Vec2 ctr{15, 15};
    for (int y = 0; y < 31; ++y)
        for (int x = 0; x < 31; ++x)
            if (distance({double(x), double(y)}, ctr) <= 10.0) c.pixels.push_back({x, y});
    c.bbox = {5, 5, 26, 26};
    DistanceMap dm = distance_transform(c);
    double maxd = dm.max_value();
    CHECK(maxd >= 9.0);
    CHECK(maxd <= 11.0);

    GrayImage brute = oracle::brute_force_edt(c.pixels, dm.rect);
    for (int y = 0; y < dm.d.height(); ++y)
        for (int x = 0; x < dm.d.width(); ++x)
            CHECK(dm.d.at(x, y) == doctest::Approx(brute.at(x, y)).epsilon(1e-12));
}

TEST_CASE("distance transform matches brute force on random components") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        BinaryImage b(20, 20);
        for (auto& v : b.data()) v = u(rng) < 0.55 ? 1 : 0;
        auto comps = connected_components(b);
        if (comps.empty()) continue;
        const Component& c = comps[trial % comps.size()];
        DistanceMap dm = distance_transform(c);
        GrayImage brute = oracle::brute_force_edt(c.pixels, dm.rect);
        for (int y = 0; y < dm.d.height(); ++y)
            for (int x = 0; x < dm.d.width(); ++x)
                CHECK(dm.d.at(x, y) == doctest::Approx(brute.at(x, y)).epsilon(1e-12));
    }
}

namespace {

int set_count(const BinaryImage& b) {
    int n = 0;
    for (auto v : b.data()) n += v;
    return n;
}

bool subset_of(const BinaryImage& a, const BinaryImage& b) {
    for (size_t i = 0; i < a.data().size(); ++i)
        if (a.data()[i] && !b.data()[i]) return false;
    return true;
}

// A 1-px-wide skeleton has no fully set 2x2 block.
bool is_unit_width(const BinaryImage& b) {
    for (int y = 0; y + 1 < b.height(); ++y)
        for (int x = 0; x + 1 < b.width(); ++x)
            if (b.at(x, y) && b.at(x + 1, y) && b.at(x, y + 1) && b.at(x + 1, y + 1)) return false;
    return true;
}

}  // namespace

TEST_CASE("thin: 1-px line unchanged") {
    BinaryImage line = image_from_rows({
        ".......",
        ".#####.",
        ".......",
    });
    CHECK(thin(line) == line);
}

TEST_CASE("thin: 20x3 bar reduces to a long horizontal stroke") {
    std::vector<std::string> rows(7, std::string(24, '.'));
    for (int y = 2; y < 5; ++y)
        for (int x = 2; x < 22; ++x) rows[y][x] = '#';
    BinaryImage bar = image_from_rows(rows);
    BinaryImage sk = thin(bar);

    CHECK(subset_of(sk, bar));
    CHECK(is_unit_width(sk));
    CHECK(oracle::flood_fill_component_count(sk) == 1);
    int minx = 1 << 30, maxx = -1;
    for (int y = 0; y < sk.height(); ++y)
        for (int x = 0; x < sk.width(); ++x)
            if (sk.at(x, y)) {
                minx = std::min(minx, x);
                maxx = std::max(maxx, x);
            }
    CHECK(maxx - minx + 1 >= 16);  // spans most of the bar
    auto path = path_from_skeleton(sk);
    REQUIRE(path.has_value());
    CHECK(path->length >= 15.0);
}

TEST_CASE("thin: disc collapses to at most 2 pixels") {
    BinaryImage disc(21, 21);
    for (int y = 0; y < 21; ++y)
        for (int x = 0; x < 21; ++x)
            if (distance({double(x), double(y)}, {10, 10}) <= 8.0) disc.at(x, y) = 1;
    BinaryImage sk = thin(disc);
    CHECK(set_count(sk) <= 2);
    CHECK(set_count(sk) >= 1);
}

TEST_CASE("thin: idempotent and connectivity-preserving on random masks") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 25; ++trial) {
        BinaryImage b(28, 22);
        for (auto& v : b.data()) v = u(rng) < 0.45 ? 1 : 0;
        int before = oracle::flood_fill_component_count(b);
        BinaryImage sk = thin(b);
        CHECK(subset_of(sk, b));
        CHECK(oracle::flood_fill_component_count(sk) == before);
        CHECK(thin(sk) == sk);
    }
}

TEST_CASE("path_from_skeleton: straight, diagonal, branching") {
    BinaryImage run = image_from_rows({
        ".......",
        ".#####.",
        ".......",
    });
    auto p = path_from_skeleton(run);
    REQUIRE(p.has_value());
    CHECK(p->pixels.size() == 5);
    CHECK(p->length == doctest::Approx(4.0));

    BinaryImage stair = image_from_rows({
        "#.....",
        ".#....",
        "..#...",
        "...#..",
        "....#.",
    });
    p = path_from_skeleton(stair);
    REQUIRE(p.has_value());
    CHECK(p->length == doctest::Approx(4.0 * std::sqrt(2.0)));

    BinaryImage ybranch = image_from_rows({
        "#...#",
        ".#.#.",
        "..#..",
        "..#..",
        "..#..",
    });
    CHECK(!path_from_skeleton(ybranch).has_value());

    BinaryImage two = image_from_rows({
        "##...",
        ".....",
        "...##",
    });
    CHECK(!path_from_skeleton(two).has_value());

    BinaryImage single = image_from_rows({"...", ".#.", "..."});
    p = path_from_skeleton(single);
    REQUIRE(p.has_value());
    CHECK(p->length == 0.0);
    CHECK(p->pixels.size() == 1);
}

TEST_CASE("path arc length bounds") {
    std::mt19937_64 rng(5);
    // Random x-monotone staircases (E/NE/SE moves) are always valid strokes.
    for (int trial = 0; trial < 10; ++trial) {
        BinaryImage b(40, 40);
        int x = 1, y = 20;
        b.at(x, y) = 1;
        std::uniform_int_distribution<int> step(-1, 1);
        while (x < 38) {
            ++x;
            y = std::clamp(y + step(rng), 1, 38);
            b.at(x, y) = 1;
        }
        auto p = path_from_skeleton(b);
        REQUIRE(p.has_value());
        double n = double(p->pixels.size() - 1);
        CHECK(p->length >= n - 1e-9);
        CHECK(p->length <= n * std::sqrt(2.0) + 1e-9);
    }
}

TEST_CASE("region_iou: squares") {
    auto sq = [](double x0, double y0, double s) {
        return PolyRegion::from_rect(x0, y0, x0 + s, y0 + s);
    };
    CHECK(region_iou(sq(0, 0, 10), sq(0, 0, 10)) == doctest::Approx(1.0));
    CHECK(region_iou(sq(0, 0, 10), sq(50, 50, 10)) == 0.0);
    // Unit squares overlapping half: IoU = 1/3 exactly.
    CHECK(region_iou(sq(0, 0, 1), sq(0.5, 0, 1)) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("region_iou: symmetry, identity, range, masks") {
    PolyRegion a = PolyRegion::from_rect(2.25, 3.5, 9.75, 8.5);
    PolyRegion b = PolyRegion::from_rect(4.0, 2.0, 12.0, 7.0);
    double iab = region_iou(a, b), iba = region_iou(b, a);
    CHECK(iab == doctest::Approx(iba));
    CHECK(iab > 0.0);
    CHECK(iab < 1.0);
    CHECK(region_iou(a, a) == doctest::Approx(1.0));

    // Degenerate region.
    PolyRegion degen = PolyRegion::from_polygon({{0, 0}, {5, 0}, {10, 0}});
    CHECK(region_iou(degen, a) == 0.0);

    // Mask vs equivalent polygon: 4x4 pixel block == square polygon.
    std::vector<Pixel> px;
    for (int y = 4; y < 8; ++y)
        for (int x = 4; x < 8; ++x) px.push_back({x, y});
    PolyRegion mask = PolyRegion::from_mask(px);
    PolyRegion poly = PolyRegion::from_rect(3.5, 3.5, 7.5, 7.5);
    CHECK(region_iou(mask, poly) == doctest::Approx(1.0));
}
