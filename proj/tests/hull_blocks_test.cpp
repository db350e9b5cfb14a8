#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "rops/hull_blocks.hpp"
#include "rops/testkit.hpp"

using namespace rops;

namespace {

struct Run {
    std::vector<Point> hull;
    HullBlocksStats stats;
    std::size_t peak = 0;
};

Run run_unsorted(const std::vector<Point>& pts, const HullBlocksConfig& cfg = {}) {
    ReadOnlyView<Point> view(pts.data(), pts.size());
    WorkspaceMeter meter;
    Run r;
    hull_unsorted(view, [&](Point p) { r.hull.push_back(p); }, meter, cfg, &r.stats);
    CHECK(meter.current_words() == 0);
    CHECK(view.write_attempts() == 0);
    r.peak = meter.peak_words();
    return r;
}

std::vector<Point> cloud(std::uint64_t seed, std::size_t n, double dup_x, double coll,
                         std::int64_t bound = 1 << 20) {
    testkit::Rng rng(seed);
    testkit::PointGenOptions po;
    po.dup_x_fraction = dup_x;
    po.collinear_fraction = coll;
    po.coord_bound = bound;
    return testkit::gen_points(rng, n, po);
}

bool same_hull(const std::vector<Point>& a, const std::vector<Point>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!(a[i] == b[i])) return false;
    return true;
}

}  // namespace

TEST_CASE("unsorted hull matches reference across shapes and seeds") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        std::size_t n = 1 + (seed * 53) % 600;
        double dup = (seed % 3) * 0.3;
        double coll = (seed % 5 == 0) ? 0.6 : 0.0;
        std::int64_t bound = seed % 4 == 0 ? 30 : (1 << 20);
        auto pts = cloud(seed, n, dup, coll, bound);
        Run r = run_unsorted(pts);
        auto want = testkit::oracle_hull(pts);
        CAPTURE(seed);
        CAPTURE(n);
        CHECK(same_hull(r.hull, want));
        CHECK(r.stats.recomputations <= r.stats.erasures);
    }
}

TEST_CASE("unsorted hull with per-boundary selection path") {
    HullBlocksConfig cfg;
    cfg.batched_boundaries = false;
    for (std::uint64_t seed = 2; seed <= 20; seed += 3) {
        auto pts = cloud(seed * 101, 300 + seed * 11, 0.2, 0.0);
        Run r = run_unsorted(pts, cfg);
        CHECK(same_hull(r.hull, testkit::oracle_hull(pts)));
    }
}

TEST_CASE("unsorted hull degenerate inputs") {
    CHECK(run_unsorted({}).hull.empty());

    std::vector<Point> one = {{3, 4}};
    CHECK(same_hull(run_unsorted(one).hull, one));

    std::vector<Point> same(37, Point{-2, 9});
    CHECK(run_unsorted(same).hull.size() == 1);

    std::vector<Point> segment;
    for (int i = 0; i < 64; ++i) segment.push_back({static_cast<double>(i % 8), 0});
    auto seg = run_unsorted(segment);
    CHECK(same_hull(seg.hull, testkit::oracle_hull(segment)));

    std::vector<Point> vertical;
    for (int i = 0; i < 50; ++i) vertical.push_back({1, static_cast<double>(i % 5)});
    CHECK(same_hull(run_unsorted(vertical).hull, testkit::oracle_hull(vertical)));

    // Hull entirely determined by four corners buried in noise.
    auto pts = cloud(99, 500, 0.0, 0.0, 100);
    pts.push_back({-4000, -4000});
    pts.push_back({-4000, 4000});
    pts.push_back({4000, 4000});
    pts.push_back({4000, -4000});
    CHECK(run_unsorted(pts).hull.size() == 4);
}

TEST_CASE("unsorted hull workspace tracks the square root of n") {
    for (int e = 4; e <= 7; ++e) {
        std::size_t n = 1;
        for (int i = 0; i < e; ++i) n *= 4;
        auto pts = cloud(400 + e, n, 0.1, 0.0);
        Run r = run_unsorted(pts);
        CHECK(same_hull(r.hull, testkit::oracle_hull(pts)));
        double root = std::sqrt(static_cast<double>(n));
        CHECK(static_cast<double>(r.peak) <= 32.0 * root);
        CHECK(r.stats.recomputations <= r.stats.erasures);
    }
}

TEST_CASE("upper chain alone agrees with the reference upper chain") {
    for (std::uint64_t seed : {7u, 19u, 31u}) {
        auto pts = cloud(seed, 400, 0.3, 0.3);
        std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
            return a.x != b.x ? a.x < b.x : a.y < b.y;
        });
        ReadOnlyView<Point> view(pts.data(), pts.size());
        SortedPointView spv(view);
        WorkspaceMeter meter;
        std::vector<Point> got;
        hull_blocks_upper(spv, [&](Point p) { got.push_back(p); }, meter);
        CHECK(meter.current_words() == 0);

        auto full = testkit::oracle_hull(pts);
        // The reference walks clockwise from the top-left vertex, so its
        // upper chain is the prefix ending at the rightmost point.
        std::vector<Point> want;
        for (const Point& p : full) {
            want.push_back(p);
            if (p.x == pts.back().x) break;
        }
        CAPTURE(seed);
        CHECK(same_hull(got, want));
    }
}
