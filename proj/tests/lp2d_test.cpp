#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "rops/lp2d.hpp"
#include "rops/testkit.hpp"

using namespace rops;

namespace {

struct Run {
    Lp2Result res;
    Lp2Stats stats;
    Lp2Trace trace;
    std::size_t peak = 0;
    std::uint64_t reads = 0;
};

Run run_lp2(const std::vector<Constraint2>& rows, double c1, double c2) {
    ReadOnlyView<Constraint2> view(rows.data(), rows.size());
    WorkspaceMeter meter;
    Run r;
    r.res = solve_lp2(view, c1, c2, meter, {}, &r.stats, &r.trace);
    CHECK(meter.current_words() == 0);
    CHECK(view.write_attempts() == 0);
    r.peak = meter.peak_words();
    r.reads = view.reads();
    return r;
}

bool satisfies(const std::vector<Constraint2>& rows, double x1, double x2) {
    for (const auto& c : rows) {
        double lhs = c.a * x1 + c.b * x2;
        double mag = std::fabs(c.a * x1) + std::fabs(c.b * x2) + std::fabs(c.beta) + 1;
        if (lhs - c.beta > 1e-9 * mag) return false;
    }
    return true;
}

void check_against_oracle(const std::vector<Constraint2>& rows, double c1, double c2) {
    Run r = run_lp2(rows, c1, c2);
    auto orc = testkit::oracle_lp2(rows, c1, c2);
    CHECK(r.stats.progress_ok);
    if (c1 == 0 && c2 == 0) {
        bool feas = orc.status != testkit::LpStatus::Infeasible;
        REQUIRE((r.res.status == LpVerdict::Optimal) == feas);
        if (feas) {
            CHECK(r.res.value == 0);
            CHECK(satisfies(rows, r.res.x1, r.res.x2));
        }
        return;
    }
    switch (orc.status) {
        case testkit::LpStatus::Optimal:
            REQUIRE(r.res.status == LpVerdict::Optimal);
            CHECK(std::fabs(r.res.value - orc.value) <= 1e-9 * (1 + std::fabs(orc.value)));
            break;
        case testkit::LpStatus::Infeasible:
            REQUIRE(r.res.status == LpVerdict::Infeasible);
            break;
        case testkit::LpStatus::Unbounded:
            REQUIRE(r.res.status == LpVerdict::Unbounded);
            CHECK(satisfies(rows, r.res.x1, r.res.x2));
            break;
    }
}

// Mark-bit reference for the round-log replay: one explicit alive list,
// re-paired per round with the same leftover discipline as the cursor.
std::vector<std::size_t> sim_round(const std::vector<Constraint2>& rows, const Transform2& tf,
                                   const std::vector<std::size_t>& in, double lo, double hi,
                                   bool decided, double xm, bool right) {
    std::vector<std::size_t> out;
    std::size_t pend[2] = {0, 0};
    bool has[2] = {false, false};
    for (std::size_t idx : in) {
        TransRow t = tf.row(rows[idx], idx);
        int s = t.cls == RowClass::Lower ? 0 : 1;
        if (!has[s]) {
            pend[s] = idx;
            has[s] = true;
            continue;
        }
        TransRow p = tf.row(rows[pend[s]], pend[s]);
        has[s] = false;
        int fate = pair_fate2(p, t, lo, hi, decided, xm, right);
        if (fate != 1) out.push_back(p.idx);
        if (fate != 2) out.push_back(t.idx);
    }
    if (has[0]) out.push_back(pend[0]);
    if (has[1]) out.push_back(pend[1]);
    return out;
}

std::vector<Constraint2> gen_rows(std::uint64_t seed, std::size_t n, bool feasible,
                                  bool bounded) {
    testkit::Rng rng(seed);
    testkit::LpGenOptions o;
    o.ensure_feasible = feasible;
    o.ensure_bounded = bounded;
    return testkit::gen_lp2(rng, n, o);
}

}  // namespace

TEST_CASE("lp2 matches the vertex-enumeration reference") {
    for (std::uint64_t seed = 1; seed <= 120; ++seed) {
        testkit::Rng rng(seed);
        std::size_t n = 3 + static_cast<std::size_t>(rng.range(0, 300));
        auto rows = gen_rows(seed * 31 + 7, n, seed % 3 != 0, seed % 4 != 0);
        double c1 = static_cast<double>(rng.range(-50, 50));
        double c2 = static_cast<double>(rng.range(-50, 50));
        CAPTURE(seed);
        check_against_oracle(rows, c1, c2);
    }
}

TEST_CASE("lp2 tiny and unbounded instances agree with the reference") {
    for (std::uint64_t seed = 1; seed <= 300; ++seed) {
        testkit::Rng rng(seed);
        std::size_t n = 1 + static_cast<std::size_t>(rng.range(0, 6));
        auto rows = gen_rows(seed * 17 + 3, n, seed % 2 == 0, false);
        double c1 = static_cast<double>(rng.range(-9, 9));
        double c2 = static_cast<double>(rng.range(-9, 9));
        CAPTURE(seed);
        check_against_oracle(rows, c1, c2);
    }
}

TEST_CASE("lp2 degenerate objectives run as feasibility checks") {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        auto rows = gen_rows(seed, 60, seed % 2 == 0, false);
        CAPTURE(seed);
        check_against_oracle(rows, 0, 0);
    }
}

TEST_CASE("lp2 handles verticals, zero rows, and bad input") {
    // Verticals only: feasible band, flat objective along x2.
    std::vector<Constraint2> band{{1, 0, 5}, {-1, 0, 5}, {0, 0, 1}};
    Run r = run_lp2(band, 1, 0);
    CHECK(r.res.status == LpVerdict::Optimal);
    CHECK(r.res.value == doctest::Approx(-5).epsilon(1e-12));

    // Contradictory verticals.
    std::vector<Constraint2> empty{{1, 0, -1}, {-1, 0, -1}};
    CHECK(run_lp2(empty, 1, 1).res.status == LpVerdict::Infeasible);

    // A zero row with positive slack is vacuous; with negative slack, fatal.
    std::vector<Constraint2> vac{{0, 0, 3}, {1, 1, 10}, {-1, 0, 0}, {0, -1, 0}};
    CHECK(run_lp2(vac, 1, 1).res.status == LpVerdict::Optimal);
    std::vector<Constraint2> fatal{{0, 0, -3}, {1, 1, 10}};
    CHECK(run_lp2(fatal, 1, 1).res.status == LpVerdict::Infeasible);

    std::vector<Constraint2> nan_row{{std::numeric_limits<double>::quiet_NaN(), 1, 0}};
    ReadOnlyView<Constraint2> view(nan_row.data(), nan_row.size());
    WorkspaceMeter meter;
    CHECK_THROWS_AS(solve_lp2(view, 1, 1, meter), DomainError);
}

TEST_CASE("lp2 round-log replay agrees with a mark-bit simulation") {
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        testkit::Rng rng(seed);
        std::size_t n = 8 + static_cast<std::size_t>(rng.range(0, 500));
        auto rows = gen_rows(seed * 13 + 1, n, seed % 2 == 0, seed % 3 != 0);
        double c1 = static_cast<double>(rng.range(-20, 20));
        double c2 = static_cast<double>(rng.range(-20, 20));
        Run run = run_lp2(rows, c1, c2);
        CAPTURE(seed);

        ReadOnlyView<Constraint2> view(rows.data(), rows.size());
        WorkspaceMeter meter;
        Transform2 tf(c1, c2);
        Lp2Log log(run.trace, meter);

        std::vector<std::size_t> alive;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            RowClass cls = tf.row(rows[i], i).cls;
            if (cls == RowClass::Lower || cls == RowClass::Upper) alive.push_back(i);
        }
        for (std::size_t r = 0; r <= log.rounds(); ++r) {
            ValidRowCursor<Span2View> cur(Span2View{&view}, tf, log, r);
            std::vector<std::size_t> got;
            TransRow t;
            while (cur.next(t)) got.push_back(t.idx);
            REQUIRE(got == alive);
            if (r == log.rounds()) break;
            double lo, hi;
            log.interval(r, lo, hi);
            alive = sim_round(rows, tf, alive, lo, hi, log.decided(r), log.xm(r), log.right(r));
        }
    }
}

TEST_CASE("lp2 logged intervals are nested") {
    for (std::uint64_t seed : {3u, 11u, 29u}) {
        auto rows = gen_rows(seed, 400, true, true);
        Run run = run_lp2(rows, 7, -3);
        WorkspaceMeter meter;
        Lp2Log log(run.trace, meter);
        double plo, phi;
        log.interval(0, plo, phi);
        for (std::size_t r = 1; r <= log.rounds(); ++r) {
            double lo, hi;
            log.interval(r, lo, hi);
            CHECK(lo >= plo);
            CHECK(hi <= phi);
            CHECK(lo <= hi);
            plo = lo;
            phi = hi;
        }
    }
}

TEST_CASE("lp2 workspace stays logarithmic") {
    std::size_t prev_peak = 0;
    for (int e = 10; e <= 16; e += 3) {
        std::size_t n = std::size_t(1) << e;
        auto rows = gen_rows(77 + e, n, true, true);
        Run r = run_lp2(rows, 13, 9);
        CHECK(r.res.status == LpVerdict::Optimal);
        CHECK(r.peak <= 40 * std::size_t(e) + 120);
        // Round counts vary a little between sizes; allow slack per step.
        if (prev_peak) CHECK(r.peak <= prev_peak + 60 * 3);
        prev_peak = r.peak;
    }
}
