#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "rops/lp3d.hpp"
#include "rops/testkit.hpp"

using namespace rops;

namespace {

struct Run {
    Lp3Result res;
    Lp3Stats stats;
    Lp3Trace trace;
    std::size_t peak = 0;
    std::uint64_t reads = 0;
};

Run run_lp3(const std::vector<Constraint3>& rows, double d1, double d2, double d3) {
    ReadOnlyView<Constraint3> view(rows.data(), rows.size());
    WorkspaceMeter meter;
    Run r;
    r.res = solve_lp3(view, d1, d2, d3, meter, {}, &r.stats, &r.trace);
    CHECK(meter.current_words() == 0);
    CHECK(view.write_attempts() == 0);
    r.peak = meter.peak_words();
    r.reads = view.reads();
    return r;
}

bool satisfies(const std::vector<Constraint3>& rows, double x1, double x2, double x3) {
    for (const auto& c : rows) {
        double lhs = c.a * x1 + c.b * x2 + c.c * x3;
        double mag = std::fabs(c.a * x1) + std::fabs(c.b * x2) + std::fabs(c.c * x3) +
                     std::fabs(c.beta) + 1;
        if (lhs - c.beta > 1e-8 * mag) return false;
    }
    return true;
}

void check_against_oracle(const std::vector<Constraint3>& rows, double d1, double d2,
                          double d3) {
    Run r = run_lp3(rows, d1, d2, d3);
    auto orc = testkit::oracle_lp3(rows, d1, d2, d3);
    CHECK(r.stats.progress_ok);
    if (d1 == 0 && d2 == 0 && d3 == 0) {
        bool feas = orc.status != testkit::LpStatus::Infeasible;
        REQUIRE((r.res.status == LpVerdict::Optimal) == feas);
        if (feas) {
            CHECK(r.res.value == 0);
            CHECK(satisfies(rows, r.res.x1, r.res.x2, r.res.x3));
        }
        return;
    }
    switch (orc.status) {
        case testkit::LpStatus::Optimal:
            REQUIRE(r.res.status == LpVerdict::Optimal);
            CHECK(std::fabs(r.res.value - orc.value) <= 1e-8 * (1 + std::fabs(orc.value)));
            CHECK(satisfies(rows, r.res.x1, r.res.x2, r.res.x3));
            break;
        case testkit::LpStatus::Infeasible:
            REQUIRE(r.res.status == LpVerdict::Infeasible);
            break;
        case testkit::LpStatus::Unbounded:
            REQUIRE(r.res.status == LpVerdict::Unbounded);
            CHECK(satisfies(rows, r.res.x1, r.res.x2, r.res.x3));
            break;
    }
}

std::vector<Constraint3> gen_rows(std::uint64_t seed, std::size_t n, bool feasible,
                                  bool bounded) {
    testkit::Rng rng(seed);
    testkit::LpGenOptions o;
    o.ensure_feasible = feasible;
    o.ensure_bounded = bounded;
    return testkit::gen_lp3(rng, n, o);
}

// Integer-coefficient instances with the origin kept feasible and the
// variables boxed: maximum degeneracy with a guaranteed corner optimum.
std::vector<Constraint3> gen_boxed_int(std::uint64_t seed, std::size_t n) {
    testkit::Rng rng(seed);
    std::vector<Constraint3> rows;
    for (std::size_t i = 0; i < n; ++i) {
        double a = static_cast<double>(rng.range(-3, 3));
        double b = static_cast<double>(rng.range(-3, 3));
        double c = static_cast<double>(rng.range(-2, 2));
        if (a == 0 && b == 0 && c == 0) c = 1;
        rows.push_back({a, b, c, static_cast<double>(rng.range(1, 60))});
    }
    rows.push_back({1, 0, 0, 100});
    rows.push_back({-1, 0, 0, 100});
    rows.push_back({0, 1, 0, 100});
    rows.push_back({0, -1, 0, 100});
    rows.push_back({0, 0, 1, 100});
    rows.push_back({0, 0, -1, 100});
    return rows;
}

// Mark-bit reference for the round-log replay: one explicit alive list,
// re-paired per class per round; each pair is tested against every logged
// round up to the current one, earliest decision first.
std::vector<std::size_t> sim_round3(const std::vector<Constraint3>& rows, const Transform3& tf,
                                    const std::vector<std::size_t>& in, const Lp3Log& log,
                                    std::size_t upto) {
    std::vector<std::size_t> out;
    std::size_t pend[3] = {0, 0, 0};
    bool has[3] = {false, false, false};
    for (std::size_t idx : in) {
        TransRow3 t = tf.row(rows[idx], idx);
        int s = static_cast<int>(t.cls);
        if (!has[s]) {
            pend[s] = idx;
            has[s] = true;
            continue;
        }
        TransRow3 p = tf.row(rows[pend[s]], pend[s]);
        has[s] = false;
        int fate = 0;
        for (std::size_t r = 0; r <= upto && fate == 0; ++r)
            fate = pair_fate3(p, t, log.round(r));
        if (fate != 1) out.push_back(p.idx);
        if (fate != 2) out.push_back(t.idx);
    }
    for (int s = 0; s < 3; ++s)
        if (has[s]) out.push_back(pend[s]);
    return out;
}

}  // namespace

TEST_CASE("lp3 matches the vertex-enumeration reference") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        testkit::Rng rng(seed * 31);
        std::size_t n = 3 + static_cast<std::size_t>(rng.range(0, 200));
        auto rows = gen_rows(seed * 7 + 2, n, seed % 2 == 0, seed % 3 != 0);
        double d1 = static_cast<double>(rng.range(-20, 20));
        double d2 = static_cast<double>(rng.range(-20, 20));
        double d3 = static_cast<double>(rng.range(-20, 20));
        if (d1 == 0 && d2 == 0 && d3 == 0) d3 = 5;
        CAPTURE(seed);
        check_against_oracle(rows, d1, d2, d3);
    }
}

TEST_CASE("lp3 survives degenerate integer instances") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        auto rows = gen_boxed_int(seed * 17 + 3, 60 + 7 * seed);
        testkit::Rng rng(seed);
        double d1 = static_cast<double>(rng.range(-2, 2));
        double d2 = static_cast<double>(rng.range(-2, 2));
        double d3 = static_cast<double>(rng.range(-2, 2));
        if (d1 == 0 && d2 == 0 && d3 == 0) d3 = 1;
        CAPTURE(seed);
        check_against_oracle(rows, d1, d2, d3);
    }
}

TEST_CASE("lp3 pyramid, slab, and tiny instances") {
    // min x3 over the pyramid x3 >= |x1|, x3 >= |x2|: apex at the origin.
    std::vector<Constraint3> pyramid = {
        {1, 0, -1, 0}, {-1, 0, -1, 0}, {0, 1, -1, 0}, {0, -1, -1, 0}};
    Run r = run_lp3(pyramid, 0, 0, 1);
    REQUIRE(r.res.status == LpVerdict::Optimal);
    CHECK(std::fabs(r.res.value) <= 1e-12);
    CHECK(std::fabs(r.res.x1) <= 1e-9);
    CHECK(std::fabs(r.res.x2) <= 1e-9);

    // Forty copies of the same slab row: the objective slides off freely.
    std::vector<Constraint3> slab(40, Constraint3{1, 1, -1, 5});
    CHECK(run_lp3(slab, 0, 0, 1).res.status == LpVerdict::Unbounded);

    // Boxing two of the variables pins the corner.
    slab.push_back({-1, 0, 0, 3});
    slab.push_back({0, -1, 0, 3});
    Run boxed = run_lp3(slab, 0, 0, 1);
    REQUIRE(boxed.res.status == LpVerdict::Optimal);
    CHECK(std::fabs(boxed.res.value + 11) <= 1e-9);

    std::vector<Constraint3> contradiction = {{0, 0, 1, -1}, {0, 0, -1, -1}};
    CHECK(run_lp3(contradiction, 1, 1, 1).res.status == LpVerdict::Infeasible);

    std::vector<Constraint3> empty;
    CHECK(run_lp3(empty, 0, 0, 1).res.status == LpVerdict::Unbounded);
}

TEST_CASE("lp3 unbounded instances carry an improving witness") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        testkit::Rng rng(seed * 911);
        std::vector<Constraint3> rows;
        std::size_t n = 50 + static_cast<std::size_t>(rng.range(0, 150));
        for (std::size_t i = 0; i < n; ++i) {
            double a = static_cast<double>(rng.range(-2, 2));
            double b = static_cast<double>(rng.range(-2, 2));
            rows.push_back({a, b, 1, static_cast<double>(rng.range(1, 50))});
        }
        CAPTURE(seed);
        check_against_oracle(rows, 0.25, -0.5, 1);
    }
}

TEST_CASE("lp3 zero objective runs as a feasibility check") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        auto rows = gen_rows(seed * 13, 8 + seed * 5, seed % 2 == 0, true);
        CAPTURE(seed);
        check_against_oracle(rows, 0, 0, 0);
    }
}

TEST_CASE("lp3 rejects non-finite input") {
    std::vector<Constraint3> rows = {{1, 1, 1, 1}};
    ReadOnlyView<Constraint3> view(rows.data(), rows.size());
    WorkspaceMeter meter;
    CHECK_THROWS_AS(solve_lp3(view, std::numeric_limits<double>::quiet_NaN(), 0, 1, meter),
                    DomainError);

    std::vector<Constraint3> nan_row = {{1, 1, 1, std::numeric_limits<double>::infinity()}};
    ReadOnlyView<Constraint3> bad(nan_row.data(), nan_row.size());
    CHECK_THROWS_AS(solve_lp3(bad, 1, 1, 1, meter), DomainError);
}

TEST_CASE("lp3 round-log replay agrees with a mark-bit simulation") {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        testkit::Rng rng(seed);
        std::size_t n = 40 + static_cast<std::size_t>(rng.range(0, 472));
        auto rows = seed % 2 == 0 ? gen_boxed_int(seed * 3 + 1, n)
                                  : gen_rows(seed * 3 + 1, n, true, true);
        double d1 = static_cast<double>(rng.range(-20, 20));
        double d2 = static_cast<double>(rng.range(-20, 20));
        double d3 = static_cast<double>(rng.range(-20, 20));
        if (d1 == 0 && d2 == 0 && d3 == 0) d3 = 5;
        Run run = run_lp3(rows, d1, d2, d3);
        CAPTURE(seed);

        ReadOnlyView<Constraint3> view(rows.data(), rows.size());
        WorkspaceMeter meter;
        Transform3 tf(d1, d2, d3);
        Lp3Log log(run.trace, meter);

        std::vector<std::size_t> alive;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            RowClass3 cls = tf.row(rows[i], i).cls;
            if (cls != RowClass3::ZeroOk && cls != RowClass3::ZeroBad) alive.push_back(i);
        }
        for (std::size_t r = 0; r <= log.rounds(); ++r) {
            Valid3Cursor cur(view, tf, log, r);
            std::vector<std::size_t> got;
            TransRow3 t;
            while (cur.next(t)) got.push_back(t.idx);
            REQUIRE(got == alive);
            if (r == log.rounds()) break;
            alive = sim_round3(rows, tf, alive, log, r);
        }
    }
}

TEST_CASE("lp3 prunes every geometric round") {
    for (std::uint64_t seed : {5u, 23u, 41u}) {
        auto rows = gen_rows(seed, 2000, true, true);
        Run r = run_lp3(rows, 11, -4, 3);
        CHECK(r.res.status == LpVerdict::Optimal);
        CHECK(r.stats.progress_ok);
        CHECK(r.stats.rounds <= Lp3Log::cap_for(rows.size()));
        CHECK(r.stats.initial_valid <= rows.size());
    }
}

TEST_CASE("lp3 workspace stays logarithmic") {
    std::size_t prev_peak = 0;
    for (int e = 8; e <= 13; ++e) {
        std::size_t n = std::size_t(1) << e;
        auto rows = gen_rows(1700 + e, n, true, true);
        Run r = run_lp3(rows, 3, -2, 1);
        CHECK(r.res.status == LpVerdict::Optimal);
        CHECK(r.peak <= 60 * std::size_t(e) + 300);
        // Round counts are lumpy between sizes; allow slack per step.
        if (prev_peak) CHECK(r.peak <= prev_peak + 120);
        prev_peak = r.peak;
    }
}
