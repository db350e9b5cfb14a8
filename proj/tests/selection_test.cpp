#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "rops/selection.hpp"
#include "rops/testkit.hpp"

using namespace rops;

namespace {

double run_select(const std::vector<double>& data, std::size_t rank, std::size_t k,
                  WorkspaceMeter* meter_out = nullptr, std::uint64_t* reads_out = nullptr) {
    ReadOnlyView<double> view(data.data(), data.size());
    ScalarViewSequence seq(view);
    WorkspaceMeter meter;
    Keyed r = select_ak(seq, rank, SelectConfig{k}, meter);
    if (meter_out) *meter_out = meter;
    if (reads_out) *reads_out = view.reads();
    return r.value;
}

}  // namespace

TEST_CASE("selection matches sort-based reference across ranks and levels") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        testkit::Rng rng(seed);
        auto data = testkit::gen_values(rng, 97, /*dup_fraction=*/0.3);
        for (std::size_t k : {0u, 1u, 2u, 3u}) {
            for (std::size_t rank : {std::size_t(1), std::size_t(2), std::size_t(48),
                                     std::size_t(96), std::size_t(97)}) {
                CAPTURE(seed);
                CAPTURE(k);
                CAPTURE(rank);
                CHECK(run_select(data, rank, k) == testkit::oracle_select(data, rank));
            }
        }
    }
}

TEST_CASE("selection handles heavy duplicates and tiny inputs") {
    std::vector<double> ones(20, 7.0);
    for (std::size_t r = 1; r <= 20; ++r) CHECK(run_select(ones, r, 2) == 7.0);

    std::vector<double> single{42.0};
    CHECK(run_select(single, 1, 1) == 42.0);

    std::vector<double> two{5.0, -5.0};
    CHECK(run_select(two, 1, 3) == -5.0);
    CHECK(run_select(two, 2, 3) == 5.0);
}

TEST_CASE("selection rejects out-of-range ranks") {
    std::vector<double> data{1, 2, 3};
    ReadOnlyView<double> view(data.data(), data.size());
    ScalarViewSequence seq(view);
    WorkspaceMeter meter;
    CHECK_THROWS_AS(select_ak(seq, 0, SelectConfig{1}, meter), Error);
    CHECK_THROWS_AS(select_ak(seq, 4, SelectConfig{1}, meter), Error);
}

TEST_CASE("peak workspace stays within 16*(k+1) words") {
    testkit::Rng rng(11);
    auto data = testkit::gen_values(rng, 4096, 0.1);
    for (std::size_t k : {0u, 1u, 2u, 3u, 4u}) {
        WorkspaceMeter meter;
        run_select(data, data.size() / 3, k, &meter);
        CAPTURE(k);
        CHECK(meter.peak_words() <= 16 * (k + 1));
        CHECK(meter.current_words() == 0);
    }
}

TEST_CASE("read counts scale with the level parameter") {
    testkit::Rng rng(21);
    auto data = testkit::gen_values(rng, 20000, 0.0);
    std::size_t rank = data.size() / 2;

    // Median via repeated scans costs ~rank passes; one level of block
    // medians collapses that to roughly n^1.5.
    std::uint64_t reads1 = 0, reads2 = 0;
    run_select(data, rank, 1, nullptr, &reads1);
    run_select(data, rank, 2, nullptr, &reads2);
    double n = static_cast<double>(data.size());
    CHECK(reads1 >= data.size());
    CHECK(static_cast<double>(reads1) <= 40.0 * std::pow(n, 1.5));
    CHECK(reads2 >= data.size());
    CHECK(static_cast<double>(reads2) <= 40.0 * std::pow(n, 4.0 / 3.0));

    // Extreme ranks at level 0 cost only a couple of passes.
    std::uint64_t reads_min = 0;
    run_select(data, 1, 0, nullptr, &reads_min);
    CHECK(reads_min <= 3 * data.size());
    std::uint64_t reads_max = 0;
    run_select(data, data.size(), 0, nullptr, &reads_max);
    CHECK(reads_max <= 3 * data.size());
}

TEST_CASE("choose_k grows slowly") {
    CHECK(choose_k(1) == 1);
    CHECK(choose_k(1000) >= 1);
    CHECK(choose_k(1000000) == 2);
    CHECK(choose_k(1u << 30) >= 2);
    CHECK(choose_k(1u << 30) <= 4);
}
