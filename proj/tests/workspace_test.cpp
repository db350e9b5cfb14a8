#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <thread>
#include <vector>

#include "rops/workspace.hpp"

using namespace rops;

TEST_CASE("view counts reads and checks bounds") {
    std::vector<double> data{1, 2, 3};
    ReadOnlyView<double> v(data.data(), data.size());
    CHECK(v.size() == 3);
    CHECK(v.element(0) == 1);
    CHECK(v.element(2) == 3);
    CHECK(v.reads() == 2);
    CHECK(v.write_attempts() == 0);
    CHECK_THROWS_AS(v.element(3), Error);
    CHECK(v.reads() == 2);  // failed access is not a read
    v.reset_reads();
    CHECK(v.reads() == 0);
}

TEST_CASE("view read counter is safe under concurrent readers") {
    std::vector<double> data(1024, 1.0);
    ReadOnlyView<double> v(data.data(), data.size());
    std::vector<std::thread> ts;
    for (int t = 0; t < 4; ++t)
        ts.emplace_back([&] {
            for (std::size_t i = 0; i < data.size(); ++i) (void)v.element(i);
        });
    for (auto& t : ts) t.join();
    CHECK(v.reads() == 4 * 1024);
}

TEST_CASE("view_over_buffer validates alignment and length") {
    alignas(double) std::byte buf[4 * sizeof(double)];
    double vals[4] = {1, 2, 3, 4};
    std::memcpy(buf, vals, sizeof(vals));

    auto v = view_over_buffer<double>(std::span<const std::byte>(buf, sizeof(buf)));
    CHECK(v.size() == 4);
    CHECK(v.element(1) == 2);

    CHECK_THROWS_AS(view_over_buffer<double>(std::span<const std::byte>(buf, 3)), FormatError);
    CHECK_THROWS_AS(view_over_buffer<double>(std::span<const std::byte>(buf + 1, 2 * sizeof(double))),
                    FormatError);
}

TEST_CASE("meter tracks current and peak words") {
    WorkspaceMeter m;
    {
        MeterScope a(m, 10);
        CHECK(m.current_words() == 10);
        {
            MeterScope b(m, 5);
            CHECK(m.current_words() == 15);
            MeterScope c(std::move(b));
            CHECK(m.current_words() == 15);
        }
        CHECK(m.current_words() == 10);
    }
    CHECK(m.current_words() == 0);
    CHECK(m.peak_words() == 15);
}

TEST_CASE("bounded stack charges capacity and enforces it") {
    WorkspaceMeter m;
    {
        BoundedStack<double> s(3, m);
        CHECK(m.current_words() == 3);
        s.push(1);
        s.push(2);
        s.push(3);
        CHECK_THROWS_AS(s.push(4), CapacityError);
        CHECK(s.pop() == 3);
        CHECK(s.top() == 2);
        CHECK(s.size() == 2);
    }
    CHECK(m.current_words() == 0);

    WorkspaceMeter m2;
    BoundedStack<Point> sp(4, m2);
    CHECK(m2.current_words() == 4 * 2);  // a Point is two words
    CHECK_THROWS_AS(sp.pop(), Error);
}
