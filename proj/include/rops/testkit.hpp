#pragma once
// Deterministic generators and reference implementations used by the tests,
// the bench harness, and the CLI's --oracle-check mode.  The oracles are
// allowed unrestricted working memory.

#include <cstdint>
#include <span>
#include <vector>

#include "rops/workspace.hpp"

namespace rops::testkit {

// splitmix64: tiny, well-mixed, and identical on every platform (the standard
// library distributions are implementation-defined, which would break
// byte-for-byte reproducibility of generated datasets).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    // uniform in [lo, hi] inclusive
    std::int64_t range(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(next() % static_cast<std::uint64_t>(hi - lo + 1));
    }
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  private:
    std::uint64_t state_;
};

// All generated coordinates/coefficients are integer-valued doubles with
// magnitude <= 2^24 so geometric predicates stay exact in double arithmetic.
inline constexpr std::int64_t kCoordBound = 1 << 24;

std::vector<double> gen_values(Rng& rng, std::size_t n, double dup_fraction = 0.0);

struct PointGenOptions {
    bool sorted_by_x = false;       // nondecreasing x (ties in arbitrary y order)
    double dup_x_fraction = 0.0;    // chance a point reuses the previous x
    double collinear_fraction = 0.0;  // chance a point lands on a fixed line
    std::int64_t coord_bound = kCoordBound;
};
std::vector<Point> gen_points(Rng& rng, std::size_t n, const PointGenOptions& opts = {});

struct LpGenOptions {
    bool ensure_feasible = false;  // constructs rows around a known interior point
    bool ensure_bounded = false;   // appends axis-aligned cap rows
    std::int64_t coeff_bound = 1 << 12;
};
std::vector<Constraint2> gen_lp2(Rng& rng, std::size_t n, const LpGenOptions& opts = {});
std::vector<Constraint3> gen_lp3(Rng& rng, std::size_t n, const LpGenOptions& opts = {});

double oracle_select(std::span<const double> vals, std::size_t rank /*1-based*/);

// Minimal convex hull, clockwise, starting at the topmost point of the
// leftmost column.  Collinear boundary points are dropped.
std::vector<Point> oracle_hull(std::span<const Point> pts);

enum class LpStatus { Optimal, Unbounded, Infeasible };

struct OracleLpResult {
    LpStatus status = LpStatus::Infeasible;
    double x[3] = {0, 0, 0};
    double value = 0;
};

OracleLpResult oracle_lp2(std::span<const Constraint2> rows, double c1, double c2);
OracleLpResult oracle_lp3(std::span<const Constraint3> rows, double c1, double c2, double c3);

std::uint64_t fnv1a(const void* data, std::size_t bytes);
template <class T>
std::uint64_t checksum(std::span<const T> v) {
    return fnv1a(v.data(), v.size() * sizeof(T));
}

}  // namespace rops::testkit
