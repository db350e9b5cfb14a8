#include "rops/testkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

namespace rops::testkit {

std::vector<double> gen_values(Rng& rng, std::size_t n, double dup_fraction) {
    std::vector<double> v;
    v.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0 && rng.unit() < dup_fraction) {
            v.push_back(v[rng.next() % i]);
        } else {
            v.push_back(static_cast<double>(rng.range(-kCoordBound, kCoordBound)));
        }
    }
    return v;
}

std::vector<Point> gen_points(Rng& rng, std::size_t n, const PointGenOptions& opts) {
    std::vector<Point> pts;
    pts.reserve(n);
    const std::int64_t cb = opts.coord_bound;
    // Fixed line for the collinear fraction: integer anchor and direction,
    // parameter range chosen so points stay within the coordinate bound.
    std::int64_t ax = rng.range(-cb / 4, cb / 4), ay = rng.range(-cb / 4, cb / 4);
    std::int64_t dx = rng.range(-64, 64), dy = rng.range(-64, 64);
    if (dx == 0 && dy == 0) dx = 1;
    std::int64_t tmax = cb / 2 / std::max<std::int64_t>(1, std::max(std::abs(dx), std::abs(dy)));
    for (std::size_t i = 0; i < n; ++i) {
        Point p;
        if (rng.unit() < opts.collinear_fraction) {
            std::int64_t t = rng.range(-tmax, tmax);
            p = {static_cast<double>(ax + t * dx), static_cast<double>(ay + t * dy)};
        } else {
            p = {static_cast<double>(rng.range(-cb, cb)), static_cast<double>(rng.range(-cb, cb))};
        }
        if (i > 0 && rng.unit() < opts.dup_x_fraction) p.x = pts.back().x;
        pts.push_back(p);
    }
    if (opts.sorted_by_x)
        std::stable_sort(pts.begin(), pts.end(),
                         [](const Point& a, const Point& b) { return a.x < b.x; });
    return pts;
}

std::vector<Constraint2> gen_lp2(Rng& rng, std::size_t n, const LpGenOptions& opts) {
    std::vector<Constraint2> rows;
    rows.reserve(n + 4);
    const std::int64_t cb = opts.coeff_bound;
    double ix = 0, iy = 0;
    if (opts.ensure_feasible) {
        ix = static_cast<double>(rng.range(-cb, cb));
        iy = static_cast<double>(rng.range(-cb, cb));
    }
    for (std::size_t i = 0; i < n; ++i) {
        double a = static_cast<double>(rng.range(-cb, cb));
        double b = static_cast<double>(rng.range(-cb, cb));
        double beta;
        if (opts.ensure_feasible) {
            beta = a * ix + b * iy + static_cast<double>(rng.range(0, cb * cb));
        } else {
            beta = static_cast<double>(rng.range(-cb * cb, cb * cb));
        }
        rows.push_back({a, b, beta});
    }
    if (opts.ensure_bounded) {
        double cap = static_cast<double>(kCoordBound) * 4;
        if (opts.ensure_feasible) cap += std::abs(ix) + std::abs(iy);
        rows.push_back({1, 0, cap});
        rows.push_back({-1, 0, cap});
        rows.push_back({0, 1, cap});
        rows.push_back({0, -1, cap});
    }
    return rows;
}

std::vector<Constraint3> gen_lp3(Rng& rng, std::size_t n, const LpGenOptions& opts) {
    std::vector<Constraint3> rows;
    rows.reserve(n + 6);
    const std::int64_t cb = opts.coeff_bound;
    double ip[3] = {0, 0, 0};
    if (opts.ensure_feasible)
        for (double& c : ip) c = static_cast<double>(rng.range(-cb, cb));
    for (std::size_t i = 0; i < n; ++i) {
        double a = static_cast<double>(rng.range(-cb, cb));
        double b = static_cast<double>(rng.range(-cb, cb));
        double c = static_cast<double>(rng.range(-cb, cb));
        double beta;
        if (opts.ensure_feasible) {
            beta = a * ip[0] + b * ip[1] + c * ip[2] + static_cast<double>(rng.range(0, cb * cb));
        } else {
            beta = static_cast<double>(rng.range(-cb * cb, cb * cb));
        }
        rows.push_back({a, b, c, beta});
    }
    if (opts.ensure_bounded) {
        double cap = static_cast<double>(kCoordBound) * 4;
        if (opts.ensure_feasible) cap += std::abs(ip[0]) + std::abs(ip[1]) + std::abs(ip[2]);
        for (int axis = 0; axis < 3; ++axis)
            for (int sign : {1, -1}) {
                Constraint3 r{0, 0, 0, cap};
                (axis == 0 ? r.a : axis == 1 ? r.b : r.c) = static_cast<double>(sign);
                rows.push_back(r);
            }
    }
    return rows;
}

double oracle_select(std::span<const double> vals, std::size_t rank) {
    std::vector<double> copy(vals.begin(), vals.end());
    std::nth_element(copy.begin(), copy.begin() + (rank - 1), copy.end());
    return copy[rank - 1];
}

namespace {

double cross(const Point& o, const Point& a, const Point& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

}  // namespace

std::vector<Point> oracle_hull(std::span<const Point> pts_in) {
    std::vector<Point> pts(pts_in.begin(), pts_in.end());
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.empty()) return {};
    if (pts.size() == 1) return pts;

    // One representative per x-column for each chain: the topmost point can
    // carry the upper hull, the bottommost the lower hull.
    std::vector<Point> tops, bots;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (bots.empty() || bots.back().x != pts[i].x) bots.push_back(pts[i]);
        if (!tops.empty() && tops.back().x == pts[i].x)
            tops.back() = pts[i];
        else
            tops.push_back(pts[i]);
    }
    // Strictly convex chains (clockwise traversal => strict right turns only).
    auto chain = [](const std::vector<Point>& src, bool reversed) {
        std::vector<Point> h;
        auto feed = [&](const Point& p) {
            while (h.size() >= 2 && cross(h[h.size() - 2], h.back(), p) >= 0) h.pop_back();
            h.push_back(p);
        };
        if (reversed)
            for (auto it = src.rbegin(); it != src.rend(); ++it) feed(*it);
        else
            for (const Point& p : src) feed(p);
        return h;
    };
    std::vector<Point> upper = chain(tops, false);
    std::vector<Point> lower = chain(bots, true);

    std::vector<Point> hull = upper;
    for (const Point& p : lower) {
        if (p == hull.back() || p == hull.front()) continue;
        hull.push_back(p);
    }
    return hull;
}

namespace {

// Far beyond any true vertex: integer data keeps genuine vertex coordinates
// below ~2^38 (bounded numerators over a nonzero integer determinant).
constexpr double kBox = 0x1.0p44;

bool feasible2(std::span<const Constraint2> rows, double x, double y) {
    if (std::abs(x) > kBox * 1.01 || std::abs(y) > kBox * 1.01) return false;
    for (const auto& r : rows) {
        double lhs = r.a * x + r.b * y;
        // Term magnitudes, not the (possibly cancelled) sum, set the noise floor.
        double mag = std::abs(r.a * x) + std::abs(r.b * y) + std::abs(r.beta) + 1;
        if (lhs - r.beta > 1e-9 * mag) return false;
    }
    return true;
}

bool feasible3(std::span<const Constraint3> rows, const double* p) {
    for (int i = 0; i < 3; ++i)
        if (std::abs(p[i]) > kBox * 1.01) return false;
    for (const auto& r : rows) {
        double lhs = r.a * p[0] + r.b * p[1] + r.c * p[2];
        double mag = std::abs(r.a * p[0]) + std::abs(r.b * p[1]) + std::abs(r.c * p[2]) +
                     std::abs(r.beta) + 1;
        if (lhs - r.beta > 1e-9 * mag) return false;
    }
    return true;
}

}  // namespace

OracleLpResult oracle_lp2(std::span<const Constraint2> rows, double c1, double c2) {
    // Vertex enumeration over the problem rows plus a huge bounding box; an
    // optimum sitting on the box means the true problem is unbounded.
    std::vector<Constraint2> all(rows.begin(), rows.end());
    all.push_back({1, 0, kBox});
    all.push_back({-1, 0, kBox});
    all.push_back({0, 1, kBox});
    all.push_back({0, -1, kBox});

    OracleLpResult best;
    bool have = false;
    for (std::size_t i = 0; i < all.size(); ++i)
        for (std::size_t j = i + 1; j < all.size(); ++j) {
            double det = all[i].a * all[j].b - all[j].a * all[i].b;
            double scale = std::abs(all[i].a * all[j].b) + std::abs(all[j].a * all[i].b) + 1e-300;
            if (std::abs(det) <= 1e-12 * scale) continue;
            double x = (all[i].beta * all[j].b - all[j].beta * all[i].b) / det;
            double y = (all[i].a * all[j].beta - all[j].a * all[i].beta) / det;
            double obj = c1 * x + c2 * y;
            if (have && obj >= best.value) continue;
            if (!feasible2(rows, x, y) ||
                std::abs(x) > kBox * (1 + 1e-9) || std::abs(y) > kBox * (1 + 1e-9))
                continue;
            best.value = obj;
            best.x[0] = x;
            best.x[1] = y;
            have = true;
        }
    if (!have) {
        best.status = LpStatus::Infeasible;
        return best;
    }
    best.status = (std::max(std::abs(best.x[0]), std::abs(best.x[1])) > kBox / 4)
                      ? LpStatus::Unbounded
                      : LpStatus::Optimal;
    return best;
}

OracleLpResult oracle_lp3(std::span<const Constraint3> rows, double c1, double c2, double c3) {
    std::vector<Constraint3> all(rows.begin(), rows.end());
    for (int axis = 0; axis < 3; ++axis)
        for (int sign : {1, -1}) {
            Constraint3 r{0, 0, 0, kBox};
            (axis == 0 ? r.a : axis == 1 ? r.b : r.c) = static_cast<double>(sign);
            all.push_back(r);
        }

    OracleLpResult best;
    bool have = false;
    const std::size_t m = all.size();
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
            for (std::size_t k = j + 1; k < m; ++k) {
                const auto &A = all[i], &B = all[j], &C = all[k];
                double det = A.a * (B.b * C.c - C.b * B.c) - A.b * (B.a * C.c - C.a * B.c) +
                             A.c * (B.a * C.b - C.a * B.b);
                double mag = std::abs(A.a) + std::abs(A.b) + std::abs(A.c);
                mag *= (std::abs(B.a) + std::abs(B.b) + std::abs(B.c)) *
                       (std::abs(C.a) + std::abs(C.b) + std::abs(C.c));
                if (std::abs(det) <= 1e-12 * (mag + 1e-300)) continue;
                double p[3];
                p[0] = (A.beta * (B.b * C.c - C.b * B.c) - A.b * (B.beta * C.c - C.beta * B.c) +
                        A.c * (B.beta * C.b - C.beta * B.b)) /
                       det;
                p[1] = (A.a * (B.beta * C.c - C.beta * B.c) - A.beta * (B.a * C.c - C.a * B.c) +
                        A.c * (B.a * C.beta - C.a * B.beta)) /
                       det;
                p[2] = (A.a * (B.b * C.beta - C.b * B.beta) - A.b * (B.a * C.beta - C.a * B.beta) +
                        A.beta * (B.a * C.b - C.a * B.b)) /
                       det;
                double obj = c1 * p[0] + c2 * p[1] + c3 * p[2];
                if (have && obj >= best.value) continue;
                bool inbox = true;
                for (double c : p)
                    if (std::abs(c) > kBox * (1 + 1e-9)) inbox = false;
                if (!inbox || !feasible3(rows, p)) continue;
                best.value = obj;
                best.x[0] = p[0];
                best.x[1] = p[1];
                best.x[2] = p[2];
                have = true;
            }
    if (!have) {
        best.status = LpStatus::Infeasible;
        return best;
    }
    double mx = std::max({std::abs(best.x[0]), std::abs(best.x[1]), std::abs(best.x[2])});
    best.status = mx > kBox / 4 ? LpStatus::Unbounded : LpStatus::Optimal;
    return best;
}

std::uint64_t fnv1a(const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::size_t i = 0; i < bytes; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace rops::testkit
