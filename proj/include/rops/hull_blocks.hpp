#pragma once

#include <cmath>
#include <cstddef>
#include <functional>

#include "rops/hull_sorted.hpp"
#include "rops/workspace.hpp"

namespace rops {

// Composite order key: (x, y, original index).  Total order over any point
// set, so rank-space blocks partition the input even with duplicate points.
struct PointKey {
    double x = 0.0;
    double y = 0.0;
    double idx = 0.0;

    friend bool operator<(const PointKey& a, const PointKey& b) {
        if (a.x != b.x) return a.x < b.x;
        if (a.y != b.y) return a.y < b.y;
        return a.idx < b.idx;
    }
    friend bool operator==(const PointKey& a, const PointKey& b) = default;
};

struct BlockLayout {
    std::size_t n = 0;
    std::size_t block = 0;   // s = ceil(sqrt(n))
    std::size_t blocks = 0;  // B = ceil(n / s)

    explicit BlockLayout(std::size_t n_) : n(n_) {
        block = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
        if (block == 0) block = 1;
        blocks = (n + block - 1) / block;
    }

    // 1-based composite rank of the upper boundary of block j-1 / lower
    // boundary of block j.  j == 0 means "no lower bound".
    std::size_t boundary_rank(std::size_t j) const {
        std::size_t r = j * block;
        return r < n ? r : n;
    }
};

struct HullBlocksConfig {
    std::size_t select_k = 1;        // memory level used for per-boundary selections
    bool batched_boundaries = true;  // prefill boundary keys via multiselect at large n
};

struct HullBlocksStats {
    std::size_t block_loads = 0;     // total load/sort of a block (both passes)
    std::size_t recomputations = 0;  // pass-1 reloads forced by tangent walk-back
    std::size_t erasures = 0;        // directory entries zeroed
};

// Full convex hull, clockwise from the lexicographically smallest x among the
// topmost points.  Input need not be sorted.  Peak workspace is O(sqrt(n)).
void hull_unsorted(const ReadOnlyView<Point>& view, const std::function<void(Point)>& emit,
                   WorkspaceMeter& meter, const HullBlocksConfig& cfg = {},
                   HullBlocksStats* stats = nullptr);

// Upper chain only, left to right, over the given adapter (used by tests to
// check the pass-1 invariants directly).
void hull_blocks_upper(const SortedPointView& pts, const std::function<void(Point)>& emit,
                       WorkspaceMeter& meter, const HullBlocksConfig& cfg = {},
                       HullBlocksStats* stats = nullptr);

}  // namespace rops
