#pragma once
// Upper/convex hull of x-sorted points in O(log n) working words.
//
// The recursion finds one hull edge ("bridge") across a median x-boundary,
// then recurses on both sides.  A bridge computation never stores the
// surviving candidate set: it keeps a per-round log of (median slope,
// direction bit) and re-derives which points are still alive by replaying the
// pairing/pruning decisions from the log.  All slope and support comparisons
// are exact for integer-valued coordinates below 2^25 (cross-multiplied
// products stay under 2^53).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "rops/selection.hpp"
#include "rops/workspace.hpp"

namespace rops {

inline constexpr std::size_t npos = static_cast<std::size_t>(-1);

// Slope of a candidate pair as an exact rational; dx == 0 marks a vertical
// pair, ordered after every finite slope.  tie is the pair id (index of the
// earlier member), making the order total.
struct SlopeRec {
    double dy = 0, dx = 0;
    double tie = 0;
};

bool slope_less(const SlopeRec& a, const SlopeRec& b);
inline bool operator<(const SlopeRec& a, const SlopeRec& b) { return slope_less(a, b); }
inline bool operator==(const SlopeRec& a, const SlopeRec& b) {
    return !slope_less(a, b) && !slope_less(b, a);
}

// x-sorted access to the input, optionally rotated by 180 degrees and
// reversed (which is again x-sorted and turns lower hulls into upper hulls).
class SortedPointView {
  public:
    explicit SortedPointView(const ReadOnlyView<Point>& v, bool rotated = false)
        : view_(&v), rotated_(rotated) {}
    std::size_t size() const { return view_->size(); }
    Point point(std::size_t i) const {
        if (!rotated_) return view_->element(i);
        Point p = view_->element(view_->size() - 1 - i);
        return {-p.x, -p.y};
    }
    void validate() const;  // throws DomainError on NaN/inf or unsorted x
  private:
    const ReadOnlyView<Point>* view_;
    bool rotated_;
};

// Per-round decisions of one bridge computation.  Capacity covers the
// geometric shrink of the candidate set plus slack for the small-count tail.
class BridgeLog {
  public:
    BridgeLog(std::size_t n, WorkspaceMeter& meter);
    void reset() {
        m_.clear();
        b_.clear();
    }
    std::size_t rounds() const { return m_.size(); }
    std::size_t capacity() const { return cap_; }
    void append(const SlopeRec& med, bool bit);
    const SlopeRec& median(std::size_t r) const { return m_[r]; }
    bool bit(std::size_t r) const { return b_[r] != 0; }

  private:
    std::size_t cap_;
    std::vector<SlopeRec> m_;
    std::vector<std::uint8_t> b_;
    MeterScope charge_;
};

// Streams the candidate pairs of the current round by replaying all logged
// rounds over the raw index range.  One parking slot per level holds the
// first member of a forming pair; a pair whose fate is "both survive" sends
// its members up one level in order via a small pending stack.
//
// Copyable by design: the median-selection wrapper snapshots the cursor to
// make repeated restarts at one position cheap.  The owner is responsible
// for metering state_words().
class ValidPairCursor {
  public:
    ValidPairCursor(const SortedPointView& pts, std::size_t start, std::size_t end,
                    const BridgeLog& log);
    static std::size_t state_words(const BridgeLog& log) {
        return 3 * (log.capacity() + 2) + 8;
    }
    void restart();
    bool next(std::size_t& a, std::size_t& b);
    std::size_t pairs_emitted() const { return emitted_; }
    // unpaired last survivor; meaningful once next() has returned false
    std::size_t leftover() const { return leftover_; }

  private:
    struct Item {
        std::size_t idx, level;
    };
    bool climb(std::size_t i, std::size_t level, std::size_t& a, std::size_t& b);

    const SortedPointView* pts_;
    const BridgeLog* log_;
    std::size_t start_, end_;
    std::size_t base_ = 0, flush_ = 0, emitted_ = 0, leftover_ = npos;
    bool done_ = false;
    std::vector<std::size_t> park_;
    std::vector<Item> pending_;
};

struct Bridge {
    std::size_t a = npos, b = npos;
};

struct HullConfig {
    std::size_t select_k = 1;      // selection levels used for slope medians
    bool validate_sorted = false;  // check sortedness/finiteness up front
};

// Test instrumentation (observer memory, not algorithm workspace).
struct BridgeStats {
    std::vector<std::size_t> pair_counts;   // c_t at the start of each round
    std::vector<std::size_t> valid_counts;  // 2*c_t + parity leftover
    std::size_t rounds = 0;                 // prune rounds actually logged
    int finalize = 0;  // 0 median hit, 1 two-point, 2 tangent fixed-left, 3 fixed-right
};

struct HullStats {
    std::size_t bridges = 0;
    std::size_t max_rounds = 0;
    bool progress_ok = true;  // every prune round met the drop bound
};

// Upper-hull edge across the boundary m (x[m] < x[m+1] required) considering
// candidates in [start, end).  Returns adapter-space endpoint indices.
Bridge compute_bridge(const SortedPointView& pts, std::size_t start, std::size_t m,
                      std::size_t end, BridgeLog& log, WorkspaceMeter& meter,
                      const HullConfig& cfg, BridgeStats* stats = nullptr);

// Emits upper-hull edges (index pairs) left to right.
void upper_hull(const SortedPointView& pts, const std::function<void(std::size_t, std::size_t)>& emit,
                WorkspaceMeter& meter, const HullConfig& cfg = {}, HullStats* stats = nullptr);

// Emits the minimal convex hull clockwise, starting at the topmost point of
// the leftmost column.
void convex_hull(const ReadOnlyView<Point>& view, const std::function<void(Point)>& emit,
                 WorkspaceMeter& meter, const HullConfig& cfg = {}, HullStats* stats = nullptr);

}  // namespace rops
