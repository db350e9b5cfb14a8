#pragma once
// Order-statistic selection over rescannable read-only sequences.
//
// A_0 finds the t-th smallest by repeated minimum scans in O(1) extra words.
// A_k improves to roughly n^(1+1/(k+1)) reads using k levels of block
// medians, spending at most 16*(k+1) working words: each level keeps only a
// window (lo, hi), a target rank, and loop counters.  Window updates are
// applied as soon as a block median's global rank is known.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "rops/workspace.hpp"

namespace rops {

// A sequence we can only scan forward, restartable at any position.
template <class T>
class Rescannable {
  public:
    virtual ~Rescannable() = default;
    virtual std::size_t size() const = 0;
    virtual void restart(std::size_t pos) = 0;
    virtual T next() = 0;
};

// Value with an index tiebreaker, making every element distinct.
struct Keyed {
    double value = 0;
    std::uint64_t tie = 0;
    friend bool operator<(const Keyed& a, const Keyed& b) {
        if (a.value != b.value) return a.value < b.value;
        return a.tie < b.tie;
    }
    friend bool operator==(const Keyed& a, const Keyed& b) {
        return a.value == b.value && a.tie == b.tie;
    }
};

class ScalarViewSequence : public Rescannable<Keyed> {
  public:
    explicit ScalarViewSequence(const ReadOnlyView<double>& v) : view_(&v) {}
    std::size_t size() const override { return view_->size(); }
    void restart(std::size_t pos) override { pos_ = pos; }
    Keyed next() override {
        Keyed k{view_->element(pos_), pos_};
        ++pos_;
        return k;
    }

  private:
    const ReadOnlyView<double>* view_;
    std::size_t pos_ = 0;
};

struct SelectConfig {
    std::size_t k = 1;  // number of block-median levels above the scan base
};

// Level count balancing read overhead against the word budget:
// k ~ sqrt(log n / log log n).
inline std::size_t choose_k(std::size_t n) {
    if (n < 4) return 1;
    double lg = std::log2(static_cast<double>(n));
    double k = std::sqrt(lg / std::log2(lg));
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(k)));
}

namespace detail {

template <class T>
bool in_window(const T& x, const std::optional<T>& lo, const std::optional<T>& hi) {
    return (!lo || *lo < x) && (!hi || x < *hi);
}

template <class T>
std::size_t count_window(Rescannable<T>& seq, std::size_t start, std::size_t end,
                         const std::optional<T>& lo, const std::optional<T>& hi) {
    std::size_t c = 0;
    seq.restart(start);
    for (std::size_t i = start; i < end; ++i)
        if (in_window(seq.next(), lo, hi)) ++c;
    return c;
}

// t-th smallest window element via repeated extremum scans, approaching from
// whichever end needs fewer passes.  v is the current window population.
template <class T>
T level0_rank(Rescannable<T>& seq, std::size_t start, std::size_t end,
              std::optional<T> lo, std::optional<T> hi, std::size_t t, std::size_t v,
              WorkspaceMeter& meter) {
    MeterScope frame(meter, 2 * words_of<T>() + 5);
    bool from_top = t > v - t + 1;
    std::size_t passes = from_top ? v - t + 1 : t;
    std::optional<T> cur;  // best of the last pass; also a moving window edge
    for (std::size_t p = 0; p < passes; ++p) {
        std::optional<T> best;
        seq.restart(start);
        for (std::size_t i = start; i < end; ++i) {
            T x = seq.next();
            if (!in_window(x, lo, hi)) continue;
            if (from_top) {
                if (cur && !(x < *cur)) continue;
                if (!best || *best < x) best = x;
            } else {
                if (cur && !(*cur < x)) continue;
                if (!best || x < *best) best = x;
            }
        }
        if (!best) throw Error("selection rank out of range");
        cur = best;
    }
    return *cur;
}

// One recursion level of A_k (level >= 1): partition the index range into
// ~len^(1/(j+1)) blocks, pull each block's window median with level j-1,
// locate its global rank, and shrink the window immediately.
template <class T>
T findrank_level(Rescannable<T>& seq, std::size_t start, std::size_t end,
                 std::optional<T> lo, std::optional<T> hi, std::size_t t,
                 std::size_t level, WorkspaceMeter& meter) {
    MeterScope frame(meter, 3 * words_of<T>() + 8);
    std::size_t len = end - start;
    for (;;) {
        std::size_t v = count_window(seq, start, end, lo, hi);
        if (t == 0 || t > v) throw Error("selection rank out of range");
        if (v <= 2 * (level + 1) + 2)
            return level0_rank(seq, start, end, lo, hi, t, v, meter);

        double r = std::pow(static_cast<double>(len), 1.0 / static_cast<double>(level + 1));
        std::size_t bcount = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(r)));
        std::size_t bsize = (len + bcount - 1) / bcount;
        for (std::size_t bs = start; bs < end; bs += bsize) {
            std::size_t be = std::min(bs + bsize, end);
            std::size_t vb = count_window(seq, bs, be, lo, hi);
            if (vb == 0) continue;
            T bm = level == 1
                       ? level0_rank(seq, bs, be, lo, hi, (vb + 1) / 2, vb, meter)
                       : findrank_level(seq, bs, be, lo, hi, (vb + 1) / 2, level - 1, meter);
            // Global rank of the block median within the current window.
            std::size_t rho = 0;
            seq.restart(start);
            for (std::size_t i = start; i < end; ++i) {
                T x = seq.next();
                if (in_window(x, lo, hi) && !(bm < x)) ++rho;
            }
            if (rho == t) return bm;
            if (rho < t) {
                lo = bm;
                t -= rho;
            } else {
                hi = bm;
            }
        }
    }
}

}  // namespace detail

// rank is 1-based over [0, seq.size()).
template <class T>
T select_ak(Rescannable<T>& seq, std::size_t rank, const SelectConfig& cfg, WorkspaceMeter& meter) {
    MeterScope top(meter, words_of<T>() + 2);
    if (rank == 0 || rank > seq.size()) throw Error("selection rank out of range");
    if (cfg.k == 0)
        return detail::level0_rank<T>(seq, 0, seq.size(), std::nullopt, std::nullopt,
                                      rank, seq.size(), meter);
    return detail::findrank_level<T>(seq, 0, seq.size(), std::nullopt, std::nullopt,
                                     rank, cfg.k, meter);
}

template <class T>
T select_a0(Rescannable<T>& seq, std::size_t rank, WorkspaceMeter& meter) {
    MeterScope top(meter, words_of<T>() + 2);
    if (rank == 0 || rank > seq.size()) throw Error("selection rank out of range");
    std::size_t v = seq.size();
    return detail::level0_rank<T>(seq, 0, v, std::nullopt, std::nullopt, rank, v, meter);
}

// Batched selection: resolves a whole sorted batch of ranks through one shared
// scan process.  Each round splits every unresolved rank window at a uniformly
// sampled in-window pivot (reservoir-sampled during the previous scan), so the
// expected total cost is O(n log n) reads for the batch rather than per rank.
// Requires distinct keys and strictly increasing 1-based ranks.
template <class T>
void multiselect(Rescannable<T>& seq, const std::size_t* ranks, T* out, std::size_t m,
                 WorkspaceMeter& meter) {
    std::size_t n = seq.size();
    if (m == 0) return;
    for (std::size_t i = 0; i < m; ++i)
        if (ranks[i] == 0 || ranks[i] > n || (i > 0 && ranks[i] <= ranks[i - 1]))
            throw Error("multiselect ranks invalid");

    struct Gap {
        T lo{}, hi{}, pivot{}, samp_lo{}, samp_hi{};
        bool has_lo = false, has_hi = false, has_pivot = false;
        std::size_t lo_rank = 0;   // number of elements at or below lo
        std::size_t t0 = 0, t1 = 0;  // unresolved target index range
        std::size_t cnt = 0, lt = 0, gt = 0;
        bool has_slo = false, has_shi = false;
    };
    std::size_t gap_words = (sizeof(Gap) + 7) / 8;
    MeterScope charge(meter, 2 * m * gap_words + m / 8 + 8);

    std::vector<Gap> gaps(1), ng;
    gaps[0].t1 = m;
    std::size_t remaining = m;
    std::uint64_t rs = 0x9e3779b97f4a7c15ULL ^ (n * 0xbf58476d1ce4e5b9ULL);
    auto rnd = [&rs] {
        rs += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = rs;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };

    for (std::size_t round = 0; remaining > 0; ++round) {
        if (round > 128 + 8 * 64) throw Error("multiselect failed to converge");
        for (auto& g : gaps) {
            g.cnt = g.lt = g.gt = 0;
            g.has_slo = g.has_shi = false;
        }
        seq.restart(0);
        for (std::size_t i = 0; i < n; ++i) {
            T x = seq.next();
            std::size_t a = 0, b = gaps.size();
            while (a < b) {
                std::size_t mid = (a + b) / 2;
                if (!gaps[mid].has_lo || gaps[mid].lo < x) a = mid + 1;
                else b = mid;
            }
            if (a == 0) continue;
            Gap& g = gaps[a - 1];
            if (g.has_hi && !(x < g.hi)) continue;
            ++g.cnt;
            if (!g.has_pivot) {
                if (rnd() % g.cnt == 0) { g.samp_lo = x; g.has_slo = true; }
            } else if (x < g.pivot) {
                ++g.lt;
                if (rnd() % g.lt == 0) { g.samp_lo = x; g.has_slo = true; }
            } else if (g.pivot < x) {
                ++g.gt;
                if (rnd() % g.gt == 0) { g.samp_hi = x; g.has_shi = true; }
            }
        }
        ng.clear();
        for (auto& g : gaps) {
            if (!g.has_pivot) {
                // Pure sampling round (fresh root window).
                if (!g.has_slo) throw Error("multiselect window empty");
                g.pivot = g.samp_lo;
                g.has_pivot = true;
                ng.push_back(g);
                continue;
            }
            std::size_t pr = g.lo_rank + g.lt + 1;  // pivot's global rank
            std::size_t ti = g.t0;
            while (ti < g.t1 && ranks[ti] < pr) ++ti;
            std::size_t tj = ti;
            if (tj < g.t1 && ranks[tj] == pr) {
                out[tj] = g.pivot;
                --remaining;
                ++tj;
            }
            if (ti > g.t0) {
                Gap s;
                s.lo = g.lo; s.has_lo = g.has_lo; s.lo_rank = g.lo_rank;
                s.hi = g.pivot; s.has_hi = true;
                s.t0 = g.t0; s.t1 = ti;
                s.pivot = g.samp_lo; s.has_pivot = g.has_slo;
                ng.push_back(s);
            }
            if (tj < g.t1) {
                Gap s;
                s.lo = g.pivot; s.has_lo = true; s.lo_rank = pr;
                s.hi = g.hi; s.has_hi = g.has_hi;
                s.t0 = tj; s.t1 = g.t1;
                s.pivot = g.samp_hi; s.has_pivot = g.has_shi;
                ng.push_back(s);
            }
        }
        std::swap(gaps, ng);
    }
}

}  // namespace rops
