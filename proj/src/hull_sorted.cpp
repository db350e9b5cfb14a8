#include "rops/hull_sorted.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rops {

bool slope_less(const SlopeRec& a, const SlopeRec& b) {
    bool va = a.dx == 0, vb = b.dx == 0;
    if (va || vb) {
        if (va && vb) return a.tie < b.tie;
        return !va;  // every finite slope precedes a vertical one
    }
    // dx > 0 on both sides, so cross-multiplication preserves the order
    double l = a.dy * b.dx, r = b.dy * a.dx;
    if (l != r) return l < r;
    return a.tie < b.tie;
}

void SortedPointView::validate() const {
    double prev = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < size(); ++i) {
        Point p = point(i);
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw DomainError("non-finite coordinate at point " + std::to_string(i));
        if (p.x < prev) throw DomainError("points not sorted by x at index " + std::to_string(i));
        prev = p.x;
    }
}

BridgeLog::BridgeLog(std::size_t n, WorkspaceMeter& meter) {
    double ln = std::log(static_cast<double>(std::max<std::size_t>(n, 2)));
    cap_ = static_cast<std::size_t>(std::ceil(ln / std::log(4.0 / 3.0))) + 8;
    m_.reserve(cap_);
    b_.reserve(cap_);
    charge_ = MeterScope(meter, 3 * cap_ + (cap_ + 7) / 8);
}

void BridgeLog::append(const SlopeRec& med, bool bit) {
    if (m_.size() == cap_) throw CapacityError("bridge log overflow");
    m_.push_back(med);
    b_.push_back(bit ? 1 : 0);
}

namespace {

SlopeRec pair_key(const Point& p, const Point& q, std::size_t left_index) {
    // callers pass (p, q) in index order, so p.x <= q.x
    if (p.x == q.x) return {0.0, 0.0, static_cast<double>(left_index)};
    return {q.y - p.y, q.x - p.x, static_cast<double>(left_index)};
}

// Fate of a pair under a logged round: 0 = first member pruned, 1 = second
// member pruned, 2 = both survive.  bit == false means the bridge slope is
// strictly below the logged median, so in every pair at least as steep the
// lexicographically smaller point is strictly dominated on the bridge line;
// bit == true is the mirror image.
int pair_fate(const Point& p, const Point& q, const SlopeRec& med, bool bit,
              std::size_t left_index) {
    SlopeRec key = pair_key(p, q, left_index);
    bool first_is_lex_min = p.x != q.x || p.y <= q.y;
    if (!bit) {
        if (!slope_less(key, med)) return first_is_lex_min ? 0 : 1;
    } else {
        if (!slope_less(med, key)) return first_is_lex_min ? 1 : 0;
    }
    return 2;
}

}  // namespace

ValidPairCursor::ValidPairCursor(const SortedPointView& pts, std::size_t start, std::size_t end,
                                 const BridgeLog& log)
    : pts_(&pts), log_(&log), start_(start), end_(end) {
    park_.assign(log.rounds() + 1, npos);
    pending_.reserve(log.rounds() + 2);
    base_ = start_;
}

void ValidPairCursor::restart() {
    std::fill(park_.begin(), park_.end(), npos);
    pending_.clear();
    base_ = start_;
    flush_ = 0;
    emitted_ = 0;
    leftover_ = npos;
    done_ = false;
}

bool ValidPairCursor::climb(std::size_t i, std::size_t level, std::size_t& a, std::size_t& b) {
    for (;;) {
        if (park_[level] == npos) {
            park_[level] = i;
            return false;
        }
        std::size_t first = park_[level];
        park_[level] = npos;
        if (level == log_->rounds()) {
            a = first;
            b = i;
            return true;
        }
        int fate = pair_fate(pts_->point(first), pts_->point(i), log_->median(level),
                             log_->bit(level), first);
        if (fate == 2) {
            if (pending_.size() >= log_->rounds() + 2)
                throw CapacityError("pair cursor pending overflow");
            pending_.push_back({i, level + 1});
            i = first;
        } else if (fate == 1) {
            i = first;
        }
        ++level;
    }
}

bool ValidPairCursor::next(std::size_t& a, std::size_t& b) {
    if (done_) return false;
    for (;;) {
        std::size_t i, r;
        if (!pending_.empty()) {
            i = pending_.back().idx;
            r = pending_.back().level;
            pending_.pop_back();
        } else if (base_ < end_) {
            i = base_++;
            r = 0;
        } else {
            // base exhausted: flush parity leftovers upward, bottom first
            while (flush_ < log_->rounds() && park_[flush_] == npos) ++flush_;
            if (flush_ >= log_->rounds()) {
                leftover_ = park_[log_->rounds()];
                done_ = true;
                return false;
            }
            i = park_[flush_];
            park_[flush_] = npos;
            r = flush_ + 1;
        }
        if (climb(i, r, a, b)) {
            ++emitted_;
            return true;
        }
    }
}

namespace {

// Rescannable pair-slope sequence for median selection.  restart() is the
// hot path (selection rescans blocks many times), so the cursor state at the
// most recent restart position is kept as a snapshot.
class PairSlopeSeq final : public Rescannable<SlopeRec> {
  public:
    PairSlopeSeq(const SortedPointView& pts, std::size_t start, std::size_t end,
                 const BridgeLog& log, std::size_t count, WorkspaceMeter& meter)
        : pts_(&pts),
          cur_(pts, start, end, log),
          ckpt_(cur_),
          count_(count),
          charge_(meter, 2 * ValidPairCursor::state_words(log) + 6) {}

    std::size_t size() const override { return count_; }

    void restart(std::size_t pos) override {
        if (pos == ckpt_pos_) {
            cur_ = ckpt_;
            return;
        }
        if (pos < cur_.pairs_emitted()) cur_.restart();
        std::size_t a, b;
        while (cur_.pairs_emitted() < pos)
            if (!cur_.next(a, b)) throw Error("pair sequence overrun");
        ckpt_ = cur_;
        ckpt_pos_ = pos;
    }

    SlopeRec next() override {
        std::size_t a, b;
        if (!cur_.next(a, b)) throw Error("pair sequence overrun");
        return pair_key(pts_->point(a), pts_->point(b), a);
    }

  private:
    const SortedPointView* pts_;
    ValidPairCursor cur_, ckpt_;
    std::size_t count_, ckpt_pos_ = 0;
    MeterScope charge_;
};

template <class Fn>
void for_each_valid(ValidPairCursor& cur, Fn&& fn) {
    std::size_t a, b;
    while (cur.next(a, b)) {
        fn(a);
        fn(b);
    }
    if (cur.leftover() != npos) fn(cur.leftover());
}

}  // namespace

Bridge compute_bridge(const SortedPointView& pts, std::size_t start, std::size_t m,
                      std::size_t end, BridgeLog& log, WorkspaceMeter& meter,
                      const HullConfig& cfg, BridgeStats* stats) {
    MeterScope frame(meter, 16);
    for (;;) {
        MeterScope cscope(meter, ValidPairCursor::state_words(log));
        ValidPairCursor cur(pts, start, end, log);

        std::size_t left = 0, right = 0, lsing = npos, rsing = npos;
        for_each_valid(cur, [&](std::size_t i) {
            if (i <= m) {
                ++left;
                lsing = i;
            } else {
                ++right;
                rsing = i;
            }
        });
        std::size_t c = cur.pairs_emitted();
        if (stats) {
            stats->pair_counts.push_back(c);
            stats->valid_counts.push_back(left + right);
        }
        if (left == 0 || right == 0) throw Error("bridge candidate set lost a side");
        if (left == 1 && right == 1) {
            if (stats) stats->finalize = 1;
            return {lsing, rsing};
        }
        if (left == 1 || right == 1) {
            // Tangent from the lone side's point (necessarily the bridge
            // endpoint) over the other side's survivors.  Exact comparisons;
            // ties keep the farthest point so the edge is a minimal-hull edge.
            bool fixed_left = left == 1;
            std::size_t p_idx = fixed_left ? lsing : rsing;
            Point p = pts.point(p_idx);
            std::size_t best = npos;
            Point bq{};
            cur.restart();
            for_each_valid(cur, [&](std::size_t i) {
                if (fixed_left ? i <= m : i > m) return;
                Point q = pts.point(i);
                if (best == npos) {
                    best = i;
                    bq = q;
                    return;
                }
                if (fixed_left) {
                    // maximize slope(p, q); tie -> rightmost (later index)
                    if ((q.y - p.y) * (bq.x - p.x) >= (bq.y - p.y) * (q.x - p.x)) {
                        best = i;
                        bq = q;
                    }
                } else {
                    // minimize slope(q, p); tie -> leftmost (first wins)
                    if ((p.y - q.y) * (p.x - bq.x) < (p.y - bq.y) * (p.x - q.x)) {
                        best = i;
                        bq = q;
                    }
                }
            });
            if (stats) stats->finalize = fixed_left ? 2 : 3;
            return fixed_left ? Bridge{p_idx, best} : Bridge{best, p_idx};
        }

        if (log.rounds() >= log.capacity())
            throw CapacityError("bridge rounds exceeded log capacity");

        SlopeRec med;
        {
            PairSlopeSeq seq(pts, start, end, log, c, meter);
            med = select_ak<SlopeRec>(seq, (c + 1) / 2, SelectConfig{cfg.select_k}, meter);
        }

        // Supporting points of the median slope.  Integer-valued inputs make
        // the score y*dx - x*dy exact, so cross-side contact is detected
        // reliably.  imin/imax are the extreme maximizers (visit order is
        // increasing by index).
        bool vertical = med.dx == 0;
        std::size_t imin = npos, imax = npos;
        Point bp{};
        double bscore = 0;
        cur.restart();
        for_each_valid(cur, [&](std::size_t i) {
            Point q = pts.point(i);
            if (imin == npos) {
                imin = imax = i;
                bp = q;
                bscore = q.y * med.dx - q.x * med.dy;
                return;
            }
            if (vertical) {
                // limit slope -> +inf: leftmost column, topmost point
                if (q.x < bp.x || (q.x == bp.x && q.y > bp.y)) {
                    imin = imax = i;
                    bp = q;
                } else if (q.x == bp.x && q.y == bp.y) {
                    imax = i;
                }
            } else {
                double s = q.y * med.dx - q.x * med.dy;
                if (s > bscore) {
                    imin = imax = i;
                    bp = q;
                    bscore = s;
                } else if (s == bscore) {
                    imax = i;
                }
            }
        });
        if (imin <= m && imax > m) {
            // the supporting line is the bridge line; its extreme contacts
            // are the minimal-hull edge endpoints
            if (stats) stats->finalize = 0;
            return {imin, imax};
        }
        log.append(med, /*bit=*/imin > m);
        if (stats) ++stats->rounds;
    }
}

namespace {

void fold_stats(HullStats* s, const BridgeStats& bs, std::size_t rounds) {
    if (!s) return;
    ++s->bridges;
    s->max_rounds = std::max(s->max_rounds, rounds);
    for (std::size_t i = 0; i + 1 < bs.valid_counts.size(); ++i) {
        std::size_t v = bs.valid_counts[i];
        if (bs.valid_counts[i + 1] > v - (v + 2) / 4) s->progress_ok = false;
    }
}

void uh_rec(const SortedPointView& pts, std::size_t start, std::size_t end, BridgeLog& log,
            const std::function<void(std::size_t, std::size_t)>& emit, WorkspaceMeter& meter,
            const HullConfig& cfg, HullStats* stats) {
    MeterScope frame(meter, 8);
    if (end - start < 2) return;
    // Median x-group boundary as the separator: guarantees both recursion
    // depth <= log2(#groups) and a non-vertical bridge.
    std::size_t nb = 0;
    for (std::size_t i = start; i + 1 < end; ++i)
        if (pts.point(i).x < pts.point(i + 1).x) ++nb;
    if (nb == 0) return;  // single x-column: no upper-hull edges here
    std::size_t want = (nb + 1) / 2, seen = 0, m = npos;
    for (std::size_t i = start; i + 1 < end; ++i)
        if (pts.point(i).x < pts.point(i + 1).x && ++seen == want) {
            m = i;
            break;
        }

    log.reset();
    Bridge br;
    if (stats) {
        BridgeStats bs;
        br = compute_bridge(pts, start, m, end, log, meter, cfg, &bs);
        fold_stats(stats, bs, log.rounds());
    } else {
        br = compute_bridge(pts, start, m, end, log, meter, cfg, nullptr);
    }
    uh_rec(pts, start, br.a + 1, log, emit, meter, cfg, stats);
    emit(br.a, br.b);
    uh_rec(pts, br.b, end, log, emit, meter, cfg, stats);
}

}  // namespace

void upper_hull(const SortedPointView& pts, const std::function<void(std::size_t, std::size_t)>& emit,
                WorkspaceMeter& meter, const HullConfig& cfg, HullStats* stats) {
    if (pts.size() < 2) return;
    BridgeLog log(pts.size(), meter);
    uh_rec(pts, 0, pts.size(), log, emit, meter, cfg, stats);
}

void convex_hull(const ReadOnlyView<Point>& view, const std::function<void(Point)>& emit,
                 WorkspaceMeter& meter, const HullConfig& cfg, HullStats* stats) {
    MeterScope frame(meter, 20);
    std::size_t n = view.size();
    if (n == 0) return;
    SortedPointView fwd(view);
    if (cfg.validate_sorted) fwd.validate();

    if (fwd.point(0).x == fwd.point(n - 1).x) {
        double x = fwd.point(0).x, ymin = fwd.point(0).y, ymax = ymin;
        for (std::size_t i = 1; i < n; ++i) {
            double y = fwd.point(i).y;
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
        emit({x, ymax});
        if (ymin != ymax) emit({x, ymin});
        return;
    }

    // Upper chain left to right; both endpoints retained for junction dedup.
    Point upper_first{}, upper_last{};
    std::size_t prev = npos;
    bool first_edge = true;
    upper_hull(
        fwd,
        [&](std::size_t a, std::size_t b) {
            if (first_edge) {
                upper_first = fwd.point(a);
                emit(upper_first);
                first_edge = false;
            } else if (a != prev) {
                throw Error("upper hull edges not contiguous");
            }
            upper_last = fwd.point(b);
            emit(upper_last);
            prev = b;
        },
        meter, cfg, stats);

    // Lower chain via the rotated view; in the original frame its vertices
    // arrive right to left, continuing the clockwise order.  The final
    // vertex is held back one step so the closing duplicate can be dropped.
    SortedPointView rev(view, true);
    Point hold{};
    bool have_hold = false, first_low = true;
    std::size_t prev_low = npos;
    upper_hull(
        rev,
        [&](std::size_t a, std::size_t b) {
            auto mapv = [&](std::size_t i) {
                Point p = rev.point(i);
                return Point{-p.x, -p.y};
            };
            if (first_low) {
                Point pa = mapv(a);
                first_low = false;
                if (!(pa == upper_last)) {
                    hold = pa;
                    have_hold = true;
                }
            } else if (a != prev_low) {
                throw Error("lower hull edges not contiguous");
            }
            if (have_hold) emit(hold);
            hold = mapv(b);
            have_hold = true;
            prev_low = b;
        },
        meter, cfg, stats);
    if (have_hold && !(hold == upper_first)) emit(hold);
}

}  // namespace rops
