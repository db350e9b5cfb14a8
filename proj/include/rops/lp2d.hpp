#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "rops/selection.hpp"
#include "rops/workspace.hpp"

namespace rops {

enum class LpVerdict { Optimal, Infeasible, Unbounded };

struct Lp2Result {
    LpVerdict status = LpVerdict::Infeasible;
    double x1 = 0, x2 = 0, value = 0;  // for Unbounded, (x1,x2) is a feasible witness
};

// Transformed row classes after the objective substitution.
enum class RowClass : int { Lower, Upper, VertLo, VertHi, ZeroOk, ZeroBad };

struct TransRow {
    RowClass cls = RowClass::ZeroOk;
    double a = 0, b = 0;  // y >= / <= a*x + b; verticals use b as the bound
    std::size_t idx = 0;
};

// Objective substitution y = c1*x1 + c2*x2 with x = x1, or the swapped roles
// when c2 == 0.  A fully degenerate objective becomes a feasibility run under
// the surrogate objective min x1.
class Transform2 {
  public:
    Transform2(double c1, double c2) : c1_(c1), c2_(c2) {
        if (c2_ != 0) swapped_ = false;
        else if (c1_ != 0) swapped_ = true;
        else {
            feasibility_ = true;
            swapped_ = true;
            c1_ = 1;
            c2_ = 0;
        }
    }

    bool feasibility_mode() const { return feasibility_; }

    TransRow row(const Constraint2& c, std::size_t idx) const {
        // Rows arrive as a*x1 + b*x2 <= beta; work in the >= form.
        double A = -c.a, B = -c.b, beta = -c.beta;
        double p, r;
        if (!swapped_) {
            p = A - c1_ * (B / c2_);
            r = B / c2_;
        } else {
            p = B;
            r = A / c1_;
        }
        TransRow t;
        t.idx = idx;
        if (r != 0) {
            t.cls = r > 0 ? RowClass::Lower : RowClass::Upper;
            t.a = -p / r;
            t.b = beta / r;
        } else if (p != 0) {
            t.cls = p > 0 ? RowClass::VertLo : RowClass::VertHi;
            t.b = beta / p;
        } else {
            t.cls = beta > 0 ? RowClass::ZeroBad : RowClass::ZeroOk;
        }
        return t;
    }

    void back_map(double x, double y, double& x1, double& x2) const {
        if (!swapped_) {
            x1 = x;
            x2 = (y - c1_ * x) / c2_;
        } else {
            x2 = x;
            x1 = (y - c2_ * x) / c1_;
        }
    }

  private:
    double c1_, c2_;
    bool swapped_ = false;
    bool feasibility_ = false;
};

// Plain snapshot of a round log, for replay tooling.
struct Lp2Trace {
    double lo0 = -std::numeric_limits<double>::infinity();
    double hi0 = std::numeric_limits<double>::infinity();
    std::vector<double> xm;
    std::vector<unsigned char> flags;
};

// Per-round record: the tested abscissa and the decided direction.  A round
// with decided == false pruned through interval/same-slope rules alone.
class Lp2Log {
  public:
    Lp2Log(std::size_t n, WorkspaceMeter& meter)
        : cap_(cap_for(n)), charge_(meter, 3 * cap_ + 6) {
        xm_.reserve(cap_);
        flags_.reserve(cap_);
    }

    Lp2Log(const Lp2Trace& t, WorkspaceMeter& meter)
        : cap_(t.xm.size() + 1), charge_(meter, 3 * cap_ + 6), lo0_(t.lo0), hi0_(t.hi0),
          xm_(t.xm), flags_(t.flags) {}

    Lp2Trace snapshot() const { return {lo0_, hi0_, xm_, flags_}; }

    static std::size_t cap_for(std::size_t n) {
        double ln = std::log(static_cast<double>(std::max<std::size_t>(n, 2)));
        return static_cast<std::size_t>(ln / std::log(4.0 / 3.0)) + 10;
    }

    void set_base_interval(double lo, double hi) {
        lo0_ = lo;
        hi0_ = hi;
    }

    std::size_t rounds() const { return xm_.size(); }
    std::size_t capacity() const { return cap_; }
    double xm(std::size_t r) const { return xm_[r]; }
    bool right(std::size_t r) const { return flags_[r] & 1; }
    bool decided(std::size_t r) const { return flags_[r] & 2; }

    void append(double xm, bool right, bool decided) {
        if (xm_.size() == cap_) throw CapacityError("lp2 round log full");
        xm_.push_back(xm);
        flags_.push_back(static_cast<unsigned char>((right ? 1 : 0) | (decided ? 2 : 0)));
    }

    // Interval [lo, hi] in force before round r.
    void interval(std::size_t r, double& lo, double& hi) const {
        lo = lo0_;
        hi = hi0_;
        for (std::size_t i = 0; i < r; ++i) {
            if (!decided(i)) continue;
            if (right(i)) lo = std::max(lo, xm_[i]);
            else hi = std::min(hi, xm_[i]);
        }
    }

  private:
    std::size_t cap_;
    MeterScope charge_;
    double lo0_ = -std::numeric_limits<double>::infinity();
    double hi0_ = std::numeric_limits<double>::infinity();
    std::vector<double> xm_;
    std::vector<unsigned char> flags_;
};

// 0: both survive, 1: prune p, 2: prune q.  p and q are same-class rows; the
// rules are deterministic so the recorded log replays exactly.
inline int pair_fate2(const TransRow& p, const TransRow& q, double lo, double hi,
                      bool decided, double xm, bool right) {
    bool lower = p.cls == RowClass::Lower;
    if (p.a == q.a) {
        // Dominated intercept can never bind; ties keep the earlier row.
        if (p.b == q.b) return 2;
        bool p_binds = lower ? p.b > q.b : p.b < q.b;
        return p_binds ? 2 : 1;
    }
    double xij = (p.b - q.b) / (q.a - p.a);
    bool star_right, known = true;
    if (xij < lo) star_right = true;
    else if (xij > hi) star_right = false;
    else if (decided && right && xij <= xm) star_right = true;
    else if (decided && !right && xij >= xm) star_right = false;
    else known = false;
    if (!known) return 0;
    // Right of xij the larger slope binds in I1 and the smaller binds in I2.
    bool p_binds = (p.a > q.a) == (star_right == lower);
    return p_binds ? 2 : 1;
}

// Thin copyable adapter over the counted input view.  Cursors keep their view
// by value so that stacked instances (selection checkpoints, stream replays)
// each carry an independent scan position; read counts still land on the
// underlying ReadOnlyView.
struct Span2View {
    const ReadOnlyView<Constraint2>* v;
    std::size_t size() const { return v->size(); }
    Constraint2 element(std::size_t i) const { return v->element(i); }
};

// Streams the rows still valid after `levels` logged rounds, in the canonical
// order: per-class pairing in arrival order, survivors emitted pending-first,
// parity leftovers flushed upward at end of stream.  The view is only ever
// read front to back within one pass, so a View may be a virtual sequence
// whose elements are produced on the fly.
// Copyable; the owner charges words_for(levels) to its meter.
template <class View>
class ValidRowCursor {
  public:
    ValidRowCursor(View view, const Transform2& tf, const Lp2Log& log, std::size_t levels)
        : view_(view), tf_(&tf), log_(&log), nlev_(levels), lev_(levels) {
        for (std::size_t r = 0; r < levels; ++r) log.interval(r, lev_[r].lo, lev_[r].hi);
        restart();
    }

    static std::size_t words_for(std::size_t levels) { return 16 * levels + 32; }

    void restart() {
        for (auto& l : lev_) l.has[0] = l.has[1] = false;
        outq_.clear();
        qhead_ = 0;
        pos_ = 0;
        flush_ = 0;
    }

    bool next(TransRow& out) {
        for (;;) {
            if (qhead_ < outq_.size()) {
                out = outq_[qhead_++];
                if (qhead_ == outq_.size()) {
                    outq_.clear();
                    qhead_ = 0;
                }
                return true;
            }
            if (pos_ < view_.size()) {
                std::size_t i = pos_++;
                TransRow t = tf_->row(view_.element(i), i);
                if (t.cls == RowClass::Lower || t.cls == RowClass::Upper) feed(0, t);
                continue;
            }
            if (flush_ < nlev_) {
                Level& l = lev_[flush_];
                bool fed = false;
                for (int s = 0; s < 2 && !fed; ++s) {
                    if (!l.has[s]) continue;
                    l.has[s] = false;
                    feed(flush_ + 1, l.pend[s]);
                    fed = true;
                }
                if (!fed) ++flush_;
                continue;
            }
            return false;
        }
    }

  private:
    struct Level {
        double lo = 0, hi = 0;
        TransRow pend[2];
        bool has[2] = {false, false};
    };

    void feed(std::size_t level, const TransRow& t) {
        if (level >= nlev_) {
            outq_.push_back(t);
            return;
        }
        Level& l = lev_[level];
        int s = t.cls == RowClass::Lower ? 0 : 1;
        if (!l.has[s]) {
            l.pend[s] = t;
            l.has[s] = true;
            return;
        }
        TransRow p = l.pend[s];
        l.has[s] = false;
        int fate = pair_fate2(p, t, l.lo, l.hi, log_->decided(level), log_->xm(level),
                              log_->right(level));
        if (fate != 1) feed(level + 1, p);
        if (fate != 2) feed(level + 1, t);
    }

    View view_;
    const Transform2* tf_;
    const Lp2Log* log_;
    std::size_t nlev_;
    std::vector<Level> lev_;
    std::vector<TransRow> outq_;
    std::size_t qhead_ = 0, pos_ = 0, flush_ = 0;
};

namespace lp2detail {

// Round pairing over the valid stream, yielding eligible cross-slope pairs
// whose x_ij falls inside the current interval.
template <class View>
struct EligibleStream {
    ValidRowCursor<View> cur;
    double lo, hi;
    TransRow pend[2];
    bool has[2] = {false, false};

    EligibleStream(View v, const Transform2& t, const Lp2Log& log, std::size_t levels,
                   double lo_, double hi_)
        : cur(v, t, log, levels), lo(lo_), hi(hi_) {}

    void restart() {
        cur.restart();
        has[0] = has[1] = false;
    }

    bool next(double& xij) {
        TransRow t;
        while (cur.next(t)) {
            int s = t.cls == RowClass::Lower ? 0 : 1;
            if (!has[s]) {
                pend[s] = t;
                has[s] = true;
                continue;
            }
            TransRow p = pend[s];
            has[s] = false;
            if (p.a == t.a) continue;
            double x = (p.b - t.b) / (t.a - p.a);
            if (x < lo || x > hi) continue;
            xij = x;
            return true;
        }
        return false;
    }
};

}  // namespace lp2detail

// Rescannable sequence of eligible x_ij values for the selection module.
// Keeps a checkpoint copy so the repeated restarts of selection stay cheap.
template <class View>
class PairXSeq final : public Rescannable<Keyed> {
  public:
    PairXSeq(View view, const Transform2& tf, const Lp2Log& log, std::size_t levels,
             double lo, double hi, WorkspaceMeter& meter)
        : live_(view, tf, log, levels, lo, hi),
          ckpt_(live_),
          charge_(meter, 2 * (ValidRowCursor<View>::words_for(levels) + 12) + 8) {
        double x;
        count_ = 0;
        while (live_.next(x)) ++count_;
        live_.restart();
    }

    std::size_t size() const override { return count_; }

    void restart(std::size_t pos) override {
        if (pos == ckpt_pos_) {
            live_ = ckpt_;
            pos_ = pos;
        } else if (pos < pos_) {
            live_.restart();
            pos_ = 0;
        }
        double x;
        while (pos_ < pos && live_.next(x)) ++pos_;
        ckpt_ = live_;
        ckpt_pos_ = pos;
    }

    Keyed next() override {
        double x = 0;
        live_.next(x);
        return {x, pos_++};
    }

  private:
    lp2detail::EligibleStream<View> live_, ckpt_;
    MeterScope charge_;
    std::size_t count_ = 0, pos_ = 0, ckpt_pos_ = 0;
};

struct Envelope {
    double g = -std::numeric_limits<double>::infinity();
    double h = std::numeric_limits<double>::infinity();
    double sg = 0, Sg = 0, sh = 0, Sh = 0;
    std::size_t n1 = 0, n2 = 0;
};

// Single scan over valid rows: max lower / min upper envelope values at xm
// plus extremal slopes among ties (relative tolerance for tie detection).
template <class View>
Envelope envelope_at(View view, const Transform2& tf, const Lp2Log& log, std::size_t levels,
                     double xm) {
    Envelope e;
    ValidRowCursor<View> cur(view, tf, log, levels);
    TransRow t;
    while (cur.next(t)) {
        double val = t.a * xm + t.b;
        if (t.cls == RowClass::Lower) {
            ++e.n1;
            double tol = 1e-12 * (1 + std::fabs(e.g));
            if (e.n1 == 1 || val > e.g + tol) {
                e.g = val;
                e.sg = e.Sg = t.a;
            } else if (val >= e.g - tol) {
                e.sg = std::min(e.sg, t.a);
                e.Sg = std::max(e.Sg, t.a);
            }
        } else {
            ++e.n2;
            double tol = 1e-12 * (1 + std::fabs(e.h));
            if (e.n2 == 1 || val < e.h - tol) {
                e.h = val;
                e.sh = e.Sh = t.a;
            } else if (val <= e.h + tol) {
                e.sh = std::min(e.sh, t.a);
                e.Sh = std::max(e.Sh, t.a);
            }
        }
    }
    return e;
}

enum class Step { MoveLeft, MoveRight, OptimalHere, Infeasible };

inline Step step_decision(const Envelope& e) {
    double inf = std::numeric_limits<double>::infinity();
    double h = e.n2 ? e.h : inf;
    double sh = e.n2 ? e.sh : inf;
    double Sh = e.n2 ? e.Sh : -inf;
    double tol = 1e-9 * (1 + std::fabs(e.g) + std::fabs(h));
    if (e.g <= h + tol) {
        // The upper-envelope tie slopes constrain the move only when the two
        // envelopes actually touch at xm.
        bool tied = e.g >= h - tol;
        if (e.sg > 0 && (!tied || e.sg >= Sh)) return Step::MoveLeft;
        if (e.Sg < 0 && (!tied || e.Sg <= sh)) return Step::MoveRight;
        return Step::OptimalHere;
    }
    if (e.sg > Sh) return Step::MoveLeft;
    if (e.Sg < sh) return Step::MoveRight;
    return Step::Infeasible;
}

namespace lp2detail {

struct Res {
    LpVerdict verdict = LpVerdict::Infeasible;
    double x = 0, y = 0;
};

// Direct solve over a workspace copy of the survivors: evaluate the envelope
// at interval ends, all pairwise intersections, and far probes for the
// unbounded directions.
inline Res solve_small(const std::vector<TransRow>& rows, double lo, double hi) {
    double inf = std::numeric_limits<double>::infinity();
    bool any_lower = false;
    for (const auto& r : rows) any_lower |= r.cls == RowClass::Lower;
    auto env = [&](double x, double& g, double& h) {
        g = -inf;
        h = inf;
        for (const auto& r : rows) {
            double v = r.a * x + r.b;
            if (r.cls == RowClass::Lower) g = std::max(g, v);
            else h = std::min(h, v);
        }
    };
    auto feasible = [&](double g, double h) {
        return g <= h + 1e-9 * (1 + std::fabs(g) + std::fabs(h));
    };
    if (!any_lower) {
        double x0 = std::min(std::max(0.0, lo), hi);
        if (!std::isfinite(x0)) x0 = std::isfinite(lo) ? lo : (std::isfinite(hi) ? hi : 0.0);
        double g, h;
        env(x0, g, h);
        double y0 = (h == inf ? 0.0 : h) - 1;
        return {LpVerdict::Unbounded, x0, y0};
    }

    Res best;
    bool have = false;
    auto consider = [&](double x) {
        if (!std::isfinite(x) || x < lo || x > hi) return;
        double g, h;
        env(x, g, h);
        if (!feasible(g, h)) return;
        if (!have || g < best.y) {
            best = {LpVerdict::Optimal, x, g};
            have = true;
        }
    };
    consider(std::min(std::max(0.0, lo), hi));
    if (std::isfinite(lo)) consider(lo);
    if (std::isfinite(hi)) consider(hi);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = i + 1; j < rows.size(); ++j)
            if (rows[i].a != rows[j].a)
                consider((rows[i].b - rows[j].b) / (rows[j].a - rows[i].a));

    double probe = 1e18;
    for (double x : {-probe, probe}) {
        if (x < lo || x > hi) continue;
        double g, h;
        env(x, g, h);
        if (!feasible(g, h)) continue;
        if (have && g >= best.y - 1e-6 * (1 + std::fabs(best.y))) continue;
        return {LpVerdict::Unbounded, x, g};
    }
    if (have) return best;
    return {LpVerdict::Infeasible, 0, 0};
}

}  // namespace lp2detail

struct Lp2Config {
    std::size_t select_k = 1;
};

struct Lp2Stats {
    std::size_t rounds = 0;
    std::size_t initial_valid = 0;
    bool progress_ok = true;  // every round pruned at least its provable share
};

// Core solver over any copyable sequential view of Constraint2 rows.
template <class View>
Lp2Result solve_lp2_view(View view, double c1, double c2, WorkspaceMeter& meter,
                         const Lp2Config& cfg = {}, Lp2Stats* stats = nullptr,
                         Lp2Trace* trace = nullptr) {
    MeterScope frame(meter, 24);
    double inf = std::numeric_limits<double>::infinity();
    if (!std::isfinite(c1) || !std::isfinite(c2)) throw DomainError("objective not finite");
    Transform2 tf(c1, c2);

    // Entry scan: reject bad rows, fold verticals, spot trivial infeasibility.
    double vlo = -inf, vhi = inf;
    bool any_lower = false;
    Lp2Result infeasible{LpVerdict::Infeasible, 0, 0, 0};
    for (std::size_t i = 0; i < view.size(); ++i) {
        Constraint2 c = view.element(i);
        if (!std::isfinite(c.a) || !std::isfinite(c.b) || !std::isfinite(c.beta))
            throw DomainError("constraint row not finite");
        TransRow t = tf.row(c, i);
        switch (t.cls) {
            case RowClass::ZeroBad: return infeasible;
            case RowClass::VertLo: vlo = std::max(vlo, t.b); break;
            case RowClass::VertHi: vhi = std::min(vhi, t.b); break;
            case RowClass::Lower: any_lower = true; break;
            default: break;
        }
    }
    if (vlo > vhi) return infeasible;

    auto finish = [&](lp2detail::Res r) {
        Lp2Result out;
        out.status = r.verdict;
        if (r.verdict != LpVerdict::Infeasible) {
            tf.back_map(r.x, r.y, out.x1, out.x2);
            out.value = tf.feasibility_mode() ? 0.0 : r.y;
            if (tf.feasibility_mode()) out.status = LpVerdict::Optimal;
        }
        return out;
    };

    if (!any_lower) {
        // No lower bound on y: feasible and unbounded below.
        double x0 = std::min(std::max(0.0, vlo), vhi);
        if (!std::isfinite(x0)) x0 = std::isfinite(vlo) ? vlo : (std::isfinite(vhi) ? vhi : 0.0);
        double h = inf;
        for (std::size_t i = 0; i < view.size(); ++i) {
            TransRow t = tf.row(view.element(i), i);
            if (t.cls == RowClass::Upper) h = std::min(h, t.a * x0 + t.b);
        }
        return finish({LpVerdict::Unbounded, x0, (h == inf ? 0.0 : h) - 1});
    }

    Lp2Log log(view.size(), meter);
    log.set_base_interval(vlo, vhi);
    lp2detail::Res res;
    for (;;) {
        std::size_t levels = log.rounds();
        double lo, hi;
        log.interval(levels, lo, hi);

        std::size_t v = 0, n1 = 0, n2 = 0;
        {
            MeterScope cw(meter, ValidRowCursor<View>::words_for(levels));
            ValidRowCursor<View> cur(view, tf, log, levels);
            TransRow t;
            while (cur.next(t)) {
                ++v;
                (t.cls == RowClass::Lower ? n1 : n2) += 1;
            }
        }
        if (stats && levels == 0) stats->initial_valid = v;

        if (v <= 16) {
            MeterScope cw(meter, ValidRowCursor<View>::words_for(levels) + 4 * 16);
            ValidRowCursor<View> cur(view, tf, log, levels);
            std::vector<TransRow> rows;
            rows.reserve(16);
            TransRow t;
            while (cur.next(t)) rows.push_back(t);
            res = lp2detail::solve_small(rows, lo, hi);
            break;
        }

        std::size_t m;
        double xm = 0;
        bool decided = false;
        {
            PairXSeq<View> pairs(view, tf, log, levels, lo, hi, meter);
            m = pairs.size();
            if (m > 0) {
                xm = select_ak(pairs, (m + 1) / 2, SelectConfig{cfg.select_k}, meter).value;
                decided = true;
            }
        }
        if (decided) {
            Envelope e = envelope_at(view, tf, log, levels, xm);
            Step s = step_decision(e);
            if (s == Step::OptimalHere) {
                res = {LpVerdict::Optimal, xm, e.g};
                break;
            }
            if (s == Step::Infeasible) {
                res = {LpVerdict::Infeasible, 0, 0};
                break;
            }
            log.append(xm, s == Step::MoveRight, true);
        } else {
            log.append(0, false, false);
        }

        if (stats) {
            ++stats->rounds;
            // Every interval/same-slope pair prunes one row; at least half the
            // eligible pairs land on the decided side of the median.
            std::size_t pairs_formed = n1 / 2 + n2 / 2;
            std::size_t vnext = 0;
            MeterScope cw(meter, ValidRowCursor<View>::words_for(log.rounds()));
            ValidRowCursor<View> cur(view, tf, log, log.rounds());
            TransRow t;
            while (cur.next(t)) ++vnext;
            std::size_t min_prunes = (pairs_formed - m) + (decided ? (m + 1) / 2 : 0);
            if (vnext > v - min_prunes) stats->progress_ok = false;
        }
    }
    if (trace) *trace = log.snapshot();
    return finish(res);
}

inline Lp2Result solve_lp2(const ReadOnlyView<Constraint2>& view, double c1, double c2,
                           WorkspaceMeter& meter, const Lp2Config& cfg = {},
                           Lp2Stats* stats = nullptr, Lp2Trace* trace = nullptr) {
    return solve_lp2_view(Span2View{&view}, c1, c2, meter, cfg, stats, trace);
}

}  // namespace rops
