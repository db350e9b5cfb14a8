#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "rops/lp2d.hpp"
#include "rops/workspace.hpp"

namespace rops {

struct Lp3Result {
    LpVerdict status = LpVerdict::Infeasible;
    double x1 = 0, x2 = 0, x3 = 0;  // for Unbounded, a feasible witness
    double value = 0;
};

// z >= a*x + b*y + c (Lower), z <= ... (Upper), 0 >= a*x + b*y + c (Zero).
enum class RowClass3 : int { Lower, Upper, Zero, ZeroOk, ZeroBad };

struct TransRow3 {
    RowClass3 cls = RowClass3::ZeroOk;
    double a = 0, b = 0, c = 0;
    std::size_t idx = 0;
};

// Objective substitution z = d1*x1 + d2*x2 + d3*x3, eliminating one original
// coordinate with a nonzero objective coefficient (preferring x3, then x2,
// then x1); the remaining two become (x, y).  A fully degenerate objective
// becomes a feasibility run under the surrogate min x3.
class Transform3 {
  public:
    Transform3(double d1, double d2, double d3) : d_{d1, d2, d3} {
        if (d_[2] != 0) p_ = 2;
        else if (d_[1] != 0) p_ = 1;
        else if (d_[0] != 0) p_ = 0;
        else {
            feasibility_ = true;
            p_ = 2;
            d_[2] = 1;
        }
        q_ = p_ == 0 ? 1 : 0;
        r_ = p_ == 2 ? 1 : 2;
    }

    bool feasibility_mode() const { return feasibility_; }

    TransRow3 row(const Constraint3& c, std::size_t idx) const {
        // Rows arrive as a*x1 + b*x2 + c*x3 <= beta; work in the >= form.
        double B[3] = {-c.a, -c.b, -c.c};
        double rhs = -c.beta;
        double r0 = B[p_] / d_[p_];
        double px = B[q_] - B[p_] * (d_[q_] / d_[p_]);
        double py = B[r_] - B[p_] * (d_[r_] / d_[p_]);
        TransRow3 t;
        t.idx = idx;
        if (r0 != 0) {
            t.cls = r0 > 0 ? RowClass3::Lower : RowClass3::Upper;
            t.a = -px / r0;
            t.b = -py / r0;
            t.c = rhs / r0;
        } else if (px != 0 || py != 0) {
            t.cls = RowClass3::Zero;
            t.a = -px;
            t.b = -py;
            t.c = rhs;
        } else {
            t.cls = rhs > 0 ? RowClass3::ZeroBad : RowClass3::ZeroOk;
        }
        return t;
    }

    void back_map(double x, double y, double z, double& x1, double& x2, double& x3) const {
        double out[3];
        out[q_] = x;
        out[r_] = y;
        out[p_] = (z - d_[q_] * x - d_[r_] * y) / d_[p_];
        x1 = out[0];
        x2 = out[1];
        x3 = out[2];
    }

  private:
    double d_[3];
    int p_ = 2, q_ = 0, r_ = 1;
    bool feasibility_ = false;
};

// One logged round.  (ux,uy) is the unit direction of the median-gradient
// line; v = (-uy, ux) is its normal.  L_H is {p.v == ym}, L_V is {p.u == xm}.
// bith: the optimum lies on the p.v > ym side; bitv: on the p.u < xm side.
// A round with geom == false pruned through equal-gradient pairs alone.
struct Lp3Round {
    double ux = 1, uy = 0, ym = 0, xm = 0;
    bool geom = false, have_xm = false, bith = false, bitv = false;
};

struct Lp3Trace {
    std::vector<Lp3Round> rounds;
};

// Round log with incremental metering: capacity is generous, but only rounds
// actually appended are charged.
class Lp3Log {
  public:
    Lp3Log(std::size_t n, WorkspaceMeter& meter) : cap_(cap_for(n)), meter_(&meter) {}

    Lp3Log(const Lp3Trace& t, WorkspaceMeter& meter) : cap_(t.rounds.size() + 1), meter_(&meter) {
        for (const auto& r : t.rounds) append(r);
    }

    static std::size_t cap_for(std::size_t n) {
        double l2 = std::log2(static_cast<double>(std::max<std::size_t>(n, 2)));
        return static_cast<std::size_t>(12 * l2) + 48;
    }

    std::size_t rounds() const { return rounds_.size(); }
    std::size_t capacity() const { return cap_; }
    const Lp3Round& round(std::size_t r) const { return rounds_[r]; }

    void append(const Lp3Round& r) {
        if (rounds_.size() == cap_) throw CapacityError("lp3 round log full");
        rounds_.push_back(r);
        scopes_.emplace_back(*meter_, 5);
    }

    Lp3Trace snapshot() const { return {rounds_}; }

  private:
    std::size_t cap_;
    WorkspaceMeter* meter_;
    std::vector<Lp3Round> rounds_;
    std::vector<MeterScope> scopes_;
};

// Fate of a completed same-class pair under one logged round.
// 0: both survive, 1: prune p, 2: prune q.
//
// Equal-gradient pairs keep the tighter intercept.  Otherwise the pair's
// line f_p - f_q = 0 is tested against the recorded quadrant: if the open
// quadrant known to hold the optimum lies strictly on one side of the line,
// the member dominated on that side is pruned.  In frame coordinates
// (s, t) = (p.u, p.v) the quadrant-avoidance test is: the line's frame slope
// must point away from the quadrant (sign matching bith == bitv) and its
// value at s = xm must fall on the non-optimum side of ym.
inline int pair_fate3(const TransRow3& p, const TransRow3& q, const Lp3Round& R) {
    if (p.a == q.a && p.b == q.b) {
        if (p.c == q.c) return 2;
        bool keep_p = p.cls == RowClass3::Upper ? p.c < q.c : p.c > q.c;
        return keep_p ? 2 : 1;
    }
    if (!R.geom) return 0;
    double da = p.a - q.a, db = p.b - q.b, dc = p.c - q.c;
    double gu = da * R.ux + db * R.uy;
    double gv = -da * R.uy + db * R.ux;
    // The intercept comparisons carry a relative tolerance: the lines that
    // defined the medians pass through the corner itself, and recomputing
    // their value at xm takes a different rounding path than the median
    // selection did.  Without the slack, identical rounds can repeat forever.
    auto near_le = [](double x, double y) {
        return x <= y + 1e-9 * (std::fabs(x) + std::fabs(y) + 1);
    };
    bool avoid = false;
    if (gv == 0) {
        // Line parallel to the frame's v axis: only L_V can separate it.
        if (R.have_xm) {
            double sL = -dc / gu;
            avoid = R.bitv ? near_le(R.xm, sL) : near_le(sL, R.xm);
        }
    } else {
        double sigma = -gu / gv;
        bool signok = (R.bith == R.bitv) ? sigma >= 0 : sigma <= 0;
        if (signok) {
            if (!R.have_xm) {
                // No L_V this round: only lines parallel to u can avoid the
                // half-plane beyond L_H.
                double y0 = -dc / gv;
                avoid = sigma == 0 && (R.bith ? near_le(y0, R.ym) : near_le(R.ym, y0));
            } else {
                double at_xm = -(gu * R.xm + dc) / gv;
                avoid = R.bith ? near_le(at_xm, R.ym) : near_le(R.ym, at_xm);
            }
        }
    }
    if (!avoid) return 0;
    // Sign of f_p - f_q on the optimum's side of the line.
    double du = R.bitv ? -1.0 : 1.0;
    double dv = R.bith ? 1.0 : -1.0;
    double s = du * gu + dv * gv;
    if (s == 0) return 0;
    bool prune_q = (s > 0) != (p.cls == RowClass3::Upper);
    return prune_q ? 2 : 1;
}

// Streams the rows still valid after `levels` logged rounds, in the canonical
// order: per-class pairing in arrival order (classes I1/I2/I3), survivors
// emitted pending-first, parity leftovers flushed upward at end of stream.
// Copyable; the owner charges words_for(levels) to its meter.
class Valid3Cursor {
  public:
    Valid3Cursor(const ReadOnlyView<Constraint3>& view, const Transform3& tf,
                 const Lp3Log& log, std::size_t levels)
        : view_(&view), tf_(&tf), log_(&log), nlev_(levels), lev_(levels) {
        restart();
    }

    static std::size_t words_for(std::size_t levels) { return 4 * levels + 24; }

    void restart() {
        for (auto& l : lev_) l.has = 0;
        outq_.clear();
        qhead_ = 0;
        pos_ = 0;
        flush_ = 0;
    }

    bool next(TransRow3& out) {
        for (;;) {
            if (qhead_ < outq_.size()) {
                out = outq_[qhead_++];
                if (qhead_ == outq_.size()) {
                    outq_.clear();
                    qhead_ = 0;
                }
                return true;
            }
            if (pos_ < view_->size()) {
                std::size_t i = pos_++;
                TransRow3 t = tf_->row(view_->element(i), i);
                if (t.cls != RowClass3::ZeroOk && t.cls != RowClass3::ZeroBad) feed(0, t);
                continue;
            }
            if (flush_ < nlev_) {
                Level& l = lev_[flush_];
                bool fed = false;
                for (int s = 0; s < 3 && !fed; ++s) {
                    if (!(l.has & (1 << s))) continue;
                    l.has = static_cast<unsigned char>(l.has & ~(1 << s));
                    std::size_t i = l.pend[s];
                    feed(flush_ + 1, tf_->row(view_->element(i), i));
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
        std::size_t pend[3] = {0, 0, 0};
        unsigned char has = 0;
    };

    void feed(std::size_t level, const TransRow3& t) {
        if (level >= nlev_) {
            outq_.push_back(t);
            return;
        }
        Level& l = lev_[level];
        int s = static_cast<int>(t.cls);
        if (!(l.has & (1 << s))) {
            l.pend[s] = t.idx;
            l.has = static_cast<unsigned char>(l.has | (1 << s));
            return;
        }
        TransRow3 p = tf_->row(view_->element(l.pend[s]), l.pend[s]);
        l.has = static_cast<unsigned char>(l.has & ~(1 << s));
        // Every recorded quadrant holds the optimum, so the pair's line may
        // be tested against all of them; the earliest deciding round wins.
        int fate = 0;
        for (std::size_t r = 0; r <= level && fate == 0; ++r)
            fate = pair_fate3(p, t, log_->round(r));
        if (fate != 1) feed(level + 1, p);
        if (fate != 2) feed(level + 1, t);
    }

    const ReadOnlyView<Constraint3>* view_;
    const Transform3* tf_;
    const Lp3Log* log_;
    std::size_t nlev_;
    std::vector<Level> lev_;
    std::vector<TransRow3> outq_;
    std::size_t qhead_ = 0, pos_ = 0, flush_ = 0;
};

struct Lp3Config {
    std::size_t select_k = 1;
};

struct Lp3Stats {
    std::size_t rounds = 0;
    std::size_t initial_valid = 0;
    std::size_t testing_lines = 0;
    bool progress_ok = true;  // every geometric round pruned its provable share
};

Lp3Result solve_lp3(const ReadOnlyView<Constraint3>& view, double d1, double d2, double d3,
                    WorkspaceMeter& meter, const Lp3Config& cfg = {}, Lp3Stats* stats = nullptr,
                    Lp3Trace* trace = nullptr);

}  // namespace rops
