// Three-variable LP by prune-and-search over read-only rows.
//
// Each round: pair valid rows within their class, turn unequal-gradient pairs
// into lines, take the median line gradient mu, pair lines straddling mu in
// lockstep, and take medians of the pair intersections' frame coordinates to
// place two testing lines (L_H along the mu direction, L_V across it).  The
// side tests pin the optimum to an open quadrant; every line whose side is
// thereby determined loses the dominated member of its source pair.  The
// accumulated quadrants are carried as explicit half-plane rows so that the
// reduced problem provably keeps the original optimum.

#include "rops/lp3d.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "rops/selection.hpp"

namespace rops {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Dot product that rounds catastrophic cancellation to an exact zero: region
// half-planes from a round whose frame nearly matches the current one come
// out parallel to the testing line up to an ulp, and dividing by that ulp
// would turn a constant row into an absurd coordinate bound.
inline double dot_snap(double a, double b, double x, double y) {
    double p = a * x, q = b * y;
    double s = p + q;
    if (std::fabs(s) <= 4e-16 * (std::fabs(p) + std::fabs(q))) return 0;
    return s;
}

struct LineRec {
    double da = 0, db = 0, dc = 0;  // da*x + db*y + dc = 0, (da,db) != 0
};

// Arrival-order pairing of valid rows into lines; equal-gradient pairs are
// consumed silently (the replay filter prunes them without geometry).
struct LineStream {
    Valid3Cursor cur;
    TransRow3 pend[3];
    unsigned char has = 0;

    LineStream(const ReadOnlyView<Constraint3>& v, const Transform3& tf, const Lp3Log& log,
               std::size_t levels)
        : cur(v, tf, log, levels) {}

    void restart() {
        cur.restart();
        has = 0;
    }

    bool next(LineRec& out) {
        TransRow3 t;
        while (cur.next(t)) {
            int s = static_cast<int>(t.cls);
            if (!(has & (1 << s))) {
                pend[s] = t;
                has = static_cast<unsigned char>(has | (1 << s));
                continue;
            }
            TransRow3 p = pend[s];
            has = static_cast<unsigned char>(has & ~(1 << s));
            if (p.a == t.a && p.b == t.b) continue;
            out = {p.a - t.a, p.b - t.b, p.c - t.c};
            return true;
        }
        return false;
    }
};

// Gradient of a line, verticals ordered last.
inline double gradient_of(const LineRec& l) {
    if (l.db == 0) return kInf;
    return -l.da / l.db;
}

struct GradStream {
    LineStream ls;
    GradStream(const ReadOnlyView<Constraint3>& v, const Transform3& tf, const Lp3Log& log,
               std::size_t levels)
        : ls(v, tf, log, levels) {}
    void restart() { ls.restart(); }
    bool next(double& out) {
        LineRec l;
        if (!ls.next(l)) return false;
        out = gradient_of(l);
        return true;
    }
};

// Frame classification: side < 0 for lines sloping below the mu direction,
// > 0 above, 0 exactly along it (split by alternation), 2 for frame-vertical.
struct Frame {
    double ux = 1, uy = 0;
    double vx() const { return -uy; }
    double vy() const { return ux; }
};

inline Frame frame_of(double mu) {
    if (std::isinf(mu)) return {0, 1};
    double n = 1.0 / std::sqrt(1.0 + mu * mu);
    return {n, mu * n};
}

struct PairGeom {
    bool parallel = false;  // both lines along u (an M_P pair)
    double y = 0, x = 0;    // frame coordinates; x undefined for parallel
};

// Lockstep pairing of lines straddling the median gradient: the k-th line
// sloping below mu meets the k-th sloping above; lines exactly along mu
// alternate between the two sides.
struct PairStream {
    LineStream low, high;
    Frame fr;
    int zlow = 0, zhigh = 0;

    PairStream(const ReadOnlyView<Constraint3>& v, const Transform3& tf, const Lp3Log& log,
               std::size_t levels, Frame f)
        : low(v, tf, log, levels), high(v, tf, log, levels), fr(f) {}

    void restart() {
        low.restart();
        high.restart();
        zlow = zhigh = 0;
    }

    // want: 0 = a low-side line, 1 = high-side.
    bool pull(LineStream& ls, int& zc, int want, LineRec& out) {
        LineRec l;
        while (ls.next(l)) {
            double gu = l.da * fr.ux + l.db * fr.uy;
            double gv = -l.da * fr.uy + l.db * fr.ux;
            int side;
            if (gv == 0) side = 1;
            else {
                double sg = -gu / gv;
                side = sg < 0 ? 0 : (sg > 0 ? 1 : (zc++ % 2));
            }
            if (side == want) {
                out = l;
                return true;
            }
        }
        return false;
    }

    bool next(LineRec& a, LineRec& b) {
        return pull(low, zlow, 0, a) && pull(high, zhigh, 1, b);
    }

    PairGeom geometry(const LineRec& a, const LineRec& b) const {
        double gua = a.da * fr.ux + a.db * fr.uy, gva = -a.da * fr.uy + a.db * fr.ux;
        double gub = b.da * fr.ux + b.db * fr.uy, gvb = -b.da * fr.uy + b.db * fr.ux;
        PairGeom g;
        if (gua == 0 && gub == 0 && gva != 0 && gvb != 0) {
            g.parallel = true;
            g.y = 0.5 * (-a.dc / gva - b.dc / gvb);
            return g;
        }
        double det = a.da * b.db - b.da * a.db;
        if (det == 0) {
            g.parallel = true;
            return g;
        }
        double px = (a.db * b.dc - b.db * a.dc) / det;
        double py = (b.da * a.dc - a.da * b.dc) / det;
        g.y = -px * fr.uy + py * fr.ux;
        g.x = px * fr.ux + py * fr.uy;
        return g;
    }
};

struct YStream {
    PairStream ps;
    YStream(const ReadOnlyView<Constraint3>& v, const Transform3& tf, const Lp3Log& log,
            std::size_t levels, Frame f)
        : ps(v, tf, log, levels, f) {}
    void restart() { ps.restart(); }
    bool next(double& out) {
        LineRec a, b;
        if (!ps.next(a, b)) return false;
        out = ps.geometry(a, b).y;
        return true;
    }
};

// x coordinates of intersecting pairs on the non-optimum side of L_H.
struct XStream {
    PairStream ps;
    double ym;
    bool bith;
    XStream(const ReadOnlyView<Constraint3>& v, const Transform3& tf, const Lp3Log& log,
            std::size_t levels, Frame f, double ym_, bool bith_)
        : ps(v, tf, log, levels, f), ym(ym_), bith(bith_) {}
    void restart() { ps.restart(); }
    bool next(double& out) {
        LineRec a, b;
        while (ps.next(a, b)) {
            PairGeom g = ps.geometry(a, b);
            if (g.parallel) continue;
            if (bith ? g.y <= ym : g.y >= ym) {
                out = g.x;
                return true;
            }
        }
        return false;
    }
};

// Rescannable adapter over any restartable double stream, with the usual
// checkpoint copy so selection's restarts stay cheap.
template <class S>
class KeySeq final : public Rescannable<Keyed> {
  public:
    KeySeq(const S& s, std::size_t charge_words, WorkspaceMeter& meter)
        : live_(s), ckpt_(s), charge_(meter, charge_words) {
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
    S live_, ckpt_;
    MeterScope charge_;
    std::size_t count_ = 0, pos_ = 0, ckpt_pos_ = 0;
};

// ---------------------------------------------------------------------------
// Testing lines.

// Half-plane 0 >= ea*x + eb*y + ec implied by one recorded side bit.
struct HalfPlane {
    double ea = 0, eb = 0, ec = 1;  // default vacuous (0 >= 0*x + 0*y + 1 is
                                    // never emitted; vacuous uses ec = -1 form
                                    // in Constraint2 mapping below)
    bool active = false;
};

inline HalfPlane region_halfplane(const Lp3Round& R, int which) {
    HalfPlane h;
    if (!R.geom) return h;
    Frame f{R.ux, R.uy};
    if (which == 0) {
        h.active = true;
        if (R.bith) {  // optimum has p.v > ym: require p.v >= ym
            h.ea = -f.vx();
            h.eb = -f.vy();
            h.ec = R.ym;
        } else {
            h.ea = f.vx();
            h.eb = f.vy();
            h.ec = -R.ym;
        }
    } else if (R.have_xm) {
        h.active = true;
        if (R.bitv) {  // optimum has p.u < xm: require p.u <= xm
            h.ea = R.ux;
            h.eb = R.uy;
            h.ec = -R.xm;
        } else {
            h.ea = -R.ux;
            h.eb = -R.uy;
            h.ec = R.xm;
        }
    }
    return h;
}

// Virtual Constraint2 array seen by the inner 2D solver: the valid 3D rows
// restricted to the testing line come first (in canonical stream order),
// then the accumulated region half-planes, then one slot for the half-plane
// decided earlier in the same round.  Sequential access only; copies carry
// their own scan state.
struct OnLineView {
    const ReadOnlyView<Constraint3>* base;
    const Transform3* tf;
    const Lp3Log* log;
    std::size_t levels;
    double p0x, p0y, wx, wy;
    HalfPlane extra;
    Valid3Cursor cur;
    std::size_t next_j = 0;
    bool done = false;

    OnLineView(const ReadOnlyView<Constraint3>& b, const Transform3& t, const Lp3Log& lg,
               std::size_t lv, double px, double py, double wx_, double wy_, HalfPlane ex)
        : base(&b), tf(&t), log(&lg), levels(lv), p0x(px), p0y(py), wx(wx_), wy(wy_),
          extra(ex), cur(b, t, lg, lv) {}

    std::size_t size() const { return base->size() + 2 * levels + 1; }

    Constraint2 on_line(double a, double b, double c, RowClass3 cls) const {
        double A = dot_snap(a, b, wx, wy);
        double B = a * p0x + b * p0y + c;
        switch (cls) {
            case RowClass3::Lower: return {A, -1, -B};
            case RowClass3::Upper: return {-A, 1, B};
            default: return {A, 0, -B};  // 0 >= A t + B
        }
    }

    Constraint2 tail_row(std::size_t k) const {
        HalfPlane h;
        if (k < 2 * levels) h = region_halfplane(log->round(k / 2), static_cast<int>(k % 2));
        else h = extra;
        if (!h.active) return {0, 0, 1};
        return on_line(h.ea, h.eb, h.ec, RowClass3::Zero);
    }

    Constraint2 element(std::size_t j) {
        std::size_t n = base->size();
        if (j >= n) return tail_row(j - n);
        if (j < next_j) {
            cur.restart();
            next_j = 0;
            done = false;
        }
        TransRow3 t;
        while (next_j <= j) {
            if (done || !cur.next(t)) {
                done = true;
                next_j = j + 1;
                return {0, 0, 1};
            }
            ++next_j;
        }
        return on_line(t.a, t.b, t.c, t.cls);
    }
};

struct TLResult {
    enum Kind { Side, Found, UnboundedGlobal, InfeasibleGlobal } kind = Side;
    int side = 0;       // +1: optimum at positive perpendicular offset
    double t = 0, z = 0;
};

// On-line form of a row plus its perpendicular rate: value along the line is
// s * t + o; moving off the line by w in direction q shifts the value by D*w.
struct TightRow {
    double s = 0, D = 0;
    int cls = 0;  // 0 lower, 1 upper, 2 zero
};

// First-order rate of the on-line optimal value when the line moves by +1 in
// the perpendicular direction (coefficients pre-multiplied by the direction
// sign).  Brute force over the tight rows: candidates are crossings of the
// shifted-value lines plus far probes.
double tight_rate(const std::vector<TightRow>& rows, double dir) {
    std::vector<double> cand;
    cand.push_back(0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].s != 0 && rows[i].cls == 2) cand.push_back(-dir * rows[i].D / rows[i].s);
        for (std::size_t j = i + 1; j < rows.size(); ++j)
            if (rows[i].s != rows[j].s)
                cand.push_back(dir * (rows[j].D - rows[i].D) / (rows[i].s - rows[j].s));
    }
    cand.push_back(-1e12);
    cand.push_back(1e12);
    // The slack must not scale with the probe offsets: two parallel tight
    // rows that exclude each other stay excluded at every dt, and a
    // magnitude-relative test would wave them through at the far probes.
    double scale = 1;
    for (const auto& r : rows) scale = std::max(scale, std::fabs(r.D));
    double eps = 1e-9 * scale;
    double best = kInf;
    for (double dt : cand) {
        if (!std::isfinite(dt)) continue;
        double g = -kInf, h = kInf;
        bool ok = true;
        for (const auto& r : rows) {
            double v = r.s * dt + dir * r.D;
            if (r.cls == 0) g = std::max(g, v);
            else if (r.cls == 1) h = std::min(h, v);
            else if (v > eps + 4e-16 * std::fabs(r.s * dt)) ok = false;
        }
        if (!ok || g > h + eps + 4e-16 * (std::fabs(g) + std::fabs(h))) continue;
        best = std::min(best, g == -kInf ? 0.0 : g);
    }
    return best;
}

// Same, for the infeasibility gap (max lower - min upper) at a conflict point.
double gap_rate(const std::vector<TightRow>& rows, double dir) {
    std::vector<double> cand;
    cand.push_back(0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].s != 0 && rows[i].cls == 2) cand.push_back(-dir * rows[i].D / rows[i].s);
        for (std::size_t j = i + 1; j < rows.size(); ++j)
            if (rows[i].s != rows[j].s)
                cand.push_back(dir * (rows[j].D - rows[i].D) / (rows[i].s - rows[j].s));
    }
    cand.push_back(-1e12);
    cand.push_back(1e12);
    double scale = 1;
    for (const auto& r : rows) scale = std::max(scale, std::fabs(r.D));
    double eps = 1e-9 * scale;
    double best = kInf;
    for (double dt : cand) {
        if (!std::isfinite(dt)) continue;
        double g = -kInf, h = kInf;
        bool ok = true;
        for (const auto& r : rows) {
            double v = r.s * dt + dir * r.D;
            if (r.cls == 0) g = std::max(g, v);
            else if (r.cls == 1) h = std::min(h, v);
            else if (v > eps + 4e-16 * std::fabs(r.s * dt)) ok = false;
        }
        if (!ok || g == -kInf || h == kInf) continue;
        best = std::min(best, g - h);
    }
    return best;
}

// Iterate every on-line row (valid rows, region half-planes, the extra
// half-plane) with its perpendicular coefficient.
template <class F>
void scan_on_line(const ReadOnlyView<Constraint3>& view, const Transform3& tf, const Lp3Log& log,
                  std::size_t levels, double p0x, double p0y, double wx, double wy, double qx,
                  double qy, const HalfPlane& extra, F&& fn) {
    Valid3Cursor cur(view, tf, log, levels);
    TransRow3 t;
    while (cur.next(t)) {
        double A = dot_snap(t.a, t.b, wx, wy);
        double B = t.a * p0x + t.b * p0y + t.c;
        double D = dot_snap(t.a, t.b, qx, qy);
        fn(static_cast<int>(t.cls), A, B, D);
    }
    auto emit_hp = [&](const HalfPlane& h) {
        if (!h.active) return;
        double A = dot_snap(h.ea, h.eb, wx, wy);
        double B = h.ea * p0x + h.eb * p0y + h.ec;
        double D = dot_snap(h.ea, h.eb, qx, qy);
        fn(2, A, B, D);
    };
    for (std::size_t r = 0; r < levels; ++r) {
        emit_hp(region_halfplane(log.round(r), 0));
        emit_hp(region_halfplane(log.round(r), 1));
    }
    emit_hp(extra);
}

// Side analysis at a point where the on-line problem is feasible with
// optimum (tstar, zstar): collect rows tight there and compare the one-sided
// rates of the value function across the line.
TLResult side_feasible(const ReadOnlyView<Constraint3>& view, const Transform3& tf,
                       const Lp3Log& log, std::size_t levels, double p0x, double p0y, double wx,
                       double wy, double qx, double qy, const HalfPlane& extra, double tstar,
                       double zstar) {
    std::vector<TightRow> tight;
    double scale = 1 + std::fabs(zstar);
    scan_on_line(view, tf, log, levels, p0x, p0y, wx, wy, qx, qy, extra,
                 [&](int cls, double A, double B, double D) {
                     double v = A * tstar + B;
                     double tol = 1e-7 * (scale + std::fabs(A * tstar) + std::fabs(B));
                     bool is_tight = cls == 2 ? std::fabs(v) <= tol : std::fabs(v - zstar) <= tol;
                     if (is_tight && tight.size() < 192) tight.push_back({A, D, cls});
                 });
    double dscale = 1;
    for (const auto& r : tight) dscale = std::max(dscale, std::fabs(r.D));
    double eps = 1e-7 * dscale;
    if (tight_rate(tight, +1) < -eps) return {TLResult::Side, +1, 0, 0};
    if (tight_rate(tight, -1) < -eps) return {TLResult::Side, -1, 0, 0};
    return {TLResult::Found, 0, tstar, zstar};
}

TLResult side_infeasible(const ReadOnlyView<Constraint3>& view, const Transform3& tf,
                         const Lp3Log& log, std::size_t levels, double p0x, double p0y,
                         double wx, double wy, double qx, double qy, const HalfPlane& extra) {
    // Pass 1: t-interval from zero-class rows and constant conflicts.
    double tlo = -kInf, thi = kInf;
    bool cviol = false;
    double cmin = kInf, cmax = -kInf;
    scan_on_line(view, tf, log, levels, p0x, p0y, wx, wy, qx, qy, extra,
                 [&](int cls, double A, double B, double D) {
                     if (cls != 2) return;
                     if (A == 0) {
                         if (B > 0) {
                             cviol = true;
                             cmin = std::min(cmin, D);
                             cmax = std::max(cmax, D);
                         }
                         return;
                     }
                     double bound = -B / A;
                     if (A > 0) thi = std::min(thi, bound);
                     else tlo = std::max(tlo, bound);
                 });
    if (cviol) {
        // Rows violated identically in t must all relax in the chosen
        // direction; a conflict means no parallel line is feasible.
        if (cmax < 0) return {TLResult::Side, +1, 0, 0};
        if (cmin > 0) return {TLResult::Side, -1, 0, 0};
        return {TLResult::InfeasibleGlobal, 0, 0, 0};
    }
    double itol = 1e-9 * (1 + std::fabs(tlo) + std::fabs(thi));
    if (tlo > thi + itol) {
        // Empty t-interval: track how the binding bounds move sideways.
        double lo_max = -kInf, lo_min = kInf, hi_max = -kInf, hi_min = kInf;
        scan_on_line(view, tf, log, levels, p0x, p0y, wx, wy, qx, qy, extra,
                     [&](int cls, double A, double B, double D) {
                         if (cls != 2 || A == 0) return;
                         double bound = -B / A, rate = -D / A;
                         double tol = 1e-9 * (1 + std::fabs(bound));
                         if (A > 0 && bound <= thi + tol) {
                             hi_max = std::max(hi_max, rate);
                             hi_min = std::min(hi_min, rate);
                         } else if (A < 0 && bound >= tlo - tol) {
                             lo_max = std::max(lo_max, rate);
                             lo_min = std::min(lo_min, rate);
                         }
                     });
        double rscale = 1 + std::max(std::fabs(lo_max), std::fabs(hi_max));
        double eps = 1e-9 * rscale;
        if (lo_max - hi_min < -eps) return {TLResult::Side, +1, 0, 0};
        if (lo_min - hi_max > eps) return {TLResult::Side, -1, 0, 0};
        return {TLResult::InfeasibleGlobal, 0, 0, 0};
    }

    // Envelope conflict: locate the minimizer of the convex gap g - h over
    // the t-interval by bisection on its one-sided slope, then rate-test.
    double lo = std::max(tlo, -1e15), hi = std::min(thi, 1e15);
    auto gap_slope = [&](double t, bool right) {
        double g = -kInf, h = kInf, gs = 0, hs = 0;
        scan_on_line(view, tf, log, levels, p0x, p0y, wx, wy, qx, qy, extra,
                     [&](int cls, double A, double B, double D) {
                         (void)D;
                         if (cls == 2) return;
                         double v = A * t + B;
                         double tol = 1e-9 * (1 + std::fabs(v));
                         if (cls == 0) {
                             if (v > g + tol) { g = v; gs = A; }
                             else if (v >= g - tol) gs = right ? std::max(gs, A) : std::min(gs, A);
                         } else {
                             if (v < h - tol) { h = v; hs = A; }
                             else if (v <= h + tol) hs = right ? std::min(hs, A) : std::max(hs, A);
                         }
                     });
        return gs - hs;
    };
    for (int it = 0; it < 120 && hi - lo > 1e-12 * (1 + std::fabs(lo) + std::fabs(hi)); ++it) {
        double mid = 0.5 * (lo + hi);
        if (gap_slope(mid, true) < 0) lo = mid;
        else hi = mid;
    }
    double that = 0.5 * (lo + hi);

    // Tight rows at the conflict point, against both envelopes.
    double g = -kInf, h = kInf;
    scan_on_line(view, tf, log, levels, p0x, p0y, wx, wy, qx, qy, extra,
                 [&](int cls, double A, double B, double D) {
                     (void)D;
                     double v = A * that + B;
                     if (cls == 0) g = std::max(g, v);
                     else if (cls == 1) h = std::min(h, v);
                 });
    std::vector<TightRow> tight;
    scan_on_line(view, tf, log, levels, p0x, p0y, wx, wy, qx, qy, extra,
                 [&](int cls, double A, double B, double D) {
                     double v = A * that + B;
                     double tol = 1e-6 * (1 + std::fabs(A * that) + std::fabs(B));
                     bool is_tight;
                     if (cls == 0) is_tight = v >= g - tol;
                     else if (cls == 1) is_tight = v <= h + tol;
                     else is_tight = std::fabs(v) <= tol;
                     if (is_tight && tight.size() < 192) tight.push_back({A, D, cls});
                 });
    double dscale = 1;
    for (const auto& r : tight) dscale = std::max(dscale, std::fabs(r.D));
    double eps = 1e-7 * dscale;
    if (gap_rate(tight, +1) < -eps) return {TLResult::Side, +1, 0, 0};
    if (gap_rate(tight, -1) < -eps) return {TLResult::Side, -1, 0, 0};
    return {TLResult::InfeasibleGlobal, 0, 0, 0};
}

// Full testing-line: inner 2D solve restricted to L, then side analysis.
// q = (qx,qy) is the perpendicular direction whose positive side maps to the
// round's "true" bit.
TLResult testing_line(const ReadOnlyView<Constraint3>& view, const Transform3& tf,
                      const Lp3Log& log, std::size_t levels, double p0x, double p0y, double wx,
                      double wy, double qx, double qy, const HalfPlane& extra,
                      WorkspaceMeter& meter, const Lp3Config& cfg) {
    // At most three adapter copies are live at once: the solver's own view
    // plus the two checkpointed scan streams inside its median selection.
    MeterScope adapters(meter, 3 * Valid3Cursor::words_for(levels));
    OnLineView ov(view, tf, log, levels, p0x, p0y, wx, wy, extra);
    Lp2Result inner = solve_lp2_view(ov, 0.0, 1.0, meter, Lp2Config{cfg.select_k});
    if (inner.status == LpVerdict::Unbounded)
        return {TLResult::UnboundedGlobal, 0, inner.x1, inner.x2};
    TLResult res;
    if (inner.status == LpVerdict::Optimal)
        res = side_feasible(view, tf, log, levels, p0x, p0y, wx, wy, qx, qy, extra, inner.x1,
                            inner.value);
    else
        res = side_infeasible(view, tf, log, levels, p0x, p0y, wx, wy, qx, qy, extra);
    return res;
}

// ---------------------------------------------------------------------------
// Brute force on the survivors (plus the accumulated region rows).

struct Small3 {
    LpVerdict verdict = LpVerdict::Infeasible;
    double x = 0, y = 0, z = 0;
};

// One vertex-enumeration pass over the rows plus a bounding box of the given
// size.  `rtol` is the row-feasibility tolerance relative to term magnitude.
Small3 small3_pass(const std::vector<TransRow3>& rows, double box, double rtol, bool& on_box) {
    // Planes in (x, y, z): lower/upper rows give a*x + b*y - z + c = 0,
    // zero rows a*x + b*y + c = 0, plus the six box walls.
    struct Plane {
        double a, b, z, c;
    };
    std::vector<Plane> planes;
    for (const auto& r : rows) {
        if (r.cls == RowClass3::Zero) planes.push_back({r.a, r.b, 0, r.c});
        else planes.push_back({r.a, r.b, -1, r.c});
    }
    planes.push_back({1, 0, 0, -box});
    planes.push_back({1, 0, 0, box});
    planes.push_back({0, 1, 0, -box});
    planes.push_back({0, 1, 0, box});
    planes.push_back({0, 0, 1, -box});
    planes.push_back({0, 0, 1, box});

    auto feasible = [&](double x, double y, double z) {
        for (const auto& r : rows) {
            double f = r.a * x + r.b * y + r.c;
            double mag = std::fabs(r.a * x) + std::fabs(r.b * y) + std::fabs(r.c) +
                         std::fabs(z) + 1;
            double tol = rtol * mag;
            if (r.cls == RowClass3::Lower && z < f - tol) return false;
            if (r.cls == RowClass3::Upper && z > f + tol) return false;
            if (r.cls == RowClass3::Zero && f > tol) return false;
        }
        return std::fabs(x) <= box * 1.01 && std::fabs(y) <= box * 1.01 &&
               std::fabs(z) <= box * 1.01;
    };

    Small3 best;
    bool have = false;
    std::size_t m = planes.size();
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
            for (std::size_t k = j + 1; k < m; ++k) {
                const Plane &A = planes[i], &B = planes[j], &C = planes[k];
                double det = A.a * (B.b * C.z - C.b * B.z) - A.b * (B.a * C.z - C.a * B.z) +
                             A.z * (B.a * C.b - C.a * B.b);
                if (det == 0 || !std::isfinite(det)) continue;
                double r0 = -A.c, r1 = -B.c, r2 = -C.c;
                double x = (r0 * (B.b * C.z - C.b * B.z) - A.b * (r1 * C.z - r2 * B.z) +
                            A.z * (r1 * C.b - r2 * B.b)) /
                           det;
                double y = (A.a * (r1 * C.z - r2 * B.z) - r0 * (B.a * C.z - C.a * B.z) +
                            A.z * (B.a * r2 - C.a * r1)) /
                           det;
                double z = (A.a * (B.b * r2 - C.b * r1) - A.b * (B.a * r2 - C.a * r1) +
                            r0 * (B.a * C.b - C.a * B.b)) /
                           det;
                if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) continue;
                if (have && z >= best.z) continue;
                if (!feasible(x, y, z)) continue;
                best = {LpVerdict::Optimal, x, y, z};
                have = true;
            }
    if (!have) return {LpVerdict::Infeasible, 0, 0, 0};
    on_box = std::fabs(best.x) > box / 4 || std::fabs(best.y) > box / 4 || best.z < -box / 4;
    return best;
}

// Two box sizes: the near box decides the common case with a forgiving
// tolerance, the far box separates unbounded from far-but-bounded.  The far
// pass needs a near-ulp tolerance, because at 2^44 a magnitude-relative slack
// of 1e-9 would swallow order-one infeasibility gaps between almost-parallel
// planes.
Small3 solve_small3(const std::vector<TransRow3>& rows) {
    bool on_box = false;
    Small3 near = small3_pass(rows, 0x1.0p20, 1e-9, on_box);
    if (near.verdict == LpVerdict::Optimal && !on_box) return near;
    Small3 far = small3_pass(rows, 0x1.0p44, 2e-14, on_box);
    if (far.verdict != LpVerdict::Optimal && near.verdict == LpVerdict::Optimal) {
        // The near box proved feasibility, so only optimal-vs-unbounded is
        // left and the far pass may relax its tolerance again.
        far = small3_pass(rows, 0x1.0p44, 1e-9, on_box);
    }
    if (far.verdict != LpVerdict::Optimal) return far;
    if (on_box) far.verdict = LpVerdict::Unbounded;
    return far;
}

}  // namespace

// ---------------------------------------------------------------------------

Lp3Result solve_lp3(const ReadOnlyView<Constraint3>& view, double d1, double d2, double d3,
                    WorkspaceMeter& meter, const Lp3Config& cfg, Lp3Stats* stats,
                    Lp3Trace* trace) {
    MeterScope frame_scope(meter, 48);
    if (!std::isfinite(d1) || !std::isfinite(d2) || !std::isfinite(d3))
        throw DomainError("objective not finite");
    Transform3 tf(d1, d2, d3);
    std::size_t n = view.size();

    bool any_lower = false;
    for (std::size_t i = 0; i < n; ++i) {
        Constraint3 c = view.element(i);
        if (!std::isfinite(c.a) || !std::isfinite(c.b) || !std::isfinite(c.c) ||
            !std::isfinite(c.beta))
            throw DomainError("constraint row not finite");
        TransRow3 t = tf.row(c, i);
        if (t.cls == RowClass3::ZeroBad) return {LpVerdict::Infeasible, 0, 0, 0, 0};
        if (t.cls == RowClass3::Lower) any_lower = true;
    }

    auto finish = [&](LpVerdict v, double x, double y, double z) {
        Lp3Result out;
        out.status = v;
        if (v != LpVerdict::Infeasible) {
            tf.back_map(x, y, z, out.x1, out.x2, out.x3);
            out.value = tf.feasibility_mode() ? 0.0 : z;
            if (tf.feasibility_mode()) out.status = LpVerdict::Optimal;
        }
        return out;
    };

    Lp3Log log(n, meter);

    if (!any_lower) {
        // z has no lower bound anywhere the zero-class rows allow, so the
        // problem reduces to 2D feasibility of those rows.
        struct I3View {
            const ReadOnlyView<Constraint3>* base;
            const Transform3* tf;
            std::size_t size() const { return base->size(); }
            Constraint2 element(std::size_t i) const {
                TransRow3 t = tf->row(base->element(i), i);
                if (t.cls == RowClass3::Zero) return {t.a, t.b, -t.c};
                return {0, 0, 1};
            }
        };
        Lp2Result feas = solve_lp2_view(I3View{&view, &tf}, 0.0, 0.0, meter);
        if (feas.status == LpVerdict::Infeasible) return {LpVerdict::Infeasible, 0, 0, 0, 0};
        double x0 = feas.x1, y0 = feas.x2, h = kInf;
        for (std::size_t i = 0; i < n; ++i) {
            TransRow3 t = tf.row(view.element(i), i);
            if (t.cls == RowClass3::Upper) h = std::min(h, t.a * x0 + t.b * y0 + t.c);
        }
        double z0 = (h == kInf ? 0.0 : h) - 1;
        return finish(LpVerdict::Unbounded, x0, y0, z0);
    }

    for (;;) {
        std::size_t levels = log.rounds();

        std::size_t v = 0;
        {
            MeterScope cw(meter, Valid3Cursor::words_for(levels));
            Valid3Cursor cur(view, tf, log, levels);
            TransRow3 t;
            while (cur.next(t)) ++v;
        }
        if (stats && levels == 0) stats->initial_valid = v;

        if (v <= 32) {
            MeterScope cw(meter,
                          Valid3Cursor::words_for(levels) + 5 * (v + 2 * levels + 1));
            std::vector<TransRow3> rows;
            rows.reserve(v + 2 * levels);
            Valid3Cursor cur(view, tf, log, levels);
            TransRow3 t;
            while (cur.next(t)) rows.push_back(t);
            for (std::size_t r = 0; r < levels; ++r)
                for (int w = 0; w < 2; ++w) {
                    HalfPlane h = region_halfplane(log.round(r), w);
                    if (h.active)
                        rows.push_back({RowClass3::Zero, h.ea, h.eb, h.ec, n + 2 * r + w});
                }
            Small3 s = solve_small3(rows);
            if (trace) *trace = log.snapshot();
            return finish(s.verdict, s.x, s.y, s.z);
        }

        Lp3Round R;
        std::size_t m;
        {
            GradStream gs(view, tf, log, levels);
            std::size_t cw = 2 * (Valid3Cursor::words_for(levels) + 16) + 8;
            KeySeq<GradStream> grads(gs, cw, meter);
            m = grads.size();
            if (m > 0) {
                double mu =
                    select_ak(grads, (m + 1) / 2, SelectConfig{cfg.select_k}, meter).value;
                Frame f = frame_of(mu);
                R.geom = true;
                R.ux = f.ux;
                R.uy = f.uy;
            }
        }

        if (R.geom) {
            Frame f{R.ux, R.uy};
            std::size_t M;
            {
                YStream ys(view, tf, log, levels, f);
                std::size_t cw = 4 * (Valid3Cursor::words_for(levels) + 16) + 8;
                KeySeq<YStream> yseq(ys, cw, meter);
                M = yseq.size();
                if (M > 0)
                    R.ym = select_ak(yseq, (M + 1) / 2, SelectConfig{cfg.select_k}, meter).value;
            }
            if (M == 0) {
                R.geom = false;
            } else {
                // L_H: p = ym*v + t*u, perpendicular q = v.
                if (stats) ++stats->testing_lines;
                TLResult th = testing_line(view, tf, log, levels, R.ym * f.vx(), R.ym * f.vy(),
                                           f.ux, f.uy, f.vx(), f.vy(), HalfPlane{}, meter, cfg);
                if (th.kind == TLResult::UnboundedGlobal) {
                    if (trace) *trace = log.snapshot();
                    double x = R.ym * f.vx() + th.t * f.ux, y = R.ym * f.vy() + th.t * f.uy;
                    return finish(LpVerdict::Unbounded, x, y, th.z);
                }
                if (th.kind == TLResult::InfeasibleGlobal) {
                    if (trace) *trace = log.snapshot();
                    return {LpVerdict::Infeasible, 0, 0, 0, 0};
                }
                if (th.kind == TLResult::Found) {
                    if (trace) *trace = log.snapshot();
                    double x = R.ym * f.vx() + th.t * f.ux, y = R.ym * f.vy() + th.t * f.uy;
                    return finish(LpVerdict::Optimal, x, y, th.z);
                }
                R.bith = th.side > 0;

                std::size_t K;
                {
                    XStream xs(view, tf, log, levels, f, R.ym, R.bith);
                    std::size_t cw = 4 * (Valid3Cursor::words_for(levels) + 16) + 8;
                    KeySeq<XStream> xseq(xs, cw, meter);
                    K = xseq.size();
                    if (K > 0)
                        R.xm =
                            select_ak(xseq, (K + 1) / 2, SelectConfig{cfg.select_k}, meter).value;
                }
                if (K > 0) {
                    R.have_xm = true;
                    // L_V: p = xm*u + t*v, perpendicular q = -u.
                    HalfPlane hp = region_halfplane(R, 0);
                    if (stats) ++stats->testing_lines;
                    TLResult tv =
                        testing_line(view, tf, log, levels, R.xm * f.ux, R.xm * f.uy, f.vx(),
                                     f.vy(), -f.ux, -f.uy, hp, meter, cfg);
                    if (tv.kind == TLResult::UnboundedGlobal) {
                        if (trace) *trace = log.snapshot();
                        double x = R.xm * f.ux + tv.t * f.vx(), y = R.xm * f.uy + tv.t * f.vy();
                        return finish(LpVerdict::Unbounded, x, y, tv.z);
                    }
                    if (tv.kind == TLResult::InfeasibleGlobal) {
                        if (trace) *trace = log.snapshot();
                        return {LpVerdict::Infeasible, 0, 0, 0, 0};
                    }
                    if (tv.kind == TLResult::Found) {
                        if (trace) *trace = log.snapshot();
                        double x = R.xm * f.ux + tv.t * f.vx(), y = R.xm * f.uy + tv.t * f.vy();
                        return finish(LpVerdict::Optimal, x, y, tv.z);
                    }
                    R.bitv = tv.side > 0;
                }
            }
        }

        log.append(R);
        if (stats) {
            ++stats->rounds;
            std::size_t vnext = 0;
            MeterScope cw(meter, Valid3Cursor::words_for(log.rounds()));
            Valid3Cursor cur(view, tf, log, log.rounds());
            TransRow3 t;
            while (cur.next(t)) ++vnext;
            // Each round must prune something; geometric rounds are expected
            // to clear at least a sixteenth of the survivors (minus parity
            // and leftover slack).
            std::size_t floor_prunes = R.geom ? std::max<std::size_t>(1, v / 16 - 8) : 1;
            if (vnext > v - floor_prunes) stats->progress_ok = false;
        }
    }
}

}  // namespace rops
