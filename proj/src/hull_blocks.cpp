#include "rops/hull_blocks.hpp"

#include <algorithm>
#include <vector>

#include "rops/selection.hpp"

namespace rops {
namespace {

// Exact for integer coordinates below 2^25: every product stays under 2^53.
double cross(Point o, Point p, Point q) {
    return (p.x - o.x) * (q.y - o.y) - (p.y - o.y) * (q.x - o.x);
}

PointKey key_at(const SortedPointView& pts, std::size_t i) {
    Point p = pts.point(i);
    return {p.x, p.y, static_cast<double>(i)};
}

class KeySeq final : public Rescannable<PointKey> {
  public:
    explicit KeySeq(const SortedPointView& pts) : pts_(&pts) {}
    std::size_t size() const override { return pts_->size(); }
    void restart(std::size_t pos) override { pos_ = pos; }
    PointKey next() override { return key_at(*pts_, pos_++); }

  private:
    const SortedPointView* pts_;
    std::size_t pos_ = 0;
};

// Boundary keys by composite rank.  Each distinct boundary is computed once
// through selection and then shared by the two blocks it separates and every
// later reload of either.
class BoundaryCache {
  public:
    BoundaryCache(const SortedPointView& pts, const BlockLayout& lay, const HullBlocksConfig& cfg,
                  WorkspaceMeter& meter)
        : pts_(&pts),
          lay_(lay),
          cfg_(cfg),
          meter_(&meter),
          charge_(meter, 3 * (lay.blocks + 1) + (lay.blocks + 8) / 8),
          keys_(lay.blocks + 1),
          have_(lay.blocks + 1, 0) {}

    PointKey at(std::size_t j) {
        if (!have_[j]) {
            KeySeq seq(*pts_);
            keys_[j] = select_ak(seq, lay_.boundary_rank(j), SelectConfig{cfg_.select_k}, *meter_);
            have_[j] = 1;
        }
        return keys_[j];
    }

    // Batch-resolve all boundary ranks up front.  Per-boundary select_ak costs
    // ~25n reads apiece (measured), so at large n the boundaries are pulled
    // through multiselect in sqrt(n)-bounded batches instead.
    void prefill() {
        if (!cfg_.batched_boundaries || lay_.n < 65536) return;
        std::size_t batch = std::min<std::size_t>(256, std::max<std::size_t>(16, lay_.block / 4));
        KeySeq seq(*pts_);
        std::vector<std::size_t> ranks;
        std::vector<PointKey> out;
        MeterScope scratch(*meter_, 4 * batch);
        for (std::size_t j0 = 1; j0 <= lay_.blocks; j0 += batch) {
            std::size_t j1 = std::min(j0 + batch, lay_.blocks + 1);
            ranks.clear();
            for (std::size_t j = j0; j < j1; ++j) ranks.push_back(lay_.boundary_rank(j));
            out.assign(ranks.size(), PointKey{});
            multiselect(seq, ranks.data(), out.data(), ranks.size(), *meter_);
            for (std::size_t j = j0; j < j1; ++j) {
                keys_[j] = out[j - j0];
                have_[j] = 1;
            }
        }
    }

  private:
    const SortedPointView* pts_;
    BlockLayout lay_;
    HullBlocksConfig cfg_;
    WorkspaceMeter* meter_;
    MeterScope charge_;
    std::vector<PointKey> keys_;
    std::vector<char> have_;
};

struct BP {
    Point p;
    std::size_t idx = 0;  // index in adapter space
};

struct CEntry {
    std::size_t f = npos;
    std::size_t l = npos;
};

// Fill buf with the points of composite ranks (j*s, min((j+1)s, n)]: two
// boundary keys plus one filtering scan.
void load_block(const SortedPointView& pts, BoundaryCache& bc, const BlockLayout& lay,
                std::size_t j, std::vector<BP>& buf, HullBlocksStats* stats) {
    bool has_lo = j > 0;
    PointKey lo = has_lo ? bc.at(j) : PointKey{};
    PointKey hi = bc.at(j + 1);
    buf.clear();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        PointKey k = key_at(pts, i);
        if ((!has_lo || lo < k) && !(hi < k)) buf.push_back({Point{k.x, k.y}, i});
    }
    std::size_t want = lay.boundary_rank(j + 1) - lay.boundary_rank(j);
    if (buf.size() != want) throw Error("block load size mismatch");
    if (stats) ++stats->block_loads;
}

// In-place: sort by composite order, compact to per-column topmost points,
// strict monotone scan.  Returns the chain length (prefix of buf).
std::size_t block_hull(std::vector<BP>& a) {
    std::sort(a.begin(), a.end(), [](const BP& u, const BP& v) {
        if (u.p.x != v.p.x) return u.p.x < v.p.x;
        if (u.p.y != v.p.y) return u.p.y < v.p.y;
        return u.idx < v.idx;
    });
    std::size_t m = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (i + 1 == a.size() || a[i + 1].p.x != a[i].p.x) a[m++] = a[i];
    std::size_t h = 0;
    for (std::size_t i = 0; i < m; ++i) {
        while (h >= 2 && cross(a[h - 2].p, a[h - 1].p, a[i].p) >= 0) --h;
        a[h++] = a[i];
    }
    return h;
}

std::size_t chain_pos(const std::vector<BP>& chain, std::size_t len, std::size_t idx) {
    for (std::size_t t = 0; t < len; ++t)
        if (chain[t].idx == idx) return t;
    throw Error("directory vertex missing from recomputed chain");
}

}  // namespace

void hull_blocks_upper(const SortedPointView& pts, const std::function<void(Point)>& emit,
                       WorkspaceMeter& meter, const HullBlocksConfig& cfg,
                       HullBlocksStats* stats) {
    std::size_t n = pts.size();
    if (n == 0) return;
    BlockLayout lay(n);
    BoundaryCache bc(pts, lay, cfg, meter);
    bc.prefill();

    MeterScope bufs(meter, 2 * 3 * lay.block + 2 * lay.blocks + 12);
    std::vector<BP> cur, inc;  // last surviving block's chain / incoming chain
    cur.reserve(lay.block);
    inc.reserve(lay.block);
    std::vector<CEntry> dir(lay.blocks);

    std::size_t tail = npos;  // block whose chain sits in cur
    std::size_t fa = 0, la = 0, clen = 0;

    auto reload = [&](std::size_t j, std::vector<BP>& buf) {
        load_block(pts, bc, lay, j, buf, stats);
        return block_hull(buf);
    };

    for (std::size_t j = 0; j < lay.blocks; ++j) {
        std::size_t nlen = reload(j, inc);
        std::size_t b = 0;
        if (tail != npos) {
            std::size_t a = la;
            for (;;) {
                while (b + 1 < nlen && cross(cur[a].p, inc[b].p, inc[b + 1].p) >= 0) ++b;
                if (a > fa && cross(cur[a].p, inc[b].p, cur[a - 1].p) >= 0) {
                    --a;
                    continue;
                }
                if (a == fa) {
                    std::size_t prev = npos;
                    for (std::size_t q = tail; q-- > 0;)
                        if (dir[q].f != npos) {
                            prev = q;
                            break;
                        }
                    if (prev != npos) {
                        // Tangent reached the tail block's first vertex; if the
                        // previous surviving block's last vertex is on or above
                        // the line, the tail block keeps no vertex at all.
                        Point lp = pts.point(dir[prev].l);
                        if (cross(cur[a].p, inc[b].p, lp) >= 0) {
                            dir[tail] = {};
                            clen = reload(prev, cur);
                            fa = chain_pos(cur, clen, dir[prev].f);
                            la = chain_pos(cur, clen, dir[prev].l);
                            tail = prev;
                            a = la;
                            if (stats) {
                                ++stats->erasures;
                                ++stats->recomputations;
                            }
                            continue;
                        }
                    } else if (cur[a].p.x == inc[b].p.x) {
                        // Lone surviving vertex sits in the incoming chain's
                        // first column, below it: the whole prefix goes.
                        dir[tail] = {};
                        tail = npos;
                        if (stats) ++stats->erasures;
                        break;
                    }
                }
                break;
            }
            if (tail != npos) dir[tail].l = cur[a].idx;
        }
        if (tail == npos) b = 0;
        std::swap(cur, inc);
        clen = nlen;
        fa = b;
        la = clen - 1;
        tail = j;
        dir[j] = {cur[fa].idx, cur[la].idx};
    }

    for (std::size_t j = 0; j < lay.blocks; ++j) {
        if (dir[j].f == npos) continue;
        std::size_t len = reload(j, cur);
        std::size_t from = chain_pos(cur, len, dir[j].f);
        std::size_t to = chain_pos(cur, len, dir[j].l);
        for (std::size_t t = from; t <= to; ++t) emit(cur[t].p);
    }
}

void hull_unsorted(const ReadOnlyView<Point>& view, const std::function<void(Point)>& emit,
                   WorkspaceMeter& meter, const HullBlocksConfig& cfg, HullBlocksStats* stats) {
    MeterScope frame(meter, 12);
    if (view.size() == 0) return;

    SortedPointView fwd(view);
    Point upper_first{}, upper_last{};
    bool ufirst = true;
    hull_blocks_upper(
        fwd,
        [&](Point p) {
            if (ufirst) {
                upper_first = p;
                ufirst = false;
            }
            upper_last = p;
            emit(p);
        },
        meter, cfg, stats);

    // Lower hull: upper hull of the rotated set, emitted right-to-left in the
    // original frame.  First vertex coincides with the upper chain's last;
    // the final one is held back and dropped if it closes onto the first.
    SortedPointView rev(view, true);
    Point hold{};
    bool have_hold = false, lfirst = true;
    hull_blocks_upper(
        rev,
        [&](Point q) {
            Point p{-q.x, -q.y};
            if (lfirst) {
                lfirst = false;
                if (p == upper_last) return;
                hold = p;
                have_hold = true;
                return;
            }
            if (have_hold) emit(hold);
            hold = p;
            have_hold = true;
        },
        meter, cfg, stats);
    if (have_hold && !(hold == upper_first)) emit(hold);
}

}  // namespace rops
