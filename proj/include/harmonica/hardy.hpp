#pragma once

#include <map>
#include <optional>

#include "maximal.hpp"
#include "symmetrize.hpp"

namespace harmonica {

// ---------------------------------------------------------------------------
// Whitney ball families for open voxel regions. The complement is the set of
// unmasked cells inside the box; a full mask leaves nothing to measure
// distances against and is rejected.
// ---------------------------------------------------------------------------

struct WhitneyBall {
    Vec center{0, 0, 0};
    double dist = 0;  // distance to the complement
    long cell = -1;
};

struct WhitneyConstants {
    double disjoint = 0.2;  // W1 radius factor c
    double cover = 0.6;     // W2 radius factor c'
    double overlap = 0.8;   // W3/W4 radius factor c''

    void validate() const {
        if (!(disjoint > 0) || !(cover > 0) || !(overlap > 0))
            throw precondition_error("WhitneyConstants: factors must be positive");
        if (disjoint + 2 * disjoint / cover > 1 + 1e-12)
            throw precondition_error("WhitneyConstants: need c + 2c/c' <= 1");
        if (!(cover < overlap) || !(overlap < 1))
            throw precondition_error("WhitneyConstants: need c' < c'' < 1");
    }

    // Closed-form bounded-intersection count for balls with radius factor r.
    long intersection_bound(int n, double r) const {
        double g = (1 + r) / (1 - r);
        return static_cast<long>(std::floor(std::pow((disjoint + r) / disjoint * g * g, n)));
    }
};

namespace detail {

// Distance from a point to the closed cell with the given corner index.
inline double point_cell_distance(const Vec& p, const std::array<int, 3>& corner,
                                  const GridSpec& spec) {
    double acc = 0;
    const double h = spec.step();
    for (int k = 0; k < spec.n; ++k) {
        double c = spec.coord(corner[k]) + 0.5 * h;
        double d = std::max(0.0, std::abs(p[k] - c) - 0.5 * h);
        acc += d * d;
    }
    return std::sqrt(acc);
}

inline Vec cell_center(const GridSpec& spec, long flat) {
    Vec p = spec.point(flat);
    for (int k = 0; k < spec.n; ++k) p[k] += 0.5 * spec.step();
    return p;
}

}  // namespace detail

struct WhitneyFamily {
    WhitneyConstants constants;
    std::vector<WhitneyBall> balls;
};

// Greedy maximal packing over cell centers sorted by decreasing distance to
// the complement: the disjointness (W1) and covering (W2) properties hold by
// construction, comparability (W3) and bounded intersection (W4) follow from
// the constants.
inline WhitneyFamily whitney(const VoxelSet& O, WhitneyConstants k = {}) {
    O.validate();
    k.validate();
    const long total = O.spec.total();
    std::vector<long> inside, outside;
    for (long i = 0; i < total; ++i) (O.mask[i] ? inside : outside).push_back(i);
    if (inside.empty()) throw precondition_error("whitney: the open set is empty");
    if (outside.empty()) throw precondition_error("whitney: complement empty");

    std::vector<double> dist(inside.size());
    for (std::size_t a = 0; a < inside.size(); ++a) {
        Vec p = detail::cell_center(O.spec, inside[a]);
        double best = std::numeric_limits<double>::infinity();
        for (long c : outside) {
            best = std::min(best, detail::point_cell_distance(p, O.spec.unflat(c), O.spec));
            if (best == 0) break;
        }
        dist[a] = best;
    }
    std::vector<std::size_t> order(inside.size());
    for (std::size_t a = 0; a < order.size(); ++a) order[a] = a;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (dist[a] != dist[b]) return dist[a] > dist[b];
        return inside[a] < inside[b];
    });
    WhitneyFamily fam;
    fam.constants = k;
    for (std::size_t a : order) {
        Vec p = detail::cell_center(O.spec, inside[a]);
        bool ok = true;
        for (const auto& b : fam.balls) {
            if (norm(minus(p, b.center), O.spec.n) < k.disjoint * (dist[a] + b.dist)) {
                ok = false;
                break;
            }
        }
        if (ok) fam.balls.push_back({p, dist[a], inside[a]});
    }
    return fam;
}

// ---------------------------------------------------------------------------
// Calderon-Zygmund cubes: maximal dyadic cubes (edges are power-of-two
// multiples of h, anchored at the origin) on which the average of |f|
// exceeds the threshold.
// ---------------------------------------------------------------------------

struct DyadicCube {
    int level = 0;                     // edge = 2^level cells
    std::array<long, 3> anchor{0, 0, 0};  // cube = [anchor, anchor+1) * 2^level cells

    double edge_length(const GridSpec& spec) const { return std::ldexp(spec.step(), level); }
    // Corner coordinates in length units.
    Vec corner(const GridSpec& spec) const {
        Vec c{0, 0, 0};
        for (int kk = 0; kk < spec.n; ++kk) c[kk] = anchor[kk] * edge_length(spec);
        return c;
    }
};

struct CzCube {
    DyadicCube cube;
    double average = 0;  // average of |f| over the full cube
};

namespace detail {

// Inclusive n-dimensional prefix sums of |f| in cell units.
struct PrefixSums {
    const GridSpec* spec;
    std::vector<double> p;  // (N+1)^n layout

    explicit PrefixSums(const SampledFunction& f) : spec(&f.spec) {
        const int n = spec->n, N = spec->samples, M = N + 1;
        long t = 1;
        for (int k = 0; k < n; ++k) t *= M;
        p.assign(t, 0.0);
        auto idx = [&](std::array<long, 3> v) {
            long fl = 0;
            for (int k = 0; k < n; ++k) fl = fl * M + v[k];
            return fl;
        };
        for (long i = 0; i < spec->total(); ++i) {
            auto c = spec->unflat(i);
            p[idx({c[0] + 1L, n > 1 ? c[1] + 1L : 0, n > 2 ? c[2] + 1L : 0})] =
                std::abs(f.values[i]);
        }
        // Sweep each axis.
        for (int ax = 0; ax < n; ++ax) {
            long stride = 1;
            for (int k = ax + 1; k < n; ++k) stride *= M;
            long lines = t / M;
            for (long ln = 0; ln < lines; ++ln) {
                long off = 0, rem = ln;
                for (int k = n - 1; k >= 0; --k) {
                    if (k == ax) continue;
                    long ik = rem % M;
                    rem /= M;
                    long s = 1;
                    for (int kk = k + 1; kk < n; ++kk) s *= M;
                    off += ik * s;
                }
                for (int i = 1; i < M; ++i) p[off + i * stride] += p[off + (i - 1) * stride];
            }
        }
    }

    // Sum of |f| over cells [lo, hi) per axis (absolute cell units), clipped
    // to the box.
    double block(std::array<long, 3> lo, std::array<long, 3> hi) const {
        const int n = spec->n, N = spec->samples, M = N + 1;
        std::array<long, 3> a{0, 0, 0}, b{0, 0, 0};
        for (int k = 0; k < n; ++k) {
            a[k] = std::clamp(lo[k] + N / 2, 0L, static_cast<long>(N));
            b[k] = std::clamp(hi[k] + N / 2, 0L, static_cast<long>(N));
            if (a[k] >= b[k]) return 0.0;
        }
        auto at = [&](std::array<long, 3> v) {
            long fl = 0;
            for (int k = 0; k < n; ++k) fl = fl * M + v[k];
            return p[fl];
        };
        double acc = 0;
        for (int corner = 0; corner < (1 << n); ++corner) {
            std::array<long, 3> v{0, 0, 0};
            int sign = 1;
            for (int k = 0; k < n; ++k) {
                if ((corner >> k) & 1) {
                    v[k] = a[k];
                    sign = -sign;
                } else {
                    v[k] = b[k];
                }
            }
            acc += sign * at(v);
        }
        return acc;
    }
};

}  // namespace detail

inline std::vector<CzCube> cz_decompose(const SampledFunction& f, double alpha) {
    f.validate();
    if (!(alpha > 0)) throw invalid_parameter_error("cz_decompose: alpha must be positive");
    const int n = f.spec.n, N = f.spec.samples;
    detail::PrefixSums ps(f);
    const double hv = f.spec.cell_volume();

    auto average = [&](int level, std::array<long, 3> anchor) {
        std::array<long, 3> lo{0, 0, 0}, hi{0, 0, 0};
        long side = 1L << level;
        for (int k = 0; k < n; ++k) {
            lo[k] = anchor[k] * side;
            hi[k] = lo[k] + side;
        }
        double mass = ps.block(lo, hi) * hv;
        double vol = std::pow(std::ldexp(f.spec.step(), level), n);
        return mass / vol;
    };

    // Smallest top level at which every cube average drops to alpha.
    int top = 1;
    while ((1L << top) < N) ++top;
    auto all_below = [&](int level) {
        long lo = -(static_cast<long>(N / 2) >> level) - 1;
        long hi = ((static_cast<long>(N / 2) - 1) >> level) + 1;
        std::array<long, 3> a{0, 0, 0};
        std::function<bool(int)> walk = [&](int axis) -> bool {
            if (axis == n) return average(level, a) <= alpha;
            for (long v = lo; v <= hi; ++v) {
                a[axis] = v;
                if (!walk(axis + 1)) return false;
            }
            return true;
        };
        return walk(0);
    };
    while (!all_below(top)) ++top;

    std::vector<CzCube> out;
    std::function<void(int, std::array<long, 3>)> descend = [&](int level,
                                                                std::array<long, 3> anchor) {
        if (level == 0) return;
        for (int c = 0; c < (1 << n); ++c) {
            std::array<long, 3> child = anchor;
            for (int k = 0; k < n; ++k) child[k] = 2 * anchor[k] + ((c >> k) & 1);
            double avg = average(level - 1, child);
            if (avg > alpha)
                out.push_back({{level - 1, child}, avg});
            else if (avg > 0)
                descend(level - 1, child);
        }
    };
    {
        long lo = -(static_cast<long>(N / 2) >> top) - 1;
        long hi = ((static_cast<long>(N / 2) - 1) >> top) + 1;
        std::array<long, 3> a{0, 0, 0};
        std::function<void(int)> walk = [&](int axis) {
            if (axis == n) {
                descend(top, a);
                return;
            }
            for (long v = lo; v <= hi; ++v) {
                a[axis] = v;
                walk(axis + 1);
            }
        };
        walk(0);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Atoms: mean-free functions supported in a ball with the dual-volume size
// bound.
// ---------------------------------------------------------------------------

struct Ball {
    Vec center{0, 0, 0};
    double radius = 0;
};

struct AtomCheck {
    bool support_ok = true;
    bool size_ok = true;
    bool mean_ok = true;
    double size_ratio = 0;  // ||a||_q / |B|^{-1+1/q}
    double mean_ratio = 0;  // |mean| / ||a||_1
    bool valid() const { return support_ok && size_ok && mean_ok; }
};

inline AtomCheck validate_atom(const SampledFunction& a, const Ball& ball, double q) {
    a.validate();
    if (!(q > 1)) throw invalid_exponent_error("validate_atom: q must exceed 1");
    AtomCheck out;
    const int n = a.spec.n;
    for (long i = 0; i < a.spec.total(); ++i) {
        if (a.values[i] == 0.0) continue;
        Vec c = detail::cell_center(a.spec, i);
        if (norm(minus(c, ball.center), n) > ball.radius * (1 + 1e-9)) out.support_ok = false;
    }
    const double vol = unit_ball_volume(n) * std::pow(ball.radius, n);
    const double allowed = std::pow(vol, -1.0 + (std::isinf(q) ? 0.0 : 1.0 / q));
    const double got = lp_norm(a, q);
    out.size_ratio = got / allowed;
    out.size_ok = got <= allowed * (1 + 1e-9);
    const double l1 = lp_norm(a, 1.0);
    const double mean_abs = std::abs(integral(a));
    out.mean_ratio = l1 > 0 ? mean_abs / l1 : 0.0;
    out.mean_ok = mean_abs <= 1e-10 * std::max(l1, 1e-300);
    if (l1 == 0) out.mean_ok = true;
    return out;
}

// ---------------------------------------------------------------------------
// Atomic decomposition driven by the grand maximal function: Whitney
// partitions of the level sets O^(m) = {Mf > 2^m}, weighted means for the
// cancellation, and coefficients lam = C' 2^m d^n.
// ---------------------------------------------------------------------------

struct AtomicTerm {
    double coefficient = 0;   // lambda
    SampledFunction atom;     // the normalized (1, inf)-atom
    Ball support;
    int level = 0;            // m
};

struct AtomicDecomposition {
    std::vector<AtomicTerm> terms;
    SampledFunction residual;
    double coefficient_sum = 0;       // sum of lambda
    double maximal_l1 = 0;            // ||Mf||_1
    double piece_bound = 0;           // recorded sup |b_j| / 2^m over all pieces
    double coefficient_constant = 0;  // recorded C' with lambda = C' 2^m d^n
    int m_lo = 0, m_hi = 0;
    long observed_overlap = 0;        // per-level intersection count of supports
    long overlap_bound = 0;           // closed-form bound for the same family
};

// Whitney constants for the atomic construction: the assembled pieces live in
// balls inflated by c''(1 + 2(1+c'')/(1-c'')), which stays below 1 only for
// c'' < sqrt(5) - 2.
inline WhitneyConstants atomic_whitney_constants() { return {0.08, 0.2, 0.23}; }

inline double support_inflation(const WhitneyConstants& k) {
    return k.overlap * (1 + 2 * (1 + k.overlap) / (1 - k.overlap));
}

// The partition plateau normalized to unit C^1 seminorm. The weighted means
// of the construction are dominated by the grand maximal function only when
// this shape, at the partition scales, belongs to the dictionary.
inline BumpProfile partition_profile(const WhitneyConstants& k = atomic_whitney_constants()) {
    const double lo = k.cover, hi = k.overlap;
    const double s = (hi - lo) / 1.5;
    return {"plateau", [lo, hi, s](double r) {
                if (r <= lo) return s;
                if (r >= hi) return 0.0;
                double u = (r - lo) / (hi - lo);
                return s * (1.0 - u * u * (3 - 2 * u));
            }};
}

// Dictionary tuned for the atomic construction: the plateau shape is present
// and the scale lattice is dense enough (ratio <= 1.1) that every patch
// scale snaps onto it. Capping the top scale keeps the maximal function from
// reaching the box corners.
inline BumpDictionary atomic_dictionary(const GridSpec& spec, double max_scale_fraction = 0.25,
                                        double b = 2.0) {
    BumpDictionary d;
    d.profiles = standard_bump_profiles();
    d.profiles.push_back(partition_profile());
    d.noncentrality = b;
    // The scale floor is resolution independent (but never below the grid
    // step), so refining the grid keeps the same dictionary.
    double lo = std::max(spec.step(), spec.extent / 64.0);
    double hi = max_scale_fraction * spec.extent;
    int count = static_cast<int>(std::ceil(std::log(hi / lo) / std::log(1.1))) + 1;
    for (int i = 0; i <= count; ++i) d.scales.push_back(lo * std::pow(1.1, i));
    while (d.scales.back() > hi * 1.1) d.scales.pop_back();
    return d;
}

namespace detail {

struct Patch {                    // one Whitney ball with its plateau weights
    Vec center;
    double dist;
    std::vector<long> cells;      // grid cells in the plateau support
    std::vector<double> weight;   // normalized partition weight per cell
    double weight_sum = 0;        // sum of weights (for the weighted means)
};

// Plateau: 1 inside the cover radius, smooth C^1 ramp to the overlap radius.
inline double plateau(double r, double r_cover, double r_overlap) {
    if (r <= r_cover) return 1.0;
    if (r >= r_overlap) return 0.0;
    double s = (r - r_cover) / (r_overlap - r_cover);
    return 1.0 - s * s * (3 - 2 * s);
}

inline std::vector<Patch> level_partition(const VoxelSet& O, const WhitneyConstants& k) {
    WhitneyFamily fam = whitney(O, k);
    const GridSpec& spec = O.spec;
    std::vector<Patch> patches(fam.balls.size());
    std::vector<double> psi_sum(spec.total(), 0.0);
    // Raw plateau weights per ball at the ball's own scale.
    for (std::size_t j = 0; j < fam.balls.size(); ++j) {
        const auto& b = fam.balls[j];
        Patch& p = patches[j];
        p.center = b.center;
        p.dist = b.dist;
        double r_out = k.overlap * b.dist;
        std::array<long, 3> lo{0, 0, 0}, hi{0, 0, 0};
        for (int kk = 0; kk < spec.n; ++kk) {
            lo[kk] = std::max(0L, static_cast<long>(std::floor((b.center[kk] - r_out + spec.extent) / spec.step())) - 1);
            hi[kk] = std::min<long>(spec.samples - 1,
                                    static_cast<long>(std::ceil((b.center[kk] + r_out + spec.extent) / spec.step())));
        }
        std::array<long, 3> it = lo;
        while (true) {
            std::array<int, 3> idx{static_cast<int>(it[0]), static_cast<int>(it[1]),
                                   static_cast<int>(it[2])};
            long flat = spec.flat(idx);
            Vec c = cell_center(spec, flat);
            double r = norm(minus(c, b.center), spec.n) / b.dist;
            double w = plateau(r, k.cover, k.overlap);
            if (w > 0 && O.mask[flat]) {
                p.cells.push_back(flat);
                p.weight.push_back(w);
                psi_sum[flat] += w;
            }
            int ax = spec.n - 1;
            while (ax >= 0 && ++it[ax] > hi[ax]) {
                it[ax] = lo[ax];
                --ax;
            }
            if (ax < 0) break;
        }
    }
    // Cells of O missed by every plateau (possible at rasterization margins)
    // attach to the nearest ball so the weights still partition O.
    for (long i = 0; i < spec.total(); ++i) {
        if (!O.mask[i] || psi_sum[i] > 0) continue;
        Vec c = cell_center(spec, i);
        std::size_t bestj = 0;
        double bestd = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < patches.size(); ++j) {
            double d = norm(minus(c, patches[j].center), spec.n);
            if (d < bestd) {
                bestd = d;
                bestj = j;
            }
        }
        patches[bestj].cells.push_back(i);
        patches[bestj].weight.push_back(1.0);
        psi_sum[i] = 1.0;
    }
    // Normalize into a partition of unity on O.
    for (auto& p : patches) {
        p.weight_sum = 0;
        for (std::size_t c = 0; c < p.cells.size(); ++c) {
            p.weight[c] /= psi_sum[p.cells[c]];
            p.weight_sum += p.weight[c];
        }
    }
    return patches;
}

}  // namespace detail

inline AtomicDecomposition atomic_decompose(const SampledFunction& f, const BumpDictionary& dict,
                                            std::optional<int> m_lo_opt = std::nullopt,
                                            std::optional<int> m_hi_opt = std::nullopt,
                                            double residual_threshold = 1e-6) {
    f.validate();
    dict.validate();
    const GridSpec& spec = f.spec;
    AtomicDecomposition out;
    out.residual = SampledFunction(spec);
    const double f_sup = lp_norm(f, INFINITY);
    if (f_sup == 0) return out;

    SampledFunction Mf = grand_maximal(f, dict);
    out.maximal_l1 = lp_norm(Mf, 1.0);
    double m_sup = lp_norm(Mf, INFINITY);

    int m_hi = m_hi_opt.value_or(static_cast<int>(std::ceil(std::log2(m_sup))) + 1);
    // Levels below the rounding floor of the maximal function only see
    // floating-point debris; the window never descends into them.
    int junk_floor = static_cast<int>(std::floor(std::log2(1e-13 * m_sup)));
    int m_lo = m_lo_opt.value_or(std::clamp(
        static_cast<int>(std::floor(std::log2(std::min(residual_threshold, 1.0) * f_sup))) - 3,
        junk_floor, m_hi - 1));
    if (m_lo >= m_hi) throw invalid_parameter_error("atomic_decompose: empty level window");
    out.m_lo = m_lo;
    out.m_hi = m_hi;
    if (std::ldexp(1.0, m_hi) < m_sup)
        throw needs_wider_window_error("atomic_decompose: O^(m_hi) is nonempty");

    const WhitneyConstants wk = atomic_whitney_constants();
    const double c_s = support_inflation(wk);
    out.overlap_bound = wk.intersection_bound(spec.n, c_s);

    auto level_set = [&](int m) {
        VoxelSet O(spec);
        double thr = std::ldexp(1.0, m);
        for (long i = 0; i < spec.total(); ++i) O.mask[i] = Mf.values[i] > thr ? 1 : 0;
        return O;
    };
    // Complement must stay visible at the lowest level.
    {
        VoxelSet O = level_set(m_lo);
        if (O.count() == spec.total())
            throw needs_wider_window_error(
                "atomic_decompose: the maximal function exceeds the lowest level everywhere; "
                "enlarge the box or cap the dictionary scales");
    }

    // Partitions per level; empty above the top.
    std::map<int, std::vector<detail::Patch>> partitions;
    std::map<int, VoxelSet> level_sets;
    auto set_at = [&](int m) -> const VoxelSet& {
        auto it = level_sets.find(m);
        if (it != level_sets.end()) return it->second;
        return level_sets.emplace(m, level_set(m)).first->second;
    };
    auto partition_at = [&](int m) -> const std::vector<detail::Patch>& {
        auto it = partitions.find(m);
        if (it != partitions.end()) return it->second;
        const VoxelSet& O = set_at(m);
        std::vector<detail::Patch> patches;
        if (!O.empty()) patches = detail::level_partition(O, wk);
        return partitions.emplace(m, std::move(patches)).first->second;
    };

    struct RawPiece {
        int m;
        std::vector<double> dense;  // values on the grid
        Vec center;
        double dist;
        double sup = 0;
    };
    std::vector<RawPiece> pieces;

    for (int m = m_lo; m < m_hi; ++m) {
        // Equal level sets telescope to zero exactly: skip the level.
        if (set_at(m).mask == set_at(m + 1).mask) continue;
        const auto& cur = partition_at(m);
        if (cur.empty()) continue;
        const auto& next = partition_at(m + 1);
        // Weighted means at both levels.
        std::vector<double> c_cur(cur.size(), 0.0), c_next(next.size(), 0.0);
        for (std::size_t j = 0; j < cur.size(); ++j) {
            double num = 0;
            for (std::size_t c = 0; c < cur[j].cells.size(); ++c)
                num += f.values[cur[j].cells[c]] * cur[j].weight[c];
            c_cur[j] = num / cur[j].weight_sum;
        }
        for (std::size_t k2 = 0; k2 < next.size(); ++k2) {
            double num = 0;
            for (std::size_t c = 0; c < next[k2].cells.size(); ++c)
                num += f.values[next[k2].cells[c]] * next[k2].weight[c];
            c_next[k2] = num / next[k2].weight_sum;
        }
        // Sparse lookup for the finer level.
        std::vector<std::vector<std::pair<std::size_t, double>>> next_at(spec.total());
        for (std::size_t k2 = 0; k2 < next.size(); ++k2)
            for (std::size_t c = 0; c < next[k2].cells.size(); ++c)
                next_at[next[k2].cells[c]].push_back({k2, next[k2].weight[c]});

        for (std::size_t j = 0; j < cur.size(); ++j) {
            const detail::Patch& pj = cur[j];
            RawPiece piece;
            piece.m = m;
            piece.center = pj.center;
            piece.dist = pj.dist;
            piece.dense.assign(spec.total(), 0.0);
            // (f - c_j) psi_j
            for (std::size_t c = 0; c < pj.cells.size(); ++c)
                piece.dense[pj.cells[c]] = (f.values[pj.cells[c]] - c_cur[j]) * pj.weight[c];
            // subtract ((f - c_k) psi_j - d_{jk}) psi_k for overlapping k
            std::map<std::size_t, double> djk_num;  // k -> sum psi_j (f - c_k) psi_k
            std::vector<double> psij(spec.total(), 0.0);
            for (std::size_t c = 0; c < pj.cells.size(); ++c) psij[pj.cells[c]] = pj.weight[c];
            for (std::size_t c = 0; c < pj.cells.size(); ++c) {
                long cell = pj.cells[c];
                for (auto [k2, wk2] : next_at[cell])
                    djk_num[k2] += pj.weight[c] * (f.values[cell] - c_next[k2]) * wk2;
            }
            for (auto& [k2, num] : djk_num) {
                double djk = num / next[k2].weight_sum;
                const detail::Patch& pk = next[k2];
                for (std::size_t c = 0; c < pk.cells.size(); ++c) {
                    long cell = pk.cells[c];
                    piece.dense[cell] -=
                        ((f.values[cell] - c_next[k2]) * psij[cell] - djk) * pk.weight[c];
                }
            }
            for (double v : piece.dense) piece.sup = std::max(piece.sup, std::abs(v));
            // Pieces below the rounding floor of f carry no information and
            // would still receive full-size coefficients.
            if (piece.sup > 1e-14 * f_sup) pieces.push_back(std::move(piece));
        }
    }

    // Recorded constants and normalization to exact (1, inf)-atoms.
    double piece_bound = 0;
    for (const auto& p : pieces)
        piece_bound = std::max(piece_bound, p.sup / std::ldexp(1.0, p.m));
    out.piece_bound = piece_bound;
    const double omega = unit_ball_volume(spec.n);
    out.coefficient_constant = piece_bound * omega * std::pow(c_s, spec.n);

    SampledFunction partial(spec);
    for (auto& p : pieces) {
        double lambda = out.coefficient_constant * std::ldexp(1.0, p.m) * std::pow(p.dist, spec.n);
        AtomicTerm term;
        term.coefficient = lambda;
        term.level = p.m;
        term.support = {p.center, c_s * p.dist};
        term.atom = SampledFunction(spec);
        for (long i = 0; i < spec.total(); ++i) {
            term.atom.values[i] = p.dense[i] / lambda;
            partial.values[i] += p.dense[i];
        }
        out.coefficient_sum += std::abs(lambda);
        out.terms.push_back(std::move(term));
    }
    // Bounded intersection of the per-level support balls, measured at cell
    // centers.
    {
        std::map<int, std::vector<const AtomicTerm*>> by_level;
        for (const auto& t : out.terms) by_level[t.level].push_back(&t);
        for (auto& [m, terms] : by_level) {
            std::map<long, long> counts;
            for (const AtomicTerm* t : terms)
                for (long i = 0; i < spec.total(); ++i)
                    if (norm(minus(detail::cell_center(spec, i), t->support.center), spec.n) <
                        t->support.radius)
                        ++counts[i];
            for (auto& [cell, c] : counts)
                out.observed_overlap = std::max(out.observed_overlap, c);
        }
    }

    for (long i = 0; i < spec.total(); ++i)
        out.residual.values[i] = f.values[i] - partial.values[i];
    if (lp_norm(out.residual, INFINITY) > residual_threshold * f_sup * 4.0)
        throw needs_wider_window_error("atomic_decompose: residual above the window threshold");
    return out;
}

inline double h1_norm(const SampledFunction& f, const BumpDictionary& dict) {
    return lp_norm(grand_maximal(f, dict), 1.0);
}

}  // namespace harmonica
