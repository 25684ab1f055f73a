#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <numeric>

#include "grid.hpp"
#include "rearrange.hpp"

namespace harmonica {

// ---------------------------------------------------------------------------
// Voxel sets: unions of closed cells [x_i, x_i + h)^n on the grid, one mask
// bit per cell.
// ---------------------------------------------------------------------------

struct VoxelSet {
    GridSpec spec;
    std::vector<std::uint8_t> mask;

    VoxelSet() = default;
    explicit VoxelSet(const GridSpec& s) : spec(s), mask(s.total(), 0) {}

    void validate() const {
        spec.validate();
        if (static_cast<long>(mask.size()) != spec.total())
            throw invalid_parameter_error("VoxelSet: mask size must equal N^n");
    }

    long count() const { return std::accumulate(mask.begin(), mask.end(), 0L); }
    double measure() const { return count() * spec.cell_volume(); }
    bool empty() const { return count() == 0; }
};

// Grid-representable symmetrization direction: a coordinate axis, or a
// rational direction (p, q) inside an axis pair. Small integers keep the
// digital lines exact.
struct LatticeDirection {
    int axis0 = 0;
    int axis1 = -1;  // -1 marks a pure axis direction
    int p = 1, q = 0;

    static LatticeDirection axis(int k) { return {k, -1, 1, 0}; }
    static LatticeDirection pair(int a0, int a1, int p_, int q_) { return {a0, a1, p_, q_}; }

    bool is_axis() const { return axis1 < 0; }

    void validate(int n) const {
        if (axis0 < 0 || axis0 >= n) throw invalid_direction_error("LatticeDirection: axis out of range");
        if (is_axis()) return;
        if (axis1 < 0 || axis1 >= n || axis1 == axis0)
            throw invalid_direction_error("LatticeDirection: axis pair out of range");
        if (p == 0 && q == 0) throw invalid_direction_error("LatticeDirection: zero direction");
        if (std::abs(p) > 16 || std::abs(q) > 16)
            throw invalid_direction_error("LatticeDirection: integers must stay small");
        if (std::gcd(std::abs(p), std::abs(q)) > 1)
            throw invalid_direction_error("LatticeDirection: p, q must be coprime");
    }
};

namespace detail {

// Recenter a run of `count` occupied slots on a 1D slot lattice around the
// anchor mu (in slot units), clamped to [lo, hi]. Returns the first slot.
// floor(x + 0.5) rounding puts ties on the nonnegative side.
inline long recenter_run(double mu, long count, long lo, long hi) {
    long start = static_cast<long>(std::floor(mu - 0.5 * (count - 1) + 0.5));
    if (start < lo) start = lo;
    if (start + count - 1 > hi) start = hi - count + 1;
    return start;
}

}  // namespace detail

// Steiner symmetrization along a lattice direction: every (digital) line
// parallel to the direction keeps its cell count, recentered on the
// hyperplane through the origin. Cell counts are preserved exactly.
inline VoxelSet steiner(const VoxelSet& S, const LatticeDirection& dir) {
    S.validate();
    dir.validate(S.spec.n);
    const int n = S.spec.n, N = S.spec.samples;
    VoxelSet out(S.spec);

    if (dir.is_axis()) {
        const int ax = dir.axis0;
        long stride = 1;
        for (int k = ax + 1; k < n; ++k) stride *= N;
        long lines = S.spec.total() / N;
        for (long ln = 0; ln < lines; ++ln) {
            long offset = 0, rem = ln;
            for (int k = n - 1; k >= 0; --k) {
                if (k == ax) continue;
                long ik = rem % N;
                rem /= N;
                long s = 1;
                for (int kk = k + 1; kk < n; ++kk) s *= N;
                offset += ik * s;
            }
            long c = 0;
            for (int i = 0; i < N; ++i) c += S.mask[offset + i * stride];
            if (c == 0) continue;
            // Slot i has center coordinate (i - N/2 + 0.5) h; anchor at 0.
            long start = detail::recenter_run(N / 2 - 0.5, c, 0, N - 1);
            for (long i = start; i < start + c; ++i) out.mask[offset + i * stride] = 1;
        }
        return out;
    }

    // Digital lines {z : q*i - p*j = const} within the (axis0, axis1) plane,
    // swept over the remaining axis when n = 3.
    const int a0 = dir.axis0, a1 = dir.axis1;
    int p = dir.p, q = dir.q;
    if (p < 0 || (p == 0 && q < 0)) {
        p = -p;
        q = -q;
    }
    int other = -1;
    for (int k = 0; k < n; ++k)
        if (k != a0 && k != a1) other = k;
    const int planes = (n == 3) ? N : 1;
    for (int pl = 0; pl < planes; ++pl) {
        // Group occupied cells of this plane by digital line.
        std::map<long, std::vector<std::pair<long, long>>> lines;  // key -> (t, flat)
        std::array<int, 3> idx{0, 0, 0};
        if (other >= 0) idx[other] = pl;
        for (int i = 0; i < N; ++i) {
            for (int j = 0; j < N; ++j) {
                idx[a0] = i;
                idx[a1] = j;
                long flat = S.spec.flat(idx);
                if (!S.mask[flat]) continue;
                long key = static_cast<long>(q) * i - static_cast<long>(p) * j;
                long t = static_cast<long>(p) * i + static_cast<long>(q) * j;
                lines[key].push_back({t, flat});
            }
        }
        for (auto& [key, cells] : lines) {
            // Cell (i, j) sits at t = p*i + q*j along the line; consecutive
            // slots differ by p^2 + q^2. The center coordinate along the unit
            // direction is (t + (0.5 - N/2)(p + q)) h / sqrt(p^2 + q^2), so
            // the anchor with coordinate zero is t = (N/2 - 0.5)(p + q).
            const long c = static_cast<long>(cells.size());
            const long step_t = static_cast<long>(p) * p + static_cast<long>(q) * q;
            auto rep = S.spec.unflat(cells.front().second);
            const long i0 = rep[a0], j0 = rep[a1];
            const long ti = static_cast<long>(p) * i0 + static_cast<long>(q) * j0;
            auto inside = [&](long i, long j) { return i >= 0 && i < N && j >= 0 && j < N; };
            long slot_lo = 0, slot_hi = 0;
            for (long i = i0 - p, j = j0 - q; inside(i, j); i -= p, j -= q) --slot_lo;
            for (long i = i0 + p, j = j0 + q; inside(i, j); i += p, j += q) ++slot_hi;
            const double mu_slot =
                ((static_cast<double>(N) / 2 - 0.5) * (p + q) - ti) / static_cast<double>(step_t);
            long start = detail::recenter_run(mu_slot, c, slot_lo, slot_hi);
            for (long s = start; s < start + c; ++s) {
                idx[a0] = static_cast<int>(i0 + s * p);
                idx[a1] = static_cast<int>(j0 + s * q);
                out.mask[S.spec.flat(idx)] = 1;
            }
        }
    }
    return out;
}

// Rasterized centered ball with the same cell count as S would have at the
// given measure: cells whose centers lie within the radius.
inline VoxelSet rasterize_ball(const GridSpec& spec, double radius) {
    VoxelSet b(spec);
    const double h = spec.step();
    for (long i = 0; i < spec.total(); ++i) {
        Vec c = spec.point(i);
        for (int k = 0; k < spec.n; ++k) c[k] += 0.5 * h;
        if (norm(c, spec.n) <= radius) b.mask[i] = 1;
    }
    return b;
}

struct BallScheduleResult {
    VoxelSet result;
    std::vector<double> delta_history;  // |S_k  DELTA  B(0, rho)| after each step
};

// Workhorse direction schedule: rational directions that are not symmetry
// axes of typical inputs drive the convergence; axes and diagonals clean up.
inline std::vector<LatticeDirection> default_ball_schedule(int n, int steps = 20) {
    std::vector<LatticeDirection> base;
    auto add_pair = [&](int a0, int a1) {
        base.push_back(LatticeDirection::pair(a0, a1, 2, 1));
        base.push_back(LatticeDirection::pair(a0, a1, 2, -1));
        base.push_back(LatticeDirection::axis(a0));
        base.push_back(LatticeDirection::axis(a1));
        base.push_back(LatticeDirection::pair(a0, a1, 1, 2));
        base.push_back(LatticeDirection::pair(a0, a1, 1, -2));
        base.push_back(LatticeDirection::pair(a0, a1, 1, 1));
        base.push_back(LatticeDirection::pair(a0, a1, 1, -1));
        base.push_back(LatticeDirection::pair(a0, a1, 3, 1));
        base.push_back(LatticeDirection::pair(a0, a1, 1, 3));
    };
    if (n == 1) {
        base.push_back(LatticeDirection::axis(0));
    } else if (n == 2) {
        add_pair(0, 1);
    } else {
        add_pair(0, 1);
        add_pair(1, 2);
        add_pair(0, 2);
    }
    std::vector<LatticeDirection> out;
    for (int i = 0; i < steps; ++i) out.push_back(base[i % base.size()]);
    return out;
}

// Apply the schedule and report the symmetric-difference measure to the ball
// of equal measure after each step.
inline BallScheduleResult symmetrize_to_ball(const VoxelSet& S,
                                             const std::vector<LatticeDirection>& schedule) {
    S.validate();
    BallScheduleResult out;
    out.result = S;
    if (S.empty()) return out;
    const double rho = std::pow(S.measure() / unit_ball_volume(S.spec.n), 1.0 / S.spec.n);
    VoxelSet ball = rasterize_ball(S.spec, rho);
    for (const auto& dir : schedule) {
        out.result = steiner(out.result, dir);
        long delta = 0;
        for (long i = 0; i < S.spec.total(); ++i)
            delta += (out.result.mask[i] != ball.mask[i]) ? 1 : 0;
        out.delta_history.push_back(delta * S.spec.cell_volume());
    }
    return out;
}

// Exact Minkowski sum of two cell unions on a doubled box with the same step:
// the sum of two side-h cells is a side-2h cube made of 2^n cells on the
// shared lattice anchored at the origin.
inline VoxelSet minkowski_sum(const VoxelSet& A, const VoxelSet& B) {
    A.validate();
    B.validate();
    if (!(A.spec == B.spec)) throw invalid_parameter_error("minkowski_sum: specs must match");
    const int n = A.spec.n, N = A.spec.samples;
    GridSpec big(n, 2 * N, 2 * A.spec.extent);
    VoxelSet out(big);
    std::vector<std::array<int, 3>> acells, bcells;
    for (long i = 0; i < A.spec.total(); ++i)
        if (A.mask[i]) acells.push_back(A.spec.unflat(i));
    for (long i = 0; i < B.spec.total(); ++i)
        if (B.mask[i]) bcells.push_back(B.spec.unflat(i));
    for (const auto& a : acells) {
        for (const auto& b : bcells) {
            // absolute cell coordinates a_k + b_k with a_k = i - N/2 per axis;
            // in the doubled grid the base index is (a + b) + N.
            std::array<int, 3> base{0, 0, 0};
            bool ok = true;
            for (int k = 0; k < n; ++k) {
                base[k] = a[k] + b[k];
                if (base[k] < 0 || base[k] + 1 >= 2 * N) ok = false;
            }
            if (!ok) throw needs_larger_box_error("minkowski_sum: sum exceeds the doubled box");
            for (int c = 0; c < (1 << n); ++c) {
                std::array<int, 3> idx = base;
                for (int k = 0; k < n; ++k) idx[k] += (c >> k) & 1;
                out.mask[big.flat(idx)] = 1;
            }
        }
    }
    return out;
}

// Exact integer verification of lambda(A+B)^{1/n} >= lambda(A)^{1/n} +
// lambda(B)^{1/n} from cell counts (the h^n factors cancel).
inline bool brunn_minkowski_holds(long count_sum, long count_a, long count_b, int n) {
    if (count_a == 0 || count_b == 0) return true;  // the inequality needs non-empty sets
    using i128 = __int128;
    i128 c = count_sum, a = count_a, b = count_b;
    i128 d = c - a - b;
    switch (n) {
        case 1: return d >= 0;
        case 2: return d >= 0 && d * d >= 4 * a * b;
        case 3: return d >= 0 && d * d * d >= 27 * a * b * (d + a + b);
    }
    throw invalid_parameter_error("brunn_minkowski_holds: dimension must be 1, 2 or 3");
}

// ---------------------------------------------------------------------------
// Rearrangement inequality check: both sides of
//   integral of prod_j f_j(l_j(z)) K(z) dz <= same with f_j**
// evaluated by midpoint quadrature with automatic refinement.
// ---------------------------------------------------------------------------

// Nonnegative step function on the line with bounded support.
struct StepFn1D {
    std::vector<double> edges;   // strictly increasing
    std::vector<double> values;  // size edges.size()-1, nonnegative; zero outside

    void validate() const {
        if (edges.size() < 2 || values.size() + 1 != edges.size())
            throw invalid_parameter_error("StepFn1D: need k+1 edges for k windows");
        for (std::size_t i = 0; i + 1 < edges.size(); ++i)
            if (!(edges[i] < edges[i + 1])) throw invalid_parameter_error("StepFn1D: edges must increase");
        for (double v : values)
            if (!(v >= 0)) throw invalid_parameter_error("StepFn1D: values must be nonnegative");
    }

    double operator()(double x) const {
        if (x < edges.front() || x >= edges.back()) return 0.0;
        auto it = std::upper_bound(edges.begin(), edges.end(), x);
        return values[static_cast<std::size_t>(it - edges.begin()) - 1];
    }

    // Symmetric decreasing rearrangement: f**(x) = f*(2|x|).
    StepFn1D symmetric_decreasing() const {
        validate();
        std::vector<std::pair<double, double>> pieces;  // (value, width)
        for (std::size_t i = 0; i < values.size(); ++i)
            if (values[i] > 0) pieces.push_back({values[i], edges[i + 1] - edges[i]});
        std::sort(pieces.begin(), pieces.end(), std::greater<>());
        // Merge equal values, then lay out symmetric windows around 0.
        std::vector<std::pair<double, double>> merged;
        for (auto& pc : pieces) {
            if (!merged.empty() && merged.back().first == pc.first)
                merged.back().second += pc.second;
            else
                merged.push_back(pc);
        }
        StepFn1D out;
        if (merged.empty()) {
            out.edges = {0.0, 1.0};
            out.values = {0.0};
            return out;
        }
        // Build right half edges from the center out, then mirror.
        std::vector<double> right{0.0};
        std::vector<double> vals;
        double acc = 0;
        for (auto& pc : merged) {
            acc += pc.second;
            right.push_back(acc / 2);
            vals.push_back(pc.first);
        }
        out.edges.clear();
        out.values.clear();
        for (std::size_t i = right.size(); i-- > 1;) {
            out.edges.push_back(-right[i]);
            out.values.push_back(vals[i - 1]);
        }
        out.edges.push_back(0.0);
        for (std::size_t i = 1; i < right.size(); ++i) {
            out.values.push_back(vals[i - 1]);
            out.edges.push_back(right[i]);
        }
        return out;
    }
};

struct BllResult {
    double lhs, rhs;
};

// Evaluates both sides of the product-rearrangement bound over [-W, W]^m by
// midpoint quadrature, doubling the resolution until both settle to 1e-3.
inline BllResult bll_check(const std::vector<StepFn1D>& fs,
                           const std::vector<std::array<double, 3>>& maps,
                           const std::function<bool(const Vec&)>& kernel, int m, double halfwidth) {
    if (m < 1 || m > 3) throw invalid_parameter_error("bll_check: m must be 1, 2 or 3");
    if (fs.size() != maps.size()) throw invalid_parameter_error("bll_check: one map per factor");
    for (const auto& f : fs) f.validate();
    std::vector<StepFn1D> stars;
    stars.reserve(fs.size());
    for (const auto& f : fs) stars.push_back(f.symmetric_decreasing());

    // The sample lattice carries an irrational phase so indicator boundaries
    // cannot stay aligned with it across dyadic refinements.
    const double phase = 0.5 * (std::sqrt(5.0) - 1.0);
    auto evaluate = [&](long per_axis, bool starred) {
        double step = 2 * halfwidth / per_axis, acc = 0;
        long total = 1;
        for (int k = 0; k < m; ++k) total *= per_axis;
        for (long cell = 0; cell < total; ++cell) {
            long rem = cell;
            Vec z{0, 0, 0};
            for (int k = 0; k < m; ++k) {
                long ik = rem % per_axis;
                rem /= per_axis;
                z[k] = -halfwidth + (ik + phase) * step;
            }
            if (!kernel(z)) continue;
            double prod = 1;
            for (std::size_t j = 0; j < fs.size() && prod != 0; ++j) {
                double arg = 0;
                for (int k = 0; k < m; ++k) arg += maps[j][k] * z[k];
                prod *= starred ? stars[j](arg) : fs[j](arg);
            }
            acc += prod;
        }
        double vol = 1;
        for (int k = 0; k < m; ++k) vol *= step;
        return acc * vol;
    };

    // Balance check on the quadrature sample.
    {
        long per_axis = 16;
        double step = 2 * halfwidth / per_axis;
        long total = 1;
        for (int k = 0; k < m; ++k) total *= per_axis;
        for (long cell = 0; cell < total; ++cell) {
            long rem = cell;
            Vec z{0, 0, 0};
            for (int k = 0; k < m; ++k) {
                long ik = rem % per_axis;
                rem /= per_axis;
                z[k] = -halfwidth + (ik + 0.5) * step;
            }
            Vec mz = scaled(z, -1.0);
            if (kernel(z) != kernel(mz))
                throw invalid_kernel_error("bll_check: kernel is not balanced");
        }
    }

    // Indicator boundaries can keep a dyadic lattice alignment for one
    // doubling, so settle only after two consecutive quiet refinements.
    long per_axis = 64;
    BllResult prev{-1, -1}, cur{0, 0};
    int quiet = 0;
    for (int iter = 0; iter < 12; ++iter) {
        cur = {evaluate(per_axis, false), evaluate(per_axis, true)};
        if (prev.lhs >= 0) {
            double dl = std::abs(cur.lhs - prev.lhs), dr = std::abs(cur.rhs - prev.rhs);
            double scale = std::max({std::abs(cur.lhs), std::abs(cur.rhs), 1e-12});
            quiet = (dl <= 1e-3 * scale && dr <= 1e-3 * scale) ? quiet + 1 : 0;
            if (quiet >= 2) break;
        }
        prev = cur;
        per_axis *= 2;
        long total = 1;
        for (int k = 0; k < m; ++k) total *= per_axis;
        if (total > (1L << 24)) break;
    }
    return cur;
}

}  // namespace harmonica
