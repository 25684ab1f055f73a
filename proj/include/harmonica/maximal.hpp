#pragma once

#include <deque>
#include <functional>
#include <map>
#include <string>

#include "grid.hpp"

namespace harmonica {

namespace detail {

// Small dense tensor with per-axis sizes; axis 0 slowest, like GridSpec.
struct Tensor {
    int n = 1;
    std::array<int, 3> dims{1, 1, 1};
    std::vector<double> v;

    long total() const {
        long t = 1;
        for (int k = 0; k < n; ++k) t *= dims[k];
        return t;
    }
    long stride(int axis) const {
        long s = 1;
        for (int k = axis + 1; k < n; ++k) s *= dims[k];
        return s;
    }
};

template <class LineFn>
void for_each_line(Tensor& t, int axis, LineFn&& fn) {
    long stride = t.stride(axis);
    long lines = t.total() / t.dims[axis];
    for (long ln = 0; ln < lines; ++ln) {
        long offset = 0, rem = ln;
        for (int k = t.n - 1; k >= 0; --k) {
            if (k == axis) continue;
            long ik = rem % t.dims[k];
            rem /= t.dims[k];
            offset += ik * t.stride(k);
        }
        fn(offset, stride);
    }
}

// Replace the axis by sums over windows of `w` consecutive entries
// (length M -> M - w + 1).
inline void window_sum_axis(Tensor& t, int axis, int w) {
    Tensor out = t;
    out.dims[axis] = t.dims[axis] - w + 1;
    out.v.assign(out.total(), 0.0);
    const int M = t.dims[axis], Mo = out.dims[axis];
    std::vector<double> line(M);
    long done = 0;
    for_each_line(t, axis, [&](long off, long stride) {
        for (int i = 0; i < M; ++i) line[i] = t.v[off + i * stride];
        double run = 0;
        for (int i = 0; i < w; ++i) run += line[i];
        // Output lines share the same cross-axis offset layout only when the
        // other dims are unchanged, which holds here.
        long out_off = 0;
        {
            // Recompute the offset in the output tensor.
            long rem = done;
            for (int k = t.n - 1; k >= 0; --k) {
                if (k == axis) continue;
                long ik = rem % t.dims[k];
                rem /= t.dims[k];
                out_off += ik * out.stride(k);
            }
        }
        long ostride = out.stride(axis);
        out.v[out_off] = run;
        for (int i = 1; i < Mo; ++i) {
            run += line[i + w - 1] - line[i - 1];
            out.v[out_off + i * ostride] = run;
        }
        ++done;
    });
    t = std::move(out);
}

// Sliding maximum mapping anchor index a in [0, M-1] to point index j in
// [0, Npts-1] over the window a in [j - w + 1, j] (clamped): a monotone
// deque per line.
inline void anchor_max_to_points(Tensor& t, int axis, int w, int npts) {
    Tensor out = t;
    out.dims[axis] = npts;
    out.v.assign(out.total(), 0.0);
    const int M = t.dims[axis];
    std::vector<double> line(M);
    long done = 0;
    for_each_line(t, axis, [&](long off, long stride) {
        for (int i = 0; i < M; ++i) line[i] = t.v[off + i * stride];
        long out_off = 0;
        {
            long rem = done;
            for (int k = t.n - 1; k >= 0; --k) {
                if (k == axis) continue;
                long ik = rem % t.dims[k];
                rem /= t.dims[k];
                out_off += ik * out.stride(k);
            }
        }
        long ostride = out.stride(axis);
        std::deque<int> dq;  // indices with decreasing values
        for (int j = 0; j < npts; ++j) {
            if (j < M) {
                while (!dq.empty() && line[dq.back()] <= line[j]) dq.pop_back();
                dq.push_back(j);
            }
            while (!dq.empty() && dq.front() < j - w + 1) dq.pop_front();
            out.v[out_off + j * ostride] = line[dq.front()];
        }
        ++done;
    });
    t = std::move(out);
}

inline Tensor tensor_from(const SampledFunction& f, bool absolute) {
    Tensor t;
    t.n = f.spec.n;
    for (int k = 0; k < t.n; ++k) t.dims[k] = f.spec.samples;
    t.v.resize(f.values.size());
    for (std::size_t i = 0; i < f.values.size(); ++i)
        t.v[i] = absolute ? std::abs(f.values[i]) : f.values[i];
    return t;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Non-centered maximal function over axis-parallel cubes with grid-aligned
// corners: at each node the sup of |f|-averages over all cell windows whose
// closed cube contains the node. Window sums come from running sums and the
// per-edge sup from a monotone-deque sliding maximum, so the exhaustive
// family costs O(n N^{n+1}).
// ---------------------------------------------------------------------------

inline SampledFunction maximal_function(const SampledFunction& f) {
    f.validate();
    const int n = f.spec.n, N = f.spec.samples;
    SampledFunction out(f.spec);
    for (int e = 1; e <= N; ++e) {
        detail::Tensor t = detail::tensor_from(f, true);
        for (int ax = 0; ax < n; ++ax) detail::window_sum_axis(t, ax, e);
        const double scale = 1.0 / std::pow(static_cast<double>(e), n);
        for (auto& v : t.v) v *= scale;
        // A node j belongs to the cube anchored at a iff a <= j <= a + e.
        for (int ax = 0; ax < n; ++ax) detail::anchor_max_to_points(t, ax, e + 1, N);
        for (long i = 0; i < f.spec.total(); ++i)
            out.values[i] = std::max(out.values[i], t.v[i]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Vitali covering selector.
// ---------------------------------------------------------------------------

struct Cube {
    Vec center{0, 0, 0};
    double edge = 1;
};

struct CubeFamily {
    int n = 2;
    std::vector<Cube> cubes;

    void validate() const {
        for (const auto& c : cubes)
            if (!(c.edge > 0)) throw invalid_parameter_error("CubeFamily: edges must be positive");
    }
};

inline bool cubes_intersect(const Cube& a, const Cube& b, int n) {
    for (int k = 0; k < n; ++k)
        if (std::abs(a.center[k] - b.center[k]) >= 0.5 * (a.edge + b.edge)) return false;
    return true;
}

// Greedy selection by decreasing measure; the finite family admits the exact
// maximum at every step. The output is pairwise disjoint and its 5-dilates
// cover the input union.
inline CubeFamily vitali_subcover(const CubeFamily& family) {
    family.validate();
    CubeFamily out;
    out.n = family.n;
    std::vector<std::size_t> order(family.cubes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return family.cubes[a].edge > family.cubes[b].edge;
    });
    for (std::size_t i : order) {
        const Cube& c = family.cubes[i];
        bool ok = true;
        for (const Cube& s : out.cubes)
            if (cubes_intersect(c, s, family.n)) {
                ok = false;
                break;
            }
        if (ok) out.cubes.push_back(c);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Grand maximal function over a finite dictionary of radial C^1 bumps,
// geometric scales, and non-central base points |y - x| < b t.
// ---------------------------------------------------------------------------

struct BumpProfile {
    std::string name;
    std::function<double(double)> shape;  // support [0, 1], |shape'| <= 1
};

struct BumpDictionary {
    std::vector<BumpProfile> profiles;
    std::vector<double> scales;
    double noncentrality = 2.0;  // b > 1

    void validate() const {
        if (profiles.empty()) throw invalid_parameter_error("BumpDictionary: needs at least one profile");
        if (!(noncentrality > 1.0))
            throw invalid_parameter_error("BumpDictionary: noncentrality must exceed 1");
        for (double t : scales)
            if (!(t > 0)) throw invalid_parameter_error("BumpDictionary: scales must be positive");
    }
};

// Polynomial and cosine plateaus normalized to unit C^1 seminorm.
inline std::vector<BumpProfile> standard_bump_profiles() {
    const double c2 = 3.0 * std::sqrt(3.0) / 8.0;
    const double c3 = 25.0 * std::sqrt(5.0) / 96.0;
    return {
        {"quartic", [c2](double r) { double u = 1 - r * r; return r < 1 ? c2 * u * u : 0.0; }},
        {"sextic", [c3](double r) { double u = 1 - r * r; return r < 1 ? c3 * u * u * u : 0.0; }},
        {"cosine", [](double r) {
             double c = std::cos(M_PI * r / 2);
             return r < 1 ? M_2_PI * c * c : 0.0;
         }},
    };
}

inline BumpDictionary default_dictionary(const GridSpec& spec, int n_scales = 12, double b = 2.0) {
    BumpDictionary d;
    d.profiles = standard_bump_profiles();
    d.noncentrality = b;
    double lo = 2 * spec.step(), hi = spec.extent;
    for (int i = 0; i < n_scales; ++i)
        d.scales.push_back(lo * std::pow(hi / lo, n_scales == 1 ? 0.0 : static_cast<double>(i) / (n_scales - 1)));
    return d;
}

namespace detail {

// Exact linear convolution of f with a radial kernel of support radius <= L
// on a zero-padded double-size array; index-space FFT keeps the phase
// bookkeeping out of the way.
inline std::vector<double> convolve_padded(const SampledFunction& f,
                                           const std::function<double(const Vec&)>& kernel) {
    const int n = f.spec.n, N = f.spec.samples, P = 2 * N;
    const double h = f.spec.step();
    long ptotal = 1;
    for (int k = 0; k < n; ++k) ptotal *= P;
    GridSpec pspec(n, P, f.spec.extent * 2);
    std::vector<cplx> fa(ptotal, 0.0), ka(ptotal, 0.0);
    // f occupies the low corner.
    for (long i = 0; i < f.spec.total(); ++i) {
        auto idx = f.spec.unflat(i);
        long flat = 0;
        for (int k = 0; k < n; ++k) flat = flat * P + idx[k];
        fa[flat] = f.values[i];
    }
    // kernel wrapped around index 0.
    for (long i = 0; i < ptotal; ++i) {
        long rem = i;
        Vec d{0, 0, 0};
        for (int k = n - 1; k >= 0; --k) {
            long ik = rem % P;
            rem /= P;
            d[k] = (ik < N ? ik : ik - P) * h;
        }
        double kv = kernel(d);
        if (kv != 0.0) ka[i] = kv;
    }
    transform_axes(fa, pspec, -1);
    transform_axes(ka, pspec, -1);
    for (long i = 0; i < ptotal; ++i) fa[i] *= ka[i];
    transform_axes(fa, pspec, +1);
    const double scale = std::pow(h, n) / static_cast<double>(ptotal);
    std::vector<double> out(f.spec.total());
    for (long i = 0; i < f.spec.total(); ++i) {
        auto idx = f.spec.unflat(i);
        long flat = 0;
        for (int k = 0; k < n; ++k) flat = flat * P + idx[k];
        out[i] = fa[flat].real() * scale;
    }
    return out;
}

// Pointwise sup over offsets |d| < radius (in cells) of src, by rows:
// horizontal sliding maxima reused across rows at equal half-widths.
inline std::vector<double> disk_max(const std::vector<double>& src, const GridSpec& spec,
                                    double radius_cells) {
    const int n = spec.n, N = spec.samples;
    auto strict = [&](double r) {
        long m = static_cast<long>(std::floor(r));
        if (static_cast<double>(m) == r) --m;  // strict inequality
        return std::max(m, 0L);
    };
    std::vector<double> out(src.size(), 0.0);
    auto horizontal = [&](long m) {
        // sliding max with window [j-m, j+m] along the last axis
        std::vector<double> res(src.size());
        long lines = static_cast<long>(src.size()) / N;
        for (long ln = 0; ln < lines; ++ln) {
            long offset = 0, rem = ln;
            for (int k = n - 2; k >= 0; --k) {
                long ik = rem % N;
                rem /= N;
                long s = 1;
                for (int kk = k + 1; kk < n; ++kk) s *= N;
                offset += ik * s;
            }
            std::deque<int> dq;
            int pushed = 0;
            for (int j = 0; j < N; ++j) {
                int upto = std::min<long>(N - 1, j + m);
                while (pushed <= upto) {
                    while (!dq.empty() && src[offset + dq.back()] <= src[offset + pushed]) dq.pop_back();
                    dq.push_back(pushed);
                    ++pushed;
                }
                while (!dq.empty() && dq.front() < j - m) dq.pop_front();
                res[offset + j] = src[offset + dq.front()];
            }
        }
        return res;
    };

    if (n == 1) {
        return horizontal(strict(radius_cells));
    }
    std::map<long, std::vector<double>> row_cache;
    auto cached_rowmax = [&](long m) -> const std::vector<double>& {
        auto it = row_cache.find(m);
        if (it == row_cache.end()) it = row_cache.emplace(m, horizontal(m)).first;
        return it->second;
    };
    const long R = strict(radius_cells);
    if (n == 2) {
        for (long dy = -R; dy <= R; ++dy) {
            double rest = radius_cells * radius_cells - static_cast<double>(dy) * dy;
            if (rest < 0) continue;
            long mx = strict(std::sqrt(rest));
            const auto& rows = cached_rowmax(mx);
            for (int i = 0; i < N; ++i) {
                long si = i + dy;
                if (si < 0 || si >= N) continue;
                const double* srow = rows.data() + si * N;
                double* orow = out.data() + static_cast<long>(i) * N;
                for (int j = 0; j < N; ++j) orow[j] = std::max(orow[j], srow[j]);
            }
        }
        return out;
    }
    // n == 3: sweep offset pairs in the two leading axes.
    for (long dy = -R; dy <= R; ++dy) {
        for (long dz = -R; dz <= R; ++dz) {
            double rest = radius_cells * radius_cells - static_cast<double>(dy) * dy -
                          static_cast<double>(dz) * dz;
            if (rest < 0) continue;
            long mx = strict(std::sqrt(rest));
            const auto& rows = cached_rowmax(mx);
            for (int i = 0; i < N; ++i) {
                long si = i + dy;
                if (si < 0 || si >= N) continue;
                for (int j = 0; j < N; ++j) {
                    long sj = j + dz;
                    if (sj < 0 || sj >= N) continue;
                    const double* srow = rows.data() + (si * N + sj) * N;
                    double* orow = out.data() + (static_cast<long>(i) * N + j) * N;
                    for (int k = 0; k < N; ++k) orow[k] = std::max(orow[k], srow[k]);
                }
            }
        }
    }
    return out;
}

}  // namespace detail

inline SampledFunction grand_maximal(const SampledFunction& f, const BumpDictionary& dict) {
    f.validate();
    dict.validate();
    const int n = f.spec.n;
    const double h = f.spec.step();
    SampledFunction out(f.spec);
    for (const auto& prof : dict.profiles) {
        for (double t : dict.scales) {
            const double tn = std::pow(t, n);
            auto kernel = [&](const Vec& d) {
                double r = norm(d, n) / t;
                return r < 1.0 ? prof.shape(r) / tn : 0.0;
            };
            std::vector<double> conv = detail::convolve_padded(f, kernel);
            for (auto& v : conv) v = std::abs(v);
            std::vector<double> dil = detail::disk_max(conv, f.spec, dict.noncentrality * t / h);
            for (long i = 0; i < f.spec.total(); ++i)
                out.values[i] = std::max(out.values[i], dil[i]);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Mean oscillation, BMO norm, and the pointwise sharp function over the same
// exhaustive cube family as the maximal function.
// ---------------------------------------------------------------------------

namespace detail {

// mo_q over the cell window [a, a+e-1]^n given the window mean.
template <class At>
double window_mo(const At& value_at, const std::array<int, 3>& anchor, int e, int n, double q,
                 double mean) {
    double acc = 0;
    long cells = 1;
    for (int k = 0; k < n; ++k) cells *= e;
    std::array<int, 3> idx = anchor;
    for (long c = 0; c < cells; ++c) {
        long rem = c;
        for (int k = 0; k < n; ++k) {
            idx[k] = anchor[k] + static_cast<int>(rem % e);
            rem /= e;
        }
        double d = std::abs(value_at(idx) - mean);
        acc += q == 1.0 ? d : std::pow(d, q);
    }
    double m = acc / static_cast<double>(cells);
    return q == 1.0 ? m : std::pow(m, 1.0 / q);
}

template <class Visit>
void for_each_cube(const GridSpec& spec, Visit&& visit) {
    const int n = spec.n, N = spec.samples;
    for (int e = 1; e <= N; ++e) {
        std::array<int, 3> a{0, 0, 0};
        bool more = true;
        while (more) {
            visit(e, a);
            more = false;
            for (int k = n - 1; k >= 0; --k) {
                if (++a[k] <= N - e) {
                    more = true;
                    break;
                }
                a[k] = 0;
            }
        }
    }
}

}  // namespace detail

inline double bmo_norm(const SampledFunction& f, double q = 1.0) {
    f.validate();
    if (!(q >= 1.0)) throw invalid_exponent_error("bmo_norm: q must be at least 1");
    const int n = f.spec.n;
    auto value_at = [&](const std::array<int, 3>& idx) { return f.values[f.spec.flat(idx)]; };
    double best = 0;
    // Window means via running sums per edge, oscillation by direct loops.
    const int N = f.spec.samples;
    for (int e = 1; e <= N; ++e) {
        detail::Tensor t = detail::tensor_from(f, false);
        for (int ax = 0; ax < n; ++ax) detail::window_sum_axis(t, ax, e);
        const double cells = std::pow(static_cast<double>(e), n);
        std::array<int, 3> a{0, 0, 0};
        long anchors = t.total();
        for (long ai = 0; ai < anchors; ++ai) {
            long rem = ai;
            for (int k = n - 1; k >= 0; --k) {
                a[k] = static_cast<int>(rem % t.dims[k]);
                rem /= t.dims[k];
            }
            double mean = t.v[ai] / cells;
            best = std::max(best, detail::window_mo(value_at, a, e, n, q, mean));
        }
    }
    return best;
}

inline SampledFunction sharp_function(const SampledFunction& f) {
    f.validate();
    const int n = f.spec.n, N = f.spec.samples;
    auto value_at = [&](const std::array<int, 3>& idx) { return f.values[f.spec.flat(idx)]; };
    SampledFunction out(f.spec);
    for (int e = 1; e <= N; ++e) {
        detail::Tensor t = detail::tensor_from(f, false);
        for (int ax = 0; ax < n; ++ax) detail::window_sum_axis(t, ax, e);
        const double cells = std::pow(static_cast<double>(e), n);
        detail::Tensor mo = t;
        std::array<int, 3> a{0, 0, 0};
        for (long ai = 0; ai < t.total(); ++ai) {
            long rem = ai;
            for (int k = n - 1; k >= 0; --k) {
                a[k] = static_cast<int>(rem % t.dims[k]);
                rem /= t.dims[k];
            }
            mo.v[ai] = detail::window_mo(value_at, a, e, n, 1.0, t.v[ai] / cells);
        }
        for (int ax = 0; ax < n; ++ax) detail::anchor_max_to_points(mo, ax, e + 1, N);
        for (long i = 0; i < f.spec.total(); ++i)
            out.values[i] = std::max(out.values[i], mo.v[i]);
    }
    return out;
}

}  // namespace harmonica
