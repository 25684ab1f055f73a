#pragma once

#include <algorithm>
#include <complex>
#include <cstdint>
#include <numeric>
#include <vector>

#include "core.hpp"
#include "fft.hpp"

namespace harmonica {

// ---------------------------------------------------------------------------
// Uniform isotropic grid over the box [-L, L)^n. Nodes sit at
// x_i = -L + i*h with h = 2L/N, so the origin is a grid node whenever N is
// even (which the invariants require). Sample i represents the cell
// [x_i, x_i + h)^n of volume h^n.
// ---------------------------------------------------------------------------

struct GridSpec {
    int n = 1;         // ambient dimension, 1..3
    int samples = 2;   // N per axis
    double extent = 1; // half-width L

    GridSpec() = default;
    GridSpec(int n_, int samples_, double extent_) : n(n_), samples(samples_), extent(extent_) {
        validate();
    }

    void validate() const {
        if (n < 1 || n > 3) throw invalid_parameter_error("GridSpec: dimension must be 1, 2 or 3");
        if (samples < 2 || samples % 2 != 0)
            throw invalid_parameter_error("GridSpec: N must be even and at least 2");
        if (!(extent > 0)) throw invalid_parameter_error("GridSpec: extent must be positive");
    }

    double step() const { return 2.0 * extent / samples; }
    double cell_volume() const {
        double h = step(), v = 1;
        for (int k = 0; k < n; ++k) v *= h;
        return v;
    }
    long total() const {
        long t = 1;
        for (int k = 0; k < n; ++k) t *= samples;
        return t;
    }
    double coord(int i) const { return -extent + i * step(); }

    // Row-major flattening, axis 0 slowest.
    long flat(const std::array<int, 3>& idx) const {
        long f = 0;
        for (int k = 0; k < n; ++k) f = f * samples + idx[k];
        return f;
    }
    std::array<int, 3> unflat(long f) const {
        std::array<int, 3> idx{0, 0, 0};
        for (int k = n - 1; k >= 0; --k) {
            idx[k] = static_cast<int>(f % samples);
            f /= samples;
        }
        return idx;
    }
    Vec point(long f) const {
        auto idx = unflat(f);
        Vec p{0, 0, 0};
        for (int k = 0; k < n; ++k) p[k] = coord(idx[k]);
        return p;
    }

    bool operator==(const GridSpec& o) const {
        return n == o.n && samples == o.samples && extent == o.extent;
    }
};

struct SampledFunction {
    GridSpec spec;
    std::vector<double> values;

    SampledFunction() = default;
    explicit SampledFunction(const GridSpec& s) : spec(s), values(s.total(), 0.0) {}
    SampledFunction(const GridSpec& s, std::vector<double> v) : spec(s), values(std::move(v)) {
        validate();
    }

    void validate() const {
        spec.validate();
        if (static_cast<long>(values.size()) != spec.total())
            throw invalid_parameter_error("SampledFunction: value count must equal N^n");
        for (double v : values)
            if (!std::isfinite(v))
                throw invalid_parameter_error("SampledFunction: values must be finite");
    }

    double& at(const std::array<int, 3>& idx) { return values[spec.flat(idx)]; }
    double at(const std::array<int, 3>& idx) const { return values[spec.flat(idx)]; }

    // Multilinear interpolation of the node samples; zero outside the node hull.
    double interpolate(const Vec& x) const {
        const int n = spec.n, N = spec.samples;
        const double h = spec.step();
        int base[3];
        double frac[3];
        for (int k = 0; k < n; ++k) {
            double g = (x[k] + spec.extent) / h;
            if (g < -1.0 || g > static_cast<double>(N)) return 0.0;
            double fl = std::floor(g);
            base[k] = static_cast<int>(fl);
            frac[k] = g - fl;
        }
        double acc = 0.0;
        int corners = 1 << n;
        for (int c = 0; c < corners; ++c) {
            double w = 1.0;
            std::array<int, 3> idx{0, 0, 0};
            bool inside = true;
            for (int k = 0; k < n; ++k) {
                int bit = (c >> k) & 1;
                int i = base[k] + bit;
                w *= bit ? frac[k] : 1.0 - frac[k];
                if (i < 0 || i >= N) {
                    inside = false;
                    break;
                }
                idx[k] = i;
            }
            if (inside && w != 0.0) acc += w * values[spec.flat(idx)];
        }
        return acc;
    }
};

struct Spectrum {
    GridSpec spec;
    std::vector<std::complex<double>> coeffs;

    // Frequency of lattice index k along one axis: (pi/L) * m with
    // m in {-N/2, ..., N/2 - 1} stored in DFT order.
    double freq(int k) const {
        int N = spec.samples;
        int m = (k < N / 2) ? k : k - N;
        return M_PI / spec.extent * m;
    }
    Vec freq_vec(long f) const {
        auto idx = spec.unflat(f);
        Vec xi{0, 0, 0};
        for (int k = 0; k < spec.n; ++k) xi[k] = freq(idx[k]);
        return xi;
    }

    // Bilinear interpolation of the coefficient lattice at an arbitrary
    // frequency point; zero outside the lattice box.
    std::complex<double> interpolate(const Vec& xi) const {
        const int n = spec.n, N = spec.samples;
        const double dxi = M_PI / spec.extent;
        int base[3];
        double frac[3];
        for (int k = 0; k < n; ++k) {
            double g = xi[k] / dxi + N / 2.0;  // continuous index in [0, N)
            if (g < 0.0 || g > static_cast<double>(N - 1)) return {0.0, 0.0};
            double fl = std::floor(g);
            base[k] = static_cast<int>(fl);
            frac[k] = g - fl;
        }
        std::complex<double> acc{0.0, 0.0};
        for (int c = 0; c < (1 << n); ++c) {
            double w = 1.0;
            std::array<int, 3> idx{0, 0, 0};
            bool ok = true;
            for (int k = 0; k < n; ++k) {
                int bit = (c >> k) & 1;
                int i = base[k] + bit;
                w *= bit ? frac[k] : 1.0 - frac[k];
                if (i < 0 || i >= N) {
                    ok = false;
                    break;
                }
                // stored order: index j corresponds to m = j - N/2 shifted back
                int j = i - N / 2;
                idx[k] = j < 0 ? j + N : j;
            }
            if (ok && w != 0.0) acc += w * coeffs[spec.flat(idx)];
        }
        return acc;
    }
};

namespace detail {

// Apply an unnormalized 1D transform along every axis of a flattened array.
inline void transform_axes(std::vector<cplx>& data, const GridSpec& spec, int sign) {
    const int n = spec.n, N = spec.samples;
    std::vector<cplx> line(N);
    for (int axis = 0; axis < n; ++axis) {
        long stride = 1;
        for (int k = axis + 1; k < n; ++k) stride *= N;
        long lines = spec.total() / N;
        for (long ln = 0; ln < lines; ++ln) {
            // Base offset of this line: distribute the line id over the
            // indices of the remaining axes.
            long offset = 0, rem = ln;
            for (int k = n - 1; k >= 0; --k) {
                if (k == axis) continue;
                long ik = rem % N;
                rem /= N;
                long s = 1;
                for (int kk = k + 1; kk < n; ++kk) s *= N;
                offset += ik * s;
            }
            for (int i = 0; i < N; ++i) line[i] = data[offset + i * stride];
            transform(line, sign);
            for (int i = 0; i < N; ++i) data[offset + i * stride] = line[i];
        }
    }
}

// Checkerboard sign (-1)^(k_1 + ... + k_n) that re-anchors the DFT phases to
// the box corner at -L.
inline double corner_sign(const GridSpec& spec, long f) {
    auto idx = spec.unflat(f);
    int s = 0;
    for (int k = 0; k < spec.n; ++k) s += idx[k];
    return (s & 1) ? -1.0 : 1.0;
}

}  // namespace detail

// Forward transform with the e^{-i<xi,x>} convention, scaled by the cell
// volume h^n so the coefficients approximate the continuum integral.
inline Spectrum dft(const SampledFunction& f) {
    f.validate();
    Spectrum out;
    out.spec = f.spec;
    out.coeffs.assign(f.values.begin(), f.values.end());
    detail::transform_axes(out.coeffs, f.spec, -1);
    const double hv = f.spec.cell_volume();
    for (long i = 0; i < f.spec.total(); ++i) out.coeffs[i] *= hv * detail::corner_sign(f.spec, i);
    return out;
}

inline SampledFunction idft(const Spectrum& s) {
    std::vector<detail::cplx> data(s.coeffs.size());
    for (long i = 0; i < s.spec.total(); ++i) data[i] = s.coeffs[i] * detail::corner_sign(s.spec, i);
    detail::transform_axes(data, s.spec, +1);
    SampledFunction f(s.spec);
    const double scale = 1.0 / (s.spec.cell_volume() * static_cast<double>(s.spec.total()));
    for (long i = 0; i < s.spec.total(); ++i) f.values[i] = data[i].real() * scale;
    return f;
}

// ---------------------------------------------------------------------------
// Quadrature along lines and hyperplane slices.
// ---------------------------------------------------------------------------

// Trapezoid rule along the segment [p - span*dir, p + span*dir] with step h,
// values by multilinear interpolation (zero outside the box).
inline double line_integral(const SampledFunction& f, const Vec& direction, const Vec& offset_point,
                            double span) {
    require_unit(direction, f.spec.n, "line_integral");
    const double h = f.spec.step();
    const long K = static_cast<long>(std::ceil(span / h));
    double acc = 0.0;
    for (long k = -K; k <= K; ++k) {
        Vec x = plus(offset_point, scaled(direction, k * h));
        double w = (k == -K || k == K) ? 0.5 : 1.0;
        acc += w * f.interpolate(x);
    }
    return acc * h;
}

// 2D trapezoid quadrature over the slice <normal, x> = t of a 3D field.
inline double plane_integral(const SampledFunction& f, const Vec& normal, double t,
                             double span = -1.0) {
    if (f.spec.n != 3) throw invalid_parameter_error("plane_integral: requires n = 3");
    require_unit(normal, 3, "plane_integral");
    if (span <= 0) span = f.spec.extent * std::sqrt(3.0);
    // Orthonormal frame spanning the plane.
    int least = 0;
    for (int k = 1; k < 3; ++k)
        if (std::abs(normal[k]) < std::abs(normal[least])) least = k;
    Vec e{0, 0, 0};
    e[least] = 1.0;
    Vec u{normal[1] * e[2] - normal[2] * e[1], normal[2] * e[0] - normal[0] * e[2],
          normal[0] * e[1] - normal[1] * e[0]};
    double un = norm(u, 3);
    u = scaled(u, 1.0 / un);
    Vec v{normal[1] * u[2] - normal[2] * u[1], normal[2] * u[0] - normal[0] * u[2],
          normal[0] * u[1] - normal[1] * u[0]};
    const double h = f.spec.step();
    const long K = static_cast<long>(std::ceil(span / h));
    Vec base = scaled(normal, t);
    double acc = 0.0;
    for (long a = -K; a <= K; ++a) {
        double wa = (a == -K || a == K) ? 0.5 : 1.0;
        Vec row = plus(base, scaled(u, a * h));
        for (long b = -K; b <= K; ++b) {
            double wb = (b == -K || b == K) ? 0.5 : 1.0;
            acc += wa * wb * f.interpolate(plus(row, scaled(v, b * h)));
        }
    }
    return acc * h * h;
}

inline bool is_infinity(double p) { return std::isinf(p); }

inline double lp_norm(const SampledFunction& f, double p) {
    if (!(p >= 1.0)) throw invalid_exponent_error("lp_norm: p must be at least 1");
    if (is_infinity(p)) {
        double m = 0;
        for (double v : f.values) m = std::max(m, std::abs(v));
        return m;
    }
    const double hv = f.spec.cell_volume();
    double acc = 0;
    for (double v : f.values) acc += std::pow(std::abs(v), p) * hv;
    return std::pow(acc, 1.0 / p);
}

inline double integral(const SampledFunction& f) {
    return std::accumulate(f.values.begin(), f.values.end(), 0.0) * f.spec.cell_volume();
}

inline double mean(const SampledFunction& f) {
    return std::accumulate(f.values.begin(), f.values.end(), 0.0) / static_cast<double>(f.spec.total());
}

}  // namespace harmonica
