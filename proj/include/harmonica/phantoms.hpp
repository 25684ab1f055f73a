#pragma once

#include <random>

#include "grid.hpp"

namespace harmonica::phantoms {

// Indicator of the ball B(center, R). Node values carry the coverage of the
// node-centered cell [x_i - h/2, x_i + h/2)^n, so interpolated line integrals
// track the continuum chord to second order.
inline SampledFunction ball(const GridSpec& spec, double radius, Vec center = {0, 0, 0},
                            int supersample = 6) {
    SampledFunction f(spec);
    const double h = spec.step();
    const double half_diag = 0.5 * h * std::sqrt(static_cast<double>(spec.n));
    for (long i = 0; i < spec.total(); ++i) {
        Vec p = spec.point(i);
        double d = norm(minus(p, center), spec.n);
        if (d <= radius - half_diag) {
            f.values[i] = 1.0;
        } else if (d < radius + half_diag) {
            long inside = 0, total = 1;
            for (int k = 0; k < spec.n; ++k) total *= supersample;
            for (long s = 0; s < total; ++s) {
                long rem = s;
                Vec q = spec.point(i);
                for (int k = 0; k < spec.n; ++k) {
                    long sk = rem % supersample;
                    rem /= supersample;
                    q[k] += (sk + 0.5) * h / supersample - 0.5 * h;
                }
                if (norm(minus(q, center), spec.n) <= radius) ++inside;
            }
            f.values[i] = static_cast<double>(inside) / static_cast<double>(total);
        }
    }
    return f;
}

// exp(-|x - center|^2 / width^2); the default width keeps the boundary values
// below 1e-12 so the box truncation is invisible to quadrature.
inline SampledFunction gauss(const GridSpec& spec, double width = 0.0, Vec center = {0, 0, 0}) {
    if (width <= 0) width = 0.17 * spec.extent;
    SampledFunction f(spec);
    for (long i = 0; i < spec.total(); ++i) {
        double d2 = 0;
        Vec p = spec.point(i);
        for (int k = 0; k < spec.n; ++k) d2 += (p[k] - center[k]) * (p[k] - center[k]);
        f.values[i] = std::exp(-d2 / (width * width));
    }
    return f;
}

inline SampledFunction twobump(const GridSpec& spec) {
    const double off = 0.25 * spec.extent, w = 0.1 * spec.extent;
    Vec c1{off, 0, 0}, c2{-off, 0, 0};
    if (spec.n >= 2) {
        c1[1] = off / 2;
        c2[1] = -off / 2;
    }
    SampledFunction a = gauss(spec, w, c1);
    SampledFunction b = gauss(spec, w, c2);
    for (long i = 0; i < spec.total(); ++i) a.values[i] += 0.7 * b.values[i];
    return a;
}

// Slab |x_0| <= half_height crossed with the ball of the remaining
// coordinates; the shape whose transform picks out the direction exponent.
inline SampledFunction cylinder(const GridSpec& spec, double radius, double half_height = 0.0,
                                int supersample = 6) {
    if (half_height <= 0) half_height = 0.4 * spec.extent;
    if (spec.n < 2) throw invalid_parameter_error("cylinder: requires n >= 2");
    SampledFunction f(spec);
    const double h = spec.step();
    for (long i = 0; i < spec.total(); ++i) {
        long inside = 0, total = 1;
        for (int k = 0; k < spec.n; ++k) total *= supersample;
        // Quick accept/reject at the node, supersample near edges.
        Vec p = spec.point(i);
        double r2 = 0;
        for (int k = 1; k < spec.n; ++k) r2 += p[k] * p[k];
        double margin = h;
        bool near_edge = std::abs(std::abs(p[0]) - half_height) < margin ||
                         std::abs(std::sqrt(r2) - radius) < margin;
        if (!near_edge) {
            f.values[i] = (std::abs(p[0]) <= half_height && r2 <= radius * radius) ? 1.0 : 0.0;
            continue;
        }
        for (long s = 0; s < total; ++s) {
            long rem = s;
            Vec q = spec.point(i);
            for (int k = 0; k < spec.n; ++k) {
                long sk = rem % supersample;
                rem /= supersample;
                q[k] += (sk + 0.5) * h / supersample - 0.5 * h;
            }
            double rr = 0;
            for (int k = 1; k < spec.n; ++k) rr += q[k] * q[k];
            if (std::abs(q[0]) <= half_height && rr <= radius * radius) ++inside;
        }
        f.values[i] = static_cast<double>(inside) / static_cast<double>(total);
    }
    return f;
}

// Sum of a few signed Gaussian bumps with interior centers; smooth, decaying
// below 1e-12 at the box boundary, effectively band-limited. Deterministic in
// the seed.
inline SampledFunction random_bumps(const GridSpec& spec, int count, std::uint64_t seed,
                                    bool zero_mean = false) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> pos(-0.25 * spec.extent, 0.25 * spec.extent);
    std::uniform_real_distribution<double> wid(0.06 * spec.extent, 0.115 * spec.extent);
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    SampledFunction f(spec);
    for (int b = 0; b < count; ++b) {
        Vec c{0, 0, 0};
        for (int k = 0; k < spec.n; ++k) c[k] = pos(rng);
        double w = wid(rng), a = amp(rng);
        for (long i = 0; i < spec.total(); ++i) {
            double d2 = 0;
            Vec p = spec.point(i);
            for (int k = 0; k < spec.n; ++k) d2 += (p[k] - c[k]) * (p[k] - c[k]);
            f.values[i] += a * std::exp(-d2 / (w * w));
        }
    }
    if (zero_mean) {
        double m = mean(f);
        for (double& v : f.values) v -= m;
    }
    return f;
}

// Random trigonometric polynomial restricted to |m|_inf <= band on the dual
// lattice; used where only Fourier-side behavior matters.
inline SampledFunction random_band_limited(const GridSpec& spec, int band, std::uint64_t seed,
                                           bool zero_mean = true) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Spectrum s;
    s.spec = spec;
    s.coeffs.assign(spec.total(), {0.0, 0.0});
    const int N = spec.samples;
    for (long i = 0; i < spec.total(); ++i) {
        auto idx = spec.unflat(i);
        bool in_band = true;
        for (int k = 0; k < spec.n; ++k) {
            int m = idx[k] < N / 2 ? idx[k] : idx[k] - N;
            if (std::abs(m) > band) in_band = false;
        }
        if (in_band) s.coeffs[i] = {g(rng), g(rng)};
    }
    if (zero_mean) s.coeffs[0] = {0.0, 0.0};
    SampledFunction f = idft(s);  // real part; asymmetric imaginary parts drop
    double scale = 1.0 / std::max(1e-300, lp_norm(f, INFINITY));
    for (double& v : f.values) v *= scale;
    return f;
}

// Uniform random cell values in [-1, 1]; the workhorse for rearrangement and
// maximal-function property tests.
inline SampledFunction random_cells(const GridSpec& spec, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    SampledFunction f(spec);
    for (double& v : f.values) v = u(rng);
    return f;
}

}  // namespace harmonica::phantoms
