#pragma once

#include <complex>
#include <functional>

#include "grid.hpp"
#include "phantoms.hpp"

namespace harmonica {

// ---------------------------------------------------------------------------
// Direction sets on the sphere with quadrature weights for the normalized
// (unit-mass) uniform measure, the normalization under which the inversion
// constant below is exact.
// ---------------------------------------------------------------------------

struct DirectionSet {
    int n = 2;
    std::vector<Vec> directions;
    std::vector<double> weights;

    void validate() const {
        if (directions.size() != weights.size() || directions.empty())
            throw invalid_parameter_error("DirectionSet: one weight per direction");
        for (const auto& d : directions) require_unit(d, n, "DirectionSet");
        for (double w : weights)
            if (!(w > 0)) throw invalid_parameter_error("DirectionSet: weights must be positive");
    }
};

// Uniform angles on [0, pi): each direction stands for an antipodal pair, so
// equal weights 1/D exhaust the normalized circle measure.
inline DirectionSet half_circle_directions(int count) {
    if (count < 1) throw invalid_parameter_error("half_circle_directions: need at least one");
    DirectionSet d;
    d.n = 2;
    for (int k = 0; k < count; ++k) {
        double th = M_PI * k / count;
        d.directions.push_back({std::cos(th), std::sin(th), 0});
        d.weights.push_back(1.0 / count);
    }
    return d;
}

inline DirectionSet full_circle_directions(int count) {
    DirectionSet d;
    d.n = 2;
    for (int k = 0; k < count; ++k) {
        double th = 2 * M_PI * k / count;
        d.directions.push_back({std::cos(th), std::sin(th), 0});
        d.weights.push_back(1.0 / count);
    }
    return d;
}

// Deterministic spiral (golden-angle) covering of the full 2-sphere.
inline DirectionSet sphere_directions(int count) {
    if (count < 1) throw invalid_parameter_error("sphere_directions: need at least one");
    DirectionSet d;
    d.n = 3;
    const double ga = M_PI * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < count; ++k) {
        double z = 1.0 - (2.0 * k + 1.0) / count;
        double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        double phi = ga * k;
        Vec v{r * std::cos(phi), r * std::sin(phi), z};
        double nn = norm(v, 3);
        d.directions.push_back(scaled(v, 1.0 / nn));
        d.weights.push_back(1.0 / count);
    }
    return d;
}

// ---------------------------------------------------------------------------
// Sinogram: transform values on directions x uniform offsets. offset_dim = 1
// for hyperplane transforms; 2 for the line transform in R^3, where the
// offsets grid lives on an orthonormal frame of sigma-perp.
// ---------------------------------------------------------------------------

struct Sinogram {
    DirectionSet dirs;
    int offset_dim = 1;
    int n_offsets = 0;
    double t_max = 0;
    std::vector<double> values;  // [direction][offset...] row-major

    long offsets_per_direction() const {
        long t = 1;
        for (int k = 0; k < offset_dim; ++k) t *= n_offsets;
        return t;
    }
    double offset_step() const { return 2.0 * t_max / n_offsets; }
    double offset(int j) const { return -t_max + j * offset_step(); }

    void validate() const {
        dirs.validate();
        if (offset_dim < 1 || offset_dim > 2)
            throw invalid_parameter_error("Sinogram: offset_dim must be 1 or 2");
        if (n_offsets < 2 || !(t_max > 0))
            throw invalid_parameter_error("Sinogram: offsets must be a nonempty grid");
        if (static_cast<long>(values.size()) !=
            static_cast<long>(dirs.directions.size()) * offsets_per_direction())
            throw invalid_parameter_error("Sinogram: value count mismatch");
        for (double v : values)
            if (!std::isfinite(v)) throw invalid_parameter_error("Sinogram: values must be finite");
    }

    double* row(std::size_t dir) { return values.data() + dir * offsets_per_direction(); }
    const double* row(std::size_t dir) const { return values.data() + dir * offsets_per_direction(); }
};

struct MixedNorm {
    double q;  // direction exponent
    double r;  // offset exponent
    void validate() const {
        if (!(q >= 1) || !(r >= 1)) throw invalid_exponent_error("MixedNorm: exponents must be >= 1");
    }
};

// Offsets-inner, directions-outer with quadrature weights.
inline double mixed_norm(const Sinogram& g, MixedNorm e) {
    g.validate();
    e.validate();
    const double cell = std::pow(g.offset_step(), g.offset_dim);
    const long per = g.offsets_per_direction();
    double outer = 0;
    for (std::size_t k = 0; k < g.dirs.directions.size(); ++k) {
        const double* row = g.row(k);
        double inner = 0;
        if (std::isinf(e.r)) {
            for (long j = 0; j < per; ++j) inner = std::max(inner, std::abs(row[j]));
        } else {
            for (long j = 0; j < per; ++j) inner += std::pow(std::abs(row[j]), e.r) * cell;
            inner = std::pow(inner, 1.0 / e.r);
        }
        if (std::isinf(e.q))
            outer = std::max(outer, inner);
        else
            outer += g.dirs.weights[k] * std::pow(inner, e.q);
    }
    return std::isinf(e.q) ? outer : std::pow(outer, 1.0 / e.q);
}

namespace detail {

inline void require_boundary_decay(const SampledFunction& f, const char* who) {
    const int n = f.spec.n, N = f.spec.samples;
    double sup = lp_norm(f, INFINITY);
    if (sup == 0) return;
    double worst = 0;
    for (long i = 0; i < f.spec.total(); ++i) {
        auto idx = f.spec.unflat(i);
        bool boundary = false;
        for (int k = 0; k < n; ++k)
            if (idx[k] == 0 || idx[k] == N - 1) boundary = true;
        if (boundary) worst = std::max(worst, std::abs(f.values[i]));
    }
    if (worst > 1e-12 * sup)
        throw precondition_error(std::string(who) + ": input does not decay at the box boundary");
}

// Orthonormal frame (u, v) spanning the plane orthogonal to a unit vector.
inline std::pair<Vec, Vec> orthonormal_frame(const Vec& sigma) {
    int least = 0;
    for (int k = 1; k < 3; ++k)
        if (std::abs(sigma[k]) < std::abs(sigma[least])) least = k;
    Vec e{0, 0, 0};
    e[least] = 1.0;
    Vec u{sigma[1] * e[2] - sigma[2] * e[1], sigma[2] * e[0] - sigma[0] * e[2],
          sigma[0] * e[1] - sigma[1] * e[0]};
    u = scaled(u, 1.0 / norm(u, 3));
    Vec v{sigma[1] * u[2] - sigma[2] * u[1], sigma[2] * u[0] - sigma[0] * u[2],
          sigma[0] * u[1] - sigma[1] * u[0]};
    return {u, v};
}

}  // namespace detail

// Hyperplane transform: line integrals for n = 2, plane slices for n = 3.
inline Sinogram radon_forward(const SampledFunction& f, const DirectionSet& dirs, int n_offsets) {
    f.validate();
    dirs.validate();
    const int n = f.spec.n;
    if (n != 2 && n != 3)
        throw invalid_parameter_error("radon_forward: dimension must be 2 or 3");
    if (dirs.n != n) throw invalid_parameter_error("radon_forward: direction set dimension mismatch");
    detail::require_boundary_decay(f, "radon_forward");
    Sinogram g;
    g.dirs = dirs;
    g.offset_dim = 1;
    g.n_offsets = n_offsets;
    g.t_max = f.spec.extent * std::sqrt(static_cast<double>(n));
    g.values.assign(dirs.directions.size() * n_offsets, 0.0);
    const double span = g.t_max;
    parallel_for(static_cast<long>(dirs.directions.size()), [&](long k) {
        const Vec& sigma = dirs.directions[k];
        double* row = g.row(k);
        if (n == 2) {
            Vec line_dir{-sigma[1], sigma[0], 0};
            for (int j = 0; j < n_offsets; ++j)
                row[j] = line_integral(f, line_dir, scaled(sigma, g.offset(j)), span);
        } else {
            for (int j = 0; j < n_offsets; ++j) row[j] = plane_integral(f, sigma, g.offset(j), span);
        }
    });
    return g;
}

// Line transform in R^3 over a 2D offset grid per direction.
inline Sinogram xray_forward(const SampledFunction& f, const DirectionSet& dirs, int n_offsets) {
    f.validate();
    dirs.validate();
    if (f.spec.n != 3) throw invalid_parameter_error("xray_forward: requires n = 3");
    if (dirs.n != 3) throw invalid_parameter_error("xray_forward: direction set dimension mismatch");
    detail::require_boundary_decay(f, "xray_forward");
    Sinogram g;
    g.dirs = dirs;
    g.offset_dim = 2;
    g.n_offsets = n_offsets;
    g.t_max = f.spec.extent * std::sqrt(3.0);
    g.values.assign(dirs.directions.size() * g.offsets_per_direction(), 0.0);
    parallel_for(static_cast<long>(dirs.directions.size()), [&](long k) {
        const Vec& sigma = dirs.directions[k];
        auto [u, v] = detail::orthonormal_frame(sigma);
        double* row = g.row(k);
        for (int a = 0; a < n_offsets; ++a) {
            Vec base = scaled(u, g.offset(a));
            for (int b = 0; b < n_offsets; ++b) {
                Vec p = plus(base, scaled(v, g.offset(b)));
                row[a * n_offsets + b] = line_integral(f, sigma, p, g.t_max);
            }
        }
    });
    return g;
}

// Backprojection: the weighted direction sum of g(sigma, <sigma, x>) with
// linear interpolation in the offset.
inline SampledFunction adjoint(const Sinogram& g, const GridSpec& out_spec) {
    g.validate();
    if (g.offset_dim != 1) throw invalid_parameter_error("adjoint: hyperplane sinograms only");
    if (out_spec.n != g.dirs.n) throw invalid_parameter_error("adjoint: dimension mismatch");
    SampledFunction out(out_spec);
    const double ht = g.offset_step();
    parallel_for(out_spec.total(), [&](long i) {
        Vec x = out_spec.point(i);
        double acc = 0;
        for (std::size_t k = 0; k < g.dirs.directions.size(); ++k) {
            double t = dot(g.dirs.directions[k], x, out_spec.n);
            double pos = (t + g.t_max) / ht;
            long j = static_cast<long>(std::floor(pos));
            double fr = pos - j;
            const double* row = g.row(k);
            double v = 0;
            if (j >= 0 && j < g.n_offsets - 1)
                v = row[j] * (1 - fr) + row[j + 1] * fr;
            else if (j == -1)
                v = row[0] * fr;
            else if (j == g.n_offsets - 1)
                v = row[j] * (1 - fr);
            acc += g.dirs.weights[k] * v;
        }
        out.values[i] = acc;
    });
    return out;
}

// ---------------------------------------------------------------------------
// Riesz potentials as Fourier multipliers |xi|^{-gamma} with the zero mode
// projected out. For Re(gamma) > 0 the input must be numerically mean-free.
// ---------------------------------------------------------------------------

inline Spectrum spectrum_riesz(Spectrum s, std::complex<double> gamma) {
    for (long i = 0; i < s.spec.total(); ++i) {
        if (i == 0) {
            s.coeffs[0] = 0.0;
            continue;
        }
        Vec xi = s.freq_vec(i);
        double r = norm(xi, s.spec.n);
        s.coeffs[i] *= std::exp(-gamma * std::log(r));
    }
    return s;
}

inline SampledFunction riesz_potential(const SampledFunction& f, std::complex<double> gamma) {
    f.validate();
    Spectrum s = dft(f);
    if (gamma.real() > 0) {
        double mass = std::abs(s.coeffs[0].real());
        double l1 = lp_norm(f, 1.0);
        if (l1 > 0 && mass > 1e-8 * l1)
            throw mean_not_zero_error("riesz_potential: mean must vanish for positive order");
    }
    return idft(spectrum_riesz(std::move(s), gamma));
}

// Inversion constant 2^{-n+1} pi^{-n/2+1} / Gamma(n/2).
inline double inversion_constant(int n) {
    return std::pow(2.0, 1 - n) * std::pow(M_PI, 1.0 - n / 2.0) / std::tgamma(n / 2.0);
}

// Total mass of the sampled field recovered from the sinogram: every
// direction sees the full integral, so average the per-direction masses.
inline double sinogram_mass(const Sinogram& g) {
    const double cell = std::pow(g.offset_step(), g.offset_dim);
    double acc = 0, wsum = 0;
    for (std::size_t k = 0; k < g.dirs.directions.size(); ++k) {
        const double* row = g.row(k);
        double m = 0;
        for (long j = 0; j < g.offsets_per_direction(); ++j) m += row[j];
        acc += g.dirs.weights[k] * m * cell;
        wsum += g.dirs.weights[k];
    }
    return acc / wsum;
}

// Filtered backprojection realized as the Riesz potential of the adjoint.
// The adjoint field decays slowly, so it is evaluated on a doubled box
// (exact: the true sinogram vanishes beyond |t| > t_max) before the
// multiplier is applied; the zero mode lost to the multiplier is restored
// from the sinogram mass.
inline SampledFunction invert(const Sinogram& g, const GridSpec& out_spec) {
    g.validate();
    if (g.offset_dim != 1) throw invalid_parameter_error("invert: hyperplane sinograms only");
    const int n = out_spec.n;
    if (n != g.dirs.n) throw resolution_mismatch_error("invert: dimension mismatch");
    if (g.t_max + 1e-9 < out_spec.extent * std::sqrt(static_cast<double>(n)))
        throw resolution_mismatch_error("invert: sinogram offsets do not cover the box");
    if (g.offset_step() > 2.01 * out_spec.step())
        throw resolution_mismatch_error("invert: offset grid is coarser than the target grid");
    GridSpec pad(n, 2 * out_spec.samples, 2 * out_spec.extent);
    SampledFunction back = adjoint(g, pad);
    SampledFunction filtered = riesz_potential(back, -(n - 1.0));
    const double c = inversion_constant(n);
    const double dc = sinogram_mass(g) / std::pow(2 * pad.extent, n) / c;
    SampledFunction out(out_spec);
    const int off = out_spec.samples / 2;  // pad grid shares the step; recenter
    for (long i = 0; i < out_spec.total(); ++i) {
        auto idx = out_spec.unflat(i);
        std::array<int, 3> pidx{0, 0, 0};
        for (int k = 0; k < n; ++k) pidx[k] = idx[k] + off;
        out.values[i] = c * (filtered.at(pidx) + dc);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Fourier-slice consistency: the 1D transform of each sinogram row against
// the restriction of the full spectrum to the direction's ray.
// ---------------------------------------------------------------------------

inline double projection_slice_check(const SampledFunction& f, const DirectionSet& dirs,
                                     int n_offsets = 0) {
    if (f.spec.n != 2) throw invalid_parameter_error("projection_slice_check: n = 2 only");
    if (n_offsets == 0) n_offsets = 2 * f.spec.samples;
    Sinogram g = radon_forward(f, dirs, n_offsets);
    // Zero-pad the field 4x before transforming: exact for decaying inputs
    // and it refines the dual lattice enough for bilinear ray restriction.
    GridSpec pspec(2, 4 * f.spec.samples, 4 * f.spec.extent);
    SampledFunction padded(pspec);
    const int shift = (pspec.samples - f.spec.samples) / 2;
    for (long i = 0; i < f.spec.total(); ++i) {
        auto idx = f.spec.unflat(i);
        padded.at({idx[0] + shift, idx[1] + shift, 0}) = f.values[i];
    }
    Spectrum full = dft(padded);
    const double band = 0.4 * M_PI / f.spec.step();
    double worst = 0;
    GridSpec row_spec(1, n_offsets, g.t_max);
    for (std::size_t k = 0; k < dirs.directions.size(); ++k) {
        SampledFunction row(row_spec);
        for (int j = 0; j < n_offsets; ++j) row.values[j] = g.row(k)[j];
        Spectrum rs = dft(row);
        double num = 0, den = 0;
        for (int j = 0; j < n_offsets; ++j) {
            double s = rs.freq(j);
            if (std::abs(s) > band) continue;
            std::complex<double> lhs = rs.coeffs[j];
            std::complex<double> rhs = full.interpolate(scaled(dirs.directions[k], s));
            num += std::norm(lhs - rhs);
            den += std::norm(rhs);
        }
        if (den > 0) worst = std::max(worst, std::sqrt(num / den));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Support probe: if the sinogram vanishes for |t| > R then the reconstruction
// must be small outside B(0, R + margin).
// ---------------------------------------------------------------------------

struct SupportVerdict {
    bool inside = true;
    Vec witness{0, 0, 0};
    double outside_peak = 0;
    double overall_peak = 0;
};

inline SupportVerdict support_predicate(const Sinogram& g, const GridSpec& out_spec, double R,
                                        double margin, double tol = 0.05) {
    if (margin < 3 * out_spec.step())
        throw invalid_parameter_error("support_predicate: margin must be at least 3 cells");
    SampledFunction rec = invert(g, out_spec);
    SupportVerdict v;
    v.overall_peak = lp_norm(rec, INFINITY);
    for (long i = 0; i < out_spec.total(); ++i) {
        Vec x = out_spec.point(i);
        if (norm(x, out_spec.n) <= R + margin) continue;
        double a = std::abs(rec.values[i]);
        if (a > v.outside_peak) {
            v.outside_peak = a;
            v.witness = x;
        }
    }
    v.inside = v.outside_peak <= tol * v.overall_peak;
    return v;
}

// ---------------------------------------------------------------------------
// Admissible exponent triple for ||Rf||_{q,r} <= C ||f||_p:
// p strictly below n/(n-1), q at most the conjugate of p, and the scaling
// relation n - 1 + 1/r = n/p.
// ---------------------------------------------------------------------------

inline bool exponent_admissible(double p, double q, double r, int n) {
    auto inv = [](double x) { return std::isinf(x) ? 0.0 : 1.0 / x; };
    if (!(p >= 1) || !(q >= 1) || !(r >= 1)) return false;
    if (!(p < static_cast<double>(n) / (n - 1))) return false;
    double pconj = p == 1.0 ? INFINITY : p / (p - 1.0);
    if (inv(q) + 1e-12 < inv(pconj)) return false;  // q <= p' via reciprocals
    double want = n * inv(p) - n + 1;               // = 1/r
    return std::abs(inv(r) - want) <= 1e-12;
}

// ---------------------------------------------------------------------------
// Scaling probe: fit the growth exponent of ||R chi_R||_{q,r} over dilated
// indicators by least squares in log-log coordinates.
// ---------------------------------------------------------------------------

enum class ProbeShape { ball, cylinder };

struct ScalingFit {
    double slope = 0;
    std::vector<double> radii;
    std::vector<double> norms;
};

inline ScalingFit scaling_probe(ProbeShape shape, MixedNorm e, const std::vector<double>& radii,
                                const GridSpec& spec, const DirectionSet& dirs, int n_offsets) {
    e.validate();
    if (radii.size() < 4) throw invalid_parameter_error("scaling_probe: need at least 4 radii");
    for (double R : radii)
        if (!(R > 0) || R >= spec.extent)
            throw invalid_parameter_error("scaling_probe: radii must sit inside the box");
    ScalingFit fit;
    for (double R : radii) {
        // The cylinder regime wants cross sections wider than the slab, so
        // the near-axis directions carry the R^{n-1} face integrals.
        SampledFunction f = shape == ProbeShape::ball
                                ? phantoms::ball(spec, R)
                                : phantoms::cylinder(spec, R, 0.08 * spec.extent);
        Sinogram g = radon_forward(f, dirs, n_offsets);
        fit.radii.push_back(R);
        fit.norms.push_back(mixed_norm(g, e));
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(fit.radii.size());
    for (std::size_t i = 0; i < fit.radii.size(); ++i) {
        double x = std::log(fit.radii[i]), y = std::log(fit.norms[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    fit.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return fit;
}

}  // namespace harmonica
