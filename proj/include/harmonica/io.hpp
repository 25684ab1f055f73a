#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hardy.hpp"
#include "radon.hpp"
#include "rearrange.hpp"
#include "symmetrize.hpp"

namespace harmonica::io {

namespace detail {

// All writers go through a temp file renamed on success, so failed runs
// leave no partial outputs behind.
template <class Fn>
void write_atomically(const std::filesystem::path& path, Fn&& fn) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw io_error("cannot open " + tmp.string() + " for writing");
        out.precision(17);
        fn(out);
        if (!out) throw io_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path.string());
    return in;
}

}  // namespace detail

// Grid file: header "GRID n N L", then N^n whitespace-separated values in
// row-major order.
inline void write_grid(const std::filesystem::path& path, const SampledFunction& f) {
    f.validate();
    detail::write_atomically(path, [&](std::ostream& out) {
        out << "GRID " << f.spec.n << ' ' << f.spec.samples << ' ' << f.spec.extent << '\n';
        for (long i = 0; i < f.spec.total(); ++i) {
            out << f.values[i];
            out << (((i + 1) % f.spec.samples == 0) ? '\n' : ' ');
        }
    });
}

inline SampledFunction read_grid(const std::filesystem::path& path) {
    auto in = detail::open_input(path);
    std::string tag;
    int n, N;
    double L;
    if (!(in >> tag >> n >> N >> L) || tag != "GRID")
        throw io_error("not a grid file: " + path.string());
    SampledFunction f{GridSpec(n, N, L)};
    for (long i = 0; i < f.spec.total(); ++i)
        if (!(in >> f.values[i])) throw io_error("truncated grid file: " + path.string());
    f.validate();
    return f;
}

// Mask file: header "MASK n N L", then 0/1 cells.
inline void write_mask(const std::filesystem::path& path, const VoxelSet& s) {
    s.validate();
    detail::write_atomically(path, [&](std::ostream& out) {
        out << "MASK " << s.spec.n << ' ' << s.spec.samples << ' ' << s.spec.extent << '\n';
        for (long i = 0; i < s.spec.total(); ++i) {
            out << int(s.mask[i] ? 1 : 0);
            out << (((i + 1) % s.spec.samples == 0) ? '\n' : ' ');
        }
    });
}

inline VoxelSet read_mask(const std::filesystem::path& path) {
    auto in = detail::open_input(path);
    std::string tag;
    int n, N;
    double L;
    if (!(in >> tag >> n >> N >> L) || tag != "MASK")
        throw io_error("not a mask file: " + path.string());
    VoxelSet s{GridSpec(n, N, L)};
    for (long i = 0; i < s.spec.total(); ++i) {
        int v;
        if (!(in >> v)) throw io_error("truncated mask file: " + path.string());
        s.mask[i] = v ? 1 : 0;
    }
    return s;
}

// Sinogram file: header "SINO n D T odim tmax" (the trailing fields extend
// the basic "SINO n D T" form), then one line per direction with the unit
// vector and weight, then row-major values.
inline void write_sinogram(const std::filesystem::path& path, const Sinogram& g) {
    g.validate();
    detail::write_atomically(path, [&](std::ostream& out) {
        out << "SINO " << g.dirs.n << ' ' << g.dirs.directions.size() << ' ' << g.n_offsets << ' '
            << g.offset_dim << ' ' << g.t_max << '\n';
        for (std::size_t k = 0; k < g.dirs.directions.size(); ++k) {
            for (int a = 0; a < g.dirs.n; ++a) out << g.dirs.directions[k][a] << ' ';
            out << g.dirs.weights[k] << '\n';
        }
        long per = g.offsets_per_direction();
        for (std::size_t k = 0; k < g.dirs.directions.size(); ++k) {
            const double* row = g.row(k);
            for (long j = 0; j < per; ++j) out << row[j] << (j + 1 == per ? '\n' : ' ');
        }
    });
}

inline Sinogram read_sinogram(const std::filesystem::path& path) {
    auto in = detail::open_input(path);
    std::string tag;
    int n, D, T, odim = 1;
    double tmax;
    if (!(in >> tag >> n >> D >> T >> odim >> tmax) || tag != "SINO")
        throw io_error("not a sinogram file: " + path.string());
    Sinogram g;
    g.dirs.n = n;
    g.offset_dim = odim;
    g.n_offsets = T;
    g.t_max = tmax;
    for (int k = 0; k < D; ++k) {
        Vec v{0, 0, 0};
        double w;
        for (int a = 0; a < n; ++a)
            if (!(in >> v[a])) throw io_error("truncated sinogram file");
        if (!(in >> w)) throw io_error("truncated sinogram file");
        g.dirs.directions.push_back(v);
        g.dirs.weights.push_back(w);
    }
    g.values.resize(static_cast<std::size_t>(D) * g.offsets_per_direction());
    for (auto& v : g.values)
        if (!(in >> v)) throw io_error("truncated sinogram file");
    g.validate();
    return g;
}

// Profile dump: one "value measure" line per step.
inline void write_profile(const std::filesystem::path& path, const DecreasingProfile& p) {
    detail::write_atomically(path, [&](std::ostream& out) {
        for (const auto& s : p.steps) out << s.value << ' ' << s.measure << '\n';
    });
}

// 8-bit binary PGM of a 2D field (n = 3 exports the middle slice along the
// leading axis). Values are min-max normalized.
inline void write_pgm(const std::filesystem::path& path, const SampledFunction& f) {
    const int n = f.spec.n, N = f.spec.samples;
    if (n == 1) throw io_error("write_pgm: needs a 2D or 3D field");
    double lo = f.values[0], hi = f.values[0];
    for (double v : f.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;
    detail::write_atomically(path, [&](std::ostream& out) {
        out << "P5\n" << N << ' ' << N << "\n255\n";
        for (int i = 0; i < N; ++i) {
            for (int j = 0; j < N; ++j) {
                std::array<int, 3> idx{0, 0, 0};
                if (n == 2) {
                    idx = {i, j, 0};
                } else {
                    idx = {N / 2, i, j};
                }
                auto b = static_cast<unsigned char>(
                    std::lround((f.values[f.spec.flat(idx)] - lo) * scale));
                out.put(static_cast<char>(b));
            }
        }
    });
}

inline void write_pgm(const std::filesystem::path& path, const Sinogram& g) {
    if (g.offset_dim != 1) throw io_error("write_pgm: hyperplane sinograms only");
    double lo = g.values[0], hi = g.values[0];
    for (double v : g.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;
    detail::write_atomically(path, [&](std::ostream& out) {
        out << "P5\n" << g.n_offsets << ' ' << g.dirs.directions.size() << "\n255\n";
        for (std::size_t k = 0; k < g.dirs.directions.size(); ++k)
            for (int j = 0; j < g.n_offsets; ++j)
                out.put(static_cast<char>(static_cast<unsigned char>(
                    std::lround((g.row(k)[j] - lo) * scale))));
    });
}

// PGM rendering of a 2D mask.
inline void write_pgm(const std::filesystem::path& path, const VoxelSet& s) {
    if (s.spec.n != 2) throw io_error("write_pgm: 2D masks only");
    const int N = s.spec.samples;
    detail::write_atomically(path, [&](std::ostream& out) {
        out << "P5\n" << N << ' ' << N << "\n255\n";
        for (long i = 0; i < s.spec.total(); ++i)
            out.put(static_cast<char>(s.mask[i] ? 255 : 0));
    });
}

// Cube list CSV: level, anchor coordinates, average.
inline void write_cubes(const std::filesystem::path& path, const std::vector<CzCube>& cubes,
                        int n) {
    detail::write_atomically(path, [&](std::ostream& out) {
        out << "m";
        for (int k = 0; k < n; ++k) out << ",v" << k + 1;
        out << ",avg\n";
        for (const auto& c : cubes) {
            out << c.cube.level;
            for (int k = 0; k < n; ++k) out << ',' << c.cube.anchor[k];
            out << ',' << c.average << '\n';
        }
    });
}

// Atom manifest CSV plus one grid file per atom next to it.
inline void write_atoms(const std::filesystem::path& manifest, const AtomicDecomposition& dec,
                        int n) {
    auto dir = manifest.parent_path();
    detail::write_atomically(manifest, [&](std::ostream& out) {
        out << "lambda";
        for (int k = 0; k < n; ++k) out << ",c" << k + 1;
        out << ",radius,m,file\n";
        for (std::size_t i = 0; i < dec.terms.size(); ++i) {
            const auto& t = dec.terms[i];
            out << t.coefficient;
            for (int k = 0; k < n; ++k) out << ',' << t.support.center[k];
            out << ',' << t.support.radius << ',' << t.level << ",atom_" << i << ".grid\n";
        }
    });
    for (std::size_t i = 0; i < dec.terms.size(); ++i)
        write_grid(dir / ("atom_" + std::to_string(i) + ".grid"), dec.terms[i].atom);
}

}  // namespace harmonica::io
