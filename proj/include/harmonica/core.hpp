#pragma once

#include <array>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace harmonica {

// ---------------------------------------------------------------------------
// Error taxonomy. Every precondition violation throws a typed error so the
// CLI can map failures onto its exit-code contract.
// ---------------------------------------------------------------------------

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct invalid_direction_error : error { using error::error; };
struct invalid_exponent_error : error { using error::error; };
struct invalid_parameter_error : error { using error::error; };
struct needs_wider_window_error : error { using error::error; };
struct needs_larger_box_error : error { using error::error; };
struct mean_not_zero_error : error { using error::error; };
struct resolution_mismatch_error : error { using error::error; };
struct invalid_kernel_error : error { using error::error; };
struct precondition_error : error { using error::error; };
struct io_error : error { using error::error; };

// ---------------------------------------------------------------------------
// Small geometry helpers. Points live in an ambient dimension n <= 3; unused
// coordinates are kept at zero so the same array type serves all dimensions.
// ---------------------------------------------------------------------------

using Vec = std::array<double, 3>;

inline double dot(const Vec& a, const Vec& b, int n) {
    double s = 0;
    for (int k = 0; k < n; ++k) s += a[k] * b[k];
    return s;
}

inline double norm(const Vec& a, int n) { return std::sqrt(dot(a, a, n)); }

inline Vec scaled(const Vec& a, double c) { return {a[0] * c, a[1] * c, a[2] * c}; }

inline Vec plus(const Vec& a, const Vec& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }

inline Vec minus(const Vec& a, const Vec& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

inline void require_unit(const Vec& v, int n, const char* who) {
    if (std::abs(norm(v, n) - 1.0) > 1e-12)
        throw invalid_direction_error(std::string(who) + ": direction must be a unit vector");
}

// Volume of the unit ball in dimension n (n <= 3).
inline double unit_ball_volume(int n) {
    switch (n) {
        case 1: return 2.0;
        case 2: return M_PI;
        case 3: return 4.0 * M_PI / 3.0;
    }
    throw invalid_parameter_error("unit_ball_volume: dimension must be 1, 2 or 3");
}

// ---------------------------------------------------------------------------
// Deterministic worker pool. HARMONICA_THREADS caps the worker count; results
// are written to disjoint indices so the outcome does not depend on the split.
// ---------------------------------------------------------------------------

inline int worker_count() {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw < 1) hw = 1;
    if (const char* env = std::getenv("HARMONICA_THREADS")) {
        int cap = std::atoi(env);
        if (cap >= 1 && cap < hw) hw = cap;
    }
    return hw;
}

template <class Fn>
void parallel_for(long count, Fn&& fn) {
    int workers = worker_count();
    if (workers <= 1 || count < 64) {
        for (long i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    long chunk = (count + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        long lo = w * chunk, hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (long i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace harmonica
