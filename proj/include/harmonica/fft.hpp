#pragma once

#include <complex>
#include <vector>

namespace harmonica::detail {

using cplx = std::complex<double>;

inline bool is_pow2(std::size_t n) { return n && !(n & (n - 1)); }

// In-place iterative radix-2 FFT, e^{-2*pi*i*jk/N} convention for sign = -1.
inline void fft_pow2(std::vector<cplx>& a, int sign) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        double ang = sign * 2.0 * M_PI / static_cast<double>(len);
        cplx wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                cplx u = a[i + k], v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

// Direct O(N^2) transform for non power-of-two sizes (desk-scale fallback).
inline void dft_naive(std::vector<cplx>& a, int sign) {
    const std::size_t n = a.size();
    std::vector<cplx> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        cplx s(0, 0);
        for (std::size_t j = 0; j < n; ++j) {
            double ang = sign * 2.0 * M_PI * static_cast<double>(j * k % n) / static_cast<double>(n);
            s += a[j] * cplx(std::cos(ang), std::sin(ang));
        }
        out[k] = s;
    }
    a = std::move(out);
}

// Unnormalized transform: X_k = sum_j x_j e^{sign*2*pi*i*jk/N}.
inline void transform(std::vector<cplx>& a, int sign) {
    if (is_pow2(a.size()))
        fft_pow2(a, sign);
    else
        dft_naive(a, sign);
}

}  // namespace harmonica::detail
