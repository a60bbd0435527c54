#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "bscat/iq.hpp"

namespace bscat {

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 Cooley-Tukey. Forward transform is unnormalized;
// the inverse divides by N.
inline void fft_in_place(std::vector<Complex>& a, bool inverse = false) {
    const std::size_t n = a.size();
    if (!is_power_of_two(n)) throw std::invalid_argument("fft_in_place: length must be a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? kTwoPi : -kTwoPi) / static_cast<double>(len);
        const Complex wl = std::polar(1.0, ang);
        for (std::size_t i = 0; i < n; i += len) {
            Complex w{1.0, 0.0};
            for (std::size_t k = 0; k < len / 2; ++k) {
                Complex u = a[i + k];
                Complex v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse) {
        for (auto& x : a) x /= static_cast<double>(n);
    }
}

inline std::vector<Complex> fft(std::vector<Complex> a) {
    fft_in_place(a, false);
    return a;
}

inline std::vector<Complex> ifft(std::vector<Complex> a) {
    fft_in_place(a, true);
    return a;
}

// Single-bin DFT (arbitrary length), for spectrum probes.
inline Complex dft_bin(const std::vector<Complex>& a, std::size_t k) {
    const std::size_t n = a.size();
    if (n == 0) throw std::invalid_argument("dft_bin: empty input");
    Complex acc{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
        double cycles = static_cast<double>(k) * static_cast<double>(i) / static_cast<double>(n);
        double frac = cycles - std::floor(cycles);
        acc += a[i] * std::polar(1.0, -kTwoPi * frac);
    }
    return acc;
}

}  // namespace bscat
