#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "bscat/iq.hpp"
#include "bscat/modems/lora.hpp"

namespace bscat {

// 2.4 GHz direct-sequence table: 16 symbols of 32 chips. Successive even
// symbols are 4-chip right rotations of symbol 0; symbols 8..15 repeat the
// pattern with odd-indexed chips inverted.
inline const std::array<std::uint32_t, 16>& zigbee_chip_table() {
    static const std::array<std::uint32_t, 16> table = [] {
        std::array<std::uint32_t, 16> t{};
        const char* base = "11011001110000110101001000101110";
        std::array<std::uint8_t, 32> chips{};
        for (int i = 0; i < 32; ++i) chips[i] = base[i] == '1';
        for (int k = 0; k < 8; ++k) {
            std::uint32_t w = 0;
            for (int i = 0; i < 32; ++i) {
                int src = ((i - 4 * k) % 32 + 32) % 32;
                w = (w << 1) | chips[src];
            }
            t[k] = w;
            std::uint32_t flip = 0;
            for (int i = 0; i < 32; ++i) flip = (flip << 1) | (((w >> (31 - i)) & 1u) ^ (i & 1u));
            t[k + 8] = flip;
        }
        return t;
    }();
    return table;
}

inline double zigbee_chip(int symbol, int index) {
    return ((zigbee_chip_table()[static_cast<std::size_t>(symbol)] >> (31 - index)) & 1u) ? 1.0 : -1.0;
}

// Offset-quadrature spreading: even chips on I, odd chips on Q delayed by
// one chip, half-sine pulses spanning two chip periods. The stream ends one
// chip period after the last symbol so the final Q pulse completes.
inline IQStream zigbee_modulate(const std::vector<std::uint8_t>& bits, double chip_rate, double fs) {
    if (bits.size() % 4 != 0) throw std::invalid_argument("zigbee_modulate: bit count must be a multiple of 4");
    auto osr = detail::integer_oversampling(fs, chip_rate, "zigbee_modulate");
    const std::size_t n_sym = bits.size() / 4;
    const std::size_t n_samples = (n_sym * 32 + 1) * osr;

    std::vector<double> ii(n_samples, 0.0), qq(n_samples, 0.0);
    for (std::size_t s = 0; s < n_sym; ++s) {
        int sym = (bits[4 * s] << 3) | (bits[4 * s + 1] << 2) | (bits[4 * s + 2] << 1) | bits[4 * s + 3];
        for (int c = 0; c < 32; ++c) {
            double a = zigbee_chip(sym, c);
            std::size_t start = (s * 32 + static_cast<std::size_t>(c)) * osr;
            auto& rail = (c % 2 == 0) ? ii : qq;
            for (std::size_t k = 0; k < 2 * osr; ++k) {
                std::size_t n = start + k;
                if (n < n_samples) rail[n] += a * std::sin(kPi * static_cast<double>(k) / (2.0 * static_cast<double>(osr)));
            }
        }
    }
    IQStream out;
    out.sample_rate = fs;
    out.samples.resize(n_samples);
    for (std::size_t n = 0; n < n_samples; ++n) out.samples[n] = {ii[n], qq[n]};
    return out;
}

// Chip-center sampling then maximum correlation against the 16 sequences.
inline std::vector<std::uint8_t> zigbee_demodulate(const IQStream& rx, double chip_rate) {
    auto osr = detail::integer_oversampling(rx.sample_rate, chip_rate, "zigbee_demodulate");
    if (rx.size() < osr || (rx.size() - osr) % (32 * osr) != 0)
        throw std::invalid_argument("zigbee_demodulate: stream is not a whole number of symbols");
    const std::size_t n_sym = (rx.size() - osr) / (32 * osr);

    std::vector<std::uint8_t> bits;
    bits.reserve(n_sym * 4);
    for (std::size_t s = 0; s < n_sym; ++s) {
        double soft[32];
        for (int c = 0; c < 32; ++c) {
            std::size_t center = (s * 32 + static_cast<std::size_t>(c) + 1) * osr;
            Complex v = rx.samples[center];
            soft[c] = (c % 2 == 0) ? v.real() : v.imag();
        }
        double best = -1e300;
        int best_sym = 0;
        for (int sym = 0; sym < 16; ++sym) {
            double score = 0.0;
            for (int c = 0; c < 32; ++c) score += soft[c] * zigbee_chip(sym, c);
            if (score > best) {
                best = score;
                best_sym = sym;
            }
        }
        bits.push_back((best_sym >> 3) & 1);
        bits.push_back((best_sym >> 2) & 1);
        bits.push_back((best_sym >> 1) & 1);
        bits.push_back(best_sym & 1);
    }
    return bits;
}

}  // namespace bscat
