#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "bscat/iq.hpp"
#include "bscat/modems/lora.hpp"

namespace bscat {

namespace detail {

// Rectangular bit pulse convolved with the Gaussian that gives the wanted
// bandwidth-time product, sampled at osr points per bit. Sums to osr so one
// isolated bit accrues exactly pi * h of phase.
inline std::vector<double> gaussian_freq_pulse(double bt, std::size_t osr) {
    const double sigma = std::sqrt(std::log(2.0)) / (kTwoPi * bt);
    const int half = static_cast<int>(2 * osr);
    std::vector<double> g;
    double sum = 0.0;
    for (int n = -half; n <= half; ++n) {
        double t = static_cast<double>(n) / static_cast<double>(osr);
        double v = std::exp(-t * t / (2.0 * sigma * sigma));
        g.push_back(v);
        sum += v;
    }
    for (auto& v : g) v /= sum;

    std::vector<double> pulse(g.size() + osr - 1, 0.0);
    for (std::size_t i = 0; i < osr; ++i)
        for (std::size_t j = 0; j < g.size(); ++j) pulse[i + j] += g[j];
    return pulse;
}

}  // namespace detail

// Gaussian frequency shift keying: continuous-phase, constant envelope.
// mod_index h sets the per-bit phase advance to +-pi*h/... i.e. a frequency
// deviation of h * bit_rate / 2.
inline IQStream ble_modulate(const std::vector<std::uint8_t>& bits, double bit_rate, double bt, double mod_index,
                             double fs) {
    if (bits.empty()) throw std::invalid_argument("ble_modulate: empty bit stream");
    if (!(bt > 0.0) || !(mod_index > 0.0)) throw std::invalid_argument("ble_modulate: bt and mod_index must be positive");
    auto osr = detail::integer_oversampling(fs, bit_rate, "ble_modulate");
    if (osr < 4) throw std::invalid_argument("ble_modulate: need at least 4 samples per bit");

    auto pulse = detail::gaussian_freq_pulse(bt, osr);
    const std::size_t lead = pulse.size() / 2 > osr / 2 ? pulse.size() / 2 - osr / 2 : 0;
    const std::size_t n_samples = bits.size() * osr + osr;

    std::vector<double> m(n_samples, 0.0);
    for (std::size_t i = 0; i < bits.size(); ++i) {
        double a = bits[i] ? 1.0 : -1.0;
        for (std::size_t j = 0; j < pulse.size(); ++j) {
            std::ptrdiff_t n = static_cast<std::ptrdiff_t>(i * osr + j) - static_cast<std::ptrdiff_t>(lead);
            if (n >= 0 && n < static_cast<std::ptrdiff_t>(n_samples)) m[static_cast<std::size_t>(n)] += a * pulse[j];
        }
    }

    IQStream out;
    out.sample_rate = fs;
    out.samples.resize(n_samples);
    double phase = 0.0;
    const double gain = kPi * mod_index / static_cast<double>(osr);
    for (std::size_t n = 0; n < n_samples; ++n) {
        out.samples[n] = std::polar(1.0, phase);
        phase += gain * m[n];
        if (phase > kPi) phase -= kTwoPi;
        if (phase < -kPi) phase += kTwoPi;
    }
    return out;
}

// Phase-difference discriminator: accumulate per-sample phase increments
// over each bit window and take the sign.
inline std::vector<std::uint8_t> ble_demodulate(const IQStream& rx, double bit_rate) {
    auto osr = detail::integer_oversampling(rx.sample_rate, bit_rate, "ble_demodulate");
    if (rx.size() < 2 * osr) throw std::invalid_argument("ble_demodulate: stream shorter than one bit");
    const std::size_t n_bits = rx.size() / osr - 1;

    std::vector<std::uint8_t> bits(n_bits);
    for (std::size_t i = 0; i < n_bits; ++i) {
        double acc = 0.0;
        for (std::size_t n = i * osr; n < (i + 1) * osr; ++n)
            acc += std::arg(rx.samples[n + 1] * std::conj(rx.samples[n]));
        bits[i] = acc > 0.0 ? 1 : 0;
    }
    return bits;
}

}  // namespace bscat
