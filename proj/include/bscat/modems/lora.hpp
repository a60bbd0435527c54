#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "bscat/fft.hpp"
#include "bscat/iq.hpp"

namespace bscat {

// Chirp spread spectrum numerology. One symbol sweeps the full bandwidth
// once; the sweep start is offset by the symbol value and wraps at the band
// edge. k = bw^2 / 2^sf is the sweep rate in Hz/s.
struct ChirpParams {
    int sf = 7;
    double bw = 125e3;
    double f0 = -62.5e3;
    double phi0 = 0.0;

    int n_chips() const { return 1 << sf; }
    double symbol_time() const { return static_cast<double>(n_chips()) / bw; }
    double chirp_rate() const { return bw * bw / static_cast<double>(n_chips()); }
};

inline ChirpParams make_chirp_params(int sf, double bw) {
    if (sf < 7 || sf > 12) throw std::invalid_argument("make_chirp_params: spreading factor must be in [7, 12]");
    if (!(bw > 0.0)) throw std::invalid_argument("make_chirp_params: bandwidth must be positive");
    ChirpParams p;
    p.sf = sf;
    p.bw = bw;
    p.f0 = -bw / 2.0;
    p.phi0 = 0.0;
    return p;
}

namespace detail {

inline std::size_t integer_oversampling(double fs, double base_rate, const char* who) {
    double ratio = fs / base_rate;
    auto osr = static_cast<std::size_t>(ratio + 0.5);
    if (osr < 1 || std::abs(ratio - static_cast<double>(osr)) > 1e-9 * ratio)
        throw std::invalid_argument(std::string(who) + ": sample rate must be an integer multiple of the base rate");
    return osr;
}

// Phase of the wrapped chirp at time t into the symbol, relative to the
// symbol start. Continuous across the wrap; the frequency jumps by -bw.
inline double chirp_phase(const ChirpParams& p, int symbol, double t) {
    const double k = p.chirp_rate();
    const double f_start = p.f0 + static_cast<double>(symbol) * p.bw / p.n_chips();
    const double t_wrap = (p.bw - static_cast<double>(symbol) * p.bw / p.n_chips()) / k;
    if (t < t_wrap) return kTwoPi * (f_start * t + 0.5 * k * t * t);
    const double head = kTwoPi * (f_start * t_wrap + 0.5 * k * t_wrap * t_wrap);
    const double u = t - t_wrap;
    return head + kTwoPi * (p.f0 * u + 0.5 * k * u * u);
}

}  // namespace detail

// Constant-envelope chirp train, phase-continuous across symbols.
inline IQStream lora_modulate(const std::vector<int>& symbols, const ChirpParams& p, double fs) {
    auto osr = detail::integer_oversampling(fs, p.bw, "lora_modulate");
    const std::size_t n_sps = static_cast<std::size_t>(p.n_chips()) * osr;
    const double t_sym = p.symbol_time();

    IQStream out;
    out.sample_rate = fs;
    out.samples.reserve(symbols.size() * n_sps);
    double phase_acc = p.phi0;
    for (int s : symbols) {
        if (s < 0 || s >= p.n_chips()) throw std::invalid_argument("lora_modulate: symbol out of range");
        for (std::size_t n = 0; n < n_sps; ++n) {
            double t = static_cast<double>(n) / fs;
            out.samples.push_back(std::polar(1.0, phase_acc + detail::chirp_phase(p, s, t)));
        }
        phase_acc = std::fmod(phase_acc + detail::chirp_phase(p, s, t_sym), kTwoPi);
    }
    return out;
}

// Dechirp against the base sweep and pick the strongest tone. At higher
// sampling rates the pre- and post-wrap parts of one symbol land in two
// bins; their magnitudes are folded before the argmax.
inline std::vector<int> lora_demodulate(const IQStream& rx, const ChirpParams& p) {
    auto osr = detail::integer_oversampling(rx.sample_rate, p.bw, "lora_demodulate");
    const std::size_t n_sps = static_cast<std::size_t>(p.n_chips()) * osr;
    if (rx.size() % n_sps != 0)
        throw std::invalid_argument("lora_demodulate: stream is not a whole number of symbols");
    if (!is_power_of_two(n_sps))
        throw std::invalid_argument("lora_demodulate: oversampling must be a power of two");

    std::vector<Complex> base(n_sps);
    for (std::size_t n = 0; n < n_sps; ++n)
        base[n] = std::polar(1.0, -detail::chirp_phase(p, 0, static_cast<double>(n) / rx.sample_rate));

    const std::size_t n_sym = rx.size() / n_sps;
    const std::size_t fold = static_cast<std::size_t>(p.n_chips()) * (osr - 1);
    std::vector<int> symbols(n_sym);
    std::vector<Complex> work(n_sps);
    for (std::size_t i = 0; i < n_sym; ++i) {
        for (std::size_t n = 0; n < n_sps; ++n) work[n] = rx.samples[i * n_sps + n] * base[n];
        fft_in_place(work);
        double best = -1.0;
        int best_s = 0;
        for (int s = 0; s < p.n_chips(); ++s) {
            double m = std::abs(work[static_cast<std::size_t>(s)]);
            if (osr > 1) m += std::abs(work[(static_cast<std::size_t>(s) + fold) % n_sps]);
            if (m > best) {
                best = m;
                best_s = s;
            }
        }
        symbols[i] = best_s;
    }
    return symbols;
}

}  // namespace bscat
