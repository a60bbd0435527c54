#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bscat/fft.hpp"
#include "bscat/iq.hpp"

namespace bscat {

enum class Constellation { Qpsk, Qam16 };

inline int bits_per_subcarrier(Constellation c) { return c == Constellation::Qpsk ? 2 : 4; }

inline const char* constellation_name(Constellation c) { return c == Constellation::Qpsk ? "qpsk" : "qam16"; }

inline Constellation constellation_from_name(const std::string& s) {
    if (s == "qpsk") return Constellation::Qpsk;
    if (s == "qam16") return Constellation::Qam16;
    throw std::invalid_argument("unknown constellation: " + s);
}

// 64-point multicarrier numerology: 48 data subcarriers at offsets
// -26..26 excluding DC and the four pilot slots, 16-sample cyclic prefix.
struct OfdmParams {
    int n_fft = 64;
    int n_data = 48;
    int cp_len = 16;
    Constellation constellation = Constellation::Qpsk;
    double sample_rate = 20e6;
};

namespace detail {

inline const std::vector<int>& ofdm_data_bins(const OfdmParams& p) {
    if (p.n_fft != 64 || p.n_data != 48 || p.cp_len != 16)
        throw std::invalid_argument("ofdm_data_bins: only the 64/48/16 numerology is supported");
    static const std::vector<int> bins = [] {
        std::vector<int> b;
        for (int k = -26; k <= 26; ++k) {
            if (k == 0 || k == 7 || k == -7 || k == 21 || k == -21) continue;
            b.push_back(k);
        }
        return b;
    }();
    return bins;
}

inline double gray_level(std::uint8_t b0, std::uint8_t b1) {
    // 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3
    return b0 ? (b1 ? 1.0 : 3.0) : (b1 ? -1.0 : -3.0);
}

inline void gray_bits(double level, std::uint8_t& b0, std::uint8_t& b1) {
    b0 = level > 0.0;
    b1 = std::abs(level) < 2.0;
}

inline Complex map_subcarrier(Constellation c, const std::uint8_t* bits) {
    if (c == Constellation::Qpsk) {
        const double s = 1.0 / std::sqrt(2.0);
        return {bits[0] ? s : -s, bits[1] ? s : -s};
    }
    const double s = 1.0 / std::sqrt(10.0);
    return {gray_level(bits[0], bits[1]) * s, gray_level(bits[2], bits[3]) * s};
}

inline void slice_subcarrier(Constellation c, Complex y, std::uint8_t* bits) {
    if (c == Constellation::Qpsk) {
        bits[0] = y.real() > 0.0;
        bits[1] = y.imag() > 0.0;
        return;
    }
    const double s = std::sqrt(10.0);
    double i = std::clamp(std::round((y.real() * s + 3.0) / 2.0) * 2.0 - 3.0, -3.0, 3.0);
    double q = std::clamp(std::round((y.imag() * s + 3.0) / 2.0) * 2.0 - 3.0, -3.0, 3.0);
    gray_bits(i, bits[0], bits[1]);
    gray_bits(q, bits[2], bits[3]);
}

inline double constellation_peak(Constellation c) {
    return c == Constellation::Qpsk ? 1.0 : 3.0 * std::sqrt(2.0) / std::sqrt(10.0);
}

}  // namespace detail

// Inverse-transform symbols with cyclic prefix. A fixed gain keeps the peak
// envelope at or below one for any payload.
inline IQStream wifi_ofdm_modulate(const std::vector<std::uint8_t>& bits, const OfdmParams& p) {
    const auto& bins = detail::ofdm_data_bins(p);
    const int bps = bits_per_subcarrier(p.constellation);
    const std::size_t bits_per_symbol = static_cast<std::size_t>(p.n_data) * static_cast<std::size_t>(bps);
    if (bits.empty() || bits.size() % bits_per_symbol != 0)
        throw std::invalid_argument("wifi_ofdm_modulate: bit count must be a whole number of symbols");
    const std::size_t n_sym = bits.size() / bits_per_symbol;
    const double gain = static_cast<double>(p.n_fft) /
                        (static_cast<double>(p.n_data) * detail::constellation_peak(p.constellation));

    IQStream out;
    out.sample_rate = p.sample_rate;
    out.samples.reserve(n_sym * static_cast<std::size_t>(p.n_fft + p.cp_len));
    std::vector<Complex> freq(static_cast<std::size_t>(p.n_fft));
    for (std::size_t s = 0; s < n_sym; ++s) {
        std::fill(freq.begin(), freq.end(), Complex{0.0, 0.0});
        for (std::size_t d = 0; d < bins.size(); ++d) {
            int bin = (bins[d] + p.n_fft) % p.n_fft;
            freq[static_cast<std::size_t>(bin)] =
                gain * detail::map_subcarrier(p.constellation, &bits[s * bits_per_symbol + d * bps]);
        }
        auto time = ifft(freq);
        for (int k = p.n_fft - p.cp_len; k < p.n_fft; ++k) out.samples.push_back(time[static_cast<std::size_t>(k)]);
        for (const auto& x : time) out.samples.push_back(x);
    }
    return out;
}

// Strip prefixes, transform, rescale by the frame's own RMS so hard slicing
// needs no absolute amplitude reference.
inline std::vector<std::uint8_t> wifi_ofdm_demodulate(const IQStream& rx, const OfdmParams& p) {
    const auto& bins = detail::ofdm_data_bins(p);
    const int bps = bits_per_subcarrier(p.constellation);
    const std::size_t sym_len = static_cast<std::size_t>(p.n_fft + p.cp_len);
    if (rx.empty() || rx.size() % sym_len != 0)
        throw std::invalid_argument("wifi_ofdm_demodulate: stream is not a whole number of symbols");
    const std::size_t n_sym = rx.size() / sym_len;

    std::vector<Complex> carriers;
    carriers.reserve(n_sym * bins.size());
    std::vector<Complex> work(static_cast<std::size_t>(p.n_fft));
    for (std::size_t s = 0; s < n_sym; ++s) {
        for (int k = 0; k < p.n_fft; ++k)
            work[static_cast<std::size_t>(k)] = rx.samples[s * sym_len + static_cast<std::size_t>(p.cp_len + k)];
        fft_in_place(work);
        for (int bin : bins) carriers.push_back(work[static_cast<std::size_t>((bin + p.n_fft) % p.n_fft)] /
                                                static_cast<double>(p.n_fft));
    }

    double rms = 0.0;
    for (const auto& y : carriers) rms += std::norm(y);
    rms = std::sqrt(rms / static_cast<double>(carriers.size()));
    if (!(rms > 0.0)) throw std::runtime_error("wifi_ofdm_demodulate: empty spectrum");

    std::vector<std::uint8_t> bits(n_sym * bins.size() * static_cast<std::size_t>(bps));
    for (std::size_t i = 0; i < carriers.size(); ++i)
        detail::slice_subcarrier(p.constellation, carriers[i] / rms, &bits[i * bps]);
    return bits;
}

}  // namespace bscat
