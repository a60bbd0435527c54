#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "bscat/iq.hpp"
#include "bscat/modems/lora.hpp"

namespace bscat {

inline const std::array<double, 11>& barker11() {
    static const std::array<double, 11> seq = {+1, -1, +1, +1, -1, +1, +1, +1, -1, -1, -1};
    return seq;
}

// Differential BPSK spread by the 11-chip sequence at the full chip rate.
// One extra reference symbol leads the burst to anchor the differential
// phase.
inline IQStream wifi11b_modulate(const std::vector<std::uint8_t>& bits, double chip_rate, int barker_len, double fs) {
    if (barker_len != 11) throw std::invalid_argument("wifi11b_modulate: only the 11-chip sequence is supported");
    auto osr = detail::integer_oversampling(fs, chip_rate, "wifi11b_modulate");

    IQStream out;
    out.sample_rate = fs;
    out.samples.reserve((bits.size() + 1) * 11 * osr);
    double p = 1.0;
    auto emit_symbol = [&](double phase_sign) {
        for (double c : barker11())
            for (std::size_t k = 0; k < osr; ++k) out.samples.push_back({phase_sign * c, 0.0});
    };
    emit_symbol(p);
    for (auto b : bits) {
        if (b) p = -p;
        emit_symbol(p);
    }
    return out;
}

// Despread each symbol against the sequence, then compare the phase of
// consecutive correlation peaks.
inline std::vector<std::uint8_t> wifi11b_demodulate(const IQStream& rx, double chip_rate, int barker_len) {
    if (barker_len != 11) throw std::invalid_argument("wifi11b_demodulate: only the 11-chip sequence is supported");
    auto osr = detail::integer_oversampling(rx.sample_rate, chip_rate, "wifi11b_demodulate");
    const std::size_t n_spsym = 11 * osr;
    if (rx.size() % n_spsym != 0 || rx.size() < 2 * n_spsym)
        throw std::invalid_argument("wifi11b_demodulate: stream is not a whole number of symbols");
    const std::size_t n_sym = rx.size() / n_spsym;

    std::vector<Complex> z(n_sym);
    for (std::size_t s = 0; s < n_sym; ++s) {
        Complex acc{0.0, 0.0};
        for (int c = 0; c < 11; ++c) {
            std::size_t base = s * n_spsym + static_cast<std::size_t>(c) * osr;
            Complex chip{0.0, 0.0};
            for (std::size_t k = 0; k < osr; ++k) chip += rx.samples[base + k];
            acc += chip * barker11()[static_cast<std::size_t>(c)];
        }
        z[s] = acc;
    }
    std::vector<std::uint8_t> bits(n_sym - 1);
    for (std::size_t s = 1; s < n_sym; ++s)
        bits[s - 1] = (z[s] * std::conj(z[s - 1])).real() < 0.0 ? 1 : 0;
    return bits;
}

}  // namespace bscat
