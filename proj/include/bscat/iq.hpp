#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace bscat {

using Complex = std::complex<double>;

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kTwoPi = 2.0 * kPi;

// Complex baseband sample stream. Samples are unitless amplitudes; power in
// "mW" by the convention that a unit-amplitude tone carries 1 mW (0 dBm).
struct IQStream {
    std::vector<Complex> samples;
    double sample_rate = 0.0;

    IQStream() = default;
    IQStream(std::vector<Complex> s, double fs) : samples(std::move(s)), sample_rate(fs) {}

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
    double duration() const { return sample_rate > 0.0 ? static_cast<double>(samples.size()) / sample_rate : 0.0; }
};

inline double mean_power(const IQStream& s) {
    if (s.empty()) return 0.0;
    double acc = 0.0;
    for (const auto& x : s.samples) acc += std::norm(x);
    return acc / static_cast<double>(s.size());
}

// Oscillator sample with the phase argument reduced before evaluation, so long
// streams do not lose precision to huge angles.
inline Complex tone_sample(double freq, std::size_t n, double fs) {
    double cycles = freq * static_cast<double>(n) / fs;
    double frac = cycles - std::floor(cycles);
    return std::polar(1.0, kTwoPi * frac);
}

inline IQStream make_tone(double freq, double duration, double fs, double amplitude = 1.0) {
    if (fs <= 0.0) throw std::invalid_argument("make_tone: sample rate must be positive");
    auto n = static_cast<std::size_t>(duration * fs + 0.5);
    IQStream out;
    out.sample_rate = fs;
    out.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.samples[i] = amplitude * tone_sample(freq, i, fs);
    return out;
}

}  // namespace bscat
