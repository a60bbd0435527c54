#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "bscat/iq.hpp"

namespace bscat {

constexpr double kSpeedOfLight = 3e8;

// Working-point frequencies: carrier baseband offset, tag modulation rate,
// receiver sampling rate.
struct FrequencyPlan {
    double f_b = 1e6;
    double f_m = 500e3;
    double f_s = 1e6;
};

enum class PlanVerdict { Valid, SpinningConstellation, ConcentricCircles };

inline const char* plan_verdict_name(PlanVerdict v) {
    switch (v) {
        case PlanVerdict::Valid: return "valid";
        case PlanVerdict::SpinningConstellation: return "spinning_constellation";
        case PlanVerdict::ConcentricCircles: return "concentric_circles";
    }
    return "?";
}

// A sampled constellation stays put only when the carrier completes whole
// cycles between samples and the sampler honors the modulation bandwidth:
// f_b >= f_s >= 2 f_m. A carrier slower than the modulation makes the
// symbol groups rotate; a sampler faster than the carrier rings the symbol
// amplitudes into circles. When both diagnostics apply the rotation is the
// modulation-side fault and wins.
inline PlanVerdict check_frequency_plan(const FrequencyPlan& p) {
    if (!(p.f_b > 0.0) || !(p.f_m > 0.0) || !(p.f_s > 0.0))
        throw std::invalid_argument("check_frequency_plan: frequencies must be positive");
    if (p.f_b >= p.f_s && p.f_s >= 2.0 * p.f_m) return PlanVerdict::Valid;
    if (p.f_b < p.f_m) return PlanVerdict::SpinningConstellation;
    if (p.f_s > p.f_b) return PlanVerdict::ConcentricCircles;
    return PlanVerdict::SpinningConstellation;
}

struct ToneSource {
    double f_b = 1e6;
};

// Emulated aggregate frame: one short-training preamble, then back-to-back
// tone subframes, each restarting at phase zero. aggregated = false inserts
// seeded random 10..100 us idle gaps between subframes instead.
struct WifiAmpduSource {
    double stf_duration = 8e-6;
    double subframe_duration = 1.2e-3;
    int n_subframes = 60;
    double tone_offset = 0.0;
    bool aggregated = true;
    std::uint64_t gap_seed = 0;
};

using CarrierSource = std::variant<ToneSource, WifiAmpduSource>;

enum class SegmentKind { Stf, Subframe, Gap, Idle };

inline const char* segment_kind_name(SegmentKind k) {
    switch (k) {
        case SegmentKind::Stf: return "stf";
        case SegmentKind::Subframe: return "subframe";
        case SegmentKind::Gap: return "gap";
        case SegmentKind::Idle: return "idle";
    }
    return "?";
}

struct Segment {
    std::size_t start = 0;
    std::size_t end = 0;
    SegmentKind kind = SegmentKind::Idle;
};

struct CarrierSignal {
    IQStream wave;
    std::vector<Segment> segments;
};

// Fixed pseudorandom unit-modulus short symbol, repeated to fill the
// training field. The waveform only needs a sharp self-correlation.
inline IQStream stf_template(double duration, double fs) {
    auto n = static_cast<std::size_t>(duration * fs + 0.5);
    if (n < 16) throw std::invalid_argument("stf_template: training field shorter than one short symbol");
    std::mt19937_64 rng(0x5714f00d);
    std::uniform_real_distribution<double> ph(0.0, kTwoPi);
    std::vector<Complex> short_sym(16);
    for (auto& x : short_sym) x = std::polar(1.0, ph(rng));
    IQStream out;
    out.sample_rate = fs;
    out.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.samples[i] = short_sym[i % 16];
    return out;
}

inline CarrierSignal generate_carrier(const CarrierSource& src, double duration, double fs) {
    if (!(fs > 0.0) || !(duration > 0.0)) throw std::invalid_argument("generate_carrier: bad duration or rate");
    CarrierSignal out;
    out.wave.sample_rate = fs;

    if (std::holds_alternative<ToneSource>(src)) {
        const auto& tone = std::get<ToneSource>(src);
        auto n = static_cast<std::size_t>(duration * fs + 0.5);
        out.wave.samples.resize(n);
        for (std::size_t i = 0; i < n; ++i) out.wave.samples[i] = tone_sample(tone.f_b, i, fs);
        out.segments.push_back({0, n, SegmentKind::Subframe});
        return out;
    }

    const auto& a = std::get<WifiAmpduSource>(src);
    if (!(a.stf_duration > 0.0) || !(a.subframe_duration > 0.0) || a.n_subframes < 1)
        throw std::invalid_argument("generate_carrier: bad aggregate-frame parameters");
    if (fs <= 2.0 * std::abs(a.tone_offset))
        throw std::invalid_argument("generate_carrier: sample rate too low for the tone offset");
    auto n_total = static_cast<std::size_t>(duration * fs + 0.5);
    auto stf = stf_template(a.stf_duration, fs);
    if (stf.size() >= n_total) throw std::invalid_argument("generate_carrier: duration does not cover the training field");

    out.wave.samples.reserve(n_total);
    for (const auto& x : stf.samples) out.wave.samples.push_back(x);
    out.segments.push_back({0, stf.size(), SegmentKind::Stf});

    std::mt19937_64 gap_rng(a.gap_seed);
    std::uniform_real_distribution<double> gap_len(10e-6, 100e-6);
    auto n_sub = static_cast<std::size_t>(a.subframe_duration * fs + 0.5);
    for (int k = 0; k < a.n_subframes && out.wave.size() < n_total; ++k) {
        if (k > 0 && !a.aggregated) {
            auto n_gap = static_cast<std::size_t>(gap_len(gap_rng) * fs + 0.5);
            std::size_t start = out.wave.size();
            for (std::size_t i = 0; i < n_gap && out.wave.size() < n_total; ++i) out.wave.samples.push_back({0.0, 0.0});
            out.segments.push_back({start, out.wave.size(), SegmentKind::Gap});
        }
        std::size_t start = out.wave.size();
        for (std::size_t i = 0; i < n_sub && out.wave.size() < n_total; ++i)
            out.wave.samples.push_back(tone_sample(a.tone_offset, i, fs));
        out.segments.push_back({start, out.wave.size(), SegmentKind::Subframe});
    }
    if (out.wave.size() < n_total) {
        std::size_t start = out.wave.size();
        out.wave.samples.resize(n_total, Complex{0.0, 0.0});
        out.segments.push_back({start, n_total, SegmentKind::Idle});
    }
    return out;
}

// Normalized cross-correlation peak; zero-lag-normalized so a scaled copy
// of the template still scores 1.
inline std::size_t stf_detect(const IQStream& rx, const IQStream& tmpl, double threshold) {
    if (tmpl.empty() || tmpl.size() >= rx.size())
        throw std::invalid_argument("stf_detect: template must be shorter than the stream");
    double t_energy = 0.0;
    for (const auto& x : tmpl.samples) t_energy += std::norm(x);

    double best = -1.0;
    std::size_t best_lag = 0;
    const std::size_t n_lags = rx.size() - tmpl.size() + 1;
    for (std::size_t lag = 0; lag < n_lags; ++lag) {
        Complex acc{0.0, 0.0};
        double r_energy = 0.0;
        for (std::size_t i = 0; i < tmpl.size(); ++i) {
            acc += rx.samples[lag + i] * std::conj(tmpl.samples[i]);
            r_energy += std::norm(rx.samples[lag + i]);
        }
        double denom = std::sqrt(t_energy * r_energy);
        double score = denom > 0.0 ? std::abs(acc) / denom : 0.0;
        if (score > best) {
            best = score;
            best_lag = lag;
        }
    }
    if (best < threshold)
        throw std::runtime_error("stf_detect: no correlation peak above threshold " + std::to_string(threshold));
    return best_lag;
}

// Whole modulation symbols that fit in the aggregate window.
inline long long ampdu_capacity(int sf, double bw, double budget = 72e-3) {
    if (sf < 7 || sf > 12 || !(bw > 0.0)) throw std::invalid_argument("ampdu_capacity: bad chirp parameters");
    if (!(budget > 0.0)) throw std::invalid_argument("ampdu_capacity: budget must be positive");
    double t_sym = static_cast<double>(1 << sf) / bw;
    return static_cast<long long>(std::floor(budget / t_sym * (1.0 + 1e-12)));
}

struct ChannelConfig {
    double carrier_freq = 2.45e9;
    double path_loss_exponent = 2.0;
    double wall_loss_db = 10.0;
    int n_walls = 0;
    double noise_psd = -174.0;
    std::uint64_t rng_seed = 1;
};

// Log-distance loss with the free-space reference, plus a fixed per-wall
// penalty. Exponent 2 reproduces Friis.
inline double path_loss_db(double d, double f, const ChannelConfig& cfg) {
    if (!(d > 0.0)) throw std::invalid_argument("path_loss_db: distance must be positive");
    if (!(f > 0.0)) throw std::invalid_argument("path_loss_db: frequency must be positive");
    double loss = 10.0 * cfg.path_loss_exponent * std::log10(4.0 * kPi * d * f / kSpeedOfLight);
    return loss + static_cast<double>(cfg.n_walls) * cfg.wall_loss_db;
}

// Seeded complex Gaussian of the given total (two-component) power.
inline void add_awgn(IQStream& s, double noise_power, std::uint64_t seed) {
    if (!(noise_power >= 0.0)) throw std::invalid_argument("add_awgn: noise power must be non-negative");
    if (noise_power == 0.0) return;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, std::sqrt(noise_power / 2.0));
    for (auto& x : s.samples) x += Complex{g(rng), g(rng)};
}

// Amplitude scaling plus circularly-symmetric Gaussian noise. Total noise
// power is noise_psd (dBm/Hz) times the stream's sample rate, with the
// 0 dBm == unit amplitude convention; -inf disables noise.
inline IQStream apply_channel(const IQStream& tx, double loss_db, const ChannelConfig& cfg) {
    if (!std::isfinite(loss_db)) throw std::invalid_argument("apply_channel: loss must be finite");
    IQStream out;
    out.sample_rate = tx.sample_rate;
    out.samples.resize(tx.size());
    const double amp = std::pow(10.0, -loss_db / 20.0);
    for (std::size_t n = 0; n < tx.size(); ++n) out.samples[n] = amp * tx.samples[n];

    if (std::isfinite(cfg.noise_psd)) {
        double n_power = std::pow(10.0, cfg.noise_psd / 10.0) * tx.sample_rate;
        add_awgn(out, n_power, cfg.rng_seed);
    }
    return out;
}

}  // namespace bscat
