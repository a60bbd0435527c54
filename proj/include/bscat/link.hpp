#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "bscat/bias.hpp"
#include "bscat/channel.hpp"
#include "bscat/iq.hpp"
#include "bscat/modems/protocol.hpp"
#include "bscat/modspace.hpp"
#include "bscat/tag.hpp"

namespace bscat {

// splitmix64 finalizer; decorrelates seeds derived from small counters.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
    return mix64(base ^ mix64(stream ^ mix64(index)));
}

struct Interval {
    double low = 0.0;
    double high = 0.0;
};

// Wilson score interval for a binomial proportion.
inline Interval wilson_interval(std::size_t successes, std::size_t n, double z = 1.959963984540054) {
    if (n == 0) return {0.0, 1.0};
    if (successes > n) throw std::invalid_argument("wilson_interval: successes > n");
    double p = static_cast<double>(successes) / static_cast<double>(n);
    double nn = static_cast<double>(n);
    double z2 = z * z;
    double denom = 1.0 + z2 / nn;
    double center = (p + z2 / (2.0 * nn)) / denom;
    double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

// Frames carry a fixed-width payload plus a 16-bit additive checksum over the
// payload words, so packet delivery can be judged end to end.
inline constexpr std::size_t kFramePayloadBits = 64;
inline constexpr std::size_t kFrameChecksumBits = 16;
inline constexpr std::size_t kFrameBits = kFramePayloadBits + kFrameChecksumBits;

inline std::uint16_t frame_checksum(const std::vector<std::uint8_t>& bits, std::size_t offset, std::size_t n_bits) {
    std::uint32_t sum = 0;
    std::uint32_t word = 0;
    int in_word = 0;
    for (std::size_t i = 0; i < n_bits; ++i) {
        word = (word << 1) | static_cast<std::uint32_t>(bits[offset + i] & 1);
        if (++in_word == 16) {
            sum += word;
            word = 0;
            in_word = 0;
        }
    }
    if (in_word > 0) sum += word << (16 - in_word);
    return static_cast<std::uint16_t>(sum & 0xffffu);
}

inline void append_word(std::vector<std::uint8_t>& bits, std::uint32_t word, int n_bits) {
    for (int i = n_bits - 1; i >= 0; --i) bits.push_back(static_cast<std::uint8_t>((word >> i) & 1u));
}

// payload_bits random bits framed as [64-bit payload | 16-bit checksum]*.
// The last frame's payload is zero-padded to full width.
inline std::vector<std::uint8_t> build_frames(std::size_t payload_bits, std::uint64_t seed) {
    if (payload_bits == 0) throw std::invalid_argument("build_frames: payload_bits must be positive");
    std::mt19937_64 rng(seed);
    std::vector<std::uint8_t> payload(payload_bits);
    for (auto& b : payload) b = static_cast<std::uint8_t>(rng() & 1u);
    std::size_t n_frames = (payload_bits + kFramePayloadBits - 1) / kFramePayloadBits;
    std::vector<std::uint8_t> out;
    out.reserve(n_frames * kFrameBits);
    for (std::size_t f = 0; f < n_frames; ++f) {
        std::size_t start = f * kFramePayloadBits;
        for (std::size_t i = 0; i < kFramePayloadBits; ++i) {
            std::size_t idx = start + i;
            out.push_back(idx < payload_bits ? payload[idx] : 0);
        }
        append_word(out, frame_checksum(out, f * kFrameBits, kFramePayloadBits), kFrameChecksumBits);
    }
    return out;
}

struct TagSetup {
    TagConfig config{};
    TransistorCurve curve = default_transistor_curve();
    MatchingNetwork matching{};
};

struct LinkSpec {
    ProtocolConfig protocol = LoraConfig{};
    CarrierSource carrier = ToneSource{};
    FrequencyPlan plan{};
    TagSetup tag{};
    ChannelConfig channel{};
    double d_source_tag = 1.0;
    double d_tag_rx = 5.0;
    std::size_t payload_bits = 512;
    std::size_t trials = 20;
    std::optional<double> snr_override_db{};
    bool allow_invalid_plan = false;
};

// Receiver-rate plan for a protocol driven by a baseband tone at the sampling
// rate: carrier and sampling clocks coincide, modulation occupies half band.
inline FrequencyPlan make_default_plan(const ProtocolConfig& protocol) {
    double fs = protocol_fs(protocol);
    return {fs, fs / 2.0, fs};
}

struct LinkReport {
    double ber = 0.0;
    double throughput_bps = 0.0;
    double prr = 0.0;
    double snr_db = 0.0;
    std::size_t bits_total = 0;
    std::size_t bit_errors = 0;
    std::size_t frames_total = 0;
    std::size_t frames_passed = 0;
    Interval ber_ci{};
    Interval prr_ci{};
    std::vector<std::uint64_t> trial_seeds{};
};

namespace detail {

inline void scale_stream(IQStream& s, double g) {
    for (auto& x : s.samples) x *= g;
}

// Undo the tag's sideband shift at the receiver with an ideal mixer. For the
// square shifter this leaves the residual harmonics in band.
inline void compensate_shift(IQStream& s, double shift_freq) {
    if (shift_freq == 0.0) return;
    for (std::size_t n = 0; n < s.size(); ++n)
        s.samples[n] *= std::conj(tone_sample(shift_freq, n, s.sample_rate));
}

struct TrialAccumulator {
    std::size_t bits_total = 0;
    std::size_t bit_errors = 0;
    std::size_t frames_total = 0;
    std::size_t frames_passed = 0;
    std::size_t payload_bits_correct = 0;
    double airtime_s = 0.0;
    double signal_power_sum = 0.0;
    double noise_power_sum = 0.0;
    std::size_t power_terms = 0;

    void score(const std::vector<std::uint8_t>& tx, const std::vector<std::uint8_t>& rx_bits) {
        std::size_t n_frames = tx.size() / kFrameBits;
        for (std::size_t f = 0; f < n_frames; ++f) {
            std::size_t base = f * kFrameBits;
            bool all_ok = true;
            for (std::size_t i = 0; i < kFrameBits; ++i) {
                bool ok = tx[base + i] == rx_bits[base + i];
                bit_errors += ok ? 0u : 1u;
                all_ok = all_ok && ok;
                if (i < kFramePayloadBits && ok) ++payload_bits_correct;
            }
            bits_total += kFrameBits;
            std::uint16_t rx_sum = 0;
            for (std::size_t i = 0; i < kFrameChecksumBits; ++i)
                rx_sum = static_cast<std::uint16_t>((rx_sum << 1) | (rx_bits[base + kFramePayloadBits + i] & 1));
            bool pass = all_ok && rx_sum == frame_checksum(rx_bits, base, kFramePayloadBits);
            ++frames_total;
            if (pass) ++frames_passed;
        }
    }

    LinkReport report() const {
        LinkReport r;
        r.bits_total = bits_total;
        r.bit_errors = bit_errors;
        r.frames_total = frames_total;
        r.frames_passed = frames_passed;
        r.ber = bits_total ? static_cast<double>(bit_errors) / static_cast<double>(bits_total) : 0.0;
        r.prr = frames_total ? static_cast<double>(frames_passed) / static_cast<double>(frames_total) : 0.0;
        r.throughput_bps = airtime_s > 0.0 ? static_cast<double>(payload_bits_correct) / airtime_s : 0.0;
        r.ber_ci = wilson_interval(bit_errors, bits_total);
        r.prr_ci = wilson_interval(frames_passed, frames_total);
        double ps = power_terms ? signal_power_sum / static_cast<double>(power_terms) : 0.0;
        double pn = power_terms ? noise_power_sum / static_cast<double>(power_terms) : 0.0;
        r.snr_db = pn > 0.0 ? 10.0 * std::log10(ps / pn)
                            : std::numeric_limits<double>::infinity();
        return r;
    }
};

inline double window_power(const IQStream& s, std::size_t offset, std::size_t count) {
    if (count == 0) return 0.0;
    double acc = 0.0;
    for (std::size_t n = offset; n < offset + count; ++n) acc += std::norm(s.samples[n]);
    return acc / static_cast<double>(count);
}

inline double noise_power_for(double signal_power, double fs, const ChannelConfig& channel,
                              std::optional<double> snr_override_db) {
    if (snr_override_db) {
        if (signal_power <= 0.0) throw std::runtime_error("link: zero received power, cannot set SNR");
        return signal_power / std::pow(10.0, *snr_override_db / 10.0);
    }
    if (!std::isfinite(channel.noise_psd)) return 0.0;
    return std::pow(10.0, channel.noise_psd / 10.0) * fs;
}

}  // namespace detail

// One backscatter downlink+uplink pass: the source illuminates the tag, the
// tag programs its reflection from the modem waveform, and a receiver at
// d_tag_rx demodulates the reflection. Noise enters only at the receiver.
inline LinkReport run_link(const LinkSpec& spec, std::uint64_t seed) {
    if (spec.trials == 0) throw std::invalid_argument("run_link: trials must be positive");
    PlanVerdict verdict = check_frequency_plan(spec.plan);
    if (verdict != PlanVerdict::Valid && !spec.allow_invalid_plan)
        throw std::invalid_argument("run_link: frequency plan verdict is " +
                                    std::string(plan_verdict_name(verdict)));

    double fs = protocol_fs(spec.protocol);
    bool ampdu = std::holds_alternative<WifiAmpduSource>(spec.carrier);
    if (ampdu && !std::holds_alternative<LoraConfig>(spec.protocol))
        throw std::invalid_argument("run_link: frame-burst carriers are only supported with the chirp modem");
    if (!ampdu) {
        const auto& tone = std::get<ToneSource>(spec.carrier);
        double ratio = tone.f_b / fs;
        if (std::abs(ratio - std::round(ratio)) > 1e-9)
            throw std::invalid_argument(
                "run_link: tone frequency must be an integer multiple of the receiver rate");
    }

    ModulationSpace space = boundary_space(spec.tag.curve, spec.tag.config, spec.tag.matching);
    double gain_down = std::pow(10.0, -path_loss_db(spec.d_source_tag, spec.channel.carrier_freq, spec.channel) / 20.0);
    double gain_up = std::pow(10.0, -path_loss_db(spec.d_tag_rx, spec.channel.carrier_freq, spec.channel) / 20.0);

    detail::TrialAccumulator acc;
    LinkReport report;
    report.trial_seeds.reserve(spec.trials);

    for (std::size_t trial = 0; trial < spec.trials; ++trial) {
        std::uint64_t trial_seed = derive_seed(seed, 0, trial);
        report.trial_seeds.push_back(trial_seed);

        std::vector<std::uint8_t> tx_bits = build_frames(spec.payload_bits, derive_seed(trial_seed, 1, 0));
        std::size_t mult = protocol_bit_multiple(spec.protocol);
        std::size_t padded = ((tx_bits.size() + mult - 1) / mult) * mult;
        std::vector<std::uint8_t> mod_bits = tx_bits;
        mod_bits.resize(padded, 0);

        IQStream target = protocol_modulate(spec.protocol, mod_bits);
        std::size_t mod_offset = 0;
        IQStream carrier;

        if (!ampdu) {
            const auto& tone = std::get<ToneSource>(spec.carrier);
            carrier = generate_carrier(tone, target.duration(), fs).wave;
        } else {
            const auto& src = std::get<WifiAmpduSource>(spec.carrier);
            const auto& lora = std::get<LoraConfig>(spec.protocol);
            double burst = src.n_subframes * src.subframe_duration;
            std::size_t n_symbols = target.size() / ((std::size_t{1} << lora.sf) * static_cast<std::size_t>(lora.osr));
            if (n_symbols > static_cast<std::size_t>(ampdu_capacity(lora.sf, lora.bw, burst)))
                throw std::invalid_argument("run_link: payload exceeds the carrier burst budget");
            carrier = generate_carrier(src, src.stf_duration + burst, fs).wave;
        }

        detail::scale_stream(carrier, gain_down);

        if (ampdu) {
            const auto& src = std::get<WifiAmpduSource>(spec.carrier);
            IQStream tmpl = stf_template(src.stf_duration, fs);
            // The tag only searches the head of the burst for the training field.
            IQStream head;
            head.sample_rate = fs;
            std::size_t window = std::min(carrier.size(), 3 * tmpl.size() + 16);
            head.samples.assign(carrier.samples.begin(), carrier.samples.begin() + window);
            mod_offset = stf_detect(head, tmpl, 0.5) + tmpl.size();
            if (mod_offset + target.size() > carrier.size())
                throw std::runtime_error("run_link: modulation window overruns the carrier burst");
        }

        // Bias program covers the full illumination; outside the modulation
        // window the tag rests at its matched point (zero reflection target).
        IQStream full_target;
        full_target.sample_rate = fs;
        full_target.samples.assign(carrier.size(), Complex(0.0, 0.0));
        std::copy(target.samples.begin(), target.samples.end(), full_target.samples.begin() + mod_offset);

        BiasWaveform bias = compile_bias(spec.tag.config, spec.tag.curve, full_target, space);
        IQStream reflected = reflect(spec.tag.config, spec.tag.curve, carrier, bias, spec.tag.matching);

        detail::scale_stream(reflected, gain_up);
        double signal_power = detail::window_power(reflected, mod_offset, target.size());
        double noise_power = detail::noise_power_for(signal_power, fs, spec.channel, spec.snr_override_db);
        if (noise_power > 0.0) add_awgn(reflected, noise_power, trial_seed);

        detail::compensate_shift(reflected, spec.tag.config.shift_freq);

        IQStream rx_mod;
        rx_mod.sample_rate = fs;
        rx_mod.samples.assign(reflected.samples.begin() + mod_offset,
                              reflected.samples.begin() + mod_offset + target.size());

        std::vector<std::uint8_t> rx_bits = protocol_demodulate(spec.protocol, rx_mod);
        if (rx_bits.size() < tx_bits.size()) throw std::runtime_error("run_link: demodulator returned too few bits");
        rx_bits.resize(tx_bits.size());

        acc.score(tx_bits, rx_bits);
        acc.airtime_s += target.duration();
        acc.signal_power_sum += signal_power;
        acc.noise_power_sum += noise_power;
        ++acc.power_terms;
    }

    LinkReport out = acc.report();
    out.trial_seeds = std::move(report.trial_seeds);
    return out;
}

enum class SweepAxis { DTagRx, DSourceTag, Sf, Bw, Snr };

inline const char* sweep_axis_name(SweepAxis a) {
    switch (a) {
        case SweepAxis::DTagRx: return "d_tag_rx";
        case SweepAxis::DSourceTag: return "d_source_tag";
        case SweepAxis::Sf: return "sf";
        case SweepAxis::Bw: return "bw";
        case SweepAxis::Snr: return "snr";
    }
    return "?";
}

inline SweepAxis sweep_axis_from_name(const std::string& s) {
    if (s == "d_tag_rx") return SweepAxis::DTagRx;
    if (s == "d_source_tag") return SweepAxis::DSourceTag;
    if (s == "sf") return SweepAxis::Sf;
    if (s == "bw") return SweepAxis::Bw;
    if (s == "snr") return SweepAxis::Snr;
    throw std::invalid_argument("unknown sweep axis: " + s);
}

struct SweepRow {
    double value = 0.0;
    LinkReport report{};
    std::string error{};  // non-empty when the row failed to run
    bool ok() const { return error.empty(); }
};

inline LinkSpec spec_with_axis(const LinkSpec& base, SweepAxis axis, double value) {
    LinkSpec s = base;
    switch (axis) {
        case SweepAxis::DTagRx:
            s.d_tag_rx = value;
            break;
        case SweepAxis::DSourceTag:
            s.d_source_tag = value;
            break;
        case SweepAxis::Sf: {
            auto* lora = std::get_if<LoraConfig>(&s.protocol);
            if (!lora) throw std::invalid_argument("sweep: sf axis requires the chirp modem");
            lora->sf = static_cast<int>(std::llround(value));
            break;
        }
        case SweepAxis::Bw: {
            auto* lora = std::get_if<LoraConfig>(&s.protocol);
            if (!lora) throw std::invalid_argument("sweep: bw axis requires the chirp modem");
            lora->bw = value;
            break;
        }
        case SweepAxis::Snr:
            s.snr_override_db = value;
            break;
    }
    if (axis == SweepAxis::Sf || axis == SweepAxis::Bw) {
        // Receiver rate moves with the modem; keep the default tone plan in step.
        s.plan = make_default_plan(s.protocol);
        if (auto* tone = std::get_if<ToneSource>(&s.carrier)) tone->f_b = protocol_fs(s.protocol);
    }
    return s;
}

// One run_link per value. A failing row records its error and the sweep
// continues; each row draws an independent derived seed.
inline std::vector<SweepRow> ber_sweep(const LinkSpec& base, SweepAxis axis,
                                       const std::vector<double>& values, std::uint64_t seed) {
    std::vector<SweepRow> rows;
    rows.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        SweepRow row;
        row.value = values[i];
        try {
            LinkSpec s = spec_with_axis(base, axis, values[i]);
            row.report = run_link(s, derive_seed(seed, 2, i));
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

struct RangeResult {
    double max_distance = 0.0;
    double ber = 0.0;
    Interval ber_ci{};
    std::size_t evaluations = 0;
};

// Largest receiver distance whose Monte-Carlo BER stays below ber_target:
// geometric bracketing out from the starting distance, then fixed-count bisection.
inline RangeResult range_search(const LinkSpec& spec, double ber_target = 0.01,
                                std::uint64_t seed = 1, int bisection_steps = 20) {
    if (!(ber_target > 0.0 && ber_target < 1.0))
        throw std::invalid_argument("range_search: ber_target must be in (0,1)");
    std::size_t eval_count = 0;
    auto ber_at = [&](double d) {
        LinkSpec s = spec;
        s.d_tag_rx = d;
        return run_link(s, derive_seed(seed, 3, eval_count++)).ber;
    };

    double lo = spec.d_tag_rx;
    double ber_lo = ber_at(lo);
    if (ber_lo >= ber_target)
        throw std::runtime_error("range_search: link already exceeds the BER target at the starting distance");

    double hi = lo;
    double ber_hi = ber_lo;
    for (int i = 0; i < 40 && ber_hi < ber_target; ++i) {
        hi *= 2.0;
        ber_hi = ber_at(hi);
    }
    if (ber_hi < ber_target)
        throw std::runtime_error("range_search: no failing distance found while bracketing");

    for (int i = 0; i < bisection_steps; ++i) {
        double mid = 0.5 * (lo + hi);
        if (ber_at(mid) < ber_target)
            lo = mid;
        else
            hi = mid;
    }

    LinkSpec s = spec;
    s.d_tag_rx = lo;
    LinkReport final = run_link(s, derive_seed(seed, 3, eval_count++));
    RangeResult r;
    r.max_distance = lo;
    r.ber = final.ber;
    r.ber_ci = final.ber_ci;
    r.evaluations = eval_count;
    return r;
}

// ---- constellation capture ----------------------------------------------

inline Complex qam4_point(int symbol) {
    static const double s = 1.0 / std::sqrt(2.0);
    switch (symbol & 3) {
        case 0: return {s, s};
        case 1: return {-s, s};
        case 2: return {-s, -s};
        default: return {s, -s};
    }
}

struct ConstellationStats {
    std::array<Complex, 4> centers{};
    std::array<double, 4> angular_std_deg{};
    std::array<std::size_t, 4> counts{};
    double inter_group_rotation_deg = 0.0;
    double gain = 0.0;  // common complex gain magnitude stripped before clustering
    std::vector<Complex> points{};
    std::vector<int> tx_symbols{};
    std::vector<int> clusters{};
};

struct ConstellationSpec {
    FrequencyPlan plan{};
    TagSetup tag{};
    ChannelConfig channel{};
    double d_source_tag = 1.0;
    double d_tag_rx = 1.0;
    std::vector<int> pattern = {0, 1, 2, 3};
    std::size_t n_symbols = 64;
    bool allow_invalid_plan = true;
};

namespace detail {

inline double wrap_angle(double a) {
    while (a > kPi) a -= kTwoPi;
    while (a < -kPi) a += kTwoPi;
    return a;
}

// Smallest oversampling of the receiver rate that resolves the carrier and
// lands an integer number of samples in each symbol.
inline std::size_t capture_oversampling(const FrequencyPlan& plan) {
    double need = 4.0 * std::max(plan.f_b, plan.f_m);
    for (std::size_t l = 1; l <= (1u << 16); ++l) {
        double fs_sim = l * plan.f_s;
        if (fs_sim + 1e-9 < need) continue;
        double sps = fs_sim / plan.f_m;
        if (std::abs(sps - std::round(sps)) < 1e-6) return l;
    }
    throw std::invalid_argument("constellation_capture: no aligned simulation rate for this plan");
}

}  // namespace detail

// Drive a 4-point constellation through the tag over a time-resolved carrier,
// sample the receiver at symbol centers, and report cluster geometry. The
// receiver strips one common complex gain (one-tap equalizer) before
// clustering, so a valid plan lands clusters on the ideal points.
inline ConstellationStats constellation_capture(const ConstellationSpec& spec, std::uint64_t seed = 1) {
    const FrequencyPlan& plan = spec.plan;
    PlanVerdict verdict = check_frequency_plan(plan);
    if (verdict != PlanVerdict::Valid && !spec.allow_invalid_plan)
        throw std::invalid_argument("constellation_capture: frequency plan verdict is " +
                                    std::string(plan_verdict_name(verdict)));
    if (spec.pattern.empty() || spec.pattern.size() % 4 != 0)
        throw std::invalid_argument("constellation_capture: pattern length must be a positive multiple of 4");
    for (int p : spec.pattern)
        if (p < 0 || p > 3) throw std::invalid_argument("constellation_capture: pattern symbols must be 0..3");
    if (spec.n_symbols < 8 || spec.n_symbols % 4 != 0)
        throw std::invalid_argument("constellation_capture: n_symbols must be a multiple of 4, at least 8");

    std::size_t l = detail::capture_oversampling(plan);
    double fs_sim = l * plan.f_s;
    std::size_t sps = static_cast<std::size_t>(std::llround(fs_sim / plan.f_m));

    std::vector<int> symbols(spec.n_symbols);
    for (std::size_t k = 0; k < spec.n_symbols; ++k) symbols[k] = spec.pattern[k % spec.pattern.size()];

    IQStream target;
    target.sample_rate = fs_sim;
    target.samples.reserve(spec.n_symbols * sps);
    for (int sym : symbols) target.samples.insert(target.samples.end(), sps, qam4_point(sym));

    ModulationSpace space = boundary_space(spec.tag.curve, spec.tag.config, spec.tag.matching);
    BiasWaveform bias = compile_bias(spec.tag.config, spec.tag.curve, target, space);

    IQStream carrier = generate_carrier(ToneSource{plan.f_b}, target.duration(), fs_sim).wave;
    double gain_down = std::pow(10.0, -path_loss_db(spec.d_source_tag, spec.channel.carrier_freq, spec.channel) / 20.0);
    detail::scale_stream(carrier, gain_down);

    IQStream reflected = reflect(spec.tag.config, spec.tag.curve, carrier, bias, spec.tag.matching);
    double gain_up = std::pow(10.0, -path_loss_db(spec.d_tag_rx, spec.channel.carrier_freq, spec.channel) / 20.0);
    detail::scale_stream(reflected, gain_up);
    if (std::isfinite(spec.channel.noise_psd)) {
        double np = std::pow(10.0, spec.channel.noise_psd / 10.0) * fs_sim;
        add_awgn(reflected, np, seed);
    }

    // Receiver decimates to its own rate, then reads one sample per symbol
    // center.
    ConstellationStats stats;
    stats.tx_symbols = symbols;
    stats.points.reserve(spec.n_symbols);
    for (std::size_t k = 0; k < spec.n_symbols; ++k) {
        double t_center = (static_cast<double>(k) + 0.5) / plan.f_m;
        auto rx_index = static_cast<std::size_t>(std::llround(t_center * plan.f_s));
        std::size_t sim_index = std::min(rx_index * l, reflected.size() - 1);
        stats.points.push_back(reflected.samples[sim_index]);
    }

    // One-tap equalizer: least-squares complex gain against the sent points.
    Complex num(0.0, 0.0);
    double den = 0.0;
    for (std::size_t k = 0; k < spec.n_symbols; ++k) {
        Complex ideal = qam4_point(symbols[k]);
        num += stats.points[k] * std::conj(ideal);
        den += std::norm(ideal);
    }
    Complex alpha = den > 0.0 ? num / den : Complex(1.0, 0.0);
    stats.gain = std::abs(alpha);
    if (stats.gain > 0.0) {
        Complex derot = std::conj(alpha) / std::abs(alpha);
        for (auto& p : stats.points) p *= derot;
    }

    // Lloyd iterations seeded at the ideal corners scaled to the data.
    double scale = 0.0;
    for (const auto& p : stats.points) scale += std::abs(p);
    scale /= static_cast<double>(stats.points.size());
    std::array<Complex, 4> centers;
    for (int c = 0; c < 4; ++c) centers[c] = qam4_point(c) * scale;
    stats.clusters.assign(spec.n_symbols, 0);
    for (int iter = 0; iter < 16; ++iter) {
        for (std::size_t k = 0; k < spec.n_symbols; ++k) {
            int best = 0;
            double best_d = std::abs(stats.points[k] - centers[0]);
            for (int c = 1; c < 4; ++c) {
                double d = std::abs(stats.points[k] - centers[c]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            stats.clusters[k] = best;
        }
        std::array<Complex, 4> sums{};
        std::array<std::size_t, 4> counts{};
        for (std::size_t k = 0; k < spec.n_symbols; ++k) {
            sums[stats.clusters[k]] += stats.points[k];
            ++counts[stats.clusters[k]];
        }
        for (int c = 0; c < 4; ++c)
            if (counts[c] > 0) centers[c] = sums[c] / static_cast<double>(counts[c]);
        stats.counts = counts;
    }
    stats.centers = centers;

    for (int c = 0; c < 4; ++c) {
        double acc = 0.0;
        std::size_t n = 0;
        double ref = std::arg(centers[c]);
        for (std::size_t k = 0; k < spec.n_symbols; ++k) {
            if (stats.clusters[k] != c) continue;
            double d = detail::wrap_angle(std::arg(stats.points[k]) - ref);
            acc += d * d;
            ++n;
        }
        stats.angular_std_deg[c] = n > 0 ? std::sqrt(acc / static_cast<double>(n)) * 180.0 / kPi : 0.0;
    }

    // Mean rotation between consecutive 4-symbol groups exposes a spinning
    // constellation even when every group looks locally clean.
    double rot_acc = 0.0;
    std::size_t rot_n = 0;
    std::size_t n_groups = spec.n_symbols / 4;
    for (std::size_t g = 1; g < n_groups; ++g) {
        for (std::size_t k = 0; k < 4; ++k) {
            Complex prev = stats.points[(g - 1) * 4 + k];
            Complex cur = stats.points[g * 4 + k];
            if (std::abs(prev) < 1e-12 || std::abs(cur) < 1e-12) continue;
            rot_acc += std::arg(cur * std::conj(prev));
            ++rot_n;
        }
    }
    stats.inter_group_rotation_deg = rot_n > 0 ? rot_acc / static_cast<double>(rot_n) * 180.0 / kPi : 0.0;
    return stats;
}

// ---- TDMA schedule --------------------------------------------------------

struct TdmaWindow {
    std::uint16_t tag_id = 0;
    std::uint8_t slot_index = 0;
    double t_start = 0.0;
    double t_end = 0.0;
};

// Deterministic slot windows from parsed queries; collisions are an error.
inline std::vector<TdmaWindow> tdma_schedule(const std::vector<Query>& queries, double slot_duration) {
    if (!(slot_duration > 0.0)) throw std::invalid_argument("tdma_schedule: slot_duration must be positive");
    std::vector<TdmaWindow> windows;
    windows.reserve(queries.size());
    for (const auto& q : queries) {
        TdmaWindow w;
        w.tag_id = q.tag_id;
        w.slot_index = q.slot_index;
        w.t_start = q.slot_index * slot_duration;
        w.t_end = (q.slot_index + 1) * slot_duration;
        windows.push_back(w);
    }
    std::sort(windows.begin(), windows.end(),
              [](const TdmaWindow& a, const TdmaWindow& b) { return a.slot_index < b.slot_index; });
    for (std::size_t i = 1; i < windows.size(); ++i)
        if (windows[i].slot_index == windows[i - 1].slot_index)
            throw std::invalid_argument("tdma_schedule: duplicate slot index " +
                                        std::to_string(windows[i].slot_index));
    return windows;
}

}  // namespace bscat
