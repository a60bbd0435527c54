#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "bscat/impedance.hpp"
#include "bscat/iq.hpp"

namespace bscat {

// Gate-voltage to channel-resistance lookup for one load transistor.
// Interpolation is linear in log R, so exponential-looking curves are
// represented exactly by a handful of samples.
struct TransistorCurve {
    struct Sample {
        double v_gs;
        double r_ohms;
    };
    std::vector<Sample> samples;

    double v_min() const { return samples.front().v_gs; }
    double v_max() const { return samples.back().v_gs; }
    double r_min() const { return samples.back().r_ohms; }
    double r_max() const { return samples.front().r_ohms; }
};

inline TransistorCurve make_transistor_curve(std::vector<TransistorCurve::Sample> samples) {
    if (samples.size() < 2) throw std::invalid_argument("make_transistor_curve: need at least two samples");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!(samples[i].r_ohms > 0.0)) throw std::invalid_argument("make_transistor_curve: resistances must be positive");
        if (i > 0) {
            if (!(samples[i].v_gs > samples[i - 1].v_gs))
                throw std::invalid_argument("make_transistor_curve: voltages must be strictly increasing");
            if (!(samples[i].r_ohms < samples[i - 1].r_ohms))
                throw std::invalid_argument("make_transistor_curve: resistance must be strictly decreasing");
        }
    }
    return {std::move(samples)};
}

// Depletion-style curve: 10 kohm pinched down to 2 ohm across 0..0.9 V.
inline TransistorCurve default_transistor_curve() {
    std::vector<TransistorCurve::Sample> s;
    const int n = 16;
    const double ln_hi = std::log(10e3), ln_lo = std::log(2.0);
    for (int k = 0; k < n; ++k) {
        double t = static_cast<double>(k) / (n - 1);
        s.push_back({0.9 * t, std::exp(ln_hi + t * (ln_lo - ln_hi))});
    }
    return make_transistor_curve(std::move(s));
}

inline double resistance_of_voltage(const TransistorCurve& curve, double v_gs) {
    if (v_gs < curve.v_min() - 1e-12 || v_gs > curve.v_max() + 1e-12)
        throw std::out_of_range("resistance_of_voltage: bias voltage outside curve domain");
    v_gs = std::clamp(v_gs, curve.v_min(), curve.v_max());
    auto it = std::upper_bound(curve.samples.begin(), curve.samples.end(), v_gs,
                               [](double v, const TransistorCurve::Sample& s) { return v < s.v_gs; });
    if (it == curve.samples.begin()) ++it;
    if (it == curve.samples.end()) --it;
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    double t = (v_gs - lo.v_gs) / (hi.v_gs - lo.v_gs);
    return std::exp(std::log(lo.r_ohms) + t * (std::log(hi.r_ohms) - std::log(lo.r_ohms)));
}

inline double voltage_of_resistance(const TransistorCurve& curve, double r_ohms) {
    if (r_ohms < curve.r_min() * (1.0 - 1e-12) || r_ohms > curve.r_max() * (1.0 + 1e-12))
        throw std::out_of_range("voltage_of_resistance: resistance outside curve range");
    r_ohms = std::clamp(r_ohms, curve.r_min(), curve.r_max());
    auto it = std::upper_bound(curve.samples.begin(), curve.samples.end(), r_ohms,
                               [](double r, const TransistorCurve::Sample& s) { return r > s.r_ohms; });
    if (it == curve.samples.begin()) ++it;
    if (it == curve.samples.end()) --it;
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    double t = (std::log(r_ohms) - std::log(lo.r_ohms)) / (std::log(hi.r_ohms) - std::log(lo.r_ohms));
    return lo.v_gs + t * (hi.v_gs - lo.v_gs);
}

enum class ShiftMode { Ideal, Square };

inline const char* shift_mode_name(ShiftMode m) { return m == ShiftMode::Ideal ? "ideal" : "square"; }

inline ShiftMode shift_mode_from_name(const std::string& s) {
    if (s == "ideal") return ShiftMode::Ideal;
    if (s == "square") return ShiftMode::Square;
    throw std::invalid_argument("unknown shift mode: " + s);
}

// Front-end parameters: two resistive loads behind an equal-split combiner,
// the Q path delayed by a quarter cycle, plus an additive structural-mode
// term and an optional overall rotation of the modulated part.
struct TagConfig {
    double z0 = 50.0;
    double splitter_amplitude = 0.5;
    double q_path_phase = kPi / 2.0;
    Gamma fixed_offset{0.0, 0.0};
    double space_rotation = 0.0;
    double shift_freq = 0.0;
    ShiftMode shift_mode = ShiftMode::Ideal;
    double dac_step_v = 0.0;
};

// Per-load real reflection coefficient at the given gate bias.
inline double rho_of_voltage(const TagConfig& tag, const TransistorCurve& curve, double v_gs) {
    double r = resistance_of_voltage(curve, v_gs);
    return (r - tag.z0) / (r + tag.z0);
}

// Combined reflection coefficient of the two-load front end.
inline Gamma gamma_of_bias(const TagConfig& tag, const TransistorCurve& curve, double v_i, double v_q) {
    double rho_i = rho_of_voltage(tag, curve, v_i);
    double rho_q = rho_of_voltage(tag, curve, v_q);
    Complex m = rho_i + std::polar(1.0, tag.q_path_phase) * rho_q;
    return tag.fixed_offset + tag.splitter_amplitude * std::polar(1.0, tag.space_rotation) * m;
}

// Gate-bias drive for both loads, sampled at the carrier rate.
struct BiasWaveform {
    std::vector<double> v_i;
    std::vector<double> v_q;
    double sample_rate = 0.0;

    std::size_t size() const { return v_i.size(); }
};

inline double square_shift_sample(double freq, std::size_t n, double fs) {
    double cycles = freq * static_cast<double>(n) / fs;
    double frac = cycles - std::floor(cycles);
    return frac < 0.5 ? 1.0 : -1.0;
}

// Backscattered wave: incident carrier times the instantaneous reflection
// coefficient, then the frequency shifter. The optional matching network
// sits between antenna and loads and transforms the combined coefficient.
inline IQStream reflect(const TagConfig& tag, const TransistorCurve& curve, const IQStream& carrier,
                        const BiasWaveform& bias, const MatchingNetwork& net = {}) {
    if (bias.v_i.size() != bias.v_q.size())
        throw std::invalid_argument("reflect: bias rails must have equal length");
    if (bias.size() != carrier.size())
        throw std::invalid_argument("reflect: bias and carrier must have equal length");
    if (bias.sample_rate > 0.0 && carrier.sample_rate > 0.0 &&
        std::abs(bias.sample_rate - carrier.sample_rate) > 1e-6 * carrier.sample_rate)
        throw std::invalid_argument("reflect: bias and carrier sample rates differ");

    IQStream out;
    out.sample_rate = carrier.sample_rate;
    out.samples.resize(carrier.size());
    const double fs = carrier.sample_rate;
    for (std::size_t n = 0; n < carrier.size(); ++n) {
        Gamma g = gamma_of_bias(tag, curve, bias.v_i[n], bias.v_q[n]);
        if (!net.elements.empty()) g = apply_matching(net, g, tag.z0);
        Complex y = carrier.samples[n] * g;
        if (tag.shift_freq != 0.0) {
            if (tag.shift_mode == ShiftMode::Ideal)
                y *= tone_sample(tag.shift_freq, n, fs);
            else
                y *= square_shift_sample(tag.shift_freq, n, fs);
        }
        out.samples[n] = y;
    }
    return out;
}

// OOK slicer for the downlink: per-bit mean magnitude against the midpoint
// of the strongest and weakest bit.
inline std::vector<std::uint8_t> envelope_decode(const IQStream& rx, double bit_rate) {
    if (!(bit_rate > 0.0)) throw std::invalid_argument("envelope_decode: bit rate must be positive");
    double ratio = rx.sample_rate / bit_rate;
    auto sps = static_cast<std::size_t>(ratio + 0.5);
    if (sps < 1 || std::abs(ratio - static_cast<double>(sps)) > 1e-9 * ratio)
        throw std::invalid_argument("envelope_decode: sample rate must be an integer multiple of bit rate");
    std::size_t n_bits = rx.size() / sps;
    if (n_bits == 0) throw std::invalid_argument("envelope_decode: stream shorter than one bit");

    std::vector<double> level(n_bits);
    for (std::size_t b = 0; b < n_bits; ++b) {
        double acc = 0.0;
        for (std::size_t k = 0; k < sps; ++k) acc += std::abs(rx.samples[b * sps + k]);
        level[b] = acc / static_cast<double>(sps);
    }
    auto [mn, mx] = std::minmax_element(level.begin(), level.end());
    if (*mx - *mn < 1e-9 * (*mx + 1e-30))
        throw std::runtime_error("envelope_decode: no amplitude contrast in stream");
    double thresh = 0.5 * (*mn + *mx);
    std::vector<std::uint8_t> bits(n_bits);
    for (std::size_t b = 0; b < n_bits; ++b) bits[b] = level[b] > thresh ? 1 : 0;
    return bits;
}

enum class CarrierKind : std::uint8_t { Tone = 0, WifiAmpdu = 1 };
enum class ProtocolId : std::uint8_t { Lora = 0, Zigbee = 1, Ble = 2, Wifi11b = 3, WifiOfdm = 4 };

inline const char* carrier_kind_name(CarrierKind k) { return k == CarrierKind::Tone ? "tone" : "wifi_ampdu"; }

inline CarrierKind carrier_kind_from_name(const std::string& s) {
    if (s == "tone") return CarrierKind::Tone;
    if (s == "wifi_ampdu") return CarrierKind::WifiAmpdu;
    throw std::invalid_argument("unknown carrier kind: " + s);
}

// Downlink command frame addressed to one tag.
struct Query {
    std::uint8_t tag_id = 0;
    std::uint8_t slot_index = 0;
    CarrierKind carrier_kind = CarrierKind::Tone;
    ProtocolId protocol_id = ProtocolId::Lora;
    std::uint8_t checksum = 0;
};

inline std::uint8_t query_checksum(const Query& q) {
    return static_cast<std::uint8_t>(q.tag_id ^ q.slot_index ^ static_cast<std::uint8_t>(q.carrier_kind) ^
                                     static_cast<std::uint8_t>(q.protocol_id));
}

inline Query make_query(std::uint8_t tag_id, std::uint8_t slot_index, CarrierKind ck, ProtocolId pid) {
    Query q{tag_id, slot_index, ck, pid, 0};
    q.checksum = query_checksum(q);
    return q;
}

constexpr std::uint8_t kQueryPreamble = 0xAA;
constexpr std::size_t kQueryBits = 48;

inline std::vector<std::uint8_t> encode_query(const Query& q) {
    std::uint8_t bytes[6] = {kQueryPreamble,
                             q.tag_id,
                             q.slot_index,
                             static_cast<std::uint8_t>(q.carrier_kind),
                             static_cast<std::uint8_t>(q.protocol_id),
                             q.checksum};
    std::vector<std::uint8_t> bits;
    bits.reserve(kQueryBits);
    for (std::uint8_t b : bytes)
        for (int i = 7; i >= 0; --i) bits.push_back((b >> i) & 1);
    return bits;
}

inline Query parse_query(const std::vector<std::uint8_t>& bits) {
    if (bits.size() != kQueryBits) throw std::invalid_argument("parse_query: frame must be 48 bits");
    std::uint8_t bytes[6] = {0, 0, 0, 0, 0, 0};
    for (std::size_t i = 0; i < kQueryBits; ++i)
        bytes[i / 8] = static_cast<std::uint8_t>((bytes[i / 8] << 1) | (bits[i] & 1));
    if (bytes[0] != kQueryPreamble) throw std::runtime_error("parse_query: bad preamble");
    if (bytes[3] > 1) throw std::runtime_error("parse_query: unknown carrier kind");
    if (bytes[4] > 4) throw std::runtime_error("parse_query: unknown protocol id");
    Query q{bytes[1], bytes[2], static_cast<CarrierKind>(bytes[3]), static_cast<ProtocolId>(bytes[4]), bytes[5]};
    if (q.checksum != query_checksum(q)) throw std::runtime_error("parse_query: checksum mismatch");
    return q;
}

}  // namespace bscat
