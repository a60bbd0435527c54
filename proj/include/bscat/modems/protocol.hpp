#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "bscat/modems/ble.hpp"
#include "bscat/modems/lora.hpp"
#include "bscat/modems/wifi11b.hpp"
#include "bscat/modems/wifi_ofdm.hpp"
#include "bscat/modems/zigbee.hpp"
#include "bscat/tag.hpp"

namespace bscat {

struct LoraConfig {
    int sf = 7;
    double bw = 125e3;
    int osr = 2;
};

struct ZigbeeConfig {
    double chip_rate = 2e6;
    int osr = 4;
};

struct BleConfig {
    double bit_rate = 1e6;
    double bt = 0.5;
    double mod_index = 0.5;
    int osr = 8;
};

struct Wifi11bConfig {
    double chip_rate = 11e6;
    int barker_len = 11;
    int osr = 1;
};

struct WifiOfdmConfig {
    OfdmParams params;
};

using ProtocolConfig = std::variant<LoraConfig, ZigbeeConfig, BleConfig, Wifi11bConfig, WifiOfdmConfig>;

inline ProtocolConfig default_protocol(ProtocolId id) {
    switch (id) {
        case ProtocolId::Lora: return LoraConfig{};
        case ProtocolId::Zigbee: return ZigbeeConfig{};
        case ProtocolId::Ble: return BleConfig{};
        case ProtocolId::Wifi11b: return Wifi11bConfig{};
        case ProtocolId::WifiOfdm: return WifiOfdmConfig{};
    }
    throw std::invalid_argument("default_protocol: unknown protocol id");
}

inline ProtocolId protocol_id(const ProtocolConfig& cfg) {
    return static_cast<ProtocolId>(cfg.index());
}

inline const char* protocol_id_name(ProtocolId id) {
    switch (id) {
        case ProtocolId::Lora: return "lora";
        case ProtocolId::Zigbee: return "zigbee";
        case ProtocolId::Ble: return "ble";
        case ProtocolId::Wifi11b: return "wifi11b";
        case ProtocolId::WifiOfdm: return "wifi_ofdm";
    }
    return "?";
}

inline ProtocolId protocol_id_from_name(const std::string& s) {
    if (s == "lora") return ProtocolId::Lora;
    if (s == "zigbee") return ProtocolId::Zigbee;
    if (s == "ble") return ProtocolId::Ble;
    if (s == "wifi11b") return ProtocolId::Wifi11b;
    if (s == "wifi_ofdm") return ProtocolId::WifiOfdm;
    throw std::invalid_argument("unknown protocol: " + s);
}

inline std::string protocol_name(const ProtocolConfig& cfg) {
    struct V {
        std::string operator()(const LoraConfig& c) const {
            return "lora_sf" + std::to_string(c.sf) + "_bw" + std::to_string(static_cast<long long>(c.bw));
        }
        std::string operator()(const ZigbeeConfig&) const { return "zigbee"; }
        std::string operator()(const BleConfig&) const { return "ble"; }
        std::string operator()(const Wifi11bConfig&) const { return "wifi11b"; }
        std::string operator()(const WifiOfdmConfig& c) const {
            return c.params.constellation == Constellation::Qpsk ? "wifi_ofdm_qpsk" : "wifi_ofdm_16qam";
        }
    };
    return std::visit(V{}, cfg);
}

// Complex-baseband sample rate each modem runs at.
inline double protocol_fs(const ProtocolConfig& cfg) {
    struct V {
        double operator()(const LoraConfig& c) const { return c.bw * c.osr; }
        double operator()(const ZigbeeConfig& c) const { return c.chip_rate * c.osr; }
        double operator()(const BleConfig& c) const { return c.bit_rate * c.osr; }
        double operator()(const Wifi11bConfig& c) const { return c.chip_rate * c.osr; }
        double operator()(const WifiOfdmConfig& c) const { return c.params.sample_rate; }
    };
    return std::visit(V{}, cfg);
}

// Raw uncoded air rate in bits per second.
inline double nominal_rate(const ProtocolConfig& cfg) {
    struct V {
        double operator()(const LoraConfig& c) const {
            return static_cast<double>(c.sf) * c.bw / static_cast<double>(1 << c.sf);
        }
        double operator()(const ZigbeeConfig& c) const { return 4.0 * c.chip_rate / 32.0; }
        double operator()(const BleConfig& c) const { return c.bit_rate; }
        double operator()(const Wifi11bConfig& c) const { return c.chip_rate / static_cast<double>(c.barker_len); }
        double operator()(const WifiOfdmConfig& c) const {
            return static_cast<double>(c.params.n_data) * bits_per_subcarrier(c.params.constellation) *
                   c.params.sample_rate / static_cast<double>(c.params.n_fft + c.params.cp_len);
        }
    };
    return std::visit(V{}, cfg);
}

// Smallest bit-count quantum a burst must be padded to.
inline std::size_t protocol_bit_multiple(const ProtocolConfig& cfg) {
    struct V {
        std::size_t operator()(const LoraConfig& c) const { return static_cast<std::size_t>(c.sf); }
        std::size_t operator()(const ZigbeeConfig&) const { return 4; }
        std::size_t operator()(const BleConfig&) const { return 1; }
        std::size_t operator()(const Wifi11bConfig&) const { return 1; }
        std::size_t operator()(const WifiOfdmConfig& c) const {
            return static_cast<std::size_t>(c.params.n_data) *
                   static_cast<std::size_t>(bits_per_subcarrier(c.params.constellation));
        }
    };
    return std::visit(V{}, cfg);
}

inline std::vector<int> bits_to_symbols(const std::vector<std::uint8_t>& bits, int bits_per_symbol) {
    if (bits.size() % static_cast<std::size_t>(bits_per_symbol) != 0)
        throw std::invalid_argument("bits_to_symbols: bit count not a multiple of the symbol size");
    std::vector<int> symbols(bits.size() / static_cast<std::size_t>(bits_per_symbol));
    for (std::size_t s = 0; s < symbols.size(); ++s) {
        int v = 0;
        for (int b = 0; b < bits_per_symbol; ++b)
            v = (v << 1) | bits[s * static_cast<std::size_t>(bits_per_symbol) + static_cast<std::size_t>(b)];
        symbols[s] = v;
    }
    return symbols;
}

inline std::vector<std::uint8_t> symbols_to_bits(const std::vector<int>& symbols, int bits_per_symbol) {
    std::vector<std::uint8_t> bits(symbols.size() * static_cast<std::size_t>(bits_per_symbol));
    for (std::size_t s = 0; s < symbols.size(); ++s)
        for (int b = 0; b < bits_per_symbol; ++b)
            bits[s * static_cast<std::size_t>(bits_per_symbol) + static_cast<std::size_t>(b)] =
                (symbols[s] >> (bits_per_symbol - 1 - b)) & 1;
    return bits;
}

// Unit-envelope baseband burst for the given payload bits.
inline IQStream protocol_modulate(const ProtocolConfig& cfg, const std::vector<std::uint8_t>& bits) {
    struct V {
        const std::vector<std::uint8_t>& bits;
        IQStream operator()(const LoraConfig& c) const {
            auto p = make_chirp_params(c.sf, c.bw);
            return lora_modulate(bits_to_symbols(bits, c.sf), p, c.bw * c.osr);
        }
        IQStream operator()(const ZigbeeConfig& c) const { return zigbee_modulate(bits, c.chip_rate, c.chip_rate * c.osr); }
        IQStream operator()(const BleConfig& c) const {
            return ble_modulate(bits, c.bit_rate, c.bt, c.mod_index, c.bit_rate * c.osr);
        }
        IQStream operator()(const Wifi11bConfig& c) const {
            return wifi11b_modulate(bits, c.chip_rate, c.barker_len, c.chip_rate * c.osr);
        }
        IQStream operator()(const WifiOfdmConfig& c) const { return wifi_ofdm_modulate(bits, c.params); }
    };
    return std::visit(V{bits}, cfg);
}

inline std::vector<std::uint8_t> protocol_demodulate(const ProtocolConfig& cfg, const IQStream& rx) {
    struct V {
        const IQStream& rx;
        std::vector<std::uint8_t> operator()(const LoraConfig& c) const {
            auto p = make_chirp_params(c.sf, c.bw);
            return symbols_to_bits(lora_demodulate(rx, p), c.sf);
        }
        std::vector<std::uint8_t> operator()(const ZigbeeConfig& c) const { return zigbee_demodulate(rx, c.chip_rate); }
        std::vector<std::uint8_t> operator()(const BleConfig& c) const { return ble_demodulate(rx, c.bit_rate); }
        std::vector<std::uint8_t> operator()(const Wifi11bConfig& c) const {
            return wifi11b_demodulate(rx, c.chip_rate, c.barker_len);
        }
        std::vector<std::uint8_t> operator()(const WifiOfdmConfig& c) const { return wifi_ofdm_demodulate(rx, c.params); }
    };
    return std::visit(V{rx}, cfg);
}

}  // namespace bscat
