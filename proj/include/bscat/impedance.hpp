#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "bscat/iq.hpp"

namespace bscat {

// Complex load impedance in ohms.
using Impedance = Complex;
// Reflection coefficient, unitless, |gamma| <= 1 for passive loads.
using Gamma = Complex;

inline Gamma gamma_from_impedance(Impedance z_l, double z0) {
    if (!(z0 > 0.0)) throw std::invalid_argument("gamma_from_impedance: reference impedance must be positive");
    if (z_l.real() < 0.0) {
        // Roundoff from upstream transforms can leave a reactive load with a
        // tiny negative real part; anything beyond that scale is active.
        if (z_l.real() < -1e-9 * (std::abs(z_l) + z0))
            throw std::invalid_argument("gamma_from_impedance: load must be passive (Re >= 0)");
        z_l = {0.0, z_l.imag()};
    }
    Impedance den = z_l + z0;
    if (std::abs(den) < 1e-12) throw std::domain_error("gamma_from_impedance: degenerate load, z_l = -z0");
    return (z_l - z0) / den;
}

inline Impedance impedance_from_gamma(Gamma gamma, double z0) {
    if (!(z0 > 0.0)) throw std::invalid_argument("impedance_from_gamma: reference impedance must be positive");
    Gamma den = 1.0 - gamma;
    if (std::abs(den) < 1e-12) throw std::domain_error("impedance_from_gamma: gamma at open circuit, impedance unbounded");
    return z0 * (1.0 + gamma) / den;
}

enum class ElementKind { SeriesInductor, SeriesCapacitor, ShuntInductor, ShuntCapacitor };

inline const char* element_kind_name(ElementKind k) {
    switch (k) {
        case ElementKind::SeriesInductor: return "series_l";
        case ElementKind::SeriesCapacitor: return "series_c";
        case ElementKind::ShuntInductor: return "shunt_l";
        case ElementKind::ShuntCapacitor: return "shunt_c";
    }
    return "?";
}

inline ElementKind element_kind_from_name(const std::string& s) {
    if (s == "series_l") return ElementKind::SeriesInductor;
    if (s == "series_c") return ElementKind::SeriesCapacitor;
    if (s == "shunt_l") return ElementKind::ShuntInductor;
    if (s == "shunt_c") return ElementKind::ShuntCapacitor;
    throw std::invalid_argument("unknown matching element kind: " + s);
}

// One lossless ladder element. value is henries for inductors, farads for
// capacitors, and must be positive.
struct MatchingElement {
    ElementKind kind;
    double value;
};

// Ladder between the load and the antenna port, elements ordered from the
// load outward. frequency is the design frequency in Hz.
struct MatchingNetwork {
    std::vector<MatchingElement> elements;
    double frequency = 0.0;
};

inline Impedance apply_element(const MatchingElement& elem, Impedance z, double frequency) {
    if (!(elem.value > 0.0)) throw std::invalid_argument("apply_element: element value must be positive");
    if (!(frequency > 0.0)) throw std::invalid_argument("apply_element: frequency must be positive");
    const double w = kTwoPi * frequency;
    switch (elem.kind) {
        case ElementKind::SeriesInductor:
            return z + Complex{0.0, w * elem.value};
        case ElementKind::SeriesCapacitor:
            return z + Complex{0.0, -1.0 / (w * elem.value)};
        case ElementKind::ShuntInductor:
        case ElementKind::ShuntCapacitor: {
            if (std::abs(z) < 1e-15) return z;
            Complex b = (elem.kind == ElementKind::ShuntCapacitor) ? Complex{0.0, w * elem.value}
                                                                   : Complex{0.0, -1.0 / (w * elem.value)};
            return 1.0 / (1.0 / z + b);
        }
    }
    throw std::logic_error("apply_element: unknown element kind");
}

// Reflection coefficient seen at the antenna port for a load presenting
// `gamma`, with the ladder applied load-first.
inline Gamma apply_matching(const MatchingNetwork& net, Gamma gamma, double z0) {
    if (net.elements.empty()) return gamma;
    if (std::abs(1.0 - gamma) < 1e-12)
        throw std::domain_error("apply_matching: load at open circuit cannot be transformed");
    Impedance z = impedance_from_gamma(gamma, z0);
    for (const auto& e : net.elements) z = apply_element(e, z, net.frequency);
    return gamma_from_impedance(z, z0);
}

}  // namespace bscat
