#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "bscat/impedance.hpp"
#include "bscat/modspace.hpp"
#include "bscat/tag.hpp"

namespace bscat {

namespace detail {

// Exact inverse of apply_matching: peel the ladder antenna-to-load.
inline Gamma unapply_matching(const MatchingNetwork& net, Gamma mapped, double z0) {
    if (net.elements.empty()) return mapped;
    if (std::abs(1.0 - mapped) < 1e-12)
        throw std::domain_error("unapply_matching: gamma at open circuit cannot be inverted");
    Impedance z = impedance_from_gamma(mapped, z0);
    const double w = kTwoPi * net.frequency;
    for (auto it = net.elements.rbegin(); it != net.elements.rend(); ++it) {
        if (!(it->value > 0.0)) throw std::invalid_argument("unapply_matching: element value must be positive");
        switch (it->kind) {
            case ElementKind::SeriesInductor:
                z -= Complex{0.0, w * it->value};
                break;
            case ElementKind::SeriesCapacitor:
                z += Complex{0.0, 1.0 / (w * it->value)};
                break;
            case ElementKind::ShuntInductor:
            case ElementKind::ShuntCapacitor: {
                if (std::abs(z) < 1e-15) break;
                Complex b = (it->kind == ElementKind::ShuntCapacitor) ? Complex{0.0, w * it->value}
                                                                      : Complex{0.0, -1.0 / (w * it->value)};
                z = 1.0 / (1.0 / z - b);
                break;
            }
        }
    }
    return gamma_from_impedance(z, z0);
}

}  // namespace detail

// Inverse of the front-end model: for each target sample x (unit-disk
// normalized baseband), place gamma = center + radius * x in the space,
// unwind the matching network and the combiner, and look up gate voltages.
// The clamp tolerance absorbs boundary-sampling granularity in the radius.
inline BiasWaveform compile_bias(const TagConfig& tag, const TransistorCurve& curve, const IQStream& target,
                                 const ModulationSpace& space) {
    if (target.empty()) throw std::invalid_argument("compile_bias: empty target");
    if (!(space.effective_radius > 0.0)) throw std::domain_error("compile_bias: space has no usable radius");
    double sin_q = std::sin(tag.q_path_phase);
    if (std::abs(sin_q) < 1e-6)
        throw std::domain_error("compile_bias: q path phase makes the combiner singular");
    if (!(tag.splitter_amplitude > 0.0))
        throw std::invalid_argument("compile_bias: splitter amplitude must be positive");

    const double rho_lo = (curve.r_min() - tag.z0) / (curve.r_min() + tag.z0);
    const double rho_hi = (curve.r_max() - tag.z0) / (curve.r_max() + tag.z0);
    const double rho_tol = 1e-4;
    const Complex rot_inv = std::polar(1.0, -tag.space_rotation);
    const double cos_q = std::cos(tag.q_path_phase);

    auto rho_to_voltage = [&](double rho) {
        if (rho < rho_lo - rho_tol || rho > rho_hi + rho_tol)
            throw std::domain_error("compile_bias: target outside the reachable set");
        rho = std::clamp(rho, rho_lo, rho_hi);
        double r = tag.z0 * (1.0 + rho) / (1.0 - rho);
        double v = voltage_of_resistance(curve, std::clamp(r, curve.r_min(), curve.r_max()));
        if (tag.dac_step_v > 0.0) {
            v = std::round(v / tag.dac_step_v) * tag.dac_step_v;
            v = std::clamp(v, curve.v_min(), curve.v_max());
        }
        return v;
    };

    BiasWaveform bias;
    bias.sample_rate = target.sample_rate;
    bias.v_i.resize(target.size());
    bias.v_q.resize(target.size());
    for (std::size_t n = 0; n < target.size(); ++n) {
        Complex x = target.samples[n];
        if (std::abs(x) > 1.0 + 1e-9)
            throw std::domain_error("compile_bias: target amplitude exceeds unit normalization");
        Gamma g = space.fixed_offset + space.effective_radius * x;
        g = detail::unapply_matching(space.network, g, tag.z0);
        Complex m = (g - tag.fixed_offset) * rot_inv / tag.splitter_amplitude;
        double rho_q = m.imag() / sin_q;
        double rho_i = m.real() - rho_q * cos_q;
        bias.v_i[n] = rho_to_voltage(rho_i);
        bias.v_q[n] = rho_to_voltage(rho_q);
    }
    return bias;
}

}  // namespace bscat
