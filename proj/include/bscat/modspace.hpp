#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "bscat/impedance.hpp"
#include "bscat/tag.hpp"

namespace bscat {

// Set of reflection coefficients the front end can reach by sweeping both
// gate biases. boundary is the ordered image of the bias-plane perimeter
// (a closed polyline); fixed_offset is the image of the quiescent point and
// the center used for the inscribed-disk radius.
struct ModulationSpace {
    std::vector<Gamma> points;
    std::vector<Gamma> boundary;
    Gamma fixed_offset{0.0, 0.0};
    double effective_radius = 0.0;
    MatchingNetwork network;
};

namespace detail {

inline std::vector<double> bias_axis(const TransistorCurve& curve, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("bias_axis: grid step must be positive");
    double span = curve.v_max() - curve.v_min();
    auto n = static_cast<std::size_t>(std::floor(span / step + 1e-6));
    std::vector<double> v(n + 1);
    for (std::size_t k = 0; k <= n; ++k) v[k] = curve.v_min() + static_cast<double>(k) * step;
    v.back() = curve.v_max();
    return v;
}

inline Gamma mapped_gamma(const TagConfig& tag, const TransistorCurve& curve, const MatchingNetwork& net,
                          double v_i, double v_q) {
    Gamma g = gamma_of_bias(tag, curve, v_i, v_q);
    if (!net.elements.empty()) g = apply_matching(net, g, tag.z0);
    return g;
}

// Image of the bias-plane perimeter, walked counterclockwise.
inline std::vector<Gamma> boundary_walk(const TagConfig& tag, const TransistorCurve& curve,
                                        const MatchingNetwork& net, const std::vector<double>& axis) {
    std::vector<Gamma> b;
    const std::size_t n = axis.size();
    b.reserve(4 * (n - 1));
    for (std::size_t k = 0; k + 1 < n; ++k) b.push_back(mapped_gamma(tag, curve, net, axis[k], axis.front()));
    for (std::size_t k = 0; k + 1 < n; ++k) b.push_back(mapped_gamma(tag, curve, net, axis.back(), axis[k]));
    for (std::size_t k = n - 1; k > 0; --k) b.push_back(mapped_gamma(tag, curve, net, axis[k], axis.back()));
    for (std::size_t k = n - 1; k > 0; --k) b.push_back(mapped_gamma(tag, curve, net, axis.front(), axis[k]));
    return b;
}

inline double point_segment_distance(Complex p, Complex a, Complex b) {
    Complex ab = b - a;
    double len2 = std::norm(ab);
    if (len2 == 0.0) return std::abs(p - a);
    double t = std::clamp(((p - a) * std::conj(ab)).real() / len2, 0.0, 1.0);
    return std::abs(p - (a + t * ab));
}

// Even-odd ray crossing against the closed polyline.
inline bool point_in_polygon(Complex p, const std::vector<Gamma>& poly) {
    bool inside = false;
    const std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        double yi = poly[i].imag(), yj = poly[j].imag();
        double xi = poly[i].real(), xj = poly[j].real();
        if ((yi > p.imag()) != (yj > p.imag())) {
            double x_cross = xi + (p.imag() - yi) / (yj - yi) * (xj - xi);
            if (p.real() < x_cross) inside = !inside;
        }
    }
    return inside;
}

}  // namespace detail

// Radius of the largest disk centered on the space's quiescent point that
// stays inside the boundary. Zero when the center is on or outside it.
inline double effective_radius(const std::vector<Gamma>& boundary, Gamma center) {
    if (boundary.size() < 3) throw std::invalid_argument("effective_radius: boundary needs at least 3 points");
    double d = std::numeric_limits<double>::infinity();
    const std::size_t n = boundary.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++)
        d = std::min(d, detail::point_segment_distance(center, boundary[j], boundary[i]));
    if (d <= 1e-12) return 0.0;
    if (!detail::point_in_polygon(center, boundary)) return 0.0;
    return d;
}

inline double effective_radius(const ModulationSpace& space) {
    return effective_radius(space.boundary, space.fixed_offset);
}

// Full bias-plane sweep at the given grid step (volts per step along each
// gate axis).
inline ModulationSpace reachable_space(const TransistorCurve& curve, const TagConfig& tag,
                                       const MatchingNetwork& net = {}, double grid_step = 1e-3) {
    ModulationSpace space;
    space.network = net;
    auto axis = detail::bias_axis(curve, grid_step);
    space.points.reserve(axis.size() * axis.size());
    for (double vq : axis)
        for (double vi : axis) {
            Gamma g = detail::mapped_gamma(tag, curve, net, vi, vq);
            if (std::abs(g) > 1.0 + 1e-9)
                throw std::domain_error("reachable_space: configuration reaches outside the unit disk");
            space.points.push_back(g);
        }
    space.boundary = detail::boundary_walk(tag, curve, net, axis);
    space.fixed_offset = detail::mapped_gamma(tag, curve, net, voltage_of_resistance(curve, tag.z0),
                                              voltage_of_resistance(curve, tag.z0));
    space.effective_radius = effective_radius(space.boundary, space.fixed_offset);
    return space;
}

// Boundary-only evaluation used during matching search; n_per_edge bias
// samples along each perimeter edge.
inline ModulationSpace boundary_space(const TransistorCurve& curve, const TagConfig& tag,
                                      const MatchingNetwork& net = {}, std::size_t n_per_edge = 1024) {
    if (n_per_edge < 2) throw std::invalid_argument("boundary_space: need at least 2 samples per edge");
    ModulationSpace space;
    space.network = net;
    double step = (curve.v_max() - curve.v_min()) / static_cast<double>(n_per_edge);
    auto axis = detail::bias_axis(curve, step);
    space.boundary = detail::boundary_walk(tag, curve, net, axis);
    space.fixed_offset = detail::mapped_gamma(tag, curve, net, voltage_of_resistance(curve, tag.z0),
                                              voltage_of_resistance(curve, tag.z0));
    space.effective_radius = effective_radius(space.boundary, space.fixed_offset);
    return space;
}

inline std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0) || !(hi > lo) || n < 2) throw std::invalid_argument("log_spaced: bad range");
    std::vector<double> v(n);
    double a = std::log(lo), b = std::log(hi);
    for (std::size_t k = 0; k < n; ++k)
        v[k] = std::exp(a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1));
    return v;
}

struct OptimizeOptions {
    std::vector<std::vector<ElementKind>> topologies;
    std::vector<double> inductor_values;
    std::vector<double> capacitor_values;
    double frequency = 2.45e9;
    std::size_t boundary_samples_per_edge = 256;
};

inline OptimizeOptions default_optimize_options() {
    OptimizeOptions opt;
    const ElementKind kinds[4] = {ElementKind::SeriesInductor, ElementKind::SeriesCapacitor,
                                  ElementKind::ShuntInductor, ElementKind::ShuntCapacitor};
    for (auto k : kinds) opt.topologies.push_back({k});
    for (auto a : kinds)
        for (auto b : kinds) opt.topologies.push_back({a, b});
    opt.inductor_values = log_spaced(0.05e-9, 50e-9, 21);
    opt.capacitor_values = log_spaced(0.02e-12, 20e-12, 21);
    return opt;
}

struct OptimizeResult {
    MatchingNetwork network;
    double radius = 0.0;
    double baseline_radius = 0.0;
};

namespace detail {

inline const std::vector<double>& grid_for(const OptimizeOptions& opt, ElementKind k) {
    bool is_l = k == ElementKind::SeriesInductor || k == ElementKind::ShuntInductor;
    return is_l ? opt.inductor_values : opt.capacitor_values;
}

}  // namespace detail

// Grid search over candidate ladders for the network that maximizes the
// effective radius. Deterministic: candidates are scanned in a fixed order
// and only strictly better radii replace the incumbent.
inline OptimizeResult optimize_matching(const TransistorCurve& curve, const TagConfig& tag,
                                        const OptimizeOptions& opt = default_optimize_options()) {
    if (opt.topologies.empty()) throw std::invalid_argument("optimize_matching: no candidate topologies");
    if (opt.inductor_values.empty() || opt.capacitor_values.empty())
        throw std::invalid_argument("optimize_matching: value grids must be non-empty");
    if (!(opt.frequency > 0.0)) throw std::invalid_argument("optimize_matching: frequency must be positive");

    ModulationSpace raw = boundary_space(curve, tag, {}, opt.boundary_samples_per_edge);

    OptimizeResult best;
    best.baseline_radius = raw.effective_radius;
    best.radius = best.baseline_radius;
    best.network.frequency = opt.frequency;

    std::vector<Gamma> mapped(raw.boundary.size());
    auto evaluate = [&](const MatchingNetwork& net) {
        Gamma center;
        try {
            for (std::size_t i = 0; i < raw.boundary.size(); ++i)
                mapped[i] = apply_matching(net, raw.boundary[i], tag.z0);
            center = apply_matching(net, raw.fixed_offset, tag.z0);
        } catch (const std::domain_error&) {
            return;
        }
        double r = effective_radius(mapped, center);
        if (r > best.radius) {
            best.radius = r;
            best.network = net;
        }
    };

    for (const auto& topo : opt.topologies) {
        if (topo.empty() || topo.size() > 2)
            throw std::invalid_argument("optimize_matching: topologies must have 1 or 2 elements");
        MatchingNetwork net;
        net.frequency = opt.frequency;
        if (topo.size() == 1) {
            for (double v : detail::grid_for(opt, topo[0])) {
                net.elements = {{topo[0], v}};
                evaluate(net);
            }
        } else {
            for (double v0 : detail::grid_for(opt, topo[0]))
                for (double v1 : detail::grid_for(opt, topo[1])) {
                    net.elements = {{topo[0], v0}, {topo[1], v1}};
                    evaluate(net);
                }
        }
    }
    return best;
}

}  // namespace bscat
