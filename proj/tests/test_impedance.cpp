#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "bscat/impedance.hpp"

using namespace bscat;
using Catch::Approx;

TEST_CASE("reflection coefficient of 100+j50 ohm load on 50 ohm line") {
    Gamma g = gamma_from_impedance({100.0, 50.0}, 50.0);
    REQUIRE(g.real() == Approx(0.4).margin(1e-12));
    REQUIRE(g.imag() == Approx(0.2).margin(1e-12));
    REQUIRE(std::abs(g) == Approx(0.4472135954999579).margin(1e-12));
    REQUIRE(std::arg(g) * 180.0 / kPi == Approx(26.56505117707799).margin(1e-9));
}

TEST_CASE("reflection coefficient anchor points") {
    REQUIRE(std::abs(gamma_from_impedance({50.0, 0.0}, 50.0)) == Approx(0.0).margin(1e-15));
    REQUIRE(gamma_from_impedance({0.0, 0.0}, 50.0).real() == Approx(-1.0).margin(1e-15));
    Gamma near_open = gamma_from_impedance({1e12, 0.0}, 50.0);
    REQUIRE(near_open.real() == Approx(1.0).margin(1e-9));
}

TEST_CASE("impedance from gamma inverts the map") {
    Impedance z = impedance_from_gamma({0.4, 0.2}, 50.0);
    REQUIRE(z.real() == Approx(100.0).margin(1e-9));
    REQUIRE(z.imag() == Approx(50.0).margin(1e-9));

    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> re(0.1, 5000.0), im(-5000.0, 5000.0);
    for (int i = 0; i < 10000; ++i) {
        Impedance zl{re(rng), im(rng)};
        Impedance back = impedance_from_gamma(gamma_from_impedance(zl, 50.0), 50.0);
        REQUIRE(std::abs(back - zl) <= 1e-9 * std::abs(zl) + 1e-12);
    }
}

TEST_CASE("passive loads stay inside the unit disk") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> re(0.0, 1e6), im(-1e6, 1e6), z0d(1.0, 300.0);
    for (int i = 0; i < 10000; ++i) {
        Gamma g = gamma_from_impedance({re(rng), im(rng)}, z0d(rng));
        REQUIRE(std::abs(g) <= 1.0 + 1e-12);
    }
}

TEST_CASE("shunt capacitor on a 50 ohm load gives 25-j25 ohms") {
    const double f = 2.45e9;
    MatchingElement c{ElementKind::ShuntCapacitor, 0.02 / (kTwoPi * f)};
    Impedance z = apply_element(c, {50.0, 0.0}, f);
    REQUIRE(z.real() == Approx(25.0).margin(1e-6));
    REQUIRE(z.imag() == Approx(-25.0).margin(1e-6));
}

TEST_CASE("series elements preserve resistance, shunt elements preserve conductance") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> re(0.01, 2000.0), im(-2000.0, 2000.0);
    std::uniform_real_distribution<double> lv(1e-10, 1e-6), cv(1e-14, 1e-9), fv(1e8, 1e10);
    for (int i = 0; i < 5000; ++i) {
        Impedance z{re(rng), im(rng)};
        double f = fv(rng);

        Impedance zs = apply_element({ElementKind::SeriesInductor, lv(rng)}, z, f);
        REQUIRE(zs.real() == Approx(z.real()).margin(1e-12 * std::abs(z.real()) + 1e-12));
        zs = apply_element({ElementKind::SeriesCapacitor, cv(rng)}, z, f);
        REQUIRE(zs.real() == Approx(z.real()).margin(1e-12 * std::abs(z.real()) + 1e-12));

        double g = (1.0 / z).real();
        Impedance zp = apply_element({ElementKind::ShuntCapacitor, cv(rng)}, z, f);
        REQUIRE((1.0 / zp).real() == Approx(g).margin(1e-12 * std::abs(g) + 1e-15));
        zp = apply_element({ElementKind::ShuntInductor, lv(rng)}, z, f);
        REQUIRE((1.0 / zp).real() == Approx(g).margin(1e-12 * std::abs(g) + 1e-15));
    }
}

TEST_CASE("lossless ladders keep the unit circle on the unit circle") {
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> xv(-3000.0, 3000.0);
    std::uniform_real_distribution<double> lv(1e-10, 1e-6), cv(1e-14, 1e-9);
    std::uniform_int_distribution<int> kind(0, 3), n_elem(1, 2);
    for (int i = 0; i < 2000; ++i) {
        MatchingNetwork net;
        net.frequency = 2.45e9;
        int n = n_elem(rng);
        for (int e = 0; e < n; ++e) {
            auto k = static_cast<ElementKind>(kind(rng));
            bool is_l = k == ElementKind::SeriesInductor || k == ElementKind::ShuntInductor;
            net.elements.push_back({k, is_l ? lv(rng) : cv(rng)});
        }
        Gamma g0 = gamma_from_impedance({0.0, xv(rng)}, 50.0);
        REQUIRE(std::abs(g0) == Approx(1.0).margin(1e-12));
        if (std::abs(1.0 - g0) < 1e-12) continue;
        Gamma g1 = apply_matching(net, g0, 50.0);
        REQUIRE(std::abs(g1) == Approx(1.0).margin(1e-9));
    }
}

TEST_CASE("lossless ladders preserve passivity") {
    std::mt19937_64 rng(456);
    std::uniform_real_distribution<double> re(0.0, 5000.0), im(-5000.0, 5000.0);
    std::uniform_real_distribution<double> lv(1e-10, 1e-6), cv(1e-14, 1e-9);
    std::uniform_int_distribution<int> kind(0, 3), n_elem(1, 2);
    for (int i = 0; i < 5000; ++i) {
        MatchingNetwork net;
        net.frequency = 915e6;
        int n = n_elem(rng);
        for (int e = 0; e < n; ++e) {
            auto k = static_cast<ElementKind>(kind(rng));
            bool is_l = k == ElementKind::SeriesInductor || k == ElementKind::ShuntInductor;
            net.elements.push_back({k, is_l ? lv(rng) : cv(rng)});
        }
        Gamma g0 = gamma_from_impedance({re(rng), im(rng)}, 50.0);
        Gamma g1 = apply_matching(net, g0, 50.0);
        REQUIRE(std::abs(g1) <= 1.0 + 1e-12);
    }
}

TEST_CASE("degenerate inputs are rejected") {
    REQUIRE_THROWS_AS(gamma_from_impedance({-1.0, 0.0}, 50.0), std::invalid_argument);
    REQUIRE_THROWS_AS(gamma_from_impedance({50.0, 0.0}, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(impedance_from_gamma({1.0, 0.0}, 50.0), std::domain_error);
    REQUIRE_THROWS_AS(apply_element({ElementKind::SeriesInductor, 0.0}, {50.0, 0.0}, 1e9), std::invalid_argument);
    REQUIRE_THROWS_AS(apply_element({ElementKind::SeriesInductor, -1e-9}, {50.0, 0.0}, 1e9), std::invalid_argument);
    MatchingNetwork net{{{ElementKind::SeriesInductor, 1e-9}}, 1e9};
    REQUIRE_THROWS_AS(apply_matching(net, {1.0, 0.0}, 50.0), std::domain_error);
}
