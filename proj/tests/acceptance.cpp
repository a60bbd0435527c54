// End-to-end behavior gate. Runs one check per release criterion and prints
// a PASS/FAIL line for each; exits nonzero if any fail. argv[1] must be the
// path to the bscat CLI binary (used by the reproducibility check).
#include <bscat/bias.hpp>
#include <bscat/channel.hpp>
#include <bscat/impedance.hpp>
#include <bscat/iq.hpp>
#include <bscat/link.hpp>
#include <bscat/modems/lora.hpp>
#include <bscat/modems/protocol.hpp>
#include <bscat/modspace.hpp>
#include <bscat/tag.hpp>

#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdarg>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace bscat;

namespace {

int g_failures = 0;

void report(int id, const char* what, bool ok, const std::string& detail) {
    std::printf("%s %2d  %-52s %s\n", ok ? "PASS" : "FAIL", id, what, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

double rad2deg(double r) { return r * 180.0 / kPi; }

// --- 1: reflection coefficient of a textbook load -------------------------

void check_gamma_worked_example() {
    Gamma g = gamma_from_impedance({100.0, 50.0}, 50.0);
    double mag = std::abs(g);
    double ang = rad2deg(std::arg(g));
    bool ok = std::abs(mag - 0.4472135954999579) <= 1e-3 &&
              std::abs(ang - 26.56505117707799) <= 0.01;
    report(1, "reflection coefficient worked example", ok,
           fmt("|g|=%.6f angle=%.4f deg", mag, ang));
}

// --- 2: chirp phase accumulation and instantaneous frequency --------------

void check_chirp_law() {
    ChirpParams p{7, 125e3, 0.0, 0.0};
    const double fs = p.bw * 16;
    const double dt = 1.0 / fs;

    // Unwrapped phase accumulated over one full sweep. Per-sample steps stay
    // below pi at this oversampling, so arg() increments never alias.
    IQStream pair = lora_modulate({0, 0}, p, fs);
    const std::size_t n_sym = pair.size() / 2;
    double gain = 0.0;
    for (std::size_t n = 0; n < n_sym; ++n)
        gain += std::arg(pair.samples[n + 1] * std::conj(pair.samples[n]));
    const double want = kPi * static_cast<double>(p.n_chips());
    bool phase_ok = std::abs(gain - want) <= 1e-6 * want;

    IQStream wave = lora_modulate({0}, p, fs);
    const double k = p.chirp_rate();
    double worst = 0.0;
    for (std::size_t n = 1; n + 1 < wave.size(); ++n) {
        double f_hat = std::arg(wave.samples[n + 1] * std::conj(wave.samples[n - 1])) /
                       (2.0 * dt * kTwoPi);
        double f_want = p.f0 + k * static_cast<double>(n) * dt;
        worst = std::max(worst, std::abs(f_hat - f_want));
    }
    bool freq_ok = worst <= p.bw / 1000.0;
    report(2, "chirp phase gain and frequency ramp", phase_ok && freq_ok,
           fmt("gain=%.9g (want %.9g), max freq err %.3g Hz", gain, want, worst));
}

// --- 3: one chirp symbol through the bias compiler and reflection ---------

void check_symbol_round_trip() {
    ChirpParams p{};  // sf 7, bw 125 kHz, band-centred
    const double fs = p.bw * 2;
    IQStream target = lora_modulate({35}, p, fs);

    TagConfig tag;
    TransistorCurve curve = default_transistor_curve();
    ModulationSpace space = boundary_space(curve, tag);
    BiasWaveform bias = compile_bias(tag, curve, target, space);

    IQStream carrier;
    carrier.sample_rate = fs;
    carrier.samples.assign(target.size(), Complex{1.0, 0.0});

    IQStream clean = reflect(tag, curve, carrier, bias);
    double sig = 0.0;
    for (const auto& x : clean.samples) sig += std::norm(x);
    sig /= static_cast<double>(clean.size());

    int good = 0;
    const int runs = 100;
    for (int r = 0; r < runs; ++r) {
        IQStream rx = clean;
        add_awgn(rx, sig / 100.0, 7000u + static_cast<std::uint64_t>(r));  // 20 dB
        auto syms = lora_demodulate(rx, p);
        if (syms.size() == 1 && syms[0] == 35) ++good;
    }
    report(3, "bias-compiled chirp symbol round trip", good == runs,
           fmt("recovered 35 in %d/%d noisy runs", good, runs));
}

// --- 4: frequency plan verdicts and constellation geometry ----------------

void check_plans_and_constellations() {
    bool verdicts_ok =
        check_frequency_plan({1e6, 500e3, 1e6}) == PlanVerdict::Valid &&
        check_frequency_plan({4e4, 1e6, 2e6}) == PlanVerdict::SpinningConstellation &&
        check_frequency_plan({2e6, 250e3, 24e6}) == PlanVerdict::ConcentricCircles &&
        check_frequency_plan({1e6, 800e3, 1e6}) == PlanVerdict::SpinningConstellation;

    ConstellationSpec cs;
    cs.plan = {1e6, 500e3, 1e6};
    cs.channel.noise_psd = -std::numeric_limits<double>::infinity();
    ConstellationStats st = constellation_capture(cs, 11);

    bool counts_ok = true;
    for (auto c : st.counts) counts_ok = counts_ok && c == cs.n_symbols / 4;
    double worst_center = 0.0, worst_std = 0.0;
    for (int s = 0; s < 4; ++s) {
        worst_center = std::max(worst_center,
                                std::abs(st.centers[static_cast<std::size_t>(s)] -
                                         st.gain * qam4_point(s)));
        worst_std = std::max(worst_std, st.angular_std_deg[static_cast<std::size_t>(s)]);
    }
    bool valid_ok = counts_ok && worst_center <= 0.015 * st.gain && worst_std < 5.0 &&
                    std::abs(st.inter_group_rotation_deg) < 0.5;

    ConstellationSpec spin = cs;
    spin.plan = {4e4, 1e6, 2e6};
    ConstellationStats sp = constellation_capture(spin, 12);
    const double want_rot = 360.0 * spin.plan.f_b * 4.0 / spin.plan.f_m;
    bool spin_ok = std::abs(sp.inter_group_rotation_deg - want_rot) <= 2.0;

    report(4, "frequency plan verdicts and constellation geometry",
           verdicts_ok && valid_ok && spin_ok,
           fmt("std=%.2f deg, spin=%.1f deg (want %.1f)", worst_std,
               sp.inter_group_rotation_deg, want_rot));
}

// --- 5: every modem closes noiseless and degrades smoothly with SNR -------

struct NamedProtocol {
    const char* name;
    ProtocolConfig cfg;
    std::vector<double> snr_points;
};

std::vector<NamedProtocol> protocol_set() {
    return {
        {"lora", LoraConfig{7, 125e3, 2}, {-30, -24, -19, -14, -8}},
        {"zigbee", ZigbeeConfig{}, {-12, -8, -4, 0, 6}},
        {"ble", BleConfig{}, {-2, 2, 6, 10, 14}},
        {"wifi11b", Wifi11bConfig{}, {-6, -2, 2, 6, 10}},
        {"wifi_ofdm", WifiOfdmConfig{}, {0, 4, 8, 12, 16}},
    };
}

LinkSpec base_spec(const ProtocolConfig& cfg) {
    LinkSpec s;
    s.protocol = cfg;
    s.carrier = ToneSource{protocol_fs(cfg)};
    s.plan = make_default_plan(cfg);
    s.d_source_tag = 1.0;
    s.d_tag_rx = 2.0;
    return s;
}

void check_modem_correctness_and_snr() {
    bool all_ok = true;
    std::string detail;
    std::uint64_t seed = 500;
    for (const auto& np : protocol_set()) {
        LinkSpec clean = base_spec(np.cfg);
        clean.channel.noise_psd = -std::numeric_limits<double>::infinity();
        clean.payload_bits = 10000;
        clean.trials = 1;
        LinkReport rep = run_link(clean, seed++);
        bool clean_ok = rep.bit_errors == 0 && rep.prr == 1.0 && rep.bits_total >= 10000;

        LinkSpec noisy = base_spec(np.cfg);
        noisy.payload_bits = 200;
        noisy.trials = 50;
        auto rows = ber_sweep(noisy, SweepAxis::Snr, np.snr_points, seed++);
        bool sweep_ok = rows.size() == np.snr_points.size();
        for (const auto& r : rows) sweep_ok = sweep_ok && r.ok();
        if (sweep_ok) {
            for (std::size_t i = 0; i + 1 < rows.size(); ++i)
                sweep_ok = sweep_ok && rows[i + 1].report.ber <= rows[i].report.ber + 0.03;
            sweep_ok = sweep_ok && rows.front().report.ber > rows.back().report.ber &&
                       rows.back().report.ber <= 0.02;
        }
        if (!(clean_ok && sweep_ok)) {
            all_ok = false;
            detail += fmt("%s[clean=%d sweep=%d] ", np.name, clean_ok ? 1 : 0, sweep_ok ? 1 : 0);
        }
    }
    if (all_ok) detail = "5 modems: noiseless BER 0 over >=10^4 bits, BER falls with SNR";
    report(5, "modem correctness and SNR response", all_ok, detail);
}

// --- 6: spreading factor and bandwidth move the noise floor ---------------

void check_sf_and_bw_trends() {
    LinkSpec sf7 = base_spec(LoraConfig{7, 125e3, 2});
    sf7.channel.noise_psd = -145.0;
    sf7.d_tag_rx = 5.0;
    sf7.payload_bits = 512;
    sf7.trials = 30;
    LinkReport r7 = run_link(sf7, 2024);

    LinkSpec sf12 = base_spec(LoraConfig{12, 125e3, 2});
    sf12.channel.noise_psd = -145.0;
    sf12.d_tag_rx = 5.0;
    sf12.payload_bits = 128;
    sf12.trials = 8;
    LinkReport r12 = run_link(sf12, 2025);

    bool sf_ok = r7.ber >= 0.01 && r7.ber <= 0.10 && r12.ber < r7.ber &&
                 r12.ber_ci.high < r7.ber_ci.low;

    LinkSpec bw125 = base_spec(LoraConfig{10, 125e3, 2});
    bw125.channel.noise_psd = -137.0;
    bw125.d_tag_rx = 5.0;
    bw125.payload_bits = 256;
    bw125.trials = 15;
    LinkReport rlo = run_link(bw125, 2026);

    LinkSpec bw500 = base_spec(LoraConfig{10, 500e3, 2});
    bw500.channel.noise_psd = -137.0;
    bw500.d_tag_rx = 5.0;
    bw500.payload_bits = 256;
    bw500.trials = 15;
    LinkReport rhi = run_link(bw500, 2027);

    bool bw_ok = rhi.ber > rlo.ber && rlo.ber_ci.high < rhi.ber_ci.low;

    report(6, "spreading factor and bandwidth noise trends", sf_ok && bw_ok,
           fmt("sf7=%.3f sf12=%.4f | bw125=%.3f bw500=%.3f", r7.ber, r12.ber, rlo.ber,
               rhi.ber));
}

// --- 7: achievable range orders by protocol and shrinks behind a wall -----

void check_range_ordering() {
    std::array<double, 5> r0{}, r1{};
    std::string err;
    std::uint64_t seed = 700;
    int i = 0;
    for (const auto& np : protocol_set()) {
        LinkSpec s = base_spec(np.cfg);
        s.channel.noise_psd = -170.0;
        s.d_tag_rx = 0.01;
        s.payload_bits = 128;
        s.trials = 6;
        try {
            r0[static_cast<std::size_t>(i)] = range_search(s, 0.01, seed++, 12).max_distance;
            s.channel.n_walls = 1;
            r1[static_cast<std::size_t>(i)] = range_search(s, 0.01, seed++, 12).max_distance;
        } catch (const std::exception& e) {
            err += fmt("%s: %s; ", np.name, e.what());
        }
        ++i;
    }
    // Set order is lora, zigbee, ble, wifi11b, ofdm; expected reach order puts
    // the 11 Mchip/s DSSS link between zigbee and ble.
    bool order_ok = err.empty() && r0[0] > r0[1] && r0[1] > r0[3] && r0[3] > r0[2] &&
                    r0[2] > r0[4];
    bool wall_ok = err.empty();
    for (std::size_t k = 0; k < r0.size() && wall_ok; ++k) wall_ok = r1[k] < r0[k];
    report(7, "range ordering and wall penalty", order_ok && wall_ok,
           err.empty()
               ? fmt("m: lora %.1f>zigbee %.2f>11b %.2f>ble %.2f>ofdm %.3f; walls shrink",
                     r0[0], r0[1], r0[3], r0[2], r0[4])
               : err);
}

// --- 8: nominal data rates land near the usual headline numbers -----------

void check_nominal_rates() {
    struct Row {
        ProtocolConfig cfg;
        double want;
    };
    const std::vector<Row> rows = {
        {LoraConfig{7, 500e3, 2}, 27300.0},
        {ZigbeeConfig{}, 247100.0},
        {BleConfig{}, 986500.0},
    };
    bool ok = true;
    std::string detail;
    for (const auto& r : rows) {
        double got = nominal_rate(r.cfg);
        double rel = std::abs(got - r.want) / r.want;
        ok = ok && rel <= 0.02;
        detail += fmt("%.4g/%.4g ", got, r.want);
    }
    report(8, "nominal data rates within 2%", ok, detail);
}

// --- 9: burst carrier detection, capacity, cross-technology link ----------

void check_burst_carrier() {
    IQStream tmpl = stf_template(8e-6, 20e6);
    int hits = 0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
        std::mt19937_64 rng(9001u + static_cast<std::uint64_t>(t));
        std::size_t offset = 100 + rng() % 800;
        IQStream rx;
        rx.sample_rate = tmpl.sample_rate;
        rx.samples.assign(1200, Complex{0.0, 0.0});
        for (std::size_t n = 0; n < tmpl.size(); ++n) rx.samples[offset + n] = tmpl.samples[n];
        add_awgn(rx, 0.1, 9500u + static_cast<std::uint64_t>(t));  // 10 dB vs unit template
        std::size_t det = stf_detect(rx, tmpl, 0.3);
        if (det + 1 >= offset && det <= offset + 1) ++hits;
    }
    bool stf_ok = hits == trials;

    bool cap_ok = ampdu_capacity(7, 125e3, 72e-3) == 70;

    LinkSpec x;
    x.protocol = LoraConfig{7, 125e3, 16};
    x.carrier = WifiAmpduSource{};
    x.plan = {2e6, 62.5e3, 2e6};
    x.payload_bits = 128;
    x.trials = 20;
    x.d_source_tag = 1.0;
    x.d_tag_rx = 1.0;
    x.snr_override_db = 0.0;
    LinkReport rep = run_link(x, 903);
    bool x_ok = rep.prr >= 0.85;

    report(9, "burst detection, capacity, cross-technology link",
           stf_ok && cap_ok && x_ok,
           fmt("stf %d/%d, capacity %lld, chirps-over-bursts prr=%.2f at 0 dB", hits,
               trials, ampdu_capacity(7, 125e3, 72e-3), rep.prr));
}

// --- 10: matching search helps an offset tag; ladders stay lossless -------

void check_matching_and_ladders() {
    TagConfig tag;
    tag.fixed_offset = {0.3, 0.1};
    tag.space_rotation = 20.0 * kPi / 180.0;
    OptimizeResult res = optimize_matching(default_transistor_curve(), tag);
    bool opt_ok = res.radius > res.baseline_radius + 1e-6 && !res.network.elements.empty();

    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> re(1.0, 300.0), im(-300.0, 300.0), u(0.0, 1.0);
    const double f = 2.45e9;
    bool ladder_ok = true;
    for (int it = 0; it < 1000 && ladder_ok; ++it) {
        auto kind = static_cast<ElementKind>(rng() % 4);
        bool is_l = kind == ElementKind::SeriesInductor || kind == ElementKind::ShuntInductor;
        double lo = is_l ? 0.1e-9 : 0.02e-12, hi = is_l ? 50e-9 : 20e-12;
        MatchingElement el{kind, lo * std::pow(hi / lo, u(rng))};

        Impedance z{re(rng), im(rng)};
        Impedance z2 = apply_element(el, z, f);
        if (kind == ElementKind::SeriesInductor || kind == ElementKind::SeriesCapacitor)
            ladder_ok = std::abs(z2.real() - z.real()) <= 1e-12 * std::max(1.0, z.real());
        else
            ladder_ok = std::abs((1.0 / z2).real() - (1.0 / z).real()) <=
                        1e-12 * std::max(1.0, std::abs((1.0 / z).real()));

        Impedance zr{0.0, im(rng)};
        for (int e = 0; e < 3; ++e) {
            auto k2 = static_cast<ElementKind>(rng() % 4);
            bool l2 = k2 == ElementKind::SeriesInductor || k2 == ElementKind::ShuntInductor;
            double lo2 = l2 ? 0.1e-9 : 0.02e-12, hi2 = l2 ? 50e-9 : 20e-12;
            zr = apply_element({k2, lo2 * std::pow(hi2 / lo2, u(rng))}, zr, f);
        }
        ladder_ok = ladder_ok && std::abs(std::abs(gamma_from_impedance(zr, 50.0)) - 1.0) <= 1e-9;
    }
    report(10, "matching search gain and lossless ladder invariants", opt_ok && ladder_ok,
           fmt("radius %.6f -> %.6f, ladder checks %s", res.baseline_radius, res.radius,
               ladder_ok ? "clean" : "violated"));
}

// --- 11: every CLI command is byte-identical when rerun --------------------

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

bool run_cli(const std::string& cli, const std::string& args, const fs::path& dir,
             const std::string& prefix, std::string& err) {
    std::string cmd = quoted(cli) + " " + args + " --out " + quoted((dir / prefix).string()) +
                      " > /dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    if (rc != 0) {
        err += fmt("[%s exit %d] ", prefix.c_str(), rc);
        return false;
    }
    return true;
}

bool same_bytes(const fs::path& a, const fs::path& b) {
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    if (!fa || !fb) return false;
    std::ostringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    return sa.str() == sb.str();
}

void check_cli_reproducibility(const std::string& cli) {
    const fs::path root = fs::temp_directory_path() / "bscat_acceptance";
    std::error_code ec;
    fs::remove_all(root, ec);
    const fs::path da = root / "a", db = root / "b";
    fs::create_directories(da);
    fs::create_directories(db);

    const std::vector<std::pair<std::string, std::string>> cmds = {
        {"plan", "plan-check --f-b 1e6 --f-m 500e3 --f-s 1e6"},
        {"ms", "modspace"},
        {"sy", "synth --seed 5 --protocol zigbee --payload-bits 64"},
        {"lk", "link --seed 7 --protocol lora --payload-bits 128 --trials 3 "
               "--noise-psd -150 --d-tag-rx 5"},
        {"sw", "sweep --seed 9 --payload-bits 64 --trials 2 "
               "--set 'sweep.values=[-24,-18,-12]'"},
        {"rg", "range --seed 11 --noise-psd -165 --d-tag-rx 0.05 --trials 3 "
               "--payload-bits 64 --set range.bisection_steps=8"},
        {"cn", "constellation --seed 13 --no-noise"},
        {"xt", "xtech --seed 15 --trials 2 --snr-db 0 --payload-bits 64"},
    };

    std::string err;
    bool ran = true;
    for (const auto& [prefix, args] : cmds) {
        ran = run_cli(cli, args, da, prefix, err) && ran;
        ran = run_cli(cli, args, db, prefix, err) && ran;
    }

    std::size_t n_files = 0, n_same = 0;
    if (ran) {
        std::vector<fs::path> rels;
        for (const auto& e : fs::recursive_directory_iterator(da))
            if (e.is_regular_file()) rels.push_back(fs::relative(e.path(), da));
        n_files = rels.size();
        for (const auto& rel : rels) {
            if (same_bytes(da / rel, db / rel))
                ++n_same;
            else
                err += fmt("[differs: %s] ", rel.string().c_str());
        }
    }
    bool ok = ran && n_files >= 16 && n_same == n_files;
    report(11, "CLI reruns are byte-identical", ok,
           ok ? fmt("%zu files matched across %zu commands", n_same, cmds.size()) : err);
    fs::remove_all(root, ec);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: acceptance <path-to-bscat-cli>\n");
        return 2;
    }
    check_gamma_worked_example();
    check_chirp_law();
    check_symbol_round_trip();
    check_plans_and_constellations();
    check_modem_correctness_and_snr();
    check_sf_and_bw_trends();
    check_range_ordering();
    check_nominal_rates();
    check_burst_carrier();
    check_matching_and_ladders();
    check_cli_reproducibility(argv[1]);

    if (g_failures == 0) {
        std::printf("all criteria passed\n");
        return 0;
    }
    std::printf("%d criteria failed\n", g_failures);
    return 1;
}
