// bscat: command-line front end for the backscatter link simulator.
//
// Every subcommand resolves its settings as defaults < --config file < flags,
// echoes the resolved configuration into its outputs, and stamps them with a
// config hash so a run can be reproduced byte for byte from any output file.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bscat/bias.hpp"
#include "bscat/channel.hpp"
#include "bscat/io.hpp"
#include "bscat/link.hpp"
#include "bscat/modspace.hpp"

using nlohmann::json;
using namespace bscat;

namespace {

constexpr const char* kToolName = "bscat";
constexpr const char* kToolVersion = "0.1.0";

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

json provenance(const json& cfg) {
    return {{"tool", kToolName}, {"version", kToolVersion}, {"config_hash", hex64(fnv1a64(cfg.dump()))}};
}

std::vector<std::string> csv_provenance(const json& cfg) {
    return {std::string(kToolName) + " " + kToolVersion, "config_hash " + hex64(fnv1a64(cfg.dump()))};
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << j.dump(2) << "\n";
    if (!f) throw std::runtime_error("write failed on " + path);
}

json load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config " + path);
    json j;
    f >> j;
    return j;
}

void deep_merge(json& base, const json& overlay) {
    if (!overlay.is_object() || !base.is_object()) {
        base = overlay;
        return;
    }
    for (auto it = overlay.begin(); it != overlay.end(); ++it) {
        if (base.contains(it.key()) && base[it.key()].is_object() && it.value().is_object())
            deep_merge(base[it.key()], it.value());
        else
            base[it.key()] = it.value();
    }
}

void apply_set_overrides(json& cfg, const std::vector<std::string>& sets) {
    for (const auto& kv : sets) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw std::runtime_error("--set expects key=value, got " + kv);
        std::string key = kv.substr(0, eq);
        std::string val = kv.substr(eq + 1);
        for (auto& c : key)
            if (c == '.') c = '/';
        json parsed;
        try {
            parsed = json::parse(val);
        } catch (const json::parse_error&) {
            parsed = val;
        }
        cfg[json::json_pointer("/" + key)] = parsed;
    }
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(std::stod(tok));
    if (out.empty()) throw std::runtime_error("empty list: " + s);
    return out;
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    for (double v : parse_double_list(s)) out.push_back(static_cast<int>(std::llround(v)));
    return out;
}

// ---- config -> simulator structs ----

ProtocolConfig protocol_from_json(const json& p) {
    ProtocolId id = protocol_id_from_name(p.value("id", std::string("lora")));
    switch (id) {
        case ProtocolId::Lora: {
            LoraConfig c;
            c.sf = p.value("sf", c.sf);
            c.bw = p.value("bw", c.bw);
            c.osr = p.value("osr", c.osr);
            return c;
        }
        case ProtocolId::Zigbee: {
            ZigbeeConfig c;
            c.chip_rate = p.value("chip_rate", c.chip_rate);
            c.osr = p.value("osr", c.osr);
            return c;
        }
        case ProtocolId::Ble: {
            BleConfig c;
            c.bit_rate = p.value("bit_rate", c.bit_rate);
            c.bt = p.value("bt", c.bt);
            c.mod_index = p.value("mod_index", c.mod_index);
            c.osr = p.value("osr", c.osr);
            return c;
        }
        case ProtocolId::Wifi11b: {
            Wifi11bConfig c;
            c.chip_rate = p.value("chip_rate", c.chip_rate);
            c.barker_len = p.value("barker_len", c.barker_len);
            c.osr = p.value("osr", c.osr);
            return c;
        }
        case ProtocolId::WifiOfdm: {
            WifiOfdmConfig c;
            c.params.constellation = constellation_from_name(p.value("constellation", std::string("qpsk")));
            c.params.sample_rate = p.value("sample_rate", c.params.sample_rate);
            return c;
        }
    }
    throw std::runtime_error("unreachable protocol id");
}

CarrierSource carrier_from_json(const json& c, const ProtocolConfig& proto) {
    std::string kind = c.value("kind", std::string("tone"));
    if (kind == "tone") {
        ToneSource t;
        t.f_b = c.value("f_b", protocol_fs(proto));
        return t;
    }
    if (kind == "wifi_ampdu") {
        WifiAmpduSource w;
        w.stf_duration = c.value("stf_duration", w.stf_duration);
        w.subframe_duration = c.value("subframe_duration", w.subframe_duration);
        w.n_subframes = c.value("n_subframes", w.n_subframes);
        w.tone_offset = c.value("tone_offset", w.tone_offset);
        w.aggregated = c.value("aggregated", w.aggregated);
        w.gap_seed = c.value("gap_seed", w.gap_seed);
        return w;
    }
    throw std::runtime_error("unknown carrier kind: " + kind);
}

FrequencyPlan plan_from_json(const json& cfg, const ProtocolConfig& proto) {
    FrequencyPlan def = make_default_plan(proto);
    if (!cfg.contains("plan")) return def;
    const json& p = cfg["plan"];
    return {p.value("f_b", def.f_b), p.value("f_m", def.f_m), p.value("f_s", def.f_s)};
}

TagSetup tag_from_json(const json& t) {
    TagSetup s;
    s.config.z0 = t.value("z0", s.config.z0);
    s.config.splitter_amplitude = t.value("splitter_amplitude", s.config.splitter_amplitude);
    if (t.contains("q_path_phase_deg")) s.config.q_path_phase = t["q_path_phase_deg"].get<double>() * kPi / 180.0;
    s.config.fixed_offset = {t.value("fixed_offset_re", 0.0), t.value("fixed_offset_im", 0.0)};
    if (t.contains("space_rotation_deg")) s.config.space_rotation = t["space_rotation_deg"].get<double>() * kPi / 180.0;
    s.config.shift_freq = t.value("shift_freq", 0.0);
    s.config.shift_mode = shift_mode_from_name(t.value("shift_mode", std::string("ideal")));
    s.config.dac_step_v = t.value("dac_step_v", 0.0);
    if (t.contains("curve_csv") && !t["curve_csv"].get<std::string>().empty())
        s.curve = read_transistor_curve_csv(t["curve_csv"].get<std::string>());
    if (t.contains("matching"))
        for (const auto& e : t["matching"])
            s.matching.elements.push_back(
                {element_kind_from_name(e.at("kind").get<std::string>()), e.at("value").get<double>()});
    s.matching.frequency = t.value("matching_frequency", 2.45e9);
    return s;
}

ChannelConfig channel_from_json(const json& c) {
    ChannelConfig ch;
    ch.carrier_freq = c.value("carrier_freq", ch.carrier_freq);
    ch.path_loss_exponent = c.value("path_loss_exponent", ch.path_loss_exponent);
    ch.wall_loss_db = c.value("wall_loss_db", ch.wall_loss_db);
    ch.n_walls = c.value("n_walls", ch.n_walls);
    if (c.contains("noise_psd"))
        ch.noise_psd = c["noise_psd"].is_null() ? -std::numeric_limits<double>::infinity()
                                                : c["noise_psd"].get<double>();
    ch.rng_seed = c.value("rng_seed", ch.rng_seed);
    return ch;
}

LinkSpec link_spec_from_config(const json& cfg) {
    LinkSpec s;
    s.protocol = protocol_from_json(cfg.value("protocol", json::object()));
    s.carrier = carrier_from_json(cfg.value("carrier", json::object()), s.protocol);
    s.plan = plan_from_json(cfg, s.protocol);
    s.tag = tag_from_json(cfg.value("tag", json::object()));
    s.channel = channel_from_json(cfg.value("channel", json::object()));
    json l = cfg.value("link", json::object());
    s.d_source_tag = l.value("d_source_tag", s.d_source_tag);
    s.d_tag_rx = l.value("d_tag_rx", s.d_tag_rx);
    s.payload_bits = l.value("payload_bits", std::uint64_t{512});
    s.trials = l.value("trials", std::uint64_t{20});
    if (l.contains("snr_override_db") && !l["snr_override_db"].is_null())
        s.snr_override_db = l["snr_override_db"].get<double>();
    s.allow_invalid_plan = l.value("allow_invalid_plan", false);
    return s;
}

// ---- struct -> json ----

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(); }

json interval_to_json(const Interval& i) { return {{"low", i.low}, {"high", i.high}}; }

json report_to_json(const LinkReport& r) {
    json j;
    j["ber"] = r.ber;
    j["ber_ci"] = interval_to_json(r.ber_ci);
    j["throughput_bps"] = r.throughput_bps;
    j["prr"] = r.prr;
    j["prr_ci"] = interval_to_json(r.prr_ci);
    j["snr_db"] = finite_or_null(r.snr_db);
    j["bits_total"] = r.bits_total;
    j["bit_errors"] = r.bit_errors;
    j["frames_total"] = r.frames_total;
    j["frames_passed"] = r.frames_passed;
    j["trial_seeds"] = r.trial_seeds;
    return j;
}

json network_to_json(const MatchingNetwork& net) {
    json arr = json::array();
    for (const auto& e : net.elements) arr.push_back({{"kind", element_kind_name(e.kind)}, {"value", e.value}});
    return arr;
}

void write_iq_with_sidecar(const std::string& prefix, const IQStream& s, const std::string& what,
                           const json& cfg) {
    write_iq(prefix + ".iq", s);
    json side;
    side["sample_rate"] = s.sample_rate;
    side["n_samples"] = s.size();
    side["format"] = "interleaved float32 little-endian I,Q";
    side["description"] = what;
    side["provenance"] = provenance(cfg);
    write_json_file(prefix + ".iq.json", side);
}

// ---- subcommands ----

int cmd_plan_check(const json& cfg, const std::string& out) {
    FrequencyPlan plan{cfg.at("plan").at("f_b").get<double>(), cfg.at("plan").at("f_m").get<double>(),
                       cfg.at("plan").at("f_s").get<double>()};
    PlanVerdict v = check_frequency_plan(plan);
    json j;
    j["command"] = "plan-check";
    j["config"] = cfg;
    j["provenance"] = provenance(cfg);
    j["result"] = {{"verdict", plan_verdict_name(v)},
                   {"f_b", plan.f_b},
                   {"f_m", plan.f_m},
                   {"f_s", plan.f_s}};
    if (!out.empty()) write_json_file(out + ".json", j);
    std::cout << "verdict: " << plan_verdict_name(v) << "\n";
    return 0;
}

int cmd_modspace(const json& cfg, const std::string& out) {
    TagSetup tag = tag_from_json(cfg.value("tag", json::object()));
    json m = cfg.value("modspace", json::object());
    bool optimize = m.value("optimize", false);

    json result;
    MatchingNetwork net = tag.matching;
    if (optimize) {
        OptimizeOptions opt = default_optimize_options();
        opt.frequency = m.value("frequency", opt.frequency);
        OptimizeResult best = optimize_matching(tag.curve, tag.config, opt);
        net = best.network;
        result["baseline_radius"] = best.baseline_radius;
        result["optimized_radius"] = best.radius;
        result["network"] = network_to_json(best.network);
    }

    ModulationSpace space = boundary_space(tag.curve, tag.config, net,
                                           m.value("boundary_samples_per_edge", std::uint64_t{1024}));
    result["effective_radius"] = space.effective_radius;
    result["fixed_offset_re"] = space.fixed_offset.real();
    result["fixed_offset_im"] = space.fixed_offset.imag();
    result["boundary_points"] = space.boundary.size();

    std::vector<std::string> rows;
    rows.reserve(space.boundary.size());
    for (const auto& g : space.boundary)
        rows.push_back(format_double(g.real()) + "," + format_double(g.imag()));
    write_csv(out + "_boundary.csv", csv_provenance(cfg), "re,im", rows);

    json j;
    j["command"] = "modspace";
    j["config"] = cfg;
    j["provenance"] = provenance(cfg);
    j["result"] = result;
    write_json_file(out + ".json", j);
    std::cout << "effective_radius: " << format_double(space.effective_radius) << "\n";
    return 0;
}

int cmd_synth(const json& cfg, const std::string& out, std::uint64_t seed) {
    ProtocolConfig proto = protocol_from_json(cfg.value("protocol", json::object()));
    TagSetup tag = tag_from_json(cfg.value("tag", json::object()));
    std::uint64_t payload_bits = cfg.value("link", json::object()).value("payload_bits", std::uint64_t{256});

    std::mt19937_64 rng(seed);
    std::size_t mult = protocol_bit_multiple(proto);
    std::size_t n_bits = ((payload_bits + mult - 1) / mult) * mult;
    std::vector<std::uint8_t> bits(n_bits);
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1u);

    IQStream target = protocol_modulate(proto, bits);
    ModulationSpace space = boundary_space(tag.curve, tag.config, tag.matching);
    BiasWaveform bias = compile_bias(tag.config, tag.curve, target, space);

    IQStream carrier;
    carrier.sample_rate = target.sample_rate;
    carrier.samples.assign(target.size(), Complex(1.0, 0.0));
    IQStream reflected = reflect(tag.config, tag.curve, carrier, bias, tag.matching);

    write_iq_with_sidecar(out + "_target", target, "modem waveform the tag is programmed to reflect", cfg);
    write_iq_with_sidecar(out + "_reflected", reflected, "tag reflection of a unit carrier", cfg);
    write_bias_csv(out + "_bias.csv", bias, csv_provenance(cfg));

    double err = 0.0;
    for (std::size_t n = 0; n < target.size(); ++n)
        err = std::max(err, std::abs(reflected.samples[n] -
                                     (space.fixed_offset + space.effective_radius * target.samples[n])));

    json j;
    j["command"] = "synth";
    j["config"] = cfg;
    j["provenance"] = provenance(cfg);
    j["result"] = {{"protocol", protocol_name(proto)},
                   {"sample_rate", target.sample_rate},
                   {"n_bits", n_bits},
                   {"n_samples", target.size()},
                   {"duration_s", target.duration()},
                   {"effective_radius", space.effective_radius},
                   {"max_reflection_error", err},
                   {"seed", seed}};
    write_json_file(out + ".json", j);
    std::cout << "synthesized " << target.size() << " samples at " << format_double(target.sample_rate)
              << " Hz, max reflection error " << format_double(err) << "\n";
    return 0;
}

int cmd_link(const json& cfg, const std::string& out, std::uint64_t seed, const char* name) {
    LinkSpec spec = link_spec_from_config(cfg);
    LinkReport rep = run_link(spec, seed);
    json j;
    j["command"] = name;
    j["config"] = cfg;
    j["provenance"] = provenance(cfg);
    j["result"] = report_to_json(rep);
    j["result"]["seed"] = seed;
    j["result"]["protocol"] = protocol_name(spec.protocol);
    write_json_file(out + ".json", j);
    std::cout << "ber " << format_double(rep.ber) << "  prr " << format_double(rep.prr) << "  snr_db "
              << format_double(rep.snr_db) << "\n";
    return 0;
}

int cmd_sweep(const json& cfg, const std::string& out, std::uint64_t seed) {
    LinkSpec spec = link_spec_from_config(cfg);
    json sw = cfg.at("sweep");
    SweepAxis axis = sweep_axis_from_name(sw.at("axis").get<std::string>());
    std::vector<double> values = sw.at("values").get<std::vector<double>>();

    auto rows = ber_sweep(spec, axis, values, seed);

    std::vector<std::string> csv_rows;
    json jrows = json::array();
    for (const auto& r : rows) {
        json one;
        one["value"] = r.value;
        if (r.ok()) {
            one["report"] = report_to_json(r.report);
            one["report"].erase("trial_seeds");
        } else {
            one["error"] = r.error;
        }
        jrows.push_back(one);
        std::string err = r.error;
        for (auto& c : err)
            if (c == ',' || c == '\n') c = ';';
        csv_rows.push_back(format_double(r.value) + "," +
                           (r.ok() ? format_double(r.report.ber) : "") + "," +
                           (r.ok() ? format_double(r.report.ber_ci.low) : "") + "," +
                           (r.ok() ? format_double(r.report.ber_ci.high) : "") + "," +
                           (r.ok() ? format_double(r.report.prr) : "") + "," +
                           (r.ok() ? format_double(r.report.throughput_bps) : "") + "," +
                           (r.ok() ? format_double(r.report.snr_db) : "") + "," + err);
    }
    write_csv(out + "_rows.csv", csv_provenance(cfg),
              "value,ber,ber_ci_low,ber_ci_high,prr,throughput_bps,snr_db,error", csv_rows);

    json j;
    j["command"] = "sweep";
    j["config"] = cfg;
    j["provenance"] = provenance(cfg);
    j["result"] = {{"axis", sweep_axis_name(axis)}, {"rows", jrows}, {"seed", seed}};
    write_json_file(out + ".json", j);
    std::cout << "swept " << sweep_axis_name(axis) << " over " << values.size() << " points\n";
    return 0;
}

int cmd_range(const json& cfg, const std::string& out, std::uint64_t seed) {
    LinkSpec spec = link_spec_from_config(cfg);
    json rg = cfg.value("range", json::object());
    double ber_target = rg.value("ber_target", 0.01);
    int steps = rg.value("bisection_steps", 20);

    RangeResult r = range_search(spec, ber_target, seed, steps);
    json j;
    j["command"] = "range";
    j["config"] = cfg;
    j["provenance"] = provenance(cfg);
    j["result"] = {{"max_distance_m", r.max_distance},
                   {"ber", r.ber},
                   {"ber_ci", interval_to_json(r.ber_ci)},
                   {"ber_target", ber_target},
                   {"evaluations", r.evaluations},
                   {"protocol", protocol_name(spec.protocol)},
                   {"seed", seed}};
    write_json_file(out + ".json", j);
    std::cout << "max_distance_m " << format_double(r.max_distance) << "\n";
    return 0;
}

int cmd_constellation(const json& cfg, const std::string& out, std::uint64_t seed) {
    ConstellationSpec spec;
    json c = cfg.value("constellation", json::object());
    spec.plan = {cfg.at("plan").at("f_b").get<double>(), cfg.at("plan").at("f_m").get<double>(),
                 cfg.at("plan").at("f_s").get<double>()};
    spec.tag = tag_from_json(cfg.value("tag", json::object()));
    spec.channel = channel_from_json(cfg.value("channel", json::object()));
    spec.d_source_tag = c.value("d_source_tag", spec.d_source_tag);
    spec.d_tag_rx = c.value("d_tag_rx", spec.d_tag_rx);
    if (c.contains("pattern")) spec.pattern = c["pattern"].get<std::vector<int>>();
    spec.n_symbols = c.value("n_symbols", std::uint64_t{64});
    spec.allow_invalid_plan = c.value("allow_invalid_plan", true);

    ConstellationStats st = constellation_capture(spec, seed);

    std::vector<std::string> rows;
    rows.reserve(st.points.size());
    for (std::size_t k = 0; k < st.points.size(); ++k)
        rows.push_back(std::to_string(k) + "," + std::to_string(st.tx_symbols[k]) + "," +
                       std::to_string(st.clusters[k]) + "," + format_double(st.points[k].real()) + "," +
                       format_double(st.points[k].imag()));
    write_csv(out + "_points.csv", csv_provenance(cfg), "index,tx_symbol,cluster,re,im", rows);

    json centers = json::array();
    json stds = json::array();
    json counts = json::array();
    for (int i = 0; i < 4; ++i) {
        centers.push_back({{"re", st.centers[i].real()}, {"im", st.centers[i].imag()}});
        stds.push_back(st.angular_std_deg[i]);
        counts.push_back(st.counts[i]);
    }
    json j;
    j["command"] = "constellation";
    j["config"] = cfg;
    j["provenance"] = provenance(cfg);
    j["result"] = {{"verdict", plan_verdict_name(check_frequency_plan(spec.plan))},
                   {"centers", centers},
                   {"angular_std_deg", stds},
                   {"cluster_counts", counts},
                   {"inter_group_rotation_deg", st.inter_group_rotation_deg},
                   {"gain", st.gain},
                   {"n_points", st.points.size()},
                   {"seed", seed}};
    write_json_file(out + ".json", j);
    std::cout << "rotation_deg " << format_double(st.inter_group_rotation_deg) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"programmable backscatter link simulator"};
    app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
    app.require_subcommand(1);

    struct CommonArgs {
        std::string config_path;
        std::string out;
        std::uint64_t seed = 0;
        std::vector<std::string> sets;
        // optional shared overrides
        std::optional<std::string> protocol;
        std::optional<int> sf;
        std::optional<double> bw;
        std::optional<int> osr;
        std::optional<double> d_tag_rx;
        std::optional<double> d_source_tag;
        std::optional<std::uint64_t> trials;
        std::optional<std::uint64_t> payload_bits;
        std::optional<double> noise_psd;
        bool no_noise = false;
        std::optional<double> snr_db;
        std::optional<double> f_b, f_m, f_s;
        std::optional<double> shift_freq;
        std::optional<std::string> shift_mode;
        std::optional<int> n_subframes;
    };

    auto add_common = [](CLI::App* sub, CommonArgs& a, bool needs_seed) {
        sub->add_option("--config", a.config_path, "JSON config file");
        sub->add_option("-o,--out", a.out, "output path prefix")->required();
        auto* seed = sub->add_option("--seed", a.seed, "base RNG seed");
        if (needs_seed) seed->required();
        sub->add_option("--set", a.sets, "override any config key, e.g. --set link.trials=50");
        sub->add_option("--protocol", a.protocol, "lora | zigbee | ble | wifi11b | wifi_ofdm");
        sub->add_option("--sf", a.sf, "chirp spreading factor");
        sub->add_option("--bw", a.bw, "chirp bandwidth in Hz");
        sub->add_option("--osr", a.osr, "modem oversampling ratio");
        sub->add_option("--d-tag-rx", a.d_tag_rx, "tag to receiver distance in m");
        sub->add_option("--d-source-tag", a.d_source_tag, "source to tag distance in m");
        sub->add_option("--trials", a.trials, "Monte-Carlo trials");
        sub->add_option("--payload-bits", a.payload_bits, "payload bits per trial");
        sub->add_option("--noise-psd", a.noise_psd, "receiver noise density in dB per Hz");
        sub->add_flag("--no-noise", a.no_noise, "disable receiver noise");
        sub->add_option("--snr-db", a.snr_db, "pin the receiver SNR instead of using noise-psd");
        sub->add_option("--f-b", a.f_b, "carrier tone frequency in Hz");
        sub->add_option("--f-m", a.f_m, "highest modulation frequency in Hz");
        sub->add_option("--f-s", a.f_s, "receiver sampling rate in Hz");
        sub->add_option("--shift-freq", a.shift_freq, "tag sideband shift in Hz");
        sub->add_option("--shift-mode", a.shift_mode, "ideal | square");
        sub->add_option("--n-subframes", a.n_subframes, "subframes per carrier burst");
    };

    auto resolve = [](const CommonArgs& a, json base) {
        json cfg = std::move(base);
        if (!a.config_path.empty()) deep_merge(cfg, load_config_file(a.config_path));
        if (a.protocol) cfg["protocol"]["id"] = *a.protocol;
        if (a.sf) cfg["protocol"]["sf"] = *a.sf;
        if (a.bw) cfg["protocol"]["bw"] = *a.bw;
        if (a.osr) cfg["protocol"]["osr"] = *a.osr;
        if (a.d_tag_rx) cfg["link"]["d_tag_rx"] = *a.d_tag_rx;
        if (a.d_source_tag) cfg["link"]["d_source_tag"] = *a.d_source_tag;
        if (a.trials) cfg["link"]["trials"] = *a.trials;
        if (a.payload_bits) cfg["link"]["payload_bits"] = *a.payload_bits;
        if (a.noise_psd) cfg["channel"]["noise_psd"] = *a.noise_psd;
        if (a.no_noise) cfg["channel"]["noise_psd"] = nullptr;
        if (a.snr_db) cfg["link"]["snr_override_db"] = *a.snr_db;
        if (a.f_b) cfg["plan"]["f_b"] = *a.f_b;
        if (a.f_m) cfg["plan"]["f_m"] = *a.f_m;
        if (a.f_s) cfg["plan"]["f_s"] = *a.f_s;
        if (a.shift_freq) cfg["tag"]["shift_freq"] = *a.shift_freq;
        if (a.shift_mode) cfg["tag"]["shift_mode"] = *a.shift_mode;
        if (a.n_subframes) cfg["carrier"]["n_subframes"] = *a.n_subframes;
        apply_set_overrides(cfg, a.sets);
        return cfg;
    };

    CommonArgs plan_args, space_args, synth_args, link_args, sweep_args, range_args, con_args, xtech_args;
    std::string sweep_axis, sweep_values, con_pattern;
    std::optional<std::uint64_t> con_symbols;
    std::optional<double> range_target;
    bool space_optimize = false;

    auto* c_plan = app.add_subcommand("plan-check", "classify a carrier/modulation/sampling frequency plan");
    add_common(c_plan, plan_args, false);

    auto* c_space = app.add_subcommand("modspace", "map the reachable reflection region and its usable radius");
    add_common(c_space, space_args, false);
    c_space->add_flag("--optimize", space_optimize, "search two-element matching ladders for a larger radius");

    auto* c_synth = app.add_subcommand("synth", "compile a modem waveform into tag bias voltages");
    add_common(c_synth, synth_args, true);

    auto* c_link = app.add_subcommand("link", "run one Monte-Carlo link and report BER/PRR/throughput");
    add_common(c_link, link_args, true);

    auto* c_sweep = app.add_subcommand("sweep", "run links across one swept axis");
    add_common(c_sweep, sweep_args, true);
    c_sweep->add_option("--axis", sweep_axis, "d_tag_rx | d_source_tag | sf | bw | snr");
    c_sweep->add_option("--values", sweep_values, "comma-separated axis values");

    auto* c_range = app.add_subcommand("range", "bisect for the farthest distance under a BER target");
    add_common(c_range, range_args, true);
    c_range->add_option("--ber-target", range_target, "BER threshold defining the edge of coverage");

    auto* c_con = app.add_subcommand("constellation", "capture receiver symbols under a frequency plan");
    add_common(c_con, con_args, true);
    c_con->add_option("--pattern", con_pattern, "comma-separated symbol pattern, multiple of 4");
    c_con->add_option("--n-symbols", con_symbols, "symbols to capture");

    auto* c_xtech = app.add_subcommand("xtech", "chirp link riding on an emulated Wi-Fi frame burst");
    add_common(c_xtech, xtech_args, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*c_plan) {
            json base;
            base["plan"] = {{"f_b", 1e6}, {"f_m", 500e3}, {"f_s", 1e6}};
            return cmd_plan_check(resolve(plan_args, base), plan_args.out);
        }
        if (*c_space) {
            json base = json::object();
            if (space_optimize) base["modspace"]["optimize"] = true;
            return cmd_modspace(resolve(space_args, base), space_args.out);
        }
        if (*c_synth) return cmd_synth(resolve(synth_args, json::object()), synth_args.out, synth_args.seed);
        if (*c_link) return cmd_link(resolve(link_args, json::object()), link_args.out, link_args.seed, "link");
        if (*c_sweep) {
            json base;
            base["sweep"] = {{"axis", "snr"}, {"values", {-30.0, -24.0, -18.0, -12.0, -6.0}}};
            json cfg = resolve(sweep_args, base);
            if (!sweep_axis.empty()) cfg["sweep"]["axis"] = sweep_axis;
            if (!sweep_values.empty()) cfg["sweep"]["values"] = parse_double_list(sweep_values);
            return cmd_sweep(cfg, sweep_args.out, sweep_args.seed);
        }
        if (*c_range) {
            json cfg = resolve(range_args, json::object());
            if (range_target) cfg["range"]["ber_target"] = *range_target;
            return cmd_range(cfg, range_args.out, range_args.seed);
        }
        if (*c_con) {
            json base;
            base["plan"] = {{"f_b", 1e6}, {"f_m", 500e3}, {"f_s", 1e6}};
            json cfg = resolve(con_args, base);
            if (!con_pattern.empty()) cfg["constellation"]["pattern"] = parse_int_list(con_pattern);
            if (con_symbols) cfg["constellation"]["n_symbols"] = *con_symbols;
            return cmd_constellation(cfg, con_args.out, con_args.seed);
        }
        if (*c_xtech) {
            json base;
            base["protocol"] = {{"id", "lora"}, {"sf", 7}, {"bw", 125e3}, {"osr", 16}};
            base["carrier"] = {{"kind", "wifi_ampdu"}};
            base["link"] = {{"payload_bits", 128}, {"trials", 20}};
            json cfg = resolve(xtech_args, base);
            // burst plan: tone rides at the receiver rate, chirp fills half band
            if (!cfg.contains("plan")) {
                ProtocolConfig proto = protocol_from_json(cfg["protocol"]);
                double fs = protocol_fs(proto);
                double bw = cfg["protocol"].value("bw", 125e3);
                cfg["plan"] = {{"f_b", fs}, {"f_m", bw / 2.0}, {"f_s", fs}};
            }
            return cmd_link(cfg, xtech_args.out, xtech_args.seed, "xtech");
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
