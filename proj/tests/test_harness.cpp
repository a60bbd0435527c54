#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "bscat/link.hpp"

using namespace bscat;

namespace {

LinkSpec quiet_lora_spec() {
    LinkSpec spec;
    spec.protocol = LoraConfig{7, 125e3, 2};
    spec.carrier = ToneSource{protocol_fs(spec.protocol)};
    spec.plan = make_default_plan(spec.protocol);
    spec.channel.noise_psd = -std::numeric_limits<double>::infinity();
    spec.d_source_tag = 1.0;
    spec.d_tag_rx = 2.0;
    spec.payload_bits = 128;
    spec.trials = 2;
    return spec;
}

}  // namespace

TEST_CASE("wilson interval matches reference values") {
    auto ci = wilson_interval(0, 100);
    CHECK(ci.low == Catch::Approx(0.0).margin(1e-15));
    CHECK(ci.high == Catch::Approx(0.036993498206985678).epsilon(1e-12));

    ci = wilson_interval(5, 100);
    CHECK(ci.low == Catch::Approx(0.021543679154367959).epsilon(1e-12));
    CHECK(ci.high == Catch::Approx(0.11175046923191913).epsilon(1e-12));

    ci = wilson_interval(50, 100);
    CHECK(ci.low == Catch::Approx(0.40383153036599562).epsilon(1e-12));
    CHECK(ci.high == Catch::Approx(0.59616846963400438).epsilon(1e-12));

    ci = wilson_interval(100, 100);
    CHECK(ci.low == Catch::Approx(0.96300650179301428).epsilon(1e-12));
    CHECK(ci.high == 1.0);

    ci = wilson_interval(3, 7);
    CHECK(ci.low == Catch::Approx(0.15821985525146975).epsilon(1e-12));
    CHECK(ci.high == Catch::Approx(0.74954163547234276).epsilon(1e-12));

    CHECK(wilson_interval(0, 0).low == 0.0);
    CHECK(wilson_interval(0, 0).high == 1.0);
    CHECK_THROWS_AS(wilson_interval(5, 4), std::invalid_argument);
}

TEST_CASE("frame checksum sums 16-bit words") {
    std::vector<std::uint8_t> bits;
    append_word(bits, 0xDEAD, 16);
    append_word(bits, 0xBEEF, 16);
    CHECK(frame_checksum(bits, 0, 32) == 0x9D9C);

    bits.clear();
    append_word(bits, 0x0123, 16);
    append_word(bits, 0x4567, 16);
    append_word(bits, 0x89AB, 16);
    append_word(bits, 0xCDEF, 16);
    CHECK(frame_checksum(bits, 0, 64) == 0x9E24);

    // a short tail is padded on the right before summing
    bits.clear();
    append_word(bits, 0xFF, 8);
    CHECK(frame_checksum(bits, 0, 8) == 0xFF00);
}

TEST_CASE("frame builder emits self-consistent frames") {
    auto bits = build_frames(512, 42);
    REQUIRE(bits.size() == 8 * kFrameBits);
    for (std::size_t f = 0; f < 8; ++f) {
        std::size_t base = f * kFrameBits;
        std::uint16_t stored = 0;
        for (std::size_t i = 0; i < kFrameChecksumBits; ++i)
            stored = static_cast<std::uint16_t>((stored << 1) | bits[base + kFramePayloadBits + i]);
        CHECK(stored == frame_checksum(bits, base, kFramePayloadBits));
    }

    auto again = build_frames(512, 42);
    CHECK(bits == again);
    CHECK(build_frames(512, 43) != bits);

    // padded final frame still checks out
    auto odd = build_frames(100, 7);
    REQUIRE(odd.size() == 2 * kFrameBits);
    for (std::size_t i = 100; i < kFramePayloadBits * 2 - 28; ++i) {
        std::size_t f = i / kFramePayloadBits;
        std::size_t pos = f * kFrameBits + (i % kFramePayloadBits);
        if (i >= 100) CHECK(odd[pos] == 0);
    }
    CHECK_THROWS_AS(build_frames(0, 1), std::invalid_argument);
}

TEST_CASE("seed derivation separates streams") {
    CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
    CHECK(derive_seed(1, 2, 3) != derive_seed(1, 2, 4));
    CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 3));
    CHECK(derive_seed(1, 2, 3) != derive_seed(2, 2, 3));
    CHECK(derive_seed(0, 0, 0) != 0);
}

TEST_CASE("noiseless links deliver every frame on all protocols") {
    for (ProtocolId id : {ProtocolId::Lora, ProtocolId::Zigbee, ProtocolId::Ble,
                          ProtocolId::Wifi11b, ProtocolId::WifiOfdm}) {
        LinkSpec spec = quiet_lora_spec();
        spec.protocol = default_protocol(id);
        spec.carrier = ToneSource{protocol_fs(spec.protocol)};
        spec.plan = make_default_plan(spec.protocol);
        INFO("protocol " << protocol_name(spec.protocol));
        LinkReport rep = run_link(spec, 99);
        CHECK(rep.ber == 0.0);
        CHECK(rep.prr == 1.0);
        CHECK(rep.bit_errors == 0);
        CHECK(rep.frames_total == 2 * 2);
        CHECK(std::isinf(rep.snr_db));
        CHECK(rep.throughput_bps > 0.0);
        CHECK(rep.throughput_bps <= nominal_rate(spec.protocol) + 1e-9);
        CHECK(rep.trial_seeds.size() == 2);
    }
}

TEST_CASE("reports are reproducible for a fixed seed") {
    LinkSpec spec = quiet_lora_spec();
    spec.channel.noise_psd = -186.0;
    spec.d_tag_rx = 60.0;
    spec.trials = 4;
    LinkReport a = run_link(spec, 7);
    LinkReport b = run_link(spec, 7);
    CHECK(a.ber == b.ber);
    CHECK(a.bit_errors == b.bit_errors);
    CHECK(a.snr_db == b.snr_db);
    CHECK(a.throughput_bps == b.throughput_bps);
    CHECK(a.trial_seeds == b.trial_seeds);

    LinkReport c = run_link(spec, 8);
    CHECK(a.trial_seeds != c.trial_seeds);
}

TEST_CASE("snr override pins the measured operating point") {
    LinkSpec spec = quiet_lora_spec();
    spec.snr_override_db = -5.0;
    spec.trials = 3;
    LinkReport rep = run_link(spec, 11);
    CHECK(rep.snr_db == Catch::Approx(-5.0).margin(1e-9));
}

TEST_CASE("bit errors fall as snr rises") {
    LinkSpec spec = quiet_lora_spec();
    spec.payload_bits = 256;
    spec.trials = 10;
    std::vector<double> snrs = {-30.0, -24.0, -18.0, 0.0};
    auto rows = ber_sweep(spec, SweepAxis::Snr, snrs, 5);
    REQUIRE(rows.size() == 4);
    for (const auto& r : rows) REQUIRE(r.ok());
    CHECK(rows[0].report.ber > 0.2);          // far below the dechirp floor
    CHECK(rows[3].report.ber == 0.0);         // comfortably above it
    // the two deepest points sit at chance level, so allow sampling jitter
    CHECK(rows[0].report.ber >= rows[1].report.ber - 0.05);
    CHECK(rows[1].report.ber >= rows[2].report.ber);
    CHECK(rows[2].report.ber >= rows[3].report.ber);
    CHECK(rows[3].report.prr == 1.0);
}

TEST_CASE("sweep rows survive per-row failures") {
    LinkSpec spec = quiet_lora_spec();
    auto rows = ber_sweep(spec, SweepAxis::DTagRx, {1.0, -3.0, 2.0}, 5);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].ok());
    CHECK_FALSE(rows[1].ok());
    CHECK(!rows[1].error.empty());
    CHECK(rows[2].ok());
    CHECK(rows[2].report.ber == 0.0);
}

TEST_CASE("spreading-factor sweep retunes the receiver rate") {
    LinkSpec spec = quiet_lora_spec();
    spec.trials = 1;
    auto rows = ber_sweep(spec, SweepAxis::Sf, {7.0, 8.0}, 5);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].ok());
    CHECK(rows[1].ok());
    CHECK(rows[0].report.ber == 0.0);
    CHECK(rows[1].report.ber == 0.0);

    LinkSpec zig = quiet_lora_spec();
    zig.protocol = ZigbeeConfig{};
    zig.carrier = ToneSource{protocol_fs(zig.protocol)};
    zig.plan = make_default_plan(zig.protocol);
    auto bad = ber_sweep(zig, SweepAxis::Sf, {7.0}, 5);
    CHECK_FALSE(bad[0].ok());
}

TEST_CASE("plan misuse is rejected") {
    LinkSpec spec = quiet_lora_spec();
    spec.plan.f_b = spec.plan.f_m / 2.0;  // carrier far below the modulation
    CHECK_THROWS_AS(run_link(spec, 1), std::invalid_argument);

    spec = quiet_lora_spec();
    spec.carrier = ToneSource{1.5 * protocol_fs(spec.protocol)};
    spec.plan.f_b = 1.5 * protocol_fs(spec.protocol);
    CHECK_THROWS_AS(run_link(spec, 1), std::invalid_argument);  // fractional tone per sample

    spec = quiet_lora_spec();
    spec.trials = 0;
    CHECK_THROWS_AS(run_link(spec, 1), std::invalid_argument);
}

TEST_CASE("burst carrier closes the link once the training field is found") {
    LinkSpec spec;
    spec.protocol = LoraConfig{7, 125e3, 16};
    WifiAmpduSource src;
    src.n_subframes = 12;
    spec.carrier = src;
    spec.plan = {protocol_fs(spec.protocol), 62.5e3, protocol_fs(spec.protocol)};
    spec.channel.noise_psd = -std::numeric_limits<double>::infinity();
    spec.payload_bits = 64;
    spec.trials = 2;
    LinkReport rep = run_link(spec, 21);
    CHECK(rep.ber == 0.0);
    CHECK(rep.prr == 1.0);

    // payload that cannot fit in the burst budget is refused
    spec.payload_bits = 4096;
    CHECK_THROWS_AS(run_link(spec, 21), std::invalid_argument);

    // burst carriers only drive the chirp modem
    LinkSpec other = spec;
    other.payload_bits = 64;
    other.protocol = BleConfig{};
    other.plan = make_default_plan(other.protocol);
    CHECK_THROWS_AS(run_link(other, 21), std::invalid_argument);
}

TEST_CASE("range search finds the distance where the link degrades") {
    LinkSpec spec = quiet_lora_spec();
    spec.channel.noise_psd = -180.0;
    spec.payload_bits = 128;
    spec.trials = 4;
    spec.d_tag_rx = 5.0;

    RangeResult r = range_search(spec, 0.01, 31, 12);
    CHECK(r.max_distance > 5.0);
    // final BER is re-measured with a fresh seed, so judge it through its CI
    CHECK(r.ber_ci.low < 0.01);
    CHECK(r.ber < 0.03);
    CHECK(r.evaluations > 12);

    RangeResult again = range_search(spec, 0.01, 31, 12);
    CHECK(r.max_distance == again.max_distance);
    CHECK(r.ber == again.ber);

    // quieter channel reaches farther
    LinkSpec quieter = spec;
    quieter.channel.noise_psd = -190.0;
    RangeResult rq = range_search(quieter, 0.01, 31, 12);
    CHECK(rq.max_distance > r.max_distance);

    // starting distance already failing is an error
    LinkSpec dead = spec;
    dead.d_tag_rx = 100000.0;
    CHECK_THROWS_AS(range_search(dead, 0.01, 31, 12), std::runtime_error);

    CHECK_THROWS_AS(range_search(spec, 0.0, 31, 12), std::invalid_argument);
}

TEST_CASE("constellation capture under a settled plan lands on the corners") {
    ConstellationSpec spec;
    spec.plan = {1e6, 500e3, 1e6};
    spec.channel.noise_psd = -std::numeric_limits<double>::infinity();
    spec.n_symbols = 64;
    ConstellationStats st = constellation_capture(spec, 3);

    double g_down = std::pow(10.0, -path_loss_db(spec.d_source_tag, spec.channel.carrier_freq, spec.channel) / 20.0);
    double g_up = std::pow(10.0, -path_loss_db(spec.d_tag_rx, spec.channel.carrier_freq, spec.channel) / 20.0);
    double expected_gain = g_down * g_up * (6.0 / 13.0);
    CHECK(st.gain == Catch::Approx(expected_gain).epsilon(0.01));

    for (int c = 0; c < 4; ++c) {
        INFO("cluster " << c);
        CHECK(st.counts[c] == 16);
        CHECK(st.angular_std_deg[c] < 5.0);
        CHECK(std::abs(st.centers[c] - qam4_point(c) * st.gain) < 0.01 * st.gain);
    }
    CHECK(std::abs(st.inter_group_rotation_deg) < 0.5);
    CHECK(st.points.size() == 64);
}

TEST_CASE("constellation capture exposes a spinning plan") {
    ConstellationSpec spec;
    spec.plan = {40e3, 1e6, 2e6};
    spec.channel.noise_psd = -std::numeric_limits<double>::infinity();
    spec.n_symbols = 64;
    REQUIRE(check_frequency_plan(spec.plan) == PlanVerdict::SpinningConstellation);
    ConstellationStats st = constellation_capture(spec, 3);

    // carrier advances 2*pi*f_b*(4/f_m) between 4-symbol groups
    double expected = 360.0 * 40e3 * 4.0 / 1e6;
    CHECK(st.inter_group_rotation_deg == Catch::Approx(expected).margin(2.0));
}

TEST_CASE("constellation capture validates its inputs") {
    ConstellationSpec spec;
    spec.plan = {1e6, 500e3, 1e6};
    spec.pattern = {0, 1, 2};
    CHECK_THROWS_AS(constellation_capture(spec, 1), std::invalid_argument);
    spec.pattern = {0, 1, 2, 4};
    CHECK_THROWS_AS(constellation_capture(spec, 1), std::invalid_argument);
    spec.pattern = {0, 1, 2, 3};
    spec.n_symbols = 6;
    CHECK_THROWS_AS(constellation_capture(spec, 1), std::invalid_argument);

    spec.n_symbols = 64;
    spec.allow_invalid_plan = false;
    spec.plan = {40e3, 1e6, 2e6};
    CHECK_THROWS_AS(constellation_capture(spec, 1), std::invalid_argument);
}

TEST_CASE("tdma schedule assigns disjoint slot windows") {
    std::vector<Query> queries = {
        make_query(9, 1, CarrierKind::Tone, ProtocolId::Lora),
        make_query(7, 0, CarrierKind::Tone, ProtocolId::Lora),
        make_query(4, 2, CarrierKind::WifiAmpdu, ProtocolId::Lora),
    };
    auto windows = tdma_schedule(queries, 10e-3);
    REQUIRE(windows.size() == 3);
    CHECK(windows[0].tag_id == 7);
    CHECK(windows[0].t_start == 0.0);
    CHECK(windows[0].t_end == Catch::Approx(10e-3));
    CHECK(windows[1].tag_id == 9);
    CHECK(windows[1].t_start == Catch::Approx(10e-3));
    CHECK(windows[2].tag_id == 4);
    CHECK(windows[2].t_end == Catch::Approx(30e-3));
    for (std::size_t i = 1; i < windows.size(); ++i)
        CHECK(windows[i].t_start == Catch::Approx(windows[i - 1].t_end));

    queries.push_back(make_query(5, 1, CarrierKind::Tone, ProtocolId::Ble));
    CHECK_THROWS_AS(tdma_schedule(queries, 10e-3), std::invalid_argument);
    CHECK_THROWS_AS(tdma_schedule(queries, 0.0), std::invalid_argument);
}

TEST_CASE("throughput accounts only for correctly delivered payload") {
    LinkSpec spec = quiet_lora_spec();
    spec.payload_bits = 512;
    spec.trials = 2;
    LinkReport clean = run_link(spec, 50);

    LinkSpec noisy = spec;
    noisy.snr_override_db = -27.0;
    noisy.trials = 6;
    LinkReport degraded = run_link(noisy, 50);
    CHECK(degraded.ber > 0.0);
    CHECK(degraded.throughput_bps < clean.throughput_bps);
    CHECK(degraded.prr < 1.0);
    CHECK(degraded.ber_ci.low <= degraded.ber);
    CHECK(degraded.ber <= degraded.ber_ci.high);
}
