#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bscat/iq.hpp"
#include "bscat/tag.hpp"

namespace bscat {

// Fixed shortest-roundtrip formatting so emitted text is reproducible.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Interleaved little-endian float32 I,Q pairs, no header; metadata lives in
// a sidecar file.
inline void write_iq(const std::string& path, const IQStream& s) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_iq: cannot open " + path);
    for (const auto& x : s.samples) {
        float pair[2] = {static_cast<float>(x.real()), static_cast<float>(x.imag())};
        f.write(reinterpret_cast<const char*>(pair), sizeof(pair));
    }
    if (!f) throw std::runtime_error("write_iq: write failed on " + path);
}

inline IQStream read_iq(const std::string& path, double sample_rate) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("read_iq: cannot open " + path);
    IQStream s;
    s.sample_rate = sample_rate;
    float pair[2];
    while (f.read(reinterpret_cast<char*>(pair), sizeof(pair)))
        s.samples.emplace_back(static_cast<double>(pair[0]), static_cast<double>(pair[1]));
    if (f.gcount() != 0) throw std::runtime_error("read_iq: trailing partial sample in " + path);
    return s;
}

inline void write_csv(const std::string& path, const std::vector<std::string>& header_comments,
                      const std::string& column_row, const std::vector<std::string>& rows) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_csv: cannot open " + path);
    for (const auto& c : header_comments) f << "# " << c << "\n";
    f << column_row << "\n";
    for (const auto& r : rows) f << r << "\n";
    if (!f) throw std::runtime_error("write_csv: write failed on " + path);
}

inline void write_transistor_curve_csv(const std::string& path, const TransistorCurve& curve,
                                       const std::vector<std::string>& header_comments = {}) {
    std::vector<std::string> rows;
    rows.reserve(curve.samples.size());
    for (const auto& s : curve.samples) rows.push_back(format_double(s.v_gs) + "," + format_double(s.r_ohms));
    write_csv(path, header_comments, "v_gs,r_ohms", rows);
}

inline TransistorCurve read_transistor_curve_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("read_transistor_curve_csv: cannot open " + path);
    std::vector<TransistorCurve::Sample> samples;
    std::string line;
    bool saw_header = false;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!saw_header) {
            saw_header = true;
            if (line.find("v_gs") != std::string::npos) continue;
        }
        std::istringstream ss(line);
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b))
            throw std::runtime_error("read_transistor_curve_csv: malformed row: " + line);
        samples.push_back({std::stod(a), std::stod(b)});
    }
    return make_transistor_curve(std::move(samples));
}

inline void write_bias_csv(const std::string& path, const BiasWaveform& bias,
                           const std::vector<std::string>& header_comments = {}) {
    std::vector<std::string> rows;
    rows.reserve(bias.size());
    for (std::size_t n = 0; n < bias.size(); ++n) {
        double t = bias.sample_rate > 0.0 ? static_cast<double>(n) / bias.sample_rate : static_cast<double>(n);
        rows.push_back(format_double(t) + "," + format_double(bias.v_i[n]) + "," + format_double(bias.v_q[n]));
    }
    write_csv(path, header_comments, "t,v_i,v_q", rows);
}

}  // namespace bscat
