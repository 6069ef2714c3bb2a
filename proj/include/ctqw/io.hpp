// io.hpp — Serialization of results to CSV and JSON. Numbers go out with 17
// significant digits so every double round-trips exactly and reruns are
// byte-comparable.

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ctqw/dynamics.hpp"
#include "ctqw/experiments.hpp"
#include "ctqw/opensys.hpp"
#include "ctqw/spectral.hpp"

namespace ctqw::io {

inline std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ------------------------------- CSV bodies ---------------------------------

inline std::string gap_curve_csv(const std::vector<std::pair<double, SpectralSummary>>& curve) {
    std::string s = "eta,gap,E0,E1,ov_s0,ov_s1,ov_w0,ov_w1\n";
    for (const auto& [eta, sum] : curve) {
        s += fmt(eta) + ',' + fmt(sum.gap) + ',' + fmt(sum.e0) + ',' + fmt(sum.e1) + ',' +
             fmt(sum.ov_s0) + ',' + fmt(sum.ov_s1) + ',' + fmt(sum.ov_w0) + ',' + fmt(sum.ov_w1) +
             '\n';
    }
    return s;
}

inline std::string fidelity_trace_csv(const FidelityTrace& trace) {
    const bool with_se = !trace.std_error.empty();
    std::string s = with_se ? "t,fidelity,stderr\n" : "t,fidelity\n";
    for (std::size_t k = 0; k < trace.times.size(); ++k) {
        s += fmt(trace.times[k]) + ',' + fmt(trace.fidelity[k]);
        if (with_se) s += ',' + fmt(trace.std_error[k]);
        s += '\n';
    }
    return s;
}

inline std::string scaling_csv(const ScalingDataset& ds) {
    std::string s = "n,eta_opt,gap_min,t_gap,t_opt,f_max,eta_t\n";
    for (const ScalingRow& r : ds.rows) {
        if (!r.ok) {
            s += std::to_string(r.n) + ",,,,,,\n";
            continue;
        }
        s += std::to_string(r.n) + ',' + fmt(r.eta_opt) + ',' + fmt(r.gap_min) + ',' +
             fmt(r.t_gap) + ',' + fmt(r.t_opt) + ',' + fmt(r.f_max) + ',' + fmt(r.eta_t) + '\n';
    }
    return s;
}

inline std::string boundary_csv(const std::vector<BoundaryRow>& rows) {
    std::string s = "w,eta_opt,t_opt,f_max\n";
    for (const BoundaryRow& r : rows)
        s += std::to_string(r.target) + ',' + fmt(r.eta_opt) + ',' + fmt(r.t_opt) + ',' +
             fmt(r.f_max) + '\n';
    return s;
}

inline std::string noise_csv(const std::vector<NoiseRow>& rows) {
    std::string s = "setting,gamma_ph,decay,f_max,t_at_max,f_max_master\n";
    for (const NoiseRow& r : rows) {
        s += r.setting + ',' + fmt(r.gamma_ph) + ',' + (r.decay ? "1" : "0") + ',' + fmt(r.f_max) +
             ',' + fmt(r.t_at_max) + ',' + (r.has_master ? fmt(r.f_max_master) : std::string()) +
             '\n';
    }
    return s;
}

// ------------------------------ JSON bodies ---------------------------------

inline std::string search_result_json(const SearchResult& r) {
    nlohmann::ordered_json j;
    j["t_opt"] = r.t_opt;
    j["f_max"] = r.f_max;
    j["eta"] = r.eta_used;
    j["eta_t"] = r.eta_t_product;
    return j.dump(2) + "\n";
}

inline std::string fit_json(const PowerLawFit& fit) {
    nlohmann::ordered_json j;
    j["a"] = fit.a;
    j["b"] = fit.b;
    j["r2"] = fit.r_squared;
    return j.dump(2) + "\n";
}

inline std::string comparison_json(const ComparisonReport& report, const std::string& me_csv_path,
                                   const std::string& eff_csv_path) {
    nlohmann::ordered_json j;
    j["max_abs_diff"] = report.max_abs_diff;
    j["within_band_fraction"] = report.within_band_fraction;
    j["me_trace_csv"] = me_csv_path;
    j["eff_trace_csv"] = eff_csv_path;
    return j.dump(2) + "\n";
}

// -------------------------------- manifests ---------------------------------

inline constexpr const char* kArtifactVersion = "1.0.0";

// Every command writes exactly one manifest next to its outputs; rerunning
// the stored command reproduces the outputs byte for byte.
inline std::string manifest_json(const std::string& command, const nlohmann::ordered_json& params,
                                 std::uint64_t seed, const std::vector<std::string>& outputs) {
    nlohmann::ordered_json j;
    j["version"] = kArtifactVersion;
    j["command"] = command;
    j["params"] = params;
    j["seed"] = seed;
    j["outputs"] = outputs;
    return j.dump(2) + "\n";
}

} // namespace ctqw::io
