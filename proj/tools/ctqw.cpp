// ctqw.cpp — command-line driver. Every subcommand computes its artifacts
// fully before writing anything, emits CSV data plus JSON summaries, and
// drops a manifest describing the run. `ctqw replay <manifest>` re-executes
// the stored command and reproduces the outputs byte for byte.
//
// Exit codes: 0 success, 2 usage error, 3 capacity guard, 4 numerical
// instability.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "ctqw/experiments.hpp"
#include "ctqw/io.hpp"

using nlohmann::ordered_json;
using namespace ctqw;

namespace {

// ------------------------------ flag parsing --------------------------------

struct GridSpec {
    double lo = 0.0;
    double hi = 0.0;
    int points = 0;
    bool log_scale = true;
};

GridSpec parse_grid(const std::string& text) {
    GridSpec g;
    char kind[8] = {0};
    if (std::sscanf(text.c_str(), "%lf:%lf:%d:%7s", &g.lo, &g.hi, &g.points, kind) != 4)
        throw std::invalid_argument("grid spec must be lo:hi:points:log|lin, got '" + text + "'");
    const std::string k(kind);
    if (k == "log") g.log_scale = true;
    else if (k == "lin") g.log_scale = false;
    else throw std::invalid_argument("grid spec scale must be log or lin, got '" + k + "'");
    return g;
}

std::vector<double> grid_values(const GridSpec& g) {
    if (g.points < 2) throw std::invalid_argument("grid needs at least 2 points");
    if (g.log_scale) return geometric_grid(g.lo, g.hi, g.points);
    if (!(g.hi > g.lo)) throw std::invalid_argument("grid needs lo < hi");
    std::vector<double> v(std::size_t(g.points));
    for (int k = 0; k < g.points; ++k)
        v[std::size_t(k)] = g.lo + (g.hi - g.lo) * double(k) / double(g.points - 1);
    return v;
}

std::vector<int> parse_sizes(const std::string& text) {
    if (text.find(':') != std::string::npos) {
        const GridSpec g = parse_grid(text);
        if (!g.log_scale) {
            std::vector<int> out;
            for (double v : grid_values(g)) {
                const int n = int(std::lround(v));
                if (out.empty() || n != out.back()) out.push_back(n);
            }
            return out;
        }
        return log_spaced_sizes(int(std::lround(g.lo)), int(std::lround(g.hi)), g.points);
    }
    std::vector<int> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t next = text.find(',', pos);
        if (next == std::string::npos) next = text.size();
        out.push_back(std::stoi(text.substr(pos, next - pos)));
        pos = next + 1;
    }
    if (out.empty()) throw std::invalid_argument("empty size list");
    return out;
}

EtaBracket parse_bracket(const std::string& text) {
    EtaBracket b;
    if (std::sscanf(text.c_str(), "%lf:%lf", &b.lo, &b.hi) != 2)
        throw std::invalid_argument("bracket must be lo:hi, got '" + text + "'");
    return b;
}

// ------------------------------ model options -------------------------------

struct ModelOptions {
    std::string name;
    double alpha = 1.0;
    double gamma_wg = 20.0;
    double kappa = 0.0;
    double jc = 10.0;
    double spacing = 1.0;
    bool alpha_set = false, gamma_wg_set = false, kappa_set = false, jc_set = false;
};

void reject_foreign_flags(const ModelOptions& m, bool allow_alpha, bool allow_gamma_wg,
                          bool allow_kappa, bool allow_jc) {
    if (m.alpha_set && !allow_alpha)
        throw std::invalid_argument("--alpha does not apply to model " + m.name);
    if (m.gamma_wg_set && !allow_gamma_wg)
        throw std::invalid_argument("--gamma-wg does not apply to model " + m.name);
    if (m.kappa_set && !allow_kappa)
        throw std::invalid_argument("--kappa does not apply to model " + m.name);
    if (m.jc_set && !allow_jc)
        throw std::invalid_argument("--jc does not apply to model " + m.name);
}

CouplingModel build_model(const ModelOptions& m) {
    CouplingModel model;
    model.spacing = m.spacing;
    if (m.name == "free-space") {
        reject_foreign_flags(m, false, false, false, false);
        model.kind = FreeSpace{};
    } else if (m.name == "power-law") {
        reject_foreign_flags(m, true, false, false, false);
        model.kind = PurePowerLaw{m.alpha};
    } else if (m.name == "waveguide-gap") {
        reject_foreign_flags(m, false, true, true, false);
        model.kind = WaveguideBandgap{m.gamma_wg, m.kappa};
    } else if (m.name == "waveguide-prop") {
        reject_foreign_flags(m, false, true, false, false);
        model.kind = WaveguidePropagating{m.gamma_wg};
    } else if (m.name == "cavity") {
        reject_foreign_flags(m, false, false, false, true);
        model.kind = Cavity{m.jc};
    } else {
        throw std::invalid_argument("unknown model '" + m.name + "'");
    }
    model.validate();
    return model;
}

ordered_json model_params(const ModelOptions& m) {
    ordered_json j;
    j["name"] = m.name;
    if (m.name == "power-law") j["alpha"] = m.alpha;
    if (m.name == "waveguide-gap") {
        j["gamma_wg"] = m.gamma_wg;
        j["kappa"] = m.kappa;
    }
    if (m.name == "waveguide-prop") j["gamma_wg"] = m.gamma_wg;
    if (m.name == "cavity") j["jc"] = m.jc;
    j["spacing"] = m.spacing;
    return j;
}

CouplingModel model_from_params(const ordered_json& j) {
    ModelOptions m;
    m.name = j.at("name").get<std::string>();
    m.spacing = j.at("spacing").get<double>();
    if (j.contains("alpha")) {
        m.alpha = j["alpha"].get<double>();
        m.alpha_set = true;
    }
    if (j.contains("gamma_wg")) {
        m.gamma_wg = j["gamma_wg"].get<double>();
        m.gamma_wg_set = true;
    }
    if (j.contains("kappa")) {
        m.kappa = j["kappa"].get<double>();
        m.kappa_set = true;
    }
    if (j.contains("jc")) {
        m.jc = j["jc"].get<double>();
        m.jc_set = true;
    }
    return build_model(m);
}

// ------------------------------ command runners -----------------------------

std::vector<std::string> run_gap_scan(const ordered_json& p) {
    const CouplingModel model = model_from_params(p.at("model"));
    const SearchProblem problem{p.at("n").get<int>(), p.at("targets").get<std::vector<int>>(),
                                model, 0.0};
    const auto curve = gap_curve(problem, grid_values(parse_grid(p.at("eta_grid"))));
    const std::string out = p.at("out").get<std::string>();
    io::write_text_file(out + ".csv", io::gap_curve_csv(curve));
    return {out + ".csv"};
}

std::vector<std::string> run_search(const ordered_json& p) {
    const CouplingModel model = model_from_params(p.at("model"));
    const SearchProblem problem{p.at("n").get<int>(), p.at("targets").get<std::vector<int>>(),
                                model, 0.0};
    GapOptimum gap;
    if (p.at("eta").is_null()) {
        gap = find_eta_opt(problem, parse_bracket(p.at("bracket")));
    } else {
        const double eta = p.at("eta").get<double>();
        gap.eta_opt = eta;
        gap.summary = spectral_summary(problem.with_eta(eta));
        gap.gap_min = gap.summary.gap;
        gap.t_gap = std::numbers::pi / gap.gap_min;
    }
    const SearchResult result = find_t_opt(problem, gap);
    const double t_max = p.at("t_factor").get<double>() * gap.t_gap;
    const FidelityTrace trace =
        fidelity_trace(problem.with_eta(gap.eta_opt), t_max, p.at("samples").get<int>());
    const std::string out = p.at("out").get<std::string>();
    io::write_text_file(out + "_trace.csv", io::fidelity_trace_csv(trace));
    io::write_text_file(out + "_result.json", io::search_result_json(result));
    return {out + "_trace.csv", out + "_result.json"};
}

std::vector<std::string> run_sweep(const ordered_json& p) {
    const CouplingModel model = model_from_params(p.at("model"));
    const std::vector<int> sizes = parse_sizes(p.at("sizes"));
    const ordered_json& rule_json = p.at("target_rule");
    const TargetRule rule = rule_json.contains("fraction")
                                ? TargetRule::proportional(rule_json["fraction"].get<double>())
                                : TargetRule::fixed(rule_json.at("fixed").get<std::vector<int>>());
    SweepOptions opt;
    opt.bracket = parse_bracket(p.at("bracket"));
    opt.workers = p.at("workers").get<unsigned>();
    const ScalingDataset ds = sweep_sizes(model, sizes, rule, opt);
    const std::string out = p.at("out").get<std::string>();
    std::vector<std::string> outputs{out + ".csv"};
    io::write_text_file(out + ".csv", io::scaling_csv(ds));
    if (p.at("fit").get<bool>()) {
        io::write_text_file(out + "_fit.json", io::fit_json(fit_power_law(ds)));
        outputs.push_back(out + "_fit.json");
    }
    return outputs;
}

std::vector<std::string> run_boundary(const ordered_json& p) {
    const CouplingModel model = model_from_params(p.at("model"));
    SweepOptions opt;
    opt.bracket = parse_bracket(p.at("bracket"));
    opt.workers = p.at("workers").get<unsigned>();
    const auto rows = boundary_study(model, p.at("n").get<int>(),
                                     p.at("targets").get<std::vector<int>>(), opt);
    const std::string out = p.at("out").get<std::string>();
    io::write_text_file(out + ".csv", io::boundary_csv(rows));
    return {out + ".csv"};
}

NoiseMethod parse_method(const std::string& name) {
    if (name == "effective") return NoiseMethod::Effective;
    if (name == "lindblad") return NoiseMethod::Lindblad;
    if (name == "both") return NoiseMethod::Both;
    throw std::invalid_argument("--method must be lindblad, effective, or both");
}

std::vector<std::string> run_noise(const ordered_json& p) {
    const CouplingModel model = model_from_params(p.at("model"));
    NoiseStudyOptions opt;
    opt.n_traj = p.at("trajectories").get<int>();
    opt.seed = p.at("seed").get<std::uint64_t>();
    opt.samples = p.at("samples").get<int>();
    opt.workers = p.at("workers").get<unsigned>();
    opt.method = parse_method(p.at("method"));
    opt.bracket = parse_bracket(p.at("bracket"));
    opt.window_factor = p.at("window_factor").get<double>();
    const auto rows =
        noise_study(model, p.at("n").get<int>(), p.at("targets").get<std::vector<int>>(),
                    p.at("dephasing").get<std::vector<double>>(), p.at("decay").get<bool>(), opt);
    const std::string out = p.at("out").get<std::string>();
    io::write_text_file(out + ".csv", io::noise_csv(rows));
    return {out + ".csv"};
}

std::vector<std::string> run_cross_validate(const ordered_json& p) {
    const CouplingModel model = model_from_params(p.at("model"));
    const SearchProblem problem{p.at("n").get<int>(), p.at("targets").get<std::vector<int>>(),
                                model, 0.0};
    const GapOptimum gap = find_eta_opt(problem, parse_bracket(p.at("bracket")));
    const SearchResult noiseless = find_t_opt(problem, gap);
    const double t_max = p.at("t_factor").get<double>() * noiseless.t_opt;

    NoiseConfig noise;
    noise.gamma_ph = p.at("dephasing").get<double>();
    noise.include_decay = p.at("decay").get<bool>();
    noise.n_traj = p.at("trajectories").get<int>();
    noise.base_seed = p.at("seed").get<std::uint64_t>();
    const ComparisonReport report =
        compare_methods(problem.with_eta(gap.eta_opt), noise, t_max, p.at("samples").get<int>(),
                        p.at("workers").get<unsigned>());

    const std::string out = p.at("out").get<std::string>();
    const std::string me_csv = out + "_me.csv";
    const std::string eff_csv = out + "_eff.csv";
    io::write_text_file(me_csv, io::fidelity_trace_csv(report.master));
    io::write_text_file(eff_csv, io::fidelity_trace_csv(report.effective));
    io::write_text_file(out + "_report.json", io::comparison_json(report, me_csv, eff_csv));
    return {me_csv, eff_csv, out + "_report.json"};
}

std::vector<std::string> run_command(const std::string& name, const ordered_json& params) {
    if (name == "gap-scan") return run_gap_scan(params);
    if (name == "search") return run_search(params);
    if (name == "sweep") return run_sweep(params);
    if (name == "boundary") return run_boundary(params);
    if (name == "noise") return run_noise(params);
    if (name == "cross-validate") return run_cross_validate(params);
    throw std::invalid_argument("unknown command '" + name + "'");
}

void finish(const std::string& name, const ordered_json& params, std::uint64_t seed) {
    const std::vector<std::string> outputs = run_command(name, params);
    const std::string manifest_path = params.at("out").get<std::string>() + ".manifest.json";
    io::write_text_file(manifest_path, io::manifest_json(name, params, seed, outputs));
    for (const std::string& o : outputs) std::printf("wrote %s\n", o.c_str());
    std::printf("wrote %s\n", manifest_path.c_str());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"continuous-time quantum-walk spatial search on long-range-coupled atom chains"};
    app.require_subcommand(1);

    ModelOptions model;
    int n_atoms = 256;
    std::vector<int> targets{20};
    std::uint64_t seed = 42;
    unsigned workers = 0;
    std::string bracket = "0.01:10000";
    bool paper_defaults = false;

    const auto add_common = [&](CLI::App* cmd, bool with_n = true) {
        cmd->add_option("--model", model.name, "coupling model")
            ->required()
            ->check(CLI::IsMember(
                {"free-space", "power-law", "waveguide-gap", "waveguide-prop", "cavity"}));
        cmd->add_option("--alpha", model.alpha, "power-law exponent")
            ->each([&](const std::string&) { model.alpha_set = true; });
        cmd->add_option("--gamma-wg", model.gamma_wg, "waveguide-mode decay rate")
            ->each([&](const std::string&) { model.gamma_wg_set = true; });
        cmd->add_option("--kappa", model.kappa, "band-gap inverse coupling range")
            ->each([&](const std::string&) { model.kappa_set = true; });
        cmd->add_option("--jc", model.jc, "cavity exchange strength")
            ->each([&](const std::string&) { model.jc_set = true; });
        cmd->add_option("--spacing", model.spacing, "nearest-neighbour separation");
        if (with_n) cmd->add_option("--n", n_atoms, "number of atoms");
        cmd->add_option("--seed", seed, "base seed for every random stream");
        cmd->add_option("--workers", workers, "worker threads (0 = hardware)");
        cmd->add_option("--bracket", bracket, "eta optimizer bracket lo:hi");
        cmd->add_flag("--paper-defaults", paper_defaults,
                      "keep the canonical defaults (gamma-wg 20, jc 10, target 20, 500 trajectories)");
    };

    // gap-scan
    auto* gap_cmd = app.add_subcommand("gap-scan", "gap and overlap curve over an eta grid");
    std::string eta_grid = "0.01:10000:200:log";
    std::string out_path = "";
    add_common(gap_cmd);
    gap_cmd->add_option("--target", targets, "marked nodes (1-based)");
    gap_cmd->add_option("--eta-grid", eta_grid, "eta grid as lo:hi:points:log|lin");
    gap_cmd->add_option("--out", out_path, "output path prefix");

    // search
    auto* search_cmd = app.add_subcommand("search", "optimize eta, extract the search time, trace F(t)");
    double eta_flag = -1.0;
    bool eta_given = false;
    int samples = 1000;
    double t_factor = 3.0;
    add_common(search_cmd);
    search_cmd->add_option("--target", targets, "marked nodes (1-based)");
    search_cmd->add_option("--eta", eta_flag, "skip the optimizer and use this eta")
        ->each([&](const std::string&) { eta_given = true; });
    search_cmd->add_option("--samples", samples, "trace samples");
    search_cmd->add_option("--t-factor", t_factor, "trace window in units of the gap time");
    search_cmd->add_option("--out", out_path, "output path prefix");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "size sweep with optional power-law fit");
    std::string sizes_spec = "64:512:8:log";
    double target_frac = -1.0;
    bool do_fit = false;
    add_common(sweep_cmd, false);
    sweep_cmd->add_option("--n", sizes_spec, "sizes as lo:hi:points:log|lin or a,b,c list");
    sweep_cmd->add_option("--target", targets, "fixed marked nodes (1-based)");
    sweep_cmd->add_option("--target-frac", target_frac, "single marked node at this fraction of n");
    sweep_cmd->add_flag("--fit", do_fit, "fit eta*t = a*n^b and write the fit JSON");
    sweep_cmd->add_option("--out", out_path, "output path prefix");

    // boundary
    auto* boundary_cmd = app.add_subcommand("boundary", "search time per target location");
    std::vector<int> boundary_targets;
    add_common(boundary_cmd);
    boundary_cmd->add_option("--targets", boundary_targets, "target locations to compare")->required();
    boundary_cmd->add_option("--out", out_path, "output path prefix");

    // noise
    auto* noise_cmd = app.add_subcommand("noise", "peak fidelity under decay and dephasing");
    std::vector<double> dephasing_list;
    bool decay = false;
    std::string method = "effective";
    int trajectories = 500;
    int noise_samples = 200;
    double window_factor = 1.5;
    add_common(noise_cmd);
    noise_cmd->add_option("--target", targets, "marked nodes (1-based)");
    noise_cmd->add_option("--dephasing", dephasing_list, "dephasing rates to study");
    noise_cmd->add_flag("--decay", decay, "include collective decay");
    noise_cmd->add_option("--method", method, "lindblad, effective, or both")
        ->check(CLI::IsMember({"lindblad", "effective", "both"}));
    noise_cmd->add_option("--trajectories", trajectories, "trajectory count");
    noise_cmd->add_option("--samples", noise_samples, "trace samples");
    noise_cmd->add_option("--window-factor", window_factor, "time window around the noiseless optimum");
    noise_cmd->add_option("--out", out_path, "output path prefix");

    // cross-validate
    auto* cross_cmd = app.add_subcommand("cross-validate",
                                         "master equation vs effective-Hamiltonian comparison");
    double cross_dephasing = 0.0;
    bool cross_decay = false;
    int cross_trajectories = 500;
    int cross_samples = 200;
    double cross_t_factor = 1.5;
    add_common(cross_cmd);
    cross_cmd->add_option("--target", targets, "marked nodes (1-based)");
    cross_cmd->add_option("--dephasing", cross_dephasing, "dephasing rate (0 = none)");
    cross_cmd->add_flag("--decay", cross_decay, "include collective decay");
    cross_cmd->add_option("--trajectories", cross_trajectories, "trajectory count");
    cross_cmd->add_option("--samples", cross_samples, "trace samples");
    cross_cmd->add_option("--t-factor", cross_t_factor, "window in units of the noiseless optimum");
    cross_cmd->add_option("--out", out_path, "output path prefix");

    // replay
    auto* replay_cmd = app.add_subcommand("replay", "re-run the command stored in a manifest");
    std::string manifest_path;
    replay_cmd->add_option("manifest", manifest_path, "manifest JSON to replay")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (replay_cmd->parsed()) {
            const ordered_json manifest = ordered_json::parse(io::read_text_file(manifest_path));
            const std::string name = manifest.at("command").get<std::string>();
            finish(name, manifest.at("params"), manifest.at("seed").get<std::uint64_t>());
            return 0;
        }

        ordered_json params;
        std::string name;
        if (gap_cmd->parsed()) {
            name = "gap-scan";
            params["model"] = model_params(model);
            params["n"] = n_atoms;
            params["targets"] = targets;
            params["eta_grid"] = eta_grid;
            params["out"] = out_path.empty() ? "gap_scan" : out_path;
        } else if (search_cmd->parsed()) {
            name = "search";
            params["model"] = model_params(model);
            params["n"] = n_atoms;
            params["targets"] = targets;
            if (eta_given) params["eta"] = eta_flag;
            else params["eta"] = nullptr;
            params["bracket"] = bracket;
            params["samples"] = samples;
            params["t_factor"] = t_factor;
            params["out"] = out_path.empty() ? "search" : out_path;
        } else if (sweep_cmd->parsed()) {
            name = "sweep";
            params["model"] = model_params(model);
            params["sizes"] = sizes_spec;
            ordered_json rule;
            if (target_frac > 0.0) rule["fraction"] = target_frac;
            else rule["fixed"] = targets;
            params["target_rule"] = rule;
            params["bracket"] = bracket;
            params["fit"] = do_fit;
            params["workers"] = workers;
            params["out"] = out_path.empty() ? "sweep" : out_path;
        } else if (boundary_cmd->parsed()) {
            name = "boundary";
            params["model"] = model_params(model);
            params["n"] = n_atoms;
            params["targets"] = boundary_targets;
            params["bracket"] = bracket;
            params["workers"] = workers;
            params["out"] = out_path.empty() ? "boundary" : out_path;
        } else if (noise_cmd->parsed()) {
            name = "noise";
            params["model"] = model_params(model);
            params["n"] = n_atoms;
            params["targets"] = targets;
            params["dephasing"] = dephasing_list;
            params["decay"] = decay;
            params["method"] = method;
            params["trajectories"] = trajectories;
            params["samples"] = noise_samples;
            params["window_factor"] = window_factor;
            params["seed"] = seed;
            params["workers"] = workers;
            params["bracket"] = bracket;
            params["out"] = out_path.empty() ? "noise" : out_path;
        } else if (cross_cmd->parsed()) {
            name = "cross-validate";
            params["model"] = model_params(model);
            params["n"] = n_atoms;
            params["targets"] = targets;
            params["dephasing"] = cross_dephasing;
            params["decay"] = cross_decay;
            params["trajectories"] = cross_trajectories;
            params["samples"] = cross_samples;
            params["t_factor"] = cross_t_factor;
            params["seed"] = seed;
            params["workers"] = workers;
            params["bracket"] = bracket;
            params["out"] = out_path.empty() ? "cross_validate" : out_path;
        }
        finish(name, params, seed);
        return 0;
    } catch (const CapacityError& e) {
        std::fprintf(stderr, "ctqw: %s\n", e.what());
        return 3;
    } catch (const InstabilityError& e) {
        std::fprintf(stderr, "ctqw: %s\n", e.what());
        return 4;
    } catch (const BracketError& e) {
        std::fprintf(stderr, "ctqw: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "ctqw: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "ctqw: %s\n", e.what());
        return 1;
    }
}
