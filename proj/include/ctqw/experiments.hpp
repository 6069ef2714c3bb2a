// experiments.hpp — Orchestration of the study pipelines: size sweeps with
// power-law fits, boundary-effect tables, and noise studies.

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ctqw/opensys.hpp"

namespace ctqw {

// How the marked-node set depends on the chain size during a sweep.
class TargetRule {
  public:
    static TargetRule fixed(std::vector<int> targets) {
        TargetRule r;
        r.fixed_ = std::move(targets);
        return r;
    }

    static TargetRule proportional(double fraction) {
        if (!(fraction > 0.0) || !(fraction < 1.0))
            throw std::invalid_argument("TargetRule: fraction must be in (0, 1)");
        TargetRule r;
        r.fraction_ = fraction;
        return r;
    }

    std::vector<int> targets_for(int n) const {
        if (fraction_) {
            const int w = std::min(n, std::max(1, int(std::lround(*fraction_ * n))));
            return {w};
        }
        return fixed_;
    }

    std::string describe() const {
        if (fraction_) return "proportional(" + std::to_string(*fraction_) + ")";
        std::string s = "fixed(";
        for (std::size_t i = 0; i < fixed_.size(); ++i)
            s += (i ? "," : "") + std::to_string(fixed_[i]);
        return s + ")";
    }

  private:
    std::vector<int> fixed_{20};
    std::optional<double> fraction_;
};

struct ScalingRow {
    int n = 0;
    double eta_opt = 0.0;
    double gap_min = 0.0;
    double t_gap = 0.0;
    double t_opt = 0.0;
    double f_max = 0.0;
    double eta_t = 0.0;
    bool ok = true;      // false when this size failed; note carries the reason
    std::string note;
};

struct ScalingDataset {
    std::string model_label;
    std::vector<ScalingRow> rows;
};

struct SweepOptions {
    EtaBracket bracket;
    unsigned workers = 0;
};

// Geometrically spaced sizes, deduplicated after rounding.
inline std::vector<int> log_spaced_sizes(int lo, int hi, int points) {
    if (lo < 1 || hi <= lo || points < 2)
        throw std::invalid_argument("log_spaced_sizes: need 1 <= lo < hi and points >= 2");
    std::vector<int> out;
    const double llo = std::log(double(lo)), lhi = std::log(double(hi));
    for (int k = 0; k < points; ++k) {
        const int n = int(std::lround(std::exp(llo + (lhi - llo) * double(k) / double(points - 1))));
        if (out.empty() || n != out.back()) out.push_back(n);
    }
    return out;
}

// For each size: optimize eta, extract the search time, record the row.
// Failures at one size flag that row and the sweep continues.
inline ScalingDataset sweep_sizes(const CouplingModel& model, const std::vector<int>& sizes,
                                  const TargetRule& rule, const SweepOptions& opt = {}) {
    model.validate();
    if (sizes.empty()) throw std::invalid_argument("sweep_sizes: empty size list");
    for (std::size_t k = 1; k < sizes.size(); ++k)
        if (sizes[k] <= sizes[k - 1])
            throw std::invalid_argument("sweep_sizes: sizes must be strictly increasing");

    ScalingDataset ds;
    ds.model_label = model.label();
    ds.rows.resize(sizes.size());
    parallel_for(sizes.size(), opt.workers, [&](std::size_t i) {
        ScalingRow row;
        row.n = sizes[i];
        try {
            const SearchProblem p{row.n, rule.targets_for(row.n), model, 0.0};
            const GapOptimum gap = find_eta_opt(p, opt.bracket);
            const SearchResult res = find_t_opt(p, gap);
            row.eta_opt = gap.eta_opt;
            row.gap_min = gap.gap_min;
            row.t_gap = gap.t_gap;
            row.t_opt = res.t_opt;
            row.f_max = res.f_max;
            row.eta_t = res.eta_t_product;
            if (!res.interior_peak) {
                row.ok = false;
                row.note = "no interior fidelity peak";
            }
        } catch (const std::exception& e) {
            row.ok = false;
            row.note = e.what();
        }
        ds.rows[i] = row;
    });
    return ds;
}

struct PowerLawFit {
    double a = 0.0;         // prefactor of a * n^b
    double b = 0.0;         // exponent
    double r_squared = 0.0;
};

// Ordinary least squares on (ln n, ln eta_t) over the valid rows.
inline PowerLawFit fit_power_law(const ScalingDataset& ds) {
    std::vector<double> xs, ys;
    for (const ScalingRow& row : ds.rows) {
        if (!row.ok || !(row.eta_t > 0.0)) continue;
        xs.push_back(std::log(double(row.n)));
        ys.push_back(std::log(row.eta_t));
    }
    if (xs.size() < 3) throw std::invalid_argument("fit_power_law: need at least 3 valid rows");
    const double count = double(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= count;
    my /= count;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    PowerLawFit fit;
    fit.b = sxy / sxx;
    fit.a = std::exp(my - fit.b * mx);
    double ss_res = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double resid = ys[i] - (std::log(fit.a) + fit.b * xs[i]);
        ss_res += resid * resid;
    }
    fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return fit;
}

struct BoundaryRow {
    int target = 0;
    double eta_opt = 0.0;
    double t_opt = 0.0;
    double f_max = 0.0;
};

// Re-optimizes eta for every target location and records the search result.
inline std::vector<BoundaryRow> boundary_study(const CouplingModel& model, int n,
                                               const std::vector<int>& targets,
                                               const SweepOptions& opt = {}) {
    model.validate();
    if (targets.empty()) throw std::invalid_argument("boundary_study: empty target list");
    std::vector<BoundaryRow> rows(targets.size());
    parallel_for(targets.size(), opt.workers, [&](std::size_t i) {
        const SearchProblem p{n, {targets[i]}, model, 0.0};
        const GapOptimum gap = find_eta_opt(p, opt.bracket);
        const SearchResult res = find_t_opt(p, gap);
        rows[i] = {targets[i], gap.eta_opt, res.t_opt, res.f_max};
    });
    return rows;
}

enum class NoiseMethod { Effective, Lindblad, Both };

struct NoiseRow {
    std::string setting;   // "noiseless", "decay", "deph-<rate>", ...
    double gamma_ph = 0.0;
    bool decay = false;
    double f_max = 0.0;      // effective-Hamiltonian route (trajectory mean when dephasing)
    double t_at_max = 0.0;
    double f_max_master = 0.0; // master-equation route, when run
    bool has_master = false;
};

struct NoiseStudyOptions {
    int n_traj = 500;
    std::uint64_t seed = 42;
    int samples = 200;
    unsigned workers = 0;
    NoiseMethod method = NoiseMethod::Effective;
    EtaBracket bracket;
    double window_factor = 1.5; // time window around the noiseless optimum
};

// Peak fidelity per noise setting at the noiseless optimum: eta from the
// noiseless optimizer, time scanned over window_factor * T_opt. The
// master-equation route additionally runs whenever the method allows it and
// the size fits the dense-rho guard.
inline std::vector<NoiseRow> noise_study(const CouplingModel& model, int n,
                                         const std::vector<int>& targets,
                                         const std::vector<double>& gamma_ph_list,
                                         bool include_decay, const NoiseStudyOptions& opt = {}) {
    model.validate();
    for (double g : gamma_ph_list)
        if (g < 0.0) throw std::invalid_argument("noise_study: dephasing rates must be >= 0");
    if (opt.method != NoiseMethod::Effective && n > kMasterEquationMaxAtoms)
        throw CapacityError("noise_study: the lindblad method is limited to n <= 256");

    const SearchProblem base{n, targets, model, 0.0};
    const GapOptimum gap = find_eta_opt(base, opt.bracket);
    const SearchResult noiseless = find_t_opt(base, gap);
    const SearchProblem tuned = base.with_eta(gap.eta_opt);
    const double t_max = opt.window_factor * noiseless.t_opt;

    const auto peak_of = [](const FidelityTrace& trace) {
        std::size_t arg = 0;
        for (std::size_t k = 1; k < trace.fidelity.size(); ++k)
            if (trace.fidelity[k] > trace.fidelity[arg]) arg = k;
        return std::pair<double, double>(trace.fidelity[arg], trace.times[arg]);
    };

    std::vector<NoiseRow> rows;
    {
        NoiseRow row;
        row.setting = "noiseless";
        const FidelityKernel kernel = fidelity_kernel(tuned);
        double best_f = 0.0, best_t = 0.0;
        for (int k = 0; k < opt.samples; ++k) {
            const double t = t_max * double(k) / double(opt.samples - 1);
            const double f = kernel(t);
            if (f > best_f) {
                best_f = f;
                best_t = t;
            }
        }
        row.f_max = best_f;
        row.t_at_max = best_t;
        rows.push_back(row);
    }

    // The effective route runs unless the lindblad method was requested
    // outright; the master equation runs when requested, and also alongside
    // the default effective method at sizes where it is cheap.
    const bool want_effective = opt.method != NoiseMethod::Lindblad;
    const bool want_master = opt.method != NoiseMethod::Effective || n <= kCrossValidateMaxAtoms;

    std::vector<double> rates = gamma_ph_list;
    if (rates.empty()) rates.push_back(0.0);
    for (double g : rates) {
        if (g == 0.0 && !include_decay) continue; // identical to the noiseless row
        NoiseRow row;
        row.gamma_ph = g;
        row.decay = include_decay;
        row.setting = g > 0.0 ? (include_decay ? "decay+deph-" + std::to_string(g)
                                               : "deph-" + std::to_string(g))
                              : "decay";
        NoiseConfig noise{g, include_decay, opt.n_traj, opt.seed, 0.0};
        if (want_effective) {
            const FidelityTrace trace =
                g > 0.0 ? average_trajectories(tuned, noise, t_max, opt.samples, opt.workers)
                        : effective_trace(tuned, noise, t_max, opt.samples);
            const auto [f, t] = peak_of(trace);
            row.f_max = f;
            row.t_at_max = t;
        }
        if (want_master && n <= kMasterEquationMaxAtoms) {
            const auto [f, t] = peak_of(evolve_master(tuned, noise, t_max, opt.samples));
            row.f_max_master = f;
            row.has_master = true;
            if (!want_effective) {
                row.f_max = f;
                row.t_at_max = t;
            }
        }
        rows.push_back(row);
    }
    return rows;
}

} // namespace ctqw
