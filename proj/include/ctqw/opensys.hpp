// opensys.hpp — Open-system dynamics on the single-excitation block.
//
// Two routes to the same physics:
//   * the Lindblad master equation with collective decay and local
//     dephasing, integrated densely for the n x n block, and
//   * stochastic effective-Hamiltonian trajectories with piecewise-constant
//     Gaussian on-site energy noise, averaged over many runs.
//
// Block restriction of the full master equation: the decay dissipator
// -(1/2) sum_ij G_ij (s_i+ s_j- rho + rho s_i+ s_j- - 2 s_j- rho s_i+)
// couples the block only to the vacuum through its recycling term, so inside
// the block it acts as the pure loss -(1/2)(G rho + rho G) and the vacuum
// population is 1 - trace. The local sigma_z dephasing dissipator with rate
// gamma_ph leaves block diagonals untouched and damps every off-diagonal
// element at 4*gamma_ph (two flipped sites at 2*gamma_ph each).
//
// Trajectory noise calibration: on-site energies are redrawn every step from
// a zero-mean Gaussian with sigma = 2*sqrt(gamma_ph/dt). Averaged over
// realizations, each step multiplies off-diagonals by exp(-sigma^2 dt^2) =
// exp(-4 gamma_ph dt), reproducing the Lindblad rate exactly. The phases are
// applied as exact diagonal unitaries in half-step splits around the RK4
// step of H_eff, so the calibration holds at any step size and the noise
// never destabilizes the integrator.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ctqw/dynamics.hpp"
#include "ctqw/parallel.hpp"
#include "ctqw/rng.hpp"

namespace ctqw {

struct NoiseConfig {
    double gamma_ph = 0.0;     // local dephasing rate
    bool include_decay = false;
    int n_traj = 500;
    std::uint64_t base_seed = 42;
    double dt = 0.0;           // 0 derives the step from the step-size rule

    void validate() const {
        if (gamma_ph < 0.0) throw std::invalid_argument("NoiseConfig: gamma_ph must be >= 0");
        if (n_traj < 1) throw std::invalid_argument("NoiseConfig: n_traj must be >= 1");
        if (dt < 0.0) throw std::invalid_argument("NoiseConfig: dt must be >= 0");
    }
};

inline constexpr int kMasterEquationMaxAtoms = 256;
inline constexpr int kCrossValidateMaxAtoms = 64;

// Right-hand side of the block master equation.
inline Eigen::MatrixXcd lindblad_rhs(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& H_coh,
                                     const Eigen::MatrixXcd& G, double gamma_ph) {
    const complexd mi(0.0, -1.0);
    Eigen::MatrixXcd rhs = mi * (H_coh * rho - rho * H_coh);
    if (G.size() > 0 && G.cwiseAbs().maxCoeff() > 0.0)
        rhs -= 0.5 * (G * rho + rho * G);
    if (gamma_ph > 0.0) {
        rhs -= 4.0 * gamma_ph * rho;
        rhs.diagonal() += 4.0 * gamma_ph * rho.diagonal();
    }
    return rhs;
}

namespace detail {

inline Eigen::MatrixXcd rk4_step_rho(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& H,
                                     const Eigen::MatrixXcd& G, double gamma_ph, double dt) {
    const Eigen::MatrixXcd k1 = lindblad_rhs(rho, H, G, gamma_ph);
    const Eigen::MatrixXcd k2 = lindblad_rhs(rho + 0.5 * dt * k1, H, G, gamma_ph);
    const Eigen::MatrixXcd k3 = lindblad_rhs(rho + 0.5 * dt * k2, H, G, gamma_ph);
    const Eigen::MatrixXcd k4 = lindblad_rhs(rho + dt * k3, H, G, gamma_ph);
    return rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline void check_density_matrix(const Eigen::MatrixXcd& rho) {
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-9)
        throw InstabilityError("evolve_master: density matrix drifted from Hermitian");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < -1e-6)
        throw InstabilityError("evolve_master: density matrix lost positivity");
}

} // namespace detail

// Dense integration of the block master equation from rho(0) = |s><s|;
// records F(t) = <w|rho(t)|w> on a uniform grid of `samples` points over
// [0, t_max]. Positivity and Hermiticity are checked at every sample, trace
// bounds at every step.
inline FidelityTrace evolve_master(const SearchProblem& p, const NoiseConfig& noise, double t_max,
                                   int samples = 200) {
    p.validate();
    noise.validate();
    if (!(t_max > 0.0)) throw std::invalid_argument("evolve_master: t_max must be > 0");
    if (samples < 2) throw std::invalid_argument("evolve_master: need at least 2 samples");
    if (p.n > kMasterEquationMaxAtoms)
        throw CapacityError("evolve_master: dense rho evolution is limited to n <= 256");

    const Eigen::MatrixXcd H = build_search_hamiltonian(p).H.cast<complexd>();
    const Eigen::MatrixXd G_real =
        noise.include_decay ? build_coupling_matrices(p).G : Eigen::MatrixXd();
    const Eigen::MatrixXcd G =
        noise.include_decay ? Eigen::MatrixXcd(G_real.cast<complexd>()) : Eigen::MatrixXcd();

    double denom = H.cwiseAbs().rowwise().sum().maxCoeff() + 4.0 * noise.gamma_ph;
    if (noise.include_decay) denom += G_real.cwiseAbs().rowwise().sum().maxCoeff();
    const double dt_rule = noise.dt > 0.0 ? noise.dt : (denom > 0.0 ? 0.05 / denom : 0.05);

    const Eigen::VectorXcd s = uniform_state(p.n);
    const Eigen::VectorXcd w = target_state(p.targets, p.n);
    Eigen::MatrixXcd rho = s * s.adjoint();

    FidelityTrace out;
    out.times.resize(samples);
    out.fidelity.resize(samples);
    out.times[0] = 0.0;
    out.fidelity[0] = std::real(w.dot(rho * w));

    double trace_prev = std::real(rho.trace());
    for (int k = 1; k < samples; ++k) {
        const double t0 = t_max * double(k - 1) / double(samples - 1);
        const double t1 = t_max * double(k) / double(samples - 1);
        const int substeps = std::max(1, int(std::ceil((t1 - t0) / dt_rule)));
        const double dt = (t1 - t0) / substeps;
        for (int j = 0; j < substeps; ++j) {
            rho = detail::rk4_step_rho(rho, H, G, noise.gamma_ph, dt);
            const double trace = std::real(rho.trace());
            if (trace > 1.0 + 1e-6)
                throw InstabilityError("evolve_master: trace grew past 1");
            if (noise.include_decay) {
                if (trace > trace_prev + 1e-9)
                    throw InstabilityError("evolve_master: trace increased under decay");
            } else if (std::abs(trace - 1.0) > 1e-8) {
                throw InstabilityError("evolve_master: trace drifted without decay");
            }
            trace_prev = trace;
        }
        detail::check_density_matrix(rho);
        out.times[k] = t1;
        out.fidelity[k] = std::real(w.dot(rho * w));
    }
    return out;
}

namespace detail {

// Propagates `width` trajectories side by side as matrix columns; column c is
// driven by the Gaussian stream seeded with first_seed + c, so a trajectory's
// noise depends only on its own seed, never on batch placement. Returns per
// column the fidelity |<w|psi>|^2 on the uniform sample grid.
inline std::vector<std::vector<double>> run_trajectory_batch(
    const Eigen::MatrixXcd& H_eff, const Eigen::VectorXcd& psi0, const Eigen::VectorXcd& w,
    double gamma_ph, double dt_rule, double t_max, int samples, std::uint64_t first_seed,
    int width) {
    const Eigen::Index n = H_eff.rows();
    const complexd mi(0.0, -1.0);

    Eigen::MatrixXcd psi(n, width);
    for (int c = 0; c < width; ++c) psi.col(c) = psi0;
    std::vector<GaussianStream> streams;
    streams.reserve(std::size_t(width));
    for (int c = 0; c < width; ++c) streams.emplace_back(first_seed + std::uint64_t(c));

    std::vector<std::vector<double>> fid(static_cast<std::size_t>(width),
                                         std::vector<double>(static_cast<std::size_t>(samples), 0.0));
    for (int c = 0; c < width; ++c) fid[std::size_t(c)][0] = std::norm(w.dot(psi.col(c)));

    const double norm_cap = psi0.norm() * (1.0 + 1e-6);
    Eigen::MatrixXcd k1(n, width), k2(n, width), k3(n, width), k4(n, width), stage(n, width);
    Eigen::MatrixXd delta(n, width);

    for (int k = 1; k < samples; ++k) {
        const double t0 = t_max * double(k - 1) / double(samples - 1);
        const double t1 = t_max * double(k) / double(samples - 1);
        const int substeps = std::max(1, int(std::ceil((t1 - t0) / dt_rule)));
        const double dt = (t1 - t0) / substeps;
        const double sigma = gamma_ph > 0.0 ? 2.0 * std::sqrt(gamma_ph / dt) : 0.0;
        for (int j = 0; j < substeps; ++j) {
            if (sigma > 0.0) {
                for (int c = 0; c < width; ++c)
                    for (Eigen::Index i = 0; i < n; ++i) delta(i, c) = sigma * streams[std::size_t(c)].next();
                for (int c = 0; c < width; ++c)
                    for (Eigen::Index i = 0; i < n; ++i)
                        psi(i, c) *= std::polar(1.0, -0.5 * delta(i, c) * dt);
            }
            k1.noalias() = H_eff * psi;
            k1 *= mi;
            stage = psi + (0.5 * dt) * k1;
            k2.noalias() = H_eff * stage;
            k2 *= mi;
            stage = psi + (0.5 * dt) * k2;
            k3.noalias() = H_eff * stage;
            k3 *= mi;
            stage = psi + dt * k3;
            k4.noalias() = H_eff * stage;
            k4 *= mi;
            psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (sigma > 0.0) {
                for (int c = 0; c < width; ++c)
                    for (Eigen::Index i = 0; i < n; ++i)
                        psi(i, c) *= std::polar(1.0, -0.5 * delta(i, c) * dt);
            }
        }
        for (int c = 0; c < width; ++c) {
            if (psi.col(c).norm() > norm_cap)
                throw InstabilityError("trajectory: state norm grew past tolerance");
            fid[std::size_t(c)][std::size_t(k)] = std::norm(w.dot(psi.col(c)));
        }
    }
    return fid;
}

struct TrajectorySetup {
    Eigen::MatrixXcd H_eff;
    Eigen::VectorXcd s;
    Eigen::VectorXcd w;
    double dt_rule = 0.0;
};

inline TrajectorySetup trajectory_setup(const SearchProblem& p, const NoiseConfig& noise) {
    p.validate();
    noise.validate();
    TrajectorySetup setup;
    setup.H_eff = build_effective_hamiltonian(p, noise.include_decay);
    setup.s = uniform_state(p.n);
    setup.w = target_state(p.targets, p.n);
    setup.dt_rule = noise.dt > 0.0 ? noise.dt : suggest_dt(setup.H_eff);
    return setup;
}

} // namespace detail

// One noise realization; bit-reproducible for a given seed.
inline FidelityTrace dephasing_trajectory(const SearchProblem& p, const NoiseConfig& noise,
                                          double t_max, std::uint64_t seed, int samples = 200) {
    if (!(t_max > 0.0)) throw std::invalid_argument("dephasing_trajectory: t_max must be > 0");
    if (samples < 2) throw std::invalid_argument("dephasing_trajectory: need at least 2 samples");
    const detail::TrajectorySetup setup = detail::trajectory_setup(p, noise);
    const auto fid = detail::run_trajectory_batch(setup.H_eff, setup.s, setup.w, noise.gamma_ph,
                                                  setup.dt_rule, t_max, samples, seed, 1);
    FidelityTrace out;
    out.times.resize(samples);
    for (int k = 0; k < samples; ++k) out.times[std::size_t(k)] = t_max * double(k) / double(samples - 1);
    out.fidelity = fid[0];
    return out;
}

// Mean and standard error of F(t) over n_traj trajectories seeded
// base_seed + index. Trajectories run in fixed batches so the output bytes do
// not depend on the worker count; the reduction runs in index order.
inline FidelityTrace average_trajectories(const SearchProblem& p, const NoiseConfig& noise,
                                          double t_max, int samples = 200, unsigned workers = 0) {
    if (!(t_max > 0.0)) throw std::invalid_argument("average_trajectories: t_max must be > 0");
    if (samples < 2) throw std::invalid_argument("average_trajectories: need at least 2 samples");
    if (noise.n_traj < 2) throw std::invalid_argument("average_trajectories: need n_traj >= 2");
    const detail::TrajectorySetup setup = detail::trajectory_setup(p, noise);

    const int n_traj = noise.n_traj;
    std::vector<std::vector<double>> all(static_cast<std::size_t>(n_traj));

    if (noise.gamma_ph <= 0.0) {
        // No randomness: every trajectory is the same deterministic run.
        const auto fid = detail::run_trajectory_batch(setup.H_eff, setup.s, setup.w, 0.0,
                                                      setup.dt_rule, t_max, samples,
                                                      noise.base_seed, 1);
        for (int i = 0; i < n_traj; ++i) all[std::size_t(i)] = fid[0];
    } else {
        constexpr int kBatchWidth = 25;
        const std::size_t batches = std::size_t((n_traj + kBatchWidth - 1) / kBatchWidth);
        parallel_for(batches, workers, [&](std::size_t b) {
            const int first = int(b) * kBatchWidth;
            const int width = std::min(kBatchWidth, n_traj - first);
            auto fid = detail::run_trajectory_batch(setup.H_eff, setup.s, setup.w, noise.gamma_ph,
                                                    setup.dt_rule, t_max, samples,
                                                    noise.base_seed + std::uint64_t(first), width);
            for (int c = 0; c < width; ++c) all[std::size_t(first + c)] = std::move(fid[std::size_t(c)]);
        });
    }

    FidelityTrace out;
    out.times.resize(std::size_t(samples));
    out.fidelity.assign(std::size_t(samples), 0.0);
    out.std_error.assign(std::size_t(samples), 0.0);
    for (int k = 0; k < samples; ++k) out.times[std::size_t(k)] = t_max * double(k) / double(samples - 1);
    for (int i = 0; i < n_traj; ++i)
        for (int k = 0; k < samples; ++k) out.fidelity[std::size_t(k)] += all[std::size_t(i)][std::size_t(k)];
    for (double& f : out.fidelity) f /= double(n_traj);
    for (int i = 0; i < n_traj; ++i)
        for (int k = 0; k < samples; ++k) {
            const double d = all[std::size_t(i)][std::size_t(k)] - out.fidelity[std::size_t(k)];
            out.std_error[std::size_t(k)] += d * d;
        }
    for (double& se : out.std_error)
        se = std::sqrt(se / double(n_traj - 1)) / std::sqrt(double(n_traj));
    return out;
}

// Deterministic effective-Hamiltonian run (no dephasing noise): the decay
// side of the trajectory method.
inline FidelityTrace effective_trace(const SearchProblem& p, const NoiseConfig& noise, double t_max,
                                     int samples = 200) {
    NoiseConfig quiet = noise;
    quiet.gamma_ph = 0.0;
    return dephasing_trajectory(p, quiet, t_max, noise.base_seed, samples);
}

struct ComparisonReport {
    FidelityTrace master;
    FidelityTrace effective;
    double max_abs_diff = 0.0;
    // Fraction of samples where the master-equation trace lies inside the
    // 3-standard-error envelope of the trajectory mean; 1.0 when the
    // effective side is deterministic (no envelope to test).
    double within_band_fraction = 1.0;
};

// Runs both methods on the same grid and reports their disagreement.
inline ComparisonReport compare_methods(const SearchProblem& p, const NoiseConfig& noise,
                                        double t_max, int samples = 200, unsigned workers = 0) {
    p.validate();
    noise.validate();
    if (p.n > kCrossValidateMaxAtoms)
        throw CapacityError("compare_methods: cross-validation is limited to n <= 64");

    ComparisonReport report;
    report.master = evolve_master(p, noise, t_max, samples);
    report.effective = noise.gamma_ph > 0.0
                           ? average_trajectories(p, noise, t_max, samples, workers)
                           : effective_trace(p, noise, t_max, samples);

    int inside = 0;
    for (int k = 0; k < samples; ++k) {
        const double diff =
            std::abs(report.master.fidelity[std::size_t(k)] - report.effective.fidelity[std::size_t(k)]);
        report.max_abs_diff = std::max(report.max_abs_diff, diff);
        if (!report.effective.std_error.empty() &&
            diff > 3.0 * report.effective.std_error[std::size_t(k)] + 1e-12)
            continue;
        ++inside;
    }
    if (!report.effective.std_error.empty())
        report.within_band_fraction = double(inside) / double(samples);
    return report;
}

} // namespace ctqw
