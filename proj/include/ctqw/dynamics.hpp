// dynamics.hpp — State propagation and search-time extraction. Closed-system
// evolution goes through one spectral decomposition reused across all time
// samples; non-Hermitian evolution uses a classic fixed-step 4th-order
// integrator.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "ctqw/errors.hpp"
#include "ctqw/spectral.hpp"

namespace ctqw {

struct FidelityTrace {
    std::vector<double> times;
    std::vector<double> fidelity;
    std::vector<double> std_error; // empty unless trajectory-averaged
};

struct SearchResult {
    double t_opt = 0.0;
    double f_max = 0.0;
    double eta_used = 0.0;
    double eta_t_product = 0.0;
    bool interior_peak = true; // false when no interior maximum was found
};

// Closed evolution by spectral decomposition: expand, phase, reassemble.
class Propagator {
  public:
    explicit Propagator(const Eigen::MatrixXd& H) : eig_(eig_descending(H)) {}

    Eigen::VectorXcd evolve(const Eigen::VectorXcd& psi0, double t) const {
        const Eigen::Index n = eig_.values.size();
        if (psi0.size() != n) throw std::invalid_argument("Propagator: state dimension mismatch");
        if (t == 0.0) return psi0;
        Eigen::VectorXcd coeffs = eig_.vectors.transpose().cast<complexd>() * psi0;
        for (Eigen::Index j = 0; j < n; ++j)
            coeffs(j) *= std::polar(1.0, -eig_.values(j) * t);
        return eig_.vectors.cast<complexd>() * coeffs;
    }

    const EigenPairs& eig() const { return eig_; }

  private:
    EigenPairs eig_;
};

inline Eigen::VectorXcd propagate_closed(const Eigen::MatrixXd& H, const Eigen::VectorXcd& psi0,
                                         double t) {
    return Propagator(H).evolve(psi0, t);
}

// F(t) = |sum_j p_j e^{-i E_j t}|^2 with p_j = <w|phi_j><phi_j|s>. Each
// evaluation is O(n) once the decomposition is in hand.
class FidelityKernel {
  public:
    FidelityKernel(const Eigen::MatrixXd& H, const Eigen::VectorXd& s, const Eigen::VectorXd& w) {
        const EigenPairs eig = eig_descending(H);
        evals_ = eig.values;
        p_ = (eig.vectors.transpose() * w).cwiseProduct(eig.vectors.transpose() * s);
    }

    double operator()(double t) const {
        double re = 0.0, im = 0.0;
        for (Eigen::Index j = 0; j < evals_.size(); ++j) {
            re += p_(j) * std::cos(evals_(j) * t);
            im -= p_(j) * std::sin(evals_(j) * t);
        }
        return re * re + im * im;
    }

  private:
    Eigen::VectorXd evals_;
    Eigen::VectorXd p_;
};

inline FidelityKernel fidelity_kernel(const SearchProblem& p) {
    return {build_search_hamiltonian(p).H, uniform_state_real(p.n),
            target_state_real(p.targets, p.n)};
}

// F(t) on a uniform grid over [0, t_max].
inline FidelityTrace fidelity_trace(const SearchProblem& p, double t_max, int samples) {
    p.validate();
    if (!(t_max > 0.0)) throw std::invalid_argument("fidelity_trace: t_max must be > 0");
    if (samples < 2) throw std::invalid_argument("fidelity_trace: need at least 2 samples");
    const FidelityKernel kernel = fidelity_kernel(p);
    FidelityTrace out;
    out.times.resize(samples);
    out.fidelity.resize(samples);
    for (int k = 0; k < samples; ++k) {
        out.times[k] = t_max * double(k) / double(samples - 1);
        out.fidelity[k] = kernel(out.times[k]);
    }
    return out;
}

namespace detail {

// Earliest interior local maximum of f on [0, t_hi] that reaches the given
// fraction of the scanned global maximum, golden-refined. Returns false when
// the scan has no interior local maximum at all.
template <typename F>
bool earliest_good_peak(const F& f, double t_hi, int samples, double fraction, double& t_out,
                        double& f_out) {
    std::vector<double> ts(samples + 1), fs(samples + 1);
    for (int k = 0; k <= samples; ++k) {
        ts[k] = t_hi * double(k) / double(samples);
        fs[k] = f(ts[k]);
    }
    double fglob = 0.0;
    for (int k = 0; k <= samples; ++k) fglob = std::max(fglob, fs[k]);

    int pick = -1;
    for (int k = 1; k < samples; ++k) {
        if (fs[k] >= fs[k - 1] && fs[k] >= fs[k + 1] && fs[k] >= fraction * fglob) {
            pick = k;
            break;
        }
    }
    if (pick < 0) return false;

    // golden-section maximization on the bracketing interval
    double a = ts[pick - 1], b = ts[pick + 1];
    constexpr double invphi = 0.6180339887498949;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    while ((b - a) > 1e-5 * std::max(ts[pick], 1e-300)) {
        if (fc > fd) {
            b = d; d = c; fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    t_out = 0.5 * (a + b);
    f_out = f(t_out);
    return true;
}

} // namespace detail

// Search-time extraction. Scans F(t) on [0, 3*t_gap] at 400 samples per
// t_gap and takes the earliest local maximum reaching 90% of the scanned
// global maximum, then golden-refines it. The 90% fraction keeps the choice
// on the first oscillation crest: slow beats can push later crests a fraction
// of a percent higher, which is a different oscillation, not a better search.
// Falls back to a 10x window when no interior peak exists; a still-monotone
// trace comes back flagged with t_opt = t_max.
inline SearchResult find_t_opt(const SearchProblem& p, const GapOptimum& gap_opt) {
    const SearchProblem tuned = p.with_eta(gap_opt.eta_opt);
    const FidelityKernel kernel = fidelity_kernel(tuned);

    SearchResult out;
    out.eta_used = gap_opt.eta_opt;
    constexpr double kPeakFraction = 0.90;
    constexpr int kSamplesPerGapTime = 400;

    double t = 0.0, f = 0.0;
    for (double window : {3.0, 10.0}) {
        const double t_hi = window * gap_opt.t_gap;
        const int samples = int(window) * kSamplesPerGapTime;
        if (detail::earliest_good_peak(kernel, t_hi, samples, kPeakFraction, t, f)) {
            out.t_opt = t;
            out.f_max = f;
            out.eta_t_product = out.eta_used * out.t_opt;
            return out;
        }
    }
    out.interior_peak = false;
    out.t_opt = 10.0 * gap_opt.t_gap;
    out.f_max = kernel(out.t_opt);
    out.eta_t_product = out.eta_used * out.t_opt;
    return out;
}

// ----------------------- non-Hermitian propagation ---------------------------

// Step-size rule: dt = 0.05 / max row sum of |H_eff|.
inline double suggest_dt(const Eigen::MatrixXcd& H_eff) {
    const double norm_inf = H_eff.cwiseAbs().rowwise().sum().maxCoeff();
    if (!(norm_inf > 0.0)) return 0.05;
    return 0.05 / norm_inf;
}

inline Eigen::VectorXcd rk4_step(const Eigen::MatrixXcd& H_eff, const Eigen::VectorXcd& psi,
                                 double dt) {
    const complexd mi(0.0, -1.0);
    const Eigen::VectorXcd k1 = mi * (H_eff * psi);
    const Eigen::VectorXcd k2 = mi * (H_eff * (psi + 0.5 * dt * k1));
    const Eigen::VectorXcd k3 = mi * (H_eff * (psi + 0.5 * dt * k2));
    const Eigen::VectorXcd k4 = mi * (H_eff * (psi + dt * k3));
    return psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Fixed-step integration of dpsi/dt = -i H_eff psi; returns the state after
// every step. Norm growth past 1e-6 of the initial norm signals a sign or
// step-size misuse and raises InstabilityError.
inline std::vector<Eigen::VectorXcd> propagate_nonhermitian(const Eigen::MatrixXcd& H_eff,
                                                            const Eigen::VectorXcd& psi0, double dt,
                                                            int steps) {
    if (!(dt > 0.0)) throw std::invalid_argument("propagate_nonhermitian: dt must be > 0");
    if (steps < 0) throw std::invalid_argument("propagate_nonhermitian: steps must be >= 0");
    const double norm_cap = psi0.norm() * (1.0 + 1e-6);
    std::vector<Eigen::VectorXcd> path;
    path.reserve(std::size_t(steps));
    Eigen::VectorXcd psi = psi0;
    for (int k = 0; k < steps; ++k) {
        psi = rk4_step(H_eff, psi, dt);
        if (psi.norm() > norm_cap)
            throw InstabilityError("propagate_nonhermitian: state norm grew past tolerance");
        path.push_back(psi);
    }
    return path;
}

} // namespace ctqw
