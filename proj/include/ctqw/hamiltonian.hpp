// hamiltonian.hpp — Single-excitation-sector matrix assembly: coupling
// matrices, the target projector, the Hermitian search Hamiltonian, and the
// non-Hermitian effective Hamiltonian with collective decay.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <vector>

#include "ctqw/problem.hpp"

namespace ctqw {

using complexd = std::complex<double>;

struct CouplingMatrices {
    Eigen::MatrixXd J; // coherent couplings, symmetric, zero diagonal
    Eigen::MatrixXd G; // collective decay rates, symmetric, single-atom rate on the diagonal
};

// Fill J and G from the model's pair law at r = |i-j| * spacing. The coherent
// diagonal is left at zero: a uniform diagonal only shifts the spectrum and
// cannot change gaps, overlaps, or fidelities.
inline CouplingMatrices build_coupling_matrices(const SearchProblem& p) {
    p.validate();
    const int n = p.n;
    CouplingMatrices m{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n)};
    for (int i = 0; i < n; ++i) {
        m.G(i, i) = single_atom_decay(p.model);
        for (int j = i + 1; j < n; ++j) {
            const Coupling c = evaluate(p.model, double(j - i) * p.model.spacing);
            m.J(i, j) = c.j;
            m.J(j, i) = c.j;
            m.G(i, j) = c.gamma;
            m.G(j, i) = c.gamma;
        }
    }
    return m;
}

// |w><w| for the equal-weight superposition of the marked nodes.
inline Eigen::MatrixXd build_target_projector(const std::vector<int>& targets, int n) {
    SearchProblem check{n, targets, CouplingModel{Cavity{}}, 0.0};
    check.validate();
    const double amp = 1.0 / std::sqrt(double(targets.size()));
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    for (int t : targets) w(t - 1) = amp;
    return w * w.transpose();
}

// Sign with which the coherent coupling matrix enters the search Hamiltonian.
// The tabulated free-space J carries the Green-function sign convention,
// which places the uniform superposition at the bottom of the coherent band;
// the search procedure tracks the two largest eigenvalues, so for that model
// H_0 enters with the opposite sign, putting |s> at the top of the band.
inline double search_orientation(const CouplingModel& m) {
    return std::holds_alternative<FreeSpace>(m.kind) ? -1.0 : 1.0;
}

struct SearchHamiltonian {
    Eigen::MatrixXd H; // symmetric by construction
    double eta = 0.0;
};

// H = H_0 + eta |w><w|, with H_0 the oriented coherent coupling matrix.
inline SearchHamiltonian build_search_hamiltonian(const SearchProblem& p) {
    const CouplingMatrices m = build_coupling_matrices(p);
    Eigen::MatrixXd H = search_orientation(p.model) * m.J;
    H += p.eta * build_target_projector(p.targets, p.n);
    return {std::move(H), p.eta};
}

// H_eff = H_s - (i/2) G. With decay disabled this is exactly the (complex
// cast of the) search Hamiltonian. The -i/2 sign makes the state norm decay
// under exp(-i H_eff t) whenever G is positive semidefinite.
inline Eigen::MatrixXcd build_effective_hamiltonian(const SearchProblem& p, bool include_decay) {
    const SearchHamiltonian hs = build_search_hamiltonian(p);
    Eigen::MatrixXcd heff = hs.H.cast<complexd>();
    if (include_decay) {
        const CouplingMatrices m = build_coupling_matrices(p);
        heff -= complexd(0.0, 0.5) * m.G.cast<complexd>();
    }
    return heff;
}

inline Eigen::VectorXd uniform_state_real(int n) {
    if (n < 1) throw std::invalid_argument("uniform_state: n must be >= 1");
    return Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(double(n)));
}

inline Eigen::VectorXd target_state_real(const std::vector<int>& targets, int n) {
    SearchProblem check{n, targets, CouplingModel{Cavity{}}, 0.0};
    check.validate();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    const double amp = 1.0 / std::sqrt(double(targets.size()));
    for (int t : targets) w(t - 1) = amp;
    return w;
}

inline Eigen::VectorXcd uniform_state(int n) { return uniform_state_real(n).cast<complexd>(); }

inline Eigen::VectorXcd target_state(const std::vector<int>& targets, int n) {
    return target_state_real(targets, n).cast<complexd>();
}

} // namespace ctqw
