// spectral.hpp — Eigenanalysis of the search Hamiltonian: deterministic
// descending eigendecomposition, gap/overlap summaries, gap curves over eta,
// and the scan-plus-golden-section search for the optimal eta.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ctqw/errors.hpp"
#include "ctqw/hamiltonian.hpp"

namespace ctqw {

template <typename Scalar>
struct EigenPairsT {
    Eigen::VectorXd values;                                    // descending
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> vectors; // columns match values
};

using EigenPairs = EigenPairsT<double>;
using EigenPairsZ = EigenPairsT<complexd>;

namespace detail {

inline void fix_column_phase(Eigen::Ref<Eigen::VectorXd> v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > 1e-12) {
            if (v(i) < 0.0) v = -v;
            return;
        }
    }
}

inline void fix_column_phase(Eigen::Ref<Eigen::VectorXcd> v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > 1e-12) {
            v *= std::conj(v(i)) / std::abs(v(i));
            return;
        }
    }
}

} // namespace detail

// Eigendecomposition of a Hermitian matrix with a deterministic output
// convention: eigenvalues sorted descending, each eigenvector scaled so its
// first nonzero component is positive (real positive in the complex case).
template <typename Derived>
EigenPairsT<typename Derived::Scalar> eig_descending(const Eigen::MatrixBase<Derived>& H_in) {
    using Scalar = typename Derived::Scalar;
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const Mat H = H_in;
    if (H.rows() != H.cols()) throw std::invalid_argument("eig_descending: matrix must be square");
    const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
    if (((H - H.adjoint()).cwiseAbs().maxCoeff()) > 1e-12 * scale)
        throw std::invalid_argument("eig_descending: matrix is not Hermitian");

    Eigen::SelfAdjointEigenSolver<Mat> solver(H);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eig_descending: eigendecomposition failed");

    const Eigen::Index n = H.rows();
    EigenPairsT<Scalar> out;
    out.values = solver.eigenvalues().reverse();
    out.vectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        out.vectors.col(k) = solver.eigenvectors().col(n - 1 - k);
        detail::fix_column_phase(out.vectors.col(k));
    }
    return out;
}

// ------------------------------ gap summaries --------------------------------

struct SpectralSummary {
    double e0 = 0.0;   // largest eigenvalue
    double e1 = 0.0;   // second largest
    double gap = 0.0;  // e0 - e1
    double ov_s0 = 0.0, ov_s1 = 0.0; // |<s|phi_0>|^2, |<s|phi_1>|^2
    double ov_w0 = 0.0, ov_w1 = 0.0; // same against the target state
    // Top pair within 1e-12 of each other. Individual eigenvectors are then
    // arbitrary within the eigenspace; the overlap fields each carry half of
    // the basis-independent two-dimensional eigenspace weight.
    bool degenerate = false;
};

inline SpectralSummary spectral_summary_of(const Eigen::MatrixXd& H, const Eigen::VectorXd& s,
                                           const Eigen::VectorXd& w) {
    const EigenPairs eig = eig_descending(H);
    const Eigen::Index n = H.rows();
    if (n < 2) throw std::invalid_argument("spectral_summary: need n >= 2");
    SpectralSummary out;
    out.e0 = eig.values(0);
    out.e1 = eig.values(1);
    out.gap = out.e0 - out.e1;
    const double s0 = eig.vectors.col(0).dot(s);
    const double s1 = eig.vectors.col(1).dot(s);
    const double w0 = eig.vectors.col(0).dot(w);
    const double w1 = eig.vectors.col(1).dot(w);
    if (out.gap < 1e-12) {
        out.degenerate = true;
        out.ov_s0 = out.ov_s1 = 0.5 * (s0 * s0 + s1 * s1);
        out.ov_w0 = out.ov_w1 = 0.5 * (w0 * w0 + w1 * w1);
    } else {
        out.ov_s0 = s0 * s0;
        out.ov_s1 = s1 * s1;
        out.ov_w0 = w0 * w0;
        out.ov_w1 = w1 * w1;
    }
    return out;
}

inline SpectralSummary spectral_summary(const SearchProblem& p) {
    const SearchHamiltonian hs = build_search_hamiltonian(p);
    return spectral_summary_of(hs.H, uniform_state_real(p.n), target_state_real(p.targets, p.n));
}

inline std::vector<double> geometric_grid(double lo, double hi, int points) {
    if (!(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("geometric_grid: need 0 < lo < hi");
    if (points < 2) throw std::invalid_argument("geometric_grid: need at least 2 points");
    std::vector<double> g(points);
    const double lr = std::log(hi / lo);
    for (int k = 0; k < points; ++k) g[k] = lo * std::exp(lr * double(k) / double(points - 1));
    return g;
}

// One summary per grid point. The grid must be strictly increasing and
// positive.
inline std::vector<std::pair<double, SpectralSummary>> gap_curve(const SearchProblem& p,
                                                                 const std::vector<double>& eta_grid) {
    p.validate();
    if (eta_grid.empty()) throw std::invalid_argument("gap_curve: empty eta grid");
    for (std::size_t k = 0; k < eta_grid.size(); ++k) {
        if (!(eta_grid[k] > 0.0)) throw std::invalid_argument("gap_curve: grid values must be > 0");
        if (k > 0 && !(eta_grid[k] > eta_grid[k - 1]))
            throw std::invalid_argument("gap_curve: grid must be strictly increasing");
    }
    const Eigen::MatrixXd H0 = build_search_hamiltonian(p.with_eta(0.0)).H;
    const Eigen::MatrixXd Ht = build_target_projector(p.targets, p.n);
    const Eigen::VectorXd s = uniform_state_real(p.n);
    const Eigen::VectorXd w = target_state_real(p.targets, p.n);
    std::vector<std::pair<double, SpectralSummary>> out;
    out.reserve(eta_grid.size());
    for (double eta : eta_grid)
        out.emplace_back(eta, spectral_summary_of(H0 + eta * Ht, s, w));
    return out;
}

// ------------------------------ eta optimum ----------------------------------

struct GapOptimum {
    double eta_opt = 0.0;
    double gap_min = 0.0;
    double t_gap = 0.0; // pi / gap_min
    SpectralSummary summary; // computed at eta_opt
};

struct EtaBracket {
    double lo = 1e-2;
    double hi = 1e4;
    int scan_points = 200; // coarse geometric scan resolution
};

namespace detail {

// Gap evaluator that reuses the assembled H_0 and projector; eigenvalues only.
class GapFunction {
  public:
    explicit GapFunction(const SearchProblem& p)
        : H0_(build_search_hamiltonian(p.with_eta(0.0)).H),
          Ht_(build_target_projector(p.targets, p.n)) {}

    double operator()(double eta) const {
        Eigen::MatrixXd H = H0_ + eta * Ht_;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(H, Eigen::EigenvaluesOnly);
        const Eigen::Index n = H.rows();
        return solver.eigenvalues()(n - 1) - solver.eigenvalues()(n - 2);
    }

    const Eigen::MatrixXd& h0() const { return H0_; }
    const Eigen::MatrixXd& ht() const { return Ht_; }

  private:
    Eigen::MatrixXd H0_;
    Eigen::MatrixXd Ht_;
};

} // namespace detail

// Coarse geometric scan over the bracket followed by golden-section
// refinement of the grid-bracketed minimum, to a relative eta tolerance of
// 1e-4. A minimum on the bracket edge raises BracketError.
inline GapOptimum find_eta_opt(const SearchProblem& p, const EtaBracket& bracket = {}) {
    p.validate();
    if (!(bracket.lo > 0.0) || !(bracket.hi > bracket.lo))
        throw std::invalid_argument("find_eta_opt: need 0 < lo < hi");
    const detail::GapFunction gap(p);
    const std::vector<double> grid = geometric_grid(bracket.lo, bracket.hi, bracket.scan_points);

    std::size_t arg = 0;
    std::vector<double> gaps(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        gaps[k] = gap(grid[k]);
        if (gaps[k] < gaps[arg]) arg = k;
    }
    if (arg == 0 || arg + 1 == grid.size())
        throw BracketError("find_eta_opt: gap minimum at bracket edge, widen the bracket");

    double a = grid[arg - 1];
    double b = grid[arg + 1];
    constexpr double invphi = 0.6180339887498949; // (sqrt(5)-1)/2
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = gap(c);
    double fd = gap(d);
    while ((b - a) > 1e-4 * 0.5 * (a + b)) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - invphi * (b - a);
            fc = gap(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + invphi * (b - a);
            fd = gap(d);
        }
    }

    GapOptimum out;
    out.eta_opt = 0.5 * (a + b);
    out.summary = spectral_summary_of(gap.h0() + out.eta_opt * gap.ht(), uniform_state_real(p.n),
                                      target_state_real(p.targets, p.n));
    out.gap_min = out.summary.gap;
    out.t_gap = std::numbers::pi / out.gap_min;
    return out;
}

} // namespace ctqw
