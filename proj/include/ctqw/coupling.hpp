// coupling.hpp — Pairwise atom-atom coupling laws for the photonic
// environments a 1D chain may be embedded in, and the model record that
// selects one of them.
//
// Each law maps an atom separation r (units of lambda_a) to a pair
// (J, Gamma): the coherent exchange strength and the collective decay rate,
// both in units of the free-space single-atom rate.

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>

#include "ctqw/units.hpp"

namespace ctqw {

struct Coupling {
    double j = 0.0;     // coherent exchange strength J(r)
    double gamma = 0.0; // collective decay rate Gamma(r)
};

// Free-space dipole-dipole law for dipoles perpendicular to the chain axis.
inline Coupling coupling_free_space(double r) {
    if (!(r > 0.0)) throw std::domain_error("coupling_free_space: r must be > 0");
    const double x = units::k_a * r;
    const double sx = std::sin(x);
    const double cx = std::cos(x);
    const double x2 = x * x;
    const double x3 = x2 * x;
    return {0.75 * (-cx / x + sx / x2 + cx / x3),
            1.5 * (sx / x + cx / x2 - sx / x3)};
}

// Idealized power-law exchange J = r^-alpha; no dissipation channel.
inline Coupling coupling_pure_power_law(double r, double alpha) {
    if (!(r > 0.0)) throw std::domain_error("coupling_pure_power_law: r must be > 0");
    return {std::pow(r, -alpha), 0.0};
}

// Waveguide with the atomic transition inside the photonic band gap:
// exponentially decaying exchange, radiative decay suppressed.
inline Coupling coupling_waveguide_bandgap(double r, double gamma_wg, double kappa) {
    if (!(r > 0.0)) throw std::domain_error("coupling_waveguide_bandgap: r must be > 0");
    return {0.5 * gamma_wg * std::exp(-kappa * r), 0.0};
}

// Waveguide with a propagating mode at the transition frequency.
// Both components oscillate with separation, exactly as tabulated.
inline Coupling coupling_waveguide_propagating(double r, double gamma_wg) {
    if (!(r > 0.0)) throw std::domain_error("coupling_waveguide_propagating: r must be > 0");
    const double x = units::k_a * r;
    return {0.5 * gamma_wg * std::sin(x), 0.5 * gamma_wg * std::cos(x)};
}

// Dispersive cavity: distance-independent exchange j_c = g^2/Delta. Decay
// into free space is untouched by the cavity, so Gamma keeps the free-space
// form.
inline Coupling coupling_cavity(double r, double j_c) {
    if (!(r > 0.0)) throw std::domain_error("coupling_cavity: r must be > 0");
    return {j_c, coupling_free_space(r).gamma};
}

// ----------------------------- model record ---------------------------------

struct FreeSpace {};

struct PurePowerLaw {
    double alpha = 1.0; // exchange exponent
};

struct WaveguideBandgap {
    double gamma_wg = 20.0; // waveguide-mode decay rate
    double kappa = 0.0;     // inverse coupling range; 0 gives the complete graph
};

struct WaveguidePropagating {
    double gamma_wg = 20.0;
};

struct Cavity {
    double j_c = 10.0; // dispersive exchange g^2/Delta
};

using CouplingKind =
    std::variant<FreeSpace, PurePowerLaw, WaveguideBandgap, WaveguidePropagating, Cavity>;

struct CouplingModel {
    CouplingKind kind;
    double spacing = 1.0; // nearest-neighbour separation, units of lambda_a

    void validate() const {
        if (!(spacing > 0.0)) throw std::invalid_argument("CouplingModel: spacing must be > 0");
        std::visit(
            [](const auto& k) {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, PurePowerLaw>) {
                    if (!(k.alpha > 0.0))
                        throw std::invalid_argument("CouplingModel: alpha must be > 0");
                } else if constexpr (std::is_same_v<T, WaveguideBandgap>) {
                    if (!(k.gamma_wg > 0.0))
                        throw std::invalid_argument("CouplingModel: gamma_wg must be > 0");
                    if (k.kappa < 0.0)
                        throw std::invalid_argument("CouplingModel: kappa must be >= 0");
                } else if constexpr (std::is_same_v<T, WaveguidePropagating>) {
                    if (!(k.gamma_wg > 0.0))
                        throw std::invalid_argument("CouplingModel: gamma_wg must be > 0");
                } else if constexpr (std::is_same_v<T, Cavity>) {
                    if (!(k.j_c > 0.0))
                        throw std::invalid_argument("CouplingModel: j_c must be > 0");
                }
            },
            kind);
    }

    // Stable tag used by the CLI and in output files.
    std::string label() const {
        return std::visit(
            [](const auto& k) -> std::string {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, FreeSpace>) return "free-space";
                else if constexpr (std::is_same_v<T, PurePowerLaw>) return "power-law";
                else if constexpr (std::is_same_v<T, WaveguideBandgap>) return "waveguide-gap";
                else if constexpr (std::is_same_v<T, WaveguidePropagating>) return "waveguide-prop";
                else return "cavity";
            },
            kind);
    }
};

// Pair coupling at separation r for the selected model.
inline Coupling evaluate(const CouplingModel& m, double r) {
    return std::visit(
        [r](const auto& k) -> Coupling {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, FreeSpace>) return coupling_free_space(r);
            else if constexpr (std::is_same_v<T, PurePowerLaw>) return coupling_pure_power_law(r, k.alpha);
            else if constexpr (std::is_same_v<T, WaveguideBandgap>)
                return coupling_waveguide_bandgap(r, k.gamma_wg, k.kappa);
            else if constexpr (std::is_same_v<T, WaveguidePropagating>)
                return coupling_waveguide_propagating(r, k.gamma_wg);
            else return coupling_cavity(r, k.j_c);
        },
        m.kind);
}

// Single-atom decay rate Gamma_ii placed on the decay-matrix diagonal.
// Free space and cavity keep the free-space rate; the band-gap waveguide and
// the idealized power law have none; the propagating waveguide keeps the
// tabulated r -> 0 limit of its Gamma law.
inline double single_atom_decay(const CouplingModel& m) {
    return std::visit(
        [](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, FreeSpace>) return units::gamma_free;
            else if constexpr (std::is_same_v<T, Cavity>) return units::gamma_free;
            else if constexpr (std::is_same_v<T, WaveguidePropagating>) return 0.5 * k.gamma_wg;
            else return 0.0;
        },
        m.kind);
}

} // namespace ctqw
