#pragma once

#include "solitonforge/core.hpp"
#include "solitonforge/scattering.hpp"

#include <array>
#include <map>

namespace sf {

/// Conserved densities integrated with spectral derivatives:
/// H0 = |u|^2, H1 = -i u conj(u_x), H2 = |u_x|^2 - |u|^4,
/// H3 = -i (u_x conj(u_xx) - 3|u|^2 u conj(u_x)),
/// H4 = |u_xx|^2 - |(|u|^2)_x|^2 - 3/2 |(u^2)_x|^2 + 2|u|^6.
double hamiltonian(const GridField& u, int n);
std::array<double, 5> hamiltonians(const GridField& u);

/// Xi_s(z) = Im int_0^z (1 + w^2)^s dw along the straight segment.
double xi_s(cd z, double s);

struct EnergyOptions {
    double tau_cut = 25.0;     // truncation of the ray integral
    std::size_t nodes = 96;    // quadrature nodes on the ray
};

/// Conserved energy E_s from the ray integral of ln T(i tau / 2), tau >= 1.
/// Integers s = 0, 1, 2 reduce to combinations of H0, H2, H4.
double energy_Es(const GridField& u, double s, const EnergyOptions& opt = {});
double energy_Es(const JostSolver& solver, const std::array<double, 5>& H, double s, const EnergyOptions& opt = {});

struct TraceParts {
    double mass = 0.0;
    double continuous = 0.0;   // (1/pi) int ln|T(xi/2)| dxi
    double discrete = 0.0;     // 4 sum Im z_j
    double residual = 0.0;
    double xi_max = 0.0;
    std::size_t count = 0;
};

/// L2 trace formula residual |mass - continuous - discrete|.
TraceParts trace_parts(const GridField& u, const Region& region = Region{-5, 5, 0.05, 5});
double trace_residual(const GridField& u, const Region& region = Region{-5, 5, 0.05, 5});

/// (1/pi) int ln|T(xi/2)| dxi on the real axis, trapezoid rule with spacing h.
double continuous_mass(const JostSolver& solver, double h = 0.05, double* xi_max = nullptr);

struct EnergyReport {
    std::array<double, 5> H{};
    std::map<double, double> Es;
    double trace_residual = 0.0;
};

EnergyReport energy_report(const GridField& u, const std::vector<double>& s_values,
                           const Region& region = Region{-5, 5, 0.05, 5});

}  // namespace sf
