#pragma once

#include "solitonforge/core.hpp"
#include "solitonforge/scattering.hpp"

#include <cstdint>
#include <string>

namespace sf {

enum class Flow { nls, mkdv };

Flow parse_flow(const std::string& s);
std::string to_string(Flow f);

/// Hierarchy index of a flow: 2 for NLS, 3 for mKdV.
int flow_index(Flow f);

/// Exact flow on phase-space coordinates: beta += t * 2^{n-1} z^n reduced mod P_z P_conj(z).
PhasePoint flow_phase(const PhasePoint& point, int n, double t);
PhasePoint flow_phase(const PhasePoint& point, Flow f, double t);

struct EvolveConfig {
    Flow flow = Flow::nls;
    double dt = 1e-3;
    double t_final = 1.0;
    std::vector<double> record_times;   // defaults to {t_final}
    int order = 4;                      // NLS splitting order: 2 (Strang), 4 (Yoshida) or 6 (Kahan-Li)

    static EvolveConfig defaults(Flow f);
    void validate() const;
};

struct Snapshot {
    double t;
    GridField u;
};

/// Pseudospectral evolution. NLS: i u_t + u_xx + 2|u|^2 u = 0 by split-step Fourier.
/// mKdV: u_t + u_xxx + 6|u|^2 u_x = 0 by integrating-factor RK4.
std::vector<Snapshot> evolve(const GridField& u0, const EvolveConfig& cfg);

/// Single final state at t_final (may be negative).
GridField evolve_to(const GridField& u0, const EvolveConfig& cfg);

enum class Perturbation { gaussian, sech_bump, noise };
Perturbation parse_perturbation(const std::string& s);
std::string to_string(Perturbation p);

/// Perturbation profile with unit L2 norm.
GridField perturbation_profile(const Grid& g, Perturbation p, std::uint64_t seed = 1);

struct StabilityReport {
    double eps = 0.0;
    std::vector<double> times;
    std::vector<double> manifold_distance;
    std::vector<double> residual_mass;
    std::vector<double> spectrum_drift;
    std::vector<std::string> flag;   // "ok" or the removal failure message
};

struct StabilityOptions {
    Region region{-2, 2, 0.5, 3};
    double jost_accuracy = 0.06;   // see JostSolver
    LocateOptions locate;
};

StabilityReport stability_experiment(const PhasePoint& point, double eps, Perturbation shape, std::uint64_t seed,
                                     const EvolveConfig& cfg, const Grid& grid = Grid{},
                                     const StabilityOptions& opt = {});

}  // namespace sf
