#pragma once

#include "solitonforge/core.hpp"
#include "solitonforge/evolution.hpp"

#include <array>
#include <functional>
#include <optional>
#include <string>

namespace sf {

struct TwoSolParams {
    cd z1{0.0, 1.0};
    cd z2{0.0, 1.0};
    std::array<double, 4> beta{};

    void validate() const;
    PhasePoint phase_point() const;
};

/// Closed-form 2-soliton, exact for z1 = z2 (double eigenvalue).
/// gamma_j = -i(beta(z_j) + z_j x); overflow-safe for large |Re gamma|.
cd closed_form_Q(const TwoSolParams& p, double x);
GridField closed_form_Q(const TwoSolParams& p, const Grid& g);

struct EffectiveParams {
    cd z_plus, z_minus;
    double x_plus = 0.0, x_minus = 0.0;
    double theta_plus = 0.0, theta_minus = 0.0;   // mod pi
    cd alpha0, sigma0, gamma00;
    double x0 = 0.0, theta = 0.0;
    bool split = false;    // false in the single-bump regime |alpha0| < 4
};

/// Centers x_j = -Im beta(z_j) / Im z_j and phases Re beta(z_j) + x_j Re z_j of the constituents.
std::array<double, 2> constituent_centers(const TwoSolParams& p);

EffectiveParams effective_params(const TwoSolParams& p);

struct Bump {
    double location;
    double amplitude;
    double frequency;   // -Im(u'/u)/2 at the peak
    double phase;       // -arg u(peak)/2 mod pi
};

struct BumpReport {
    std::vector<Bump> bumps;
    bool decay_ok = true;
};

/// Local maxima of |u| above threshold (default 5% of the peak) with prominence at least threshold,
/// refined by golden-section search on the trigonometric interpolant.
BumpReport bump_analysis(const GridField& u, double threshold = -1.0);
/// Same analysis for a field known in closed form; g sets the coarse search grid.
BumpReport bump_analysis(const Grid& g, const std::function<cd(double)>& f, double threshold = -1.0);

/// pi-periodic distance between two phases.
double phase_distance(double a, double b);

struct TrajectoryPoint {
    double t = 0.0;
    TwoSolParams params;
    EffectiveParams effective;
    BumpReport bumps;
    std::string regime;
};

/// Regime of the pair: double, split-velocity-resonant, split-velocity-nonresonant, split-scale, quasiperiodic.
std::string classify_regime(const TwoSolParams& p, Flow flow);

/// Evolves beta by the exact flow and analyzes the closed form at each time.
std::vector<TrajectoryPoint> trajectory(const TwoSolParams& p, Flow flow, const std::vector<double>& times,
                                        const Grid& g = Grid{});

/// Advances beta by the exact flow for time t (PDE time).
TwoSolParams flow_params(const TwoSolParams& p, Flow flow, double t);

}  // namespace sf
