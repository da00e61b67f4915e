#pragma once

#include "solitonforge/core.hpp"
#include "solitonforge/scattering.hpp"

#include <optional>

namespace sf {

/// Waves at the roots of a phase point, gauge-normalized pointwise.
/// A double root appears twice in z; the second entry carries the z-derivative in jets.
struct WaveSet {
    cvec z;
    std::vector<WavePair> waves;
    std::vector<std::optional<WavePair>> jets;

    std::size_t size() const { return z.size(); }
};

/// psi = e^{-kappa} psi_l + e^{kappa} psi_r, renormalized at every grid point.
WavePair unbounded_wave(const GridField& u, cd z, cd kappa);

/// Waves psi_j = unbounded_wave(u, z_j, i beta(z_j)) with jets at double roots.
WaveSet addition_waves(const GridField& u, const PhasePoint& point);
WaveSet addition_waves(const JostSolver& solver, const PhasePoint& point);

struct GramDiagnostics {
    double trace_error = 0.0;      // max_x |Tr A(x) - expected|
    double max_condition = 0.0;    // largest estimated condition number of the Gram matrix
    std::size_t qr_fallbacks = 0;
};

/// Correction 2 A_12(x) with A = V H^{-1} V^*, H_jk = i psi_j^* psi_k / (z_k - conj z_j).
/// Fails with NumericError if the Gram matrix is numerically singular.
GridField gram_correction(const WaveSet& w, GramDiagnostics* diag = nullptr);

struct AddOptions {
    bool check_background = false;  // run locate_spectrum on u around the roots first
};

/// Adds the solitons of `point` to the background u.
GridField add_solitons(const GridField& u, const PhasePoint& point, const AddOptions& opt = {},
                       GramDiagnostics* diag = nullptr);

struct Removal {
    GridField u;
    PhasePoint point;
    SpectrumReport spectrum;
};

/// Removes every eigenvalue of v inside region and returns the background and removed data.
Removal remove_solitons(const GridField& v, const Region& region, GramDiagnostics* diag = nullptr);
Removal remove_solitons(const JostSolver& solver, const Region& region, GramDiagnostics* diag = nullptr,
                        const LocateOptions& locate = {});

/// Image of a z-wave of u under the N-fold transform: a z-wave of add_solitons(u, point).
WavePair propagate_wave(const GridField& u, const PhasePoint& point, const WavePair& probe);
WavePair propagate_wave(const WaveSet& w, const WavePair& probe);

/// Roots with multiplicity from a spectrum; clusters above multiplicity 2 are split by 1e-3.
std::vector<RootCluster> addition_roots(const SpectrumSym& s);

}  // namespace sf
