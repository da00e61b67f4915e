#pragma once

#include "solitonforge/core.hpp"

#include <array>
#include <map>
#include <memory>
#include <mutex>

namespace sf {

/// Which exponential has been divided out of the stored components.
/// left: psi = e^{-izx} (comp1, comp2); right: psi = e^{izx} (comp1, comp2).
enum class Renorm { left, right, none };

struct WavePair {
    Grid grid;
    cvec comp1;
    cvec comp2;
    Renorm renorm = Renorm::none;
    cd z{};
};

struct Region {
    double x0 = -1.0, x1 = 1.0, y0 = 0.5, y1 = 2.0;

    bool contains(cd z) const { return z.real() > x0 && z.real() < x1 && z.imag() > y0 && z.imag() < y1; }
    void validate() const;
};

struct SpectrumReport {
    std::size_t count = 0;
    SpectrumSym spectrum;  // valid when count > 0
    cvec roots;            // with multiplicity, clustered roots repeated
    cvec contour_s;        // raw contour power sums s_1..s_count
    Region region;
    std::size_t contour_samples = 0;
};

/// Renormalized Jost solutions and their z-derivatives on the grid.
/// c1[d][j], c2[d][j] hold the d-th z-derivative of the stored components at x_j.
struct JostSweep {
    cd z{};
    int order = 0;
    std::vector<cvec> c1, c2;
};

/// Integrates the spectral problem for a fixed potential. The potential is sampled
/// between grid points by band-limited interpolation; tables are cached per substep count.
class JostSolver {
public:
    explicit JostSolver(const GridField& u, double accuracy = 0.06);

    const GridField& potential() const { return u_; }

    /// Left solution, data (1,0) at x_min, integrated forward through index `stop`.
    JostSweep left(cd z, int order = 0, std::size_t stop = npos) const;
    /// Right solution, data (0,1) at x_max, integrated backward down to index `stop`.
    JostSweep right(cd z, int order = 0, std::size_t stop = 0) const;

    /// Wronskian det(psi_l, psi_r) = 1/T(z) and its first `order` z-derivatives.
    cvec transmission_inv_jet(cd z, int order = 0) const;
    cd transmission_inv(cd z) const { return transmission_inv_jet(z, 0)[0]; }

    int substeps(cd z) const;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    struct Table {
        int stride = 0;  // 2m + 1
        cvec u;          // u[j * stride + l] = u(x_j + l dx / (2m)), l = 0 .. 2m
    };
    std::shared_ptr<const Table> table(int m) const;

    GridField u_;
    double accuracy_;
    double umax_;
    mutable std::mutex mutex_;
    mutable std::map<int, std::shared_ptr<const Table>> tables_;
};

std::pair<WavePair, WavePair> jost_pair(const GridField& u, cd z);
cd transmission_inv(const GridField& u, cd z);

struct LocateOptions {
    std::size_t contour_samples = 256;
    int max_doublings = 3;
};

SpectrumReport locate_spectrum(const GridField& u, const Region& region, const LocateOptions& opt = {});
SpectrumReport locate_spectrum(const JostSolver& solver, const Region& region, const LocateOptions& opt = {});

struct ScatteringData {
    cvec roots;               // distinct roots
    std::vector<int> multiplicity;
    cvec kappa;               // kappa_j = i beta(z_j)
    cvec dkappa;              // z-derivative of kappa at double roots (zero otherwise)
    std::vector<std::size_t> match_index;  // grid index where left and right are compared
    BetaPoly beta;
};

ScatteringData extract_scattering_data(const GridField& v, const SpectrumReport& report);
ScatteringData extract_scattering_data(const JostSolver& solver, const SpectrumReport& report);

/// Real polynomial of degree <= 2N-1 with beta(z_j) = -i kappa_j (mod pi) and,
/// at double roots, beta'(z_j) = -i dkappa_j. The branch minimizing |beta| is used.
BetaPoly beta_from_kappas(const cvec& roots, const std::vector<int>& multiplicity, const cvec& kappa,
                          const cvec& dkappa);

/// Gauss-Legendre nodes and weights on [-1, 1].
std::pair<rvec, rvec> gauss_legendre(std::size_t n);

}  // namespace sf
