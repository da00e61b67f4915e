#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sf {

using cd = std::complex<double>;
using cvec = std::vector<cd>;
using rvec = std::vector<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cd kI{0.0, 1.0};

/// Base class for every error raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
    virtual std::string kind() const { return "error"; }
};
struct DomainError : Error {
    using Error::Error;
    std::string kind() const override { return "domain"; }
};
struct NumericError : Error {
    using Error::Error;
    std::string kind() const override { return "numeric"; }
};
struct SpectralError : Error {
    using Error::Error;
    std::string kind() const override { return "spectral"; }
};

struct Grid {
    double x_min = -40.0;
    double dx = 80.0 / 4096;
    std::size_t n = 4096;

    /// Uniform periodic grid of n points covering [-length/2, length/2).
    static Grid centered(std::size_t n, double length);

    double x(std::size_t j) const { return x_min + dx * static_cast<double>(j); }
    double length() const { return dx * static_cast<double>(n); }
    double x_max() const { return x(n - 1); }
    rvec points() const;
    void validate() const;
};

struct GridField {
    Grid grid;
    cvec values;

    GridField() = default;
    GridField(Grid g, cvec v);
    explicit GridField(Grid g) : grid(g), values(g.n, cd{}) {}

    std::size_t size() const { return values.size(); }
    cd& operator[](std::size_t j) { return values[j]; }
    const cd& operator[](std::size_t j) const { return values[j]; }

    double sup_norm() const;
    /// Trapezoid rule on the periodic grid (exact sum times dx).
    double l2_norm() const;
    /// Largest modulus in the outer five percent of the grid, relative to the peak.
    double tail_ratio() const;
    bool is_zero() const;
};

GridField operator+(const GridField& a, const GridField& b);
GridField operator-(const GridField& a, const GridField& b);
GridField operator*(double s, const GridField& a);

/// Sample f on every grid point.
template <class F>
GridField sample(const Grid& g, F&& f) {
    GridField out(g);
    for (std::size_t j = 0; j < g.n; ++j) out.values[j] = f(g.x(j));
    return out;
}

struct SpectrumSym {
    std::size_t N = 0;
    cvec s;  // s[j-1] = sum_n z_n^j
};

/// Real polynomial with ascending coefficients.
struct BetaPoly {
    rvec coeffs;

    cd operator()(cd z) const;
    cd derivative(cd z) const;
    std::size_t size() const { return coeffs.size(); }
};

struct PhasePoint {
    SpectrumSym spectrum;
    BetaPoly beta;

    void validate() const;
};

SpectrumSym sym_from_roots(const cvec& roots);
/// Roots ordered by real part then imaginary part; clustered roots are repeated.
cvec roots_from_sym(const SpectrumSym& s);
PhasePoint make_phase_point(const cvec& roots, const rvec& beta);

/// Monic polynomial prod (z - z_n), ascending coefficients.
cvec monic_from_roots(const cvec& roots);
cvec elementary_from_power_sums(const cvec& s);

BetaPoly reduce_mod_char(const rvec& p, const SpectrumSym& s);

/// Cluster roots closer than tol, replacing each cluster by its mean.
struct RootCluster {
    cd z;
    int multiplicity;
};
std::vector<RootCluster> cluster_roots(const cvec& roots, double tol = 1e-3);

double hs_norm(const GridField& u, double s);

cd poly_eval(const cvec& c, cd z);
cd poly_eval(const rvec& c, cd z);

}  // namespace sf
