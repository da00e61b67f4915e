#include "solitonforge/core.hpp"
#include "solitonforge/spectral.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sf {

Grid Grid::centered(std::size_t n, double length) {
    Grid g;
    g.n = n;
    g.dx = length / static_cast<double>(n);
    g.x_min = -0.5 * length;
    g.validate();
    return g;
}

rvec Grid::points() const {
    rvec p(n);
    for (std::size_t j = 0; j < n; ++j) p[j] = x(j);
    return p;
}

void Grid::validate() const {
    if (n < 8) throw DomainError("grid needs at least 8 points");
    if (!(dx > 0.0) || !std::isfinite(dx) || !std::isfinite(x_min)) throw DomainError("grid spacing must be positive and finite");
}

GridField::GridField(Grid g, cvec v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.n) throw DomainError("field length does not match grid");
}

double GridField::sup_norm() const {
    double m = 0.0;
    for (const auto& v : values) m = std::max(m, std::abs(v));
    return m;
}

double GridField::l2_norm() const {
    double s = 0.0;
    for (const auto& v : values) s += std::norm(v);
    return std::sqrt(s * grid.dx);
}

double GridField::tail_ratio() const {
    const double peak = sup_norm();
    if (peak == 0.0) return 0.0;
    const std::size_t w = std::max<std::size_t>(1, values.size() / 40);
    double t = 0.0;
    for (std::size_t j = 0; j < w; ++j) {
        t = std::max(t, std::abs(values[j]));
        t = std::max(t, std::abs(values[values.size() - 1 - j]));
    }
    return t / peak;
}

bool GridField::is_zero() const {
    return std::all_of(values.begin(), values.end(), [](cd v) { return v == cd{}; });
}

namespace {
void same_grid(const GridField& a, const GridField& b) {
    if (a.grid.n != b.grid.n || a.grid.dx != b.grid.dx || a.grid.x_min != b.grid.x_min)
        throw DomainError("fields live on different grids");
}
}  // namespace

GridField operator+(const GridField& a, const GridField& b) {
    same_grid(a, b);
    GridField out(a.grid);
    for (std::size_t j = 0; j < a.size(); ++j) out[j] = a[j] + b[j];
    return out;
}

GridField operator-(const GridField& a, const GridField& b) {
    same_grid(a, b);
    GridField out(a.grid);
    for (std::size_t j = 0; j < a.size(); ++j) out[j] = a[j] - b[j];
    return out;
}

GridField operator*(double s, const GridField& a) {
    GridField out(a.grid);
    for (std::size_t j = 0; j < a.size(); ++j) out[j] = s * a[j];
    return out;
}

cd poly_eval(const cvec& c, cd z) {
    cd r{};
    for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * z + *it;
    return r;
}

cd poly_eval(const rvec& c, cd z) {
    cd r{};
    for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * z + *it;
    return r;
}

cd BetaPoly::operator()(cd z) const { return poly_eval(coeffs, z); }

cd BetaPoly::derivative(cd z) const {
    cd r{};
    for (std::size_t k = coeffs.size(); k-- > 1;) r = r * z + static_cast<double>(k) * coeffs[k];
    return r;
}

void PhasePoint::validate() const {
    if (spectrum.N == 0 || spectrum.s.size() != spectrum.N) throw DomainError("spectrum must hold N power sums");
    if (beta.coeffs.size() != 2 * spectrum.N) throw DomainError("beta must have 2N coefficients");
    for (double b : beta.coeffs)
        if (!std::isfinite(b)) throw DomainError("beta coefficients must be finite");
}

namespace {
bool lex_less(cd a, cd b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
}
}  // namespace

SpectrumSym sym_from_roots(const cvec& roots) {
    if (roots.empty()) throw DomainError("spectrum needs at least one root");
    cvec r = roots;
    for (const auto& z : r)
        if (!(z.imag() > 0.0) || !std::isfinite(z.real())) throw DomainError("roots must lie in the open upper half-plane");
    std::sort(r.begin(), r.end(), lex_less);
    SpectrumSym s;
    s.N = r.size();
    s.s.assign(s.N, cd{});
    cvec pw(r.size(), cd{1.0, 0.0});
    for (std::size_t j = 0; j < s.N; ++j) {
        cd acc{};
        for (std::size_t n = 0; n < r.size(); ++n) {
            pw[n] *= r[n];
            acc += pw[n];
        }
        s.s[j] = acc;
    }
    return s;
}

cvec elementary_from_power_sums(const cvec& p) {
    const std::size_t N = p.size();
    cvec e(N + 1, cd{});
    e[0] = 1.0;
    for (std::size_t k = 1; k <= N; ++k) {
        cd acc{};
        for (std::size_t i = 1; i <= k; ++i) {
            const double sgn = (i % 2 == 1) ? 1.0 : -1.0;
            acc += sgn * e[k - i] * p[i - 1];
        }
        e[k] = acc / static_cast<double>(k);
    }
    return e;
}

namespace {
// Ascending coefficients of the monic polynomial with the given power sums.
cvec monic_from_power_sums(const cvec& p) {
    const auto e = elementary_from_power_sums(p);
    const std::size_t N = p.size();
    cvec c(N + 1);
    for (std::size_t k = 0; k <= N; ++k) c[N - k] = ((k % 2 == 0) ? 1.0 : -1.0) * e[k];
    return c;
}
}  // namespace

cvec monic_from_roots(const cvec& roots) {
    cvec c{1.0};
    for (const auto& z : roots) {
        cvec n(c.size() + 1, cd{});
        for (std::size_t k = 0; k < c.size(); ++k) {
            n[k + 1] += c[k];
            n[k] -= z * c[k];
        }
        c = std::move(n);
    }
    return c;
}

std::vector<RootCluster> cluster_roots(const cvec& roots, double tol) {
    const std::size_t n = roots.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
            if (std::abs(roots[a] - roots[b]) < tol) parent[find(a)] = find(b);
    std::vector<RootCluster> out;
    std::vector<std::size_t> seen;
    for (std::size_t a = 0; a < n; ++a) {
        const std::size_t r = find(a);
        if (std::find(seen.begin(), seen.end(), r) != seen.end()) continue;
        seen.push_back(r);
        cd sum{};
        int m = 0;
        for (std::size_t b = 0; b < n; ++b)
            if (find(b) == r) {
                sum += roots[b];
                ++m;
            }
        out.push_back({sum / static_cast<double>(m), m});
    }
    std::sort(out.begin(), out.end(), [](const RootCluster& a, const RootCluster& b) { return lex_less(a.z, b.z); });
    return out;
}

cvec roots_from_sym(const SpectrumSym& s) {
    if (s.N == 0 || s.s.size() != s.N) throw DomainError("spectrum must hold N power sums");
    for (const auto& v : s.s)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw DomainError("power sums must be finite");
    const cvec c = monic_from_power_sums(s.s);
    const std::size_t N = s.N;
    cvec raw;
    if (N == 1) {
        raw.push_back(-c[0]);
    } else {
        Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(N, N);
        for (std::size_t i = 1; i < N; ++i) comp(i, i - 1) = 1.0;
        for (std::size_t i = 0; i < N; ++i) comp(i, N - 1) = -c[i];
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
        for (std::size_t i = 0; i < N; ++i) raw.push_back(es.eigenvalues()(i));
    }
    // Newton polish; harmless for clustered roots since the cluster mean is reported.
    cvec dc(N);
    for (std::size_t k = 1; k <= N; ++k) dc[k - 1] = static_cast<double>(k) * c[k];
    for (auto& z : raw) {
        for (int it = 0; it < 3; ++it) {
            const cd d = poly_eval(dc, z);
            if (std::abs(d) < 1e-8) break;
            const cd step = poly_eval(c, z) / d;
            if (!std::isfinite(step.real()) || std::abs(step) > 1e-3) break;
            z -= step;
        }
    }
    cvec out;
    for (const auto& cl : cluster_roots(raw))
        for (int m = 0; m < cl.multiplicity; ++m) out.push_back(cl.z);
    for (const auto& z : out)
        if (!(z.imag() > 0.0)) throw DomainError("recovered root outside the upper half-plane");
    return out;
}

PhasePoint make_phase_point(const cvec& roots, const rvec& beta) {
    PhasePoint p{sym_from_roots(roots), BetaPoly{beta}};
    if (p.beta.coeffs.size() < 2 * p.spectrum.N) p.beta.coeffs.resize(2 * p.spectrum.N, 0.0);
    p.validate();
    return p;
}

BetaPoly reduce_mod_char(const rvec& p, const SpectrumSym& s) {
    for (double v : p)
        if (!std::isfinite(v)) throw DomainError("polynomial coefficients must be finite");
    const std::size_t N = s.N;
    const cvec P = monic_from_power_sums(s.s);
    // Q = P * conj(P): real, monic, degree 2N.
    rvec Q(2 * N + 1, 0.0);
    for (std::size_t a = 0; a <= N; ++a)
        for (std::size_t b = 0; b <= N; ++b) Q[a + b] += (P[a] * std::conj(P[b])).real();
    Q[2 * N] = 1.0;
    rvec r = p;
    for (std::size_t d = r.size(); d-- > 2 * N;) {
        const double lead = r[d];
        if (lead == 0.0) continue;
        for (std::size_t k = 0; k <= 2 * N; ++k) r[d - 2 * N + k] -= lead * Q[k];
        r[d] = 0.0;
    }
    r.resize(2 * N, 0.0);
    return BetaPoly{r};
}

double hs_norm(const GridField& u, double s) {
    if (!(s > -0.5)) throw DomainError("hs_norm needs s > -1/2");
    const Fft fft(u.size());
    const cvec U = fft.forward(u.values);
    const rvec k = wavenumbers(u.grid);
    double acc = 0.0;
    for (std::size_t m = 0; m < U.size(); ++m) acc += std::pow(1.0 + k[m] * k[m], s) * std::norm(U[m]);
    return std::sqrt(acc * u.grid.dx / static_cast<double>(u.size()));
}

}  // namespace sf
