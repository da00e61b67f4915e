#include "solitonforge/conserved.hpp"
#include "solitonforge/spectral.hpp"

#include <cmath>

namespace sf {

namespace {
double integrate(const Grid& g, const cvec& f) {
    cd s{};
    for (const auto& v : f) s += v;
    return (s * g.dx).real();
}
}  // namespace

double hamiltonian(const GridField& u, int n) {
    if (n < 0 || n > 4) throw DomainError("hamiltonian index must be in 0..4");
    const std::size_t N = u.size();
    cvec f(N);
    if (n == 0) {
        for (std::size_t j = 0; j < N; ++j) f[j] = std::norm(u[j]);
        return integrate(u.grid, f);
    }
    const GridField ux = spectral_derivative(u, 1);
    if (n == 1) {
        for (std::size_t j = 0; j < N; ++j) f[j] = -kI * u[j] * std::conj(ux[j]);
        return integrate(u.grid, f);
    }
    if (n == 2) {
        for (std::size_t j = 0; j < N; ++j) f[j] = std::norm(ux[j]) - std::norm(u[j]) * std::norm(u[j]);
        return integrate(u.grid, f);
    }
    const GridField uxx = spectral_derivative(u, 2);
    if (n == 3) {
        for (std::size_t j = 0; j < N; ++j)
            f[j] = -kI * (ux[j] * std::conj(uxx[j]) - 3.0 * std::norm(u[j]) * u[j] * std::conj(ux[j]));
        return integrate(u.grid, f);
    }
    GridField mod2(u.grid), sq(u.grid);
    for (std::size_t j = 0; j < N; ++j) {
        mod2[j] = std::norm(u[j]);
        sq[j] = u[j] * u[j];
    }
    const GridField dmod2 = spectral_derivative(mod2, 1);
    const GridField dsq = spectral_derivative(sq, 1);
    for (std::size_t j = 0; j < N; ++j) {
        const double a = std::norm(u[j]);
        f[j] = std::norm(uxx[j]) - std::norm(dmod2[j]) - 1.5 * std::norm(dsq[j]) + 2.0 * a * a * a;
    }
    return integrate(u.grid, f);
}

std::array<double, 5> hamiltonians(const GridField& u) {
    std::array<double, 5> h{};
    for (int n = 0; n < 5; ++n) h[n] = hamiltonian(u, n);
    return h;
}

double xi_s(cd z, double s) {
    if (std::abs(z.real()) < 1e-14 && std::abs(z.imag()) >= 1.0)
        throw DomainError("Xi_s is undefined on the branch ray i[1, inf)");
    const auto [x, w] = gauss_legendre(32);
    constexpr int panels = 32;
    cd acc{};
    for (int p = 0; p < panels; ++p) {
        const double a = static_cast<double>(p) / panels, b = static_cast<double>(p + 1) / panels;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double t = 0.5 * (a + b) + 0.5 * (b - a) * x[i];
            const cd zt = z * t;
            acc += 0.5 * (b - a) * w[i] * std::pow(1.0 + zt * zt, s) * z;
        }
    }
    return acc.imag();
}

namespace {
double binomial(double s, int j) {
    double r = 1.0;
    for (int i = 0; i < j; ++i) r *= (s - i) / (i + 1);
    return r;
}
}  // namespace

double energy_Es(const GridField& u, double s, const EnergyOptions& opt) {
    return energy_Es(JostSolver(u), hamiltonians(u), s, opt);
}

double energy_Es(const JostSolver& solver, const std::array<double, 5>& H, double s, const EnergyOptions& opt) {
    if (!(s > -0.5)) throw DomainError("energy_Es needs s > -1/2");
    const double rs = std::round(s);
    if (std::abs(s - rs) < 1e-12 && rs >= 0) {
        const int k = static_cast<int>(rs);
        if (k > 2) throw DomainError("integer energies are available for s = 0, 1, 2");
        double e = 0.0;
        for (int j = 0; j <= k; ++j) e += binomial(k, j) * H[2 * j];
        return e;
    }
    if (s >= 2.0) throw DomainError("fractional energies are available for s < 2");
    const double H0 = H[0], H2 = H[2], H4 = H[4];
    // tau = cosh(w^2) on w in [0, w_max].
    const double wmax = std::sqrt(std::acosh(opt.tau_cut));
    const auto [x, wt] = gauss_legendre(opt.nodes);
    const std::size_t n = x.size();
    rvec wv(n);
    for (std::size_t i = 0; i < n; ++i) wv[i] = 0.5 * wmax * (x[i] + 1.0);
    cvec tinv(n);
    parallel_for(n, [&](std::size_t i) {
        const double tau = std::cosh(wv[i] * wv[i]);
        tinv[i] = solver.transmission_inv(cd{0.0, 0.5 * tau});
    });
    // Nodes are ordered from w_max down to 0; a zero on the ray shows up as a small value or a phase jump.
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(tinv[i]) < 1e-6) throw SpectralError("eigenvalue on the ray i[1/2, inf)");
        if (i > 0 && std::abs(std::arg(tinv[i] / tinv[i - 1])) > kPi / 2)
            throw SpectralError("eigenvalue on the ray i[1/2, inf)");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double y = wv[i] * wv[i];
        const double tau = std::cosh(y);
        const cd d = tinv[i] - 1.0;
        const double ln_tinv = 0.5 * std::log1p(2.0 * d.real() + std::norm(d));
        const double f = ln_tinv + H0 / tau - H2 / (tau * tau * tau);
        acc += 0.5 * wmax * wt[i] * std::pow(std::sinh(y), 2.0 * s + 1.0) * 2.0 * wv[i] * f;
    }
    const double tc = opt.tau_cut;
    acc += -H4 * (std::pow(tc, 2 * s - 4) / (4 - 2 * s) - s * std::pow(tc, 2 * s - 6) / (6 - 2 * s));
    return 2.0 / kPi * std::sin(kPi * s) * acc + H0 + s * H2;
}

double continuous_mass(const JostSolver& solver, double h, double* xi_max) {
    auto lnT = [&](double xi) {
        const cd d = solver.transmission_inv(cd{0.5 * xi, 0.0}) - 1.0;
        return -0.5 * std::log1p(2.0 * d.real() + std::norm(d));
    };
    double sum = lnT(0.0);
    constexpr std::size_t block = 16;
    const double limit = 400.0;
    std::size_t quiet = 0;
    std::size_t k = 1;
    double reach = 0.0;
    while (quiet < 8) {
        rvec vals(2 * block);
        parallel_for(2 * block, [&](std::size_t i) {
            const double xi = h * static_cast<double>(k + i / 2);
            vals[i] = lnT(i % 2 == 0 ? xi : -xi);
        });
        for (std::size_t i = 0; i < block; ++i) {
            const double a = vals[2 * i], b = vals[2 * i + 1];
            sum += a + b;
            reach = h * static_cast<double>(k + i);
            if (std::abs(a) < 1e-9 && std::abs(b) < 1e-9)
                ++quiet;
            else
                quiet = 0;
        }
        k += block;
        if (reach > limit) throw NumericError("ln|T| does not decay on the real axis");
    }
    if (xi_max) *xi_max = reach;
    return sum * h / kPi;
}

TraceParts trace_parts(const GridField& u, const Region& region) {
    TraceParts t;
    t.mass = u.l2_norm() * u.l2_norm();
    if (u.is_zero()) return t;
    const JostSolver solver(u);
    const SpectrumReport rep = locate_spectrum(solver, region);
    t.count = rep.count;
    for (const auto& z : rep.roots) t.discrete += 4.0 * z.imag();
    t.continuous = continuous_mass(solver, 0.05, &t.xi_max);
    t.residual = std::abs(t.mass - t.continuous - t.discrete);
    return t;
}

double trace_residual(const GridField& u, const Region& region) { return trace_parts(u, region).residual; }

EnergyReport energy_report(const GridField& u, const std::vector<double>& s_values, const Region& region) {
    EnergyReport r;
    r.H = hamiltonians(u);
    const JostSolver solver(u);
    for (double s : s_values) r.Es[s] = energy_Es(solver, r.H, s);
    r.trace_residual = trace_residual(u, region);
    return r;
}

}  // namespace sf
