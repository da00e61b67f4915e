#include "doctest.h"
#include "solitonforge/core.hpp"
#include "solitonforge/spectral.hpp"

#include <cmath>
#include <random>

using namespace sf;

TEST_CASE("power sums round trip through roots") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> re(-1.5, 1.5), im(0.3, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        cvec roots;
        const int N = 1 + trial % 5;
        for (int k = 0; k < N; ++k) roots.emplace_back(re(rng), im(rng));
        const SpectrumSym s = sym_from_roots(roots);
        const cvec back = roots_from_sym(s);
        REQUIRE(back.size() == roots.size());
        for (const auto& z : roots) {
            double best = 1e9;
            for (const auto& w : back) best = std::min(best, std::abs(z - w));
            CHECK(best < 1e-9);
        }
    }
}

TEST_CASE("sym_from_roots rejects lower half-plane") {
    CHECK_THROWS_AS(sym_from_roots({cd{0.0, -1.0}}), DomainError);
    CHECK_THROWS_AS(sym_from_roots({}), DomainError);
}

TEST_CASE("elementary symmetric functions from power sums") {
    const cvec roots{{1.0, 2.0}, {-0.5, 0.7}, {0.2, 1.1}};
    const cvec p = sym_from_roots(roots).s;
    const cvec e = elementary_from_power_sums(p);
    CHECK(std::abs(e[1] - (roots[0] + roots[1] + roots[2])) < 1e-13);
    CHECK(std::abs(e[2] - (roots[0] * roots[1] + roots[0] * roots[2] + roots[1] * roots[2])) < 1e-13);
    CHECK(std::abs(e[3] - roots[0] * roots[1] * roots[2]) < 1e-13);
}

TEST_CASE("reduction modulo the characteristic polynomial preserves values at roots") {
    const cvec roots{{0.3, 1.0}, {-0.4, 0.6}};
    const SpectrumSym s = sym_from_roots(roots);
    const rvec p{0.5, -1.0, 2.0, 0.25, 1.5, -0.75, 0.1};
    const BetaPoly r = reduce_mod_char(p, s);
    CHECK(r.size() == 4);
    for (const auto& z : roots) {
        CHECK(std::abs(r(z) - poly_eval(p, z)) < 1e-11);
        CHECK(std::abs(r(std::conj(z)) - poly_eval(p, std::conj(z))) < 1e-11);
    }
    const rvec low{1.0, 2.0};
    CHECK(reduce_mod_char(low, s).coeffs == rvec{1.0, 2.0, 0.0, 0.0});
}

TEST_CASE("beta polynomial derivative") {
    const BetaPoly b{{1.0, -2.0, 0.5, 3.0}};
    const cd z{0.3, 0.8};
    const double h = 1e-6;
    const cd fd = (b(z + h) - b(z - h)) / (2.0 * h);
    CHECK(std::abs(b.derivative(z) - fd) < 1e-8);
}

TEST_CASE("root clustering merges near roots") {
    const auto cl = cluster_roots({{0.0, 1.0}, {0.0, 1.0 + 1e-5}, {0.5, 1.0}});
    REQUIRE(cl.size() == 2);
    CHECK(cl[0].multiplicity == 2);
    CHECK(cl[1].multiplicity == 1);
}

TEST_CASE("phase point validation") {
    const PhasePoint p = make_phase_point({cd{0.0, 1.0}}, {});
    CHECK(p.beta.size() == 2);
    PhasePoint bad = p;
    bad.beta.coeffs.push_back(0.0);
    CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("grid field norms") {
    const Grid g = Grid::centered(1024, 40.0);
    const GridField u = sample(g, [](double x) { return cd{2.0 / std::cosh(2.0 * x), 0.0}; });
    CHECK(u.sup_norm() == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(u.l2_norm() * u.l2_norm() == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(u.tail_ratio() < 1e-15);
    CHECK_THROWS_AS(GridField(g, cvec(3)), DomainError);
    CHECK_THROWS_AS(Grid::centered(4, 1.0), DomainError);
}

TEST_CASE("hs norm of a Gaussian") {
    const Grid g = Grid::centered(1024, 40.0);
    const GridField u = sample(g, [](double x) { return cd{std::exp(-x * x), 0.0}; });
    // |u|_{H^0}^2 = sqrt(pi/2); |u_x|^2 integrates to sqrt(pi/2).
    CHECK(hs_norm(u, 0.0) == doctest::Approx(std::pow(kPi / 2.0, 0.25)).epsilon(1e-12));
    CHECK(hs_norm(u, 1.0) == doctest::Approx(std::sqrt(2.0 * std::sqrt(kPi / 2.0))).epsilon(1e-12));
    CHECK_THROWS_AS(hs_norm(u, -0.5), DomainError);
}

TEST_CASE("spectral derivative, shift and interpolation") {
    const Grid g = Grid::centered(512, 40.0);
    const GridField u = sample(g, [](double x) { return cd{std::exp(-x * x), std::exp(-(x - 1) * (x - 1))}; });
    const GridField du = spectral_derivative(u, 1);
    const cvec sh = spectral_shift(u, 0.013);
    const TrigInterpolant ti(u);
    double e1 = 0, e2 = 0, e3 = 0, e4 = 0;
    for (std::size_t j = 0; j < g.n; ++j) {
        const double x = g.x(j);
        const cd exact_d{-2 * x * std::exp(-x * x), -2 * (x - 1) * std::exp(-(x - 1) * (x - 1))};
        const double y = x + 0.013;
        const cd exact_s{std::exp(-y * y), std::exp(-(y - 1) * (y - 1))};
        e1 = std::max(e1, std::abs(du[j] - exact_d));
        e2 = std::max(e2, std::abs(sh[j] - exact_s));
        e3 = std::max(e3, std::abs(ti(y) - exact_s));
        const cd exact_ds{-2 * y * std::exp(-y * y), -2 * (y - 1) * std::exp(-(y - 1) * (y - 1))};
        e4 = std::max(e4, std::abs(ti.derivative(y) - exact_ds));
    }
    CHECK(e1 < 1e-12);
    CHECK(e2 < 1e-13);
    CHECK(e3 < 1e-13);
    CHECK(e4 < 1e-12);
}

TEST_CASE("fft round trip") {
    const Fft fft(64);
    cvec a(64);
    for (std::size_t j = 0; j < 64; ++j) a[j] = cd(std::sin(0.3 * j), std::cos(0.7 * j));
    const cvec b = fft.backward_normalized(fft.forward(a));
    for (std::size_t j = 0; j < 64; ++j) CHECK(std::abs(a[j] - b[j]) < 1e-14);
}

TEST_CASE("parallel_for propagates exceptions") {
    CHECK_THROWS_AS(parallel_for(8, [](std::size_t i) {
                        if (i == 5) throw NumericError("boom");
                    }),
                    NumericError);
}
