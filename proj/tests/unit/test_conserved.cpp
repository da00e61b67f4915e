#include "doctest.h"
#include "solitonforge/backlund.hpp"
#include "solitonforge/conserved.hpp"

#include <cmath>

using namespace sf;

namespace {
GridField soliton(cd z, const rvec& beta = {}) { return add_solitons(GridField(Grid{}), make_phase_point({z}, beta)); }
}  // namespace

TEST_CASE("Hamiltonians of the vacuum and Q0") {
    const GridField zero{Grid{}};
    for (int n = 0; n < 5; ++n) CHECK(hamiltonian(zero, n) == 0.0);
    const GridField q0 = soliton(kI);
    CHECK(hamiltonian(q0, 0) == doctest::Approx(4.0).epsilon(1e-10));
    CHECK(hamiltonian(q0, 2) == doctest::Approx(-16.0 / 3.0).epsilon(1e-10));
    CHECK(std::abs(hamiltonian(q0, 1)) < 1e-10);
    CHECK_THROWS_AS(hamiltonian(q0, 5), DomainError);
}

TEST_CASE("restriction law on single solitons") {
    for (const cd z : {cd{0, 1}, cd{0, 2}, cd{0.5, 1}, cd{-0.3, 0.7}}) {
        const GridField q = soliton(z, {0.4, -0.2});
        for (int n = 0; n < 5; ++n) {
            const double expect = 2.0 / (n + 1) * std::pow(2.0 * z, n + 1).imag();
            CHECK(std::abs(hamiltonian(q, n) - expect) < 1e-6);
        }
    }
}

TEST_CASE("Hamiltonians of a Gaussian by quadrature") {
    const GridField u = sample(Grid{}, [](double x) { return cd{std::exp(-x * x), 0.0}; });
    // int e^{-2x^2} = sqrt(pi/2); int (2x e^{-x^2})^2 = sqrt(pi/2); int e^{-4x^2} = sqrt(pi)/2.
    CHECK(hamiltonian(u, 0) == doctest::Approx(std::sqrt(kPi / 2)).epsilon(1e-12));
    CHECK(hamiltonian(u, 2) == doctest::Approx(std::sqrt(kPi / 2) - std::sqrt(kPi) / 2).epsilon(1e-12));
}

TEST_CASE("Xi_s basics") {
    CHECK(xi_s(cd{0, 0.5}, 0.0) == doctest::Approx(0.5).epsilon(1e-14));
    // Xi_1(z) = Im(z + z^3 / 3).
    const cd z{0.4, 0.9};
    CHECK(xi_s(z, 1.0) == doctest::Approx((z + z * z * z / 3.0).imag()).epsilon(1e-13));
    CHECK_THROWS_AS(xi_s(cd{0, 2}, 0.5), DomainError);
}

TEST_CASE("energy of a soliton below the ray") {
    const GridField q = soliton(cd{0, 0.25});
    CHECK(std::abs(energy_Es(q, 0.0) - 1.0) < 1e-4);
    for (double s : {-0.25, 0.25, 0.5, 0.75}) CHECK(std::abs(energy_Es(q, s) - 2.0 * xi_s(cd{0, 0.5}, s)) < 1e-7);
}

TEST_CASE("energy of a soliton off the imaginary axis") {
    const cd z{0.6, 0.7};
    const GridField q = soliton(z);
    for (double s : {-0.25, 0.25, 0.5, 0.75}) {
        const double ref = 2.0 * xi_s(2.0 * z, s);
        CHECK(std::abs(energy_Es(q, s) - ref) < 1e-5 * std::abs(ref));
    }
}

TEST_CASE("integer energies and small data") {
    const GridField u = sample(Grid{}, [](double x) { return cd{0.05 * std::exp(-x * x), 0.0}; });
    const double m = u.l2_norm() * u.l2_norm();
    CHECK(std::abs(energy_Es(u, 0.0) - m) <= 1e-3 * m);
    CHECK(energy_Es(u, 1.0) == doctest::Approx(hamiltonian(u, 0) + hamiltonian(u, 2)));
    for (double s : {-0.25, 0.25, 0.5, 0.75}) {
        const double h = hs_norm(u, s);
        CHECK(std::abs(energy_Es(u, s) - h * h) <= 1e-2 * h * h);
    }
    CHECK(energy_Es(GridField(Grid{}), 0.5) == 0.0);
    CHECK_THROWS_AS(energy_Es(u, -0.6), DomainError);
}

TEST_CASE("eigenvalue on the ray is rejected") {
    CHECK_THROWS_AS(energy_Es(soliton(cd{0, 1.3}), 0.5), SpectralError);
}

TEST_CASE("trace formula residuals") {
    CHECK(trace_residual(GridField(Grid{})) == 0.0);
    CHECK(trace_residual(soliton(kI)) < 1e-6);
    const GridField g = sample(Grid{}, [](double x) { return cd{0.1 * std::exp(-x * x), 0.0}; });
    const TraceParts t = trace_parts(g);
    CHECK(t.count == 0);
    CHECK(t.residual < 1e-5);
    CHECK(t.continuous == doctest::Approx(t.mass).epsilon(1e-6));
}
