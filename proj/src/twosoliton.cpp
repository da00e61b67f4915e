#include "solitonforge/twosoliton.hpp"
#include "solitonforge/spectral.hpp"

#include <algorithm>
#include <cmath>

namespace sf {

void TwoSolParams::validate() const {
    for (const cd z : {z1, z2})
        if (!(z.imag() >= 0.05 && z.imag() <= 5.0) || !std::isfinite(z.real()))
            throw DomainError("two-soliton eigenvalues need Im z in [0.05, 5]");
    for (double b : beta)
        if (!std::isfinite(b)) throw DomainError("beta coefficients must be finite");
}

PhasePoint TwoSolParams::phase_point() const {
    validate();
    return PhasePoint{sym_from_roots({z1, z2}), BetaPoly{rvec(beta.begin(), beta.end())}};
}

cd closed_form_Q(const TwoSolParams& p, double x) {
    const cd z1 = p.z1, z2 = p.z2;
    const double b0 = p.beta[0], b1 = p.beta[1] + x, b2 = p.beta[2], b3 = p.beta[3];
    const cd g1 = -kI * (b0 + b1 * z1 + b2 * z1 * z1 + b3 * z1 * z1 * z1);
    const cd g2 = -kI * (b0 + b1 * z2 + b2 * z2 * z2 + b3 * z2 * z2 * z2);
    const cd g = 0.5 * (g1 + g2);
    const cd g0 = -kI * (b1 + b2 * (z1 + z2) + b3 * (z1 * z1 + z1 * z2 + z2 * z2));
    const cd dz = z1 - z2;
    const cd d = dz * g0;
    // Everything below is scaled by e^{-M} (numerator and denominator by e^{-2M}).
    const double M = std::max(2.0 * std::abs(g.real()), std::abs(d.real()));
    const cd ep = std::exp(d - M), em = std::exp(-d - M);
    const cd ch = 0.5 * (ep + em);
    cd shc;  // sinh(d)/d scaled
    if (std::abs(d) < 1e-8)
        shc = (1.0 + d * d / 6.0) * std::exp(-M);
    else
        shc = 0.5 * (ep - em) / d;
    const cd al = g0 * shc;
    const cd E1 = std::exp(2.0 * g - M);
    const cd E2 = std::exp(-2.0 * std::conj(g) - M);
    const cd s12 = z1 + z2;
    const double K = std::norm(s12) - 2.0 * (z1 * z2 + std::conj(z1) * std::conj(z2)).real();
    const cd A0 = 2.0 * s12.imag() * (E1 * std::conj(ch) + E2 * ch) - kI * al * dz * dz * E2 -
                  kI * std::conj(al) * std::conj(dz * dz) * E1 + kI * K * (std::conj(al) * E1 + al * E2);
    const double r = 4.0 * g.real();
    const double c4 = 0.5 * (std::exp(r - 2.0 * M) + std::exp(-r - 2.0 * M));
    const double D0 = 2.0 * (c4 + std::norm(ch)) + 2.0 * K * std::norm(al);
    return 2.0 * A0 / D0;
}

GridField closed_form_Q(const TwoSolParams& p, const Grid& g) {
    p.validate();
    return sample(g, [&](double x) { return closed_form_Q(p, x); });
}

std::array<double, 2> constituent_centers(const TwoSolParams& p) {
    const BetaPoly b{rvec(p.beta.begin(), p.beta.end())};
    return {-b(p.z1).imag() / p.z1.imag(), -b(p.z2).imag() / p.z2.imag()};
}

namespace {
double mod_pi(double a) {
    double r = std::fmod(a, kPi);
    if (r < 0) r += kPi;
    return r;
}
}  // namespace

double phase_distance(double a, double b) {
    const double d = mod_pi(a - b);
    return std::min(d, kPi - d);
}

EffectiveParams effective_params(const TwoSolParams& p) {
    p.validate();
    const cd z1 = p.z1, z2 = p.z2;
    const double b1 = p.beta[1], b2 = p.beta[2], b3 = p.beta[3];
    const BetaPoly beta{rvec(p.beta.begin(), p.beta.end())};
    const auto xs = constituent_centers(p);
    const double th1 = beta(z1).real() + xs[0] * z1.real();
    const double th2 = beta(z2).real() + xs[1] * z2.real();
    const double im = (z1 + z2).imag();
    EffectiveParams e;
    e.x0 = -b1 - (b2 * (z1 * z1 + z2 * z2).imag() + b3 * (z1 * z1 * z1 + z2 * z2 * z2).imag()) / im;
    e.theta = 0.5 * (th1 + th2 + (z1.imag() * z2.real() - z2.imag() * z1.real()) / im * (xs[0] - xs[1]));
    const cd a2 = kI * (z1 + z2) - kI * (z1 * z1 + z2 * z2).imag() / im;
    const cd a3 = kI * (z1 * z1 + z1 * z2 + z2 * z2) - kI * (z1 * z1 * z1 + z2 * z2 * z2).imag() / im;
    e.gamma00 = a2 * b2 + a3 * b3;
    const cd dz = z1 - z2;
    const cd z = 0.5 * (z1 + z2);
    if (std::abs(dz) < 1e-12) {
        e.alpha0 = e.gamma00;
        e.sigma0 = e.gamma00 == cd{} ? cd{} : 1.0 / e.gamma00;
    } else {
        e.alpha0 = std::sinh(dz * e.gamma00) / dz;
        const cd t = std::tanh(dz * e.gamma00);
        e.sigma0 = t == cd{} ? cd{} : dz / t;
    }
    e.split = std::abs(e.alpha0) >= 4.0;
    e.z_plus = e.z_minus = z;
    e.x_plus = e.x_minus = e.x0;
    e.theta_plus = e.theta_minus = mod_pi(e.theta);
    if (!e.split) return e;
    e.z_plus = z + 0.5 * e.sigma0;
    e.z_minus = z - 0.5 * e.sigma0;
    const double L = std::log(std::abs(z1 - std::conj(z2))) + std::log(2.0 * std::abs(e.alpha0));
    e.x_plus = e.x0 + L / (2.0 * e.z_plus.imag());
    e.x_minus = e.x0 - L / (2.0 * e.z_minus.imag());
    const double w = std::arg(e.z_plus - std::conj(e.z_minus));
    e.theta_plus = mod_pi(e.theta + (e.x_plus - e.x0) * e.z_plus.real() + 0.5 * (std::arg(e.alpha0) + w));
    e.theta_minus = mod_pi(e.theta + (e.x_minus - e.x0) * e.z_minus.real() - 0.5 * std::arg(e.alpha0) + 0.5 * w);
    return e;
}

namespace {

BumpReport analyze(const Grid& g, const cvec& samples, const std::function<cd(double)>& f,
                   const std::function<cd(double)>& df, double threshold) {
    BumpReport rep;
    const std::size_t n = samples.size();
    rvec a(n);
    for (std::size_t j = 0; j < n; ++j) a[j] = std::abs(samples[j]);
    const double peak = *std::max_element(a.begin(), a.end());
    if (peak == 0.0) return rep;
    const double thr = threshold < 0 ? 0.05 * peak : threshold;
    std::vector<std::size_t> keep;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(a[i] > a[i - 1] && a[i] >= a[i + 1] && a[i] > thr)) continue;
        double lmin = a[i], rmin = a[i];
        std::size_t k = i;
        while (k > 0 && a[k - 1] <= a[i]) lmin = std::min(lmin, a[--k]);
        k = i;
        while (k + 1 < n && a[k + 1] <= a[i]) rmin = std::min(rmin, a[++k]);
        if (a[i] - std::max(lmin, rmin) >= thr) keep.push_back(i);
    }
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    for (std::size_t i : keep) {
        double lo = g.x(i - 1), hi = g.x(i + 1);
        double c = hi - phi * (hi - lo), d = lo + phi * (hi - lo);
        double fc = std::abs(f(c)), fd = std::abs(f(d));
        for (int it = 0; it < 80 && hi - lo > 1e-11; ++it) {
            if (fc > fd) {
                hi = d;
                d = c;
                fd = fc;
                c = hi - phi * (hi - lo);
                fc = std::abs(f(c));
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + phi * (hi - lo);
                fd = std::abs(f(d));
            }
        }
        const double x = 0.5 * (lo + hi);
        const cd v = f(x);
        rep.bumps.push_back({x, std::abs(v), -0.5 * (df(x) / v).imag(), mod_pi(-0.5 * std::arg(v))});
    }
    if (rep.bumps.empty()) return rep;
    double amax = 0.0, amin = 1e300;
    for (const auto& b : rep.bumps) {
        amax = std::max(amax, b.amplitude);
        amin = std::min(amin, b.amplitude);
    }
    for (std::size_t j = 0; j < n; ++j) {
        double dist = 1e300;
        for (const auto& b : rep.bumps) dist = std::min(dist, std::abs(g.x(j) - b.location));
        if (a[j] > 4.0 * amax * std::exp(-0.5 * amin * dist)) {
            rep.decay_ok = false;
            break;
        }
    }
    return rep;
}

}  // namespace

BumpReport bump_analysis(const GridField& u, double threshold) {
    if (u.is_zero()) return {};
    const TrigInterpolant ti(u);
    return analyze(
        u.grid, u.values, [&](double x) { return ti(x); }, [&](double x) { return ti.derivative(x); }, threshold);
}

BumpReport bump_analysis(const Grid& g, const std::function<cd(double)>& f, double threshold) {
    const cvec s = sample(g, f).values;
    const double h = 1e-3;
    auto df = [&](double x) {
        return (8.0 * (f(x + h) - f(x - h)) - (f(x + 2 * h) - f(x - 2 * h))) / (12.0 * h);
    };
    return analyze(g, s, f, df, threshold);
}

TwoSolParams flow_params(const TwoSolParams& p, Flow flow, double t) {
    const PhasePoint q = flow_phase(p.phase_point(), flow, t);
    TwoSolParams out = p;
    for (std::size_t k = 0; k < 4; ++k) out.beta[k] = q.beta.coeffs[k];
    return out;
}

std::string classify_regime(const TwoSolParams& p, Flow flow) {
    const cd dz = p.z1 - p.z2;
    if (std::abs(dz) < 1e-12) return "double";
    const TwoSolParams q = flow_params(p, flow, 1.0);
    const cd w0 = dz * effective_params(p).gamma00;
    const cd rate = dz * effective_params(q).gamma00 - w0;
    if (std::abs(rate) == 0.0 || std::abs(rate.real()) <= 1e-9 * std::abs(rate)) return "quasiperiodic";
    if (std::abs(dz.real()) <= 1e-12) return "split-scale";
    // Closest approach of the line w0 + rate t to the lattice i pi Z.
    const double tstar = -w0.real() / rate.real();
    const double kc = std::round((w0 + rate * tstar).imag() / kPi);
    double best = 1e300;
    for (double k = kc - 2; k <= kc + 2; k += 1.0) {
        const cd pnt = kI * kPi * k - w0;
        const double dist = std::abs((std::conj(rate) * pnt).imag()) / std::abs(rate);
        best = std::min(best, dist);
    }
    return best < 0.1 * kPi ? "split-velocity-resonant" : "split-velocity-nonresonant";
}

std::vector<TrajectoryPoint> trajectory(const TwoSolParams& p, Flow flow, const std::vector<double>& times,
                                        const Grid& g) {
    p.validate();
    std::vector<TrajectoryPoint> out(times.size());
    const std::string regime = classify_regime(p, flow);
    parallel_for(times.size(), [&](std::size_t i) {
        TrajectoryPoint& tp = out[i];
        tp.t = times[i];
        tp.params = flow_params(p, flow, times[i]);
        tp.effective = effective_params(tp.params);
        tp.bumps = bump_analysis(g, [&](double x) { return closed_form_Q(tp.params, x); });
        tp.regime = regime;
    });
    return out;
}

}  // namespace sf
