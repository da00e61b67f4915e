#include "solitonforge/evolution.hpp"
#include "solitonforge/backlund.hpp"
#include "solitonforge/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace sf {

Flow parse_flow(const std::string& s) {
    if (s == "nls" || s == "NLS") return Flow::nls;
    if (s == "mkdv" || s == "mKdV" || s == "MKDV") return Flow::mkdv;
    throw DomainError("unknown flow '" + s + "' (expected nls or mkdv)");
}

std::string to_string(Flow f) { return f == Flow::nls ? "nls" : "mkdv"; }

int flow_index(Flow f) { return f == Flow::nls ? 2 : 3; }

PhasePoint flow_phase(const PhasePoint& point, int n, double t) {
    point.validate();
    if (n < 0 || n > 5) throw DomainError("flow index must be in 0..5");
    rvec p(static_cast<std::size_t>(n) + 1, 0.0);
    p[n] = std::ldexp(1.0, n - 1);
    const BetaPoly r = reduce_mod_char(p, point.spectrum);
    PhasePoint out = point;
    for (std::size_t k = 0; k < out.beta.coeffs.size(); ++k) out.beta.coeffs[k] += t * r.coeffs[k];
    return out;
}

PhasePoint flow_phase(const PhasePoint& point, Flow f, double t) { return flow_phase(point, flow_index(f), t); }

EvolveConfig EvolveConfig::defaults(Flow f) {
    EvolveConfig c;
    c.flow = f;
    c.dt = f == Flow::nls ? 1e-3 : 2e-4;
    return c;
}

void EvolveConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("dt must be positive");
    if (!std::isfinite(t_final)) throw DomainError("t_final must be finite");
    if (order != 2 && order != 4 && order != 6) throw DomainError("splitting order must be 2, 4 or 6");
    for (double t : record_times)
        if (!std::isfinite(t)) throw DomainError("record times must be finite");
}

namespace {

class Stepper {
public:
    Stepper(const GridField& u0, const EvolveConfig& cfg)
        : cfg_(cfg), fft_(u0.size()), k_(wavenumbers(u0.grid)), u_(u0.values.begin(), u0.values.end()),
          bound_(10.0 * u0.sup_norm()) {
        const std::size_t n = u_.size();
        U_.resize(n);
        tmp_.resize(n);
        uu_.resize(n);
        ux_.resize(n);
        for (auto* v : {&ka_, &kb_, &kc_, &kd_, &kw_}) v->resize(n);
        // wavenumbers() zeroes the Nyquist mode; the propagators need its true size.
        if (n % 2 == 0) nyq_ = n / 2;
        kmax_ = kPi / u0.grid.dx;
        kcut_ = 2.0 / 3.0 * kmax_;
    }

    cvec state() const { return cvec(u_.begin(), u_.end()); }

    void advance(double T) {
        if (T == 0.0) return;
        const std::size_t steps = static_cast<std::size_t>(std::ceil(std::abs(T) / cfg_.dt - 1e-9));
        const double h = T / static_cast<double>(steps);
        if (cfg_.flow == Flow::nls) {
            prepare_nls(h);
            for (std::size_t s = 0; s < steps; ++s) nls_step();
            flush();
        } else {
            advance_mkdv(T);
        }
        check();
    }

    // Steps are capped so that h * 6 sup|u|^2 k_max stays below kMkdvCourant.
    static constexpr double kMkdvCourant = 0.6;

private:
    double sup() const {
        double m = 0.0;
        for (const auto& v : u_) m = std::max(m, std::norm(v));
        return std::sqrt(m);
    }

    double mkdv_limit() const {
        const double m = sup();
        const double stiff = 6.0 * m * m * kmax_;
        return stiff > 0.0 ? kMkdvCourant / stiff : cfg_.dt;
    }

    void advance_mkdv(double T) {
        double remaining = T;
        while (std::abs(remaining) > 0.0) {
            const double hmax = std::min(cfg_.dt, mkdv_limit());
            const std::size_t steps = static_cast<std::size_t>(std::ceil(std::abs(remaining) / hmax - 1e-9));
            const double h = remaining / static_cast<double>(steps);
            prepare_mkdv(h);
            std::size_t done = 0;
            while (done < steps) {
                mkdv_step();
                ++done;
                if (done < steps && std::abs(h) > 1.25 * mkdv_limit()) break;
            }
            remaining = (done == steps) ? 0.0 : remaining - h * static_cast<double>(done);
        }
    }

    // Linear factor e^{-i k^2 tau} for each substep length used by the composition.
    void prepare_nls(double h) {
        weights_.clear();
        if (cfg_.order == 2) {
            weights_ = {1.0};
        } else if (cfg_.order == 6) {
            // Kahan-Li s9odr6a
            const double g1 = 0.39216144400731413928, g2 = 0.33259913678935943860, g3 = -0.70624617255763935981,
                         g4 = 0.08221359629355080023, g5 = 0.79854399093482996340;
            weights_ = {g1, g2, g3, g4, g5, g4, g3, g2, g1};
        } else {
            const double c = std::cbrt(2.0);
            const double w1 = 1.0 / (2.0 - c), w0 = -c / (2.0 - c);
            weights_ = {w1, w0, w1};
        }
        lin_.clear();
        for (double w : weights_) {
            cvec e(k_.size());
            for (std::size_t m = 0; m < k_.size(); ++m) {
                const double k = m == nyq_ ? kmax_ : k_[m];
                e[m] = std::exp(-kI * (k * k * w * h));
            }
            lin_.push_back(std::move(e));
        }
        h_ = h;
    }

    void nonlinear(double tau) {
        for (auto& v : u_) v *= unit(2.0 * std::norm(v) * tau);
    }

    // e^{i th}; the series is exact to rounding for |th| <= 0.1.
    static cd unit(double th) {
        if (std::abs(th) > 0.1) return std::polar(1.0, th);
        const double t2 = th * th;
        constexpr double c2 = 1.0 / 2, c4 = 1.0 / 12, c6 = 1.0 / 30, c8 = 1.0 / 56, c10 = 1.0 / 90;
        constexpr double s3 = 1.0 / 6, s5 = 1.0 / 20, s7 = 1.0 / 42, s9 = 1.0 / 72, s11 = 1.0 / 110;
        const double c = 1.0 - t2 * c2 * (1.0 - t2 * c4 * (1.0 - t2 * c6 * (1.0 - t2 * c8 * (1.0 - t2 * c10))));
        const double s = th * (1.0 - t2 * s3 * (1.0 - t2 * s5 * (1.0 - t2 * s7 * (1.0 - t2 * s9 * (1.0 - t2 * s11)))));
        return {c, s};
    }

    // Consecutive nonlinear phases commute, so half steps are merged and applied lazily.
    void nls_step() {
        const double inv = 1.0 / static_cast<double>(u_.size());
        for (std::size_t s = 0; s < weights_.size(); ++s) {
            const double tau = weights_[s] * h_;
            nonlinear(pending_ + 0.5 * tau);
            fft_.forward(u_.data(), U_.data());
            for (std::size_t m = 0; m < U_.size(); ++m) U_[m] *= lin_[s][m] * inv;
            fft_.backward(U_.data(), u_.data());
            pending_ = 0.5 * tau;
        }
    }

    void flush() {
        if (pending_ != 0.0) nonlinear(pending_);
        pending_ = 0.0;
    }

    void prepare_mkdv(double h) {
        h_ = h;
        E_.resize(k_.size());
        E2_.resize(k_.size());
        for (std::size_t m = 0; m < k_.size(); ++m) {
            const double k3 = k_[m] * k_[m] * k_[m];
            E_[m] = std::exp(kI * (k3 * 0.5 * h));
            E2_[m] = E_[m] * E_[m];
        }
    }

    // Fourier transform of -6 |u|^2 u_x, given the spectrum of u.
    void mkdv_rhs(const avec& V, avec& out) {
        const std::size_t n = V.size();
        const double inv = 1.0 / static_cast<double>(n);
        for (std::size_t m = 0; m < n; ++m) tmp_[m] = V[m] * inv;
        fft_.backward(tmp_.data(), uu_.data());
        for (std::size_t m = 0; m < n; ++m) tmp_[m] = V[m] * (kI * k_[m]) * inv;
        fft_.backward(tmp_.data(), ux_.data());
        for (std::size_t j = 0; j < n; ++j) ux_[j] *= -6.0 * std::norm(uu_[j]);
        fft_.forward(ux_.data(), out.data());
        // 2/3 rule: the nonlinearity does not feed the top third of the spectrum.
        for (std::size_t m = 0; m < n; ++m)
            if (std::abs(k_[m]) > kcut_ || m == nyq_) out[m] = 0.0;
    }

    void mkdv_step() {
        const std::size_t n = u_.size();
        fft_.forward(u_.data(), U_.data());
        avec &a = ka_, &b = kb_, &c = kc_, &d = kd_, &w = kw_;
        mkdv_rhs(U_, a);
        for (std::size_t m = 0; m < n; ++m) w[m] = E_[m] * (U_[m] + 0.5 * h_ * a[m]);
        mkdv_rhs(w, b);
        for (std::size_t m = 0; m < n; ++m) w[m] = E_[m] * U_[m] + 0.5 * h_ * b[m];
        mkdv_rhs(w, c);
        for (std::size_t m = 0; m < n; ++m) w[m] = E2_[m] * U_[m] + h_ * E_[m] * c[m];
        mkdv_rhs(w, d);
        for (std::size_t m = 0; m < n; ++m)
            U_[m] = E2_[m] * U_[m] + h_ / 6.0 * (E2_[m] * a[m] + 2.0 * E_[m] * (b[m] + c[m]) + d[m]);
        fft_.backward(U_.data(), u_.data());
        const double inv = 1.0 / static_cast<double>(n);
        for (auto& v : u_) v *= inv;
    }

    void check() const {
        double m = 0.0;
        for (const auto& v : u_) m = std::max(m, std::abs(v));
        if (!std::isfinite(m) || (bound_ > 0.0 && m > bound_)) throw NumericError("instability: solution exceeded 10x its initial bound");
    }

    EvolveConfig cfg_;
    Fft fft_;
    rvec k_;
    avec u_, U_, tmp_, uu_, ux_;
    avec ka_, kb_, kc_, kd_, kw_;
    cvec E_, E2_;
    std::vector<double> weights_;
    std::vector<cvec> lin_;
    double h_ = 0.0;
    double pending_ = 0.0;
    double kmax_ = 0.0;
    double kcut_ = 0.0;
    std::size_t nyq_ = static_cast<std::size_t>(-1);
    double bound_;
};

}  // namespace

std::vector<Snapshot> evolve(const GridField& u0, const EvolveConfig& cfg) {
    cfg.validate();
    u0.grid.validate();
    std::vector<double> times = cfg.record_times;
    if (times.empty()) times.push_back(cfg.t_final);
    Stepper st(u0, cfg);
    std::vector<Snapshot> out;
    double t = 0.0;
    for (double target : times) {
        st.advance(target - t);
        t = target;
        out.push_back({t, GridField(u0.grid, st.state())});
    }
    return out;
}

GridField evolve_to(const GridField& u0, const EvolveConfig& cfg) {
    EvolveConfig c = cfg;
    c.record_times = {cfg.t_final};
    return evolve(u0, c).back().u;
}

Perturbation parse_perturbation(const std::string& s) {
    if (s == "gaussian") return Perturbation::gaussian;
    if (s == "sech-bump") return Perturbation::sech_bump;
    if (s == "band-limited-noise" || s == "noise") return Perturbation::noise;
    throw DomainError("unknown perturbation '" + s + "'");
}

std::string to_string(Perturbation p) {
    switch (p) {
        case Perturbation::gaussian: return "gaussian";
        case Perturbation::sech_bump: return "sech-bump";
        case Perturbation::noise: return "band-limited-noise";
    }
    return "";
}

GridField perturbation_profile(const Grid& g, Perturbation p, std::uint64_t seed) {
    GridField f(g);
    switch (p) {
        case Perturbation::gaussian:
            f = sample(g, [](double x) { return cd{std::exp(-0.5 * (x - 1.0) * (x - 1.0)), 0.0}; });
            break;
        case Perturbation::sech_bump:
            f = sample(g, [](double x) { return std::exp(0.5 * kI * x) / std::cosh(x + 1.0); });
            break;
        case Perturbation::noise: {
            std::mt19937_64 rng(seed);
            std::normal_distribution<double> nd;
            const Fft fft(g.n);
            const rvec k = wavenumbers(g);
            cvec U(g.n, cd{});
            for (std::size_t m = 0; m < g.n; ++m)
                if (std::abs(k[m]) <= 4.0 && !(g.n % 2 == 0 && m == g.n / 2)) U[m] = cd{nd(rng), nd(rng)};
            const cvec raw = fft.backward_normalized(U);
            for (std::size_t j = 0; j < g.n; ++j) {
                const double x = g.x(j);
                f[j] = raw[j] * std::exp(-x * x / 50.0);
            }
            break;
        }
    }
    const double nrm = f.l2_norm();
    return (1.0 / nrm) * f;
}

StabilityReport stability_experiment(const PhasePoint& point, double eps, Perturbation shape, std::uint64_t seed,
                                     const EvolveConfig& cfg, const Grid& grid, const StabilityOptions& opt) {
    if (!(eps >= 0.0 && eps <= 0.1)) throw DomainError("eps must lie in [0, 0.1]");
    const GridField zero(grid);
    const GridField w0 = add_solitons(zero, point) + eps * perturbation_profile(grid, shape, seed);
    EvolveConfig c = cfg;
    if (c.record_times.empty()) c.record_times = {c.t_final};
    std::vector<double> times = c.record_times;
    if (times.front() != 0.0) times.insert(times.begin(), 0.0);
    c.record_times = times;
    const auto snaps = evolve(w0, c);
    StabilityReport rep;
    rep.eps = eps;
    cvec s0;
    for (const auto& sn : snaps) {
        rep.times.push_back(sn.t);
        try {
            const Removal r = remove_solitons(JostSolver(sn.u, opt.jost_accuracy), opt.region, nullptr, opt.locate);
            const GridField vt = add_solitons(zero, r.point);
            rep.manifold_distance.push_back((sn.u - vt).l2_norm());
            rep.residual_mass.push_back(r.u.l2_norm());
            if (s0.empty()) s0 = r.point.spectrum.s;
            double drift = 0.0;
            if (r.point.spectrum.s.size() != s0.size()) {
                drift = 1e300;
            } else {
                for (std::size_t k = 0; k < s0.size(); ++k) drift = std::max(drift, std::abs(r.point.spectrum.s[k] - s0[k]));
            }
            rep.spectrum_drift.push_back(drift);
            rep.flag.push_back("ok");
        } catch (const Error& e) {
            rep.manifold_distance.push_back(std::nan(""));
            rep.residual_mass.push_back(std::nan(""));
            rep.spectrum_drift.push_back(std::nan(""));
            rep.flag.push_back(e.what());
        }
    }
    return rep;
}

}  // namespace sf
