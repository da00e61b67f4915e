#include "solitonforge/scattering.hpp"
#include "solitonforge/spectral.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace sf {

void Region::validate() const {
    if (!(x1 > x0) || !(y1 > y0)) throw DomainError("region must have positive width and height");
    if (!(y0 > 0.0)) throw DomainError("region must lie in the open upper half-plane");
}

std::pair<rvec, rvec> gauss_legendre(std::size_t n) {
    rvec x(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
        double t = std::cos(kPi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = t;
            for (std::size_t k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                p0 = p1;
                p1 = p2;
            }
            const double pn = (n == 0) ? 1.0 : (n == 1 ? t : p1);
            const double pm = (n == 1) ? 1.0 : p0;
            dp = static_cast<double>(n) * (t * pn - pm) / (t * t - 1.0);
            const double dt = pn / dp;
            t -= dt;
            if (std::abs(dt) < 1e-16) break;
        }
        x[i] = t;
        w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
    return {x, w};
}

// ---------------------------------------------------------------- JostSolver

JostSolver::JostSolver(const GridField& u, double accuracy) : u_(u), accuracy_(accuracy) {
    u_.grid.validate();
    umax_ = u_.sup_norm();
    if (!std::isfinite(umax_)) throw NumericError("potential has non-finite samples");
}

int JostSolver::substeps(cd z) const {
    const double lam = 2.0 * std::abs(z) + 2.0 * umax_ + 1.0;
    return std::max(1, static_cast<int>(std::ceil(u_.grid.dx * lam / accuracy_)));
}

std::shared_ptr<const JostSolver::Table> JostSolver::table(int m) const {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = tables_.find(m);
        if (it != tables_.end()) return it->second;
    }
    auto t = std::make_shared<Table>();
    const std::size_t n = u_.size();
    const int stride = 2 * m + 1;
    t->stride = stride;
    t->u.resize(n * stride);
    for (int l = 0; l < 2 * m; ++l) {
        const cvec s = (l == 0) ? u_.values : spectral_shift(u_, u_.grid.dx * l / (2.0 * m));
        for (std::size_t j = 0; j < n; ++j) t->u[j * stride + l] = s[j];
    }
    for (std::size_t j = 0; j < n; ++j) t->u[j * stride + 2 * m] = u_.values[(j + 1) % n];
    std::lock_guard<std::mutex> lock(mutex_);
    return tables_.emplace(m, std::move(t)).first->second;
}

namespace {

constexpr int kMaxOrder = 2;

template <int K>
struct State {
    std::array<cd, K + 1> a{}, b{};
};

template <int K>
inline State<K> axpy(const State<K>& y, double h, const State<K>& k) {
    State<K> r;
    for (int d = 0; d <= K; ++d) {
        r.a[d] = y.a[d] + h * k.a[d];
        r.b[d] = y.b[d] + h * k.b[d];
    }
    return r;
}

// Renormalized left system: a' = u b, b' = 2iz b - ubar a (and z-derivatives).
template <int K>
inline State<K> f_left(cd u, cd tz, const State<K>& y) {
    State<K> r;
    const cd ub = std::conj(u);
    for (int d = 0; d <= K; ++d) {
        r.a[d] = u * y.b[d];
        r.b[d] = tz * y.b[d] - ub * y.a[d];
        if (d > 0) r.b[d] += 2.0 * kI * static_cast<double>(d) * y.b[d - 1];
    }
    return r;
}

// Renormalized right system: a' = -2iz a + u b, b' = -ubar a.
template <int K>
inline State<K> f_right(cd u, cd tz, const State<K>& y) {
    State<K> r;
    const cd ub = std::conj(u);
    for (int d = 0; d <= K; ++d) {
        r.a[d] = tz * y.a[d] + u * y.b[d];
        r.b[d] = -ub * y.a[d];
        if (d > 0) r.a[d] -= 2.0 * kI * static_cast<double>(d) * y.a[d - 1];
    }
    return r;
}

template <int K>
inline void rk4_update(State<K>& y, double h, const State<K>& k1, const State<K>& k2, const State<K>& k3,
                       const State<K>& k4) {
    for (int d = 0; d <= K; ++d) {
        y.a[d] += h / 6.0 * (k1.a[d] + 2.0 * k2.a[d] + 2.0 * k3.a[d] + k4.a[d]);
        y.b[d] += h / 6.0 * (k1.b[d] + 2.0 * k2.b[d] + 2.0 * k3.b[d] + k4.b[d]);
    }
}

template <int K>
void store(JostSweep& out, std::size_t j, const State<K>& y) {
    for (int d = 0; d <= K; ++d) {
        out.c1[d][j] = y.a[d];
        out.c2[d][j] = y.b[d];
    }
}

template <int K>
void check_finite(const State<K>& y, const char* what) {
    for (int d = 0; d <= K; ++d)
        if (!std::isfinite(std::abs(y.a[d])) || !std::isfinite(std::abs(y.b[d]))) throw NumericError(what);
}

// tab holds u at x_j + l dx/(2m), l = 0..2m, for each cell j.
template <int K>
void sweep_left(const cd* tab, int m, double h, cd z, std::size_t stop, JostSweep& out) {
    const int stride = 2 * m + 1;
    const cd tz = 2.0 * kI * z;
    State<K> y;
    y.a[0] = 1.0;
    store(out, 0, y);
    for (std::size_t j = 0; j < stop; ++j) {
        const cd* c = tab + j * stride;
        for (int l = 0; l < m; ++l) {
            const cd u0 = c[2 * l], u1 = c[2 * l + 1], u2 = c[2 * l + 2];
            const State<K> k1 = f_left(u0, tz, y);
            const State<K> k2 = f_left(u1, tz, axpy(y, 0.5 * h, k1));
            const State<K> k3 = f_left(u1, tz, axpy(y, 0.5 * h, k2));
            const State<K> k4 = f_left(u2, tz, axpy(y, h, k3));
            rk4_update(y, h, k1, k2, k3, k4);
        }
        store(out, j + 1, y);
    }
    check_finite(y, "left Jost solution overflowed");
}

template <int K>
void sweep_right(const cd* tab, int m, double h, cd z, std::size_t n, std::size_t stop, JostSweep& out) {
    const int stride = 2 * m + 1;
    const cd tz = -2.0 * kI * z;
    State<K> y;
    y.b[0] = 1.0;
    store(out, n - 1, y);
    for (std::size_t j = n - 1; j > stop; --j) {
        const std::size_t base = j - 1;
        const cd* c = tab + base * stride;
        for (int l = 0; l < m; ++l) {
            const int q0 = 2 * m - 2 * l;
            const cd u0 = c[q0], u1 = c[q0 - 1], u2 = c[q0 - 2];
            const State<K> k1 = f_right(u0, tz, y);
            const State<K> k2 = f_right(u1, tz, axpy(y, 0.5 * h, k1));
            const State<K> k3 = f_right(u1, tz, axpy(y, 0.5 * h, k2));
            const State<K> k4 = f_right(u2, tz, axpy(y, h, k3));
            rk4_update(y, h, k1, k2, k3, k4);
        }
        store(out, base, y);
    }
    check_finite(y, "right Jost solution overflowed");
}

void check_order(int order) {
    if (order < 0 || order > kMaxOrder) throw DomainError("jet order must be 0, 1 or 2");
}

}  // namespace

JostSweep JostSolver::left(cd z, int order, std::size_t stop) const {
    check_order(order);
    const std::size_t n = u_.size();
    if (stop == npos || stop >= n) stop = n - 1;
    const int m = substeps(z);
    const auto tab = table(m);
    const double h = u_.grid.dx / m;
    JostSweep out;
    out.z = z;
    out.order = order;
    out.c1.assign(order + 1, cvec(n, cd{}));
    out.c2.assign(order + 1, cvec(n, cd{}));
    const cd* t = tab->u.data();
    if (order == 0) sweep_left<0>(t, m, h, z, stop, out);
    else if (order == 1) sweep_left<1>(t, m, h, z, stop, out);
    else sweep_left<2>(t, m, h, z, stop, out);
    return out;
}

JostSweep JostSolver::right(cd z, int order, std::size_t stop) const {
    check_order(order);
    const std::size_t n = u_.size();
    if (stop >= n) stop = 0;
    const int m = substeps(z);
    const auto tab = table(m);
    const double h = -u_.grid.dx / m;
    JostSweep out;
    out.z = z;
    out.order = order;
    out.c1.assign(order + 1, cvec(n, cd{}));
    out.c2.assign(order + 1, cvec(n, cd{}));
    const cd* t = tab->u.data();
    if (order == 0) sweep_right<0>(t, m, h, z, n, stop, out);
    else if (order == 1) sweep_right<1>(t, m, h, z, n, stop, out);
    else sweep_right<2>(t, m, h, z, n, stop, out);
    return out;
}

cvec JostSolver::transmission_inv_jet(cd z, int order) const {
    const std::size_t mid = u_.size() / 2;
    const JostSweep l = left(z, order, mid);
    const JostSweep r = right(z, order, mid);
    static const double binom[3][3] = {{1, 0, 0}, {1, 1, 0}, {1, 2, 1}};
    cvec w(order + 1, cd{});
    for (int k = 0; k <= order; ++k)
        for (int a = 0; a <= k; ++a)
            w[k] += binom[k][a] * (l.c1[a][mid] * r.c2[k - a][mid] - l.c2[a][mid] * r.c1[k - a][mid]);
    return w;
}

std::pair<WavePair, WavePair> jost_pair(const GridField& u, cd z) {
    if (!(z.imag() >= 0.05)) throw DomainError("jost_pair needs Im z >= 0.05");
    const JostSolver s(u);
    const JostSweep l = s.left(z);
    const JostSweep r = s.right(z);
    return {WavePair{u.grid, l.c1[0], l.c2[0], Renorm::left, z}, WavePair{u.grid, r.c1[0], r.c2[0], Renorm::right, z}};
}

cd transmission_inv(const GridField& u, cd z) {
    if (!(z.imag() >= 0.05)) throw DomainError("transmission_inv needs Im z >= 0.05");
    return JostSolver(u).transmission_inv(z);
}

// ---------------------------------------------------------------- spectrum

namespace {

struct ContourNode {
    cd z;
    cd dz;  // quadrature weight times tangent
};

std::vector<ContourNode> rectangle_nodes(const Region& r, std::size_t samples) {
    const cd c[4] = {{r.x0, r.y0}, {r.x1, r.y0}, {r.x1, r.y1}, {r.x0, r.y1}};
    const double per = 2.0 * ((r.x1 - r.x0) + (r.y1 - r.y0));
    std::vector<ContourNode> out;
    for (int s = 0; s < 4; ++s) {
        const cd a = c[s], b = c[(s + 1) % 4];
        const std::size_t k =
            std::max<std::size_t>(8, static_cast<std::size_t>(std::lround(samples * std::abs(b - a) / per)));
        const auto [x, w] = gauss_legendre(k);
        for (std::size_t i = 0; i < k; ++i) out.push_back({0.5 * (a + b) + 0.5 * (b - a) * x[i], 0.5 * (b - a) * w[i]});
    }
    return out;
}

cd refine_root(const JostSolver& s, cd z, int multiplicity) {
    if (multiplicity > 2) return z;
    const int d = multiplicity - 1;
    for (int it = 0; it < 30; ++it) {
        const cvec w = s.transmission_inv_jet(z, d + 1);
        if (w[d + 1] == cd{}) break;
        const cd step = w[d] / w[d + 1];
        z -= step;
        if (std::abs(step) < 1e-14 * (1.0 + std::abs(z))) break;
    }
    return z;
}

}  // namespace

SpectrumReport locate_spectrum(const GridField& u, const Region& region, const LocateOptions& opt) {
    return locate_spectrum(JostSolver(u), region, opt);
}

SpectrumReport locate_spectrum(const JostSolver& solver, const Region& region, const LocateOptions& opt) {
    region.validate();
    if (region.y0 < 0.05) throw DomainError("region must stay at Im z >= 0.05");
    SpectrumReport rep;
    rep.region = region;
    std::size_t samples = opt.contour_samples;
    for (int attempt = 0;; ++attempt) {
        const auto nodes = rectangle_nodes(region, samples);
        std::vector<cvec> vals(nodes.size());
        parallel_for(nodes.size(), [&](std::size_t i) { vals[i] = solver.transmission_inv_jet(nodes[i].z, 1); });
        double fmin = 1e300;
        for (const auto& v : vals) fmin = std::min(fmin, std::abs(v[0]));
        if (fmin < 1e-6) throw SpectralError("zero of 1/T on the contour");
        auto moment = [&](int k) {
            cd acc{};
            for (std::size_t i = 0; i < nodes.size(); ++i)
                acc += nodes[i].dz * std::pow(nodes[i].z, k) * vals[i][1] / vals[i][0];
            return acc / (2.0 * kPi * kI);
        };
        const cd I0 = moment(0);
        const double cnt = std::round(I0.real());
        if (std::abs(I0 - cnt) >= 0.05 || cnt < 0) {
            if (attempt >= opt.max_doublings) throw NumericError("winding number not resolved; increase contour samples");
            samples *= 2;
            continue;
        }
        rep.contour_samples = nodes.size();
        rep.count = static_cast<std::size_t>(cnt);
        if (rep.count == 0) return rep;
        rep.contour_s.resize(rep.count);
        for (std::size_t k = 1; k <= rep.count; ++k) rep.contour_s[k - 1] = moment(static_cast<int>(k));
        break;
    }
    const cvec raw = roots_from_sym(SpectrumSym{rep.count, rep.contour_s});
    for (const auto& cl : cluster_roots(raw)) {
        const cd z = refine_root(solver, cl.z, cl.multiplicity);
        if (cl.multiplicity == 1 && std::abs(solver.transmission_inv(z)) > 1e-9)
            throw NumericError("eigenvalue refinement did not converge");
        for (int m = 0; m < cl.multiplicity; ++m) rep.roots.push_back(z);
    }
    rep.spectrum = sym_from_roots(rep.roots);
    return rep;
}

// ---------------------------------------------------------------- scattering data

BetaPoly beta_from_kappas(const cvec& roots, const std::vector<int>& mult, const cvec& kappa, const cvec& dkappa) {
    std::size_t N = 0;
    for (int m : mult) {
        if (m < 1 || m > 2) throw DomainError("only simple and double roots are supported");
        N += static_cast<std::size_t>(m);
    }
    const std::size_t R = 2 * N;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(R, R);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(R);
    std::vector<std::size_t> value_row(roots.size());
    std::size_t row = 0;
    for (std::size_t j = 0; j < roots.size(); ++j) {
        const cd z = roots[j];
        cd p = 1.0;
        value_row[j] = row;
        for (std::size_t k = 0; k < R; ++k) {
            A(row, k) = p.real();
            A(row + 1, k) = p.imag();
            p *= z;
        }
        const cd target = -kI * kappa[j];
        rhs(row) = target.real();
        rhs(row + 1) = target.imag();
        row += 2;
        if (mult[j] == 2) {
            cd q = 1.0;
            for (std::size_t k = 1; k < R; ++k) {
                A(row, k) = static_cast<double>(k) * q.real();
                A(row + 1, k) = static_cast<double>(k) * q.imag();
                q *= z;
            }
            const cd dt = -kI * dkappa[j];
            rhs(row) = dt.real();
            rhs(row + 1) = dt.imag();
            row += 2;
        }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (sv(R - 1) == 0.0 || sv(0) / sv(R - 1) > 1e10) throw NumericError("beta interpolation system is ill-conditioned");
    const Eigen::VectorXd base = svd.solve(rhs);
    std::vector<Eigen::VectorXd> shift(roots.size());
    for (std::size_t j = 0; j < roots.size(); ++j) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(R);
        e(value_row[j]) = kPi;
        shift[j] = svd.solve(e);
    }
    // Branch search over k_j in {-1, 0, 1}.
    Eigen::VectorXd best = base;
    double best_norm = base.norm();
    std::size_t combos = 1;
    for (std::size_t j = 0; j < roots.size(); ++j) combos *= 3;
    for (std::size_t c = 0; c < combos; ++c) {
        Eigen::VectorXd cand = base;
        std::size_t t = c;
        for (std::size_t j = 0; j < roots.size(); ++j) {
            const int k = static_cast<int>(t % 3) - 1;
            t /= 3;
            if (k) cand += k * shift[j];
        }
        const double nn = cand.norm();
        if (nn < best_norm - 1e-12) {
            best_norm = nn;
            best = cand;
        }
    }
    BetaPoly b;
    b.coeffs.assign(best.data(), best.data() + R);
    return b;
}

ScatteringData extract_scattering_data(const GridField& v, const SpectrumReport& report) {
    return extract_scattering_data(JostSolver(v), report);
}

ScatteringData extract_scattering_data(const JostSolver& solver, const SpectrumReport& report) {
    if (report.count == 0) throw SpectralError("empty spectrum");
    ScatteringData sd;
    for (const auto& cl : cluster_roots(report.roots)) {
        if (cl.multiplicity > 2) throw DomainError("eigenvalue multiplicity above 2 is not supported");
        sd.roots.push_back(cl.z);
        sd.multiplicity.push_back(cl.multiplicity);
    }
    const std::size_t D = sd.roots.size();
    sd.kappa.assign(D, cd{});
    sd.dkappa.assign(D, cd{});
    sd.match_index.assign(D, 0);
    const Grid& g = solver.potential().grid;
    for (std::size_t j = 0; j < D; ++j) {
        const cd z = sd.roots[j];
        const int order = sd.multiplicity[j] == 2 ? 1 : 0;
        const JostSweep l = solver.left(z, order);
        const JostSweep r = solver.right(z, order);
        double best = -1.0;
        std::size_t jx = 0;
        int comp = 0;
        for (std::size_t i = 0; i < g.n; ++i) {
            const double p1 = std::abs(l.c1[0][i] * r.c1[0][i]);
            const double p2 = std::abs(l.c2[0][i] * r.c2[0][i]);
            if (p1 > best) {
                best = p1;
                jx = i;
                comp = 0;
            }
            if (p2 > best) {
                best = p2;
                jx = i;
                comp = 1;
            }
        }
        const double x = g.x(jx);
        const cd mc = comp == 0 ? l.c1[0][jx] : l.c2[0][jx];
        const cd nc = comp == 0 ? r.c1[0][jx] : r.c2[0][jx];
        sd.kappa[j] = 0.5 * (std::log(-mc / nc) - 2.0 * kI * z * x);
        if (order == 1) {
            const cd pc = comp == 0 ? l.c1[1][jx] : l.c2[1][jx];
            const cd qc = comp == 0 ? r.c1[1][jx] : r.c2[1][jx];
            sd.dkappa[j] = 0.5 * (pc / mc - qc / nc - 2.0 * kI * x);
        }
        sd.match_index[j] = jx;
    }
    sd.beta = beta_from_kappas(sd.roots, sd.multiplicity, sd.kappa, sd.dkappa);
    for (std::size_t j = 0; j < D; ++j) {
        sd.kappa[j] = kI * sd.beta(sd.roots[j]);
        sd.dkappa[j] = sd.multiplicity[j] == 2 ? kI * sd.beta.derivative(sd.roots[j]) : cd{};
    }
    return sd;
}

}  // namespace sf
