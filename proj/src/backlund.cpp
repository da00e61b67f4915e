#include "solitonforge/backlund.hpp"
#include "solitonforge/spectral.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>

namespace sf {

std::vector<RootCluster> addition_roots(const SpectrumSym& s) {
    const cvec roots = roots_from_sym(s);
    std::vector<RootCluster> out;
    for (const auto& cl : cluster_roots(roots)) {
        if (cl.multiplicity <= 2) {
            out.push_back(cl);
            continue;
        }
        for (int k = 0; k < cl.multiplicity; ++k)
            out.push_back({cl.z + 1e-3 * std::exp(2.0 * kPi * kI * static_cast<double>(k) / static_cast<double>(cl.multiplicity)), 1});
    }
    return out;
}

namespace {

struct Sweeps {
    cvec m1, m2, p1, p2;  // left renormalized and its z-derivative
    cvec n1, n2, q1, q2;  // right renormalized and its z-derivative
};

Sweeps background_sweeps(const JostSolver& solver, cd z, int order) {
    const GridField& u = solver.potential();
    const std::size_t n = u.size();
    Sweeps s;
    if (u.is_zero()) {
        s.m1.assign(n, 1.0);
        s.m2.assign(n, 0.0);
        s.n1.assign(n, 0.0);
        s.n2.assign(n, 1.0);
        if (order > 0) {
            s.p1.assign(n, 0.0);
            s.p2.assign(n, 0.0);
            s.q1.assign(n, 0.0);
            s.q2.assign(n, 0.0);
        }
        return s;
    }
    const JostSweep l = solver.left(z, order);
    const JostSweep r = solver.right(z, order);
    const std::size_t mid = n / 2;
    const cd w = l.c1[0][mid] * r.c2[0][mid] - l.c2[0][mid] * r.c1[0][mid];
    if (std::abs(w) < 1e-6) throw SpectralError("root coincides with an eigenvalue of the background");
    s.m1 = l.c1[0];
    s.m2 = l.c2[0];
    s.n1 = r.c1[0];
    s.n2 = r.c2[0];
    if (order > 0) {
        s.p1 = l.c1[1];
        s.p2 = l.c2[1];
        s.q1 = r.c1[1];
        s.q2 = r.c2[1];
    }
    return s;
}

void normalize(cd& a, cd& b, cd* da, cd* db) {
    const double nrm = std::sqrt(std::norm(a) + std::norm(b));
    if (!(nrm > 0.0) || !std::isfinite(nrm)) throw NumericError("wave vanished or overflowed");
    a /= nrm;
    b /= nrm;
    if (da) {
        *da /= nrm;
        *db /= nrm;
    }
}

// Fills psi (and psi' when jet is requested) for e^{-kappa} psi_l + e^{kappa} psi_r.
void assemble_wave(const Grid& g, const Sweeps& s, cd z, cd kappa, cd dkappa, bool jet, WavePair& w,
                   WavePair* dw) {
    const std::size_t n = g.n;
    w = WavePair{g, cvec(n), cvec(n), Renorm::none, z};
    if (jet) *dw = WavePair{g, cvec(n), cvec(n), Renorm::none, z};
    for (std::size_t j = 0; j < n; ++j) {
        const double x = g.x(j);
        const cd E = kappa + kI * z * x;
        cd gm = 1.0, gn = 1.0;
        if (E.real() > 0.0)
            gm = std::exp(-2.0 * E);
        else
            gn = std::exp(2.0 * E);
        cd a = gm * s.m1[j] + gn * s.n1[j];
        cd b = gm * s.m2[j] + gn * s.n2[j];
        if (jet) {
            const cd Ep = dkappa + kI * x;
            cd da = gm * (s.p1[j] - Ep * s.m1[j]) + gn * (s.q1[j] + Ep * s.n1[j]);
            cd db = gm * (s.p2[j] - Ep * s.m2[j]) + gn * (s.q2[j] + Ep * s.n2[j]);
            normalize(a, b, &da, &db);
            dw->comp1[j] = da;
            dw->comp2[j] = db;
        } else {
            normalize(a, b, nullptr, nullptr);
        }
        w.comp1[j] = a;
        w.comp2[j] = b;
    }
}

// Column data of the Gram system at one grid point.
struct Column {
    cd z;
    cd a, b;        // base wave at z
    cd da, db;      // derivative (only for jet columns)
    bool jet;
};

inline cd dot(cd a1, cd a2, cd b1, cd b2) { return std::conj(a1) * b1 + std::conj(a2) * b2; }

// H_jk = d^{a}/d conj(w) d^{b}/dz [ i psi(w)^* psi(z) / (z - conj w) ].
cd gram_entry(const Column& r, const Column& c) {
    const cd d = c.z - std::conj(r.z);
    const cd f = dot(r.a, r.b, c.a, c.b);
    if (!r.jet && !c.jet) return kI * f / d;
    if (!r.jet && c.jet) {
        const cd fz = dot(r.a, r.b, c.da, c.db);
        return kI * (fz / d - f / (d * d));
    }
    const cd fw = dot(r.da, r.db, c.a, c.b);
    if (r.jet && !c.jet) return kI * (fw / d + f / (d * d));
    const cd fz = dot(r.a, r.b, c.da, c.db);
    const cd fzw = dot(r.da, r.db, c.da, c.db);
    return kI * (fzw / d + fz / (d * d) - fw / (d * d) - 2.0 * f / (d * d * d));
}

std::vector<Column> columns_at(const WaveSet& w, std::size_t j) {
    std::vector<Column> cols(w.size());
    for (std::size_t k = 0; k < w.size(); ++k) {
        Column& c = cols[k];
        c.z = w.z[k];
        c.a = w.waves[k].comp1[j];
        c.b = w.waves[k].comp2[j];
        c.jet = w.jets[k].has_value();
        if (c.jet) {
            c.da = w.jets[k]->comp1[j];
            c.db = w.jets[k]->comp2[j];
        }
    }
    return cols;
}

// Solves H X = B with the definite Gram matrix; sign is +1 or -1 for the definiteness.
struct GramSolver {
    Eigen::MatrixXcd H;
    double sign;
    double cond = 0.0;
    bool fallback = false;

    Eigen::MatrixXcd solve(const Eigen::MatrixXcd& B) {
        const Eigen::MatrixXcd S = sign * H;
        Eigen::LLT<Eigen::MatrixXcd> llt(S);
        if (llt.info() == Eigen::Success) {
            const double rc = llt.rcond();
            cond = rc > 0.0 ? 1.0 / rc : 1e300;
            if (cond <= 1e12) return sign * llt.solve(B);
        }
        fallback = true;
        Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(H);
        const auto& R = qr.matrixR();
        const double big = std::abs(R(0, 0));
        const double small = std::abs(R(H.rows() - 1, H.rows() - 1));
        cond = small > 0.0 ? big / small : 1e300;
        if (cond > 1e12) throw NumericError("Gram matrix is numerically singular; merge confluent roots or use the jet path");
        return qr.solve(B);
    }
};

void check_waveset(const WaveSet& w) {
    if (w.size() == 0) throw DomainError("empty wave set");
    if (w.waves.size() != w.size() || w.jets.size() != w.size()) throw DomainError("inconsistent wave set");
    const bool upper = w.z[0].imag() > 0.0;
    for (const auto& z : w.z)
        if ((z.imag() > 0.0) != upper || z.imag() == 0.0) throw DomainError("wave set roots must lie in one open half-plane");
}

}  // namespace

WavePair unbounded_wave(const GridField& u, cd z, cd kappa) {
    if (!(z.imag() > 0.0)) throw DomainError("unbounded_wave needs Im z > 0");
    const JostSolver solver(u);
    const Sweeps s = background_sweeps(solver, z, 0);
    WavePair w;
    assemble_wave(u.grid, s, z, kappa, cd{}, false, w, nullptr);
    return w;
}

WaveSet addition_waves(const GridField& u, const PhasePoint& point) { return addition_waves(JostSolver(u), point); }

WaveSet addition_waves(const JostSolver& solver, const PhasePoint& point) {
    point.validate();
    const Grid& g = solver.potential().grid;
    const auto clusters = addition_roots(point.spectrum);
    WaveSet ws;
    std::vector<std::size_t> slot;
    for (const auto& cl : clusters) {
        for (int k = 0; k < cl.multiplicity; ++k) {
            ws.z.push_back(cl.z);
            slot.push_back(ws.waves.size());
        }
    }
    ws.waves.resize(ws.z.size());
    ws.jets.resize(ws.z.size());
    std::vector<std::size_t> first;
    for (std::size_t i = 0, k = 0; i < clusters.size(); k += clusters[i].multiplicity, ++i) first.push_back(k);
    std::mutex mu;
    parallel_for(clusters.size(), [&](std::size_t i) {
        const auto& cl = clusters[i];
        const bool jet = cl.multiplicity == 2;
        const Sweeps s = background_sweeps(solver, cl.z, jet ? 1 : 0);
        WavePair w, dw;
        assemble_wave(g, s, cl.z, kI * point.beta(cl.z), kI * point.beta.derivative(cl.z), jet, w, &dw);
        std::lock_guard<std::mutex> lock(mu);
        ws.waves[first[i]] = w;
        if (jet) {
            ws.waves[first[i] + 1] = w;
            ws.jets[first[i] + 1] = dw;
        }
    });
    return ws;
}

GridField gram_correction(const WaveSet& w, GramDiagnostics* diag) {
    check_waveset(w);
    const Grid& g = w.waves[0].grid;
    const std::size_t N = w.size();
    double expected = 0.0;
    for (const auto& z : w.z) expected += 2.0 * z.imag();
    const double sign = expected > 0 ? 1.0 : -1.0;
    GridField out(g);
    std::vector<double> trace_err(g.n, 0.0), cond(g.n, 0.0);
    std::atomic<std::size_t> fallbacks{0};
    const std::size_t chunks = std::max<std::size_t>(1, thread_count() * 4);
    parallel_for(chunks, [&](std::size_t c) {
        for (std::size_t j = c; j < g.n; j += chunks) {
            const auto cols = columns_at(w, j);
            GramSolver gs;
            gs.sign = sign;
            gs.H.resize(N, N);
            Eigen::MatrixXcd V(2, N);
            for (std::size_t a = 0; a < N; ++a) {
                V(0, a) = cols[a].jet ? cols[a].da : cols[a].a;
                V(1, a) = cols[a].jet ? cols[a].db : cols[a].b;
                for (std::size_t b = 0; b < N; ++b) gs.H(a, b) = gram_entry(cols[a], cols[b]);
            }
            const Eigen::MatrixXcd X = gs.solve(V.adjoint());
            const Eigen::Matrix2cd A = V * X;
            out[j] = 2.0 * A(0, 1);
            trace_err[j] = std::abs(A.trace() - expected);
            cond[j] = gs.cond;
            if (gs.fallback) ++fallbacks;
        }
    });
    for (std::size_t j = 0; j < g.n; ++j)
        if (!std::isfinite(std::abs(out[j]))) throw NumericError("non-finite Gram correction");
    if (diag) {
        diag->trace_error = *std::max_element(trace_err.begin(), trace_err.end());
        diag->max_condition = *std::max_element(cond.begin(), cond.end());
        diag->qr_fallbacks = fallbacks;
    }
    return out;
}

GridField add_solitons(const GridField& u, const PhasePoint& point, const AddOptions& opt, GramDiagnostics* diag) {
    point.validate();
    const JostSolver solver(u);
    if (opt.check_background && !u.is_zero()) {
        const cvec roots = roots_from_sym(point.spectrum);
        Region r{1e300, -1e300, 1e300, -1e300};
        for (const auto& z : roots) {
            r.x0 = std::min(r.x0, z.real() - 0.25);
            r.x1 = std::max(r.x1, z.real() + 0.25);
            r.y0 = std::min(r.y0, z.imag() - 0.25);
            r.y1 = std::max(r.y1, z.imag() + 0.25);
        }
        r.y0 = std::max(r.y0, 0.05);
        if (locate_spectrum(solver, r).count != 0)
            throw SpectralError("background already has eigenvalues near the requested roots");
    }
    const WaveSet ws = addition_waves(solver, point);
    return u + gram_correction(ws, diag);
}

Removal remove_solitons(const GridField& v, const Region& region, GramDiagnostics* diag) {
    return remove_solitons(JostSolver(v), region, diag);
}

Removal remove_solitons(const JostSolver& solver, const Region& region, GramDiagnostics* diag,
                        const LocateOptions& locate) {
    const GridField& v = solver.potential();
    SpectrumReport rep = locate_spectrum(solver, region, locate);
    if (rep.count == 0) throw SpectralError("empty spectrum: nothing to remove");
    const ScatteringData sd = extract_scattering_data(solver, rep);
    const Grid& g = v.grid;
    WaveSet ws;
    for (std::size_t i = 0; i < sd.roots.size(); ++i) {
        const cd z = sd.roots[i];
        const bool jet = sd.multiplicity[i] == 2;
        const JostSweep l = solver.left(z, jet ? 1 : 0);
        const JostSweep r = solver.right(z, jet ? 1 : 0);
        const std::size_t xs = sd.match_index[i];
        WavePair chi{g, cvec(g.n), cvec(g.n), Renorm::none, std::conj(z)};
        WavePair dchi = chi;
        for (std::size_t j = 0; j < g.n; ++j) {
            const double x = g.x(j);
            cd a, b, da{}, db{};
            if (j <= xs) {
                a = l.c1[0][j];
                b = l.c2[0][j];
                if (jet) {
                    da = l.c1[1][j] - kI * x * a;
                    db = l.c2[1][j] - kI * x * b;
                }
            } else {
                a = r.c1[0][j];
                b = r.c2[0][j];
                if (jet) {
                    const cd e = kI * x + 2.0 * sd.dkappa[i];
                    da = r.c1[1][j] + e * a;
                    db = r.c2[1][j] + e * b;
                }
            }
            // (conj phi2, -conj phi1) solves the system at conj z.
            cd ca = std::conj(b), cb = -std::conj(a);
            cd cda = std::conj(db), cdb = -std::conj(da);
            normalize(ca, cb, jet ? &cda : nullptr, jet ? &cdb : nullptr);
            chi.comp1[j] = ca;
            chi.comp2[j] = cb;
            dchi.comp1[j] = cda;
            dchi.comp2[j] = cdb;
        }
        ws.z.push_back(std::conj(z));
        ws.waves.push_back(chi);
        ws.jets.emplace_back(std::nullopt);
        if (jet) {
            ws.z.push_back(std::conj(z));
            ws.waves.push_back(chi);
            ws.jets.emplace_back(dchi);
        }
    }
    Removal out{v + gram_correction(ws, diag), PhasePoint{rep.spectrum, sd.beta}, rep};
    return out;
}

WavePair propagate_wave(const GridField& u, const PhasePoint& point, const WavePair& probe) {
    return propagate_wave(addition_waves(u, point), probe);
}

WavePair propagate_wave(const WaveSet& w, const WavePair& probe) {
    check_waveset(w);
    const Grid& g = w.waves[0].grid;
    if (probe.comp1.size() != g.n || probe.comp2.size() != g.n) throw DomainError("probe lives on a different grid");
    const std::size_t N = w.size();
    const cd z = probe.z;
    cd pref = 1.0;
    for (const auto& zl : w.z) {
        if (std::abs(z - zl) < 1e-10 || std::abs(z - std::conj(zl)) < 1e-10)
            throw DomainError("probe parameter coincides with a root");
        pref *= (z - std::conj(zl));
    }
    WavePair out{g, cvec(g.n), cvec(g.n), probe.renorm, z};
    const double sign = w.z[0].imag() > 0 ? 1.0 : -1.0;
    for (std::size_t j = 0; j < g.n; ++j) {
        const auto cols = columns_at(w, j);
        GramSolver gs;
        gs.sign = sign;
        gs.H.resize(N, N);
        Eigen::MatrixXcd V(2, N);
        Eigen::VectorXcd r(N);
        const cd p1 = probe.comp1[j], p2 = probe.comp2[j];
        for (std::size_t a = 0; a < N; ++a) {
            const Column& c = cols[a];
            V(0, a) = c.jet ? c.da : c.a;
            V(1, a) = c.jet ? c.db : c.b;
            for (std::size_t b = 0; b < N; ++b) gs.H(a, b) = gram_entry(cols[a], cols[b]);
            const cd d = z - std::conj(c.z);
            const cd f = dot(c.a, c.b, p1, p2);
            r(a) = c.jet ? dot(c.da, c.db, p1, p2) / d + f / (d * d) : f / d;
        }
        const Eigen::VectorXcd X = gs.solve(r);
        const Eigen::Vector2cd corr = V * X;
        out.comp1[j] = pref * (p1 - kI * corr(0));
        out.comp2[j] = pref * (p2 - kI * corr(1));
    }
    return out;
}

}  // namespace sf
