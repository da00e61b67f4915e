#include "solitonforge/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sf {

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_grid_csv(std::ostream& os, const GridField& u) {
    os << "x,re,im\n";
    for (std::size_t j = 0; j < u.size(); ++j)
        os << format_real(u.grid.x(j)) << ',' << format_real(u[j].real()) << ',' << format_real(u[j].imag()) << '\n';
}

GridField read_grid_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw DomainError("empty grid file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "x,re,im") throw DomainError("grid CSV must start with the header x,re,im");
    rvec xs;
    cvec vs;
    std::size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        std::istringstream ls(line);
        std::string a, b, c;
        if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') || !std::getline(ls, c))
            throw DomainError("grid CSV row " + std::to_string(row) + " needs three columns");
        try {
            xs.push_back(std::stod(a));
            vs.emplace_back(std::stod(b), std::stod(c));
        } catch (const std::exception&) {
            throw DomainError("grid CSV row " + std::to_string(row) + " is not numeric");
        }
    }
    if (xs.size() < 8) throw DomainError("grid CSV needs at least 8 samples");
    const double dx = (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1);
    for (std::size_t j = 0; j < xs.size(); ++j)
        if (std::abs(xs[j] - (xs.front() + dx * static_cast<double>(j))) > 1e-9 * std::max(1.0, std::abs(xs[j])))
            throw DomainError("grid CSV x column is not uniformly spaced");
    Grid g;
    g.x_min = xs.front();
    g.dx = dx;
    g.n = xs.size();
    g.validate();
    return GridField(g, std::move(vs));
}

GridField load_grid_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DomainError("cannot open " + path);
    return read_grid_csv(f);
}

void save_grid_csv(const std::string& path, const GridField& u) {
    std::ofstream f(path);
    if (!f) throw DomainError("cannot write " + path);
    write_grid_csv(f, u);
}

json to_json(cd z) { return json::array({z.real(), z.imag()}); }

cd complex_from_json(const json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw DomainError("complex numbers are written as [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

namespace {
json complex_list(const cvec& v) {
    json a = json::array();
    for (const cd& z : v) a.push_back(to_json(z));
    return a;
}
}  // namespace

json to_json(const PhasePoint& p) {
    json j;
    j["N"] = p.spectrum.N;
    j["s"] = complex_list(p.spectrum.s);
    j["beta"] = p.beta.coeffs;
    return j;
}

PhasePoint phase_point_from_json(const json& j) {
    if (!j.is_object()) throw DomainError("phase point must be a JSON object");
    for (const char* k : {"N", "s", "beta"})
        if (!j.contains(k)) throw DomainError(std::string("phase point is missing \"") + k + "\"");
    if (!j["N"].is_number_integer() || j["N"].get<long>() < 1) throw DomainError("\"N\" must be a positive integer");
    if (!j["s"].is_array() || !j["beta"].is_array()) throw DomainError("\"s\" and \"beta\" must be arrays");
    PhasePoint p;
    p.spectrum.N = j["N"].get<std::size_t>();
    for (const auto& e : j["s"]) p.spectrum.s.push_back(complex_from_json(e));
    for (const auto& e : j["beta"]) {
        if (!e.is_number()) throw DomainError("\"beta\" entries must be real numbers");
        p.beta.coeffs.push_back(e.get<double>());
    }
    p.validate();
    return p;
}

json to_json(const SpectrumReport& r) {
    json j;
    j["count"] = r.count;
    j["roots"] = complex_list(r.roots);
    j["s"] = complex_list(r.count > 0 ? r.spectrum.s : cvec{});
    j["region"] = {r.region.x0, r.region.x1, r.region.y0, r.region.y1};
    j["contour_samples"] = r.contour_samples;
    return j;
}

json to_json(const EnergyReport& r) {
    json j;
    j["H"] = r.H;
    json es = json::array();
    for (const auto& [s, e] : r.Es) es.push_back({{"s", s}, {"E", e}});
    j["Es"] = es;
    j["trace_residual"] = r.trace_residual;
    return j;
}

json to_json(const EffectiveParams& e) {
    json j;
    j["split"] = e.split;
    j["alpha0"] = to_json(e.alpha0);
    j["sigma0"] = to_json(e.sigma0);
    j["gamma00"] = to_json(e.gamma00);
    j["x0"] = e.x0;
    j["theta"] = e.theta;
    j["z_plus"] = to_json(e.z_plus);
    j["z_minus"] = to_json(e.z_minus);
    j["x_plus"] = e.x_plus;
    j["x_minus"] = e.x_minus;
    j["theta_plus"] = e.theta_plus;
    j["theta_minus"] = e.theta_minus;
    return j;
}

json to_json(const BumpReport& b) {
    json a = json::array();
    for (const Bump& x : b.bumps)
        a.push_back({{"location", x.location}, {"amplitude", x.amplitude}, {"frequency", x.frequency}, {"phase", x.phase}});
    return {{"bumps", a}, {"decay_ok", b.decay_ok}};
}

json to_json(const TwoSolParams& p) {
    return {{"z1", to_json(p.z1)}, {"z2", to_json(p.z2)}, {"beta", p.beta}};
}

void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryPoint>& tr) {
    os << "t,x_plus,x_minus,amp_plus,amp_minus,regime\n";
    for (const auto& p : tr) {
        const auto& e = p.effective;
        os << format_real(p.t) << ',' << format_real(e.x_plus) << ',' << format_real(e.x_minus) << ','
           << format_real(2.0 * e.z_plus.imag()) << ',' << format_real(2.0 * e.z_minus.imag()) << ',' << p.regime
           << '\n';
    }
}

void write_stability_csv(std::ostream& os, const StabilityReport& r) {
    os << "t,dist,residual_mass,spectrum_drift,flag\n";
    for (std::size_t i = 0; i < r.times.size(); ++i) {
        std::string flag = r.flag[i];
        for (char& c : flag)
            if (c == ',' || c == '\n') c = ';';
        os << format_real(r.times[i]) << ',' << format_real(r.manifold_distance[i]) << ','
           << format_real(r.residual_mass[i]) << ',' << format_real(r.spectrum_drift[i]) << ',' << flag << '\n';
    }
}

json error_json(const Error& e) { return {{"error", e.kind()}, {"message", e.what()}}; }

}  // namespace sf
