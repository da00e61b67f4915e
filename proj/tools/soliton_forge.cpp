// soliton_forge: command-line front end to the solitonforge library.
#include "solitonforge/backlund.hpp"
#include "solitonforge/conserved.hpp"
#include "solitonforge/evolution.hpp"
#include "solitonforge/io.hpp"
#include "solitonforge/scattering.hpp"
#include "solitonforge/twosoliton.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

using namespace sf;

namespace {

// Raised for malformed parameters; mapped to exit code 2.
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double parse_real(const std::string& s, const std::string& what) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw SchemaError(what + ": '" + s + "' is not a number");
    }
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos != s.size()) throw SchemaError(what + ": '" + s + "' is not a number");
    return v;
}

// Accepts a, bi, a+bi, a-bi (i or j).
cd parse_complex(std::string s, const std::string& what) {
    std::string t;
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) t += c;
    if (t.empty()) throw SchemaError(what + ": empty complex number");
    if (t.back() != 'i' && t.back() != 'j') return {parse_real(t, what), 0.0};
    t.pop_back();
    std::size_t split = std::string::npos;
    for (std::size_t k = t.size(); k-- > 1;)
        if ((t[k] == '+' || t[k] == '-') && t[k - 1] != 'e' && t[k - 1] != 'E') {
            split = k;
            break;
        }
    auto coef = [&](const std::string& c) {
        if (c.empty() || c == "+") return 1.0;
        if (c == "-") return -1.0;
        return parse_real(c, what);
    };
    if (split == std::string::npos) return {0.0, coef(t)};
    return {parse_real(t.substr(0, split), what), coef(t.substr(split))};
}

rvec split_reals(const std::string& s, const std::string& what) {
    rvec out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_real(item, what));
    return out;
}

// Parameter document assembled from defaults, --config, --param and explicit flags (in that order).
class Params {
public:
    Params(std::string command, json defaults) : command_(std::move(command)), doc_(std::move(defaults)) {}

    void merge(const json& j, const std::string& origin) {
        if (!j.is_object()) throw SchemaError(origin + " must be a JSON object");
        for (auto it = j.begin(); it != j.end(); ++it) set(it.key(), it.value(), origin);
    }

    void set(const std::string& key, const json& v, const std::string& origin) {
        if (!doc_.contains(key)) throw SchemaError(origin + ": unknown parameter '" + key + "' for " + command_);
        doc_[key] = v;
    }

    void set_text(const std::string& key, const std::string& text, const std::string& origin) {
        json v;
        try {
            v = json::parse(text);
        } catch (const json::parse_error&) {
            v = text;
        }
        set(key, v, origin);
    }

    bool has(const std::string& key) const { return !doc_.at(key).is_null(); }

    double real(const std::string& key) const {
        const json& v = doc_.at(key);
        if (v.is_number()) return v.get<double>();
        if (v.is_string()) return parse_real(v.get<std::string>(), key);
        throw SchemaError(key + " must be a number");
    }

    std::string text(const std::string& key) const {
        const json& v = doc_.at(key);
        if (v.is_string()) return v.get<std::string>();
        if (v.is_number()) return v.dump();
        throw SchemaError(key + " must be a string");
    }

    rvec reals(const std::string& key) const {
        const json& v = doc_.at(key);
        if (v.is_null()) return {};
        if (v.is_number()) return {v.get<double>()};
        if (v.is_string()) return split_reals(v.get<std::string>(), key);
        if (v.is_array()) {
            rvec out;
            for (const auto& e : v) {
                if (e.is_number())
                    out.push_back(e.get<double>());
                else if (e.is_string())
                    out.push_back(parse_real(e.get<std::string>(), key));
                else
                    throw SchemaError(key + " entries must be numbers");
            }
            return out;
        }
        throw SchemaError(key + " must be a list of numbers");
    }

    cvec complexes(const std::string& key) const {
        const json& v = doc_.at(key);
        if (v.is_null()) return {};
        auto one = [&](const json& e) -> cd {
            if (e.is_string()) return parse_complex(e.get<std::string>(), key);
            try {
                return complex_from_json(e);
            } catch (const DomainError& err) {
                throw SchemaError(key + ": " + err.what());
            }
        };
        if (v.is_array() && !(v.size() == 2 && v[0].is_number() && v[1].is_number())) {
            cvec out;
            for (const auto& e : v) out.push_back(one(e));
            return out;
        }
        return {one(v)};
    }

    Grid grid() const {
        const rvec g = reals("grid");
        if (g.size() != 2 || g[0] < 8 || g[0] != std::floor(g[0]) || !(g[1] > 0))
            throw SchemaError("grid must be 'n,len' with integer n >= 8 and len > 0");
        return Grid::centered(static_cast<std::size_t>(g[0]), g[1]);
    }

    Region region() const {
        const rvec r = reals("region");
        if (r.size() != 4) throw SchemaError("region must be 'x0,x1,y0,y1'");
        return Region{r[0], r[1], r[2], r[3]};
    }

private:
    std::string command_;
    json doc_;
};

struct Output {
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file = std::make_unique<std::ofstream>(path);
            if (!*file) throw SchemaError("cannot write " + path);
        }
    }
    std::ostream& stream() { return file ? *file : std::cout; }
    std::unique_ptr<std::ofstream> file;
};

void emit_json(std::ostream& os, const json& j) { os << j.dump(2) << '\n'; }

GridField load_input(const Params& p) {
    if (!p.has("in")) throw SchemaError("--in is required");
    try {
        return load_grid_csv(p.text("in"));
    } catch (const DomainError& e) {
        throw SchemaError(e.what());
    }
}

PhasePoint point_from(const Params& p) {
    if (p.has("point")) {
        std::ifstream f(p.text("point"));
        if (!f) throw SchemaError("cannot open " + p.text("point"));
        json j;
        try {
            j = json::parse(f);
        } catch (const json::parse_error& e) {
            throw SchemaError(std::string("point file: ") + e.what());
        }
        try {
            return phase_point_from_json(j);
        } catch (const DomainError& e) {
            throw SchemaError(e.what());
        }
    }
    const cvec z = p.complexes("z");
    if (z.empty()) throw SchemaError("give --z (repeatable) or --point");
    if (p.has("beta") && p.has("kappa")) throw SchemaError("--beta and --kappa are exclusive");
    if (p.has("beta")) return make_phase_point(z, p.reals("beta"));
    cvec kappa = p.complexes("kappa");
    if (kappa.empty()) kappa.assign(z.size(), cd{});
    if (kappa.size() != z.size()) throw SchemaError("--kappa needs one value per --z");
    for (std::size_t a = 0; a < z.size(); ++a)
        for (std::size_t b = a + 1; b < z.size(); ++b)
            if (std::abs(z[a] - z[b]) < 1e-3) throw SchemaError("--kappa needs distinct roots; use --beta for double roots");
    const PhasePoint base = make_phase_point(z, {});
    return PhasePoint{base.spectrum, beta_from_kappas(z, std::vector<int>(z.size(), 1), kappa, cvec(z.size(), cd{}))};
}

TwoSolParams two_from(const Params& p) {
    TwoSolParams t;
    t.z1 = p.complexes("z1").at(0);
    t.z2 = p.complexes("z2").at(0);
    const rvec b = p.reals("beta");
    if (b.size() > 4) throw SchemaError("--beta takes at most four coefficients");
    for (std::size_t k = 0; k < b.size(); ++k) t.beta[k] = b[k];
    return t;
}

std::vector<double> times_from(const Params& p) {
    const double t1 = p.real("t-final");
    const double steps = p.real("steps");
    if (!(steps >= 1) || steps != std::floor(steps)) throw SchemaError("--steps must be a positive integer");
    std::vector<double> t;
    for (int k = 0; k <= static_cast<int>(steps); ++k) t.push_back(t1 * k / steps);
    return t;
}

EvolveConfig config_from(const Params& p) {
    Flow f;
    try {
        f = parse_flow(p.text("flow"));
    } catch (const DomainError& e) {
        throw SchemaError(e.what());
    }
    EvolveConfig c = EvolveConfig::defaults(f);
    if (p.has("dt")) c.dt = p.real("dt");
    if (p.has("order")) c.order = static_cast<int>(p.real("order"));
    c.t_final = p.real("t-final");
    try {
        c.validate();
    } catch (const DomainError& e) {
        throw SchemaError(e.what());
    }
    return c;
}

// ------------------------------------------------------------------ commands

int cmd_make_soliton(const Params& p) {
    const PhasePoint pt = point_from(p);
    Output out(p.text("out"));
    write_grid_csv(out.stream(), add_solitons(GridField(p.grid()), pt));
    return 0;
}

int cmd_spectrum(const Params& p) {
    const GridField u = load_input(p);
    LocateOptions lo;
    lo.contour_samples = static_cast<std::size_t>(p.real("contour-samples"));
    Output out(p.text("out"));
    emit_json(out.stream(), to_json(locate_spectrum(u, p.region(), lo)));
    return 0;
}

int cmd_add(const Params& p) {
    const GridField u = p.has("in") ? load_input(p) : GridField(p.grid());
    const PhasePoint pt = point_from(p);
    AddOptions opt;
    opt.check_background = p.text("check-background") == "true";
    Output out(p.text("out"));
    write_grid_csv(out.stream(), add_solitons(u, pt, opt));
    return 0;
}

int cmd_remove(const Params& p) {
    const GridField v = load_input(p);
    if (!p.has("out") || p.text("out").empty()) throw SchemaError("remove needs --out for the residual field");
    const Removal r = remove_solitons(v, p.region());
    Output out(p.text("out"));
    write_grid_csv(out.stream(), r.u);
    json meta{{"point", to_json(r.point)}, {"spectrum", to_json(r.spectrum)}};
    if (p.has("meta")) {
        Output m(p.text("meta"));
        emit_json(m.stream(), meta);
    } else {
        emit_json(std::cout, meta);
    }
    return 0;
}

int cmd_energies(const Params& p) {
    const GridField u = load_input(p);
    Output out(p.text("out"));
    emit_json(out.stream(), to_json(energy_report(u, p.reals("s"), p.region())));
    return 0;
}

int cmd_two_soliton(const Params& p) {
    const TwoSolParams t = two_from(p);
    t.validate();
    const Grid g = p.grid();
    json j{{"params", to_json(t)},
           {"effective", to_json(effective_params(t))},
           {"bumps", to_json(bump_analysis(g, [&](double x) { return closed_form_Q(t, x); }))}};
    if (p.has("field-out")) save_grid_csv(p.text("field-out"), closed_form_Q(t, g));
    Output out(p.text("out"));
    emit_json(out.stream(), j);
    return 0;
}

int cmd_trajectory(const Params& p) {
    const TwoSolParams t = two_from(p);
    Flow f;
    try {
        f = parse_flow(p.text("flow"));
    } catch (const DomainError& e) {
        throw SchemaError(e.what());
    }
    Output out(p.text("out"));
    write_trajectory_csv(out.stream(), trajectory(t, f, times_from(p), p.grid()));
    return 0;
}

int cmd_evolve(const Params& p) {
    const GridField u = load_input(p);
    const EvolveConfig c = config_from(p);
    Output out(p.text("out"));
    write_grid_csv(out.stream(), evolve_to(u, c));
    return 0;
}

int cmd_stability(const Params& p) {
    const PhasePoint pt = point_from(p);
    EvolveConfig c = config_from(p);
    c.record_times = times_from(p);
    Perturbation shape;
    try {
        shape = parse_perturbation(p.text("shape"));
    } catch (const DomainError& e) {
        throw SchemaError(e.what());
    }
    const double seed = p.real("seed");
    if (seed < 0 || seed != std::floor(seed)) throw SchemaError("--seed must be a non-negative integer");
    StabilityOptions so;
    so.region = p.region();
    so.jost_accuracy = p.real("jost-accuracy");
    so.locate.contour_samples = static_cast<std::size_t>(p.real("contour-samples"));
    const StabilityReport r =
        stability_experiment(pt, p.real("eps"), shape, static_cast<std::uint64_t>(seed), c, p.grid(), so);
    Output out(p.text("out"));
    write_stability_csv(out.stream(), r);
    return 0;
}

struct Command {
    std::string name;
    std::string help;
    json defaults;
    int (*run)(const Params&);
};

std::vector<Command> commands() {
    const json common{{"out", ""}, {"grid", "4096,80"}};
    auto with = [&](json extra) {
        json j = common;
        for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
        return j;
    };
    const json point{{"z", nullptr}, {"kappa", nullptr}, {"beta", nullptr}, {"point", nullptr}};
    auto merged = [&](json a, const json& b) {
        for (auto it = b.begin(); it != b.end(); ++it) a[it.key()] = it.value();
        return a;
    };
    const json two{{"z1", "i"}, {"z2", "i"}, {"beta", "0,0,0,0"}};
    return {
        {"make-soliton", "multisoliton on the vacuum (GridField CSV)", with(point), cmd_make_soliton},
        {"spectrum", "eigenvalues inside a region (SpectrumReport JSON)",
         with({{"in", nullptr}, {"region", "-1,1,0.5,2"}, {"contour-samples", 256}}), cmd_spectrum},
        {"add", "add solitons to a background (GridField CSV)",
         with(merged(point, {{"in", nullptr}, {"check-background", "false"}})), cmd_add},
        {"remove", "remove every eigenvalue in a region (CSV plus JSON metadata)",
         with({{"in", nullptr}, {"region", "-2,2,0.5,3"}, {"meta", nullptr}}), cmd_remove},
        {"energies", "conserved energies (EnergyReport JSON)",
         with({{"in", nullptr}, {"s", nullptr}, {"region", "-5,5,0.05,5"}}), cmd_energies},
        {"two-soliton", "closed-form 2-soliton with effective parameters (JSON)",
         with(merged(two, {{"field-out", nullptr}})), cmd_two_soliton},
        {"trajectory", "effective parameters along a flow (CSV)",
         with(merged(two, {{"flow", "nls"}, {"t-final", 1.0}, {"steps", 10}})), cmd_trajectory},
        {"evolve", "pseudospectral evolution (GridField CSV)",
         with({{"in", nullptr}, {"flow", "nls"}, {"t-final", 1.0}, {"dt", nullptr}, {"order", nullptr}}), cmd_evolve},
        {"stability", "perturbed multisoliton stability run (CSV)",
         with(merged(point, {{"eps", 1e-3},
                             {"shape", "gaussian"},
                             {"seed", 1},
                             {"flow", "nls"},
                             {"t-final", 10.0},
                             {"steps", 10},
                             {"dt", nullptr},
                             {"order", nullptr},
                             {"region", "-2,2,0.5,3"},
                             {"jost-accuracy", 0.06},
                             {"contour-samples", 256}})),
         cmd_stability},
    };
}

int fail(int code, const std::string& msg) {
    std::cerr << "soliton_forge: " << msg << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"soliton_forge: NLS/mKdV multisoliton toolkit"};
    app.require_subcommand(1);
    const auto cmds = commands();
    struct Bound {
        CLI::App* sub;
        std::map<std::string, CLI::Option*> opts;
        std::map<std::string, std::vector<std::string>> values;
        std::vector<std::string> params;
        std::string config;
    };
    std::vector<std::unique_ptr<Bound>> bound;
    for (const auto& c : cmds) {
        auto b = std::make_unique<Bound>();
        b->sub = app.add_subcommand(c.name, c.help);
        b->sub->add_option("--config", b->config, "JSON file of parameters");
        b->sub->add_option("--param", b->params, "override key=value (value parsed as JSON when possible)");
        for (auto it = c.defaults.begin(); it != c.defaults.end(); ++it) {
            const std::string key = it.key();
            const std::string desc = it.value().is_null() ? "" : "default " + it.value().dump();
            b->opts[key] = b->sub->add_option("--" + key, b->values[key], desc)->allow_extra_args(false);
        }
        bound.push_back(std::move(b));
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    for (std::size_t i = 0; i < cmds.size(); ++i) {
        Bound& b = *bound[i];
        if (!b.sub->parsed()) continue;
        try {
            Params p(cmds[i].name, cmds[i].defaults);
            if (!b.config.empty()) {
                std::ifstream f(b.config);
                if (!f) throw SchemaError("cannot open " + b.config);
                json j;
                try {
                    j = json::parse(f);
                } catch (const json::parse_error& e) {
                    throw SchemaError(std::string("config: ") + e.what());
                }
                p.merge(j, "config");
            }
            for (const auto& kv : b.params) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos || eq == 0) throw SchemaError("--param expects key=value, got '" + kv + "'");
                p.set_text(kv.substr(0, eq), kv.substr(eq + 1), "--param");
            }
            for (const auto& [key, opt] : b.opts) {
                if (opt->count() == 0) continue;
                const auto& v = b.values[key];
                if (v.size() == 1)
                    p.set(key, v[0], "--" + key);
                else
                    p.set(key, json(v), "--" + key);
            }
            return cmds[i].run(p);
        } catch (const SchemaError& e) {
            return fail(2, e.what());
        } catch (const DomainError& e) {
            return fail(2, e.what());
        } catch (const Error& e) {
            std::cout << error_json(e).dump() << '\n';
            return 3;
        }
    }
    return 2;
}
