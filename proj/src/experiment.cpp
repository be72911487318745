#include "degflow/experiment.hpp"

#include "degflow/csv.hpp"
#include "degflow/errors.hpp"
#include "degflow/plots.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace degflow {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------- parsing

class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError("'" + label() + "' must be a JSON object");
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key);
    }

    double number(const std::string& key, double def) {
        if (!has(key)) return def;
        const auto& v = j_.at(key);
        if (!v.is_number()) throw ConfigError("field '" + path_ + key + "' must be a number");
        return v.get<double>();
    }

    int integer(const std::string& key, int def) {
        if (!has(key)) return def;
        const auto& v = j_.at(key);
        if (!v.is_number_integer()) throw ConfigError("field '" + path_ + key + "' must be an integer");
        return v.get<int>();
    }

    std::string string(const std::string& key, const std::string& def, std::initializer_list<const char*> allowed = {}) {
        if (!has(key)) return def;
        const auto& v = j_.at(key);
        if (!v.is_string()) throw ConfigError("field '" + path_ + key + "' must be a string");
        auto s = v.get<std::string>();
        if (allowed.size() > 0 &&
            std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return s == a; })) {
            std::string list;
            for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
            throw ConfigError("field '" + path_ + key + "' must be one of {" + list + "}, got '" + s + "'");
        }
        return s;
    }

    std::vector<double> numbers(const std::string& key) {
        std::vector<double> out;
        if (!has(key)) return out;
        const auto& v = j_.at(key);
        if (!v.is_array()) throw ConfigError("field '" + path_ + key + "' must be an array of numbers");
        for (const auto& e : v) {
            if (!e.is_number()) throw ConfigError("field '" + path_ + key + "' must be an array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    std::optional<Reader> object(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return Reader(j_.at(key), path_ + key + ".");
    }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    std::string field(const std::string& key) const { return path_ + key; }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) throw ConfigError("unknown key '" + path_ + it.key() + "'");
        }
    }

private:
    std::string label() const { return path_.empty() ? "config" : path_.substr(0, path_.size() - 1); }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

// ---------------------------------------------------------------- json helpers

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json num_array(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(num(x));
    return a;
}

void write_json(const std::string& path, const json& j) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open " + path + " for writing");
    os << j.dump(2) << '\n';
}

std::string step_name(std::size_t k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "t_%06zu.csv", k);
    return buf;
}

// ---------------------------------------------------------------- initial data

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1.0);
    return v;
}

template <class Space>
Profile<Space> normalised_nodal(std::vector<double> grid, std::vector<double> vals) {
    auto p = Profile<Space>::nodal(grid, vals);
    const double m = p.mass();
    require(m > 0.0, "initial datum has zero mass on its grid");
    for (double& v : vals) v /= m;
    return Profile<Space>::nodal(std::move(grid), std::move(vals));
}

template <class Space>
Profile<Space> make_initial(const InitialConfig& ic, double lo_bound, double hi_bound) {
    const bool bounded = std::isfinite(lo_bound);
    if (ic.kind == "gaussian") {
        double a = ic.mean - 12.0 * ic.sigma, b = ic.mean + 12.0 * ic.sigma;
        if (bounded) {
            // keep clear of the endpoints, where the coordinate map blows up
            a = std::max(a, lo_bound + 1e-6);
            b = std::min(b, hi_bound - 1e-6);
            require(a < b, "initial gaussian has no mass inside (-1,1)");
        }
        auto g = linspace(a, b, 4801);
        std::vector<double> v(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double z = (g[i] - ic.mean) / ic.sigma;
            v[i] = std::exp(-0.5 * z * z) / (ic.sigma * std::sqrt(2.0 * M_PI));
        }
        if (bounded) return normalised_nodal<Space>(std::move(g), std::move(v));
        return Profile<Space>::nodal(std::move(g), std::move(v));
    }
    if (ic.kind == "uniform") {
        if (bounded) require(ic.lo > lo_bound && ic.hi < hi_bound, "initial.lo/hi must lie strictly inside (-1,1)");
        return Profile<Space>::cellwise({ic.lo, ic.hi}, {1.0 / (ic.hi - ic.lo)});
    }
    if (ic.kind == "bump") {
        const double a = ic.center - ic.width, b = ic.center + ic.width;
        if (bounded) require(a > lo_bound && b < hi_bound, "initial bump must lie strictly inside (-1,1)");
        auto g = linspace(a, b, 2001);
        std::vector<double> v(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double r = (g[i] - ic.center) / ic.width;
            v[i] = std::pow(std::max(0.0, 1.0 - r * r), 2);
        }
        return normalised_nodal<Space>(std::move(g), std::move(v));
    }
    return read_profile_csv<Space>(ic.path);
}

// Cellwise copy of a profile on its own breakpoints, so the coordinate change
// moves cell masses exactly.
template <class Space>
Profile<Space> as_cellwise(const Profile<Space>& p) {
    if (p.is_cellwise()) return p;
    std::vector<double> edges(p.grid().begin(), p.grid().end());
    auto vals = project_to_cells(p, edges);
    return Profile<Space>::cellwise(std::move(edges), std::move(vals));
}

const CoefficientField& need_coeff(const Model& m) {
    if (!m.coeff) {
        throw SlowDecayError("mobility " + m.mobility.label() + " is not fast-decaying; no transformed problem");
    }
    return *m.coeff;
}

const CoordinateMap& need_map(const Model& m, const char* what) {
    if (!m.map) throw ConfigError(std::string(what) + " needs a degenerate power mobility (mobility.kind = power)");
    return *m.map;
}

// ---------------------------------------------------------------- stages

json analyze_section(const ExperimentConfig& cfg, const Model& model) {
    json out;
    if (model.unit) {
        out["mobility"] = {{"kind", "unit"}, {"note", "test coefficient a = 1 on the line"}};
    } else {
        const auto& g = model.mobility;
        const auto rep = check_assumptions(g, cfg.analysis_grid);
        const auto dc = classify_decay(g);
        out["mobility"] = {{"kind", "power"},
                           {"p", g.p()},
                           {"label", g.label()},
                           {"decay", {{"class", dc.name()}, {"l", dc.kind == DecayClass::Kind::Slow ? num(dc.l) : json(nullptr)}}},
                           {"assumptions",
                            {{"g1", rep.g1},
                             {"g3", rep.g3},
                             {"g_at_zero", num(rep.g_at_zero)},
                             {"g_at_left", num(rep.g_at_left)},
                             {"g_at_right", num(rep.g_at_right)},
                             {"max_g", num(rep.max_g)},
                             {"C_g", num(rep.C_g)},
                             {"g3_min", num(rep.g3_min)},
                             {"grid_n", rep.grid_n},
                             {"endpoint_gap", num(rep.endpoint_gap)}}}};
    }
    out["potential"] = {{"label", model.potential.label()}};
    if (model.coeff) {
        out["potential"]["L_bound"] = num(model.coeff->L_bound());
        out["potential"]["lambda_gW1"] = num(model.coeff->lambda_gW1());
    }
    out["energy"] = {{"name", model.energy.name()}, {"m", model.energy.m()}};
    return out;
}

json transform_section(const ExperimentConfig& cfg, const Model& model, const std::string& dir) {
    const auto& map = need_map(model, "transform");
    const auto& coeff = need_coeff(model);
    const auto xs = interior_grid(cfg.transform_points);
    std::vector<std::vector<double>> cols(8);
    double id_err = 0.0, rt_err = 0.0;
    for (double x : xs) {
        const auto s = coeff.sample_x(x);
        const double y = map.alpha(x);
        cols[0].push_back(x);
        cols[1].push_back(y);
        cols[2].push_back(s.a);
        cols[3].push_back(s.ratio1);
        cols[4].push_back(s.ratio2);
        cols[5].push_back(s.V);
        cols[6].push_back(s.V_d1);
        cols[7].push_back(s.V_d2);
        id_err = std::max(id_err, std::abs(coeff.sample(y).a * model.mobility.eval(x) - 1.0));
        rt_err = std::max(rt_err, std::abs(map.alpha_inv(y) - x));
    }
    const std::string file = dir + "/transform.csv";
    write_table_csv(file, {"x", "y", "a", "a_ratio1", "a_ratio2", "V", "V_d1", "V_d2"}, cols);
    return {{"file", "transform.csv"},
            {"points", cfg.transform_points},
            {"identity_max_error", num(id_err)},
            {"roundtrip_max_error", num(rt_err)}};
}

json checks_json(const std::vector<NamedCheck>& cs) {
    json a = json::array();
    for (const auto& c : cs) a.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    return a;
}

json convexity_section(const ExperimentConfig& cfg, const Model& model) {
    const auto& coeff = need_coeff(model);
    ConvexityReport rep;
    json extra = json::object();
    if (!model.energy.is_entropy() && !model.unit) {
        rep = porous_medium_conditions(model.energy.m(), model.mobility, model.potential, cfg.convexity_lambda,
                                       cfg.convexity_grid);
    } else {
        rep = certify_convexity(coeff, model.energy, cfg.convexity_lambda, cfg.convexity_grid);
        if (model.energy.is_entropy() && !model.unit) {
            const auto fp = fokker_planck_lambdas(model.mobility, model.potential);
            extra["heat_lambda"] = num(fp.lambda_d);
            extra["fokker_planck"] = {{"lambda_d", num(fp.lambda_d)},
                                      {"lambda_W", num(fp.lambda_W)},
                                      {"lambda", num(fp.lambda())}};
        }
    }
    double pmin = rep.p_grid.empty() ? 0.0 : rep.p_grid.front(), pmax = rep.p_grid.empty() ? 0.0 : rep.p_grid.back();
    json out = {{"lambda_best", num(rep.lambda_best)},
                {"lambda_tested", num(rep.lambda_tested)},
                {"regime", regime_name(rep.regime)},
                {"m", num(rep.m)},
                {"conditions", checks_json(rep.conditions)},
                {"all_pass", rep.all_pass()},
                {"grid_meta",
                 {{"p_points", rep.grid.p_points},
                  {"q_points", rep.grid.q_points},
                  {"q_min", num(rep.grid.q_min)},
                  {"q_max", num(rep.grid.q_max)},
                  {"p_range", {num(pmin), num(pmax)}},
                  {"certification", "certified on grid"}}}};
    out.update(extra);
    return out;
}

json estimates_json(const EstimateReport& e) {
    return {{"F0", num(e.F0)},
            {"holder", {{"pairs", e.holder_pairs}, {"max_ratio", num(e.holder_max_ratio)}, {"pass", e.holder_pass}}},
            {"w2_increments",
             {{"sum_sq", num(e.w2_sq_sum)}, {"bound", num(e.w2_sq_bound)}, {"pass", e.w2_sum_pass}}},
            {"energy_monotone", {{"max_increase", num(e.max_energy_increase)}, {"pass", e.energy_pass}}},
            {"second_moment",
             {{"max_ratio", num(e.m2_max_ratio)}, {"fitted_C", num(e.m2_fitted_C)}, {"pass", e.m2_pass}}},
            {"weighted_lm_gronwall",
             {{"L", num(e.L)}, {"max_ratio", num(e.gronwall_max_ratio)}, {"pass", e.gronwall_pass}}},
            {"entropy",
             {{"initial", num(e.entropy_initial)}, {"final", num(e.entropy_final)}, {"min", num(e.entropy_min)}}}};
}

struct JkoRun {
    FlowTrajectory traj;
    json report;
};

JkoRun jko_stage(const ExperimentConfig& cfg, const Model& model, const std::string& dir, bool quiet) {
    const auto& coeff = need_coeff(model);
    const auto rho0 = initial_density_y(cfg, model);
    JkoRun run;
    run.traj = run_flow(rho0, coeff, model.energy, cfg.jko);
    const auto& tr = run.traj;
    const auto& d = tr.diagnostics;

    std::vector<double> steps(d.size());
    for (std::size_t k = 0; k < steps.size(); ++k) steps[k] = static_cast<double>(k);
    write_table_csv(dir + "/diagnostics.csv", {"step", "time", "energy", "entropy", "w2_step", "m2", "weighted_lm"},
                    {steps, d.time, d.energy, d.entropy, d.w2_step, d.m2, d.weighted_lm});

    fs::create_directories(dir + "/trajectory");
    json files = json::array();
    const std::size_t last = tr.profiles.size() - 1;
    for (std::size_t k = 0; k <= last; ++k) {
        const bool save = k == 0 || k == last || (cfg.save_every > 0 && k % static_cast<std::size_t>(cfg.save_every) == 0);
        if (!save) continue;
        write_quantiles_csv(dir + "/trajectory/" + step_name(k), tr.profiles[k]);
        files.push_back({{"step", k}, {"time", num(tr.times[k])}, {"file", "trajectory/" + step_name(k)}});
    }

    fs::create_directories(dir + "/plots_jko");
    const auto plots = emit_plots(tr, dir + "/plots_jko");
    for (const auto& w : plots.warnings) {
        if (!quiet) std::cerr << "warning: " << w << '\n';
    }

    const auto est = check_estimates(tr, coeff, model.energy, cfg.jko.newton_tol, cfg.estimate_pairs, cfg.seed);
    const int max_it = d.newton_iterations.empty()
                           ? 0
                           : *std::max_element(d.newton_iterations.begin(), d.newton_iterations.end());
    run.report = {{"tau", num(cfg.jko.tau)},
                  {"n", cfg.jko.n},
                  {"T", num(cfg.jko.T)},
                  {"steps", tr.profiles.size() - 1},
                  {"final_time", num(tr.times.back())},
                  {"energy_initial", num(d.energy.front())},
                  {"energy_final", num(d.energy.back())},
                  {"mass_final", num(quantiles_to_density(tr.profiles.back()).mass())},
                  {"max_newton_iterations", max_it},
                  {"estimates", estimates_json(est)},
                  {"diagnostics", "diagnostics.csv"},
                  {"profiles", files}};
    return run;
}

template <class Space>
json fd_files(const DensityTrajectory<Space>& tr, const std::string& dir, const std::vector<double>& energy,
              const std::vector<double>& lm) {
    fs::create_directories(dir + "/fd_snapshots");
    json files = json::array();
    for (std::size_t k = 0; k < tr.profiles.size(); ++k) {
        write_profile_csv(dir + "/fd_snapshots/" + step_name(k), tr.profiles[k]);
        files.push_back({{"time", num(tr.times[k])}, {"file", "fd_snapshots/" + step_name(k)}});
    }
    write_table_csv(dir + "/fd_diagnostics.csv", {"time", "mass", "energy", "weighted_lm"},
                    {tr.times, tr.mass, energy, lm});
    fs::create_directories(dir + "/plots_fd");
    emit_plots(tr, dir + "/plots_fd");
    double drift = 0.0;
    for (double m : tr.mass) drift = std::max(drift, std::abs(m - tr.mass.front()));
    return {{"steps", tr.steps},
            {"dt_min", num(tr.dt_min)},
            {"dt_max", num(tr.dt_max)},
            {"min_value", num(tr.min_value)},
            {"mass_initial", num(tr.mass.front())},
            {"mass_final", num(tr.mass.back())},
            {"max_mass_drift", num(drift)},
            {"scheme", tr.scheme},
            {"diagnostics", "fd_diagnostics.csv"},
            {"snapshots", files}};
}

struct FdRun {
    std::optional<FdTrajectory> y;
    json report;
};

FdRun fd_stage(const ExperimentConfig& cfg, const Model& model, const std::string& dir,
               const std::vector<double>& extra_times) {
    FdConfig fc = cfg.fd;
    for (double t : extra_times) {
        if (t > 0.0 && t < fc.T) fc.save_times.push_back(t);
    }
    const double lm_exp = model.energy.is_entropy() ? 2.0 : model.energy.m();
    FdRun run;
    json meta;
    if (fc.domain == FdConfig::Domain::Y) {
        const auto& coeff = need_coeff(model);
        auto tr = solve_rescaled(initial_density_y(cfg, model), coeff, model.energy, fc);
        std::vector<double> energy, lm;
        for (const auto& p : tr.profiles) {
            energy.push_back(energy_density_form(p, coeff, model.energy));
            lm.push_back(weighted_lm_norm(p, coeff, lm_exp));
        }
        meta = fd_files(tr, dir, energy, lm);
        meta["domain"] = "y";
        meta["L"] = num(fc.L);
        run.y = std::move(tr);
    } else {
        need_map(model, "fd.domain = x");
        auto tr = solve_original(initial_density_x(cfg, model), model.mobility, model.potential, model.energy, fc);
        std::vector<double> energy, lm;
        for (const auto& p : tr.profiles) {
            const auto g = p.grid();
            const auto v = p.values();
            double e = 0.0, l = 0.0;
            for (std::size_t j = 0; j < v.size(); ++j) {
                const double h = g[j + 1] - g[j];
                const double xc = 0.5 * (g[j] + g[j + 1]);
                e += h * (model.energy.phi(v[j]) + model.potential.eval(xc) * v[j]);
                l += h * std::pow(v[j], lm_exp);
            }
            energy.push_back(e);
            lm.push_back(l);
        }
        meta = fd_files(tr, dir, energy, lm);
        meta["domain"] = "x";
    }
    meta["cells"] = fc.cells;
    meta["cfl"] = num(fc.cfl);
    meta["T"] = num(fc.T);
    run.report = meta;
    return run;
}

json comparison_json(const ComparisonReport& c) {
    return {{"times", num_array(c.times)},
            {"w2", num_array(c.w2)},
            {"l1", num_array(c.l1)},
            {"max_w2", num(c.max_w2())},
            {"max_l1", num(c.max_l1())}};
}

const char* stage_name(Stage s) {
    switch (s) {
        case Stage::Analyze: return "analyze";
        case Stage::Transform: return "transform";
        case Stage::Convexity: return "convexity";
        case Stage::SolveJko: return "solve-jko";
        case Stage::SolveFd: return "solve-fd";
        case Stage::Compare: return "compare";
        case Stage::Full: break;
    }
    return "run";
}

void set_path(json& doc, const std::string& dotted, const json& value) {
    json* cur = &doc;
    std::stringstream ss(dotted);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    require(!parts.empty(), "sweep.parameter must be a dotted key path");
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        if (!cur->contains(parts[i])) (*cur)[parts[i]] = json::object();
        cur = &(*cur)[parts[i]];
        require(cur->is_object(), "sweep.parameter '" + dotted + "' does not name an object field");
    }
    (*cur)[parts.back()] = value;
}

}  // namespace

// ---------------------------------------------------------------- public API

ExperimentConfig parse_config(const json& doc, const std::string& base_dir) {
    ExperimentConfig c;
    c.raw = doc;
    Reader r(doc, "");
    c.name = r.string("name", c.name);

    if (auto m = r.object("mobility")) {
        c.mobility.kind = m->string("kind", c.mobility.kind, {"power", "unit"});
        c.mobility.p = m->number("p", c.mobility.p);
        m->finish();
        require(c.mobility.p > 0.0, "field 'mobility.p' must be positive");
    }
    if (auto p = r.object("potential")) {
        c.potential.kind = p->string("kind", c.potential.kind, {"zero", "quadratic"});
        c.potential.c = p->number("c", c.potential.c);
        p->finish();
        require(c.potential.c >= 0.0, "field 'potential.c' must be non-negative");
    }
    if (auto e = r.object("energy")) {
        c.energy.kind = e->string("kind", c.energy.kind, {"entropy", "power"});
        c.energy.m = e->number("m", c.energy.m);
        e->finish();
        require(c.energy.kind == "entropy" || c.energy.m > 1.0, "field 'energy.m' must exceed 1");
    }
    if (auto i = r.object("initial")) {
        auto& ic = c.initial;
        ic.kind = i->string("kind", ic.kind, {"gaussian", "uniform", "bump", "csv"});
        ic.space = i->string("space", ic.space, {"x", "y"});
        ic.mean = i->number("mean", ic.mean);
        ic.sigma = i->number("sigma", ic.sigma);
        ic.lo = i->number("lo", ic.lo);
        ic.hi = i->number("hi", ic.hi);
        ic.center = i->number("center", ic.center);
        ic.width = i->number("width", ic.width);
        ic.path = i->string("path", ic.path);
        i->finish();
        require(ic.sigma > 0.0, "field 'initial.sigma' must be positive");
        require(ic.hi > ic.lo, "field 'initial.hi' must exceed 'initial.lo'");
        require(ic.width > 0.0, "field 'initial.width' must be positive");
        if (ic.kind == "csv") {
            require(!ic.path.empty(), "field 'initial.path' is required for kind csv");
            fs::path p(ic.path);
            if (p.is_relative()) p = fs::path(base_dir) / p;
            require(fs::exists(p), "field 'initial.path': file " + p.string() + " does not exist");
            ic.path = p.string();
        }
    }
    c.solver = r.string("solver", c.solver, {"jko", "fd", "both"});
    if (auto j = r.object("jko")) {
        c.jko.tau = j->number("tau", c.jko.tau);
        c.jko.n = j->integer("n", c.jko.n);
        c.jko.T = j->number("T", c.jko.T);
        c.jko.newton_tol = j->number("newton_tol", c.jko.newton_tol);
        c.jko.max_newton = j->integer("max_newton", c.jko.max_newton);
        c.save_every = j->integer("save_every", c.save_every);
        j->finish();
    }
    c.jko.validate();
    require(c.save_every >= 0, "field 'jko.save_every' must be non-negative");
    if (auto f = r.object("fd")) {
        const auto dom = f->string("domain", "y", {"x", "y"});
        c.fd.domain = dom == "x" ? FdConfig::Domain::X : FdConfig::Domain::Y;
        c.fd.L = f->number("L", c.fd.L);
        c.fd.cells = f->integer("cells", c.fd.cells);
        c.fd.cfl = f->number("cfl", c.fd.cfl);
        c.fd.T = f->number("T", c.fd.T);
        c.fd.save_interval = f->number("save_interval", c.fd.save_interval);
        c.fd.save_times = f->numbers("save_times");
        f->finish();
    }
    c.fd.validate();
    c.compare_times = r.numbers("compare_times");
    if (auto a = r.object("analysis")) {
        c.analysis_grid = a->integer("grid_n", c.analysis_grid);
        a->finish();
        require(c.analysis_grid >= 16, "field 'analysis.grid_n' must be at least 16");
    }
    if (auto v = r.object("convexity")) {
        auto& g = c.convexity_grid;
        g.p_points = v->integer("p_points", g.p_points);
        g.q_points = v->integer("q_points", g.q_points);
        g.q_min = v->number("q_min", g.q_min);
        g.q_max = v->number("q_max", g.q_max);
        g.p_half_width = v->number("p_half_width", g.p_half_width);
        c.convexity_lambda = v->number("lambda", c.convexity_lambda);
        v->finish();
        require(g.p_points >= 2 && g.q_points >= 2, "convexity grid needs at least 2 points per axis");
        require(g.q_min > 0.0 && g.q_max > g.q_min, "convexity q range must satisfy 0 < q_min < q_max");
    }
    if (auto t = r.object("transform")) {
        c.transform_points = t->integer("points", c.transform_points);
        t->finish();
        require(c.transform_points >= 2, "field 'transform.points' must be at least 2");
    }
    if (auto e = r.object("estimates")) {
        c.estimate_pairs = e->integer("pairs", c.estimate_pairs);
        e->finish();
        require(c.estimate_pairs >= 0, "field 'estimates.pairs' must be non-negative");
    }
    if (r.has("seed")) {
        const auto& s = r.raw("seed");
        require(s.is_number_unsigned() || (s.is_number_integer() && s.get<long long>() >= 0),
                "field 'seed' must be a non-negative integer");
        c.seed = s.get<std::uint64_t>();
    }
    c.out_dir = r.string("out", c.out_dir);
    if (auto s = r.object("sweep")) {
        c.sweep_parameter = s->string("parameter", "");
        require(!c.sweep_parameter->empty(), "field 'sweep.parameter' is required");
        require(s->has("values") && s->raw("values").is_array(), "field 'sweep.values' must be an array");
        for (const auto& v : s->raw("values")) c.sweep_values.push_back(v);
        s->finish();
    }
    r.finish();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path);
    json doc;
    try {
        doc = json::parse(is);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return parse_config(doc, fs::path(path).parent_path().string().empty() ? "." : fs::path(path).parent_path().string());
}

Model build_model(const ExperimentConfig& cfg) {
    Model m;
    if (cfg.potential.kind == "quadratic") m.potential = PotentialSpec::quadratic(cfg.potential.c);
    m.energy = cfg.energy.kind == "entropy" ? InternalEnergy::entropy(InternalEnergy::LinearCase{})
                                            : InternalEnergy::power(cfg.energy.m);
    if (cfg.mobility.kind == "unit") {
        m.unit = true;
        m.coeff = CoefficientField::unit_test_coefficient(m.potential);
        return m;
    }
    m.mobility = MobilityFunction::power(cfg.mobility.p);
    if (m.mobility.decay_class().is_fast()) {
        m.map = CoordinateMap::build(m.mobility);
        m.coeff = CoefficientField::from_map(*m.map, m.potential);
    }
    return m;
}

DensityProfile initial_density_y(const ExperimentConfig& cfg, const Model& model) {
    const double inf = std::numeric_limits<double>::infinity();
    if (cfg.initial.space == "y") return make_initial<YSpace>(cfg.initial, -inf, inf);
    const auto& map = need_map(model, "an initial datum in x");
    const auto u = make_initial<XSpace>(cfg.initial, -1.0, 1.0);
    return rescale_u_to_rho(as_cellwise(u), map).profile;
}

DensityProfileX initial_density_x(const ExperimentConfig& cfg, const Model& model) {
    if (cfg.initial.space == "x") return make_initial<XSpace>(cfg.initial, -1.0, 1.0);
    const auto& map = need_map(model, "an initial datum in y");
    const double inf = std::numeric_limits<double>::infinity();
    const auto rho = make_initial<YSpace>(cfg.initial, -inf, inf);
    return rescale_rho_to_u(as_cellwise(rho), map).profile;
}

json run_experiment(const ExperimentConfig& cfg, Stage stage, bool quiet) {
    fs::create_directories(cfg.out_dir);
    const std::string dir = cfg.out_dir;
    const Model model = build_model(cfg);

    json report;
    report["command"] = stage_name(stage);
    report["name"] = cfg.name;
    report["config"] = cfg.raw;
    report["seed"] = cfg.seed;

    auto log = [&](const std::string& msg) {
        if (!quiet) std::cerr << "[" << stage_name(stage) << "] " << msg << '\n';
    };

    const bool full = stage == Stage::Full;
    if (stage == Stage::Analyze || full) {
        log("mobility and potential checks");
        report["analysis"] = analyze_section(cfg, model);
    }
    if (stage == Stage::Transform) {
        log("coordinate map table");
        report["transform"] = transform_section(cfg, model, dir);
    }
    if (stage == Stage::Convexity || (full && model.coeff)) {
        log("convexity certification");
        report["convexity"] = convexity_section(cfg, model);
    }

    const bool want_jko = stage == Stage::SolveJko || stage == Stage::Compare || (full && cfg.solver != "fd");
    const bool want_fd = stage == Stage::SolveFd || stage == Stage::Compare || (full && cfg.solver != "jko");
    const bool want_cmp = stage == Stage::Compare || (full && cfg.solver == "both");

    std::vector<double> cmp_times = cfg.compare_times;
    if (want_cmp) {
        if (cfg.fd.domain != FdConfig::Domain::Y) throw ConfigError("comparison needs fd.domain = y");
        const double T = std::min(cfg.jko.T, cfg.fd.T);
        if (cmp_times.empty()) cmp_times.push_back(T);
        for (double t : cmp_times) {
            if (t < 0.0 || t > T + 1e-12) {
                throw TimeRangeError("compare time " + std::to_string(t) + " outside the common range [0, " +
                                     std::to_string(T) + "]");
            }
        }
    }

    std::optional<JkoRun> jko;
    if (want_jko) {
        log("JKO flow");
        jko = jko_stage(cfg, model, dir, quiet);
        report["jko"] = jko->report;
    }
    std::optional<FdRun> fd;
    if (want_fd) {
        log("finite-volume flow");
        fd = fd_stage(cfg, model, dir, want_cmp ? cmp_times : std::vector<double>{});
        report["fd"] = fd->report;
    }
    if (want_cmp) {
        log("comparison");
        report["comparison"] = comparison_json(compare_jko_fd(jko->traj, *fd->y, cmp_times));
    }

    write_json(dir + "/report.json", report);
    return report;
}

json run_sweep(const ExperimentConfig& cfg, unsigned threads, bool quiet) {
    if (!cfg.sweep_parameter) throw ConfigError("sweep needs a 'sweep' block with parameter and values");
    if (threads == 0) {
        if (const char* env = std::getenv("DEGFLOW_THREADS")) {
            try {
                const int v = std::stoi(env);
                if (v > 0) threads = static_cast<unsigned>(v);
            } catch (const std::logic_error&) {
                throw ConfigError("DEGFLOW_THREADS must be a positive integer");
            }
        }
        if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    }
    fs::create_directories(cfg.out_dir);

    // validate every variant before starting any work
    std::vector<ExperimentConfig> variants;
    for (std::size_t k = 0; k < cfg.sweep_values.size(); ++k) {
        json doc = cfg.raw;
        doc.erase("sweep");
        set_path(doc, *cfg.sweep_parameter, cfg.sweep_values[k]);
        doc["out"] = cfg.out_dir + "/sweep_" + std::to_string(k);
        auto v = parse_config(doc, ".");
        if (cfg.initial.kind == "csv") v.initial.path = cfg.initial.path;
        variants.push_back(std::move(v));
    }

    std::vector<json> results(variants.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < variants.size(); k = next++) {
            json entry = {{"value", cfg.sweep_values[k]}, {"out", variants[k].out_dir}};
            try {
                const auto rep = run_experiment(variants[k], Stage::Full, true);
                entry["status"] = "ok";
                if (rep.contains("jko")) entry["energy_final"] = rep["jko"]["energy_final"];
                if (rep.contains("convexity")) entry["lambda_best"] = rep["convexity"]["lambda_best"];
                if (rep.contains("fd")) entry["fd_mass_final"] = rep["fd"]["mass_final"];
            } catch (const Error& e) {
                entry["status"] = "error";
                entry.update(error_json(e.kind(), e.what()));
            } catch (const std::exception& e) {
                entry["status"] = "error";
                entry.update(error_json("InternalError", e.what()));
            }
            results[k] = std::move(entry);
        }
    };
    const unsigned nthreads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(variants.size(), 1)));
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    json summary = {{"command", "sweep"},
                    {"parameter", *cfg.sweep_parameter},
                    {"threads", nthreads},
                    {"runs", results}};
    write_json(cfg.out_dir + "/sweep.json", summary);
    if (!quiet) std::cerr << "[sweep] " << results.size() << " runs written under " << cfg.out_dir << '\n';
    return summary;
}

json error_json(const std::string& kind, const std::string& message) {
    return {{"error", {{"kind", kind}, {"message", message}}}};
}

}  // namespace degflow
