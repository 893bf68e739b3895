#include "pipeline_util.hpp"
#include "ymlab/foliation.hpp"
#include "ymlab/spectral.hpp"
#include "ymlab/variation.hpp"

#include <fstream>
#include <sstream>

namespace ymlab {

namespace detail {

SurfaceSpec surface_spec(const Config& c, const std::string& sec, const std::string& topology) {
    SurfaceSpec spec;
    spec.topology = c.text(sec + ".topology", topology);
    const bool g2 = spec.topology == "genus2_separating_pinch";
    spec.n = c.integer(sec + ".n", 16);
    spec.hole = c.integer(sec + ".hole", g2 ? 2 : 4);
    spec.cyl_nx = c.integer(sec + ".cyl_nx", g2 ? 8 : 16);
    return spec;
}

Representation named_rep(const Config& c, const std::string& sec, const SurfaceComplex& s, double alpha) {
    std::string name = c.text(sec + ".rep", "");
    if (name.empty()) {
        if (s.topology == "one_holed_torus_punctured")
            name = "torus";
        else if (s.topology == "genus2_separating_pinch")
            name = "irreducible";
        else
            name = "trivial";
    }
    if (name == "torus") return punctured_torus_rep(s, alpha);
    if (name == "irreducible") return genus2_irreducible_rep(s, alpha);
    if (name == "accidental") return genus2_accidental_rep(s);
    if (name == "trivial") {
        Representation gens;
        for (const auto& g : s.generators) gens.loops[g] = su2_identity<double>();
        return complete_representation(gens, s);
    }
    std::ifstream in(name);
    if (!in) throw ConfigError("unknown representation '" + name + "'");
    return read_representation(in);
}

FlowConfig flow_config(const Config& c, const std::string& sec) {
    FlowConfig f;
    f.dt = c.number(sec + ".dt", f.dt);
    f.tol_flat = c.number(sec + ".tol_flat", f.tol_flat);
    f.t_max = c.number(sec + ".t_max", f.t_max);
    const std::string integ = c.text(sec + ".integrator", "euler");
    if (integ == "rk4")
        f.integrator = Integrator::rk4;
    else if (integ != "euler")
        throw ConfigError("integrator must be euler or rk4");
    f.validate();
    return f;
}

Table decay_table(const FlowDiagnostics& diag, const DecayFit& fit) {
    Table t{{"t", "sup_f", "fit"}, {}};
    for (const auto& s : diag.samples) t.add({s.t, s.sup_f, std::exp(fit.intercept - fit.rate * s.t)});
    return t;
}

}  // namespace detail

namespace {

using detail::named_rep;
using detail::surface_spec;

// Copies the keys of one section into the manifest; "*_out" keys are paths.
void record(const Config& c, const std::string& sec, RunResult& r) {
    for (const auto& [k, v] : c.values()) {
        if (k.rfind(sec + ".", 0) != 0) continue;
        if (k.size() > 4 && k.compare(k.size() - 4, 4, "_out") == 0)
            r.manifest.outputs[k.substr(sec.size() + 1)] = v;
        else
            r.manifest.params.set(k, v);
    }
}

void run_plumb(const Config& c, RunResult& r) {
    const double kappa = c.number("plumb.kappa", 1.0);
    Table t{{"ell", "kappa", "epsilon", "upper_bound", "lower_bound"}, {}};
    for (double ell : c.numbers("plumb.ell", {0.75})) {
        const double eps = plumbing_epsilon(ell, kappa);
        const double up = std::pow(ell, 1.0 / kappa), lo = std::pow(ell, 2.0 / kappa) / std::pow(4.0, 1.0 / kappa);
        t.add({ell, kappa, eps, up, lo});
        r.checks.push_back(check_le("epsilon <= ell^(1/kappa) at ell=" + format_double(ell), eps, up));
    }
    r.series["plumb"] = std::move(t);
}

void run_curvature(const Config& c, RunResult& r) {
    const ConicCylinder<double> cyl{c.number("curvature.kappa", 1.0), c.number("curvature.ell", 0.5)};
    cyl.validate();
    const auto s = curvature_finite_difference(cyl, c.integer("curvature.nodes", 201));
    Table t{{"x", "k_fd", "k_exact"}, {}};
    double sup = 0.0;
    for (std::size_t k = 0; k < s.x.size(); ++k) {
        const double ex = ricci_eigenvalue(cyl, s.x[k]);
        sup = std::max(sup, std::abs(ex));
        t.add({s.x[k], s.k[k], ex});
    }
    if (cyl.ell > 0) r.checks.push_back(check_le("sup|K| vs 1/ell", sup, 1.0 / cyl.ell));
    r.series["curvature"] = std::move(t);
}

void run_flow(const Config& c, RunResult& r) {
    const auto s = build_surface(surface_spec(c, "flow", "one_holed_torus_punctured"));
    const double alpha = c.number("flow.alpha", 0.3), beta = c.number("flow.beta", 0.2);
    const double ell = c.number("flow.ell", 1.0), kappa = c.number("flow.kappa", 1.0);
    const auto m = metric_for(s, ell, kappa);
    const auto sf = standard_form(connection_from_representation(named_rep(c, "flow", s, alpha), s));
    const auto res = flow_to_flat(apply_twist(sf.field, twist_profile(sf.alpha, beta)), m, detail::flow_config(c, "flow"));
    r.checks.push_back(check_true("flow converged", res.diag.converged));
    const double tr = su2_trace(holonomy_loop(res.field, s.loops.at("p")));
    r.checks.push_back(check_le("|puncture trace - 2cos(2 pi beta)|", std::abs(tr - 2 * std::cos(2 * M_PI * beta)), 1e-3));
    r.checks.push_back(check_le("largest accepted YM increase", res.diag.max_increase, 1e-12 * res.diag.samples.front().ym));
    const auto fit = decay_fit(res.diag, c.number("flow.tail", 0.3));
    r.checks.push_back(check_gt("decay rate", fit.rate, 0.0));
    r.checks.push_back(check_ge("R^2 of tail fit", fit.r_squared, 0.99));
    r.series["decay"] = detail::decay_table(res.diag, fit);
    Table d{{"t", "ym", "grad_norm", "sup_f"}, {}};
    for (const auto& x : res.diag.samples) d.add({x.t, x.ym, x.grad_norm, x.sup_f});
    r.series["convergence/flow"] = std::move(d);
    if (c.has("flow.field_out")) {
        std::ofstream out(c.text("flow.field_out", ""), std::ios::binary);
        write_link_field_binary(res.field, out);
    }
}

void run_spectrum(const Config& c, RunResult& r) {
    const auto s = build_surface(surface_spec(c, "spectrum", "genus2_separating_pinch"));
    const auto rep = named_rep(c, "spectrum", s, c.number("spectrum.alpha", 0.3));
    const double kappa = c.number("spectrum.kappa", 1.0), flag = c.number("spectrum.reducible_tol", 1e-3);
    const auto ells = c.numbers("spectrum.ell", {0.4, 0.2, 0.1, 0.05});
    Table t{{"ell", "lambda1", "reducible_flag"}, {}};
    for (const auto& p : lambda1_sweep(rep, s, ells, kappa)) t.add({p.ell, p.lambda1, p.lambda1 < flag ? 1.0 : 0.0});
    r.series["lambda1"] = std::move(t);
    const int k = c.integer("spectrum.k", 10);
    const auto U = connection_from_representation(rep, s);
    Table v{{"ell", "k", "lambda"}, {}};
    for (double ell : ells) {
        const auto sp = eigensolve(assemble_laplacian(U, metric_for(s, ell, kappa), Bundle::adjoint, Boundary::closed), k);
        for (int i = 0; i < k; ++i) v.add({ell, double(i), sp.values(i)});
        r.checks.push_back(check_le("eigen residual at ell=" + format_double(ell), sp.max_residual, 1e-8));
    }
    r.series["convergence/spectrum"] = std::move(v);
}

void run_variation(const Config& c, RunResult& r) {
    Config a = c;
    a.set("audit.suite", "variation");
    const RunResult inner = run_audit("variation", a);
    r.checks = inner.checks;
    r.series = inner.series;
    r.notes = inner.notes;
}

void run_foliate(const Config& c, RunResult& r) {
    const auto s = build_surface(surface_spec(c, "foliate", "one_holed_torus_punctured"));
    const double alpha = c.number("foliate.alpha", 0.3);
    FoliationPoint p{named_rep(c, "foliate", s, alpha), alpha, c.number("foliate.ell", 1.0), c.number("foliate.kappa", 1.0)};
    const auto leaf = leaf_sweep(p, c.numbers("foliate.beta", {0.34, 0.32, 0.3, 0.28, 0.26, 0.24}), s);
    std::vector<std::string> cols{"beta"};
    for (std::size_t i = 0; i < leaf.invariants.front().size(); ++i) cols.push_back("trace_" + std::to_string(i + 1));
    Table t{cols, {}};
    for (std::size_t i = 0; i < leaf.beta.size(); ++i) {
        std::vector<double> row{leaf.beta[i]};
        row.insert(row.end(), leaf.invariants[i].begin(), leaf.invariants[i].end());
        t.add(std::move(row));
    }
    r.series["leaf"] = std::move(t);
    r.notes["lipschitz"] = format_double(leaf.lipschitz);
    r.notes["max_second_difference"] = format_double(leaf.max_second_difference);
    for (std::size_t i = 0; i < leaf.step_distance.size(); ++i) {
        const double db = std::abs(leaf.beta[i + 1] - leaf.beta[i]);
        r.checks.push_back(check_le("step " + std::to_string(i) + " trace distance vs L dbeta", leaf.step_distance[i],
                                    leaf.lipschitz * db * (1 + 1e-12)));
    }
}

void run_degenerate(const Config& c, RunResult& r) {
    const auto s = build_surface(surface_spec(c, "degenerate", "genus2_separating_pinch"));
    const double alpha = c.number("degenerate.alpha", 0.3);
    const FoliationPoint p{named_rep(c, "degenerate", s, alpha), alpha, 1.0, c.number("degenerate.kappa", 1.0)};
    const auto rep =
        degeneration_experiment(p, c.number("degenerate.beta", 0.25), c.numbers("degenerate.ell", {0.4, 0.2, 0.1, 0.05}), s);
    r.checks.push_back(check_true("distance to nodal limit decreases", rep.distances_decrease));
    r.checks.push_back(check_le("final distance to nodal limit", rep.final_distance, c.number("degenerate.distance_tol", 0.02)));
    r.checks.push_back(check_le("final max transverse |hol - I|", rep.final_transverse, c.number("degenerate.delta", 0.05)));
    Table t{{"ell", "distance_to_nodal", "max_transverse", "puncture_trace", "pinch_drift", "flow_steps"}, {}};
    for (const auto& row : rep.rows)
        t.add({row.ell, row.distance_to_nodal, row.max_transverse, row.puncture_trace, row.pinch_drift, double(row.flow_steps)});
    r.series["convergence/degeneration"] = std::move(t);
    // ell x invariant matrix; ell = 0 is the nodal run.
    std::vector<std::string> cols{"ell"};
    for (std::size_t i = 0; i < rep.nodal_invariants.size(); ++i) cols.push_back("inv_" + std::to_string(i + 1));
    Table m{cols, {}};
    std::vector<double> nodal{0.0};
    nodal.insert(nodal.end(), rep.nodal_invariants.begin(), rep.nodal_invariants.end());
    for (const auto& row : rep.rows) {
        std::vector<double> x{row.ell};
        x.insert(x.end(), row.invariants.begin(), row.invariants.end());
        m.add(std::move(x));
    }
    m.add(std::move(nodal));
    r.series["convergence/invariants"] = std::move(m);
    std::string names;
    for (const auto& n : rep.names) names += (names.empty() ? "" : ",") + n;
    r.notes["loops"] = names;
}

// Cells (ell, beta) of twist flows, one flow per cell on the worker pool.
void run_sweep(const Config& c, RunResult& r) {
    const auto s = build_surface(surface_spec(c, "sweep", "genus2_separating_pinch"));
    const double alpha = c.number("sweep.alpha", 0.3);
    const FoliationPoint p{named_rep(c, "sweep", s, alpha), alpha};
    const auto ells = c.numbers("sweep.ell", {0.8, 0.4, 0.2});
    const auto betas = c.numbers("sweep.beta", {0.25, 0.28});
    FoliationConfig fc;
    fc.flow = detail::flow_config(c, "sweep");
    struct Cell {
        double ell, beta, steps, rate, r2, trace;
    };
    const auto cells = parallel_map(ells.size() * betas.size(), [&](std::size_t i) {
        FoliationPoint q = p;
        q.ell = ells[i / betas.size()];
        const double beta = betas[i % betas.size()];
        const auto run = pi_ab_run(q, beta, s, fc);
        const auto fit = decay_fit(run.diag, 0.3);
        return Cell{q.ell, beta, double(run.diag.steps), fit.rate, fit.r_squared, su2_trace(run.rep.loops.at("p"))};
    });
    Table t{{"ell", "beta", "flow_steps", "decay_rate", "r_squared", "puncture_trace"}, {}};
    for (const auto& x : cells) {
        t.add({x.ell, x.beta, x.steps, x.rate, x.r2, x.trace});
        r.checks.push_back(check_le("puncture trace error at ell=" + format_double(x.ell) + ", beta=" + format_double(x.beta),
                                    std::abs(x.trace - 2 * std::cos(2 * M_PI * x.beta)), 1e-3));
    }
    r.series["convergence/sweep"] = std::move(t);
}

}  // namespace

RunResult run(const std::string& subcommand, const Config& config) {
    if (subcommand == "audit") return run_audit(config.text("audit.suite", ""), config);
    using Fn = void (*)(const Config&, RunResult&);
    static const std::map<std::string, Fn> table{{"plumb", run_plumb},     {"curvature", run_curvature},
                                                 {"flow", run_flow},       {"spectrum", run_spectrum},
                                                 {"variation", run_variation}, {"foliate", run_foliate},
                                                 {"degenerate", run_degenerate}, {"sweep", run_sweep}};
    const auto it = table.find(subcommand);
    if (it == table.end()) throw ConfigError("unknown subcommand '" + subcommand + "'");
    RunResult r;
    r.manifest.experiment = subcommand;
    record(config, subcommand, r);
    const detail::Stopwatch clock;
    try {
        it->second(config, r);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw std::runtime_error(subcommand + ": " + e.what());
    }
    r.timings["total"] = clock.seconds();
    return r;
}

}  // namespace ymlab
