#include "ymlab/foliation.hpp"

#include "ymlab/spectral.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <future>

namespace ymlab {

void validate(const FoliationPoint& p, double tol) {
    if (!(p.alpha > 0.0 && p.alpha < 0.5)) throw FoliationError("puncture weight must lie in (0, 1/2)");
    const auto it = p.rep.loops.find("p");
    if (it == p.rep.loops.end()) throw FoliationError("representation has no puncture loop");
    if (std::abs(su2_trace(it->second) - 2.0 * std::cos(2.0 * M_PI * p.alpha)) > tol)
        throw FoliationError("puncture-loop trace does not match the weight");
}

PiResult twist_and_flow(const LinkField& standard, const MetricGrid& metric, double alpha, double beta,
                        const FlowConfig& cfg) {
    PiResult out;
    out.initial = standard;
    const LinkField twisted = apply_twist(standard, twist_profile(alpha, beta));
    FlowResult res = flow_to_flat(twisted, metric, cfg);
    if (!res.diag.converged) throw FlowTimeout("flow did not reach the flatness tolerance", res.diag);
    out.field = std::move(res.field);
    out.diag = std::move(res.diag);
    out.rep = extract_representation(out.field);
    return out;
}

namespace {

void check_beta(double beta) {
    if (!(beta > 0.0 && beta < 0.5)) throw FoliationError("target weight must lie in (0, 1/2)");
}

LinkField realize_standard(const FoliationPoint& point, const SurfaceComplex& s) {
    const StandardForm sf = standard_form(connection_from_representation(point.rep, s));
    if (std::abs(sf.alpha - point.alpha) > 1e-6) throw FoliationError("realized puncture weight differs from alpha");
    return sf.field;
}

void check_weight(const Representation& rep, double beta, double tol) {
    const double tr = su2_trace(rep.loops.at("p"));
    if (std::abs(tr - 2.0 * std::cos(2.0 * M_PI * beta)) > tol)
        throw FoliationError("output puncture trace " + std::to_string(tr) + " misses the target weight");
}

}  // namespace

PiResult pi_ab_run(const FoliationPoint& point, double beta, const SurfaceComplex& s, const FoliationConfig& cfg) {
    validate(point, cfg.input_tol);
    check_beta(beta);
    const MetricGrid metric = metric_for(s, point.ell, point.kappa);
    PiResult r = twist_and_flow(realize_standard(point, s), metric, point.alpha, beta, cfg.flow);
    check_weight(r.rep, beta, cfg.trace_tol);
    return r;
}

Representation pi_ab(const FoliationPoint& point, double beta, const SurfaceComplex& s, const FoliationConfig& cfg) {
    return pi_ab_run(point, beta, s, cfg).rep;
}

FoliationPoint foliation_point(const Representation& rep, const SurfaceComplex& s, double ell, double kappa) {
    Representation gens;
    for (const auto& name : s.generators) gens.loops[name] = rep.loops.at(name);
    FoliationPoint p;
    p.rep = complete_representation(gens, s);
    p.alpha = std::acos(std::clamp(0.5 * su2_trace(p.rep.loops.at("p")), -1.0, 1.0)) / (2.0 * M_PI);
    p.ell = ell;
    p.kappa = kappa;
    return p;
}

std::vector<std::string> trace_names(const SurfaceComplex& s) {
    std::vector<std::string> names;
    for (const auto& kv : s.loops) names.push_back(kv.first);
    return names;
}

std::vector<std::string> off_cylinder_names(const SurfaceComplex& s) {
    std::vector<std::string> names;
    for (const auto& kv : s.loops)
        if (kv.first != "c") names.push_back(kv.first);
    return names;
}

double composition_check(const FoliationPoint& point, double beta, double gamma, const SurfaceComplex& s,
                         const FoliationConfig& cfg) {
    if (!(point.alpha >= beta && beta >= gamma)) throw FoliationError("weights must be ordered alpha >= beta >= gamma");
    const auto names = trace_names(s);
    // Both sides pass through the same normalization, so gamma = beta is exact.
    const Representation direct = foliation_point(pi_ab(point, gamma, s, cfg), s).rep;
    // The middle point is declared at weight beta; its trace sits within the
    // flatness tolerance of 2 cos(2 pi beta).
    FoliationPoint mid = foliation_point(pi_ab(point, beta, s, cfg), s, point.ell, point.kappa);
    mid.alpha = beta;
    FoliationConfig loose = cfg;
    loose.input_tol = cfg.trace_tol;
    const Representation composed = foliation_point(pi_ab(mid, gamma, s, loose), s).rep;
    return trace_distance(conjugacy_invariants(direct, names), conjugacy_invariants(composed, names));
}

LeafTrace leaf_sweep(const FoliationPoint& point, const std::vector<double>& betas, const SurfaceComplex& s,
                     const FoliationConfig& cfg) {
    if (betas.empty()) throw FoliationError("empty weight grid");
    for (double b : betas) check_beta(b);
    for (std::size_t i = 1; i < betas.size(); ++i)
        if (std::abs(betas[i] - betas[i - 1]) > 0.05 + 1e-12) throw FoliationError("weight steps must be at most 0.05");

    // Every weight is an independent run from the same point.
    std::vector<std::future<Representation>> jobs;
    for (double b : betas) jobs.push_back(std::async(std::launch::async, [&, b] { return pi_ab(point, b, s, cfg); }));
    LeafTrace leaf;
    leaf.beta = betas;
    const auto names = trace_names(s);
    for (auto& j : jobs) {
        leaf.reps.push_back(j.get());
        leaf.invariants.push_back(conjugacy_invariants(leaf.reps.back(), names));
    }
    for (std::size_t i = 1; i < betas.size(); ++i) {
        const double d = trace_distance(leaf.invariants[i], leaf.invariants[i - 1]);
        leaf.step_distance.push_back(d);
        const double db = std::abs(betas[i] - betas[i - 1]);
        if (db > 0.0) leaf.lipschitz = std::max(leaf.lipschitz, d / db);
    }
    for (std::size_t i = 2; i < betas.size(); ++i) {
        const double h = 0.5 * std::abs(betas[i] - betas[i - 2]);
        if (h == 0.0) continue;
        for (std::size_t k = 0; k < leaf.invariants[i].size(); ++k) {
            const double d2 =
                leaf.invariants[i][k] - 2.0 * leaf.invariants[i - 1][k] + leaf.invariants[i - 2][k];
            leaf.max_second_difference = std::max(leaf.max_second_difference, std::abs(d2) / (h * h));
        }
    }
    return leaf;
}

LinkField abelian_limit(const LinkField& diagonal, const MetricGrid& metric) {
    const SurfaceComplex& s = *diagonal.surface;
    for (const Su2d& u : diagonal.links)
        if (su2_offdiag(u) > 1e-12) throw FoliationError("abelian limit needs diagonal links");
    const auto frozen = frozen_edges(s, metric);

    std::vector<int> face_id(s.faces.size(), -1);
    int nf = 0;
    for (std::size_t f = 0; f < s.faces.size(); ++f)
        if (metric.face_active[f]) face_id[f] = nf++;
    std::vector<double> phi(s.edges.size());
    for (std::size_t e = 0; e < s.edges.size(); ++e) phi[e] = su2_diag_angle(diagonal.links[e]);

    Eigen::VectorXd theta(nf), area(nf);
    std::vector<Eigen::Triplet<double>> dt;  // free edge x active face, orientation sign
    std::vector<int> free_id(s.edges.size(), -1);
    int ne = 0;
    for (std::size_t e = 0; e < s.edges.size(); ++e)
        if (!frozen[e]) free_id[e] = ne++;
    for (std::size_t f = 0; f < s.faces.size(); ++f) {
        if (face_id[f] < 0) continue;
        const Face& F = s.faces[f];
        double t = 0.0;
        for (int k = 0; k < 4; ++k) {
            t += F.s[k] * phi[F.e[k]];
            if (free_id[F.e[k]] >= 0) dt.emplace_back(free_id[F.e[k]], face_id[f], F.s[k]);
        }
        theta(face_id[f]) = std::remainder(t, 2.0 * M_PI);
        area(face_id[f]) = metric.cell_area[f];
    }
    Eigen::SparseMatrix<double> Dt(ne, nf);
    Dt.setFromTriplets(dt.begin(), dt.end());
    Eigen::VectorXd minv(ne);
    for (std::size_t e = 0; e < s.edges.size(); ++e) {
        if (free_id[e] < 0) continue;
        int active = 0;
        for (int f : s.edge_faces[e])
            if (f >= 0 && metric.face_active[f]) ++active;
        if (active != 2) throw FoliationError("abelian limit needs every free edge inside the active region");
        minv(free_id[e]) = 1.0 / (4.0 * metric.edge_weight[e]);
    }

    // theta relaxes to c * area inside theta0 + L chi, L = D M^-1 D^T the dual-graph Laplacian.
    const Eigen::SparseMatrix<double> L = Eigen::SparseMatrix<double>(Dt.transpose()) * minv.asDiagonal() * Dt;
    const double c = theta.sum() / area.sum();
    Eigen::VectorXd rhs = c * area - theta;
    // Pin chi on the first cell; the system is singular only along constants.
    Eigen::SparseMatrix<double> Lp = L;
    Lp.coeffRef(0, 0) += 1.0;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(Lp);
    if (ldlt.info() != Eigen::Success) throw FoliationError("dual-graph Laplacian factorization failed");
    const Eigen::VectorXd chi = ldlt.solve(rhs);
    const Eigen::VectorXd dphi = minv.asDiagonal() * (Dt * chi);

    LinkField out = diagonal;
    for (std::size_t e = 0; e < s.edges.size(); ++e)
        if (free_id[e] >= 0) out.links[e] = su2_diag_phase(phi[e] + dphi(free_id[e]));
    return out;
}

int puncture_component(const SurfaceComplex& s, const MetricGrid& nodal_metric) {
    if (s.punctures.empty()) throw FoliationError("surface has no puncture");
    return nodal_metric.component[s.faces[s.punctures[0].face].v[0]];
}

double component_lambda1(const LinkField& field, const MetricGrid& metric, int component) {
    const auto L = assemble_laplacian(field, metric, Bundle::adjoint, Boundary::closed);
    const int k = std::min<int>(8, static_cast<int>(L.size()) - 1);
    const auto sp = eigensolve(L, k);
    for (int i = 0; i < sp.values.size(); ++i) {
        double on = 0.0, all = 0.0;
        for (int b = 0; b < L.blocks(); ++b) {
            const double m = L.mass(b * L.rank) * sp.vectors.col(i).segment(b * L.rank, L.rank).squaredNorm();
            all += m;
            if (L.block_component[b] == component) on += m;
        }
        if (on > 0.5 * all) return sp.values(i);
    }
    throw SpectralError("no low mode found on the requested component");
}

NodalResult nodal_pi_ab(const FoliationPoint& point, double beta, const SurfaceComplex& s,
                        const FoliationConfig& cfg, double min_lambda1) {
    if (s.pinching_curves.empty()) throw FoliationError("nodal flow needs a pinching curve");
    if (accidental_reducibility(point.rep, s).accidental)
        throw AccidentalReducibilityError("representation is accidentally reducible across the pinch");
    validate(point, cfg.input_tol);
    check_beta(beta);
    const MetricGrid m0 = metric_for(s, 0.0, point.kappa);
    const LinkField standard = realize_standard(point, s);
    NodalResult out;
    out.twisted_lambda1 =
        component_lambda1(apply_twist(standard, twist_profile(point.alpha, beta)), m0, puncture_component(s, m0));
    if (!(out.twisted_lambda1 > min_lambda1))
        throw FoliationError("twisted puncture component is near reducible; |beta - alpha| too large");
    // Only the component containing p flows; the other one is flat already and
    // the pinched cells carry no action.
    const int pc = puncture_component(s, m0);
    FlowConfig fc = cfg.flow;
    fc.extra_frozen.assign(s.edges.size(), 0);
    for (std::size_t e = 0; e < s.edges.size(); ++e) {
        const int c0 = m0.component[s.edges[e].v0], c1 = m0.component[s.edges[e].v1];
        if (c0 != pc || c1 != pc) fc.extra_frozen[e] = 1;
    }
    out.run = twist_and_flow(standard, m0, point.alpha, beta, fc);
    check_weight(out.run.rep, beta, cfg.trace_tol);
    return out;
}

DegenerationReport degeneration_experiment(const FoliationPoint& point, double beta, const std::vector<double>& ells,
                                           const SurfaceComplex& s, const FoliationConfig& cfg) {
    if (ells.empty()) throw FoliationError("empty ell sequence");
    for (std::size_t i = 0; i < ells.size(); ++i) {
        if (!(ells[i] > 0.0 && ells[i] <= 1.0)) throw FoliationError("ell values must lie in (0, 1]");
        if (i > 0 && !(ells[i] < ells[i - 1])) throw FoliationError("ell sequence must be decreasing");
    }
    if (accidental_reducibility(point.rep, s).accidental)
        throw AccidentalReducibilityError("representation is accidentally reducible across the pinch; refusing to run");

    DegenerationReport rep;
    rep.names = off_cylinder_names(s);
    const NodalResult nodal = nodal_pi_ab(point, beta, s, cfg);
    rep.nodal_invariants = conjugacy_invariants(nodal.run.rep, rep.names);

    std::vector<std::future<PiResult>> jobs;
    for (double ell : ells) {
        FoliationPoint p = point;
        p.ell = ell;
        jobs.push_back(std::async(std::launch::async, [&, p] { return pi_ab_run(p, beta, s, cfg); }));
    }
    for (std::size_t i = 0; i < ells.size(); ++i) {
        const PiResult r = jobs[i].get();
        DegenerationRow row;
        row.ell = ells[i];
        row.invariants = conjugacy_invariants(r.rep, rep.names);
        row.distance_to_nodal = trace_distance(row.invariants, rep.nodal_invariants);
        row.puncture_trace = su2_trace(r.rep.loops.at("p"));
        row.flow_steps = r.diag.steps;
        for (const Path& c : s.pinching_curves)
            row.pinch_drift = std::max(
                row.pinch_drift, std::abs(su2_trace(holonomy_loop(r.field, c)) - su2_trace(holonomy_loop(r.initial, c))));
        for (const Path& arc : s.transverse_arcs) {
            const Su2d now = holonomy_loop(r.field, arc), then = holonomy_loop(r.initial, arc);
            row.max_transverse = std::max(row.max_transverse, su2_distance(now, then));
        }
        rep.rows.push_back(std::move(row));
    }
    rep.distances_decrease = true;
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
        if (!(rep.rows[i].distance_to_nodal < rep.rows[i - 1].distance_to_nodal)) rep.distances_decrease = false;
    rep.final_distance = rep.rows.back().distance_to_nodal;
    rep.final_transverse = rep.rows.back().max_transverse;
    return rep;
}

}  // namespace ymlab
