#include "ymlab/flow.hpp"

#include "ymlab/spectral.hpp"

#include <algorithm>
#include <cmath>

namespace ymlab {

void FlowConfig::validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (!(tol_flat > 0.0)) throw std::invalid_argument("tol_flat must be positive");
    if (!(t_max > 0.0)) throw std::invalid_argument("t_max must be positive");
}

std::vector<std::uint8_t> frozen_edges(const SurfaceComplex& s, const MetricGrid& metric) {
    std::vector<std::uint8_t> frozen(s.edges.size(), 0);
    for (const Puncture& p : s.punctures)
        for (int e : s.faces[p.face].e) frozen[e] = 1;
    for (std::size_t e = 0; e < s.edges.size(); ++e) {
        bool touches = false;
        for (int f : s.edge_faces[e])
            if (f >= 0 && metric.face_active[f]) touches = true;
        if (!touches || metric.edge_weight[e] <= 0.0) frozen[e] = 1;
    }
    return frozen;
}

namespace {

struct ActionEval {
    double ym = 0.0;
    double sup = 0.0;
};

ActionEval evaluate(const LinkField& field, const MetricGrid& metric) {
    ActionEval out;
    const std::size_t nf = field.surface->faces.size();
    for (std::size_t f = 0; f < nf; ++f) {
        if (!metric.face_active[f]) continue;
        const double n2 = su2_log(plaquette(field, static_cast<int>(f))).squaredNorm();
        const double A = metric.cell_area[f];
        out.ym += 2.0 * n2 / A;
        out.sup = std::max(out.sup, std::sqrt(2.0 * n2) / A);
    }
    return out;
}

}  // namespace

double ym_action(const LinkField& field, const MetricGrid& metric) { return evaluate(field, metric).ym; }

std::vector<Algd> ym_differential(const LinkField& field, const MetricGrid& metric) {
    const SurfaceComplex& s = *field.surface;
    std::vector<Algd> d(s.edges.size(), Algd::Zero());
    for (std::size_t fi = 0; fi < s.faces.size(); ++fi) {
        if (!metric.face_active[fi]) continue;
        const Face& f = s.faces[fi];
        std::array<Su2d, 4> W;
        for (int k = 0; k < 4; ++k) W[k] = field.along({f.e[k], f.s[k]});
        const Su2d P = W[0] * W[1] * W[2] * W[3];
        const Algd theta = su2_log(P);
        if (theta.squaredNorm() == 0.0) continue;
        const double c = 4.0 / metric.cell_area[fi];
        // Perturbing W_k multiplies P on the left by exp(s Ad_M xi), M the prefix
        // through W_k when the edge is traversed backwards, before it otherwise.
        Su2d prefix = su2_identity<double>();
        for (int k = 0; k < 4; ++k) {
            const Su2d M = f.s[k] > 0 ? prefix : Su2d(prefix * W[k]);
            d[f.e[k]] += (c * f.s[k]) * (M.conjugate() * theta);
            prefix = prefix * W[k];
        }
    }
    return d;
}

std::vector<Algd> ym_gradient(const LinkField& field, const MetricGrid& metric,
                              const std::vector<std::uint8_t>& frozen) {
    std::vector<Algd> g = ym_differential(field, metric);
    for (std::size_t e = 0; e < g.size(); ++e) {
        if (frozen[e])
            g[e].setZero();
        else
            g[e] /= 4.0 * metric.edge_weight[e];
    }
    return g;
}

double gradient_norm(const std::vector<Algd>& grad, const MetricGrid& metric) {
    double acc = 0.0;
    for (std::size_t e = 0; e < grad.size(); ++e) acc += 2.0 * metric.edge_weight[e] * grad[e].squaredNorm();
    return std::sqrt(acc);
}

LinkField step_links(const LinkField& field, const std::vector<Algd>& xi, double scale) {
    LinkField out = field;
    for (std::size_t e = 0; e < xi.size(); ++e)
        if (xi[e].squaredNorm() != 0.0) out.links[e] = su2_normalized(su2_exp<double>(scale * xi[e]) * field.links[e]);
    return out;
}

namespace {

// Truncated inverse of the exponential's differential: v - [u,v]/2 + [u,[u,v]]/12.
Algd dexpinv(const Algd& u, const Algd& v) {
    const Algd b = alg_bracket(u, v);
    return v - 0.5 * b + alg_bracket(u, b) / 12.0;
}

// One Munthe-Kaas RK4 step of dU/dt = -grad(U) U, per edge.
LinkField rkmk4_step(const LinkField& U, const MetricGrid& metric, const std::vector<std::uint8_t>& frozen,
                     double dt, const std::vector<Algd>& k1raw) {
    const std::size_t ne = U.links.size();
    std::vector<Algd> k1(ne), k2(ne), k3(ne), k4(ne), u(ne);
    for (std::size_t e = 0; e < ne; ++e) k1[e] = -k1raw[e];
    for (std::size_t e = 0; e < ne; ++e) u[e] = 0.5 * dt * k1[e];
    auto g2 = ym_gradient(step_links(U, u, 1.0), metric, frozen);
    for (std::size_t e = 0; e < ne; ++e) k2[e] = dexpinv(u[e], -g2[e]);
    for (std::size_t e = 0; e < ne; ++e) u[e] = 0.5 * dt * k2[e];
    auto g3 = ym_gradient(step_links(U, u, 1.0), metric, frozen);
    for (std::size_t e = 0; e < ne; ++e) k3[e] = dexpinv(u[e], -g3[e]);
    for (std::size_t e = 0; e < ne; ++e) u[e] = dt * k3[e];
    auto g4 = ym_gradient(step_links(U, u, 1.0), metric, frozen);
    for (std::size_t e = 0; e < ne; ++e) k4[e] = dexpinv(u[e], -g4[e]);
    for (std::size_t e = 0; e < ne; ++e) u[e] = (dt / 6.0) * (k1[e] + 2.0 * k2[e] + 2.0 * k3[e] + k4[e]);
    return step_links(U, u, 1.0);
}

}  // namespace

FlowResult flow_to_flat(const LinkField& field, const MetricGrid& metric, const FlowConfig& cfg) {
    cfg.validate();
    auto frozen = frozen_edges(*field.surface, metric);
    if (!cfg.extra_frozen.empty()) {
        if (cfg.extra_frozen.size() != frozen.size()) throw std::invalid_argument("extra_frozen size mismatch");
        for (std::size_t e = 0; e < frozen.size(); ++e) frozen[e] |= cfg.extra_frozen[e];
    }
    FlowResult res{field, {}};
    FlowDiagnostics& d = res.diag;

    double t = 0.0, dt = cfg.dt;
    ActionEval cur = evaluate(res.field, metric);
    std::vector<Algd> grad = ym_gradient(res.field, metric, frozen);

    auto record = [&]() {
        FlowSample smp;
        smp.t = t;
        smp.ym = cur.ym;
        smp.sup_f = cur.sup;
        smp.grad_norm = gradient_norm(grad, metric);
        const double gap = cur.ym - cfg.flat_reference;
        smp.rade_ratio = gap > 1e-14 ? smp.grad_norm / std::sqrt(gap) : 0.0;
        d.samples.push_back(smp);
    };
    record();

    while (cur.sup > cfg.tol_flat) {
        if (t >= cfg.t_max || d.steps >= cfg.max_steps) {
            d.timed_out = true;
            break;
        }
        const double h = std::min(dt, cfg.t_max - t);
        LinkField trial;
        ActionEval next;
        bool ok = true;
        try {
            trial = cfg.integrator == Integrator::euler ? step_links(res.field, grad, -h)
                                                        : rkmk4_step(res.field, metric, frozen, h, grad);
            next = evaluate(trial, metric);
        } catch (const BranchError&) {
            ok = false;
        }
        // Increases at rounding level are stagnation at a critical point, not overshoot.
        if (!ok || next.ym > cur.ym * (1.0 + 1e-13)) {
            if (!cfg.adapt && ok) {
                d.max_increase = std::max(d.max_increase, next.ym - cur.ym);
            } else {
                ++d.rejected;
                dt *= 0.5;
                if (dt < 1e-15) {
                    d.timed_out = true;
                    break;
                }
                continue;
            }
        }
        res.field = std::move(trial);
        cur = next;
        t += h;
        ++d.steps;
        grad = ym_gradient(res.field, metric, frozen);
        record();
        if (cfg.adapt) dt = std::min(dt * cfg.dt_growth, cfg.dt_max);
    }
    d.converged = cur.sup <= cfg.tol_flat;

    if (cfg.probe_reducible) {
        const auto L = assemble_laplacian(res.field, metric, Bundle::adjoint, Boundary::closed);
        const auto sp = eigensolve(L, 1);
        d.endpoint_lambda1 = sp.values(0);
        d.near_reducible = d.endpoint_lambda1 < 1e-6;
    }
    return res;
}

double rade_ratio(const LinkField& field, const MetricGrid& metric, double flat_reference_energy) {
    const double gap = ym_action(field, metric) - flat_reference_energy;
    if (gap <= 1e-14) throw std::domain_error("Rade ratio undefined at the minimum");
    const auto frozen = frozen_edges(*field.surface, metric);
    return gradient_norm(ym_gradient(field, metric, frozen), metric) / std::sqrt(gap);
}

DecayFit decay_fit(const std::vector<double>& t, const std::vector<double>& sup_f, double tail_fraction) {
    if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) throw std::invalid_argument("tail_fraction in (0,1]");
    const std::size_t n = t.size();
    const std::size_t m = static_cast<std::size_t>(std::ceil(tail_fraction * n));
    if (m < 10) throw std::invalid_argument("decay fit needs at least 10 tail samples");
    double st = 0, sy = 0, stt = 0, sty = 0, syy = 0;
    for (std::size_t k = n - m; k < n; ++k) {
        if (!(sup_f[k] > 0.0)) throw std::invalid_argument("tail contains zero curvature");
        const double y = std::log(sup_f[k]);
        st += t[k];
        sy += y;
        stt += t[k] * t[k];
        sty += t[k] * y;
        syy += y * y;
    }
    const double N = static_cast<double>(m);
    const double vt = stt - st * st / N, vy = syy - sy * sy / N, cty = sty - st * sy / N;
    if (vt <= 0.0) throw std::invalid_argument("decay fit needs distinct times");
    DecayFit fit;
    const double slope = cty / vt;
    fit.rate = -slope;
    fit.intercept = (sy - slope * st) / N;
    fit.r_squared = vy > 0.0 ? cty * cty / (vt * vy) : 1.0;
    fit.samples = m;
    return fit;
}

DecayFit decay_fit(const FlowDiagnostics& diag, double tail_fraction) {
    std::vector<double> t, s;
    for (const auto& x : diag.samples) {
        t.push_back(x.t);
        s.push_back(x.sup_f);
    }
    return decay_fit(t, s, tail_fraction);
}

}  // namespace ymlab
