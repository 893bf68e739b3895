#include "ymlab/field.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <deque>
#include <numeric>
#include <optional>
#include <random>

namespace ymlab {

LinkField identity_field(const SurfaceComplex& s) {
    return LinkField{&s, std::vector<Su2d>(s.edges.size(), su2_identity<double>())};
}

Su2d plaquette(const LinkField& field, int face) {
    const Face& f = field.surface->faces[face];
    Su2d p = su2_identity<double>();
    for (int k = 0; k < 4; ++k) p = p * field.along({f.e[k], f.s[k]});
    return p;
}

Algd plaquette_log(const LinkField& field, int face) { return su2_log(plaquette(field, face)); }

Mat2cd plaquette_log_matrix(const LinkField& field, int face) {
    return alg_matrix(plaquette_log(field, face));
}

CurvatureField curvature(const LinkField& field, const MetricGrid& metric) {
    const std::size_t nf = field.surface->faces.size();
    CurvatureField c;
    c.log.assign(nf, Algd::Zero());
    c.density.assign(nf, 0.0);
    for (std::size_t f = 0; f < nf; ++f) {
        if (!metric.face_active[f]) continue;
        c.log[f] = plaquette_log(field, static_cast<int>(f));
        // |-i v.s|_F = sqrt(2) |v|
        c.density[f] = std::sqrt(2.0) * c.log[f].norm() / metric.cell_area[f];
    }
    return c;
}

CurvatureNorms curvature_norms(const LinkField& field, const MetricGrid& metric) {
    const CurvatureField c = curvature(field, metric);
    CurvatureNorms n;
    double sq = 0.0;
    for (std::size_t f = 0; f < c.density.size(); ++f) {
        if (!metric.face_active[f]) continue;
        n.sup = std::max(n.sup, c.density[f]);
        sq += c.density[f] * c.density[f] * metric.cell_area[f];
    }
    n.l2 = std::sqrt(sq);
    return n;
}

Su2d holonomy_loop(const LinkField& field, const Path& path) {
    const SurfaceComplex& s = *field.surface;
    Su2d h = su2_identity<double>();
    int v = path.start;
    for (const DirEdge& d : path.steps) {
        if (d.e < 0 || d.e >= static_cast<int>(s.edges.size())) throw PathError("edge index out of range");
        const Edge& e = s.edges[d.e];
        const int from = d.s > 0 ? e.v0 : e.v1;
        if (from != v) throw PathError("path is not contiguous");
        v = d.s > 0 ? e.v1 : e.v0;
        h = h * field.along(d);
    }
    return h;
}

LinkField gauge_transform(const LinkField& field, const GaugeField& g) {
    LinkField out = field;
    const auto& edges = field.surface->edges;
    for (std::size_t e = 0; e < edges.size(); ++e)
        out.links[e] = su2_normalized(g[edges[e].v0] * field.links[e] * g[edges[e].v1].conjugate());
    return out;
}

GaugeField random_gauge(int num_vertices, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01;
    GaugeField g(num_vertices);
    for (auto& q : g) q = su2_normalized(Su2d(n01(rng), n01(rng), n01(rng), n01(rng)));
    return g;
}

// ---------------------------------------------------------------------------

namespace {
constexpr double kR1 = 1.0 / 6.0;
constexpr double kR2 = 1.0 / 3.0;

double smooth5(double s) { return s * s * s * (10.0 + s * (-15.0 + 6.0 * s)); }
double smooth5_d(double s) { return 30.0 * s * s * (1.0 - s) * (1.0 - s); }
double smooth5_dd(double s) { return 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s); }

double phi1_dd(double r) {
    if (r <= kR1 || r >= kR2) return 0.0;
    const double w = kR2 - kR1;
    return -smooth5_dd((r - kR1) / w) / (w * w);
}
}  // namespace

double cutoff_phi1(double r) {
    if (r <= kR1) return 1.0;
    if (r >= kR2) return 0.0;
    return 1.0 - smooth5((r - kR1) / (kR2 - kR1));
}

double cutoff_phi1_prime(double r) {
    if (r <= kR1 || r >= kR2) return 0.0;
    const double w = kR2 - kR1;
    return -smooth5_d((r - kR1) / w) / w;
}

double TwistProfile::a(double r) const {
    if (r <= kR1) return beta;
    if (r >= kR2) return alpha;
    return alpha - (alpha - beta) * (cutoff_phi1(r) + r * cutoff_phi1_prime(r) * std::log(r));
}

double TwistProfile::a_prime(double r) const {
    if (r <= kR1 || r >= kR2) return 0.0;
    const double d1 = cutoff_phi1_prime(r);
    return -(alpha - beta) * (2.0 * d1 + (d1 + r * phi1_dd(r)) * std::log(r));
}

TwistProfile twist_profile(double alpha, double beta) {
    if (!(alpha >= 0.0 && alpha <= 0.5 && beta >= 0.0 && beta <= 0.5))
        throw std::invalid_argument("holonomy weights must lie in [0, 1/2]");
    return TwistProfile{alpha, beta};
}

namespace {

const Puncture& first_puncture(const SurfaceComplex& s) {
    if (s.punctures.empty()) throw StandardFormError("surface has no puncture");
    return s.punctures.front();
}

Eigen::Vector2d rel_xy(const SurfaceComplex& s, int v) {
    const Puncture& p = first_puncture(s);
    if (s.vertex_chart[v] != p.chart) return {1e9, 1e9};
    return s.vertex_xy(v) - Eigen::Vector2d(p.cx, p.cy);
}

std::vector<std::uint8_t> disk_mask(const SurfaceComplex& s, double radius) {
    std::vector<std::uint8_t> in(s.num_vertices, 0);
    for (int v = 0; v < s.num_vertices; ++v) in[v] = rel_xy(s, v).norm() <= radius ? 1 : 0;
    return in;
}

std::vector<int> disk_edges(const SurfaceComplex& s, const std::vector<std::uint8_t>& in) {
    std::vector<int> out;
    for (std::size_t e = 0; e < s.edges.size(); ++e)
        if (in[s.edges[e].v0] && in[s.edges[e].v1]) out.push_back(static_cast<int>(e));
    return out;
}

// int_edge f(r) d theta by 5-point Gauss-Legendre on the straight segment.
template <class F> double integrate_dtheta(const SurfaceComplex& s, int edge, F&& f) {
    static const double xg[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                 0.9061798459386640};
    static const double wg[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                 0.4786286704993665, 0.2369268850561891};
    const Eigen::Vector2d p0 = rel_xy(s, s.edges[edge].v0);
    const Eigen::Vector2d d = rel_xy(s, s.edges[edge].v1) - p0;
    double acc = 0.0;
    for (int k = 0; k < 5; ++k) {
        const Eigen::Vector2d p = p0 + 0.5 * (xg[k] + 1.0) * d;
        const double r2 = p.squaredNorm();
        acc += 0.5 * wg[k] * f(std::sqrt(r2)) * (p.x() * d.y() - p.y() * d.x()) / r2;
    }
    return acc;
}

}  // namespace

std::vector<int> puncture_disk_vertices(const SurfaceComplex& s, double radius) {
    const auto in = disk_mask(s, radius);
    std::vector<int> out;
    for (int v = 0; v < s.num_vertices; ++v)
        if (in[v]) out.push_back(v);
    return out;
}

double edge_angle(const SurfaceComplex& s, int edge) {
    const Eigen::Vector2d a = rel_xy(s, s.edges[edge].v0);
    const Eigen::Vector2d b = rel_xy(s, s.edges[edge].v1);
    return std::atan2(a.x() * b.y() - a.y() * b.x(), a.dot(b));
}

StandardForm standard_form(const LinkField& field) {
    const SurfaceComplex& s = *field.surface;
    const Puncture& p = first_puncture(s);
    const auto in = disk_mask(s, kStandardDiskRadius);
    const int base = s.faces[p.face].v[0];

    const Su2d P = plaquette(field, p.face);
    const double sn = P.vec().norm();
    const double phi = std::atan2(sn, P.w());
    StandardForm out;
    out.alpha = phi / (2.0 * M_PI);

    GaugeField g(s.num_vertices, su2_identity<double>());
    if (sn > 1e-14) g[base] = Su2d::FromTwoVectors(P.vec() / sn, Algd(0, 0, -1));

    std::vector<std::vector<int>> adj(s.num_vertices);
    for (int e : disk_edges(s, in)) {
        adj[s.edges[e].v0].push_back(e);
        adj[s.edges[e].v1].push_back(e);
    }
    std::vector<std::uint8_t> seen(s.num_vertices, 0);
    std::deque<int> queue{base};
    seen[base] = 1;
    while (!queue.empty()) {
        const int v = queue.front();
        queue.pop_front();
        for (int e : adj[v]) {
            const Edge& ed = s.edges[e];
            const Su2d S = su2_diag_phase(out.alpha * edge_angle(s, e));
            if (ed.v0 == v && !seen[ed.v1]) {
                g[ed.v1] = su2_normalized(S.conjugate() * g[v] * field.links[e]);
                seen[ed.v1] = 1;
                queue.push_back(ed.v1);
            } else if (ed.v1 == v && !seen[ed.v0]) {
                g[ed.v0] = su2_normalized(S * g[v] * field.links[e].conjugate());
                seen[ed.v0] = 1;
                queue.push_back(ed.v0);
            }
        }
    }
    out.field = gauge_transform(field, g);
    for (int e : disk_edges(s, in)) {
        const double off = su2_offdiag(out.field.links[e]);
        if (off > kStandardFormTol)
            throw StandardFormError("field is not flat on the puncture disk (off-diagonal " +
                                    std::to_string(off) + ")");
    }
    return out;
}

LinkField apply_twist(const LinkField& field, const TwistProfile& profile) {
    const SurfaceComplex& s = *field.surface;
    const auto in = disk_mask(s, kStandardDiskRadius);
    LinkField out = field;
    if (profile.alpha == profile.beta) return out;
    for (int e : disk_edges(s, in)) {
        const double off = su2_offdiag(field.links[e]);
        if (off > kStandardFormTol)
            throw StandardFormError("link not diagonal on the puncture disk (off-diagonal " +
                                    std::to_string(off) + ")");
        // (a - alpha) = (beta - alpha) + (a - beta); the constant part uses the exact
        // angle, the remainder vanishes inside r = 1/6 where quadrature would be poor.
        const double phase = (profile.beta - profile.alpha) * edge_angle(s, e) +
                             integrate_dtheta(s, e, [&](double r) { return profile.a(r) - profile.beta; });
        if (phase != 0.0) out.links[e] = su2_normalized(su2_diag_phase(phase) * field.links[e]);
    }
    return out;
}

// ---------------------------------------------------------------------------

Representation extract_representation(const LinkField& field) {
    Representation rep;
    for (const auto& [name, path] : field.surface->loops) rep.loops[name] = holonomy_loop(field, path);
    return rep;
}

namespace {

struct Realization {
    LinkField field;
    double root_residual = 0.0;  // flatness defect at the root face of a closed surface
};

Realization realize(const Representation& rep, const SurfaceComplex& s) {
    const std::size_t ne = s.edges.size();
    std::vector<std::uint8_t> in_tree(ne, 0), is_gen(ne, 0);
    std::vector<Su2d> links(ne, su2_identity<double>());

    std::vector<int> parent(s.num_vertices);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    auto try_add = [&](int e) {
        const int a = find(s.edges[e].v0), b = find(s.edges[e].v1);
        if (a == b) return false;
        parent[std::max(a, b)] = std::min(a, b);
        in_tree[e] = 1;
        return true;
    };

    std::vector<std::pair<int, DirEdge>> gens;
    for (const std::string& name : s.generators) {
        const Path& path = s.loops.at(name);
        const std::size_t mid = path.steps.size() / 2;
        gens.emplace_back(static_cast<int>(gens.size()), path.steps[mid]);
        is_gen[path.steps[mid].e] = 1;
    }
    for (const std::string& name : s.generators) {
        const Path& path = s.loops.at(name);
        const std::size_t mid = path.steps.size() / 2;
        for (std::size_t k = 0; k < path.steps.size(); ++k) {
            if (k == mid) continue;
            const int e = path.steps[k].e;
            if (in_tree[e]) continue;
            if (is_gen[e] || !try_add(e)) throw std::logic_error("generator loops do not form a wedge system");
        }
    }
    for (std::size_t e = 0; e < ne; ++e)
        if (!is_gen[e]) try_add(static_cast<int>(e));

    for (std::size_t g = 0; g < gens.size(); ++g) {
        const auto it = rep.loops.find(s.generators[g]);
        if (it == rep.loops.end()) throw RepresentationError("missing generator " + s.generators[g]);
        const DirEdge d = gens[g].second;
        links[d.e] = d.s > 0 ? it->second : it->second.conjugate();
    }

    // Dual tree over faces rooted at the puncture (no flatness constraint there).
    const int nf = static_cast<int>(s.faces.size());
    const int root = s.punctures.empty() ? 0 : s.punctures.front().face;
    std::vector<int> parent_edge(nf, -1), order;
    std::vector<std::uint8_t> seen(nf, 0);
    std::deque<int> queue{root};
    seen[root] = 1;
    while (!queue.empty()) {
        const int f = queue.front();
        queue.pop_front();
        order.push_back(f);
        for (int k = 0; k < 4; ++k) {
            const int e = s.faces[f].e[k];
            if (in_tree[e] || is_gen[e]) continue;
            const auto& ef = s.edge_faces[e];
            const int o = ef[0] == f ? ef[1] : ef[0];
            if (o < 0 || seen[o]) continue;
            seen[o] = 1;
            parent_edge[o] = e;
            queue.push_back(o);
        }
    }
    if (static_cast<int>(order.size()) != nf) throw std::logic_error("cut surface is not a disk");

    LinkField field{&s, links};
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const int f = *it;
        if (f == root) continue;
        const Face& F = s.faces[f];
        int kk = -1;
        for (int k = 0; k < 4; ++k)
            if (F.e[k] == parent_edge[f]) kk = k;
        Su2d L = su2_identity<double>(), R = su2_identity<double>();
        for (int k = 0; k < kk; ++k) L = L * field.along({F.e[k], F.s[k]});
        for (int k = kk + 1; k < 4; ++k) R = R * field.along({F.e[k], F.s[k]});
        const Su2d w = su2_normalized((R * L).conjugate());
        field.links[F.e[kk]] = F.s[kk] > 0 ? w : w.conjugate();
    }
    Realization out{field, 0.0};
    if (s.punctures.empty()) out.root_residual = su2_distance(plaquette(field, root), su2_identity<double>());
    return out;
}

double loop_residual(const Realization& r, const Representation& rep, const SurfaceComplex& s) {
    double res = r.root_residual;
    for (const auto& [name, m] : rep.loops) {
        if (std::find(s.generators.begin(), s.generators.end(), name) != s.generators.end()) continue;
        const auto it = s.loops.find(name);
        if (it == s.loops.end()) throw RepresentationError("unknown loop " + name);
        res = std::max(res, su2_distance(holonomy_loop(r.field, it->second), m));
    }
    return res;
}

}  // namespace

LinkField connection_from_representation(const Representation& rep, const SurfaceComplex& s, double tol) {
    Realization r = realize(rep, s);
    const double res = loop_residual(r, rep, s);
    if (res > tol)
        throw RepresentationError("representation violates the surface relation (residual " +
                                  std::to_string(res) + ")");
    return r.field;
}

double relation_residual(const Representation& rep, const SurfaceComplex& s) {
    return loop_residual(realize(rep, s), rep, s);
}

Representation complete_representation(const Representation& generators, const SurfaceComplex& s) {
    Realization r = realize(generators, s);
    if (r.root_residual > 1e-10) throw RepresentationError("generators violate the closed-surface relation");
    return extract_representation(r.field);
}

Representation conjugate(const Representation& rep, const Su2d& g) {
    Representation out;
    for (const auto& [name, m] : rep.loops) out.loops[name] = su2_normalized(g * m * g.conjugate());
    return out;
}

const char* to_string(Reducibility r) {
    switch (r) {
        case Reducibility::irreducible: return "irreducible";
        case Reducibility::reducible: return "reducible";
        case Reducibility::central: return "central";
    }
    return "?";
}

ReducibilityReport reducibility(const std::vector<Su2d>& mats, double tol) {
    using C = std::complex<double>;
    Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(4 * std::max<std::size_t>(mats.size(), 1), 4);
    bool central = true;
    for (std::size_t g = 0; g < mats.size(); ++g) {
        const Mat2cd G = su2_matrix(mats[g]);
        if (mats[g].vec().norm() > tol) central = false;
        for (int k = 0; k < 4; ++k) {
            Mat2cd E = Mat2cd::Zero();
            E(k % 2, k / 2) = C(1, 0);
            const Mat2cd comm = E * G - G * E;
            for (int r = 0; r < 4; ++r) K(4 * g + r, k) = comm(r % 2, r / 2);
        }
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(K);
    const auto& sv = svd.singularValues();
    ReducibilityReport rep;
    rep.commutant_dim = 0;
    for (int k = 0; k < sv.size(); ++k)
        if (sv(k) <= tol) ++rep.commutant_dim;
    if (central)
        rep.kind = Reducibility::central;
    else
        rep.kind = rep.commutant_dim >= 2 ? Reducibility::reducible : Reducibility::irreducible;
    return rep;
}

ReducibilityReport reducibility(const Representation& rep, double tol) {
    std::vector<Su2d> mats;
    for (const auto& [name, m] : rep.loops) mats.push_back(m);
    return reducibility(mats, tol);
}

AccidentalReport accidental_reducibility(const Representation& rep, const SurfaceComplex& s, double tol) {
    AccidentalReport out;
    if (s.component_loops.empty()) throw RepresentationError("surface declares no components");
    out.accidental = true;
    for (const auto& names : s.component_loops) {
        std::vector<Su2d> mats;
        for (const std::string& n : names) {
            const auto it = rep.loops.find(n);
            if (it == rep.loops.end()) throw RepresentationError("missing component generator " + n);
            mats.push_back(it->second);
        }
        const bool red = reducibility(mats, tol).kind != Reducibility::irreducible;
        out.component_reducible.push_back(red);
        out.accidental = out.accidental && red;
    }
    out.globally_irreducible = reducibility(rep, tol).kind == Reducibility::irreducible;
    return out;
}

std::vector<double> conjugacy_invariants(const Representation& rep, const std::vector<std::string>& names) {
    std::vector<double> out;
    auto get = [&](const std::string& n) {
        const auto it = rep.loops.find(n);
        if (it == rep.loops.end()) throw RepresentationError("missing loop " + n);
        return it->second;
    };
    for (const auto& n : names) out.push_back(su2_trace(get(n)));
    for (std::size_t k = 0; k + 1 < names.size(); ++k) out.push_back(su2_trace(Su2d(get(names[k]) * get(names[k + 1]))));
    return out;
}

double trace_distance(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("trace vectors differ in length");
    double d = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
    return d;
}

// ---------------------------------------------------------------------------

namespace {

Su2d rot(double angle, const Algd& axis) { return su2_exp<double>(angle * axis.normalized()); }

// Root of f on [lo, hi] found by scanning then bisection; nullopt when f keeps its sign.
template <class F> std::optional<double> scan_root(F&& f, double lo, double hi, int samples) {
    double xa = lo, fa = f(lo);
    for (int k = 1; k <= samples; ++k) {
        const double xb = lo + (hi - lo) * k / samples;
        const double fb = f(xb);
        if (fa == 0.0) return xa;
        if ((fa < 0) != (fb < 0)) {
            double a = xa, b = xb, fl = fa;
            for (int it = 0; it < 80; ++it) {
                const double m = 0.5 * (a + b);
                const double fm = f(m);
                if ((fm < 0) == (fl < 0)) {
                    a = m;
                    fl = fm;
                } else {
                    b = m;
                }
            }
            return 0.5 * (a + b);
        }
        xa = xb;
        fa = fb;
    }
    return std::nullopt;
}

}  // namespace

Representation punctured_torus_rep(const SurfaceComplex& s, double alpha) {
    if (s.topology != "one_holed_torus_punctured") throw RepresentationError("needs the punctured torus");
    const double target = 2.0 * std::cos(2.0 * M_PI * alpha);
    const double ang = 0.45 * M_PI;
    auto gens = [&](double psi) {
        Representation r;
        r.loops["a"] = rot(ang, Algd::UnitX());
        r.loops["b"] = rot(ang, Algd(std::cos(psi), std::sin(psi), 0.0));
        return r;
    };
    auto f = [&](double psi) { return su2_trace(complete_representation(gens(psi), s).loops.at("p")) - target; };
    const auto psi = scan_root(f, 0.0, 0.5 * M_PI, 16);
    if (!psi) throw RepresentationError("puncture weight out of reach for the built-in family");
    return complete_representation(gens(*psi), s);
}

Representation genus2_irreducible_rep(const SurfaceComplex& s, double alpha) {
    if (s.topology != "genus2_separating_pinch") throw RepresentationError("needs the genus-2 surface");
    const double target = 2.0 * std::cos(2.0 * M_PI * alpha);
    for (double ang : {0.45 * M_PI, 0.4 * M_PI, 0.35 * M_PI, 0.3 * M_PI}) {
        auto gens = [&](double psi) {
            Representation r;
            r.loops["a2"] = rot(0.3 * M_PI, Algd::UnitX());
            r.loops["b2"] = rot(0.35 * M_PI, Algd(std::cos(1.1), std::sin(1.1), 0.0));
            r.loops["a1"] = rot(ang, Algd(0.2, 0.3, 1.0));
            r.loops["b1"] = rot(ang, Algd(std::cos(psi), 0.4, std::sin(psi)));
            return r;
        };
        auto f = [&](double psi) { return su2_trace(complete_representation(gens(psi), s).loops.at("p")) - target; };
        if (const auto psi = scan_root(f, 0.0, M_PI, 24)) return complete_representation(gens(*psi), s);
    }
    throw RepresentationError("puncture weight out of reach for the built-in family");
}

Representation genus2_accidental_rep(const SurfaceComplex& s) {
    if (s.topology != "genus2_separating_pinch") throw RepresentationError("needs the genus-2 surface");
    Representation r;
    r.loops["a1"] = su2_diag_phase(0.7);
    r.loops["b1"] = su2_diag_phase(1.3);
    r.loops["a2"] = rot(0.9, Algd::UnitX());
    r.loops["b2"] = rot(0.4, Algd::UnitX());
    return complete_representation(r, s);
}

}  // namespace ymlab
