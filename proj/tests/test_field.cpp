#include "ymlab/field.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include <random>

using namespace ymlab;

namespace {

LinkField random_field(const SurfaceComplex& s, unsigned seed, double spread) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01;
    LinkField f = identity_field(s);
    for (auto& u : f.links) u = su2_exp<double>(spread * Algd(n01(rng), n01(rng), n01(rng)));
    return f;
}

Su2d rot(double a, const Algd& axis) { return su2_exp<double>(a * axis.normalized()); }

}  // namespace

TEST(Field, PlaquetteIdentityAndAbelian) {
    const auto s = build_surface({"torus", 8});
    const auto id = identity_field(s);
    for (std::size_t f = 0; f < s.faces.size(); ++f) EXPECT_EQ(plaquette_log(id, static_cast<int>(f)).norm(), 0.0);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-0.4, 0.4);
    LinkField ab = id;
    std::vector<double> theta(s.edges.size());
    for (std::size_t e = 0; e < s.edges.size(); ++e) ab.links[e] = su2_diag_phase(theta[e] = u(rng));
    for (std::size_t f = 0; f < s.faces.size(); ++f) {
        double phi = 0.0;
        for (int k = 0; k < 4; ++k) phi += s.faces[f].s[k] * theta[s.faces[f].e[k]];
        const Mat2cd L = plaquette_log_matrix(ab, static_cast<int>(f));
        EXPECT_NEAR(L(0, 0).imag(), phi, 1e-14);
        EXPECT_NEAR(L(1, 1).imag(), -phi, 1e-14);
        EXPECT_NEAR(std::abs(L(0, 1)), 0.0, 1e-15);
    }
}

TEST(Field, GaugeInvariance) {
    const auto s = build_surface({"one_holed_torus_punctured", 8});
    const auto m = metric_for(s, 1.0, 1.0);
    const auto f = random_field(s, 11, 0.3);
    const auto g = gauge_transform(f, random_gauge(s.num_vertices, 5));
    const auto a = curvature_norms(f, m), b = curvature_norms(g, m);
    EXPECT_NEAR(a.sup, b.sup, 1e-10);
    EXPECT_NEAR(a.l2, b.l2, 1e-10);
    for (std::size_t k = 0; k < s.faces.size(); ++k)
        EXPECT_NEAR(plaquette_log(f, static_cast<int>(k)).norm(), plaquette_log(g, static_cast<int>(k)).norm(), 1e-12);
    for (const auto& [name, p] : s.loops)
        EXPECT_NEAR(su2_trace(holonomy_loop(f, p)), su2_trace(holonomy_loop(g, p)), 1e-12) << name;
}

TEST(Field, HolonomyAroundCylinderCore) {
    const auto s = build_cylinder(8, 16);
    LinkField f = identity_field(s);
    const Path& core = s.pinching_curves[0];
    for (const auto& d : core.steps) f.links[d.e] = su2_diag_phase(d.s * 2.0 * M_PI * 0.25 / 16);
    EXPECT_NEAR(su2_trace(holonomy_loop(f, core)), 0.0, 1e-14);
    EXPECT_EQ(su2_trace(holonomy_loop(identity_field(s), core)), 2.0);
    Path broken = core;
    std::swap(broken.steps[0], broken.steps[1]);
    EXPECT_THROW(holonomy_loop(f, broken), PathError);
}

TEST(Field, BranchErrorAtMinusIdentity) {
    EXPECT_THROW(su2_log(Su2d(-1, 0, 0, 0)), BranchError);
    EXPECT_NO_THROW(su2_log(Su2d(std::cos(3.0), std::sin(3.0), 0, 0)));
}

TEST(Field, TrivialRepresentationGivesIdentityLinks) {
    const auto s = build_surface({"torus", 8});
    Representation r;
    r.loops["a"] = su2_identity<double>();
    r.loops["b"] = su2_identity<double>();
    const auto f = connection_from_representation(r, s);
    for (const auto& u : f.links) EXPECT_EQ(su2_distance(u, su2_identity<double>()), 0.0);
}

TEST(Field, AbelianTorusRepIsFlatWithCommutingHolonomy) {
    const auto s = build_surface({"torus", 8});
    Representation r;
    r.loops["a"] = su2_diag_phase(0.4);
    r.loops["b"] = su2_diag_phase(-1.1);
    const auto f = connection_from_representation(r, s);
    const auto m = metric_for(s, 1.0, 1.0);
    EXPECT_LT(curvature_norms(f, m).sup, 1e-12);
    const Su2d A = holonomy_loop(f, s.loops.at("a")), B = holonomy_loop(f, s.loops.at("b"));
    EXPECT_LT(su2_distance(A * B, B * A), 1e-13);
    EXPECT_NEAR(su2_diag_angle(A), 0.4, 1e-13);
    // Non-commuting pair violates the closed-torus relation.
    r.loops["b"] = rot(0.7, Algd::UnitX());
    EXPECT_THROW(connection_from_representation(r, s), RepresentationError);
    EXPECT_GT(relation_residual(r, s), 0.1);
}

TEST(Field, PuncturedTorusRoundTrip) {
    const auto s = build_surface({"one_holed_torus_punctured", 16});
    const auto rep = punctured_torus_rep(s, 0.3);
    EXPECT_NEAR(su2_trace(rep.loops.at("p")), 2.0 * std::cos(0.6 * M_PI), 1e-10);
    // The puncture loop realizes the commutator of the generators.
    const Su2d& a = rep.loops.at("a");
    const Su2d& b = rep.loops.at("b");
    EXPECT_LT(su2_distance(Su2d(a * b * a.conjugate() * b.conjugate()), rep.loops.at("p")), 1e-12);

    const Su2d g = rot(1.3, Algd(1, 2, 3));
    const auto field = connection_from_representation(conjugate(rep, g), s);
    EXPECT_LT(curvature_norms(field, metric_for(s, 1.0, 1.0)).sup, 1e-9);
    const auto back = extract_representation(field);
    const std::vector<std::string> names{"a", "b", "p"};
    EXPECT_LT(trace_distance(conjugacy_invariants(back, names), conjugacy_invariants(rep, names)), 1e-10);
    EXPECT_LT(relation_residual(rep, s), 1e-12);
}

TEST(Field, Genus2Relations) {
    const auto s = build_surface({"genus2_separating_pinch", 16, 2, 8});
    const auto rep = genus2_irreducible_rep(s, 0.3);
    EXPECT_NEAR(su2_trace(rep.loops.at("p")), 2.0 * std::cos(0.6 * M_PI), 1e-10);
    const auto field = connection_from_representation(rep, s);
    EXPECT_LT(curvature_norms(field, metric_for(s, 0.5, 1.0)).sup, 1e-9);
    // The separating loop equals a commutator on the second handle.
    const Su2d& a2 = rep.loops.at("a2");
    const Su2d& b2 = rep.loops.at("b2");
    const double tc = su2_trace(rep.loops.at("c"));
    EXPECT_NEAR(tc, su2_trace(Su2d(a2 * b2 * a2.conjugate() * b2.conjugate())), 1e-10);
    const auto ar = accidental_reducibility(rep, s);
    EXPECT_TRUE(ar.globally_irreducible);
    EXPECT_FALSE(ar.accidental);

    const auto acc = genus2_accidental_rep(s);
    EXPECT_LT(su2_distance(acc.loops.at("c"), su2_identity<double>()), 1e-12);
    const auto aa = accidental_reducibility(acc, s);
    EXPECT_TRUE(aa.globally_irreducible);
    EXPECT_TRUE(aa.accidental);
}

TEST(Field, TwistProfileShape) {
    const auto p = twist_profile(0.3, 0.2);
    EXPECT_EQ(p.a(0.1), 0.2);
    EXPECT_EQ(p.a(1.0 / 6.0), 0.2);
    EXPECT_EQ(p.a(0.34), 0.3);
    for (double r = 0.17; r < 0.33; r += 0.01) {
        const double h = 1e-6;
        EXPECT_NEAR(p.a_prime(r), (p.a(r + h) - p.a(r - h)) / (2 * h), 1e-6);
    }
    const double I = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double r) { return p.a_prime(r); }, 1.0 / 6.0, 1.0 / 3.0, 10, 1e-14);
    // a runs from beta inside to alpha outside.
    EXPECT_NEAR(I, 0.3 - 0.2, 1e-12);
    EXPECT_THROW(twist_profile(0.6, 0.2), std::invalid_argument);
}

TEST(Field, StandardFormAndTwist) {
    const auto s = build_surface({"one_holed_torus_punctured", 32});
    const auto m = metric_for(s, 1.0, 1.0);
    const auto rep = punctured_torus_rep(s, 0.3);
    const auto flat = connection_from_representation(rep, s);
    EXPECT_THROW(apply_twist(flat, twist_profile(0.3, 0.2)), StandardFormError);

    const auto sf = standard_form(flat);
    EXPECT_NEAR(sf.alpha, 0.3, 1e-12);
    EXPECT_EQ(apply_twist(sf.field, twist_profile(0.3, 0.3)).links, sf.field.links);

    const auto tw = apply_twist(sf.field, twist_profile(0.3, 0.2));
    EXPECT_NEAR(su2_trace(holonomy_loop(tw, s.loops.at("p"))), 2.0 * std::cos(0.4 * M_PI), 1e-10);
    // Generator traces outside the disk are unchanged.
    EXPECT_NEAR(su2_trace(holonomy_loop(tw, s.loops.at("a"))), su2_trace(rep.loops.at("a")), 1e-12);

    const auto& pc = s.punctures[0];
    double flux = 0.0;
    for (std::size_t f = 0; f < s.faces.size(); ++f) {
        if (!m.face_active[f]) continue;
        const Algd L = plaquette_log(tw, static_cast<int>(f));
        double rmin = 1e9, rmax = 0;
        for (int v : s.faces[f].v) {
            const double r = (s.vertex_xy(v) - Eigen::Vector2d(pc.cx, pc.cy)).norm();
            rmin = std::min(rmin, r);
            rmax = std::max(rmax, r);
        }
        if (rmax < 1.0 / 6.0 || rmin > 1.0 / 3.0) EXPECT_LT(L.norm(), 1e-12);
        if (rmax < kStandardDiskRadius) {
            EXPECT_LT(std::hypot(L.x(), L.y()), 1e-12);
            flux += -L.z();  // diagonal angle of the plaquette log
        }
    }
    // Lattice Stokes: the annulus carries the full change of puncture angle.
    EXPECT_NEAR(flux, 2.0 * M_PI * (0.3 - 0.2), 1e-10);
}

TEST(Field, ReducibilityExamples) {
    EXPECT_EQ(reducibility({su2_diag_phase(0.3), su2_diag_phase(1.0)}).kind, Reducibility::reducible);
    const auto irr = reducibility({rot(M_PI / 4, Algd::UnitZ()), rot(M_PI / 4, Algd::UnitX())});
    EXPECT_EQ(irr.kind, Reducibility::irreducible);
    EXPECT_EQ(irr.commutant_dim, 1);
    EXPECT_EQ(reducibility({su2_identity<double>(), Su2d(-1, 0, 0, 0)}).kind, Reducibility::central);
    EXPECT_EQ(reducibility({su2_identity<double>(), Su2d(-1, 0, 0, 0)}).commutant_dim, 4);
    // Conjugation invariance and tolerance stability by a factor 10 either way.
    const Su2d g = rot(0.8, Algd(1, -1, 2));
    for (double tol : {1e-10, 1e-9, 1e-8}) {
        EXPECT_EQ(reducibility({g * su2_diag_phase(0.3) * g.conjugate(), g * su2_diag_phase(1.0) * g.conjugate()}, tol).kind,
                  Reducibility::reducible);
        EXPECT_EQ(reducibility({rot(M_PI / 4, Algd::UnitZ()), rot(M_PI / 4, Algd::UnitX())}, tol).kind,
                  Reducibility::irreducible);
    }
}

TEST(Field, ConjugacyInvariantsSeparatePairs) {
    Representation r1, r2, triv;
    r1.loops["x"] = rot(M_PI / 2, Algd::UnitX());
    r1.loops["y"] = rot(M_PI / 2, Algd::UnitY());
    r2.loops["x"] = rot(M_PI / 2, Algd::UnitX());
    r2.loops["y"] = rot(M_PI / 2, Algd::UnitX());
    triv.loops["x"] = triv.loops["y"] = su2_identity<double>();
    const std::vector<std::string> n{"x", "y"};
    const auto v1 = conjugacy_invariants(r1, n), v2 = conjugacy_invariants(r2, n);
    EXPECT_NEAR(v1[0], v2[0], 1e-15);
    EXPECT_NEAR(v1[1], v2[1], 1e-15);
    EXPECT_GT(std::abs(v1[2] - v2[2]), 1.0);
    for (double t : conjugacy_invariants(triv, n)) EXPECT_EQ(t, 2.0);
    EXPECT_LT(trace_distance(conjugacy_invariants(conjugate(r1, rot(2.0, Algd(3, 1, 0))), n), v1), 1e-12);
}
