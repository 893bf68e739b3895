#include "ymlab/foliation.hpp"

#include <gtest/gtest.h>

using namespace ymlab;

namespace {

FoliationPoint torus_point(const SurfaceComplex& s, double alpha) { return {punctured_torus_rep(s, alpha), alpha}; }

double invariant_distance(const Representation& a, const Representation& b, const SurfaceComplex& s) {
    const auto names = trace_names(s);
    return trace_distance(conjugacy_invariants(a, names), conjugacy_invariants(b, names));
}

}  // namespace

TEST(Foliation, EqualWeightsGiveTheIdentity) {
    const auto s = build_surface({"one_holed_torus_punctured", 16});
    const auto p = torus_point(s, 0.3);
    const auto run = pi_ab_run(p, 0.3, s);
    EXPECT_EQ(run.diag.steps, 0);
    EXPECT_LE(invariant_distance(run.rep, p.rep, s), 1e-8);
}

TEST(Foliation, OutputCarriesTargetWeightAndIsEquivariant) {
    const auto s = build_surface({"one_holed_torus_punctured", 16});
    const auto p = torus_point(s, 0.3);
    const auto out = pi_ab(p, 0.22, s);
    EXPECT_NEAR(su2_trace(out.loops.at("p")), 2 * std::cos(2 * M_PI * 0.22), 1e-3);
    FoliationPoint q = p;
    q.rep = conjugate(p.rep, su2_exp<double>(Algd(0.7, -0.2, 1.1)));
    EXPECT_LE(invariant_distance(pi_ab(q, 0.22, s), out, s), 1e-8);
}

TEST(Foliation, InputValidation) {
    const auto s = build_surface({"one_holed_torus_punctured", 8});
    auto p = torus_point(s, 0.3);
    EXPECT_THROW(pi_ab(p, 0.5, s), FoliationError);
    EXPECT_THROW(pi_ab(p, 0.0, s), FoliationError);
    p.alpha = 0.25;
    EXPECT_THROW(pi_ab(p, 0.2, s), FoliationError);
}

TEST(Foliation, CompositionOfTwistMaps) {
    std::vector<double> d;
    for (int n : {16, 32}) {
        const auto s = build_surface({"one_holed_torus_punctured", n});
        d.push_back(composition_check(torus_point(s, 0.35), 0.3, 0.25, s));
    }
    EXPECT_LE(d[1], 1e-3);
    EXPECT_LT(d[1], d[0]);
    const auto s = build_surface({"one_holed_torus_punctured", 16});
    EXPECT_LE(composition_check(torus_point(s, 0.35), 0.3, 0.3, s), 1e-8);
    EXPECT_THROW(composition_check(torus_point(s, 0.35), 0.25, 0.3, s), FoliationError);
}

TEST(Foliation, LeafSweepContinuity) {
    const auto s = build_surface({"one_holed_torus_punctured", 16});
    const auto p = torus_point(s, 0.3);
    const auto flat = leaf_sweep(p, {0.3, 0.3, 0.3}, s);
    for (double d : flat.step_distance) EXPECT_LE(d, 1e-12);

    const auto leaf = leaf_sweep(p, {0.34, 0.32, 0.3, 0.28, 0.26, 0.24}, s);
    ASSERT_EQ(leaf.reps.size(), 6u);
    // One Lipschitz constant covers every step; second differences stay bounded.
    for (std::size_t i = 0; i < leaf.step_distance.size(); ++i) EXPECT_LE(leaf.step_distance[i], leaf.lipschitz * 0.02 + 1e-12);
    EXPECT_LT(leaf.lipschitz, 50.0);
    EXPECT_LT(leaf.max_second_difference, 200.0);
    EXPECT_THROW(leaf_sweep(p, {0.3, 0.2}, s), FoliationError);
}

TEST(Foliation, AbelianSectorMatchesPoissonLimit) {
    // Diagonal generators commute, so the puncture is trivial; a twist to
    // weight beta stays diagonal and relaxes to constant curvature density.
    const auto s = build_surface({"one_holed_torus_punctured", 16});
    const auto m = metric_for(s, 1.0, 1.0);
    Representation gens;
    gens.loops["a"] = su2_diag_phase(0.7);
    gens.loops["b"] = su2_diag_phase(-0.4);
    const auto rep = complete_representation(gens, s);
    const auto sf = standard_form(connection_from_representation(rep, s));
    FlowConfig cfg;
    cfg.t_max = 30.0;
    std::vector<double> angle_a;
    for (double beta : {0.02, 0.04, 0.06}) {
        const auto twisted = apply_twist(sf.field, twist_profile(0.0, beta));
        const auto oracle = abelian_limit(twisted, m);
        const auto flowed = flow_to_flat(twisted, m, cfg).field;
        for (const char* name : {"a", "b", "p"}) {
            const auto& path = s.loops.at(name);
            EXPECT_LT(su2_distance(holonomy_loop(flowed, path), holonomy_loop(oracle, path)), 1e-6) << name;
        }
        angle_a.push_back(su2_diag_angle(holonomy_loop(oracle, s.loops.at("a"))));
    }
    // Trace coordinates move monotonically with the weight.
    EXPECT_TRUE((angle_a[0] < angle_a[1] && angle_a[1] < angle_a[2]) ||
                (angle_a[0] > angle_a[1] && angle_a[1] > angle_a[2]));
    EXPECT_THROW(abelian_limit(connection_from_representation(punctured_torus_rep(s, 0.3), s), m), FoliationError);
}

TEST(Foliation, NodalFlowMovesOnlyThePunctureComponent) {
    const auto s = build_surface({"genus2_separating_pinch", 16, 2, 8});
    const FoliationPoint p{genus2_irreducible_rep(s, 0.3), 0.3};
    const auto res = nodal_pi_ab(p, 0.25, s);
    EXPECT_GT(res.twisted_lambda1, 1e-4);
    const auto m0 = metric_for(s, 0.0, 1.0);
    const int pc = puncture_component(s, m0);
    double moved_elsewhere = 0.0;
    for (std::size_t e = 0; e < s.edges.size(); ++e) {
        const int c0 = m0.component[s.edges[e].v0];
        if (c0 >= 0 && c0 != pc)
            moved_elsewhere =
                std::max(moved_elsewhere, (res.run.field.links[e].coeffs() - res.run.initial.links[e].coeffs()).norm());
    }
    EXPECT_LT(moved_elsewhere, 1e-12);
    for (const Path& c : s.pinching_curves)
        EXPECT_NEAR(su2_trace(holonomy_loop(res.run.field, c)), su2_trace(holonomy_loop(res.run.initial, c)), 1e-10);
    EXPECT_NEAR(su2_trace(res.run.rep.loops.at("p")), 0.0, 1e-3);
}

TEST(Foliation, AccidentallyReducibleInputIsRefused) {
    const auto s = build_surface({"genus2_separating_pinch", 12, 2, 8});
    const FoliationPoint p{genus2_accidental_rep(s), 0.0};
    EXPECT_THROW(nodal_pi_ab(p, 0.2, s), AccidentalReducibilityError);
    EXPECT_THROW(degeneration_experiment(p, 0.2, {0.4, 0.2}, s), AccidentalReducibilityError);
}

TEST(Foliation, DegenerationConvergesToNodalLimit) {
    const auto s = build_surface({"genus2_separating_pinch", 16, 2, 8});
    const FoliationPoint p{genus2_irreducible_rep(s, 0.3), 0.3};
    const auto rep = degeneration_experiment(p, 0.25, {0.4, 0.2, 0.1, 0.05}, s);
    ASSERT_EQ(rep.rows.size(), 4u);
    EXPECT_TRUE(rep.distances_decrease);
    EXPECT_LE(rep.final_distance, 0.02);
    EXPECT_LE(rep.final_transverse, 0.05);
    for (const auto& row : rep.rows) {
        EXPECT_NEAR(row.puncture_trace, 0.0, 1e-3);
        EXPECT_LE(row.pinch_drift, 1e-3) << row.ell;
    }
    EXPECT_THROW(degeneration_experiment(p, 0.25, {0.2, 0.4}, s), FoliationError);
}
