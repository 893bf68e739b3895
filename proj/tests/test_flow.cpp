#include "ymlab/flow.hpp"

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

std::vector<Algd> random_direction(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> n01;
    std::vector<Algd> xi(n);
    for (auto& x : xi) x = Algd(n01(rng), n01(rng), n01(rng));
    return xi;
}

// Largest relative gap between the analytic differential and a central difference.
double worst_gradient_error(const LinkField& U, const MetricGrid& m, int directions, unsigned seed) {
    const auto d = ym_differential(U, m);
    std::mt19937_64 rng(seed);
    const double h = 1e-5;
    double worst = 0.0;
    for (int k = 0; k < directions; ++k) {
        const auto xi = random_direction(U.links.size(), rng);
        double pairing = 0.0;
        for (std::size_t e = 0; e < xi.size(); ++e) pairing += d[e].dot(xi[e]);
        const double fd = (ym_action(step_links(U, xi, h), m) - ym_action(step_links(U, xi, -h), m)) / (2 * h);
        worst = std::max(worst, std::abs(fd - pairing) / std::abs(pairing));
    }
    return worst;
}

struct TwistSetup {
    SurfaceComplex s;
    MetricGrid m;
    LinkField flat, twisted;
};

std::unique_ptr<TwistSetup> twist_setup(int n, double alpha, double beta) {
    auto t = std::make_unique<TwistSetup>();
    t->s = build_surface({"one_holed_torus_punctured", n});
    t->m = metric_for(t->s, 1.0, 1.0);
    t->flat = standard_form(connection_from_representation(punctured_torus_rep(t->s, alpha), t->s)).field;
    t->twisted = apply_twist(t->flat, twist_profile(alpha, beta));
    return t;
}

}  // namespace

TEST(Flow, FlatFieldIsCritical) {
    const auto s = build_surface({"one_holed_torus_punctured", 16});
    const auto m = metric_for(s, 1.0, 1.0);
    const auto U = connection_from_representation(punctured_torus_rep(s, 0.3), s);
    EXPECT_LT(ym_action(U, m), 1e-20);
    for (const auto& g : ym_gradient(U, m, frozen_edges(s, m))) EXPECT_LT(g.norm(), 1e-10);
    const auto res = flow_to_flat(U, m, {});
    EXPECT_TRUE(res.diag.converged);
    EXPECT_EQ(res.diag.steps, 0);
    EXPECT_EQ(res.field.links, U.links);
}

TEST(Flow, GradientMatchesCentralDifferences) {
    const auto s = build_surface({"torus", 16});
    const auto m = metric_for(s, 1.0, 1.0);
    EXPECT_LE(worst_gradient_error(random_field(s, 3, 0.3), m, 20, 11), 1e-6);
}

TEST(Flow, GradientMatchesCentralDifferencesOnConicCylinder) {
    const auto s = build_surface({"genus2_separating_pinch", 12, 2, 8});
    for (double ell : {0.5, 0.0}) {
        const auto m = metric_for(s, ell, 0.8);
        EXPECT_LE(worst_gradient_error(random_field(s, 5, 0.25), m, 5, 13), 1e-6) << ell;
    }
}

TEST(Flow, GradientIsMetricDual) {
    // <grad, xi>_g = sum 4 w_e grad_e . xi_e reproduces the differential.
    const auto s = build_surface({"torus", 8});
    const auto m = metric_for(s, 1.0, 1.0);
    const auto U = random_field(s, 9, 0.4);
    const auto d = ym_differential(U, m);
    const auto g = ym_gradient(U, m, std::vector<std::uint8_t>(s.edges.size(), 0));
    for (std::size_t e = 0; e < d.size(); ++e) EXPECT_LT((4 * m.edge_weight[e] * g[e] - d[e]).norm(), 1e-12);
}

TEST(Flow, TwistedActionMatchesRadialQuadrature) {
    // Abelian curvature density a'(r)/r gives YM = 4 pi int a'(r)^2 / r dr.
    const auto prof = twist_profile(0.3, 0.2);
    auto f = [&](double r) { return prof.a_prime(r) * prof.a_prime(r) / r; };
    const double exact = 4 * M_PI *
                         boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 1.0 / 6, 1.0 / 3, 12, 1e-14);
    std::vector<double> err;
    for (int n : {32, 64}) {
        const auto t = twist_setup(n, 0.3, 0.2);
        err.push_back(std::abs(ym_action(t->twisted, t->m) - exact));
    }
    EXPECT_LT(err[1], 0.05 * exact);
    EXPECT_GT(err[0] / err[1], 3.0);
}

TEST(Flow, TwistedActionQuadraticInWeightChange) {
    const auto full = twist_setup(32, 0.3, 0.2);
    const auto half = apply_twist(full->flat, twist_profile(0.3, 0.25));
    EXPECT_NEAR(ym_action(full->twisted, full->m) / ym_action(half, full->m), 4.0, 1e-9);
}

TEST(Flow, TwistFlowPreservesPunctureConjugacyClass) {
    const auto t = twist_setup(32, 0.3, 0.2);
    const auto res = flow_to_flat(t->twisted, t->m, {});
    ASSERT_TRUE(res.diag.converged);
    EXPECT_LE(res.diag.samples.back().sup_f, 1e-6);
    EXPECT_NEAR(su2_trace(holonomy_loop(res.field, t->s.loops.at("p"))), 2 * std::cos(0.4 * M_PI), 1e-4);
    for (std::size_t i = 1; i < res.diag.samples.size(); ++i)
        EXPECT_LE(res.diag.samples[i].ym, res.diag.samples[i - 1].ym + 1e-12);
    const auto fit = decay_fit(res.diag, 0.3);
    EXPECT_GT(fit.rate, 0.0);
    EXPECT_GE(fit.r_squared, 0.99);
    // Tail-length robustness.
    EXPECT_LT(std::abs(decay_fit(res.diag, 0.6).rate / fit.rate - 1.0), 0.05);
}

TEST(Flow, Rk4AgreesWithEuler) {
    const auto t = twist_setup(16, 0.3, 0.2);
    FlowConfig cfg;
    cfg.integrator = Integrator::rk4;
    const auto rk = flow_to_flat(t->twisted, t->m, cfg);
    const auto eu = flow_to_flat(t->twisted, t->m, {});
    ASSERT_TRUE(rk.diag.converged);
    const std::vector<std::string> names{"a", "b", "p"};
    EXPECT_LT(trace_distance(conjugacy_invariants(extract_representation(rk.field), names),
                             conjugacy_invariants(extract_representation(eu.field), names)),
              1e-4);
}

TEST(Flow, GlobalGaugeCommutesWithFlow) {
    const auto t = twist_setup(16, 0.3, 0.2);
    GaugeField g(t->s.num_vertices, su2_exp<double>(Algd(0.3, -1.1, 0.7)));
    const auto a = flow_to_flat(gauge_transform(t->twisted, g), t->m, {});
    const auto b = flow_to_flat(t->twisted, t->m, {});
    const std::vector<std::string> names{"a", "b", "p"};
    EXPECT_LT(trace_distance(conjugacy_invariants(extract_representation(a.field), names),
                             conjugacy_invariants(extract_representation(b.field), names)),
              1e-8);
}

TEST(Flow, TimeoutCarriesDiagnostics) {
    const auto t = twist_setup(16, 0.3, 0.2);
    FlowConfig cfg;
    cfg.t_max = 1e-3;
    const auto res = flow_to_flat(t->twisted, t->m, cfg);
    EXPECT_TRUE(res.diag.timed_out);
    EXPECT_FALSE(res.diag.converged);
    EXPECT_GT(res.diag.samples.size(), 1u);
    cfg.dt = 0.0;
    EXPECT_THROW(flow_to_flat(t->twisted, t->m, cfg), std::invalid_argument);
}

TEST(Flow, RadeRatio) {
    const auto s = build_surface({"one_holed_torus_punctured", 16});
    const auto m = metric_for(s, 1.0, 1.0);
    const auto flat = connection_from_representation(punctured_torus_rep(s, 0.3), s);
    EXPECT_THROW(rade_ratio(flat, m, 0.0), std::domain_error);
    std::mt19937_64 rng(4);
    auto xi = random_direction(flat.links.size(), rng);
    const auto fz = frozen_edges(s, m);
    for (std::size_t e = 0; e < xi.size(); ++e)
        if (fz[e]) xi[e].setZero();
    const auto pert = step_links(flat, xi, 1e-3);
    const double r = rade_ratio(pert, m, 0.0);
    EXPECT_GT(r, 0.0);
    const auto g = random_gauge(s.num_vertices, 21);
    EXPECT_NEAR(rade_ratio(gauge_transform(pert, g), m, 0.0), r, 1e-10 * r);
}

TEST(Flow, DecayFitOnSyntheticSeries) {
    std::vector<double> t, y;
    for (int k = 0; k < 50; ++k) {
        t.push_back(0.1 * k);
        y.push_back(3.0 * std::exp(-0.1 * k));
    }
    const auto fit = decay_fit(t, y, 0.5);
    EXPECT_NEAR(fit.rate, 1.0, 1e-6);
    EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
    y.back() = 0.0;
    EXPECT_THROW(decay_fit(t, y, 0.5), std::invalid_argument);
    EXPECT_THROW(decay_fit(t, y, 0.1), std::invalid_argument);
}
