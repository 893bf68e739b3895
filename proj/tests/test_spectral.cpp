#include "ymlab/spectral.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

using namespace ymlab;

namespace {

LinkField random_field(const SurfaceComplex& s, unsigned seed, double spread) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01;
    LinkField f = identity_field(s);
    for (auto& u : f.links) u = su2_exp<double>(spread * Algd(n01(rng), n01(rng), n01(rng)));
    return f;
}

// (2 pi)^2 (m^2 + n^2) for the unit flat torus, ascending with multiplicity.
std::vector<double> flat_torus_spectrum(int count) {
    std::vector<double> v;
    for (int m = -6; m <= 6; ++m)
        for (int n = -6; n <= 6; ++n) v.push_back(4 * M_PI * M_PI * (m * m + n * n));
    std::sort(v.begin(), v.end());
    v.resize(count);
    return v;
}

double torus_spectrum_error(int n, int count) {
    const auto s = build_surface({"torus", n});
    const auto sp = eigensolve(assemble_laplacian(s, metric_for(s, 1.0, 1.0), Boundary::closed), count);
    const auto ex = flat_torus_spectrum(count);
    double e = 0.0;
    for (int i = 0; i < count; ++i) e = std::max(e, std::abs(sp.values(i) - ex[i]));
    return e;
}

Eigen::VectorXd random_vector(Eigen::Index n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Eigen::VectorXd v(n);
    for (auto& x : v) x = nd(rng);
    return v;
}

}  // namespace

TEST(Spectral, FlatTorusFunctionsConvergeQuadratically) {
    const double e16 = torus_spectrum_error(16, 13), e32 = torus_spectrum_error(32, 13);
    EXPECT_LT(e32, 0.02 * 4 * M_PI * M_PI * 4);
    EXPECT_GT(std::log2(e16 / e32), 1.9);
}

TEST(Spectral, TrivialAdjointIsThreeCopies) {
    const auto s = build_surface({"torus", 12});
    const auto m = metric_for(s, 1.0, 1.0);
    const auto f = eigensolve(assemble_laplacian(s, m, Boundary::closed), 6);
    const auto a = eigensolve(assemble_laplacian(identity_field(s), m, Bundle::adjoint, Boundary::closed), 18);
    for (int i = 0; i < 18; ++i) EXPECT_NEAR(a.values(i), f.values(i / 3), 1e-8);
}

TEST(Spectral, SelfAdjointAndPositive) {
    const auto s = build_surface({"genus2_separating_pinch", 12, 2, 8});
    const auto m = metric_for(s, 0.3, 0.7);
    for (Bundle b : {Bundle::functions, Bundle::adjoint}) {
        const auto L = assemble_laplacian(random_field(s, 2, 0.5), m, b, Boundary::closed);
        for (unsigned k = 0; k < 5; ++k) {
            const auto u = random_vector(L.size(), 10 + k), v = random_vector(L.size(), 20 + k);
            const double uv = L.inner(L.apply(u), v), vu = L.inner(u, L.apply(v));
            EXPECT_NEAR(uv, vu, 1e-12 * std::max(1.0, std::abs(uv)));
            EXPECT_GE(L.inner(L.apply(u), u), 0.0);
        }
    }
}

TEST(Spectral, EigenpairQuality) {
    const auto s = build_surface({"one_holed_torus_punctured", 16});
    const auto m = metric_for(s, 1.0, 1.0);
    const auto U = connection_from_representation(punctured_torus_rep(s, 0.3), s);
    const auto L = assemble_laplacian(U, m, Bundle::adjoint, Boundary::closed);
    const auto sp = eigensolve(L, 20);
    EXPECT_LE(sp.max_residual, 1e-8);
    EXPECT_LE(sp.orthonormality_error, 1e-10);
    EXPECT_GT(sp.values(0), 0.0);  // irreducible: no covariantly constant sections
    // Dense reference.
    EigenOptions dense;
    dense.dense_threshold = 1 << 30;
    const auto ref = eigensolve(L, static_cast<int>(L.size() / 2) + 1, dense);
    for (int i = 0; i < 20; ++i) EXPECT_NEAR(sp.values(i), ref.values(i), 1e-8);
}

TEST(Spectral, AdjointKernelMatchesCommutant) {
    struct Case {
        SurfaceComplex s;
        Representation rep;
    };
    std::vector<Case> cases;
    {
        auto s = build_surface({"torus", 12});
        Representation r;
        r.loops["a"] = su2_diag_phase(0.4);
        r.loops["b"] = su2_diag_phase(-1.1);
        cases.push_back({s, r});
        Representation t;
        t.loops["a"] = t.loops["b"] = su2_identity<double>();
        cases.push_back({s, t});
    }
    {
        auto s = build_surface({"one_holed_torus_punctured", 12});
        auto r = punctured_torus_rep(s, 0.3);
        cases.push_back({s, r});
    }
    {
        auto s = build_surface({"genus2_separating_pinch", 12, 2, 8});
        cases.push_back({s, genus2_irreducible_rep(s, 0.3)});
        cases.push_back({s, genus2_accidental_rep(s)});
    }
    for (auto& c : cases) {
        const auto U = connection_from_representation(c.rep, c.s);
        const auto L = assemble_laplacian(U, metric_for(c.s, 0.5, 1.0), Bundle::adjoint, Boundary::closed);
        const auto sp = eigensolve(L, 6);
        std::vector<Su2d> gens;
        for (const auto& g : c.s.generators) gens.push_back(c.rep.loops.at(g));
        EXPECT_EQ(kernel_dimension(sp, 1e-8), reducibility(gens).commutant_dim - 1) << c.s.topology;
    }
}

TEST(Spectral, Lambda1Sweep) {
    const auto s = build_surface({"genus2_separating_pinch", 16, 2, 8});
    const std::vector<double> ells{0.4, 0.2, 0.1, 0.05};
    const auto irr = genus2_irreducible_rep(s, 0.3);
    const auto a = lambda1_sweep(irr, s, ells);
    for (const auto& p : a) EXPECT_GE(p.lambda1, 1e-3);
    const auto b = lambda1_sweep(conjugate(irr, su2_exp<double>(Algd(0.2, 0.9, -0.4))), s, ells);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i].lambda1, b[i].lambda1, 1e-10);
    EXPECT_THROW(lambda1_sweep(irr, s, {0.1, 0.2}), std::invalid_argument);

    // Accidentally reducible: lambda_1 collapses as the pinch closes (only
    // logarithmically in ell, so probe far down).
    const auto acc = lambda1_sweep(genus2_accidental_rep(s), s, {1e-2, 1e-4, 1e-8});
    EXPECT_GT(acc[0].lambda1, acc[1].lambda1);
    EXPECT_GT(acc[1].lambda1, acc[2].lambda1);
    const auto at0 = lambda1_sweep(genus2_accidental_rep(s), s, {0.0});
    EXPECT_LT(at0[0].lambda1, 1e-10);
    EXPECT_EQ(at0[0].components, 2);
}

TEST(Spectral, ConvergenceAsPinchCloses) {
    // Modes above the component count converge as ell -> 0.
    const auto s = build_surface({"genus2_separating_pinch", 16, 2, 8});
    std::vector<double> lam;
    for (double ell : {0.002, 0.001}) {
        const auto sp = eigensolve(assemble_laplacian(s, metric_for(s, ell, 1.0), Boundary::closed), 4);
        lam.push_back(sp.values(2));
    }
    EXPECT_LT(std::abs(lam[0] - lam[1]) / lam[1], 0.02);
}

TEST(Spectral, SupBoundAudit) {
    auto C_at = [](int n) {
        const auto s = build_surface({"torus", n});
        const auto m = metric_for(s, 1.0, 1.0);
        const auto sp = eigensolve(assemble_laplacian(s, m, Boundary::closed), 12);
        const auto sob = estimate_sobolev(s, m, SobolevMode::s1);
        const auto rep = sup_bound_audit(sp, m.total_area, sob);
        EXPECT_NEAR(rep.per_mode[0], 1.0, 1e-10);  // constant mode
        return rep.C;
    };
    const double c16 = C_at(16), c32 = C_at(32);
    EXPECT_LT(std::max(c16, c32) / std::min(c16, c32), 2.0);

    const auto fit = fit_uniform_sup({0.0, 2.0, 5.0}, {1.0, 1.5, 3.0});
    EXPECT_TRUE(fit.holds);
    EXPECT_DOUBLE_EQ(fit.C1, 1.0);
}

TEST(Spectral, GrowthAudit) {
    const auto s = build_surface({"torus", 16});
    const auto m = metric_for(s, 1.0, 1.0);
    const auto sp = eigensolve(assemble_laplacian(s, m, Boundary::closed), 30);
    const auto sob = estimate_sobolev(s, m, SobolevMode::s1);
    const auto g = growth_audit(sp, 1, m.total_area, sob, Boundary::closed);
    EXPECT_GT(g.C, 0.0);
    EXPECT_GT(g.C_lower, 1.0);  // Weyl growth dominates k^{1/3}
    const auto c = build_cylinder(16, 16);
    for (double ell : {0.8, 0.2, 0.05}) {
        const auto mc = metric_for(c, ell, 1.0);
        const auto spd = eigensolve(assemble_laplacian(c, mc, Boundary::dirichlet), 12);
        const auto sd = estimate_sobolev(c, mc, SobolevMode::s2);
        const auto gd = growth_audit(spd, 1, mc.total_area, sd, Boundary::dirichlet);
        EXPECT_GT(gd.C_lower, 0.5) << ell;
    }
    EXPECT_THROW(growth_audit(sp, 1, m.total_area, SobolevEstimate{}, Boundary::closed), std::invalid_argument);
}

TEST(Spectral, KatoEqualityForParallelSections) {
    // Abelian connection, section along the fixed weight direction z with positive profile.
    const auto s = build_surface({"torus", 32});
    const auto m = metric_for(s, 1.0, 1.0);
    Representation r;
    r.loops["a"] = su2_diag_phase(0.7);
    r.loops["b"] = su2_diag_phase(0.2);
    const auto L = assemble_laplacian(connection_from_representation(r, s), m, Bundle::adjoint, Boundary::closed);
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(L.size());
    for (int b = 0; b < L.blocks(); ++b) {
        const auto p = s.vertex_xy(L.block_vertex[b]);
        phi(3 * b + 2) = 2.0 + std::sin(2 * M_PI * p.x()) * std::cos(2 * M_PI * p.y());
    }
    for (double alpha : {2.0, 4.0}) {
        const auto k = kato_and_key_estimate_check(L, phi, alpha);
        EXPECT_TRUE(k.holds);
        EXPECT_NEAR(k.lhs / k.rhs, 1.0, 0.05) << alpha;
    }
}

TEST(Spectral, KatoInequalityOnRandomSections) {
    const auto s = build_surface({"one_holed_torus_punctured", 16});
    const auto m = metric_for(s, 1.0, 1.0);
    const auto L = assemble_laplacian(random_field(s, 8, 0.3), m, Bundle::adjoint, Boundary::closed);
    BandLimitedSampler sampler(s, m, Boundary::closed);
    std::mt19937_64 rng(17);
    for (int t = 0; t < 100; ++t) {
        const auto phi = sampler.section(rng, L);
        for (double alpha : {2.0, 4.0, 1.0 + 1e-9}) EXPECT_TRUE(kato_and_key_estimate_check(L, phi, alpha).holds);
    }
    EXPECT_THROW(kato_and_key_estimate_check(L, Eigen::VectorXd::Zero(L.size()), 1.0), std::invalid_argument);
}

TEST(Spectral, ProductBound) {
    EXPECT_EQ(log_product(0.0, 2.0, 40), 0.0);
    EXPECT_TRUE(product_bound_check(0.0, 2.0, 40).holds);
    for (double g : {0.1, 1.0, 10.0}) {
        const auto r = product_bound_check(g, 2.0, 40);
        EXPECT_TRUE(r.holds) << g;
        EXPECT_TRUE(std::isfinite(r.lhs));
        EXPECT_LT(std::abs(log_product(g, 2.0, 80) - log_product(g, 2.0, 40)), 1e-9);
    }
    // Large gamma stays finite in the log domain.
    EXPECT_TRUE(std::isfinite(log_product(1e300, 2.0, 2000)));
    EXPECT_THROW(product_bound_check(1.0, 2.0, 10), std::invalid_argument);
    EXPECT_THROW(log_product(1.0, 1.0, 40), std::invalid_argument);
}

TEST(Spectral, SobolevEstimates) {
    const auto s = build_surface({"genus2_separating_pinch", 16, 2, 8});
    std::vector<double> s1;
    for (double ell : {0.4, 0.05}) {
        const auto m = metric_for(s, ell, 1.0);
        const auto e = estimate_sobolev(s, m, SobolevMode::s1);
        EXPECT_DOUBLE_EQ(sobolev_ratio(s, m, SobolevMode::s1, e.s1_witness), e.s1_upper);
        s1.push_back(e.s1_upper);
    }
    EXPECT_LT(s1[1], s1[0]);
    EXPECT_THROW(estimate_sobolev(s, metric_for(s, 0.0, 1.0), SobolevMode::s1), std::invalid_argument);
    EXPECT_THROW(estimate_sobolev(s, metric_for(s, 0.5, 1.0), SobolevMode::s2), std::invalid_argument);

    const auto c = build_cylinder(32, 32);
    std::vector<double> s2;
    for (double ell : {0.8, 0.2, 0.05}) s2.push_back(estimate_sobolev(c, metric_for(c, ell, 1.0), SobolevMode::s2).s2_upper);
    EXPECT_GT(*std::min_element(s2.begin(), s2.end()), 0.5 * s2[0]);
}

TEST(Spectral, L4EmbeddingBoundedAcrossEll) {
    const auto s = build_surface({"genus2_separating_pinch", 16, 2, 8});
    std::vector<double> r;
    for (double ell : {0.8, 0.2, 0.05}) r.push_back(sobolev_l4_check(s, metric_for(s, ell, 1.0), 100).max_ratio);
    EXPECT_LT(*std::max_element(r.begin(), r.end()) / *std::min_element(r.begin(), r.end()), 2.0);
    // Constants: |f|_4^2 / |f|_2^2 = a^{-1/2}.
    const auto m = metric_for(s, 0.5, 1.0);
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(s.num_vertices);
    double l4 = 0.0;
    for (int v = 0; v < s.num_vertices; ++v) l4 += m.vertex_mass[v];
    EXPECT_NEAR(std::sqrt(l4) / (dirichlet_energy(s, m, one) + l4), 1.0 / std::sqrt(m.total_area), 1e-12);
    EXPECT_THROW(sobolev_l4_check(s, m, 10), std::invalid_argument);
}

TEST(Spectral, HeatEvolution) {
    const auto s = build_surface({"genus2_separating_pinch", 12, 2, 8});
    const auto m = metric_for(s, 0.5, 1.0);
    const auto L = assemble_laplacian(s, m, Boundary::closed);
    const auto sp = eigensolve(L, static_cast<int>(L.size()));
    const Eigen::VectorXd phi = sp.vectors.col(3);
    const auto h = heat_evolve(L, sp, phi, 0.5);
    EXPECT_LT((h.v - std::exp(-0.5 * sp.values(3)) * phi).cwiseAbs().maxCoeff(), 1e-12);

    BandLimitedSampler sampler(s, m, Boundary::closed);
    std::mt19937_64 rng(5);
    Eigen::VectorXd v0 = sampler.sample(rng);
    const double mean0 = L.inner(v0, Eigen::VectorXd::Ones(L.size()));
    const auto hv = heat_evolve(L, sp, v0, 0.5);
    EXPECT_NEAR(L.inner(hv.v, Eigen::VectorXd::Ones(L.size())), mean0, 1e-10 * std::abs(mean0) + 1e-12);

    v0.array() -= mean0 / m.total_area;
    double prev = L.norm(v0);
    for (double t : {0.3, 0.5, 1.0, 2.0}) {
        const double n = L.norm(heat_evolve(L, sp, v0, t).v);
        EXPECT_LT(n, prev);
        prev = n;
    }
    const auto few = eigensolve(L, 3);
    EXPECT_THROW(heat_evolve(L, few, v0, 0.01), SpectralError);
}

TEST(Spectral, CooExport) {
    const auto s = build_surface({"torus", 4});
    const auto L = assemble_laplacian(s, metric_for(s, 1.0, 1.0), Boundary::closed);
    std::ostringstream os;
    write_coo(L, os);
    std::istringstream is(os.str());
    long r, c, nnz;
    is >> r >> c >> nnz;
    EXPECT_EQ(r, 16);
    EXPECT_EQ(nnz, L.stiffness.nonZeros());
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(r, c);
    long i, j;
    double v;
    while (is >> i >> j >> v) D(i - 1, j - 1) = v;
    EXPECT_LT((D - Eigen::MatrixXd(L.stiffness)).cwiseAbs().maxCoeff(), 1e-15);
}
