#include "ymlab/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>

namespace ymlab {

const char* to_string(Bundle b) { return b == Bundle::functions ? "functions" : "adE0"; }

const char* to_string(Boundary b) {
    switch (b) {
        case Boundary::closed: return "closed";
        case Boundary::dirichlet: return "dirichlet";
        case Boundary::neumann: return "neumann";
    }
    return "?";
}

Eigen::VectorXd CovariantLaplacian::apply(const Eigen::VectorXd& u) const {
    return (stiffness * u).cwiseQuotient(mass);
}

double CovariantLaplacian::inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
    return (u.array() * mass.array() * v.array()).sum();
}

double CovariantLaplacian::sup_norm(const Eigen::VectorXd& u) const {
    double s = 0.0;
    for (int b = 0; b < blocks(); ++b) s = std::max(s, u.segment(b * rank, rank).norm());
    return s;
}

namespace {

std::vector<std::uint8_t> boundary_vertices(const SurfaceComplex& s) {
    std::vector<std::uint8_t> on(s.num_vertices, 0);
    for (std::size_t e = 0; e < s.edges.size(); ++e)
        if (s.edge_faces[e][0] < 0 || s.edge_faces[e][1] < 0) on[s.edges[e].v0] = on[s.edges[e].v1] = 1;
    return on;
}

}  // namespace

CovariantLaplacian assemble_laplacian(const LinkField& field, const MetricGrid& metric, Bundle bundle,
                                      Boundary boundary) {
    const SurfaceComplex& s = *field.surface;
    if (field.links.size() != s.edges.size() || metric.edge_weight.size() != s.edges.size())
        throw std::invalid_argument("field, metric and surface disagree in size");
    CovariantLaplacian L;
    L.bundle = bundle;
    L.boundary = boundary;
    L.rank = bundle == Bundle::functions ? 1 : 3;
    L.h = std::numeric_limits<double>::infinity();
    for (const Chart& c : s.charts) L.h = std::min({L.h, c.hx(), c.hy()});

    const auto bnd = boundary_vertices(s);
    L.vertex_block.assign(s.num_vertices, -1);
    for (int v = 0; v < s.num_vertices; ++v) {
        if (metric.vertex_mass[v] <= 0.0) continue;
        if (boundary == Boundary::dirichlet && bnd[v]) continue;
        L.vertex_block[v] = static_cast<int>(L.block_vertex.size());
        L.block_vertex.push_back(v);
    }
    const int r = L.rank;
    const Eigen::Index n = static_cast<Eigen::Index>(L.block_vertex.size()) * r;
    L.mass.resize(n);
    std::set<int> comps;
    for (int b = 0; b < L.blocks(); ++b) {
        const int v = L.block_vertex[b];
        L.mass.segment(b * r, r).setConstant(metric.vertex_mass[v]);
        L.block_component.push_back(metric.component[v]);
        comps.insert(metric.component[v]);
    }
    L.num_components = static_cast<int>(comps.size());

    std::vector<Eigen::Triplet<double>> trip;
    auto add_block = [&](int a, int b, const Eigen::Matrix3d& B) {
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j)
                if (B(i, j) != 0.0) trip.emplace_back(a * r + i, b * r + j, B(i, j));
    };
    for (std::size_t e = 0; e < s.edges.size(); ++e) {
        const double w = metric.edge_weight[e];
        if (w <= 0.0) continue;
        int a = L.vertex_block[s.edges[e].v0], b = L.vertex_block[s.edges[e].v1];
        if (a < 0 && b < 0) continue;
        Coupling c;
        c.w = w;
        c.R = bundle == Bundle::adjoint ? su2_ad_matrix(field.links[e]) : Eigen::Matrix3d::Identity();
        if (a < 0) {
            // Only the far end survives; orient the coupling so the live block is a.
            std::swap(a, b);
            c.R.transposeInPlace();
        }
        c.a = a;
        c.b = b;
        const Eigen::Matrix3d I = w * Eigen::Matrix3d::Identity();
        add_block(a, a, I);
        if (b >= 0) {
            add_block(b, b, I);
            add_block(a, b, -w * c.R);
            add_block(b, a, -w * c.R.transpose());
        }
        L.couplings.push_back(c);
    }
    L.stiffness.resize(n, n);
    L.stiffness.setFromTriplets(trip.begin(), trip.end());
    L.stiffness.makeCompressed();
    return L;
}

CovariantLaplacian assemble_laplacian(const SurfaceComplex& s, const MetricGrid& metric, Boundary boundary) {
    return assemble_laplacian(identity_field(s), metric, Bundle::functions, boundary);
}

// ---------------------------------------------------------------------------

namespace {

// Works with S = M^{-1/2} K M^{-1/2}; y = M^{1/2} phi.
Spectrum finish(const CovariantLaplacian& L, const Eigen::VectorXd& vals, const Eigen::MatrixXd& Y) {
    Spectrum sp;
    const Eigen::VectorXd dinv = L.mass.cwiseSqrt().cwiseInverse();
    sp.values = vals;
    sp.vectors = dinv.asDiagonal() * Y;
    const Eigen::Index k = vals.size();
    sp.sup_norms.resize(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        Eigen::VectorXd phi = sp.vectors.col(i);
        phi /= L.norm(phi);
        // Deterministic sign: largest-magnitude entry positive.
        Eigen::Index imax;
        phi.cwiseAbs().maxCoeff(&imax);
        if (phi(imax) < 0) phi = -phi;
        sp.vectors.col(i) = phi;
        sp.sup_norms(i) = L.sup_norm(phi);
        sp.max_residual = std::max(sp.max_residual, L.norm(L.apply(phi) - vals(i) * phi));
    }
    const Eigen::MatrixXd G = sp.vectors.transpose() * L.mass.asDiagonal() * sp.vectors;
    sp.orthonormality_error = (G - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff();
    return sp;
}

Spectrum dense_solve(const CovariantLaplacian& L, int k) {
    const Eigen::VectorXd d = L.mass.cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd S = d.asDiagonal() * Eigen::MatrixXd(L.stiffness) * d.asDiagonal();
    S = 0.5 * (S + S.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    if (es.info() != Eigen::Success) throw SpectralError("dense eigensolver failed");
    return finish(L, es.eigenvalues().head(k), es.eigenvectors().leftCols(k));
}

Spectrum sparse_solve(const CovariantLaplacian& L, int k, const EigenOptions& opt) {
    const Eigen::Index n = L.size();
    const Eigen::VectorXd d = L.mass.cwiseSqrt().cwiseInverse();
    Eigen::SparseMatrix<double> S = d.asDiagonal() * L.stiffness * d.asDiagonal();
    double diag_max = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) diag_max = std::max(diag_max, S.coeff(i, i));
    const double sigma = 1e-8 * diag_max + 1e-300;
    Eigen::SparseMatrix<double> A = S;
    for (Eigen::Index i = 0; i < n; ++i) A.coeffRef(i, i) += sigma;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
    if (ldlt.info() != Eigen::Success) throw SpectralError("sparse factorization failed");

    const Eigen::Index b = std::min<Eigen::Index>(n, 2 * k + 10);
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> nd;
    Eigen::MatrixXd X(n, b);
    for (Eigen::Index j = 0; j < b; ++j)
        for (Eigen::Index i = 0; i < n; ++i) X(i, j) = nd(rng);

    Eigen::VectorXd theta;
    for (int it = 0; it < opt.max_iterations; ++it) {
        Eigen::MatrixXd Y = ldlt.solve(X);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
        Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, b);
        Eigen::MatrixXd H = Q.transpose() * (S * Q);
        H = 0.5 * (H + H.transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
        X = Q * es.eigenvectors();
        theta = es.eigenvalues();
        double worst = 0.0;
        for (int i = 0; i < k; ++i) worst = std::max(worst, (S * X.col(i) - theta(i) * X.col(i)).norm());
        if (worst <= opt.tolerance) return finish(L, theta.head(k), X.leftCols(k));
    }
    throw SpectralError("shift-invert iteration did not converge");
}

}  // namespace

Spectrum eigensolve(const CovariantLaplacian& L, int k, const EigenOptions& opt) {
    if (k < 1) throw std::invalid_argument("k must be positive");
    if (L.size() == 0) throw SpectralError("empty operator");
    k = static_cast<int>(std::min<Eigen::Index>(k, L.size()));
    if (2 * k >= L.size()) return dense_solve(L, k);
    try {
        return sparse_solve(L, k, opt);
    } catch (const SpectralError&) {
        if (L.size() < opt.dense_threshold) return dense_solve(L, k);
        throw;
    }
}

int kernel_dimension(const Spectrum& sp, double tol) {
    int n = 0;
    for (Eigen::Index i = 0; i < sp.values.size(); ++i)
        if (sp.values(i) < tol) ++n;
    return n;
}

std::vector<Lambda1Point> lambda1_sweep(const Representation& rep, const SurfaceComplex& s,
                                        const std::vector<double>& ells, double kappa) {
    for (std::size_t i = 1; i < ells.size(); ++i)
        if (!(ells[i] < ells[i - 1])) throw std::invalid_argument("ell sequence must be decreasing");
    const LinkField field = connection_from_representation(rep, s);
    std::vector<Lambda1Point> out;
    for (double ell : ells) {
        const MetricGrid m = metric_for(s, ell, kappa);
        const auto L = assemble_laplacian(field, m, Bundle::adjoint, Boundary::closed);
        const auto sp = eigensolve(L, 1);
        out.push_back({ell, sp.values(0), m.num_components});
    }
    return out;
}

// ---------------------------------------------------------------------------

BandLimitedSampler::BandLimitedSampler(const SurfaceComplex& s, const MetricGrid& metric, Boundary boundary,
                                       int modes) {
    const int nv = s.num_vertices;
    const auto bnd = boundary_vertices(s);
    std::vector<Eigen::VectorXd> cols;
    std::vector<double> wts;
    auto live = [&](int v) {
        return metric.vertex_mass[v] > 0.0 && !(boundary == Boundary::dirichlet && bnd[v]);
    };
    if (s.charts.size() == 1) {
        const Chart& c = s.charts[0];
        const bool cyl = c.kind == ChartKind::cylinder;
        for (int m = 0; m < modes; ++m)
            for (int q = 0; q < modes; ++q)
                for (int sx = 0; sx < 2; ++sx)
                    for (int sy = 0; sy < 2; ++sy) {
                        if (!cyl && ((m == 0 && sx == 1) || (q == 0 && sy == 1))) continue;
                        if (cyl && (q == 0 && sy == 1)) continue;
                        if (cyl && sx == 1) continue;  // x family chosen below
                        Eigen::VectorXd col = Eigen::VectorXd::Zero(nv);
                        for (int v = 0; v < nv; ++v) {
                            if (!live(v)) continue;
                            const Eigen::Vector2d p = s.vertex_xy(v);
                            double fx, fy;
                            if (cyl) {
                                const double u = (p.x() - c.x0) / (c.x1 - c.x0);
                                fx = boundary == Boundary::dirichlet ? std::sin((m + 1) * M_PI * u)
                                                                     : std::cos(m * M_PI * u);
                                fy = sy == 0 ? std::cos(q * p.y()) : std::sin(q * p.y());
                            } else {
                                const double ax = 2 * M_PI * m * (p.x() - c.x0) / (c.x1 - c.x0);
                                const double ay = 2 * M_PI * q * (p.y() - c.y0) / (c.y1 - c.y0);
                                fx = sx == 0 ? std::cos(ax) : std::sin(ax);
                                fy = sy == 0 ? std::cos(ay) : std::sin(ay);
                            }
                            col(v) = fx * fy;
                        }
                        cols.push_back(col);
                        wts.push_back(1.0 / (1.0 + m * m + q * q));
                    }
    } else {
        const auto L = assemble_laplacian(s, metric, boundary);
        const auto sp = eigensolve(L, modes * modes);
        for (Eigen::Index i = 0; i < sp.values.size(); ++i) {
            Eigen::VectorXd col = Eigen::VectorXd::Zero(nv);
            for (int b = 0; b < L.blocks(); ++b) col(L.block_vertex[b]) = sp.vectors(b, i);
            cols.push_back(col);
            wts.push_back(1.0 / (1.0 + sp.values(i) / (4 * M_PI * M_PI)));
        }
    }
    basis_.resize(nv, static_cast<Eigen::Index>(cols.size()));
    weight_.resize(static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
        basis_.col(j) = cols[j];
        weight_(j) = wts[j];
    }
}

Eigen::VectorXd BandLimitedSampler::sample(std::mt19937_64& rng) const {
    std::normal_distribution<double> nd;
    Eigen::VectorXd c(weight_.size());
    for (Eigen::Index j = 0; j < c.size(); ++j) c(j) = nd(rng) * weight_(j);
    return basis_ * c;
}

Eigen::VectorXd BandLimitedSampler::section(std::mt19937_64& rng, const CovariantLaplacian& L) const {
    Eigen::VectorXd out(L.size());
    for (int i = 0; i < L.rank; ++i) {
        const Eigen::VectorXd f = sample(rng);
        for (int b = 0; b < L.blocks(); ++b) out(b * L.rank + i) = f(L.block_vertex[b]);
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

double edge_delta(const SurfaceComplex& s, const Eigen::VectorXd& f, int e) {
    return f(s.edges[e].v1) - f(s.edges[e].v0);
}

double weighted_norm2(const MetricGrid& metric, const Eigen::VectorXd& f) {
    return (Eigen::Map<const Eigen::VectorXd>(metric.vertex_mass.data(), f.size()).array() * f.array().square()).sum();
}

}  // namespace

double gradient_l1(const SurfaceComplex& s, const MetricGrid& metric, const Eigen::VectorXd& f) {
    double acc = 0.0;
    for (std::size_t fi = 0; fi < s.faces.size(); ++fi) {
        if (!metric.face_active[fi]) continue;
        const Face& F = s.faces[fi];
        double E = 0.0;
        for (int k = 0; k < 4; ++k) {
            const double d = edge_delta(s, f, F.e[k]);
            E += (k % 2 == 0 ? metric.face_wx[fi] : metric.face_wy[fi]) * d * d;
        }
        acc += std::sqrt(metric.cell_area[fi] * E);
    }
    return acc;
}

double dirichlet_energy(const SurfaceComplex& s, const MetricGrid& metric, const Eigen::VectorXd& f) {
    double acc = 0.0;
    for (std::size_t e = 0; e < s.edges.size(); ++e) {
        const double d = edge_delta(s, f, static_cast<int>(e));
        acc += metric.edge_weight[e] * d * d;
    }
    return acc;
}

double sobolev_ratio(const SurfaceComplex& s, const MetricGrid& metric, SobolevMode mode, const Eigen::VectorXd& f) {
    if (f.size() != s.num_vertices) throw std::invalid_argument("function size mismatch");
    const double g = gradient_l1(s, metric, f);
    double den;
    if (mode == SobolevMode::s1) {
        double mf = 0.0;
        for (int v = 0; v < s.num_vertices; ++v) mf += metric.vertex_mass[v] * f(v);
        const double a = mf / metric.total_area;
        den = weighted_norm2(metric, (f.array() - a).matrix());
    } else {
        const auto bnd = boundary_vertices(s);
        for (int v = 0; v < s.num_vertices; ++v)
            if (bnd[v] && f(v) != 0.0) throw std::invalid_argument("s2 candidates must vanish on the boundary");
        den = weighted_norm2(metric, f);
    }
    if (!(den > 0.0)) throw std::invalid_argument("degenerate Sobolev candidate");
    return g * g / den;
}

SobolevEstimate estimate_sobolev(const SurfaceComplex& s, const MetricGrid& metric, SobolevMode mode, unsigned seed) {
    const auto bnd = boundary_vertices(s);
    const bool has_boundary = std::any_of(bnd.begin(), bnd.end(), [](std::uint8_t b) { return b != 0; });
    if (mode == SobolevMode::s2 && !has_boundary) throw std::invalid_argument("s2 needs a mesh with boundary");
    if (mode == SobolevMode::s1 && metric.num_components != 1) throw std::invalid_argument("s1 needs a connected mesh");
    const Boundary bc = mode == SobolevMode::s2 ? Boundary::dirichlet : Boundary::neumann;

    std::vector<Eigen::VectorXd> cand;
    const auto L = assemble_laplacian(s, metric, bc);
    const auto sp = eigensolve(L, 12);
    for (Eigen::Index i = mode == SobolevMode::s1 ? 1 : 0; i < sp.values.size(); ++i) {
        Eigen::VectorXd phi = Eigen::VectorXd::Zero(s.num_vertices);
        for (int b = 0; b < L.blocks(); ++b) phi(L.block_vertex[b]) = sp.vectors(b, i);
        cand.push_back(phi);
        const double top = phi.cwiseAbs().maxCoeff();
        for (int q = 1; q < 10; ++q) {
            const double t = top * q / 10.0;
            cand.push_back(((phi.array().abs() - t).max(0.0)).matrix());
            if (mode == SobolevMode::s1) {
                cand.push_back(((phi.array() - t).max(0.0)).matrix());
                cand.push_back(phi.array().max(-t).min(t).matrix());
            }
        }
    }
    BandLimitedSampler sampler(s, metric, bc);
    std::mt19937_64 rng(seed);
    for (int i = 0; i < 32; ++i) cand.push_back(sampler.sample(rng));

    auto ratio = [&](const Eigen::VectorXd& f) {
        try {
            return sobolev_ratio(s, metric, mode, f);
        } catch (const std::invalid_argument&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    Eigen::VectorXd best;
    double best_r = std::numeric_limits<double>::infinity();
    for (auto& f : cand) {
        if (mode == SobolevMode::s2)
            for (int v = 0; v < s.num_vertices; ++v)
                if (bnd[v]) f(v) = 0.0;
        const double r = ratio(f);
        if (r < best_r) {
            best_r = r;
            best = f;
        }
    }
    if (!std::isfinite(best_r)) throw SpectralError("no admissible Sobolev candidate");

    // Seeded random descent along band-limited directions.
    double eta = 0.2;
    for (int it = 0; it < 300; ++it) {
        Eigen::VectorXd g = sampler.sample(rng);
        const double gn = std::sqrt(weighted_norm2(metric, g)), fn = std::sqrt(weighted_norm2(metric, best));
        if (!(gn > 0.0)) continue;
        Eigen::VectorXd trial = best + (eta * fn / gn) * g;
        if (mode == SobolevMode::s2)
            for (int v = 0; v < s.num_vertices; ++v)
                if (bnd[v]) trial(v) = 0.0;
        const double r = ratio(trial);
        if (r < best_r) {
            best_r = r;
            best = trial;
        } else {
            eta *= 0.97;
        }
    }

    SobolevEstimate est;
    if (mode == SobolevMode::s1) {
        est.s1_witness = best;
        est.s1_upper = sobolev_ratio(s, metric, mode, best);
    } else {
        est.s2_witness = best;
        est.s2_upper = sobolev_ratio(s, metric, mode, best);
    }
    return est;
}

// ---------------------------------------------------------------------------

SupBoundReport sup_bound_audit(const Spectrum& sp, double total_area, const SobolevEstimate& sob) {
    if (!std::isfinite(sob.s1_upper)) throw std::invalid_argument("sup bound audit needs an s1 estimate");
    SupBoundReport rep;
    for (Eigen::Index i = 0; i < sp.values.size(); ++i) {
        const double lam = std::max(sp.values(i), 0.0);
        const double q = 4.0 * lam / sob.s1_upper;
        const double bound = 1.0 / total_area + q * q * total_area;
        const double c = sp.sup_norms(i) * sp.sup_norms(i) / bound;
        rep.per_mode.push_back(c);
        rep.C = std::max(rep.C, c);
    }
    return rep;
}

UniformSupFit fit_uniform_sup(const std::vector<double>& lambda, const std::vector<double>& sup) {
    if (lambda.size() != sup.size() || lambda.empty()) throw std::invalid_argument("mismatched series");
    UniformSupFit fit;
    // C1 carries the low modes (lambda <= 1, or the lowest one), C2 the rest.
    const auto lo = std::min_element(lambda.begin(), lambda.end()) - lambda.begin();
    for (std::size_t i = 0; i < lambda.size(); ++i)
        if (lambda[i] <= 1.0 || static_cast<long>(i) == lo) fit.C1 = std::max(fit.C1, sup[i]);
    for (std::size_t i = 0; i < lambda.size(); ++i)
        if (sup[i] > fit.C1) fit.C2 = std::max(fit.C2, (sup[i] - fit.C1) / std::pow(lambda[i], 5));
    fit.holds = true;
    for (std::size_t i = 0; i < lambda.size(); ++i)
        if (sup[i] > (fit.C1 + fit.C2 * std::pow(std::max(lambda[i], 0.0), 5)) * (1 + 1e-12)) fit.holds = false;
    return fit;
}

GrowthReport growth_audit(const Spectrum& sp, int rank, double total_area, const SobolevEstimate& sob,
                          Boundary boundary, int k_lo, int k_hi) {
    const Eigen::Index n = sp.values.size();
    if (n < 10) throw std::invalid_argument("growth audit needs at least 10 eigenvalues");
    const bool dir = boundary == Boundary::dirichlet;
    const double sc = dir ? sob.s2_upper : sob.s1_upper;
    if (!std::isfinite(sc)) throw std::invalid_argument("growth audit needs the matching Sobolev estimate");
    GrowthReport rep;
    rep.k_lo = k_lo;
    rep.k_hi = static_cast<int>(std::min<Eigen::Index>(k_hi, n));
    rep.C_lower = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double k = static_cast<double>(i + 1);
        const double lam = std::max(sp.values(i), 0.0);
        const double base = dir ? 4.0 * lam * total_area / sc : 1.0 + 4.0 * lam * total_area / sc;
        const double denom = rank * base * base * base;
        rep.C = std::max(rep.C, denom > 0.0 ? k / denom : std::numeric_limits<double>::infinity());
        if (i + 1 >= k_lo && i + 1 <= rep.k_hi) rep.C_lower = std::min(rep.C_lower, lam / std::cbrt(k));
    }
    return rep;
}

KatoReport kato_and_key_estimate_check(const CovariantLaplacian& L, const Eigen::VectorXd& section, double alpha) {
    if (!(alpha > 1.0)) throw std::invalid_argument("alpha must exceed 1");
    if (section.size() != L.size()) throw std::invalid_argument("section size mismatch");
    const int r = L.rank;
    const Eigen::VectorXd Kphi = L.stiffness * section;
    std::vector<double> nrm(L.blocks());
    KatoReport rep;
    for (int b = 0; b < L.blocks(); ++b) {
        nrm[b] = section.segment(b * r, r).norm();
        if (nrm[b] > 0.0)
            rep.lhs += std::pow(nrm[b], 2 * alpha - 2) * section.segment(b * r, r).dot(Kphi.segment(b * r, r));
    }
    double acc = 0.0;
    for (const Coupling& c : L.couplings) {
        const double na = std::pow(nrm[c.a], alpha), nb = c.b >= 0 ? std::pow(nrm[c.b], alpha) : 0.0;
        acc += c.w * (nb - na) * (nb - na);
    }
    rep.rhs = (2 * alpha - 1) / (alpha * alpha) * acc;
    rep.slack = std::max(0.0, 1.0 - 10.0 * L.h);
    rep.holds = rep.lhs >= rep.slack * rep.rhs;
    return rep;
}

double log_product(double gamma, double beta, int terms) {
    if (!(beta > 1.0)) throw std::invalid_argument("beta must exceed 1");
    if (gamma < 0.0) throw std::invalid_argument("gamma must be nonnegative");
    if (gamma == 0.0) return 0.0;
    const double lb = std::log(beta), lg = std::log(gamma);
    double acc = 0.0;
    for (int j = 0; j <= terms; ++j) {
        // log x_j = log gamma + 2 j log beta - log(2 beta^j - 1)
        const double lx = lg + 2.0 * j * lb - (j * lb + std::log(2.0 - std::exp(-j * lb)));
        const double l1p = lx > 30.0 ? lx + std::log1p(std::exp(-lx)) : std::log1p(std::exp(lx));
        acc += std::exp(-j * lb) * l1p;
    }
    return acc;
}

ProductBoundReport product_bound_check(double gamma, double beta, int terms) {
    if (terms < 30) throw std::invalid_argument("product bound needs at least 30 terms");
    const double p = beta / (beta - 1.0);
    ProductBoundReport rep;
    rep.log_lhs = log_product(gamma, beta, terms);
    rep.lhs = std::exp(rep.log_lhs);
    std::vector<double> grid;
    for (int i = 0; i <= 60; ++i) grid.push_back(std::pow(10.0, -3.0 + 0.1 * i));
    grid.push_back(gamma);
    for (double g : grid) rep.C_beta = std::max(rep.C_beta, std::exp(log_product(g, beta, terms)) / (1.0 + std::pow(g, p)));
    rep.rhs = rep.C_beta * (1.0 + std::pow(gamma, p));
    rep.holds = rep.lhs <= rep.rhs * (1.0 + 1e-12);
    return rep;
}

L4Report sobolev_l4_check(const SurfaceComplex& s, const MetricGrid& metric, int trials, unsigned seed) {
    if (trials < 100) throw std::invalid_argument("L4 check needs at least 100 trials");
    BandLimitedSampler sampler(s, metric, Boundary::closed);
    std::mt19937_64 rng(seed);
    L4Report rep;
    rep.trials = trials;
    const Eigen::Map<const Eigen::VectorXd> m(metric.vertex_mass.data(), s.num_vertices);
    for (int t = 0; t < trials; ++t) {
        const Eigen::VectorXd f = sampler.sample(rng);
        const double l4sq = std::sqrt((m.array() * f.array().pow(4)).sum());
        const double den = dirichlet_energy(s, metric, f) + weighted_norm2(metric, f);
        if (den > 0.0) rep.max_ratio = std::max(rep.max_ratio, l4sq / den);
    }
    return rep;
}

HeatResult heat_evolve(const CovariantLaplacian& L, const Spectrum& sp, const Eigen::VectorXd& v0, double t,
                       double tail_tol) {
    if (!(t > 0.0)) throw std::invalid_argument("heat time must be positive");
    if (v0.size() != L.size()) throw std::invalid_argument("initial section size mismatch");
    const Eigen::VectorXd c = sp.vectors.transpose() * L.mass.asDiagonal() * v0;
    HeatResult res;
    res.v = sp.vectors * (c.array() * (-t * sp.values.array()).exp()).matrix();
    const double n0 = L.norm(v0);
    const double rem = L.norm(v0 - sp.vectors * c);
    res.tail_bound = sp.values.size() == L.size() ? 0.0 : rem * std::exp(-t * sp.values(sp.values.size() - 1));
    if (res.tail_bound > tail_tol * n0) throw SpectralError("too few modes for the requested heat tail accuracy");
    res.sup_ratio = n0 > 0.0 ? L.sup_norm(res.v) / n0 : 0.0;
    return res;
}

void write_coo(const CovariantLaplacian& L, std::ostream& out) {
    out.precision(17);
    out << L.size() << ' ' << L.size() << ' ' << L.stiffness.nonZeros() << '\n';
    for (int k = 0; k < L.stiffness.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(L.stiffness, k); it; ++it)
            out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
}

}  // namespace ymlab
