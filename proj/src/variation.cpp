#include "ymlab/variation.hpp"

#include "json.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace ymlab {

ChartGrid periodic_grid(int n, double period) {
    if (n < 4 || n % 2 != 0) throw VariationError("periodic grids need an even n >= 4");
    if (!(period > 0.0)) throw VariationError("period must be positive");
    return ChartGrid{n, 0.0, 0.0, period / n, true};
}

ChartGrid square_grid(int n, double half_width) {
    if (n < 5) throw VariationError("stencil grids need n >= 5");
    if (!(half_width > 0.0)) throw VariationError("half width must be positive");
    return ChartGrid{n, -half_width, -half_width, 2.0 * half_width / (n - 1), false};
}

ScalarField sample(const ChartGrid& grid, const std::function<cplx(cplx)>& f) {
    ScalarField out(grid.size());
    for (Eigen::Index k = 0; k < grid.size(); ++k) out(k) = f(grid.z(k));
    return out;
}

MatrixField sample(const ChartGrid& grid, const std::function<Mat2cd(cplx)>& f) {
    MatrixField out(static_cast<std::size_t>(grid.size()));
    for (Eigen::Index k = 0; k < grid.size(); ++k) out[k] = f(grid.z(k));
    return out;
}

Eigen::MatrixXd derivative_matrix(const ChartGrid& g) {
    const int n = g.n;
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
    if (g.periodic) {
        // Trigonometric interpolant; the Nyquist mode differentiates to zero.
        const double L = n * g.h;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j) {
                    const int d = i - j;
                    D(i, j) = (M_PI / L) * ((d % 2 == 0) ? 1.0 : -1.0) / std::tan(M_PI * d / n);
                }
        return D;
    }
    const double c = 1.0 / (12.0 * g.h);
    const double first[5] = {-25, 48, -36, 16, -3};
    const double second[5] = {-3, -10, 18, -6, 1};
    for (int k = 0; k < 5; ++k) {
        D(0, k) = c * first[k];
        D(1, k) = c * second[k];
        D(n - 1, n - 1 - k) = -c * first[k];
        D(n - 2, n - 1 - k) = -c * second[k];
    }
    for (int i = 2; i < n - 2; ++i) {
        D(i, i - 2) = c;
        D(i, i - 1) = -8 * c;
        D(i, i + 1) = 8 * c;
        D(i, i + 2) = -c;
    }
    return D;
}

namespace {

void check_size(const ChartGrid& g, Eigen::Index n) {
    if (n != g.size()) throw VariationError("field does not match the grid");
}

// Column-major view: node (i, j) at i + n j, so rows of the n x n map are x.
ScalarField apply_x(const ChartGrid& g, const Eigen::MatrixXd& D, const ScalarField& f) {
    Eigen::Map<const Eigen::MatrixXcd> F(f.data(), g.n, g.n);
    ScalarField out(g.size());
    Eigen::Map<Eigen::MatrixXcd>(out.data(), g.n, g.n) = D.cast<cplx>() * F;
    return out;
}

ScalarField apply_y(const ChartGrid& g, const Eigen::MatrixXd& D, const ScalarField& f) {
    Eigen::Map<const Eigen::MatrixXcd> F(f.data(), g.n, g.n);
    ScalarField out(g.size());
    Eigen::Map<Eigen::MatrixXcd>(out.data(), g.n, g.n) = F * D.transpose().cast<cplx>();
    return out;
}

ScalarField component(const MatrixField& f, int r, int c) {
    ScalarField out(static_cast<Eigen::Index>(f.size()));
    for (std::size_t k = 0; k < f.size(); ++k) out(k) = f[k](r, c);
    return out;
}

MatrixField componentwise(const ChartGrid& g, const MatrixField& f,
                          ScalarField (*op)(const ChartGrid&, const ScalarField&)) {
    check_size(g, static_cast<Eigen::Index>(f.size()));
    MatrixField out(f.size());
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
            const ScalarField d = op(g, component(f, r, c));
            for (std::size_t k = 0; k < f.size(); ++k) out[k](r, c) = d(k);
        }
    return out;
}

Mat2cd checked_inverse(const Mat2cd& g) {
    const double scale = g.squaredNorm();
    if (!(std::abs(g.determinant()) > 1e-14 * scale) || scale == 0.0)
        throw VariationError("complex gauge field is singular");
    return g.inverse();
}

}  // namespace

ScalarField d_x(const ChartGrid& g, const ScalarField& f) {
    check_size(g, f.size());
    return apply_x(g, derivative_matrix(g), f);
}

ScalarField d_y(const ChartGrid& g, const ScalarField& f) {
    check_size(g, f.size());
    return apply_y(g, derivative_matrix(g), f);
}

ScalarField d_z(const ChartGrid& g, const ScalarField& f) {
    check_size(g, f.size());
    const Eigen::MatrixXd D = derivative_matrix(g);
    return 0.5 * (apply_x(g, D, f) - cplx(0, 1) * apply_y(g, D, f));
}

ScalarField d_zbar(const ChartGrid& g, const ScalarField& f) {
    check_size(g, f.size());
    const Eigen::MatrixXd D = derivative_matrix(g);
    return 0.5 * (apply_x(g, D, f) + cplx(0, 1) * apply_y(g, D, f));
}

MatrixField d_z(const ChartGrid& g, const MatrixField& f) {
    return componentwise(g, f, static_cast<ScalarField (*)(const ChartGrid&, const ScalarField&)>(&d_z));
}

MatrixField d_zbar(const ChartGrid& g, const MatrixField& f) {
    return componentwise(g, f, static_cast<ScalarField (*)(const ChartGrid&, const ScalarField&)>(&d_zbar));
}

OneForm dbar_mu(const ChartGrid& grid, const ScalarField& f, const ScalarField& mu) {
    check_size(grid, f.size());
    check_size(grid, mu.size());
    if (mu.cwiseAbs().maxCoeff() >= 1.0) throw VariationError("Beltrami coefficient must satisfy |mu| < 1");
    const ScalarField fz = d_z(grid, f), fzb = d_zbar(grid, f);
    OneForm out{ScalarField(f.size()), ScalarField(f.size())};
    for (Eigen::Index k = 0; k < f.size(); ++k) {
        const cplx m = mu(k);
        const double den = 1.0 - std::norm(m);
        out.dzbar(k) = (fzb(k) - m * fz(k)) / den;
        out.dz(k) = (std::conj(m) * fzb(k) - std::norm(m) * fz(k)) / den;
    }
    return out;
}

void BeltramiFamily::validate() const {
    for (double e : eps_grid)
        if (!(std::abs(e * nu) < 1.0)) throw VariationError("|eps nu| must stay below 1 on the epsilon grid");
}

double BeltramiFamily::cutoff(double r) {
    constexpr double a = 2.0 / 3.0, b = 1.0;
    if (r <= a) return 1.0;
    if (r >= b) return 0.0;
    const double t = (r - a) / (b - a);
    return 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
}

ScalarField BeltramiFamily::sample(const ChartGrid& grid, double eps) const {
    ScalarField out(grid.size());
    for (Eigen::Index k = 0; k < grid.size(); ++k) out(k) = mu(eps, grid.z(k));
    if (out.size() > 0 && out.cwiseAbs().maxCoeff() >= 1.0) throw VariationError("|mu| >= 1 on the grid");
    return out;
}

MatrixField adjoint_field(const MatrixField& f) {
    MatrixField out(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) out[k] = f[k].adjoint();
    return out;
}

MatrixField connection_dz(const MatrixField& a_zbar) {
    MatrixField out(a_zbar.size());
    for (std::size_t k = 0; k < a_zbar.size(); ++k) out[k] = -a_zbar[k].adjoint();
    return out;
}

MatrixField connection_from_links(const LinkField& field, ChartGrid& grid) {
    const SurfaceComplex& s = *field.surface;
    if (s.charts.size() != 1 || s.charts[0].kind != ChartKind::torus || s.charts[0].nx != s.charts[0].ny)
        throw VariationError("connection sampling needs a single square torus chart");
    const Chart& c = s.charts[0];
    for (auto h : c.hole)
        if (h) throw VariationError("connection sampling needs a chart without excised cells");
    const int n = c.nx;
    grid = periodic_grid(n, c.x1 - c.x0);
    std::vector<Mat2cd> ax(static_cast<std::size_t>(n) * n), ay(ax.size());
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const Face& f = s.faces[c.fid(i, j)];
            // Transport from the far end back to (i, j) is exp(h A) to first order.
            ax[grid.index(i, j)] = alg_matrix(su2_log(field.along({f.e[0], f.s[0]}))) / grid.h;
            ay[grid.index(i, j)] = alg_matrix(su2_log(field.along({f.e[3], -f.s[3]}))) / grid.h;
        }
    MatrixField a(ax.size());
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const int im = (i + n - 1) % n, jm = (j + n - 1) % n;
            const Mat2cd Ax = 0.5 * (ax[grid.index(im, j)] + ax[grid.index(i, j)]);
            const Mat2cd Ay = 0.5 * (ay[grid.index(i, jm)] + ay[grid.index(i, j)]);
            a[grid.index(i, j)] = 0.5 * (Ax + cplx(0, 1) * Ay);
        }
    return a;
}

MatrixField gauge_action_zbar(const ChartGrid& grid, const MatrixField& a_zbar, const MatrixField& g,
                              const ScalarField& mu) {
    check_size(grid, static_cast<Eigen::Index>(a_zbar.size()));
    check_size(grid, static_cast<Eigen::Index>(g.size()));
    check_size(grid, mu.size());
    if (mu.cwiseAbs().maxCoeff() >= 1.0) throw VariationError("Beltrami coefficient must satisfy |mu| < 1");
    const MatrixField gz = d_z(grid, g), gzb = d_zbar(grid, g);
    MatrixField out(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        const cplx m = mu(k);
        const double den = 1.0 - std::norm(m);
        const Mat2cd gi = checked_inverse(g[k]);
        const Mat2cd gs = g[k].adjoint();
        const Mat2cd gsi = gi.adjoint();
        const Mat2cd az = -a_zbar[k].adjoint();
        const Mat2cd gs_z = gzb[k].adjoint(), gs_zb = gz[k].adjoint();
        const Mat2cd QA = (a_zbar[k] - m * az) / den;
        const Mat2cd PA = (az - std::conj(m) * a_zbar[k]) / den;
        const Mat2cd Qg = (gzb[k] - m * gz[k]) / den;
        const Mat2cd Pgs = (gs_z - std::conj(m) * gs_zb) / den;
        out[k] = gi * QA * g[k] + gs * (m * PA) * gsi + gi * Qg - m * Pgs * gsi;
    }
    return out;
}

MatrixField covariant_dbar(const ChartGrid& grid, const MatrixField& b_zbar, const MatrixField& x) {
    check_size(grid, static_cast<Eigen::Index>(b_zbar.size()));
    MatrixField out = d_zbar(grid, x);
    for (std::size_t k = 0; k < x.size(); ++k) out[k] += b_zbar[k] * x[k] - x[k] * b_zbar[k];
    return out;
}

MatrixField first_variation(const ChartGrid& grid, const VariationInput& in) {
    const std::size_t n = in.g.size();
    for (const MatrixField* f : {&in.a_zbar, &in.gdot, &in.adot_zbar})
        if (f->size() != n) throw VariationError("variation inputs differ in size");
    check_size(grid, in.nu.size());

    const MatrixField b = gauge_action_zbar(grid, in.a_zbar, in.g, ScalarField::Zero(grid.size()));
    MatrixField x(n), gi(n);
    for (std::size_t k = 0; k < n; ++k) {
        gi[k] = checked_inverse(in.g[k]);
        x[k] = gi[k] * in.gdot[k];
    }
    MatrixField out = covariant_dbar(grid, b, x);
    const MatrixField gzb = d_zbar(grid, in.g);
    for (std::size_t k = 0; k < n; ++k) {
        const Mat2cd gs = in.g[k].adjoint();
        const Mat2cd gsi = gi[k].adjoint();
        const Mat2cd az = -in.a_zbar[k].adjoint();
        const Mat2cd dA = gzb[k].adjoint() + az * gs - gs * az;
        out[k] += -in.nu(k) * (dA * gsi + gsi * dA) + gi[k] * in.adot_zbar[k] * in.g[k];
    }
    return out;
}

MatrixField first_variation_fd(const ChartGrid& grid, const VariationInput& in, double eps) {
    auto shifted = [&](double e) {
        MatrixField g(in.g.size()), a(in.g.size());
        for (std::size_t k = 0; k < g.size(); ++k) {
            g[k] = in.g[k] + e * in.gdot[k];
            a[k] = in.a_zbar[k] + e * in.adot_zbar[k];
        }
        return gauge_action_zbar(grid, a, g, e * in.nu);
    };
    const MatrixField p = shifted(eps), m = shifted(-eps);
    MatrixField out(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) out[k] = (p[k] - m[k]) / (2.0 * eps);
    return out;
}

VerificationReport first_variation_convergence(const ChartGrid& grid, const VariationInput& in,
                                               const std::vector<double>& eps) {
    if (eps.size() < 2) throw VariationError("convergence study needs at least two step sizes");
    VerificationReport r;
    r.name = "first_variation_fd";
    r.eps = eps;
    const MatrixField exact = first_variation(grid, in);
    for (double e : eps) {
        const MatrixField fd = first_variation_fd(grid, in, e);
        double err = 0.0;
        for (std::size_t k = 0; k < fd.size(); ++k) err = std::max(err, (fd[k] - exact[k]).norm());
        r.errors.push_back(err);
    }
    r.max_error = *std::max_element(r.errors.begin(), r.errors.end());
    r.order = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < eps.size(); ++i)
        r.order = std::min(r.order, std::log(r.errors[i] / r.errors[i + 1]) / std::log(eps[i] / eps[i + 1]));
    return r;
}

std::string to_json(const VerificationReport& r) {
    nlohmann::json j;
    j["test"] = r.name;
    j["eps"] = r.eps;
    j["errors"] = r.errors;
    j["max_error"] = r.max_error;
    j["observed_order"] = r.order;
    return j.dump();
}

Eigen::VectorXcd flatten(const MatrixField& f) {
    const Eigen::Index n = static_cast<Eigen::Index>(f.size());
    Eigen::VectorXcd v(4 * n);
    for (Eigen::Index k = 0; k < n; ++k)
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) v((2 * r + c) * n + k) = f[k](r, c);
    return v;
}

Eigen::MatrixXcd harmonic_forms(const ChartGrid& grid, const MatrixField& b_zbar, double rel_tol) {
    if (!grid.periodic) throw VariationError("harmonic projection needs a periodic grid");
    check_size(grid, static_cast<Eigen::Index>(b_zbar.size()));
    const Eigen::Index N = grid.size();
    const Eigen::MatrixXd D1 = derivative_matrix(grid);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(grid.n, grid.n);
    Eigen::MatrixXcd dzb(N, N);
    // Node (i, j) at i + n j: d/dx acts within blocks, d/dy across them.
    for (int j = 0; j < grid.n; ++j)
        for (int jj = 0; jj < grid.n; ++jj)
            dzb.block(Eigen::Index(j) * grid.n, Eigen::Index(jj) * grid.n, grid.n, grid.n) =
                (0.5 * (I(j, jj) * D1).cast<cplx>() + cplx(0, 0.5) * (D1(j, jj) * I).cast<cplx>());

    Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(4 * N, 4 * N);
    for (int comp = 0; comp < 4; ++comp) D.block(comp * N, comp * N, N, N) = dzb;
    // (B X - X B)_{rc} = sum_m B_rm X_mc - X_rm B_mc.
    for (Eigen::Index k = 0; k < N; ++k)
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c)
                for (int m = 0; m < 2; ++m) {
                    D((2 * r + c) * N + k, (2 * m + c) * N + k) += b_zbar[k](r, m);
                    D((2 * r + c) * N + k, (2 * r + m) * N + k) -= b_zbar[k](m, c);
                }
    const Eigen::MatrixXcd H = D * D.adjoint();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    const double top = es.eigenvalues().cwiseAbs().maxCoeff();
    int dim = 0;
    while (dim < es.eigenvalues().size() && es.eigenvalues()(dim) < rel_tol * top) ++dim;
    return es.eigenvectors().leftCols(dim) / grid.h;
}

double harmonic_pairing(const ChartGrid& grid, const Eigen::MatrixXcd& basis, const MatrixField& f) {
    if (basis.cols() == 0) return 0.0;
    const Eigen::VectorXcd v = flatten(f);
    if (v.size() != basis.rows()) throw VariationError("field does not match the harmonic basis");
    return (grid.h * grid.h * (basis.adjoint() * v)).cwiseAbs().maxCoeff();
}

double frame_twist_derivative(double alpha, cplx z, cplx wdot) {
    if (z == cplx(0.0, 0.0)) throw VariationError("frame twist undefined at the puncture");
    return alpha * std::imag(wdot / z);
}

namespace {
constexpr double kPhi2In = 1.0 / 3.0, kPhi2Out = 2.0 / 3.0;
}

double cutoff_phi2(double r) {
    if (r <= kPhi2In) return 1.0;
    if (r >= kPhi2Out) return 0.0;
    const double t = (r - kPhi2In) / (kPhi2Out - kPhi2In);
    return 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
}

double cutoff_phi2_prime(double r) {
    if (r <= kPhi2In || r >= kPhi2Out) return 0.0;
    const double w = kPhi2Out - kPhi2In;
    const double t = (r - kPhi2In) / w;
    return -30.0 * t * t * (1.0 - t) * (1.0 - t) / w;
}

cplx twisted_gamma_dot_at(double alpha, double beta, cplx nu, cplx z) {
    const double r = std::abs(z);
    if (r == 0.0) throw VariationError("twisted variation undefined at the puncture");
    const double D = alpha - beta;
    const cplx zb = std::conj(z);
    const cplx dzb_r = z / (2.0 * r), dz_r = zb / (2.0 * r);
    const double p1 = cutoff_phi1(r), p1d = cutoff_phi1_prime(r);
    const double p2 = cutoff_phi2(r), p2d = cutoff_phi2_prime(r);

    const cplx q = nu * (zb - z) / z;
    const cplx qb = std::conj(q);
    const cplx dq = nu / z;                        // d_zbar q
    const cplx dqb = -std::conj(nu) * z / (zb * zb);  // d_zbar conj(q)
    const cplx S = (q - qb) + p1 * (q + qb);
    const cplx dS = (dq - dqb) + p1d * dzb_r * (q + qb) + p1 * (dq + dqb);
    const cplx t1 = 0.5 * D * (p2d * dzb_r * S + p2 * dS);
    // The frame rotation is by (alpha - beta) phi1 log|z|, so d_z carries 1/(2z).
    const cplx nut = nu * BeltramiFamily::cutoff(r);
    const cplx t2 = -2.0 * D * nut * (p1d * dz_r * std::log(r) + p1 / (2.0 * z));
    return t1 + t2;
}

ScalarField twisted_gamma_dot(double alpha, double beta, cplx nu, const ChartGrid& grid) {
    ScalarField out(grid.size());
    for (Eigen::Index k = 0; k < grid.size(); ++k) {
        const cplx z = grid.z(k);
        out(k) = std::abs(z) == 0.0 ? cplx(0.0, 0.0) : twisted_gamma_dot_at(alpha, beta, nu, z);
    }
    return out;
}

SupportReport support_check(const ChartGrid& grid, const ScalarField& f, double r_in, double r_out) {
    check_size(grid, f.size());
    SupportReport rep;
    for (Eigen::Index k = 0; k < f.size(); ++k) {
        const double r = std::abs(grid.z(k));
        double& slot = (r >= r_in && r <= r_out) ? rep.max_inside : rep.max_outside;
        slot = std::max(slot, std::abs(f(k)));
    }
    return rep;
}

}  // namespace ymlab
