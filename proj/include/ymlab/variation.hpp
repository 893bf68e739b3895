#pragma once

#include "ymlab/field.hpp"

#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace ymlab {

using cplx = std::complex<double>;

struct VariationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// n x n nodes with step h from (x0, y0), node (i, j) at x0 + i h + i (y0 + j h).
// Periodic grids cover one period and differentiate spectrally (n even); the
// others include both ends and use fourth-order stencils.
struct ChartGrid {
    int n = 16;
    double x0 = 0.0, y0 = 0.0, h = 1.0 / 16;
    bool periodic = true;

    Eigen::Index size() const { return Eigen::Index(n) * n; }
    Eigen::Index index(int i, int j) const { return Eigen::Index(j) * n + i; }
    cplx z(Eigen::Index k) const { return {x0 + (k % n) * h, y0 + (k / n) * h}; }
};

ChartGrid periodic_grid(int n, double period = 1.0);
ChartGrid square_grid(int n, double half_width = 1.0);  // [-w, w]^2, both ends included

using ScalarField = Eigen::VectorXcd;
using MatrixField = std::vector<Mat2cd>;

ScalarField sample(const ChartGrid& grid, const std::function<cplx(cplx)>& f);
MatrixField sample(const ChartGrid& grid, const std::function<Mat2cd(cplx)>& f);

// d/dx on one grid line; d_x and d_y apply it along rows and columns.
Eigen::MatrixXd derivative_matrix(const ChartGrid& grid);

ScalarField d_x(const ChartGrid& grid, const ScalarField& f);
ScalarField d_y(const ChartGrid& grid, const ScalarField& f);
ScalarField d_z(const ChartGrid& grid, const ScalarField& f);     // (d_x - i d_y)/2
ScalarField d_zbar(const ChartGrid& grid, const ScalarField& f);  // (d_x + i d_y)/2
MatrixField d_z(const ChartGrid& grid, const MatrixField& f);
MatrixField d_zbar(const ChartGrid& grid, const MatrixField& f);

// ---------------------------------------------------------------------------
// Deformed complex structures

struct OneForm {
    ScalarField dz, dzbar;
};

// The dbar operator of the structure with Beltrami coefficient mu, in the fixed
// coordinates: (f_zbar - mu f_z)/(1 - |mu|^2) (dzbar + conj(mu) dz).
OneForm dbar_mu(const ChartGrid& grid, const ScalarField& f, const ScalarField& mu);

// mu_eps = eps nu phi0(|z|), phi0 = 1 on |z| <= 2/3 and 0 from |z| = 1 on.
struct BeltramiFamily {
    cplx nu{0.0, 0.0};
    std::vector<double> eps_grid{1e-2, 5e-3, 2.5e-3};

    void validate() const;
    static double cutoff(double r);
    cplx mu(double eps, cplx z) const { return eps * nu * cutoff(std::abs(z)); }
    ScalarField sample(const ChartGrid& grid, double eps) const;
};

// Normalized solution of w_zbar = eps nu w_z on the plane for constant nu.
struct QCMap {
    cplx nu{0.0, 0.0};

    cplx w(double eps, cplx z) const { return (z + eps * nu * std::conj(z)) / (1.0 + eps * nu); }
    cplx wdot(cplx z) const { return nu * (std::conj(z) - z); }
    double theta(double eps, cplx z) const { return std::arg(w(eps, z)); }
};

// ---------------------------------------------------------------------------
// Connections and the complex gauge action

// A unitary connection is stored by its dzbar component; A_z = -A_zbar^dagger.
MatrixField connection_dz(const MatrixField& a_zbar);
MatrixField adjoint_field(const MatrixField& f);  // pointwise dagger

// A_zbar = (A_x + i A_y)/2 at the vertices of the single torus chart, with
// A_x = log(U)/h averaged over the two incident x-edges (and likewise in y).
MatrixField connection_from_links(const LinkField& field, ChartGrid& grid);

// dzbar coefficient of g(d + A) on the structure mu, in the fixed coordinates:
//   g^-1 Q_A g + g* (mu P_A) g*^-1 + g^-1 Q_g - mu P_{g*} g*^-1,
// with Q, P the (0,1) and (1,0) coefficients of a form relative to mu.
MatrixField gauge_action_zbar(const ChartGrid& grid, const MatrixField& a_zbar, const MatrixField& g,
                              const ScalarField& mu);

// dbar_B X = X_zbar + [B, X].
MatrixField covariant_dbar(const ChartGrid& grid, const MatrixField& b_zbar, const MatrixField& x);

struct VariationInput {
    MatrixField a_zbar, g, gdot, adot_zbar;
    ScalarField nu;
};

// dbar_{g(A)}(g^-1 gdot) - nu [(d_A g*) g*^-1 + g*^-1 d_A g*] + g^-1 Adot_zbar g,
// with d_A s = s_z + [A_z, s] on endomorphisms.
MatrixField first_variation(const ChartGrid& grid, const VariationInput& in);

// Central difference of gauge_action_zbar along (g + eps gdot, A + eps Adot, eps nu).
MatrixField first_variation_fd(const ChartGrid& grid, const VariationInput& in, double eps);

struct VerificationReport {
    std::string name;
    std::vector<double> eps, errors;
    double max_error = 0.0;
    double order = 0.0;  // smallest observed order between consecutive eps
};
VerificationReport first_variation_convergence(const ChartGrid& grid, const VariationInput& in,
                                               const std::vector<double>& eps);
std::string to_json(const VerificationReport& r);

// L2-orthonormal basis (weight h^2) of the kernel of the adjoint of
// covariant_dbar(b_zbar, .) on a periodic grid; columns are flattened fields.
Eigen::MatrixXcd harmonic_forms(const ChartGrid& grid, const MatrixField& b_zbar, double rel_tol = 1e-10);
Eigen::VectorXcd flatten(const MatrixField& f);
// max over basis columns of |<k, f>|.
double harmonic_pairing(const ChartGrid& grid, const Eigen::MatrixXcd& basis, const MatrixField& f);

// ---------------------------------------------------------------------------
// Frame twisting at the puncture

// u with i u = (alpha/2)(wdot/z - conj(wdot/z)), i.e. alpha Im(wdot/z).
double frame_twist_derivative(double alpha, cplx z, cplx wdot);

// phi2 = 1 on |z| <= 1/3, 0 from 2/3 on, quintic in between.
double cutoff_phi2(double r);
double cutoff_phi2_prime(double r);

// (gamma_dot^{0,1})_{e+} at z != 0 for the constant-nu family with weights
// alpha -> beta, phi1 the twist cutoff of the field module.
cplx twisted_gamma_dot_at(double alpha, double beta, cplx nu, cplx z);
ScalarField twisted_gamma_dot(double alpha, double beta, cplx nu, const ChartGrid& grid);

struct SupportReport {
    double max_inside = 0.0;   // over r_in <= |z| <= r_out
    double max_outside = 0.0;  // elsewhere
};
SupportReport support_check(const ChartGrid& grid, const ScalarField& f, double r_in = 1.0 / 6,
                            double r_out = 2.0 / 3);

}  // namespace ymlab
