#pragma once

#include "ymlab/field.hpp"

#include <Eigen/Sparse>

#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace ymlab {

struct SpectralError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Bundle { functions, adjoint };
enum class Boundary { closed, dirichlet, neumann };

const char* to_string(Bundle b);
const char* to_string(Boundary b);

// One weighted edge of the stencil: energy w |R x_b - x_a|^2 between dof blocks a and b.
struct Coupling {
    int a = -1, b = -1;
    double w = 0.0;
    Eigen::Matrix3d R = Eigen::Matrix3d::Identity();  // adjoint transport; unused for functions
};

// Delta = M^{-1} K on vertex blocks of size rank.  K is symmetric PSD, M the
// lumped vertex mass, so Delta is self-adjoint for the M-weighted product.
struct CovariantLaplacian {
    Bundle bundle = Bundle::functions;
    Boundary boundary = Boundary::closed;
    int rank = 1;
    double h = 0.0;  // smallest chart step
    Eigen::SparseMatrix<double> stiffness;
    Eigen::VectorXd mass;             // per dof
    std::vector<int> block_vertex;    // block -> vertex
    std::vector<int> vertex_block;    // vertex -> block, -1 when removed
    std::vector<int> block_component;
    int num_components = 0;
    std::vector<Coupling> couplings;

    Eigen::Index size() const { return stiffness.rows(); }
    int blocks() const { return static_cast<int>(block_vertex.size()); }
    Eigen::VectorXd apply(const Eigen::VectorXd& u) const;
    double inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;
    double norm(const Eigen::VectorXd& u) const { return std::sqrt(inner(u, u)); }
    double sup_norm(const Eigen::VectorXd& u) const;  // max over vertices of the fiber norm
};

// Stencil weights come from MetricGrid.edge_weight, which realizes
// (1/rho) d_x(rho d_x) + (1/rho^2) d_y^2 on cylinder cells.  Vertices of zero
// mass are dropped; Dirichlet also drops vertices on edges with one face.
CovariantLaplacian assemble_laplacian(const LinkField& field, const MetricGrid& metric, Bundle bundle,
                                      Boundary boundary);
CovariantLaplacian assemble_laplacian(const SurfaceComplex& s, const MetricGrid& metric, Boundary boundary);

struct EigenOptions {
    int dense_threshold = 4000;
    int max_iterations = 2000;
    double tolerance = 1e-9;  // absolute residual in the M-norm
    unsigned seed = 1;
};

struct Spectrum {
    Eigen::VectorXd values;   // ascending
    Eigen::MatrixXd vectors;  // columns, M-orthonormal
    Eigen::VectorXd sup_norms;
    double max_residual = 0.0;
    double orthonormality_error = 0.0;
};

// k smallest eigenpairs by shift-invert subspace iteration on a sparse LDLT
// factor.  Falls back to a dense solve below dense_threshold unknowns when the
// iteration stalls, and goes dense directly when k is half the dimension.
Spectrum eigensolve(const CovariantLaplacian& L, int k, const EigenOptions& opt = {});

// Number of eigenvalues below tol among the first k.
int kernel_dimension(const Spectrum& sp, double tol = 1e-8);

struct Lambda1Point {
    double ell = 0.0;
    double lambda1 = 0.0;
    int components = 1;
};

// lambda_1 of the adjoint Laplacian of the flat realization of rep at each ell.
std::vector<Lambda1Point> lambda1_sweep(const Representation& rep, const SurfaceComplex& s,
                                        const std::vector<double>& ells, double kappa = 1.0);

// ---------------------------------------------------------------------------
// Band-limited random mesh functions

// Eight modes per direction: Fourier products in chart coordinates on
// single-chart surfaces (sine in x under Dirichlet), and the first 64
// eigenfunctions of the scalar Laplacian on glued surfaces.
class BandLimitedSampler {
public:
    BandLimitedSampler(const SurfaceComplex& s, const MetricGrid& metric, Boundary boundary, int modes = 8);
    Eigen::VectorXd sample(std::mt19937_64& rng) const;  // per vertex
    Eigen::VectorXd section(std::mt19937_64& rng, const CovariantLaplacian& L) const;  // per dof
    Eigen::Index dimension() const { return basis_.cols(); }

private:
    Eigen::MatrixXd basis_;
    Eigen::VectorXd weight_;
};

// ---------------------------------------------------------------------------
// Sobolev constants

enum class SobolevMode { s1, s2 };

struct SobolevEstimate {
    double s1_upper = std::numeric_limits<double>::quiet_NaN();
    double s2_upper = std::numeric_limits<double>::quiet_NaN();
    Eigen::VectorXd s1_witness;  // per vertex
    Eigen::VectorXd s2_witness;
};

// |df|_1 = sum over active cells of sqrt(area * cell Dirichlet energy).
double gradient_l1(const SurfaceComplex& s, const MetricGrid& metric, const Eigen::VectorXd& f);
double dirichlet_energy(const SurfaceComplex& s, const MetricGrid& metric, const Eigen::VectorXd& f);

// s1: |df|_1^2 / inf_a |f - a|_2^2.  s2: |df|_1^2 / |f|_2^2 with f = 0 on the boundary.
double sobolev_ratio(const SurfaceComplex& s, const MetricGrid& metric, SobolevMode mode, const Eigen::VectorXd& f);

SobolevEstimate estimate_sobolev(const SurfaceComplex& s, const MetricGrid& metric, SobolevMode mode,
                                 unsigned seed = 7);

// ---------------------------------------------------------------------------
// Audits

struct SupBoundReport {
    std::vector<double> per_mode;  // |phi|_inf^2 / ((1/a + (4 lambda/s1)^2 a) |phi|_2^2)
    double C = 0.0;                // smallest constant passing every check
};
SupBoundReport sup_bound_audit(const Spectrum& sp, double total_area, const SobolevEstimate& sob);

struct UniformSupFit {
    double C1 = 0.0, C2 = 0.0;
    bool holds = false;
};
// |phi|_inf <= C1 + C2 lambda^5 over pooled (lambda, sup) pairs.
UniformSupFit fit_uniform_sup(const std::vector<double>& lambda, const std::vector<double>& sup);

struct GrowthReport {
    double C = 0.0;        // min C with k <= C rank (1 + 4 lambda_k a / s1)^3, or the Dirichlet form
    double C_lower = 0.0;  // min over k in [k_lo, k_hi] of lambda_k / k^{1/3}
    int k_lo = 5, k_hi = 30;
};
GrowthReport growth_audit(const Spectrum& sp, int rank, double total_area, const SobolevEstimate& sob,
                          Boundary boundary, int k_lo = 5, int k_hi = 30);

struct KatoReport {
    double lhs = 0.0;    // int |phi|^{2 alpha - 2} <phi, Delta phi>
    double rhs = 0.0;    // (2 alpha - 1)/alpha^2 int |d |phi|^alpha|^2
    double slack = 1.0;  // 1 - 10 h
    bool holds = false;
};
KatoReport kato_and_key_estimate_check(const CovariantLaplacian& L, const Eigen::VectorXd& section, double alpha);

struct ProductBoundReport {
    double log_lhs = 0.0;
    double lhs = 0.0;
    double C_beta = 0.0;
    double rhs = 0.0;
    bool holds = false;
};
// log of prod_{j=0}^{terms} (1 + gamma beta^{2j}/(2 beta^j - 1))^{1/beta^j}.
double log_product(double gamma, double beta, int terms);
ProductBoundReport product_bound_check(double gamma, double beta, int terms);

struct L4Report {
    double max_ratio = 0.0;  // max |f|_4^2 / (|df|_2^2 + |f|_2^2)
    int trials = 0;
};
L4Report sobolev_l4_check(const SurfaceComplex& s, const MetricGrid& metric, int trials, unsigned seed = 7);

struct HeatResult {
    Eigen::VectorXd v;
    double tail_bound = 0.0;  // L2 bound on the unresolved part at time t
    double sup_ratio = 0.0;   // sup |v(t)| / |v0|_2
};
// Spectral synthesis over the modes of sp.  Throws SpectralError when the tail
// bound exceeds tail_tol |v0|_2.
HeatResult heat_evolve(const CovariantLaplacian& L, const Spectrum& sp, const Eigen::VectorXd& v0, double t,
                       double tail_tol = 1e-8);

// Coordinate text format: "rows cols nnz" then one-based "i j value" lines.
void write_coo(const CovariantLaplacian& L, std::ostream& out);

}  // namespace ymlab
