#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace ymlab {

struct GeometryError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Cylinder x in [-1,1], y in [0, 2 pi) periodic, metric dx^2 + rho(x)^2 dy^2.
template <class S> struct ConicCylinder {
    S kappa = S(1);
    S ell = S(1);
    int nx = 16;
    int ny = 16;

    void validate() const {
        if (!(kappa > S(0) && kappa <= S(1))) throw GeometryError("kappa must lie in (0,1]");
        if (!(ell >= S(0) && ell <= S(1))) throw GeometryError("ell must lie in [0,1]");
        if (nx < 4 || ny < 4) throw GeometryError("cylinder resolution must be at least 4");
    }
};

// rho^2(x) = (ell + (1-ell) x^2) kappa^2.
template <class S> S metric_factor(const ConicCylinder<S>& c, S x) {
    if (x < S(-1) || x > S(1)) throw GeometryError("x outside [-1,1]");
    return (c.ell + (S(1) - c.ell) * x * x) * c.kappa * c.kappa;
}

template <class S> S metric_rho(const ConicCylinder<S>& c, S x) {
    return c.kappa * std::sqrt(c.ell + (S(1) - c.ell) * x * x);
}

namespace detail {
// asinh(u)/u, analytic at u = 0.
template <class S> S asinh_over(S u) {
    if (std::abs(u) < S(1e-4)) {
        const S u2 = u * u;
        return S(1) - u2 / S(6) + S(3) * u2 * u2 / S(40);
    }
    return std::asinh(u) / u;
}
}  // namespace detail

// Conformal radius r = f(x) of the plumbing coordinate on the cylinder:
// d/dx log f = 1/(kappa sqrt(ell + (1-ell) x^2)), f(1) = 1.
template <class S> struct PlumbingMap {
    S kappa = S(1);
    S ell = S(1);
    S epsilon = S(0);

    // log f(x) = -(1/kappa) int_x^1 dt / sqrt(ell + (1-ell) t^2).
    S log_radius(S x) const {
        if (ell == S(0)) {
            // Pinched annulus: only the half x > 0 stays attached to the end x = 1.
            if (x <= S(0)) return -std::numeric_limits<S>::infinity();
            return std::log(x) / kappa;
        }
        const S s = std::sqrt((S(1) - ell) / ell);
        const S rs = std::sqrt(ell);
        auto prim = [&](S t) { return t * detail::asinh_over(t * s) / rs; };
        return -(prim(S(1)) - prim(x)) / kappa;
    }
    S operator()(S x) const { return std::exp(log_radius(x)); }
};

// Closed form eps(ell) = [ell/(1+sqrt(1-ell))^2]^{1/(kappa sqrt(1-ell))}, eps(1) = e^{-2/kappa}.
template <class S> S plumbing_epsilon(S ell, S kappa) {
    if (!(kappa > S(0) && kappa <= S(1))) throw GeometryError("kappa must lie in (0,1]");
    if (!(ell >= S(0) && ell <= S(1))) throw GeometryError("ell must lie in [0,1]");
    if (ell == S(0)) return S(0);
    const S q = std::sqrt(S(1) - ell);
    if (q < S(1e-6)) {
        // Same value via the asinh form, which stays regular as ell -> 1.
        const S s = q / std::sqrt(ell);
        return std::exp(-S(2) * detail::asinh_over(s) / (kappa * std::sqrt(ell)));
    }
    const S base = ell / ((S(1) + q) * (S(1) + q));
    return std::pow(base, S(1) / (kappa * q));
}

template <class S> PlumbingMap<S> plumbing_map(const ConicCylinder<S>& c) {
    if (!(c.kappa > S(0) && c.kappa <= S(1))) throw GeometryError("kappa must lie in (0,1]");
    if (!(c.ell >= S(0) && c.ell <= S(1))) throw GeometryError("ell must lie in [0,1]");
    return PlumbingMap<S>{c.kappa, c.ell, plumbing_epsilon(c.ell, c.kappa)};
}

// Common eigenvalue R_1^1 = R_2^2 of the Ricci tensor (the Gauss curvature).
template <class S> S ricci_eigenvalue(const ConicCylinder<S>& c, S x) {
    if (x < S(-1) || x > S(1)) throw GeometryError("x outside [-1,1]");
    const S q = c.ell + (S(1) - c.ell) * x * x;
    if (q == S(0)) throw GeometryError("curvature undefined at the cone double point");
    return -c.ell * (S(1) - c.ell) / (q * q);
}

// sup_x |K| = (1-ell)/ell, attained at x = 0.
template <class S> S ricci_sup(const ConicCylinder<S>& c) {
    if (c.ell == S(0)) throw GeometryError("curvature unbounded at ell = 0");
    return (S(1) - c.ell) / c.ell;
}

// kappa^2 r^{2(kappa-1)}.
template <class S> S cone_metric_factor(S r, S kappa) {
    if (!(kappa > S(0) && kappa <= S(1))) throw GeometryError("kappa must lie in (0,1]");
    if (!(r > S(0))) throw GeometryError("cone metric singular at r = 0");
    return kappa * kappa * std::pow(r, S(2) * (kappa - S(1)));
}

// Gauss curvature -rho''/rho from second differences of rho on nx+1 nodes of [-1,1].
// Returns the node values at interior nodes, paired with x.
struct CurvatureSamples {
    std::vector<double> x;
    std::vector<double> k;
};
CurvatureSamples curvature_finite_difference(const ConicCylinder<double>& c, int nodes);

// ---------------------------------------------------------------------------
// Surface complexes

enum class ChartKind { torus, cylinder };

struct Chart {
    std::string name;
    ChartKind kind = ChartKind::torus;
    int nx = 0, ny = 0;
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    std::vector<std::uint8_t> hole;  // nx*ny, excised cells
    std::vector<int> vert;           // (nx+1)*(ny+1) -> global vertex
    std::vector<int> face;           // nx*ny -> global face or -1

    double hx() const { return (x1 - x0) / nx; }
    double hy() const { return (y1 - y0) / ny; }
    int vid(int i, int j) const { return vert[static_cast<std::size_t>(j) * (nx + 1) + i]; }
    int fid(int i, int j) const { return face[static_cast<std::size_t>(j) * nx + i]; }
    bool is_hole(int i, int j) const { return hole[static_cast<std::size_t>(j) * nx + i] != 0; }
};

struct Edge {
    int v0 = -1, v1 = -1;
    int chart = -1, i = 0, j = 0;
    bool along_x = true;
};

// Counterclockwise boundary: bottom, right, top, left.  s = +1 when the
// traversal follows the edge's stored direction v0 -> v1.
struct Face {
    int chart = -1, i = 0, j = 0;
    std::array<int, 4> e{};
    std::array<int, 4> s{};
    std::array<int, 4> v{};  // lower-left, lower-right, upper-right, upper-left
};

struct DirEdge {
    int e = -1;
    int s = 1;
};

struct Path {
    int start = -1;
    std::vector<DirEdge> steps;
};

struct Puncture {
    int face = -1;
    int chart = -1;
    double cx = 0, cy = 0;  // chart coordinates of the puncture point
};

struct SurfaceComplex {
    std::string topology;
    std::vector<Chart> charts;
    int num_vertices = 0;
    std::vector<Edge> edges;
    std::vector<Face> faces;
    std::vector<Puncture> punctures;
    std::vector<Path> pinching_curves;
    std::map<std::string, Path> loops;     // closed loops based at base_vertex
    std::vector<std::string> generators;   // loops carrying free link values in a flat realization
    std::vector<std::vector<std::string>> component_loops;  // loops generating each component of the complement of the pinching curves
    std::vector<Path> transverse_arcs;     // open arcs across pinching cylinders
    int base_vertex = 0;
    int cylinder_chart = -1;
    int genus = 0;

    std::vector<int> vertex_chart, vertex_i, vertex_j;  // first chart occurrence
    std::vector<std::array<int, 2>> edge_faces;          // -1 when absent

    Eigen::Vector2d vertex_xy(int v) const;
    int euler_characteristic() const;           // closed surface, puncture cells counted
    int punctured_euler_characteristic() const;  // puncture cells removed
    int path_end(const Path& p) const;
};

// Fixed-size options for the three built-in topologies.
struct SurfaceSpec {
    std::string topology = "torus";
    int n = 16;        // torus chart resolution
    int hole = 4;      // hole side (cells) on genus-2 torus charts
    int cyl_nx = 16;   // cylinder cells in x (even)
};

SurfaceComplex build_surface(const SurfaceSpec& spec);

// Stand-alone conic cylinder with boundary circles at x = -1, 1.
SurfaceComplex build_cylinder(int nx, int ny);

// Per-cell metric data realizing ds_ell^2 on cylinder charts and the flat metric elsewhere.
struct MetricGrid {
    double ell = 1.0;
    double kappa = 1.0;
    std::vector<double> cell_area;      // per face
    std::vector<double> conformal;      // per face: rho^2 at the cell center (1 on flat charts)
    std::vector<double> edge_weight;    // Dirichlet-energy weight per edge
    std::vector<double> face_wx, face_wy;  // per face: share of the weight on its x (bottom/top) and y edges
    std::vector<double> vertex_mass;    // lumped area per vertex
    std::vector<std::uint8_t> face_active;
    std::vector<int> component;         // per vertex, -1 when inactive
    int num_components = 0;
    double total_area = 0.0;
};

// int_a^b dx / rho(x), exact; infinite when [a,b] reaches the ell = 0 double point.
double inverse_rho_integral(double ell, double kappa, double a, double b);

MetricGrid metric_for(const SurfaceComplex& s, double ell, double kappa);

// Cylinder columns that collapse at ell = 0.
bool is_pinch_cell(const SurfaceComplex& s, int face);

}  // namespace ymlab
