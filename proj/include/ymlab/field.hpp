#pragma once

#include "ymlab/geom.hpp"
#include "ymlab/su2.hpp"

#include <map>
#include <string>
#include <vector>

namespace ymlab {

struct PathError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct StandardFormError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RepresentationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// One group element per edge, transporting the fiber at v1 to the fiber at v0.
// Traversing an edge backwards uses the inverse.  Gauge g acts by
// U_e -> g(v0) U_e g(v1)^{-1}.
struct LinkField {
    const SurfaceComplex* surface = nullptr;
    std::vector<Su2d> links;

    Su2d along(const DirEdge& d) const {
        return d.s > 0 ? links[d.e] : links[d.e].conjugate();
    }
};

LinkField identity_field(const SurfaceComplex& s);

// Ordered product around the face, based at its lower-left vertex.
Su2d plaquette(const LinkField& field, int face);

// Principal log of the plaquette product, in algebra-vector coordinates.
Algd plaquette_log(const LinkField& field, int face);
Mat2cd plaquette_log_matrix(const LinkField& field, int face);

struct CurvatureField {
    std::vector<Algd> log;        // per face; zero on inactive faces
    std::vector<double> density;  // |log P|_F / area, zero on inactive faces
};

// Faces carrying curvature: positive area under the metric.
CurvatureField curvature(const LinkField& field, const MetricGrid& metric);

struct CurvatureNorms {
    double sup = 0.0;
    double l2 = 0.0;
};
CurvatureNorms curvature_norms(const LinkField& field, const MetricGrid& metric);

Su2d holonomy_loop(const LinkField& field, const Path& path);

using GaugeField = std::vector<Su2d>;
LinkField gauge_transform(const LinkField& field, const GaugeField& g);
GaugeField random_gauge(int num_vertices, unsigned seed);

// ---------------------------------------------------------------------------
// Twist near the puncture

// Quintic smoothstep cutoff: 1 on r <= 1/6, 0 on r >= 1/3.
double cutoff_phi1(double r);
double cutoff_phi1_prime(double r);

struct TwistProfile {
    double alpha = 0.0;
    double beta = 0.0;

    // Angular coefficient of the twisted standard form, diag(i a, -i a) d theta.
    double a(double r) const;
    double a_prime(double r) const;
};

TwistProfile twist_profile(double alpha, double beta);

// Disk around the puncture on which the standard form is enforced.
inline constexpr double kStandardDiskRadius = 0.4;
inline constexpr double kStandardFormTol = 1e-8;

// Vertices within the standard disk of puncture 0, in chart coordinates.
std::vector<int> puncture_disk_vertices(const SurfaceComplex& s, double radius = kStandardDiskRadius);

// Polar angle increment of an edge traversed v0 -> v1, seen from the puncture.
double edge_angle(const SurfaceComplex& s, int edge);

// Gauge-fixes a field that is flat on the puncture disk so that every disk
// link becomes diag(e^{i alpha dtheta}, e^{-i alpha dtheta}).  Returns the
// fixed field and alpha.  Throws StandardFormError when the disk is not flat.
struct StandardForm {
    LinkField field;
    double alpha = 0.0;
};
StandardForm standard_form(const LinkField& field);

// Multiplies each disk link by exp(i tau int (a - alpha) d theta).  Requires
// diagonal disk links.
LinkField apply_twist(const LinkField& field, const TwistProfile& profile);

// ---------------------------------------------------------------------------
// Representations

struct Representation {
    std::map<std::string, Su2d> loops;
};

Representation extract_representation(const LinkField& field);

// Flat field whose generator loops reproduce rep exactly; the remaining loops
// of rep are checked against the realized holonomies.
LinkField connection_from_representation(const Representation& rep, const SurfaceComplex& s,
                                         double tol = 1e-10);

// max over non-generator loops of |realized - given|_op; 0 when rep lists only generators.
double relation_residual(const Representation& rep, const SurfaceComplex& s);

// Fills in every derived loop (puncture, pinching loop) from the generators.
Representation complete_representation(const Representation& generators, const SurfaceComplex& s);

Representation conjugate(const Representation& rep, const Su2d& g);

enum class Reducibility { irreducible, reducible, central };
const char* to_string(Reducibility r);

struct ReducibilityReport {
    Reducibility kind = Reducibility::irreducible;
    int commutant_dim = 1;  // complex dimension of the commutant in M_2(C)
};

ReducibilityReport reducibility(const std::vector<Su2d>& mats, double tol = 1e-9);
ReducibilityReport reducibility(const Representation& rep, double tol = 1e-9);

struct AccidentalReport {
    std::vector<bool> component_reducible;
    bool globally_irreducible = false;
    bool accidental = false;  // every component restriction reducible
};

AccidentalReport accidental_reducibility(const Representation& rep, const SurfaceComplex& s,
                                         double tol = 1e-9);

// Traces of each loop, then of products of consecutive pairs.
std::vector<double> conjugacy_invariants(const Representation& rep, const std::vector<std::string>& names);

double trace_distance(const std::vector<double>& a, const std::vector<double>& b);

// Built-in representations.
// Punctured torus: a, b rotations by 0.4 pi about axes at the angle fixing tr p = 2 cos(2 pi alpha).
Representation punctured_torus_rep(const SurfaceComplex& s, double alpha);
// Genus 2: irreducible on both sides, puncture weight alpha.
Representation genus2_irreducible_rep(const SurfaceComplex& s, double alpha);
// Genus 2: each side abelian in a different maximal torus, trivial puncture.
Representation genus2_accidental_rep(const SurfaceComplex& s);

}  // namespace ymlab
