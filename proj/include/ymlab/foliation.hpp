#pragma once

#include "ymlab/flow.hpp"

#include <string>
#include <vector>

namespace ymlab {

struct FoliationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised for inputs in the excluded set: globally irreducible, reducible on
// every component of the pinched surface.
struct AccidentalReducibilityError : FoliationError {
    using FoliationError::FoliationError;
};

// Puncture-loop trace equals 2 cos(2 pi alpha).
struct FoliationPoint {
    Representation rep;
    double alpha = 0.25;
    double ell = 1.0;
    double kappa = 1.0;
};

void validate(const FoliationPoint& p, double tol = 1e-8);

// Point carried by a flow output: loops recomputed from the generators so the
// surface relation holds exactly, weight read off the puncture trace.
FoliationPoint foliation_point(const Representation& rep, const SurfaceComplex& s, double ell = 1.0,
                               double kappa = 1.0);

struct FoliationConfig {
    FlowConfig flow;
    double trace_tol = 1e-3;  // puncture trace against 2 cos(2 pi beta)
    double input_tol = 1e-8;  // puncture trace of the input against 2 cos(2 pi alpha)
};

struct PiResult {
    Representation rep;
    LinkField initial;  // standard-form field before the twist; its links are the fixed frame
    LinkField field;    // flat endpoint
    FlowDiagnostics diag;
};

// Twist a flat field in standard form from alpha to beta and flow back to flat.
// Throws FlowTimeout when the flow does not reach tol_flat.
PiResult twist_and_flow(const LinkField& standard, const MetricGrid& metric, double alpha, double beta,
                        const FlowConfig& cfg);

PiResult pi_ab_run(const FoliationPoint& point, double beta, const SurfaceComplex& s, const FoliationConfig& cfg = {});
Representation pi_ab(const FoliationPoint& point, double beta, const SurfaceComplex& s,
                     const FoliationConfig& cfg = {});

// Loop names used for trace coordinates: every named loop of the surface.
std::vector<std::string> trace_names(const SurfaceComplex& s);

// Trace distance between pi_{alpha gamma} and pi_{beta gamma} o pi_{alpha beta}.
double composition_check(const FoliationPoint& point, double beta, double gamma, const SurfaceComplex& s,
                         const FoliationConfig& cfg = {});

struct LeafTrace {
    std::vector<double> beta;
    std::vector<Representation> reps;
    std::vector<std::vector<double>> invariants;
    std::vector<double> step_distance;  // between consecutive betas
    double lipschitz = 0.0;             // max step distance / step
    double max_second_difference = 0.0; // max |second difference| / step^2 of any coordinate
};

// betas inside (0, 1/2), increasing or decreasing with steps at most 0.05.
LeafTrace leaf_sweep(const FoliationPoint& point, const std::vector<double>& betas, const SurfaceComplex& s,
                     const FoliationConfig& cfg = {});

// Limit of the flow restricted to diagonal fields: plaquette angles relax to
// c * area by a scalar Poisson solve on the dual graph of the active cells.
// Requires every free edge to border two active cells.
LinkField abelian_limit(const LinkField& diagonal, const MetricGrid& metric);

// Component of the complement of the pinching curves that contains the puncture, at ell = 0.
int puncture_component(const SurfaceComplex& s, const MetricGrid& nodal_metric);

// Smallest adjoint eigenvalue whose eigenvector lives on the given component.
double component_lambda1(const LinkField& field, const MetricGrid& metric, int component);

struct NodalResult {
    PiResult run;
    double twisted_lambda1 = 0.0;  // adjoint lambda_1 of the twisted p-component at ell = 0
};

// pi_ab at ell = 0: pinched cells drop out, the flow moves only the component
// containing p, and the cylinder links keep the gluing frames.
NodalResult nodal_pi_ab(const FoliationPoint& point, double beta, const SurfaceComplex& s,
                        const FoliationConfig& cfg = {}, double min_lambda1 = 1e-4);

struct DegenerationRow {
    double ell = 0.0;
    std::vector<double> invariants;
    double distance_to_nodal = 0.0;
    double max_transverse = 0.0;  // max over arcs of |hol(end) hol(start)^-1 - I|_op
    double puncture_trace = 0.0;
    double pinch_drift = 0.0;  // max trace change around the pinching curves
    int flow_steps = 0;
};

struct DegenerationReport {
    std::vector<std::string> names;
    std::vector<double> nodal_invariants;
    std::vector<DegenerationRow> rows;
    bool distances_decrease = false;
    double final_distance = 0.0;
    double final_transverse = 0.0;
};

// ells strictly decreasing and positive; the nodal run supplies the limit.
DegenerationReport degeneration_experiment(const FoliationPoint& point, double beta, const std::vector<double>& ells,
                                           const SurfaceComplex& s, const FoliationConfig& cfg = {});

// Loops off the cylinder: every named loop except pinching loops.
std::vector<std::string> off_cylinder_names(const SurfaceComplex& s);

}  // namespace ymlab
