#pragma once

#include "ymlab/field.hpp"

#include <string>
#include <vector>

namespace ymlab {

enum class Integrator { euler, rk4 };

struct FlowConfig {
    double dt = 1e-4;         // initial step
    double tol_flat = 1e-6;   // target sup |*F|
    double t_max = 50.0;
    Integrator integrator = Integrator::euler;
    bool adapt = true;        // halve on action increase, regrow by dt_growth
    double dt_growth = 1.1;
    double dt_max = 1.0;
    long max_steps = 4'000'000;
    double flat_reference = 0.0;  // YM of the limit, for the Rade ratio column
    bool probe_reducible = false;  // adjoint lambda_1 at the endpoint
    std::vector<std::uint8_t> extra_frozen;  // per edge; empty or one entry per edge

    void validate() const;
};

struct FlowSample {
    double t = 0, ym = 0, grad_norm = 0, sup_f = 0, rade_ratio = 0;
};

struct FlowDiagnostics {
    std::vector<FlowSample> samples;
    bool converged = false;
    bool timed_out = false;
    bool near_reducible = false;
    double endpoint_lambda1 = -1.0;  // only when probed
    long steps = 0;
    long rejected = 0;
    double max_increase = 0.0;  // largest accepted YM increase (monotonicity audit)
};

struct FlowResult {
    LinkField field;
    FlowDiagnostics diag;
};

struct FlowTimeout : std::runtime_error {
    FlowDiagnostics diag;
    FlowTimeout(const std::string& what, FlowDiagnostics d) : std::runtime_error(what), diag(std::move(d)) {}
};

// Edges whose links never move: the ring of each excised puncture cell (keeps
// its holonomy exact) and edges touching no face of positive area.
std::vector<std::uint8_t> frozen_edges(const SurfaceComplex& s, const MetricGrid& metric);

// sum over active faces of |log P|_F^2 / area.
double ym_action(const LinkField& field, const MetricGrid& metric);

// dYM along left-translation U_e -> exp(xi_e) U_e, one algebra vector per edge.
std::vector<Algd> ym_differential(const LinkField& field, const MetricGrid& metric);

// Riemannian gradient of YM/2 for the link metric 2 w_e |xi_e|^2; zero on frozen edges.
// The flow U <- exp(-dt grad) U is the lattice version of dA/dt = -D*F.
std::vector<Algd> ym_gradient(const LinkField& field, const MetricGrid& metric,
                              const std::vector<std::uint8_t>& frozen);

// |D*F|_2 on the lattice: sqrt(sum 2 w_e |grad_e|^2).
double gradient_norm(const std::vector<Algd>& grad, const MetricGrid& metric);

// Left-translates each link: U_e <- exp(scale * xi_e) U_e.
LinkField step_links(const LinkField& field, const std::vector<Algd>& xi, double scale);

FlowResult flow_to_flat(const LinkField& field, const MetricGrid& metric, const FlowConfig& cfg);

// |D*F|_2 / |YM - YM_inf|^{1/2}.  Throws std::domain_error when the difference is <= 1e-14.
double rade_ratio(const LinkField& field, const MetricGrid& metric, double flat_reference_energy);

struct DecayFit {
    double rate = 0.0;
    double r_squared = 0.0;
    double intercept = 0.0;
    std::size_t samples = 0;
};

// Least-squares fit of log sup|*F| against t over the last tail_fraction of the samples.
DecayFit decay_fit(const FlowDiagnostics& diag, double tail_fraction);
DecayFit decay_fit(const std::vector<double>& t, const std::vector<double>& sup_f, double tail_fraction);

}  // namespace ymlab
