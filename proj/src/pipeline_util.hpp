#pragma once

#include "ymlab/flow.hpp"
#include "ymlab/harness.hpp"

#include <chrono>
#include <string>

namespace ymlab::detail {

// <sec>.topology, <sec>.n, <sec>.hole, <sec>.cyl_nx; genus-2 defaults to {16, 2, 8}.
SurfaceSpec surface_spec(const Config& c, const std::string& sec, const std::string& topology);

// "torus" (punctured torus), "irreducible", "accidental", "trivial", or a file
// path read as representation text.  The default follows the topology.
Representation named_rep(const Config& c, const std::string& sec, const SurfaceComplex& s, double alpha);

FlowConfig flow_config(const Config& c, const std::string& sec);

// Columns (t, sup_f, fit) with fit = exp(intercept - rate t).
Table decay_table(const FlowDiagnostics& diag, const DecayFit& fit);

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace ymlab::detail
