#pragma once

#include "ymlab/io.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <future>
#include <map>
#include <string>
#include <thread>
#include <vector>

namespace ymlab {

inline constexpr const char* kArtifactVersion = "1.0.0";

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat key=value pairs under [section] headers; keys are "section.key".
class Config {
public:
    static Config parse(std::istream& in);
    static Config load(const std::string& path);

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) != 0; }
    const std::map<std::string, std::string>& values() const { return values_; }

    std::string text(const std::string& key, const std::string& def) const;
    double number(const std::string& key, double def) const;
    int integer(const std::string& key, int def) const;
    // Comma-separated list.
    std::vector<double> numbers(const std::string& key, const std::vector<double>& def) const;

    // Sections and keys in sorted order; parse(serialize()) reproduces the map.
    std::string serialize() const;

private:
    std::map<std::string, std::string> values_;
};

struct ExperimentManifest {
    std::string experiment;
    std::string version = kArtifactVersion;
    Config params;
    std::map<std::string, std::string> outputs;  // I/O paths; not part of the run id

    std::string serialize() const;
    static ExperimentManifest parse(const std::string& text);
    // SHA-256 of the experiment name, version and parameters.
    std::string run_id() const;
};

// One acceptance-style comparison.  Failures keep the value and the bound.
struct Check {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double bound = 0.0;
    std::string relation;  // "<=", ">=", "<", ">", "=="
    std::string detail;
    bool expected_failure = false;  // known to fail; reported but not fatal
};

Check check_le(std::string name, double value, double bound, std::string detail = {});
Check check_lt(std::string name, double value, double bound, std::string detail = {});
Check check_ge(std::string name, double value, double bound, std::string detail = {});
Check check_gt(std::string name, double value, double bound, std::string detail = {});
Check check_true(std::string name, bool ok, std::string detail = {});

struct RunResult {
    ExperimentManifest manifest;
    std::vector<Check> checks;
    std::map<std::string, Table> series;  // keyed "<kind>" or "<kind>/<label>"
    std::map<std::string, std::string> notes;
    std::map<std::string, double> timings;  // seconds; kept out of the report

    bool passed() const;       // every check passed
    bool acceptable() const;   // every failing check is an expected failure
    std::string report_json() const;
};

// YMLAB_WORKERS, else the hardware concurrency, at least 1.
int worker_count();

// Calls fn(i) for i < n on a pool of worker_count() threads; results are
// placed by index, so the merge does not depend on completion order.
template <class F> auto parallel_map(std::size_t n, F fn) -> std::vector<decltype(fn(std::size_t{}))> {
    using R = decltype(fn(std::size_t{}));
    std::vector<R> out(n);
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(worker_count()));
    std::atomic<std::size_t> next{0};
    std::vector<std::future<void>> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.push_back(std::async(std::launch::async, [&] {
            for (std::size_t i = next++; i < n; i = next++) out[i] = fn(i);
        }));
    for (auto& f : pool) f.get();
    return out;
}

inline const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"plumb",   "curvature", "flow",  "spectrum", "variation",
                                                "foliate", "degenerate", "audit", "sweep"};
    return names;
}

// Audit suites in acceptance order.
inline const std::vector<std::string>& audit_suites() {
    static const std::vector<std::string> names{"plumbing", "curvature", "gradient", "roundtrip",
                                                "decay",    "reducibility", "eigen", "kato",
                                                "heat",     "variation", "composition", "degeneration"};
    return names;
}

// Executes one pipeline.  Parameters are read from "<subcommand>.<key>"; the
// audit suite is "audit.suite" and its seed "audit.seed".
RunResult run(const std::string& subcommand, const Config& config);
RunResult run_audit(const std::string& suite, const Config& config);

// Writes every series of the given kind as tidy CSV under dir; returns the paths.
// Throws ConfigError when the result has no such series or its columns do not
// follow the kind's schema.
std::vector<std::string> emit_plot_data(const RunResult& result, const std::string& kind, const std::string& dir);

// manifest.ini, report.json, timings.csv and all series under dir.
void write_outputs(const RunResult& result, const std::string& dir);

}  // namespace ymlab
