#include "ymlab/harness.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <iostream>

namespace {

using ymlab::Config;
using ymlab::RunResult;

struct Common {
    std::string config_path;
    std::string out_dir;
    std::vector<std::string> sets;
    std::vector<std::string> emit;
};

// Flags that map onto "<subcommand>.<key>" config entries.
struct Bound {
    std::string key;
    std::string value;
};

void print_table(const ymlab::Table& t) {
    for (std::size_t c = 0; c < t.columns.size(); ++c) std::cout << (c ? "," : "") << t.columns[c];
    std::cout << '\n';
    char buf[32];
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            std::snprintf(buf, sizeof buf, "%.6g", row[c]);
            std::cout << (c ? "," : "") << buf;
        }
        std::cout << '\n';
    }
}

void print_result(const RunResult& r, bool tables) {
    std::cout << "# " << r.manifest.experiment << "  run " << r.manifest.run_id().substr(0, 16) << '\n';
    for (const auto& c : r.checks)
        std::cout << (c.passed ? "PASS " : (c.expected_failure ? "FAIL(expected) " : "FAIL ")) << c.name << ": " << c.value
                  << ' ' << c.relation << ' ' << c.bound << (c.detail.empty() ? "" : "  [" + c.detail + "]") << '\n';
    for (const auto& [k, v] : r.notes)
        if (v.size() < 400) std::cout << "# " << k << ": " << v << '\n';
    if (!tables) return;
    for (const auto& [name, t] : r.series) {
        if (t.rows.size() > 40) {
            std::cout << "# " << name << ": " << t.rows.size() << " rows (see --out)\n";
            continue;
        }
        std::cout << "# " << name << '\n';
        print_table(t);
    }
}

int finish(const RunResult& r, const Common& opt, bool tables) {
    print_result(r, tables);
    if (!opt.out_dir.empty()) {
        ymlab::write_outputs(r, opt.out_dir);
        for (const auto& kind : opt.emit) ymlab::emit_plot_data(r, kind, opt.out_dir + "/plot");
    }
    return r.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Yang-Mills flow laboratory on degenerating surfaces"};
    app.require_subcommand(1);
    Common opt;
    std::map<std::string, std::vector<Bound>> flags;

    auto add = [&](CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help) {
        auto& list = flags[sub->get_name()];
        list.push_back({key, {}});
        // Stable address: reserve before handing pointers out.
        sub->add_option(flag, list.back().value, help);
    };
    for (const auto& name : ymlab::subcommands()) flags[name].reserve(16);

    std::vector<CLI::App*> subs;
    for (const auto& name : ymlab::subcommands()) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", opt.config_path, "INI file with [section] key=value physics parameters");
        sub->add_option("--out", opt.out_dir, "directory for manifest, report and CSV outputs");
        sub->add_option("--set", opt.sets, "override, section.key=value")->allow_extra_args(false);
        sub->add_option("--emit", opt.emit, "plot-data kind: decay, lambda1, leaf, convergence");
        subs.push_back(sub);
    }
    auto sub = [&](const std::string& n) { return app.get_subcommand(n); };
    add(sub("plumb"), "--kappa", "kappa", "cone parameter in (0,1]");
    add(sub("plumb"), "--ell", "ell", "neck parameter(s), comma separated");
    add(sub("curvature"), "--kappa", "kappa", "cone parameter");
    add(sub("curvature"), "--ell", "ell", "neck parameter");
    add(sub("curvature"), "--nodes", "nodes", "grid nodes on [-1,1]");
    for (const char* s : {"flow", "spectrum", "foliate", "degenerate", "sweep"}) {
        add(sub(s), "--topology", "topology", "torus | one_holed_torus_punctured | genus2_separating_pinch");
        add(sub(s), "--n", "n", "torus chart resolution");
        add(sub(s), "--rep", "rep", "torus | irreducible | accidental | trivial | representation file");
        add(sub(s), "--alpha", "alpha", "puncture weight of the input");
        add(sub(s), "--kappa", "kappa", "cone parameter");
    }
    for (const char* s : {"flow", "foliate", "degenerate", "sweep"}) add(sub(s), "--beta", "beta", "target weight(s)");
    for (const char* s : {"flow", "spectrum", "degenerate", "sweep"}) add(sub(s), "--ell", "ell", "neck parameter(s)");
    add(sub("flow"), "--integrator", "integrator", "euler | rk4");
    add(sub("flow"), "--field-out", "field_out", "write the flat endpoint as a binary link field");
    add(sub("spectrum"), "--k", "k", "eigenvalues per ell");
    add(sub("audit"), "--suite", "suite", "suite name or 'all'");
    add(sub("audit"), "--seed", "seed", "seed for randomized inputs");

    CLI11_PARSE(app, argc, argv);

    try {
        const std::string name = app.get_subcommands().front()->get_name();
        Config cfg = opt.config_path.empty() ? Config{} : Config::load(opt.config_path);
        for (const auto& s : opt.sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw ymlab::ConfigError("--set expects section.key=value");
            cfg.set(s.substr(0, eq), s.substr(eq + 1));
        }
        for (const auto& b : flags[name])
            if (!b.value.empty()) cfg.set(name + "." + b.key, b.value);

        if (name == "audit" && cfg.text("audit.suite", "all") == "all") {
            int code = 0;
            const Common base = opt;
            for (const auto& suite : ymlab::audit_suites()) {
                Common per = base;
                if (!per.out_dir.empty()) per.out_dir += "/" + suite;
                per.emit.clear();
                code |= finish(ymlab::run_audit(suite, cfg), per, false);
            }
            return code;
        }
        return finish(ymlab::run(name, cfg), opt, true);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
