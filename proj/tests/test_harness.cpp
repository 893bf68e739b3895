#include "ymlab/harness.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace ymlab;

namespace {

Config parse_text(const std::string& s) {
    std::istringstream in(s);
    return Config::parse(in);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("ymlab_test_" + name);
    std::filesystem::remove_all(p);
    return p;
}

}  // namespace

TEST(Harness, ConfigParsesSectionsAndLists) {
    const auto c = parse_text("[plumb]\nkappa = 0.5\nell=0.1,0.2, 0.3\n[flow]\nintegrator=rk4\n");
    EXPECT_DOUBLE_EQ(c.number("plumb.kappa", 1.0), 0.5);
    EXPECT_EQ(c.numbers("plumb.ell", {}), (std::vector<double>{0.1, 0.2, 0.3}));
    EXPECT_EQ(c.text("flow.integrator", ""), "rk4");
    EXPECT_EQ(c.integer("flow.n", 16), 16);
    EXPECT_THROW(parse_text("[a]\nx=abc\n").number("a.x", 0), ConfigError);
    EXPECT_THROW(parse_text("[a]\nn=1.5\n").integer("a.n", 0), ConfigError);
    EXPECT_THROW(parse_text("[a\nx=1\n"), ConfigError);
    EXPECT_EQ(parse_text(c.serialize()).values(), c.values());
}

TEST(Harness, ManifestRoundTripsBitExactly) {
    ExperimentManifest m;
    m.experiment = "flow";
    m.params.set("flow.alpha", "0.3");
    m.params.set("flow.beta", "0.2");
    m.params.set("audit.seed", "7");
    m.outputs["dir"] = "/tmp/x";
    const std::string text = m.serialize();
    const auto back = ExperimentManifest::parse(text);
    EXPECT_EQ(back.serialize(), text);
    EXPECT_EQ(back.run_id(), m.run_id());
    EXPECT_EQ(m.run_id().size(), 64u);

    // Paths do not change the id; parameters do.
    auto moved = m;
    moved.outputs["dir"] = "/elsewhere";
    EXPECT_EQ(moved.run_id(), m.run_id());
    auto other = m;
    other.params.set("flow.beta", "0.21");
    EXPECT_NE(other.run_id(), m.run_id());

    ExperimentManifest bad;
    bad.experiment = "x";
    bad.params.set("manifest.version", "2");
    EXPECT_THROW(bad.serialize(), ConfigError);
    EXPECT_THROW(ExperimentManifest::parse("[flow]\nalpha=1\n"), ConfigError);
}

TEST(Harness, RunIdIsSha256OfTheSerializedManifest) {
    ExperimentManifest m;
    m.experiment = "e";
    m.version = "v";
    EXPECT_EQ(m.serialize(), "[manifest]\nexperiment=e\nversion=v\n");
    // Reference digest from an external sha256sum of the text above.
    EXPECT_EQ(m.run_id(), "0a40e65dcf8e77f789134530a555ce0d2496d029e9bc29001708d0f4b297fad8");
}

TEST(Harness, LinkFieldFilesRoundTripExactly) {
    const auto s = build_surface({"one_holed_torus_punctured", 8});
    LinkField f = identity_field(s);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n01;
    for (auto& u : f.links) u = su2_exp<double>(Algd(n01(rng), n01(rng), n01(rng)));

    std::stringstream csv;
    write_link_field_csv(f, csv);
    EXPECT_EQ(read_link_field_csv(s, csv).links, f.links);

    std::stringstream bin(std::ios::in | std::ios::out | std::ios::binary);
    write_link_field_binary(f, bin);
    EXPECT_EQ(read_link_field_binary(s, bin).links, f.links);

    const auto other = build_surface({"torus", 4});
    std::stringstream bin2(std::ios::in | std::ios::out | std::ios::binary);
    write_link_field_binary(f, bin2);
    EXPECT_THROW(read_link_field_binary(other, bin2), IoError);
    std::stringstream broken("edge,w,x,y,z\n0,2,0,0,0\n");
    EXPECT_THROW(read_link_field_csv(s, broken), IoError);
}

TEST(Harness, RepresentationTextRoundTrip) {
    const auto s = build_surface({"one_holed_torus_punctured", 8});
    const auto rep = punctured_torus_rep(s, 0.3);
    std::stringstream ss;
    write_representation(rep, ss);
    const auto back = read_representation(ss);
    ASSERT_EQ(back.loops.size(), rep.loops.size());
    for (const auto& [k, q] : rep.loops) EXPECT_EQ(back.loops.at(k).coeffs(), q.coeffs());
    std::stringstream dup("a 1 0 0 0\na 1 0 0 0\n");
    EXPECT_THROW(read_representation(dup), IoError);
}

TEST(Harness, MetricCsvHasOneRowPerFace) {
    const auto s = build_surface({"genus2_separating_pinch", 12, 2, 8});
    std::stringstream ss;
    write_metric_csv(metric_for(s, 0.3, 1.0), ss);
    std::string line;
    int rows = -1;
    while (std::getline(ss, line)) ++rows;
    EXPECT_EQ(rows, static_cast<int>(s.faces.size()));
}

TEST(Harness, ParallelMapMergesByIndex) {
    ::setenv("YMLAB_WORKERS", "3", 1);
    EXPECT_EQ(worker_count(), 3);
    const auto out = parallel_map(50, [](std::size_t i) { return static_cast<int>(i * i); });
    for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], static_cast<int>(i * i));
    ::setenv("YMLAB_WORKERS", "0", 1);
    EXPECT_THROW(worker_count(), ConfigError);
    ::unsetenv("YMLAB_WORKERS");
    EXPECT_GE(worker_count(), 1);
}

TEST(Harness, PlumbRowMatchesClosedForm) {
    Config c;
    c.set("plumb.kappa", "1.0");
    c.set("plumb.ell", "0.75");
    const auto r = run("plumb", c);
    ASSERT_EQ(r.series.at("plumb").rows.size(), 1u);
    EXPECT_NEAR(r.series.at("plumb").rows[0][2], 1.0 / 9.0, 1e-15);
    EXPECT_TRUE(r.passed());
    EXPECT_THROW(run("nonsense", c), ConfigError);
}

TEST(Harness, AuditIsDeterministic) {
    Config c;
    c.set("audit.suite", "kato");
    c.set("audit.seed", "7");
    const auto a = run("audit", c), b = run("audit", c);
    EXPECT_EQ(a.report_json(), b.report_json());
    const auto da = scratch("a"), db = scratch("b");
    write_outputs(a, da.string());
    write_outputs(b, db.string());
    for (const char* f : {"manifest.ini", "report.json", "convergence_kato.csv"})
        EXPECT_EQ(slurp((da / f).string()), slurp((db / f).string())) << f;
    c.set("audit.seed", "8");
    EXPECT_NE(run("audit", c).report_json(), a.report_json());
    c.set("audit.suite", "missing");
    EXPECT_THROW(run("audit", c), ConfigError);
}

TEST(Harness, PlotDataSchemas) {
    RunResult r;
    r.manifest.experiment = "x";
    r.series["decay/a"] = Table{{"t", "sup_f", "fit"}, {{0.0, 1.0, 1.0}}};
    r.series["lambda1"] = Table{{"ell", "lambda1", "reducible_flag"}, {{0.4, 0.1, 0.0}}};
    r.series["leaf"] = Table{{"beta", "trace_1", "trace_2"}, {{0.3, 1.0, 0.5}}};
    r.series["leaf/bad"] = Table{{"beta", "x"}, {{0.3, 1.0}}};
    const auto dir = scratch("plot");
    const auto paths = emit_plot_data(r, "decay", dir.string());
    ASSERT_EQ(paths.size(), 1u);
    EXPECT_EQ(slurp(paths[0]), "t,sup_f,fit\n0,1,1\n");
    EXPECT_EQ(emit_plot_data(r, "lambda1", dir.string()).size(), 1u);
    EXPECT_THROW(emit_plot_data(r, "leaf", dir.string()), ConfigError);
    EXPECT_THROW(emit_plot_data(r, "convergence", dir.string()), ConfigError);
}

TEST(Harness, ChecksCarryValuesAndExpectedFailures) {
    RunResult r;
    r.checks.push_back(check_le("a", 2.0, 1.0));
    EXPECT_FALSE(r.passed());
    EXPECT_FALSE(r.acceptable());
    r.checks.back().expected_failure = true;
    EXPECT_TRUE(r.acceptable());
    EXPECT_EQ(r.checks.back().value, 2.0);
    EXPECT_EQ(r.checks.back().bound, 1.0);
    EXPECT_TRUE(check_gt("b", 1.0, 0.0).passed);
    EXPECT_FALSE(check_lt("c", 1.0, 1.0).passed);
}
