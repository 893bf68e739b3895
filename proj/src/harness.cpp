#include "ymlab/harness.hpp"

#include "json.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <openssl/evp.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ymlab {

// ---------------------------------------------------------------------------
// Config

Config Config::parse(std::istream& in) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    Config c;
    for (const auto& [name, node] : tree) {
        if (node.empty()) {
            c.set(name, node.data());
            continue;
        }
        for (const auto& [key, leaf] : node) {
            if (!leaf.empty()) throw ConfigError("config nests deeper than one section");
            c.set(name + "." + key, leaf.data());
        }
    }
    return c;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    return parse(in);
}

std::string Config::text(const std::string& key, const std::string& def) const {
    const auto it = values_.find(key);
    return it == values_.end() ? def : it->second;
}

double Config::number(const std::string& key, double def) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return def;
    try {
        std::size_t used = 0;
        const double v = std::stod(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("'" + key + "' is not a number: '" + it->second + "'");
    }
}

static int integer_of(const std::string& key, const std::string& s) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("'" + key + "' is not an integer: '" + s + "'");
    }
}

int Config::integer(const std::string& key, int def) const {
    const auto it = values_.find(key);
    return it == values_.end() ? def : integer_of(key, it->second);
}

std::vector<double> Config::numbers(const std::string& key, const std::vector<double>& def) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return def;
    std::vector<double> out;
    std::stringstream ss(it->second);
    std::string cell;
    Config one;
    while (std::getline(ss, cell, ',')) {
        one.set(key, cell);
        out.push_back(one.number(key, 0.0));
    }
    if (out.empty()) throw ConfigError("'" + key + "' is an empty list");
    return out;
}

std::string Config::serialize() const {
    std::map<std::string, std::map<std::string, std::string>> sections;
    std::map<std::string, std::string> top;
    for (const auto& [k, v] : values_) {
        const auto dot = k.find('.');
        if (dot == std::string::npos)
            top[k] = v;
        else
            sections[k.substr(0, dot)][k.substr(dot + 1)] = v;
    }
    std::ostringstream out;
    for (const auto& [k, v] : top) out << k << '=' << v << '\n';
    for (const auto& [name, kv] : sections) {
        out << '[' << name << "]\n";
        for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Manifest

std::string ExperimentManifest::serialize() const {
    Config c;
    c.set("manifest.experiment", experiment);
    c.set("manifest.version", version);
    for (const auto& [k, v] : outputs) c.set("outputs." + k, v);
    for (const auto& [k, v] : params.values()) {
        const auto section = k.substr(0, k.find('.'));
        if (section == "manifest" || section == "outputs" || k.find('.') == std::string::npos)
            throw ConfigError("parameter key '" + k + "' needs a section other than manifest/outputs");
        c.set(k, v);
    }
    return c.serialize();
}

ExperimentManifest ExperimentManifest::parse(const std::string& text) {
    std::istringstream in(text);
    const Config c = Config::parse(in);
    ExperimentManifest m;
    if (!c.has("manifest.experiment")) throw ConfigError("manifest lacks an experiment name");
    for (const auto& [k, v] : c.values()) {
        if (k == "manifest.experiment")
            m.experiment = v;
        else if (k == "manifest.version")
            m.version = v;
        else if (k.rfind("outputs.", 0) == 0)
            m.outputs[k.substr(8)] = v;
        else if (k.rfind("manifest.", 0) == 0)
            throw ConfigError("unknown manifest key '" + k + "'");
        else
            m.params.set(k, v);
    }
    return m;
}

std::string ExperimentManifest::run_id() const {
    ExperimentManifest bare = *this;
    bare.outputs.clear();
    const std::string text = bare.serialize();
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Checks and results

namespace {

Check make_check(std::string name, double value, double bound, const char* rel, bool ok, std::string detail) {
    Check c;
    c.name = std::move(name);
    c.value = value;
    c.bound = bound;
    c.relation = rel;
    c.passed = ok;
    c.detail = std::move(detail);
    return c;
}

nlohmann::json number_json(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

Check check_le(std::string name, double value, double bound, std::string detail) {
    return make_check(std::move(name), value, bound, "<=", value <= bound, std::move(detail));
}
Check check_lt(std::string name, double value, double bound, std::string detail) {
    return make_check(std::move(name), value, bound, "<", value < bound, std::move(detail));
}
Check check_ge(std::string name, double value, double bound, std::string detail) {
    return make_check(std::move(name), value, bound, ">=", value >= bound, std::move(detail));
}
Check check_gt(std::string name, double value, double bound, std::string detail) {
    return make_check(std::move(name), value, bound, ">", value > bound, std::move(detail));
}
Check check_true(std::string name, bool ok, std::string detail) {
    return make_check(std::move(name), ok ? 1.0 : 0.0, 1.0, "==", ok, std::move(detail));
}

bool RunResult::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

bool RunResult::acceptable() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed || c.expected_failure; });
}

std::string RunResult::report_json() const {
    nlohmann::json j;
    j["experiment"] = manifest.experiment;
    j["version"] = manifest.version;
    j["run_id"] = manifest.run_id();
    j["passed"] = passed();
    j["acceptable"] = acceptable();
    nlohmann::json checks_json = nlohmann::json::array();
    for (const Check& c : checks) {
        nlohmann::json x;
        x["name"] = c.name;
        x["passed"] = c.passed;
        x["value"] = number_json(c.value);
        x["bound"] = number_json(c.bound);
        x["relation"] = c.relation;
        if (!c.detail.empty()) x["detail"] = c.detail;
        if (c.expected_failure) x["expected_failure"] = true;
        checks_json.push_back(std::move(x));
    }
    j["checks"] = std::move(checks_json);
    nlohmann::json s = nlohmann::json::object();
    for (const auto& [name, t] : series) s[name] = {{"columns", t.columns}, {"rows", t.rows.size()}};
    j["series"] = std::move(s);
    j["notes"] = notes;
    return j.dump(2) + "\n";
}

int worker_count() {
    if (const char* env = std::getenv("YMLAB_WORKERS")) {
        const int n = integer_of("YMLAB_WORKERS", env);
        if (n < 1) throw ConfigError("YMLAB_WORKERS must be at least 1");
        return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// ---------------------------------------------------------------------------
// Output

namespace {

std::string file_stem(const std::string& key) {
    std::string out;
    for (char c : key) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-') ? c : '_';
    return out;
}

void check_schema(const std::string& kind, const std::string& key, const Table& t) {
    auto fail = [&] { throw ConfigError("series '" + key + "' does not follow the " + kind + " schema"); };
    if (kind == "decay") {
        if (t.columns != std::vector<std::string>{"t", "sup_f", "fit"}) fail();
    } else if (kind == "lambda1") {
        if (t.columns != std::vector<std::string>{"ell", "lambda1", "reducible_flag"}) fail();
    } else if (kind == "leaf") {
        if (t.columns.size() < 2 || t.columns[0] != "beta") fail();
        for (std::size_t c = 1; c < t.columns.size(); ++c)
            if (t.columns[c] != "trace_" + std::to_string(c)) fail();
    }
}

}  // namespace

std::vector<std::string> emit_plot_data(const RunResult& result, const std::string& kind, const std::string& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> paths;
    for (const auto& [key, table] : result.series) {
        if (key != kind && key.rfind(kind + "/", 0) != 0) continue;
        check_schema(kind, key, table);
        const std::string path = (std::filesystem::path(dir) / (file_stem(key) + ".csv")).string();
        std::ofstream out(path);
        if (!out) throw ConfigError("cannot write '" + path + "'");
        write_csv(table, out);
        paths.push_back(path);
    }
    if (paths.empty()) throw ConfigError("result has no '" + kind + "' series");
    return paths;
}

void write_outputs(const RunResult& result, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const auto path = [&](const std::string& f) { return (std::filesystem::path(dir) / f).string(); };
    std::ofstream(path("manifest.ini")) << result.manifest.serialize();
    std::ofstream(path("report.json")) << result.report_json();
    std::ofstream tout(path("timings.csv"));
    tout << "stage,seconds\n";
    for (const auto& [stage, sec] : result.timings) tout << stage << ',' << format_double(sec) << '\n';
    for (const auto& [key, table] : result.series) {
        std::ofstream out(path(file_stem(key) + ".csv"));
        write_csv(table, out);
    }
}

}  // namespace ymlab
