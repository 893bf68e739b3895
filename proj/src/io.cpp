#include "ymlab/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

namespace ymlab {

std::string format_double(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

void Table::add(std::vector<double> row) {
    if (row.size() != columns.size()) throw IoError("row width differs from the column count");
    rows.push_back(std::move(row));
}

void write_csv(const Table& t, std::ostream& out) {
    for (std::size_t c = 0; c < t.columns.size(); ++c) out << (c ? "," : "") << t.columns[c];
    out << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_double(row[c]);
        out << '\n';
    }
}

namespace {

double parse_double(const std::string& s) {
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw IoError("not a number: '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, sep)) out.push_back(cell);
    return out;
}

void check_unit(const Su2d& q, std::size_t e) {
    if (std::abs(q.squaredNorm() - 1.0) > 1e-12) throw IoError("link " + std::to_string(e) + " is not a unit quaternion");
}

}  // namespace

void write_link_field_csv(const LinkField& field, std::ostream& out) {
    out << "edge,w,x,y,z\n";
    for (std::size_t e = 0; e < field.links.size(); ++e) {
        const Su2d& q = field.links[e];
        out << e << ',' << format_double(q.w()) << ',' << format_double(q.x()) << ',' << format_double(q.y()) << ','
            << format_double(q.z()) << '\n';
    }
}

LinkField read_link_field_csv(const SurfaceComplex& s, std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "edge,w,x,y,z") throw IoError("missing link-field header");
    LinkField f = identity_field(s);
    std::vector<std::uint8_t> seen(s.edges.size(), 0);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto c = split(line, ',');
        if (c.size() != 5) throw IoError("link-field row needs 5 cells");
        const double idx = parse_double(c[0]);
        if (idx < 0 || idx >= static_cast<double>(s.edges.size()) || idx != std::floor(idx))
            throw IoError("edge index out of range");
        const auto e = static_cast<std::size_t>(idx);
        f.links[e] = Su2d(parse_double(c[1]), parse_double(c[2]), parse_double(c[3]), parse_double(c[4]));
        check_unit(f.links[e], e);
        seen[e] = 1;
    }
    for (std::size_t e = 0; e < seen.size(); ++e)
        if (!seen[e]) throw IoError("edge " + std::to_string(e) + " missing from link-field file");
    return f;
}

void write_link_field_binary(const LinkField& field, std::ostream& out) {
    static_assert(std::endian::native == std::endian::little, "binary link format assumes little-endian doubles");
    out.write("YMLF", 4);
    const std::uint64_t n = field.links.size();
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    for (const Su2d& q : field.links) {
        const double v[4] = {q.w(), q.x(), q.y(), q.z()};
        out.write(reinterpret_cast<const char*>(v), sizeof v);
    }
}

LinkField read_link_field_binary(const SurfaceComplex& s, std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "YMLF", 4) != 0) throw IoError("bad link-field magic");
    std::uint64_t n = 0;
    if (!in.read(reinterpret_cast<char*>(&n), sizeof n)) throw IoError("truncated link-field file");
    if (n != s.edges.size()) throw IoError("link-field edge count does not match the surface");
    LinkField f = identity_field(s);
    for (std::size_t e = 0; e < n; ++e) {
        double v[4];
        if (!in.read(reinterpret_cast<char*>(v), sizeof v)) throw IoError("truncated link-field file");
        f.links[e] = Su2d(v[0], v[1], v[2], v[3]);
        check_unit(f.links[e], e);
    }
    return f;
}

void write_representation(const Representation& rep, std::ostream& out) {
    for (const auto& [name, q] : rep.loops)
        out << name << ' ' << format_double(q.w()) << ' ' << format_double(q.x()) << ' ' << format_double(q.y()) << ' '
            << format_double(q.z()) << '\n';
}

Representation read_representation(std::istream& in) {
    Representation rep;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto c = split(line, ' ');
        if (c.size() != 5) throw IoError("representation line needs a name and 4 numbers");
        const Su2d q(parse_double(c[1]), parse_double(c[2]), parse_double(c[3]), parse_double(c[4]));
        check_unit(q, rep.loops.size());
        if (!rep.loops.emplace(c[0], q).second) throw IoError("duplicate loop '" + c[0] + "'");
    }
    return rep;
}

void write_metric_csv(const MetricGrid& metric, std::ostream& out) {
    Table t{{"face", "area", "conformal", "active", "wx", "wy"}, {}};
    for (std::size_t f = 0; f < metric.cell_area.size(); ++f)
        t.add({double(f), metric.cell_area[f], metric.conformal[f], double(metric.face_active[f]), metric.face_wx[f],
               metric.face_wy[f]});
    write_csv(t, out);
}

}  // namespace ymlab
