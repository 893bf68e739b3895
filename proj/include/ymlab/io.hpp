#pragma once

#include "ymlab/field.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace ymlab {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Link fields.  CSV rows are "edge,w,x,y,z" with round-trip precision; the
// binary form is the magic "YMLF", a little-endian u64 edge count, then four
// doubles per edge.  Readers check the edge count against the surface.
void write_link_field_csv(const LinkField& field, std::ostream& out);
LinkField read_link_field_csv(const SurfaceComplex& s, std::istream& in);
void write_link_field_binary(const LinkField& field, std::ostream& out);
LinkField read_link_field_binary(const SurfaceComplex& s, std::istream& in);

// One "name w x y z" line per loop, sorted by name.
void write_representation(const Representation& rep, std::ostream& out);
Representation read_representation(std::istream& in);

// Per face: face,area,conformal,active,wx,wy.
void write_metric_csv(const MetricGrid& metric, std::ostream& out);

// Shortest decimal that parses back to the same double.
std::string format_double(double v);

// Tidy table: one observation per row.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    void add(std::vector<double> row);
};
void write_csv(const Table& t, std::ostream& out);

}  // namespace ymlab
