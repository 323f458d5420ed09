#pragma once

#include <iosfwd>
#include <string>

#include "mrt/grid_field.hpp"

namespace mrt {

/// Binary field format: magic "MRTF", u16 version, little-endian u32
/// (n, m, dims per axis), f64 origin and spacing, then components as f64
/// (re, im) pairs, grid index slowest and canonical multi-index fastest.
void write_field(const GridField& f, const std::string& path);
void write_field(const GridField& f, std::ostream& os);
GridField read_field(const std::string& path);
GridField read_field(std::istream& is);

/// CSV twin for small fields: a metadata comment line, a header row, then
/// one row per grid point with coordinates followed by re/im component pairs.
void write_field_csv(const GridField& f, const std::string& path);
void write_field_csv(const GridField& f, std::ostream& os);
GridField read_field_csv(const std::string& path);
GridField read_field_csv(std::istream& is);

}  // namespace mrt
