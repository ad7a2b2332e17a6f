#pragma once

#include <iosfwd>
#include <string>

#include "stou/model.hpp"

namespace stou {

/// Plain CSV with header `t_index,x_index,value`, one row per point in
/// time-major order. Values use the shortest round-trip representation.
void write_field_csv(std::ostream& out, const FieldSample& field);
void write_field_csv(const std::string& path, const FieldSample& field);

/// Reads a field file; nt and nx are inferred from the largest indices and
/// every point must appear exactly once. Spacings are not stored in the file.
FieldSample read_field_csv(std::istream& in, double dx, double dt);
FieldSample read_field_csv(const std::string& path, double dx, double dt);

}  // namespace stou
