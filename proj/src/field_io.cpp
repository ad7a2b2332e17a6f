#include "stou/field_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include <fmt/format.h>

#include "stou/errors.hpp"

namespace stou {

void write_field_csv(std::ostream& out, const FieldSample& field) {
  out << "t_index,x_index,value\n";
  const Lattice& lat = field.lattice();
  for (int t = 0; t < lat.nt(); ++t) {
    for (int x = 0; x < lat.nx(); ++x) out << fmt::format("{},{},{}\n", t, x, field.at(t, x));
  }
}

void write_field_csv(const std::string& path, const FieldSample& field) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
  write_field_csv(out, field);
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path + "'");
}

namespace {

struct Row {
  int t;
  int x;
  double value;
};

template <class T>
T parse_number(std::string_view text, std::size_t line) {
  T v{};
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorKind::Io, "field file line " + std::to_string(line) + ": cannot parse '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

FieldSample read_field_csv(std::istream& in, double dx, double dt) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Io, "field file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t_index,x_index,value") throw Error(ErrorKind::Io, "field file header must be t_index,x_index,value");

  std::vector<Row> rows;
  int max_t = -1;
  int max_x = -1;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::string_view sv(line);
    const auto c1 = sv.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : sv.find(',', c1 + 1);
    if (c2 == std::string_view::npos) throw Error(ErrorKind::Io, "field file line " + std::to_string(line_no) + ": expected 3 columns");
    Row r{parse_number<int>(sv.substr(0, c1), line_no), parse_number<int>(sv.substr(c1 + 1, c2 - c1 - 1), line_no),
          parse_number<double>(sv.substr(c2 + 1), line_no)};
    if (r.t < 0 || r.x < 0) throw Error(ErrorKind::Io, "field file line " + std::to_string(line_no) + ": negative index");
    max_t = std::max(max_t, r.t);
    max_x = std::max(max_x, r.x);
    rows.push_back(r);
  }
  if (rows.empty()) throw Error(ErrorKind::Io, "field file has no data rows");

  const Lattice lattice(max_x + 1, max_t + 1, dx, dt);
  if (rows.size() != lattice.size()) {
    throw Error(ErrorKind::Io, "field file has " + std::to_string(rows.size()) + " rows, expected " +
                                   std::to_string(lattice.size()));
  }
  FieldMatrix values(lattice.nt(), lattice.nx());
  std::vector<char> seen(lattice.size(), 0);
  for (const Row& r : rows) {
    const std::size_t k = lattice.index(r.t, r.x);
    if (seen[k]) throw Error(ErrorKind::Io, "field file repeats point (" + std::to_string(r.t) + ", " + std::to_string(r.x) + ")");
    seen[k] = 1;
    values(r.t, r.x) = r.value;
  }
  return FieldSample(lattice, std::move(values));
}

FieldSample read_field_csv(const std::string& path, double dx, double dt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  return read_field_csv(in, dx, dt);
}

}  // namespace stou
