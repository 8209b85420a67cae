#include "spde/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace spde::io {
namespace {

constexpr std::array<char, 8> kMagic{'S', 'P', 'D', 'E', 'F', 'L', 'D', '1'};

static_assert(std::endian::native == std::endian::little, "binary layout assumes a little-endian host");

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) throw ValidationError("binary field: truncated input");
  return value;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ValidationError("csv field: cannot parse '" + s + "' as a number");
  }
  if (used != s.size()) throw ValidationError("csv field: trailing characters in '" + s + "'");
  return v;
}

}  // namespace

FieldFile from_control(const Control& v, const GridSpec& grid) {
  check_shape(v, grid, "from_control");
  return {grid.nx, grid.nt, grid.T, 0, v.values()};
}

FieldFile from_sheet(const SheetIncrements& sheet, const GridSpec& grid) {
  return {grid.nx, grid.nt, grid.T, sheet.seed, sheet.increments};
}

FieldFile from_trajectory(const Trajectory& u, std::uint64_t seed) {
  return {u.grid.nx, u.grid.nt, u.grid.T, seed, u.values};
}

Control to_control(const FieldFile& file, const GridSpec& grid) {
  if (file.nx != grid.nx || file.nt != grid.nt || file.T != grid.T) {
    throw ValidationError("control file header does not match the grid");
  }
  return Control(grid, file.values);
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

void write_csv(std::ostream& out, const FieldFile& file) {
  out << "nx,nt,T,seed\n" << file.nx << ',' << file.nt << ',' << format_double(file.T) << ',' << file.seed << '\n';
  for (std::size_t r = 0; r < file.values.rows(); ++r) {
    const auto row = file.values.row(r);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << format_double(row[i]);
    }
    out << '\n';
  }
}

FieldFile read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "nx,nt,T,seed") throw ValidationError("csv field: bad header line");
  if (!std::getline(in, line)) throw ValidationError("csv field: missing header values");
  const auto head = split(line, ',');
  if (head.size() != 4) throw ValidationError("csv field: header needs 4 values");
  FieldFile file;
  file.nx = std::stoi(head[0]);
  file.nt = std::stoi(head[1]);
  file.T = parse_double(head[2]);
  file.seed = std::stoull(head[3]);
  if (file.nx < 1 || file.nt < 1) throw ValidationError("csv field: bad dimensions");
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& item : split(line, ',')) row.push_back(parse_double(item));
    if (row.size() != static_cast<std::size_t>(file.nx)) throw ValidationError("csv field: row length differs from nx");
    rows.push_back(std::move(row));
  }
  if (rows.size() != static_cast<std::size_t>(file.nt) && rows.size() != static_cast<std::size_t>(file.nt) + 1) {
    throw ValidationError("csv field: expected nt or nt+1 rows");
  }
  file.values = Field2D(rows.size(), file.nx);
  for (std::size_t r = 0; r < rows.size(); ++r) std::copy(rows[r].begin(), rows[r].end(), file.values.row(r).begin());
  return file;
}

void write_binary(std::ostream& out, const FieldFile& file) {
  out.write(kMagic.data(), kMagic.size());
  put<std::int64_t>(out, file.nx);
  put<std::int64_t>(out, file.nt);
  put<double>(out, file.T);
  put<std::uint64_t>(out, file.seed);
  put<std::int64_t>(out, static_cast<std::int64_t>(file.values.rows()));
  const auto flat = file.values.flat();
  out.write(reinterpret_cast<const char*>(flat.data()), static_cast<std::streamsize>(flat.size() * sizeof(double)));
}

FieldFile read_binary(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw ValidationError("binary field: bad magic");
  FieldFile file;
  file.nx = static_cast<int>(get<std::int64_t>(in));
  file.nt = static_cast<int>(get<std::int64_t>(in));
  file.T = get<double>(in);
  file.seed = get<std::uint64_t>(in);
  const auto rows = get<std::int64_t>(in);
  if (file.nx < 1 || file.nt < 1 || (rows != file.nt && rows != file.nt + 1)) {
    throw ValidationError("binary field: bad dimensions");
  }
  file.values = Field2D(static_cast<std::size_t>(rows), file.nx);
  auto flat = file.values.flat();
  if (!in.read(reinterpret_cast<char*>(flat.data()), static_cast<std::streamsize>(flat.size() * sizeof(double)))) {
    throw ValidationError("binary field: truncated values");
  }
  return file;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& u) {
  out << "t,x,value\n";
  for (int j = 0; j <= u.grid.nt; ++j) {
    const auto row = u.row(j);
    const std::string t = format_double(u.grid.t(j));
    for (int i = 0; i < u.grid.nx; ++i) {
      out << t << ',' << format_double(u.grid.x(i)) << ',' << format_double(row[i]) << '\n';
    }
  }
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::array<char, 17> buf{};
  std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(h));
  return buf.data();
}

std::string file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return fnv1a_hex(ss.str());
}

}  // namespace spde::io
