#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "spde/grid.hpp"
#include "spde/solver.hpp"

namespace spde::io {

/// A grid-shaped array with the header (nx, nt, T, seed). Controls and sheets
/// have nt rows; trajectories have nt + 1.
struct FieldFile {
  int nx = 0;
  int nt = 0;
  double T = 0.0;
  std::uint64_t seed = 0;
  Field2D values;
};

FieldFile from_control(const Control& v, const GridSpec& grid);
FieldFile from_sheet(const SheetIncrements& sheet, const GridSpec& grid);
FieldFile from_trajectory(const Trajectory& u, std::uint64_t seed = 0);
Control to_control(const FieldFile& file, const GridSpec& grid);

/// Line 1 "nx,nt,T,seed", line 2 the values, then one row of values per line.
void write_csv(std::ostream& out, const FieldFile& file);
FieldFile read_csv(std::istream& in);

/// Magic "SPDEFLD1", int64 nx, int64 nt, float64 T, uint64 seed, int64 rows,
/// then rows * nx float64 values, row-major, little-endian.
void write_binary(std::ostream& out, const FieldFile& file);
FieldFile read_binary(std::istream& in);

/// Long-format trajectory: header "t,x,value", one line per (t_j, x_i).
void write_trajectory_csv(std::ostream& out, const Trajectory& u);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

/// FNV-1a 64-bit hash as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);
std::string file_hash(const std::filesystem::path& path);

}  // namespace spde::io
