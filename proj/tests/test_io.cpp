#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <sstream>

#include "spde/io.hpp"

using namespace spde;

namespace {

GridSpec tiny() {
  GridSpec g;
  g.nx = 5;
  g.nt = 4;
  g.T = 0.5;
  return g;
}

}  // namespace

TEST_CASE("format_double round trips") {
  for (double v : {0.0, 1.0, -2.5, 0.1, 1.0 / 3.0, std::numbers::pi, 1e-300, 6.02e23,
                   std::numeric_limits<double>::denorm_min()}) {
    CHECK(std::strtod(io::format_double(v).c_str(), nullptr) == v);
  }
  CHECK(io::format_double(0.5) == "0.5");
  CHECK(io::format_double(12.0) == "12");
}

TEST_CASE("csv field round trip of a sheet") {
  const GridSpec g = tiny();
  const auto sheet = sample_sheet(g, 1234567890123ULL);
  std::stringstream ss;
  io::write_csv(ss, io::from_sheet(sheet, g));
  const io::FieldFile back = io::read_csv(ss);
  CHECK(back.nx == g.nx);
  CHECK(back.nt == g.nt);
  CHECK(back.T == g.T);
  CHECK(back.seed == 1234567890123ULL);
  CHECK(back.values == sheet.increments);
}

TEST_CASE("binary field round trip of a trajectory") {
  const GridSpec g = tiny();
  const auto eta = sample_profile(g, [](double x) { return std::sin(std::numbers::pi * x); });
  const Trajectory u = solve_skeleton(eta, make_preset(PresetId::burgers), g, Control::zero(g));
  std::stringstream ss;
  io::write_binary(ss, io::from_trajectory(u, 8));
  const std::string bytes = ss.str();
  CHECK(bytes.substr(0, 8) == "SPDEFLD1");
  CHECK(bytes.size() == 8 + 5 * 8 + u.values.flat().size() * 8);
  const io::FieldFile back = io::read_binary(ss);
  CHECK(back.values == u.values);
  CHECK(back.seed == 8);
}

TEST_CASE("control files must match the grid") {
  const GridSpec g = tiny();
  const Control v = Control::from_function(g, [](double t, double x) { return t - x; });
  const io::FieldFile f = io::from_control(v, g);
  CHECK(io::to_control(f, g).values() == v.values());
  GridSpec other = g;
  other.nt = 8;
  CHECK_THROWS_AS(io::to_control(f, other), ValidationError);
}

TEST_CASE("malformed inputs are rejected") {
  std::stringstream bad_header("nx,nt\n1,2\n");
  CHECK_THROWS_AS(io::read_csv(bad_header), ValidationError);
  std::stringstream short_row("nx,nt,T,seed\n3,1,1,0\n1,2\n");
  CHECK_THROWS_AS(io::read_csv(short_row), ValidationError);
  std::stringstream not_number("nx,nt,T,seed\n2,1,1,0\n1,abc\n");
  CHECK_THROWS_AS(io::read_csv(not_number), ValidationError);
  std::stringstream magic("NOTMAGIC");
  CHECK_THROWS_AS(io::read_binary(magic), ValidationError);
  std::stringstream truncated;
  io::write_binary(truncated, io::from_control(Control::zero(tiny()), tiny()));
  std::string cut = truncated.str();
  cut.resize(cut.size() - 4);
  std::stringstream cut_stream(cut);
  CHECK_THROWS_AS(io::read_binary(cut_stream), ValidationError);
}

TEST_CASE("trajectory csv is long format") {
  GridSpec g;
  g.nx = 3;
  g.nt = 1;
  const std::vector<double> eta{1.0, 2.0, 3.0};
  const Trajectory u = solve_skeleton(eta, make_preset(PresetId::linear_heat), g, Control::zero(g));
  std::stringstream ss;
  io::write_trajectory_csv(ss, u);
  std::string line;
  std::getline(ss, line);
  CHECK(line == "t,x,value");
  std::getline(ss, line);
  CHECK(line == "0,0.25,1");
  int rows = 1;
  while (std::getline(ss, line)) ++rows;
  CHECK(rows == 6);
}

TEST_CASE("FNV-1a reference vectors") {
  CHECK(io::fnv1a_hex("") == "cbf29ce484222325");
  CHECK(io::fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(io::fnv1a_hex("foobar") == "85944171f73967e8");
}
