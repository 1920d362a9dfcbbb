#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "schelling/lattice.hpp"

namespace schelling {

// Arrival times over an open window; +infinity where never reached.
struct ArrivalField {
  std::int32_t rows = 0, cols = 0;
  std::vector<double> t;  // row-major

  double at(std::int32_t r, std::int32_t c) const { return t[std::size_t(r) * cols + c]; }
  double& at(std::int32_t r, std::int32_t c) { return t[std::size_t(r) * cols + c]; }
};

// Snapshot container: "SCHL1" magic, then LE u32 h, u32 w, u32 tauN,
// u64 seed, u64 generation, then ceil(h^2/8) bytes of row-major bit-packed
// states (bit i of byte j is site 8j+i). Round-trips bit-exactly.
void save_snapshot(const TorusGrid& g, const std::string& path);
TorusGrid load_snapshot(const std::string& path, Boundary boundary = Boundary::torus);

// Arrival container: "ARRV1" magic, LE u32 rows, u32 cols, then rows*cols
// little-endian IEEE f64 row-major; unreached sites are +infinity.
void save_arrivals(const ArrivalField& f, const std::string& path);
ArrivalField load_arrivals(const std::string& path);
void save_arrivals_csv(const ArrivalField& f, const std::string& path);

// 8-bit binary PGM (P5).
void save_pgm(const std::vector<std::uint8_t>& pixels, std::int32_t rows,
              std::int32_t cols, const std::string& path);
// Reads only the header; returns {rows, cols} or throws.
std::pair<std::int32_t, std::int32_t> read_pgm_dims(const std::string& path);

// Four-level rendering of a configuration: theta stable / theta unstable /
// theta_bar unstable / theta_bar stable.
std::vector<std::uint8_t> render_states(const TorusGrid& g, const NeighborhoodCounts& cnt);

void write_text_file(const std::string& path, const std::string& body);
std::string read_text_file(const std::string& path);

// Doubles are printed with max_digits10 so CSV round-trips are bit-exact.
std::string format_double(double v);

}  // namespace schelling
