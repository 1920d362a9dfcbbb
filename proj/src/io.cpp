#include "schelling/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace schelling {

namespace {

void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(char((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& s, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) s.push_back(char((v >> (8 * i)) & 0xff));
}
std::uint32_t get_u32(const std::string& s, std::size_t& off) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(std::uint8_t(s[off++])) << (8 * i);
  return v;
}
std::uint64_t get_u64(const std::string& s, std::size_t& off) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(std::uint8_t(s[off++])) << (8 * i);
  return v;
}

void write_binary(const std::string& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f.write(body.data(), std::streamsize(body.size()));
  if (!f) throw std::runtime_error("short write: " + path);
}

std::string read_binary(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

void save_snapshot(const TorusGrid& g, const std::string& path) {
  std::string body;
  body.reserve(29 + std::size_t(g.size()) / 8 + 1);
  body += "SCHL1";
  put_u32(body, std::uint32_t(g.params().h));
  put_u32(body, std::uint32_t(g.params().w));
  put_u32(body, std::uint32_t(g.params().tauN));
  put_u64(body, g.seed());
  put_u64(body, g.generation());
  const std::int64_t n = g.size();
  const std::int64_t bytes = (n + 7) / 8;
  for (std::int64_t b = 0; b < bytes; ++b) {
    std::uint8_t v = 0;
    for (int i = 0; i < 8; ++i) {
      const std::int64_t u = b * 8 + i;
      if (u < n && g.get(u)) v |= std::uint8_t(1u << i);
    }
    body.push_back(char(v));
  }
  write_binary(path, body);
}

TorusGrid load_snapshot(const std::string& path, Boundary boundary) {
  const std::string body = read_binary(path);
  if (body.size() < 29 || body.compare(0, 5, "SCHL1") != 0)
    throw std::runtime_error("not a SCHL1 snapshot: " + path);
  std::size_t off = 5;
  const std::uint32_t h = get_u32(body, off);
  const std::uint32_t w = get_u32(body, off);
  const std::uint32_t tauN = get_u32(body, off);
  const std::uint64_t seed = get_u64(body, off);
  const std::uint64_t gen = get_u64(body, off);
  Params p(std::int32_t(h), std::int32_t(w), std::int32_t(tauN), boundary);
  TorusGrid g(p, seed);
  g.set_generation(gen);
  const std::int64_t n = g.size();
  if (body.size() != off + std::size_t((n + 7) / 8))
    throw std::runtime_error("snapshot payload size mismatch: " + path);
  for (std::int64_t u = 0; u < n; ++u) {
    const std::uint8_t byte = std::uint8_t(body[off + std::size_t(u / 8)]);
    if ((byte >> (u % 8)) & 1) g.set(u, true);
  }
  return g;
}

void save_arrivals(const ArrivalField& f, const std::string& path) {
  std::string body;
  body += "ARRV1";
  put_u32(body, std::uint32_t(f.rows));
  put_u32(body, std::uint32_t(f.cols));
  for (double v : f.t) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(body, bits);
  }
  write_binary(path, body);
}

ArrivalField load_arrivals(const std::string& path) {
  const std::string body = read_binary(path);
  if (body.size() < 13 || body.compare(0, 5, "ARRV1") != 0)
    throw std::runtime_error("not an ARRV1 field: " + path);
  std::size_t off = 5;
  ArrivalField f;
  f.rows = std::int32_t(get_u32(body, off));
  f.cols = std::int32_t(get_u32(body, off));
  const std::size_t n = std::size_t(f.rows) * f.cols;
  if (body.size() != off + 8 * n)
    throw std::runtime_error("arrival payload size mismatch: " + path);
  f.t.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t bits = get_u64(body, off);
    std::memcpy(&f.t[i], &bits, 8);
  }
  return f;
}

void save_arrivals_csv(const ArrivalField& f, const std::string& path) {
  std::string s = "row,col,arrival\n";
  for (std::int32_t r = 0; r < f.rows; ++r)
    for (std::int32_t c = 0; c < f.cols; ++c) {
      s += std::to_string(r);
      s += ',';
      s += std::to_string(c);
      s += ',';
      const double v = f.at(r, c);
      s += std::isinf(v) ? "inf" : format_double(v);
      s += '\n';
    }
  write_text_file(path, s);
}

void save_pgm(const std::vector<std::uint8_t>& pixels, std::int32_t rows,
              std::int32_t cols, const std::string& path) {
  if (pixels.size() != std::size_t(rows) * cols)
    throw std::invalid_argument("pgm: pixel count does not match dimensions");
  std::string body = "P5\n" + std::to_string(cols) + " " + std::to_string(rows) + "\n255\n";
  body.append(reinterpret_cast<const char*>(pixels.data()), pixels.size());
  write_binary(path, body);
}

std::pair<std::int32_t, std::int32_t> read_pgm_dims(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::string magic;
  std::int32_t cols = 0, rows = 0, maxval = 0;
  f >> magic >> cols >> rows >> maxval;
  if (!f || magic != "P5" || maxval != 255)
    throw std::runtime_error("not an 8-bit P5 PGM: " + path);
  return {rows, cols};
}

std::vector<std::uint8_t> render_states(const TorusGrid& g, const NeighborhoodCounts& cnt) {
  const Params& p = g.params();
  std::vector<std::uint8_t> px(std::size_t(g.size()));
  for (std::int64_t u = 0; u < g.size(); ++u) {
    const bool theta = g.get(u);
    const bool stable = cnt.k[std::size_t(u)] >= p.tauN;
    px[std::size_t(u)] = theta ? (stable ? 255 : 200) : (stable ? 0 : 60);
  }
  return px;
}

void write_text_file(const std::string& path, const std::string& body) {
  write_binary(path, body);
}

std::string read_text_file(const std::string& path) { return read_binary(path); }

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace schelling
