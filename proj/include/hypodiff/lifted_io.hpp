#ifndef HYPODIFF_LIFTED_IO_HPP
#define HYPODIFF_LIFTED_IO_HPP

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "grid.hpp"

namespace hypodiff {

// Dump layout: one line of JSON
//   {"format":"hypodiff-lift","width":W,"height":H,"n_theta":N,"period":P,"hx":..,"hy":..}
// terminated by '\n', followed by W*H*N little-endian float32 values with
// theta varying fastest, then x, then y.

inline void write_lifted_field(std::ostream &os, const LiftedField &v) {
  nlohmann::json header = {{"format", "hypodiff-lift"},   {"width", v.width()},
                           {"height", v.height()},        {"n_theta", v.n_theta()},
                           {"period", v.angles().period()}, {"hx", v.spacing().hx},
                           {"hy", v.spacing().hy}};
  os << header.dump() << '\n';
  for (double d : v.data()) {
    const float f = static_cast<float>(d);
    std::uint32_t bits = std::bit_cast<std::uint32_t>(f);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
    char bytes[4];
    std::memcpy(bytes, &bits, 4);
    os.write(bytes, 4);
  }
  if (!os) throw std::runtime_error("write_lifted_field: stream error");
}

inline void write_lifted_field(const std::string &path, const LiftedField &v) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_lifted_field(os, v);
}

inline LiftedField read_lifted_field(std::istream &is) {
  std::string line;
  if (!std::getline(is, line)) throw FormatError("lift dump: missing header", 0);
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error &e) {
    throw FormatError(std::string("lift dump: bad header: ") + e.what(), e.byte);
  }
  if (h.value("format", "") != "hypodiff-lift") throw FormatError("lift dump: wrong format tag", 0);
  LiftedField v(h.at("width").get<std::size_t>(), h.at("height").get<std::size_t>(),
                Spacing{h.at("hx").get<double>(), h.at("hy").get<double>()},
                AngleGrid(h.at("n_theta").get<std::size_t>(), h.at("period").get<double>()));
  std::size_t offset = line.size() + 1;
  for (double &d : v.data()) {
    char bytes[4];
    if (!is.read(bytes, 4)) throw FormatError("lift dump: truncated payload", offset);
    std::uint32_t bits;
    std::memcpy(&bits, bytes, 4);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
    d = std::bit_cast<float>(bits);
    offset += 4;
  }
  return v;
}

inline LiftedField read_lifted_field(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_lifted_field(is);
}

} // namespace hypodiff

#endif
