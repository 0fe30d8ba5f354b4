#include "fnls/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "fnls/errors.hpp"

namespace fnls {

namespace {

void put_double(std::ostream& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  out.write(buf, 8);
}

double get_double(std::istream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  if (!in) throw ValidationError("field file truncated");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

void write_field(std::ostream& out, const Field& f) {
  const Grid& g = f.grid();
  nlohmann::ordered_json header = {
      {"dim", g.dim},
      {"M", g.points},
      {"L", g.box_length},
      {"space", f.space() == Space::physical ? "physical" : "frequency"},
      {"scalar_width", 8},
  };
  out << header.dump() << '\n';
  for (const auto& v : f.values()) {
    put_double(out, v.real());
    put_double(out, v.imag());
  }
  if (!out) throw NumericalError("failed writing field");
}

Field read_field(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("field file missing header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("field header is not JSON: ") + e.what());
  }
  for (const char* key : {"dim", "M", "L", "space", "scalar_width"}) {
    if (!header.contains(key)) throw ValidationError(std::string("field header missing ") + key);
  }
  if (header["scalar_width"].get<int>() != 8) throw ValidationError("field scalar_width must be 8");
  const Grid g = Grid::make(header["dim"].get<int>(), header["L"].get<double>(), header["M"].get<int>());
  const auto space_name = header["space"].get<std::string>();
  Space space;
  if (space_name == "physical") {
    space = Space::physical;
  } else if (space_name == "frequency") {
    space = Space::frequency;
  } else {
    throw ValidationError("field header has unknown space '" + space_name + "'");
  }
  std::vector<cplx> values(g.size());
  for (auto& v : values) {
    const double re = get_double(in);
    const double im = get_double(in);
    v = {re, im};
  }
  return Field(g, std::move(values), space);
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw NumericalError("cannot open " + tmp.string());
    out << text;
    if (!out) throw NumericalError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void save_field(const std::filesystem::path& path, const Field& f) {
  std::ostringstream buf(std::ios::binary);
  write_field(buf, f);
  write_text_atomic(path, buf.str());
}

Field load_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open field file " + path.string());
  return read_field(in);
}

}  // namespace fnls
