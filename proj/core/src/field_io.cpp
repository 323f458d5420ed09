#include "mrt/field_io.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace mrt {

namespace {

constexpr char kMagic[4] = {'M', 'R', 'T', 'F'};
constexpr std::uint16_t kVersion = 1;

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T take(std::istream& is, const char* what) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error(std::string("field read: truncated ") + what);
  return v;
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw std::runtime_error(std::string("field read: non-finite ") + what);
}

std::string component_label(const std::vector<int>& mi) {
  std::string s = "c";
  if (mi.empty()) s += "0";
  for (int v : mi) s += static_cast<char>('1' + v);
  return s;
}

}  // namespace

void write_field(const GridField& f, std::ostream& os) {
  if (f.tensor_dim() != f.geom().dim())
    throw std::invalid_argument("write_field: reduced tensor dimension is not representable");
  const GridGeometry& g = f.geom();
  os.write(kMagic, 4);
  put<std::uint16_t>(os, kVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(g.dim()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(f.rank()));
  for (int d : g.dims) put<std::uint32_t>(os, static_cast<std::uint32_t>(d));
  for (double v : g.origin) put<double>(os, v);
  for (double v : g.spacing) put<double>(os, v);
  for (const Complex& c : f.data()) {
    put<double>(os, c.real());
    put<double>(os, c.imag());
  }
  if (!os) throw std::runtime_error("write_field: stream failure");
}

void write_field(const GridField& f, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_field: cannot open " + path);
  write_field(f, os);
}

GridField read_field(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error("field read: bad magic (not an MRTF file)");
  const auto version = take<std::uint16_t>(is, "version");
  if (version != kVersion) throw std::runtime_error("field read: unsupported version");
  const auto n = take<std::uint32_t>(is, "dimension");
  if (n < 1 || n > kMaxDim) throw std::runtime_error("field read: dimension out of range");
  const auto m = take<std::uint32_t>(is, "rank");
  if (m > 12) throw std::runtime_error("field read: rank out of range");
  std::vector<int> dims(n);
  for (auto& d : dims) {
    const auto v = take<std::uint32_t>(is, "dims");
    if (v < 1 || v > (1u << 24)) throw std::runtime_error("field read: axis sample count out of range");
    d = static_cast<int>(v);
  }
  RVec origin(n), spacing(n);
  for (double& v : origin) {
    v = take<double>(is, "origin");
    require_finite(v, "origin");
  }
  for (double& v : spacing) {
    v = take<double>(is, "spacing");
    require_finite(v, "spacing");
    if (!(v > 0)) throw std::runtime_error("field read: spacing must be positive");
  }
  GridField f(make_grid(dims, origin, spacing), static_cast<int>(m));
  for (Complex& c : f.data()) {
    const double re = take<double>(is, "payload");
    const double im = take<double>(is, "payload");
    require_finite(re, "component");
    require_finite(im, "component");
    c = Complex{re, im};
  }
  // trailing bytes mean the header lied about the shape
  is.peek();
  if (!is.eof()) throw std::runtime_error("field read: payload size does not match header");
  return f;
}

GridField read_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_field: cannot open " + path);
  return read_field(is);
}

void write_field_csv(const GridField& f, std::ostream& os) {
  if (f.tensor_dim() != f.geom().dim())
    throw std::invalid_argument("write_field_csv: reduced tensor dimension is not representable");
  const GridGeometry& g = f.geom();
  char buf[64];
  os << "# mrtf-csv version=1 n=" << g.dim() << " m=" << f.rank() << " dims=";
  for (int a = 0; a < g.dim(); ++a) os << (a ? " " : "") << g.dims[a];
  os << " origin=";
  for (int a = 0; a < g.dim(); ++a) {
    std::snprintf(buf, sizeof(buf), "%.17g", g.origin[a]);
    os << (a ? " " : "") << buf;
  }
  os << " spacing=";
  for (int a = 0; a < g.dim(); ++a) {
    std::snprintf(buf, sizeof(buf), "%.17g", g.spacing[a]);
    os << (a ? " " : "") << buf;
  }
  os << "\n";
  for (int a = 0; a < g.dim(); ++a) os << (a ? "," : "") << "x" << (a + 1);
  for (std::size_t k = 0; k < f.num_components(); ++k) {
    const std::string label = component_label(f.layout().index(k));
    os << "," << label << "_re," << label << "_im";
  }
  os << "\n";
  std::array<double, kMaxDim> x;
  for (std::size_t p = 0; p < g.num_points(); ++p) {
    g.point(p, std::span<double>(x.data(), g.dim()));
    for (int a = 0; a < g.dim(); ++a) {
      std::snprintf(buf, sizeof(buf), "%.17g", x[a]);
      os << (a ? "," : "") << buf;
    }
    auto t = f.tensor_at(p);
    for (std::size_t k = 0; k < t.size(); ++k) {
      std::snprintf(buf, sizeof(buf), "%.17g", t[k].real());
      os << "," << buf;
      std::snprintf(buf, sizeof(buf), "%.17g", t[k].imag());
      os << "," << buf;
    }
    os << "\n";
  }
  if (!os) throw std::runtime_error("write_field_csv: stream failure");
}

void write_field_csv(const GridField& f, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_field_csv: cannot open " + path);
  write_field_csv(f, os);
}

GridField read_field_csv(std::istream& is) {
  std::string meta;
  if (!std::getline(is, meta) || meta.rfind("# mrtf-csv", 0) != 0)
    throw std::runtime_error("field csv read: missing metadata line");
  // tokens are space separated; a token with '=' starts a key, later tokens
  // extend its (possibly vector-valued) value
  std::map<std::string, std::string> kv;
  {
    std::istringstream ms(meta.substr(std::string("# mrtf-csv").size()));
    std::string tok, key;
    while (ms >> tok) {
      const auto eq = tok.find('=');
      if (eq != std::string::npos) {
        key = tok.substr(0, eq);
        kv[key] = tok.substr(eq + 1);
      } else if (!key.empty()) {
        kv[key] += " " + tok;
      }
    }
  }
  auto grab = [&kv](const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw std::runtime_error("field csv read: missing key " + key);
    return it->second;
  };
  const int n = std::stoi(grab("n"));
  const int m = std::stoi(grab("m"));
  if (n < 1 || n > kMaxDim) throw std::runtime_error("field csv read: dimension out of range");
  auto parse_vec = [](const std::string& s, int count) {
    std::istringstream ss(s);
    RVec v(count);
    for (double& x : v)
      if (!(ss >> x)) throw std::runtime_error("field csv read: malformed metadata vector");
    return v;
  };
  RVec dimsd = parse_vec(grab("dims"), n);
  std::vector<int> dims(n);
  for (int a = 0; a < n; ++a) dims[a] = static_cast<int>(dimsd[a]);
  RVec origin = parse_vec(grab("origin"), n);
  RVec spacing = parse_vec(grab("spacing"), n);
  GridField f(make_grid(dims, origin, spacing), m);

  std::string header;
  if (!std::getline(is, header)) throw std::runtime_error("field csv read: missing header row");
  const std::size_t expected_cols = n + 2 * f.num_components();

  std::string line;
  std::size_t p = 0;
  const std::size_t npts = f.geom().num_points();
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (p >= npts) throw std::runtime_error("field csv read: more rows than grid points");
    std::istringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    vals.reserve(expected_cols);
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    if (vals.size() != expected_cols) throw std::runtime_error("field csv read: column count mismatch");
    for (double v : vals) require_finite(v, "csv value");
    auto t = f.tensor_at(p);
    for (std::size_t k = 0; k < f.num_components(); ++k) t[k] = Complex{vals[n + 2 * k], vals[n + 2 * k + 1]};
    ++p;
  }
  if (p != npts) throw std::runtime_error("field csv read: fewer rows than grid points");
  return f;
}

GridField read_field_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_field_csv: cannot open " + path);
  return read_field_csv(is);
}

}  // namespace mrt
