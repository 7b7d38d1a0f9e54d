#include "pcattn/pcio/off.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "pcattn/errors.hpp"

namespace pcattn::pcio {

namespace {

struct Line {
  std::size_t number;
  std::vector<std::string_view> tokens;
};

std::vector<Line> tokenize(std::string_view text) {
  std::vector<Line> lines;
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(pos, end - pos);
    ++number;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    Line line{number, {}};
    std::size_t i = 0;
    while (i < raw.size()) {
      while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
      std::size_t j = i;
      while (j < raw.size() && !std::isspace(static_cast<unsigned char>(raw[j]))) ++j;
      if (j > i) line.tokens.push_back(raw.substr(i, j - i));
      i = j;
    }
    if (!line.tokens.empty()) lines.push_back(std::move(line));
    if (end == text.size()) break;
    pos = end + 1;
  }
  return lines;
}

double to_double(std::string_view tok, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
    throw ParseError(line, "expected a number, got '" + std::string(tok) + "'");
  }
  return v;
}

std::uint64_t to_count(std::string_view tok, std::size_t line) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError(line, "expected a non-negative integer, got '" + std::string(tok) + "'");
  }
  return v;
}

}  // namespace

Mesh parse_off(std::string_view text) {
  const auto lines = tokenize(text);
  std::size_t li = 0;
  if (lines.empty()) throw ParseError(1, "empty OFF input");

  // Header and counts. "OFF" may stand alone, precede the counts on the same
  // line, or be glued to the vertex count ("OFF490 1000 0").
  std::vector<std::string_view> counts;
  std::size_t counts_line = lines[0].number;
  const auto& head = lines[0].tokens;
  if (head[0].starts_with("OFF")) {
    std::string_view rest = head[0].substr(3);
    if (!rest.empty()) counts.push_back(rest);
    counts.insert(counts.end(), head.begin() + 1, head.end());
    ++li;
    if (counts.empty()) {
      if (li >= lines.size()) throw ParseError(lines[0].number + 1, "missing counts line");
      counts = lines[li].tokens;
      counts_line = lines[li].number;
      ++li;
    }
  } else {
    counts = head;
    ++li;
  }
  if (counts.size() < 2 || counts.size() > 3) {
    throw ParseError(counts_line, "counts line must hold 'V F [E]'");
  }
  const std::uint64_t nv = to_count(counts[0], counts_line);
  const std::uint64_t nf = to_count(counts[1], counts_line);
  if (counts.size() == 3) to_count(counts[2], counts_line);

  Mesh mesh;
  mesh.vertices.reserve(nv);
  for (std::uint64_t v = 0; v < nv; ++v, ++li) {
    if (li >= lines.size()) {
      throw ParseError(lines.back().number + 1,
                       "expected " + std::to_string(nv) + " vertices, found " + std::to_string(v));
    }
    const Line& line = lines[li];
    if (line.tokens.size() < 3) throw ParseError(line.number, "vertex line needs 3 coordinates");
    mesh.vertices.push_back({to_double(line.tokens[0], line.number), to_double(line.tokens[1], line.number),
                             to_double(line.tokens[2], line.number)});
  }
  for (std::uint64_t f = 0; f < nf; ++f, ++li) {
    if (li >= lines.size()) {
      throw ParseError(lines.back().number + 1,
                       "expected " + std::to_string(nf) + " faces, found " + std::to_string(f));
    }
    const Line& line = lines[li];
    const std::uint64_t n = to_count(line.tokens[0], line.number);
    if (n < 3) throw ParseError(line.number, "face needs at least 3 vertices");
    if (line.tokens.size() < n + 1) throw ParseError(line.number, "face declares more vertices than listed");
    std::vector<std::uint32_t> poly;
    for (std::uint64_t k = 0; k < n; ++k) {
      const std::uint64_t id = to_count(line.tokens[k + 1], line.number);
      if (id >= nv) {
        throw ParseError(line.number, "face index " + std::to_string(id) + " out of range for " +
                                          std::to_string(nv) + " vertices");
      }
      poly.push_back(static_cast<std::uint32_t>(id));
    }
    auto sorted = poly;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw ParseError(line.number, "face repeats a vertex");
    }
    for (std::size_t k = 1; k + 1 < poly.size(); ++k) mesh.faces.push_back({poly[0], poly[k], poly[k + 1]});
  }
  if (li < lines.size()) throw ParseError(lines[li].number, "unexpected content after the declared faces");
  return mesh;
}

Mesh read_off(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_off(ss.str());
}

std::string serialize_off(const Mesh& mesh) {
  std::string out = "OFF\n" + std::to_string(mesh.vertices.size()) + " " + std::to_string(mesh.faces.size()) +
                    " 0\n";
  char buf[96];
  for (const Vec3& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", v[0], v[1], v[2]);
    out += buf;
  }
  for (const auto& f : mesh.faces) {
    out += "3 " + std::to_string(f[0]) + " " + std::to_string(f[1]) + " " + std::to_string(f[2]) + "\n";
  }
  return out;
}

PointCloud sample_surface(const Mesh& mesh, std::size_t n, std::uint64_t seed) {
  std::vector<double> cumulative;
  cumulative.reserve(mesh.faces.size());
  double total = 0.0;
  for (const auto& f : mesh.faces) {
    const Vec3& a = mesh.vertices[f[0]];
    const Vec3& b = mesh.vertices[f[1]];
    const Vec3& c = mesh.vertices[f[2]];
    const Vec3 u{b[0] - a[0], b[1] - a[1], b[2] - a[2]};
    const Vec3 v{c[0] - a[0], c[1] - a[1], c[2] - a[2]};
    const Vec3 cr{u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
    total += 0.5 * std::sqrt(cr[0] * cr[0] + cr[1] * cr[1] + cr[2] * cr[2]);
    cumulative.push_back(total);
  }
  if (!(total > 0.0)) throw ContractError("mesh has zero surface area");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PointCloud pc;
  pc.positions.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = unit(rng) * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
    if (it == cumulative.end()) --it;
    const auto& f = mesh.faces[static_cast<std::size_t>(it - cumulative.begin())];
    const double s = std::sqrt(unit(rng));
    const double t = unit(rng);
    const double wa = 1.0 - s;
    const double wb = s * (1.0 - t);
    const double wc = s * t;
    Vec3 p{};
    for (int a = 0; a < 3; ++a) {
      p[a] = wa * mesh.vertices[f[0]][a] + wb * mesh.vertices[f[1]][a] + wc * mesh.vertices[f[2]][a];
    }
    pc.positions.push_back(p);
  }
  return pc;
}

}  // namespace pcattn::pcio
