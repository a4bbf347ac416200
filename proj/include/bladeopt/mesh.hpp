#pragma once

// Triangular mid-plane meshes for rectangular validation plates and blade
// planforms. Meshes are immutable after generation/load; all elements are
// counter-clockwise.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bladeopt/common.hpp"

namespace bladeopt {

struct Mesh {
  std::vector<std::array<double, 2>> nodes;       // (x, y) in m, x spanwise
  std::vector<std::array<int, 3>> elements;       // CCW node indices
  std::vector<int> clamped_nodes;                 // root edge
  int tip_leading = -1;
  int tip_trailing = -1;
  double tip_chord = 0.0;                         // m

  bool has_tip_markers() const { return tip_leading >= 0 && tip_trailing >= 0; }
};

inline double element_signed_area(const Mesh& m, int e) {
  const auto& el = m.elements[e];
  const auto& p1 = m.nodes[el[0]];
  const auto& p2 = m.nodes[el[1]];
  const auto& p3 = m.nodes[el[2]];
  return 0.5 * ((p2[0] - p1[0]) * (p3[1] - p1[1]) - (p3[0] - p1[0]) * (p2[1] - p1[1]));
}

inline double total_area(const Mesh& m) {
  double a = 0.0;
  for (int e = 0; e < static_cast<int>(m.elements.size()); ++e) a += element_signed_area(m, e);
  return a;
}

/// Structural validity: index bounds, positive areas, tip marker sanity.
inline void validate_mesh(const Mesh& m) {
  const int n = static_cast<int>(m.nodes.size());
  if (n < 3 || m.elements.empty()) throw ValidationError("mesh: needs at least 3 nodes and 1 element");
  for (size_t e = 0; e < m.elements.size(); ++e) {
    for (int k : m.elements[e])
      if (k < 0 || k >= n)
        throw ValidationError("mesh: element " + std::to_string(e) + " references invalid node " +
                              std::to_string(k));
    if (!(element_signed_area(m, static_cast<int>(e)) > 0.0))
      throw ValidationError("mesh: element " + std::to_string(e) +
                            " has non-positive area (clockwise or degenerate)");
  }
  for (int k : m.clamped_nodes)
    if (k < 0 || k >= n) throw ValidationError("mesh: clamped set references invalid node");
  if (m.has_tip_markers()) {
    if (m.tip_leading >= n || m.tip_trailing >= n)
      throw ValidationError("mesh: tip marker references invalid node");
    if (m.tip_leading == m.tip_trailing)
      throw ValidationError("mesh: tip_leading and tip_trailing must differ");
  }
}

/// True when no two nodes coincide within tol.
inline bool has_duplicate_nodes(const Mesh& m, double tol = 1e-12) {
  std::vector<int> order(m.nodes.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return m.nodes[a] < m.nodes[b]; });
  for (size_t i = 0; i + 1 < order.size(); ++i) {
    const auto& p = m.nodes[order[i]];
    const auto& q = m.nodes[order[i + 1]];
    if (std::abs(p[0] - q[0]) < tol && std::abs(p[1] - q[1]) < tol) return true;
  }
  return false;
}

/// True when every interior edge is shared by exactly two triangles and
/// every boundary edge by exactly one.
inline bool is_watertight(const Mesh& m) {
  std::map<std::pair<int, int>, int> count;
  for (const auto& el : m.elements)
    for (int k = 0; k < 3; ++k) {
      int a = el[k], b = el[(k + 1) % 3];
      count[{std::min(a, b), std::max(a, b)}]++;
    }
  for (const auto& [edge, c] : count)
    if (c > 2) return false;
  return true;
}

/// Structured cantilever grid: nx*ny nodes, 2(nx-1)(ny-1) triangles,
/// clamped at x = 0, tip markers at the far-edge corners.
inline Mesh gen_rect_mesh(double length, double width, int nx, int ny) {
  if (!(length > 0.0 && width > 0.0)) throw ValidationError("gen_rect_mesh: dimensions must be positive");
  if (nx < 2 || ny < 2) throw ValidationError("gen_rect_mesh: nx and ny must be >= 2");
  Mesh m;
  m.nodes.reserve(static_cast<size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      m.nodes.push_back({length * i / (nx - 1), width * j / (ny - 1)});
  auto idx = [nx](int i, int j) { return j * nx + i; };
  for (int j = 0; j + 1 < ny; ++j)
    for (int i = 0; i + 1 < nx; ++i) {
      const int n00 = idx(i, j), n10 = idx(i + 1, j);
      const int n11 = idx(i + 1, j + 1), n01 = idx(i, j + 1);
      m.elements.push_back({n00, n10, n01});
      m.elements.push_back({n10, n11, n01});
    }
  for (int j = 0; j < ny; ++j) m.clamped_nodes.push_back(idx(0, j));
  m.tip_trailing = idx(nx - 1, 0);
  m.tip_leading = idx(nx - 1, ny - 1);
  m.tip_chord = width;
  validate_mesh(m);
  return m;
}

/// Flat expanded-plane blade outline. Only the EAR area identity, the hub
/// radius and the tip markers are contractual; the chord distribution is a
/// parametric stand-in for the real offset tables.
struct PlanformSpec {
  double diameter = 0.0;
  double hub_diameter = 0.0;
  double expanded_area_ratio = 0.0;
  int blade_count = 0;
  int target_element_count = 900;
};

inline void validate_planform(const PlanformSpec& s) {
  if (!(s.hub_diameter > 0.0 && s.hub_diameter < s.diameter))
    throw ValidationError("planform: need 0 < hub_diameter < diameter");
  if (!(s.expanded_area_ratio > 0.0 && s.expanded_area_ratio < 2.0))
    throw ValidationError("planform: expanded_area_ratio must lie in (0, 2)");
  if (s.blade_count < 2) throw ValidationError("planform: blade_count must be >= 2");
  if (s.target_element_count < 8) throw ValidationError("planform: target_element_count too small");
}

namespace planform {
// Chord law c(eta) ~ (1 + kFullness*eta) * (1 - eta^2)^kTaper on the span
// fraction eta in [0, kSpanCap]; the grid stops short of the geometric tip
// so the tip chord stays positive for the pitch markers.
inline constexpr double kFullness = 2.5;
inline constexpr double kTaper = 0.5;
inline constexpr double kSpanCap = 0.97;

inline double chord_base(double eta) {
  return (1.0 + kFullness * eta) * std::pow(1.0 - eta * eta, kTaper);
}
}  // namespace planform

/// Expanded-blade mesh: structured grid from hub radius to (near) tip,
/// chord scaled so the meshed per-blade area equals EAR * pi D^2/4 / Z.
inline Mesh gen_blade_mesh(const PlanformSpec& spec) {
  validate_planform(spec);
  const double r_tip = 0.5 * spec.diameter;
  const double r_hub = 0.5 * spec.hub_diameter;
  const double target_area =
      spec.expanded_area_ratio * kPi * spec.diameter * spec.diameter / 4.0 / spec.blade_count;
  const double span = (r_tip - r_hub) * planform::kSpanCap;

  // grid sizing for near-square cells
  const double mean_chord = target_area / span;
  if (mean_chord > 2.0 * span)
    throw ValidationError("gen_blade_mesh: outline degenerate, EAR too large for chord model");
  const double ratio = span / mean_chord;
  const int nc1 = std::max(4, static_cast<int>(std::lround(std::sqrt(spec.target_element_count / (2.0 * ratio)))));
  const int ns1 = std::max(4, static_cast<int>(std::lround(spec.target_element_count / (2.0 * nc1))));
  const int ns = ns1 + 1, nc = nc1 + 1;

  Mesh m;
  m.nodes.reserve(static_cast<size_t>(ns) * nc);
  for (int j = 0; j < ns; ++j) {
    const double eta = planform::kSpanCap * j / (ns - 1);
    const double r = r_hub + eta * (r_tip - r_hub);
    const double c = planform::chord_base(eta);  // unscaled, fixed below
    for (int i = 0; i < nc; ++i) m.nodes.push_back({r, c * (static_cast<double>(i) / (nc - 1) - 0.5)});
  }
  auto idx = [nc](int i, int j) { return j * nc + i; };
  for (int j = 0; j + 1 < ns; ++j)
    for (int i = 0; i + 1 < nc; ++i) {
      const int n00 = idx(i, j), n10 = idx(i, j + 1);
      const int n11 = idx(i + 1, j + 1), n01 = idx(i + 1, j);
      m.elements.push_back({n00, n10, n01});
      m.elements.push_back({n10, n11, n01});
    }
  // scale chords so the triangulated area matches the EAR identity exactly
  const double raw = total_area(m);
  const double scale = target_area / raw;
  for (auto& p : m.nodes) p[1] *= scale;
  for (int i = 0; i < nc; ++i) m.clamped_nodes.push_back(idx(i, 0));
  m.tip_trailing = idx(0, ns - 1);
  m.tip_leading = idx(nc - 1, ns - 1);
  m.tip_chord = m.nodes[m.tip_leading][1] - m.nodes[m.tip_trailing][1];
  validate_mesh(m);
  return m;
}

/// Plain-text mesh format:
///   meshfmt 1
///   nodes N       followed by N lines "x y"
///   elements M    followed by M lines "i j k" (0-based)
///   clamped K     followed by K indices
///   tip i_le i_te
/// Whitespace-delimited; '#' starts a comment.
inline void save_mesh(const Mesh& m, std::ostream& os) {
  char buf[96];
  os << "meshfmt 1\n";
  os << "nodes " << m.nodes.size() << "\n";
  for (const auto& p : m.nodes) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p[0], p[1]);
    os << buf;
  }
  os << "elements " << m.elements.size() << "\n";
  for (const auto& el : m.elements) os << el[0] << " " << el[1] << " " << el[2] << "\n";
  os << "clamped " << m.clamped_nodes.size() << "\n";
  for (size_t i = 0; i < m.clamped_nodes.size(); ++i)
    os << m.clamped_nodes[i] << (i + 1 == m.clamped_nodes.size() ? "\n" : " ");
  if (m.clamped_nodes.empty()) os << "\n";
  if (m.has_tip_markers()) os << "tip " << m.tip_leading << " " << m.tip_trailing << "\n";
}

inline void save_mesh(const Mesh& m, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ValidationError("save_mesh: cannot open " + path);
  save_mesh(m, os);
}

namespace detail {
// Token stream over the mesh format that tracks line numbers for errors.
class MeshTokens {
 public:
  explicit MeshTokens(std::istream& is) : is_(is) {}
  std::string next() {
    std::string tok;
    while (true) {
      if (pos_ >= line_.size()) {
        if (!std::getline(is_, line_)) return "";
        ++line_no_;
        pos_ = 0;
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(line_[pos_]))) { ++pos_; continue; }
      if (line_[pos_] == '#') { pos_ = line_.size(); continue; }
      size_t start = pos_;
      while (pos_ < line_.size() && !std::isspace(static_cast<unsigned char>(line_[pos_])) )
        ++pos_;
      return line_.substr(start, pos_ - start);
    }
  }
  int line() const { return line_no_; }
  long long next_int(const char* what) {
    const std::string t = next();
    try {
      size_t used = 0;
      long long v = std::stoll(t, &used);
      if (t.empty() || used != t.size()) throw std::invalid_argument(t);
      return v;
    } catch (const std::exception&) {
      throw ParseError(std::string("expected integer for ") + what + ", got '" + t + "'", line_no_);
    }
  }
  double next_double(const char* what) {
    const std::string t = next();
    try {
      size_t used = 0;
      double v = std::stod(t, &used);
      if (t.empty() || used != t.size()) throw std::invalid_argument(t);
      return v;
    } catch (const std::exception&) {
      throw ParseError(std::string("expected number for ") + what + ", got '" + t + "'", line_no_);
    }
  }

 private:
  std::istream& is_;
  std::string line_;
  size_t pos_ = 0;
  int line_no_ = 0;
};
}  // namespace detail

/// Parse the plain-text format. Clockwise elements are rejected unless
/// auto_reorient is set, in which case they are flipped.
inline Mesh load_mesh(std::istream& is, bool auto_reorient = false) {
  detail::MeshTokens tk(is);
  std::string tok = tk.next();
  if (tok != "meshfmt") throw ParseError("expected header 'meshfmt 1'", tk.line());
  if (tk.next_int("format version") != 1) throw ParseError("unsupported mesh format version", tk.line());
  Mesh m;
  if (tk.next() != "nodes") throw ParseError("expected 'nodes N'", tk.line());
  const long long nn = tk.next_int("node count");
  if (nn < 0) throw ParseError("negative node count", tk.line());
  m.nodes.resize(nn);
  for (auto& p : m.nodes) {
    p[0] = tk.next_double("node x");
    p[1] = tk.next_double("node y");
  }
  if (tk.next() != "elements") throw ParseError("expected 'elements M'", tk.line());
  const long long ne = tk.next_int("element count");
  if (ne < 0) throw ParseError("negative element count", tk.line());
  m.elements.resize(ne);
  for (size_t e = 0; e < m.elements.size(); ++e) {
    auto& el = m.elements[e];
    for (int k = 0; k < 3; ++k) {
      long long v = tk.next_int("element node index");
      if (v < 0 || v >= nn)
        throw ValidationError("load_mesh: element " + std::to_string(e) +
                              " references node " + std::to_string(v) + " of " + std::to_string(nn));
      el[k] = static_cast<int>(v);
    }
    if (element_signed_area(m, static_cast<int>(e)) <= 0.0) {
      if (!auto_reorient)
        throw ValidationError("load_mesh: element " + std::to_string(e) +
                              " is clockwise (pass auto_reorient to flip)");
      std::swap(el[1], el[2]);
    }
  }
  if (tk.next() != "clamped") throw ParseError("expected 'clamped K'", tk.line());
  const long long nk = tk.next_int("clamped count");
  m.clamped_nodes.resize(nk);
  for (auto& k : m.clamped_nodes) {
    long long v = tk.next_int("clamped node index");
    if (v < 0 || v >= nn) throw ValidationError("load_mesh: clamped index out of range");
    k = static_cast<int>(v);
  }
  tok = tk.next();
  if (tok == "tip") {
    m.tip_leading = static_cast<int>(tk.next_int("tip leading index"));
    m.tip_trailing = static_cast<int>(tk.next_int("tip trailing index"));
    if (m.tip_leading < 0 || m.tip_leading >= nn || m.tip_trailing < 0 || m.tip_trailing >= nn)
      throw ValidationError("load_mesh: tip marker index out of range");
    m.tip_chord = std::hypot(m.nodes[m.tip_leading][0] - m.nodes[m.tip_trailing][0],
                             m.nodes[m.tip_leading][1] - m.nodes[m.tip_trailing][1]);
    tok = tk.next();
  }
  if (!tok.empty()) throw ParseError("unexpected trailing token '" + tok + "'", tk.line());
  validate_mesh(m);
  return m;
}

inline Mesh load_mesh(const std::string& path, bool auto_reorient = false) {
  std::ifstream is(path);
  if (!is) throw ValidationError("load_mesh: cannot open " + path);
  return load_mesh(is, auto_reorient);
}

}  // namespace bladeopt
