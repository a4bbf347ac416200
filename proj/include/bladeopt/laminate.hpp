#pragma once

// Classical laminate theory: plane-stress ply stiffness, rotation to the
// laminate frame, and the A/B/D/E stiffness blocks consumed by the plate
// solver. All laminate objects are immutable value types; every function
// here is pure.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "bladeopt/common.hpp"

namespace bladeopt {

/// First-order shear correction factor.
inline constexpr double kShearCorrection = 5.0 / 6.0;

/// Orthotropic lamina elastic constants. Moduli in Pa, thickness in m.
/// g23 <= 0 means "derive from e2 and nu23".
struct Material {
  double e1 = 0.0;
  double e2 = 0.0;
  double g12 = 0.0;
  double g23 = 0.0;
  double nu12 = 0.0;
  double nu23 = 0.0;
  double ply_thickness = 0.0;

  double nu21() const { return nu12 * e2 / e1; }
  double g13() const { return g12; }
  double g23_effective() const {
    return g23 > 0.0 ? g23 : e2 / (2.0 * (1.0 + nu23));
  }
};

inline void validate_material(const Material& m) {
  if (!(m.e1 > 0.0 && m.e2 > 0.0 && m.g12 > 0.0 && m.ply_thickness > 0.0))
    throw ValidationError("material: e1, e2, g12 and ply_thickness must be positive");
  if (!(m.nu12 > 0.0 && m.nu12 < 0.5))
    throw ValidationError("material: nu12 must lie in (0, 0.5)");
  if (!(1.0 - m.nu12 * m.nu21() > 0.0))
    throw ValidationError("material: 1 - nu12*nu21 must be positive");
  if (m.g23 <= 0.0 && !(m.nu23 > 0.0 && m.nu23 < 0.5))
    throw ValidationError("material: nu23 must lie in (0, 0.5) when g23 is derived");
}

struct Ply {
  double angle = 0.0;      // radians, CCW from x toward y, canonical [0, pi)
  double thickness = 0.0;  // m
};

/// Ordered ply stack, listed outer surface -> mid-plane when symmetric.
struct Layup {
  Material material;
  std::vector<Ply> plies;
  bool symmetric = false;

  /// Full stack bottom -> top. A symmetric layup expands to a palindrome.
  std::vector<Ply> expanded() const {
    std::vector<Ply> full = plies;
    if (symmetric) full.insert(full.end(), plies.rbegin(), plies.rend());
    return full;
  }

  double total_thickness() const {
    double t = 0.0;
    for (const Ply& p : plies) t += p.thickness;
    return symmetric ? 2.0 * t : t;
  }

  /// Interface z-coordinates z_0 < ... < z_n with z_0 = -z_n.
  std::vector<double> z_coords() const {
    const std::vector<Ply> full = expanded();
    std::vector<double> z(full.size() + 1);
    z[0] = -0.5 * total_thickness();
    for (size_t k = 0; k < full.size(); ++k) z[k + 1] = z[k] + full[k].thickness;
    return z;
  }
};

inline Layup make_layup(const Material& material, const std::vector<double>& angles_rad,
                        double ply_thickness, bool symmetric) {
  validate_material(material);
  if (angles_rad.empty()) throw ValidationError("layup: ply list must be non-empty");
  if (!(ply_thickness > 0.0)) throw ValidationError("layup: ply thickness must be positive");
  Layup l;
  l.material = material;
  l.symmetric = symmetric;
  l.plies.reserve(angles_rad.size());
  for (double a : angles_rad) l.plies.push_back({wrap_angle(a), ply_thickness});
  return l;
}

/// Mirror every ply angle (theta -> -theta), canonicalized back to [0, pi).
inline Layup mirror_layup(const Layup& layup) {
  Layup m = layup;
  for (Ply& p : m.plies) p.angle = wrap_angle(-p.angle);
  return m;
}

/// Membrane (N/m), coupling (N), bending (N*m) and transverse shear (N/m)
/// stiffness blocks of a laminate.
struct LaminateStiffness {
  Eigen::Matrix3d a_mat = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d b_mat = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d d_mat = Eigen::Matrix3d::Zero();
  Eigen::Matrix2d e_mat = Eigen::Matrix2d::Zero();
};

struct StressResultantState {
  Eigen::Vector3d n_vec = Eigen::Vector3d::Zero();
  Eigen::Vector3d m_vec = Eigen::Vector3d::Zero();
  Eigen::Vector3d eps_vec = Eigen::Vector3d::Zero();
  Eigen::Vector3d kappa_vec = Eigen::Vector3d::Zero();
};

/// Plane-stress stiffness Q of a lamina in its material frame.
inline Eigen::Matrix3d reduced_stiffness(const Material& m) {
  const double den = 1.0 - m.nu12 * m.nu21();
  if (!(den > 0.0))
    throw ValidationError("reduced_stiffness: non-physical constants, 1 - nu12*nu21 <= 0");
  Eigen::Matrix3d q = Eigen::Matrix3d::Zero();
  q(0, 0) = m.e1 / den;
  q(1, 1) = m.e2 / den;
  q(0, 1) = q(1, 0) = m.nu12 * m.e2 / den;
  q(2, 2) = m.g12;
  return q;
}

/// Rotate a plane-stress stiffness by theta (radians, CCW from x toward y).
inline Eigen::Matrix3d rotate_stiffness(const Eigen::Matrix3d& q, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  const double c2 = c * c, s2 = s * s;
  const double c4 = c2 * c2, s4 = s2 * s2, c2s2 = c2 * s2;
  const double q11 = q(0, 0), q12 = q(0, 1), q22 = q(1, 1), q66 = q(2, 2);
  Eigen::Matrix3d r;
  r(0, 0) = q11 * c4 + 2.0 * (q12 + 2.0 * q66) * c2s2 + q22 * s4;
  r(1, 1) = q11 * s4 + 2.0 * (q12 + 2.0 * q66) * c2s2 + q22 * c4;
  r(0, 1) = r(1, 0) = (q11 + q22 - 4.0 * q66) * c2s2 + q12 * (c4 + s4);
  r(2, 2) = (q11 + q22 - 2.0 * q12 - 2.0 * q66) * c2s2 + q66 * (c4 + s4);
  r(0, 2) = r(2, 0) = (q11 - q12 - 2.0 * q66) * c * c2 * s + (q12 - q22 + 2.0 * q66) * c * s * s2;
  r(1, 2) = r(2, 1) = (q11 - q12 - 2.0 * q66) * c * s * s2 + (q12 - q22 + 2.0 * q66) * c * c2 * s;
  return r;
}

/// Transverse shear moduli block of one ply rotated into the laminate frame.
inline Eigen::Matrix2d rotated_shear_moduli(const Material& m, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  const double g13 = m.g13(), g23 = m.g23_effective();
  Eigen::Matrix2d g;
  g(0, 0) = g13 * c * c + g23 * s * s;
  g(1, 1) = g13 * s * s + g23 * c * c;
  g(0, 1) = g(1, 0) = (g13 - g23) * c * s;
  return g;
}

/// Layer sums for A, B, D (first/second/third powers of z) plus the
/// shear-corrected transverse block E.
inline LaminateStiffness build_stiffness(const Layup& layup) {
  if (layup.plies.empty()) throw ValidationError("build_stiffness: empty layup");
  const Eigen::Matrix3d q = reduced_stiffness(layup.material);
  const std::vector<Ply> full = layup.expanded();
  const std::vector<double> z = layup.z_coords();
  LaminateStiffness st;
  for (size_t k = 0; k < full.size(); ++k) {
    const Eigen::Matrix3d qb = rotate_stiffness(q, full[k].angle);
    const double z0 = z[k], z1 = z[k + 1];
    st.a_mat += qb * (z1 - z0);
    st.b_mat += qb * (z1 * z1 - z0 * z0) / 2.0;
    st.d_mat += qb * (z1 * z1 * z1 - z0 * z0 * z0) / 3.0;
    st.e_mat += kShearCorrection * rotated_shear_moduli(layup.material, full[k].angle) * (z1 - z0);
  }
  return st;
}

/// [N; M] = [[A, B], [B, D]] [eps; kappa]
inline StressResultantState laminate_response(const LaminateStiffness& stiff,
                                              const Eigen::Vector3d& eps,
                                              const Eigen::Vector3d& kappa) {
  StressResultantState s;
  s.eps_vec = eps;
  s.kappa_vec = kappa;
  s.n_vec = stiff.a_mat * eps + stiff.b_mat * kappa;
  s.m_vec = stiff.b_mat * eps + stiff.d_mat * kappa;
  return s;
}

/// In-plane strain at each ply mid-surface for a given mid-plane state.
/// No failure criterion is applied; consumers decide what to do with these.
inline std::vector<Eigen::Vector3d> ply_strains(const Layup& layup, const Eigen::Vector3d& eps,
                                                const Eigen::Vector3d& kappa) {
  const std::vector<double> z = layup.z_coords();
  std::vector<Eigen::Vector3d> out;
  out.reserve(z.size() - 1);
  for (size_t k = 0; k + 1 < z.size(); ++k) {
    const double zm = 0.5 * (z[k] + z[k + 1]);
    out.push_back(eps + zm * kappa);
  }
  return out;
}

}  // namespace bladeopt
