#pragma once

// Cell-based smoothed discrete-shear-gap (CS-DSG3) plate solver under
// first-order shear deformation theory. Each 3-node triangle is split at
// its centroid into three sub-triangles; DSG3 strain-displacement matrices
// are built per sub-triangle with the centroid displacement eliminated as
// the nodal average, then area-averaged over the element.
//
// Nodal dofs are {u, v, w, theta_x, theta_y} with
//   membrane strain  = [u,x ; v,y ; u,y + v,x]
//   curvature        = [tx,x ; ty,y ; tx,y + ty,x]
//   transverse shear = [w,x + tx ; w,y + ty]
// so theta = -grad w in the thin limit (kappa_x = -w,xx).

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <array>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "bladeopt/common.hpp"
#include "bladeopt/laminate.hpp"
#include "bladeopt/mesh.hpp"

namespace bladeopt {

using Mat3x15 = Eigen::Matrix<double, 3, 15>;
using Mat2x15 = Eigen::Matrix<double, 2, 15>;
using Mat15 = Eigen::Matrix<double, 15, 15>;

inline constexpr int kDofPerNode = 5;

struct ElementGeometry {
  std::array<double, 3> x{}, y{};
  double a = 0, b = 0, c = 0, d = 0;  // a = x2-x1, b = y2-y1, c = y3-y1, d = x3-x1
  double area = 0;
  double centroid_x = 0, centroid_y = 0;
};

inline ElementGeometry make_element_geometry(const std::array<double, 3>& x,
                                             const std::array<double, 3>& y) {
  ElementGeometry g;
  g.x = x;
  g.y = y;
  g.a = x[1] - x[0];
  g.b = y[1] - y[0];
  g.c = y[2] - y[0];
  g.d = x[2] - x[0];
  g.area = 0.5 * (g.a * g.c - g.b * g.d);
  g.centroid_x = (x[0] + x[1] + x[2]) / 3.0;
  g.centroid_y = (y[0] + y[1] + y[2]) / 3.0;
  return g;
}

inline ElementGeometry element_geometry(const Mesh& m, int e) {
  const auto& el = m.elements[e];
  return make_element_geometry({m.nodes[el[0]][0], m.nodes[el[1]][0], m.nodes[el[2]][0]},
                               {m.nodes[el[0]][1], m.nodes[el[1]][1], m.nodes[el[2]][1]});
}

/// Split at the centroid into sub-triangles (O,1,2), (O,2,3), (O,3,1).
inline std::array<ElementGeometry, 3> subdivide(const ElementGeometry& g) {
  const double xo = g.centroid_x, yo = g.centroid_y;
  auto sub = [&](int i, int j) {
    return make_element_geometry({xo, g.x[i], g.x[j]}, {yo, g.y[i], g.y[j]});
  };
  return {sub(0, 1), sub(1, 2), sub(2, 0)};
}

struct Dsg3Matrices {
  Mat3x15 bp = Mat3x15::Zero();
  Mat3x15 bb = Mat3x15::Zero();
  Mat2x15 bs = Mat2x15::Zero();
};

/// DSG3 strain-displacement matrices of one triangle over its own nodal
/// dofs. Shear gaps are accumulated along the edges 1->2 and 1->3 and
/// interpolated with the linear shape-function gradients, which removes
/// transverse shear locking.
inline Dsg3Matrices dsg3_matrices(const ElementGeometry& g) {
  if (!(g.area > 0.0)) throw NumericalError("dsg3_matrices: zero or negative sub-triangle area");
  const double inv2A = 1.0 / (2.0 * g.area);
  const double gx[3] = {(g.b - g.c) * inv2A, g.c * inv2A, -g.b * inv2A};
  const double gy[3] = {(g.d - g.a) * inv2A, -g.d * inv2A, g.a * inv2A};
  Dsg3Matrices m;
  for (int i = 0; i < 3; ++i) {
    const int u = 5 * i, v = 5 * i + 1, tx = 5 * i + 3, ty = 5 * i + 4;
    m.bp(0, u) = gx[i];
    m.bp(1, v) = gy[i];
    m.bp(2, u) = gy[i];
    m.bp(2, v) = gx[i];
    m.bb(0, tx) = gx[i];
    m.bb(1, ty) = gy[i];
    m.bb(2, tx) = gy[i];
    m.bb(2, ty) = gx[i];
  }
  // shear gap rows: gap_i = (w_i - w_1) + integral of theta along edge 1->i
  Eigen::Matrix<double, 1, 15> gap2 = Eigen::Matrix<double, 1, 15>::Zero();
  Eigen::Matrix<double, 1, 15> gap3 = Eigen::Matrix<double, 1, 15>::Zero();
  gap2(2) = -1.0; gap2(7) = 1.0;
  gap2(3) = gap2(8) = g.a / 2.0;
  gap2(4) = gap2(9) = g.b / 2.0;
  gap3(2) = -1.0; gap3(12) = 1.0;
  gap3(3) = gap3(13) = g.d / 2.0;
  gap3(4) = gap3(14) = g.c / 2.0;
  m.bs.row(0) = gx[1] * gap2 + gx[2] * gap3;
  m.bs.row(1) = gy[1] * gap2 + gy[2] * gap3;
  return m;
}

struct FemOptions {
  // Optional shear stabilization scale h_e^2 / (h_e^2 + alpha t^2) on the
  // transverse shear block; off by default, Table-1-style validation runs
  // plain DSG3 inside the smoothing cells.
  bool shear_stabilization = false;
  double stabilization_alpha = 0.1;
  double thickness = 0.0;  // laminate thickness, used only by stabilization
};

struct SmoothedElementMatrices {
  Mat3x15 bp = Mat3x15::Zero();
  Mat3x15 bb = Mat3x15::Zero();
  Mat2x15 bs = Mat2x15::Zero();
  Mat15 k_e = Mat15::Zero();
  double area = 0.0;
};

namespace detail {
/// Area-weighted average of the sub-triangle DSG3 matrices with the
/// centroid dofs eliminated by delta_O = (delta_1 + delta_2 + delta_3)/3.
inline void smoothed_b_matrices(const ElementGeometry& g, SmoothedElementMatrices& out) {
  const auto subs = subdivide(g);
  const int pair[3][2] = {{0, 1}, {1, 2}, {2, 0}};
  out.bp.setZero();
  out.bb.setZero();
  out.bs.setZero();
  for (int s = 0; s < 3; ++s) {
    const Dsg3Matrices bm = dsg3_matrices(subs[s]);
    const double w = subs[s].area / g.area;
    const int i = pair[s][0], j = pair[s][1];
    // local blocks: 0 -> centroid, 1 -> node i, 2 -> node j
    auto scatter = [&](auto& dst, const auto& src) {
      for (int n = 0; n < 3; ++n)
        dst.template middleCols<5>(5 * n) += (w / 3.0) * src.template middleCols<5>(0);
      dst.template middleCols<5>(5 * i) += w * src.template middleCols<5>(5);
      dst.template middleCols<5>(5 * j) += w * src.template middleCols<5>(10);
    };
    scatter(out.bp, bm.bp);
    scatter(out.bb, bm.bb);
    scatter(out.bs, bm.bs);
  }
}

inline void element_stiffness(const LaminateStiffness& lam, const FemOptions& opt,
                              SmoothedElementMatrices& m) {
  Eigen::Matrix2d e = lam.e_mat;
  if (opt.shear_stabilization && opt.thickness > 0.0) {
    const double he2 = 2.0 * m.area;
    e *= he2 / (he2 + opt.stabilization_alpha * opt.thickness * opt.thickness);
  }
  m.k_e.noalias() = m.bp.transpose() * (lam.a_mat * m.bp);
  m.k_e.noalias() += m.bb.transpose() * (lam.d_mat * m.bb);
  m.k_e.noalias() += m.bs.transpose() * (e * m.bs);
  if (lam.b_mat.cwiseAbs().maxCoeff() > 0.0) {
    const Mat15 coup = m.bp.transpose() * (lam.b_mat * m.bb);
    m.k_e += coup + coup.transpose();
  }
  m.k_e *= m.area;
}
}  // namespace detail

inline SmoothedElementMatrices smooth_element(const ElementGeometry& g,
                                              const LaminateStiffness& lam,
                                              const FemOptions& opt = {}) {
  SmoothedElementMatrices m;
  m.area = g.area;
  detail::smoothed_b_matrices(g, m);
  detail::element_stiffness(lam, opt, m);
  return m;
}

/// Per-node 5-dof solution vector.
struct DisplacementField {
  Eigen::VectorXd data;  // 5N
  int node_count = 0;

  double u(int n) const { return data[5 * n]; }
  double v(int n) const { return data[5 * n + 1]; }
  double w(int n) const { return data[5 * n + 2]; }
  double theta_x(int n) const { return data[5 * n + 3]; }
  double theta_y(int n) const { return data[5 * n + 4]; }
};

inline double max_transverse_deflection(const DisplacementField& d) {
  double m = 0.0;
  for (int n = 0; n < d.node_count; ++n) m = std::max(m, std::abs(d.w(n)));
  return m;
}

struct LoadCase {
  double pressure = 0.0;  // Pa, positive = +z
  double weight = 1.0;
  std::string label;
};

/// Consistent nodal load of a uniform normal pressure: P*A_e/3 on the w dof
/// of each element node.
inline Eigen::VectorXd pressure_load(const Mesh& mesh, double pressure) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(kDofPerNode * mesh.nodes.size());
  for (size_t e = 0; e < mesh.elements.size(); ++e) {
    const double fe = pressure * element_signed_area(mesh, static_cast<int>(e)) / 3.0;
    for (int n : mesh.elements[e]) f[5 * n + 2] += fe;
  }
  return f;
}

inline Eigen::VectorXd pressure_load(const Mesh& mesh, const LoadCase& lc) {
  return pressure_load(mesh, lc.pressure);
}

/// Per-element pressure table (e.g. an imported pressure map).
inline Eigen::VectorXd pressure_load(const Mesh& mesh, const std::vector<double>& per_element) {
  if (per_element.size() != mesh.elements.size())
    throw ValidationError("pressure_load: pressure table size does not match element count");
  Eigen::VectorXd f = Eigen::VectorXd::Zero(kDofPerNode * mesh.nodes.size());
  for (size_t e = 0; e < mesh.elements.size(); ++e) {
    const double fe = per_element[e] * element_signed_area(mesh, static_cast<int>(e)) / 3.0;
    for (int n : mesh.elements[e]) f[5 * n + 2] += fe;
  }
  return f;
}

/// Global stiffness (unconstrained, 5N x 5N, symmetric).
inline Eigen::SparseMatrix<double> assemble(const Mesh& mesh, const LaminateStiffness& lam,
                                            const FemOptions& opt = {}) {
  validate_mesh(mesh);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(mesh.elements.size() * 225);
  for (size_t e = 0; e < mesh.elements.size(); ++e) {
    const SmoothedElementMatrices m = smooth_element(element_geometry(mesh, static_cast<int>(e)), lam, opt);
    const auto& el = mesh.elements[e];
    int dof[15];
    for (int n = 0; n < 3; ++n)
      for (int k = 0; k < 5; ++k) dof[5 * n + k] = 5 * el[n] + k;
    for (int i = 0; i < 15; ++i)
      for (int j = 0; j < 15; ++j) trips.emplace_back(dof[i], dof[j], m.k_e(i, j));
  }
  Eigen::SparseMatrix<double> k(kDofPerNode * mesh.nodes.size(), kDofPerNode * mesh.nodes.size());
  k.setFromTriplets(trips.begin(), trips.end());
  return k;
}

namespace detail {
inline void check_factorization(const Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>& ldlt) {
  if (ldlt.info() != Eigen::Success)
    throw NumericalError("solve: sparse factorization failed (singular constrained system)");
  const auto& dvec = ldlt.vectorD();
  const double dmax = dvec.cwiseAbs().maxCoeff();
  int zero_modes = 0;
  for (Eigen::Index i = 0; i < dvec.size(); ++i)
    if (!(dvec[i] > 1e-12 * dmax)) ++zero_modes;
  if (zero_modes > 0)
    throw NumericalError("solve: constrained stiffness is rank-deficient, " +
                         std::to_string(zero_modes) + " free rigid mode(s) remain");
}
}  // namespace detail

/// Direct solve with all 5 dofs fixed at the clamped nodes.
/// Checks the relative residual against 1e-8.
inline DisplacementField solve(const Eigen::SparseMatrix<double>& k, const Eigen::VectorXd& f,
                               const std::vector<int>& clamped) {
  if (clamped.empty()) throw ValidationError("solve: clamped node set must be non-empty");
  const Eigen::Index ndof = k.rows();
  std::vector<char> fixed(ndof, 0);
  for (int n : clamped)
    for (int c = 0; c < 5; ++c) fixed[5 * n + c] = 1;
  std::vector<int> full2free(ndof, -1);
  int nfree = 0;
  for (Eigen::Index i = 0; i < ndof; ++i)
    if (!fixed[i]) full2free[i] = nfree++;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(k.nonZeros());
  for (int col = 0; col < k.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(k, col); it; ++it)
      if (full2free[it.row()] >= 0 && full2free[it.col()] >= 0)
        trips.emplace_back(full2free[it.row()], full2free[it.col()], it.value());
  Eigen::SparseMatrix<double> kff(nfree, nfree);
  kff.setFromTriplets(trips.begin(), trips.end());

  Eigen::VectorXd ff(nfree);
  for (Eigen::Index i = 0; i < ndof; ++i)
    if (full2free[i] >= 0) ff[full2free[i]] = f[i];

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(kff);
  detail::check_factorization(ldlt);
  const Eigen::VectorXd xf = ldlt.solve(ff);
  const double fn = ff.norm();
  if (fn > 0.0) {
    const double res = (kff * xf - ff).norm() / fn;
    if (!(res < 1e-8))
      throw NumericalError("solve: residual " + std::to_string(res) + " exceeds 1e-8");
  }

  DisplacementField d;
  d.node_count = static_cast<int>(ndof / kDofPerNode);
  d.data = Eigen::VectorXd::Zero(ndof);
  for (Eigen::Index i = 0; i < ndof; ++i)
    if (full2free[i] >= 0) d.data[i] = xf[full2free[i]];
  return d;
}

/// Reusable solver bound to one mesh: precomputes smoothed B-matrices, the
/// sparsity pattern and the symbolic factorization once, then refactorizes
/// per laminate. Construction is read-only on the mesh, so independent
/// contexts may be used concurrently; a single context is not thread-safe
/// across set_laminate calls.
class SolverContext {
 public:
  explicit SolverContext(const Mesh& mesh, FemOptions opt = {}) : mesh_(mesh), opt_(opt) {
    validate_mesh(mesh);
    if (mesh.clamped_nodes.empty())
      throw ValidationError("SolverContext: clamped node set must be non-empty");
    const Eigen::Index ndof = kDofPerNode * static_cast<Eigen::Index>(mesh.nodes.size());
    std::vector<char> fixed(ndof, 0);
    for (int n : mesh.clamped_nodes)
      for (int c = 0; c < 5; ++c) fixed[5 * n + c] = 1;
    full2free_.assign(ndof, -1);
    nfree_ = 0;
    for (Eigen::Index i = 0; i < ndof; ++i)
      if (!fixed[i]) full2free_[i] = nfree_++;

    ops_.resize(mesh.elements.size());
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(mesh.elements.size() * 160);
    for (size_t e = 0; e < mesh.elements.size(); ++e) {
      ElementOp& op = ops_[e];
      const ElementGeometry g = element_geometry(mesh, static_cast<int>(e));
      op.m.area = g.area;
      op.centroid_x = g.centroid_x;
      detail::smoothed_b_matrices(g, op.m);
      const auto& el = mesh.elements[e];
      for (int n = 0; n < 3; ++n)
        for (int k = 0; k < 5; ++k) op.dof[5 * n + k] = full2free_[5 * el[n] + k];
      for (int i = 0; i < 15; ++i)
        for (int j = 0; j < 15; ++j)
          if (op.dof[i] >= 0 && op.dof[j] >= 0) trips.emplace_back(op.dof[i], op.dof[j], 0.0);
    }
    kff_.resize(nfree_, nfree_);
    kff_.setFromTriplets(trips.begin(), trips.end());
    kff_.makeCompressed();
    // value-array offsets for scatter-add assembly
    for (ElementOp& op : ops_) {
      for (int i = 0; i < 15; ++i)
        for (int j = 0; j < 15; ++j) {
          int& slot = op.offset[15 * i + j];
          slot = -1;
          if (op.dof[i] < 0 || op.dof[j] < 0) continue;
          const int col = op.dof[j];
          const int row = op.dof[i];
          const int* inner = kff_.innerIndexPtr();
          int lo = kff_.outerIndexPtr()[col], hi = kff_.outerIndexPtr()[col + 1];
          while (lo < hi) {
            const int mid = (lo + hi) / 2;
            if (inner[mid] < row) lo = mid + 1;
            else hi = mid;
          }
          slot = lo;
        }
    }
    ldlt_.analyzePattern(kff_);
  }

  const Mesh& mesh() const { return mesh_; }
  int free_dof_count() const { return nfree_; }

  /// Assemble and refactorize for a new laminate.
  void set_laminate(const LaminateStiffness& lam) {
    double* vals = kff_.valuePtr();
    std::fill(vals, vals + kff_.nonZeros(), 0.0);
    for (ElementOp& op : ops_) {
      detail::element_stiffness(lam, opt_, op.m);
      for (int i = 0; i < 15; ++i)
        for (int j = 0; j < 15; ++j)
          if (op.offset[15 * i + j] >= 0) vals[op.offset[15 * i + j]] += op.m.k_e(i, j);
    }
    ldlt_.factorize(kff_);
    detail::check_factorization(ldlt_);
    factorized_ = true;
  }

  /// Solve for a full-size load vector; returns the full-size field with
  /// zeros at clamped dofs.
  DisplacementField solve(const Eigen::VectorXd& f_full) const {
    if (!factorized_) throw NumericalError("SolverContext::solve before set_laminate");
    Eigen::VectorXd ff(nfree_);
    for (size_t i = 0; i < full2free_.size(); ++i)
      if (full2free_[i] >= 0) ff[full2free_[i]] = f_full[i];
    const Eigen::VectorXd xf = ldlt_.solve(ff);
    const double fn = ff.norm();
    if (fn > 0.0) {
      const double res = (kff_ * xf - ff).norm() / fn;
      if (!(res < 1e-8))
        throw NumericalError("SolverContext: residual " + std::to_string(res) + " exceeds 1e-8");
    }
    DisplacementField d;
    d.node_count = static_cast<int>(mesh_.nodes.size());
    d.data = Eigen::VectorXd::Zero(full2free_.size());
    for (size_t i = 0; i < full2free_.size(); ++i)
      if (full2free_[i] >= 0) d.data[i] = xf[full2free_[i]];
    return d;
  }

  /// Element centroid span coordinates, used by pre-twist load projection.
  double element_centroid_x(size_t e) const { return ops_[e].centroid_x; }

 private:
  struct ElementOp {
    SmoothedElementMatrices m;
    std::array<int, 15> dof{};
    std::array<int, 225> offset{};
    double centroid_x = 0.0;
  };

  const Mesh& mesh_;
  FemOptions opt_;
  std::vector<ElementOp> ops_;
  std::vector<int> full2free_;
  int nfree_ = 0;
  Eigen::SparseMatrix<double> kff_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
  bool factorized_ = false;
};

/// Legacy-ASCII VTK unstructured grid with point data u v w thetax thetay.
inline void write_vtk(std::ostream& os, const Mesh& mesh, const DisplacementField& d) {
  char buf[128];
  os << "# vtk DataFile Version 3.0\n";
  os << "bladeopt displacement field\n";
  os << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << mesh.nodes.size() << " double\n";
  for (const auto& p : mesh.nodes) {
    std::snprintf(buf, sizeof buf, "%.9g %.9g 0\n", p[0], p[1]);
    os << buf;
  }
  os << "CELLS " << mesh.elements.size() << " " << 4 * mesh.elements.size() << "\n";
  for (const auto& el : mesh.elements) os << "3 " << el[0] << " " << el[1] << " " << el[2] << "\n";
  os << "CELL_TYPES " << mesh.elements.size() << "\n";
  for (size_t e = 0; e < mesh.elements.size(); ++e) os << "5\n";
  os << "POINT_DATA " << mesh.nodes.size() << "\n";
  const char* names[5] = {"u", "v", "w", "thetax", "thetay"};
  for (int c = 0; c < 5; ++c) {
    os << "SCALARS " << names[c] << " double 1\nLOOKUP_TABLE default\n";
    for (int n = 0; n < d.node_count; ++n) {
      std::snprintf(buf, sizeof buf, "%.9g\n", d.data[5 * n + c]);
      os << buf;
    }
  }
}

inline void write_vtk(const std::string& path, const Mesh& mesh, const DisplacementField& d) {
  std::ofstream os(path);
  if (!os) throw ValidationError("write_vtk: cannot open " + path);
  write_vtk(os, mesh, d);
}

}  // namespace bladeopt
