#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <random>
#include <sstream>

#include "bladeopt/fem.hpp"

using namespace bladeopt;
using Catch::Approx;

namespace {

Material as4() {
  Material m;
  m.e1 = 126e9;
  m.e2 = 11e9;
  m.g12 = 6.6e9;
  m.nu12 = 0.28;
  m.nu23 = 0.4;
  m.ply_thickness = 125e-6;
  return m;
}

LaminateStiffness plate40() {
  return build_stiffness(make_layup(as4(), std::vector<double>(24, deg2rad(40.0)), 125e-6, false));
}

ElementGeometry unit_right_triangle() {
  return make_element_geometry({0.0, 1.0, 0.0}, {0.0, 0.0, 1.0});
}

// nodal dof vector of an analytic field over an element's corner nodes
Eigen::Matrix<double, 15, 1> nodal_values(const ElementGeometry& g,
                                          const std::function<std::array<double, 5>(double, double)>& f) {
  Eigen::Matrix<double, 15, 1> d;
  for (int n = 0; n < 3; ++n) {
    const auto v = f(g.x[n], g.y[n]);
    for (int c = 0; c < 5; ++c) d[5 * n + c] = v[c];
  }
  return d;
}

}  // namespace

TEST_CASE("centroid subdivision") {
  const ElementGeometry g = unit_right_triangle();
  const auto subs = subdivide(g);
  CHECK(g.centroid_x == Approx(1.0 / 3.0));
  CHECK(g.centroid_y == Approx(1.0 / 3.0));
  double sum = 0.0;
  for (const auto& s : subs) {
    CHECK(s.area == Approx(g.area / 3.0));
    sum += s.area;
  }
  CHECK(sum == Approx(g.area).epsilon(1e-14));

  // irregular triangle still partitions into equal thirds
  const ElementGeometry g2 = make_element_geometry({0.1, 2.3, -0.7}, {0.0, 0.4, 1.9});
  for (const auto& s : subdivide(g2)) CHECK(s.area == Approx(g2.area / 3.0));
}

TEST_CASE("DSG3 strain-displacement matrices") {
  const ElementGeometry g = unit_right_triangle();
  const Dsg3Matrices bm = dsg3_matrices(g);

  SECTION("rigid transverse translation produces zero strain") {
    const auto d = nodal_values(g, [](double, double) {
      return std::array<double, 5>{0, 0, 1.0, 0, 0};
    });
    CHECK((bm.bp * d).norm() == 0.0);
    CHECK((bm.bb * d).norm() == 0.0);
    CHECK((bm.bs * d).norm() == Approx(0.0).margin(1e-15));
  }
  SECTION("pure membrane stretch u = x") {
    const auto d = nodal_values(g, [](double x, double) {
      return std::array<double, 5>{x, 0, 0, 0, 0};
    });
    const Eigen::Vector3d eps = bm.bp * d;
    CHECK(eps[0] == Approx(1.0));
    CHECK(eps[1] == Approx(0.0).margin(1e-14));
    CHECK(eps[2] == Approx(0.0).margin(1e-14));
  }
  SECTION("cylindrical bend: unit curvature, shear-gap consistency") {
    // w = -x^2/2, theta_x = x: kappa_x = 1 and the transverse shear vanishes
    const auto d = nodal_values(g, [](double x, double) {
      return std::array<double, 5>{0, 0, -x * x / 2.0, x, 0};
    });
    const Eigen::Vector3d kappa = bm.bb * d;
    CHECK(kappa[0] == Approx(1.0));
    CHECK(kappa[1] == Approx(0.0).margin(1e-14));
    CHECK(kappa[2] == Approx(0.0).margin(1e-14));
    CHECK((bm.bs * d).norm() == Approx(0.0).margin(1e-13));
  }
  SECTION("degenerate geometry is rejected") {
    const ElementGeometry bad = make_element_geometry({0, 1, 2}, {0, 0, 0});
    CHECK_THROWS_AS(dsg3_matrices(bad), NumericalError);
  }
}

TEST_CASE("smoothed element matrices") {
  const LaminateStiffness lam = plate40();
  const SmoothedElementMatrices m = smooth_element(unit_right_triangle(), lam);

  SECTION("element stiffness is symmetric") {
    CHECK(m.k_e.isApprox(m.k_e.transpose(), 1e-12));
  }
  SECTION("kernel holds the six rigid modes") {
    const ElementGeometry g = unit_right_triangle();
    std::vector<std::function<std::array<double, 5>(double, double)>> modes = {
        [](double, double) { return std::array<double, 5>{1, 0, 0, 0, 0}; },
        [](double, double) { return std::array<double, 5>{0, 1, 0, 0, 0}; },
        [](double, double) { return std::array<double, 5>{0, 0, 1, 0, 0}; },
        // in-plane rotation and the two zero-strain plate tilts
        [](double x, double y) { return std::array<double, 5>{-y, x, 0, 0, 0}; },
        [](double x, double) { return std::array<double, 5>{0, 0, x, -1, 0}; },
        [](double, double y) { return std::array<double, 5>{0, 0, y, 0, -1}; },
    };
    const double knorm = m.k_e.cwiseAbs().maxCoeff();
    for (const auto& mode : modes) {
      const auto d = nodal_values(g, mode);
      CHECK((m.k_e * d).cwiseAbs().maxCoeff() < 1e-10 * knorm);
    }
    // one assumed-strain element carries 8 independent strain rows, hence a
    // 7-dimensional kernel: the 6 rigid modes plus one mode removed by
    // assembly of neighboring elements
    Eigen::SelfAdjointEigenSolver<Mat15> eig(m.k_e);
    const double lmax = eig.eigenvalues().cwiseAbs().maxCoeff();
    int zero_modes = 0;
    for (int i = 0; i < 15; ++i)
      if (std::abs(eig.eigenvalues()[i]) < 1e-10 * lmax) ++zero_modes;
    CHECK(zero_modes == 7);
  }
  SECTION("symmetric laminate has no membrane-bending coupling blocks") {
    REQUIRE(lam.b_mat.cwiseAbs().maxCoeff() == 0.0);
    const int uv[6] = {0, 1, 5, 6, 10, 11};
    const int wth[9] = {2, 3, 4, 7, 8, 9, 12, 13, 14};
    for (int i : uv)
      for (int j : wth) CHECK(m.k_e(i, j) == 0.0);
  }
}

TEST_CASE("constant-curvature patch test") {
  // two-element patch of an arbitrary quadrilateral
  Mesh patch;
  patch.nodes = {{0.0, 0.0}, {1.1, 0.1}, {0.9, 1.2}, {-0.2, 0.8}};
  patch.elements = {{0, 1, 2}, {0, 2, 3}};
  patch.clamped_nodes = {0};
  const double kx = 1.0, ky = 0.3, kxy = 0.8;
  auto field = [&](double x, double y) {
    return std::array<double, 5>{0, 0, -(kx * x * x + ky * y * y + kxy * x * y) / 2.0,
                                 kx * x + kxy * y / 2.0, ky * y + kxy * x / 2.0};
  };
  for (int e = 0; e < 2; ++e) {
    const ElementGeometry g = element_geometry(patch, e);
    const SmoothedElementMatrices m = smooth_element(g, plate40());
    const auto d = nodal_values(g, field);
    const Eigen::Vector3d kappa = m.bb * d;
    CHECK(kappa[0] == Approx(kx).epsilon(1e-10));
    CHECK(kappa[1] == Approx(ky).epsilon(1e-10));
    CHECK(kappa[2] == Approx(kxy).epsilon(1e-10));
    CHECK((m.bs * d).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((m.bp * d).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("assembly") {
  Mesh m;
  m.nodes = {{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};
  m.elements = {{0, 1, 3}, {1, 2, 3}};
  m.clamped_nodes = {0, 3};
  const LaminateStiffness lam = plate40();

  SECTION("two-element square equals the hand-scattered sum") {
    const Eigen::MatrixXd k = Eigen::MatrixXd(assemble(m, lam));
    Eigen::MatrixXd hand = Eigen::MatrixXd::Zero(20, 20);
    for (int e = 0; e < 2; ++e) {
      const SmoothedElementMatrices sm = smooth_element(element_geometry(m, e), lam);
      int dof[15];
      for (int n = 0; n < 3; ++n)
        for (int c = 0; c < 5; ++c) dof[5 * n + c] = 5 * m.elements[e][n] + c;
      for (int i = 0; i < 15; ++i)
        for (int j = 0; j < 15; ++j) hand(dof[i], dof[j]) += sm.k_e(i, j);
    }
    CHECK(k.isApprox(hand, 1e-14));
  }
  SECTION("global matrix is symmetric on a random mesh") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> jit(-0.12, 0.12);
    Mesh r = gen_rect_mesh(1.0, 0.6, 6, 4);
    for (size_t n = 0; n < r.nodes.size(); ++n) {
      // keep the boundary fixed so elements stay proper
      if (r.nodes[n][0] > 0.05 && r.nodes[n][0] < 0.95 && r.nodes[n][1] > 0.05 &&
          r.nodes[n][1] < 0.55) {
        r.nodes[n][0] += jit(rng) * 0.2;
        r.nodes[n][1] += jit(rng) * 0.15;
      }
    }
    const Eigen::SparseMatrix<double> k = assemble(r, lam);
    const Eigen::SparseMatrix<double> kt = Eigen::SparseMatrix<double>(k.transpose());
    double diff = 0.0, norm = 0.0;
    for (int c = 0; c < k.outerSize(); ++c)
      for (Eigen::SparseMatrix<double>::InnerIterator it(k, c), jt(kt, c); it; ++it, ++jt) {
        diff = std::max(diff, std::abs(it.value() - jt.value()));
        norm = std::max(norm, std::abs(it.value()));
      }
    CHECK(diff < 1e-12 * norm);
  }
  SECTION("uniform translations lie in the unconstrained kernel") {
    const Eigen::SparseMatrix<double> k = assemble(m, lam);
    for (int c = 0; c < 3; ++c) {
      Eigen::VectorXd t = Eigen::VectorXd::Zero(20);
      for (int n = 0; n < 4; ++n) t[5 * n + c] = 1.0;
      CHECK((k * t).cwiseAbs().maxCoeff() < 1e-10 * k.coeffs().cwiseAbs().maxCoeff());
    }
  }
}

TEST_CASE("pressure load") {
  const Mesh m = gen_rect_mesh(0.4, 0.2, 9, 5);
  SECTION("zero pressure gives zero load") {
    CHECK(pressure_load(m, 0.0).norm() == 0.0);
  }
  SECTION("100 Pa on the 0.4 x 0.2 plate sums to 8 N on the w dofs") {
    const Eigen::VectorXd f = pressure_load(m, 100.0);
    CHECK(f.sum() == Approx(8.0).epsilon(1e-12));
    for (size_t n = 0; n < m.nodes.size(); ++n) {
      CHECK(f[5 * n] == 0.0);
      CHECK(f[5 * n + 1] == 0.0);
    }
  }
  SECTION("negative pressure flips every entry") {
    const Eigen::VectorXd fp = pressure_load(m, 60.0);
    const Eigen::VectorXd fn = pressure_load(m, -60.0);
    CHECK((fp + fn).cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("per-element table must match the element count") {
    CHECK_THROWS_AS(pressure_load(m, std::vector<double>{1.0, 2.0}), ValidationError);
  }
}

TEST_CASE("static solve on the Table-style cantilever") {
  const LaminateStiffness lam = plate40();
  SECTION("zero load gives zero displacement") {
    const Mesh m = gen_rect_mesh(0.4, 0.2, 5, 5);
    const DisplacementField d =
        solve(assemble(m, lam), Eigen::VectorXd::Zero(5 * m.nodes.size()), m.clamped_nodes);
    CHECK(d.data.norm() == 0.0);
  }
  SECTION("coarse-mesh reference deflections") {
    const Mesh m5 = gen_rect_mesh(0.4, 0.2, 5, 5);
    const DisplacementField d5 = solve(assemble(m5, lam), pressure_load(m5, 100.0), m5.clamped_nodes);
    CHECK(max_transverse_deflection(d5) * 1e3 == Approx(4.296).epsilon(0.03));

    const Mesh m10 = gen_rect_mesh(0.4, 0.2, 10, 10);
    const DisplacementField d10 =
        solve(assemble(m10, lam), pressure_load(m10, 100.0), m10.clamped_nodes);
    CHECK(max_transverse_deflection(d10) * 1e3 == Approx(5.704).epsilon(0.03));
  }
  SECTION("empty clamped set is rejected") {
    const Mesh m = gen_rect_mesh(0.4, 0.2, 5, 5);
    CHECK_THROWS_AS(solve(assemble(m, lam), pressure_load(m, 100.0), {}), ValidationError);
  }
  SECTION("rank deficiency is reported with the free mode count") {
    Mesh m;
    m.nodes = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {5.0, 5.0}};  // node 3 unattached
    m.elements = {{0, 1, 2}};
    m.clamped_nodes = {0, 2};
    CHECK_THROWS_WITH(solve(assemble(m, lam), Eigen::VectorXd::Zero(20), m.clamped_nodes),
                      Catch::Matchers::ContainsSubstring("rigid mode"));
  }
}

TEST_CASE("solver linearity") {
  const Mesh m = gen_rect_mesh(0.4, 0.2, 8, 6);
  SolverContext ctx(m);
  ctx.set_laminate(plate40());
  const DisplacementField d1 = ctx.solve(pressure_load(m, 100.0));
  SECTION("power-of-two scaling is bitwise exact") {
    const DisplacementField d2 = ctx.solve(pressure_load(m, 200.0));
    CHECK((d2.data - 2.0 * d1.data).cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("general scaling holds to roundoff") {
    const DisplacementField d = ctx.solve(pressure_load(m, 100.0 * 0.37));
    CHECK(d.data.isApprox(0.37 * d1.data, 1e-12));
  }
}

TEST_CASE("solver context matches the one-shot path") {
  const Mesh m = gen_rect_mesh(0.3, 0.15, 7, 5);
  const LaminateStiffness lam =
      build_stiffness(make_layup(as4(), {deg2rad(30), deg2rad(80), deg2rad(10)}, 2e-4, true));
  const Eigen::VectorXd f = pressure_load(m, 5e3);
  const DisplacementField a = solve(assemble(m, lam), f, m.clamped_nodes);
  SolverContext ctx(m);
  ctx.set_laminate(lam);
  const DisplacementField b = ctx.solve(f);
  CHECK(a.data.isApprox(b.data, 1e-10));
  // refactorize with another laminate and verify independence
  ctx.set_laminate(plate40());
  const DisplacementField c = ctx.solve(f);
  CHECK_FALSE(c.data.isApprox(b.data, 1e-3));
  ctx.set_laminate(lam);
  CHECK(ctx.solve(f).data.isApprox(b.data, 1e-12));
}

TEST_CASE("thin-limit cantilever matches beam theory") {
  // isotropic strip, t/L = 1e-3; shear locking would destroy this entirely
  Material iso;
  iso.e1 = iso.e2 = 70e9;
  iso.nu12 = 1e-3;
  iso.nu23 = 1e-3;
  iso.g12 = 70e9 / (2.0 * (1.0 + iso.nu12));
  iso.ply_thickness = 1e-4;
  const double L = 0.1, W = 0.02, t = 1e-4, P = 10.0;
  const Mesh m = gen_rect_mesh(L, W, 40, 8);
  SolverContext ctx(m);
  ctx.set_laminate(build_stiffness(make_layup(iso, {0.0}, t, false)));
  const DisplacementField d = ctx.solve(pressure_load(m, P));
  const double beam = P * L * L * L * L / (8.0 * iso.e1 * t * t * t / 12.0);
  CHECK(max_transverse_deflection(d) == Approx(beam).epsilon(0.03));
}

TEST_CASE("VTK export carries the five point arrays") {
  const Mesh m = gen_rect_mesh(0.4, 0.2, 3, 3);
  SolverContext ctx(m);
  ctx.set_laminate(plate40());
  const DisplacementField d = ctx.solve(pressure_load(m, 100.0));
  std::ostringstream os;
  write_vtk(os, m, d);
  const std::string vtk = os.str();
  CHECK(vtk.rfind("# vtk DataFile Version 3.0", 0) == 0);
  CHECK(vtk.find("DATASET UNSTRUCTURED_GRID") != std::string::npos);
  CHECK(vtk.find("POINTS 9 double") != std::string::npos);
  CHECK(vtk.find("CELLS 8 32") != std::string::npos);
  for (const char* name : {"SCALARS u", "SCALARS v", "SCALARS w", "SCALARS thetax", "SCALARS thetay"})
    CHECK(vtk.find(name) != std::string::npos);
}
