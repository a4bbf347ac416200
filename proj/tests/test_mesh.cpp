#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "bladeopt/mesh.hpp"

using namespace bladeopt;
using Catch::Approx;

TEST_CASE("rectangular grid counts and area") {
  SECTION("5x5") {
    const Mesh m = gen_rect_mesh(0.4, 0.2, 5, 5);
    CHECK(m.nodes.size() == 25);
    CHECK(m.elements.size() == 32);
    CHECK(total_area(m) == Approx(0.4 * 0.2).epsilon(1e-13));
    CHECK(m.clamped_nodes.size() == 5);
    CHECK(m.tip_chord == Approx(0.2));
  }
  SECTION("80x80") {
    const Mesh m = gen_rect_mesh(0.4, 0.2, 80, 80);
    CHECK(m.nodes.size() == 6400);
    CHECK(m.elements.size() == 12482);
    CHECK(total_area(m) == Approx(0.08).epsilon(1e-12));
  }
  SECTION("grid arithmetic holds across sizes") {
    for (int nx : {2, 3, 7, 33, 100})
      for (int ny : {2, 5, 41}) {
        const Mesh m = gen_rect_mesh(1.0, 0.5, nx, ny);
        CHECK(m.nodes.size() == static_cast<size_t>(nx) * ny);
        CHECK(m.elements.size() == static_cast<size_t>(2) * (nx - 1) * (ny - 1));
      }
  }
  SECTION("rejects bad input") {
    CHECK_THROWS_AS(gen_rect_mesh(-1.0, 0.2, 5, 5), ValidationError);
    CHECK_THROWS_AS(gen_rect_mesh(0.4, 0.0, 5, 5), ValidationError);
    CHECK_THROWS_AS(gen_rect_mesh(0.4, 0.2, 1, 5), ValidationError);
  }
}

TEST_CASE("generated meshes are clean") {
  const Mesh rect = gen_rect_mesh(0.4, 0.2, 12, 7);
  PlanformSpec spec{0.4, 0.08, 0.45, 5, 600};
  const Mesh blade = gen_blade_mesh(spec);
  for (const Mesh* m : {&rect, &blade}) {
    CHECK_NOTHROW(validate_mesh(*m));
    CHECK_FALSE(has_duplicate_nodes(*m));
    CHECK(is_watertight(*m));
    for (size_t e = 0; e < m->elements.size(); ++e)
      CHECK(element_signed_area(*m, static_cast<int>(e)) > 0.0);
  }
}

TEST_CASE("blade planform area follows the EAR identity") {
  SECTION("B5-45") {
    PlanformSpec spec{0.4, 0.08, 0.45, 5, 900};
    const Mesh m = gen_blade_mesh(spec);
    const double target = 0.45 * kPi * 0.4 * 0.4 / 4.0 / 5.0;
    CHECK(target == Approx(0.011310).epsilon(1e-4));
    CHECK(total_area(m) == Approx(target).epsilon(1e-12));
  }
  SECTION("B5-75") {
    PlanformSpec spec{0.4, 0.08, 0.75, 5, 900};
    const Mesh m = gen_blade_mesh(spec);
    CHECK(total_area(m) == Approx(0.018850).epsilon(1e-4));
  }
  SECTION("root nodes lie on the hub-radius line") {
    PlanformSpec spec{0.4, 0.08, 0.6, 5, 700};
    const Mesh m = gen_blade_mesh(spec);
    REQUIRE_FALSE(m.clamped_nodes.empty());
    for (int n : m.clamped_nodes) CHECK(m.nodes[n][0] == Approx(0.04).epsilon(1e-12));
    CHECK(m.has_tip_markers());
    CHECK(m.tip_chord > 0.0);
  }
  SECTION("degenerate outlines are rejected") {
    PlanformSpec spec{0.4, 0.36, 1.9, 2, 900};  // huge EAR on a sliver of span
    CHECK_THROWS_AS(gen_blade_mesh(spec), ValidationError);
    PlanformSpec bad{0.4, 0.5, 0.45, 5, 900};
    CHECK_THROWS_AS(gen_blade_mesh(bad), ValidationError);
  }
}

TEST_CASE("mesh file round trip") {
  const Mesh m = gen_rect_mesh(0.4, 0.2, 5, 5);
  std::stringstream ss;
  save_mesh(m, ss);
  const Mesh r = load_mesh(ss);
  CHECK(r.nodes == m.nodes);
  CHECK(r.elements == m.elements);
  CHECK(r.clamped_nodes == m.clamped_nodes);
  CHECK(r.tip_leading == m.tip_leading);
  CHECK(r.tip_trailing == m.tip_trailing);
  CHECK(r.tip_chord == Approx(m.tip_chord));
}

TEST_CASE("mesh file errors") {
  SECTION("dangling node index") {
    std::stringstream ss(
        "meshfmt 1\nnodes 3\n0 0\n1 0\n0 1\nelements 1\n0 1 9999\nclamped 1\n0\n");
    CHECK_THROWS_WITH(load_mesh(ss), Catch::Matchers::ContainsSubstring("9999"));
  }
  SECTION("clockwise element rejected by default") {
    std::stringstream ss("meshfmt 1\nnodes 3\n0 0\n1 0\n0 1\nelements 1\n0 2 1\nclamped 1\n0\n");
    CHECK_THROWS_WITH(load_mesh(ss), Catch::Matchers::ContainsSubstring("clockwise"));
  }
  SECTION("clockwise element reoriented on request") {
    std::stringstream ss("meshfmt 1\nnodes 3\n0 0\n1 0\n0 1\nelements 1\n0 2 1\nclamped 1\n0\n");
    const Mesh m = load_mesh(ss, /*auto_reorient=*/true);
    CHECK(element_signed_area(m, 0) > 0.0);
  }
  SECTION("malformed token names its line") {
    std::stringstream ss("meshfmt 1\nnodes 2\n0 0\nnot_a_number 0\n");
    try {
      load_mesh(ss);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line_number == 4);
    }
  }
  SECTION("comments and whitespace are tolerated") {
    std::stringstream ss(
        "# header comment\nmeshfmt 1\nnodes 3 # three nodes\n0 0\n1 0\n0 1\n"
        "elements 1\n0 1 2\nclamped 2\n0   2\n tip 1 2\n");
    const Mesh m = load_mesh(ss);
    CHECK(m.nodes.size() == 3);
    CHECK(m.clamped_nodes.size() == 2);
    CHECK(m.tip_leading == 1);
  }
}
