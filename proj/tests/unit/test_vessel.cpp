#include "doctest.h"

#include "stressnav/error.hpp"
#include "stressnav/path.hpp"
#include "stressnav/vessel.hpp"

#include <cmath>
#include <random>

using namespace stressnav;
using namespace stressnav::vessel;

namespace {

double signed_area(const BoundaryMesh& m) {
  double a = 0.0;
  for (const auto& e : m.elements) a += cross(e.a, e.b);
  return 0.5 * a;
}

// Distance from p to the exact wall geometry, by dense sampling of every edge.
double sampled_wall_distance(const Vec2& p, const BoundaryMesh& m) {
  double best = 1e300;
  for (const auto& e : m.edges) {
    if (e.tag != BcTag::Wall) continue;
    const int n = std::max(2, static_cast<int>(e.length() / 0.002));
    for (int i = 0; i <= n; ++i) best = std::min(best, (e.point_at(double(i) / n) - p).norm());
  }
  return best;
}

}  // namespace

TEST_SUITE("vessel") {

TEST_CASE("murray diameter") {
  CHECK(murray_main_diameter(6.2, 6.2) == doctest::Approx(7.8114).epsilon(1e-4));
  CHECK(murray_main_diameter(8.0, 0.0) == 8.0);
  const auto b = VesselSpec::branch(7.0, 9.0, deg2rad(30), deg2rad(-60));
  CHECK(std::pow(b.d, 3) == doctest::Approx(343.0 + 729.0));
}

TEST_CASE("validation names the violated range") {
  CHECK_THROWS_AS(validate(VesselSpec::straight(4.5)), InvalidParameter);
  CHECK_THROWS_AS(validate(VesselSpec::straight(14.0)), InvalidParameter);
  CHECK_THROWS_AS(validate(VesselSpec::curve(8.0, deg2rad(80))), InvalidParameter);
  CHECK_THROWS_AS(validate(VesselSpec::branch(6.0, 13.5, deg2rad(40), deg2rad(-40))), InvalidParameter);
  CHECK_THROWS_AS(validate(VesselSpec::branch(6.0, 8.0, deg2rad(40), deg2rad(40))), InvalidParameter);
  auto bad = VesselSpec::branch(6.0, 8.0, deg2rad(40), deg2rad(-40));
  bad.d += 0.1;
  CHECK_THROWS_AS(validate(bad), InvalidParameter);
  try {
    validate(VesselSpec::curve(8.0, deg2rad(20)));
  } catch (const InvalidParameter& e) {
    CHECK(std::string(e.what()).find("bend") != std::string::npos);
  }
}

TEST_CASE("geometries are closed counterclockwise loops") {
  for (const auto& spec : {VesselSpec::straight(8.0), VesselSpec::curve(9.0, deg2rad(60)),
                           VesselSpec::branch(6.2, 6.2, deg2rad(50), deg2rad(-50)),
                           VesselSpec::branch(10.0, 6.0, deg2rad(25), deg2rad(-75))}) {
    const auto m = build_geometry(spec);
    REQUIRE(!m.edges.empty());
    for (std::size_t i = 0; i < m.edges.size(); ++i) {
      const auto& e = m.edges[i];
      const auto& next = m.edges[(i + 1) % m.edges.size()];
      CHECK((e.b - next.a).norm() < 1e-9);
      CHECK((e.point_at(0.0) - e.a).norm() < 1e-9);
      CHECK((e.point_at(1.0) - e.b).norm() < 1e-9);
    }
    CHECK(signed_area(m) > 0.0);
    CHECK(m.count(BcTag::Inlet) >= 1);
    CHECK(m.outlet_count() == (spec.variant == Variant::Branch ? 2u : 1u));
    CHECK(m.span_width(BcTag::Inlet, 0) == doctest::Approx(spec.d));
    CHECK(m.arms.size() == m.outlet_count() + 1);
  }
}

TEST_CASE("discretization respects h and keeps the perimeter") {
  const auto m = build_geometry(VesselSpec::branch(6.2, 6.2, deg2rad(50), deg2rad(-50)));
  const auto d = discretize(m, 0.25, 0.5);
  for (const auto& e : d.elements) CHECK(e.length() <= 0.5 + 1e-9);
  double edge_len = 0.0;
  for (const auto& e : m.edges) edge_len += e.length();
  double elem_len = 0.0;
  for (const auto& e : d.elements) elem_len += e.length();
  // chords are shorter than arcs, by O(h²/R)
  CHECK(elem_len <= edge_len + 1e-9);
  CHECK(elem_len == doctest::Approx(edge_len).epsilon(1e-3));
  CHECK(signed_area(d) > 0.0);
  for (const auto& e : d.elements) {
    // outward normal points to the right of the direction of travel
    CHECK(e.outward_normal.dot(perp(e.tangent())) == doctest::Approx(-1.0));
  }
}

TEST_CASE("wall gap matches a brute-force distance oracle") {
  std::mt19937_64 rng(11);
  for (const auto& spec : {VesselSpec::curve(8.0, deg2rad(70)), VesselSpec::branch(7.0, 9.0, deg2rad(35), deg2rad(-55))}) {
    const auto exact = build_geometry(spec);
    const auto fine = discretize(exact, 0.05);
    std::uniform_real_distribution<double> ux(-25.0, 20.0), uy(-20.0, 20.0);
    int checked = 0;
    while (checked < 10000) {
      const Vec2 p(ux(rng), uy(rng));
      if (!inside_domain(p, fine)) continue;
      const RobotState r{p, 0.0, 0.5};
      const double oracle = sampled_wall_distance(p, exact) - 0.5;
      CHECK(std::abs(wall_gap(r, fine) - oracle) < 3e-3);
      ++checked;
    }
  }
}

TEST_CASE("points outside the vessel are rejected") {
  const auto m = default_mesh(VesselSpec::straight(8.0));
  CHECK_FALSE(inside_domain(Vec2(0.0, 4.5), m));
  CHECK(inside_domain(Vec2(0.0, 3.5), m));
  CHECK_THROWS_AS(wall_gap(RobotState{Vec2(0.0, 5.0), 0.0, 1.0}, m), DomainError);
  const auto c = nearest_wall(RobotState{Vec2(1.0, 2.0), 0.0, 1.0}, m);
  CHECK(c.gap == doctest::Approx(1.0));
  CHECK((c.normal - Vec2(0, 1)).norm() < 1e-12);
}

TEST_CASE("arms and outlets") {
  const auto m = build_geometry(VesselSpec::branch(6.2, 6.2, deg2rad(50), deg2rad(-50)));
  const Vec2 inlet_pt(-20.0, 1.0);
  REQUIRE(arm_containing(inlet_pt, m).has_value());
  CHECK(*arm_containing(inlet_pt, m) == 0);
  CHECK_FALSE(arm_containing(Vec2(1.0, 0.0), m).has_value());  // junction
  const Vec2 up = m.arms[1].base + 20.0 * m.arms[1].axis;
  CHECK(arm_containing(up, m).value_or(-1) == 1);
  CHECK(nearest_arm(up, m) == 1);
  CHECK(distance_to_outlet(up, m, m.arms[1].outlet) < distance_to_outlet(up, m, m.arms[2].outlet));
  CHECK(m.arms[1].axis.y() > 0.0);
}

TEST_CASE("random corpus geometries all build") {
  for (std::uint64_t s = 0; s < 300; ++s) {
    for (auto label : {path::Label::Branch, path::Label::Curve}) {
      const auto spec = path::draw_scenario(label, s);
      CHECK_NOTHROW(build_geometry(spec.vessel));
    }
  }
}

}  // TEST_SUITE
