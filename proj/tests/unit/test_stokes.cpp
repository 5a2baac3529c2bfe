#include "doctest.h"

#include "stressnav/error.hpp"
#include "stressnav/stokes.hpp"

#include <cmath>
#include <random>

using namespace stressnav;
using namespace stressnav::stokes;

namespace {

const VesselFlowSolver& straight_solver() {
  static const VesselFlowSolver s(vessel::default_mesh(vessel::VesselSpec::straight(8.0)), FluidParams{}, 1000.0);
  return s;
}

}  // namespace

TEST_SUITE("stokes") {

TEST_CASE("inlet profile") {
  CHECK(inlet_profile(0.0, 1000.0, 8.0) == 1000.0);
  CHECK(inlet_profile(2.0, 1000.0, 8.0) == doctest::Approx(750.0));
  CHECK(inlet_profile(4.0, 1000.0, 8.0) == doctest::Approx(0.0));
  CHECK_THROWS_AS(inlet_profile(4.1, 1000.0, 8.0), DomainError);
}

TEST_CASE("background flow is Poiseuille in a straight channel") {
  const auto& s = straight_solver();
  for (double x : {-10.0, 0.0, 10.0})
    for (double y : {-3.0, -1.5, 0.0, 2.0, 3.5}) {
      const Vec2 u = s.background_velocity_at(Vec2(x, y));
      CHECK(u.x() == doctest::Approx(inlet_profile(y, 1000.0, 8.0)).epsilon(0.01));
      CHECK(std::abs(u.y()) < 10.0);
    }
  CHECK(s.outlet_flux(nullptr) == doctest::Approx(s.inlet_flux()).epsilon(0.01));
  CHECK(s.inlet_flux() == doctest::Approx(2.0 / 3.0 * 1000.0 * 8.0));
}

TEST_CASE("no-slip limit near a wall") {
  const auto& s = straight_solver();
  CHECK(s.background_velocity_at(Vec2(0.0, 4.0 - 1e-2)).norm() < 0.05 * 1000.0);
}

TEST_CASE("centred robot does not rotate or drift") {
  const auto& s = straight_solver();
  const auto sol = s.solve(vessel::RobotState{Vec2(0.0, 0.0), 0.3, 1.0});
  const double v = sol.motion.velocity.norm();
  CHECK(v > 500.0);
  CHECK(std::abs(sol.motion.velocity.y()) < 1e-3 * v);
  CHECK(std::abs(sol.motion.angular_velocity) < 1e-3 * v / 1.0);
}

TEST_CASE("robot below the centreline rotates clockwise") {
  const auto sol = straight_solver().solve(vessel::RobotState{Vec2(0.0, -1.5), 0.0, 1.0});
  CHECK(sol.motion.angular_velocity < 0.0);
  const auto up = straight_solver().solve(vessel::RobotState{Vec2(0.0, 1.5), 0.0, 1.0});
  CHECK(up.motion.angular_velocity == doctest::Approx(-sol.motion.angular_velocity).epsilon(1e-6));
}

TEST_CASE("linearity in u_max and viscosity") {
  const auto mesh = vessel::default_mesh(vessel::VesselSpec::curve(8.0, deg2rad(40)));
  const vessel::RobotState r{Vec2(2.0, 1.0), 0.7, 1.0};
  const VesselFlowSolver a(mesh, FluidParams{}, 900.0);
  const VesselFlowSolver b(mesh, FluidParams{}, 1800.0);
  const VesselFlowSolver c(mesh, FluidParams{}, -900.0);
  FluidParams thick;
  thick.viscosity *= 10.0;
  const VesselFlowSolver d(mesh, thick, 900.0);
  const auto sa = a.solve(r), sb = b.solve(r), sc = c.solve(r), sd = d.solve(r);
  const double vs = sa.motion.velocity.norm();
  CHECK((sb.motion.velocity - 2.0 * sa.motion.velocity).norm() < 1e-10 * vs);
  CHECK(sb.motion.angular_velocity == doctest::Approx(2.0 * sa.motion.angular_velocity).epsilon(1e-10));
  CHECK((sc.motion.velocity + sa.motion.velocity).norm() < 1e-10 * vs);
  CHECK(sc.motion.angular_velocity == doctest::Approx(-sa.motion.angular_velocity).epsilon(1e-10));
  for (std::size_t i = 0; i < sa.traction.stress.size(); ++i) {
    CHECK((sb.traction.stress[i] - 2.0 * sa.traction.stress[i]).norm() < 1e-10 * max_surface_stress(sa.traction));
    CHECK((sd.traction.stress[i] - 10.0 * sa.traction.stress[i]).norm() < 1e-10 * max_surface_stress(sd.traction));
  }
  CHECK((sd.motion.velocity - sa.motion.velocity).norm() < 1e-10 * vs);
  CHECK(max_surface_stress(sd.traction) == doctest::Approx(10.0 * max_surface_stress(sa.traction)).epsilon(1e-10));
}

TEST_CASE("traction field accessors") {
  TractionField z;
  CHECK(max_surface_stress(z) == 0.0);
  z.angles = {0.0, kPi / 2};
  z.stress = {Vec2::Zero(), Vec2::Zero()};
  z.radius = 1.0;
  CHECK(max_surface_stress(z) == 0.0);
  const auto sol = straight_solver().solve(vessel::RobotState{Vec2(-3.0, 0.8), 1.1, 1.0});
  const auto& t = sol.traction;
  REQUIRE(t.angles.size() == 36);
  for (std::size_t i = 0; i < t.angles.size(); ++i) {
    CHECK(t.outward_normal(i).norm() == doctest::Approx(1.0));
    const Vec2 rebuilt = t.normal(i) * t.outward_normal(i) + t.tangential(i) * perp(t.outward_normal(i));
    CHECK((rebuilt - t.stress[i]).norm() < 1e-12);
  }
}

TEST_CASE("force and torque balance on the robot") {
  const auto sol = straight_solver().solve(vessel::RobotState{Vec2(5.0, -1.2), 0.0, 1.0});
  const double scale = sol.traction.mean_magnitude();
  CHECK(sol.traction.net_force().norm() < 1e-3 * scale * 2.0 * kPi);
  CHECK(std::abs(sol.traction.net_torque()) < 1e-3 * scale * 2.0 * kPi);
}

TEST_CASE("fluid velocity matches the robot surface and the walls") {
  const auto& s = straight_solver();
  const vessel::RobotState r{Vec2(0.0, 0.5), 0.0, 1.0};
  const auto sol = s.solve(r, true);
  for (double a : {0.3, 1.9, 3.5, 5.0}) {
    const Vec2 dir(std::cos(a), std::sin(a));
    const Vec2 p = r.center + 1.05 * dir;
    const Vec2 rigid = sol.motion.velocity + sol.motion.angular_velocity * perp(p - r.center);
    CHECK((s.velocity_at(sol, p) - rigid).norm() < 0.05 * sol.motion.velocity.norm());
  }
  CHECK(s.velocity_at(sol, Vec2(10.0, 4.0 - 1e-2)).norm() < 0.05 * 1000.0);
  CHECK_THROWS_AS(s.velocity_at(sol, Vec2(0.0, 9.0)), DomainError);
}

TEST_CASE("poses below the minimum gap are refused") {
  try {
    straight_solver().solve(vessel::RobotState{Vec2(0.0, 2.97), 0.0, 1.0});
    FAIL("expected a solver error");
  } catch (const SolverError& e) {
    CHECK(std::string(e.what()).find("gap") != std::string::npos);
  }
}

TEST_CASE("flow problem validation") {
  FlowProblem p;
  p.mesh = vessel::default_mesh(vessel::VesselSpec::straight(8.0));
  p.u_max = 1000.0;
  CHECK(p.reynolds() == doctest::Approx(1e-3 * 8e-6 / 1e-6));
  CHECK_NOTHROW(p.validate());
  p.u_max = 5000.0;
  CHECK_THROWS_AS(p.validate(), InvalidParameter);
}

TEST_CASE("free-function entry points agree with the solver") {
  FlowProblem p;
  p.mesh = vessel::default_mesh(vessel::VesselSpec::straight(8.0));
  p.robot = vessel::RobotState{Vec2(1.0, -0.5), 0.0, 1.0};
  const auto [motion, traction] = solve_mobility(p);
  const auto direct = straight_solver().solve(p.robot);
  CHECK((motion.velocity - direct.motion.velocity).norm() < 1e-9 * motion.velocity.norm());
  CHECK(traction.stress.size() == direct.traction.stress.size());
  const Vec2 far = velocity_at(p, Vec2(-20.0, 0.0));
  CHECK(far.x() == doctest::Approx(1000.0).epsilon(0.02));
}

TEST_CASE("resolution options scale the robot elements") {
  CHECK(options_for_resolution(0.25).robot_elements == 36);
  CHECK(options_for_resolution(0.125).robot_elements == 72);
  CHECK(options_for_resolution(0.125).sensors == 36);
}

}  // TEST_SUITE
