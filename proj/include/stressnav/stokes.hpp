#pragma once

// Quasi-static 2D Stokes flow through a vessel carrying a free rigid robot.
//
// The flow is represented by the direct boundary-integral formulation
// (single-layer over unknown tractions, double-layer over the inlet/outlet
// velocities) with piecewise-constant collocation. Walls are no-slip, the
// inlet carries a parabolic profile, and each outlet has zero normal traction
// and zero tangential velocity. The robot's rigid velocity (v, ω) is solved
// together with force- and torque-balance rows.
//
// Everything vessel-only is factored once per (mesh, u_max) by VesselFlowSolver;
// each robot pose then needs a Schur-complement solve of size 2·N_robot + 3.

#include "stressnav/vessel.hpp"

#include <Eigen/Core>

#include <array>
#include <memory>
#include <utility>
#include <vector>

namespace stressnav::stokes {

using vessel::BoundaryMesh;
using vessel::RobotState;

struct RigidMotion {
  Vec2 velocity = Vec2::Zero();    // µm/s
  double angular_velocity = 0.0;   // rad/s, counterclockwise positive

  Vec2 at(const Vec2& center, const Vec2& x) const {
    return velocity + angular_velocity * perp(x - center);
  }
};

// Stresses at M uniformly spaced sensors. `angles` are in the robot frame
// (measured from the front marker); `stress` holds lab-frame vectors in Pa,
// the force per area exerted by the fluid on the robot.
struct TractionField {
  std::vector<double> angles;
  std::vector<Vec2> stress;
  double orientation = 0.0;
  double radius = 1.0;

  std::size_t size() const { return stress.size(); }
  Vec2 outward_normal(std::size_t i) const;
  double normal(std::size_t i) const { return stress[i].dot(outward_normal(i)); }
  double tangential(std::size_t i) const { return stress[i].dot(perp(outward_normal(i))); }
  // Trapezoid sums over the sensors.
  Vec2 net_force() const;
  double net_torque() const;
  double mean_magnitude() const;
};

double max_surface_stress(const TractionField& traction);

// u_max·(1 − (2y/d)²); throws DomainError when |y| > d/2.
double inlet_profile(double y, double u_max, double d);

struct FlowProblem {
  BoundaryMesh mesh;  // discretized
  RobotState robot;
  FluidParams fluid;
  double u_max = 1000.0;  // µm/s, sign selects flow direction

  // Reynolds number u_max·d/ν in SI units.
  double reynolds() const;
  void validate() const;
};

struct SolverOptions {
  int robot_elements = 36;     // multiple of `sensors`
  int sensors = 36;
  double min_gap_factor = 0.05;  // poses with gap < factor·r are refused
  double min_rcond = 1e-13;
};

// Scaling of the robot-element count under mesh refinement relative to the
// default r/4 wall resolution.
SolverOptions options_for_resolution(double h, double robot_radius = 1.0);

struct MobilitySolution {
  RobotState robot;
  RigidMotion motion;
  TractionField traction;
  Eigen::VectorXd robot_traction;  // per robot element (x, y), Pa
  Eigen::VectorXd vessel_unknowns; // unit-viscosity solver unknowns, filled on request
  double rcond = 0.0;
};

class VesselFlowSolver {
public:
  VesselFlowSolver(BoundaryMesh mesh, FluidParams fluid, double u_max, SolverOptions opt = {});
  ~VesselFlowSolver();
  VesselFlowSolver(VesselFlowSolver&&) noexcept;
  VesselFlowSolver& operator=(VesselFlowSolver&&) noexcept;

  // Throws SolverError for poses below the minimum gap or ill-conditioned
  // systems. With `with_field`, the vessel tractions/outlet velocities are
  // kept so the velocity field can be evaluated.
  MobilitySolution solve(const RobotState& robot, bool with_field = false) const;

  // Fluid velocity at a point strictly inside the fluid.
  Vec2 velocity_at(const MobilitySolution& sol, const Vec2& point) const;
  // Flow through the same vessel without a robot.
  Vec2 background_velocity_at(const Vec2& point) const;

  double inlet_flux() const;
  // Total flux through outlet `k` (all outlets when k < 0); background flow
  // when `sol` is null.
  double outlet_flux(const MobilitySolution* sol, int k = -1) const;

  const BoundaryMesh& mesh() const;
  const FluidParams& fluid() const;
  double u_max() const;
  const SolverOptions& options() const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::pair<RigidMotion, TractionField> solve_mobility(const FlowProblem& problem,
                                                     const SolverOptions& opt = {});

// Solves the problem and evaluates the fluid velocity at `point` (lab frame).
Vec2 velocity_at(const FlowProblem& problem, const Vec2& point, const SolverOptions& opt = {});

// Regular-grid velocity dump: rows of (x, y, ux, uy, speed); points outside
// the fluid are skipped. `relative` subtracts the robot's rigid velocity.
struct GridSpec {
  Vec2 lo, hi;
  int nx = 40, ny = 20;
};
std::vector<std::array<double, 5>> velocity_grid(const VesselFlowSolver& solver, const MobilitySolution& sol,
                                                 const GridSpec& grid, bool relative);

}  // namespace stressnav::stokes
