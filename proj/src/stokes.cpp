#include "stressnav/stokes.hpp"

#include "quadrature.hpp"
#include "stressnav/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

namespace stressnav::stokes {

using bie::Mat2;
using bie::Panel;
using vessel::BcTag;

namespace {
constexpr double kInv4Pi = 1.0 / (4.0 * kPi);
}

Vec2 TractionField::outward_normal(std::size_t i) const {
  const double a = orientation + angles[i];
  return Vec2(std::cos(a), std::sin(a));
}

Vec2 TractionField::net_force() const {
  Vec2 f = Vec2::Zero();
  for (const auto& s : stress) f += s;
  return f * (2.0 * kPi * radius / static_cast<double>(stress.size()));
}

double TractionField::net_torque() const {
  double t = 0.0;
  for (std::size_t i = 0; i < stress.size(); ++i) t += cross(radius * outward_normal(i), stress[i]);
  return t * (2.0 * kPi * radius / static_cast<double>(stress.size()));
}

double TractionField::mean_magnitude() const {
  if (stress.empty()) return 0.0;
  double m = 0.0;
  for (const auto& s : stress) m += s.norm();
  return m / static_cast<double>(stress.size());
}

double max_surface_stress(const TractionField& traction) {
  double m = 0.0;
  for (const auto& s : traction.stress) m = std::max(m, s.norm());
  return m;
}

double inlet_profile(double y, double u_max, double d) {
  if (std::abs(y) > d / 2.0 * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "inlet_profile: |y| = " << std::abs(y) << " exceeds d/2 = " << d / 2.0;
    throw DomainError(os.str());
  }
  const double q = 2.0 * y / d;
  return u_max * (1.0 - q * q);
}

double FlowProblem::reynolds() const {
  return std::abs(u_max) * 1e-6 * mesh.spec.d * 1e-6 / fluid.kinematic_viscosity();
}

void FlowProblem::validate() const {
  fluid.validate();
  const double u = std::abs(u_max);
  if (!(u >= 200.0 && u <= 2000.0)) {
    std::ostringstream os;
    os << "|u_max| = " << u << " µm/s outside [200, 2000] µm/s";
    throw InvalidParameter(os.str());
  }
  if (!(reynolds() < 0.04)) throw InvalidParameter("Reynolds number must stay below 0.04");
  if (mesh.h <= 0.0) throw InvalidParameter("flow problem needs a discretized mesh");
}

SolverOptions options_for_resolution(double h, double robot_radius) {
  SolverOptions o;
  const int refine = std::max(1, static_cast<int>(std::lround(robot_radius / (4.0 * h))));
  o.robot_elements = o.sensors * refine;
  return o;
}

struct VesselFlowSolver::Impl {
  BoundaryMesh mesh;
  FluidParams fluid;
  double u_max;
  SolverOptions opt;

  std::vector<Panel> panels;
  std::vector<bie::FarRule> far;
  std::vector<Vec2> colloc;
  Vec2 inlet_center = Vec2::Zero();
  double inlet_width = 0.0;
  Eigen::Index nv = 0;

  Eigen::MatrixXd ainv_t;  // transposed inverse of the vessel-vessel block
  Eigen::VectorXd bv;    // vessel right-hand side
  Eigen::VectorXd xv0;   // background (robot-free) solution

  Vec2 inlet_velocity(const Vec2& x) const {
    const Vec2 ax = mesh.inlet_axis;
    const double y = (x - inlet_center).dot(perp(ax));
    const double q = 2.0 * y / inlet_width;
    return (u_max * std::max(0.0, 1.0 - q * q)) * ax;
  }

  // 2×2 block for vessel element e evaluated at target x0 (velocity equation).
  Mat2 vessel_block(std::size_t e, const Vec2& x0, bool self) const {
    const auto& el = mesh.elements[e];
    const Mat2 g = !self && far[e].applies(x0) ? far[e].single_layer(x0) : bie::single_layer(panels[e], x0, self);
    if (el.tag != BcTag::Outlet) return -kInv4Pi * g;
    Mat2 blk;
    const Vec2 nout = el.outward_normal;
    const Vec2 d = self ? Vec2::Zero() : Vec2(bie::double_layer(panels[e], x0, -nout) * nout);
    blk.col(0) = kInv4Pi * d;
    blk.col(1) = -kInv4Pi * (g * el.tangent());
    return blk;
  }

  // Known inlet double-layer contribution at x0.
  Vec2 known_inlet(const Vec2& x0) const {
    Vec2 acc = Vec2::Zero();
    for (std::size_t e = 0; e < panels.size(); ++e) {
      const auto& el = mesh.elements[e];
      if (el.tag != BcTag::Inlet) continue;
      acc += bie::double_layer_known(panels[e], x0, -el.outward_normal,
                                     [this](const Vec2& x) { return inlet_velocity(x); });
    }
    return kInv4Pi * acc;
  }

  std::vector<Panel> robot_panels(const RobotState& r) const {
    std::vector<Panel> out;
    const int n = opt.robot_elements;
    const double dphi = 2.0 * kPi / n;
    out.reserve(n);
    for (int j = 0; j < n; ++j)
      out.push_back(Panel::arc(r.center, r.radius, r.orientation + j * dphi - 0.5 * dphi, dphi));
    return out;
  }

  Vec2 field(const Eigen::VectorXd& xv, const std::vector<Panel>* rp, const Eigen::VectorXd* fr,
             const Vec2& p) const {
    Vec2 u = known_inlet(p);
    for (std::size_t e = 0; e < panels.size(); ++e)
      u += vessel_block(e, p, false) * xv.segment<2>(2 * static_cast<Eigen::Index>(e));
    if (rp)
      for (std::size_t j = 0; j < rp->size(); ++j)
        u -= kInv4Pi * (bie::single_layer((*rp)[j], p) * fr->segment<2>(2 * static_cast<Eigen::Index>(j)));
    return u;
  }
};

VesselFlowSolver::VesselFlowSolver(BoundaryMesh mesh, FluidParams fluid, double u_max, SolverOptions opt)
    : impl_(std::make_unique<Impl>()) {
  Impl& m = *impl_;
  if (mesh.h <= 0.0) throw InvalidParameter("VesselFlowSolver needs a discretized mesh");
  fluid.validate();
  if (opt.sensors < 14 || opt.robot_elements % opt.sensors != 0)
    throw InvalidParameter("robot element count must be a multiple of the sensor count (>= 14)");
  m.mesh = std::move(mesh);
  m.fluid = fluid;
  m.u_max = u_max;
  m.opt = opt;

  for (const auto& el : m.mesh.elements) {
    m.panels.push_back(Panel::line(el.a, el.b));
    m.far.emplace_back(m.panels.back());
    m.colloc.push_back(el.midpoint());
    if (el.tag == BcTag::Inlet) m.inlet_width += el.length();
  }
  {
    Vec2 acc = Vec2::Zero();
    for (const auto& el : m.mesh.elements)
      if (el.tag == BcTag::Inlet) acc += el.length() * el.midpoint();
    m.inlet_center = acc / m.inlet_width;
  }

  const auto ne = m.panels.size();
  m.nv = 2 * static_cast<Eigen::Index>(ne);
  Eigen::MatrixXd A(m.nv, m.nv);
  m.bv.resize(m.nv);
  for (std::size_t e = 0; e < ne; ++e) {
    const Vec2& x0 = m.colloc[e];
    const auto r = 2 * static_cast<Eigen::Index>(e);
    for (std::size_t k = 0; k < ne; ++k)
      A.block<2, 2>(r, 2 * static_cast<Eigen::Index>(k)) = m.vessel_block(k, x0, k == e);
    const auto& el = m.mesh.elements[e];
    Vec2 rhs = -m.known_inlet(x0);
    if (el.tag == BcTag::Outlet) A.block<2, 1>(r, r) -= 0.5 * el.outward_normal;
    if (el.tag == BcTag::Inlet) rhs += 0.5 * m.inlet_velocity(x0);
    m.bv.segment<2>(r) = rhs;
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  const double rc = lu.rcond();
  if (!(rc > m.opt.min_rcond)) {
    std::ostringstream os;
    os << "vessel system is ill-conditioned (rcond " << rc << ")";
    throw SolverError(os.str(), rc);
  }
  m.ainv_t = lu.inverse().transpose();
  m.xv0 = lu.solve(m.bv);
}

VesselFlowSolver::~VesselFlowSolver() = default;
VesselFlowSolver::VesselFlowSolver(VesselFlowSolver&&) noexcept = default;
VesselFlowSolver& VesselFlowSolver::operator=(VesselFlowSolver&&) noexcept = default;

const BoundaryMesh& VesselFlowSolver::mesh() const { return impl_->mesh; }
const FluidParams& VesselFlowSolver::fluid() const { return impl_->fluid; }
double VesselFlowSolver::u_max() const { return impl_->u_max; }
const SolverOptions& VesselFlowSolver::options() const { return impl_->opt; }

MobilitySolution VesselFlowSolver::solve(const RobotState& robot, bool with_field) const {
  const Impl& m = *impl_;
  const double gap = vessel::wall_gap(robot, m.mesh);
  if (gap < m.opt.min_gap_factor * robot.radius * (1.0 - 1e-9)) {
    std::ostringstream os;
    os << "robot-wall gap " << gap << " µm is below the resolvable minimum "
       << m.opt.min_gap_factor * robot.radius << " µm";
    throw SolverError(os.str(), 0.0);
  }

  const int nr = m.opt.robot_elements;
  const Eigen::Index nf = 2 * nr;
  const Eigen::Index ns = nf + 3;
  const auto rp = m.robot_panels(robot);
  const auto ne = m.panels.size();
  std::vector<bie::FarRule> rfar(rp.begin(), rp.end());

  Eigen::MatrixXd Avr_t(nf, m.nv);
  for (std::size_t e = 0; e < ne; ++e) {
    const Vec2& x0 = m.colloc[e];
    for (int j = 0; j < nr; ++j)
      Avr_t.block<2, 2>(2 * j, 2 * static_cast<Eigen::Index>(e)) =
          -kInv4Pi * (rfar[j].applies(x0) ? rfar[j].single_layer(x0) : bie::single_layer(rp[j], x0)).transpose();
  }

  Eigen::MatrixXd Arv(nf, m.nv);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(ns, ns);
  Eigen::VectorXd br = Eigen::VectorXd::Zero(ns);
  for (int j = 0; j < nr; ++j) {
    const Vec2 xj = rp[j].midpoint();
    for (std::size_t k = 0; k < ne; ++k)
      Arv.block<2, 2>(2 * j, 2 * static_cast<Eigen::Index>(k)) = m.vessel_block(k, xj, false);
    for (int k = 0; k < nr; ++k) B.block<2, 2>(2 * j, 2 * k) = -kInv4Pi * bie::single_layer(rp[k], xj, k == j);
    B.block<2, 2>(2 * j, nf) = -Mat2::Identity();
    B.block<2, 1>(2 * j, nf + 2) = -perp(xj - robot.center);
    br.segment<2>(2 * j) = -m.known_inlet(xj);
    // Force and torque balance.
    const double len = rp[j].length();
    const Vec2 mom = rp[j].moment(robot.center);
    B(nf, 2 * j) = len;
    B(nf + 1, 2 * j + 1) = len;
    B(nf + 2, 2 * j) = -mom.y();
    B(nf + 2, 2 * j + 1) = mom.x();
  }

  Eigen::MatrixXd Zt(nf, m.nv);
  Zt.noalias() = Avr_t * m.ainv_t;
  B.topLeftCorner(nf, nf).noalias() -= Arv * Zt.transpose();
  br.head(nf).noalias() -= Arv * m.xv0;

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
  const double rc = lu.rcond();
  if (!(rc > m.opt.min_rcond)) {
    std::ostringstream os;
    os << "mobility system is ill-conditioned (rcond " << rc << ")";
    throw SolverError(os.str(), rc);
  }
  const Eigen::VectorXd y = lu.solve(br);

  MobilitySolution sol;
  sol.robot = robot;
  sol.rcond = rc;
  sol.motion.velocity = y.segment<2>(nf);
  sol.motion.angular_velocity = y(nf + 2);
  sol.robot_traction = m.fluid.viscosity * y.head(nf);
  if (with_field) sol.vessel_unknowns = m.xv0 - Zt.transpose() * y.head(nf);

  const int stride = nr / m.opt.sensors;
  TractionField& tf = sol.traction;
  tf.orientation = robot.orientation;
  tf.radius = robot.radius;
  for (int i = 0; i < m.opt.sensors; ++i) {
    tf.angles.push_back(2.0 * kPi * i / m.opt.sensors);
    tf.stress.push_back(sol.robot_traction.segment<2>(2 * i * stride));
  }
  return sol;
}

Vec2 VesselFlowSolver::velocity_at(const MobilitySolution& sol, const Vec2& point) const {
  const Impl& m = *impl_;
  if (sol.vessel_unknowns.size() != m.nv)
    throw InvalidParameter("velocity_at needs a solution computed with the field retained");
  if (!vessel::inside_domain(point, m.mesh) || (point - sol.robot.center).norm() <= sol.robot.radius)
    throw DomainError("velocity_at: point lies outside the fluid");
  const auto rp = m.robot_panels(sol.robot);
  const Eigen::VectorXd fr = sol.robot_traction / m.fluid.viscosity;
  return m.field(sol.vessel_unknowns, &rp, &fr, point);
}

Vec2 VesselFlowSolver::background_velocity_at(const Vec2& point) const {
  const Impl& m = *impl_;
  if (!vessel::inside_domain(point, m.mesh)) throw DomainError("velocity_at: point lies outside the fluid");
  return m.field(m.xv0, nullptr, nullptr, point);
}

double VesselFlowSolver::inlet_flux() const { return 2.0 / 3.0 * impl_->u_max * impl_->inlet_width; }

double VesselFlowSolver::outlet_flux(const MobilitySolution* sol, int k) const {
  const Impl& m = *impl_;
  const Eigen::VectorXd& xv = sol ? sol->vessel_unknowns : m.xv0;
  if (xv.size() != m.nv) throw InvalidParameter("outlet_flux needs a solution computed with the field retained");
  double q = 0.0;
  for (std::size_t e = 0; e < m.panels.size(); ++e) {
    const auto& el = m.mesh.elements[e];
    if (el.tag == BcTag::Outlet && (k < 0 || el.span == k)) q += xv(2 * static_cast<Eigen::Index>(e)) * el.length();
  }
  return q;
}

std::pair<RigidMotion, TractionField> solve_mobility(const FlowProblem& problem, const SolverOptions& opt) {
  problem.validate();
  VesselFlowSolver solver(problem.mesh, problem.fluid, problem.u_max, opt);
  auto sol = solver.solve(problem.robot);
  return {sol.motion, std::move(sol.traction)};
}

Vec2 velocity_at(const FlowProblem& problem, const Vec2& point, const SolverOptions& opt) {
  problem.validate();
  VesselFlowSolver solver(problem.mesh, problem.fluid, problem.u_max, opt);
  const auto sol = solver.solve(problem.robot, true);
  return solver.velocity_at(sol, point);
}

std::vector<std::array<double, 5>> velocity_grid(const VesselFlowSolver& solver, const MobilitySolution& sol,
                                                 const GridSpec& grid, bool relative) {
  std::vector<std::array<double, 5>> rows;
  for (int iy = 0; iy < grid.ny; ++iy)
    for (int ix = 0; ix < grid.nx; ++ix) {
      const double fx = grid.nx > 1 ? static_cast<double>(ix) / (grid.nx - 1) : 0.5;
      const double fy = grid.ny > 1 ? static_cast<double>(iy) / (grid.ny - 1) : 0.5;
      const Vec2 p(grid.lo.x() + fx * (grid.hi.x() - grid.lo.x()), grid.lo.y() + fy * (grid.hi.y() - grid.lo.y()));
      if (!vessel::inside_domain(p, solver.mesh()) || (p - sol.robot.center).norm() <= sol.robot.radius) continue;
      if (vessel::wall_gap(RobotState{p, 0.0, 0.0}, solver.mesh()) < 1e-3) continue;
      Vec2 u = solver.velocity_at(sol, p);
      if (relative) u -= sol.motion.velocity;
      rows.push_back({p.x(), p.y(), u.x(), u.y(), u.norm()});
    }
  return rows;
}

}  // namespace stressnav::stokes
