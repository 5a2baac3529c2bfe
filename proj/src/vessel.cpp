#include "stressnav/vessel.hpp"

#include "stressnav/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace stressnav {

void FluidParams::validate() const {
  if (!(density > 0.0) || !(viscosity > 0.0))
    throw InvalidParameter("fluid density and viscosity must be positive");
}

}  // namespace stressnav

namespace stressnav::vessel {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::Straight: return "straight";
    case Variant::Curve: return "curve";
    case Variant::Branch: return "branch";
  }
  return "?";
}

Variant variant_from_string(const std::string& s) {
  if (s == "straight") return Variant::Straight;
  if (s == "curve") return Variant::Curve;
  if (s == "branch") return Variant::Branch;
  throw FormatError("unknown vessel variant '" + s + "'");
}

double murray_main_diameter(double d1, double d2) {
  if (!(d1 > 0.0)) throw InvalidParameter("murray: d1 must be positive");
  if (!(d2 >= 0.0)) throw InvalidParameter("murray: d2 must be non-negative");
  if (d2 == 0.0) return d1;
  return std::cbrt(d1 * d1 * d1 + d2 * d2 * d2);
}

VesselSpec VesselSpec::straight(double d, double arm) {
  VesselSpec s;
  s.variant = Variant::Straight;
  s.d = d;
  s.arm_length = arm;
  return s;
}

VesselSpec VesselSpec::curve(double d, double bend_rad, double arm) {
  VesselSpec s;
  s.variant = Variant::Curve;
  s.d = d;
  s.bend = bend_rad;
  s.arm_length = arm;
  return s;
}

VesselSpec VesselSpec::branch(double d1, double d2, double a1, double a2, double arm) {
  VesselSpec s;
  s.variant = Variant::Branch;
  s.d1 = d1;
  s.d2 = d2;
  s.d = murray_main_diameter(d1, d2);
  s.alpha1 = a1;
  s.alpha2 = a2;
  s.arm_length = arm;
  return s;
}

namespace {

constexpr double kMinDiameter = 5.0;
constexpr double kMaxDiameter = 13.0;
constexpr double kAngleSlack = 1e-9;

void require_diameter(double v, const char* name) {
  if (!(v >= kMinDiameter && v <= kMaxDiameter)) {
    std::ostringstream os;
    os << name << " = " << v << " µm outside [5, 13] µm";
    throw InvalidParameter(os.str());
  }
}

void require_angle(double v, double lo_deg, double hi_deg, const char* name) {
  if (!(v >= deg2rad(lo_deg) - kAngleSlack && v <= deg2rad(hi_deg) + kAngleSlack)) {
    std::ostringstream os;
    os << name << " = " << rad2deg(v) << "° outside [" << lo_deg << "°, " << hi_deg << "°]";
    throw InvalidParameter(os.str());
  }
}

std::string describe(const VesselSpec& s) {
  std::ostringstream os;
  os << "variant=" << to_string(s.variant) << " d=" << s.d;
  if (s.variant == Variant::Branch)
    os << " d1=" << s.d1 << " d2=" << s.d2 << " alpha1=" << rad2deg(s.alpha1)
       << "deg alpha2=" << rad2deg(s.alpha2) << "deg";
  if (s.variant == Variant::Curve) os << " bend=" << rad2deg(s.bend) << "deg";
  return os.str();
}

}  // namespace

void validate(const VesselSpec& s) {
  if (!(s.arm_length > 0.0)) throw InvalidParameter("arm_length must be positive");
  require_diameter(s.d, "d");
  switch (s.variant) {
    case Variant::Straight: break;
    case Variant::Curve: require_angle(s.bend, 25.0, 75.0, "bend"); break;
    case Variant::Branch: {
      require_diameter(s.d1, "d1");
      require_diameter(s.d2, "d2");
      require_angle(s.alpha1, 25.0, 75.0, "alpha1");
      require_angle(s.alpha2, -75.0, -25.0, "alpha2");
      const double lhs = s.d * s.d * s.d;
      const double rhs = s.d1 * s.d1 * s.d1 + s.d2 * s.d2 * s.d2;
      if (std::abs(lhs - rhs) > 1e-12 * rhs)
        throw InvalidParameter("branch diameters violate Murray's law: " + describe(s));
      break;
    }
  }
}

double Edge::length() const {
  if (kind == Kind::Line) return (b - a).norm();
  return radius * std::abs(sweep);
}

Vec2 Edge::point_at(double u) const {
  if (u <= 0.0) return a;
  if (u >= 1.0) return b;
  if (kind == Kind::Line) return a + u * (b - a);
  const double ang = a0 + u * sweep;
  return center + radius * Vec2(std::cos(ang), std::sin(ang));
}

std::size_t BoundaryMesh::count(BcTag tag) const {
  return static_cast<std::size_t>(
      std::count_if(elements.begin(), elements.end(), [&](const Element& e) { return e.tag == tag; }));
}

double BoundaryMesh::span_width(BcTag tag, int span) const {
  double w = 0.0;
  for (const auto& e : elements)
    if (e.tag == tag && e.span == span) w += e.length();
  return w;
}

double BoundaryMesh::perimeter() const {
  double p = 0.0;
  for (const auto& e : edges) p += e.length();
  return p;
}

namespace {

struct Fillet {
  Vec2 t1, t2, center;
  double a0 = 0.0, sweep = 0.0, tangent_length = 0.0;
};

// Circular fillet of radius R joining a path arriving at corner p along e_in
// and leaving along e_out.
Fillet make_fillet(const Vec2& p, const Vec2& e_in, const Vec2& e_out, double R) {
  Fillet f;
  const double turn = std::atan2(cross(e_in, e_out), e_in.dot(e_out));
  f.tangent_length = R * std::tan(std::abs(turn) / 2.0);
  f.t1 = p - f.tangent_length * e_in;
  f.t2 = p + f.tangent_length * e_out;
  f.center = turn > 0.0 ? Vec2(f.t1 + R * perp(e_in)) : Vec2(f.t1 - R * perp(e_in));
  const Vec2 rel = f.t1 - f.center;
  f.a0 = std::atan2(rel.y(), rel.x());
  f.sweep = turn;
  return f;
}

class LoopBuilder {
public:
  explicit LoopBuilder(double end_zone) : end_zone_(end_zone) {}

  void opening(const Vec2& a, const Vec2& b, BcTag tag, int span) {
    Edge e;
    e.a = a;
    e.b = b;
    e.tag = tag;
    e.span = span;
    e.far = true;
    edges_.push_back(e);
  }

  // Wall line, split so that the part within end_zone of an opening is its own
  // (far) edge.
  void wall(const Vec2& a, const Vec2& b, bool opening_at_a, bool opening_at_b) {
    const double len = (b - a).norm();
    const Vec2 dir = (b - a) / len;
    double s0 = 0.0, s1 = len;
    if (opening_at_a && len > 2.0 * end_zone_) {
      s0 = end_zone_;
      push_line(a, a + s0 * dir, true);
    }
    Vec2 pb = b;
    if (opening_at_b && len > 2.0 * end_zone_) {
      s1 = len - end_zone_;
      pb = a + s1 * dir;
    }
    push_line(s0 == 0.0 ? a : Vec2(a + s0 * dir), pb, false);
    if (s1 != len) push_line(pb, b, true);
  }

  void arc(const Vec2& a, const Vec2& b, const Vec2& c, double r, double a0, double sweep) {
    Edge e;
    e.kind = Edge::Kind::Arc;
    e.a = a;
    e.b = b;
    e.center = c;
    e.radius = r;
    e.a0 = a0;
    e.sweep = sweep;
    e.tag = BcTag::Wall;
    e.span = -1;
    edges_.push_back(e);
  }

  void fillet(const Fillet& f) {
    if (f.tangent_length > 0.0) arc(f.t1, f.t2, f.center, (f.t1 - f.center).norm(), f.a0, f.sweep);
  }

  std::vector<Edge> take() { return std::move(edges_); }

private:
  void push_line(const Vec2& a, const Vec2& b, bool far) {
    Edge e;
    e.a = a;
    e.b = b;
    e.tag = BcTag::Wall;
    e.span = -1;
    e.far = far;
    edges_.push_back(e);
  }

  double end_zone_;
  std::vector<Edge> edges_;
};

std::vector<Vec2> polygonize(const std::vector<Edge>& edges, double max_angle) {
  std::vector<Vec2> pts;
  for (const auto& e : edges) {
    int n = 1;
    if (e.kind == Edge::Kind::Arc) n = std::max(1, static_cast<int>(std::ceil(std::abs(e.sweep) / max_angle)));
    for (int i = 0; i < n; ++i) pts.push_back(e.point_at(static_cast<double>(i) / n));
  }
  return pts;
}

bool segments_cross(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  const double d1 = cross(p2 - p1, q1 - p1);
  const double d2 = cross(p2 - p1, q2 - p1);
  const double d3 = cross(q2 - q1, p1 - q1);
  const double d4 = cross(q2 - q1, p2 - q1);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

void check_simple_loop(const std::vector<Edge>& edges, const VesselSpec& spec) {
  const auto pts = polygonize(edges, deg2rad(3.0));
  const std::size_t n = pts.size();
  double area = 0.0;
  for (std::size_t i = 0; i < n; ++i) area += cross(pts[i], pts[(i + 1) % n]);
  if (!(area > 0.0)) throw GeometryError("boundary is not counterclockwise: " + describe(spec));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (segments_cross(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]))
        throw GeometryError("self-intersecting geometry: " + describe(spec));
    }
}

std::vector<Element> elements_from_nodes(const std::vector<Edge>& edges, const std::vector<int>& pieces) {
  std::vector<Element> out;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const Edge& e = edges[k];
    const int n = pieces[k];
    Vec2 prev = e.a;
    for (int i = 1; i <= n; ++i) {
      const Vec2 next = (i == n) ? e.b : e.point_at(static_cast<double>(i) / n);
      Element el;
      el.a = prev;
      el.b = next;
      el.tag = e.tag;
      el.span = e.span;
      el.edge = static_cast<int>(k);
      const Vec2 t = (next - prev).normalized();
      el.outward_normal = Vec2(t.y(), -t.x());
      out.push_back(el);
      prev = next;
    }
  }
  return out;
}

std::vector<Element> coarse_elements(const std::vector<Edge>& edges) {
  std::vector<int> pieces;
  for (const auto& e : edges)
    pieces.push_back(e.kind == Edge::Kind::Arc
                         ? std::max(1, static_cast<int>(std::ceil(std::abs(e.sweep) / deg2rad(15.0))))
                         : 1);
  return elements_from_nodes(edges, pieces);
}

BoundaryMesh build_straight(const VesselSpec& s, const GeometryOptions& opt) {
  const double L = s.arm_length, h = s.d / 2.0;
  LoopBuilder lb(opt.end_zone);
  lb.opening({-L, h}, {-L, -h}, BcTag::Inlet, 0);
  lb.wall({-L, -h}, {L, -h}, true, true);
  lb.opening({L, -h}, {L, h}, BcTag::Outlet, 0);
  lb.wall({L, h}, {-L, h}, true, true);

  BoundaryMesh m;
  m.spec = s;
  m.edges = lb.take();
  m.inlet_axis = Vec2(1, 0);
  m.outlet_axes = {Vec2(1, 0)};
  Arm in{Vec2(-L, 0), Vec2(1, 0), s.d, 0.0, L, true, -1, Vec2(-L, 0)};
  Arm out{Vec2(-L, 0), Vec2(1, 0), s.d, L, 2.0 * L, false, 0, Vec2(L, 0)};
  m.arms = {in, out};
  return m;
}

BoundaryMesh build_curve(const VesselSpec& s, const GeometryOptions& opt) {
  const double L = s.arm_length, h = s.d / 2.0, b = s.bend;
  const double R = opt.curve_arc_factor * s.d / b;
  if (!(R - h > 0.0))
    throw GeometryError("curve inner wall radius is not positive: " + describe(s));
  const Vec2 C(0.0, R);
  const Vec2 u(std::cos(b), std::sin(b));
  const Vec2 E = C + R * Vec2(std::sin(b), -std::cos(b));
  const Vec2 O = E + L * u;

  LoopBuilder lb(opt.end_zone);
  lb.opening({-L, h}, {-L, -h}, BcTag::Inlet, 0);
  lb.wall({-L, -h}, {0.0, -h}, true, false);
  lb.arc({0.0, -h}, E - h * perp(u), C, R + h, -kPi / 2.0, b);
  lb.wall(E - h * perp(u), O - h * perp(u), false, true);
  lb.opening(O - h * perp(u), O + h * perp(u), BcTag::Outlet, 0);
  lb.wall(O + h * perp(u), E + h * perp(u), true, false);
  lb.arc(E + h * perp(u), {0.0, h}, C, R - h, -kPi / 2.0 + b, -b);
  lb.wall({0.0, h}, {-L, h}, false, true);

  BoundaryMesh m;
  m.spec = s;
  m.edges = lb.take();
  m.inlet_axis = Vec2(1, 0);
  m.outlet_axes = {u};
  Arm in{Vec2(-L, 0), Vec2(1, 0), s.d, 0.0, L, true, -1, Vec2(-L, 0)};
  Arm out{E, u, s.d, 0.0, L, false, 0, O};
  m.arms = {in, out};
  return m;
}

Vec2 line_intersection(const Vec2& p, const Vec2& u, const Vec2& q, const Vec2& v) {
  const double den = cross(u, v);
  const double t = cross(q - p, v) / den;
  return p + t * u;
}

BoundaryMesh build_branch(const VesselSpec& s, const GeometryOptions& opt) {
  const double L = s.arm_length, h = s.d / 2.0;
  const Vec2 u1(std::cos(s.alpha1), std::sin(s.alpha1));
  const Vec2 u2(std::cos(s.alpha2), std::sin(s.alpha2));
  const Vec2 n1 = perp(u1), n2 = perp(u2);
  const Vec2 Cu(0.0, h), Cl(0.0, -h);

  // Outer walls pass through the main-vessel corners; branch 1 keeps its outer
  // wall on its left, branch 2 on its right.
  const Vec2 P1 = Cu - 0.5 * s.d1 * n1;
  const Vec2 P2 = Cl + 0.5 * s.d2 * n2;
  const Vec2 apex = line_intersection(Cu - s.d1 * n1, u1, Cl + s.d2 * n2, u2);

  const double R = opt.fillet_factor * s.d;
  const Fillet lower = make_fillet(Cl, Vec2(1, 0), u2, R);
  const Fillet upper = make_fillet(Cu, -u1, Vec2(-1, 0), R);

  if (!(apex.x() > 0.0) || !(std::abs(apex.y()) < h))
    throw GeometryError("branch apex falls outside the junction: " + describe(s));

  const double s1_start = std::max((apex - P1).dot(u1), (upper.t1 - P1).dot(u1));
  const double s2_start = std::max((apex - P2).dot(u2), (lower.t2 - P2).dot(u2));
  const double s1_out = s1_start + L, s2_out = s2_start + L;
  const Vec2 O1 = P1 + s1_out * u1, O2 = P2 + s2_out * u2;
  const Vec2 O1outer = O1 + 0.5 * s.d1 * n1, O1inner = O1 - 0.5 * s.d1 * n1;
  const Vec2 O2outer = O2 - 0.5 * s.d2 * n2, O2inner = O2 + 0.5 * s.d2 * n2;

  const double inlet_straight = L - std::max(lower.tangent_length, upper.tangent_length);
  if (!(inlet_straight > 0.0)) throw GeometryError("fillet longer than the inlet arm: " + describe(s));

  LoopBuilder lb(opt.end_zone);
  lb.opening({-L, h}, {-L, -h}, BcTag::Inlet, 0);
  lb.wall({-L, -h}, lower.t1, true, false);
  lb.fillet(lower);
  lb.wall(lower.t2, O2outer, false, true);
  lb.opening(O2outer, O2inner, BcTag::Outlet, 1);
  lb.wall(O2inner, apex, true, false);
  lb.wall(apex, O1inner, false, true);
  lb.opening(O1inner, O1outer, BcTag::Outlet, 0);
  lb.wall(O1outer, upper.t1, true, false);
  lb.fillet(upper);
  lb.wall(upper.t2, {-L, h}, false, true);

  BoundaryMesh m;
  m.spec = s;
  m.edges = lb.take();
  m.inlet_axis = Vec2(1, 0);
  m.outlet_axes = {u1, u2};
  Arm in{Vec2(-L, 0), Vec2(1, 0), s.d, 0.0, inlet_straight, true, -1, Vec2(-L, 0)};
  Arm b1{P1, u1, s.d1, s1_start, s1_out, false, 0, O1};
  Arm b2{P2, u2, s.d2, s2_start, s2_out, false, 1, O2};
  m.arms = {in, b1, b2};
  return m;
}

}  // namespace

BoundaryMesh build_geometry(const VesselSpec& spec, const GeometryOptions& opt) {
  validate(spec);
  BoundaryMesh m;
  switch (spec.variant) {
    case Variant::Straight: m = build_straight(spec, opt); break;
    case Variant::Curve: m = build_curve(spec, opt); break;
    case Variant::Branch: m = build_branch(spec, opt); break;
  }
  check_simple_loop(m.edges, spec);
  m.elements = coarse_elements(m.edges);
  m.h = 0.0;
  return m;
}

BoundaryMesh discretize(const BoundaryMesh& mesh, double h, double h_far) {
  if (!(h > 0.0)) throw InvalidParameter("discretize: h must be positive");
  if (h_far <= 0.0) h_far = h;
  std::vector<int> pieces;
  pieces.reserve(mesh.edges.size());
  for (const auto& e : mesh.edges) {
    const double he = e.far ? h_far : h;
    const double len = e.length();
    if (he > len) {
      std::ostringstream os;
      os << "discretize: h = " << he << " µm exceeds the shortest geometric feature (" << len << " µm)";
      throw InvalidParameter(os.str());
    }
    pieces.push_back(std::max(1, static_cast<int>(std::ceil(len / he - 1e-9))));
  }
  BoundaryMesh out = mesh;
  out.elements = elements_from_nodes(mesh.edges, pieces);
  out.h = h;
  return out;
}

BoundaryMesh default_mesh(const VesselSpec& spec, double robot_radius, const GeometryOptions& opt) {
  return discretize(build_geometry(spec, opt), robot_radius / 4.0, robot_radius / 2.0);
}

bool inside_domain(const Vec2& p, const BoundaryMesh& mesh) {
  bool in = false;
  for (const auto& e : mesh.elements) {
    const Vec2& a = e.a;
    const Vec2& b = e.b;
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < x) in = !in;
    }
  }
  return in;
}

double distance_to_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

WallContact nearest_wall(const RobotState& robot, const BoundaryMesh& mesh) {
  if (!inside_domain(robot.center, mesh)) {
    std::ostringstream os;
    os << "robot centre (" << robot.center.x() << ", " << robot.center.y() << ") lies outside the vessel";
    throw DomainError(os.str());
  }
  WallContact best{std::numeric_limits<double>::infinity(), Vec2::Zero(), Vec2::Zero()};
  for (const auto& e : mesh.elements) {
    if (e.tag != BcTag::Wall) continue;
    const Vec2 ab = e.b - e.a;
    const double t = std::clamp((robot.center - e.a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    const Vec2 q = e.a + t * ab;
    const double dist = (robot.center - q).norm();
    if (dist - robot.radius < best.gap) {
      best.gap = dist - robot.radius;
      best.point = q;
      best.normal = (q - robot.center) / dist;
    }
  }
  return best;
}

double wall_gap(const RobotState& robot, const BoundaryMesh& mesh) { return nearest_wall(robot, mesh).gap; }

std::optional<int> arm_containing(const Vec2& p, const BoundaryMesh& mesh) {
  for (std::size_t k = 0; k < mesh.arms.size(); ++k) {
    const Arm& a = mesh.arms[k];
    if (a.contains_station(p) && std::abs(a.offset(p)) <= a.diameter / 2.0) return static_cast<int>(k);
  }
  return std::nullopt;
}

int nearest_arm(const Vec2& p, const BoundaryMesh& mesh) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < mesh.arms.size(); ++k) {
    const Arm& a = mesh.arms[k];
    const double s = std::clamp(a.station(p), a.s_min, a.s_max);
    const double dist = (p - (a.base + s * a.axis)).norm();
    if (dist < best_d) {
      best_d = dist;
      best = static_cast<int>(k);
    }
  }
  return best;
}

double distance_to_outlet(const Vec2& p, const BoundaryMesh& mesh, int outlet) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : mesh.edges)
    if (e.tag == BcTag::Outlet && e.span == outlet) best = std::min(best, distance_to_segment(p, e.a, e.b));
  return best;
}

}  // namespace stressnav::vessel
