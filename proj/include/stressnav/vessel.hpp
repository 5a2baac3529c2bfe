#pragma once

// Planar vessel geometry: straight, curved and Y-branched segments, their
// boundary discretization, and robot/wall clearance queries.
//
// Units: lengths in µm, angles in radians (degrees only at I/O boundaries).

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace stressnav {

using Vec2 = Eigen::Vector2d;

inline Vec2 perp(const Vec2& v) { return Vec2(-v.y(), v.x()); }
inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

constexpr double kPi = 3.14159265358979323846;
inline constexpr double deg2rad(double d) { return d * kPi / 180.0; }
inline constexpr double rad2deg(double r) { return r * 180.0 / kPi; }

struct FluidParams {
  double density = 1.0e3;     // kg/m³
  double viscosity = 1.0e-3;  // Pa·s

  double kinematic_viscosity() const { return viscosity / density; }  // m²/s
  void validate() const;
};

}  // namespace stressnav

namespace stressnav::vessel {

enum class Variant { Straight, Curve, Branch };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct VesselSpec {
  Variant variant = Variant::Straight;
  double d = 8.0;  // inlet diameter
  // Branch only.
  double d1 = 0.0, d2 = 0.0;
  double alpha1 = 0.0, alpha2 = 0.0;
  // Curve only; positive turns counterclockwise.
  double bend = 0.0;
  double arm_length = 30.0;
  std::optional<std::uint64_t> seed;

  bool operator==(const VesselSpec&) const = default;

  static VesselSpec straight(double d, double arm = 30.0);
  static VesselSpec curve(double d, double bend_rad, double arm = 30.0);
  // Main diameter from Murray's law.
  static VesselSpec branch(double d1, double d2, double alpha1_rad, double alpha2_rad,
                           double arm = 30.0);
};

// Construction knobs for details the vessel description leaves open.
struct GeometryOptions {
  double fillet_factor = 0.25;     // outer junction fillet radius = factor · d
  double curve_arc_factor = 3.0;   // centerline arc length = factor · d
  double end_zone = 4.0;           // µm next to each opening meshed at the coarse size
};

// Throws InvalidParameter naming the first violated constraint.
void validate(const VesselSpec& spec);

double murray_main_diameter(double d1, double d2);

enum class BcTag { Wall, Inlet, Outlet };

// A primitive boundary piece. Arcs run from angle `a0` through `sweep`
// (signed) around `center`.
struct Edge {
  enum class Kind { Line, Arc } kind = Kind::Line;
  Vec2 a, b;
  Vec2 center = Vec2::Zero();
  double radius = 0.0, a0 = 0.0, sweep = 0.0;
  BcTag tag = BcTag::Wall;
  int span = 0;      // inlet 0, outlet index for outlets, -1 for walls
  bool far = false;  // lies in an opening end zone

  double length() const;
  Vec2 point_at(double u) const;  // u ∈ [0,1]
};

struct Element {
  Vec2 a, b;
  BcTag tag = BcTag::Wall;
  int span = -1;
  Vec2 outward_normal;  // points out of the fluid
  int edge = -1;

  Vec2 midpoint() const { return 0.5 * (a + b); }
  double length() const { return (b - a).norm(); }
  Vec2 tangent() const { return (b - a).normalized(); }
};

// Straight section of a vessel in local coordinates. Station s runs along
// `axis` (the flow direction) from `base`; the straight walls cover
// s ∈ [s_min, s_max]. Transverse offset is measured along perp(axis).
struct Arm {
  Vec2 base;
  Vec2 axis;
  double diameter = 0.0;
  double s_min = 0.0, s_max = 0.0;
  bool is_inlet = false;
  int outlet = -1;
  Vec2 opening;  // centre of the inlet/outlet segment

  double station(const Vec2& p) const { return (p - base).dot(axis); }
  double offset(const Vec2& p) const { return (p - base).dot(perp(axis)); }
  bool contains_station(const Vec2& p, double margin = 0.0) const {
    const double s = station(p);
    return s >= s_min + margin && s <= s_max - margin;
  }
};

struct BoundaryMesh {
  VesselSpec spec;
  std::vector<Edge> edges;        // closed counterclockwise loop, fluid on the left
  std::vector<Element> elements;  // straight pieces following `edges`
  Vec2 inlet_axis;
  std::vector<Vec2> outlet_axes;
  std::vector<Arm> arms;  // arms[0] is the inlet arm, then one per outlet
  double h = 0.0;         // resolution of the last discretization (0 = coarse)

  std::size_t count(BcTag tag) const;
  double span_width(BcTag tag, int span) const;
  double perimeter() const;
  std::size_t outlet_count() const { return outlet_axes.size(); }
};

// Exact geometric construction; elements are a coarse polygonization.
BoundaryMesh build_geometry(const VesselSpec& spec, const GeometryOptions& opt = {});

// Splits every edge into equal pieces no longer than h (end-zone edges use
// h_far when it is given). Corner nodes are preserved.
BoundaryMesh discretize(const BoundaryMesh& mesh, double h, double h_far = 0.0);

// Default production resolution: r/4 near the transit corridor, r/2 at the ends.
BoundaryMesh default_mesh(const VesselSpec& spec, double robot_radius = 1.0,
                          const GeometryOptions& opt = {});

struct RobotState {
  Vec2 center = Vec2::Zero();
  double orientation = 0.0;  // angle of the robot's "front" marker
  double radius = 1.0;
};

bool inside_domain(const Vec2& p, const BoundaryMesh& mesh);

double distance_to_segment(const Vec2& p, const Vec2& a, const Vec2& b);

// Minimum over wall elements of (distance to centre − radius). Throws
// DomainError when the centre lies outside the fluid domain.
double wall_gap(const RobotState& robot, const BoundaryMesh& mesh);

// Closest wall point and its outward normal (for contact handling).
struct WallContact {
  double gap;
  Vec2 point;
  Vec2 normal;
};
WallContact nearest_wall(const RobotState& robot, const BoundaryMesh& mesh);

// Arm whose straight section contains p, if any.
std::optional<int> arm_containing(const Vec2& p, const BoundaryMesh& mesh);
// Arm whose straight section is nearest to p.
int nearest_arm(const Vec2& p, const BoundaryMesh& mesh);

double distance_to_outlet(const Vec2& p, const BoundaryMesh& mesh, int outlet);

}  // namespace stressnav::vessel
