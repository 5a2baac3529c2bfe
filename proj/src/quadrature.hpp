#pragma once

// Layer-potential integrals of the 2D Stokes kernels over straight and
// circular-arc panels.
//
//   G_ij(x̂) = −δ_ij ln r + x̂_i x̂_j / r²
//   T_ijk(x̂) n_k = −4 x̂_i x̂_j (x̂·n) / r⁴
//
// with x̂ = x − x0 (x on the panel, x0 the target). Integrals use tiered
// Gauss–Legendre rules with dyadic subdivision near the target, and exact
// singularity subtraction when the target is the panel midpoint.

#include "stressnav/vessel.hpp"

#include <Eigen/Core>

#include <functional>

namespace stressnav::bie {

using Mat2 = Eigen::Matrix2d;

struct Panel {
  enum class Kind { Line, Arc } kind = Kind::Line;
  Vec2 a, b;                 // line endpoints
  Vec2 center;               // arc
  double radius = 0.0, a0 = 0.0, sweep = 0.0;

  static Panel line(const Vec2& a, const Vec2& b);
  static Panel arc(const Vec2& center, double radius, double a0, double sweep);

  double length() const;
  Vec2 point(double t) const;  // t ∈ [0,1]
  Vec2 midpoint() const { return point(0.5); }
  // First moment ∫ (x − c) dl about c.
  Vec2 moment(const Vec2& c) const;
};

// ∫_panel G(x − x0) dl. `self` means x0 is the panel midpoint.
Mat2 single_layer(const Panel& p, const Vec2& x0, bool self = false);

// ∫_panel T_ijk(x − x0) n_k dl for a straight panel with constant normal n
// (result is symmetric in i, j). Zero when x0 is collinear with the panel.
Mat2 double_layer(const Panel& p, const Vec2& x0, const Vec2& n);

// ∫_panel u_i(x) T_ijk(x − x0) n_k dl for a prescribed velocity u(x).
Vec2 double_layer_known(const Panel& p, const Vec2& x0, const Vec2& n,
                        const std::function<Vec2(const Vec2&)>& u);

// Cached 3-point Gauss nodes for well-separated targets (distance from the
// panel midpoint at least kFarRatio panel lengths).
constexpr double kFarRatio = 8.0;

struct FarRule {
  Vec2 x[3];
  double w[3];
  Vec2 mid;
  double len = 0.0;

  explicit FarRule(const Panel& p);
  bool applies(const Vec2& x0) const { return (x0 - mid).squaredNorm() >= kFarRatio * kFarRatio * len * len; }
  Mat2 single_layer(const Vec2& x0) const;
};

}  // namespace stressnav::bie
