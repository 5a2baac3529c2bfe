#include "quadrature.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace stressnav::bie {

namespace {

struct Rule {
  std::vector<double> x, w;  // on [-1, 1]
};

Rule gauss_legendre(int n) {
  Rule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    r.x[i] = -z;
    r.w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return r;
}

const Rule& rule(int n) {
  static const std::array<Rule, 4> rules = {gauss_legendre(3), gauss_legendre(4), gauss_legendre(6),
                                            gauss_legendre(10)};
  switch (n) {
    case 3: return rules[0];
    case 4: return rules[1];
    case 6: return rules[2];
    default: return rules[3];
  }
}

constexpr double kSplitRatio = 1.1;
constexpr int kMaxDepth = 40;

// Adds ∫ f(x) dl over the parameter range [t0, t1] of the panel to `acc`.
template <class F, class T>
void integrate(const Panel& p, double t0, double t1, const Vec2& x0, const F& f, T& acc, int depth = 0) {
  const double len = p.length() * (t1 - t0);
  const double dist = (x0 - p.point(0.5 * (t0 + t1))).norm();
  const double ratio = dist / len;
  if (ratio < kSplitRatio && depth < kMaxDepth) {
    const double tm = 0.5 * (t0 + t1);
    integrate(p, t0, tm, x0, f, acc, depth + 1);
    integrate(p, tm, t1, x0, f, acc, depth + 1);
    return;
  }
  const int n = ratio < 2.0 ? 10 : ratio < 4.0 ? 6 : ratio < 8.0 ? 4 : 3;
  const Rule& q = rule(n);
  const double half = 0.5 * (t1 - t0);
  for (int i = 0; i < n; ++i) {
    const double t = t0 + half * (q.x[i] + 1.0);
    acc += (q.w[i] * 0.5 * len) * f(p.point(t));
  }
}

Mat2 stokeslet(const Vec2& xh) {
  const double r2 = xh.squaredNorm();
  Mat2 g = (xh * xh.transpose()) / r2;
  const double lr = 0.5 * std::log(r2);
  g(0, 0) -= lr;
  g(1, 1) -= lr;
  return g;
}

}  // namespace

Panel Panel::line(const Vec2& a, const Vec2& b) {
  Panel p;
  p.kind = Kind::Line;
  p.a = a;
  p.b = b;
  return p;
}

Panel Panel::arc(const Vec2& center, double radius, double a0, double sweep) {
  Panel p;
  p.kind = Kind::Arc;
  p.center = center;
  p.radius = radius;
  p.a0 = a0;
  p.sweep = sweep;
  p.a = p.point(0.0);
  p.b = p.point(1.0);
  return p;
}

double Panel::length() const {
  return kind == Kind::Line ? (b - a).norm() : radius * std::abs(sweep);
}

Vec2 Panel::point(double t) const {
  if (kind == Kind::Line) return a + t * (b - a);
  const double ang = a0 + t * sweep;
  return center + radius * Vec2(std::cos(ang), std::sin(ang));
}

Vec2 Panel::moment(const Vec2& c) const {
  if (kind == Kind::Line) return length() * (0.5 * (a + b) - c);
  // ∫ R(cos φ, sin φ) R dφ over the sweep, signed by traversal direction.
  const double s = sweep >= 0 ? 1.0 : -1.0;
  const double a1 = a0 + sweep;
  const Vec2 arm = radius * radius * s * Vec2(std::sin(a1) - std::sin(a0), std::cos(a0) - std::cos(a1));
  return arm + length() * (center - c);
}

FarRule::FarRule(const Panel& p) : mid(p.midpoint()), len(p.length()) {
  const Rule& q = rule(3);
  for (int i = 0; i < 3; ++i) {
    x[i] = p.point(0.5 * (q.x[i] + 1.0));
    w[i] = 0.5 * q.w[i] * len;
  }
}

Mat2 FarRule::single_layer(const Vec2& x0) const {
  double gxx = 0.0, gxy = 0.0, gyy = 0.0, lg = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double dx = x[i].x() - x0.x(), dy = x[i].y() - x0.y();
    const double r2 = dx * dx + dy * dy;
    const double s = w[i] / r2;
    gxx += s * dx * dx;
    gxy += s * dx * dy;
    gyy += s * dy * dy;
    lg += w[i] * std::log(r2);
  }
  Mat2 g;
  g << gxx - 0.5 * lg, gxy, gxy, gyy - 0.5 * lg;
  return g;
}

Mat2 single_layer(const Panel& p, const Vec2& x0, bool self) {
  Mat2 acc = Mat2::Zero();
  if (!self) {
    integrate(p, 0.0, 1.0, x0, [&](const Vec2& x) { return stokeslet(x - x0); }, acc);
    return acc;
  }
  const double L = p.length();
  const double a = 0.5 * L;
  if (p.kind == Panel::Kind::Line) {
    const Vec2 t = (p.b - p.a) / L;
    acc = (L * t) * t.transpose();
    const double lg = -2.0 * (a * std::log(a) - a);
    acc(0, 0) += lg;
    acc(1, 1) += lg;
    return acc;
  }
  // Arc: split at the midpoint; on each half subtract ln s analytically.
  const Rule& q = rule(10);
  double log_rem = 0.0;
  for (int half = 0; half < 2; ++half) {
    for (int i = 0; i < 10; ++i) {
      const double u = 0.5 * (q.x[i] + 1.0);  // fraction of the half, from x0 outward
      const double s = u * a;
      const double t = half == 0 ? 0.5 - 0.5 * u : 0.5 + 0.5 * u;
      const Vec2 xh = p.point(t) - x0;
      const double r = xh.norm();
      const double w = q.w[i] * 0.5 * a;
      log_rem += w * std::log(r / s);
      acc += (w / (r * r)) * (xh * xh.transpose());
    }
  }
  const double lg = -2.0 * (a * std::log(a) - a) - log_rem;
  acc(0, 0) += lg;
  acc(1, 1) += lg;
  return acc;
}

Mat2 double_layer(const Panel& p, const Vec2& x0, const Vec2& n) {
  Mat2 acc = Mat2::Zero();
  if (p.kind == Panel::Kind::Line) {
    const Vec2 ab = p.b - p.a;
    if (std::abs(cross(ab, x0 - p.a)) <= 1e-13 * ab.squaredNorm()) return acc;
  }
  integrate(
      p, 0.0, 1.0, x0,
      [&](const Vec2& x) -> Mat2 {
        const Vec2 xh = x - x0;
        const double r2 = xh.squaredNorm();
        return (-4.0 * xh.dot(n) / (r2 * r2)) * (xh * xh.transpose());
      },
      acc);
  return acc;
}

Vec2 double_layer_known(const Panel& p, const Vec2& x0, const Vec2& n,
                        const std::function<Vec2(const Vec2&)>& u) {
  Vec2 acc = Vec2::Zero();
  if (p.kind == Panel::Kind::Line) {
    const Vec2 ab = p.b - p.a;
    if (std::abs(cross(ab, x0 - p.a)) <= 1e-13 * ab.squaredNorm()) return acc;
  }
  integrate(
      p, 0.0, 1.0, x0,
      [&](const Vec2& x) -> Vec2 {
        const Vec2 xh = x - x0;
        const double r2 = xh.squaredNorm();
        return (-4.0 * xh.dot(n) * u(x).dot(xh) / (r2 * r2)) * xh;
      },
      acc);
  return acc;
}

}  // namespace stressnav::bie
