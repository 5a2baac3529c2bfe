#include "stressnav/pattern.hpp"

#include "stressnav/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stressnav::features {

namespace {

int re_index(int component, int k) { return 13 * component + (k == 0 ? 0 : 2 * k - 1); }

// Coefficients of the trigonometric polynomial h(Δθ) = Σ_k 2 Re(P_k e^{−ikΔθ})
// for cor(a(θ), b(θ + Δθ)).
struct CrossSpectrum {
  double p0 = 0.0;
  double re[kModes + 1] = {}, im[kModes + 1] = {};
  double scale = 0.0;  // 2π / (|a||b|)

  double value(double d) const {
    double h = p0;
    for (int k = 1; k <= kModes; ++k) h += 2.0 * (re[k] * std::cos(k * d) + im[k] * std::sin(k * d));
    return h * scale;
  }
  double d1(double d) const {
    double h = 0.0;
    for (int k = 1; k <= kModes; ++k) h += 2.0 * k * (im[k] * std::cos(k * d) - re[k] * std::sin(k * d));
    return h * scale;
  }
  double d2(double d) const {
    double h = 0.0;
    for (int k = 1; k <= kModes; ++k) h -= 2.0 * k * k * (re[k] * std::cos(k * d) + im[k] * std::sin(k * d));
    return h * scale;
  }
};

CrossSpectrum cross_spectrum(const StressPattern& a, const StressPattern& b) {
  const double na = a.norm(), nb = b.norm();
  if (!(na > 0.0) || !(nb > 0.0)) throw DomainError("correlation undefined for a zero-norm stress pattern");
  CrossSpectrum cs;
  for (int c = 0; c < 2; ++c) {
    cs.p0 += a.c[re_index(c, 0)] * b.c[re_index(c, 0)];
    for (int k = 1; k <= kModes; ++k) {
      const auto p = a.coefficient(c, k) * std::conj(b.coefficient(c, k));
      cs.re[k] += p.real();
      cs.im[k] += p.imag();
    }
  }
  cs.scale = 2.0 * kPi / (na * nb);
  return cs;
}

double wrap(double a) {
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

MaxCorrelation maximize(const CrossSpectrum& cs) {
  constexpr int kGrid = 360;
  const double step = 2.0 * kPi / kGrid;
  int best = 0;
  double best_v = cs.value(0.0);
  for (int j = 1; j < kGrid; ++j) {
    const double v = cs.value(j * step);
    if (v > best_v) {
      best_v = v;
      best = j;
    }
  }
  // Golden section on the bracketing grid cells.
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = (best - 1) * step, hi = (best + 1) * step;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = cs.value(x1), f2 = cs.value(x2);
  while (hi - lo > 1e-4) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = cs.value(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = cs.value(x1);
    }
  }
  double x = 0.5 * (lo + hi);
  double fx = cs.value(x);
  if (best_v > fx) {
    x = best * step;
    fx = best_v;
  }
  // Newton polish.
  for (int it = 0; it < 30; ++it) {
    const double h2 = cs.d2(x);
    if (!(h2 < 0.0)) break;
    const double dx = -cs.d1(x) / h2;
    if (std::abs(dx) > step) break;
    const double xn = x + dx;
    const double fn = cs.value(xn);
    if (fn < fx) break;
    x = xn;
    fx = fn;
    if (std::abs(dx) < 1e-15) break;
  }
  return {std::clamp(fx, -1.0, 1.0), wrap(x)};
}

}  // namespace

std::complex<double> StressPattern::coefficient(int component, int k) const {
  if (k == 0) return {c[re_index(component, 0)], 0.0};
  const int i = re_index(component, k);
  return {c[i], c[i + 1]};
}

void StressPattern::set_coefficient(int component, int k, std::complex<double> v) {
  const int i = re_index(component, k);
  c[i] = v.real();
  if (k > 0) c[i + 1] = v.imag();
}

Vec2 StressPattern::evaluate(double theta) const {
  Vec2 out;
  for (int comp = 0; comp < 2; ++comp) {
    double v = c[re_index(comp, 0)];
    for (int k = 1; k <= kModes; ++k) {
      const auto f = coefficient(comp, k);
      v += 2.0 * (f.real() * std::cos(k * theta) - f.imag() * std::sin(k * theta));
    }
    out[comp] = v;
  }
  return out;
}

double StressPattern::norm() const { return std::sqrt(inner(*this, *this)); }

StressPattern encode_samples(const std::vector<double>& normal, const std::vector<double>& tangential) {
  const std::size_t m = normal.size();
  if (m < 2 * kModes + 2 || tangential.size() != m) {
    std::ostringstream os;
    os << "stress encoding needs at least " << 2 * kModes + 2 << " sensors per component, got " << m;
    throw InvalidParameter(os.str());
  }
  StressPattern s;
  const std::vector<double>* comps[2] = {&normal, &tangential};
  for (int comp = 0; comp < 2; ++comp)
    for (int k = 0; k <= kModes; ++k) {
      double re = 0.0, im = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double a = 2.0 * kPi * static_cast<double>(k * static_cast<long>(i) % static_cast<long>(m)) / m;
        re += (*comps[comp])[i] * std::cos(a);
        im -= (*comps[comp])[i] * std::sin(a);
      }
      s.set_coefficient(comp, k, {re / m, im / m});
    }
  return s;
}

StressPattern encode_pattern(const stokes::TractionField& traction) {
  const std::size_t m = traction.size();
  if (traction.angles.size() != m) throw InvalidParameter("traction field angles and stresses differ in length");
  for (std::size_t i = 0; i < m; ++i)
    if (std::abs(traction.angles[i] - 2.0 * kPi * i / m) > 1e-9)
      throw InvalidParameter("stress encoding needs uniformly spaced sensors starting at the front marker");
  std::vector<double> sn(m), st(m);
  for (std::size_t i = 0; i < m; ++i) {
    sn[i] = traction.normal(i);
    st[i] = traction.tangential(i);
  }
  return encode_samples(sn, st);
}

StressPattern rotate(const StressPattern& s, double phi) {
  StressPattern r = s;
  for (int comp = 0; comp < 2; ++comp)
    for (int k = 1; k <= kModes; ++k) r.set_coefficient(comp, k, s.coefficient(comp, k) * std::polar(1.0, -k * phi));
  return r;
}

StressPattern scale(const StressPattern& s, double lambda) {
  StressPattern r = s;
  for (auto& v : r.c) v *= lambda;
  return r;
}

double inner(const StressPattern& f, const StressPattern& g) {
  double acc = 0.0;
  for (int comp = 0; comp < 2; ++comp) {
    acc += f.c[re_index(comp, 0)] * g.c[re_index(comp, 0)];
    for (int k = 1; k <= kModes; ++k) {
      const int i = re_index(comp, k);
      acc += 2.0 * (f.c[i] * g.c[i] + f.c[i + 1] * g.c[i + 1]);
    }
  }
  return 2.0 * kPi * acc;
}

double correlation(const StressPattern& f, const StressPattern& g) {
  const double nf = f.norm(), ng = g.norm();
  if (!(nf > 0.0) || !(ng > 0.0)) throw DomainError("correlation undefined for a zero-norm stress pattern");
  return std::clamp(inner(f, g) / (nf * ng), -1.0, 1.0);
}

MaxCorrelation max_correlation(const StressPattern& a, const StressPattern& b) {
  // Evaluated in a fixed argument order so that swapping a and b gives the
  // same c and the negated angle.
  if (std::lexicographical_compare(b.c.begin(), b.c.end(), a.c.begin(), a.c.end())) {
    MaxCorrelation m = maximize(cross_spectrum(b, a));
    m.dtheta = m.dtheta == kPi ? kPi : -m.dtheta;
    return m;
  }
  return maximize(cross_spectrum(a, b));
}

double lc_of(double c) {
  if (c >= 1.0 - kCorrelationFloor) return std::log(kCorrelationFloor);
  return std::log(1.0 - c);
}

double relative_position(double y_c, double d, double r) {
  if (!(d > 2.0 * r)) {
    std::ostringstream os;
    os << "relative position undefined: d = " << d << " µm does not exceed 2r = " << 2.0 * r << " µm";
    throw InvalidParameter(os.str());
  }
  const double rho = std::abs(y_c) / (d / 2.0 - r);
  if (rho > 1.0 + 1e-12) {
    std::ostringstream os;
    os << "relative position " << rho << " exceeds 1 (|y_c| = " << std::abs(y_c) << " µm)";
    throw DomainError(os.str());
  }
  return std::min(rho, 1.0);
}

std::array<double, kCoefficients> canonicalize(const StressPattern& s) {
  const auto f1 = s.coefficient(0, 1);
  const StressPattern r = std::abs(f1) > 0.0 ? rotate(s, std::arg(f1)) : s;
  double n = 0.0;
  for (double v : r.c) n += v * v;
  n = std::sqrt(n);
  if (!(n > 0.0)) throw DomainError("cannot canonicalize a zero stress pattern");
  std::array<double, kCoefficients> out;
  for (int i = 0; i < kCoefficients; ++i) out[i] = r.c[i] / n;
  out[re_index(0, 1) + 1] = 0.0;
  return out;
}

void jacobi_eigen(const std::vector<std::vector<double>>& a_in, std::vector<double>& values,
                  std::vector<std::vector<double>>& vectors) {
  const std::size_t n = a_in.size();
  auto a = a_in;
  std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0, diag = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      diag += a[p][p] * a[p][p];
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    }
    if (off <= 1e-30 * diag || off == 0.0) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a[i][i] > a[j][j]; });
  values.assign(n, 0.0);
  vectors.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    values[j] = a[order[j]][order[j]];
    for (std::size_t k = 0; k < n; ++k) vectors[k][j] = v[k][order[j]];
  }
}

PcaModel fit_pca(const std::vector<StressPattern>& patterns, const std::vector<bool>& is_branch) {
  const std::size_t n = patterns.size();
  if (n < 30) {
    std::ostringstream os;
    os << "PCA needs at least 30 training patterns, got " << n;
    throw InvalidParameter(os.str());
  }
  if (!is_branch.empty() && is_branch.size() != n) throw InvalidParameter("PCA labels and patterns differ in length");

  std::vector<std::array<double, kCoefficients>> x;
  x.reserve(n);
  for (const auto& p : patterns) x.push_back(canonicalize(p));

  PcaModel m;
  m.samples = n;
  for (const auto& xi : x)
    for (int j = 0; j < kCoefficients; ++j) m.mean[j] += xi[j];
  for (auto& v : m.mean) v /= static_cast<double>(n);

  std::vector<std::vector<double>> cov(kCoefficients, std::vector<double>(kCoefficients, 0.0));
  for (const auto& xi : x)
    for (int i = 0; i < kCoefficients; ++i) {
      const double di = xi[i] - m.mean[i];
      for (int j = 0; j < kCoefficients; ++j) cov[i][j] += di * (xi[j] - m.mean[j]);
    }
  double trace = 0.0;
  for (int i = 0; i < kCoefficients; ++i) {
    for (int j = 0; j < kCoefficients; ++j) cov[i][j] /= static_cast<double>(n - 1);
    trace += cov[i][i];
  }
  if (!(trace > 1e-24)) throw DomainError("degenerate covariance: all training patterns coincide");

  std::vector<double> values;
  std::vector<std::vector<double>> vectors;
  jacobi_eigen(cov, values, vectors);
  m.eigenvalue = values[0];
  int big = 0;
  for (int i = 0; i < kCoefficients; ++i) {
    m.pc1[i] = vectors[i][0];
    if (std::abs(m.pc1[i]) > std::abs(m.pc1[big])) big = i;
  }
  if (m.pc1[big] < 0.0)
    for (auto& v : m.pc1) v = -v;

  if (!is_branch.empty()) {
    double sb = 0.0, so = 0.0;
    std::size_t nb = 0, no = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = project(m, patterns[i]);
      if (is_branch[i]) {
        sb += p;
        ++nb;
      } else {
        so += p;
        ++no;
      }
    }
    if (nb > 0 && no > 0 && sb / nb < so / no) {
      for (auto& v : m.pc1) v = -v;
      m.sign_flipped = true;
    }
  }
  return m;
}

double project(const PcaModel& model, const StressPattern& s) {
  const auto x = canonicalize(s);
  double p = 0.0;
  for (int i = 0; i < kCoefficients; ++i) p += (x[i] - model.mean[i]) * model.pc1[i];
  return p;
}

}  // namespace stressnav::features
