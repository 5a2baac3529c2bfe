#pragma once

// Surface-stress patterns in the robot frame, their low-mode Fourier
// encoding, rotation-maximized correlation, and the PC1 summary.
//
// Coefficient layout (26 reals): for component c ∈ {normal, tangential},
// index 13c holds the real mode-0 coefficient and 13c + 2k − 1, 13c + 2k the
// real and imaginary parts of mode k = 1..6, with
//   s_c(θ) = F_0 + Σ_k 2 Re(F_k e^{ikθ}),  F_k = (1/M) Σ_i s_c(θ_i) e^{−ikθ_i}.

#include "stressnav/stokes.hpp"

#include <array>
#include <complex>
#include <vector>

namespace stressnav::features {

constexpr int kModes = 6;
constexpr int kCoefficients = 2 * (2 * kModes + 1);

struct StressPattern {
  std::array<double, kCoefficients> c{};

  std::complex<double> coefficient(int component, int k) const;
  void set_coefficient(int component, int k, std::complex<double> v);
  // (normal, tangential) stress at robot-frame angle θ.
  Vec2 evaluate(double theta) const;
  // sqrt(∫₀^{2π} |s|² dθ)
  double norm() const;

  bool operator==(const StressPattern&) const = default;
};

// Normal/tangential samples at θ_i = 2πi/M.
StressPattern encode_samples(const std::vector<double>& normal, const std::vector<double>& tangential);
// Throws InvalidParameter for fewer than 14 sensors or non-uniform angles.
StressPattern encode_pattern(const stokes::TractionField& traction);

// s'(θ) = s(θ − φ).
StressPattern rotate(const StressPattern& s, double phi);
StressPattern scale(const StressPattern& s, double lambda);

// ∫₀^{2π} f·g dθ
double inner(const StressPattern& f, const StressPattern& g);
// Throws DomainError for a zero-norm argument.
double correlation(const StressPattern& f, const StressPattern& g);

struct MaxCorrelation {
  double c = 0.0;
  double dtheta = 0.0;  // in (−π, π]
};
// max over Δθ of cor(a(θ), b(θ + Δθ)).
MaxCorrelation max_correlation(const StressPattern& a, const StressPattern& b);

// log(1 − c) with the floor log(1e-12) for c ≥ 1 − 1e-12.
double lc_of(double c);
constexpr double kCorrelationFloor = 1e-12;

// |y_c| / (d/2 − r); throws InvalidParameter when d ≤ 2r and DomainError
// when the result exceeds 1.
double relative_position(double y_c, double d, double r);

// Rotated so the mode-1 normal coefficient is real and non-negative, then
// scaled to unit Euclidean norm.
std::array<double, kCoefficients> canonicalize(const StressPattern& s);

struct PcaModel {
  std::array<double, kCoefficients> mean{};
  std::array<double, kCoefficients> pc1{};
  bool sign_flipped = false;  // pc1 negated to put branches on the positive side
  double eigenvalue = 0.0;
  std::size_t samples = 0;
};

// Symmetric eigen-decomposition by cyclic Jacobi rotations; eigenvalues
// descending, eigenvectors as columns.
void jacobi_eigen(const std::vector<std::vector<double>>& a, std::vector<double>& values,
                  std::vector<std::vector<double>>& vectors);

// `is_branch` (optional, same length) fixes the sign so mean p1 over branch
// patterns is ≥ mean over the others.
PcaModel fit_pca(const std::vector<StressPattern>& patterns, const std::vector<bool>& is_branch = {});
double project(const PcaModel& model, const StressPattern& s);

}  // namespace stressnav::features
