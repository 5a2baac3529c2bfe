#pragma once

// Per-path feature series: correlation c(t, Δt), saved relative position.

#include "stressnav/path.hpp"
#include "stressnav/pattern.hpp"

#include <optional>
#include <vector>

namespace stressnav::features {

struct CorrelationPoint {
  std::size_t index = 0;  // sample index of time t
  double t = 0.0;         // ms
  double c = 0.0;
  double dtheta = 0.0;
};

// max_correlation(pattern(t), pattern(t − dt_corr)) for every t ≥ t0 + dt_corr.
// Throws InvalidParameter when the sampling interval does not divide dt_corr.
std::vector<CorrelationPoint> path_correlation_series(const path::PathRecord& path, double dt_corr);

struct SteadyOptions {
  std::vector<double> lags{5.0, 10.0, 20.0};  // ms
  double threshold = 0.999;
};

// Ground-truth relative position of a sample with respect to the straight arm
// containing it (nullopt inside a junction or bend).
std::optional<double> arm_relative_position(const vessel::RobotState& robot, const vessel::BoundaryMesh& mesh);

struct SteadyTrack {
  std::vector<double> rho_saved;
  std::vector<bool> steady;            // steadiness test held at the sample
  std::vector<int> arm;                // straight arm containing the centre, −1 otherwise
  std::vector<double> rho;             // instantaneous value, NaN outside arms
};

// ρ_saved starts at the path's first sample and is updated only while every
// available lag correlation is ≥ threshold and the robot is in a straight arm.
SteadyTrack steady_position_tracker(const path::PathRecord& path, const vessel::BoundaryMesh& mesh,
                                    const SteadyOptions& opt = {});
SteadyTrack steady_position_tracker(const path::PathRecord& path, const SteadyOptions& opt = {});

}  // namespace stressnav::features
