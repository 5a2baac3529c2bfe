#include "stressnav/features.hpp"

#include "stressnav/error.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace stressnav::features {

namespace {

long lag_steps(const path::PathRecord& path, double lag) {
  const long k = std::lround(lag / path.sample_interval);
  if (k < 1 || std::abs(k * path.sample_interval - lag) > 1e-9) {
    std::ostringstream os;
    os << "sampling interval " << path.sample_interval << " ms does not divide the lag " << lag << " ms";
    throw InvalidParameter(os.str());
  }
  return k;
}

}  // namespace

std::vector<CorrelationPoint> path_correlation_series(const path::PathRecord& path, double dt_corr) {
  const long k = lag_steps(path, dt_corr);
  std::vector<CorrelationPoint> out;
  const auto& s = path.samples;
  for (std::size_t i = static_cast<std::size_t>(k); i < s.size(); ++i) {
    const auto m = max_correlation(s[i].pattern, s[i - k].pattern);
    out.push_back({i, s[i].t, m.c, m.dtheta});
  }
  return out;
}

std::optional<double> arm_relative_position(const vessel::RobotState& robot, const vessel::BoundaryMesh& mesh) {
  const auto arm = vessel::arm_containing(robot.center, mesh);
  if (!arm) return std::nullopt;
  const auto& a = mesh.arms[*arm];
  return relative_position(a.offset(robot.center), a.diameter, robot.radius);
}

SteadyTrack steady_position_tracker(const path::PathRecord& path, const vessel::BoundaryMesh& mesh,
                                    const SteadyOptions& opt) {
  const auto& s = path.samples;
  const std::size_t n = s.size();
  SteadyTrack tr;
  tr.rho_saved.assign(n, 0.0);
  tr.steady.assign(n, false);
  tr.arm.assign(n, -1);
  tr.rho.assign(n, std::numeric_limits<double>::quiet_NaN());
  if (n == 0) return tr;

  std::vector<long> lags;
  for (double l : opt.lags) lags.push_back(lag_steps(path, l));

  double saved = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto arm = vessel::arm_containing(s[i].robot.center, mesh);
    if (arm) {
      tr.arm[i] = *arm;
      const auto& a = mesh.arms[*arm];
      tr.rho[i] = relative_position(a.offset(s[i].robot.center), a.diameter, s[i].robot.radius);
    }
    bool steady = arm.has_value();
    for (long k : lags) {
      if (!steady) break;
      if (static_cast<long>(i) < k) continue;
      steady = max_correlation(s[i].pattern, s[i - k].pattern).c >= opt.threshold;
    }
    tr.steady[i] = steady;
    if (i == 0) {
      saved = arm ? tr.rho[i] : 0.0;
    } else if (steady) {
      saved = tr.rho[i];
    }
    tr.rho_saved[i] = saved;
  }
  return tr;
}

SteadyTrack steady_position_tracker(const path::PathRecord& path, const SteadyOptions& opt) {
  return steady_position_tracker(path, vessel::build_geometry(path.scenario.vessel), opt);
}

}  // namespace stressnav::features
