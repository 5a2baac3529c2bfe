#include "stressnav/path.hpp"

#include "stressnav/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace stressnav::path {

using vessel::RobotState;

std::string to_string(Direction d) { return d == Direction::Forward ? "forward" : "reverse"; }

std::string to_string(Label l) {
  switch (l) {
    case Label::Branch: return "branch";
    case Label::Curve: return "curve";
    default: return "straight";
  }
}

std::string to_string(TerminalReason r) {
  switch (r) {
    case TerminalReason::ReachedOutlet: return "reached-outlet";
    case TerminalReason::StepLimit: return "step-limit";
    default: return "solver-failure";
  }
}

Direction direction_from_string(const std::string& s) {
  if (s == "forward") return Direction::Forward;
  if (s == "reverse") return Direction::Reverse;
  throw FormatError("unknown path direction '" + s + "'");
}

Label label_from_string(const std::string& s) {
  if (s == "branch") return Label::Branch;
  if (s == "curve") return Label::Curve;
  if (s == "straight") return Label::Straight;
  throw FormatError("unknown path label '" + s + "'");
}

TerminalReason terminal_reason_from_string(const std::string& s) {
  if (s == "reached-outlet") return TerminalReason::ReachedOutlet;
  if (s == "step-limit") return TerminalReason::StepLimit;
  if (s == "solver-failure") return TerminalReason::SolverFailure;
  throw FormatError("unknown terminal reason '" + s + "'");
}

Label ScenarioSpec::label() const {
  switch (vessel.variant) {
    case vessel::Variant::Branch: return Label::Branch;
    case vessel::Variant::Curve: return Label::Curve;
    default: return Label::Straight;
  }
}

std::vector<double> PathRecord::cumulative_length() const {
  std::vector<double> s(samples.size(), 0.0);
  for (std::size_t i = 1; i < samples.size(); ++i)
    s[i] = s[i - 1] + (samples[i].robot.center - samples[i - 1].robot.center).norm();
  return s;
}

double PathRecord::path_length() const {
  const auto s = cumulative_length();
  return s.empty() ? 0.0 : s.back();
}

vessel::BoundaryMesh scenario_mesh(const ScenarioSpec& spec, const SimulationOptions& opt) {
  return vessel::discretize(vessel::build_geometry(spec.vessel, opt.geometry), opt.h, opt.h_far);
}

RobotState initial_robot(const ScenarioSpec& spec, const vessel::BoundaryMesh& mesh, const SimulationOptions& opt) {
  const vessel::Arm& in = mesh.arms.at(0);
  RobotState r;
  r.center = in.base + (in.s_min + opt.start_distance) * in.axis + spec.initial_y_c * perp(in.axis);
  r.orientation = spec.initial_orientation;
  r.radius = opt.robot_radius;
  return r;
}

double max_start_offset(double d, double r) { return d / 2.0 - 1.2 * r; }

ScenarioSpec draw_scenario(Label kind, std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(kind)};
  std::mt19937_64 rng(seq);
  auto uniform = [&rng](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };

  ScenarioSpec s;
  s.seed = seed;
  if (kind == Label::Branch) {
    const double d1 = uniform(6.0, 10.0);
    const double d2 = uniform(6.0, 10.0);
    const double a1 = deg2rad(uniform(25.0, 75.0));
    const double a2 = -deg2rad(uniform(25.0, 75.0));
    s.vessel = vessel::VesselSpec::branch(d1, d2, a1, a2);
  } else if (kind == Label::Curve) {
    const double d = uniform(6.0, 13.0);
    s.vessel = vessel::VesselSpec::curve(d, deg2rad(uniform(25.0, 75.0)));
  } else {
    s.vessel = vessel::VesselSpec::straight(uniform(6.0, 13.0));
  }
  s.vessel.seed = seed;
  s.u_max = uniform(800.0, 1000.0);
  const double ymax = max_start_offset(s.vessel.d);
  s.initial_y_c = uniform(-ymax, ymax);
  s.initial_orientation = uniform(0.0, 2.0 * kPi);
  return s;
}

namespace {

// Pushes the robot back to the minimum gap along the nearest wall normal.
bool enforce_gap(RobotState& r, const vessel::BoundaryMesh& mesh, double gmin) {
  for (int it = 0; it < 4; ++it) {
    if (!vessel::inside_domain(r.center, mesh)) return false;
    const auto c = vessel::nearest_wall(r, mesh);
    if (c.gap >= gmin * (1.0 - 1e-9)) return true;
    r.center = c.point - (r.radius + gmin) * c.normal;
  }
  return vessel::inside_domain(r.center, mesh) && vessel::wall_gap(r, mesh) >= gmin * (1.0 - 1e-9);
}

}  // namespace

PathRecord simulate_path(const ScenarioSpec& spec, const SimulationOptions& opt) {
  vessel::validate(spec.vessel);
  stokes::FlowProblem probe{scenario_mesh(spec, opt), {}, opt.fluid, spec.u_max};
  probe.validate();
  stokes::VesselFlowSolver solver(std::move(probe.mesh), opt.fluid, spec.u_max, opt.solver);
  return simulate_path(spec, solver, opt);
}

PathRecord simulate_path(const ScenarioSpec& spec, const stokes::VesselFlowSolver& solver,
                         const SimulationOptions& opt) {
  if (!(opt.dt > 0.0 && opt.dt <= 2.0)) throw InvalidParameter("time step must lie in (0, 2] ms");
  const long every = std::lround(opt.sample_interval / opt.dt);
  if (every < 1 || std::abs(every * opt.dt - opt.sample_interval) > 1e-9)
    throw InvalidParameter("sample interval must be a multiple of the time step");

  const auto& mesh = solver.mesh();
  PathRecord rec;
  rec.scenario = spec;
  rec.label = spec.label();
  rec.sample_interval = opt.sample_interval;

  RobotState robot = initial_robot(spec, mesh, opt);
  const double gmin = opt.contact_gap_factor * robot.radius;
  const double dts = opt.dt * 1e-3;  // s
  const long max_steps = std::lround(opt.max_time / opt.dt);

  auto fail = [&rec](const std::exception& e) {
    rec.terminal_reason = TerminalReason::SolverFailure;
    rec.failure = e.what();
    return rec;
  };

  stokes::MobilitySolution s0;
  try {
    s0 = solver.solve(robot);
  } catch (const Error& e) {
    return fail(e);
  }
  bool contact = false;
  for (long step = 0;; ++step) {
    if (step % every == 0) {
      TimedSample ts;
      ts.t = static_cast<double>(step) * opt.dt;
      ts.robot = robot;
      ts.motion = s0.motion;
      ts.pattern = features::encode_pattern(s0.traction);
      ts.contact = contact;
      if (opt.keep_raw) ts.raw = s0.traction;
      rec.samples.push_back(std::move(ts));
      contact = false;
    }
    for (std::size_t k = 0; k < mesh.outlet_count(); ++k)
      if (vessel::distance_to_outlet(robot.center, mesh, static_cast<int>(k)) <= opt.outlet_distance) {
        rec.terminal_reason = TerminalReason::ReachedOutlet;
        rec.outlet = static_cast<int>(k);
        return rec;
      }
    if (step >= max_steps) {
      rec.terminal_reason = TerminalReason::StepLimit;
      return rec;
    }

    try {
      RobotState mid = robot;
      mid.center += dts * s0.motion.velocity;
      mid.orientation += dts * s0.motion.angular_velocity;
      if (vessel::wall_gap(mid, mesh) < gmin && !enforce_gap(mid, mesh, gmin))
        throw DomainError("predictor step left the fluid domain");
      const auto s1 = solver.solve(mid);

      RobotState next = robot;
      next.center += 0.5 * dts * (s0.motion.velocity + s1.motion.velocity);
      next.orientation += 0.5 * dts * (s0.motion.angular_velocity + s1.motion.angular_velocity);
      if (!vessel::inside_domain(next.center, mesh) || vessel::wall_gap(next, mesh) < gmin) {
        if (!enforce_gap(next, mesh, gmin)) throw DomainError("robot penetrated the vessel wall");
        contact = true;
      }
      // A robot stalled on a dividing streamline leaves toward branch 1.
      if (rec.label == Label::Branch && (next.center - robot.center).norm() < 1e-7 * std::abs(spec.u_max) * dts) {
        const vessel::Arm& b1 = mesh.arms.at(1);
        const Vec2 side = b1.opening - next.center;
        const Vec2 n = perp(mesh.arms[0].axis);
        next.center += 1e-3 * (side.dot(n) >= 0.0 ? n : Vec2(-n));
      }
      robot = next;
      s0 = solver.solve(robot);
    } catch (const Error& e) {
      return fail(e);
    }
  }
}

PathRecord reverse_measurements(const PathRecord& path) {
  PathRecord r = path;
  r.scenario.direction =
      path.scenario.direction == Direction::Forward ? Direction::Reverse : Direction::Forward;
  const std::string suffix = "-rev";
  if (path.id.size() >= suffix.size() && path.id.compare(path.id.size() - suffix.size(), suffix.size(), suffix) == 0)
    r.id = path.id.substr(0, path.id.size() - suffix.size());
  else
    r.id = path.id + suffix;
  r.samples.assign(path.samples.rbegin(), path.samples.rend());
  const double t_end = path.samples.empty() ? 0.0 : path.samples.back().t;
  for (auto& s : r.samples) {
    s.t = t_end - s.t;
    s.motion.velocity = -s.motion.velocity;
    s.motion.angular_velocity = -s.motion.angular_velocity;
  }
  return r;
}

std::uint64_t member_seed(std::uint64_t corpus_seed, Label label, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(corpus_seed), static_cast<std::uint32_t>(corpus_seed >> 32),
                    static_cast<std::uint32_t>(label), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(static_cast<std::uint64_t>(index) >> 32)};
  std::mt19937_64 rng(seq);
  return rng();
}

std::string member_id(Label label, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s-%04zu", to_string(label).c_str(), index);
  return buf;
}

std::vector<bool> split_mask(std::size_t n, double train_fraction, std::uint64_t corpus_seed, Label label) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw InvalidParameter("train fraction must lie in (0, 1)");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::seed_seq seq{static_cast<std::uint32_t>(corpus_seed), static_cast<std::uint32_t>(corpus_seed >> 32),
                    static_cast<std::uint32_t>(label), 0x5u};
  std::mt19937_64 rng(seq);
  // Fisher–Yates with an explicit modulus draw so the split is portable.
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  std::vector<bool> mask(n, false);
  for (std::size_t i = 0; i < n_train; ++i) mask[order[i]] = true;
  return mask;
}

std::vector<const PathRecord*> Corpus::train() const {
  std::vector<const PathRecord*> out;
  for (std::size_t i = 0; i < members.size(); ++i)
    if (members[i].train && paths[i].terminal_reason != TerminalReason::SolverFailure) out.push_back(&paths[i]);
  return out;
}

std::vector<PathRecord> Corpus::test() const {
  std::vector<PathRecord> out;
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (members[i].train || paths[i].terminal_reason == TerminalReason::SolverFailure) continue;
    out.push_back(paths[i]);
    if (members[i].label == Label::Branch) out.push_back(reverse_measurements(paths[i]));
  }
  return out;
}

Corpus generate_corpus(const CorpusOptions& opt) {
  if (opt.branches < 10 || opt.curves < 10) throw InvalidParameter("a corpus needs at least 10 paths per class");
  Corpus corpus;
  for (Label label : {Label::Branch, Label::Curve}) {
    const std::size_t n = label == Label::Branch ? opt.branches : opt.curves;
    const auto mask = split_mask(n, opt.train_fraction, opt.seed, label);
    for (std::size_t i = 0; i < n; ++i)
      corpus.members.push_back({member_id(label, i), label, member_seed(opt.seed, label, i), mask[i]});
  }
  const std::size_t total = corpus.members.size();
  corpus.paths.resize(total);

  std::atomic<std::size_t> next{0}, done{0};
  std::mutex report;
  auto worker = [&]() {
    for (std::size_t i = next++; i < total; i = next++) {
      const auto& m = corpus.members[i];
      const ScenarioSpec spec = draw_scenario(m.label, m.seed);
      PathRecord rec;
      try {
        rec = simulate_path(spec, opt.simulation);
      } catch (const Error& e) {
        rec.scenario = spec;
        rec.label = spec.label();
        rec.terminal_reason = TerminalReason::SolverFailure;
        rec.failure = e.what();
      }
      rec.id = m.id;
      corpus.paths[i] = std::move(rec);
      const std::size_t k = ++done;
      if (opt.progress) {
        std::lock_guard<std::mutex> lock(report);
        opt.progress(k, total, corpus.paths[i]);
      }
    }
  };
  const unsigned jobs = std::max(1u, opt.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (std::size_t i = 0; i < total; ++i)
    if (corpus.paths[i].terminal_reason == TerminalReason::SolverFailure)
      corpus.failures.push_back(corpus.members[i].id + ": " + corpus.paths[i].failure);
  const double rate = static_cast<double>(corpus.failures.size()) / static_cast<double>(total);
  if (rate > opt.max_failure_rate) {
    std::ostringstream os;
    os << "solver failures in " << corpus.failures.size() << " of " << total << " paths exceed the "
       << opt.max_failure_rate * 100.0 << "% limit; first: " << corpus.failures.front();
    throw CorpusError(os.str());
  }
  return corpus;
}

}  // namespace stressnav::path
