#pragma once

// Quasi-static robot trajectories through a vessel, randomized scenarios, and
// seeded path corpora.

#include "stressnav/pattern.hpp"
#include "stressnav/stokes.hpp"
#include "stressnav/vessel.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace stressnav::path {

enum class Direction { Forward, Reverse };
enum class Label { Branch, Curve, Straight };
enum class TerminalReason { ReachedOutlet, StepLimit, SolverFailure };

std::string to_string(Direction d);
std::string to_string(Label l);
std::string to_string(TerminalReason r);
Direction direction_from_string(const std::string& s);
Label label_from_string(const std::string& s);
TerminalReason terminal_reason_from_string(const std::string& s);

struct ScenarioSpec {
  vessel::VesselSpec vessel;
  double u_max = 1000.0;            // µm/s
  double initial_y_c = 0.0;         // µm, offset from the inlet axis
  double initial_orientation = 0.0; // rad
  std::uint64_t seed = 0;
  Direction direction = Direction::Forward;

  Label label() const;
  bool operator==(const ScenarioSpec&) const = default;
};

struct SimulationOptions {
  double dt = 0.5;               // ms
  double sample_interval = 1.0;  // ms, a multiple of dt
  double max_time = 1000.0;      // ms
  double start_distance = 8.0;   // µm from the inlet
  double outlet_distance = 8.0;  // µm from an outlet ends the path
  double robot_radius = 1.0;
  double h = 0.25, h_far = 0.5;  // wall resolution
  double contact_gap_factor = 0.05;
  bool keep_raw = false;
  vessel::GeometryOptions geometry;
  stokes::SolverOptions solver;
  FluidParams fluid;
};

struct TimedSample {
  double t = 0.0;  // ms
  vessel::RobotState robot;
  stokes::RigidMotion motion;
  features::StressPattern pattern;
  bool contact = false;  // the step into this pose was clipped at the minimum gap
  std::optional<stokes::TractionField> raw;
};

struct PathRecord {
  std::string id;
  ScenarioSpec scenario;
  std::vector<TimedSample> samples;
  Label label = Label::Straight;
  TerminalReason terminal_reason = TerminalReason::StepLimit;
  int outlet = -1;  // outlet reached, −1 otherwise
  double sample_interval = 1.0;
  std::string failure;  // solver message for truncated records

  double duration() const { return samples.empty() ? 0.0 : samples.back().t - samples.front().t; }
  // Distance travelled by the centre up to each sample.
  std::vector<double> cumulative_length() const;
  double path_length() const;
};

vessel::BoundaryMesh scenario_mesh(const ScenarioSpec& spec, const SimulationOptions& opt = {});
// Robot pose `start_distance` downstream of the inlet, offset by y_c.
vessel::RobotState initial_robot(const ScenarioSpec& spec, const vessel::BoundaryMesh& mesh,
                                 const SimulationOptions& opt = {});

// Uniform draw over the sampling ranges for the class. Straight uses the curve
// ranges with no bend.
ScenarioSpec draw_scenario(Label kind, std::uint64_t seed);

// Largest |y_c| keeping the initial gap at 0.2r.
double max_start_offset(double d, double r = 1.0);

PathRecord simulate_path(const ScenarioSpec& spec, const SimulationOptions& opt = {});
// Reuses a factored solver for the scenario's mesh and u_max.
PathRecord simulate_path(const ScenarioSpec& spec, const stokes::VesselFlowSolver& solver,
                         const SimulationOptions& opt = {});

// Time-reversed measurement sequence: same patterns, negated motion,
// t' = t_end − t.
PathRecord reverse_measurements(const PathRecord& path);

struct CorpusOptions {
  std::size_t branches = 100;
  std::size_t curves = 100;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  double max_failure_rate = 0.05;
  unsigned jobs = 1;
  SimulationOptions simulation;
  std::function<void(std::size_t done, std::size_t total, const PathRecord&)> progress;
};

struct CorpusMember {
  std::string id;
  Label label = Label::Branch;
  std::uint64_t seed = 0;
  bool train = false;
};

struct Corpus {
  std::vector<CorpusMember> members;  // all simulated forward paths
  std::vector<PathRecord> paths;      // same order as members
  std::vector<std::string> failures;

  // Training split (forward only).
  std::vector<const PathRecord*> train() const;
  // Test split: forward paths of both classes plus reversed branch paths.
  std::vector<PathRecord> test() const;
};

// Seed for member `index` of a class.
std::uint64_t member_seed(std::uint64_t corpus_seed, Label label, std::size_t index);
std::string member_id(Label label, std::size_t index);
// Deterministic per-class split; true marks training members.
std::vector<bool> split_mask(std::size_t n, double train_fraction, std::uint64_t corpus_seed, Label label);

// Throws CorpusError when the solver-failure rate exceeds the limit.
Corpus generate_corpus(const CorpusOptions& opt);

}  // namespace stressnav::path
