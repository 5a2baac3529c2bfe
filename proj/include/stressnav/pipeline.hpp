#pragma once

// Command implementations behind the CLI: corpus generation, training,
// evaluation, the two fixed demo scenarios and the noise study. Each writes
// its outputs under an explicit directory and returns what it printed.

#include "stressnav/classifier.hpp"
#include "stressnav/io.hpp"
#include "stressnav/path.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace stressnav::pipeline {

namespace fs = std::filesystem;

// Default root for outputs: $STRESSNAV_OUT, else "stressnav-out".
fs::path default_output_root();

struct GenerateConfig {
  std::size_t branches = 100;
  std::size_t curves = 100;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  fs::path out;  // corpus directory
  path::SimulationOptions simulation;
};

struct GenerateSummary {
  std::size_t paths = 0, failures = 0, train = 0, test = 0;
  double failure_rate = 0.0;
  double median_transit_ms = 0.0;
};

GenerateSummary generate(const GenerateConfig& cfg, std::ostream* log = nullptr);

// Corpus as stored on disk, with the split reconstructed from the manifest.
struct LoadedCorpus {
  io::Manifest manifest;
  path::Corpus corpus;
};
LoadedCorpus load_corpus(const fs::path& dir);

struct TrainConfig {
  fs::path corpus;
  fs::path out;  // model directory
  double dt_corr = 10.0;
  classifier::TrainOptions fit;
};

struct TrainResult {
  features::PcaModel pca;
  classifier::RegressionParams params;
  std::size_t examples = 0, branches = 0;
};

TrainResult train(const TrainConfig& cfg, std::ostream* log = nullptr);
// Same fit on in-memory training paths (labels permuted when `permute_seed` is set).
TrainResult train_on(const std::vector<const path::PathRecord*>& paths, double dt_corr,
                     const classifier::TrainOptions& fit = {},
                     std::optional<std::uint64_t> permute_seed = std::nullopt);

struct Model {
  features::PcaModel pca;
  classifier::RegressionParams params;
  double dt_corr = 10.0;
};
Model load_model(const fs::path& dir);

struct EvaluateConfig {
  fs::path corpus, model, out;
  std::string figure;   // empty: everything; "fig4", "fig5", "roc", "detection", "noise"
  std::string path_id;  // for fig4/fig5
  std::optional<std::uint64_t> seed;  // noise table only when set
  std::vector<double> noise_levels{0.0, 0.01, 0.02, 0.05, 0.1, 0.2};
  int noise_reps = 100;
  classifier::NoiseTarget noise_target = classifier::NoiseTarget::Lc;
  double min_tpf = 0.8;
};

struct EvaluationSummary {
  double auc = 0.0, auc_forward = 0.0, auc_reverse = 0.0;
  std::size_t test_paths = 0;
  classifier::DetectionAnalysis detection;
  std::vector<classifier::NoiseRow> noise;
};

// Scores every test path (forward and reversed branches, forward curves).
std::vector<classifier::ScoredPath> score_test_paths(const std::vector<path::PathRecord>& test, const Model& m);
EvaluationSummary summarize(const std::vector<classifier::ScoredPath>& scored, double min_tpf = 0.8);

EvaluationSummary evaluate(const EvaluateConfig& cfg, std::ostream* log = nullptr);

struct NoiseConfig {
  fs::path corpus, model, out;
  std::uint64_t seed = 0;
  std::vector<double> levels{0.0, 0.01, 0.02, 0.05, 0.1, 0.2};
  int reps = 100;
  classifier::NoiseTarget target = classifier::NoiseTarget::Lc;
};
std::vector<classifier::NoiseRow> noise_study(const NoiseConfig& cfg, std::ostream* log = nullptr);

// The two fixed demo scenarios: d1 = d2 = 6.2 µm at ±50° with u_max 1000 µm/s,
// and a 7.8 µm, 50° curve at 530 µm/s.
struct DemoScenario {
  std::string name;
  path::ScenarioSpec spec;
  double pose_time = 0.0;  // ms along the path of the highlighted pose
};
std::vector<DemoScenario> demo_scenarios();

struct DemoPose {
  std::string name;
  path::PathRecord path;
  std::size_t sample = 0;
  stokes::MobilitySolution solution;
  double speed = 0.0, omega = 0.0, max_stress = 0.0;
};

struct DemoResult {
  std::vector<DemoPose> poses;    // branch, curve
  double junction_correlation = 0.0;
};

struct DemoConfig {
  fs::path out;                     // empty: compute only
  std::optional<fs::path> model;    // enables the P_branch traces
  double dt_corr = 10.0;
};

DemoResult demo_fig1(const DemoConfig& cfg, std::ostream* log = nullptr);

}  // namespace stressnav::pipeline
