#pragma once

// Logistic branch classifier on (log(1 − c), ρ, p1): training, online
// evaluation along paths, ROC/AUC, detection position, noise study and
// post-pass verification.

#include "stressnav/features.hpp"
#include "stressnav/path.hpp"
#include "stressnav/pattern.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace stressnav::classifier {

using features::PcaModel;
using path::PathRecord;

struct FeatureVector {
  double lc = 0.0;
  double rho = 0.0;
  double p1 = 0.0;
};

constexpr int kParams = 6;
// b = β0 + β1·lc + β2·ρ + β11·lc² + β22·ρ² + β3·p1
extern const std::array<const char*, kParams> kParamNames;  // beta0 … beta3

struct RegressionParams {
  std::array<double, kParams> beta{};
  std::array<double, kParams> standard_error{};
  bool separation_warning = false;  // fit fell back to the penalized model
  int iterations = 0;
  double log_likelihood = 0.0;
  double null_log_likelihood = 0.0;

  static RegressionParams reference();  // published coefficients
};

std::array<double, kParams> design_row(const FeatureVector& f);
double linear_predictor(const FeatureVector& f, const RegressionParams& p);
double p_branch(const FeatureVector& f, const RegressionParams& p);

struct TrainingExample {
  FeatureVector x;
  bool branch = false;
  std::size_t sample = 0;  // argmin-c sample index
  double t = 0.0;
  double c = 1.0;
};

// Earliest sample of minimum c(t, Δt) along the path.
std::size_t argmin_correlation_sample(const PathRecord& path, double dt_corr);
// (lc at the minimum, ρ at path start, p1 at the argmin sample). Throws
// InvalidParameter for paths shorter than dt_corr.
TrainingExample extract_training_features(const PathRecord& path, double dt_corr, const PcaModel& pca);

struct TrainOptions {
  double tolerance = 1e-8;  // log-likelihood change
  int max_iterations = 100;
  double ridge = 1e-3;      // fallback penalty on non-intercept terms
};

// IRLS maximum likelihood; standard errors from the inverse information.
RegressionParams train_logistic(const std::vector<FeatureVector>& x, const std::vector<int>& labels,
                                const TrainOptions& opt = {});
double log_likelihood(const std::vector<FeatureVector>& x, const std::vector<int>& labels,
                      const RegressionParams& p);

// Which classifier input the relative noise perturbs in place of lc.
enum class NoiseTarget { Lc, Correlation };

struct OnlineTrace {
  std::vector<std::size_t> index;  // sample index
  std::vector<double> t, c, rho_saved, p1, pbranch, fraction;
};

// Evaluates P_branch at every sample with t ≥ t0 + dt_corr.
OnlineTrace online_trace(const PathRecord& path, const RegressionParams& params, const PcaModel& pca,
                         double dt_corr, const features::SteadyOptions& steady = {});

struct ClassifierOutcome {
  path::Label label_true = path::Label::Curve;
  path::Direction direction = path::Direction::Forward;
  bool detected = false;
  std::optional<double> first_crossing_fraction;
  double max_pbranch = 0.0;
};

// Detection means P_branch > threshold somewhere on the path (≥ with
// `inclusive`, as in the threshold sweeps over observed scores).
ClassifierOutcome outcome_from_trace(const OnlineTrace& tr, const PathRecord& path, double threshold,
                                     bool inclusive = false);
ClassifierOutcome classify_online(const PathRecord& path, const RegressionParams& params, const PcaModel& pca,
                                  double threshold, double dt_corr);

struct RocPoint {
  double threshold, tpf, fpf;
};
struct RocResult {
  std::vector<RocPoint> points;  // fpf and tpf nondecreasing
  double auc = 0.0;
};

// Scores are per-path maxima of P_branch; each distinct score is a threshold
// with detection at score ≥ threshold. Throws InvalidParameter when either
// class is missing.
RocResult roc_auc(const std::vector<double>& scores, const std::vector<bool>& is_branch);

// Per-path data kept for the threshold sweeps.
struct ScoredPath {
  path::Label label = path::Label::Curve;
  path::Direction direction = path::Direction::Forward;
  OnlineTrace trace;
  double max_pbranch = 0.0;
};

ScoredPath score_path(const PathRecord& path, const RegressionParams& params, const PcaModel& pca, double dt_corr);

struct DetectionRow {
  double threshold = 0.0;
  double tpf = 0.0;  // over all branch paths
  double forward_mean = 0.0, forward_se = 0.0;
  double reverse_mean = 0.0, reverse_se = 0.0;
  std::size_t forward_n = 0, reverse_n = 0;
};

struct DetectionAnalysis {
  std::vector<DetectionRow> rows;
  double gap = 0.0;  // mean (reverse − forward) over rows with tpf ≥ min_tpf
  std::size_t gap_rows = 0;
};

DetectionAnalysis detection_position_analysis(const std::vector<ScoredPath>& scored,
                                              const std::vector<double>& thresholds, double min_tpf = 0.8);
// Distinct per-path max-P_branch values, descending (the roc_auc thresholds).
std::vector<double> sweep_thresholds(const std::vector<ScoredPath>& scored);

struct NoiseRow {
  double sigma = 0.0;
  double mean_auc = 0.0;
  double se = 0.0;
  int reps = 0;
};

// Per rep, every evaluation's inputs are independently multiplied by
// (1 + ε), ε ~ N(0, σ²), and the AUC recomputed.
std::vector<NoiseRow> noise_study(const std::vector<ScoredPath>& scored, const RegressionParams& params,
                                  const std::vector<double>& levels, int reps, std::uint64_t seed,
                                  NoiseTarget target = NoiseTarget::Lc);

struct PostPass {
  double delta_rho = 0.0;
  double speed_ratio = 1.0;
  double diameter_ratio = 1.0;
  std::size_t pre_sample = 0, post_sample = 0;
};

// Compares the last steady sample in the entry arm with the first steady
// sample in the exit arm; nullopt without a steady exit window.
std::optional<PostPass> post_pass_verification(const PathRecord& path, const features::SteadyOptions& opt = {});

}  // namespace stressnav::classifier
