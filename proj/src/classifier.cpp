#include "stressnav/classifier.hpp"

#include "stressnav/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace stressnav::classifier {

const std::array<const char*, kParams> kParamNames = {"beta0", "beta1", "beta2", "beta11", "beta22", "beta3"};

RegressionParams RegressionParams::reference() {
  RegressionParams p;
  p.beta = {-0.8, -1.7, 9.0, -0.97, 6.8, 11.6};
  p.standard_error = {0.7, 0.6, 1.8, 0.11, 2.3, 0.8};
  return p;
}

std::array<double, kParams> design_row(const FeatureVector& f) {
  return {1.0, f.lc, f.rho, f.lc * f.lc, f.rho * f.rho, f.p1};
}

double linear_predictor(const FeatureVector& f, const RegressionParams& p) {
  const auto x = design_row(f);
  double b = 0.0;
  for (int j = 0; j < kParams; ++j) b += p.beta[j] * x[j];
  return b;
}

namespace {

double logistic(double b) {
  if (b >= 0.0) return 1.0 / (1.0 + std::exp(-b));
  const double e = std::exp(b);
  return e / (1.0 + e);
}

// log(1 + e^b) without overflow.
double softplus(double b) { return b > 0.0 ? b + std::log1p(std::exp(-b)) : std::log1p(std::exp(b)); }

}  // namespace

double p_branch(const FeatureVector& f, const RegressionParams& p) { return logistic(linear_predictor(f, p)); }

std::size_t argmin_correlation_sample(const PathRecord& path, double dt_corr) {
  const auto series = features::path_correlation_series(path, dt_corr);
  if (series.empty()) {
    std::ostringstream os;
    os << "path '" << path.id << "' is shorter than the correlation lag " << dt_corr << " ms";
    throw InvalidParameter(os.str());
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < series.size(); ++i)
    if (series[i].c < series[best].c) best = i;
  return series[best].index;
}

TrainingExample extract_training_features(const PathRecord& path, double dt_corr, const PcaModel& pca) {
  const auto series = features::path_correlation_series(path, dt_corr);
  if (series.empty()) {
    std::ostringstream os;
    os << "path '" << path.id << "' is shorter than the correlation lag " << dt_corr << " ms";
    throw InvalidParameter(os.str());
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < series.size(); ++i)
    if (series[i].c < series[best].c) best = i;
  const auto& first = path.samples.front();
  const auto mesh = vessel::build_geometry(path.scenario.vessel);
  const auto rho = features::arm_relative_position(first.robot, mesh);
  if (!rho) throw DomainError("path '" + path.id + "' does not start in a straight arm");

  TrainingExample ex;
  ex.sample = series[best].index;
  ex.t = series[best].t;
  ex.c = series[best].c;
  ex.branch = path.label == path::Label::Branch;
  ex.x = {features::lc_of(ex.c), *rho, features::project(pca, path.samples[ex.sample].pattern)};
  return ex;
}

double log_likelihood(const std::vector<FeatureVector>& x, const std::vector<int>& labels, const RegressionParams& p) {
  double ll = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double b = linear_predictor(x[i], p);
    ll += labels[i] ? -softplus(-b) : -softplus(b);
  }
  return ll;
}

namespace {

struct Fit {
  Eigen::VectorXd beta;
  Eigen::MatrixXd information;
  double ll = 0.0;  // penalized
  int iterations = 0;
  bool converged = false;
};

Fit irls(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda, const TrainOptions& opt) {
  const Eigen::Index n = X.rows(), p = X.cols();
  Eigen::VectorXd pen = Eigen::VectorXd::Constant(p, lambda);
  pen(0) = 0.0;
  auto objective = [&](const Eigen::VectorXd& beta) {
    const Eigen::VectorXd b = X * beta;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) ll += y(i) > 0.5 ? -softplus(-b(i)) : -softplus(b(i));
    return ll - 0.5 * (pen.array() * beta.array().square()).sum();
  };

  Fit f;
  f.beta = Eigen::VectorXd::Zero(p);
  f.ll = objective(f.beta);
  for (int it = 1; it <= opt.max_iterations; ++it) {
    const Eigen::VectorXd b = X * f.beta;
    Eigen::VectorXd mu(n), w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      mu(i) = logistic(b(i));
      w(i) = mu(i) * (1.0 - mu(i));
    }
    Eigen::MatrixXd H = X.transpose() * w.asDiagonal() * X;
    H.diagonal() += pen;
    const Eigen::VectorXd g = X.transpose() * (y - mu) - pen.cwiseProduct(f.beta);
    const Eigen::VectorXd step = H.ldlt().solve(g);
    double scale = 1.0, ll_new = objective(f.beta + step);
    while (ll_new < f.ll && scale > 1e-10) {
      scale *= 0.5;
      ll_new = objective(f.beta + scale * step);
    }
    const double change = ll_new - f.ll;
    f.iterations = it;
    if (!(change >= 0.0)) break;
    f.beta += scale * step;
    f.ll = ll_new;
    if (change < opt.tolerance) {
      f.converged = true;
      break;
    }
  }
  const Eigen::VectorXd b = X * f.beta;
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = logistic(b(i));
    w(i) = m * (1.0 - m);
  }
  f.information = X.transpose() * w.asDiagonal() * X;
  f.information.diagonal() += pen;
  return f;
}

}  // namespace

RegressionParams train_logistic(const std::vector<FeatureVector>& x, const std::vector<int>& labels,
                                const TrainOptions& opt) {
  const std::size_t n = x.size();
  if (labels.size() != n) throw InvalidParameter("feature and label counts differ");
  if (n < 20) throw InvalidParameter("logistic training needs at least 20 samples");
  const auto positives = std::count_if(labels.begin(), labels.end(), [](int v) { return v != 0; });
  if (positives == 0 || positives == static_cast<long>(n)) throw InvalidParameter("training data needs both classes");

  Eigen::MatrixXd X(n, kParams);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = design_row(x[i]);
    for (int j = 0; j < kParams; ++j) X(i, j) = r[j];
    y(i) = labels[i] ? 1.0 : 0.0;
  }

  Fit f = irls(X, y, 0.0, opt);
  // Separation drives fitted probabilities to 0/1 and the coefficients off.
  const Eigen::VectorXd b = X * f.beta;
  const bool separated = !f.converged || !f.beta.allFinite() || f.beta.cwiseAbs().maxCoeff() > 1e4 ||
                         (b.array() * (2.0 * y.array() - 1.0)).minCoeff() > 0.0;
  RegressionParams p;
  if (separated) {
    f = irls(X, y, opt.ridge, opt);
    p.separation_warning = true;
  }
  const Eigen::MatrixXd cov = f.information.inverse();
  for (int j = 0; j < kParams; ++j) {
    p.beta[j] = f.beta(j);
    p.standard_error[j] = std::sqrt(std::max(0.0, cov(j, j)));
  }
  p.iterations = f.iterations;
  p.log_likelihood = log_likelihood(x, labels, p);
  const double q = static_cast<double>(positives) / static_cast<double>(n);
  p.null_log_likelihood = static_cast<double>(positives) * std::log(q) + static_cast<double>(n - positives) * std::log1p(-q);
  return p;
}

OnlineTrace online_trace(const PathRecord& path, const RegressionParams& params, const PcaModel& pca,
                         double dt_corr, const features::SteadyOptions& steady) {
  const auto mesh = vessel::build_geometry(path.scenario.vessel);
  const auto track = features::steady_position_tracker(path, mesh, steady);
  const auto series = features::path_correlation_series(path, dt_corr);
  const auto cum = path.cumulative_length();
  const double total = cum.empty() ? 0.0 : cum.back();

  OnlineTrace tr;
  for (const auto& pt : series) {
    const std::size_t i = pt.index;
    const FeatureVector f{features::lc_of(pt.c), track.rho_saved[i], features::project(pca, path.samples[i].pattern)};
    tr.index.push_back(i);
    tr.t.push_back(pt.t);
    tr.c.push_back(pt.c);
    tr.rho_saved.push_back(f.rho);
    tr.p1.push_back(f.p1);
    tr.pbranch.push_back(p_branch(f, params));
    tr.fraction.push_back(total > 0.0 ? cum[i] / total : 0.0);
  }
  return tr;
}

ClassifierOutcome outcome_from_trace(const OnlineTrace& tr, const PathRecord& path, double threshold, bool inclusive) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw InvalidParameter("threshold must lie in [0, 1]");
  ClassifierOutcome o;
  o.label_true = path.label;
  o.direction = path.scenario.direction;
  for (std::size_t k = 0; k < tr.pbranch.size(); ++k) {
    const double p = tr.pbranch[k];
    o.max_pbranch = std::max(o.max_pbranch, p);
    if (!o.detected && (inclusive ? p >= threshold : p > threshold)) {
      o.detected = true;
      o.first_crossing_fraction = tr.fraction[k];
    }
  }
  return o;
}

ClassifierOutcome classify_online(const PathRecord& path, const RegressionParams& params, const PcaModel& pca,
                                  double threshold, double dt_corr) {
  return outcome_from_trace(online_trace(path, params, pca, dt_corr), path, threshold);
}

RocResult roc_auc(const std::vector<double>& scores, const std::vector<bool>& is_branch) {
  if (scores.size() != is_branch.size()) throw InvalidParameter("score and label counts differ");
  const auto nb = static_cast<double>(std::count(is_branch.begin(), is_branch.end(), true));
  const double nc = static_cast<double>(scores.size()) - nb;
  if (nb == 0 || nc == 0) throw InvalidParameter("ROC analysis needs both branch and curve paths");

  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocResult r;
  r.points.push_back({1.0, 0.0, 0.0});
  double tp = 0.0, fp = 0.0;
  for (std::size_t k = 0; k < order.size();) {
    const double s = scores[order[k]];
    for (; k < order.size() && scores[order[k]] == s; ++k) (is_branch[order[k]] ? tp : fp) += 1.0;
    const RocPoint prev = r.points.back();
    const RocPoint pt{s, tp / nb, fp / nc};
    r.auc += 0.5 * (pt.fpf - prev.fpf) * (pt.tpf + prev.tpf);
    r.points.push_back(pt);
  }
  return r;
}

ScoredPath score_path(const PathRecord& path, const RegressionParams& params, const PcaModel& pca, double dt_corr) {
  ScoredPath s;
  s.label = path.label;
  s.direction = path.scenario.direction;
  s.trace = online_trace(path, params, pca, dt_corr);
  for (double p : s.trace.pbranch) s.max_pbranch = std::max(s.max_pbranch, p);
  return s;
}

std::vector<double> sweep_thresholds(const std::vector<ScoredPath>& scored) {
  std::vector<double> v;
  for (const auto& s : scored) v.push_back(s.max_pbranch);
  std::sort(v.begin(), v.end(), std::greater<>());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

namespace {

void mean_se(const std::vector<double>& v, double& mean, double& se) {
  mean = se = 0.0;
  if (v.empty()) return;
  // shifted by the first value so identical inputs average exactly
  for (double x : v) mean += x - v[0];
  mean = v[0] + mean / static_cast<double>(v.size());
  if (v.size() < 2) return;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace

DetectionAnalysis detection_position_analysis(const std::vector<ScoredPath>& scored,
                                              const std::vector<double>& thresholds, double min_tpf) {
  DetectionAnalysis out;
  std::size_t branches = 0;
  for (const auto& s : scored)
    if (s.label == path::Label::Branch) ++branches;
  if (branches == 0) return out;
  double gap_sum = 0.0;
  for (double tau : thresholds) {
    std::vector<double> fwd, rev;
    for (const auto& s : scored) {
      if (s.label != path::Label::Branch) continue;
      for (std::size_t k = 0; k < s.trace.pbranch.size(); ++k)
        if (s.trace.pbranch[k] >= tau) {
          (s.direction == path::Direction::Forward ? fwd : rev).push_back(s.trace.fraction[k]);
          break;
        }
    }
    DetectionRow row;
    row.threshold = tau;
    row.tpf = static_cast<double>(fwd.size() + rev.size()) / static_cast<double>(branches);
    row.forward_n = fwd.size();
    row.reverse_n = rev.size();
    mean_se(fwd, row.forward_mean, row.forward_se);
    mean_se(rev, row.reverse_mean, row.reverse_se);
    if (row.tpf >= min_tpf && !fwd.empty() && !rev.empty()) {
      gap_sum += row.reverse_mean - row.forward_mean;
      ++out.gap_rows;
    }
    out.rows.push_back(row);
  }
  if (out.gap_rows > 0) out.gap = gap_sum / static_cast<double>(out.gap_rows);
  return out;
}

std::vector<NoiseRow> noise_study(const std::vector<ScoredPath>& scored, const RegressionParams& params,
                                  const std::vector<double>& levels, int reps, std::uint64_t seed,
                                  NoiseTarget target) {
  if (reps < 1) throw InvalidParameter("noise study needs at least one repetition");
  std::vector<bool> is_branch;
  for (const auto& s : scored) is_branch.push_back(s.label == path::Label::Branch);

  std::vector<NoiseRow> rows;
  for (std::size_t li = 0; li < levels.size(); ++li) {
    const double sigma = levels[li];
    if (!(sigma >= 0.0 && sigma <= 0.5)) throw InvalidParameter("noise levels must lie in [0, 0.5]");
    std::vector<double> aucs;
    for (int rep = 0; rep < reps; ++rep) {
      std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                        static_cast<std::uint32_t>(li), static_cast<std::uint32_t>(rep)};
      std::mt19937_64 rng(seq);
      std::normal_distribution<double> eps(0.0, 1.0);
      std::vector<double> scores;
      for (const auto& s : scored) {
        double best = 0.0;
        for (std::size_t k = 0; k < s.trace.pbranch.size(); ++k) {
          const double e1 = sigma * eps(rng), e2 = sigma * eps(rng), e3 = sigma * eps(rng);
          FeatureVector f;
          f.lc = target == NoiseTarget::Lc ? features::lc_of(s.trace.c[k]) * (1.0 + e1)
                                           : features::lc_of(s.trace.c[k] * (1.0 + e1));
          f.rho = s.trace.rho_saved[k] * (1.0 + e2);
          f.p1 = s.trace.p1[k] * (1.0 + e3);
          best = std::max(best, p_branch(f, params));
        }
        scores.push_back(best);
      }
      aucs.push_back(roc_auc(scores, is_branch).auc);
    }
    NoiseRow row;
    row.sigma = sigma;
    row.reps = reps;
    mean_se(aucs, row.mean_auc, row.se);
    rows.push_back(row);
  }
  return rows;
}

std::optional<PostPass> post_pass_verification(const PathRecord& path, const features::SteadyOptions& opt) {
  if (path.samples.empty()) return std::nullopt;
  const auto mesh = vessel::build_geometry(path.scenario.vessel);
  const auto tr = features::steady_position_tracker(path, mesh, opt);
  const int entry = tr.arm[0];
  if (entry < 0) return std::nullopt;
  const std::size_t n = path.samples.size();
  std::size_t exit = 0;
  while (exit < n && tr.arm[exit] == entry) ++exit;
  if (exit == n) return std::nullopt;

  std::optional<std::size_t> pre, post;
  for (std::size_t i = 0; i < exit; ++i)
    if (tr.steady[i]) pre = i;
  for (std::size_t i = exit; i < n && !post; ++i)
    if (tr.steady[i] && tr.arm[i] >= 0 && tr.arm[i] != entry) post = i;
  if (!pre || !post) return std::nullopt;

  const auto& a = path.samples[*pre];
  const auto& b = path.samples[*post];
  PostPass r;
  r.pre_sample = *pre;
  r.post_sample = *post;
  r.delta_rho = tr.rho[*post] - tr.rho[*pre];
  r.speed_ratio = b.motion.velocity.norm() / a.motion.velocity.norm();
  r.diameter_ratio = mesh.arms[tr.arm[*post]].diameter / mesh.arms[entry].diameter;
  return r;
}

}  // namespace stressnav::classifier
