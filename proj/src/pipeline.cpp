#include "stressnav/pipeline.hpp"

#include "stressnav/error.hpp"
#include "stressnav/features.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

namespace stressnav::pipeline {

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw FormatError("cannot create directory " + dir.string());
  const fs::path probe = dir / ".write-test";
  {
    std::ofstream f(probe);
    if (!f) throw FormatError("directory " + dir.string() + " is not writable");
  }
  fs::remove(probe, ec);
}

void write_json(const fs::path& file, const io::json& j) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw FormatError("cannot write " + file.string());
  out << j.dump(2) << '\n';
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

io::json simulation_config(const path::SimulationOptions& s) {
  return {{"dt_ms", s.dt},
          {"sample_interval_ms", s.sample_interval},
          {"max_time_ms", s.max_time},
          {"start_distance_um", s.start_distance},
          {"outlet_distance_um", s.outlet_distance},
          {"robot_radius_um", s.robot_radius},
          {"h_um", s.h},
          {"h_far_um", s.h_far},
          {"sensors", s.solver.sensors},
          {"robot_elements", s.solver.robot_elements},
          {"viscosity_pa_s", s.fluid.viscosity},
          {"density_kg_m3", s.fluid.density}};
}

const path::PathRecord& find_path(const std::vector<path::PathRecord>& paths, const std::string& id) {
  for (const auto& p : paths)
    if (p.id == id) return p;
  throw InvalidParameter("no test path with id '" + id + "'");
}

void write_series(const fs::path& file, const path::PathRecord& p, double dt_corr) {
  std::vector<std::vector<double>> rows;
  for (const auto& c : features::path_correlation_series(p, dt_corr)) rows.push_back({c.t, c.c, c.dtheta});
  io::write_table(file, {"t_ms", "c", "dtheta_rad"}, rows);
}

void write_trace(const fs::path& file, const classifier::OnlineTrace& tr) {
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < tr.t.size(); ++k)
    rows.push_back({tr.t[k], tr.c[k], tr.rho_saved[k], tr.p1[k], tr.pbranch[k], tr.fraction[k]});
  io::write_table(file, {"t_ms", "c", "rho_saved", "p1", "p_branch", "path_fraction"}, rows);
}

void write_roc(const fs::path& file, const classifier::RocResult& r) {
  std::vector<std::vector<double>> rows;
  for (const auto& p : r.points) rows.push_back({p.threshold, p.fpf, p.tpf});
  io::write_table(file, {"threshold", "fpf", "tpf"}, rows);
}

classifier::RocResult roc_subset(const std::vector<classifier::ScoredPath>& scored,
                                 std::optional<path::Direction> branch_direction) {
  std::vector<double> scores;
  std::vector<bool> branch;
  for (const auto& s : scored) {
    const bool b = s.label == path::Label::Branch;
    if (b && branch_direction && s.direction != *branch_direction) continue;
    scores.push_back(s.max_pbranch);
    branch.push_back(b);
  }
  return classifier::roc_auc(scores, branch);
}

io::json noise_json(const std::vector<classifier::NoiseRow>& rows) {
  io::json a = io::json::array();
  for (const auto& r : rows) a.push_back({{"sigma", r.sigma}, {"mean_auc", r.mean_auc}, {"se", r.se}, {"reps", r.reps}});
  return a;
}

void write_noise(const fs::path& file, const std::vector<classifier::NoiseRow>& rows) {
  std::vector<std::vector<double>> t;
  for (const auto& r : rows) t.push_back({r.sigma, r.mean_auc, r.se, static_cast<double>(r.reps)});
  io::write_table(file, {"relative_noise", "mean_auc", "standard_error", "reps"}, t);
}

}  // namespace

fs::path default_output_root() {
  const char* env = std::getenv("STRESSNAV_OUT");
  return env && *env ? fs::path(env) : fs::path("stressnav-out");
}

GenerateSummary generate(const GenerateConfig& cfg, std::ostream* log) {
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0))
    throw InvalidParameter("train fraction must lie in (0, 1)");
  ensure_dir(cfg.out / "paths");

  path::CorpusOptions opt;
  opt.branches = cfg.branches;
  opt.curves = cfg.curves;
  opt.train_fraction = cfg.train_fraction;
  opt.seed = cfg.seed;
  opt.jobs = cfg.jobs;
  opt.simulation = cfg.simulation;
  if (log)
    opt.progress = [log](std::size_t done, std::size_t total, const path::PathRecord& p) {
      *log << "[" << done << "/" << total << "] " << p.id << " " << path::to_string(p.terminal_reason) << " "
           << p.samples.size() << " samples\n"
           << std::flush;
    };
  const path::Corpus corpus = path::generate_corpus(opt);

  io::Manifest m;
  m.config = {{"branches", cfg.branches},
              {"curves", cfg.curves},
              {"train_fraction", cfg.train_fraction},
              {"seed", cfg.seed},
              {"simulation", simulation_config(cfg.simulation)}};
  GenerateSummary s;
  std::vector<double> transit;
  for (std::size_t i = 0; i < corpus.members.size(); ++i) {
    const auto& mem = corpus.members[i];
    const auto& p = corpus.paths[i];
    const std::string file = "paths/" + mem.id + ".jsonl";
    io::write_path(cfg.out / file, p);
    m.entries.push_back({mem.id, file, mem.label, mem.train ? "train" : "test", mem.seed, p.terminal_reason,
                         p.duration()});
    ++s.paths;
    if (p.terminal_reason == path::TerminalReason::SolverFailure) {
      ++s.failures;
      continue;
    }
    ++(mem.train ? s.train : s.test);
    transit.push_back(p.duration());
  }
  io::write_manifest(cfg.out / "manifest.jsonl", m);
  s.failure_rate = s.paths ? static_cast<double>(s.failures) / static_cast<double>(s.paths) : 0.0;
  s.median_transit_ms = median(transit);
  if (log)
    *log << "paths " << s.paths << " (train " << s.train << ", test " << s.test << ")\n"
         << "failures " << s.failures << " (" << std::fixed << std::setprecision(1) << 100.0 * s.failure_rate
         << "%)\n"
         << "median transit " << std::setprecision(1) << s.median_transit_ms << " ms\n"
         << std::defaultfloat;
  return s;
}

LoadedCorpus load_corpus(const fs::path& dir) {
  const fs::path mf = dir / "manifest.jsonl";
  if (!fs::exists(mf)) throw FormatError("no corpus manifest at " + mf.string());
  LoadedCorpus lc;
  lc.manifest = io::read_manifest(mf);
  for (const auto& e : lc.manifest.entries) {
    if (e.split != "train" && e.split != "test") throw FormatError("manifest entry '" + e.id + "' has split '" + e.split + "'");
    lc.corpus.members.push_back({e.id, e.label, e.seed, e.split == "train"});
    lc.corpus.paths.push_back(io::read_path(dir / e.file));
    if (lc.corpus.paths.back().id != e.id) throw FormatError("path file " + e.file + " does not hold '" + e.id + "'");
  }
  return lc;
}

TrainResult train_on(const std::vector<const path::PathRecord*>& paths, double dt_corr,
                     const classifier::TrainOptions& fit, std::optional<std::uint64_t> permute_seed) {
  if (paths.empty()) throw InvalidParameter("no training paths");
  // PCA is fitted on the patterns at each path's correlation minimum, the
  // same samples whose p1 enters the regression.
  std::vector<features::StressPattern> patterns;
  std::vector<bool> branch;
  for (const auto* p : paths) {
    patterns.push_back(p->samples[classifier::argmin_correlation_sample(*p, dt_corr)].pattern);
    branch.push_back(p->label == path::Label::Branch);
  }
  // permuted labels also choose the PC1 sign, so nothing label-dependent leaks
  if (permute_seed) {
    std::mt19937_64 rng(*permute_seed);
    for (std::size_t i = branch.size(); i > 1; --i) std::swap(branch[i - 1], branch[rng() % i]);
  }
  TrainResult r;
  r.pca = features::fit_pca(patterns, branch);

  std::vector<classifier::FeatureVector> x;
  std::vector<int> y;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    x.push_back(classifier::extract_training_features(*paths[i], dt_corr, r.pca).x);
    y.push_back(branch[i] ? 1 : 0);
    r.branches += branch[i];
  }
  r.examples = x.size();
  r.params = classifier::train_logistic(x, y, fit);
  return r;
}

TrainResult train(const TrainConfig& cfg, std::ostream* log) {
  const auto lc = load_corpus(cfg.corpus);
  const auto tr = lc.corpus.train();
  auto r = train_on(tr, cfg.dt_corr, cfg.fit);
  ensure_dir(cfg.out);
  io::write_pca(cfg.out / "pca.json", r.pca);
  io::write_params(cfg.out / "params.json", r.params, cfg.dt_corr);
  if (log) {
    const auto ref = classifier::RegressionParams::reference();
    auto& o = *log;
    o << "training paths " << r.examples << " (" << r.branches << " branch)\n";
    o << std::left << std::setw(10) << "parameter" << std::right << std::setw(12) << "value" << std::setw(12)
      << "std.err" << std::setw(12) << "reference" << "\n";
    for (int k = 0; k < classifier::kParams; ++k)
      o << std::left << std::setw(10) << classifier::kParamNames[k] << std::right << std::fixed << std::setprecision(3)
        << std::setw(12) << r.params.beta[k] << std::setw(12) << r.params.standard_error[k] << std::setw(6)
        << std::setprecision(2) << ref.beta[k] << " ± " << ref.standard_error[k] << "\n";
    o << std::defaultfloat << "log-likelihood " << r.params.log_likelihood << " (null " << r.params.null_log_likelihood
      << "), " << r.params.iterations << " iterations\n";
    if (r.params.separation_warning) o << "warning: classes are separable; reporting the ridge-penalized fit\n";
  }
  return r;
}

Model load_model(const fs::path& dir) {
  Model m;
  m.pca = io::read_pca(dir / "pca.json");
  m.params = io::read_params(dir / "params.json", &m.dt_corr);
  return m;
}

std::vector<classifier::ScoredPath> score_test_paths(const std::vector<path::PathRecord>& test, const Model& m) {
  std::vector<classifier::ScoredPath> out;
  out.reserve(test.size());
  for (const auto& p : test) out.push_back(classifier::score_path(p, m.params, m.pca, m.dt_corr));
  return out;
}

EvaluationSummary summarize(const std::vector<classifier::ScoredPath>& scored, double min_tpf) {
  EvaluationSummary s;
  s.test_paths = scored.size();
  s.auc = roc_subset(scored, std::nullopt).auc;
  s.auc_forward = roc_subset(scored, path::Direction::Forward).auc;
  s.auc_reverse = roc_subset(scored, path::Direction::Reverse).auc;
  s.detection = classifier::detection_position_analysis(scored, classifier::sweep_thresholds(scored), min_tpf);
  return s;
}

EvaluationSummary evaluate(const EvaluateConfig& cfg, std::ostream* log) {
  static const std::vector<std::string> known{"", "fig4", "fig5", "fig6", "fig7", "fig8", "scatter"};
  if (std::find(known.begin(), known.end(), cfg.figure) == known.end())
    throw InvalidParameter("unknown figure '" + cfg.figure + "' (fig4 … fig8, scatter)");
  if (cfg.figure == "fig8" && !cfg.seed) throw InvalidParameter("the noise table needs --seed");

  const auto lc = load_corpus(cfg.corpus);
  const Model model = load_model(cfg.model);
  const auto test = lc.corpus.test();
  ensure_dir(cfg.out);
  const bool all = cfg.figure.empty();

  // Single-path figures.
  if (cfg.figure == "fig4" || cfg.figure == "fig5" || (all && !cfg.path_id.empty())) {
    std::vector<const path::PathRecord*> picks;
    if (!cfg.path_id.empty()) {
      picks.push_back(&find_path(test, cfg.path_id));
    } else {
      for (auto label : {path::Label::Branch, path::Label::Curve})
        for (const auto& p : test)
          if (p.label == label) {
            picks.push_back(&p);
            break;
          }
    }
    for (const auto* p : picks) {
      if (all || cfg.figure == "fig4") write_series(cfg.out / ("fig4_" + p->id + ".tsv"), *p, model.dt_corr);
      if (all || cfg.figure == "fig5")
        write_trace(cfg.out / ("fig5_" + p->id + ".tsv"),
                    classifier::online_trace(*p, model.params, model.pca, model.dt_corr));
    }
    if (!all) return {};
  }

  if (all || cfg.figure == "scatter") {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < lc.corpus.paths.size(); ++i) {
      const auto& p = lc.corpus.paths[i];
      if (p.terminal_reason == path::TerminalReason::SolverFailure) continue;
      const auto ex = classifier::extract_training_features(p, model.dt_corr, model.pca);
      rows.push_back({ex.c, ex.x.rho, ex.x.p1, ex.branch ? 1.0 : 0.0, lc.corpus.members[i].train ? 1.0 : 0.0});
    }
    io::write_table(cfg.out / "scatter.tsv", {"min_c", "rho_start", "p1_at_min", "branch", "train"}, rows);
    if (!all) return {};
  }

  const auto scored = score_test_paths(test, model);
  EvaluationSummary s = summarize(scored, cfg.min_tpf);
  if (all || cfg.figure == "fig6") {
    write_roc(cfg.out / "fig6_roc.tsv", roc_subset(scored, std::nullopt));
    write_roc(cfg.out / "fig6_roc_forward.tsv", roc_subset(scored, path::Direction::Forward));
    write_roc(cfg.out / "fig6_roc_reverse.tsv", roc_subset(scored, path::Direction::Reverse));
  }
  if (all || cfg.figure == "fig7") {
    std::vector<std::vector<double>> rows;
    for (const auto& r : s.detection.rows)
      rows.push_back({r.threshold, r.tpf, r.forward_mean, r.forward_se, static_cast<double>(r.forward_n),
                      r.reverse_mean, r.reverse_se, static_cast<double>(r.reverse_n)});
    io::write_table(cfg.out / "fig7_detection.tsv",
                    {"threshold", "tpf", "forward_mean", "forward_se", "forward_n", "reverse_mean", "reverse_se",
                     "reverse_n"},
                    rows);
  }
  if ((all || cfg.figure == "fig8") && cfg.seed) {
    s.noise = classifier::noise_study(scored, model.params, cfg.noise_levels, cfg.noise_reps, *cfg.seed, cfg.noise_target);
    write_noise(cfg.out / "fig8_noise.tsv", s.noise);
  }

  if (all) {
    io::json j;
    j["format_version"] = io::kFormatVersion;
    j["kind"] = "evaluation";
    j["test_paths"] = s.test_paths;
    j["auc"] = s.auc;
    j["auc_forward"] = s.auc_forward;
    j["auc_reverse"] = s.auc_reverse;
    j["detection_gap"] = s.detection.gap;
    j["detection_gap_thresholds"] = s.detection.gap_rows;
    j["min_tpf"] = cfg.min_tpf;
    j["dt_corr_ms"] = model.dt_corr;
    if (cfg.seed) {
      j["noise_seed"] = *cfg.seed;
      j["noise_target"] = cfg.noise_target == classifier::NoiseTarget::Lc ? "lc" : "c";
      j["noise"] = noise_json(s.noise);
    }
    write_json(cfg.out / "summary.json", j);
  }
  if (log) {
    auto& o = *log;
    o << std::fixed << std::setprecision(4) << "test paths " << s.test_paths << "\n"
      << "AUC " << s.auc << " (forward " << s.auc_forward << ", reverse " << s.auc_reverse << ")\n"
      << "detection gap " << s.detection.gap << " over " << s.detection.gap_rows << " thresholds\n";
    for (const auto& r : s.noise) o << "noise " << r.sigma << ": AUC " << r.mean_auc << " ± " << r.se << "\n";
    o << std::defaultfloat;
  }
  return s;
}

std::vector<classifier::NoiseRow> noise_study(const NoiseConfig& cfg, std::ostream* log) {
  const auto lc = load_corpus(cfg.corpus);
  const Model model = load_model(cfg.model);
  const auto scored = score_test_paths(lc.corpus.test(), model);
  auto rows = classifier::noise_study(scored, model.params, cfg.levels, cfg.reps, cfg.seed, cfg.target);
  ensure_dir(cfg.out);
  write_noise(cfg.out / "fig8_noise.tsv", rows);
  if (log)
    for (const auto& r : rows)
      *log << std::fixed << std::setprecision(4) << "noise " << r.sigma << ": AUC " << r.mean_auc << " ± " << r.se
           << "\n"
           << std::defaultfloat;
  return rows;
}

std::vector<DemoScenario> demo_scenarios() {
  DemoScenario b;
  b.name = "branch";
  b.spec.vessel = vessel::VesselSpec::branch(6.2, 6.2, deg2rad(50.0), deg2rad(-50.0));
  b.spec.u_max = 1000.0;
  b.spec.initial_y_c = 0.9;
  b.pose_time = 35.0;

  DemoScenario c;
  c.name = "curve";
  c.spec.vessel = vessel::VesselSpec::curve(7.8, deg2rad(50.0));
  c.spec.u_max = 530.0;
  c.spec.initial_y_c = 1.0;
  c.pose_time = 66.0;
  return {b, c};
}

DemoResult demo_fig1(const DemoConfig& cfg, std::ostream* log) {
  std::optional<Model> model;
  if (cfg.model) model = load_model(*cfg.model);
  const double dt_corr = model ? model->dt_corr : cfg.dt_corr;
  if (!cfg.out.empty()) ensure_dir(cfg.out);

  DemoResult res;
  io::json summary;
  summary["format_version"] = io::kFormatVersion;
  summary["kind"] = "demo-fig1";
  for (const auto& sc : demo_scenarios()) {
    const path::SimulationOptions opt;
    const stokes::VesselFlowSolver solver(path::scenario_mesh(sc.spec, opt), opt.fluid, sc.spec.u_max, opt.solver);
    DemoPose pose;
    pose.name = sc.name;
    pose.path = path::simulate_path(sc.spec, solver, opt);
    pose.path.id = "fig1-" + sc.name;
    const auto& s = pose.path.samples;
    const auto it = std::find_if(s.begin(), s.end(), [&](const path::TimedSample& x) { return std::abs(x.t - sc.pose_time) < 1e-9; });
    if (it == s.end()) throw DomainError("demo path '" + sc.name + "' ends before the highlighted pose");
    pose.sample = static_cast<std::size_t>(it - s.begin());
    pose.solution = solver.solve(it->robot, true);
    pose.speed = pose.solution.motion.velocity.norm();
    pose.omega = pose.solution.motion.angular_velocity;
    pose.max_stress = stokes::max_surface_stress(pose.solution.traction);

    if (!cfg.out.empty()) {
      const fs::path dir = cfg.out / sc.name;
      ensure_dir(dir);
      io::write_path(dir / "path.jsonl", pose.path);
      const Vec2 c = it->robot.center;
      const stokes::GridSpec grid{c - Vec2(6.0, 4.0), c + Vec2(6.0, 4.0), 49, 33};
      const std::vector<std::string> cols{"x_um", "y_um", "ux", "uy", "speed"};
      for (bool rel : {false, true}) {
        std::vector<std::vector<double>> rows;
        for (const auto& r : stokes::velocity_grid(solver, pose.solution, grid, rel))
          rows.push_back({r[0], r[1], r[2], r[3], r[4]});
        io::write_table(dir / (rel ? "field_robot_frame.tsv" : "field_lab_frame.tsv"), cols, rows);
      }
      std::vector<std::vector<double>> st;
      const auto& tr = pose.solution.traction;
      for (std::size_t i = 0; i < tr.angles.size(); ++i) {
        const double a = tr.orientation + tr.angles[i];
        const Vec2 x = c + tr.radius * Vec2(std::cos(a), std::sin(a));
        st.push_back({tr.angles[i], x.x(), x.y(), tr.stress[i].x(), tr.stress[i].y(), tr.normal(i), tr.tangential(i)});
      }
      io::write_table(dir / "stress.tsv", {"theta_rad", "x_um", "y_um", "sx_pa", "sy_pa", "normal_pa", "tangential_pa"}, st);
      write_series(dir / "correlation.tsv", pose.path, dt_corr);
      if (model)
        write_trace(dir / "pbranch.tsv", classifier::online_trace(pose.path, model->params, model->pca, dt_corr));
    }
    summary[sc.name] = {{"pose_time_ms", sc.pose_time},
                        {"x_um", it->robot.center.x()},
                        {"y_um", it->robot.center.y()},
                        {"speed_um_s", pose.speed},
                        {"omega_rad_s", pose.omega},
                        {"max_stress_pa", pose.max_stress},
                        {"initial_y_c_um", sc.spec.initial_y_c},
                        {"u_max_um_s", sc.spec.u_max}};
    if (log)
      *log << std::fixed << std::setprecision(1) << sc.name << ": t = " << sc.pose_time << " ms at ("
           << it->robot.center.x() << ", " << it->robot.center.y() << ") µm, |v| = " << pose.speed
           << " µm/s, omega = " << pose.omega << " rad/s, max stress = " << std::setprecision(3) << pose.max_stress
           << " Pa\n"
           << std::defaultfloat;
    res.poses.push_back(std::move(pose));
  }
  res.junction_correlation =
      features::max_correlation(features::encode_pattern(res.poses[0].solution.traction),
                                features::encode_pattern(res.poses[1].solution.traction))
          .c;
  summary["junction_correlation"] = res.junction_correlation;
  if (!model) summary["p_branch"] = "skipped: no model given";
  if (!cfg.out.empty()) write_json(cfg.out / "summary.json", summary);
  if (log) {
    *log << std::fixed << std::setprecision(3) << "junction stress correlation " << res.junction_correlation << "\n"
         << std::defaultfloat;
    if (!model) *log << "P_branch traces skipped (no --model)\n";
  }
  return res;
}

}  // namespace stressnav::pipeline
