// stressnav: corpus generation, training, evaluation and demo scenarios.

#include "stressnav/error.hpp"
#include "stressnav/pipeline.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <string>

using namespace stressnav;
namespace fs = std::filesystem;

namespace {

// One line, tab-free, easy to split: "error kind=<kind> message=<text>".
int report(const std::string& kind, const std::string& msg, int code) {
  std::string m = msg;
  for (char& ch : m)
    if (ch == '\n' || ch == '\r' || ch == '\t') ch = ' ';
  std::cerr << "error kind=" << kind << " message=" << m << "\n";
  return code;
}

int exit_code(const std::string& kind) {
  if (kind == "invalid-parameter") return 2;
  if (kind == "format") return 3;
  if (kind == "solver" || kind == "corpus") return 4;
  return 1;
}

classifier::NoiseTarget parse_target(const std::string& s) {
  if (s == "lc") return classifier::NoiseTarget::Lc;
  if (s == "c") return classifier::NoiseTarget::Correlation;
  throw InvalidParameter("noise target must be 'lc' or 'c'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Branch detection from surface stresses of a microscopic robot in Stokes flow"};
  app.require_subcommand(1);
  const fs::path root = pipeline::default_output_root();

  // generate
  pipeline::GenerateConfig gen;
  gen.out = root / "corpus";
  bool paper_scale = false;
  std::uint64_t gen_seed = 0;
  auto* g = app.add_subcommand("generate", "Simulate a labelled corpus of branch and curve paths");
  g->add_option("--branches", gen.branches, "Branch paths")->check(CLI::Range(10, 1000000));
  g->add_option("--curves", gen.curves, "Curve paths")->check(CLI::Range(10, 1000000));
  g->add_option("--train-fraction", gen.train_fraction, "Per-class training fraction");
  g->add_option("--seed", gen_seed, "Corpus seed")->required();
  g->add_option("--jobs", gen.jobs, "Worker threads")->check(CLI::Range(1, 256));
  g->add_option("--out", gen.out, "Corpus directory");
  g->add_option("--dt", gen.simulation.dt, "Integrator step (ms)");
  g->add_option("--sample-interval", gen.simulation.sample_interval, "Recording interval (ms)");
  g->add_option("--wall-h", gen.simulation.h, "Wall element size near the junction (um)");
  g->add_flag("--paper-scale", paper_scale, "1000 + 1000 paths, 800/200 split");

  // train
  pipeline::TrainConfig tr;
  tr.corpus = root / "corpus";
  tr.out = root / "model";
  auto* t = app.add_subcommand("train", "Fit the PCA and the logistic branch model on the training split");
  t->add_option("--corpus", tr.corpus, "Corpus directory");
  t->add_option("--out", tr.out, "Model directory");
  t->add_option("--dt-corr", tr.dt_corr, "Correlation lag (ms)");

  // evaluate
  pipeline::EvaluateConfig ev;
  ev.corpus = root / "corpus";
  ev.model = root / "model";
  ev.out = root / "report";
  std::string ev_target = "lc";
  std::uint64_t ev_seed = 0;
  auto* e = app.add_subcommand("evaluate", "Score the test split and write figure tables and a summary");
  e->add_option("--corpus", ev.corpus, "Corpus directory");
  e->add_option("--model", ev.model, "Model directory");
  e->add_option("--out", ev.out, "Report directory");
  e->add_option("--figure", ev.figure, "Only one table: fig4 fig5 fig6 fig7 fig8 scatter");
  e->add_option("--path", ev.path_id, "Path id for fig4/fig5");
  auto* ev_seed_opt = e->add_option("--seed", ev_seed, "Seed for the noise table (omitted: no noise table)");
  e->add_option("--noise-levels", ev.noise_levels, "Relative noise levels");
  e->add_option("--noise-reps", ev.noise_reps, "Repetitions per level")->check(CLI::Range(1, 100000));
  e->add_option("--noise-target", ev_target, "lc (log(1-c)) or c");
  e->add_option("--min-tpf", ev.min_tpf, "Smallest true-positive fraction in the detection gap");

  // demo-fig1
  pipeline::DemoConfig demo;
  demo.out = root / "fig1";
  std::string demo_model;
  auto* d = app.add_subcommand("demo-fig1", "Run the fixed branch and curve example scenarios");
  d->add_option("--out", demo.out, "Output directory");
  d->add_option("--model", demo_model, "Model directory for the P_branch traces");
  d->add_option("--dt-corr", demo.dt_corr, "Correlation lag without a model (ms)");

  // noise-study
  pipeline::NoiseConfig nz;
  nz.corpus = root / "corpus";
  nz.model = root / "model";
  nz.out = root / "report";
  std::string nz_target = "lc";
  auto* n = app.add_subcommand("noise-study", "AUC under relative input noise");
  n->add_option("--corpus", nz.corpus, "Corpus directory");
  n->add_option("--model", nz.model, "Model directory");
  n->add_option("--out", nz.out, "Report directory");
  n->add_option("--seed", nz.seed, "Noise seed")->required();
  n->add_option("--levels", nz.levels, "Relative noise levels");
  n->add_option("--reps", nz.reps, "Repetitions per level")->check(CLI::Range(1, 100000));
  n->add_option("--noise-target", nz_target, "lc (log(1-c)) or c");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    return report("usage", ex.what(), 2);
  }

  try {
    if (g->parsed()) {
      gen.seed = gen_seed;
      if (paper_scale) {
        gen.branches = gen.curves = 1000;
        gen.train_fraction = 0.8;
      }
      pipeline::generate(gen, &std::cout);
    } else if (t->parsed()) {
      pipeline::train(tr, &std::cout);
    } else if (e->parsed()) {
      if (*ev_seed_opt) ev.seed = ev_seed;
      ev.noise_target = parse_target(ev_target);
      pipeline::evaluate(ev, &std::cout);
    } else if (d->parsed()) {
      if (!demo_model.empty()) demo.model = fs::path(demo_model);
      pipeline::demo_fig1(demo, &std::cout);
    } else if (n->parsed()) {
      nz.target = parse_target(nz_target);
      pipeline::noise_study(nz, &std::cout);
    }
  } catch (const Error& ex) {
    return report(ex.kind(), ex.what(), exit_code(ex.kind()));
  } catch (const std::exception& ex) {
    return report("internal", ex.what(), 1);
  }
  return 0;
}
