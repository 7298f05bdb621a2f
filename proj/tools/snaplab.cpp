// Command-line front end: coverage experiments, training runs, ablations and
// report aggregation. Exit codes: 0 success, 1 config/runtime errors (message
// on stderr), 2 usage errors (unknown subcommand or flag).

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "snaplab/coverage.hpp"
#include "snaplab/figures.hpp"
#include "snaplab/harness.hpp"

namespace fs = std::filesystem;

namespace {

int run_coverage_cmd(const std::string& strategy_name, int episode_len, std::int64_t total,
                     int runs, std::uint64_t seed, double alpha, std::string out) {
  auto strategy = snap::parse_coverage_strategy(strategy_name);
  if (out.empty()) out = snap::default_out_root() + "/coverage";
  snap::CoverageOptions opt;
  opt.alpha = alpha;
  auto result = snap::run_coverage(strategy, episode_len, total, runs, seed, opt);

  fs::path dir(out);
  snap::write_file_atomic(dir / (strategy_name + "-coverage.csv"), result.to_csv());
  std::vector<double> freq(result.visit_counts.begin(), result.visit_counts.end());
  snap::emit_heatmap(dir / (strategy_name + "-heatmap.svg"), freq, result.width,
                     result.height, strategy_name + " visit frequency");

  std::cout << strategy_name << ": mean coverage " << result.mean << "% (stderr "
            << result.std_error << ", " << runs << " runs)\n"
            << "wrote " << (dir / (strategy_name + "-coverage.csv")).string() << "\n";
  return 0;
}

int run_train_cmd(const std::string& config_path, std::int64_t seed_override,
                  const std::string& out_override) {
  auto cfg = snap::ExperimentConfig::from_file(config_path);
  if (seed_override >= 0) cfg.seeds = {static_cast<std::uint64_t>(seed_override)};
  if (!out_override.empty()) cfg.out_dir = out_override;
  if (cfg.out_dir.empty()) cfg.out_dir = snap::default_out_root();

  auto records = snap::run_experiment(cfg);
  for (const auto& rec : records) {
    std::cout << snap::run_dir_name(rec.strategy_name, rec.env_name, rec.seed) << ": "
              << rec.updates << " updates";
    if (!rec.evals.empty()) std::cout << ", final eval " << rec.evals.back().mean_return;
    if (rec.first_goal_step >= 0) std::cout << ", first goal at step " << rec.first_goal_step;
    std::cout << "\n";
  }
  std::cout << "wrote " << records.size() << " run directories under " << cfg.out_dir << "\n";
  return 0;
}

int run_ablate_cmd(const std::string& config_path, std::string out) {
  auto base = snap::ExperimentConfig::from_file(config_path);
  if (out.empty())
    out = base.out_dir.empty() ? snap::default_out_root() + "/ablate" : base.out_dir;

  double total = static_cast<double>(base.opts.total_steps);
  struct Variant {
    std::string label, strategy, novelty;
  };
  // Scheduler ablations replace the SNAP coin with fixed schedules; counter
  // ablations keep SNAP and swap the novelty estimator.
  std::vector<Variant> variants = {
      {"scheduler-linear", "linear(1.0, 0.1, " + std::to_string(base.opts.total_steps) + ")",
       "none"},
      {"scheduler-sigmoid",
       "sigmoid(1.0, 0.1, " + std::to_string(total / 2.0) + ", " +
           std::to_string(10.0 / total) + ")",
       "none"},
      {"counter-quantized", "snap(1.0)", "quantized(0.25)"},
      {"counter-kmeans", "snap(1.0)", "kmeans(64,0.01)"},
  };

  for (const auto& v : variants) {
    auto cfg = base;
    cfg.strategy_text = v.strategy;
    cfg.novelty = snap::NoveltySpec::parse(v.novelty);
    cfg.out_dir = (fs::path(out) / v.label).string();
    auto records = snap::run_experiment(cfg);
    double final_mean = 0.0;
    for (const auto& rec : records)
      final_mean += rec.evals.empty() ? 0.0 : rec.evals.back().mean_return;
    final_mean /= records.size();
    std::cout << v.label << ": " << records.size() << " seeds, mean final eval "
              << final_mean << "\n";
  }
  std::cout << "wrote ablation results under " << out << "\n";
  return 0;
}

int run_report_cmd(const std::string& dir_in, const std::string& out_in, double normalize) {
  std::string dir = dir_in.empty() ? snap::default_out_root() : dir_in;
  std::string out = out_in.empty() ? dir : out_in;
  auto reports = snap::report(dir, out, normalize);
  std::cout << "strategy,median,iqm,mean,optimality_gap\n";
  for (const auto& rep : reports)
    std::cout << rep.strategy << "," << rep.metrics.median << "," << rep.metrics.iqm << ","
              << rep.metrics.mean << "," << rep.metrics.optimality_gap << "\n";
  std::cout << "wrote " << (fs::path(out) / "metrics.csv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"snaplab: novelty-guided action-persistence experiments"};
  app.require_subcommand(1);

  auto* cov = app.add_subcommand("coverage", "Grid state-coverage experiment");
  std::string cov_strategy = "random";
  int cov_episode_len = 20;
  std::int64_t cov_total = 1000;
  int cov_runs = 30;
  std::uint64_t cov_seed = 1;
  double cov_alpha = 1.0;
  std::string cov_out;
  cov->add_option("--strategy", cov_strategy, "random | random-zeta | count-repeat");
  cov->add_option("--episode-len", cov_episode_len, "steps per episode (typically 20 or 100)");
  cov->add_option("--total", cov_total, "total env steps per run");
  cov->add_option("--runs", cov_runs, "independent runs (default 30)");
  cov->add_option("--seed", cov_seed, "base seed");
  cov->add_option("--alpha", cov_alpha, "count-repeat probability scale");
  cov->add_option("--out", cov_out, "output directory");

  auto* train = app.add_subcommand("train", "Training runs from a config file");
  std::string train_config;
  std::int64_t train_seed = -1;
  std::string train_out;
  train->add_option("--config", train_config, "experiment config path")->required();
  train->add_option("--seed", train_seed, "override: run only this seed");
  train->add_option("--out", train_out, "override output directory");

  auto* ablate = app.add_subcommand("ablate", "Scheduler/counter ablation sweep");
  std::string ablate_config;
  std::string ablate_out;
  ablate->add_option("--config", ablate_config, "base experiment config path")->required();
  ablate->add_option("--out", ablate_out, "output directory");

  auto* report = app.add_subcommand("report", "Aggregate metrics over a results directory");
  std::string report_dir;
  std::string report_out;
  double report_normalize = 1.0;
  report->add_option("--dir", report_dir, "results directory to aggregate");
  report->add_option("--out", report_out, "where to write metrics.csv and curves.svg");
  report->add_option("--normalize", report_normalize, "score divisor for final returns");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (cov->parsed())
      return run_coverage_cmd(cov_strategy, cov_episode_len, cov_total, cov_runs, cov_seed,
                              cov_alpha, cov_out);
    if (train->parsed()) return run_train_cmd(train_config, train_seed, train_out);
    if (ablate->parsed()) return run_ablate_cmd(ablate_config, ablate_out);
    if (report->parsed()) return run_report_cmd(report_dir, report_out, report_normalize);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
