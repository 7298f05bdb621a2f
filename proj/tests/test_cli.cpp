#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "snaplab/io.hpp"

// SNAPLAB_CLI_PATH is injected by the build: the absolute path of the
// snaplab binary under test.

namespace {

namespace fs = std::filesystem;

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::string& args, const fs::path& scratch) {
  fs::create_directories(scratch);
  fs::path out_file = scratch / "stdout.txt";
  fs::path err_file = scratch / "stderr.txt";
  std::string cmd = std::string(SNAPLAB_CLI_PATH) + " " + args + " > " + out_file.string() +
                    " 2> " + err_file.string();
  int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = snap::read_file(out_file);
  r.err = snap::read_file(err_file);
  return r;
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("snaplab_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_experiment_config(const fs::path& path) {
  std::ofstream out(path);
  out << "[experiment]\n"
         "env = sparse_grid\n"
         "agent = tabular_q\n"
         "strategy = snap(1.0)\n"
         "novelty = tabular\n"
         "seeds = 1,2\n"
         "total_steps = 300\n"
         "eval_every = 150\n"
         "eval_episodes = 2\n"
         "\n"
         "[env]\n"
         "episode_length = 30\n"
         "grid_width = 6\n"
         "grid_height = 6\n"
         "start_x = 0\n"
         "start_y = 0\n"
         "goal_x = 5\n"
         "goal_y = 5\n"
         "\n"
         "[agent]\n"
         "batch = 16\n"
         "seed_frames = 48\n"
         "q_lr = 0.2\n"
         "epsilon_schedule = linear(1.0, 0.1, 250)\n";
}

TEST(CliTest, UsageErrorsExitWithTwo) {
  auto dir = fresh_dir("usage");
  EXPECT_EQ(run_cli("", dir).exit_code, 2);

  auto unknown = run_cli("frobnicate", dir);
  EXPECT_EQ(unknown.exit_code, 2);
  EXPECT_NE(unknown.err.find("Usage"), std::string::npos);

  auto badflag = run_cli("coverage --bogus 1", dir);
  EXPECT_EQ(badflag.exit_code, 2);
  EXPECT_NE(badflag.err.find("Usage"), std::string::npos);

  EXPECT_EQ(run_cli("--help", dir).exit_code, 0);
}

TEST(CliTest, MissingConfigExitsNonzeroNamingThePath) {
  auto dir = fresh_dir("missing_config");
  auto r = run_cli("train --config " + (dir / "missing.toml").string(), dir);
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("missing.toml"), std::string::npos);
}

TEST(CliTest, CoverageWritesCsvAndHeatmap) {
  auto dir = fresh_dir("coverage");
  auto out = dir / "cov";
  auto r = run_cli("coverage --strategy random --episode-len 20 --total 200 --runs 3 "
                   "--seed 5 --out " + out.string(),
                   dir);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(r.out.find("mean coverage"), std::string::npos);
  EXPECT_TRUE(fs::exists(out / "random-coverage.csv"));
  EXPECT_TRUE(fs::exists(out / "random-heatmap.svg"));
  auto csv = snap::read_file(out / "random-coverage.csv");
  EXPECT_EQ(csv.substr(0, 29), "run_id,seed,coverage_percent\n");
}

TEST(CliTest, TrainReportRoundTrip) {
  auto dir = fresh_dir("train_report");
  auto config = dir / "exp.ini";
  write_experiment_config(config);
  auto results = dir / "results";

  auto train = run_cli("train --config " + config.string() + " --out " + results.string(), dir);
  ASSERT_EQ(train.exit_code, 0) << train.err;
  for (int seed : {1, 2}) {
    fs::path run = results / ("snap-sparse_grid-seed" + std::to_string(seed));
    EXPECT_TRUE(fs::exists(run / "record.jsonl")) << run;
    EXPECT_TRUE(fs::exists(run / "repeat_probs.csv"));
    EXPECT_TRUE(fs::exists(run / "config.ini"));
    EXPECT_TRUE(fs::exists(run / "trace.csv"));
  }

  auto report = run_cli("report --dir " + results.string(), dir);
  ASSERT_EQ(report.exit_code, 0) << report.err;
  EXPECT_TRUE(fs::exists(results / "metrics.csv"));
  EXPECT_TRUE(fs::exists(results / "curves.svg"));
  auto metrics = snap::read_file(results / "metrics.csv");
  EXPECT_EQ(metrics.substr(0, 40), "strategy,median,iqm,mean,optimality_gap\n");
  EXPECT_NE(metrics.find("snap,"), std::string::npos);

  // Reports over an empty directory fail with a message.
  auto empty = dir / "empty";
  fs::create_directories(empty);
  auto bad = run_cli("report --dir " + empty.string(), dir);
  EXPECT_EQ(bad.exit_code, 1);
  EXPECT_FALSE(bad.err.empty());
}

TEST(CliTest, SeedOverrideRunsSingleSeedDeterministically) {
  auto dir = fresh_dir("seed_override");
  auto config = dir / "exp.ini";
  write_experiment_config(config);

  auto out1 = dir / "r1";
  auto out2 = dir / "r2";
  ASSERT_EQ(run_cli("train --config " + config.string() + " --seed 9 --out " + out1.string(),
                    dir).exit_code, 0);
  ASSERT_EQ(run_cli("train --config " + config.string() + " --seed 9 --out " + out2.string(),
                    dir).exit_code, 0);

  fs::path run1 = out1 / "snap-sparse_grid-seed9";
  fs::path run2 = out2 / "snap-sparse_grid-seed9";
  ASSERT_TRUE(fs::exists(run1 / "record.jsonl"));
  // Only the overridden seed ran.
  EXPECT_FALSE(fs::exists(out1 / "snap-sparse_grid-seed1"));
  EXPECT_EQ(snap::read_file(run1 / "record.jsonl"), snap::read_file(run2 / "record.jsonl"));
  EXPECT_EQ(snap::read_file(run1 / "repeat_probs.csv"),
            snap::read_file(run2 / "repeat_probs.csv"));
}

}  // namespace
