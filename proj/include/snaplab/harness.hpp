#pragma once

#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "snaplab/config.hpp"
#include "snaplab/coverage.hpp"
#include "snaplab/figures.hpp"
#include "snaplab/io.hpp"
#include "snaplab/metrics.hpp"
#include "snaplab/train.hpp"

namespace snap {

// Default root for result directories; overridable via the environment.
inline std::string default_out_root() {
  const char* env = std::getenv("SNAPLAB_OUT_ROOT");
  return env && *env ? env : "results";
}

// Novelty-counter selection: "none" | "tabular" | "quantized(bin)" |
// "simhash(k)" | "kmeans(k, lr)".
struct NoveltySpec {
  std::string kind = "none";
  double bin_width = 0.25;  // quantized
  int simhash_bits = 16;    // simhash
  int kmeans_k = 64;        // kmeans
  double kmeans_lr = 0.01;

  static NoveltySpec parse(const std::string& text) {
    NoveltySpec spec;
    auto open = text.find('(');
    spec.kind = open == std::string::npos ? text : text.substr(0, open);
    std::vector<double> args;
    if (open != std::string::npos) {
      auto close = text.rfind(')');
      if (close == std::string::npos || close < open)
        throw std::invalid_argument("malformed novelty string: " + text);
      std::istringstream body(text.substr(open + 1, close - open - 1));
      std::string tok;
      while (std::getline(body, tok, ',')) args.push_back(std::stod(tok));
    }
    if (spec.kind == "none" || spec.kind == "tabular") {
      if (!args.empty()) throw std::invalid_argument(spec.kind + " takes no args");
    } else if (spec.kind == "quantized") {
      if (args.size() > 1) throw std::invalid_argument("quantized takes (bin_width)");
      if (!args.empty()) spec.bin_width = args[0];
    } else if (spec.kind == "simhash") {
      if (args.size() > 1) throw std::invalid_argument("simhash takes (bits)");
      if (!args.empty()) spec.simhash_bits = static_cast<int>(args[0]);
    } else if (spec.kind == "kmeans") {
      if (args.size() > 2) throw std::invalid_argument("kmeans takes (k, lr)");
      if (!args.empty()) spec.kmeans_k = static_cast<int>(args[0]);
      if (args.size() > 1) spec.kmeans_lr = args[1];
    } else {
      throw std::invalid_argument("unknown novelty kind: " + text);
    }
    return spec;
  }

  std::string to_string() const {
    std::ostringstream out;
    if (kind == "quantized") {
      out << "quantized(" << bin_width << ")";
    } else if (kind == "simhash") {
      out << "simhash(" << simhash_bits << ")";
    } else if (kind == "kmeans") {
      out << "kmeans(" << kmeans_k << "," << kmeans_lr << ")";
    } else {
      out << kind;
    }
    return out.str();
  }

  std::optional<NoveltyEstimator> make(int state_dim, std::uint64_t seed) const {
    if (kind == "none") return std::nullopt;
    if (kind == "tabular") return NoveltyEstimator::tabular();
    if (kind == "quantized") return NoveltyEstimator::quantized(bin_width);
    if (kind == "simhash")
      return NoveltyEstimator::simhash_codes(simhash_bits, state_dim,
                                             derive_seed(seed, "novelty"));
    if (kind == "kmeans")
      return NoveltyEstimator::kmeans(kmeans_k, kmeans_lr, derive_seed(seed, "novelty"));
    throw std::invalid_argument("unknown novelty kind: " + kind);
  }
};

// One experiment = (env, agent, strategy, novelty) x seeds. Parsed from the
// plain-text config format documented in the README; every training cadence
// is an explicit key here.
struct ExperimentConfig {
  EnvConfig env;
  std::string agent = "tabular_q";
  std::string strategy_text = "none";
  NoveltySpec novelty;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  TrainOptions opts;
  AgentConfig agent_cfg;
  std::string out_dir;

  PersistenceStrategy strategy() const { return parse_strategy(strategy_text); }

  void validate() const {
    if (seeds.empty()) throw std::invalid_argument("experiment needs >= 1 seed");
    if (opts.eval_every <= 0)
      throw std::invalid_argument("eval_every must be > 0 for experiments");
    opts.validate();
    agent_cfg.validate();
    env.validate();
    parse_agent_kind(agent);
    strategy();  // rejects malformed strategy strings
    if (strategy().is<SnapParams>() && novelty.kind == "none")
      throw std::invalid_argument("snap strategy requires a novelty counter");
  }

  static ExperimentConfig from_ini(const IniConfig& ini) {
    ExperimentConfig cfg;
    const std::string X = "experiment";
    cfg.env.env_name = ini.get_or(X, "env", cfg.env.env_name);
    cfg.agent = ini.get_or(X, "agent", cfg.agent);
    cfg.strategy_text = ini.get_or(X, "strategy", cfg.strategy_text);
    cfg.novelty = NoveltySpec::parse(ini.get_or(X, "novelty", "none"));
    if (ini.has(X, "seeds")) cfg.seeds = ini.get_uint_list(X, "seeds");
    cfg.opts.total_steps = ini.get_int_or(X, "total_steps", cfg.opts.total_steps);
    // Full-scale runs evaluate every 10k steps; the desk default is 1000.
    cfg.opts.eval_every = ini.get_int_or(X, "eval_every", cfg.opts.eval_every);
    cfg.opts.eval_episodes =
        static_cast<int>(ini.get_int_or(X, "eval_episodes", cfg.opts.eval_episodes));
    std::string mode = ini.get_or(X, "count_mode", "on_minibatch");
    if (mode == "on_minibatch") {
      cfg.opts.count_mode = CountMode::on_minibatch;
    } else if (mode == "on_visit") {
      cfg.opts.count_mode = CountMode::on_visit;
    } else {
      throw std::invalid_argument("count_mode must be on_minibatch or on_visit");
    }
    cfg.out_dir = ini.get_or(X, "out_dir", "");

    const std::string E = "env";
    cfg.env.episode_length =
        static_cast<int>(ini.get_int_or(E, "episode_length", cfg.env.episode_length));
    cfg.env.grid_width = static_cast<int>(ini.get_int_or(E, "grid_width", cfg.env.grid_width));
    cfg.env.grid_height =
        static_cast<int>(ini.get_int_or(E, "grid_height", cfg.env.grid_height));
    cfg.env.start_x = static_cast<int>(ini.get_int_or(E, "start_x", cfg.env.start_x));
    cfg.env.start_y = static_cast<int>(ini.get_int_or(E, "start_y", cfg.env.start_y));
    cfg.env.goal_x = static_cast<int>(ini.get_int_or(E, "goal_x", cfg.env.goal_x));
    cfg.env.goal_y = static_cast<int>(ini.get_int_or(E, "goal_y", cfg.env.goal_y));
    cfg.env.chain_length =
        static_cast<int>(ini.get_int_or(E, "chain_length", cfg.env.chain_length));
    std::string reward = ini.get_or(E, "reward", "");
    if (reward == "none") cfg.env.reward_spec = RewardSpec::none;
    if (reward == "sparse_goal") cfg.env.reward_spec = RewardSpec::sparse_goal;
    if (reward == "dense") cfg.env.reward_spec = RewardSpec::dense;

    const std::string A = "agent";
    auto& a = cfg.agent_cfg;
    a.gamma = ini.get_double_or(A, "gamma", a.gamma);
    a.lr = ini.get_double_or(A, "lr", a.lr);
    a.batch = static_cast<int>(ini.get_int_or(A, "batch", a.batch));
    a.noise_clip = ini.get_double_or(A, "noise_clip", a.noise_clip);
    a.seed_frames = static_cast<int>(ini.get_int_or(A, "seed_frames", a.seed_frames));
    a.exploration_steps =
        static_cast<int>(ini.get_int_or(A, "exploration_steps", a.exploration_steps));
    a.entropy_alpha = ini.get_double_or(A, "entropy_alpha", a.entropy_alpha);
    a.tau = ini.get_double_or(A, "tau", a.tau);
    a.q_lr = ini.get_double_or(A, "q_lr", a.q_lr);
    a.replay_capacity =
        static_cast<std::size_t>(ini.get_int_or(A, "replay_capacity",
                                                static_cast<std::int64_t>(a.replay_capacity)));
    if (ini.has(A, "noise_schedule")) {
      auto sched = parse_schedule(ini.get(A, "noise_schedule"));
      a.noise_schedule = sched.as<LinearScheduleParams>();
    }
    if (ini.has(A, "epsilon_schedule")) {
      auto sched = parse_schedule(ini.get(A, "epsilon_schedule"));
      a.epsilon_schedule = sched.as<LinearScheduleParams>();
    }
    return cfg;
  }

  static ExperimentConfig from_file(const std::string& path) {
    return from_ini(IniConfig::load(path));
  }

  // Config snapshot written into every run directory.
  std::string to_ini_string() const {
    std::ostringstream out;
    out << "[experiment]\n";
    out << "env = " << env.env_name << "\n";
    out << "agent = " << agent << "\n";
    out << "strategy = " << strategy_text << "\n";
    out << "novelty = " << novelty.to_string() << "\n";
    out << "seeds = ";
    for (std::size_t i = 0; i < seeds.size(); ++i) out << (i ? "," : "") << seeds[i];
    out << "\n";
    out << "total_steps = " << opts.total_steps << "\n";
    out << "eval_every = " << opts.eval_every << "\n";
    out << "eval_episodes = " << opts.eval_episodes << "\n";
    out << "count_mode = "
        << (opts.count_mode == CountMode::on_minibatch ? "on_minibatch" : "on_visit") << "\n";
    out << "out_dir = " << out_dir << "\n\n";
    out << "[env]\n";
    out << "episode_length = " << env.episode_length << "\n";
    out << "grid_width = " << env.grid_width << "\n";
    out << "grid_height = " << env.grid_height << "\n";
    out << "start_x = " << env.start_x << "\n";
    out << "start_y = " << env.start_y << "\n";
    out << "goal_x = " << env.goal_x << "\n";
    out << "goal_y = " << env.goal_y << "\n";
    out << "chain_length = " << env.chain_length << "\n\n";
    out << "[agent]\n";
    out << "gamma = " << agent_cfg.gamma << "\n";
    out << "lr = " << agent_cfg.lr << "\n";
    out << "batch = " << agent_cfg.batch << "\n";
    out << "noise_clip = " << agent_cfg.noise_clip << "\n";
    out << "seed_frames = " << agent_cfg.seed_frames << "\n";
    out << "exploration_steps = " << agent_cfg.exploration_steps << "\n";
    out << "entropy_alpha = " << agent_cfg.entropy_alpha << "\n";
    out << "tau = " << agent_cfg.tau << "\n";
    out << "q_lr = " << agent_cfg.q_lr << "\n";
    return out.str();
  }
};

inline std::string run_dir_name(const std::string& strategy, const std::string& env_name,
                                std::uint64_t seed) {
  return strategy + "-" + env_name + "-seed" + std::to_string(seed);
}

// Runs the experiment for every seed and persists one directory per run:
// config.ini snapshot, record.jsonl, repeat_probs.csv and the windowed
// trace.csv. Returns the in-memory records in seed order.
inline std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg,
                                             std::size_t trace_window = 1000) {
  cfg.validate();
  std::filesystem::path out_root = cfg.out_dir.empty() ? default_out_root() : cfg.out_dir;
  auto kind = parse_agent_kind(cfg.agent);
  auto strategy = cfg.strategy();

  std::vector<RunRecord> records;
  for (auto seed : cfg.seeds) {
    auto env = make_env(cfg.env);
    auto novelty = cfg.novelty.make(env->state_dim(), seed);
    auto rec = train_snap(*env, kind, strategy, novelty ? &*novelty : nullptr,
                          cfg.agent_cfg, cfg.opts, seed);

    std::filesystem::path dir =
        out_root / run_dir_name(strategy.name(), cfg.env.env_name, seed);
    write_file_atomic(dir / "config.ini", cfg.to_ini_string());
    write_file_atomic(dir / "record.jsonl", rec.to_jsonl());
    write_file_atomic(dir / "repeat_probs.csv", rec.repeat_probs_csv());

    std::ostringstream trace;
    trace << "step,mean_p\n";
    for (const auto& pt : probability_trace(rec.repeat_probs, trace_window))
      trace << pt.step << "," << nlohmann::json(pt.mean_p).dump() << "\n";
    write_file_atomic(dir / "trace.csv", trace.str());

    records.push_back(std::move(rec));
  }
  return records;
}

// One strategy's aggregated evaluation data inside a results directory.
struct StrategyReport {
  std::string strategy;
  std::vector<double> final_scores;  // per seed, normalized
  std::vector<double> eval_steps;
  std::vector<double> eval_means;    // across seeds, per eval step
  std::vector<double> eval_stderrs;
  MetricsSummary metrics;
};

namespace detail {

struct ParsedRun {
  std::string strategy;
  std::vector<std::pair<std::int64_t, double>> evals;  // (step, mean_return)
};

inline ParsedRun parse_record_jsonl(const std::filesystem::path& path) {
  ParsedRun run;
  std::istringstream in(read_file(path));
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    if (first) {
      run.strategy = j.at("strategy").get<std::string>();
      first = false;
    } else {
      run.evals.emplace_back(j.at("step").get<std::int64_t>(),
                             j.at("mean_return").get<double>());
    }
  }
  if (first) throw std::runtime_error("empty record: " + path.string());
  return run;
}

}  // namespace detail

// Aggregates all run directories under `results_dir` by strategy: metrics.csv
// (one row per strategy) plus curves.svg with mean +- stderr across seeds.
// Scores are final evaluation means divided by `normalize`.
inline std::vector<StrategyReport> report(const std::filesystem::path& results_dir,
                                          const std::filesystem::path& out_dir,
                                          double normalize = 1.0) {
  if (!(normalize > 0.0)) throw std::invalid_argument("normalize must be > 0");
  if (!std::filesystem::is_directory(results_dir))
    throw std::runtime_error("results directory not found: " + results_dir.string());

  std::map<std::string, std::vector<detail::ParsedRun>> by_strategy;
  for (const auto& entry : std::filesystem::directory_iterator(results_dir)) {
    if (!entry.is_directory()) continue;
    auto record = entry.path() / "record.jsonl";
    if (!std::filesystem::exists(record)) continue;
    auto run = detail::parse_record_jsonl(record);
    by_strategy[run.strategy].push_back(std::move(run));
  }
  if (by_strategy.empty())
    throw std::runtime_error("no run records under " + results_dir.string());

  std::vector<StrategyReport> reports;
  std::vector<CurveSeries> curves;
  std::ostringstream csv;
  csv << "strategy,median,iqm,mean,optimality_gap\n";
  for (auto& [name, runs] : by_strategy) {
    StrategyReport rep;
    rep.strategy = name;
    std::size_t n_evals = 0;
    for (const auto& r : runs) n_evals = std::max(n_evals, r.evals.size());
    for (std::size_t i = 0; i < n_evals; ++i) {
      double sum = 0.0, sq = 0.0;
      int n = 0;
      std::int64_t step = 0;
      for (const auto& r : runs) {
        if (i >= r.evals.size()) continue;
        step = r.evals[i].first;
        sum += r.evals[i].second;
        ++n;
      }
      double mean = sum / n;
      for (const auto& r : runs) {
        if (i >= r.evals.size()) continue;
        sq += (r.evals[i].second - mean) * (r.evals[i].second - mean);
      }
      double se = n > 1 ? std::sqrt(sq / (n - 1)) / std::sqrt(static_cast<double>(n)) : 0.0;
      rep.eval_steps.push_back(static_cast<double>(step));
      rep.eval_means.push_back(mean);
      rep.eval_stderrs.push_back(se);
    }
    for (const auto& r : runs) {
      if (r.evals.empty())
        throw std::runtime_error("run for strategy " + name + " has no evaluation points");
      rep.final_scores.push_back(r.evals.back().second / normalize);
    }
    rep.metrics = aggregate_metrics(rep.final_scores);
    csv << name << "," << nlohmann::json(rep.metrics.median).dump() << ","
        << nlohmann::json(rep.metrics.iqm).dump() << ","
        << nlohmann::json(rep.metrics.mean).dump() << ","
        << nlohmann::json(rep.metrics.optimality_gap).dump() << "\n";
    if (!rep.eval_steps.empty())
      curves.push_back({name, rep.eval_steps, rep.eval_means, rep.eval_stderrs});
    reports.push_back(std::move(rep));
  }

  write_file_atomic(out_dir / "metrics.csv", csv.str());
  if (!curves.empty())
    emit_curves(out_dir / "curves.svg", curves, "evaluation return", "step", "mean return");
  return reports;
}

}  // namespace snap
