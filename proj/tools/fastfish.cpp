// Copyright 2026 The fastfish Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// fastfish command line: synth, run, bench-fim, report, inspect.

#include "fastfish/bench.hpp"
#include "fastfish/harness.hpp"
#include "fastfish/report.hpp"
#include "fastfish/synthetic.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <iostream>
#include <sstream>

namespace ff = fastfish;

namespace {

struct SynthArgs {
  std::string out, test_out;
  ff::Index n = 4000, n_test = 0, d = 16;
  int k = 8;
  double sep = 3.0, noise = 0.05;
  std::uint64_t seed = 0;
};

struct BenchArgs {
  ff::Index d = 64, n = 500, reps = 1;
  std::vector<ff::Index> k{10, 50, 200};
  std::vector<std::string> kinds{"exact", "topc:2", "binary"};
  std::string out;
  std::uint64_t seed = 0;
  bool score = false;
};

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
  } else {
    ff::write_file_atomic(path, text);
  }
}

int cmd_synth(const SynthArgs& a) {
  if (a.n_test > 0 && a.test_out.empty()) throw ff::InvalidParameter("--n-test needs --test-out");
  const ff::EmbeddingDataset all = ff::gen_synthetic(a.n + a.n_test, a.d, a.k, a.sep, a.noise, a.seed);
  if (a.n_test > 0) {
    auto [train, test] = ff::split_rows(all, a.n);
    ff::write_embeddings(train, a.out);
    ff::write_embeddings(test, a.test_out);
  } else {
    ff::write_embeddings(all, a.out);
  }
  spdlog::info("wrote {} rows to {}", a.n, a.out);
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& out) {
  const ff::ExperimentConfig config = ff::read_config(config_path);
  spdlog::info("strategy {} over {} seeds", ff::strategy_id(config.strategy), config.seeds.size());
  const auto runs = ff::run_experiment(config);
  const auto records = ff::all_records(runs);
  ff::write_results(ff::results_header(config), records, out);
  std::size_t failed = 0;
  std::string first;
  for (const auto& r : runs)
    if (!r.ok()) {
      if (failed++ == 0) first = fmt::format("seed {}: {}", r.seed, r.error);
    }
  if (failed > 0) throw ff::Error("run", fmt::format("{} of {} seeds failed; {}", failed, runs.size(), first));
  return 0;
}

int cmd_bench(const BenchArgs& a) {
  ff::BenchOptions o;
  o.d = a.d;
  o.n = a.n;
  o.reps = a.reps;
  o.k_list = a.k;
  o.seed = a.seed;
  o.score = a.score;
  o.kinds.clear();
  for (const auto& s : a.kinds) o.kinds.push_back(ff::parse_fim_kind(s));
  const auto rows = ff::bench_fim(o);
  emit(a.out, ff::bench_csv(rows));
  return 0;
}

std::string curves_path(const std::string& out) {
  std::filesystem::path p(out);
  return (p.parent_path() / (p.stem().string() + ".curves.csv")).string();
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& out, std::string plot_out,
               const std::string& baseline) {
  std::vector<std::filesystem::path> paths(inputs.begin(), inputs.end());
  const ff::Summary s = ff::summarize_files(paths, baseline);
  for (const auto& w : s.warnings) spdlog::warn("{}", w);
  emit(out, ff::summary_table_csv(s));
  if (plot_out.empty() && !out.empty() && out != "-") plot_out = curves_path(out);
  if (!plot_out.empty()) emit(plot_out, ff::plot_data_csv(s));
  return 0;
}

int cmd_inspect(const std::string& path) {
  const ff::EmbeddingDataset d = ff::read_embeddings(path);
  std::vector<std::size_t> counts(static_cast<std::size_t>(d.num_classes), 0);
  for (int y : d.labels) ++counts[static_cast<std::size_t>(y)];
  const Eigen::VectorXd norms = d.features_f64().rowwise().norm();
  std::ostringstream os;
  os << "N\t" << d.size() << "\nD\t" << d.dim() << "\nK\t" << d.num_classes << "\n";
  os << "class_counts\t";
  for (std::size_t c = 0; c < counts.size(); ++c) os << (c ? "," : "") << counts[c];
  os << "\n" << fmt::format("mean_norm\t{:.6f}\n", norms.mean());
  os << "metadata\t" << d.metadata << "\n";
  const std::string text = os.str();
  std::fwrite(text.data(), 1, text.size(), stdout);
  return 0;
}

void fail(const std::string& category, const std::string& message) {
  std::string m = message;
  for (char& c : m)
    if (c == '\n' || c == '\t') c = ' ';
  std::fprintf(stderr, "error\t%s\t%s\n", category.c_str(), m.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fastfish: Fisher-based batch active learning over precomputed embeddings"};
  app.require_subcommand(1);
  app.fallthrough();
  int threads = 0;
  std::string log_level = "info";
  app.add_option("--threads", threads, "worker threads (default FASTFISH_THREADS or 1)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--log", log_level, "diagnostics on stderr")->check(CLI::IsMember({"quiet", "info", "debug"}));

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "write a synthetic Gaussian mixture");
  s->add_option("--out", synth.out, "DALB output")->required();
  s->add_option("--n", synth.n, "rows")->check(CLI::PositiveNumber);
  s->add_option("--d", synth.d, "feature dimension")->check(CLI::PositiveNumber);
  s->add_option("--k", synth.k, "classes")->check(CLI::Range(2, 1 << 20));
  s->add_option("--sep", synth.sep, "class mean separation")->check(CLI::NonNegativeNumber);
  s->add_option("--noise", synth.noise, "label flip rate")->check(CLI::Range(0.0, 1.0));
  s->add_option("--seed", synth.seed);
  s->add_option("--test-out", synth.test_out, "second DALB file for --n-test extra rows");
  s->add_option("--n-test", synth.n_test, "rows written to --test-out")->check(CLI::NonNegativeNumber);

  std::string config_path, run_out;
  auto* r = app.add_subcommand("run", "run an active learning experiment");
  r->add_option("--config", config_path, "JSON config")->required()->check(CLI::ExistingFile);
  r->add_option("--out", run_out, "JSONL results")->required();

  BenchArgs bench;
  auto* b = app.add_subcommand("bench-fim", "time per-instance Fisher construction");
  b->add_option("--d", bench.d)->check(CLI::PositiveNumber);
  b->add_option("--k", bench.k, "comma separated class counts")->delimiter(',');
  b->add_option("--kinds", bench.kinds, "comma separated Fisher kinds")->delimiter(',');
  b->add_option("--n", bench.n, "instances")->check(CLI::PositiveNumber);
  b->add_option("--reps", bench.reps)->check(CLI::PositiveNumber);
  b->add_option("--seed", bench.seed);
  b->add_option("--out", bench.out, "CSV output (stdout when omitted)");
  b->add_flag("--score", bench.score, "also time candidate gain evaluation");

  std::vector<std::string> inputs;
  std::string report_out, plot_out, baseline = "random";
  auto* p = app.add_subcommand("report", "summarize results files");
  p->add_option("--inputs", inputs, "JSONL results")->required()->check(CLI::ExistingFile);
  p->add_option("--out", report_out, "summary CSV (stdout when omitted)");
  p->add_option("--plot-out", plot_out, "curve CSV (default: <out stem>.curves.csv)");
  p->add_option("--baseline", baseline, "strategy the differences are taken against");

  std::string inspect_path;
  auto* i = app.add_subcommand("inspect", "print header and stats of a DALB file");
  i->add_option("path", inspect_path)->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    fail("usage", e.what());
    return 2;
  }

  auto logger = spdlog::stderr_color_mt("fastfish");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("%H:%M:%S %^%l%$ %v");
  spdlog::set_level(log_level == "quiet"   ? spdlog::level::err
                    : log_level == "debug" ? spdlog::level::debug
                                           : spdlog::level::info);
  if (threads == 0) threads = ff::thread_count_from_env();
  if (threads > 0) ff::set_thread_count(threads);

  try {
    if (*s) return cmd_synth(synth);
    if (*r) return cmd_run(config_path, run_out);
    if (*b) return cmd_bench(bench);
    if (*p) return cmd_report(inputs, report_out, plot_out, baseline);
    if (*i) return cmd_inspect(inspect_path);
  } catch (const ff::ConfigError& e) {
    std::string m;
    for (const auto& q : e.problems()) m += (m.empty() ? "" : "; ") + q;
    fail(e.category(), m);
    return 1;
  } catch (const ff::Error& e) {
    fail(e.category(), e.what());
    return 1;
  } catch (const std::exception& e) {
    fail("internal", e.what());
    return 1;
  }
  return 2;
}
