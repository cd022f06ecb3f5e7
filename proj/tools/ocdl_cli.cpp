#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "ocdl/experiment.hpp"

namespace {

struct CommonArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_threads) {
  cmd->add_option("--config", args.config, "JSON config file (defaults apply when omitted)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out, "output directory")->required();
  cmd->add_option("--seed", args.seed, "override the master seed");
  if (with_threads) cmd->add_option("--threads", args.threads, "worker threads for window processing");
}

ocdl::json resolve(const CommonArgs& args) {
  ocdl::json c = ocdl::cfg::resolve_file(args.config);
  if (args.seed) c["seed"] = *args.seed;
  if (args.threads) c["threads"] = *args.threads;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"convolutional dictionary learning with sub-sample event times"};
  app.require_subcommand(1);

  CommonArgs synth_args;
  auto* synth = app.add_subcommand("synth", "synthesize a dataset (signal, events, templates)");
  add_common(synth, synth_args, false);

  CommonArgs csc_args;
  std::string csc_data, csc_method;
  std::optional<int> csc_K;
  auto* csc = app.add_subcommand("csc", "sparse-code a dataset with a fixed dictionary");
  add_common(csc, csc_args, true);
  csc->add_option("--data", csc_data, "dataset directory (from synth)")->required();
  csc->add_option("--method", csc_method, "cmp, comp, comp-slow or comp-interp");
  csc->add_option("--K", csc_K, "sub-sample refinement for comp-interp");

  CommonArgs learn_args;
  std::string learn_data;
  std::optional<int> learn_K;
  auto* learn = app.add_subcommand("learn", "run dictionary learning on a dataset");
  add_common(learn, learn_args, true);
  learn->add_option("--data", learn_data, "dataset directory (from synth)")->required();
  learn->add_option("--K", learn_K, "sub-sample refinement of the learning run");

  CommonArgs bench_args;
  auto* bench = app.add_subcommand("bench", "time the sparse coders on synthesized inputs");
  add_common(bench, bench_args, false);

  CommonArgs metrics_args;
  std::string metrics_data, metrics_run;
  auto* metrics = app.add_subcommand("metrics", "score stored codes against the true events");
  add_common(metrics, metrics_args, false);
  metrics->add_option("--data", metrics_data, "dataset directory (from synth)")->required();
  metrics->add_option("--run", metrics_run, "run directory holding codes (from csc or learn)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    std::string summary;
    if (synth->parsed()) {
      summary = ocdl::run_synth(resolve(synth_args), synth_args.out);
    } else if (csc->parsed()) {
      ocdl::json c = resolve(csc_args);
      if (!csc_method.empty()) c["csc"]["method"] = csc_method;
      if (csc_K) c["csc"]["K"] = *csc_K;
      summary = ocdl::run_csc(c, csc_data, csc_args.out);
    } else if (learn->parsed()) {
      ocdl::json c = resolve(learn_args);
      if (learn_K) c["cdl"]["K"] = *learn_K;
      summary = ocdl::run_learn(c, learn_data, learn_args.out);
    } else if (bench->parsed()) {
      summary = ocdl::run_bench(resolve(bench_args), bench_args.out);
    } else if (metrics->parsed()) {
      summary = ocdl::run_metrics(resolve(metrics_args), metrics_data, metrics_run, metrics_args.out);
    }
    std::cout << summary << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
