#pragma once

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "ocdl/cdl.hpp"
#include "ocdl/io.hpp"

namespace ocdl {

namespace cfg {

inline json defaults() {
  return json{
      {"seed", 0},
      {"threads", 1},
      {"signal",
       {{"T", 1.0},
        {"fs", 10000.0},
        {"families", {"gamma-tone-1", "gamma-tone-2"}},
        {"templates_from", ""},
        {"events_per_source", 10},
        {"snr_db", 20.0},
        {"amp_min", 1.0},
        {"amp_max", 2.0},
        {"min_gap_samples", -1.0},
        {"margin_samples", -1},
        {"on_grid", false}}},
      {"dictionary", {{"L", 101}}},
      {"window", {{"W", 1000}}},
      {"csc",
       {{"method", "comp"},
        {"K", 1},
        {"max_events", 0},
        {"residual_threshold", 0.0},
        {"stop_at_true_count", true},
        {"selection_mode", "absolute"},
        {"backend", "auto"}}},
      {"cdl",
       {{"K", 1},
        {"max_iters", 15},
        {"convergence_tol", 1e-4},
        {"cdu_mode", "full"},
        {"init", "dataset"},
        {"init_err", 0.5}}},
      {"bench",
       {{"methods", {"comp", "comp-slow"}},
        {"durations", {3.0}},
        {"events_per_source", {15}},
        {"trials", 10},
        {"K", 10},
        {"snr_db", 20.0}}},
      {"metrics", {{"tolerance_samples", 30.0}, {"sub_grid", true}}}};
}

// Overlays user values onto the defaults; any key absent from the defaults
// tree is rejected with its full path.
inline void merge_strict(json& base, const json& user, const std::string& path) {
  if (!user.is_object()) throw std::runtime_error("config: expected an object at " + (path.empty() ? "top level" : path));
  for (const auto& [key, value] : user.items()) {
    std::string where = path.empty() ? key : path + "." + key;
    if (!base.contains(key)) throw std::runtime_error("config: unknown key '" + where + "'");
    if (base[key].is_object() && !base[key].empty())
      merge_strict(base[key], value, where);
    else
      base[key] = value;
  }
}

// Environment variables override file values: key path a.b.c maps to
// OCDL_A_B_C. Values parse as JSON when possible, else as plain strings.
inline void apply_env(json& node, const std::string& prefix) {
  for (auto& [key, value] : node.items()) {
    std::string name = prefix + "_";
    for (char ch : key) name += ch == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    if (value.is_object()) {
      apply_env(value, name);
      continue;
    }
    const char* env = std::getenv(name.c_str());
    if (!env) continue;
    try {
      value = json::parse(env);
    } catch (const json::exception&) {
      value = std::string(env);
    }
  }
}

inline json resolve(const json& user) {
  json full = defaults();
  merge_strict(full, user, "");
  apply_env(full, "OCDL");
  return full;
}

inline json resolve_file(const std::filesystem::path& config_path) {
  return resolve(config_path.empty() ? json::object() : read_json_file(config_path));
}

inline double get_snr(const json& v) {
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    throw std::runtime_error("config: snr_db must be a number or \"inf\", got '" + s + "'");
  }
  return v.get<double>();
}

inline CscMethod parse_method(const std::string& s) {
  if (s == "cmp") return CscMethod::cmp;
  if (s == "comp") return CscMethod::comp;
  if (s == "comp-slow") return CscMethod::comp_slow;
  if (s == "comp-interp") return CscMethod::comp_interp;
  throw std::runtime_error("unsupported method '" + s + "' (expected cmp, comp, comp-slow or comp-interp)");
}

inline SelectionMode parse_selection_mode(const std::string& s) {
  if (s == "absolute") return SelectionMode::absolute;
  if (s == "positive") return SelectionMode::positive;
  throw std::runtime_error("unsupported selection_mode '" + s + "' (expected absolute or positive)");
}

inline CorrelationBackend parse_backend(const std::string& s) {
  if (s == "auto") return CorrelationBackend::automatic;
  if (s == "direct") return CorrelationBackend::direct;
  if (s == "fft") return CorrelationBackend::fft;
  throw std::runtime_error("unsupported backend '" + s + "' (expected auto, direct or fft)");
}

inline CduMode parse_cdu_mode(const std::string& s) {
  if (s == "full") return CduMode::full;
  if (s == "literal") return CduMode::literal;
  throw std::runtime_error("unsupported cdu_mode '" + s + "' (expected full or literal)");
}

inline ContinuousTemplate parse_family(const std::string& s) {
  if (s == "gamma-tone-1") return make_gamma_tone(1);
  if (s == "gamma-tone-2") return make_gamma_tone(2);
  throw std::runtime_error("unsupported template family '" + s + "'");
}

}  // namespace cfg

namespace detail {

struct SourceModel {
  std::vector<ContinuousTemplate> continuous;  // calibrated
  Dictionary dict;
  double fs = 0.0;
  int L = 0;
};

inline SourceModel build_source_model(const json& c) {
  SourceModel model;
  model.fs = c.at("signal").at("fs").get<double>();
  model.L = c.at("dictionary").at("L").get<int>();
  std::string from = c.at("signal").at("templates_from").get<std::string>();
  if (!from.empty()) {
    TemplateSet set = load_templates(from);
    for (const auto& t : set.dict.templates)
      model.continuous.push_back(calibrate(make_sampled_template(t, set.fs), model.fs, model.L));
  } else {
    for (const auto& fam : c.at("signal").at("families"))
      model.continuous.push_back(calibrate(cfg::parse_family(fam.get<std::string>()), model.fs, model.L));
  }
  for (const auto& ct : model.continuous)
    model.dict.templates.push_back(sample_template(ct, model.fs, model.L));
  validate_dictionary(model.dict);
  return model;
}

inline EventTrainConfig build_train_config(const json& c, int num_sources, int L) {
  const json& s = c.at("signal");
  EventTrainConfig etc;
  etc.num_sources = num_sources;
  etc.events_per_source = s.at("events_per_source").get<int>();
  etc.duration = s.at("T").get<double>();
  etc.fs = s.at("fs").get<double>();
  etc.amp_min = s.at("amp_min").get<double>();
  etc.amp_max = s.at("amp_max").get<double>();
  double gap = s.at("min_gap_samples").get<double>();
  etc.min_gap_samples = gap < 0.0 ? 2.0 * L : gap;
  int margin = s.at("margin_samples").get<int>();
  etc.margin_samples = margin < 0 ? L : margin;
  etc.window_samples = c.at("window").at("W").get<int>();
  etc.on_grid = s.at("on_grid").get<bool>();
  return etc;
}

inline std::vector<int> true_counts_per_window(const EventTrain& train, double fs, long W, long J) {
  std::vector<int> counts(J, 0);
  for (const auto& e : train.events) {
    long j = static_cast<long>(std::floor(e.time * fs / W));
    if (j < 0 || j >= J) throw std::runtime_error("event outside the windowed span (was the dataset windowed differently?)");
    ++counts[j];
  }
  return counts;
}

inline std::string describe_code_run(const std::vector<SparseCode>& codes) {
  long events = 0;
  double err2 = 0.0;
  for (const auto& code : codes) {
    events += static_cast<long>(code.events.size());
    err2 += code.residual_norm * code.residual_norm;
  }
  std::ostringstream os;
  os << codes.size() << " windows, " << events << " events, residual " << std::sqrt(err2);
  return os.str();
}

}  // namespace detail

// --- subcommand runners; each returns a one-line summary for stdout ---------

inline std::string run_synth(const json& c, const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  auto model = detail::build_source_model(c);
  std::uint64_t seed = c.at("seed").get<std::uint64_t>();
  auto etc = detail::build_train_config(c, static_cast<int>(model.continuous.size()), model.L);
  EventTrain train = random_event_train(etc, derive_seed(seed, "train"));
  double snr = cfg::get_snr(c.at("signal").at("snr_db"));
  DiscreteSignal sig = synthesize(model.continuous, train, model.fs, snr, derive_seed(seed, "noise"));

  save_signal(out, sig);
  save_events(out / "events.csv", train);
  save_templates(out, TemplateSet{model.dict, model.fs});
  write_json_file(out / "manifest.json", c);

  DiscreteSignal clean = synthesize(model.continuous, train, model.fs,
                                    std::numeric_limits<double>::infinity(), 0);
  std::ostringstream os;
  os << "synthesized " << sig.samples.size() << " samples, " << train.events.size() << " events";
  double realized = snr_db(clean.samples, sig.samples - clean.samples);
  if (std::isfinite(realized)) os << ", realized snr " << realized << " dB";
  return os.str();
}

inline std::string run_csc(const json& c, const std::filesystem::path& data,
                           const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  DiscreteSignal sig = load_signal(data);
  TemplateSet tset = load_templates(data);
  const int L = tset.dict.length();
  const long W = c.at("window").at("W").get<long>();
  WindowedSignal ws = window(sig, static_cast<int>(W), L);
  const long J = ws.columns.cols();

  const json& sc = c.at("csc");
  CscMethod method = cfg::parse_method(sc.at("method").get<std::string>());
  CscConfig base;
  base.K = method == CscMethod::comp_interp ? sc.at("K").get<int>() : 1;
  base.max_events = sc.at("max_events").get<int>();
  base.residual_threshold = sc.at("residual_threshold").get<double>();
  base.selection_mode = cfg::parse_selection_mode(sc.at("selection_mode").get<std::string>());
  base.backend = cfg::parse_backend(sc.at("backend").get<std::string>());

  std::vector<int> per_window;
  if (sc.at("stop_at_true_count").get<bool>()) {
    double duration = sig.samples.size() / sig.fs;
    EventTrain train = load_events(data / "events.csv", duration);
    per_window = detail::true_counts_per_window(train, sig.fs, W, J);
  }

  InterpolatedDictionary bank = expand_dictionary(tset.dict, base.K);
  std::vector<SparseCode> codes(J);
  parallel_for(J, c.at("threads").get<int>(), [&](long j) {
    CscConfig wc = base;
    if (!per_window.empty()) {
      wc.max_events = per_window[j];
      if (wc.max_events == 0) {
        codes[j].window_index = static_cast<int>(j);
        codes[j].K = wc.K;
        codes[j].residual_norm = ws.columns.col(j).norm();
        return;
      }
    }
    try {
      switch (method) {
        case CscMethod::cmp: codes[j] = cmp(ws.columns.col(j), tset.dict, wc); break;
        case CscMethod::comp: codes[j] = comp(ws.columns.col(j), tset.dict, wc); break;
        case CscMethod::comp_slow: codes[j] = comp_slow(ws.columns.col(j), tset.dict, wc); break;
        case CscMethod::comp_interp: codes[j] = comp_interp(ws.columns.col(j), bank, wc); break;
      }
      codes[j].window_index = static_cast<int>(j);
    } catch (const std::exception& e) {
      throw std::runtime_error("window " + std::to_string(j) + ": " + e.what());
    }
  });

  save_codes(out, codes, W, L);
  write_json_file(out / "manifest.json", c);
  return "coded " + detail::describe_code_run(codes);
}

inline std::string run_learn(const json& c, const std::filesystem::path& data,
                             const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  DiscreteSignal sig = load_signal(data);
  TemplateSet tset = load_templates(data);
  const int L = tset.dict.length();
  const long W = c.at("window").at("W").get<long>();
  WindowedSignal ws = window(sig, static_cast<int>(W), L);
  std::uint64_t seed = c.at("seed").get<std::uint64_t>();

  const json& lc = c.at("cdl");
  CdlConfig cdl;
  cdl.csc.K = lc.at("K").get<int>();
  cdl.csc.max_events = c.at("csc").at("max_events").get<int>();
  cdl.csc.residual_threshold = c.at("csc").at("residual_threshold").get<double>();
  cdl.csc.selection_mode = cfg::parse_selection_mode(c.at("csc").at("selection_mode").get<std::string>());
  cdl.csc.backend = cfg::parse_backend(c.at("csc").at("backend").get<std::string>());
  cdl.max_iters = lc.at("max_iters").get<int>();
  cdl.convergence_tol = lc.at("convergence_tol").get<double>();
  cdl.cdu_mode = cfg::parse_cdu_mode(lc.at("cdu_mode").get<std::string>());
  cdl.threads = c.at("threads").get<int>();
  if (c.at("csc").at("stop_at_true_count").get<bool>()) {
    double duration = sig.samples.size() / sig.fs;
    EventTrain train = load_events(data / "events.csv", duration);
    cdl.per_window_max_events = detail::true_counts_per_window(train, sig.fs, W, ws.columns.cols());
    if (cdl.csc.max_events == 0 && cdl.csc.residual_threshold == 0.0) cdl.csc.max_events = 1;  // satisfies validate; overridden per window
  }

  std::string init_kind = lc.at("init").get<std::string>();
  Dictionary init;
  if (init_kind == "dataset")
    init = tset.dict;
  else if (init_kind == "perturb")
    init = perturb_templates(tset.dict, lc.at("init_err").get<double>(), derive_seed(seed, "init"));
  else
    throw std::runtime_error("unsupported cdl.init '" + init_kind + "' (expected dataset or perturb)");

  CdlResult result = run_cdl(ws.columns, init, cdl, &tset.dict);

  save_templates(out, TemplateSet{result.dictionary, sig.fs}, "learned");
  save_trace(out / "trace.csv", result.trace, result.dictionary.num_templates());
  save_codes(out, result.codes, W, L);
  write_json_file(out / "manifest.json", c);

  std::ostringstream os;
  os << "learned in " << result.trace.size() << " iterations ("
     << (result.converged ? "converged" : "max_iters") << "), " << detail::describe_code_run(result.codes);
  if (!result.trace.empty() && !result.trace.back().template_err.empty()) {
    os << ", err";
    for (double e : result.trace.back().template_err) os << " " << e;
  }
  return os.str();
}

inline std::string run_bench(const json& c, const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  const json& bc = c.at("bench");
  BenchConfig bench;
  bench.methods.clear();
  for (const auto& m : bc.at("methods")) bench.methods.push_back(cfg::parse_method(m.get<std::string>()));
  bench.points.clear();
  for (const auto& T : bc.at("durations"))
    for (const auto& e : bc.at("events_per_source"))
      bench.points.push_back(BenchPoint{T.get<double>(), e.get<int>()});
  bench.trials = bc.at("trials").get<int>();
  bench.fs = c.at("signal").at("fs").get<double>();
  bench.L = c.at("dictionary").at("L").get<int>();
  bench.K_interp = bc.at("K").get<int>();
  bench.snr_db = cfg::get_snr(bc.at("snr_db"));
  bench.backend = cfg::parse_backend(c.at("csc").at("backend").get<std::string>());
  bench.seed = c.at("seed").get<std::uint64_t>();

  auto records = bench_csc(bench);
  save_bench(out / "bench.csv", records);
  write_json_file(out / "manifest.json", c);

  std::ostringstream os;
  os << "benchmarked " << bench.methods.size() << " methods over " << bench.points.size()
     << " points, " << bench.trials << " trials each";
  return os.str();
}

inline std::string run_metrics(const json& c, const std::filesystem::path& data,
                               const std::filesystem::path& run, const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  DiscreteSignal sig = load_signal(data);
  double duration = sig.samples.size() / sig.fs;
  EventTrain train = load_events(data / "events.csv", duration);
  CodesFile codes = load_codes(run);

  const json& mc = c.at("metrics");
  HitReport report = average_hit_error(train, codes.codes, sig.fs, codes.W, codes.L,
                                       mc.at("tolerance_samples").get<double>(),
                                       mc.at("sub_grid").get<bool>());
  json j;
  j["hit"] = hit_report_json(report);

  if (std::filesystem::exists(run / "learned.json")) {
    TemplateSet truth = load_templates(data);
    TemplateSet learned = load_templates(run, "learned");
    if (learned.dict.num_templates() == truth.dict.num_templates() &&
        learned.dict.length() == truth.dict.length()) {
      json errs = json::array();
      for (int i = 0; i < truth.dict.num_templates(); ++i)
        errs.push_back(aligned_err_distance(learned.dict.templates[i].samples,
                                            truth.dict.templates[i].samples, codes.K));
      j["template_err"] = errs;
    }
  }

  write_json_file(out / "metrics.json", j);
  write_json_file(out / "manifest.json", c);

  std::ostringstream os;
  os << "matched " << report.matched.size() << " events";
  if (report.defined) os << ", average hit error " << report.average << " samples";
  os << " (" << report.unmatched_true << " true / " << report.unmatched_est << " estimated unmatched)";
  return os.str();
}

}  // namespace ocdl
