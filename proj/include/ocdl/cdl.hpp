#pragma once

#include <chrono>
#include <random>

#include "ocdl/cdu.hpp"
#include "ocdl/csc.hpp"
#include "ocdl/metrics.hpp"
#include "ocdl/parallel.hpp"
#include "ocdl/types.hpp"

namespace ocdl {

struct CdlConfig {
  CscConfig csc;                 // csc.K is the sub-sample refinement of the whole run
  int max_iters = 15;
  double convergence_tol = 1e-4;  // relative change of the reconstruction error
  CduMode cdu_mode = CduMode::full;
  int threads = 1;
  std::vector<int> per_window_max_events;  // optional per-window sparsity caps

  void validate(long num_windows) const {
    csc.validate();
    if (max_iters < 1) throw std::invalid_argument("cdl config: max_iters must be >= 1");
    if (convergence_tol < 0.0) throw std::invalid_argument("cdl config: negative convergence_tol");
    if (threads < 1) throw std::invalid_argument("cdl config: threads must be >= 1");
    if (!per_window_max_events.empty() &&
        static_cast<long>(per_window_max_events.size()) != num_windows)
      throw std::invalid_argument("cdl config: per_window_max_events size mismatch");
  }
};

struct CdlIteration {
  double reconstruction_error = 0.0;  // sum over windows of squared residual norms
  std::vector<double> template_err;   // aligned err against the reference, when given
  double csc_seconds = 0.0;
  double cdu_seconds = 0.0;
};

struct CdlResult {
  Dictionary dictionary;
  std::vector<SparseCode> codes;  // from the final sparse-coding pass
  std::vector<CdlIteration> trace;
  bool converged = false;
  std::vector<int> skipped_sources;  // sources whose last update was skipped
};

// Alternating sparse coding / dictionary update. Each iteration codes every
// window against the current dictionary, then refits the templates; the loop
// stops early once the reconstruction error stalls (relative change below
// convergence_tol) or hits the numerical floor.
inline CdlResult run_cdl(const Mat& windows, const Dictionary& init, const CdlConfig& cfg,
                         const Dictionary* reference = nullptr) {
  validate_dictionary(init);
  const long J = windows.cols();
  cfg.validate(J);
  if (windows.rows() <= init.length()) throw std::invalid_argument("run_cdl: windows shorter than templates");
  if (reference && (reference->num_templates() != init.num_templates() || reference->length() != init.length()))
    throw std::invalid_argument("run_cdl: reference dictionary shape mismatch");

  CdlResult result;
  result.dictionary = init;
  result.codes.assign(J, SparseCode{});

  const double energy_floor = 1e-18 * windows.squaredNorm();
  double prev_error = std::numeric_limits<double>::infinity();

  auto record_err = [&](CdlIteration& it) {
    if (!reference) return;
    it.template_err.reserve(init.num_templates());
    for (int c = 0; c < init.num_templates(); ++c)
      it.template_err.push_back(aligned_err_distance(result.dictionary.templates[c].samples,
                                                     reference->templates[c].samples, cfg.csc.K));
  };

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    CdlIteration stats;
    InterpolatedDictionary bank = expand_dictionary(result.dictionary, cfg.csc.K);

    auto t0 = std::chrono::steady_clock::now();
    parallel_for(J, cfg.threads, [&](long j) {
      CscConfig wc = cfg.csc;
      if (!cfg.per_window_max_events.empty()) {
        wc.max_events = cfg.per_window_max_events[j];
        if (wc.max_events == 0) {  // a zero cap means this window holds nothing
          result.codes[j] = SparseCode{};
          result.codes[j].window_index = static_cast<int>(j);
          result.codes[j].K = wc.K;
          result.codes[j].residual_norm = windows.col(j).norm();
          return;
        }
      }
      try {
        result.codes[j] = comp_interp(windows.col(j), bank, wc);
        result.codes[j].window_index = static_cast<int>(j);
      } catch (const std::exception& e) {
        throw std::runtime_error("run_cdl: window " + std::to_string(j) + ": " + e.what());
      }
    });
    stats.csc_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    double error = 0.0;
    for (const auto& code : result.codes) error += code.residual_norm * code.residual_norm;
    stats.reconstruction_error = error;

    bool stalled = std::abs(prev_error - error) <= cfg.convergence_tol * std::max(prev_error, 1e-300);
    if (error <= energy_floor || (iter > 0 && stalled)) {
      result.converged = true;
      record_err(stats);
      result.trace.push_back(std::move(stats));
      break;
    }
    prev_error = error;

    t0 = std::chrono::steady_clock::now();
    result.dictionary = cdu_pass(windows, result.codes, result.dictionary, cfg.csc.K, cfg.cdu_mode,
                                 &result.skipped_sources);
    stats.cdu_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    record_err(stats);
    result.trace.push_back(std::move(stats));
  }
  return result;
}

// Rotates each template inside its own span: the result has err_distance of
// exactly `target` from the original (no alignment search), unit norm, and is
// deterministic in the seed.
inline Dictionary perturb_templates(const Dictionary& dict, double target, std::uint64_t seed) {
  validate_dictionary(dict);
  if (target < 0.0 || target >= 1.0) throw std::invalid_argument("perturb_templates: target must lie in [0, 1)");
  Dictionary out = dict;
  const int L = dict.length();
  for (int c = 0; c < dict.num_templates(); ++c) {
    const Vec& h = dict.templates[c].samples;
    std::mt19937_64 rng(derive_seed(seed, "perturb", static_cast<std::uint64_t>(c)));
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec u(L);
    double norm = 0.0;
    do {
      for (int i = 0; i < L; ++i) u[i] = gauss(rng);
      u -= u.dot(h) * h;  // orthogonal component
      norm = u.norm();
    } while (norm < 1e-8);
    u /= norm;
    double theta = std::asin(target);
    out.templates[c].samples = std::cos(theta) * h + std::sin(theta) * u;
  }
  return out;
}

}  // namespace ocdl
