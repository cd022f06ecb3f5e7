#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "ocdl/csc.hpp"
#include "ocdl/signal_model.hpp"
#include "ocdl/types.hpp"

namespace ocdl {

// Scale- and sign-invariant waveform distance:
// sqrt(1 - <a,b>^2 / (|a|^2 |b|^2)). Zero iff collinear, one iff orthogonal.
inline double err_distance(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("err_distance: length mismatch");
  double na = a.squaredNorm(), nb = b.squaredNorm();
  if (na == 0.0 || nb == 0.0) throw std::invalid_argument("err_distance: zero-norm input");
  double ip = a.dot(b);
  double ratio = (ip * ip) / (na * nb);
  return std::sqrt(std::max(0.0, 1.0 - ratio));
}

// err_distance minimized over integer alignment shifts up to +/-(L-1)/2 and,
// for K > 1, the K sub-sample offsets in between: exactly the shift lattice a
// K-grid model can absorb into its codes, so what remains scores the waveform
// shape itself. Sign alignment is inherent to the distance.
inline double aligned_err_distance(const Vec& est, const Vec& ref, int K = 1) {
  if (est.size() != ref.size()) throw std::invalid_argument("aligned_err_distance: length mismatch");
  if (K < 1) throw std::invalid_argument("aligned_err_distance: K must be >= 1");
  const long L = est.size();
  const long M = (L - 1) / 2;
  double best = std::numeric_limits<double>::infinity();
  Vec shifted = Vec::Zero(L);
  for (int k = 0; k < K; ++k) {
    Vec base = k == 0 ? est : detail::apply_shift(est, k, K).first;
    for (long s = -M; s <= M; ++s) {
      shifted.setZero();
      if (s >= 0)
        shifted.tail(L - s) = base.head(L - s);
      else
        shifted.head(L + s) = base.tail(L + s);
      if (shifted.squaredNorm() == 0.0) continue;
      best = std::min(best, err_distance(shifted, ref));
    }
  }
  return best;
}

// 10 log10(|clean|^2 / |noise|^2); +inf for a noiseless pair.
inline double snr_db(const Vec& clean, const Vec& noise) {
  double ns = noise.squaredNorm();
  if (ns == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(clean.squaredNorm() / ns);
}

struct HitPair {
  int source = 0;
  double true_samples = 0.0;  // true event center, samples
  double est_samples = 0.0;   // estimated event center, samples
  double offset = 0.0;        // est - true
  long true_index = 0;
  long est_index = 0;
};

struct HitReport {
  std::vector<HitPair> matched;
  long unmatched_true = 0;
  long unmatched_est = 0;
  bool defined = false;      // false when nothing matched
  double average = std::numeric_limits<double>::quiet_NaN();  // mean |offset|, samples
  std::vector<double> per_source_average;  // NaN where a source has no matches
  std::vector<long> per_source_matched;
};

// Greedy one-to-one matching of estimated events to true events of the same
// source within `tolerance_samples`, nearest pairs first; reports the mean
// absolute timing offset in samples. An atom at lag n in window j has its
// center at sample j*W + n + (L-1)/2, plus k/K when sub-sample shifts count.
inline HitReport average_hit_error(const EventTrain& truth, const std::vector<SparseCode>& codes,
                                   double fs, long W, int L, double tolerance_samples,
                                   bool sub_grid) {
  if (fs <= 0.0 || W <= 0 || L < 1 || tolerance_samples < 0.0)
    throw std::invalid_argument("average_hit_error: bad parameters");

  struct Est {
    int source;
    double pos;
  };
  std::vector<Est> est;
  for (size_t j = 0; j < codes.size(); ++j) {
    long base = static_cast<long>(codes[j].window_index) * W;
    for (const auto& e : codes[j].events) {
      double pos = base + e.lag + (L - 1) / 2.0;
      if (sub_grid) pos += static_cast<double>(e.shift) / codes[j].K;
      est.push_back(Est{e.source, pos});
    }
  }

  int num_sources = 0;
  for (const auto& e : truth.events) num_sources = std::max(num_sources, e.source + 1);
  for (const auto& e : est) num_sources = std::max(num_sources, e.source + 1);

  struct Pair {
    double dist;
    long ti, ei;
  };
  std::vector<Pair> pairs;
  for (long ti = 0; ti < static_cast<long>(truth.events.size()); ++ti) {
    double tp = truth.events[ti].time * fs;
    for (long ei = 0; ei < static_cast<long>(est.size()); ++ei) {
      if (est[ei].source != truth.events[ti].source) continue;
      double d = std::abs(est[ei].pos - tp);
      if (d <= tolerance_samples) pairs.push_back(Pair{d, ti, ei});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    if (a.ti != b.ti) return a.ti < b.ti;
    return a.ei < b.ei;
  });

  HitReport report;
  report.per_source_average.assign(num_sources, std::numeric_limits<double>::quiet_NaN());
  report.per_source_matched.assign(num_sources, 0);
  std::vector<bool> true_used(truth.events.size(), false), est_used(est.size(), false);
  std::vector<double> per_source_sum(num_sources, 0.0);

  for (const auto& p : pairs) {
    if (true_used[p.ti] || est_used[p.ei]) continue;
    true_used[p.ti] = est_used[p.ei] = true;
    double tp = truth.events[p.ti].time * fs;
    report.matched.push_back(HitPair{truth.events[p.ti].source, tp, est[p.ei].pos,
                                     est[p.ei].pos - tp, p.ti, p.ei});
    per_source_sum[truth.events[p.ti].source] += p.dist;
    ++report.per_source_matched[truth.events[p.ti].source];
  }
  report.unmatched_true = static_cast<long>(std::count(true_used.begin(), true_used.end(), false));
  report.unmatched_est = static_cast<long>(std::count(est_used.begin(), est_used.end(), false));

  if (!report.matched.empty()) {
    double sum = 0.0;
    for (const auto& m : report.matched) sum += std::abs(m.offset);
    report.average = sum / static_cast<double>(report.matched.size());
    report.defined = true;
  }
  for (int c = 0; c < num_sources; ++c)
    if (report.per_source_matched[c] > 0) report.per_source_average[c] = per_source_sum[c] / report.per_source_matched[c];
  return report;
}

enum class CscMethod { cmp, comp, comp_slow, comp_interp };

inline const char* method_name(CscMethod m) {
  switch (m) {
    case CscMethod::cmp: return "cmp";
    case CscMethod::comp: return "comp";
    case CscMethod::comp_slow: return "comp-slow";
    case CscMethod::comp_interp: return "comp-interp";
  }
  return "?";
}

struct BenchPoint {
  double T = 3.0;             // seconds
  int events_per_source = 15;
};

struct BenchConfig {
  std::vector<CscMethod> methods{CscMethod::comp, CscMethod::comp_slow};
  std::vector<BenchPoint> points{BenchPoint{}};
  int trials = 10;
  double fs = 1e4;
  int L = 101;
  int K_interp = 10;
  double snr_db = 20.0;
  CorrelationBackend backend = CorrelationBackend::automatic;
  std::uint64_t seed = 0;
};

struct BenchRecord {
  CscMethod method;
  double T = 0.0;
  int events_per_source = 0;
  int total_events = 0;
  double median_seconds = 0.0;
  int trials = 0;
};

inline double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median: empty");
  std::sort(v.begin(), v.end());
  size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

// Wall-clock comparison of the sparse coders on identical synthesized inputs:
// two gamma-tone sources, the whole signal treated as a single window, the
// true event count as the sparsity cap. Serial; one discarded warmup run per
// method and point; reports the median over trials.
inline std::vector<BenchRecord> bench_csc(const BenchConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("bench_csc: trials must be >= 1");
  if (cfg.methods.empty() || cfg.points.empty()) throw std::invalid_argument("bench_csc: nothing to run");

  std::vector<ContinuousTemplate> cts{calibrate(make_gamma_tone(1), cfg.fs, cfg.L),
                                      calibrate(make_gamma_tone(2), cfg.fs, cfg.L)};
  Dictionary dict{{sample_template(cts[0], cfg.fs, cfg.L), sample_template(cts[1], cfg.fs, cfg.L)}};

  std::vector<BenchRecord> records;
  for (const auto& point : cfg.points) {
    int total = 2 * point.events_per_source;
    std::vector<Vec> inputs;
    inputs.reserve(cfg.trials);
    for (int t = 0; t < cfg.trials; ++t) {
      EventTrainConfig etc;
      etc.num_sources = 2;
      etc.events_per_source = point.events_per_source;
      etc.duration = point.T;
      etc.fs = cfg.fs;
      etc.min_gap_samples = cfg.L;
      etc.margin_samples = cfg.L;
      auto train = random_event_train(etc, derive_seed(cfg.seed, "bench-train", t));
      auto sig = synthesize(cts, train, cfg.fs, cfg.snr_db, derive_seed(cfg.seed, "bench-noise", t));
      inputs.push_back(std::move(sig.samples));
    }

    for (CscMethod method : cfg.methods) {
      CscConfig cc;
      cc.K = method == CscMethod::comp_interp ? cfg.K_interp : 1;
      cc.max_events = total;
      cc.backend = cfg.backend;
      auto run = [&](const Vec& y) {
        switch (method) {
          case CscMethod::cmp: return ocdl::cmp(y, dict, cc);
          case CscMethod::comp: return ocdl::comp(y, dict, cc);
          case CscMethod::comp_slow: return ocdl::comp_slow(y, dict, cc);
          case CscMethod::comp_interp: return ocdl::comp_interp(y, dict, cc);
        }
        throw std::logic_error("bench_csc: unknown method");
      };
      volatile double sink = run(inputs[0]).residual_norm;  // warmup, result discarded
      (void)sink;
      std::vector<double> seconds;
      seconds.reserve(cfg.trials);
      for (int t = 0; t < cfg.trials; ++t) {
        auto t0 = std::chrono::steady_clock::now();
        auto code = run(inputs[t]);
        auto t1 = std::chrono::steady_clock::now();
        sink = code.residual_norm;
        seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
      }
      records.push_back(BenchRecord{method, point.T, point.events_per_source, total,
                                    median(seconds), cfg.trials});
    }
  }
  return records;
}

}  // namespace ocdl
