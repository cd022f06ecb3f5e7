// Acceptance gate: one self-contained check per shipped behavior, each printing
// a single PASS/FAIL line. Run with no arguments for the full gate or with an
// index (1-8) for one criterion. Exit status is 0 iff everything passed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ocdl/cdl.hpp"
#include "ocdl/cdu.hpp"
#include "ocdl/csc.hpp"
#include "ocdl/interp.hpp"
#include "ocdl/metrics.hpp"
#include "ocdl/signal_model.hpp"

using namespace ocdl;

namespace {

constexpr std::uint64_t kMasterSeed = 20260819;

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Timer {
 public:
  Timer() : t0_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

Dictionary smooth_dictionary(int C, int L, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Dictionary dict;
  for (int c = 0; c < C; ++c) {
    Vec v(L);
    for (int i = 0; i < L; ++i) v[i] = g(rng);
    for (int pass = 0; pass < 3; ++pass) {
      Vec s = v;
      for (int i = 1; i + 1 < L; ++i) v[i] = 0.25 * s[i - 1] + 0.5 * s[i] + 0.25 * s[i + 1];
    }
    dict.templates.push_back(make_template(v));
  }
  return dict;
}

struct OracleInstance {
  InterpolatedDictionary bank;
  Vec y;
};

OracleInstance make_oracle_instance(std::uint64_t seed, int K, long W, int L, int events,
                                    double noise) {
  OracleInstance inst{expand_dictionary(smooth_dictionary(2, L, seed), K), Vec::Zero(W)};
  std::mt19937_64 rng(derive_seed(seed, "oracle-events", static_cast<std::uint64_t>(K)));
  std::uniform_int_distribution<int> lag_pick(0, static_cast<int>(W) - L);
  std::uniform_real_distribution<double> amp_pick(1.0, 2.0);
  std::vector<int> lags;
  while (static_cast<int>(lags.size()) < events) {
    int lag = lag_pick(rng);
    bool ok = true;
    for (int other : lags) ok &= std::abs(other - lag) >= 10;
    if (!ok) continue;
    lags.push_back(lag);
    inst.y.segment(lag, L) +=
        amp_pick(rng) * inst.bank.atom(static_cast<int>(rng() % 2), static_cast<int>(rng() % K)).samples;
  }
  std::normal_distribution<double> g(0.0, noise);
  for (long i = 0; i < W; ++i) inst.y[i] += g(rng);
  return inst;
}

Dictionary gamma_dictionary(int L) {
  return Dictionary{{sample_template(make_gamma_tone(1), 1e4, L),
                     sample_template(make_gamma_tone(2), 1e4, L)}};
}

std::vector<ContinuousTemplate> calibrated_gammas(int L) {
  return {calibrate(make_gamma_tone(1), 1e4, L), calibrate(make_gamma_tone(2), 1e4, L)};
}

// criterion 1 -------------------------------------------------------------

Outcome c1_oracle_equivalence() {
  Timer timer;
  const long W = 256;
  const int L = 33;
  double max_dev = 0.0;
  int instances = 0;

  for (int K : {1, 4}) {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
      OracleInstance inst = make_oracle_instance(derive_seed(kMasterSeed, "c1", seed), K, W, L, 3, 0.01);
      CscConfig cfg;
      cfg.K = K;
      cfg.max_events = 4;

      SparseCode fast = comp_interp(inst.y, inst.bank, cfg);
      SparseCode oracle = dense_omp_oracle(inst.y, build_dense_toeplitz(flatten(inst.bank), W), K, L, cfg);
      CscConfig flat_cfg = cfg;
      flat_cfg.K = 1;
      SparseCode slow = comp_slow(inst.y, flatten(inst.bank), flat_cfg);

      if (fast.events.size() != oracle.events.size() || fast.events.size() != slow.events.size())
        return {false, "support size mismatch on instance seed " + std::to_string(seed) +
                           " K " + std::to_string(K)};
      for (size_t i = 0; i < fast.events.size(); ++i) {
        const auto& f = fast.events[i];
        const auto& o = oracle.events[i];
        const auto& s = slow.events[i];
        int s_source = s.source / K, s_shift = s.source % K;  // flattened index back to (c, k)
        if (f.source != o.source || f.shift != o.shift || f.lag != o.lag ||
            s_source != o.source || s_shift != o.shift || s.lag != o.lag)
          return {false, "support mismatch on instance seed " + std::to_string(seed) +
                             " K " + std::to_string(K) + " event " + std::to_string(i)};
        max_dev = std::max(max_dev, std::abs(f.amplitude - o.amplitude));
        max_dev = std::max(max_dev, std::abs(s.amplitude - o.amplitude));
      }
      ++instances;
    }
  }

  double elapsed = timer.seconds();
  std::ostringstream os;
  os << instances << " instances agree, max amplitude deviation " << fmt(max_dev) << ", "
     << fmt(elapsed) << " s";
  return {instances == 50 && max_dev < 1e-8 && elapsed < 30.0, os.str()};
}

// criterion 2 -------------------------------------------------------------

Outcome c2_cholesky_factor() {
  Timer timer;
  CompDiagnostics diag;

  for (int K : {1, 4})
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      OracleInstance inst =
          make_oracle_instance(derive_seed(kMasterSeed, "c2", seed), K, 256, 33, 3, 0.01);
      CscConfig cfg;
      cfg.K = K;
      cfg.max_events = 4;
      comp_interp(inst.y, inst.bank, cfg, &diag);
    }

  Dictionary gam = gamma_dictionary(101);
  auto cts = calibrated_gammas(101);
  for (int K : {1, 10})
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      EventTrainConfig etc;
      etc.events_per_source = 3;
      etc.duration = 0.25;
      etc.min_gap_samples = 150;
      etc.margin_samples = 101;
      EventTrain train = random_event_train(etc, derive_seed(kMasterSeed, "c2-train", seed));
      DiscreteSignal sig = synthesize(cts, train, 1e4, 20.0, derive_seed(kMasterSeed, "c2-noise", seed));
      CscConfig cfg;
      cfg.K = K;
      cfg.max_events = 6;
      comp_interp(sig.samples, gam, cfg, &diag);
    }

  std::ostringstream os;
  os << "max |LL^T - G| = " << fmt(diag.max_factor_error) << " over " << diag.iterations
     << " iterations, " << fmt(timer.seconds()) << " s";
  return {diag.iterations > 100 && diag.max_factor_error < 1e-10, os.str()};
}

// criterion 3 -------------------------------------------------------------

Outcome c3_relative_speed() {
  Timer timer;
  BenchConfig cfg;
  cfg.methods = {CscMethod::comp, CscMethod::comp_slow, CscMethod::comp_interp};
  cfg.points = {BenchPoint{3.0, 15}};
  cfg.trials = 10;
  cfg.K_interp = 10;
  cfg.seed = derive_seed(kMasterSeed, "c3");

  auto records = bench_csc(cfg);
  double comp_med = 0.0, slow_med = 0.0, interp_med = 0.0;
  for (const auto& r : records) {
    if (r.method == CscMethod::comp) comp_med = r.median_seconds;
    if (r.method == CscMethod::comp_slow) slow_med = r.median_seconds;
    if (r.method == CscMethod::comp_interp) interp_med = r.median_seconds;
  }
  double slow_ratio = comp_med / slow_med;
  double interp_ratio = interp_med / comp_med;

  std::ostringstream os;
  os << "comp " << fmt(comp_med * 1e3) << " ms, comp-slow " << fmt(slow_med * 1e3)
     << " ms, comp-interp " << fmt(interp_med * 1e3) << " ms; comp/slow = " << fmt(slow_ratio)
     << " (need <= 0.6), interp/comp = " << fmt(interp_ratio) << " (need <= 12); "
     << fmt(timer.seconds()) << " s";
  return {slow_ratio <= 0.6 && interp_ratio <= 12.0, os.str()};
}

// criterion 4 -------------------------------------------------------------

Outcome c4_hit_error_trend() {
  Timer timer;
  const double fs = 1e4;
  const long W = 1000;
  const int L = 101;
  const std::vector<int> Ks{1, 2, 5, 10, 20};
  const int trials = 50;

  Dictionary dict = gamma_dictionary(L);
  auto cts = calibrated_gammas(L);
  std::vector<InterpolatedDictionary> banks;
  for (int K : Ks) banks.push_back(expand_dictionary(dict, K));

  std::vector<std::vector<double>> per_k_errors(Ks.size());
  for (int t = 0; t < trials; ++t) {
    EventTrainConfig etc;
    etc.events_per_source = 10;
    etc.duration = 1.0;
    etc.min_gap_samples = 2.0 * L;
    etc.margin_samples = L;
    etc.window_samples = static_cast<int>(W);
    EventTrain train = random_event_train(etc, derive_seed(kMasterSeed, "c4-train", t));
    DiscreteSignal sig = synthesize(cts, train, fs, 20.0, derive_seed(kMasterSeed, "c4-noise", t));
    WindowedSignal ws = window(sig, static_cast<int>(W), L);
    const long J = ws.columns.cols();
    std::vector<int> counts(J, 0);
    for (const auto& e : train.events) ++counts[static_cast<long>(std::floor(e.time * fs / W))];

    for (size_t ki = 0; ki < Ks.size(); ++ki) {
      std::vector<SparseCode> codes(J);
      for (long j = 0; j < J; ++j) {
        codes[j].window_index = static_cast<int>(j);
        codes[j].K = Ks[ki];
        if (counts[j] == 0) {
          codes[j].residual_norm = ws.columns.col(j).norm();
          continue;
        }
        CscConfig cc;
        cc.K = Ks[ki];
        cc.max_events = counts[j];
        codes[j] = comp_interp(ws.columns.col(j), banks[ki], cc);
        codes[j].window_index = static_cast<int>(j);
      }
      HitReport rep = average_hit_error(train, codes, fs, W, L, 30.0, true);
      if (!rep.defined) return {false, "no matches in trial " + std::to_string(t)};
      per_k_errors[ki].push_back(rep.average);
    }
  }

  std::vector<double> med(Ks.size());
  for (size_t ki = 0; ki < Ks.size(); ++ki) med[ki] = median(per_k_errors[ki]);

  bool decreasing = true;  // strict over K = 1, 2, 5, 10
  for (size_t ki = 0; ki < 3; ++ki) decreasing &= med[ki + 1] < med[ki];
  double imp_1_10 = med[0] - med[3];
  double imp_10_20 = med[3] - med[4];
  bool marginal = imp_10_20 < 0.25 * imp_1_10;

  double elapsed = timer.seconds();
  std::ostringstream os;
  os << "median hit error";
  for (size_t ki = 0; ki < Ks.size(); ++ki) os << " K" << Ks[ki] << "=" << fmt(med[ki]);
  os << "; K10->K20 improvement " << fmt(imp_10_20) << " vs 25% of K1->K10 " << fmt(0.25 * imp_1_10)
     << "; " << fmt(elapsed) << " s";
  return {decreasing && marginal && elapsed < 300.0, os.str()};
}

// criterion 5 -------------------------------------------------------------

Outcome c5_cdu_accuracy() {
  Timer timer;
  const double fs = 1e4;
  const long W = 1000;
  const int L = 101;
  const std::vector<double> snrs{8.0, 14.0, 20.0, 26.0};
  const int trials = 10;

  Dictionary truth = gamma_dictionary(L);
  auto cts = calibrated_gammas(L);

  auto final_err = [&](const Mat& windows, const std::vector<int>& counts, const Dictionary& init,
                       int K) {
    CdlConfig cdl;
    cdl.csc.K = K;
    cdl.max_iters = 15;
    cdl.convergence_tol = 1e-9;
    cdl.per_window_max_events = counts;
    cdl.csc.max_events = 1;  // placeholder, overridden per window
    CdlResult res = run_cdl(windows, init, cdl, &truth);
    const auto& errs = res.trace.back().template_err;
    return 0.5 * (errs[0] + errs[1]);
  };

  std::vector<double> mean1(snrs.size(), 0.0), mean10(snrs.size(), 0.0);
  for (size_t si = 0; si < snrs.size(); ++si) {
    for (int t = 0; t < trials; ++t) {
      std::uint64_t tag = si * 1000 + static_cast<std::uint64_t>(t);
      EventTrainConfig etc;
      etc.events_per_source = 40;
      etc.duration = 2.0;
      etc.min_gap_samples = L;
      etc.margin_samples = L;
      etc.window_samples = static_cast<int>(W);
      EventTrain train = random_event_train(etc, derive_seed(kMasterSeed, "c5-train", tag));
      DiscreteSignal sig = synthesize(cts, train, fs, snrs[si], derive_seed(kMasterSeed, "c5-noise", tag));
      WindowedSignal ws = window(sig, static_cast<int>(W), L);
      std::vector<int> counts(ws.columns.cols(), 0);
      for (const auto& e : train.events) ++counts[static_cast<long>(std::floor(e.time * fs / W))];

      Dictionary init = perturb_templates(truth, 0.5, derive_seed(kMasterSeed, "c5-init", tag));
      mean1[si] += final_err(ws.columns, counts, init, 1);
      mean10[si] += final_err(ws.columns, counts, init, 10);
    }
    mean1[si] /= trials;
    mean10[si] /= trials;
  }

  bool better_everywhere = true, accurate = true;
  for (size_t si = 0; si < snrs.size(); ++si) {
    better_everywhere &= mean10[si] < mean1[si];
    if (snrs[si] >= 14.0) accurate &= mean10[si] < 0.15;
  }

  double elapsed = timer.seconds();
  std::ostringstream os;
  os << "mean final err";
  for (size_t si = 0; si < snrs.size(); ++si)
    os << " [" << snrs[si] << "dB K1=" << fmt(mean1[si]) << " K10=" << fmt(mean10[si]) << "]";
  os << "; " << fmt(elapsed) << " s";
  return {better_everywhere && accurate && elapsed < 900.0, os.str()};
}

// criterion 6 -------------------------------------------------------------

Outcome c6_fixed_point() {
  Timer timer;
  const double fs = 1e4;
  const long W = 1000;
  const int L = 101;

  Dictionary truth = gamma_dictionary(L);
  auto cts = calibrated_gammas(L);
  EventTrainConfig etc;
  etc.events_per_source = 8;
  etc.duration = 1.0;
  etc.min_gap_samples = 2.0 * L;
  etc.margin_samples = L;
  etc.window_samples = static_cast<int>(W);
  etc.on_grid = true;
  EventTrain train = random_event_train(etc, derive_seed(kMasterSeed, "c6-train"));
  DiscreteSignal sig = synthesize(cts, train, fs, std::numeric_limits<double>::infinity(), 0);
  WindowedSignal ws = window(sig, static_cast<int>(W), L);
  std::vector<int> counts(ws.columns.cols(), 0);
  for (const auto& e : train.events) ++counts[static_cast<long>(std::floor(e.time * fs / W))];

  CdlConfig cdl;
  cdl.csc.K = 1;
  cdl.max_iters = 5;
  cdl.per_window_max_events = counts;
  cdl.csc.max_events = 1;
  CdlResult res = run_cdl(ws.columns, truth, cdl, &truth);

  double max_err = 0.0;
  for (double e : res.trace.back().template_err) max_err = std::max(max_err, e);
  HitReport rep = average_hit_error(train, res.codes, fs, W, L, 30.0, true);
  bool all_hit = rep.defined && rep.matched.size() == train.events.size() &&
                 rep.unmatched_true == 0 && rep.unmatched_est == 0;

  std::ostringstream os;
  os << res.trace.size() << " iteration(s), converged = " << (res.converged ? "yes" : "no")
     << ", max err " << fmt(max_err) << ", hit error "
     << (rep.defined ? fmt(rep.average) : std::string("undefined")) << ", " << fmt(timer.seconds())
     << " s";
  return {res.converged && res.trace.size() == 1 && max_err < 1e-6 && all_hit &&
              rep.average < 1e-9,
          os.str()};
}

// criterion 7 -------------------------------------------------------------

Outcome c7_interpolation_fidelity() {
  // Deviation against the closed-form half-sample waveform, tested under a
  // tolerance that halves as L grows (0.04 / 0.02 / 0.01 at L = 51/101/201).
  // The deviation itself drops by nine orders of magnitude from L = 51 to
  // L = 101, where the window first covers the full +-5 ms support; past
  // that point widening only appends exact zeros, so it stays at the floor
  // set by the support cutoff (~1e-12) instead of shrinking further.
  Timer timer;
  const double fs = 1e4;
  bool pass = true;
  std::ostringstream os;
  os << "max deviation";
  for (int which : {1, 2}) {
    ContinuousTemplate ct = make_gamma_tone(which);
    double dev51 = 0.0, dev101 = 0.0, dev201 = 0.0;
    for (int L : {51, 101, 201}) {
      Template base = sample_template(ct, fs, L);
      Template shifted = interpolate_template(base, 1, 2);

      Vec ref(L);
      const double center = (L - 1) / 2.0;
      for (int i = 0; i < L; ++i) ref[i] = ct((i - center - 0.5) / fs);
      ref /= ref.norm();
      double dev = (shifted.samples - ref).cwiseAbs().maxCoeff();
      (L == 51 ? dev51 : L == 101 ? dev101 : dev201) = dev;
      os << " gt" << which << "/L" << L << "=" << fmt(dev);
    }
    pass &= dev51 < 0.04 && dev101 < 0.02 && dev201 < 0.01;
    pass &= dev101 < dev51 * 1e-6;                // decrease while truncating
    pass &= dev201 <= dev101 * (1.0 + 1e-6);      // at the floor afterwards
  }
  os << " (tolerances 0.04/0.02/0.01, decrease 51->101), " << fmt(timer.seconds()) << " s";
  return {pass, os.str()};
}

// criterion 8 -------------------------------------------------------------

Outcome c8_property_suite() {
  Timer timer;
  std::vector<std::string> failures;

  // residual orthogonality on random instances
  double worst_orth = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    OracleInstance inst = make_oracle_instance(derive_seed(kMasterSeed, "c8-orth", seed), 2, 400, 33, 4, 0.05);
    CscConfig cfg;
    cfg.K = 2;
    cfg.max_events = 6;
    SparseCode code = comp_interp(inst.y, inst.bank, cfg);
    Vec r = inst.y;
    for (const auto& e : code.events)
      r.segment(e.lag, 33) -= e.amplitude * inst.bank.atom(e.source, e.shift).samples;
    for (const auto& e : code.events)
      worst_orth = std::max(worst_orth, std::abs(inst.bank.atom(e.source, e.shift).samples.dot(
                                            r.segment(e.lag, 33))) / inst.y.norm());
  }
  if (worst_orth > 1e-8) failures.push_back("orthogonality " + fmt(worst_orth));

  // residual monotonicity in the sparsity cap
  {
    OracleInstance inst = make_oracle_instance(derive_seed(kMasterSeed, "c8-mono"), 1, 400, 33, 4, 0.05);
    double prev = inst.y.norm();
    for (int cap = 1; cap <= 6; ++cap) {
      CscConfig cfg;
      cfg.max_events = cap;
      double rn = comp_interp(inst.y, inst.bank, cfg).residual_norm;
      if (rn > prev + 1e-12) failures.push_back("monotonicity at cap " + std::to_string(cap));
      prev = rn;
    }
  }

  // accumulator equals the explicit selection-matrix system
  {
    const long W = 40;
    const int L = 7;
    const int K = 3;
    std::vector<Mat> interp;
    for (int k = 0; k < K; ++k) interp.push_back(interp_matrix(k, K, L));
    std::vector<ShiftPlacement> placements{{3, 0, 1.5}, {6, 2, -0.8}, {20, 1, 2.0}, {33, 2, 1.1}};
    std::mt19937_64 rng(derive_seed(kMasterSeed, "c8-acc"));
    std::normal_distribution<double> g(0.0, 1.0);
    Vec Ej(W);
    for (long i = 0; i < W; ++i) Ej[i] = g(rng);
    for (CduMode mode : {CduMode::full, CduMode::literal}) {
      UpdateAccumulator acc(L);
      accumulate_update(acc, placements, Ej, interp, mode);
      Mat A = Mat::Zero(L, L);
      Vec b = Vec::Zero(L);
      for (const auto& pi : placements) {
        Mat Si = Mat::Zero(W, L);
        Si.block(pi.lag, 0, L, L) = Mat::Identity(L, L);
        b += pi.amplitude * (Si * interp[pi.shift]).transpose() * Ej;
        for (const auto& pm : placements) {
          if (mode == CduMode::literal && pi.shift != pm.shift) continue;
          Mat Sm = Mat::Zero(W, L);
          Sm.block(pm.lag, 0, L, L) = Mat::Identity(L, L);
          A += pi.amplitude * pm.amplitude * (Si * interp[pi.shift]).transpose() * (Sm * interp[pm.shift]);
        }
      }
      double dev = std::max((acc.A - A).cwiseAbs().maxCoeff(), (acc.b - b).cwiseAbs().maxCoeff());
      if (dev > 1e-12) failures.push_back("accumulator deviation " + fmt(dev));
    }
  }

  // err_distance axioms
  {
    std::mt19937_64 rng(derive_seed(kMasterSeed, "c8-err"));
    std::normal_distribution<double> g(0.0, 1.0);
    Vec a(16), b(16);
    for (int i = 0; i < 16; ++i) {
      a[i] = g(rng);
      b[i] = g(rng);
    }
    bool ok = err_distance(a, a) == 0.0 && err_distance(a, -a) < 1e-7 &&
              err_distance(a, 2.0 * a) < 1e-7 && err_distance(a, b) == err_distance(b, a) &&
              err_distance(a, b) >= 0.0 && err_distance(a, b) <= 1.0;
    Vec e1 = Vec::Zero(4), e2 = Vec::Zero(4);
    e1[0] = e2[1] = 1.0;
    ok &= err_distance(e1, e2) == 1.0;
    if (!ok) failures.push_back("err axioms");
  }

  // determinism: seeds reproduce and separate; threads do not matter
  {
    EventTrainConfig etc;
    etc.events_per_source = 5;
    etc.duration = 0.5;
    etc.min_gap_samples = 150;
    etc.margin_samples = 101;
    auto cts = calibrated_gammas(101);
    auto sig_for = [&](std::uint64_t seed) {
      EventTrain train = random_event_train(etc, derive_seed(seed, "d-train"));
      return synthesize(cts, train, 1e4, 20.0, derive_seed(seed, "d-noise"));
    };
    DiscreteSignal s1 = sig_for(3), s2 = sig_for(3), s3 = sig_for(4);
    if (!(s1.samples == s2.samples)) failures.push_back("seed reproducibility");
    if (s1.samples == s3.samples) failures.push_back("seed separation");

    Dictionary truth = smooth_dictionary(2, 41, derive_seed(kMasterSeed, "c8-dict"));
    Mat windows = Mat::Zero(400, 6);
    std::mt19937_64 rng(derive_seed(kMasterSeed, "c8-thread"));
    InterpolatedDictionary bank = expand_dictionary(truth, 1);
    for (long j = 0; j < 6; ++j)
      for (int i = 0; i < 3; ++i) {
        int lag = static_cast<int>(rng() % 120) + static_cast<int>(i) * 120;
        windows.col(j).segment(lag, 41) += 1.5 * bank.atom(static_cast<int>(rng() % 2), 0).samples;
      }
    CdlConfig cdl;
    cdl.csc.max_events = 3;
    cdl.max_iters = 3;
    cdl.convergence_tol = 0.0;
    Dictionary init = perturb_templates(truth, 0.3, 9);
    CdlResult one = run_cdl(windows, init, cdl);
    cdl.threads = 4;
    CdlResult four = run_cdl(windows, init, cdl);
    bool same = one.codes.size() == four.codes.size();
    for (int c = 0; same && c < 2; ++c)
      same = one.dictionary.templates[c].samples == four.dictionary.templates[c].samples;
    for (size_t j = 0; same && j < one.codes.size(); ++j) {
      same = one.codes[j].events.size() == four.codes[j].events.size();
      for (size_t i = 0; same && i < one.codes[j].events.size(); ++i)
        same = one.codes[j].events[i].lag == four.codes[j].events[i].lag &&
               one.codes[j].events[i].amplitude == four.codes[j].events[i].amplitude;
    }
    if (!same) failures.push_back("thread-count dependence");
  }

  std::ostringstream os;
  if (failures.empty())
    os << "orthogonality (worst " << fmt(worst_orth) << "), monotonicity, accumulator, err axioms, "
       << "determinism all hold, " << fmt(timer.seconds()) << " s";
  else {
    os << "failed:";
    for (const auto& f : failures) os << " " << f << ";";
  }
  return {failures.empty(), os.str()};
}

struct Criterion {
  const char* label;
  Outcome (*fn)();
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {"oracle equivalence", c1_oracle_equivalence},
      {"incremental Cholesky correctness", c2_cholesky_factor},
      {"relative solver speed", c3_relative_speed},
      {"hit-error trend over K", c4_hit_error_trend},
      {"template recovery accuracy", c5_cdu_accuracy},
      {"fixed-point sanity", c6_fixed_point},
      {"interpolation fidelity", c7_interpolation_fidelity},
      {"property suite", c8_property_suite},
  };

  int only = 0;
  if (argc > 1) {
    only = std::atoi(argv[1]);
    if (only < 1 || only > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "usage: %s [1-%zu]\n", argv[0], criteria.size());
      return 2;
    }
  }

  bool all_pass = true;
  for (size_t i = 0; i < criteria.size(); ++i) {
    if (only && static_cast<int>(i + 1) != only) continue;
    Outcome outcome;
    try {
      outcome = criteria[i].fn();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %zu: %s (%s)\n", outcome.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].label, outcome.detail.c_str());
    std::fflush(stdout);
    all_pass &= outcome.pass;
  }
  return all_pass ? 0 : 1;
}
