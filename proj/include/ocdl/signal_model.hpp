#pragma once

#include <cmath>
#include <random>

#include "ocdl/types.hpp"

namespace ocdl {

// Normalized sinc: sin(pi u) / (pi u). Exact 1/0 at integer u so that
// degenerate interpolators reduce to identities without roundoff.
inline double sinc(double u) {
  double r = std::nearbyint(u);
  if (u == r) return u == 0.0 ? 1.0 : 0.0;
  double pu = M_PI * u;
  return std::sin(pu) / pu;
}

enum class TemplateFamily { gamma_tone_1, gamma_tone_2, sampled };

// A waveform defined on continuous time, zero outside [-support, support].
// The two gamma-tone families are closed forms; `sampled` interpolates a
// stored sample grid band-limitedly.
struct ContinuousTemplate {
  TemplateFamily kind = TemplateFamily::gamma_tone_1;
  double support = 5e-3;  // half-width, seconds
  double scale = 1.0;
  Vec samples;            // sampled kind only, centered grid
  double sample_fs = 0.0; // sampled kind only

  double operator()(double t) const {
    if (std::abs(t) > support) return 0.0;
    switch (kind) {
      case TemplateFamily::gamma_tone_1: {
        double u = 1e3 * t;
        return scale * u * std::exp(-u * u) * std::cos(M_PI / 2.0 * u);
      }
      case TemplateFamily::gamma_tone_2: {
        double u = 1e3 * t;
        return scale * u * std::exp(-u * u);
      }
      case TemplateFamily::sampled: {
        int Ls = static_cast<int>(samples.size());
        double center = (Ls - 1) / 2.0;
        double acc = 0.0;
        for (int m = 0; m < Ls; ++m) acc += samples[m] * sinc(t * sample_fs - (m - center));
        return scale * acc;
      }
    }
    return 0.0;
  }
};

inline ContinuousTemplate make_gamma_tone(int which) {
  if (which != 1 && which != 2) throw std::invalid_argument("gamma tone: which must be 1 or 2");
  ContinuousTemplate ct;
  ct.kind = which == 1 ? TemplateFamily::gamma_tone_1 : TemplateFamily::gamma_tone_2;
  return ct;
}

inline ContinuousTemplate make_sampled_template(const Template& t, double fs) {
  if (fs <= 0.0) throw std::invalid_argument("sampled template: fs must be positive");
  if (t.length() % 2 == 0) throw std::invalid_argument("sampled template: length must be odd");
  ContinuousTemplate ct;
  ct.kind = TemplateFamily::sampled;
  ct.samples = t.samples;
  ct.sample_fs = fs;
  ct.support = (t.length() - 1) / 2.0 / fs;
  return ct;
}

// Sample on the centered grid t_n = (n - (L-1)/2) / fs and normalize.
inline Template sample_template(const ContinuousTemplate& ct, double fs, int L) {
  if (L < 1 || L % 2 == 0) throw std::invalid_argument("sample_template: L must be odd and positive");
  if (fs <= 0.0) throw std::invalid_argument("sample_template: fs must be positive");
  int center = (L - 1) / 2;
  Vec v(L);
  for (int n = 0; n < L; ++n) v[n] = ct((n - center) / fs);
  return make_template(std::move(v));
}

// Rescale so that sampling at (fs, L) already has unit norm; synthesis
// amplitudes then coincide with coefficients on the normalized sampled atoms.
inline ContinuousTemplate calibrate(ContinuousTemplate ct, double fs, int L) {
  if (L < 1 || L % 2 == 0) throw std::invalid_argument("calibrate: L must be odd and positive");
  int center = (L - 1) / 2;
  double sq = 0.0;
  for (int n = 0; n < L; ++n) {
    double v = ct((n - center) / fs);
    sq += v * v;
  }
  if (sq == 0.0) throw std::invalid_argument("calibrate: template has zero energy on the grid");
  ct.scale /= std::sqrt(sq);
  return ct;
}

struct Event {
  int source = 0;
  double time = 0.0;       // seconds, in (0, duration]
  double amplitude = 0.0;  // positive
};

struct EventTrain {
  std::vector<Event> events;
  double duration = 0.0;  // seconds
};

inline void validate_event_train(const EventTrain& train, int num_sources) {
  if (train.duration <= 0.0) throw std::invalid_argument("event train: duration must be positive");
  for (const auto& e : train.events) {
    if (e.source < 0 || e.source >= num_sources) throw std::invalid_argument("event train: source out of range");
    if (e.time <= 0.0 || e.time > train.duration) throw std::invalid_argument("event train: time outside (0, T]");
    if (e.amplitude <= 0.0) throw std::invalid_argument("event train: amplitude must be positive");
  }
}

struct EventTrainConfig {
  int num_sources = 2;
  int events_per_source = 10;
  double duration = 1.0;       // seconds
  double fs = 1e4;
  double amp_min = 1.0;
  double amp_max = 2.0;
  double min_gap_samples = 0.0;  // minimum spacing between any two events, samples
  int margin_samples = 0;        // keep-out from window (or signal) boundaries
  int window_samples = 0;        // 0: margins apply to the signal edges only
  bool on_grid = false;          // snap times to the sampling grid
};

inline void validate(const EventTrainConfig& cfg) {
  if (cfg.num_sources < 1) throw std::invalid_argument("event train config: num_sources < 1");
  if (cfg.events_per_source < 0) throw std::invalid_argument("event train config: negative event count");
  if (cfg.duration <= 0.0 || cfg.fs <= 0.0) throw std::invalid_argument("event train config: duration and fs must be positive");
  if (cfg.amp_min <= 0.0 || cfg.amp_max < cfg.amp_min) throw std::invalid_argument("event train config: bad amplitude range");
  if (cfg.min_gap_samples < 0.0 || cfg.margin_samples < 0) throw std::invalid_argument("event train config: negative gap or margin");
  if (cfg.window_samples < 0) throw std::invalid_argument("event train config: negative window length");
  if (cfg.window_samples > 0 && cfg.window_samples <= 2 * cfg.margin_samples)
    throw std::invalid_argument("event train config: window too short for margins");
}

// Rejection-sample an event train satisfying margins and pairwise spacing.
// Throws when the packing cannot be realized within a bounded attempt budget.
inline EventTrain random_event_train(const EventTrainConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> amp(cfg.amp_min, cfg.amp_max);

  const long N = static_cast<long>(cfg.duration * cfg.fs);
  const long W = cfg.window_samples;
  const long J = W > 0 ? N / W : 0;
  if (W > 0 && J == 0) throw std::invalid_argument("event train config: window longer than signal");

  EventTrain train;
  train.duration = cfg.duration;
  const long total = static_cast<long>(cfg.num_sources) * cfg.events_per_source;
  long attempts_left = 1000 * (total + 1);

  for (int c = 0; c < cfg.num_sources; ++c) {
    for (int i = 0; i < cfg.events_per_source; ++i) {
      while (true) {
        if (--attempts_left < 0) throw std::runtime_error("random_event_train: packing infeasible (gap/margin too large for duration)");
        double tau = cfg.duration * (1.0 - unit(rng));
        if (cfg.on_grid) tau = std::nearbyint(tau * cfg.fs) / cfg.fs;
        double p = tau * cfg.fs;  // sample position of the event center
        if (W > 0) {
          long j = static_cast<long>(std::floor(p / W));
          if (j < 0 || j >= J) continue;
          double local = p - static_cast<double>(j) * W;
          if (local < cfg.margin_samples || local > W - cfg.margin_samples) continue;
        } else {
          if (p < cfg.margin_samples || p > N - cfg.margin_samples) continue;
        }
        bool clash = false;
        for (const auto& e : train.events)
          if (std::abs(e.time - tau) * cfg.fs < cfg.min_gap_samples) { clash = true; break; }
        if (clash) continue;
        train.events.push_back(Event{c, tau, amp(rng)});
        break;
      }
    }
  }
  return train;
}

struct DiscreteSignal {
  Vec samples;  // samples[i] = y(i / fs)
  double fs = 0.0;
};

// Render events through their continuous templates and add white Gaussian
// noise at the requested SNR (infinity for a noiseless signal).
inline DiscreteSignal synthesize(const std::vector<ContinuousTemplate>& templates, const EventTrain& train,
                                 double fs, double snr_db, std::uint64_t seed) {
  if (fs <= 0.0) throw std::invalid_argument("synthesize: fs must be positive");
  validate_event_train(train, static_cast<int>(templates.size()));
  const long N = static_cast<long>(train.duration * fs);
  if (N < 1) throw std::invalid_argument("synthesize: signal shorter than one sample");

  Vec clean = Vec::Zero(N);
  for (const auto& e : train.events) {
    const auto& ct = templates[e.source];
    long lo = static_cast<long>(std::ceil((e.time - ct.support) * fs));
    long hi = static_cast<long>(std::floor((e.time + ct.support) * fs));
    lo = std::max(lo, 0L);
    hi = std::min(hi, N - 1);
    for (long i = lo; i <= hi; ++i) clean[i] += e.amplitude * ct(i / fs - e.time);
  }

  DiscreteSignal out{clean, fs};
  if (!std::isinf(snr_db)) {
    double sigma2 = clean.squaredNorm() / (static_cast<double>(N) * std::pow(10.0, snr_db / 10.0));
    if (sigma2 > 0.0) {
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> noise(0.0, std::sqrt(sigma2));
      for (long i = 0; i < N; ++i) out.samples[i] += noise(rng);
    }
  }
  return out;
}

struct WindowedSignal {
  Mat columns;      // W x J, one window per column
  long dropped = 0; // trailing samples not covered by a full window
};

// Split into J = floor(N / W) non-overlapping windows of length W.
inline WindowedSignal window(const DiscreteSignal& sig, int W, int template_length) {
  const long N = sig.samples.size();
  if (W <= template_length) throw std::invalid_argument("window: W must exceed the template length");
  const long J = N / W;
  if (J < 1) throw std::invalid_argument("window: signal shorter than one window");
  WindowedSignal out;
  out.columns = Mat(W, J);
  for (long j = 0; j < J; ++j) out.columns.col(j) = sig.samples.segment(j * W, W);
  out.dropped = N - J * W;
  return out;
}

// Dense block-Toeplitz dictionary: column c * (N - L + 1) + d places template c
// at lag d. Reference construction for small problems only.
inline Mat build_dense_toeplitz(const Dictionary& dict, long N) {
  validate_dictionary(dict);
  const int L = dict.length();
  if (N < L) throw std::invalid_argument("build_dense_toeplitz: N < L");
  const long lags = N - L + 1;
  Mat H = Mat::Zero(N, dict.num_templates() * lags);
  for (int c = 0; c < dict.num_templates(); ++c)
    for (long d = 0; d < lags; ++d) H.col(c * lags + d).segment(d, L) = dict.templates[c].samples;
  return H;
}

}  // namespace ocdl
