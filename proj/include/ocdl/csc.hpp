#pragma once

#include <unsupported/Eigen/FFT>

#include <complex>
#include <map>
#include <optional>
#include <tuple>

#include "ocdl/interp.hpp"
#include "ocdl/types.hpp"

namespace ocdl {

// Identifies one placed atom: source template c, sub-sample shift k, lag n
// (0-based offset of the atom's first sample inside the window).
struct AtomKey {
  int source = 0;
  int shift = 0;
  int lag = 0;

  friend bool operator==(const AtomKey&, const AtomKey&) = default;
  friend auto operator<=>(const AtomKey&, const AtomKey&) = default;
};

struct CodeEvent {
  int source = 0;
  int shift = 0;
  int lag = 0;
  double amplitude = 0.0;
};

struct SparseCode {
  std::vector<CodeEvent> events;
  int window_index = 0;
  int K = 1;
  double residual_norm = 0.0;
  int iterations = 0;
  bool selection_exhausted = false;  // stopped because no candidate was usable
};

enum class SelectionMode { absolute, positive };
enum class CorrelationBackend { automatic, direct, fft };

struct CscConfig {
  int K = 1;
  int max_events = 0;               // 0: no sparsity cap
  double residual_threshold = 0.0;  // 0: no energy stop (a tiny numerical floor always applies)
  SelectionMode selection_mode = SelectionMode::absolute;
  CorrelationBackend backend = CorrelationBackend::automatic;

  void validate() const {
    if (K < 1) throw std::invalid_argument("csc config: K must be >= 1");
    if (max_events < 0 || residual_threshold < 0.0)
      throw std::invalid_argument("csc config: negative stopping parameter");
    if (max_events == 0 && residual_threshold == 0.0)
      throw std::invalid_argument("csc config: need max_events or residual_threshold");
  }
};

// Optional per-run instrumentation for the OMP solvers.
struct CompDiagnostics {
  long iterations = 0;
  long rejections = 0;          // candidates refused by the Cholesky test
  double max_factor_error = 0.0;  // max |L L^T - Gram| over all iterations
};

// Sliding correlation of equal-length templates: corr(a, b)[delta] =
// sum_j a[j] b[j + delta], zero once |delta| >= L.
inline double template_corr(const Vec& a, const Vec& b, long delta) {
  const long L = a.size();
  if (b.size() != L) throw std::invalid_argument("template_corr: length mismatch");
  if (delta >= L || delta <= -L) return 0.0;
  if (delta >= 0) return a.head(L - delta).dot(b.tail(L - delta));
  return a.tail(L + delta).dot(b.head(L + delta));
}

// Inner product of two zero-padded placed atoms.
inline double gram_entry(const InterpolatedDictionary& bank, const AtomKey& a, const AtomKey& b) {
  return template_corr(bank.atom(a.source, a.shift).samples, bank.atom(b.source, b.shift).samples,
                       a.lag - b.lag);
}

// Lower-triangular Cholesky factor of the active set's Gram matrix.
struct CholeskyState {
  Mat factor;  // t x t

  int size() const { return static_cast<int>(factor.rows()); }
};

// Rank-one Cholesky extension. Returns nothing when the candidate is too close
// to the active span (diagonal pivot below tolerance).
inline std::optional<CholeskyState> cholesky_extend(const CholeskyState& state,
                                                    const std::vector<AtomKey>& active,
                                                    const AtomKey& next,
                                                    const InterpolatedDictionary& bank) {
  const int t = state.size();
  if (static_cast<int>(active.size()) != t) throw std::invalid_argument("cholesky_extend: active set size mismatch");
  Vec v(t);
  for (int i = 0; i < t; ++i) v[i] = gram_entry(bank, active[i], next);
  Vec w = t > 0 ? Vec(state.factor.triangularView<Eigen::Lower>().solve(v)) : Vec(0);
  double pivot = 1.0 - w.squaredNorm();
  if (pivot <= 1e-12) return std::nullopt;
  CholeskyState out;
  out.factor = Mat::Zero(t + 1, t + 1);
  out.factor.topLeftCorner(t, t) = state.factor;
  out.factor.row(t).head(t) = w.transpose();
  out.factor(t, t) = std::sqrt(pivot);
  return out;
}

// Least-squares amplitudes of the active atoms against y via the factor.
inline Vec solve_coefficients(const CholeskyState& state, const std::vector<AtomKey>& active,
                              const Vec& y, const InterpolatedDictionary& bank) {
  const int t = state.size();
  if (static_cast<int>(active.size()) != t) throw std::invalid_argument("solve_coefficients: active set size mismatch");
  const int L = bank.length();
  Vec alpha(t);
  for (int i = 0; i < t; ++i)
    alpha[i] = bank.atom(active[i].source, active[i].shift).samples.dot(y.segment(active[i].lag, L));
  Vec z = state.factor.triangularView<Eigen::Lower>().solve(alpha);
  return state.factor.transpose().triangularView<Eigen::Upper>().solve(z);
}

inline Vec update_residual(const Vec& y, const std::vector<AtomKey>& active, const Vec& amplitudes,
                           const InterpolatedDictionary& bank) {
  if (active.size() != static_cast<size_t>(amplitudes.size()))
    throw std::invalid_argument("update_residual: amplitude count mismatch");
  const int L = bank.length();
  Vec r = y;
  for (size_t i = 0; i < active.size(); ++i)
    r.segment(active[i].lag, L) -= amplitudes[i] * bank.atom(active[i].source, active[i].shift).samples;
  return r;
}

namespace detail {

inline double effective_floor(const CscConfig& cfg, const Vec& y) {
  return std::max(cfg.residual_threshold, 1e-12 * y.norm());
}

// Computes correlation scores of every (atom, lag) against a residual, either
// by direct shifted accumulation or in the frequency domain.
class CorrelationEngine {
 public:
  CorrelationEngine(const InterpolatedDictionary& bank, long W, CorrelationBackend backend)
      : bank_(&bank), W_(W), lags_(W - bank.length() + 1) {
    if (lags_ < 1) throw std::invalid_argument("correlate: window shorter than templates");
    nfft_ = 1;
    int lg = 0;
    while (nfft_ < W_) nfft_ <<= 1, ++lg;
    if (backend == CorrelationBackend::automatic) {
      // Cost model from measurement: a padded transform costs ~3x more per
      // point than the direct inner loop, so the frequency path pays off once
      // atoms * L * lags exceeds ~3 * (atoms + 1) * nfft * log2(nfft).
      double direct_work = static_cast<double>(bank.num_atoms()) * bank.length() * lags_;
      double fft_work = static_cast<double>(bank.num_atoms() + 1) * nfft_ * lg;
      use_fft_ = direct_work > 3.0 * fft_work;
    } else {
      use_fft_ = backend == CorrelationBackend::fft;
    }
    if (!use_fft_) return;
    const int L = bank.length();
    std::vector<double> padded(nfft_, 0.0);
    spectra_.resize(bank.num_atoms());
    for (int a = 0; a < bank.num_atoms(); ++a) {
      const Vec& h = bank.atom(a / bank.K, a % bank.K).samples;
      std::fill(padded.begin(), padded.end(), 0.0);
      for (int j = 0; j < L; ++j) padded[j] = h[j];
      fft_.fwd(spectra_[a], padded);
      for (auto& z : spectra_[a]) z = std::conj(z);
    }
    padded_.assign(nfft_, 0.0);
    time_out_.assign(nfft_, 0.0);
  }

  long num_lags() const { return lags_; }

  // out is (num_lags) x (num_atoms); out(n, a) = <atom a at lag n, r>.
  void correlate(const Vec& r, Mat& out) {
    if (r.size() != W_) throw std::invalid_argument("correlate: residual length mismatch");
    out.resize(lags_, bank_->num_atoms());
    if (use_fft_) {
      std::copy(r.data(), r.data() + W_, padded_.begin());
      std::fill(padded_.begin() + W_, padded_.end(), 0.0);
      fft_.fwd(freq_, padded_);
      for (int a = 0; a < bank_->num_atoms(); ++a) {
        prod_.resize(nfft_);
        for (long t = 0; t < nfft_; ++t) prod_[t] = spectra_[a][t] * freq_[t];
        fft_.inv(time_out_, prod_);
        for (long n = 0; n < lags_; ++n) out(n, a) = time_out_[n];
      }
      return;
    }
    const int L = bank_->length();
    for (int a = 0; a < bank_->num_atoms(); ++a) {
      const Vec& h = bank_->atom(a / bank_->K, a % bank_->K).samples;
      auto col = out.col(a);
      col.noalias() = h[0] * r.head(lags_);
      for (int j = 1; j < L; ++j) col.noalias() += h[j] * r.segment(j, lags_);
    }
  }

 private:
  const InterpolatedDictionary* bank_;
  long W_;
  long lags_;
  bool use_fft_ = false;
  long nfft_ = 0;
  Eigen::FFT<double> fft_;
  std::vector<std::vector<std::complex<double>>> spectra_;
  std::vector<double> padded_, time_out_;
  std::vector<std::complex<double>> freq_, prod_;
};

struct Candidate {
  AtomKey key;
  double score = 0.0;  // comparison value (absolute or signed per mode)
  double value = 0.0;  // raw correlation
};

// Best `count` candidates by score, ties broken toward the lexicographically
// smallest (c, k, n). In positive mode only strictly positive scores qualify.
inline std::vector<Candidate> top_candidates(const Mat& scores, int K, int count, SelectionMode mode) {
  std::vector<Candidate> best;
  best.reserve(count);
  for (int a = 0; a < scores.cols(); ++a) {
    AtomKey key{a / K, a % K, 0};
    for (long n = 0; n < scores.rows(); ++n) {
      double v = scores(n, a);
      double s = mode == SelectionMode::absolute ? std::abs(v) : v;
      if (mode == SelectionMode::positive && s <= 0.0) continue;
      if (static_cast<int>(best.size()) == count && s <= best.back().score) continue;
      key.lag = static_cast<int>(n);
      auto it = best.begin();
      while (it != best.end() && it->score >= s) ++it;  // after equals: scan order is lex order
      best.insert(it, Candidate{key, s, v});
      if (static_cast<int>(best.size()) > count) best.pop_back();
    }
  }
  return best;
}

inline void check_window(const Vec& y, int L) {
  if (y.size() < L) throw std::invalid_argument("csc: window shorter than the templates");
}

// Orthogonal matching pursuit over the convolutional interpolated dictionary.
// `slow` switches the projection step to the naive dense recomputation (and
// disables the Cholesky-based candidate rejection, which it cannot express).
inline SparseCode comp_core(const Vec& y, const InterpolatedDictionary& bank, const CscConfig& cfg,
                            CompDiagnostics* diag, bool slow) {
  cfg.validate();
  if (cfg.K != bank.K) throw std::invalid_argument("csc: config K does not match the dictionary");
  const int L = bank.length();
  check_window(y, L);
  const long W = y.size();
  const double floor = effective_floor(cfg, y);

  CorrelationEngine engine(bank, W, cfg.backend);
  Mat scores;
  std::vector<AtomKey> active;
  CholeskyState state;
  Vec x;
  Vec r = y;

  SparseCode code;
  code.K = bank.K;

  while (true) {
    if (r.norm() <= floor) break;
    if (cfg.max_events > 0 && static_cast<int>(active.size()) >= cfg.max_events) break;
    engine.correlate(r, scores);
    auto cands = top_candidates(scores, bank.K, 11, cfg.selection_mode);
    if (cands.empty() || cands[0].score == 0.0) {
      code.selection_exhausted = true;
      break;
    }

    bool extended = false;
    if (slow) {
      active.push_back(cands[0].key);
      extended = true;
    } else {
      for (const auto& cand : cands) {
        auto next = cholesky_extend(state, active, cand.key, bank);
        if (!next) {
          if (diag) ++diag->rejections;
          continue;
        }
        state = std::move(*next);
        active.push_back(cand.key);
        extended = true;
        break;
      }
    }
    if (!extended) {
      code.selection_exhausted = true;
      break;
    }

    if (slow) {
      const long t = static_cast<long>(active.size());
      Mat A = Mat::Zero(W, t);
      for (long i = 0; i < t; ++i)
        A.col(i).segment(active[i].lag, L) = bank.atom(active[i].source, active[i].shift).samples;
      Mat G = A.transpose() * A;
      Mat Gi = G.inverse();
      if (!Gi.allFinite()) throw std::runtime_error("comp_slow: singular Gram matrix");
      x = Gi * (A.transpose() * y);
      r = y - A * x;
    } else {
      x = solve_coefficients(state, active, y, bank);
      r = update_residual(y, active, x, bank);
    }
    ++code.iterations;

    if (diag) {
      ++diag->iterations;
      if (!slow) {
        const int t = state.size();
        Mat G(t, t);
        for (int i = 0; i < t; ++i)
          for (int m = 0; m < t; ++m) G(i, m) = gram_entry(bank, active[i], active[m]);
        double err = (state.factor * state.factor.transpose() - G).cwiseAbs().maxCoeff();
        diag->max_factor_error = std::max(diag->max_factor_error, err);
      }
    }
  }

  code.events.reserve(active.size());
  for (size_t i = 0; i < active.size(); ++i)
    code.events.push_back(CodeEvent{active[i].source, active[i].shift, active[i].lag, x[i]});
  code.residual_norm = r.norm();
  return code;
}

}  // namespace detail

// Highest-scoring single atom against a residual.
struct Selection {
  AtomKey key;
  double score = 0.0;
  double value = 0.0;
};

inline Selection select_atom(const Vec& residual, const InterpolatedDictionary& bank, SelectionMode mode,
                             CorrelationBackend backend = CorrelationBackend::automatic) {
  detail::check_window(residual, bank.length());
  if (residual.cwiseAbs().maxCoeff() == 0.0) throw std::invalid_argument("select_atom: all-zero residual");
  detail::CorrelationEngine engine(bank, residual.size(), backend);
  Mat scores;
  engine.correlate(residual, scores);
  auto cands = detail::top_candidates(scores, bank.K, 1, mode);
  if (cands.empty()) throw std::runtime_error("select_atom: no positive-score candidate");
  return Selection{cands[0].key, cands[0].score, cands[0].value};
}

// OMP with the interpolated dictionary built from config.K.
inline SparseCode comp_interp(const Vec& y, const Dictionary& dict, const CscConfig& cfg,
                              CompDiagnostics* diag = nullptr) {
  return detail::comp_core(y, expand_dictionary(dict, cfg.K), cfg, diag, false);
}

// Same, against a pre-expanded dictionary (bank.K must equal cfg.K).
inline SparseCode comp_interp(const Vec& y, const InterpolatedDictionary& bank, const CscConfig& cfg,
                              CompDiagnostics* diag = nullptr) {
  return detail::comp_core(y, bank, cfg, diag, false);
}

namespace detail {

inline void require_plain(const CscConfig& cfg, const char* who) {
  if (cfg.K != 1) throw std::invalid_argument(std::string(who) + ": requires K = 1 (use comp_interp)");
}

}  // namespace detail

// On-grid OMP (K = 1).
inline SparseCode comp(const Vec& y, const Dictionary& dict, const CscConfig& cfg,
                       CompDiagnostics* diag = nullptr) {
  detail::require_plain(cfg, "comp");
  return detail::comp_core(y, expand_dictionary(dict, 1), cfg, diag, false);
}

// OMP with naive dense projection each iteration; reference implementation.
inline SparseCode comp_slow(const Vec& y, const Dictionary& dict, const CscConfig& cfg) {
  detail::require_plain(cfg, "comp_slow");
  return detail::comp_core(y, expand_dictionary(dict, 1), cfg, nullptr, true);
}

// Plain (non-orthogonal) convolutional matching pursuit. Coefficients are raw
// correlations; re-selecting a placement accumulates into its amplitude.
inline SparseCode cmp(const Vec& y, const Dictionary& dict, const CscConfig& cfg) {
  detail::require_plain(cfg, "cmp");
  cfg.validate();
  InterpolatedDictionary bank = expand_dictionary(dict, 1);
  const int L = bank.length();
  detail::check_window(y, L);
  const double floor = detail::effective_floor(cfg, y);

  detail::CorrelationEngine engine(bank, y.size(), cfg.backend);
  Mat scores;
  Vec r = y;
  std::map<std::tuple<int, int, int>, double> amps;
  SparseCode code;
  code.K = 1;
  // MP contracts the residual every step, so the cap is a safety net only.
  const long iteration_cap = std::max<long>(1000, 50L * cfg.max_events);

  while (code.iterations < iteration_cap) {
    if (r.norm() <= floor) break;
    engine.correlate(r, scores);
    auto cands = detail::top_candidates(scores, 1, 1, cfg.selection_mode);
    if (cands.empty() || cands[0].score == 0.0) {
      code.selection_exhausted = true;
      break;
    }
    const auto& c = cands[0];
    auto slot = std::tuple{c.key.source, c.key.shift, c.key.lag};
    if (cfg.max_events > 0 && !amps.contains(slot) &&
        static_cast<int>(amps.size()) >= cfg.max_events)
      break;
    amps[slot] += c.value;
    r.segment(c.key.lag, L) -= c.value * bank.atom(c.key.source, c.key.shift).samples;
    ++code.iterations;
  }

  code.events.reserve(amps.size());
  for (const auto& [slot, amp] : amps)
    code.events.push_back(CodeEvent{std::get<0>(slot), std::get<1>(slot), std::get<2>(slot), amp});
  code.residual_norm = r.norm();
  return code;
}

// Textbook OMP on an explicit dense dictionary whose columns follow the
// (atom, lag) layout of build_dense_toeplitz over a flattened bank. Reference
// oracle for small problems.
inline SparseCode dense_omp_oracle(const Vec& y, const Mat& H, int K, int L, const CscConfig& cfg) {
  cfg.validate();
  const long W = y.size();
  if (W > 4096) throw std::invalid_argument("dense_omp_oracle: problem too large for the dense oracle");
  if (H.rows() != W) throw std::invalid_argument("dense_omp_oracle: dictionary/signal size mismatch");
  const long lags = W - L + 1;
  if (lags < 1 || H.cols() % lags != 0) throw std::invalid_argument("dense_omp_oracle: bad column layout");
  const double floor = detail::effective_floor(cfg, y);

  std::vector<long> cols;
  Vec x;
  Vec r = y;
  SparseCode code;
  code.K = K;

  while (true) {
    if (r.norm() <= floor) break;
    if (cfg.max_events > 0 && static_cast<int>(cols.size()) >= cfg.max_events) break;
    Vec scores = H.transpose() * r;
    long best = -1;
    double best_score = 0.0;
    for (long j = 0; j < scores.size(); ++j) {
      double s = cfg.selection_mode == SelectionMode::absolute ? std::abs(scores[j]) : scores[j];
      if (best < 0 || s > best_score) {
        best = j;
        best_score = s;
      }
    }
    if (cfg.selection_mode == SelectionMode::positive && best_score <= 0.0) break;
    if (best_score == 0.0) break;
    cols.push_back(best);

    Mat A(W, cols.size());
    for (size_t i = 0; i < cols.size(); ++i) A.col(i) = H.col(cols[i]);
    x = (A.transpose() * A).ldlt().solve(A.transpose() * y);
    r = y - A * x;
    ++code.iterations;
  }

  code.events.reserve(cols.size());
  for (size_t i = 0; i < cols.size(); ++i) {
    long a = cols[i] / lags;
    code.events.push_back(CodeEvent{static_cast<int>(a) / K, static_cast<int>(a) % K,
                                    static_cast<int>(cols[i] % lags), x[i]});
  }
  code.residual_norm = r.norm();
  return code;
}

}  // namespace ocdl
