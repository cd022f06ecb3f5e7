#pragma once

#include <optional>

#include "ocdl/csc.hpp"
#include "ocdl/interp.hpp"
#include "ocdl/types.hpp"

namespace ocdl {

// Coupling between sub-sample variants when accumulating the update system.
// `full` includes every overlapping pair of placements of the updated source;
// `literal` restricts the quadratic term to pairs sharing the same shift index.
enum class CduMode { full, literal };

// One placement of the template under update inside a single window. The
// amplitude here refers to the raw shifted waveform F^k h (selection
// amplitudes get divided by the atom's pre-normalization norm first).
struct ShiftPlacement {
  int lag = 0;
  int shift = 0;
  double amplitude = 0.0;
};

// Normal-equation accumulator for one template: A h = b collected over all
// windows, plus the number of contributing placements.
struct UpdateAccumulator {
  Mat A;
  Vec b;
  long count = 0;

  explicit UpdateAccumulator(int L) : A(Mat::Zero(L, L)), b(Vec::Zero(L)) {}
};

// Window residual with every source except `exclude_source` subtracted.
inline Vec compute_residual_ej(const Vec& window_col, const SparseCode& code,
                               const InterpolatedDictionary& bank, int exclude_source) {
  const int L = bank.length();
  Vec r = window_col;
  for (const auto& e : code.events) {
    if (e.source == exclude_source) continue;
    if (e.lag < 0 || e.lag + L > r.size()) throw std::invalid_argument("compute_residual_ej: event lag out of range");
    r.segment(e.lag, L) -= e.amplitude * bank.atom(e.source, e.shift).samples;
  }
  return r;
}

// Adds one window's placements of the updated source into the accumulator.
// interp contains the K sub-sample delay matrices, interp[k] = F^k.
inline void accumulate_update(UpdateAccumulator& acc, const std::vector<ShiftPlacement>& placements,
                              const Vec& Ej, const std::vector<Mat>& interp, CduMode mode) {
  const int L = static_cast<int>(acc.A.rows());
  for (const auto& p : placements) {
    if (p.shift < 0 || p.shift >= static_cast<int>(interp.size()))
      throw std::invalid_argument("accumulate_update: shift index out of range");
    if (p.lag < 0 || p.lag + L > Ej.size())
      throw std::invalid_argument("accumulate_update: lag out of range");
  }

  for (const auto& pi : placements) {
    // Linear term: (S F^k)^T E_j restricted to the placement's span.
    if (pi.shift == 0) {
      acc.b += pi.amplitude * Ej.segment(pi.lag, L);
    } else {
      acc.b.noalias() += pi.amplitude * (interp[pi.shift].transpose() * Ej.segment(pi.lag, L));
    }

    // Quadratic term: overlap of every placement pair, (F^{k_i})^T S_i^T S_m F^{k_m}.
    for (const auto& pm : placements) {
      if (mode == CduMode::literal && pi.shift != pm.shift) continue;
      long delta = pi.lag - pm.lag;
      if (delta >= L || delta <= -L) continue;
      long u0 = std::max(0L, -delta);
      long len = L - std::labs(delta);
      double xx = pi.amplitude * pm.amplitude;
      if (pi.shift == 0 && pm.shift == 0) {
        acc.A.diagonal(delta).array() += xx;
      } else {
        acc.A.noalias() += xx * interp[pi.shift].middleRows(u0, len).transpose() *
                           interp[pm.shift].middleRows(u0 + delta, len);
      }
    }
    ++acc.count;
  }
}

// Closed-form template update from the accumulated system, renormalized.
// Empty accumulators (no placements) yield nothing: the caller keeps the
// previous template. A non-SPD system falls back to a small ridge.
inline std::optional<Template> solve_template(const UpdateAccumulator& acc) {
  if (acc.count == 0) return std::nullopt;
  const int L = static_cast<int>(acc.A.rows());
  Eigen::LLT<Mat> llt(acc.A);
  if (llt.info() != Eigen::Success) {
    Mat ridged = acc.A + (1e-8 * acc.A.trace() / L) * Mat::Identity(L, L);
    llt.compute(ridged);
    if (llt.info() != Eigen::Success) return std::nullopt;
  }
  Vec h = llt.solve(acc.b);
  double norm = h.norm();
  if (!std::isfinite(norm) || norm == 0.0) return std::nullopt;
  return Template{h / norm};
}

// One dictionary-update sweep: each template in turn is re-solved against the
// residual that keeps all other sources (and previously updated templates)
// fixed. Sources whose update is skipped are reported through `skipped`.
inline Dictionary cdu_pass(const Mat& windows, const std::vector<SparseCode>& codes,
                           const Dictionary& dict, int K, CduMode mode,
                           std::vector<int>* skipped = nullptr) {
  validate_dictionary(dict);
  if (static_cast<long>(codes.size()) != windows.cols())
    throw std::invalid_argument("cdu_pass: one code per window required");
  const int L = dict.length();
  if (windows.rows() < L) throw std::invalid_argument("cdu_pass: windows shorter than templates");

  std::vector<Mat> interp;
  interp.reserve(K);
  for (int k = 0; k < K; ++k) interp.push_back(interp_matrix(k, K, L));

  InterpolatedDictionary bank = expand_dictionary(dict, K);
  if (skipped) skipped->clear();

  for (int c = 0; c < bank.num_sources(); ++c) {
    UpdateAccumulator acc(L);
    std::vector<ShiftPlacement> placements;
    for (long j = 0; j < windows.cols(); ++j) {
      const SparseCode& code = codes[j];
      placements.clear();
      for (const auto& e : code.events)
        if (e.source == c)
          placements.push_back(ShiftPlacement{e.lag, e.shift, e.amplitude / bank.pre_norm(c, e.shift)});
      if (placements.empty()) continue;
      Vec Ej = compute_residual_ej(windows.col(j), code, bank, c);
      accumulate_update(acc, placements, Ej, interp, mode);
    }
    auto updated = solve_template(acc);
    if (updated) {
      bank.base.templates[c] = *updated;
      refresh_source(bank, c);
    } else if (skipped) {
      skipped->push_back(c);
    }
  }
  return bank.base;
}

}  // namespace ocdl
