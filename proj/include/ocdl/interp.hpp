#pragma once

#include "ocdl/signal_model.hpp"
#include "ocdl/types.hpp"

namespace ocdl {

namespace detail {

inline void check_shift(int k, int K, int L) {
  if (K < 1) throw std::invalid_argument("interp: K must be >= 1");
  if (k < 0 || k >= K) throw std::invalid_argument("interp: k must lie in [0, K)");
  if (L < 1 || L % 2 == 0) throw std::invalid_argument("interp: L must be odd and positive");
}

}  // namespace detail

// Discrete fractional-delay filter: taps[n + (L-1)/2] = sinc(n - k/K) for
// n in [-(L-1)/2, (L-1)/2]. Convolving with it delays a band-limited sequence
// by k/K of a sample; k = 0 is the unit impulse.
struct ShiftedSinc {
  int k = 0;
  int K = 1;
  Vec taps;
};

inline ShiftedSinc shifted_sinc(int k, int K, int L) {
  detail::check_shift(k, K, L);
  int M = (L - 1) / 2;
  double frac = static_cast<double>(k) / K;
  ShiftedSinc f{k, K, Vec(L)};
  for (int n = -M; n <= M; ++n) f.taps[n + M] = sinc(n - frac);
  return f;
}

// L x L sub-sample delay operator: F[r][c] = sinc((r - c) - k/K), so that
// (F h)[r] resamples h delayed by k/K of a sample. F^0 is exactly the identity.
inline Mat interp_matrix(int k, int K, int L) {
  detail::check_shift(k, K, L);
  double frac = static_cast<double>(k) / K;
  Mat F(L, L);
  for (int r = 0; r < L; ++r)
    for (int c = 0; c < L; ++c) F(r, c) = sinc((r - c) - frac);
  return F;
}

namespace detail {

// Returns F^k h and its norm before renormalization. F^0 is the identity,
// so k = 0 returns h itself.
inline std::pair<Vec, double> apply_shift(const Vec& h, int k, int K) {
  int L = static_cast<int>(h.size());
  check_shift(k, K, L);
  if (k == 0) return {h, h.norm()};
  double frac = static_cast<double>(k) / K;
  Vec out(L);
  for (int r = 0; r < L; ++r) {
    double acc = 0.0;
    for (int m = 0; m < L; ++m) acc += sinc((r - m) - frac) * h[m];
    out[r] = acc;
  }
  double norm = out.norm();
  return {std::move(out), norm};
}

}  // namespace detail

// Sub-sample shifted copy of a template, renormalized to unit energy.
// k = 0 returns the template unchanged.
inline Template interpolate_template(const Template& t, int k, int K) {
  if (k == 0) {
    detail::check_shift(k, K, t.length());
    return t;
  }
  auto [shifted, norm] = detail::apply_shift(t.samples, k, K);
  if (norm == 0.0) throw std::invalid_argument("interpolate_template: shifted copy has zero energy");
  return Template{shifted / norm};
}

// All K sub-sample shifted variants of every template. pre_norm(c, k) records
// ||F^k h_c|| before renormalization; coefficients on the normalized atoms can
// be mapped back to the raw shifted waveforms by dividing by it.
struct InterpolatedDictionary {
  Dictionary base;
  int K = 1;
  std::vector<std::vector<Template>> atoms;     // [c][k]
  std::vector<std::vector<double>> pre_norms;   // [c][k]

  int num_sources() const { return base.num_templates(); }
  int num_atoms() const { return num_sources() * K; }
  int length() const { return base.length(); }
  const Template& atom(int c, int k) const { return atoms[c][k]; }
  double pre_norm(int c, int k) const { return pre_norms[c][k]; }
};

inline InterpolatedDictionary expand_dictionary(const Dictionary& dict, int K) {
  validate_dictionary(dict);
  if (K < 1) throw std::invalid_argument("expand_dictionary: K must be >= 1");
  InterpolatedDictionary bank;
  bank.base = dict;
  bank.K = K;
  bank.atoms.resize(dict.num_templates());
  bank.pre_norms.resize(dict.num_templates());
  for (int c = 0; c < dict.num_templates(); ++c) {
    bank.atoms[c].reserve(K);
    bank.pre_norms[c].reserve(K);
    for (int k = 0; k < K; ++k) {
      auto [shifted, norm] = detail::apply_shift(dict.templates[c].samples, k, K);
      if (norm == 0.0) throw std::invalid_argument("expand_dictionary: degenerate shifted atom");
      bank.atoms[c].push_back(k == 0 ? dict.templates[c] : Template{shifted / norm});
      bank.pre_norms[c].push_back(norm);
    }
  }
  return bank;
}

// Refresh the shifted variants of a single source after its template changed.
inline void refresh_source(InterpolatedDictionary& bank, int c) {
  if (c < 0 || c >= bank.num_sources()) throw std::invalid_argument("refresh_source: source out of range");
  for (int k = 0; k < bank.K; ++k) {
    auto [shifted, norm] = detail::apply_shift(bank.base.templates[c].samples, k, bank.K);
    if (norm == 0.0) throw std::invalid_argument("refresh_source: degenerate shifted atom");
    bank.atoms[c][k] = k == 0 ? bank.base.templates[c] : Template{shifted / norm};
    bank.pre_norms[c][k] = norm;
  }
}

// View the bank as a flat dictionary; atom (c, k) becomes template c * K + k.
inline Dictionary flatten(const InterpolatedDictionary& bank) {
  Dictionary flat;
  flat.templates.reserve(bank.num_atoms());
  for (int c = 0; c < bank.num_sources(); ++c)
    for (int k = 0; k < bank.K; ++k) flat.templates.push_back(bank.atom(c, k));
  return flat;
}

}  // namespace ocdl
