#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ocdl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// A sampled waveform of odd length L, unit Euclidean norm.
struct Template {
  Vec samples;

  int length() const { return static_cast<int>(samples.size()); }
};

inline Template make_template(Vec samples) {
  if (samples.size() == 0) throw std::invalid_argument("template: empty");
  double norm = samples.norm();
  if (norm == 0.0) throw std::invalid_argument("template: zero energy");
  return Template{samples / norm};
}

// A set of same-length templates; columns of the convolutional dictionary.
struct Dictionary {
  std::vector<Template> templates;

  int num_templates() const { return static_cast<int>(templates.size()); }
  int length() const { return templates.empty() ? 0 : templates[0].length(); }
};

inline void validate_dictionary(const Dictionary& dict) {
  if (dict.templates.empty()) throw std::invalid_argument("dictionary: empty");
  int L = dict.templates[0].length();
  if (L % 2 == 0) throw std::invalid_argument("dictionary: template length must be odd");
  for (const auto& t : dict.templates) {
    if (t.length() != L) throw std::invalid_argument("dictionary: mixed template lengths");
    if (std::abs(t.samples.norm() - 1.0) > 1e-12)
      throw std::invalid_argument("dictionary: template not unit norm");
  }
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace detail

// Stable derived seed for a named random stream, so adding a stream never
// perturbs the others.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view stream) {
  return detail::splitmix64(master ^ detail::fnv1a(stream));
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view stream, std::uint64_t index) {
  return detail::splitmix64(derive_seed(master, stream) ^ detail::splitmix64(index));
}

}  // namespace ocdl
