#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "eegpref/rng.hpp"
#include "eegpref/smoother.hpp"

namespace eegpref {

// Odd, strictly monotone, continuous maps fixing 0. Identity exists so the
// baseline arm can be expressed with the same machinery.
struct TransformKind {
  enum class Kind { Identity, SignedLog, CubeRoot, TanhScaled };

  Kind kind{Kind::SignedLog};
  double scale{1.0};  // TanhScaled only

  static TransformKind identity() { return {Kind::Identity, 1.0}; }
  static TransformKind signed_log() { return {Kind::SignedLog, 1.0}; }
  static TransformKind cube_root() { return {Kind::CubeRoot, 1.0}; }
  static TransformKind tanh_scaled(double scale);

  double apply(double x) const noexcept;

  friend bool operator==(const TransformKind&, const TransformKind&) = default;
};

// CLI spelling: identity | signed-log | cube-root | tanh:<scale>.
TransformKind parse_transform(const std::string& text);
std::string to_string(const TransformKind& kind);

std::vector<double> nonlinear_transform(std::span<const double> values, const TransformKind& kind);
std::vector<LowFreqComponent> nonlinear_transform(const std::vector<LowFreqComponent>& components,
                                                  const TransformKind& kind);

struct BootstrapConfig {
  std::size_t multiplier{3};
  std::uint64_t seed{0};
};

// m uniform draws from {0, ..., n-1}.
std::vector<std::size_t> bootstrap_indices(std::size_t n, std::size_t m, Rng64& rng);

// Stratified resampling with replacement: each class pool is drawn to
// multiplier x (class size). Like rows come first, then Dislike. Output ids
// are `<source id>#b<k>` with k the position within the class block.
std::vector<LowFreqComponent> bootstrap_dataset(const std::vector<LowFreqComponent>& components,
                                                const BootstrapConfig& config);

}  // namespace eegpref
