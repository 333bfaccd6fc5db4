#include "eegpref/augment.hpp"

#include <cmath>

#include "eegpref/error.hpp"
#include "text.hpp"

namespace eegpref {

TransformKind TransformKind::tanh_scaled(double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw Error(ErrorCode::InvalidArgument, "tanh scale must be a positive finite number");
  }
  return {Kind::TanhScaled, scale};
}

double TransformKind::apply(double x) const noexcept {
  switch (kind) {
    case Kind::Identity: return x;
    case Kind::SignedLog: return std::copysign(std::log1p(std::abs(x)), x);
    case Kind::CubeRoot: return std::cbrt(x);
    case Kind::TanhScaled: return std::tanh(x / scale);
  }
  return x;
}

TransformKind parse_transform(const std::string& spelled) {
  const auto lowered = text::to_lower(text::trim(spelled));
  if (lowered == "identity") return TransformKind::identity();
  if (lowered == "signed-log") return TransformKind::signed_log();
  if (lowered == "cube-root") return TransformKind::cube_root();
  if (lowered.rfind("tanh:", 0) == 0) {
    const auto scale = text::parse_double(std::string_view(lowered).substr(5));
    if (!scale) throw Error(ErrorCode::InvalidArgument, "bad tanh scale in '" + spelled + "'");
    return TransformKind::tanh_scaled(*scale);
  }
  throw Error(ErrorCode::InvalidArgument,
              "unknown transform '" + spelled + "' (identity|signed-log|cube-root|tanh:<s>)");
}

std::string to_string(const TransformKind& kind) {
  switch (kind.kind) {
    case TransformKind::Kind::Identity: return "identity";
    case TransformKind::Kind::SignedLog: return "signed-log";
    case TransformKind::Kind::CubeRoot: return "cube-root";
    case TransformKind::Kind::TanhScaled: return "tanh:" + text::format_double(kind.scale);
  }
  return "unknown";
}

std::vector<double> nonlinear_transform(std::span<const double> values, const TransformKind& kind) {
  std::vector<double> out;
  out.reserve(values.size());
  for (double x : values) {
    if (!std::isfinite(x)) throw Error(ErrorCode::NonFiniteInput, "nonlinear_transform: non-finite input");
    out.push_back(kind.apply(x));
  }
  return out;
}

std::vector<LowFreqComponent> nonlinear_transform(const std::vector<LowFreqComponent>& components,
                                                  const TransformKind& kind) {
  std::vector<LowFreqComponent> out;
  out.reserve(components.size());
  for (const auto& c : components) out.push_back({c.id, c.label, nonlinear_transform(c.values, kind)});
  return out;
}

std::vector<std::size_t> bootstrap_indices(std::size_t n, std::size_t m, Rng64& rng) {
  if (n == 0) throw Error(ErrorCode::EmptyPool, "cannot bootstrap from an empty pool");
  std::vector<std::size_t> out(m);
  for (auto& idx : out) idx = static_cast<std::size_t>(rng.next_below(n));
  return out;
}

std::vector<LowFreqComponent> bootstrap_dataset(const std::vector<LowFreqComponent>& components,
                                                const BootstrapConfig& config) {
  if (config.multiplier < 1) throw Error(ErrorCode::InvalidArgument, "bootstrap multiplier must be >= 1");

  std::vector<const LowFreqComponent*> like_pool;
  std::vector<const LowFreqComponent*> dislike_pool;
  for (const auto& c : components) (c.label == Label::Like ? like_pool : dislike_pool).push_back(&c);
  if (like_pool.empty() || dislike_pool.empty()) {
    throw Error(ErrorCode::MissingClass, "bootstrap needs at least one signal of each class");
  }

  Rng64 rng(config.seed);
  std::vector<LowFreqComponent> out;
  out.reserve(components.size() * config.multiplier);
  for (const auto* pool : {&like_pool, &dislike_pool}) {
    const auto picks = bootstrap_indices(pool->size(), pool->size() * config.multiplier, rng);
    for (std::size_t k = 0; k < picks.size(); ++k) {
      const auto& src = *(*pool)[picks[k]];
      out.push_back({src.id + "#b" + std::to_string(k), src.label, src.values});
    }
  }
  return out;
}

}  // namespace eegpref
