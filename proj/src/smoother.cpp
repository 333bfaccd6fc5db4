#include "eegpref/smoother.hpp"

#include <algorithm>
#include <cmath>

#include "eegpref/error.hpp"

namespace eegpref {

namespace {

// LDL' factor of the symmetric pentadiagonal A = I + lambda D2'D2.
// sub1[i] = L(i+1, i), sub2[i] = L(i+2, i).
struct BandedFactor {
  std::vector<double> diag;
  std::vector<double> sub1;
  std::vector<double> sub2;
};

BandedFactor factorize(std::size_t n, double lambda) {
  // Diagonals of D2'D2, accumulated row by row of D2 = [1 -2 1].
  std::vector<double> a0(n, 0.0), a1(n, 0.0), a2(n, 0.0);
  for (std::size_t r = 0; r + 2 < n; ++r) {
    a0[r] += 1.0;
    a0[r + 1] += 4.0;
    a0[r + 2] += 1.0;
    a1[r] -= 2.0;
    a1[r + 1] -= 2.0;
    a2[r] += 1.0;
  }

  BandedFactor f{std::vector<double>(n), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    double d = 1.0 + lambda * a0[i];
    if (i >= 1) d -= f.sub1[i - 1] * f.sub1[i - 1] * f.diag[i - 1];
    if (i >= 2) d -= f.sub2[i - 2] * f.sub2[i - 2] * f.diag[i - 2];
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw Error(ErrorCode::SolverFailure, "pivot " + std::to_string(i) + " is not positive");
    }
    f.diag[i] = d;
    if (i + 1 < n) {
      double off = lambda * a1[i];
      if (i >= 1) off -= f.sub2[i - 1] * f.diag[i - 1] * f.sub1[i - 1];
      f.sub1[i] = off / d;
    }
    if (i + 2 < n) f.sub2[i] = lambda * a2[i] / d;
  }
  return f;
}

std::vector<double> solve(const BandedFactor& f, std::span<const double> rhs) {
  const std::size_t n = rhs.size();
  std::vector<double> z(rhs.begin(), rhs.end());
  for (std::size_t i = 1; i < n; ++i) {
    z[i] -= f.sub1[i - 1] * z[i - 1];
    if (i >= 2) z[i] -= f.sub2[i - 2] * z[i - 2];
  }
  for (std::size_t i = 0; i < n; ++i) z[i] /= f.diag[i];
  for (std::size_t i = n; i-- > 0;) {
    if (i + 1 < n) z[i] -= f.sub1[i] * z[i + 1];
    if (i + 2 < n) z[i] -= f.sub2[i] * z[i + 2];
  }
  return z;
}

// y - (I + lambda D2'D2) z, evaluated through the differences of z so large
// lambda does not cancel catastrophically.
std::vector<double> residual(std::span<const double> y, std::span<const double> z, double lambda) {
  const std::size_t n = y.size();
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = y[i] - z[i];
  for (std::size_t k = 0; k + 2 < n; ++k) {
    const double d2 = lambda * (z[k] - 2.0 * z[k + 1] + z[k + 2]);
    r[k] -= d2;
    r[k + 1] += 2.0 * d2;
    r[k + 2] -= d2;
  }
  return r;
}

}  // namespace

std::vector<double> smooth_whittaker(std::span<const double> samples, const SmootherConfig& config) {
  if (samples.size() < 4) throw Error(ErrorCode::TooShort, "smoothing needs at least 4 samples");
  if (!(config.lambda >= 0.0) || !std::isfinite(config.lambda)) {
    throw Error(ErrorCode::InvalidArgument, "lambda must be finite and >= 0");
  }
  if (!std::all_of(samples.begin(), samples.end(), [](double v) { return std::isfinite(v); })) {
    throw Error(ErrorCode::NonFiniteInput, "smooth_whittaker: non-finite input");
  }
  if (config.lambda == 0.0) return {samples.begin(), samples.end()};

  const auto factor = factorize(samples.size(), config.lambda);
  auto z = solve(factor, samples);
  // One step of iterative refinement recovers the digits lost to the
  // conditioning of A (up to ~16 lambda) at large lambda.
  const auto correction = solve(factor, residual(samples, z, config.lambda));
  for (std::size_t i = 0; i < z.size(); ++i) z[i] += correction[i];

  if (!std::all_of(z.begin(), z.end(), [](double v) { return std::isfinite(v); })) {
    throw Error(ErrorCode::SolverFailure, "non-finite smoother output");
  }
  return z;
}

std::vector<double> highfreq_residual(std::span<const double> samples, const SmootherConfig& config) {
  auto z = smooth_whittaker(samples, config);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = samples[i] - z[i];
  return z;
}

std::vector<LowFreqComponent> extract_lowfreq_dataset(const Dataset& dataset,
                                                      const SmootherConfig& config) {
  if (dataset.empty()) throw Error(ErrorCode::EmptyDataset, "extract_lowfreq_dataset: empty dataset");
  std::vector<LowFreqComponent> out;
  out.reserve(dataset.size());
  for (const auto& s : dataset.signals) {
    try {
      out.push_back({s.id, s.label, smooth_whittaker(s.samples, config)});
    } catch (const Error& e) {
      throw Error(e.code(), "signal '" + s.id + "': " + e.what());
    }
  }
  return out;
}

Dataset to_dataset(const std::vector<LowFreqComponent>& components, double sampling_rate_hz,
                   std::string source) {
  Dataset dataset;
  dataset.source = std::move(source);
  dataset.signals.reserve(components.size());
  for (const auto& c : components) dataset.signals.push_back({c.id, c.label, c.values, sampling_rate_hz});
  return dataset;
}

std::vector<LowFreqComponent> to_components(const Dataset& dataset) {
  std::vector<LowFreqComponent> out;
  out.reserve(dataset.size());
  for (const auto& s : dataset.signals) out.push_back({s.id, s.label, s.samples});
  return out;
}

}  // namespace eegpref
