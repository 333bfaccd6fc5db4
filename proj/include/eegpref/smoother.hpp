#pragma once

#include <span>
#include <string>
#include <vector>

#include "eegpref/signal.hpp"

namespace eegpref {

inline constexpr double kDefaultLambda = 1600.0;

struct SmootherConfig {
  double lambda{kDefaultLambda};
};

struct LowFreqComponent {
  std::string id;
  Label label{Label::Like};
  std::vector<double> values;
};

// Whittaker smoother with a second-difference penalty. Returns the z that
// minimises |y - z|^2 + lambda |D2 z|^2, i.e. solves (I + lambda D2'D2) z = y
// with a banded (bandwidth 2) LDL' factorisation.
std::vector<double> smooth_whittaker(std::span<const double> samples, const SmootherConfig& config);

// y - smooth_whittaker(y).
std::vector<double> highfreq_residual(std::span<const double> samples, const SmootherConfig& config);

// Smooths each signal independently; ids and order are preserved. Per-signal
// failures are rethrown with the offending id in the message.
std::vector<LowFreqComponent> extract_lowfreq_dataset(const Dataset& dataset,
                                                      const SmootherConfig& config);

// Adapters between component lists and datasets so stages can share the
// canonical CSV.
Dataset to_dataset(const std::vector<LowFreqComponent>& components, double sampling_rate_hz,
                   std::string source);
std::vector<LowFreqComponent> to_components(const Dataset& dataset);

}  // namespace eegpref
