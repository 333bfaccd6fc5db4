#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "eegpref/augment.hpp"
#include "eegpref/mlp.hpp"
#include "eegpref/signal.hpp"
#include "eegpref/smoother.hpp"

namespace eegpref {

struct SplitConfig {
  double train_fraction{0.8};
  std::uint64_t seed{0};
};

struct DatasetSplit {
  Dataset train;
  Dataset validation;
};

// Per class: seeded shuffle, floor(fraction x class size) rows to train and
// the rest to validation. Both halves keep the dataset's original order.
DatasetSplit stratified_split(const Dataset& dataset, const SplitConfig& config);

struct Metrics {
  std::size_t tp{0};
  std::size_t fp{0};
  std::size_t tn{0};
  std::size_t fn{0};
  double accuracy{0.0};
  double precision{0.0};
  double recall{0.0};
  double f1{0.0};

  std::size_t total() const noexcept { return tp + fp + tn + fn; }
};

// Like is positive. Zero denominators give 0 rather than NaN.
Metrics compute_metrics(const std::vector<Label>& predictions, const std::vector<Label>& truths);

// One arm of the comparison: which optional stages run around the smoother.
struct ArmConfig {
  std::string name;
  bool normalize{false};
  TransformKind transform{TransformKind::signed_log()};
  std::size_t boot_mult{3};
};

// normalize -> smooth -> ANN.
ArmConfig baseline_arm();
// smooth (raw scale) -> signed-log -> bootstrap x3 (train only) -> ANN.
ArmConfig full_arm();

struct CompareSettings {
  SmootherConfig smoother;
  std::size_t input_dim{kDefaultInputDim};
  std::vector<std::size_t> hidden{kDefaultHidden};
  double train_fraction{0.8};
  TrainConfig train;  // seed is overridden by the fan-out below
  std::uint64_t master_seed{42};
};

// Stage seeds derived from the master seed by fixed offsets.
struct StageSeeds {
  std::uint64_t split;
  std::uint64_t bootstrap;
  std::uint64_t init;
  std::uint64_t shuffle;
};
StageSeeds fan_out(std::uint64_t master_seed) noexcept;

// Feature map shared by training and validation rows of one arm:
// optional z-score, Whittaker smoothing, transform, resample to input_dim.
std::vector<LowFreqComponent> arm_features(const Dataset& dataset, const ArmConfig& arm,
                                           const CompareSettings& settings);

LabeledBatch to_batch(const std::vector<LowFreqComponent>& components);

struct ArmResult {
  ArmConfig config;
  MlpModel model;
  TrainHistory history;
  Metrics train_metrics;
  Metrics val_metrics;
  std::vector<std::string> train_ids;  // after bootstrap suffixing
  std::vector<std::string> val_ids;
};

// Trains one arm on a fixed split.
ArmResult run_arm(const DatasetSplit& split, const ArmConfig& arm, const CompareSettings& settings);

struct ComparisonReport {
  CompareSettings settings;
  StageSeeds seeds;
  std::size_t dataset_size{0};
  std::string dataset_source;
  ArmResult baseline;
  ArmResult full;
};

// Both arms share the split and every stage seed.
ComparisonReport compare_pipelines(const Dataset& dataset, const ArmConfig& baseline_cfg,
                                   const ArmConfig& full_cfg, const CompareSettings& settings);

std::string metrics_to_json(const Metrics& metrics);
std::string history_to_json(const TrainHistory& history);
std::string report_to_json(const ComparisonReport& report);

}  // namespace eegpref
