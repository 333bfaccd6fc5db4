#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eegpref/evaluation.hpp"
#include "eegpref/plot.hpp"

namespace eegpref {

// Fully resolved settings for an end-to-end run. Unset keys keep these
// defaults; a config file overrides them and command-line flags override both.
struct PipelineConfig {
  std::filesystem::path input;
  std::filesystem::path out{"eegpref-out"};
  double sampling_rate_hz{kDefaultSamplingRateHz};
  std::size_t length{kDefaultSignalLength};
  std::size_t input_dim{kDefaultInputDim};
  std::vector<std::size_t> hidden{kDefaultHidden};
  double lambda{kDefaultLambda};
  TransformKind transform{TransformKind::signed_log()};
  std::size_t boot_mult{3};
  double split{0.8};
  double learning_rate{1e-3};
  std::size_t epochs{100};
  std::size_t batch_size{32};
  std::string optimizer{"adam"};  // adam | sgd
  double momentum{0.0};
  double beta1{0.9};
  double beta2{0.999};
  double epsilon{1e-8};
  std::size_t patience{10};
  std::uint64_t seed{42};

  TrainConfig train_config() const;
};

// Keys accepted in config files and by `apply_setting`, in manifest order.
const std::vector<std::string>& pipeline_keys();

// Throws InvalidArgument for unknown keys or unparsable values.
void apply_setting(PipelineConfig& config, const std::string& key, const std::string& value);

// `key = value` lines; `#` starts a comment; values may be double-quoted.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

// defaults <- config file <- flags.
PipelineConfig resolve_config(const std::optional<std::filesystem::path>& config_file,
                              const std::map<std::string, std::string>& flag_overrides);

// Every key with its resolved value, in the config-file syntax, so the text
// can be fed back through --config.
std::string to_config_text(const PipelineConfig& config);

// Checks every numeric field against the owning stage's preconditions.
void validate(const PipelineConfig& config);

// Loads a manifest or canonical CSV (detected from the header) and resamples
// every signal to `length`.
Dataset load_input(const std::filesystem::path& path, std::size_t length, double sampling_rate_hz);

CompareSettings compare_settings(const PipelineConfig& config);
ArmConfig full_arm(const PipelineConfig& config);

// Writes run-manifest.toml, lowfreq.csv, model.json, baseline-model.json,
// report.json, class-stats.json and fig{1,2,3}-*.{csv,svg} into config.out.
// Everything is produced in a sibling staging directory first and renamed into
// place only on success.
ComparisonReport run_pipeline(const PipelineConfig& config);

// Figure series used by `pipeline` and `plot`.
std::vector<PlotSeries> signal_series(const Dataset& dataset, std::size_t per_class);
std::vector<PlotSeries> lowfreq_series(const Dataset& dataset, const SmootherConfig& smoother,
                                       std::size_t per_class);
std::vector<PlotSeries> history_series(const ComparisonReport& report);

std::string class_stats_to_json(const ClassStats& stats);

}  // namespace eegpref
