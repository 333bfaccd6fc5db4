#include "eegpref/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "eegpref/error.hpp"
#include "text.hpp"

namespace eegpref {

namespace fs = std::filesystem;

namespace {

double to_double(const std::string& key, const std::string& value) {
  const auto parsed = text::parse_double(value);
  if (!parsed || !std::isfinite(*parsed)) {
    throw Error(ErrorCode::InvalidArgument, key + ": expected a number, got '" + value + "'");
  }
  return *parsed;
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  const auto parsed = text::parse_u64(value);
  if (!parsed) throw Error(ErrorCode::InvalidArgument, key + ": expected a non-negative integer, got '" + value + "'");
  return *parsed;
}

std::vector<std::size_t> to_widths(const std::string& key, const std::string& value) {
  std::vector<std::size_t> widths;
  if (text::trim(value).empty()) return widths;
  for (const auto field : text::split(value, ',')) widths.push_back(to_u64(key, std::string(field)));
  return widths;
}

std::string join_widths(const std::vector<std::size_t>& widths) {
  std::string out;
  for (std::size_t i = 0; i < widths.size(); ++i) out += (i ? "," : "") + std::to_string(widths[i]);
  return out;
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

using Setter = std::function<void(PipelineConfig&, const std::string&, const std::string&)>;
using Getter = std::function<std::string(const PipelineConfig&)>;

struct KeySpec {
  std::string key;
  Setter set;
  Getter get;
};

const std::vector<KeySpec>& key_specs() {
  static const std::vector<KeySpec> specs{
      {"input", [](auto& c, auto&, auto& v) { c.input = v; },
       [](const auto& c) { return quoted(c.input.string()); }},
      {"out", [](auto& c, auto&, auto& v) { c.out = v; },
       [](const auto& c) { return quoted(c.out.string()); }},
      {"sampling_rate", [](auto& c, auto& k, auto& v) { c.sampling_rate_hz = to_double(k, v); },
       [](const auto& c) { return text::format_double(c.sampling_rate_hz); }},
      {"length", [](auto& c, auto& k, auto& v) { c.length = to_u64(k, v); },
       [](const auto& c) { return std::to_string(c.length); }},
      {"input_dim", [](auto& c, auto& k, auto& v) { c.input_dim = to_u64(k, v); },
       [](const auto& c) { return std::to_string(c.input_dim); }},
      {"hidden", [](auto& c, auto& k, auto& v) { c.hidden = to_widths(k, v); },
       [](const auto& c) { return quoted(join_widths(c.hidden)); }},
      {"lambda", [](auto& c, auto& k, auto& v) { c.lambda = to_double(k, v); },
       [](const auto& c) { return text::format_double(c.lambda); }},
      {"transform", [](auto& c, auto&, auto& v) { c.transform = parse_transform(v); },
       [](const auto& c) { return quoted(to_string(c.transform)); }},
      {"boot_mult", [](auto& c, auto& k, auto& v) { c.boot_mult = to_u64(k, v); },
       [](const auto& c) { return std::to_string(c.boot_mult); }},
      {"split", [](auto& c, auto& k, auto& v) { c.split = to_double(k, v); },
       [](const auto& c) { return text::format_double(c.split); }},
      {"learning_rate", [](auto& c, auto& k, auto& v) { c.learning_rate = to_double(k, v); },
       [](const auto& c) { return text::format_double(c.learning_rate); }},
      {"epochs", [](auto& c, auto& k, auto& v) { c.epochs = to_u64(k, v); },
       [](const auto& c) { return std::to_string(c.epochs); }},
      {"batch_size", [](auto& c, auto& k, auto& v) { c.batch_size = to_u64(k, v); },
       [](const auto& c) { return std::to_string(c.batch_size); }},
      {"optimizer",
       [](auto& c, auto& k, auto& v) {
         const auto lowered = text::to_lower(v);
         if (lowered != "adam" && lowered != "sgd") {
           throw Error(ErrorCode::InvalidArgument, k + ": expected adam or sgd, got '" + v + "'");
         }
         c.optimizer = lowered;
       },
       [](const auto& c) { return quoted(c.optimizer); }},
      {"momentum", [](auto& c, auto& k, auto& v) { c.momentum = to_double(k, v); },
       [](const auto& c) { return text::format_double(c.momentum); }},
      {"beta1", [](auto& c, auto& k, auto& v) { c.beta1 = to_double(k, v); },
       [](const auto& c) { return text::format_double(c.beta1); }},
      {"beta2", [](auto& c, auto& k, auto& v) { c.beta2 = to_double(k, v); },
       [](const auto& c) { return text::format_double(c.beta2); }},
      {"epsilon", [](auto& c, auto& k, auto& v) { c.epsilon = to_double(k, v); },
       [](const auto& c) { return text::format_double(c.epsilon); }},
      {"patience", [](auto& c, auto& k, auto& v) { c.patience = to_u64(k, v); },
       [](const auto& c) { return std::to_string(c.patience); }},
      {"seed", [](auto& c, auto& k, auto& v) { c.seed = to_u64(k, v); },
       [](const auto& c) { return std::to_string(c.seed); }},
  };
  return specs;
}

void write_text(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  out << body;
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

std::vector<const Signal*> first_per_class(const Dataset& dataset, std::size_t per_class) {
  std::vector<const Signal*> picked;
  for (const Label label : {Label::Like, Label::Dislike}) {
    std::size_t taken = 0;
    for (const auto& s : dataset.signals) {
      if (taken == per_class) break;
      if (s.label == label) {
        picked.push_back(&s);
        ++taken;
      }
    }
  }
  return picked;
}

PlotSeries time_series(const std::string& name, const std::vector<double>& values, double rate) {
  PlotSeries series{name, {}};
  series.points.reserve(values.size());
  for (std::size_t t = 0; t < values.size(); ++t) {
    series.points.emplace_back(static_cast<double>(t) / rate, values[t]);
  }
  return series;
}

// A directory we may replace: absent, empty, or produced by an earlier run.
bool replaceable(const fs::path& dir) {
  if (!fs::exists(dir)) return true;
  if (!fs::is_directory(dir)) return false;
  return fs::is_empty(dir) || fs::exists(dir / "run-manifest.toml");
}

}  // namespace

TrainConfig PipelineConfig::train_config() const {
  TrainConfig config;
  config.learning_rate = learning_rate;
  config.epochs = epochs;
  config.batch_size = batch_size;
  if (optimizer == "sgd") {
    config.optimizer = Sgd{momentum};
  } else {
    config.optimizer = Adam{beta1, beta2, epsilon};
  }
  config.early_stop_patience = patience;
  config.seed = fan_out(seed).shuffle;
  return config;
}

const std::vector<std::string>& pipeline_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& spec : key_specs()) out.push_back(spec.key);
    return out;
  }();
  return keys;
}

void apply_setting(PipelineConfig& config, const std::string& key, const std::string& value) {
  const auto& specs = key_specs();
  const auto it = std::find_if(specs.begin(), specs.end(), [&](const KeySpec& s) { return s.key == key; });
  if (it == specs.end()) throw Error(ErrorCode::InvalidArgument, "unknown setting '" + key + "'");
  it->set(config, key, value);
}

std::map<std::string, std::string> parse_config_text(const std::string& source) {
  std::map<std::string, std::string> out;
  std::istringstream in(source);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    // A '#' inside a quoted value is kept.
    bool in_quotes = false;
    for (std::size_t i = 0; i < view.size(); ++i) {
      if (view[i] == '"') in_quotes = !in_quotes;
      if (view[i] == '#' && !in_quotes) {
        view = view.substr(0, i);
        break;
      }
    }
    view = text::trim(view);
    if (view.empty()) continue;
    if (view.front() == '[') continue;  // section headers are ignored
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::ParseError, "config line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = std::string(text::trim(view.substr(0, eq)));
    auto value = text::trim(view.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (key.empty()) throw Error(ErrorCode::ParseError, "config line " + std::to_string(line_no) + ": empty key");
    out[key] = std::string(value);
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const fs::path& path) {
  return parse_config_text(text::read_file(path.string()));
}

PipelineConfig resolve_config(const std::optional<fs::path>& config_file,
                              const std::map<std::string, std::string>& flag_overrides) {
  PipelineConfig config;
  if (config_file) {
    for (const auto& [key, value] : read_config_file(*config_file)) apply_setting(config, key, value);
  }
  for (const auto& [key, value] : flag_overrides) apply_setting(config, key, value);
  return config;
}

std::string to_config_text(const PipelineConfig& config) {
  std::ostringstream out;
  out << "# resolved eegpref configuration\n";
  for (const auto& spec : key_specs()) out << spec.key << " = " << spec.get(config) << '\n';
  return out.str();
}

void validate(const PipelineConfig& config) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (!(config.sampling_rate_hz > 0.0)) fail("sampling_rate must be positive");
  if (config.length < kMinSignalLength) fail("length must be >= 8");
  if (config.input_dim < 2) fail("input_dim must be >= 2");
  if (std::any_of(config.hidden.begin(), config.hidden.end(), [](std::size_t h) { return h < 1; })) {
    fail("hidden widths must be >= 1");
  }
  if (!(config.lambda >= 0.0)) fail("lambda must be >= 0");
  if (config.boot_mult < 1) fail("boot_mult must be >= 1");
  if (!(config.split > 0.0 && config.split < 1.0)) {
    throw Error(ErrorCode::BadFraction, "split must lie strictly between 0 and 1");
  }
  if (!(config.learning_rate > 0.0)) fail("learning_rate must be positive");
  if (config.epochs < 1) fail("epochs must be >= 1");
  if (config.batch_size < 1) fail("batch_size must be >= 1");
  if (!(config.momentum >= 0.0 && config.momentum < 1.0)) fail("momentum must lie in [0, 1)");
  if (!(config.beta1 >= 0.0 && config.beta1 < 1.0 && config.beta2 >= 0.0 && config.beta2 < 1.0)) {
    fail("beta1 and beta2 must lie in [0, 1)");
  }
  if (!(config.epsilon > 0.0)) fail("epsilon must be positive");
}

Dataset load_input(const fs::path& path, std::size_t length, double sampling_rate_hz) {
  if (path.empty()) throw Error(ErrorCode::InvalidArgument, "no input path given");
  if (!fs::exists(path)) throw Error(ErrorCode::IoFailure, "input not found: " + path.string());
  auto dataset = is_manifest_csv(path) ? ingest_raw(path, sampling_rate_hz)
                                       : read_canonical_csv(path, sampling_rate_hz);
  return resample_to_length(dataset, length);
}

CompareSettings compare_settings(const PipelineConfig& config) {
  CompareSettings settings;
  settings.smoother.lambda = config.lambda;
  settings.input_dim = config.input_dim;
  settings.hidden = config.hidden;
  settings.train_fraction = config.split;
  settings.train = config.train_config();
  settings.master_seed = config.seed;
  return settings;
}

ArmConfig full_arm(const PipelineConfig& config) {
  auto arm = full_arm();
  arm.transform = config.transform;
  arm.boot_mult = config.boot_mult;
  return arm;
}

std::vector<PlotSeries> signal_series(const Dataset& dataset, std::size_t per_class) {
  std::vector<PlotSeries> out;
  for (const auto* s : first_per_class(dataset, per_class)) {
    out.push_back(time_series(std::string(to_string(s->label)) + " " + s->id, s->samples, s->sampling_rate_hz));
  }
  return out;
}

std::vector<PlotSeries> lowfreq_series(const Dataset& dataset, const SmootherConfig& smoother,
                                       std::size_t per_class) {
  std::vector<PlotSeries> out;
  for (const auto* s : first_per_class(dataset, per_class)) {
    const auto name = std::string(to_string(s->label)) + " " + s->id;
    out.push_back(time_series(name, s->samples, s->sampling_rate_hz));
    out.push_back(time_series(name + " low-freq", smooth_whittaker(s->samples, smoother), s->sampling_rate_hz));
  }
  return out;
}

std::vector<PlotSeries> history_series(const ComparisonReport& report) {
  std::vector<PlotSeries> out;
  for (const auto* arm : {&report.full, &report.baseline}) {
    PlotSeries train{arm->config.name + " train accuracy", {}};
    PlotSeries val{arm->config.name + " validation accuracy", {}};
    for (std::size_t e = 0; e < arm->history.epochs.size(); ++e) {
      const auto epoch = static_cast<double>(e + 1);
      train.points.emplace_back(epoch, arm->history.epochs[e].train_accuracy);
      val.points.emplace_back(epoch, arm->history.epochs[e].val_accuracy);
    }
    out.push_back(std::move(train));
    out.push_back(std::move(val));
  }
  return out;
}

std::string class_stats_to_json(const ClassStats& stats) {
  nlohmann::ordered_json j;
  for (const Label label : {Label::Like, Label::Dislike}) {
    const auto& c = stats.of(label);
    nlohmann::ordered_json entry;
    entry["count"] = c.count;
    if (c.variance) {
      entry["mean_variance"] = c.variance->mean_variance;
      entry["min_variance"] = c.variance->min_variance;
      entry["max_variance"] = c.variance->max_variance;
      entry["mean_amplitude"] = c.variance->mean_amplitude;
    }
    j[std::string(to_string(label))] = entry;
  }
  return j.dump(2) + "\n";
}

ComparisonReport run_pipeline(const PipelineConfig& config) {
  validate(config);
  auto out_dir = config.out.lexically_normal();
  if (!out_dir.has_filename()) out_dir = out_dir.parent_path();
  if (out_dir.empty() || out_dir == ".") throw Error(ErrorCode::InvalidArgument, "output directory must be named");
  if (!replaceable(out_dir)) {
    throw Error(ErrorCode::InvalidArgument,
                "refusing to replace " + out_dir.string() + ": not an earlier eegpref output");
  }
  // All input validation and computation happens before anything touches disk.
  const auto dataset = load_input(config.input, config.length, config.sampling_rate_hz);
  const auto settings = compare_settings(config);
  auto report = compare_pipelines(dataset, baseline_arm(), full_arm(config), settings);
  const auto lowfreq = to_dataset(extract_lowfreq_dataset(dataset, settings.smoother),
                                  config.sampling_rate_hz, dataset.source + "#lowfreq");

  auto staging = out_dir;
  staging += ".staging";
  fs::remove_all(staging);
  fs::create_directories(staging);
  try {
    write_text(staging / "run-manifest.toml", to_config_text(config));
    write_canonical_csv(lowfreq, staging / "lowfreq.csv");
    save_model(report.full.model, staging / "model.json");
    save_model(report.baseline.model, staging / "baseline-model.json");
    write_text(staging / "report.json", report_to_json(report));
    write_text(staging / "class-stats.json", class_stats_to_json(class_variance_stats(dataset)));

    const auto fig1 = signal_series(dataset, 1);
    const auto fig1_multi = signal_series(dataset, 5);
    const auto fig2 = lowfreq_series(dataset, settings.smoother, 1);
    const auto fig3 = history_series(report);
    for (const auto& [stem, series, title] :
         {std::tuple{"fig1-signals", &fig1, "Like/Dislike sample signals"},
          std::tuple{"fig1-multiple", &fig1_multi, "Multiple Like/Dislike signals"},
          std::tuple{"fig2-lowfreq", &fig2, "Sample signals and their low-frequency components"},
          std::tuple{"fig3-history", &fig3, "Classification accuracy per epoch"}}) {
      emit_plot(*series, PlotFormat::Csv, staging / (std::string(stem) + ".csv"));
      emit_plot(*series, PlotFormat::Svg, staging / (std::string(stem) + ".svg"), title);
    }

    if (fs::exists(out_dir)) fs::remove_all(out_dir);
    fs::rename(staging, out_dir);
  } catch (...) {
    std::error_code ignored;
    fs::remove_all(staging, ignored);
    throw;
  }
  return report;
}

}  // namespace eegpref
