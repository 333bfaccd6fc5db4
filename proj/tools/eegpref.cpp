// eegpref command-line tool: synthetic data, stage-by-stage processing through
// the canonical CSV, training/evaluation, the two-arm comparison and figures.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "eegpref/augment.hpp"
#include "eegpref/error.hpp"
#include "eegpref/evaluation.hpp"
#include "eegpref/mlp.hpp"
#include "eegpref/pipeline.hpp"
#include "eegpref/plot.hpp"
#include "eegpref/signal.hpp"
#include "eegpref/smoother.hpp"

namespace fs = std::filesystem;
using namespace eegpref;

namespace {

// Flags that map onto PipelineConfig keys. Only flags actually given on the
// command line override the config file.
struct SharedFlags {
  std::optional<std::string> config_file;
  std::map<std::string, std::string> values;
  std::vector<std::pair<std::string, CLI::Option*>> options;

  CLI::Option* add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    auto* option = app->add_option(flag, values[key], help);
    options.emplace_back(key, option);
    return option;
  }

  PipelineConfig resolve() const {
    std::map<std::string, std::string> given;
    for (const auto& [key, option] : options) {
      if (option->count() > 0) given[key] = values.at(key);
    }
    std::optional<fs::path> file;
    if (config_file) file = *config_file;
    return resolve_config(file, given);
  }
};

void add_config(CLI::App* app, SharedFlags& flags) {
  app->add_option("--config", flags.config_file, "key = value config file (flags override it)");
}

void add_input_flags(CLI::App* app, SharedFlags& flags) {
  flags.add(app, "--in", "input", "input manifest or canonical CSV");
  flags.add(app, "--fs", "sampling_rate", "sampling rate in Hz (default 128)");
}

void add_model_flags(CLI::App* app, SharedFlags& flags) {
  flags.add(app, "--input-dim", "input_dim", "ANN input length (default 128)");
  flags.add(app, "--hidden", "hidden", "hidden layer widths, comma separated (default 128,32)");
  flags.add(app, "--boot-mult", "boot_mult", "bootstrap multiplier for the training set (default 3)");
  flags.add(app, "--split", "split", "train fraction (default 0.8)");
  flags.add(app, "--lr", "learning_rate", "learning rate (default 1e-3)");
  flags.add(app, "--epochs", "epochs", "maximum epochs (default 100)");
  flags.add(app, "--batch-size", "batch_size", "mini-batch size (default 32)");
  flags.add(app, "--optimizer", "optimizer", "adam | sgd (default adam)");
  flags.add(app, "--momentum", "momentum", "SGD momentum (default 0)");
  flags.add(app, "--patience", "patience", "early-stopping patience, 0 disables (default 10)");
  flags.add(app, "--seed", "seed", "master seed (default 42)");
}

void write_text(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  out << body;
}

Dataset read_features(const PipelineConfig& config) {
  if (config.input.empty()) throw Error(ErrorCode::InvalidArgument, "--in is required");
  if (!fs::exists(config.input)) throw Error(ErrorCode::IoFailure, "input not found: " + config.input.string());
  return read_canonical_csv(config.input, config.sampling_rate_hz);
}

std::vector<LowFreqComponent> resampled(const Dataset& dataset, std::size_t length) {
  return to_components(resample_to_length(dataset, length));
}

std::vector<Label> labels_of(const std::vector<LowFreqComponent>& components) {
  std::vector<Label> out;
  for (const auto& c : components) out.push_back(c.label);
  return out;
}

PlotFormat format_for(const fs::path& path) {
  return path.extension() == ".svg" ? PlotFormat::Svg : PlotFormat::Csv;
}

std::vector<PlotSeries> history_from_report(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  std::vector<PlotSeries> out;
  for (const auto& [name, arm] : doc.at("arms").items()) {
    for (const std::string metric : {"train_accuracy", "val_accuracy"}) {
      PlotSeries series{name + " " + metric, {}};
      const auto values = arm.at("history").at(metric).get<std::vector<double>>();
      for (std::size_t e = 0; e < values.size(); ++e) series.points.emplace_back(static_cast<double>(e + 1), values[e]);
      out.push_back(std::move(series));
    }
  }
  return out;
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::SolverFailure:
    case ErrorCode::DivergenceDetected:
    case ErrorCode::NonFiniteActivation:
      return 1;
    default:
      return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eegpref: single-channel EEG Like/Dislike classification pipeline"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "write a seeded synthetic dataset as canonical CSV");
  SynthConfig synth_config;
  std::string synth_out;
  synth->add_option("--n", synth_config.n, "number of signals (default 1000)");
  synth->add_option("--balance", synth_config.balance, "fraction of Like signals (default 0.5)");
  synth->add_option("--sigma-mult", synth_config.dislike_sigma_mult, "Dislike noise multiplier (default 2)");
  synth->add_option("--seed", synth_config.seed, "generator seed (default 42)");
  synth->add_option("--length", synth_config.length, "samples per signal (default 512)");
  synth->add_option("--fs", synth_config.sampling_rate_hz, "sampling rate in Hz (default 128)");
  synth->add_option("--out", synth_out, "output CSV")->required();

  // ingest
  auto* ingest = app.add_subcommand("ingest", "read a manifest, resample, write canonical CSV");
  SharedFlags ingest_flags;
  add_config(ingest, ingest_flags);
  add_input_flags(ingest, ingest_flags);
  ingest_flags.add(ingest, "--length", "length", "resample length (default 512)");
  ingest_flags.add(ingest, "--out", "out", "output CSV")->required();

  // filter
  auto* filter = app.add_subcommand("filter", "extract low-frequency components");
  SharedFlags filter_flags;
  bool filter_normalize = false;
  add_config(filter, filter_flags);
  add_input_flags(filter, filter_flags);
  filter_flags.add(filter, "--lambda", "lambda", "smoothing weight (default 1600)");
  filter_flags.add(filter, "--out", "out", "output CSV")->required();
  filter->add_flag("--normalize", filter_normalize, "z-score each signal before smoothing");

  // transform
  auto* transform = app.add_subcommand("transform", "apply the elementwise nonlinear transform");
  SharedFlags transform_flags;
  add_config(transform, transform_flags);
  add_input_flags(transform, transform_flags);
  transform_flags.add(transform, "--transform", "transform", "identity|signed-log|cube-root|tanh:<s>");
  transform_flags.add(transform, "--out", "out", "output CSV")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "train the MLP on a feature CSV");
  SharedFlags train_flags;
  std::string history_out;
  add_config(train_cmd, train_flags);
  add_input_flags(train_cmd, train_flags);
  add_model_flags(train_cmd, train_flags);
  train_flags.add(train_cmd, "--out", "out", "output model JSON")->required();
  train_cmd->add_option("--history", history_out, "optional per-epoch history JSON");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a model on a feature CSV");
  SharedFlags eval_flags;
  std::string model_path;
  std::string metrics_out;
  bool eval_validation = false;
  add_config(eval_cmd, eval_flags);
  add_input_flags(eval_cmd, eval_flags);
  eval_flags.add(eval_cmd, "--split", "split", "train fraction used when training");
  eval_flags.add(eval_cmd, "--seed", "seed", "master seed used when training");
  eval_cmd->add_option("--model", model_path, "model JSON")->required();
  eval_cmd->add_flag("--validation", eval_validation, "score only the validation half of the split");
  eval_cmd->add_option("--out", metrics_out, "metrics JSON (stdout when omitted)");

  // compare
  auto* compare = app.add_subcommand("compare", "train baseline and full arms on one split");
  SharedFlags compare_flags;
  add_config(compare, compare_flags);
  add_input_flags(compare, compare_flags);
  add_model_flags(compare, compare_flags);
  compare_flags.add(compare, "--length", "length", "resample length (default 512)");
  compare_flags.add(compare, "--lambda", "lambda", "smoothing weight (default 1600)");
  compare_flags.add(compare, "--transform", "transform", "full-arm transform (default signed-log)");
  compare_flags.add(compare, "--out", "out", "report JSON")->required();

  // plot
  auto* plot = app.add_subcommand("plot", "emit a figure as CSV or SVG");
  SharedFlags plot_flags;
  std::string plot_kind = "signals";
  std::size_t per_class = 1;
  add_config(plot, plot_flags);
  add_input_flags(plot, plot_flags);
  plot_flags.add(plot, "--lambda", "lambda", "smoothing weight for --kind lowfreq");
  plot_flags.add(plot, "--out", "out", "output .csv or .svg")->required();
  plot->add_option("--kind", plot_kind, "signals | lowfreq | history (history reads a report JSON)")
      ->check(CLI::IsMember({"signals", "lowfreq", "history"}));
  plot->add_option("--per-class", per_class, "signals drawn per class (default 1)");

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "run every stage and write all artifacts");
  SharedFlags pipeline_flags;
  add_config(pipeline, pipeline_flags);
  add_input_flags(pipeline, pipeline_flags);
  add_model_flags(pipeline, pipeline_flags);
  pipeline_flags.add(pipeline, "--length", "length", "resample length (default 512)");
  pipeline_flags.add(pipeline, "--lambda", "lambda", "smoothing weight (default 1600)");
  pipeline_flags.add(pipeline, "--transform", "transform", "full-arm transform (default signed-log)");
  pipeline_flags.add(pipeline, "--out", "out", "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*synth) {
      write_canonical_csv(generate_synthetic(synth_config), synth_out);
    } else if (*ingest) {
      const auto config = ingest_flags.resolve();
      validate(config);
      write_canonical_csv(load_input(config.input, config.length, config.sampling_rate_hz), config.out);
    } else if (*filter) {
      const auto config = filter_flags.resolve();
      validate(config);
      auto dataset = read_features(config);
      if (filter_normalize) {
        for (auto& s : dataset.signals) s.samples = normalize_zscore(s.samples);
      }
      const auto components = extract_lowfreq_dataset(dataset, {config.lambda});
      write_canonical_csv(to_dataset(components, config.sampling_rate_hz, dataset.source), config.out);
    } else if (*transform) {
      const auto config = transform_flags.resolve();
      validate(config);
      const auto dataset = read_features(config);
      const auto components = nonlinear_transform(to_components(dataset), config.transform);
      write_canonical_csv(to_dataset(components, config.sampling_rate_hz, dataset.source), config.out);
    } else if (*train_cmd) {
      const auto config = train_flags.resolve();
      validate(config);
      const auto dataset = read_features(config);
      const auto seeds = fan_out(config.seed);
      const auto split = stratified_split(dataset, {config.split, seeds.split});
      auto train_rows = resampled(split.train, config.input_dim);
      if (config.boot_mult > 1) train_rows = bootstrap_dataset(train_rows, {config.boot_mult, seeds.bootstrap});
      const auto val_rows = resampled(split.validation, config.input_dim);
      auto result = train(init_mlp(config.input_dim, config.hidden, seeds.init), to_batch(train_rows),
                          to_batch(val_rows), config.train_config());
      save_model(result.model, config.out);
      if (!history_out.empty()) write_text(history_out, history_to_json(result.history));
    } else if (*eval_cmd) {
      const auto config = eval_flags.resolve();
      validate(config);
      auto dataset = read_features(config);
      if (eval_validation) dataset = stratified_split(dataset, {config.split, fan_out(config.seed).split}).validation;
      const auto model = load_model(model_path);
      const auto rows = resampled(dataset, model.input_dim());
      const auto metrics = compute_metrics(predict_labels(model, to_batch(rows).x), labels_of(rows));
      if (metrics_out.empty()) {
        std::cout << metrics_to_json(metrics);
      } else {
        write_text(metrics_out, metrics_to_json(metrics));
      }
    } else if (*compare) {
      const auto config = compare_flags.resolve();
      validate(config);
      const auto dataset = load_input(config.input, config.length, config.sampling_rate_hz);
      const auto report = compare_pipelines(dataset, baseline_arm(), full_arm(config), compare_settings(config));
      write_text(config.out, report_to_json(report));
      std::cout << "baseline val accuracy " << report.baseline.val_metrics.accuracy << "\n"
                << "full val accuracy " << report.full.val_metrics.accuracy << "\n";
    } else if (*plot) {
      const auto config = plot_flags.resolve();
      std::vector<PlotSeries> series;
      if (plot_kind == "history") {
        series = history_from_report(config.input);
      } else {
        const auto dataset = read_features(config);
        series = plot_kind == "signals" ? signal_series(dataset, per_class)
                                        : lowfreq_series(dataset, {config.lambda}, per_class);
      }
      emit_plot(series, format_for(config.out), config.out, plot_kind);
    } else if (*pipeline) {
      const auto config = pipeline_flags.resolve();
      const auto report = run_pipeline(config);
      std::cout << "baseline val accuracy " << report.baseline.val_metrics.accuracy << "\n"
                << "full val accuracy " << report.full.val_metrics.accuracy << "\n"
                << "artifacts in " << config.out.string() << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "eegpref: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "eegpref: internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
