#include "eegpref/evaluation.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "eegpref/error.hpp"
#include "eegpref/rng.hpp"

namespace eegpref {

namespace {

using ojson = nlohmann::ordered_json;

std::size_t train_count(double fraction, std::size_t class_size) {
  // The nudge keeps products such as 0.29 * 100 from flooring to 28.
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(class_size) + 1e-9));
}

std::vector<Label> labels_of(const std::vector<LowFreqComponent>& components) {
  std::vector<Label> out;
  out.reserve(components.size());
  for (const auto& c : components) out.push_back(c.label);
  return out;
}

ojson metrics_json(const Metrics& m) {
  ojson j;
  j["tp"] = m.tp;
  j["fp"] = m.fp;
  j["tn"] = m.tn;
  j["fn"] = m.fn;
  j["accuracy"] = m.accuracy;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  return j;
}

ojson history_json(const TrainHistory& h) {
  ojson j;
  j["best_epoch"] = h.best_epoch;
  j["stopped_early"] = h.stopped_early;
  std::vector<double> tl, ta, vl, va;
  for (const auto& e : h.epochs) {
    tl.push_back(e.train_loss);
    ta.push_back(e.train_accuracy);
    vl.push_back(e.val_loss);
    va.push_back(e.val_accuracy);
  }
  j["train_loss"] = tl;
  j["train_accuracy"] = ta;
  j["val_loss"] = vl;
  j["val_accuracy"] = va;
  return j;
}

ojson optimizer_json(const Optimizer& optimizer) {
  ojson j;
  if (const auto* sgd = std::get_if<Sgd>(&optimizer)) {
    j["kind"] = "sgd";
    j["momentum"] = sgd->momentum;
  } else {
    const auto& adam = std::get<Adam>(optimizer);
    j["kind"] = "adam";
    j["beta1"] = adam.beta1;
    j["beta2"] = adam.beta2;
    j["epsilon"] = adam.epsilon;
  }
  return j;
}

ojson arm_json(const ArmResult& arm) {
  ojson j;
  j["name"] = arm.config.name;
  j["normalize"] = arm.config.normalize;
  j["transform"] = to_string(arm.config.transform);
  j["boot_mult"] = arm.config.boot_mult;
  j["train_rows"] = arm.train_ids.size();
  j["train_metrics"] = metrics_json(arm.train_metrics);
  j["val_metrics"] = metrics_json(arm.val_metrics);
  j["history"] = history_json(arm.history);
  return j;
}

}  // namespace

DatasetSplit stratified_split(const Dataset& dataset, const SplitConfig& config) {
  if (!(config.train_fraction > 0.0 && config.train_fraction < 1.0)) {
    throw Error(ErrorCode::BadFraction, "train fraction must lie strictly between 0 and 1");
  }
  std::vector<bool> to_train(dataset.size(), false);
  Rng64 rng(config.seed);
  for (const Label label : {Label::Like, Label::Dislike}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      if (dataset.signals[i].label == label) members.push_back(i);
    }
    if (members.size() < 2) {
      throw Error(ErrorCode::ClassTooSmall, std::string(to_string(label)) + " class has fewer than 2 signals");
    }
    for (std::size_t i = members.size() - 1; i > 0; --i) {
      std::swap(members[i], members[rng.next_below(i + 1)]);
    }
    const auto n_train = train_count(config.train_fraction, members.size());
    for (std::size_t k = 0; k < n_train; ++k) to_train[members[k]] = true;
  }

  DatasetSplit split;
  split.train.source = dataset.source + "#train";
  split.validation.source = dataset.source + "#validation";
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    (to_train[i] ? split.train : split.validation).signals.push_back(dataset.signals[i]);
  }
  return split;
}

Metrics compute_metrics(const std::vector<Label>& predictions, const std::vector<Label>& truths) {
  if (predictions.size() != truths.size() || predictions.empty()) {
    throw Error(ErrorCode::LengthMismatch, "predictions and truths must be equal, non-zero lengths");
  }
  Metrics m;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const bool pred = predictions[i] == Label::Like;
    const bool truth = truths[i] == Label::Like;
    if (pred && truth) ++m.tp;
    else if (pred) ++m.fp;
    else if (truth) ++m.fn;
    else ++m.tn;
  }
  auto ratio = [](std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  m.accuracy = ratio(m.tp + m.tn, m.total());
  m.precision = ratio(m.tp, m.tp + m.fp);
  m.recall = ratio(m.tp, m.tp + m.fn);
  m.f1 = (m.precision + m.recall) == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

ArmConfig baseline_arm() { return {"baseline", true, TransformKind::identity(), 1}; }

ArmConfig full_arm() { return {"full", false, TransformKind::signed_log(), 3}; }

StageSeeds fan_out(std::uint64_t master_seed) noexcept {
  return {master_seed + 1, master_seed + 2, master_seed + 3, master_seed + 4};
}

std::vector<LowFreqComponent> arm_features(const Dataset& dataset, const ArmConfig& arm,
                                           const CompareSettings& settings) {
  std::vector<LowFreqComponent> out;
  out.reserve(dataset.size());
  for (const auto& s : dataset.signals) {
    try {
      auto values = arm.normalize ? normalize_zscore(s.samples) : s.samples;
      values = smooth_whittaker(values, settings.smoother);
      values = nonlinear_transform(values, arm.transform);
      out.push_back({s.id, s.label, resample_to_length(values, settings.input_dim)});
    } catch (const Error& e) {
      throw Error(e.code(), "signal '" + s.id + "': " + e.what());
    }
  }
  return out;
}

LabeledBatch to_batch(const std::vector<LowFreqComponent>& components) {
  if (components.empty()) return {};
  const auto cols = static_cast<Eigen::Index>(components.front().values.size());
  LabeledBatch batch{Matrix(static_cast<Eigen::Index>(components.size()), cols),
                     Vector(static_cast<Eigen::Index>(components.size()))};
  for (std::size_t i = 0; i < components.size(); ++i) {
    const auto& c = components[i];
    if (static_cast<Eigen::Index>(c.values.size()) != cols) {
      throw Error(ErrorCode::ShapeMismatch, "component '" + c.id + "' has a different length");
    }
    const auto row = static_cast<Eigen::Index>(i);
    batch.x.row(row) = Eigen::Map<const Eigen::RowVectorXd>(c.values.data(), cols);
    batch.y[row] = encode(c.label);
  }
  return batch;
}

ArmResult run_arm(const DatasetSplit& split, const ArmConfig& arm, const CompareSettings& settings) {
  if (arm.boot_mult < 1) throw Error(ErrorCode::InvalidArgument, "boot_mult must be >= 1");
  const auto seeds = fan_out(settings.master_seed);

  const auto train_plain = arm_features(split.train, arm, settings);
  const auto val_feats = arm_features(split.validation, arm, settings);
  // Multiplier 1 means no augmentation: the arm trains on the plain rows.
  const auto train_feats =
      arm.boot_mult > 1 ? bootstrap_dataset(train_plain, {arm.boot_mult, seeds.bootstrap}) : train_plain;

  auto train_config = settings.train;
  train_config.seed = seeds.shuffle;
  auto model = init_mlp(settings.input_dim, settings.hidden, seeds.init);
  const auto train_batch = to_batch(train_feats);
  const auto val_batch = to_batch(val_feats);
  auto trained = train(std::move(model), train_batch, val_batch, train_config);

  ArmResult result;
  result.config = arm;
  result.train_metrics =
      compute_metrics(predict_labels(trained.model, to_batch(train_plain).x), labels_of(train_plain));
  result.val_metrics = val_feats.empty()
                           ? Metrics{}
                           : compute_metrics(predict_labels(trained.model, val_batch.x), labels_of(val_feats));
  result.model = std::move(trained.model);
  result.history = std::move(trained.history);
  for (const auto& c : train_feats) result.train_ids.push_back(c.id);
  for (const auto& c : val_feats) result.val_ids.push_back(c.id);
  return result;
}

ComparisonReport compare_pipelines(const Dataset& dataset, const ArmConfig& baseline_cfg,
                                   const ArmConfig& full_cfg, const CompareSettings& settings) {
  validate(dataset);
  const auto seeds = fan_out(settings.master_seed);
  const auto split = stratified_split(dataset, {settings.train_fraction, seeds.split});

  ComparisonReport report;
  report.settings = settings;
  report.seeds = seeds;
  report.dataset_size = dataset.size();
  report.dataset_source = dataset.source;
  report.baseline = run_arm(split, baseline_cfg, settings);
  report.full = run_arm(split, full_cfg, settings);
  return report;
}

std::string metrics_to_json(const Metrics& metrics) { return metrics_json(metrics).dump(2) + "\n"; }

std::string history_to_json(const TrainHistory& history) { return history_json(history).dump(2) + "\n"; }

std::string report_to_json(const ComparisonReport& report) {
  const auto& s = report.settings;
  ojson j;
  j["format_version"] = 1;
  j["dataset"] = {{"source", report.dataset_source}, {"size", report.dataset_size}};
  ojson config;
  config["lambda"] = s.smoother.lambda;
  config["input_dim"] = s.input_dim;
  config["hidden"] = s.hidden;
  config["train_fraction"] = s.train_fraction;
  config["learning_rate"] = s.train.learning_rate;
  config["epochs"] = s.train.epochs;
  config["batch_size"] = s.train.batch_size;
  config["optimizer"] = optimizer_json(s.train.optimizer);
  config["early_stop_patience"] = s.train.early_stop_patience;
  config["master_seed"] = s.master_seed;
  j["config"] = config;
  j["seeds"] = {{"split", report.seeds.split},
                {"bootstrap", report.seeds.bootstrap},
                {"init", report.seeds.init},
                {"shuffle", report.seeds.shuffle}};
  j["validation_ids"] = report.full.val_ids;
  j["arms"] = {{"baseline", arm_json(report.baseline)}, {"full", arm_json(report.full)}};
  return j.dump(2) + "\n";
}

}  // namespace eegpref
