#include "eegpref/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "eegpref/error.hpp"
#include "eegpref/rng.hpp"
#include "text.hpp"

namespace eegpref {

namespace {

constexpr double kProbClip = 1e-7;
constexpr std::size_t kGradCheckMaxParams = 10'000;

double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void activate(Matrix& m, Activation activation) {
  if (activation == Activation::Relu) {
    m = m.cwiseMax(0.0);
  } else {
    m = m.unaryExpr([](double z) { return sigmoid(z); });
  }
}

// Pre-activations and activations of every layer for one batch.
struct ForwardPass {
  std::vector<Matrix> inputs;  // inputs[l] feeds layer l
  std::vector<Matrix> pre;     // pre[l] = inputs[l] W' + b
  Matrix output;
};

void check_batch(const MlpModel& model, const Matrix& batch) {
  if (model.layers.empty()) throw Error(ErrorCode::BadDims, "model has no layers");
  if (static_cast<std::size_t>(batch.cols()) != model.input_dim()) {
    throw Error(ErrorCode::ShapeMismatch, "batch has " + std::to_string(batch.cols()) +
                                              " columns, model expects " +
                                              std::to_string(model.input_dim()));
  }
  if (!batch.allFinite()) throw Error(ErrorCode::NonFiniteInput, "batch contains non-finite values");
}

ForwardPass run_forward(const MlpModel& model, const Matrix& batch) {
  check_batch(model, batch);
  ForwardPass pass;
  pass.inputs.reserve(model.layers.size());
  pass.pre.reserve(model.layers.size());
  Matrix current = batch;
  for (const auto& layer : model.layers) {
    Matrix z = current * layer.weights.transpose();
    z.rowwise() += layer.bias.transpose();
    pass.inputs.push_back(std::move(current));
    current = z;
    activate(current, layer.spec.activation);
    pass.pre.push_back(std::move(z));
    if (!current.allFinite()) {
      throw Error(ErrorCode::NonFiniteActivation, "non-finite activation in layer " +
                                                      std::to_string(pass.pre.size() - 1));
    }
  }
  pass.output = std::move(current);
  return pass;
}

double& parameter(MlpModel& model, std::size_t index) {
  for (auto& layer : model.layers) {
    const auto w = static_cast<std::size_t>(layer.weights.size());
    if (index < w) return layer.weights.data()[index];
    index -= w;
    const auto b = static_cast<std::size_t>(layer.bias.size());
    if (index < b) return layer.bias[static_cast<Eigen::Index>(index)];
    index -= b;
  }
  throw Error(ErrorCode::InvalidArgument, "parameter index out of range");
}

double gradient(const Gradients& g, std::size_t index) {
  for (std::size_t l = 0; l < g.weights.size(); ++l) {
    const auto w = static_cast<std::size_t>(g.weights[l].size());
    if (index < w) return g.weights[l].data()[index];
    index -= w;
    const auto b = static_cast<std::size_t>(g.bias[l].size());
    if (index < b) return g.bias[l][static_cast<Eigen::Index>(index)];
    index -= b;
  }
  throw Error(ErrorCode::InvalidArgument, "gradient index out of range");
}

// Optimiser state mirrors the parameter shapes.
struct Moments {
  std::vector<Matrix> w;
  std::vector<Vector> b;

  explicit Moments(const MlpModel& model) {
    for (const auto& layer : model.layers) {
      w.push_back(Matrix::Zero(layer.weights.rows(), layer.weights.cols()));
      b.push_back(Vector::Zero(layer.bias.size()));
    }
  }
};

class Stepper {
 public:
  Stepper(const MlpModel& model, const TrainConfig& config)
      : config_(config), first_(model), second_(model) {}

  void step(MlpModel& model, const Gradients& g) {
    ++t_;
    const double lr = config_.learning_rate;
    if (const auto* sgd = std::get_if<Sgd>(&config_.optimizer)) {
      for (std::size_t l = 0; l < model.layers.size(); ++l) {
        first_.w[l] = sgd->momentum * first_.w[l] - lr * g.weights[l];
        first_.b[l] = sgd->momentum * first_.b[l] - lr * g.bias[l];
        model.layers[l].weights += first_.w[l];
        model.layers[l].bias += first_.b[l];
      }
      return;
    }
    const auto& adam = std::get<Adam>(config_.optimizer);
    const double c1 = 1.0 - std::pow(adam.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(adam.beta2, static_cast<double>(t_));
    auto update = [&](auto& param, auto& m, auto& v, const auto& grad) {
      m = adam.beta1 * m + (1.0 - adam.beta1) * grad;
      v = adam.beta2 * v + (1.0 - adam.beta2) * grad.cwiseProduct(grad);
      param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + adam.epsilon);
    };
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
      update(model.layers[l].weights, first_.w[l], second_.w[l], g.weights[l]);
      update(model.layers[l].bias, first_.b[l], second_.b[l], g.bias[l]);
    }
  }

 private:
  TrainConfig config_;
  Moments first_;
  Moments second_;
  std::size_t t_{0};
};

LabeledBatch gather(const LabeledBatch& data, std::span<const std::size_t> rows) {
  LabeledBatch out{Matrix(static_cast<Eigen::Index>(rows.size()), data.x.cols()),
                   Vector(static_cast<Eigen::Index>(rows.size()))};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = static_cast<Eigen::Index>(rows[i]);
    out.x.row(static_cast<Eigen::Index>(i)) = data.x.row(src);
    out.y[static_cast<Eigen::Index>(i)] = data.y[src];
  }
  return out;
}

void validate(const TrainConfig& config) {
  if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate)) {
    throw Error(ErrorCode::InvalidArgument, "learning rate must be positive");
  }
  if (config.epochs < 1) throw Error(ErrorCode::InvalidArgument, "epochs must be >= 1");
  if (config.batch_size < 1) throw Error(ErrorCode::InvalidArgument, "batch size must be >= 1");
  if (const auto* sgd = std::get_if<Sgd>(&config.optimizer)) {
    if (!(sgd->momentum >= 0.0 && sgd->momentum < 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "momentum must lie in [0, 1)");
    }
  } else {
    const auto& adam = std::get<Adam>(config.optimizer);
    if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0 &&
          adam.epsilon > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "adam needs beta1, beta2 in [0, 1) and epsilon > 0");
    }
  }
}

void check_labeled(const LabeledBatch& data, const char* what) {
  if (data.x.rows() != data.y.size()) {
    throw Error(ErrorCode::ShapeMismatch, std::string(what) + ": inputs and targets differ in rows");
  }
}

}  // namespace

std::string_view to_string(Activation activation) noexcept {
  return activation == Activation::Relu ? "relu" : "sigmoid";
}

std::size_t MlpModel::input_dim() const {
  if (layers.empty()) throw Error(ErrorCode::BadDims, "model has no layers");
  return layers.front().spec.input_dim;
}

std::size_t MlpModel::parameter_count() const noexcept {
  std::size_t count = 0;
  for (const auto& layer : layers) count += static_cast<std::size_t>(layer.weights.size() + layer.bias.size());
  return count;
}

void validate(const MlpModel& model) {
  if (model.layers.empty()) throw Error(ErrorCode::BadDims, "model has no layers");
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const auto& layer = model.layers[l];
    const auto& spec = layer.spec;
    const auto where = "layer " + std::to_string(l);
    if (spec.input_dim < 1 || spec.output_dim < 1) throw Error(ErrorCode::BadDims, where + " has a zero dimension");
    if (static_cast<std::size_t>(layer.weights.rows()) != spec.output_dim ||
        static_cast<std::size_t>(layer.weights.cols()) != spec.input_dim ||
        static_cast<std::size_t>(layer.bias.size()) != spec.output_dim) {
      throw Error(ErrorCode::BadDims, where + " parameters do not match its spec");
    }
    if (l > 0 && model.layers[l - 1].spec.output_dim != spec.input_dim) {
      throw Error(ErrorCode::BadDims, where + " input does not chain with the previous layer");
    }
    if (!layer.weights.allFinite() || !layer.bias.allFinite()) {
      throw Error(ErrorCode::NonFiniteInput, where + " has non-finite parameters");
    }
  }
  const auto& head = model.layers.back().spec;
  if (head.output_dim != 1 || head.activation != Activation::Sigmoid) {
    throw Error(ErrorCode::BadDims, "final layer must be a single sigmoid unit");
  }
}

MlpModel init_mlp(std::size_t input_dim, const std::vector<std::size_t>& hidden, std::uint64_t seed) {
  if (input_dim < 1) throw Error(ErrorCode::BadDims, "input_dim must be >= 1");
  if (std::any_of(hidden.begin(), hidden.end(), [](std::size_t h) { return h < 1; })) {
    throw Error(ErrorCode::BadDims, "hidden layer widths must be >= 1");
  }

  Rng64 rng(seed);
  MlpModel model;
  std::size_t fan_in = input_dim;
  auto add_layer = [&](std::size_t out, Activation activation) {
    const double gain = activation == Activation::Relu ? 2.0 : 1.0;
    const double stddev = std::sqrt(gain / static_cast<double>(fan_in));
    DenseLayer layer{{fan_in, out, activation},
                     Matrix(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(fan_in)),
                     Vector::Zero(static_cast<Eigen::Index>(out))};
    for (Eigen::Index i = 0; i < layer.weights.size(); ++i) layer.weights.data()[i] = stddev * rng.next_gaussian();
    model.layers.push_back(std::move(layer));
    fan_in = out;
  };
  for (std::size_t width : hidden) add_layer(width, Activation::Relu);
  add_layer(1, Activation::Sigmoid);
  return model;
}

Vector forward(const MlpModel& model, const Matrix& batch) {
  auto pass = run_forward(model, batch);
  return pass.output.col(0);
}

double bce_loss(const Vector& probabilities, const Vector& targets) {
  if (probabilities.size() != targets.size()) {
    throw Error(ErrorCode::LengthMismatch, "probabilities and targets differ in length");
  }
  if (probabilities.size() == 0) throw Error(ErrorCode::LengthMismatch, "bce_loss of an empty batch");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < probabilities.size(); ++i) {
    const double p = std::clamp(probabilities[i], kProbClip, 1.0 - kProbClip);
    const double y = targets[i];
    sum -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
  }
  return sum / static_cast<double>(probabilities.size());
}

double Gradients::max_abs() const noexcept {
  double m = 0.0;
  for (const auto& w : weights) m = std::max(m, w.cwiseAbs().maxCoeff());
  for (const auto& b : bias) m = std::max(m, b.cwiseAbs().maxCoeff());
  return m;
}

Gradients backward(const MlpModel& model, const Matrix& batch, const Vector& targets) {
  if (batch.rows() != targets.size()) {
    throw Error(ErrorCode::ShapeMismatch, "batch and targets differ in rows");
  }
  if (batch.rows() == 0) throw Error(ErrorCode::ShapeMismatch, "backward on an empty batch");
  auto pass = run_forward(model, batch);
  const std::size_t depth = model.layers.size();

  Gradients g;
  g.weights.resize(depth);
  g.bias.resize(depth);

  // Sigmoid head with BCE: dL/dz = (p - y) / batch.
  Matrix delta = (pass.output.col(0) - targets) / static_cast<double>(batch.rows());
  for (std::size_t l = depth; l-- > 0;) {
    g.weights[l] = delta.transpose() * pass.inputs[l];
    g.bias[l] = delta.colwise().sum().transpose();
    if (l == 0) break;
    Matrix upstream = delta * model.layers[l].weights;
    const auto& z = pass.pre[l - 1];
    if (model.layers[l - 1].spec.activation == Activation::Relu) {
      delta = upstream.cwiseProduct((z.array() > 0.0).cast<double>().matrix());
    } else {
      const Matrix s = pass.inputs[l];  // sigmoid(z) already
      delta = upstream.cwiseProduct(s.cwiseProduct((1.0 - s.array()).matrix()));
    }
  }
  return g;
}

double grad_check(const MlpModel& model, const Matrix& batch, const Vector& targets, double h) {
  if (model.parameter_count() > kGradCheckMaxParams) {
    throw Error(ErrorCode::InvalidArgument, "grad_check is limited to 10^4 parameters");
  }
  const auto analytic = backward(model, batch, targets);
  MlpModel probe = model;
  double worst = 0.0;
  for (std::size_t i = 0; i < model.parameter_count(); ++i) {
    double& theta = parameter(probe, i);
    const double saved = theta;
    theta = saved + h;
    const double up = bce_loss(forward(probe, batch), targets);
    theta = saved - h;
    const double down = bce_loss(forward(probe, batch), targets);
    theta = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double exact = gradient(analytic, i);
    const double rel = std::abs(exact - numeric) / std::max({std::abs(exact), std::abs(numeric), 1e-8});
    worst = std::max(worst, rel);
  }
  return worst;
}

bool EarlyStopping::update(std::size_t epoch, double val_loss) {
  improved_last_ = !best_loss_ || val_loss < *best_loss_;
  if (improved_last_) {
    best_loss_ = val_loss;
    best_epoch_ = epoch;
  }
  return patience_ > 0 && epoch - best_epoch_ >= patience_;
}

double binary_accuracy(const Vector& probabilities, const Vector& targets) {
  if (probabilities.size() != targets.size()) {
    throw Error(ErrorCode::LengthMismatch, "probabilities and targets differ in length");
  }
  if (probabilities.size() == 0) return 0.0;
  std::size_t hits = 0;
  for (Eigen::Index i = 0; i < probabilities.size(); ++i) {
    hits += (probabilities[i] >= 0.5) == (targets[i] >= 0.5) ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(probabilities.size());
}

TrainResult train(MlpModel model, const LabeledBatch& train_set, const LabeledBatch& val_set,
                  const TrainConfig& config) {
  validate(model);
  validate(config);
  if (train_set.rows() == 0) throw Error(ErrorCode::EmptyTrainSet, "training set is empty");
  check_labeled(train_set, "train set");
  check_labeled(val_set, "validation set");
  const bool has_val = val_set.rows() > 0;
  if (!has_val && config.early_stop_patience > 0) {
    throw Error(ErrorCode::InvalidArgument, "early stopping needs a validation set");
  }

  Rng64 shuffle_rng(config.seed);
  Stepper stepper(model, config);
  EarlyStopping stopper(config.early_stop_patience);
  std::vector<std::size_t> order(train_set.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result{model, {}};
  double best_train_loss = 0.0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      std::swap(order[i], order[shuffle_rng.next_below(i + 1)]);
    }
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const auto stop = std::min(order.size(), start + config.batch_size);
      const auto mini = gather(train_set, std::span(order).subspan(start, stop - start));
      stepper.step(model, backward(model, mini.x, mini.y));
    }

    EpochRecord record;
    const Vector train_p = forward(model, train_set.x);
    record.train_loss = bce_loss(train_p, train_set.y);
    record.train_accuracy = binary_accuracy(train_p, train_set.y);
    if (has_val) {
      const Vector val_p = forward(model, val_set.x);
      record.val_loss = bce_loss(val_p, val_set.y);
      record.val_accuracy = binary_accuracy(val_p, val_set.y);
    }
    if (!std::isfinite(record.train_loss) || !std::isfinite(record.val_loss)) {
      throw Error(ErrorCode::DivergenceDetected, "non-finite loss at epoch " + std::to_string(epoch));
    }
    result.history.epochs.push_back(record);

    if (has_val) {
      const bool stop = stopper.update(epoch, record.val_loss);
      if (stopper.improved_last()) {
        result.history.best_epoch = epoch;
        if (config.early_stop_patience > 0) result.model = model;
      }
      if (stop) {
        result.history.stopped_early = true;
        break;
      }
    } else if (epoch == 0 || record.train_loss < best_train_loss) {
      best_train_loss = record.train_loss;
      result.history.best_epoch = epoch;
    }
  }
  if (config.early_stop_patience == 0) result.model = std::move(model);
  return result;
}

std::vector<Label> threshold_labels(const Vector& probabilities, double threshold) {
  std::vector<Label> out;
  out.reserve(static_cast<std::size_t>(probabilities.size()));
  for (Eigen::Index i = 0; i < probabilities.size(); ++i) {
    out.push_back(probabilities[i] >= threshold ? Label::Like : Label::Dislike);
  }
  return out;
}

std::vector<Label> predict_labels(const MlpModel& model, const Matrix& batch, double threshold) {
  return threshold_labels(forward(model, batch), threshold);
}

std::string model_to_json(const MlpModel& model) {
  nlohmann::ordered_json doc;
  doc["format_version"] = model.format_version;
  auto& layers = doc["layers"] = nlohmann::ordered_json::array();
  for (const auto& layer : model.layers) {
    nlohmann::ordered_json entry;
    entry["rows"] = layer.spec.output_dim;
    entry["cols"] = layer.spec.input_dim;
    entry["activation"] = std::string(to_string(layer.spec.activation));
    entry["w"] = std::vector<double>(layer.weights.data(), layer.weights.data() + layer.weights.size());
    entry["b"] = std::vector<double>(layer.bias.data(), layer.bias.data() + layer.bias.size());
    layers.push_back(std::move(entry));
  }
  return doc.dump() + "\n";
}

MlpModel model_from_json(const std::string& source) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(source);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptFile, std::string("model JSON does not parse: ") + e.what());
  }
  try {
    const int version = doc.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw Error(ErrorCode::VersionMismatch, "model format_version " + std::to_string(version) +
                                                  ", expected " + std::to_string(kModelFormatVersion));
    }
    MlpModel model;
    model.format_version = version;
    for (const auto& entry : doc.at("layers")) {
      const auto rows = entry.at("rows").get<std::size_t>();
      const auto cols = entry.at("cols").get<std::size_t>();
      const auto activation = entry.at("activation").get<std::string>();
      const auto w = entry.at("w").get<std::vector<double>>();
      const auto b = entry.at("b").get<std::vector<double>>();
      if (activation != "relu" && activation != "sigmoid") {
        throw Error(ErrorCode::CorruptFile, "unknown activation '" + activation + "'");
      }
      if (w.size() != rows * cols || b.size() != rows) {
        throw Error(ErrorCode::CorruptFile, "layer parameter counts do not match rows/cols");
      }
      DenseLayer layer{{cols, rows, activation == "relu" ? Activation::Relu : Activation::Sigmoid},
                       Eigen::Map<const Matrix>(w.data(), static_cast<Eigen::Index>(rows),
                                                static_cast<Eigen::Index>(cols)),
                       Eigen::Map<const Vector>(b.data(), static_cast<Eigen::Index>(rows))};
      model.layers.push_back(std::move(layer));
    }
    validate(model);
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptFile, std::string("malformed model JSON: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::VersionMismatch || e.code() == ErrorCode::CorruptFile) throw;
    throw Error(ErrorCode::CorruptFile, e.what());
  }
}

void save_model(const MlpModel& model, const std::filesystem::path& path) {
  validate(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  out << model_to_json(model);
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

MlpModel load_model(const std::filesystem::path& path) {
  return model_from_json(text::read_file(path.string()));
}

}  // namespace eegpref
