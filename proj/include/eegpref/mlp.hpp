#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "eegpref/signal.hpp"

namespace eegpref {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline constexpr int kModelFormatVersion = 1;
inline constexpr std::size_t kDefaultInputDim = 128;
inline const std::vector<std::size_t> kDefaultHidden{128, 32};

enum class Activation { Relu, Sigmoid };
std::string_view to_string(Activation activation) noexcept;

struct LayerSpec {
  std::size_t input_dim{1};
  std::size_t output_dim{1};
  Activation activation{Activation::Relu};
};

struct DenseLayer {
  LayerSpec spec;
  Matrix weights;  // output_dim x input_dim
  Vector bias;     // output_dim
};

// Hidden relu layers followed by a single sigmoid unit.
struct MlpModel {
  std::vector<DenseLayer> layers;
  int format_version{kModelFormatVersion};

  std::size_t input_dim() const;
  std::size_t parameter_count() const noexcept;
};

// Throws BadDims / NonFiniteInput when the layer chain is malformed.
void validate(const MlpModel& model);

// He-normal for relu layers, Xavier (std sqrt(1/fan_in)) for the sigmoid head,
// zero biases. Draws come from Rng64(seed) layer by layer, row-major.
MlpModel init_mlp(std::size_t input_dim, const std::vector<std::size_t>& hidden, std::uint64_t seed);

// One probability per batch row.
Vector forward(const MlpModel& model, const Matrix& batch);

// Mean binary cross-entropy with probabilities clipped to [1e-7, 1 - 1e-7].
double bce_loss(const Vector& probabilities, const Vector& targets);

// Same shapes as the model's parameters.
struct Gradients {
  std::vector<Matrix> weights;
  std::vector<Vector> bias;

  double max_abs() const noexcept;
};

// Exact gradients of mean BCE (unclipped analytic form, dL/dz_out = (p - y)/batch).
Gradients backward(const MlpModel& model, const Matrix& batch, const Vector& targets);

// Max over all parameters of |g_a - g_n| / max(|g_a|, |g_n|, 1e-8) with
// central differences of step h.
double grad_check(const MlpModel& model, const Matrix& batch, const Vector& targets, double h = 1e-5);

struct Sgd {
  double momentum{0.0};
};

struct Adam {
  double beta1{0.9};
  double beta2{0.999};
  double epsilon{1e-8};
};

using Optimizer = std::variant<Sgd, Adam>;

struct TrainConfig {
  double learning_rate{1e-3};
  std::size_t epochs{100};
  std::size_t batch_size{32};
  Optimizer optimizer{Adam{}};
  std::size_t early_stop_patience{10};  // 0 disables
  std::uint64_t seed{0};
};

struct EpochRecord {
  double train_loss{0.0};
  double train_accuracy{0.0};
  double val_loss{0.0};
  double val_accuracy{0.0};
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch{0};  // index into epochs
  bool stopped_early{false};
};

// Tracks the best validation loss and decides when patience is exhausted.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

  // Returns true when training should stop after this epoch.
  bool update(std::size_t epoch, double val_loss);

  bool improved_last() const noexcept { return improved_last_; }
  std::size_t best_epoch() const noexcept { return best_epoch_; }

 private:
  std::size_t patience_;
  std::optional<double> best_loss_;
  std::size_t best_epoch_{0};
  bool improved_last_{false};
};

struct LabeledBatch {
  Matrix x;
  Vector y;

  std::size_t rows() const noexcept { return static_cast<std::size_t>(x.rows()); }
};

struct TrainResult {
  MlpModel model;
  TrainHistory history;
};

// Mini-batch training with a seeded shuffle each epoch. With early stopping
// enabled the returned parameters are those of the best validation-loss epoch.
TrainResult train(MlpModel model, const LabeledBatch& train_set, const LabeledBatch& val_set,
                  const TrainConfig& config);

// Fraction of rows where (p >= 0.5) matches the 0/1 target.
double binary_accuracy(const Vector& probabilities, const Vector& targets);

// p >= threshold -> Like.
std::vector<Label> predict_labels(const MlpModel& model, const Matrix& batch, double threshold = 0.5);
std::vector<Label> threshold_labels(const Vector& probabilities, double threshold = 0.5);

std::string model_to_json(const MlpModel& model);
MlpModel model_from_json(const std::string& text);
void save_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);

}  // namespace eegpref
