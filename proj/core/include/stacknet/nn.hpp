#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "stacknet/rng.hpp"

namespace stacknet {

/// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

enum class Activation : std::uint8_t {
  kLinear = 0,
  kElu = 1,
  kSoftmax = 2,
};

const char* to_string(Activation a);

enum class DropoutMode { kTrain, kEval };

/// Exponential linear unit: x for x > 0, alpha * (exp(x) - 1) otherwise.
double elu(double x, double alpha = 1.0);
/// Derivative of elu with respect to x (right-continuous at 0).
double elu_derivative(double x, double alpha = 1.0);

/// In-place numerically stable softmax.
void softmax(std::span<double> logits);

struct DenseLayer {
  Matrix weights;  // out x in
  std::vector<double> bias;
  Activation activation = Activation::kElu;
  double dropout_rate = 0.0;

  std::size_t in_dim() const { return weights.cols; }
  std::size_t out_dim() const { return weights.rows; }

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Feedforward stack of dense layers ending in a softmax layer.
///
/// Hidden layers use ELU with alpha = 1. Dropout (inverted) applies to a
/// layer's output and is never applied to the softmax layer.
class Mlp {
 public:
  Mlp() = default;
  /// Validates layer chaining, finiteness, and the softmax/dropout rules;
  /// throws ShapeError or InputError.
  explicit Mlp(std::vector<DenseLayer> layers);

  /// Randomly initialized network: `hidden` ELU layers followed by a softmax
  /// layer. Weights ~ U[-sqrt(6/(fan_in+fan_out)), +...], biases zero.
  static Mlp random(std::size_t input_dim, std::span<const std::size_t> hidden,
                    std::size_t output_dim, double dropout_rate, Rng& init_rng);

  std::size_t input_dim() const { return layers_.empty() ? 0 : layers_.front().in_dim(); }
  std::size_t output_dim() const { return layers_.empty() ? 0 : layers_.back().out_dim(); }
  std::size_t num_parameters() const;

  const std::vector<DenseLayer>& layers() const { return layers_; }
  /// Mutable access for in-place updates. Callers must keep shapes intact.
  std::vector<DenseLayer>& mutable_layers() { return layers_; }

  friend bool operator==(const Mlp&, const Mlp&) = default;

 private:
  std::vector<DenseLayer> layers_;
};

/// Glorot-uniform fill of a weight matrix.
void glorot_uniform(Matrix& weights, Rng& rng);

/// Everything backward() needs from a forward pass.
struct ForwardTrace {
  /// inputs[i] is the input to layer i; inputs.size() == layers.
  std::vector<std::vector<double>> inputs;
  /// Pre-activation values of every layer.
  std::vector<std::vector<double>> pre_activations;
  /// Per-layer dropout scale applied to the activation (0 or 1/(1-r));
  /// empty for layers without dropout or in eval mode.
  std::vector<std::vector<double>> dropout_masks;
  std::vector<double> posterior;
};

/// Runs the network on one input vector. In train mode `dropout_rng` must be
/// non-null whenever any layer has a non-zero dropout rate.
/// Throws ShapeError on a width mismatch, InputError on non-finite input.
ForwardTrace forward(const Mlp& model, std::span<const double> input, DropoutMode mode,
                     Rng* dropout_rng = nullptr);

/// Posterior only, eval mode.
std::vector<double> predict(const Mlp& model, std::span<const double> input);

inline constexpr double kLossFloor = 1e-30;

/// -ln(posterior[label] + 1e-30). Throws InputError if label is out of range.
double cross_entropy(std::span<const double> posterior, std::size_t label);

struct LayerGradient {
  Matrix weights;
  std::vector<double> bias;

  friend bool operator==(const LayerGradient&, const LayerGradient&) = default;
};

struct Gradients {
  std::vector<LayerGradient> layers;
  std::vector<double> input;

  /// Zero gradients shaped like `model`.
  static Gradients zeros_like(const Mlp& model);
  /// this += scale * other. Shapes must match.
  void accumulate(const Gradients& other, double scale = 1.0);
  void scale(double factor);
};

/// Exact gradient of cross_entropy(forward(...).posterior, label) with respect
/// to every parameter and the input, reusing the masks stored in `trace`.
Gradients backward(const Mlp& model, const ForwardTrace& trace, std::size_t label);

/// p -= learning_rate * g for every parameter. Throws NumericError (and leaves
/// the model untouched) if any gradient entry is non-finite.
void sgd_step(Mlp& model, const Gradients& grads, double learning_rate);

inline constexpr double kGradCheckFloor = 1e-3;

/// Worst relative error between backward() and central finite differences of
/// the eval-mode loss, over every weight and bias. The relative error of one
/// entry is |a - n| / max(|a|, |n|, floor). Throws InputError if h <= 0.
double grad_check(const Mlp& model, std::span<const double> input, std::size_t label, double h,
                  double floor = kGradCheckFloor);

struct TrainConfig {
  double learning_rate = 0.01;
  std::size_t epochs = 10;
  double dropout_rate = 0.1;
  std::uint64_t seed = 1;
  std::size_t minibatch_size = 32;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

}  // namespace stacknet
