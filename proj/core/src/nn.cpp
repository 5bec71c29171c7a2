#include "stacknet/nn.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stacknet/errors.hpp"

namespace stacknet {
namespace {

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

std::string layer_tag(std::size_t i) {
  return "layer " + std::to_string(i);
}

}  // namespace

const char* to_string(Activation a) {
  switch (a) {
    case Activation::kLinear:
      return "linear";
    case Activation::kElu:
      return "elu";
    case Activation::kSoftmax:
      return "softmax";
  }
  return "unknown";
}

double elu(double x, double alpha) {
  return x > 0.0 ? x : alpha * std::expm1(x);
}

double elu_derivative(double x, double alpha) {
  return x > 0.0 ? 1.0 : alpha * std::exp(x);
}

void softmax(std::span<double> logits) {
  if (logits.empty()) return;
  const double max = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double& z : logits) {
    z = std::exp(z - max);
    sum += z;
  }
  for (double& z : logits) z /= sum;
}

Mlp::Mlp(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ShapeError("Mlp needs at least one layer");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const DenseLayer& l = layers_[i];
    if (l.weights.rows == 0 || l.weights.cols == 0)
      throw ShapeError(layer_tag(i) + " has an empty weight matrix");
    if (l.weights.data.size() != l.weights.rows * l.weights.cols)
      throw ShapeError(layer_tag(i) + " weight storage does not match its shape");
    if (l.bias.size() != l.weights.rows)
      throw ShapeError(layer_tag(i) + " bias length differs from its output width");
    if (i > 0 && l.in_dim() != layers_[i - 1].out_dim())
      throw ShapeError(layer_tag(i) + " input width " + std::to_string(l.in_dim()) +
                       " does not match previous output width " +
                       std::to_string(layers_[i - 1].out_dim()));
    if (!all_finite(l.weights.data) || !all_finite(l.bias))
      throw InputError(layer_tag(i) + " has non-finite parameters");
    if (!(l.dropout_rate >= 0.0 && l.dropout_rate < 1.0))
      throw InputError(layer_tag(i) + " dropout rate must be in [0, 1)");
    const bool last = i + 1 == layers_.size();
    if (last != (l.activation == Activation::kSoftmax))
      throw ShapeError("softmax must be the activation of the final layer only");
    if (last && l.dropout_rate != 0.0)
      throw InputError("dropout is not allowed on the softmax output layer");
  }
}

void glorot_uniform(Matrix& weights, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(weights.rows + weights.cols));
  for (double& w : weights.data) w = rng.uniform(-limit, limit);
}

Mlp Mlp::random(std::size_t input_dim, std::span<const std::size_t> hidden,
                std::size_t output_dim, double dropout_rate, Rng& init_rng) {
  std::vector<DenseLayer> layers;
  std::size_t in = input_dim;
  for (std::size_t i = 0; i <= hidden.size(); ++i) {
    const bool last = i == hidden.size();
    const std::size_t out = last ? output_dim : hidden[i];
    DenseLayer layer;
    layer.weights = Matrix(out, in);
    glorot_uniform(layer.weights, init_rng);
    layer.bias.assign(out, 0.0);
    layer.activation = last ? Activation::kSoftmax : Activation::kElu;
    layer.dropout_rate = last ? 0.0 : dropout_rate;
    layers.push_back(std::move(layer));
    in = out;
  }
  return Mlp(std::move(layers));
}

std::size_t Mlp::num_parameters() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weights.data.size() + l.bias.size();
  return n;
}

ForwardTrace forward(const Mlp& model, std::span<const double> input, DropoutMode mode,
                     Rng* dropout_rng) {
  if (input.size() != model.input_dim()) {
    std::ostringstream msg;
    msg << "input has " << input.size() << " values, model expects " << model.input_dim();
    throw ShapeError(msg.str());
  }
  if (!all_finite(input)) throw InputError("input contains non-finite values");

  const auto& layers = model.layers();
  ForwardTrace trace;
  trace.inputs.reserve(layers.size());
  trace.pre_activations.reserve(layers.size());
  trace.dropout_masks.resize(layers.size());

  std::vector<double> x(input.begin(), input.end());
  for (std::size_t li = 0; li < layers.size(); ++li) {
    const DenseLayer& layer = layers[li];
    const std::size_t out = layer.out_dim();
    const std::size_t in = layer.in_dim();
    std::vector<double> z(out);
    for (std::size_t o = 0; o < out; ++o) {
      const double* w = layer.weights.data.data() + o * in;
      double acc = 0.0;
      for (std::size_t i = 0; i < in; ++i) acc += w[i] * x[i];
      z[o] = acc + layer.bias[o];
    }

    std::vector<double> a = z;
    switch (layer.activation) {
      case Activation::kElu:
        for (double& v : a) v = elu(v);
        break;
      case Activation::kSoftmax:
        softmax(a);
        break;
      case Activation::kLinear:
        break;
    }

    if (mode == DropoutMode::kTrain && layer.dropout_rate > 0.0) {
      if (dropout_rng == nullptr) throw InputError("train-mode forward requires a dropout RNG");
      const double keep = 1.0 - layer.dropout_rate;
      std::vector<double>& mask = trace.dropout_masks[li];
      mask.resize(out);
      for (std::size_t o = 0; o < out; ++o) {
        mask[o] = dropout_rng->uniform() < keep ? 1.0 / keep : 0.0;
        a[o] *= mask[o];
      }
    }

    trace.inputs.push_back(std::move(x));
    trace.pre_activations.push_back(std::move(z));
    x = std::move(a);
  }
  trace.posterior = std::move(x);
  return trace;
}

std::vector<double> predict(const Mlp& model, std::span<const double> input) {
  return forward(model, input, DropoutMode::kEval).posterior;
}

double cross_entropy(std::span<const double> posterior, std::size_t label) {
  if (label >= posterior.size())
    throw InputError("label " + std::to_string(label) + " out of range for " +
                     std::to_string(posterior.size()) + " classes");
  return -std::log(posterior[label] + kLossFloor);
}

Gradients Gradients::zeros_like(const Mlp& model) {
  Gradients g;
  for (const auto& l : model.layers())
    g.layers.push_back({Matrix(l.weights.rows, l.weights.cols), std::vector<double>(l.bias.size())});
  g.input.assign(model.input_dim(), 0.0);
  return g;
}

void Gradients::accumulate(const Gradients& other, double s) {
  if (other.layers.size() != layers.size() || other.input.size() != input.size())
    throw ShapeError("gradient shapes differ");
  for (std::size_t li = 0; li < layers.size(); ++li) {
    auto& dst = layers[li];
    const auto& src = other.layers[li];
    if (dst.weights.data.size() != src.weights.data.size() || dst.bias.size() != src.bias.size())
      throw ShapeError("gradient shapes differ at " + layer_tag(li));
    for (std::size_t i = 0; i < dst.weights.data.size(); ++i)
      dst.weights.data[i] += s * src.weights.data[i];
    for (std::size_t i = 0; i < dst.bias.size(); ++i) dst.bias[i] += s * src.bias[i];
  }
  for (std::size_t i = 0; i < input.size(); ++i) input[i] += s * other.input[i];
}

void Gradients::scale(double factor) {
  for (auto& l : layers) {
    for (double& v : l.weights.data) v *= factor;
    for (double& v : l.bias) v *= factor;
  }
  for (double& v : input) v *= factor;
}

Gradients backward(const Mlp& model, const ForwardTrace& trace, std::size_t label) {
  const auto& layers = model.layers();
  if (trace.inputs.size() != layers.size() || trace.pre_activations.size() != layers.size() ||
      trace.dropout_masks.size() != layers.size())
    throw ShapeError("forward trace does not match the model depth");
  if (trace.posterior.size() != model.output_dim())
    throw ShapeError("forward trace posterior width does not match the model");
  if (label >= model.output_dim())
    throw InputError("label " + std::to_string(label) + " out of range");

  Gradients grads;
  grads.layers.resize(layers.size());

  // d/dz of -ln(p_y + eps) through the softmax.
  const double p_label = trace.posterior[label];
  const double ratio = p_label / (p_label + kLossFloor);
  std::vector<double> delta(trace.posterior.size());
  for (std::size_t o = 0; o < delta.size(); ++o)
    delta[o] = ratio * (trace.posterior[o] - (o == label ? 1.0 : 0.0));

  for (std::size_t li = layers.size(); li-- > 0;) {
    const DenseLayer& layer = layers[li];
    const std::vector<double>& x = trace.inputs[li];
    const std::size_t out = layer.out_dim();
    const std::size_t in = layer.in_dim();
    if (x.size() != in || trace.pre_activations[li].size() != out)
      throw ShapeError("forward trace shapes do not match " + layer_tag(li));

    LayerGradient& g = grads.layers[li];
    g.weights = Matrix(out, in);
    g.bias = delta;
    std::vector<double> d_input(in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      const double d = delta[o];
      double* gw = g.weights.data.data() + o * in;
      const double* w = layer.weights.data.data() + o * in;
      for (std::size_t i = 0; i < in; ++i) {
        gw[i] = d * x[i];
        d_input[i] += w[i] * d;
      }
    }

    if (li == 0) {
      grads.input = std::move(d_input);
      break;
    }

    // Back through the previous layer's dropout and activation.
    const DenseLayer& prev = layers[li - 1];
    const std::vector<double>& mask = trace.dropout_masks[li - 1];
    const std::vector<double>& z = trace.pre_activations[li - 1];
    if (!mask.empty()) {
      if (mask.size() != d_input.size()) throw ShapeError("dropout mask width mismatch");
      for (std::size_t i = 0; i < in; ++i) d_input[i] *= mask[i];
    }
    if (prev.activation == Activation::kElu)
      for (std::size_t i = 0; i < in; ++i) d_input[i] *= elu_derivative(z[i]);
    delta = std::move(d_input);
  }
  return grads;
}

void sgd_step(Mlp& model, const Gradients& grads, double learning_rate) {
  auto& layers = model.mutable_layers();
  if (grads.layers.size() != layers.size()) throw ShapeError("gradient depth differs from model");
  for (std::size_t li = 0; li < layers.size(); ++li) {
    const auto& g = grads.layers[li];
    if (g.weights.data.size() != layers[li].weights.data.size() ||
        g.bias.size() != layers[li].bias.size())
      throw ShapeError("gradient shape differs from model at " + layer_tag(li));
    if (!all_finite(g.weights.data) || !all_finite(g.bias))
      throw NumericError("non-finite gradient at " + layer_tag(li) + "; training aborted");
  }
  for (std::size_t li = 0; li < layers.size(); ++li) {
    auto& l = layers[li];
    const auto& g = grads.layers[li];
    for (std::size_t i = 0; i < l.weights.data.size(); ++i)
      l.weights.data[i] -= learning_rate * g.weights.data[i];
    for (std::size_t i = 0; i < l.bias.size(); ++i) l.bias[i] -= learning_rate * g.bias[i];
  }
}

double grad_check(const Mlp& model, std::span<const double> input, std::size_t label, double h,
                  double floor) {
  if (!(h > 0.0)) throw InputError("grad_check step h must be positive");
  const Gradients analytic = backward(model, forward(model, input, DropoutMode::kEval), label);

  Mlp probe = model;
  auto loss = [&] { return cross_entropy(predict(probe, input), label); };
  auto relative = [floor](double a, double n) {
    return std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
  };

  double worst = 0.0;
  auto check = [&](double& param, double grad) {
    const double saved = param;
    param = saved + h;
    const double up = loss();
    param = saved - h;
    const double down = loss();
    param = saved;
    worst = std::max(worst, relative(grad, (up - down) / (2.0 * h)));
  };

  auto& layers = probe.mutable_layers();
  for (std::size_t li = 0; li < layers.size(); ++li) {
    for (std::size_t i = 0; i < layers[li].weights.data.size(); ++i)
      check(layers[li].weights.data[i], analytic.layers[li].weights.data[i]);
    for (std::size_t i = 0; i < layers[li].bias.size(); ++i)
      check(layers[li].bias[i], analytic.layers[li].bias[i]);
  }
  return worst;
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw ConfigError("learning_rate must be a finite non-negative number");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
    throw ConfigError("dropout_rate must be in [0, 1)");
  if (minibatch_size < 1) throw ConfigError("minibatch_size must be at least 1");
}

}  // namespace stacknet
