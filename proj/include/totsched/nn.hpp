#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "totsched/random.hpp"

namespace totsched::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Activation { identity, relu, tanh, mish };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;    // out
  Activation activation = Activation::identity;

  int in_dim() const { return static_cast<int>(weight.cols()); }
  int out_dim() const { return static_cast<int>(weight.rows()); }
};

/// Parameter-shaped buffer. Also holds the adjoint of the network input
/// when produced by backward().
struct Gradients {
  std::vector<Matrix> weight;
  std::vector<Vector> bias;
  Matrix input;

  Gradients& operator+=(const Gradients& other);
  Gradients& operator*=(double s);
};

class DenseNet;

/// Primal values recorded by one forward pass. Consumed by backward().
class Tape {
 public:
  bool consumed() const { return consumed_; }

 private:
  friend std::pair<Matrix, Tape> forward(const DenseNet&, const Matrix&);
  friend Gradients backward(Tape&, const Matrix&);

  const DenseNet* net_ = nullptr;
  std::vector<Matrix> inputs_;  // input to each layer
  std::vector<Matrix> pre_;     // pre-activation of each layer
  bool consumed_ = false;
};

/// Fully connected network. Inputs and outputs are column-major batches:
/// one column per sample.
class DenseNet {
 public:
  DenseNet() = default;
  explicit DenseNet(std::vector<DenseLayer> layers);

  /// Builds a net with layer widths `dims` (dims.front() = input), hidden
  /// activation on all but the last layer. Uniform fan-in initialisation.
  static DenseNet make(const std::vector<int>& dims, Activation hidden, Activation output, Rng& rng);

  int in_dim() const;
  int out_dim() const;
  std::size_t parameter_count() const;
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }

  /// Inference without a tape.
  Matrix operator()(const Matrix& input) const;
  Vector operator()(const Vector& input) const;

  std::vector<double> flatten() const;
  void assign(const std::vector<double>& flat);
  Gradients zero_gradients() const;

  bool all_finite() const;

  void save(std::ostream& os) const;
  static DenseNet load(std::istream& is);

 private:
  std::vector<DenseLayer> layers_;
};

std::pair<Matrix, Tape> forward(const DenseNet& net, const Matrix& input);

/// Gradient of sum(adjoint .* output) w.r.t. parameters and input.
Gradients backward(Tape& tape, const Matrix& output_adjoint);

/// Flattens gradients in the same order as DenseNet::flatten().
std::vector<double> flatten(const Gradients& grads);

/// theta_target <- tau * theta_source + (1 - tau) * theta_target
void soft_update(DenseNet& target, const DenseNet& source, double tau);

struct AdamState {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  std::vector<Matrix> m_weight, v_weight;
  std::vector<Vector> m_bias, v_bias;
};

class Adam {
 public:
  Adam() = default;
  Adam(const DenseNet& net, double learning_rate);

  /// Applies one bias-corrected update. Throws TrainingError naming the
  /// first layer with a non-finite gradient; the net is left untouched then.
  void step(DenseNet& net, const Gradients& grads);

  const AdamState& state() const { return state_; }

 private:
  AdamState state_;
};

/// Interleaved sin/cos embedding of a diffusion step index.
Vector sinusoidal_embed(int k, int dim = 16);

}  // namespace totsched::nn
