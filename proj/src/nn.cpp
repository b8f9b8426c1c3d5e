#include "totsched/nn.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "totsched/errors.hpp"

namespace totsched::nn {

namespace {

double softplus(double x) { return x > 20.0 ? x : std::log1p(std::exp(x)); }

void activate(Activation a, const Matrix& pre, Matrix& out) {
  switch (a) {
    case Activation::identity:
      out = pre;
      break;
    case Activation::relu:
      out = pre.cwiseMax(0.0);
      break;
    case Activation::tanh:
      out = pre.array().tanh().matrix();
      break;
    case Activation::mish:
      out = pre.unaryExpr([](double x) { return x * std::tanh(softplus(x)); });
      break;
  }
}

// d activation / d pre, evaluated elementwise.
Matrix derivative(Activation a, const Matrix& pre) {
  switch (a) {
    case Activation::identity:
      return Matrix::Ones(pre.rows(), pre.cols());
    case Activation::relu:
      return pre.unaryExpr([](double x) { return x > 0.0 ? 1.0 : 0.0; });
    case Activation::tanh:
      return pre.unaryExpr([](double x) {
        const double t = std::tanh(x);
        return 1.0 - t * t;
      });
    case Activation::mish:
      return pre.unaryExpr([](double x) {
        const double t = std::tanh(softplus(x));
        const double sig = 1.0 / (1.0 + std::exp(-x));
        return t + x * (1.0 - t * t) * sig;
      });
  }
  return {};
}

void write_double(std::ostream& os, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  os.write(buf, res.ptr - buf);
}

double read_double(std::istream& is) {
  std::string tok;
  if (!(is >> tok)) throw IoError("checkpoint truncated");
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw IoError("checkpoint: bad number '" + tok + "'");
  return v;
}

void expect_word(std::istream& is, const std::string& word) {
  std::string tok;
  if (!(is >> tok) || tok != word)
    throw IoError("checkpoint: expected '" + word + "', got '" + tok + "'");
}

}  // namespace

std::string to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::mish: return "mish";
  }
  return "identity";
}

Activation activation_from_string(const std::string& name) {
  if (name == "identity") return Activation::identity;
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  if (name == "mish") return Activation::mish;
  throw ConfigError("unknown activation '" + name + "'");
}

Gradients& Gradients::operator+=(const Gradients& other) {
  for (std::size_t l = 0; l < weight.size(); ++l) {
    weight[l] += other.weight[l];
    bias[l] += other.bias[l];
  }
  return *this;
}

Gradients& Gradients::operator*=(double s) {
  for (std::size_t l = 0; l < weight.size(); ++l) {
    weight[l] *= s;
    bias[l] *= s;
  }
  input *= s;
  return *this;
}

DenseNet::DenseNet(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ConfigError("DenseNet needs at least one layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (layer.bias.size() != layer.weight.rows())
      throw ConfigError("layer " + std::to_string(l) + ": bias length != output dim");
    if (l > 0 && layer.in_dim() != layers_[l - 1].out_dim())
      throw ConfigError("layer " + std::to_string(l) + ": input dim does not chain");
  }
}

DenseNet DenseNet::make(const std::vector<int>& dims, Activation hidden, Activation output, Rng& rng) {
  if (dims.size() < 2) throw ConfigError("DenseNet::make needs at least input and output dims");
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    if (dims[l] <= 0 || dims[l + 1] <= 0) throw ConfigError("layer dims must be positive");
    DenseLayer layer;
    const double bound = 1.0 / std::sqrt(static_cast<double>(dims[l]));
    layer.weight.resize(dims[l + 1], dims[l]);
    layer.bias.resize(dims[l + 1]);
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = uniform(rng, -bound, bound);
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = uniform(rng, -bound, bound);
    layer.activation = (l + 2 == dims.size()) ? output : hidden;
    layers.push_back(std::move(layer));
  }
  return DenseNet(std::move(layers));
}

int DenseNet::in_dim() const { return layers_.empty() ? 0 : layers_.front().in_dim(); }
int DenseNet::out_dim() const { return layers_.empty() ? 0 : layers_.back().out_dim(); }

std::size_t DenseNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

Matrix DenseNet::operator()(const Matrix& input) const {
  if (input.rows() != in_dim())
    throw ConfigError("input has " + std::to_string(input.rows()) + " rows, net expects " + std::to_string(in_dim()));
  Matrix x = input;
  Matrix pre;
  for (const auto& layer : layers_) {
    pre = layer.weight * x;
    pre.colwise() += layer.bias;
    activate(layer.activation, pre, x);
  }
  return x;
}

Vector DenseNet::operator()(const Vector& input) const {
  return (*this)(Matrix(input)).col(0);
}

std::vector<double> DenseNet::flatten() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const auto& l : layers_) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) out.push_back(l.weight(r, c));
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) out.push_back(l.bias(r));
  }
  return out;
}

void DenseNet::assign(const std::vector<double>& flat) {
  if (flat.size() != parameter_count()) throw ConfigError("assign: parameter count mismatch");
  std::size_t i = 0;
  for (auto& l : layers_) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = flat[i++];
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = flat[i++];
  }
}

Gradients DenseNet::zero_gradients() const {
  Gradients g;
  for (const auto& l : layers_) {
    g.weight.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
    g.bias.push_back(Vector::Zero(l.bias.size()));
  }
  return g;
}

bool DenseNet::all_finite() const {
  for (const auto& l : layers_)
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  return true;
}

void DenseNet::save(std::ostream& os) const {
  os << "dense_net 1\n" << "layers " << layers_.size() << '\n';
  for (const auto& l : layers_) {
    os << "layer " << l.in_dim() << ' ' << l.out_dim() << ' ' << to_string(l.activation) << '\n';
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) {
        if (c) os << ' ';
        write_double(os, l.weight(r, c));
      }
      os << '\n';
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) {
      if (r) os << ' ';
      write_double(os, l.bias(r));
    }
    os << '\n';
  }
}

DenseNet DenseNet::load(std::istream& is) {
  expect_word(is, "dense_net");
  int version = 0;
  if (!(is >> version) || version != 1) throw IoError("checkpoint: unsupported dense_net version");
  expect_word(is, "layers");
  std::size_t count = 0;
  if (!(is >> count) || count == 0) throw IoError("checkpoint: bad layer count");
  std::vector<DenseLayer> layers(count);
  for (auto& l : layers) {
    expect_word(is, "layer");
    int in = 0, out = 0;
    std::string act;
    if (!(is >> in >> out >> act) || in <= 0 || out <= 0) throw IoError("checkpoint: bad layer header");
    l.activation = activation_from_string(act);
    l.weight.resize(out, in);
    l.bias.resize(out);
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < in; ++c) l.weight(r, c) = read_double(is);
    for (int r = 0; r < out; ++r) l.bias(r) = read_double(is);
  }
  try {
    return DenseNet(std::move(layers));
  } catch (const ConfigError& e) {
    throw IoError(std::string("checkpoint: ") + e.what());
  }
}

std::pair<Matrix, Tape> forward(const DenseNet& net, const Matrix& input) {
  if (input.rows() != net.in_dim())
    throw ConfigError("input has " + std::to_string(input.rows()) + " rows, net expects " +
                      std::to_string(net.in_dim()));
  Tape tape;
  tape.net_ = &net;
  Matrix x = input;
  for (const auto& layer : net.layers()) {
    tape.inputs_.push_back(x);
    Matrix pre = layer.weight * x;
    pre.colwise() += layer.bias;
    activate(layer.activation, pre, x);
    tape.pre_.push_back(std::move(pre));
  }
  return {std::move(x), std::move(tape)};
}

Gradients backward(Tape& tape, const Matrix& output_adjoint) {
  if (tape.net_ == nullptr) throw UsageError("backward: empty tape");
  if (tape.consumed_) throw UsageError("backward: tape already consumed");
  const DenseNet& net = *tape.net_;
  const auto& layers = net.layers();
  if (output_adjoint.rows() != net.out_dim() || output_adjoint.cols() != tape.pre_.back().cols())
    throw ConfigError("backward: adjoint shape does not match output");
  tape.consumed_ = true;

  Gradients g;
  g.weight.resize(layers.size());
  g.bias.resize(layers.size());
  Matrix adj = output_adjoint;
  for (std::size_t i = layers.size(); i-- > 0;) {
    const auto& layer = layers[i];
    Matrix delta = adj.cwiseProduct(derivative(layer.activation, tape.pre_[i]));
    g.weight[i] = delta * tape.inputs_[i].transpose();
    g.bias[i] = delta.rowwise().sum();
    adj = layer.weight.transpose() * delta;
  }
  g.input = std::move(adj);
  tape.inputs_.clear();
  tape.pre_.clear();
  return g;
}

std::vector<double> flatten(const Gradients& grads) {
  std::vector<double> out;
  for (std::size_t l = 0; l < grads.weight.size(); ++l) {
    const auto& w = grads.weight[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) out.push_back(w(r, c));
    for (Eigen::Index r = 0; r < grads.bias[l].size(); ++r) out.push_back(grads.bias[l](r));
  }
  return out;
}

void soft_update(DenseNet& target, const DenseNet& source, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("soft_update: tau must lie in (0, 1]");
  auto& tl = target.layers();
  const auto& sl = source.layers();
  if (tl.size() != sl.size()) throw ConfigError("soft_update: layer count mismatch");
  for (std::size_t l = 0; l < tl.size(); ++l) {
    if (tl[l].weight.rows() != sl[l].weight.rows() || tl[l].weight.cols() != sl[l].weight.cols())
      throw ConfigError("soft_update: shape mismatch at layer " + std::to_string(l));
    tl[l].weight = tau * sl[l].weight + (1.0 - tau) * tl[l].weight;
    tl[l].bias = tau * sl[l].bias + (1.0 - tau) * tl[l].bias;
  }
}

Adam::Adam(const DenseNet& net, double learning_rate) {
  state_.learning_rate = learning_rate;
  for (const auto& l : net.layers()) {
    state_.m_weight.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
    state_.v_weight.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
    state_.m_bias.push_back(Vector::Zero(l.bias.size()));
    state_.v_bias.push_back(Vector::Zero(l.bias.size()));
  }
}

void Adam::step(DenseNet& net, const Gradients& grads) {
  auto& layers = net.layers();
  if (grads.weight.size() != layers.size() || state_.m_weight.size() != layers.size())
    throw ConfigError("adam: gradient/state shape mismatch");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (grads.weight[l].rows() != layers[l].weight.rows() || grads.weight[l].cols() != layers[l].weight.cols() ||
        grads.bias[l].size() != layers[l].bias.size())
      throw ConfigError("adam: gradient shape mismatch at layer " + std::to_string(l));
    if (!grads.weight[l].allFinite() || !grads.bias[l].allFinite())
      throw TrainingError("non-finite gradient in layer " + std::to_string(l), static_cast<int>(l));
  }
  auto& s = state_;
  ++s.step;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  const double lr = s.learning_rate;
  const double eps = s.epsilon;
  auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = s.beta1 * m + (1.0 - s.beta1) * g;
    v = s.beta2 * v + (1.0 - s.beta2) * g.cwiseProduct(g);
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  };
  for (std::size_t l = 0; l < layers.size(); ++l) {
    update(layers[l].weight, s.m_weight[l], s.v_weight[l], grads.weight[l]);
    update(layers[l].bias, s.m_bias[l], s.v_bias[l], grads.bias[l]);
  }
}

Vector sinusoidal_embed(int k, int dim) {
  if (dim <= 0 || dim % 2 != 0) throw ConfigError("sinusoidal_embed: dim must be positive and even");
  if (k < 0) throw ConfigError("sinusoidal_embed: step index must be non-negative");
  const int half = dim / 2;
  const double scale = half > 1 ? std::log(10000.0) / (half - 1) : 0.0;
  Vector out(dim);
  for (int j = 0; j < half; ++j) {
    const double angle = k * std::exp(-scale * j);
    out(2 * j) = std::sin(angle);
    out(2 * j + 1) = std::cos(angle);
  }
  return out;
}

}  // namespace totsched::nn
