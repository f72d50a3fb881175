#include "chpo/neuralnet.hpp"

#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>

namespace chpo {

MlpNetwork MlpNetwork::init(std::vector<std::size_t> layer_sizes,
                            std::uint64_t seed) {
  if (layer_sizes.size() < 2) {
    throw std::invalid_argument("network needs at least an input and an "
                                "output layer");
  }
  for (auto s : layer_sizes) {
    if (s == 0) throw std::invalid_argument("layer sizes must be positive");
  }
  MlpNetwork net;
  net.sizes_ = std::move(layer_sizes);
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < net.sizes_.size(); ++l) {
    const auto fan_in = net.sizes_[l];
    const auto fan_out = net.sizes_[l + 1];
    const double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-s, s);
    Eigen::MatrixXd w(fan_out, fan_in);
    // Row-major fill so the draw order does not depend on Eigen's storage.
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = dist(rng);
    }
    net.weights_.push_back(std::move(w));
    net.biases_.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  return net;
}

namespace {

template <typename S> using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S> using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

// acts[0] is the input batch, acts[l+1] the output of layer l.
template <typename S>
void forward_pass(const std::vector<Mat<S>> &w, const std::vector<Vec<S>> &b,
                  std::vector<Mat<S>> &acts) {
  acts.resize(w.size() + 1);
  for (std::size_t l = 0; l < w.size(); ++l) {
    auto &z = acts[l + 1];
    z.noalias() = w[l] * acts[l];
    z.colwise() += b[l];
    if (l + 1 < w.size()) z = z.array().tanh();
  }
}

// Gradient of half the mean squared error.
template <typename S>
void backward_pass(const std::vector<Mat<S>> &w, const std::vector<Mat<S>> &acts,
                   const Mat<S> &targets, std::vector<Mat<S>> &gw,
                   std::vector<Vec<S>> &gb) {
  const auto layers = w.size();
  gw.resize(layers);
  gb.resize(layers);
  const S scale = S(1) / static_cast<S>(targets.size());
  Mat<S> delta = (acts.back() - targets) * scale;
  Mat<S> back;
  for (std::size_t l = layers; l-- > 0;) {
    gw[l].noalias() = delta * acts[l].transpose();
    gb[l] = delta.rowwise().sum();
    if (l == 0) break;
    back.noalias() = w[l].transpose() * delta;
    delta = back.array() * (S(1) - acts[l].array().square());
  }
}

} // namespace

Eigen::VectorXd MlpNetwork::forward(const Eigen::VectorXd &input) const {
  return forward_batch(input);
}

Eigen::MatrixXd MlpNetwork::forward_batch(const Eigen::MatrixXd &inputs) const {
  if (static_cast<std::size_t>(inputs.rows()) != input_size()) {
    throw std::invalid_argument("network input has wrong dimension");
  }
  std::vector<Eigen::MatrixXd> acts{inputs};
  forward_pass(weights_, biases_, acts);
  return acts.back();
}

void MlpNetwork::check_data(const TrainingData &data) const {
  if (data.rows() == 0) throw std::invalid_argument("no training rows");
  if (static_cast<std::size_t>(data.inputs.rows()) != input_size() ||
      static_cast<std::size_t>(data.targets.rows()) != output_size() ||
      data.targets.cols() != data.inputs.cols()) {
    throw std::invalid_argument("training data shape does not match network");
  }
}

double MlpNetwork::loss(const TrainingData &data) const {
  check_data(data);
  const Eigen::MatrixXd diff = forward_batch(data.inputs) - data.targets;
  return diff.squaredNorm() / static_cast<double>(diff.size());
}

std::vector<double> MlpNetwork::gradient(const TrainingData &data) const {
  check_data(data);
  std::vector<Eigen::MatrixXd> acts{data.inputs}, gw;
  std::vector<Eigen::VectorXd> gb;
  forward_pass(weights_, biases_, acts);
  backward_pass(weights_, acts, data.targets, gw, gb);
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (std::size_t l = 0; l < gw.size(); ++l) {
    flat.insert(flat.end(), gw[l].data(), gw[l].data() + gw[l].size());
    flat.insert(flat.end(), gb[l].data(), gb[l].data() + gb[l].size());
  }
  return flat;
}

std::size_t MlpNetwork::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    n += weights_[l].size() + biases_[l].size();
  }
  return n;
}

std::vector<double> MlpNetwork::parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    const auto &w = weights_[l];
    const auto &b = biases_[l];
    flat.insert(flat.end(), w.data(), w.data() + w.size());
    flat.insert(flat.end(), b.data(), b.data() + b.size());
  }
  return flat;
}

void MlpNetwork::set_parameters(std::span<const double> params) {
  if (params.size() != parameter_count()) {
    throw std::invalid_argument("parameter vector has wrong length");
  }
  auto it = params.begin();
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    auto &w = weights_[l];
    auto &b = biases_[l];
    std::copy_n(it, w.size(), w.data());
    it += w.size();
    std::copy_n(it, b.size(), b.data());
    it += b.size();
  }
}

double MlpNetwork::train(const TrainingData &data,
                         const TrainSettings &settings) {
  check_data(data);
  if (settings.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (!(settings.learning_rate > 0.0)) {
    throw std::invalid_argument("learning rate must be positive");
  }
  // The descent itself runs in single precision; it dominates the proposer's
  // cost and needs no more.
  std::vector<Mat<float>> w, gw;
  std::vector<Vec<float>> b, gb;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    w.push_back(weights_[l].cast<float>());
    b.push_back(biases_[l].cast<float>());
  }
  const Mat<float> targets = data.targets.cast<float>();
  std::vector<Mat<float>> acts{data.inputs.cast<float>()};
  const auto lr = static_cast<float>(settings.learning_rate);
  for (int epoch = 0; epoch < settings.epochs; ++epoch) {
    forward_pass(w, b, acts);
    backward_pass(w, acts, targets, gw, gb);
    for (std::size_t l = 0; l < w.size(); ++l) {
      w[l] -= lr * gw[l];
      b[l] -= lr * gb[l];
    }
  }
  for (std::size_t l = 0; l < w.size(); ++l) {
    weights_[l] = w[l].cast<double>();
    biases_[l] = b[l].cast<double>();
  }
  return loss(data);
}

void MlpNetwork::dump(std::ostream &out) const {
  out << "layers";
  for (auto s : sizes_) out << ' ' << s;
  out << '\n';
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    const auto &w = weights_[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        out << w(r, c) << (c + 1 < w.cols() ? ' ' : '\n');
      }
    }
    for (Eigen::Index r = 0; r < biases_[l].size(); ++r) {
      out << biases_[l](r) << (r + 1 < biases_[l].size() ? ' ' : '\n');
    }
  }
}

} // namespace chpo
