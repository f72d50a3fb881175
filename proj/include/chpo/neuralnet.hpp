#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace chpo {

struct TrainSettings {
  int epochs = 300;
  double learning_rate = 0.05;
};

/// Samples are stored column-wise: inputs is in_size x rows, targets is
/// out_size x rows.
struct TrainingData {
  Eigen::MatrixXd inputs;
  Eigen::MatrixXd targets;

  Eigen::Index rows() const noexcept { return inputs.cols(); }
};

/// Fully connected feedforward network: tanh on hidden layers, identity on
/// the output layer. loss() is the mean over samples and outputs of the
/// squared error; training descends on half of it, the usual backprop form.
class MlpNetwork {
public:
  /// Weights ~ U(-s, s) with s = sqrt(6 / (fan_in + fan_out)), zero biases.
  static MlpNetwork init(std::vector<std::size_t> layer_sizes,
                         std::uint64_t seed);

  const std::vector<std::size_t> &layer_sizes() const noexcept {
    return sizes_;
  }
  std::size_t layer_count() const noexcept { return weights_.size(); }
  std::size_t input_size() const noexcept { return sizes_.front(); }
  std::size_t output_size() const noexcept { return sizes_.back(); }

  Eigen::MatrixXd &weights(std::size_t layer) { return weights_.at(layer); }
  const Eigen::MatrixXd &weights(std::size_t layer) const {
    return weights_.at(layer);
  }
  Eigen::VectorXd &biases(std::size_t layer) { return biases_.at(layer); }
  const Eigen::VectorXd &biases(std::size_t layer) const {
    return biases_.at(layer);
  }

  Eigen::VectorXd forward(const Eigen::VectorXd &input) const;
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd &inputs) const;

  double loss(const TrainingData &data) const;
  /// 0.5 * loss(), the quantity gradient() differentiates.
  double objective(const TrainingData &data) const { return 0.5 * loss(data); }

  /// Gradient of objective() with respect to parameters(), same ordering.
  std::vector<double> gradient(const TrainingData &data) const;

  /// Layer by layer: weights (column-major) then biases.
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> params);
  std::size_t parameter_count() const;

  /// Full-batch gradient descent on objective() for exactly settings.epochs
  /// epochs, computed in single precision. Returns loss() after the final
  /// update.
  double train(const TrainingData &data, const TrainSettings &settings);

  /// Layer sizes then row-major parameters; debugging aid only.
  void dump(std::ostream &out) const;

private:
  void check_data(const TrainingData &data) const;

  std::vector<std::size_t> sizes_;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
};

} // namespace chpo
