#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace tsr {

/// Label value marking a non-digit (all-zero target) training example.
inline constexpr int kNegativeLabel = -1;

// ============================================================================
// Network parameters
// ============================================================================

/// Fully-connected feed-forward network, logistic sigmoid on every layer.
/// weights[l] maps activations of layer l to pre-activations of layer l+1
/// (rows = layer_sizes[l+1], cols = layer_sizes[l]).
struct MlpParams {
  std::vector<int> layer_sizes;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

class Rng;

/// Fresh parameters with weights and biases uniform in ±1/sqrt(fan_in).
MlpParams init_mlp(const std::vector<int>& layer_sizes, Rng& rng);

/// Feed-forward pass.  Throws ShapeError when the input length does not
/// match layer_sizes.front().
Eigen::VectorXd mlp_forward(const MlpParams& params,
                            const Eigen::VectorXd& input);

/// Per-layer parameter gradients of the example loss 0.5*||output - target||^2.
struct MlpGradients {
  std::vector<Eigen::MatrixXd> d_weights;
  std::vector<Eigen::VectorXd> d_biases;
};

/// Backpropagation for one example; also returns the example loss.
double mlp_backprop(const MlpParams& params, const Eigen::VectorXd& input,
                    const Eigen::VectorXd& target, MlpGradients& grads);

// ============================================================================
// Datasets
// ============================================================================

/// Labeled feature vectors.  Digits use labels 0..9 plus kNegativeLabel for
/// non-digit examples; the header classifier reuses the container with
/// labels {0 = speed-limit header, 1 = other} and 768-dim features.
struct DigitDataset {
  int feature_dim = 256;
  int num_classes = 10;
  std::vector<Eigen::VectorXd> features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
};

/// Text format: one example per line, "label,f1,...,fN" with label -1 for
/// NEGATIVE.  num_classes 0 means infer as max(2, max label + 1).
DigitDataset load_dataset(const std::string& path, int num_classes = 0);
void save_dataset(const DigitDataset& dataset, const std::string& path);

// ============================================================================
// Training
// ============================================================================

struct TrainHyper {
  int hidden_size = 48;
  double learning_rate = 0.4;
  int epochs = 30;
  std::uint64_t seed = 1;
  double validation_fraction = 0.1;
  int batch_size = 16;
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  int train_examples = 0;
  int val_examples = 0;
};

struct TrainResult {
  MlpParams params;
  TrainReport report;
};

/// Mini-batch SGD on mean squared error.  Digit targets are one-hot;
/// NEGATIVE targets are all-zero, which is what lets a low max activation
/// encode rejection at inference time.  Deterministic given dataset order
/// and seed: single-threaded, seeded shuffles, no std:: distributions.
/// Throws ArgumentError on an empty dataset or fewer than 2 distinct labels.
TrainResult mlp_train(const DigitDataset& dataset, const TrainHyper& hyper);

/// Accuracy of params over the examples: labeled digits count as correct on
/// argmax match, NEGATIVE examples count as correct when max output < 0.5.
double mlp_accuracy(const MlpParams& params, const DigitDataset& dataset,
                    const std::vector<int>& indices);

// ============================================================================
// Model serialization
// ============================================================================

/// Binary layout: magic "ODR1", version u32, layer count u32, layer sizes
/// u32 each, then per layer the weight matrix row-major followed by the bias
/// vector, all little-endian 64-bit floats.
std::vector<std::uint8_t> save_model(const MlpParams& params);

/// Inverse of save_model.  Throws ModelBadMagicError, ModelBadVersionError,
/// or ModelTruncatedError.
MlpParams load_model(const std::vector<std::uint8_t>& bytes);

void save_model_file(const MlpParams& params, const std::string& path);
MlpParams load_model_file(const std::string& path);

}  // namespace tsr
