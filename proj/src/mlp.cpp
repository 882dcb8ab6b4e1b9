#include "tsr/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "tsr/error.hpp"
#include "tsr/rng.hpp"

namespace tsr {

namespace {

Eigen::VectorXd sigmoid(const Eigen::VectorXd& z) {
  return (1.0 / (1.0 + (-z.array()).exp())).matrix();
}

void check_sizes(const std::vector<int>& layer_sizes) {
  if (layer_sizes.size() < 2)
    throw ArgumentError("mlp: need at least input and output layers");
  for (int s : layer_sizes) {
    if (s < 1) throw ArgumentError("mlp: layer sizes must be positive");
  }
}

}  // namespace

MlpParams init_mlp(const std::vector<int>& layer_sizes, Rng& rng) {
  check_sizes(layer_sizes);
  MlpParams params;
  params.layer_sizes = layer_sizes;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int fan_in = layer_sizes[l];
    const int fan_out = layer_sizes[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Eigen::MatrixXd w(fan_out, fan_in);
    // Explicit row-major fill order: the weight stream must not depend on
    // Eigen internals for the determinism contract to hold.
    for (int r = 0; r < fan_out; ++r) {
      for (int c = 0; c < fan_in; ++c) w(r, c) = rng.uniform(-bound, bound);
    }
    Eigen::VectorXd b(fan_out);
    for (int r = 0; r < fan_out; ++r) b(r) = rng.uniform(-bound, bound);
    params.weights.push_back(std::move(w));
    params.biases.push_back(std::move(b));
  }
  return params;
}

Eigen::VectorXd mlp_forward(const MlpParams& params,
                            const Eigen::VectorXd& input) {
  if (params.layer_sizes.empty() || params.weights.empty())
    throw ShapeError("mlp: forward on uninitialized parameters");
  if (input.size() != params.layer_sizes.front())
    throw ShapeError("mlp: input length " + std::to_string(input.size()) +
                     " != layer size " +
                     std::to_string(params.layer_sizes.front()));
  Eigen::VectorXd a = input;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    a = sigmoid(params.weights[l] * a + params.biases[l]);
  }
  return a;
}

double mlp_backprop(const MlpParams& params, const Eigen::VectorXd& input,
                    const Eigen::VectorXd& target, MlpGradients& grads) {
  if (input.size() != params.layer_sizes.front())
    throw ShapeError("mlp: input length mismatch in backprop");
  if (target.size() != params.layer_sizes.back())
    throw ShapeError("mlp: target length mismatch in backprop");

  const std::size_t L = params.weights.size();
  std::vector<Eigen::VectorXd> activations(L + 1);
  activations[0] = input;
  for (std::size_t l = 0; l < L; ++l) {
    activations[l + 1] =
        sigmoid(params.weights[l] * activations[l] + params.biases[l]);
  }

  if (grads.d_weights.size() != L) {
    grads.d_weights.resize(L);
    grads.d_biases.resize(L);
  }

  const Eigen::VectorXd diff = activations[L] - target;
  const double loss = 0.5 * diff.squaredNorm();

  // delta = dLoss/dz for the current layer; sigmoid' = a (1 - a).
  Eigen::VectorXd delta = diff.array() * activations[L].array() *
                          (1.0 - activations[L].array());
  for (std::size_t l = L; l-- > 0;) {
    grads.d_weights[l] = delta * activations[l].transpose();
    grads.d_biases[l] = delta;
    if (l > 0) {
      delta = (params.weights[l].transpose() * delta).array() *
              activations[l].array() * (1.0 - activations[l].array());
    }
  }
  return loss;
}

// ============================================================================
// Datasets
// ============================================================================

DigitDataset load_dataset(const std::string& path, int num_classes) {
  std::ifstream in(path);
  if (!in) throw IoError("dataset: cannot open '" + path + "'");
  DigitDataset data;
  data.feature_dim = 0;
  std::string line;
  int line_no = 0;
  int max_label = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const char* p = line.c_str();
    char* end = nullptr;
    const long label = std::strtol(p, &end, 10);
    if (end == p || *end != ',')
      throw ParseError("dataset: bad label on line " + std::to_string(line_no));
    if (label < kNegativeLabel)
      throw ParseError("dataset: label out of range on line " +
                       std::to_string(line_no));
    std::vector<double> values;
    values.reserve(data.feature_dim > 0 ? data.feature_dim : 256);
    p = end;
    while (*p == ',') {
      ++p;
      const double v = std::strtod(p, &end);
      if (end == p)
        throw ParseError("dataset: bad feature on line " +
                         std::to_string(line_no));
      values.push_back(v);
      p = end;
    }
    if (*p != '\0' && *p != '\r')
      throw ParseError("dataset: trailing junk on line " +
                       std::to_string(line_no));
    if (data.feature_dim == 0) {
      data.feature_dim = static_cast<int>(values.size());
      if (data.feature_dim == 0)
        throw ParseError("dataset: no features on line " +
                         std::to_string(line_no));
    } else if (static_cast<int>(values.size()) != data.feature_dim) {
      throw ParseError("dataset: feature count changed on line " +
                       std::to_string(line_no));
    }
    Eigen::VectorXd f(data.feature_dim);
    for (int i = 0; i < data.feature_dim; ++i) f(i) = values[i];
    data.features.push_back(std::move(f));
    data.labels.push_back(static_cast<int>(label));
    max_label = std::max(max_label, static_cast<int>(label));
  }
  data.num_classes = num_classes > 0 ? num_classes : std::max(2, max_label + 1);
  if (max_label >= data.num_classes)
    throw ParseError("dataset: label " + std::to_string(max_label) +
                     " exceeds class count " +
                     std::to_string(data.num_classes));
  return data;
}

void save_dataset(const DigitDataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("dataset: cannot create '" + path + "'");
  char buf[32];
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    out << dataset.labels[i];
    const Eigen::VectorXd& f = dataset.features[i];
    for (Eigen::Index j = 0; j < f.size(); ++j) {
      std::snprintf(buf, sizeof buf, ",%.10g", f(j));
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("dataset: write failed for '" + path + "'");
}

// ============================================================================
// Training
// ============================================================================

namespace {

Eigen::VectorXd make_target(int label, int num_classes) {
  Eigen::VectorXd t = Eigen::VectorXd::Zero(num_classes);
  if (label >= 0) t(label) = 1.0;  // NEGATIVE examples keep the all-zero target
  return t;
}

void shuffle_indices(std::vector<int>& idx, Rng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
    std::swap(idx[i - 1], idx[j]);
  }
}

}  // namespace

double mlp_accuracy(const MlpParams& params, const DigitDataset& dataset,
                    const std::vector<int>& indices) {
  if (indices.empty()) return 0.0;
  int correct = 0;
  for (int i : indices) {
    const Eigen::VectorXd out = mlp_forward(params, dataset.features[i]);
    Eigen::Index argmax = 0;
    const double max = out.maxCoeff(&argmax);
    const int label = dataset.labels[i];
    if (label >= 0) {
      correct += (static_cast<int>(argmax) == label);
    } else {
      correct += (max < 0.5);
    }
  }
  return static_cast<double>(correct) / static_cast<double>(indices.size());
}

TrainResult mlp_train(const DigitDataset& dataset, const TrainHyper& hyper) {
  if (dataset.size() == 0) throw ArgumentError("mlp_train: empty dataset");
  if (dataset.features.size() != dataset.labels.size())
    throw ArgumentError("mlp_train: feature/label count mismatch");
  std::set<int> distinct(dataset.labels.begin(), dataset.labels.end());
  if (distinct.size() < 2)
    throw ArgumentError("mlp_train: need at least 2 distinct labels");
  if (hyper.epochs < 1) throw ArgumentError("mlp_train: epochs must be >= 1");
  if (hyper.batch_size < 1)
    throw ArgumentError("mlp_train: batch_size must be >= 1");

  Rng rng(hyper.seed);
  TrainResult result;
  result.params = init_mlp(
      {dataset.feature_dim, hyper.hidden_size, dataset.num_classes}, rng);
  MlpParams& params = result.params;

  // Deterministic split: shuffle once, carve the validation tail.
  const int n = static_cast<int>(dataset.size());
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  shuffle_indices(order, rng);
  int n_val = static_cast<int>(std::lround(hyper.validation_fraction * n));
  n_val = std::clamp(n_val, 0, n - 1);
  std::vector<int> train_idx(order.begin(), order.end() - n_val);
  std::vector<int> val_idx(order.end() - n_val, order.end());
  result.report.train_examples = static_cast<int>(train_idx.size());
  result.report.val_examples = static_cast<int>(val_idx.size());

  const std::size_t L = params.weights.size();
  MlpGradients grads, batch_sum;
  batch_sum.d_weights.resize(L);
  batch_sum.d_biases.resize(L);

  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    shuffle_indices(train_idx, rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < train_idx.size();
         start += hyper.batch_size) {
      const std::size_t stop =
          std::min(train_idx.size(), start + hyper.batch_size);
      for (std::size_t l = 0; l < L; ++l) {
        batch_sum.d_weights[l] =
            Eigen::MatrixXd::Zero(params.weights[l].rows(),
                                  params.weights[l].cols());
        batch_sum.d_biases[l] =
            Eigen::VectorXd::Zero(params.biases[l].size());
      }
      for (std::size_t k = start; k < stop; ++k) {
        const int i = train_idx[k];
        epoch_loss += mlp_backprop(
            params, dataset.features[i],
            make_target(dataset.labels[i], dataset.num_classes), grads);
        for (std::size_t l = 0; l < L; ++l) {
          batch_sum.d_weights[l] += grads.d_weights[l];
          batch_sum.d_biases[l] += grads.d_biases[l];
        }
      }
      const double step = hyper.learning_rate / static_cast<double>(stop - start);
      for (std::size_t l = 0; l < L; ++l) {
        params.weights[l] -= step * batch_sum.d_weights[l];
        params.biases[l] -= step * batch_sum.d_biases[l];
      }
    }

    EpochStats stats;
    stats.epoch = epoch + 1;
    stats.train_loss = epoch_loss / static_cast<double>(train_idx.size());
    stats.train_accuracy = mlp_accuracy(params, dataset, train_idx);
    if (!val_idx.empty()) {
      double val_loss = 0.0;
      for (int i : val_idx) {
        const Eigen::VectorXd out = mlp_forward(params, dataset.features[i]);
        val_loss += 0.5 * (out - make_target(dataset.labels[i],
                                             dataset.num_classes))
                              .squaredNorm();
      }
      stats.val_loss = val_loss / static_cast<double>(val_idx.size());
      stats.val_accuracy = mlp_accuracy(params, dataset, val_idx);
    }
    result.report.epochs.push_back(stats);
  }
  return result;
}

// ============================================================================
// Serialization
// ============================================================================

namespace {

constexpr char kMagic[4] = {'O', 'D', 'R', '1'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 24));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int i = 0; i < 8; ++i)
    out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

class ByteReader {
 public:
  ByteReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }

  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i)
      bits |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 8;
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }

  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size())
      throw ModelTruncatedError("model: file truncated at byte " +
                                std::to_string(pos_));
  }

  std::size_t pos() const { return pos_; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> save_model(const MlpParams& params) {
  check_sizes(params.layer_sizes);
  std::vector<std::uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(params.layer_sizes.size()));
  for (int s : params.layer_sizes) put_u32(out, static_cast<std::uint32_t>(s));
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    const Eigen::MatrixXd& w = params.weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) put_f64(out, w(r, c));
    }
    const Eigen::VectorXd& b = params.biases[l];
    for (Eigen::Index r = 0; r < b.size(); ++r) put_f64(out, b(r));
  }
  return out;
}

MlpParams load_model(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw ModelBadMagicError("model: bad magic (expected ODR1)");
  ByteReader reader(bytes);
  reader.u32();  // skip magic (already checked)
  const std::uint32_t version = reader.u32();
  if (version != kVersion)
    throw ModelBadVersionError("model: unsupported version " +
                               std::to_string(version));
  const std::uint32_t layer_count = reader.u32();
  if (layer_count < 2 || layer_count > 64)
    throw FormatError("model: implausible layer count " +
                      std::to_string(layer_count));
  MlpParams params;
  for (std::uint32_t i = 0; i < layer_count; ++i) {
    const std::uint32_t s = reader.u32();
    if (s < 1 || s > (1u << 20))
      throw FormatError("model: implausible layer size " + std::to_string(s));
    params.layer_sizes.push_back(static_cast<int>(s));
  }
  for (std::size_t l = 0; l + 1 < params.layer_sizes.size(); ++l) {
    Eigen::MatrixXd w(params.layer_sizes[l + 1], params.layer_sizes[l]);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = reader.f64();
    }
    Eigen::VectorXd b(params.layer_sizes[l + 1]);
    for (Eigen::Index r = 0; r < b.size(); ++r) b(r) = reader.f64();
    params.weights.push_back(std::move(w));
    params.biases.push_back(std::move(b));
  }
  return params;
}

void save_model_file(const MlpParams& params, const std::string& path) {
  const std::vector<std::uint8_t> bytes = save_model(params);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("model: cannot create '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("model: write failed for '" + path + "'");
}

MlpParams load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("model: cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return load_model(bytes);
}

}  // namespace tsr
