#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "tsr/error.hpp"
#include "tsr/mlp.hpp"
#include "tsr/rng.hpp"

namespace {

// Numerical loss for the finite-difference check, written independently of
// the library: explicit sigmoid feed-forward and squared error.
double loss_reference(const tsr::MlpParams& p, const Eigen::VectorXd& input,
                      const Eigen::VectorXd& target) {
  Eigen::VectorXd a = input;
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    Eigen::VectorXd z = p.weights[l] * a + p.biases[l];
    a = z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  }
  return 0.5 * (a - target).squaredNorm();
}

double max_relative_gradient_error(const std::vector<int>& layers,
                                   std::uint64_t seed) {
  tsr::Rng rng(seed);
  tsr::MlpParams params = tsr::init_mlp(layers, rng);
  Eigen::VectorXd input(layers.front());
  for (int i = 0; i < input.size(); ++i) input(i) = rng.uniform(-1.0, 1.0);
  Eigen::VectorXd target(layers.back());
  for (int i = 0; i < target.size(); ++i) target(i) = rng.uniform(0.0, 1.0);

  tsr::MlpGradients grads;
  tsr::mlp_backprop(params, input, target, grads);

  const double eps = 1e-5;
  double worst = 0.0;
  auto check = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + eps;
    const double up = loss_reference(params, input, target);
    param = saved - eps;
    const double down = loss_reference(params, input, target);
    param = saved;
    const double numeric = (up - down) / (2.0 * eps);
    const double denom = std::max({std::abs(numeric), std::abs(analytic),
                                   1e-8});
    worst = std::max(worst, std::abs(numeric - analytic) / denom);
  };

  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    Eigen::MatrixXd& w = params.weights[l];
    for (int r = 0; r < w.rows(); ++r)
      for (int c = 0; c < w.cols(); ++c) check(w(r, c), grads.d_weights[l](r, c));
    Eigen::VectorXd& b = params.biases[l];
    for (int r = 0; r < b.size(); ++r) check(b(r), grads.d_biases[l](r));
  }
  return worst;
}

// Inner disc vs surrounding ring: not linearly separable, but learnable by
// a small sigmoid net in a few dozen epochs.
tsr::DigitDataset ring_dataset(int per_class, std::uint64_t seed) {
  tsr::DigitDataset d;
  d.feature_dim = 2;
  d.num_classes = 2;
  tsr::Rng rng(seed);
  for (int i = 0; i < per_class; ++i) {
    const double a0 = rng.uniform(0.0, 2.0 * 3.14159265358979);
    const double r0 = rng.uniform(0.0, 0.15);
    Eigen::VectorXd inner(2);
    inner << 0.5 + r0 * std::cos(a0), 0.5 + r0 * std::sin(a0);
    d.features.push_back(inner);
    d.labels.push_back(0);

    const double a1 = rng.uniform(0.0, 2.0 * 3.14159265358979);
    const double r1 = rng.uniform(0.3, 0.45);
    Eigen::VectorXd outer(2);
    outer << 0.5 + r1 * std::cos(a1), 0.5 + r1 * std::sin(a1);
    d.features.push_back(outer);
    d.labels.push_back(1);
  }
  return d;
}

}  // namespace

TEST_CASE("backprop gradients match central finite differences") {
  // A few architectures, including the deployed digit and header shapes in
  // miniature; tolerance mirrors the full-network sweep run elsewhere.
  REQUIRE(max_relative_gradient_error({6, 5, 4}, 1) < 1e-4);
  REQUIRE(max_relative_gradient_error({10, 8, 3}, 2) < 1e-4);
  REQUIRE(max_relative_gradient_error({16, 12, 10}, 3) < 1e-4);
  REQUIRE(max_relative_gradient_error({12, 7, 2}, 4) < 1e-4);
}

TEST_CASE("backprop returns the example loss it differentiates") {
  tsr::Rng rng(77);
  tsr::MlpParams params = tsr::init_mlp({4, 3, 2}, rng);
  Eigen::VectorXd input(4);
  input << 0.2, -0.4, 0.9, 0.1;
  Eigen::VectorXd target(2);
  target << 1.0, 0.0;
  tsr::MlpGradients grads;
  const double loss = tsr::mlp_backprop(params, input, target, grads);
  REQUIRE(loss == doctest::Approx(loss_reference(params, input, target)));
  REQUIRE(grads.d_weights.size() == 2);
  REQUIRE(grads.d_biases.size() == 2);
}

TEST_CASE("forward pass validates input length") {
  tsr::Rng rng(5);
  const tsr::MlpParams params = tsr::init_mlp({4, 3, 2}, rng);
  Eigen::VectorXd wrong(3);
  wrong.setZero();
  REQUIRE_THROWS_AS(tsr::mlp_forward(params, wrong), tsr::ShapeError);
  Eigen::VectorXd right(4);
  right.setZero();
  const Eigen::VectorXd out = tsr::mlp_forward(params, right);
  REQUIRE(out.size() == 2);
  for (int i = 0; i < out.size(); ++i) {
    REQUIRE(out(i) > 0.0);
    REQUIRE(out(i) < 1.0);
  }
}

TEST_CASE("initialization is seed-deterministic and fan-in bounded") {
  tsr::Rng a(9), b(9), c(10);
  const tsr::MlpParams pa = tsr::init_mlp({8, 6, 4}, a);
  const tsr::MlpParams pb = tsr::init_mlp({8, 6, 4}, b);
  const tsr::MlpParams pc = tsr::init_mlp({8, 6, 4}, c);
  REQUIRE(pa.weights[0] == pb.weights[0]);
  REQUIRE(pa.weights[1] == pb.weights[1]);
  REQUIRE(pa.biases[0] == pb.biases[0]);
  REQUIRE(pa.weights[0] != pc.weights[0]);
  const double bound0 = 1.0 / std::sqrt(8.0);
  REQUIRE(pa.weights[0].cwiseAbs().maxCoeff() <= bound0);
}

TEST_CASE("training separates a nonlinear problem deterministically") {
  const tsr::DigitDataset data = ring_dataset(150, 21);
  tsr::TrainHyper hyper;
  hyper.hidden_size = 16;
  hyper.learning_rate = 1.5;
  hyper.epochs = 300;
  hyper.seed = 3;
  hyper.validation_fraction = 0.15;
  hyper.batch_size = 8;

  const tsr::TrainResult run1 = tsr::mlp_train(data, hyper);
  const tsr::TrainResult run2 = tsr::mlp_train(data, hyper);

  const tsr::EpochStats& last = run1.report.epochs.back();
  REQUIRE(last.train_accuracy >= 0.95);
  REQUIRE(last.val_accuracy >= 0.90);
  REQUIRE(run1.report.train_examples + run1.report.val_examples ==
          static_cast<int>(data.size()));

  // Bit-identical weights across reruns with the same seed.
  for (std::size_t l = 0; l < run1.params.weights.size(); ++l) {
    REQUIRE(run1.params.weights[l] == run2.params.weights[l]);
    REQUIRE(run1.params.biases[l] == run2.params.biases[l]);
  }

  // Loss should broadly decrease over training.
  REQUIRE(run1.report.epochs.front().train_loss >
          run1.report.epochs.back().train_loss);
}

TEST_CASE("negative examples train toward all-zero output") {
  // Two clusters: label 3 near corner A, NEGATIVE near corner B.
  tsr::DigitDataset d;
  d.feature_dim = 2;
  d.num_classes = 4;
  tsr::Rng rng(31);
  for (int i = 0; i < 80; ++i) {
    Eigen::VectorXd f(2);
    f << rng.uniform(0.0, 0.3), rng.uniform(0.0, 0.3);
    d.features.push_back(f);
    d.labels.push_back(3);
    Eigen::VectorXd g(2);
    g << rng.uniform(0.7, 1.0), rng.uniform(0.7, 1.0);
    d.features.push_back(g);
    d.labels.push_back(tsr::kNegativeLabel);
  }
  tsr::TrainHyper hyper;
  hyper.hidden_size = 8;
  hyper.learning_rate = 0.6;
  hyper.epochs = 60;
  hyper.seed = 4;
  hyper.validation_fraction = 0.1;
  const tsr::TrainResult run = tsr::mlp_train(d, hyper);

  Eigen::VectorXd digit_point(2), junk_point(2);
  digit_point << 0.15, 0.15;
  junk_point << 0.85, 0.85;
  const Eigen::VectorXd out_digit = tsr::mlp_forward(run.params, digit_point);
  const Eigen::VectorXd out_junk = tsr::mlp_forward(run.params, junk_point);
  int arg = 0;
  out_digit.maxCoeff(&arg);
  REQUIRE(arg == 3);
  REQUIRE(out_digit.maxCoeff() > 0.5);
  REQUIRE(out_junk.maxCoeff() < 0.5);  // rejection region
}

TEST_CASE("training rejects degenerate datasets") {
  tsr::DigitDataset empty;
  empty.feature_dim = 2;
  REQUIRE_THROWS_AS(tsr::mlp_train(empty, tsr::TrainHyper{}),
                    tsr::ArgumentError);

  tsr::DigitDataset one_class;
  one_class.feature_dim = 2;
  one_class.num_classes = 2;
  for (int i = 0; i < 10; ++i) {
    Eigen::VectorXd f(2);
    f << 0.5, 0.5;
    one_class.features.push_back(f);
    one_class.labels.push_back(0);
  }
  REQUIRE_THROWS_AS(tsr::mlp_train(one_class, tsr::TrainHyper{}),
                    tsr::ArgumentError);
}

TEST_CASE("model bytes round-trip exactly") {
  tsr::Rng rng(55);
  const tsr::MlpParams params = tsr::init_mlp({256, 48, 10}, rng);
  const std::vector<std::uint8_t> bytes = tsr::save_model(params);
  const tsr::MlpParams back = tsr::load_model(bytes);
  REQUIRE(back.layer_sizes == params.layer_sizes);
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    REQUIRE(back.weights[l] == params.weights[l]);
    REQUIRE(back.biases[l] == params.biases[l]);
  }
}

TEST_CASE("model loader rejects corrupt bytes") {
  tsr::Rng rng(56);
  const tsr::MlpParams params = tsr::init_mlp({6, 4, 2}, rng);
  std::vector<std::uint8_t> bytes = tsr::save_model(params);

  std::vector<std::uint8_t> bad_magic = bytes;
  bad_magic[0] = 'X';
  REQUIRE_THROWS_AS(tsr::load_model(bad_magic), tsr::ModelBadMagicError);

  std::vector<std::uint8_t> truncated(bytes.begin(), bytes.end() - 9);
  REQUIRE_THROWS_AS(tsr::load_model(truncated), tsr::ModelTruncatedError);

  std::vector<std::uint8_t> bad_version = bytes;
  bad_version[4] = 0x7f;
  REQUIRE_THROWS_AS(tsr::load_model(bad_version), tsr::ModelBadVersionError);
}

TEST_CASE("model files and datasets round-trip through disk") {
  const std::string model_path = "/tmp/tsr_test_model.bin";
  const std::string data_path = "/tmp/tsr_test_dataset.txt";

  tsr::Rng rng(57);
  const tsr::MlpParams params = tsr::init_mlp({5, 4, 3}, rng);
  tsr::save_model_file(params, model_path);
  const tsr::MlpParams back = tsr::load_model_file(model_path);
  REQUIRE(back.layer_sizes == params.layer_sizes);
  REQUIRE(back.weights[0] == params.weights[0]);

  tsr::DigitDataset d;
  d.feature_dim = 3;
  d.num_classes = 10;
  for (int i = 0; i < 12; ++i) {
    Eigen::VectorXd f(3);
    f << i * 0.05, 1.0 - i * 0.05, 0.25;
    d.features.push_back(f);
    d.labels.push_back(i % 3 == 0 ? tsr::kNegativeLabel : i % 10);
  }
  tsr::save_dataset(d, data_path);
  const tsr::DigitDataset dback = tsr::load_dataset(data_path, 10);
  REQUIRE(dback.size() == d.size());
  REQUIRE(dback.feature_dim == 3);
  REQUIRE(dback.labels == d.labels);
  for (std::size_t i = 0; i < d.size(); ++i)
    REQUIRE(dback.features[i].isApprox(d.features[i], 1e-12));

  std::remove(model_path.c_str());
  std::remove(data_path.c_str());
}

TEST_CASE("accuracy counts argmax digits and low-activation negatives") {
  // A hand-built identity-ish net is overkill; instead check the contract
  // through a trained net on linearly separable data.
  tsr::DigitDataset d;
  d.feature_dim = 1;
  d.num_classes = 2;
  for (int i = 0; i < 40; ++i) {
    Eigen::VectorXd lo(1), hi(1);
    lo << 0.1;
    hi << 0.9;
    d.features.push_back(lo);
    d.labels.push_back(0);
    d.features.push_back(hi);
    d.labels.push_back(1);
  }
  tsr::TrainHyper hyper;
  hyper.hidden_size = 4;
  hyper.learning_rate = 0.8;
  hyper.epochs = 80;
  hyper.seed = 6;
  hyper.validation_fraction = 0.0;
  const tsr::TrainResult run = tsr::mlp_train(d, hyper);
  std::vector<int> all(d.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  REQUIRE(tsr::mlp_accuracy(run.params, d, all) == doctest::Approx(1.0));
}
