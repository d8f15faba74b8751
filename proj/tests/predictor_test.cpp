#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "soebm/adam.hpp"
#include "soebm/checkpoint.hpp"
#include "soebm/error.hpp"
#include "soebm/mlp.hpp"
#include "soebm/numerics.hpp"
#include "test_support.hpp"

namespace soebm {
namespace {

using testing::rel_err;

MlpParams small_net(std::uint32_t seed_index, double dropout = 0.0) {
  auto s = testing::test_stream(seed_index);
  auto params = init_params({5, 8, 7}, 3, dropout, s);
  // Spread the log-std head so no output sits on the clamp boundary.
  auto s2 = testing::test_stream(seed_index + 100);
  for (auto& layer : params.layers) {
    layer.bias = testing::random_vector(s2, layer.bias.size(), -0.3, 0.3);
  }
  return params;
}

Vector stacked_output(const MlpParams& params, const Vector& x) {
  const auto r = forward_eval(params, x);
  Vector out(2 * r.prediction.mu.size());
  out << r.prediction.mu, r.cache.raw_log_sigma;
  return out;
}

TEST(InitParams, OutputWidthIsTwiceLabelDim) {
  auto s = testing::test_stream();
  const auto params = init_params({150, 200, 200}, 24, 0.2, s);
  ASSERT_EQ(params.layers.size(), 3u);
  EXPECT_EQ(params.layers.back().weight.rows(), 48);
  EXPECT_EQ(params.widths(), (std::vector<std::size_t>{150, 200, 200, 48}));
  EXPECT_EQ(params.input_dim(), 150u);
  for (Eigen::Index i = 0; i < 24; ++i) {
    EXPECT_DOUBLE_EQ(params.layers.back().bias(i), 0.0);
    EXPECT_DOUBLE_EQ(params.layers.back().bias(24 + i), std::log(0.5));
  }
}

TEST(InitParams, SameSeedSameParameters) {
  auto a = testing::test_stream(9);
  auto b = testing::test_stream(9);
  const auto pa = init_params({10, 20}, 2, 0.0, a);
  const auto pb = init_params({10, 20}, 2, 0.0, b);
  for (std::size_t l = 0; l < pa.layers.size(); ++l) {
    EXPECT_EQ(pa.layers[l].weight, pb.layers[l].weight);
    EXPECT_EQ(pa.layers[l].bias, pb.layers[l].bias);
  }
}

TEST(InitParams, FanInScaledWeights) {
  auto s = testing::test_stream(5);
  const auto params = init_params({150, 200, 200}, 24, 0.0, s);
  for (const auto& layer : params.layers) {
    const double n = static_cast<double>(layer.weight.size());
    const double mean = layer.weight.sum() / n;
    const double sd = std::sqrt((layer.weight.array() - mean).square().sum() / (n - 1));
    const double expected = 1.0 / std::sqrt(static_cast<double>(layer.weight.cols()));
    EXPECT_LT(std::abs(sd - expected) / expected, 0.10);
    EXPECT_TRUE(layer.bias.head(layer.bias.size() - (&layer == &params.layers.back() ? 24 : 0))
                    .isZero());
  }
}

TEST(InitParams, RejectsBadWidths) {
  auto s = testing::test_stream();
  EXPECT_THROW(init_params({10}, 2, 0.0, s), ConfigError);
  EXPECT_THROW(init_params({10, 0}, 2, 0.0, s), ConfigError);
  EXPECT_THROW(init_params({10, 4}, 0, 0.0, s), ConfigError);
  EXPECT_THROW(init_params({10, 4}, 2, 1.0, s), ConfigError);
}

TEST(Forward, ZeroParametersGiveUnitSigma) {
  auto s = testing::test_stream();
  auto params = init_params({4, 6}, 2, 0.0, s);
  for (auto& layer : params.layers) {
    layer.weight.setZero();
    layer.bias.setZero();
  }
  const auto r = forward_eval(params, Vector::Constant(4, 3.0));
  EXPECT_TRUE(r.prediction.mu.isZero());
  EXPECT_EQ(r.prediction.sigma, Vector::Ones(2));
}

TEST(Forward, EvaluationModeDeterministicAndStreamIndependent) {
  const auto params = small_net(1, 0.5);
  auto s = testing::test_stream(2);
  const Vector x = testing::random_vector(s, 5, -1, 1);
  RngStream a(1, {0, 0, StreamPurpose::kDropout});
  RngStream b(2, {5, 5, StreamPurpose::kDropout});
  b.next_u64();
  const auto ra = forward(params, x, false, a);
  const auto rb = forward(params, x, false, b);
  EXPECT_EQ(ra.prediction.mu, rb.prediction.mu);
  EXPECT_EQ(ra.prediction.sigma, rb.prediction.sigma);
  EXPECT_TRUE(ra.cache.dropout_masks.empty());
  // The stream was not consumed.
  RngStream fresh(1, {0, 0, StreamPurpose::kDropout});
  EXPECT_EQ(a.next_u64(), fresh.next_u64());
}

TEST(Forward, TrainingModeAppliesDropout) {
  const auto params = small_net(1, 0.5);
  auto s = testing::test_stream(2);
  const Vector x = testing::random_vector(s, 5, -1, 1);
  auto d = testing::test_stream(3);
  const auto r = forward(params, x, true, d);
  ASSERT_EQ(r.cache.dropout_masks.size(), 2u);
  for (const auto& mask : r.cache.dropout_masks) {
    for (Eigen::Index i = 0; i < mask.size(); ++i) {
      EXPECT_TRUE(mask(i) == 0.0 || mask(i) == 2.0);
    }
  }
}

TEST(Forward, DimensionMismatchThrows) {
  const auto params = small_net(1);
  EXPECT_THROW(forward_eval(params, Vector::Zero(4)), DomainError);
}

TEST(Forward, SigmaClampedAtExtremeInputs) {
  auto s = testing::test_stream(8);
  const auto params = init_params({3, 16, 16}, 2, 0.0, s);
  for (double magnitude : {1e3, -1e3}) {
    for (int trial = 0; trial < 20; ++trial) {
      Vector x = testing::random_vector(s, 3, -1, 1) * magnitude;
      const auto r = forward_eval(params, x);
      for (Eigen::Index i = 0; i < 2; ++i) {
        EXPECT_GE(r.prediction.sigma(i), kSigmaFloor);
        EXPECT_LE(r.prediction.sigma(i), std::exp(kLogSigmaMax));
      }
    }
  }
  EXPECT_NEAR(kSigmaFloor, std::exp(-5.0), 1e-18);
}

TEST(Backward, ZeroOutputGradientGivesZero) {
  const auto params = small_net(1);
  const auto r = forward_eval(params, Vector::Ones(5));
  const auto g = backward(params, r.cache, Vector::Zero(3), Vector::Zero(3));
  for (const auto& layer : g.grads) {
    EXPECT_TRUE(layer.weight.isZero());
    EXPECT_TRUE(layer.bias.isZero());
  }
}

TEST(Backward, LinearLayerRowEqualsInput) {
  MlpParams params;
  params.label_dim = 2;
  params.layers.push_back({Matrix::Random(4, 3), Vector::Zero(4)});
  const Vector x(Vector::LinSpaced(3, 0.5, 1.5));
  const auto r = forward_eval(params, x);
  for (Eigen::Index k = 0; k < 2; ++k) {
    Vector gmu = Vector::Zero(2);
    gmu(k) = 1.0;
    const auto g = backward(params, r.cache, gmu, Vector::Zero(2));
    EXPECT_EQ(Vector(g.grads[0].weight.row(k).transpose()), x);
    for (Eigen::Index other = 0; other < 4; ++other) {
      if (other != k) EXPECT_TRUE(g.grads[0].weight.row(other).isZero());
    }
  }
}

TEST(Backward, InputJacobianMatchesFiniteDifferences) {
  const auto params = small_net(21);
  auto s = testing::test_stream(22);
  for (int trial = 0; trial < 5; ++trial) {
    const Vector x = testing::random_vector(s, 5, -2, 2);
    const auto r = forward_eval(params, x);
    for (Eigen::Index out = 0; out < 6; ++out) {
      Vector gmu = Vector::Zero(3), gls = Vector::Zero(3);
      (out < 3 ? gmu(out) : gls(out - 3)) = 1.0;
      const Vector analytic = backward(params, r.cache, gmu, gls).input_grad;
      for (Eigen::Index j = 0; j < 5; ++j) {
        const double h = 1e-5;
        Vector xp = x, xm = x;
        xp(j) += h;
        xm(j) -= h;
        const double fd = (stacked_output(params, xp)(out) - stacked_output(params, xm)(out)) / (2 * h);
        EXPECT_LT(rel_err(analytic(j), fd, 1e-6), 1e-4) << "out " << out << " in " << j;
      }
    }
  }
}

TEST(Backward, ParameterGradientMatchesFiniteDifferences) {
  for (double dropout : {0.0, 0.3}) {
    auto params = small_net(31, dropout);
    auto s = testing::test_stream(32);
    const Vector x = testing::random_vector(s, 5, -2, 2);
    const Vector v = testing::random_vector(s, 3, -1, 1);
    const Vector u = testing::random_vector(s, 3, -1, 1);
    // The same stream key replays the same dropout masks for every evaluation.
    auto loss = [&](const MlpParams& p) {
      RngStream d(77, {0, 0, StreamPurpose::kDropout});
      const auto r = forward(p, x, true, d);
      return v.dot(r.prediction.mu) + u.dot(r.cache.raw_log_sigma);
    };
    RngStream d(77, {0, 0, StreamPurpose::kDropout});
    const auto r = forward(params, x, true, d);
    const auto g = backward(params, r.cache, v, u);

    const std::size_t n = parameter_count(params.layers);
    for (int k = 0; k < 20; ++k) {
      const std::size_t idx = static_cast<std::size_t>(s.below(n));
      const double analytic = parameter_at(g.grads, idx);
      const double saved = parameter_at(params.layers, idx);
      const double h = 1e-5;
      parameter_at(params.layers, idx) = saved + h;
      const double lp = loss(params);
      parameter_at(params.layers, idx) = saved - h;
      const double lm = loss(params);
      parameter_at(params.layers, idx) = saved;
      EXPECT_LT(rel_err(analytic, (lp - lm) / (2 * h), 1e-6), 1e-4)
          << "dropout " << dropout << " coordinate " << idx;
    }
  }
}

TEST(Backward, ClampedLogSigmaHasZeroGradient) {
  auto params = small_net(41);
  params.layers.back().bias(3) = 50.0;  // far above the clamp
  const auto r = forward_eval(params, Vector::Ones(5));
  ASSERT_GT(r.cache.raw_log_sigma(0), kLogSigmaMax);
  const auto g = backward(params, r.cache, Vector::Zero(3), Vector::Ones(3));
  EXPECT_DOUBLE_EQ(g.grads.back().bias(3), 0.0);
  EXPECT_DOUBLE_EQ(g.grads.back().bias(4), 1.0);
}

TEST(Backward, ShapeMismatchThrows) {
  const auto params = small_net(1);
  const auto r = forward_eval(params, Vector::Ones(5));
  EXPECT_THROW(backward(params, r.cache, Vector::Zero(2), Vector::Zero(3)), DomainError);
  auto other = small_net(1);
  other.layers.pop_back();
  EXPECT_THROW(backward(other, r.cache, Vector::Zero(3), Vector::Zero(3)), DomainError);
}

TEST(GaussianNll, KnownValues) {
  GaussianPrediction pred{Vector::Zero(1), Vector::Ones(1)};
  EXPECT_NEAR(gaussian_nll(pred, Vector::Ones(1)).loss, 1.4189385332, 1e-9);
  GaussianPrediction p3{Vector::Constant(3, 0.7), Vector::Ones(3)};
  const auto at_mean = gaussian_nll(p3, Vector::Constant(3, 0.7));
  EXPECT_NEAR(at_mean.loss, 1.5 * std::log(2 * std::numbers::pi), 1e-12);
  EXPECT_TRUE(at_mean.grad_mu.isZero());
  EXPECT_THROW(gaussian_nll(p3, Vector::Zero(2)), DomainError);
}

TEST(GaussianNll, GradientsMatchFiniteDifferences) {
  auto s = testing::test_stream(51);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector mu = testing::random_vector(s, 4, -2, 2);
    const Vector logs = testing::random_vector(s, 4, -1.5, 1.5);
    const Vector y = testing::random_vector(s, 4, -2, 2);
    const auto nll = [&](const Vector& m, const Vector& ls) {
      return gaussian_nll({m, ls.array().exp().matrix()}, y).loss;
    };
    const auto res = gaussian_nll({mu, logs.array().exp().matrix()}, y);
    for (Eigen::Index i = 0; i < 4; ++i) {
      const double h = 1e-6;
      Vector mp = mu, mm = mu, lp = logs, lm = logs;
      mp(i) += h;
      mm(i) -= h;
      lp(i) += h;
      lm(i) -= h;
      EXPECT_LT(rel_err(res.grad_mu(i), (nll(mp, logs) - nll(mm, logs)) / (2 * h), 1e-4), 1e-6);
      EXPECT_LT(rel_err(res.grad_log_sigma(i), (nll(mu, lp) - nll(mu, lm)) / (2 * h), 1e-4), 1e-6);
    }
  }
}

TEST(Adam, ZeroGradientLeavesParametersAndDecaysMoments) {
  auto params = small_net(61);
  const auto before = params;
  auto state = make_adam_state(params, 1e-2);
  state.first_moment[0].weight.setConstant(1.0);
  state.second_moment[0].weight.setConstant(1.0);
  adam_step(params, zeros_like(params.layers), state);
  EXPECT_EQ(state.step, 1u);
  for (std::size_t l = 1; l < params.layers.size(); ++l) {
    EXPECT_EQ(params.layers[l].weight, before.layers[l].weight);
  }
  EXPECT_DOUBLE_EQ(state.first_moment[0].weight(0, 0), 0.9);
  EXPECT_DOUBLE_EQ(state.second_moment[0].weight(0, 0), 0.999);
}

TEST(Adam, FirstStepMagnitudeIsLearningRate) {
  auto params = small_net(62);
  const auto before = params;
  auto state = make_adam_state(params, 1e-3);
  auto grads = zeros_like(params.layers);
  for (auto& layer : grads) {
    layer.weight.setConstant(-3.7);
    layer.bias.setConstant(0.25);
  }
  adam_step(params, grads, state);
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const Matrix dw = params.layers[l].weight - before.layers[l].weight;
    const Vector db = params.layers[l].bias - before.layers[l].bias;
    EXPECT_NEAR(dw.maxCoeff(), 1e-3, 1e-8);
    EXPECT_NEAR(dw.minCoeff(), 1e-3, 1e-8);
    EXPECT_NEAR(db.maxCoeff(), -1e-3, 1e-8);
  }
}

double run_scalar_adam(double start, double target, int steps) {
  MlpParams params;
  params.label_dim = 1;
  params.layers.push_back({Matrix::Constant(1, 1, start), Vector::Zero(1)});
  auto state = make_adam_state(params, 1e-2);
  for (int step = 0; step < steps; ++step) {
    auto grads = zeros_like(params.layers);
    grads[0].weight(0, 0) = 2.0 * (params.layers[0].weight(0, 0) - target);
    adam_step(params, grads, state);
  }
  return params.layers[0].weight(0, 0);
}

TEST(Adam, MinimizesQuadratic) {
  EXPECT_LT(std::abs(run_scalar_adam(0.0, 1.0, 2000) - 1.0), 1e-3);
}

TEST(Adam, TrajectoryMatchesScalarOracle) {
  // Oracle: a scalar reimplementation of the bias-corrected update, 2000 steps
  // from 5 toward -1.25 at learning rate 1e-2.
  EXPECT_NEAR(std::abs(run_scalar_adam(5.0, -1.25, 2000) + 1.25), 0.0016478613615822368, 1e-12);
}

TEST(Adam, NonFiniteGradientRaisesAndLeavesState) {
  auto params = small_net(63);
  const auto before = params;
  auto state = make_adam_state(params, 1e-3);
  auto grads = zeros_like(params.layers);
  grads[1].bias(2) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(adam_step(params, grads, state), TrainingError);
  EXPECT_EQ(state.step, 0u);
  EXPECT_EQ(params.layers[1].bias, before.layers[1].bias);
}

TEST(Checkpoint, StreamRoundTripIsBitExact) {
  auto params = small_net(71, 0.2);
  params.layers[0].weight(0, 0) = 0.1 + 0.2;
  params.layers[0].weight(1, 1) = -1.0e-310;  // subnormal
  params.layers[0].weight(2, 2) = 6.02214076e23;
  std::stringstream buf;
  write_params(buf, params);
  const auto loaded = read_params(buf);
  EXPECT_EQ(loaded.label_dim, params.label_dim);
  EXPECT_EQ(loaded.dropout_rate, params.dropout_rate);
  ASSERT_EQ(loaded.layers.size(), params.layers.size());
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    EXPECT_EQ(loaded.layers[l].weight, params.layers[l].weight);
    EXPECT_EQ(loaded.layers[l].bias, params.layers[l].bias);
  }
}

TEST(Checkpoint, TrainingCheckpointRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "soebm_predictor_test";
  std::filesystem::create_directories(dir);
  TrainingCheckpoint ckpt;
  ckpt.mode = "soebm";
  ckpt.epochs_done = 3;
  ckpt.params = small_net(72);
  auto adam = make_adam_state(ckpt.params, 5e-5);
  auto grads = zeros_like(ckpt.params.layers);
  for (auto& layer : grads) layer.weight.setConstant(0.3);
  adam_step(ckpt.params, grads, adam);
  ckpt.adam = adam;
  save_training_checkpoint(dir / "ckpt.txt", ckpt);
  const auto loaded = load_training_checkpoint(dir / "ckpt.txt");
  EXPECT_EQ(loaded.mode, "soebm");
  EXPECT_EQ(loaded.epochs_done, 3u);
  ASSERT_TRUE(loaded.adam.has_value());
  EXPECT_EQ(loaded.adam->step, 1u);
  EXPECT_EQ(loaded.adam->learning_rate, 5e-5);
  for (std::size_t l = 0; l < adam.first_moment.size(); ++l) {
    EXPECT_EQ(loaded.adam->first_moment[l].weight, adam.first_moment[l].weight);
    EXPECT_EQ(loaded.adam->second_moment[l].bias, adam.second_moment[l].bias);
    EXPECT_EQ(loaded.params.layers[l].weight, ckpt.params.layers[l].weight);
  }
  std::filesystem::remove_all(dir);
}

TEST(Checkpoint, RejectsCorruptData) {
  std::stringstream bad("not-a-checkpoint");
  EXPECT_THROW(read_params(bad), IoError);
  auto params = small_net(73);
  std::stringstream buf;
  write_params(buf, params);
  std::string text = buf.str();
  text.resize(text.size() / 2);
  std::stringstream truncated(text);
  EXPECT_THROW(read_params(truncated), IoError);
  EXPECT_THROW(load_params("/nonexistent/dir/params.txt"), IoError);
}

TEST(FormatDouble, RoundTrips) {
  auto s = testing::test_stream(74);
  for (int i = 0; i < 10000; ++i) {
    const double v = (s.uniform() - 0.5) * std::pow(10.0, -300.0 + 600.0 * s.uniform());
    EXPECT_EQ(parse_double(format_double(v)), v);
  }
  EXPECT_THROW(parse_double("1.5abc"), IoError);
}

}  // namespace
}  // namespace soebm
