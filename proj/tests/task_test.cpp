#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "soebm/dataset.hpp"
#include "soebm/error.hpp"
#include "soebm/power_task.hpp"
#include "soebm/projection.hpp"
#include "soebm/synthetic_task.hpp"
#include "soebm/task.hpp"
#include "test_support.hpp"

namespace soebm {
namespace {

using testing::rel_err;

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

GaussianPrediction random_prediction(RngStream& s, Eigen::Index p, double sigma_lo, double sigma_hi) {
  return {testing::random_vector(s, p, -1.0, 3.0), testing::random_vector(s, p, sigma_lo, sigma_hi)};
}

// Mean and standard error of f(mu + sigma * eps, a) over the rows of eps.
std::pair<double, double> mc_mean_and_se(const Task& task, const GaussianPrediction& pred,
                                         const Vector& a, const Matrix& eps) {
  double sum = 0.0, sum_sq = 0.0;
  for (Eigen::Index k = 0; k < eps.rows(); ++k) {
    const Vector y = pred.mu + pred.sigma.cwiseProduct(eps.row(k).transpose());
    const double f = task.cost(y, a);
    sum += f;
    sum_sq += f * f;
  }
  const double n = static_cast<double>(eps.rows());
  const double mean = sum / n;
  return {mean, std::sqrt((sum_sq / n - mean * mean) / (n - 1))};
}

Matrix normal_matrix(RngStream& s, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = s.normal();
  }
  return m;
}

TEST(PowerCost, KnownValues) {
  const PowerTaskParams params;
  EXPECT_DOUBLE_EQ(power_cost(vec({1.0, 2.0}), vec({1.0, 2.0}), params), 0.0);
  EXPECT_DOUBLE_EQ(power_cost(vec({1.0}), vec({0.0}), params), 0.9);
  EXPECT_DOUBLE_EQ(power_cost(vec({0.0}), vec({1.0}), params), 50.5);
  EXPECT_THROW(power_cost(vec({0.0}), vec({1.0, 2.0}), params), DomainError);
}

TEST(PowerTaskParams, Validation) {
  PowerTaskParams p;
  EXPECT_NO_THROW(p.validate());
  p.over_penalty = 0.3;
  EXPECT_THROW(p.validate(), ConfigError);
  p = {};
  p.ramp_limit = 0.0;
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(PowerExpectedCost, ValueAtMean) {
  const PowerTaskParams params;
  const GaussianPrediction pred{vec({2.0}), vec({0.1})};
  const auto ec = power_expected_cost(pred, vec({2.0}), params);
  EXPECT_NEAR(ec.value, 50.4 * 0.1 / std::sqrt(2 * std::numbers::pi) + 0.005, 1e-12);
  EXPECT_NEAR(ec.value, 2.0157, 1e-4);
  EXPECT_NEAR(ec.grad_a(0), 24.8, 1e-12);
}

TEST(PowerExpectedCost, ValueAtMeanMatchesMillionSampleMonteCarlo) {
  const PowerTask task({});
  PowerTaskParams p;
  p.horizon = 1;
  const PowerTask one(p);
  const GaussianPrediction pred{vec({2.0}), vec({0.1})};
  auto s = testing::test_stream(10);
  const Matrix eps = normal_matrix(s, 1'000'000, 1);
  const auto [mean, se] = mc_mean_and_se(one, pred, vec({2.0}), eps);
  EXPECT_LT(std::abs(mean - 2.0156739), 3 * se);
}

TEST(PowerExpectedCost, DegenerateDistributionLimit) {
  const PowerTaskParams params;
  const GaussianPrediction pred{vec({1.0}), vec({kSigmaFloor})};
  EXPECT_NEAR(power_expected_cost(pred, vec({2.0}), params).value, 50.5, 1e-3);
}

TEST(PowerExpectedCost, GradientsMatchFiniteDifferences) {
  const PowerTaskParams params;
  auto s = testing::test_stream(11);
  const double h = 1e-5;
  for (int trial = 0; trial < 100; ++trial) {
    GaussianPrediction pred = random_prediction(s, 3, 0.05, 1.5);
    const Vector a = pred.mu + testing::random_vector(s, 3, -2.0, 2.0);
    const auto ec = power_expected_cost(pred, a, params);
    for (Eigen::Index i = 0; i < 3; ++i) {
      auto value = [&](const Vector& aa, const GaussianPrediction& pp) {
        return power_expected_cost(pp, aa, params).value;
      };
      Vector ap = a, am = a;
      ap(i) += h;
      am(i) -= h;
      EXPECT_LT(rel_err(ec.grad_a(i), (value(ap, pred) - value(am, pred)) / (2 * h), 1e-3), 1e-5);
      auto pm = pred, mm = pred;
      pm.mu(i) += h;
      mm.mu(i) -= h;
      EXPECT_LT(rel_err(ec.grad_mu(i), (value(a, pm) - value(a, mm)) / (2 * h), 1e-3), 1e-5);
      auto ps = pred, ms = pred;
      ps.sigma(i) += h;
      ms.sigma(i) -= h;
      EXPECT_LT(rel_err(ec.grad_sigma(i), (value(a, ps) - value(a, ms)) / (2 * h), 1e-3), 1e-5);
      EXPECT_EQ(ec.grad_mu(i), -ec.grad_a(i));
    }
  }
}

TEST(PowerExpectedCost, ConvexInDecision) {
  const PowerTaskParams params;
  auto s = testing::test_stream(12);
  const GaussianPrediction pred = random_prediction(s, 24, 0.05, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector a1 = testing::random_vector(s, 24, -3, 5);
    const Vector a2 = testing::random_vector(s, 24, -3, 5);
    const double mid = power_expected_cost(pred, 0.5 * (a1 + a2), params).value;
    const double avg = 0.5 * (power_expected_cost(pred, a1, params).value +
                              power_expected_cost(pred, a2, params).value);
    EXPECT_LE(mid, avg + 1e-9);
  }
}

TEST(MonteCarloExpectedCost, AgreesWithPowerClosedForm) {
  PowerTaskParams p;
  p.horizon = 3;
  const PowerTask task(p);
  auto s = testing::test_stream(13);
  for (int trial = 0; trial < 20; ++trial) {
    const GaussianPrediction pred = random_prediction(s, 3, 0.05, 1.0);
    const Vector a = pred.mu + testing::random_vector(s, 3, -1.0, 1.0);
    const Matrix eps = normal_matrix(s, 1'000'000, 3);
    const auto mc = mc_expected_cost(task, pred, a, eps);
    const auto [mean, se] = mc_mean_and_se(task, pred, a, eps);
    EXPECT_NEAR(mc.value, mean, 1e-9 * std::max(1.0, std::abs(mean)));
    const auto exact = task.closed_form_expected_cost(pred, a);
    EXPECT_LT(std::abs(mc.value - exact.value), 3 * se) << "trial " << trial;
    // Pathwise gradients converge to the analytic ones.
    EXPECT_LT((mc.grad_a - exact.grad_a).norm(), 0.2);
    EXPECT_LT((mc.grad_mu - exact.grad_mu).norm(), 0.2);
    EXPECT_LT((mc.grad_sigma - exact.grad_sigma).norm(), 0.3);
  }
}

TEST(MonteCarloExpectedCost, AgreesWithSyntheticClosedForm) {
  const Synthetic2DTask task;
  auto s = testing::test_stream(14);
  for (int trial = 0; trial < 10; ++trial) {
    const GaussianPrediction pred = random_prediction(s, 2, 0.05, 1.0);
    const Vector a = testing::random_vector(s, 2, -2, 4);
    const Matrix eps = normal_matrix(s, 200'000, 2);
    const auto mc = mc_expected_cost(task, pred, a, eps);
    const auto [mean, se] = mc_mean_and_se(task, pred, a, eps);
    const auto exact = task.closed_form_expected_cost(pred, a);
    EXPECT_LT(std::abs(mc.value - exact.value), 4 * se);
    EXPECT_LT((mc.grad_a - exact.grad_a).norm(), 0.05);
    EXPECT_LT((mc.grad_sigma - exact.grad_sigma).norm(), 0.1);
  }
}

TEST(MonteCarloExpectedCost, CollapsedDistributionApproachesCost) {
  const PowerTask task({});
  auto s = testing::test_stream(15);
  const Vector mu = testing::random_vector(s, 24, 0.5, 2.0);
  const Vector a = mu + testing::random_vector(s, 24, -0.5, 0.5);
  const GaussianPrediction pred{mu, Vector::Constant(24, kSigmaFloor)};
  const auto mc = mc_expected_cost(task, pred, a, 1000, s);
  // Per-coordinate Lipschitz bound in y near a is gamma_e + |a - y| <= 51.
  const double bound = 10 * kSigmaFloor * 51.0 * 24;
  EXPECT_LT(std::abs(mc.value - task.cost(mu, a)), bound);
}

TEST(MonteCarloExpectedCost, ReplayIsIdenticalAndRejectsZeroSamples) {
  const Synthetic2DTask task;
  const GaussianPrediction pred{vec({0.5, 1.0}), vec({0.3, 0.2})};
  auto s1 = testing::test_stream(16);
  auto s2 = testing::test_stream(16);
  const auto r1 = mc_expected_cost(task, pred, vec({1, 1}), 64, s1);
  const auto r2 = mc_expected_cost(task, pred, vec({1, 1}), 64, s2);
  EXPECT_EQ(r1.value, r2.value);
  EXPECT_EQ(r1.grad_sigma, r2.grad_sigma);
  EXPECT_THROW(mc_expected_cost(task, pred, vec({1, 1}), 0, s1), ConfigError);
}

TEST(ExpectedCostDispatch, HonorsMode) {
  const Synthetic2DTask task;
  const GaussianPrediction pred{vec({0.5, 1.0}), vec({0.3, 0.2})};
  auto s = testing::test_stream(17);
  const auto cf = expected_cost(task, pred, vec({1, 1}), {ExpectationMode::kClosedForm, 8}, s);
  EXPECT_EQ(cf.value, task.closed_form_expected_cost(pred, vec({1, 1})).value);
  auto s2 = testing::test_stream(17);
  auto s3 = testing::test_stream(17);
  const auto mc = expected_cost(task, pred, vec({1, 1}), {ExpectationMode::kMonteCarlo, 8}, s2);
  EXPECT_EQ(mc.value, mc_expected_cost(task, pred, vec({1, 1}), 8, s3).value);
}

TEST(SyntheticCost, KnownValues) {
  const Synthetic2DParams params;
  EXPECT_DOUBLE_EQ(synthetic2d_cost(vec({1.5, 1.5}), vec({1.5, 1.5}), params), 0.0);
  EXPECT_DOUBLE_EQ(synthetic2d_cost(vec({2, 2}), vec({2, 2}), params), 0.25);
}

TEST(SyntheticCost, MinimizerEqualsLabelOnGrid) {
  const Synthetic2DParams params;
  const Vector y = vec({2.0, 0.0});
  // 1-D grid search per coordinate at resolution 1e-4 over [-4, 6].
  for (Eigen::Index i = 0; i < 2; ++i) {
    double best = 0.0, best_val = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 100000; ++k) {
      const double ai = -4.0 + 1e-4 * k;
      const double v = 3.0 * std::abs(ai - y(i)) + 0.5 * (ai - 1.5) * (ai - 1.5);
      if (v < best_val) {
        best_val = v;
        best = ai;
      }
    }
    EXPECT_NEAR(best, y(i), 1e-4);
  }
  const double at_y = synthetic2d_cost(y, y, params);
  for (double dx : {-1e-3, 1e-3}) {
    for (double dy : {-1e-3, 0.0, 1e-3}) {
      EXPECT_GT(synthetic2d_cost(y, y + vec({dx, dy}), params), at_y);
    }
  }
}

TEST(SyntheticExpectedCost, GradientsMatchFiniteDifferences) {
  const Synthetic2DParams params;
  auto s = testing::test_stream(18);
  const double h = 1e-5;
  for (int trial = 0; trial < 100; ++trial) {
    const GaussianPrediction pred = random_prediction(s, 2, 0.05, 1.5);
    const Vector a = testing::random_vector(s, 2, -3, 5);
    const auto ec = synthetic2d_expected_cost(pred, a, params);
    auto value = [&](const Vector& aa, const GaussianPrediction& pp) {
      return synthetic2d_expected_cost(pp, aa, params).value;
    };
    for (Eigen::Index i = 0; i < 2; ++i) {
      Vector ap = a, am = a;
      ap(i) += h;
      am(i) -= h;
      EXPECT_LT(rel_err(ec.grad_a(i), (value(ap, pred) - value(am, pred)) / (2 * h), 1e-3), 1e-5);
      auto pm = pred, mm = pred, ps = pred, ms = pred;
      pm.mu(i) += h;
      mm.mu(i) -= h;
      ps.sigma(i) += h;
      ms.sigma(i) -= h;
      EXPECT_LT(rel_err(ec.grad_mu(i), (value(a, pm) - value(a, mm)) / (2 * h), 1e-3), 1e-5);
      EXPECT_LT(rel_err(ec.grad_sigma(i), (value(a, ps) - value(a, ms)) / (2 * h), 1e-3), 1e-5);
    }
  }
}

// Exact projection for d <= 3 by a fine search over the middle (or second)
// coordinate; the remaining coordinates then decouple into clamps.
Vector projection_oracle(const Vector& a, double c) {
  double best = std::numeric_limits<double>::infinity();
  Vector best_b = a;
  const Eigen::Index d = a.size();
  const double lo = a.minCoeff() - 1.0, hi = a.maxCoeff() + 1.0;
  for (int k = 0; k <= 2'000'000; ++k) {
    const double m = lo + (hi - lo) * k / 2'000'000.0;
    Vector b(d);
    b(1) = m;
    b(0) = std::clamp(a(0), m - c, m + c);
    if (d == 3) b(2) = std::clamp(a(2), m - c, m + c);
    const double dist = (b - a).squaredNorm();
    if (dist < best) {
      best = dist;
      best_b = b;
    }
  }
  return best_b;
}

TEST(RampProjection, FeasibleInputUnchanged) {
  const Vector a = vec({1.0, 1.3, 1.0, 0.7, 0.75});
  EXPECT_LT((project_ramp(a, 0.4) - a).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(RampProjection, TwoDimensionalExample) {
  const Vector p = project_ramp(vec({0.0, 1.0}), 0.4);
  EXPECT_NEAR(p(0), 0.3, 1e-9);
  EXPECT_NEAR(p(1), 0.7, 1e-9);
  EXPECT_LT((p - projection_oracle(vec({0.0, 1.0}), 0.4)).norm(), 1e-5);
}

TEST(RampProjection, ThreeDimensionalExample) {
  const Vector a = vec({0.0, 1.0, 0.0});
  const Vector p = project_ramp(a, 0.4);
  EXPECT_LT((p - projection_oracle(a, 0.4)).norm(), 1e-5);
  EXPECT_LT((p - vec({0.2, 0.6, 0.2})).norm(), 1e-8);
}

TEST(RampProjection, RandomSmallCasesMatchOracle) {
  auto s = testing::test_stream(19);
  for (int trial = 0; trial < 10; ++trial) {
    const Vector a = testing::random_vector(s, 3, -2, 2);
    EXPECT_LT((project_ramp(a, 0.4) - projection_oracle(a, 0.4)).norm(), 1e-5);
  }
}

// KKT certificate: a - p = sum_i nu_i (e_i - e_{i-1}) with nu_i > 0 only where
// p_i - p_{i-1} = c and nu_i < 0 only where p_i - p_{i-1} = -c.
void expect_kkt(const Vector& a, const Vector& p, double c) {
  const Vector r = a - p;
  EXPECT_NEAR(r.sum(), 0.0, 1e-7);
  double nu = 0.0;
  for (Eigen::Index i = 1; i < a.size(); ++i) {
    nu -= r(i - 1);
    const double diff = p(i) - p(i - 1);
    if (nu > 1e-7) {
      EXPECT_NEAR(diff, c, 1e-7) << "index " << i;
    } else if (nu < -1e-7) {
      EXPECT_NEAR(diff, -c, 1e-7) << "index " << i;
    }
  }
}

TEST(RampProjection, HorizonTwentyFourSatisfiesOptimality) {
  auto s = testing::test_stream(20);
  for (int trial = 0; trial < 50; ++trial) {
    const double scale = trial < 25 ? 1.0 : 5.0;
    const Vector a = testing::random_vector(s, 24, -scale, scale);
    const Vector p = project_ramp(a, 0.4);
    EXPECT_LE(ramp_violation(p, 0.4), 1e-8);
    expect_kkt(a, p, 0.4);
    EXPECT_LT((project_ramp(p, 0.4) - p).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(RampProjection, ManyRandomInputsAcrossScales) {
  auto s = testing::test_stream(29);
  for (int trial = 0; trial < 2000; ++trial) {
    const double scale = std::pow(10.0, -1.0 + 3.0 * s.uniform());
    Vector a = testing::random_vector(s, 24, -scale, scale);
    if (trial % 3 == 0) a += Vector::LinSpaced(24, 0.0, scale);  // long monotone ramps
    const Vector p = project_ramp(a, 0.4);
    ASSERT_LE(ramp_violation(p, 0.4), 1e-8) << "trial " << trial;
    expect_kkt(a, p, 0.4);
  }
}

TEST(RampProjection, DykstraAgreesWithExactProjection) {
  auto s = testing::test_stream(30);
  for (int trial = 0; trial < 500; ++trial) {
    const Vector a = testing::random_vector(s, 24, -1.5, 1.5);
    const Vector exact = project_ramp(a, 0.4);
    const Vector dyk = project_ramp_dykstra(a, 0.4);
    EXPECT_LT((exact - dyk).cwiseAbs().maxCoeff(), 1e-9) << "trial " << trial;
  }
}

TEST(RampProjection, NonExpansiveAgainstFeasiblePoints) {
  auto s = testing::test_stream(21);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector a = testing::random_vector(s, 3, -2, 2);
    const Vector p = project_ramp(a, 0.4);
    const Vector z = project_ramp(testing::random_vector(s, 3, -2, 2), 0.4);
    EXPECT_LE((p - z).norm(), (a - z).norm() + 1e-8);
  }
}

TEST(RampProjection, CapReachedRaisesNumericalError) {
  const Vector a = vec({0.0, 5.0, -5.0, 5.0, -5.0, 5.0});
  EXPECT_THROW(project_ramp_dykstra(a, 0.4, {1, 1e-10}), NumericalError);
  EXPECT_THROW(project_ramp(vec({0.0, std::nan("")}), 0.4), DomainError);
}

TEST(PowerTask, ProjectionAndBox) {
  const PowerTask task({});
  auto s = testing::test_stream(22);
  const Vector a = testing::random_vector(s, 24, -3, 3);
  EXPECT_FALSE(task.is_feasible(a));
  EXPECT_TRUE(task.is_feasible(task.project(a)));
  const GaussianPrediction pred{Vector::Ones(24), Vector::Constant(24, 0.2)};
  const Box box = task.decision_box(pred);
  EXPECT_NEAR(box.lower(3), 0.0, 1e-15);
  EXPECT_NEAR(box.upper(3), 2.0, 1e-15);
}

TEST(SyntheticTask, IdentityProjectionAndBox) {
  const Synthetic2DTask task;
  const Vector a = vec({-10, 10});
  EXPECT_EQ(task.project(a), a);
  const Box box = task.decision_box({vec({0, 0}), vec({1, 1})});
  EXPECT_EQ(box.lower, vec({-4, -4}));
  EXPECT_EQ(box.upper, vec({6, 6}));
}

TEST(SyntheticGenerator, NoiseFreeLabelsAreSquares) {
  auto s = testing::test_stream(23);
  const Dataset d = gen_synthetic2d_dataset(500, 0.0, s);
  ASSERT_EQ(d.size(), 500u);
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(d.y[i], d.x[i].cwiseProduct(d.x[i]));
    EXPECT_LE(d.x[i].cwiseAbs().maxCoeff(), 2.0);
  }
}

TEST(SyntheticGenerator, LabelMeanIsFourThirds) {
  auto s = testing::test_stream(24);
  const Dataset d = gen_synthetic2d_dataset(100000, 0.03, s);
  Vector mean = Vector::Zero(2);
  for (const auto& y : d.y) mean += y;
  mean /= static_cast<double>(d.size());
  EXPECT_NEAR(mean(0), 4.0 / 3.0, 0.02);
  EXPECT_NEAR(mean(1), 4.0 / 3.0, 0.02);
}

TEST(PowerGenerator, DeterministicAndPositive) {
  auto s1 = testing::test_stream(25);
  auto s2 = testing::test_stream(25);
  const Dataset a = gen_power_dataset(60, 24, 150, s1);
  const Dataset b = gen_power_dataset(60, 24, 150, s2);
  ASSERT_EQ(a.size(), 60u);
  EXPECT_EQ(a.feature_dim(), 150u);
  EXPECT_EQ(a.label_dim(), 24u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.x[i], b.x[i]);
    EXPECT_EQ(a.y[i], b.y[i]);
    EXPECT_GT(a.y[i].minCoeff(), 0.0);
    EXPECT_TRUE(a.x[i].allFinite());
  }
  EXPECT_THROW(gen_power_dataset(10, 24, 100, s1), ConfigError);
}

TEST(PowerGenerator, DailyAutocorrelation) {
  auto s = testing::test_stream(26);
  const PowerSeries series = simulate_power_series(417, s);
  ASSERT_GE(series.load.size(), 10000u);
  const std::size_t n = 10000;
  double mean = 0.0;
  for (std::size_t t = 0; t < n; ++t) mean += series.load[t];
  mean /= n;
  double num = 0.0, den = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    den += (series.load[t] - mean) * (series.load[t] - mean);
    if (t + 24 < n) num += (series.load[t] - mean) * (series.load[t + 24] - mean);
  }
  EXPECT_GT(num / den, 0.5);
  EXPECT_GT(*std::min_element(series.load.begin(), series.load.end()), 0.0);
}

class CsvTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("soebm_task_test_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
};

TEST_F(CsvTest, DatasetRoundTripIsExact) {
  auto s = testing::test_stream(27);
  const Dataset d = gen_synthetic2d_dataset(50, 0.03, s);
  write_dataset_csv(dir_ / "d.csv", d);
  const Dataset r = read_dataset_csv(dir_ / "d.csv");
  ASSERT_EQ(r.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(r.x[i], d.x[i]);
    EXPECT_EQ(r.y[i], d.y[i]);
  }
  std::ifstream in(dir_ / "d.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "x_0,x_1,y_0,y_1");
}

TEST_F(CsvTest, RaggedRowsRejected) {
  std::ofstream(dir_ / "bad.csv") << "x_0,y_0\n1,2\n3\n";
  EXPECT_THROW(read_dataset_csv(dir_ / "bad.csv"), IoError);
  std::ofstream(dir_ / "nan.csv") << "x_0,y_0\n1,abc\n";
  EXPECT_THROW(read_dataset_csv(dir_ / "nan.csv"), IoError);
  EXPECT_THROW(read_dataset_csv(dir_ / "missing.csv"), IoError);
}

TEST_F(CsvTest, DecisionRoundTrip) {
  DecisionDataset d;
  d.x = {vec({1.0, 2.0}), vec({3.0, 4.0})};
  d.a = {vec({0.1}), vec({0.2})};
  d.cost = {0.5, 1.0 / 3.0};
  write_decision_csv(dir_ / "a.csv", d);
  const auto r = read_decision_csv(dir_ / "a.csv");
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r.a[1], d.a[1]);
  EXPECT_EQ(r.cost[1], d.cost[1]);
}

TEST(SplitIndices, PartitionIsCompleteAndDeterministic) {
  auto s1 = testing::test_stream(28);
  auto s2 = testing::test_stream(28);
  const auto parts = split_indices(500, {0.8, 0.2}, s1);
  EXPECT_EQ(parts, split_indices(500, {0.8, 0.2}, s2));
  ASSERT_EQ(parts.size(), 2u);
  EXPECT_EQ(parts[0].size(), 400u);
  EXPECT_EQ(parts[1].size(), 100u);
  std::vector<std::size_t> all(parts[0]);
  all.insert(all.end(), parts[1].begin(), parts[1].end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < 500; ++i) EXPECT_EQ(all[i], i);
  EXPECT_THROW(split_indices(10, {0.5, 0.6}, s1), ConfigError);
}

}  // namespace
}  // namespace soebm
