#include "doctest.h"

#include "fefi/importance.hpp"
#include "oracles.hpp"

using namespace fefi;

namespace {

Matrix random_matrix(std::size_t n, std::size_t d, std::uint64_t seed) {
  Matrix m(n, d);
  Rng rng(seed);
  for (auto& v : m.data) v = rng.normal();
  return m;
}

}  // namespace

TEST_CASE("normalization clamps negatives and scales the max to 1") {
  CHECK(normalize_importance(Vec{2.0, 1.0, 0.0}) == Vec{1.0, 0.5, 0.0});
  CHECK(normalize_importance(Vec{0.0, 0.0, 0.0}) == Vec{0.0, 0.0, 0.0});
  const Vec clamped = normalize_importance(Vec{-0.1, 0.4, 0.2});
  CHECK(clamped[0] == 0.0);
  CHECK(clamped[1] == 1.0);
  CHECK(clamped[2] == doctest::Approx(0.5));
  CHECK_THROWS_AS(
      normalize_importance(Vec{1.0, std::numeric_limits<double>::infinity()}),
      DataError);
}

TEST_CASE("normalization is idempotent and rank-preserving") {
  Rng rng(44);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t d = 2 + rng.uniform_index(10);
    Vec raw(d);
    for (auto& v : raw) v = rng.uniform(-1.0, 3.0);
    const Vec once = normalize_importance(raw);
    CHECK(normalize_importance(once) == once);

    const double c = rng.uniform(0.1, 10.0);
    Vec scaled = raw;
    for (auto& v : scaled) v *= c;
    const Vec scaled_norm = normalize_importance(scaled);
    // identical argsort
    std::vector<std::size_t> ia(d), ib(d);
    std::iota(ia.begin(), ia.end(), 0);
    ib = ia;
    std::stable_sort(ia.begin(), ia.end(),
                     [&](std::size_t x, std::size_t y) { return once[x] < once[y]; });
    std::stable_sort(ib.begin(), ib.end(), [&](std::size_t x, std::size_t y) {
      return scaled_norm[x] < scaled_norm[y];
    });
    CHECK(ia == ib);
  }
}

TEST_CASE("permutation importance of an ignored feature is exactly zero") {
  const Matrix X = random_matrix(150, 3, 1);
  Vec y(150);
  for (std::size_t i = 0; i < 150; ++i) y[i] = 2.0 * X(i, 0);
  FunctionPredictor model(3, [](std::span<const double> r) { return 2.0 * r[0]; });
  const Vec imp = permutation_importance(model, X, y, 5, 7);
  CHECK(imp[1] == 0.0);
  CHECK(imp[2] == 0.0);
  CHECK(imp[0] > 0.0);
}

TEST_CASE("statistically independent features score near zero") {
  std::size_t ok = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Matrix X = random_matrix(600, 2, seed);
    Vec y(600);
    Rng noise(seed + 5);
    for (std::size_t i = 0; i < 600; ++i) y[i] = X(i, 0) + 0.1 * noise.normal();
    // the model reads both features but feature 1 carries no signal
    FunctionPredictor model(
        2, [](std::span<const double> r) { return r[0] + 1e-3 * r[1]; });
    const Vec imp = permutation_importance(model, X, y, 5, seed);
    if (std::abs(imp[1]) < 0.05) ++ok;
  }
  CHECK(ok == 10);
}

TEST_CASE("larger coefficients inflate permutation importance more") {
  const Matrix X = random_matrix(500, 2, 3);
  Vec y(500);
  for (std::size_t i = 0; i < 500; ++i) y[i] = 3.0 * X(i, 0) + 1.0 * X(i, 1);
  FunctionPredictor model(
      2, [](std::span<const double> r) { return 3.0 * r[0] + r[1]; });
  const Vec imp = permutation_importance(model, X, y, 5, 11);
  CHECK(imp[0] > imp[1]);
  CHECK(imp[1] > 0.0);
}

TEST_CASE("permutation importance validates its input") {
  const Matrix X = random_matrix(20, 2, 9);
  Vec y(20, 0.0);
  FunctionPredictor model(2, [](std::span<const double> r) { return r[0]; });
  CHECK_THROWS_AS(permutation_importance(model, X, Vec(19, 0.0), 5, 1), ShapeError);
  CHECK_THROWS_AS(permutation_importance(model, X, y, 0, 1), ParameterError);
  FunctionPredictor wrong(3, [](std::span<const double> r) { return r[0]; });
  CHECK_THROWS_AS(permutation_importance(wrong, X, y, 5, 1), ShapeError);
}

TEST_CASE("sampled Shapley matches the additive closed form within 3 sigma") {
  Rng seeder(100);
  std::size_t cells = 0, within = 0;
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t d = 3 + seeder.uniform_index(3);
    const Matrix X = random_matrix(200, d, 200 + trial);
    Vec beta(d);
    for (auto& b : beta) b = seeder.uniform(-2.0, 2.0);
    FunctionPredictor model(d, [beta](std::span<const double> r) {
      double s = 1.0;
      for (std::size_t j = 0; j < beta.size(); ++j) s += beta[j] * r[j];
      return s;
    });
    for (std::size_t row = 0; row < 5; ++row) {
      const auto res = shapley_instance(model, X, row, 256, Rng(trial * 10 + row));
      const Vec expect = oracle::additive_shapley(X, beta, row);
      for (std::size_t j = 0; j < d; ++j) {
        ++cells;
        if (std::abs(res.phi[j] - expect[j]) <=
            3.0 * std::max(res.standard_error[j], 1e-12))
          ++within;
      }
      // efficiency: sum phi ~ f(x) - mean f within 3 x its own MC error
      double fx = model.predict_one(X.row(row));
      double fbar = 0.0;
      for (std::size_t i = 0; i < X.rows; ++i) fbar += model.predict_one(X.row(i));
      fbar /= static_cast<double>(X.rows);
      CHECK(std::abs(res.efficiency_sum - (fx - fbar)) <=
            3.0 * std::max(res.efficiency_se, 1e-12) + 1e-9);
    }
  }
  CHECK(within >= cells * 95 / 100);
}

TEST_CASE("constant models have exactly zero Shapley values") {
  const Matrix X = random_matrix(50, 4, 21);
  FunctionPredictor model(4, [](std::span<const double>) { return 3.3; });
  const auto res = shapley_instance(model, X, 0, 64, Rng(5));
  for (double phi : res.phi) CHECK(phi == 0.0);
  const Vec agg = shapley_sampling(model, X, std::nullopt, 64, 5);
  for (double v : agg) CHECK(v == 0.0);
}

TEST_CASE("duplicated features share credit within Monte Carlo error") {
  Matrix X = random_matrix(300, 3, 31);
  for (std::size_t i = 0; i < 300; ++i) X(i, 1) = X(i, 0);  // exact duplicate
  FunctionPredictor model(
      3, [](std::span<const double> r) { return r[0] + r[1] + 0.5 * r[2]; });
  const auto res = shapley_instance(model, X, 7, 512, Rng(77));
  const double tol =
      2.0 * std::sqrt(res.standard_error[0] * res.standard_error[0] +
                      res.standard_error[1] * res.standard_error[1]);
  CHECK(std::abs(res.phi[0] - res.phi[1]) <= tol + 1e-9);
}

TEST_CASE("shapley rejects tiny sample counts") {
  const Matrix X = random_matrix(20, 2, 41);
  FunctionPredictor model(2, [](std::span<const double> r) { return r[0]; });
  CHECK_THROWS_AS(shapley_sampling(model, X, std::nullopt, 9, 1), ParameterError);
  CHECK(shapley_sampling(model, X, std::nullopt, 10, 1).size() == 2);
}

TEST_CASE("per-instance flag returns that instance's raw vector") {
  const Matrix X = random_matrix(40, 2, 51);
  FunctionPredictor model(2, [](std::span<const double> r) { return 2.0 * r[0]; });
  const Vec via_flag = shapley_sampling(model, X, 3, 128, 9);
  const Vec direct = shapley_instance(model, X, 3, 128, Rng(Rng::mix(9, 3))).phi;
  CHECK(via_flag == direct);
}
