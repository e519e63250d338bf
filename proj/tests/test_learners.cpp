#include "doctest.h"

#include "fefi/learners.hpp"
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

TEST_CASE("hyperparameter defaults match the configured recipe") {
  const auto hp = Hyperparams::defaults();
  CHECK(hp.gb.learning_rate == 0.1);
  CHECK(hp.gb.n_stages == 50);
  CHECK(hp.gb.max_depth == 3);
  CHECK(hp.rf.n_trees == 50);
  CHECK(hp.rf.bootstrap);
  CHECK(!hp.et.bootstrap);
  CHECK(hp.svr.tolerance == 1e-3);
  CHECK(hp.svr.c == 1.0);
  CHECK(hp.svr.epsilon == 0.1);
  CHECK(hp.mlp.hidden_size == 50);
  CHECK(hp.mlp.l2 == 1e-4);
  CHECK(hp.mlp.learning_rate == 1e-3);
  CHECK(hp.mlp.epochs == 200);
}

TEST_CASE("invalid hyperparameters are rejected") {
  auto hp = Hyperparams::defaults();
  hp.gb.n_stages = 0;
  CHECK_THROWS_AS(hp.validate(LearnerKind::GradientBoosting), ParameterError);
  hp = Hyperparams::defaults();
  hp.svr.tolerance = 0.0;
  CHECK_THROWS_AS(hp.validate(LearnerKind::LinearSVR), ParameterError);
  hp = Hyperparams::defaults();
  hp.mlp.learning_rate = -1.0;
  CHECK_THROWS_AS(hp.validate(LearnerKind::MLP), ParameterError);
}

TEST_CASE("degenerate and malformed training input") {
  const auto hp = Hyperparams::defaults();
  Matrix X(1, 2);
  Vec y{1.0};
  for (auto kind : kAllLearnerKinds)
    CHECK_THROWS_AS(train(kind, hp, X, y, 1), TrainingDegenerateError);

  Matrix X2 = random_matrix(10, 2, 1);
  Vec y2(10, 0.5);
  y2[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(train(LearnerKind::RandomForest, hp, X2, y2, 1), DataError);
  Vec y3(9, 0.5);
  CHECK_THROWS_AS(train(LearnerKind::RandomForest, hp, X2, y3, 1), ShapeError);
}

TEST_CASE("predict validates the feature dimension") {
  const auto hp = Hyperparams::defaults();
  const Matrix X = random_matrix(30, 3, 2);
  Vec y(30);
  for (std::size_t i = 0; i < 30; ++i) y[i] = X(i, 0);
  const auto model = train(LearnerKind::GradientBoosting, hp, X, y, 1);
  CHECK_THROWS_AS(model.predict(random_matrix(5, 2, 3)), ShapeError);
  const Vec pred = model.predict(X);
  CHECK(pred.size() == 30);
  CHECK(all_finite(pred));
}

TEST_CASE("shallow trees match the exhaustive-search oracle exactly") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const std::size_t n = 8 + static_cast<std::size_t>(seed);  // <= 16
    const Matrix X = random_matrix(n, 3, seed);
    Vec y(n);
    Rng rng(seed + 100);
    for (auto& v : y) v = rng.normal();

    TreeConfig cfg;
    cfg.max_depth = 2;
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    RegressionTree tree;
    tree.fit(X, y, rows, cfg, nullptr);

    const auto brute = oracle::brute_tree_build(X, y, rows, 0, 2, 2, false);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(tree.predict_row(X.row(i)) ==
            doctest::Approx(oracle::brute_tree_predict(brute.get(), X.row(i)))
                .epsilon(1e-12));
  }
}

TEST_CASE("one-stage GB on a step function matches a depth-3 friedman tree") {
  const std::size_t n = 32;
  Matrix X(n, 2);
  Vec y(n);
  Rng rng(42);
  for (std::size_t i = 0; i < n; ++i) {
    X(i, 0) = static_cast<double>(i) + 0.25 * rng.uniform();
    X(i, 1) = rng.normal();
    y[i] = (i < 8 ? 1.0 : (i < 16 ? 3.0 : (i < 24 ? -2.0 : 5.0)));
  }
  auto hp = Hyperparams::defaults();
  hp.gb.n_stages = 1;
  const auto model = train(LearnerKind::GradientBoosting, hp, X, y, 0);

  const double mean = mean_of(y);
  Vec residual(n);
  for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - mean;
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  const auto brute = oracle::brute_tree_build(X, residual, rows, 0, 3, 2, true);

  const Vec pred = model.predict(X);
  for (std::size_t i = 0; i < n; ++i) {
    const double expect =
        mean + 0.1 * oracle::brute_tree_predict(brute.get(), X.row(i));
    CHECK(pred[i] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("constant targets give constant tree predictions") {
  const Matrix X = random_matrix(40, 3, 5);
  const Vec y(40, 2.5);
  const auto hp = Hyperparams::defaults();
  for (auto kind : {LearnerKind::GradientBoosting, LearnerKind::RandomForest,
                    LearnerKind::ExtraTrees}) {
    const auto model = train(kind, hp, X, y, 9);
    for (double p : model.predict(X)) CHECK(p == doctest::Approx(2.5).epsilon(1e-12));
  }
}

TEST_CASE("random forest fits dataset-1-like data to the noise floor") {
  std::size_t ok = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Matrix X = random_matrix(800, 10, seed * 13);
    Vec y(800, 0.0);
    Rng coef_rng(seed);
    Vec beta(10, 0.0);
    for (std::size_t j = 0; j < 9; ++j) beta[j] = coef_rng.uniform();
    Rng noise(seed + 7);
    const double noise_std = 0.5;
    for (std::size_t i = 0; i < 800; ++i) {
      for (std::size_t j = 0; j < 10; ++j) y[i] += X(i, j) * beta[j];
      y[i] += noise.normal(0.0, noise_std);
    }
    const auto model =
        train(LearnerKind::RandomForest, Hyperparams::defaults(), X, y, seed);
    if (model.train_rmse() < noise_std * 1.5) ++ok;
    const Vec pred = model.predict(X);
    const double r = rmse_of(pred, y);
    CHECK(r == doctest::Approx(model.train_rmse()).epsilon(1e-9));
  }
  CHECK(ok == 5);
}

TEST_CASE("bootstrap varies with the seed; extra trees replay exactly") {
  const Matrix X = random_matrix(120, 4, 3);
  Vec y(120);
  for (std::size_t i = 0; i < 120; ++i) y[i] = X(i, 0) + 0.3 * X(i, 2);
  const auto hp = Hyperparams::defaults();

  const auto rf1 = train(LearnerKind::RandomForest, hp, X, y, 1);
  const auto rf2 = train(LearnerKind::RandomForest, hp, X, y, 2);
  CHECK(rf1.predict(X) != rf2.predict(X));

  const auto et1 = train(LearnerKind::ExtraTrees, hp, X, y, 5);
  const auto et2 = train(LearnerKind::ExtraTrees, hp, X, y, 5);
  CHECK(et1.predict(X) == et2.predict(X));
  const auto& trees1 = et1.as<ForestModel>().trees();
  const auto& trees2 = et2.as<ForestModel>().trees();
  REQUIRE(trees1.size() == trees2.size());
  for (std::size_t t = 0; t < trees1.size(); ++t) {
    REQUIRE(trees1[t].nodes().size() == trees2[t].nodes().size());
    for (std::size_t k = 0; k < trees1[t].nodes().size(); ++k) {
      CHECK(trees1[t].nodes()[k].feature == trees2[t].nodes()[k].feature);
      CHECK(trees1[t].nodes()[k].threshold == trees2[t].nodes()[k].threshold);
    }
  }
}

TEST_CASE("linear SVR recovers a noiseless slope within the epsilon tube") {
  const std::size_t n = 200;
  Matrix X(n, 1);
  Vec y(n);
  Rng rng(17);
  for (std::size_t i = 0; i < n; ++i) {
    X(i, 0) = rng.normal();
    y[i] = 2.0 * X(i, 0);
  }
  const auto model = train(LearnerKind::LinearSVR, Hyperparams::defaults(), X, y, 0);
  const auto& svr = model.as<LinearSvrModel>();
  CHECK(svr.weights()[0] == doctest::Approx(2.0).epsilon(0.025));
  const Vec pred = model.predict(X);
  std::size_t inside = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(pred[i] - y[i]) <= 0.1 + 0.05) ++inside;
  CHECK(inside >= n * 95 / 100);
}

TEST_CASE("row order does not change the fitted SVR weights") {
  const std::size_t n = 150;
  Matrix X = random_matrix(n, 3, 23);
  Vec y(n);
  for (std::size_t i = 0; i < n; ++i)
    y[i] = 1.5 * X(i, 0) - 0.5 * X(i, 1) + 0.2;
  const auto a = train(LearnerKind::LinearSVR, Hyperparams::defaults(), X, y, 0);

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(31);
  rng.shuffle(perm);
  Matrix Xp(n, 3);
  Vec yp(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy(X.row(perm[i]).begin(), X.row(perm[i]).end(), Xp.row(i).begin());
    yp[i] = y[perm[i]];
  }
  const auto b = train(LearnerKind::LinearSVR, Hyperparams::defaults(), Xp, yp, 0);
  for (std::size_t j = 0; j < 3; ++j)
    CHECK(std::abs(a.as<LinearSvrModel>().weights()[j] -
                   b.as<LinearSvrModel>().weights()[j]) < 1e-6);
}

TEST_CASE("mlp analytic gradients match central finite differences") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    Rng rng(seed * 1000);
    MlpNet net = MlpNet::init(5, 4, 1e-4, rng);
    const Matrix X = random_matrix(10, 5, seed);
    Vec y(10);
    Rng yrng(seed + 50);
    for (auto& v : y) v = yrng.normal();

    MlpNet grad = net;
    net.loss_and_gradient(X, y, grad);
    const Vec analytic = grad.flat_params();
    Vec params = net.flat_params();
    Vec numeric(params.size());
    const double h = 1e-5;
    MlpNet probe = net;
    for (std::size_t p = 0; p < params.size(); ++p) {
      const double keep = params[p];
      params[p] = keep + h;
      probe.set_flat_params(params);
      const double up = probe.loss(X, y);
      params[p] = keep - h;
      probe.set_flat_params(params);
      const double down = probe.loss(X, y);
      params[p] = keep;
      numeric[p] = (up - down) / (2.0 * h);
    }
    double num = 0.0, den = 0.0;
    for (std::size_t p = 0; p < params.size(); ++p) {
      num += (analytic[p] - numeric[p]) * (analytic[p] - numeric[p]);
      den += analytic[p] * analytic[p];
    }
    CHECK(std::sqrt(num) / std::max(std::sqrt(den), 1e-12) < 1e-4);
  }
}

TEST_CASE("mlp training reduces the loss and predicts finitely") {
  const Matrix X = random_matrix(80, 4, 77);
  Vec y(80);
  for (std::size_t i = 0; i < 80; ++i) y[i] = 3.0 * X(i, 1) - X(i, 3);
  const auto model = train(LearnerKind::MLP, Hyperparams::defaults(), X, y, 5);
  const Vec pred = model.predict(X);
  CHECK(all_finite(pred));
  const double baseline = std::sqrt(variance_of(y));
  CHECK(model.train_rmse() < baseline);  // better than predicting the mean
}

TEST_CASE("impurity importance: single split concentrates on one feature") {
  Matrix X(20, 3);
  Vec y(20);
  Rng rng(6);
  for (std::size_t i = 0; i < 20; ++i) {
    X(i, 0) = rng.normal();
    X(i, 1) = static_cast<double>(i);
    X(i, 2) = rng.normal();
    y[i] = i < 10 ? 0.0 : 10.0;
  }
  auto hp = Hyperparams::defaults();
  hp.gb.n_stages = 1;
  hp.gb.max_depth = 1;
  const auto model = train(LearnerKind::GradientBoosting, hp, X, y, 0);
  const Vec imp = model.impurity_importance();
  CHECK(imp[1] == doctest::Approx(1.0));
  CHECK(imp[0] == 0.0);
  CHECK(imp[2] == 0.0);
}

TEST_CASE("impurity importance concentrates on the generative feature") {
  Matrix X = random_matrix(300, 5, 15);
  Vec y(300);
  for (std::size_t i = 0; i < 300; ++i) y[i] = 4.0 * X(i, 1);
  const auto model =
      train(LearnerKind::RandomForest, Hyperparams::defaults(), X, y, 3);
  const Vec imp = model.impurity_importance();
  CHECK(imp[1] > 0.95);
  double total = 0.0;
  for (double v : imp) {
    CHECK(v >= 0.0);
    total += v;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("impurity importance is unsupported for non-tree models") {
  const Matrix X = random_matrix(30, 2, 19);
  Vec y(30);
  for (std::size_t i = 0; i < 30; ++i) y[i] = X(i, 0);
  const auto svr = train(LearnerKind::LinearSVR, Hyperparams::defaults(), X, y, 0);
  CHECK_THROWS_AS(svr.impurity_importance(), UnsupportedMethodError);
  const auto mlp = train(LearnerKind::MLP, Hyperparams::defaults(), X, y, 0);
  CHECK_THROWS_AS(impurity_importance(mlp), UnsupportedMethodError);
}
