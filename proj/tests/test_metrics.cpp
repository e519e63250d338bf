#include "doctest.h"

#include "fefi/metrics.hpp"
#include "oracles.hpp"

using namespace fefi;

TEST_CASE("mae and rmse on fixtures") {
  const Vec a{1.0, 0.0};
  const Vec b{0.0, 0.0};
  CHECK(mae(a, a) == 0.0);
  CHECK(rmse(a, a) == 0.0);
  CHECK(mae(a, b) == doctest::Approx(0.5));
  CHECK(rmse(a, b) == doctest::Approx(std::sqrt(0.5)));
  CHECK_THROWS_AS(mae(a, Vec{1.0}), ShapeError);
  CHECK_THROWS_AS(rmse(Vec{}, Vec{}), ShapeError);
}

TEST_CASE("rmse dominates mae (power-mean inequality)") {
  Rng rng(21);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(30);
    Vec a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.uniform();
      b[i] = rng.uniform();
    }
    CHECK(rmse(a, b) >= mae(a, b) - 1e-12);
  }
}

TEST_CASE("wilcoxon degenerate and error cases") {
  const Vec same{0.1, 0.2, 0.3, 0.4, 0.5};
  CHECK(wilcoxon_signed_rank(same, same) == 1.0);
  CHECK_THROWS_AS(wilcoxon_signed_rank(Vec{1, 2, 3}, Vec{0, 0, 0}), ParameterError);
  CHECK_THROWS_AS(wilcoxon_signed_rank(Vec{1, 2, 3, 4, 5}, Vec{0, 0}), ShapeError);
}

TEST_CASE("uniformly greater sample, n = 10, gives the exact minimum p") {
  Vec a(10), b(10);
  Rng rng(5);
  for (std::size_t i = 0; i < 10; ++i) {
    b[i] = rng.uniform();
    a[i] = b[i] + 0.1 + rng.uniform();
  }
  const double p = wilcoxon_signed_rank(a, b);
  CHECK(p == doctest::Approx(2.0 / 1024.0).epsilon(1e-12));
  CHECK(p == doctest::Approx(oracle::wilcoxon_brute(a, b)).epsilon(1e-12));
}

TEST_CASE("exact p matches brute sign enumeration, ties included") {
  Rng rng(33);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 5 + rng.uniform_index(8);  // 5..12
    Vec a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      // quantized values produce ties and zero differences
      a[i] = std::round(rng.uniform() * 8.0) / 8.0;
      b[i] = std::round(rng.uniform() * 8.0) / 8.0;
    }
    bool all_zero = true;
    for (std::size_t i = 0; i < n; ++i) all_zero = all_zero && a[i] == b[i];
    if (all_zero) continue;
    CHECK(wilcoxon_signed_rank(a, b) ==
          doctest::Approx(oracle::wilcoxon_brute(a, b)).epsilon(1e-9));
  }
}

TEST_CASE("large-sample path returns a sane two-sided p") {
  Rng rng(71);
  Vec a(40), b(40);
  for (std::size_t i = 0; i < 40; ++i) {
    b[i] = rng.normal();
    a[i] = b[i] + 0.8;  // strong uniform shift
  }
  const double p_shift = wilcoxon_signed_rank(a, b);
  CHECK(p_shift > 0.0);
  CHECK(p_shift < 1e-5);

  for (std::size_t i = 0; i < 40; ++i) a[i] = b[i] + rng.normal() * 0.01;
  const double p_noise = wilcoxon_signed_rank(a, b);
  CHECK(p_noise > 0.01);
  CHECK(p_noise <= 1.0);
}

TEST_CASE("symmetry: swapping samples keeps the two-sided p") {
  Rng rng(13);
  Vec a(15), b(15);
  for (std::size_t i = 0; i < 15; ++i) {
    a[i] = rng.uniform();
    b[i] = rng.uniform();
  }
  CHECK(wilcoxon_signed_rank(a, b) ==
        doctest::Approx(wilcoxon_signed_rank(b, a)).epsilon(1e-12));
}
