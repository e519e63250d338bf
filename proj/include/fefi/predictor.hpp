#pragma once

#include <functional>
#include <span>
#include <utility>

#include "fefi/core.hpp"

namespace fefi {

/// Anything that maps feature rows to predictions. Implementations must be
/// deterministic and safe for concurrent calls.
struct Predictor {
  virtual ~Predictor() = default;
  virtual std::size_t n_features() const = 0;
  virtual void predict_into(const Matrix& rows, Vec& out) const = 0;

  Vec predict(const Matrix& rows) const {
    if (rows.cols != n_features())
      throw ShapeError("predict: expected " + std::to_string(n_features()) +
                       " columns, got " + std::to_string(rows.cols));
    Vec out(rows.rows, 0.0);
    predict_into(rows, out);
    return out;
  }

  double predict_one(std::span<const double> row) const {
    Matrix m(1, row.size());
    std::copy(row.begin(), row.end(), m.data.begin());
    return predict(m)[0];
  }
};

/// Wraps a plain row function; handy for closed-form models in diagnostics
/// and tests.
class FunctionPredictor final : public Predictor {
 public:
  using RowFn = std::function<double(std::span<const double>)>;

  FunctionPredictor(std::size_t d, RowFn fn) : d_(d), fn_(std::move(fn)) {}

  std::size_t n_features() const override { return d_; }

  void predict_into(const Matrix& rows, Vec& out) const override {
    for (std::size_t i = 0; i < rows.rows; ++i) out[i] = fn_(rows.row(i));
  }

 private:
  std::size_t d_;
  RowFn fn_;
};

}  // namespace fefi
