#include "anmt/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "anmt/error.hpp"

namespace anmt {

bool Tensor2::all_finite() const {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

Tensor2 matmul(const Tensor2& a, const Tensor2& b) {
  if (a.cols != b.rows) {
    fail(ErrorKind::Shape,
         "matmul shape mismatch: " + a.shape_str() + " * " + b.shape_str());
  }
  Tensor2 out(a.rows, b.cols);
  for (size_t i = 0; i < a.rows; ++i) {
    for (size_t j = 0; j < b.cols; ++j) {
      double acc = 0.0;
      for (size_t k = 0; k < a.cols; ++k) {
        acc += a.v[i * a.cols + k] * b.v[k * b.cols + j];
      }
      out.v[i * out.cols + j] = acc;
    }
  }
  return out;
}

std::vector<double> softmax(const std::vector<double>& scores) {
  if (scores.empty()) fail(ErrorKind::Shape, "softmax of empty vector");
  const double max_score = *std::max_element(scores.begin(), scores.end());
  if (!std::isfinite(max_score)) fail(ErrorKind::Numeric, "softmax of non-finite scores");
  std::vector<double> out(scores.size());
  double sum = 0.0;
  for (size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp(scores[i] - max_score);
    sum += out[i];
  }
  for (double& x : out) x /= sum;
  return out;
}

double cross_entropy(const std::vector<double>& pred, size_t target) {
  if (target >= pred.size()) {
    fail(ErrorKind::Index, "cross_entropy target out of range: " +
                               std::to_string(target) + " >= " +
                               std::to_string(pred.size()));
  }
  double sum = 0.0;
  for (double p : pred) sum += p;
  if (std::abs(sum - 1.0) > 1e-9) {
    fail(ErrorKind::Numeric, "cross_entropy input does not sum to 1");
  }
  return -std::log(std::max(pred[target], 1e-12));
}

}  // namespace anmt
