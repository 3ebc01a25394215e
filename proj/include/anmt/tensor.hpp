#ifndef ANMT_TENSOR_HPP
#define ANMT_TENSOR_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace anmt {

// Dense row-major 64-bit float matrix. Column vectors are (n, 1).
struct Tensor2 {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> v;

  Tensor2() = default;
  Tensor2(size_t r, size_t c) : rows(r), cols(c), v(r * c, 0.0) {}

  double& at(size_t r, size_t c) { return v[r * cols + c]; }
  double at(size_t r, size_t c) const { return v[r * cols + c]; }
  size_t size() const { return v.size(); }

  static Tensor2 column(const std::vector<double>& values) {
    Tensor2 t(values.size(), 1);
    t.v = values;
    return t;
  }
  static Tensor2 identity(size_t n) {
    Tensor2 t(n, n);
    for (size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
    return t;
  }

  bool same_shape(const Tensor2& other) const {
    return rows == other.rows && cols == other.cols;
  }
  std::string shape_str() const {
    return std::to_string(rows) + "x" + std::to_string(cols);
  }
  bool all_finite() const;
};

// Standard product with row-major accumulation order (k innermost per
// output element), so results are bit-reproducible.
Tensor2 matmul(const Tensor2& a, const Tensor2& b);

// Max-subtracted softmax over a flat vector (any shape, treated as one
// distribution). Output sums to 1 within 1e-12 and is shift invariant.
std::vector<double> softmax(const std::vector<double>& scores);

// -log(pred[target]) with probability floor 1e-12. pred must sum to 1
// within 1e-9.
double cross_entropy(const std::vector<double>& pred, size_t target);

}  // namespace anmt

#endif
