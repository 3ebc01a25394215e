#include "anmt/graph.hpp"

#include <cmath>

#include "anmt/error.hpp"

namespace anmt {

Graph::Var Graph::push(Node node) {
  nodes_.push_back(std::move(node));
  return static_cast<Var>(nodes_.size() - 1);
}

Graph::Var Graph::constant(Tensor2 value) {
  Node n;
  n.op = Op::Constant;
  n.value = std::move(value);
  return push(std::move(n));
}

Graph::Var Graph::param(const Tensor2* value, Tensor2* grad_sink) {
  Node n;
  n.op = Op::Param;
  n.src = value;
  n.sink = grad_sink;
  return push(std::move(n));
}

Graph::Var Graph::param_row(const Tensor2* table, Tensor2* grad_sink, size_t row) {
  if (row >= table->rows) {
    fail(ErrorKind::Index, "embedding row out of range: " + std::to_string(row) +
                               " >= " + std::to_string(table->rows));
  }
  Node n;
  n.op = Op::ParamRow;
  n.value = Tensor2(table->cols, 1);
  for (size_t c = 0; c < table->cols; ++c) n.value.v[c] = table->at(row, c);
  n.src = table;
  n.sink = grad_sink;
  n.index = row;
  return push(std::move(n));
}

Graph::Var Graph::matmul(Var a, Var b) {
  const Tensor2& ta = val(a);
  const Tensor2& tb = val(b);
  if (ta.cols != tb.rows) {
    fail(ErrorKind::Shape,
         "matmul shape mismatch: " + ta.shape_str() + " * " + tb.shape_str());
  }
  Node n;
  n.op = Op::Matmul;
  n.a = a;
  n.b = b;
  n.value = anmt::matmul(ta, tb);
  return push(std::move(n));
}

Graph::Var Graph::mat_t_vec(Var m, Var v) {
  const Tensor2& tm = val(m);
  const Tensor2& tv = val(v);
  if (tv.cols != 1 || tm.rows != tv.rows) {
    fail(ErrorKind::Shape,
         "mat_t_vec shape mismatch: " + tm.shape_str() + " , " + tv.shape_str());
  }
  Node n;
  n.op = Op::MatTVec;
  n.a = m;
  n.b = v;
  n.value = Tensor2(tm.cols, 1);
  for (size_t j = 0; j < tm.cols; ++j) {
    double acc = 0.0;
    for (size_t i = 0; i < tm.rows; ++i) acc += tm.at(i, j) * tv.v[i];
    n.value.v[j] = acc;
  }
  return push(std::move(n));
}

Graph::Var Graph::add(Var a, Var b) {
  const Tensor2& ta = val(a);
  const Tensor2& tb = val(b);
  if (!ta.same_shape(tb)) {
    fail(ErrorKind::Shape, "add shape mismatch: " + ta.shape_str() + " + " + tb.shape_str());
  }
  Node n;
  n.op = Op::Add;
  n.a = a;
  n.b = b;
  n.value = ta;
  for (size_t i = 0; i < n.value.size(); ++i) n.value.v[i] += tb.v[i];
  return push(std::move(n));
}

Graph::Var Graph::add_col(Var m, Var v) {
  const Tensor2& tm = val(m);
  const Tensor2& tv = val(v);
  if (tv.cols != 1 || tv.rows != tm.rows) {
    fail(ErrorKind::Shape,
         "add_col shape mismatch: " + tm.shape_str() + " + " + tv.shape_str());
  }
  Node n;
  n.op = Op::AddCol;
  n.a = m;
  n.b = v;
  n.value = tm;
  for (size_t i = 0; i < tm.rows; ++i) {
    for (size_t j = 0; j < tm.cols; ++j) n.value.at(i, j) += tv.v[i];
  }
  return push(std::move(n));
}

Graph::Var Graph::hadamard(Var a, Var b) {
  const Tensor2& ta = val(a);
  const Tensor2& tb = val(b);
  if (!ta.same_shape(tb)) {
    fail(ErrorKind::Shape,
         "hadamard shape mismatch: " + ta.shape_str() + " , " + tb.shape_str());
  }
  Node n;
  n.op = Op::Hadamard;
  n.a = a;
  n.b = b;
  n.value = ta;
  for (size_t i = 0; i < n.value.size(); ++i) n.value.v[i] *= tb.v[i];
  return push(std::move(n));
}

Graph::Var Graph::one_minus(Var a) {
  Node n;
  n.op = Op::OneMinus;
  n.a = a;
  n.value = val(a);
  for (double& x : n.value.v) x = 1.0 - x;
  return push(std::move(n));
}

Graph::Var Graph::scale(Var a, double k) {
  Node n;
  n.op = Op::Scale;
  n.a = a;
  n.k = k;
  n.value = val(a);
  for (double& x : n.value.v) x *= k;
  return push(std::move(n));
}

Graph::Var Graph::sigmoid(Var a) {
  Node n;
  n.op = Op::Sigmoid;
  n.a = a;
  n.value = val(a);
  for (double& x : n.value.v) x = 1.0 / (1.0 + std::exp(-x));
  return push(std::move(n));
}

Graph::Var Graph::tanh_op(Var a) {
  Node n;
  n.op = Op::Tanh;
  n.a = a;
  n.value = val(a);
  for (double& x : n.value.v) x = std::tanh(x);
  return push(std::move(n));
}

Graph::Var Graph::softmax_vec(Var a) {
  Node n;
  n.op = Op::Softmax;
  n.a = a;
  n.value = val(a);
  n.value.v = softmax(val(a).v);
  return push(std::move(n));
}

Graph::Var Graph::concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) fail(ErrorKind::Shape, "concat_rows of nothing");
  size_t rows = 0;
  const size_t cols = val(parts[0]).cols;
  for (Var p : parts) {
    if (val(p).cols != cols) {
      fail(ErrorKind::Shape, "concat_rows column mismatch");
    }
    rows += val(p).rows;
  }
  Node n;
  n.op = Op::ConcatRows;
  n.list = parts;
  n.value = Tensor2(rows, cols);
  size_t r0 = 0;
  for (Var p : parts) {
    const Tensor2& t = val(p);
    for (size_t i = 0; i < t.rows; ++i) {
      for (size_t j = 0; j < cols; ++j) n.value.at(r0 + i, j) = t.at(i, j);
    }
    r0 += t.rows;
  }
  return push(std::move(n));
}

Graph::Var Graph::concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) fail(ErrorKind::Shape, "concat_cols of nothing");
  size_t cols = 0;
  const size_t rows = val(parts[0]).rows;
  for (Var p : parts) {
    if (val(p).rows != rows) {
      fail(ErrorKind::Shape, "concat_cols row mismatch");
    }
    cols += val(p).cols;
  }
  Node n;
  n.op = Op::ConcatCols;
  n.list = parts;
  n.value = Tensor2(rows, cols);
  size_t c0 = 0;
  for (Var p : parts) {
    const Tensor2& t = val(p);
    for (size_t i = 0; i < rows; ++i) {
      for (size_t j = 0; j < t.cols; ++j) n.value.at(i, c0 + j) = t.at(i, j);
    }
    c0 += t.cols;
  }
  return push(std::move(n));
}

Graph::Var Graph::slice_rows(Var a, size_t begin, size_t count) {
  const Tensor2& ta = val(a);
  if (begin + count > ta.rows) {
    fail(ErrorKind::Shape, "slice_rows out of range");
  }
  Node n;
  n.op = Op::SliceRows;
  n.a = a;
  n.index = begin;
  n.extent = count;
  n.value = Tensor2(count, ta.cols);
  for (size_t i = 0; i < count; ++i) {
    for (size_t j = 0; j < ta.cols; ++j) n.value.at(i, j) = ta.at(begin + i, j);
  }
  return push(std::move(n));
}

Graph::Var Graph::ce_logits(Var logits, size_t target) {
  const Tensor2& t = val(logits);
  if (t.cols != 1) fail(ErrorKind::Shape, "ce_logits wants a column vector");
  if (target >= t.rows) {
    fail(ErrorKind::Index, "ce_logits target out of range: " + std::to_string(target));
  }
  double max_logit = t.v[0];
  for (double x : t.v) max_logit = std::max(max_logit, x);
  double sum = 0.0;
  for (double x : t.v) sum += std::exp(x - max_logit);
  Node n;
  n.op = Op::CeLogits;
  n.a = logits;
  n.index = target;
  n.value = Tensor2(1, 1);
  n.value.v[0] = (std::log(sum) + max_logit) - t.v[target];
  return push(std::move(n));
}

Graph::Var Graph::add_scalars(const std::vector<Var>& terms) {
  if (terms.empty()) fail(ErrorKind::Shape, "add_scalars of nothing");
  Node n;
  n.op = Op::AddScalars;
  n.list = terms;
  n.value = Tensor2(1, 1);
  for (Var t : terms) {
    if (val(t).size() != 1) fail(ErrorKind::Shape, "add_scalars of non-scalar");
    n.value.v[0] += val(t).v[0];
  }
  return push(std::move(n));
}

void Graph::backward(Var root) {
  if (val(root).size() != 1) {
    fail(ErrorKind::Shape, "backward root must be scalar");
  }
  std::vector<Tensor2> grads(nodes_.size());
  const auto grad_of = [&](Var v) -> Tensor2& {
    if (grads[v].size() == 0) {
      grads[v] = Tensor2(val(v).rows, val(v).cols);
    }
    return grads[v];
  };
  grad_of(root).v[0] = 1.0;

  for (Var v = root; v >= 0; --v) {
    if (grads[v].size() == 0) continue;  // not on a path to the root
    const Node& n = nodes_[v];
    const Tensor2& d = grads[v];
    switch (n.op) {
      case Op::Constant:
        break;
      case Op::Param:
        if (n.sink) {
          for (size_t i = 0; i < d.size(); ++i) n.sink->v[i] += d.v[i];
        }
        break;
      case Op::ParamRow:
        if (n.sink) {
          for (size_t c = 0; c < n.value.rows; ++c) {
            n.sink->at(n.index, c) += d.v[c];
          }
        }
        break;
      case Op::Matmul: {
        const Tensor2& A = val(n.a);
        const Tensor2& B = val(n.b);
        Tensor2& dA = grad_of(n.a);
        Tensor2& dB = grad_of(n.b);
        // dA[i,k] += sum_j d[i,j] B[k,j]; dB[k,j] += sum_i A[i,k] d[i,j]
        for (size_t i = 0; i < A.rows; ++i) {
          for (size_t k = 0; k < A.cols; ++k) {
            double acc = 0.0;
            for (size_t j = 0; j < B.cols; ++j) acc += d.at(i, j) * B.at(k, j);
            dA.at(i, k) += acc;
          }
        }
        for (size_t k = 0; k < B.rows; ++k) {
          for (size_t j = 0; j < B.cols; ++j) {
            double acc = 0.0;
            for (size_t i = 0; i < A.rows; ++i) acc += A.at(i, k) * d.at(i, j);
            dB.at(k, j) += acc;
          }
        }
        break;
      }
      case Op::MatTVec: {
        // out = M^T x, out_j = sum_i M[i,j] x_i
        const Tensor2& M = val(n.a);
        const Tensor2& x = val(n.b);
        Tensor2& dM = grad_of(n.a);
        Tensor2& dx = grad_of(n.b);
        for (size_t i = 0; i < M.rows; ++i) {
          for (size_t j = 0; j < M.cols; ++j) {
            dM.at(i, j) += x.v[i] * d.v[j];
          }
        }
        for (size_t i = 0; i < M.rows; ++i) {
          double acc = 0.0;
          for (size_t j = 0; j < M.cols; ++j) acc += M.at(i, j) * d.v[j];
          dx.v[i] += acc;
        }
        break;
      }
      case Op::Add: {
        Tensor2& dA = grad_of(n.a);
        Tensor2& dB = grad_of(n.b);
        for (size_t i = 0; i < d.size(); ++i) {
          dA.v[i] += d.v[i];
          dB.v[i] += d.v[i];
        }
        break;
      }
      case Op::AddCol: {
        Tensor2& dM = grad_of(n.a);
        Tensor2& dV = grad_of(n.b);
        for (size_t i = 0; i < d.rows; ++i) {
          double acc = 0.0;
          for (size_t j = 0; j < d.cols; ++j) {
            dM.at(i, j) += d.at(i, j);
            acc += d.at(i, j);
          }
          dV.v[i] += acc;
        }
        break;
      }
      case Op::Hadamard: {
        const Tensor2& A = val(n.a);
        const Tensor2& B = val(n.b);
        Tensor2& dA = grad_of(n.a);
        Tensor2& dB = grad_of(n.b);
        for (size_t i = 0; i < d.size(); ++i) {
          dA.v[i] += d.v[i] * B.v[i];
          dB.v[i] += d.v[i] * A.v[i];
        }
        break;
      }
      case Op::OneMinus: {
        Tensor2& dA = grad_of(n.a);
        for (size_t i = 0; i < d.size(); ++i) dA.v[i] -= d.v[i];
        break;
      }
      case Op::Scale: {
        Tensor2& dA = grad_of(n.a);
        for (size_t i = 0; i < d.size(); ++i) dA.v[i] += n.k * d.v[i];
        break;
      }
      case Op::Sigmoid: {
        Tensor2& dA = grad_of(n.a);
        for (size_t i = 0; i < d.size(); ++i) {
          const double y = n.value.v[i];
          dA.v[i] += d.v[i] * y * (1.0 - y);
        }
        break;
      }
      case Op::Tanh: {
        Tensor2& dA = grad_of(n.a);
        for (size_t i = 0; i < d.size(); ++i) {
          const double y = n.value.v[i];
          dA.v[i] += d.v[i] * (1.0 - y * y);
        }
        break;
      }
      case Op::Softmax: {
        Tensor2& dA = grad_of(n.a);
        double dot = 0.0;
        for (size_t i = 0; i < d.size(); ++i) dot += d.v[i] * n.value.v[i];
        for (size_t i = 0; i < d.size(); ++i) {
          dA.v[i] += n.value.v[i] * (d.v[i] - dot);
        }
        break;
      }
      case Op::ConcatRows: {
        size_t r0 = 0;
        for (Var p : n.list) {
          Tensor2& dP = grad_of(p);
          for (size_t i = 0; i < dP.rows; ++i) {
            for (size_t j = 0; j < dP.cols; ++j) dP.at(i, j) += d.at(r0 + i, j);
          }
          r0 += dP.rows;
        }
        break;
      }
      case Op::ConcatCols: {
        size_t c0 = 0;
        for (Var p : n.list) {
          Tensor2& dP = grad_of(p);
          for (size_t i = 0; i < dP.rows; ++i) {
            for (size_t j = 0; j < dP.cols; ++j) dP.at(i, j) += d.at(i, c0 + j);
          }
          c0 += dP.cols;
        }
        break;
      }
      case Op::SliceRows: {
        Tensor2& dA = grad_of(n.a);
        for (size_t i = 0; i < n.extent; ++i) {
          for (size_t j = 0; j < d.cols; ++j) dA.at(n.index + i, j) += d.at(i, j);
        }
        break;
      }
      case Op::CeLogits: {
        Tensor2& dA = grad_of(n.a);
        const std::vector<double> p = softmax(val(n.a).v);
        for (size_t i = 0; i < p.size(); ++i) {
          double g = p[i];
          if (i == n.index) g -= 1.0;
          dA.v[i] += d.v[0] * g;
        }
        break;
      }
      case Op::AddScalars: {
        for (Var t : n.list) grad_of(t).v[0] += d.v[0];
        break;
      }
    }
  }
}

double grad_check(
    const std::function<double()>& f,
    const std::vector<std::pair<Tensor2*, const Tensor2*>>& params_and_grads,
    double eps) {
  if (eps <= 0.0) fail(ErrorKind::Config, "grad_check eps must be positive");
  double max_rel = 0.0;
  for (const auto& [param, analytic] : params_and_grads) {
    for (size_t i = 0; i < param->size(); ++i) {
      const double saved = param->v[i];
      param->v[i] = saved + eps;
      const double f_plus = f();
      param->v[i] = saved - eps;
      const double f_minus = f();
      param->v[i] = saved;
      if (!std::isfinite(f_plus) || !std::isfinite(f_minus)) {
        fail(ErrorKind::Numeric, "grad_check: non-finite objective");
      }
      const double numeric = (f_plus - f_minus) / (2.0 * eps);
      const double a = analytic->v[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      max_rel = std::max(max_rel, std::abs(a - numeric) / denom);
    }
  }
  return max_rel;
}

}  // namespace anmt
