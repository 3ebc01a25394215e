#ifndef ANMT_GRAPH_HPP
#define ANMT_GRAPH_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "anmt/tensor.hpp"

namespace anmt {

// Reverse-mode tape. Every op records its inputs and value; backward()
// sweeps the tape once and accumulates parameter gradients into the
// sinks registered with param()/param_row(). Accumulation order is the
// reverse tape order, which is fixed for a fixed forward program, so
// gradients are bit-reproducible.
class Graph {
 public:
  using Var = int32_t;

  Var constant(Tensor2 value);
  // grad_sink may be null for inference-only passes.
  Var param(const Tensor2* value, Tensor2* grad_sink);
  // One row of a (rows x cols) table as a (cols x 1) column vector.
  Var param_row(const Tensor2* table, Tensor2* grad_sink, size_t row);

  Var matmul(Var a, Var b);
  Var mat_t_vec(Var m, Var v);  // m^T * v for m (r x c), v (r x 1) -> (c x 1)
  Var add(Var a, Var b);
  Var add_col(Var m, Var v);    // adds column vector v to every column of m
  Var hadamard(Var a, Var b);
  Var one_minus(Var a);
  Var scale(Var a, double k);
  Var sigmoid(Var a);
  Var tanh_op(Var a);
  Var softmax_vec(Var a);       // flat softmax over all entries
  Var concat_rows(const std::vector<Var>& parts);  // same cols, stacked rows
  Var concat_cols(const std::vector<Var>& parts);  // same rows, stacked cols
  Var slice_rows(Var a, size_t begin, size_t count);
  // Scalar -log softmax(logits)[target], computed as logsumexp - logit.
  Var ce_logits(Var logits, size_t target);
  Var add_scalars(const std::vector<Var>& terms);

  const Tensor2& value(Var v) const { return val(v); }
  double scalar(Var v) const { return val(v).v[0]; }
  size_t node_count() const { return nodes_.size(); }

  // root must be scalar (1x1); seeds d(root)/d(root) = 1.
  void backward(Var root);

 private:
  enum class Op {
    Constant,
    Param,
    ParamRow,
    Matmul,
    MatTVec,
    Add,
    AddCol,
    Hadamard,
    OneMinus,
    Scale,
    Sigmoid,
    Tanh,
    Softmax,
    ConcatRows,
    ConcatCols,
    SliceRows,
    CeLogits,
    AddScalars,
  };

  struct Node {
    Op op;
    Var a = -1;
    Var b = -1;
    std::vector<Var> list;  // concat / add_scalars inputs
    size_t index = 0;       // row / slice begin / ce target
    size_t extent = 0;      // slice count
    double k = 0.0;
    Tensor2 value;                 // owned result (unused for Param nodes)
    const Tensor2* src = nullptr;  // param tensor, referenced not copied;
                                   // must outlive the graph and stay unchanged
    Tensor2* sink = nullptr;       // param gradient accumulator
  };

  // Param nodes alias the caller's tensor; everything else owns its value.
  const Tensor2& val(Var v) const {
    const Node& n = nodes_[v];
    return (n.op == Op::Param) ? *n.src : n.value;
  }

  Var push(Node node);
  std::vector<Node> nodes_;
};

// Central-difference gradient check. f re-evaluates the scalar from the
// CURRENT contents of the parameter tensors; each (param, analytic)
// pair is perturbed coordinate-wise. Returns the max relative error
// with denominator max(|analytic|, |numeric|, 1e-8).
double grad_check(
    const std::function<double()>& f,
    const std::vector<std::pair<Tensor2*, const Tensor2*>>& params_and_grads,
    double eps);

}  // namespace anmt

#endif
