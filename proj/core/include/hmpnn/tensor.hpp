#pragma once

#include <deque>
#include <string>
#include <unordered_map>
#include <vector>

#include "hmpnn/matrix.hpp"

namespace hmpnn::ad {

class Tape;

// Cheap handle into a Tape. Copy freely; the tape owns all storage.
class Tensor {
 public:
  Tensor() = default;
  bool defined() const { return tape_ != nullptr; }
  int rows() const;
  int cols() const;
  double at(int r, int c) const;

 private:
  friend class Tape;
  Tensor(Tape* tape, int id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Reverse-mode tape over dense matrices. A forward pass records one node per
// operation; backward walks the record once in reverse. Graph-sized work
// (gathers, per-edge affine maps, segment sums) is expressed as single nodes
// over edge-batched matrices, so tape length stays proportional to model
// depth rather than edge count.
//
// Gradient accumulation orders are fixed (ascending row/edge index), so
// evaluating the same tape twice is bit-identical.
class Tape {
 public:
  explicit Tape(bool check_finite = true) : check_finite_(check_finite) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaves.
  Tensor constant(DenseMatrix m);
  Tensor zeros(int rows, int cols);
  // Trainable leaf registered under a unique name; values are copied in.
  Tensor param(const std::string& name, const DenseMatrix& m);

  // Operations. Shape mismatches throw ValidationError naming the op.
  Tensor matmul(Tensor a, Tensor b);     // (n,k) x (k,m) -> (n,m)
  Tensor matmul_bt(Tensor a, Tensor b);  // (n,k) x (m,k) -> (n,m), i.e. a * b^T
  // Same shape, or b with one row broadcast across a's rows.
  Tensor add(Tensor a, Tensor b);
  Tensor scale(Tensor a, double k);
  Tensor sigmoid(Tensor a);
  Tensor concat_cols(const std::vector<Tensor>& parts);
  Tensor sum_rows(Tensor a);  // (n,c) -> (1,c)
  Tensor sum_all(Tensor a);   // (n,c) -> (1,1)
  // out[r] = a[idx[r]]; idx entries must be valid rows of a.
  Tensor select_rows(Tensor a, std::vector<int> idx);
  // out has out_rows rows; out[dst[e]] += msgs[e] in ascending e order.
  Tensor scatter_sum_rows(Tensor msgs, std::vector<int> dst, int out_rows);
  // Per-row affine map: g row e holds an (out_dim x q) matrix flattened
  // row-major; out[e] = reshape(g[e]) * x[e].
  Tensor edge_affine(Tensor g, Tensor x, int out_dim);
  // Mean binary cross entropy of scores (n x 1) against 0/1 labels, with
  // scores clamped to [1e-12, 1 - 1e-12]. Errors on empty input.
  Tensor bce_loss(Tensor scores, std::vector<double> labels);

  // Seeds d(loss)/d(loss) = 1 and sweeps the record in reverse. loss must be
  // 1x1. Callable more than once; gradients are reset each call.
  void backward(Tensor loss);

  const DenseMatrix& value(Tensor t) const;
  double scalar(Tensor t) const;  // value of a 1x1 tensor
  // Gradient of the last backward() with respect to t. Zero matrix when the
  // loss does not depend on t.
  const DenseMatrix& grad(Tensor t) const;
  const DenseMatrix& grad_of(const std::string& param_name) const;
  Tensor find_param(const std::string& param_name) const;

  const std::vector<std::pair<std::string, int>>& params() const { return params_; }
  size_t op_count() const { return nodes_.size(); }

  static constexpr double kBceEps = 1e-12;

 private:
  enum class Op {
    kLeaf,
    kMatmul,
    kMatmulBT,
    kAdd,
    kScale,
    kSigmoid,
    kConcatCols,
    kSumRows,
    kSumAll,
    kSelectRows,
    kScatterSumRows,
    kEdgeAffine,
    kBceLoss,
  };

  struct Node {
    Op op = Op::kLeaf;
    int out = -1;
    int a = -1;
    int b = -1;
    std::vector<int> parts;  // concat inputs
    double k = 0.0;          // scale factor
    int iaux = -1;           // index into int_aux_ (select/scatter indices)
    int daux = -1;           // index into dbl_aux_ (bce labels)
  };

  int new_value(int rows, int cols, bool requires_grad);
  Tensor push(Node n, int rows, int cols);
  void ensure_grad(int id);
  const DenseMatrix& val(int id) const { return values_[id]; }
  DenseMatrix& val(int id) { return values_[id]; }
  void check_output(const Node& n);
  static const char* op_name(Op op);
  void backward_node(const Node& n);
  int require(Tensor t, const char* op) const;

  std::vector<Node> nodes_;
  // Deques, not vectors: ops bind references to input matrices before pushing
  // their output, and push must not invalidate those references.
  std::deque<DenseMatrix> values_;
  std::deque<DenseMatrix> grads_;
  std::vector<char> has_grad_;
  std::vector<char> requires_grad_;
  std::vector<std::vector<int>> int_aux_;
  std::vector<std::vector<double>> dbl_aux_;
  std::vector<std::pair<std::string, int>> params_;
  std::unordered_map<std::string, int> param_index_;
  bool check_finite_ = true;
};

}  // namespace hmpnn::ad
