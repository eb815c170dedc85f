#include "hmpnn/tensor.hpp"

#include <cmath>
#include <cstddef>

#include "hmpnn/errors.hpp"

namespace hmpnn::ad {

int Tensor::rows() const { return tape_->value(*this).rows; }
int Tensor::cols() const { return tape_->value(*this).cols; }
double Tensor::at(int r, int c) const { return tape_->value(*this).at(r, c); }

namespace {

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

const char* Tape::op_name(Op op) {
  switch (op) {
    case Op::kLeaf: return "leaf";
    case Op::kMatmul: return "matmul";
    case Op::kMatmulBT: return "matmul_bt";
    case Op::kAdd: return "add";
    case Op::kScale: return "scale";
    case Op::kSigmoid: return "sigmoid";
    case Op::kConcatCols: return "concat_cols";
    case Op::kSumRows: return "sum_rows";
    case Op::kSumAll: return "sum_all";
    case Op::kSelectRows: return "select_rows";
    case Op::kScatterSumRows: return "scatter_sum_rows";
    case Op::kEdgeAffine: return "edge_affine";
    case Op::kBceLoss: return "bce_loss";
  }
  return "?";
}

int Tape::require(Tensor t, const char* op) const {
  if (!t.defined() || t.tape_ != this)
    throw ValidationError(std::string(op) + ": tensor does not belong to this tape");
  return t.id_;
}

int Tape::new_value(int rows, int cols, bool requires_grad) {
  values_.emplace_back(rows, cols);
  grads_.emplace_back();
  has_grad_.push_back(0);
  requires_grad_.push_back(requires_grad ? 1 : 0);
  return static_cast<int>(values_.size()) - 1;
}

Tensor Tape::push(Node n, int rows, int cols) {
  bool req = false;
  if (n.a >= 0) req = req || requires_grad_[n.a];
  if (n.b >= 0) req = req || requires_grad_[n.b];
  for (int p : n.parts) req = req || requires_grad_[p];
  n.out = new_value(rows, cols, req);
  nodes_.push_back(n);
  return Tensor(this, n.out);
}

void Tape::check_output(const Node& n) {
  if (!check_finite_) return;
  for (double v : values_[n.out].data)
    if (!std::isfinite(v))
      throw NumericError(std::string("non-finite value produced by ") + op_name(n.op));
}

Tensor Tape::constant(DenseMatrix m) {
  Node n;
  n.op = Op::kLeaf;
  const int rows = m.rows, cols = m.cols;
  Tensor t = push(n, rows, cols);
  values_[t.id_] = std::move(m);
  return t;
}

Tensor Tape::zeros(int rows, int cols) {
  Node n;
  n.op = Op::kLeaf;
  return push(n, rows, cols);
}

Tensor Tape::param(const std::string& name, const DenseMatrix& m) {
  if (param_index_.count(name))
    throw ValidationError("param: duplicate parameter name '" + name + "'");
  Node n;
  n.op = Op::kLeaf;
  Tensor t = push(n, m.rows, m.cols);
  values_[t.id_] = m;
  requires_grad_[t.id_] = 1;
  param_index_[name] = t.id_;
  params_.emplace_back(name, t.id_);
  return t;
}

Tensor Tape::matmul(Tensor ta, Tensor tb) {
  Node n;
  n.op = Op::kMatmul;
  n.a = require(ta, "matmul");
  n.b = require(tb, "matmul");
  const DenseMatrix& a = val(n.a);
  const DenseMatrix& b = val(n.b);
  if (a.cols != b.rows)
    throw ValidationError("matmul: inner dimensions differ, " + std::to_string(a.rows) + "x" +
                          std::to_string(a.cols) + " times " + std::to_string(b.rows) + "x" +
                          std::to_string(b.cols));
  Tensor t = push(n, a.rows, b.cols);
  DenseMatrix& c = val(t.id_);
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    double* crow = c.row(i);
    for (int k = 0; k < a.cols; ++k) {
      const double aik = arow[k];
      const double* brow = b.row(k);
      for (int j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
    }
  }
  check_output(nodes_.back());
  return t;
}

Tensor Tape::matmul_bt(Tensor ta, Tensor tb) {
  Node n;
  n.op = Op::kMatmulBT;
  n.a = require(ta, "matmul_bt");
  n.b = require(tb, "matmul_bt");
  const DenseMatrix& a = val(n.a);
  const DenseMatrix& b = val(n.b);
  if (a.cols != b.cols)
    throw ValidationError("matmul_bt: inner dimensions differ, " + std::to_string(a.rows) + "x" +
                          std::to_string(a.cols) + " times transpose of " +
                          std::to_string(b.rows) + "x" + std::to_string(b.cols));
  Tensor t = push(n, a.rows, b.rows);
  DenseMatrix& c = val(t.id_);
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    double* crow = c.row(i);
    for (int j = 0; j < b.rows; ++j) {
      const double* brow = b.row(j);
      double s = 0.0;
      for (int k = 0; k < a.cols; ++k) s += arow[k] * brow[k];
      crow[j] = s;
    }
  }
  check_output(nodes_.back());
  return t;
}

Tensor Tape::add(Tensor ta, Tensor tb) {
  Node n;
  n.op = Op::kAdd;
  n.a = require(ta, "add");
  n.b = require(tb, "add");
  const DenseMatrix& a = val(n.a);
  const DenseMatrix& b = val(n.b);
  const bool broadcast = (b.rows == 1 && a.rows != 1);
  if (!(a.same_shape(b) || (broadcast && a.cols == b.cols)))
    throw ValidationError("add: shapes " + std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                          " and " + std::to_string(b.rows) + "x" + std::to_string(b.cols) +
                          " do not match");
  Tensor t = push(n, a.rows, a.cols);
  DenseMatrix& c = val(t.id_);
  if (broadcast) {
    const double* brow = b.row(0);
    for (int i = 0; i < a.rows; ++i) {
      const double* arow = a.row(i);
      double* crow = c.row(i);
      for (int j = 0; j < a.cols; ++j) crow[j] = arow[j] + brow[j];
    }
  } else {
    for (size_t i = 0; i < a.data.size(); ++i) c.data[i] = a.data[i] + b.data[i];
  }
  check_output(nodes_.back());
  return t;
}

Tensor Tape::scale(Tensor ta, double k) {
  Node n;
  n.op = Op::kScale;
  n.a = require(ta, "scale");
  n.k = k;
  const DenseMatrix& a = val(n.a);
  Tensor t = push(n, a.rows, a.cols);
  DenseMatrix& c = val(t.id_);
  for (size_t i = 0; i < a.data.size(); ++i) c.data[i] = k * a.data[i];
  check_output(nodes_.back());
  return t;
}

Tensor Tape::sigmoid(Tensor ta) {
  Node n;
  n.op = Op::kSigmoid;
  n.a = require(ta, "sigmoid");
  const DenseMatrix& a = val(n.a);
  Tensor t = push(n, a.rows, a.cols);
  DenseMatrix& c = val(t.id_);
  for (size_t i = 0; i < a.data.size(); ++i) c.data[i] = stable_sigmoid(a.data[i]);
  check_output(nodes_.back());
  return t;
}

Tensor Tape::concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ValidationError("concat_cols: no inputs");
  Node n;
  n.op = Op::kConcatCols;
  int rows = -1, cols = 0;
  for (Tensor p : parts) {
    const int id = require(p, "concat_cols");
    n.parts.push_back(id);
    if (rows < 0) rows = val(id).rows;
    if (val(id).rows != rows)
      throw ValidationError("concat_cols: row counts differ (" + std::to_string(rows) + " vs " +
                            std::to_string(val(id).rows) + ")");
    cols += val(id).cols;
  }
  Tensor t = push(n, rows, cols);
  DenseMatrix& c = val(t.id_);
  int off = 0;
  for (int id : nodes_.back().parts) {
    const DenseMatrix& p = val(id);
    for (int i = 0; i < rows; ++i) {
      const double* prow = p.row(i);
      double* crow = c.row(i) + off;
      for (int j = 0; j < p.cols; ++j) crow[j] = prow[j];
    }
    off += p.cols;
  }
  check_output(nodes_.back());
  return t;
}

Tensor Tape::sum_rows(Tensor ta) {
  Node n;
  n.op = Op::kSumRows;
  n.a = require(ta, "sum_rows");
  const DenseMatrix& a = val(n.a);
  Tensor t = push(n, 1, a.cols);
  DenseMatrix& c = val(t.id_);
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    for (int j = 0; j < a.cols; ++j) c.data[j] += arow[j];
  }
  check_output(nodes_.back());
  return t;
}

Tensor Tape::sum_all(Tensor ta) {
  Node n;
  n.op = Op::kSumAll;
  n.a = require(ta, "sum_all");
  const DenseMatrix& a = val(n.a);
  Tensor t = push(n, 1, 1);
  double s = 0.0;
  for (double v : a.data) s += v;
  val(t.id_).data[0] = s;
  check_output(nodes_.back());
  return t;
}

Tensor Tape::select_rows(Tensor ta, std::vector<int> idx) {
  Node n;
  n.op = Op::kSelectRows;
  n.a = require(ta, "select_rows");
  const DenseMatrix& a = val(n.a);
  for (int r : idx)
    if (r < 0 || r >= a.rows)
      throw ValidationError("select_rows: index " + std::to_string(r) + " out of range for " +
                            std::to_string(a.rows) + " rows");
  n.iaux = static_cast<int>(int_aux_.size());
  int_aux_.push_back(std::move(idx));
  const std::vector<int>& ix = int_aux_[n.iaux];
  Tensor t = push(n, static_cast<int>(ix.size()), a.cols);
  DenseMatrix& c = val(t.id_);
  for (size_t r = 0; r < ix.size(); ++r) {
    const double* arow = a.row(ix[r]);
    double* crow = c.row(static_cast<int>(r));
    for (int j = 0; j < a.cols; ++j) crow[j] = arow[j];
  }
  check_output(nodes_.back());
  return t;
}

Tensor Tape::scatter_sum_rows(Tensor tm, std::vector<int> dst, int out_rows) {
  Node n;
  n.op = Op::kScatterSumRows;
  n.a = require(tm, "scatter_sum_rows");
  const DenseMatrix& m = val(n.a);
  if (static_cast<int>(dst.size()) != m.rows)
    throw ValidationError("scatter_sum_rows: " + std::to_string(dst.size()) +
                          " targets for " + std::to_string(m.rows) + " rows");
  for (int r : dst)
    if (r < 0 || r >= out_rows)
      throw ValidationError("scatter_sum_rows: target " + std::to_string(r) +
                            " out of range for " + std::to_string(out_rows) + " rows");
  n.iaux = static_cast<int>(int_aux_.size());
  int_aux_.push_back(std::move(dst));
  const std::vector<int>& ix = int_aux_[n.iaux];
  Tensor t = push(n, out_rows, m.cols);
  DenseMatrix& c = val(t.id_);
  for (size_t e = 0; e < ix.size(); ++e) {
    const double* mrow = m.row(static_cast<int>(e));
    double* crow = c.row(ix[e]);
    for (int j = 0; j < m.cols; ++j) crow[j] += mrow[j];
  }
  check_output(nodes_.back());
  return t;
}

Tensor Tape::edge_affine(Tensor tg, Tensor tx, int out_dim) {
  Node n;
  n.op = Op::kEdgeAffine;
  n.a = require(tg, "edge_affine");
  n.b = require(tx, "edge_affine");
  const DenseMatrix& g = val(n.a);
  const DenseMatrix& x = val(n.b);
  if (g.rows != x.rows)
    throw ValidationError("edge_affine: row counts differ (" + std::to_string(g.rows) + " vs " +
                          std::to_string(x.rows) + ")");
  if (out_dim <= 0 || g.cols != out_dim * x.cols)
    throw ValidationError("edge_affine: matrix width " + std::to_string(g.cols) +
                          " does not factor as " + std::to_string(out_dim) + "x" +
                          std::to_string(x.cols));
  Tensor t = push(n, g.rows, out_dim);
  DenseMatrix& y = val(t.id_);
  const int q = x.cols;
  for (int e = 0; e < g.rows; ++e) {
    const double* grow = g.row(e);
    const double* xrow = x.row(e);
    double* yrow = y.row(e);
    for (int o = 0; o < out_dim; ++o) {
      const double* gsub = grow + static_cast<size_t>(o) * q;
      double s = 0.0;
      for (int i = 0; i < q; ++i) s += gsub[i] * xrow[i];
      yrow[o] = s;
    }
  }
  check_output(nodes_.back());
  return t;
}

Tensor Tape::bce_loss(Tensor ts, std::vector<double> labels) {
  Node n;
  n.op = Op::kBceLoss;
  n.a = require(ts, "bce_loss");
  const DenseMatrix& s = val(n.a);
  if (s.cols != 1) throw ValidationError("bce_loss: scores must be a column vector");
  if (s.rows == 0) throw ValidationError("bce_loss: empty score vector");
  if (static_cast<int>(labels.size()) != s.rows)
    throw ValidationError("bce_loss: " + std::to_string(labels.size()) + " labels for " +
                          std::to_string(s.rows) + " scores");
  n.daux = static_cast<int>(dbl_aux_.size());
  dbl_aux_.push_back(std::move(labels));
  const std::vector<double>& y = dbl_aux_[n.daux];
  Tensor t = push(n, 1, 1);
  double loss = 0.0;
  for (int i = 0; i < s.rows; ++i) {
    double p = s.data[i];
    if (p < kBceEps) p = kBceEps;
    if (p > 1.0 - kBceEps) p = 1.0 - kBceEps;
    loss -= y[i] * std::log(p) + (1.0 - y[i]) * std::log(1.0 - p);
  }
  val(t.id_).data[0] = loss / s.rows;
  check_output(nodes_.back());
  return t;
}

void Tape::ensure_grad(int id) {
  if (!has_grad_[id]) {
    grads_[id] = DenseMatrix(values_[id].rows, values_[id].cols);
    has_grad_[id] = 1;
  }
}

void Tape::backward(Tensor loss) {
  const int lid = require(loss, "backward");
  if (values_[lid].rows != 1 || values_[lid].cols != 1)
    throw ValidationError("backward: loss must be 1x1");
  for (size_t i = 0; i < has_grad_.size(); ++i) has_grad_[i] = 0;
  ensure_grad(lid);
  grads_[lid].data[0] = 1.0;
  // Parameters always end up with a materialized (possibly zero) gradient,
  // so optimizers can hold stable references.
  for (const auto& [name, id] : params_) ensure_grad(id);
  for (size_t ni = nodes_.size(); ni-- > 0;) {
    const Node& n = nodes_[ni];
    if (n.op == Op::kLeaf) continue;
    if (!has_grad_[n.out] || !requires_grad_[n.out]) continue;
    backward_node(n);
  }
}

void Tape::backward_node(const Node& n) {
  const DenseMatrix& go = grads_[n.out];
  switch (n.op) {
    case Op::kLeaf:
      break;
    case Op::kMatmul: {
      const DenseMatrix& a = val(n.a);
      const DenseMatrix& b = val(n.b);
      if (requires_grad_[n.a]) {
        ensure_grad(n.a);
        DenseMatrix& ga = grads_[n.a];
        for (int i = 0; i < a.rows; ++i) {
          const double* gorow = go.row(i);
          double* garow = ga.row(i);
          for (int k = 0; k < a.cols; ++k) {
            const double* brow = b.row(k);
            double s = 0.0;
            for (int j = 0; j < b.cols; ++j) s += gorow[j] * brow[j];
            garow[k] += s;
          }
        }
      }
      if (requires_grad_[n.b]) {
        ensure_grad(n.b);
        DenseMatrix& gb = grads_[n.b];
        for (int i = 0; i < a.rows; ++i) {
          const double* arow = a.row(i);
          const double* gorow = go.row(i);
          for (int k = 0; k < a.cols; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            double* gbrow = gb.row(k);
            for (int j = 0; j < b.cols; ++j) gbrow[j] += aik * gorow[j];
          }
        }
      }
      break;
    }
    case Op::kMatmulBT: {
      const DenseMatrix& a = val(n.a);
      const DenseMatrix& b = val(n.b);
      if (requires_grad_[n.a]) {
        ensure_grad(n.a);
        DenseMatrix& ga = grads_[n.a];
        for (int i = 0; i < a.rows; ++i) {
          const double* gorow = go.row(i);
          double* garow = ga.row(i);
          for (int j = 0; j < b.rows; ++j) {
            const double s = gorow[j];
            if (s == 0.0) continue;
            const double* brow = b.row(j);
            for (int k = 0; k < a.cols; ++k) garow[k] += s * brow[k];
          }
        }
      }
      if (requires_grad_[n.b]) {
        ensure_grad(n.b);
        DenseMatrix& gb = grads_[n.b];
        for (int i = 0; i < a.rows; ++i) {
          const double* arow = a.row(i);
          const double* gorow = go.row(i);
          for (int j = 0; j < b.rows; ++j) {
            const double s = gorow[j];
            if (s == 0.0) continue;
            double* gbrow = gb.row(j);
            for (int k = 0; k < a.cols; ++k) gbrow[k] += s * arow[k];
          }
        }
      }
      break;
    }
    case Op::kAdd: {
      const DenseMatrix& a = val(n.a);
      const DenseMatrix& b = val(n.b);
      if (requires_grad_[n.a]) {
        ensure_grad(n.a);
        DenseMatrix& ga = grads_[n.a];
        for (size_t i = 0; i < go.data.size(); ++i) ga.data[i] += go.data[i];
      }
      if (requires_grad_[n.b]) {
        ensure_grad(n.b);
        DenseMatrix& gb = grads_[n.b];
        if (b.rows == 1 && a.rows != 1) {
          for (int i = 0; i < go.rows; ++i) {
            const double* gorow = go.row(i);
            for (int j = 0; j < go.cols; ++j) gb.data[j] += gorow[j];
          }
        } else {
          for (size_t i = 0; i < go.data.size(); ++i) gb.data[i] += go.data[i];
        }
      }
      break;
    }
    case Op::kScale: {
      if (requires_grad_[n.a]) {
        ensure_grad(n.a);
        DenseMatrix& ga = grads_[n.a];
        for (size_t i = 0; i < go.data.size(); ++i) ga.data[i] += n.k * go.data[i];
      }
      break;
    }
    case Op::kSigmoid: {
      if (requires_grad_[n.a]) {
        ensure_grad(n.a);
        DenseMatrix& ga = grads_[n.a];
        const DenseMatrix& out = val(n.out);
        for (size_t i = 0; i < go.data.size(); ++i) {
          const double s = out.data[i];
          ga.data[i] += go.data[i] * s * (1.0 - s);
        }
      }
      break;
    }
    case Op::kConcatCols: {
      int off = 0;
      for (int pid : n.parts) {
        const DenseMatrix& p = val(pid);
        if (requires_grad_[pid]) {
          ensure_grad(pid);
          DenseMatrix& gp = grads_[pid];
          for (int i = 0; i < p.rows; ++i) {
            const double* gorow = go.row(i) + off;
            double* gprow = gp.row(i);
            for (int j = 0; j < p.cols; ++j) gprow[j] += gorow[j];
          }
        }
        off += p.cols;
      }
      break;
    }
    case Op::kSumRows: {
      if (requires_grad_[n.a]) {
        ensure_grad(n.a);
        DenseMatrix& ga = grads_[n.a];
        for (int i = 0; i < ga.rows; ++i) {
          double* garow = ga.row(i);
          for (int j = 0; j < ga.cols; ++j) garow[j] += go.data[j];
        }
      }
      break;
    }
    case Op::kSumAll: {
      if (requires_grad_[n.a]) {
        ensure_grad(n.a);
        DenseMatrix& ga = grads_[n.a];
        const double s = go.data[0];
        for (size_t i = 0; i < ga.data.size(); ++i) ga.data[i] += s;
      }
      break;
    }
    case Op::kSelectRows: {
      if (requires_grad_[n.a]) {
        ensure_grad(n.a);
        DenseMatrix& ga = grads_[n.a];
        const std::vector<int>& ix = int_aux_[n.iaux];
        for (size_t r = 0; r < ix.size(); ++r) {
          const double* gorow = go.row(static_cast<int>(r));
          double* garow = ga.row(ix[r]);
          for (int j = 0; j < ga.cols; ++j) garow[j] += gorow[j];
        }
      }
      break;
    }
    case Op::kScatterSumRows: {
      if (requires_grad_[n.a]) {
        ensure_grad(n.a);
        DenseMatrix& ga = grads_[n.a];
        const std::vector<int>& ix = int_aux_[n.iaux];
        for (size_t e = 0; e < ix.size(); ++e) {
          const double* gorow = go.row(ix[e]);
          double* garow = ga.row(static_cast<int>(e));
          for (int j = 0; j < ga.cols; ++j) garow[j] += gorow[j];
        }
      }
      break;
    }
    case Op::kEdgeAffine: {
      const DenseMatrix& g = val(n.a);
      const DenseMatrix& x = val(n.b);
      const int q = x.cols;
      const int p = val(n.out).cols;
      const bool need_g = requires_grad_[n.a];
      const bool need_x = requires_grad_[n.b];
      if (need_g) ensure_grad(n.a);
      if (need_x) ensure_grad(n.b);
      for (int e = 0; e < g.rows; ++e) {
        const double* gorow = go.row(e);
        const double* xrow = x.row(e);
        const double* grow = g.row(e);
        double* ggrow = need_g ? grads_[n.a].row(e) : nullptr;
        double* gxrow = need_x ? grads_[n.b].row(e) : nullptr;
        for (int o = 0; o < p; ++o) {
          const double s = gorow[o];
          if (s == 0.0) continue;
          const size_t base = static_cast<size_t>(o) * q;
          if (need_g)
            for (int i = 0; i < q; ++i) ggrow[base + i] += s * xrow[i];
          if (need_x)
            for (int i = 0; i < q; ++i) gxrow[i] += s * grow[base + i];
        }
      }
      break;
    }
    case Op::kBceLoss: {
      if (requires_grad_[n.a]) {
        ensure_grad(n.a);
        DenseMatrix& ga = grads_[n.a];
        const DenseMatrix& s = val(n.a);
        const std::vector<double>& y = dbl_aux_[n.daux];
        const double g0 = go.data[0] / s.rows;
        for (int i = 0; i < s.rows; ++i) {
          const double p = s.data[i];
          // Clamped entries sit on a flat section of the loss.
          if (p < kBceEps || p > 1.0 - kBceEps) continue;
          ga.data[i] += g0 * (p - y[i]) / (p * (1.0 - p));
        }
      }
      break;
    }
  }
}

const DenseMatrix& Tape::value(Tensor t) const {
  return values_[require(t, "value")];
}

double Tape::scalar(Tensor t) const {
  const DenseMatrix& v = value(t);
  if (v.rows != 1 || v.cols != 1) throw ValidationError("scalar: tensor is not 1x1");
  return v.data[0];
}

const DenseMatrix& Tape::grad(Tensor t) const {
  const int id = require(t, "grad");
  if (!has_grad_[id]) {
    static thread_local DenseMatrix zero;
    zero = DenseMatrix(values_[id].rows, values_[id].cols);
    return zero;
  }
  return grads_[id];
}

const DenseMatrix& Tape::grad_of(const std::string& param_name) const {
  auto it = param_index_.find(param_name);
  if (it == param_index_.end())
    throw ValidationError("grad_of: unknown parameter '" + param_name + "'");
  return grad(Tensor(const_cast<Tape*>(this), it->second));
}

Tensor Tape::find_param(const std::string& param_name) const {
  auto it = param_index_.find(param_name);
  if (it == param_index_.end())
    throw ValidationError("find_param: unknown parameter '" + param_name + "'");
  return Tensor(const_cast<Tape*>(this), it->second);
}

}  // namespace hmpnn::ad
