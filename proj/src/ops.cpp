/*
 * Copyright 2026 The LOGNet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <algorithm>
#include <cmath>
#include <initializer_list>

#include "lognet/kernels.hpp"
#include "lognet/tensor.hpp"

namespace lognet {
namespace {

using ImplPtr = std::shared_ptr<TensorImpl>;

void check_finite(const char* op, const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) throw NumericError(std::string("non-finite value produced by ") + op);
}

// Builds the output tensor and, when a tape is recording and some input
// needs gradients, registers the backward closure.
template <class MakeBackward>
Tensor emit(const char* op, Shape shape, std::vector<double> values,
            std::initializer_list<const Tensor*> inputs, MakeBackward&& make_backward) {
  check_finite(op, values);
  Tensor out(std::move(shape), std::move(values));
  Tape* tape = active_tape();
  if (tape == nullptr) return out;
  bool needs = false;
  for (const Tensor* t : inputs) needs = needs || t->requires_grad();
  if (!needs) return out;
  out.impl()->requires_grad = true;
  out.impl()->is_leaf = false;
  tape->record(out.impl(), make_backward(out.impl()));
  return out;
}

std::size_t rows_of(const TensorImpl& t) { return t.shape[0]; }
std::size_t cols_of(const TensorImpl& t) { return t.shape.size() == 2 ? t.shape[1] : 1; }

enum class Bcast { kFull, kColumn, kScalar };

Bcast classify(const Tensor& t, std::size_t rows, std::size_t cols) {
  if (t.rows() == rows && t.cols() == cols) return Bcast::kFull;
  if (t.rows() == rows && t.cols() == 1) return Bcast::kColumn;
  if (t.rows() == 1 && t.cols() == 1) return Bcast::kScalar;
  throw ShapeError("incompatible operand " + shape_str(t.shape()) + " for " + std::to_string(rows) +
                   "x" + std::to_string(cols));
}

inline std::size_t bidx(Bcast b, std::size_t r, std::size_t c, std::size_t cols) {
  switch (b) {
    case Bcast::kFull: return r * cols + c;
    case Bcast::kColumn: return r;
    case Bcast::kScalar: return 0;
  }
  return 0;
}

enum class BinOp { kAdd, kSub, kMul };

Tensor binary(const char* name, BinOp op, const Tensor& a, const Tensor& b) {
  const std::size_t rows = std::max(a.rows(), b.rows());
  const std::size_t cols = std::max(a.cols(), b.cols());
  const Bcast ba = classify(a, rows, cols);
  const Bcast bb = classify(b, rows, cols);
  const auto& av = a.impl()->value;
  const auto& bv = b.impl()->value;
  std::vector<double> out(rows * cols);
  if (ba == Bcast::kFull && bb == Bcast::kFull && op == BinOp::kMul) {
    kernels::active().mul(out.size(), av.data(), bv.data(), out.data());
  } else {
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) {
        const double x = av[bidx(ba, r, c, cols)];
        const double y = bv[bidx(bb, r, c, cols)];
        out[r * cols + c] = op == BinOp::kAdd ? x + y : op == BinOp::kSub ? x - y : x * y;
      }
  }
  Shape shape{rows, cols};
  return emit(name, shape, std::move(out), {&a, &b},
              [A = a.impl(), B = b.impl(), ba, bb, op, rows, cols](ImplPtr o) {
                return [A, B, o, ba, bb, op, rows, cols] {
                  const auto& g = o->grad;
                  if (A->requires_grad) {
                    double* ga = A->ensure_grad();
                    for (std::size_t r = 0; r < rows; ++r)
                      for (std::size_t c = 0; c < cols; ++c) {
                        const double gv = g[r * cols + c];
                        ga[bidx(ba, r, c, cols)] +=
                            op == BinOp::kMul ? gv * B->value[bidx(bb, r, c, cols)] : gv;
                      }
                  }
                  if (B->requires_grad) {
                    double* gb = B->ensure_grad();
                    for (std::size_t r = 0; r < rows; ++r)
                      for (std::size_t c = 0; c < cols; ++c) {
                        const double gv = g[r * cols + c];
                        gb[bidx(bb, r, c, cols)] += op == BinOp::kMul   ? gv * A->value[bidx(ba, r, c, cols)]
                                                    : op == BinOp::kSub ? -gv
                                                                        : gv;
                      }
                  }
                };
              });
}

// Pointwise unary op; `deriv(x, y)` is dy/dx in terms of input and output.
template <class F, class D>
Tensor unary(const char* name, const Tensor& x, F f, D deriv) {
  const auto& xv = x.impl()->value;
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = f(xv[i]);
  return emit(name, x.shape(), std::move(out), {&x}, [X = x.impl(), deriv](ImplPtr o) {
    return [X, o, deriv] {
      double* gx = X->ensure_grad();
      for (std::size_t i = 0; i < o->grad.size(); ++i) gx[i] += o->grad[i] * deriv(X->value[i], o->value[i]);
    };
  });
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k)
    throw ShapeError("matmul inner extents differ: " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  std::vector<double> out(m * n, 0.0);
  kernels::active().gemm_nn(m, n, k, a.impl()->value.data(), b.impl()->value.data(), out.data());
  return emit("matmul", {m, n}, std::move(out), {&a, &b}, [A = a.impl(), B = b.impl(), m, k, n](ImplPtr o) {
    return [A, B, o, m, k, n] {
      const auto& kt = kernels::active();
      if (A->requires_grad) kt.gemm_nt(m, k, n, o->grad.data(), B->value.data(), A->ensure_grad());
      if (B->requires_grad) kt.gemm_tn(k, n, m, A->value.data(), o->grad.data(), B->ensure_grad());
    };
  });
}

Tensor add(const Tensor& a, const Tensor& b) { return binary("add", BinOp::kAdd, a, b); }
Tensor sub(const Tensor& a, const Tensor& b) { return binary("sub", BinOp::kSub, a, b); }
Tensor mul(const Tensor& a, const Tensor& b) { return binary("mul", BinOp::kMul, a, b); }

Tensor scale(const Tensor& x, double c) {
  return unary("scale", x, [c](double v) { return c * v; }, [c](double, double) { return c; });
}

Tensor elu(const Tensor& x) {
  return unary(
      "elu", x, [](double v) { return v > 0.0 ? v : std::expm1(v); },
      [](double v, double y) { return v > 0.0 ? 1.0 : y + 1.0; });
}

Tensor tanh(const Tensor& x) {
  return unary(
      "tanh", x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& x) {
  return unary(
      "sigmoid", x,
      [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor softmax(const Tensor& x, int axis) {
  if (axis != 0 && axis != 1) throw ShapeError("softmax axis must be 0 or 1");
  const std::size_t rows = x.rows(), cols = x.cols();
  // A slice is `len` elements at stride `stride`, starting at `start(j)`.
  const std::size_t nslices = axis == 0 ? cols : rows;
  const std::size_t len = axis == 0 ? rows : cols;
  const std::size_t stride = axis == 0 ? cols : 1;
  const std::size_t step = axis == 0 ? 1 : cols;
  const auto& xv = x.impl()->value;
  std::vector<double> out(xv.size());
  for (std::size_t j = 0; j < nslices; ++j) {
    const std::size_t base = j * step;
    double mx = xv[base];
    for (std::size_t i = 1; i < len; ++i) mx = std::max(mx, xv[base + i * stride]);
    double z = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      const double e = std::exp(xv[base + i * stride] - mx);
      out[base + i * stride] = e;
      z += e;
    }
    for (std::size_t i = 0; i < len; ++i) out[base + i * stride] /= z;
  }
  return emit("softmax", x.shape(), std::move(out), {&x},
              [X = x.impl(), nslices, len, stride, step](ImplPtr o) {
                return [X, o, nslices, len, stride, step] {
                  double* gx = X->ensure_grad();
                  const auto& y = o->value;
                  const auto& g = o->grad;
                  for (std::size_t j = 0; j < nslices; ++j) {
                    const std::size_t base = j * step;
                    double dotgy = 0.0;
                    for (std::size_t i = 0; i < len; ++i) dotgy += g[base + i * stride] * y[base + i * stride];
                    for (std::size_t i = 0; i < len; ++i) {
                      const std::size_t idx = base + i * stride;
                      gx[idx] += y[idx] * (g[idx] - dotgy);
                    }
                  }
                };
              });
}

Tensor concat(std::span<const Tensor> parts, int axis) {
  if (parts.empty()) throw ShapeError("concat of nothing");
  if (axis != 0 && axis != 1) throw ShapeError("concat axis must be 0 or 1");
  const std::size_t fixed = axis == 0 ? parts[0].cols() : parts[0].rows();
  std::size_t total = 0;
  for (const Tensor& p : parts) {
    const std::size_t side = axis == 0 ? p.cols() : p.rows();
    if (side != fixed)
      throw ShapeError("concat side extents differ: " + shape_str(parts[0].shape()) + " vs " +
                       shape_str(p.shape()));
    total += axis == 0 ? p.rows() : p.cols();
  }
  const std::size_t rows = axis == 0 ? total : fixed;
  const std::size_t cols = axis == 0 ? fixed : total;
  std::vector<double> out(rows * cols);
  std::vector<ImplPtr> impls;
  impls.reserve(parts.size());
  std::size_t offset = 0;
  for (const Tensor& p : parts) {
    const auto& pv = p.impl()->value;
    const std::size_t pr = p.rows(), pc = p.cols();
    for (std::size_t r = 0; r < pr; ++r)
      for (std::size_t c = 0; c < pc; ++c) {
        const std::size_t dst = axis == 0 ? (offset + r) * cols + c : r * cols + offset + c;
        out[dst] = pv[r * pc + c];
      }
    offset += axis == 0 ? pr : pc;
    impls.push_back(p.impl());
  }
  check_finite("concat", out);
  Tensor result({rows, cols}, std::move(out));
  Tape* tape = active_tape();
  bool needs = false;
  for (const auto& i : impls) needs = needs || i->requires_grad;
  if (tape == nullptr || !needs) return result;
  result.impl()->requires_grad = true;
  result.impl()->is_leaf = false;
  tape->record(result.impl(), [impls, o = std::weak_ptr<TensorImpl>(result.impl()), axis, cols] {
    auto out_impl = o.lock();
    std::size_t off = 0;
    for (const auto& p : impls) {
      const std::size_t pr = rows_of(*p), pc = cols_of(*p);
      if (p->requires_grad) {
        double* gp = p->ensure_grad();
        for (std::size_t r = 0; r < pr; ++r)
          for (std::size_t c = 0; c < pc; ++c) {
            const std::size_t src = axis == 0 ? (off + r) * cols + c : r * cols + off + c;
            gp[r * pc + c] += out_impl->grad[src];
          }
      }
      off += axis == 0 ? pr : pc;
    }
  });
  return result;
}

Tensor concat(const Tensor& a, const Tensor& b, int axis) {
  const Tensor parts[] = {a, b};
  return concat(std::span<const Tensor>(parts), axis);
}

Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t count) {
  if (begin + count > x.rows() || count == 0)
    throw ShapeError("row slice out of range for " + shape_str(x.shape()));
  const std::size_t cols = x.cols();
  const auto& xv = x.impl()->value;
  std::vector<double> out(xv.begin() + static_cast<std::ptrdiff_t>(begin * cols),
                          xv.begin() + static_cast<std::ptrdiff_t>((begin + count) * cols));
  return emit("slice_rows", {count, cols}, std::move(out), {&x}, [X = x.impl(), begin, cols](ImplPtr o) {
    return [X, o, begin, cols] {
      kernels::active().axpy(o->grad.size(), 1.0, o->grad.data(), X->ensure_grad() + begin * cols);
    };
  });
}

Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t count) {
  if (begin + count > x.cols() || count == 0)
    throw ShapeError("column slice out of range for " + shape_str(x.shape()));
  const std::size_t rows = x.rows(), cols = x.cols();
  const auto& xv = x.impl()->value;
  std::vector<double> out(rows * count);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < count; ++c) out[r * count + c] = xv[r * cols + begin + c];
  return emit("slice_cols", {rows, count}, std::move(out), {&x},
              [X = x.impl(), begin, rows, cols, count](ImplPtr o) {
                return [X, o, begin, rows, cols, count] {
                  double* gx = X->ensure_grad();
                  for (std::size_t r = 0; r < rows; ++r)
                    for (std::size_t c = 0; c < count; ++c) gx[r * cols + begin + c] += o->grad[r * count + c];
                };
              });
}

Tensor transpose(const Tensor& x) {
  const std::size_t rows = x.rows(), cols = x.cols();
  const auto& xv = x.impl()->value;
  std::vector<double> out(xv.size());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[c * rows + r] = xv[r * cols + c];
  return emit("transpose", {cols, rows}, std::move(out), {&x}, [X = x.impl(), rows, cols](ImplPtr o) {
    return [X, o, rows, cols] {
      double* gx = X->ensure_grad();
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) gx[r * cols + c] += o->grad[c * rows + r];
    };
  });
}

Tensor reshape(const Tensor& x, Shape shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  if (n != x.size()) throw ShapeError("reshape " + shape_str(x.shape()) + " -> " + shape_str(shape));
  return emit("reshape", std::move(shape), x.impl()->value, {&x}, [X = x.impl()](ImplPtr o) {
    return [X, o] { kernels::active().axpy(o->grad.size(), 1.0, o->grad.data(), X->ensure_grad()); };
  });
}

Tensor sum(const Tensor& x) {
  double s = 0.0;
  for (double v : x.values()) s += v;
  return emit("sum", {1, 1}, {s}, {&x}, [X = x.impl()](ImplPtr o) {
    return [X, o] {
      double* gx = X->ensure_grad();
      for (std::size_t i = 0; i < X->value.size(); ++i) gx[i] += o->grad[0];
    };
  });
}

Tensor mean(const Tensor& x) { return scale(sum(x), 1.0 / static_cast<double>(x.size())); }

Tensor gram(const Tensor& x) {
  const std::size_t r = x.rows(), n = x.cols();
  const auto& xv = x.impl()->value;
  std::vector<double> out(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < r; ++k) s += xv[k * n + i] * xv[k * n + j];
      out[i * n + j] = s;
      out[j * n + i] = s;
    }
  return emit("gram", {n, n}, std::move(out), {&x}, [X = x.impl(), r, n](ImplPtr o) {
    return [X, o, r, n] {
      // d/dX of Xᵀ X contracted with G is X (G + Gᵀ).
      std::vector<double> sym(n * n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) sym[i * n + j] = o->grad[i * n + j] + o->grad[j * n + i];
      kernels::active().gemm_nn(r, n, n, X->value.data(), sym.data(), X->ensure_grad());
    };
  });
}

Tensor pairwise_add(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows())
    throw ShapeError("pairwise_add row extents differ: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  const std::size_t d = a.rows(), s_count = a.cols(), n = b.cols();
  const auto& av = a.impl()->value;
  const auto& bv = b.impl()->value;
  const std::size_t width = s_count * n;
  std::vector<double> out(d * width);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t s = 0; s < s_count; ++s)
      for (std::size_t i = 0; i < n; ++i) out[r * width + s * n + i] = av[r * s_count + s] + bv[r * n + i];
  return emit("pairwise_add", {d, width}, std::move(out), {&a, &b},
              [A = a.impl(), B = b.impl(), d, s_count, n](ImplPtr o) {
                return [A, B, o, d, s_count, n] {
                  const std::size_t width = s_count * n;
                  double* ga = A->requires_grad ? A->ensure_grad() : nullptr;
                  double* gb = B->requires_grad ? B->ensure_grad() : nullptr;
                  for (std::size_t r = 0; r < d; ++r)
                    for (std::size_t s = 0; s < s_count; ++s)
                      for (std::size_t i = 0; i < n; ++i) {
                        const double g = o->grad[r * width + s * n + i];
                        if (ga) ga[r * s_count + s] += g;
                        if (gb) gb[r * n + i] += g;
                      }
                };
              });
}

Tensor embed(const Tensor& table, std::span<const int> tokens) {
  const std::size_t vocab = table.rows(), w = table.cols(), s_count = tokens.size();
  if (s_count == 0) throw ShapeError("embed of an empty token sequence");
  for (int t : tokens)
    if (t < 0 || static_cast<std::size_t>(t) >= vocab)
      throw ShapeError("token index " + std::to_string(t) + " outside vocabulary of " + std::to_string(vocab));
  const auto& tv = table.impl()->value;
  std::vector<double> out(w * s_count);
  for (std::size_t s = 0; s < s_count; ++s)
    for (std::size_t j = 0; j < w; ++j) out[j * s_count + s] = tv[static_cast<std::size_t>(tokens[s]) * w + j];
  std::vector<int> toks(tokens.begin(), tokens.end());
  return emit("embed", {w, s_count}, std::move(out), {&table},
              [T = table.impl(), toks = std::move(toks), w](ImplPtr o) {
                return [T, o, toks, w] {
                  double* gt = T->ensure_grad();
                  const std::size_t s_count = toks.size();
                  for (std::size_t s = 0; s < s_count; ++s)
                    for (std::size_t j = 0; j < w; ++j)
                      gt[static_cast<std::size_t>(toks[s]) * w + j] += o->grad[j * s_count + s];
                };
              });
}

Tensor batchnorm(const Tensor& x, BatchNormState& state, Mode mode, bool update_running) {
  const std::size_t batch = x.rows(), d = x.cols();
  if (state.gamma.size() != d) throw ShapeError("batchnorm feature count mismatch");
  if (mode == Mode::kTrain && batch < 2)
    throw ConfigError("batchnorm in training mode needs a batch of at least 2");
  const auto& xv = x.impl()->value;
  std::vector<double> mu(d, 0.0), inv_std(d, 0.0);
  if (mode == Mode::kTrain) {
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t j = 0; j < d; ++j) mu[j] += xv[b * d + j];
    for (auto& m : mu) m /= static_cast<double>(batch);
    std::vector<double> var(d, 0.0);
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t j = 0; j < d; ++j) {
        const double c = xv[b * d + j] - mu[j];
        var[j] += c * c;
      }
    for (std::size_t j = 0; j < d; ++j) {
      const double biased = var[j] / static_cast<double>(batch);
      inv_std[j] = 1.0 / std::sqrt(biased + state.eps);
      if (update_running) {
        const double unbiased = var[j] / static_cast<double>(batch - 1);
        state.running_mean[j] = (1.0 - state.momentum) * state.running_mean[j] + state.momentum * mu[j];
        state.running_var[j] = (1.0 - state.momentum) * state.running_var[j] + state.momentum * unbiased;
      }
    }
  } else {
    for (std::size_t j = 0; j < d; ++j) {
      mu[j] = state.running_mean[j];
      inv_std[j] = 1.0 / std::sqrt(state.running_var[j] + state.eps);
    }
  }
  std::vector<double> xhat(batch * d), out(batch * d);
  const auto& gv = state.gamma.impl()->value;
  const auto& bv = state.beta.impl()->value;
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t j = 0; j < d; ++j) {
      const double h = (xv[b * d + j] - mu[j]) * inv_std[j];
      xhat[b * d + j] = h;
      out[b * d + j] = gv[j] * h + bv[j];
    }
  const bool train = mode == Mode::kTrain;
  const Tensor& gamma = state.gamma;
  const Tensor& beta = state.beta;
  return emit("batchnorm", {batch, d}, std::move(out), {&x, &gamma, &beta},
              [X = x.impl(), G = gamma.impl(), B = beta.impl(), xhat = std::move(xhat),
               inv_std = std::move(inv_std), batch, d, train](ImplPtr o) {
                return [X, G, B, o, xhat, inv_std, batch, d, train] {
                  const auto& g = o->grad;
                  if (G->requires_grad || B->requires_grad) {
                    double* gg = G->ensure_grad();
                    double* gb = B->ensure_grad();
                    for (std::size_t b = 0; b < batch; ++b)
                      for (std::size_t j = 0; j < d; ++j) {
                        gg[j] += g[b * d + j] * xhat[b * d + j];
                        gb[j] += g[b * d + j];
                      }
                  }
                  if (!X->requires_grad) return;
                  double* gx = X->ensure_grad();
                  const double n = static_cast<double>(batch);
                  for (std::size_t j = 0; j < d; ++j) {
                    const double gamma_j = G->value[j];
                    if (!train) {
                      for (std::size_t b = 0; b < batch; ++b) gx[b * d + j] += g[b * d + j] * gamma_j * inv_std[j];
                      continue;
                    }
                    double sum_g = 0.0, sum_gx = 0.0;
                    for (std::size_t b = 0; b < batch; ++b) {
                      sum_g += g[b * d + j];
                      sum_gx += g[b * d + j] * xhat[b * d + j];
                    }
                    for (std::size_t b = 0; b < batch; ++b) {
                      const double dxhat = g[b * d + j] - sum_g / n - xhat[b * d + j] * sum_gx / n;
                      gx[b * d + j] += gamma_j * inv_std[j] * dxhat;
                    }
                  }
                };
              });
}

Tensor cross_entropy(const Tensor& logits, std::span<const int> labels) {
  const std::size_t classes = logits.rows(), batch = logits.cols();
  if (labels.size() != batch) throw ShapeError("cross_entropy label count differs from batch");
  for (int l : labels)
    if (l < 0 || static_cast<std::size_t>(l) >= classes)
      throw ShapeError("label " + std::to_string(l) + " outside answer space of " + std::to_string(classes));
  const auto& lv = logits.impl()->value;
  std::vector<double> probs(lv.size());
  double total = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    double mx = lv[b];
    for (std::size_t c = 1; c < classes; ++c) mx = std::max(mx, lv[c * batch + b]);
    double z = 0.0;
    for (std::size_t c = 0; c < classes; ++c) z += std::exp(lv[c * batch + b] - mx);
    const double lse = mx + std::log(z);
    for (std::size_t c = 0; c < classes; ++c) probs[c * batch + b] = std::exp(lv[c * batch + b] - lse);
    total += lse - lv[static_cast<std::size_t>(labels[b]) * batch + b];
  }
  std::vector<int> lab(labels.begin(), labels.end());
  return emit("cross_entropy", {1, 1}, {total / static_cast<double>(batch)}, {&logits},
              [L = logits.impl(), probs = std::move(probs), lab = std::move(lab), classes, batch](ImplPtr o) {
                return [L, o, probs, lab, classes, batch] {
                  double* gl = L->ensure_grad();
                  const double s = o->grad[0] / static_cast<double>(batch);
                  for (std::size_t c = 0; c < classes; ++c)
                    for (std::size_t b = 0; b < batch; ++b) {
                      const double target = static_cast<int>(c) == lab[b] ? 1.0 : 0.0;
                      gl[c * batch + b] += s * (probs[c * batch + b] - target);
                    }
                };
              });
}

Tensor binary_cross_entropy(const Tensor& logits, std::span<const int> labels) {
  const std::size_t classes = logits.rows(), batch = logits.cols();
  if (labels.size() != batch) throw ShapeError("binary_cross_entropy label count differs from batch");
  for (int l : labels)
    if (l < 0 || static_cast<std::size_t>(l) >= classes)
      throw ShapeError("label " + std::to_string(l) + " outside answer space of " + std::to_string(classes));
  const auto& lv = logits.impl()->value;
  double total = 0.0;
  for (std::size_t c = 0; c < classes; ++c)
    for (std::size_t b = 0; b < batch; ++b) {
      const double x = lv[c * batch + b];
      const double t = static_cast<int>(c) == labels[b] ? 1.0 : 0.0;
      total += std::max(x, 0.0) - x * t + std::log1p(std::exp(-std::abs(x)));
    }
  const double denom = static_cast<double>(classes * batch);
  std::vector<int> lab(labels.begin(), labels.end());
  return emit("binary_cross_entropy", {1, 1}, {total / denom}, {&logits},
              [L = logits.impl(), lab = std::move(lab), classes, batch, denom](ImplPtr o) {
                return [L, o, lab, classes, batch, denom] {
                  double* gl = L->ensure_grad();
                  for (std::size_t c = 0; c < classes; ++c)
                    for (std::size_t b = 0; b < batch; ++b) {
                      const double x = L->value[c * batch + b];
                      const double p = x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
                      const double t = static_cast<int>(c) == lab[b] ? 1.0 : 0.0;
                      gl[c * batch + b] += o->grad[0] * (p - t) / denom;
                    }
                };
              });
}

}  // namespace lognet
