// Copyright 2026 The sdkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdkd/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "sdkd/errors.hpp"

namespace sdkd {

std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream out;
  out << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ", ";
    out << shape[i];
  }
  out << ')';
  return out.str();
}

namespace detail {

std::uint64_t next_sequence() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}

}  // namespace detail

namespace {

thread_local bool g_grad_enabled = true;

template <typename T>
using NodePtr = std::shared_ptr<detail::Node<T>>;

void check_shape(const Shape& shape) {
  for (auto d : shape) {
    if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + shape_to_string(shape));
  }
}

template <typename T>
void check_finite(const std::vector<T>& values, const char* op, const char* what) {
  for (T v : values) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string("non-finite ") + what + " in primitive '" + op + "'");
    }
  }
}

// Builds the result node. The backward closure is attached only when some
// input tracks gradients and recording is enabled.
template <typename T>
Tensor<T> make_result(const char* op, Shape shape, std::vector<T> data,
                      std::vector<NodePtr<T>> inputs, std::function<void(detail::Node<T>&)> bw) {
  check_finite(data, op, "value");
  auto node = std::make_shared<detail::Node<T>>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  node->op = op;
  node->sequence = detail::next_sequence();
  bool track = false;
  if (g_grad_enabled) {
    for (const auto& in : inputs) track = track || in->requires_grad;
  }
  if (track) {
    node->requires_grad = true;
    node->inputs = std::move(inputs);
    node->backward = std::move(bw);
  }
  return Tensor<T>(std::move(node));
}

// Output-to-input flat index map for broadcasting `in` up to `out`.
std::vector<std::size_t> broadcast_map(const Shape& out, const Shape& in) {
  const std::size_t rank = out.size();
  std::vector<std::size_t> in_stride(rank, 0);
  {
    std::size_t stride = 1;
    for (std::size_t i = 0; i < in.size(); ++i) {
      std::size_t axis_in = in.size() - 1 - i;
      std::size_t axis_out = rank - 1 - i;
      in_stride[axis_out] = in[axis_in] == 1 ? 0 : stride;
      stride *= in[axis_in];
    }
  }
  const std::size_t total = shape_numel(out);
  std::vector<std::size_t> map(total);
  std::vector<std::size_t> idx(rank, 0);
  std::size_t offset = 0;
  for (std::size_t flat = 0; flat < total; ++flat) {
    map[flat] = offset;
    for (std::size_t a = rank; a-- > 0;) {
      ++idx[a];
      offset += in_stride[a];
      if (idx[a] < out[a]) break;
      offset -= in_stride[a] * idx[a];
      idx[a] = 0;
    }
  }
  return map;
}

Shape broadcast_shapes(const Shape& a, const Shape& b, const char* op) {
  const std::size_t rank = std::max(a.size(), b.size());
  Shape out(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    std::size_t da = i < a.size() ? a[a.size() - 1 - i] : 1;
    std::size_t db = i < b.size() ? b[b.size() - 1 - i] : 1;
    if (da != db && da != 1 && db != 1) {
      throw DimensionError(std::string(op) + ": cannot broadcast " + shape_to_string(a) + " with " +
                           shape_to_string(b));
    }
    out[rank - 1 - i] = std::max(da, db);
  }
  return out;
}

enum class Binary { kAdd, kSub, kMul };

template <typename T>
Tensor<T> binary_op(const Tensor<T>& a, const Tensor<T>& b, Binary kind, const char* name) {
  const Shape out = broadcast_shapes(a.shape(), b.shape(), name);
  const std::size_t n = shape_numel(out);
  const bool same = a.shape() == out && b.shape() == out;
  std::vector<std::size_t> map_a, map_b;
  if (!same) {
    map_a = broadcast_map(out, a.shape());
    map_b = broadcast_map(out, b.shape());
  }
  auto ia = [&](std::size_t i) { return same ? i : map_a[i]; };
  auto ib = [&](std::size_t i) { return same ? i : map_b[i]; };
  const auto& av = a.node()->data;
  const auto& bv = b.node()->data;
  std::vector<T> data(n);
  for (std::size_t i = 0; i < n; ++i) {
    T x = av[ia(i)], y = bv[ib(i)];
    data[i] = kind == Binary::kAdd ? x + y : kind == Binary::kSub ? x - y : x * y;
  }
  auto na = a.node(), nb = b.node();
  return make_result<T>(
      name, out, std::move(data), {na, nb},
      [na, nb, kind, same, map_a = std::move(map_a), map_b = std::move(map_b)](detail::Node<T>& self) {
        const std::size_t count = self.data.size();
        auto ia = [&](std::size_t i) { return same ? i : map_a[i]; };
        auto ib = [&](std::size_t i) { return same ? i : map_b[i]; };
        if (na->requires_grad) {
          na->ensure_grad();
          for (std::size_t i = 0; i < count; ++i) {
            T g = self.grad[i];
            na->grad[ia(i)] += kind == Binary::kMul ? g * nb->data[ib(i)] : g;
          }
        }
        if (nb->requires_grad) {
          nb->ensure_grad();
          for (std::size_t i = 0; i < count; ++i) {
            T g = self.grad[i];
            nb->grad[ib(i)] += kind == Binary::kAdd   ? g
                               : kind == Binary::kSub ? -g
                                                      : g * na->data[ia(i)];
          }
        }
      });
}

// Batch offsets (in matrices) for broadcast batched matmul.
struct BatchPlan {
  Shape batch;
  std::vector<std::size_t> a_index, b_index;
};

BatchPlan plan_batches(const Shape& a, const Shape& b) {
  Shape ab(a.begin(), a.end() - 2), bb(b.begin(), b.end() - 2);
  BatchPlan plan;
  plan.batch = broadcast_shapes(ab, bb, "matmul");
  if (plan.batch.empty()) {
    plan.a_index = {0};
    plan.b_index = {0};
    return plan;
  }
  plan.a_index = ab.empty() ? std::vector<std::size_t>(shape_numel(plan.batch), 0)
                            : broadcast_map(plan.batch, ab);
  plan.b_index = bb.empty() ? std::vector<std::size_t>(shape_numel(plan.batch), 0)
                            : broadcast_map(plan.batch, bb);
  return plan;
}

// c[n, m] += a[n, k] * b[k, m]
template <typename T>
void gemm_nn(const T* a, const T* b, T* c, std::size_t n, std::size_t k, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    T* crow = c + i * m;
    const T* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = arow[p];
      const T* brow = b + p * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
}

// c[n, k] += g[n, m] * b[k, m]^T
template <typename T>
void gemm_nt(const T* g, const T* b, T* c, std::size_t n, std::size_t m, std::size_t k) {
  for (std::size_t i = 0; i < n; ++i) {
    const T* grow = g + i * m;
    T* crow = c + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const T* brow = b + p * m;
      T acc = 0;
      for (std::size_t j = 0; j < m; ++j) acc += grow[j] * brow[j];
      crow[p] += acc;
    }
  }
}

// c[k, m] += a[n, k]^T * g[n, m]
template <typename T>
void gemm_tn(const T* a, const T* g, T* c, std::size_t n, std::size_t k, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    const T* arow = a + i * k;
    const T* grow = g + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = arow[p];
      T* crow = c + p * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += av * grow[j];
    }
  }
}

std::size_t normalize_axis(std::size_t axis, std::size_t rank, const char* op) {
  if (axis >= rank) {
    throw DimensionError(std::string(op) + ": axis " + std::to_string(axis) + " out of range for rank " +
                         std::to_string(rank));
  }
  return axis;
}

}  // namespace

bool grad_mode_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values, bool requires_grad) {
  check_shape(shape);
  if (shape_numel(shape) != values.size()) {
    throw DimensionError("shape " + shape_to_string(shape) + " does not match " +
                         std::to_string(values.size()) + " values");
  }
  node_ = std::make_shared<detail::Node<T>>();
  node_->shape = std::move(shape);
  node_->data = std::move(values);
  node_->requires_grad = requires_grad;
  node_->sequence = detail::next_sequence();
}

template <typename T>
Tensor<T> Tensor<T>::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), T(0), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::full(Shape shape, T value, bool requires_grad) {
  check_shape(shape);
  std::vector<T> values(shape_numel(shape), value);
  return Tensor(std::move(shape), std::move(values), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::scalar(T value, bool requires_grad) {
  return Tensor(Shape{1}, std::vector<T>{value}, requires_grad);
}

template <typename T>
T Tensor<T>::item() const {
  if (numel() != 1) throw ContractError("item() on tensor of shape " + shape_to_string(shape()));
  return node_->data[0];
}

template <typename T>
Tensor<T> Tensor<T>::detach() const {
  return Tensor(node_->shape, node_->data, false);
}

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.rank() < 2 || b.rank() < 2 || a.shape()[a.rank() - 1] != b.shape()[b.rank() - 2]) {
    throw DimensionError("matmul: incompatible shapes " + shape_to_string(a.shape()) + " and " +
                         shape_to_string(b.shape()));
  }
  const std::size_t n = a.shape()[a.rank() - 2];
  const std::size_t k = a.shape()[a.rank() - 1];
  const std::size_t m = b.shape()[b.rank() - 1];
  BatchPlan plan = plan_batches(a.shape(), b.shape());
  Shape out = plan.batch;
  out.push_back(n);
  out.push_back(m);
  const std::size_t batches = plan.a_index.size();
  std::vector<T> data(batches * n * m, T(0));
  const auto& av = a.node()->data;
  const auto& bv = b.node()->data;
  for (std::size_t t = 0; t < batches; ++t) {
    gemm_nn(av.data() + plan.a_index[t] * n * k, bv.data() + plan.b_index[t] * k * m,
            data.data() + t * n * m, n, k, m);
  }
  auto na = a.node(), nb = b.node();
  return make_result<T>("matmul", out, std::move(data), {na, nb},
                        [na, nb, n, k, m, plan = std::move(plan)](detail::Node<T>& self) {
                          const std::size_t batches = plan.a_index.size();
                          if (na->requires_grad) {
                            na->ensure_grad();
                            for (std::size_t t = 0; t < batches; ++t)
                              gemm_nt(self.grad.data() + t * n * m, nb->data.data() + plan.b_index[t] * k * m,
                                      na->grad.data() + plan.a_index[t] * n * k, n, m, k);
                          }
                          if (nb->requires_grad) {
                            nb->ensure_grad();
                            for (std::size_t t = 0; t < batches; ++t)
                              gemm_tn(na->data.data() + plan.a_index[t] * n * k, self.grad.data() + t * n * m,
                                      nb->grad.data() + plan.b_index[t] * k * m, n, k, m);
                          }
                        });
}

template <typename T>
Tensor<T> transpose(const Tensor<T>& x) {
  if (x.rank() < 2) throw DimensionError("transpose: rank < 2 for " + shape_to_string(x.shape()));
  const std::size_t r = x.rank();
  const std::size_t rows = x.shape()[r - 2], cols = x.shape()[r - 1];
  const std::size_t mats = x.numel() / (rows * cols);
  Shape out = x.shape();
  std::swap(out[r - 2], out[r - 1]);
  const auto& xv = x.node()->data;
  std::vector<T> data(xv.size());
  for (std::size_t t = 0; t < mats; ++t)
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) data[t * rows * cols + j * rows + i] = xv[t * rows * cols + i * cols + j];
  auto nx = x.node();
  return make_result<T>("transpose", out, std::move(data), {nx}, [nx, rows, cols, mats](detail::Node<T>& self) {
    nx->ensure_grad();
    for (std::size_t t = 0; t < mats; ++t)
      for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
          nx->grad[t * rows * cols + i * cols + j] += self.grad[t * rows * cols + j * rows + i];
  });
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  return binary_op(a, b, Binary::kAdd, "add");
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  return binary_op(a, b, Binary::kSub, "sub");
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  return binary_op(a, b, Binary::kMul, "mul");
}

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T factor) {
  std::vector<T> data(x.values().begin(), x.values().end());
  for (auto& v : data) v *= factor;
  auto nx = x.node();
  return make_result<T>("scale", x.shape(), std::move(data), {nx}, [nx, factor](detail::Node<T>& self) {
    nx->ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) nx->grad[i] += factor * self.grad[i];
  });
}

template <typename T>
Tensor<T> affine(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias) {
  if (weight.rank() != 2 || bias.rank() != 1 || x.shape().back() != weight.dim(0) ||
      bias.dim(0) != weight.dim(1)) {
    throw DimensionError("affine: incompatible shapes x" + shape_to_string(x.shape()) + " W" +
                         shape_to_string(weight.shape()) + " b" + shape_to_string(bias.shape()));
  }
  const std::size_t in = weight.dim(0), out_dim = weight.dim(1);
  const std::size_t rows = x.numel() / in;
  Shape out = x.shape();
  out.back() = out_dim;
  std::vector<T> data(rows * out_dim);
  const auto& bv = bias.node()->data;
  for (std::size_t r = 0; r < rows; ++r) std::copy(bv.begin(), bv.end(), data.begin() + r * out_dim);
  gemm_nn(x.node()->data.data(), weight.node()->data.data(), data.data(), rows, in, out_dim);
  auto nx = x.node(), nw = weight.node(), nb = bias.node();
  return make_result<T>("affine", out, std::move(data), {nx, nw, nb},
                        [nx, nw, nb, rows, in, out_dim](detail::Node<T>& self) {
                          if (nx->requires_grad) {
                            nx->ensure_grad();
                            gemm_nt(self.grad.data(), nw->data.data(), nx->grad.data(), rows, out_dim, in);
                          }
                          if (nw->requires_grad) {
                            nw->ensure_grad();
                            gemm_tn(nx->data.data(), self.grad.data(), nw->grad.data(), rows, in, out_dim);
                          }
                          if (nb->requires_grad) {
                            nb->ensure_grad();
                            for (std::size_t r = 0; r < rows; ++r)
                              for (std::size_t j = 0; j < out_dim; ++j) nb->grad[j] += self.grad[r * out_dim + j];
                          }
                        });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  std::vector<T> data(x.values().begin(), x.values().end());
  for (auto& v : data) v = v > T(0) ? v : T(0);
  auto nx = x.node();
  return make_result<T>("relu", x.shape(), std::move(data), {nx}, [nx](detail::Node<T>& self) {
    nx->ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      if (nx->data[i] > T(0)) nx->grad[i] += self.grad[i];
  });
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& x, std::size_t axis) {
  normalize_axis(axis, x.rank(), "softmax");
  const std::size_t len = x.shape()[axis];
  std::size_t inner = 1;
  for (std::size_t a = axis + 1; a < x.rank(); ++a) inner *= x.shape()[a];
  const std::size_t outer = x.numel() / (len * inner);
  const auto& xv = x.node()->data;
  std::vector<T> data(xv.size());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * len * inner + in;
      T mx = xv[base];
      for (std::size_t j = 1; j < len; ++j) mx = std::max(mx, xv[base + j * inner]);
      T total = 0;
      for (std::size_t j = 0; j < len; ++j) {
        T e = std::exp(xv[base + j * inner] - mx);
        data[base + j * inner] = e;
        total += e;
      }
      for (std::size_t j = 0; j < len; ++j) data[base + j * inner] /= total;
    }
  }
  auto nx = x.node();
  return make_result<T>("softmax", x.shape(), std::move(data), {nx},
                        [nx, len, inner, outer](detail::Node<T>& self) {
                          nx->ensure_grad();
                          for (std::size_t o = 0; o < outer; ++o) {
                            for (std::size_t in = 0; in < inner; ++in) {
                              const std::size_t base = o * len * inner + in;
                              T dot = 0;
                              for (std::size_t j = 0; j < len; ++j)
                                dot += self.grad[base + j * inner] * self.data[base + j * inner];
                              for (std::size_t j = 0; j < len; ++j) {
                                const std::size_t i = base + j * inner;
                                nx->grad[i] += self.data[i] * (self.grad[i] - dot);
                              }
                            }
                          }
                        });
}

template <typename T>
Tensor<T> log(const Tensor<T>& x, T floor) {
  std::vector<T> data(x.numel());
  const auto& xv = x.node()->data;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (floor <= T(0) && xv[i] <= T(0)) {
      throw NumericError("log: non-positive input " + std::to_string(static_cast<double>(xv[i])));
    }
    data[i] = std::log(std::max(xv[i], floor));
  }
  auto nx = x.node();
  return make_result<T>("log", x.shape(), std::move(data), {nx}, [nx, floor](detail::Node<T>& self) {
    nx->ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      if (nx->data[i] > floor) nx->grad[i] += self.grad[i] / nx->data[i];
  });
}

template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gain, const Tensor<T>& bias, T epsilon) {
  const std::size_t d = x.shape().back();
  if (gain.numel() != d || bias.numel() != d) {
    throw DimensionError("layer_norm: gain/bias " + shape_to_string(gain.shape()) + "/" +
                         shape_to_string(bias.shape()) + " do not match last dim of " +
                         shape_to_string(x.shape()));
  }
  const std::size_t rows = x.numel() / d;
  const auto& xv = x.node()->data;
  const auto& gv = gain.node()->data;
  const auto& bv = bias.node()->data;
  std::vector<T> data(xv.size());
  std::vector<T> normalized(xv.size());
  std::vector<T> inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const T* row = xv.data() + r * d;
    T mean = 0;
    for (std::size_t j = 0; j < d; ++j) mean += row[j];
    mean /= T(d);
    T var = 0;
    for (std::size_t j = 0; j < d; ++j) var += (row[j] - mean) * (row[j] - mean);
    var /= T(d);
    const T is = T(1) / std::sqrt(var + epsilon);
    inv_std[r] = is;
    for (std::size_t j = 0; j < d; ++j) {
      const T nh = (row[j] - mean) * is;
      normalized[r * d + j] = nh;
      data[r * d + j] = nh * gv[j] + bv[j];
    }
  }
  auto nx = x.node(), ng = gain.node(), nb = bias.node();
  return make_result<T>(
      "layer_norm", x.shape(), std::move(data), {nx, ng, nb},
      [nx, ng, nb, d, rows, normalized = std::move(normalized), inv_std = std::move(inv_std)](detail::Node<T>& self) {
        if (ng->requires_grad) ng->ensure_grad();
        if (nb->requires_grad) nb->ensure_grad();
        if (nx->requires_grad) nx->ensure_grad();
        std::vector<T> gn(d);
        for (std::size_t r = 0; r < rows; ++r) {
          const T* g = self.grad.data() + r * d;
          const T* nh = normalized.data() + r * d;
          for (std::size_t j = 0; j < d; ++j) {
            if (ng->requires_grad) ng->grad[j] += g[j] * nh[j];
            if (nb->requires_grad) nb->grad[j] += g[j];
            gn[j] = g[j] * ng->data[j];
          }
          if (!nx->requires_grad) continue;
          T mean_gn = 0, mean_gn_nh = 0;
          for (std::size_t j = 0; j < d; ++j) {
            mean_gn += gn[j];
            mean_gn_nh += gn[j] * nh[j];
          }
          mean_gn /= T(d);
          mean_gn_nh /= T(d);
          for (std::size_t j = 0; j < d; ++j)
            nx->grad[r * d + j] += inv_std[r] * (gn[j] - mean_gn - nh[j] * mean_gn_nh);
        }
      });
}

template <typename T>
Tensor<T> embedding(const Tensor<T>& table, std::span<const int> ids, const Shape& ids_shape) {
  if (table.rank() != 2) throw DimensionError("embedding: table must be 2-D, got " + shape_to_string(table.shape()));
  if (shape_numel(ids_shape) != ids.size()) {
    throw DimensionError("embedding: ids shape " + shape_to_string(ids_shape) + " does not match " +
                         std::to_string(ids.size()) + " ids");
  }
  const std::size_t vocab = table.dim(0), d = table.dim(1);
  const auto& tv = table.node()->data;
  std::vector<int> rows(ids.begin(), ids.end());
  std::vector<T> data(ids.size() * d);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || static_cast<std::size_t>(rows[i]) >= vocab) {
      throw VocabularyError("token id " + std::to_string(rows[i]) + " outside vocabulary of size " +
                            std::to_string(vocab));
    }
    std::copy_n(tv.begin() + static_cast<std::size_t>(rows[i]) * d, d, data.begin() + i * d);
  }
  Shape out = ids_shape;
  out.push_back(d);
  auto nt = table.node();
  return make_result<T>("embedding", out, std::move(data), {nt}, [nt, d, rows = std::move(rows)](detail::Node<T>& self) {
    nt->ensure_grad();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      T* dst = nt->grad.data() + static_cast<std::size_t>(rows[i]) * d;
      const T* src = self.grad.data() + i * d;
      for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
    }
  });
}

template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& parts, std::size_t axis) {
  if (parts.empty()) throw DimensionError("concat: no inputs");
  const Shape& first = parts.front().shape();
  normalize_axis(axis, first.size(), "concat");
  std::vector<std::size_t> widths;
  std::size_t total_axis = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    bool ok = s.size() == first.size();
    for (std::size_t a = 0; ok && a < s.size(); ++a) ok = a == axis || s[a] == first[a];
    if (!ok) {
      throw DimensionError("concat: shape " + shape_to_string(s) + " incompatible with " + shape_to_string(first) +
                           " along axis " + std::to_string(axis));
    }
    widths.push_back(s[axis]);
    total_axis += s[axis];
  }
  std::size_t inner = 1;
  for (std::size_t a = axis + 1; a < first.size(); ++a) inner *= first[a];
  const std::size_t outer = shape_numel(first) / (first[axis] * inner);
  Shape out = first;
  out[axis] = total_axis;
  std::vector<T> data(shape_numel(out));
  std::size_t offset = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const auto& src = parts[p].node()->data;
    const std::size_t chunk = widths[p] * inner;
    for (std::size_t o = 0; o < outer; ++o)
      std::copy_n(src.begin() + o * chunk, chunk, data.begin() + o * total_axis * inner + offset);
    offset += chunk;
  }
  std::vector<NodePtr<T>> nodes;
  for (const auto& p : parts) nodes.push_back(p.node());
  auto captured = nodes;
  return make_result<T>("concat", out, std::move(data), std::move(nodes),
                        [captured, widths, inner, outer, total_axis](detail::Node<T>& self) {
                          std::size_t offset = 0;
                          for (std::size_t p = 0; p < captured.size(); ++p) {
                            const std::size_t chunk = widths[p] * inner;
                            if (captured[p]->requires_grad) {
                              captured[p]->ensure_grad();
                              for (std::size_t o = 0; o < outer; ++o)
                                for (std::size_t i = 0; i < chunk; ++i)
                                  captured[p]->grad[o * chunk + i] += self.grad[o * total_axis * inner + offset + i];
                            }
                            offset += chunk;
                          }
                        });
}

template <typename T>
Tensor<T> slice(const Tensor<T>& x, std::size_t axis, std::size_t start, std::size_t length) {
  normalize_axis(axis, x.rank(), "slice");
  if (length == 0 || start + length > x.shape()[axis]) {
    throw DimensionError("slice: range [" + std::to_string(start) + ", " + std::to_string(start + length) +
                         ") out of bounds for axis " + std::to_string(axis) + " of " + shape_to_string(x.shape()));
  }
  const std::size_t len = x.shape()[axis];
  std::size_t inner = 1;
  for (std::size_t a = axis + 1; a < x.rank(); ++a) inner *= x.shape()[a];
  const std::size_t outer = x.numel() / (len * inner);
  Shape out = x.shape();
  out[axis] = length;
  std::vector<T> data(outer * length * inner);
  const auto& xv = x.node()->data;
  for (std::size_t o = 0; o < outer; ++o)
    std::copy_n(xv.begin() + (o * len + start) * inner, length * inner, data.begin() + o * length * inner);
  auto nx = x.node();
  return make_result<T>("slice", out, std::move(data), {nx},
                        [nx, len, start, length, inner, outer](detail::Node<T>& self) {
                          nx->ensure_grad();
                          for (std::size_t o = 0; o < outer; ++o)
                            for (std::size_t i = 0; i < length * inner; ++i)
                              nx->grad[(o * len + start) * inner + i] += self.grad[o * length * inner + i];
                        });
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw DimensionError("reshape: " + shape_to_string(x.shape()) + " to " + shape_to_string(shape));
  }
  std::vector<T> data(x.values().begin(), x.values().end());
  auto nx = x.node();
  return make_result<T>("reshape", std::move(shape), std::move(data), {nx}, [nx](detail::Node<T>& self) {
    nx->ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) nx->grad[i] += self.grad[i];
  });
}

template <typename T>
Tensor<T> mean_square(const Tensor<T>& x) {
  const std::size_t d = x.shape().back();
  const std::size_t rows = x.numel() / d;
  Shape out(x.shape().begin(), x.shape().end() - 1);
  if (out.empty()) out = {1};
  const auto& xv = x.node()->data;
  std::vector<T> data(rows, T(0));
  for (std::size_t r = 0; r < rows; ++r) {
    T acc = 0;
    for (std::size_t j = 0; j < d; ++j) acc += xv[r * d + j] * xv[r * d + j];
    data[r] = acc / T(d);
  }
  auto nx = x.node();
  return make_result<T>("mean_square", out, std::move(data), {nx}, [nx, d, rows](detail::Node<T>& self) {
    nx->ensure_grad();
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t j = 0; j < d; ++j)
        nx->grad[r * d + j] += self.grad[r] * T(2) * nx->data[r * d + j] / T(d);
  });
}

template <typename T>
Tensor<T> pick(const Tensor<T>& x, std::span<const int> ids) {
  const std::size_t width = x.shape().back();
  const std::size_t rows = x.numel() / width;
  if (ids.size() != rows) {
    throw DimensionError("pick: " + std::to_string(ids.size()) + " indices for " + std::to_string(rows) +
                         " rows of " + shape_to_string(x.shape()));
  }
  std::vector<int> index(ids.begin(), ids.end());
  std::vector<T> data(rows);
  const auto& xv = x.node()->data;
  for (std::size_t r = 0; r < rows; ++r) {
    if (index[r] < 0 || static_cast<std::size_t>(index[r]) >= width) {
      throw DimensionError("pick: index " + std::to_string(index[r]) + " out of range " + std::to_string(width));
    }
    data[r] = xv[r * width + static_cast<std::size_t>(index[r])];
  }
  Shape out(x.shape().begin(), x.shape().end() - 1);
  if (out.empty()) out = {1};
  auto nx = x.node();
  return make_result<T>("pick", out, std::move(data), {nx}, [nx, width, index = std::move(index)](detail::Node<T>& self) {
    nx->ensure_grad();
    for (std::size_t r = 0; r < index.size(); ++r)
      nx->grad[r * width + static_cast<std::size_t>(index[r])] += self.grad[r];
  });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
  T acc = 0;
  for (T v : x.values()) acc += v;
  auto nx = x.node();
  return make_result<T>("sum", Shape{1}, std::vector<T>{acc}, {nx}, [nx](detail::Node<T>& self) {
    nx->ensure_grad();
    for (auto& g : nx->grad) g += self.grad[0];
  });
}

template <typename T>
Tensor<T> dropout(const Tensor<T>& x, T rate, std::mt19937_64& rng) {
  if (rate <= T(0)) return x;
  if (rate >= T(1)) throw ContractError("dropout rate must be < 1");
  std::bernoulli_distribution keep(1.0 - static_cast<double>(rate));
  const T factor = T(1) / (T(1) - rate);
  std::vector<T> mask(x.numel());
  std::vector<T> data(x.numel());
  const auto& xv = x.node()->data;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    mask[i] = keep(rng) ? factor : T(0);
    data[i] = xv[i] * mask[i];
  }
  auto nx = x.node();
  return make_result<T>("dropout", x.shape(), std::move(data), {nx}, [nx, mask = std::move(mask)](detail::Node<T>& self) {
    nx->ensure_grad();
    for (std::size_t i = 0; i < mask.size(); ++i) nx->grad[i] += self.grad[i] * mask[i];
  });
}

template <typename T>
void backward(const Tensor<T>& loss) {
  if (!loss.defined() || loss.numel() != 1) {
    throw ContractError("backward: loss must be a scalar, got shape " +
                        (loss.defined() ? shape_to_string(loss.shape()) : std::string("<undefined>")));
  }
  auto root = loss.node();
  if (!root->requires_grad) return;
  std::vector<detail::Node<T>*> order;
  std::unordered_set<detail::Node<T>*> seen;
  std::vector<detail::Node<T>*> stack{root.get()};
  seen.insert(root.get());
  while (!stack.empty()) {
    auto* node = stack.back();
    stack.pop_back();
    order.push_back(node);
    for (const auto& in : node->inputs) {
      if (in->requires_grad && seen.insert(in.get()).second) stack.push_back(in.get());
    }
  }
  std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->sequence > b->sequence; });
  root->ensure_grad();
  root->grad[0] += T(1);
  for (auto* node : order) {
    if (!node->backward || node->grad.empty()) continue;
    node->backward(*node);
    for (const auto& in : node->inputs) {
      if (in->requires_grad) check_finite(in->grad, node->op, "gradient");
    }
  }
}

#define SDKD_INSTANTIATE(T)                                                                   \
  template class Tensor<T>;                                                                   \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                              \
  template Tensor<T> transpose(const Tensor<T>&);                                             \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                 \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                                 \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                                 \
  template Tensor<T> scale(const Tensor<T>&, T);                                              \
  template Tensor<T> affine(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);            \
  template Tensor<T> relu(const Tensor<T>&);                                                  \
  template Tensor<T> softmax(const Tensor<T>&, std::size_t);                                  \
  template Tensor<T> log(const Tensor<T>&, T);                                                \
  template Tensor<T> layer_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T);     \
  template Tensor<T> embedding(const Tensor<T>&, std::span<const int>, const Shape&);         \
  template Tensor<T> concat(const std::vector<Tensor<T>>&, std::size_t);                      \
  template Tensor<T> slice(const Tensor<T>&, std::size_t, std::size_t, std::size_t);          \
  template Tensor<T> reshape(const Tensor<T>&, Shape);                                        \
  template Tensor<T> mean_square(const Tensor<T>&);                                           \
  template Tensor<T> pick(const Tensor<T>&, std::span<const int>);                            \
  template Tensor<T> sum(const Tensor<T>&);                                                   \
  template Tensor<T> dropout(const Tensor<T>&, T, std::mt19937_64&);                          \
  template void backward(const Tensor<T>&);

SDKD_INSTANTIATE(float)
SDKD_INSTANTIATE(double)

#undef SDKD_INSTANTIATE

}  // namespace sdkd
