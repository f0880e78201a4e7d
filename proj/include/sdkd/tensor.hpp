// Copyright 2026 The sdkd Authors
// SPDX-License-Identifier: Apache-2.0
//
// Dense row-major tensors with tape-free reverse-mode differentiation.
//
// Every primitive records its inputs and a backward closure on the result
// node. backward() collects the nodes reachable from the loss and replays
// their closures in reverse creation order, which is a valid reverse
// topological order because a node is always created after its inputs.
//
// Two scalar types are instantiated: float for training and double for
// gradient verification.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace sdkd {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

namespace detail {

template <typename T>
struct Node {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;  // empty until the first gradient arrives
  bool requires_grad = false;
  std::uint64_t sequence = 0;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads this node's grad and accumulates into inputs[i]->grad.
  std::function<void(Node&)> backward;

  void ensure_grad() {
    if (grad.empty()) grad.assign(data.size(), T(0));
  }
};

std::uint64_t next_sequence();

}  // namespace detail

template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  Tensor(Shape shape, std::vector<T> values, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, T value, bool requires_grad = false);
  static Tensor scalar(T value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t dim(std::size_t axis) const { return node_->shape.at(axis); }
  std::size_t numel() const { return node_->data.size(); }

  std::span<const T> values() const { return node_->data; }
  // Direct write access; only meaningful for leaves (parameters, inputs).
  std::span<T> mutable_values() { return node_->data; }
  T item() const;
  T at(std::size_t flat_index) const { return node_->data.at(flat_index); }

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool flag) { node_->requires_grad = flag; }
  bool has_grad() const { return !node_->grad.empty(); }
  std::span<const T> grad() const { return node_->grad; }
  std::span<T> mutable_grad() {
    node_->ensure_grad();
    return node_->grad;
  }
  void zero_grad() { node_->grad.clear(); }

  const char* op_name() const { return node_->op; }

  // New leaf holding a copy of the values; no history, no grad.
  Tensor detach() const;

  // Identity of the underlying storage.
  bool same_storage(const Tensor& other) const { return node_ == other.node_; }

  explicit Tensor(std::shared_ptr<detail::Node<T>> node) : node_(std::move(node)) {}
  const std::shared_ptr<detail::Node<T>>& node() const { return node_; }

 private:
  std::shared_ptr<detail::Node<T>> node_;
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

// Disables graph recording on this thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_mode_enabled();

// ---- primitives -----------------------------------------------------------

// (..., n, k) x (..., k, m) -> (..., n, m); batch dimensions broadcast.
template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);

// Swaps the last two axes.
template <typename T>
Tensor<T> transpose(const Tensor<T>& x);

// Elementwise with numpy-style broadcasting.
template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T factor);

// x (..., in) . weight (in, out) + bias (out).
template <typename T>
Tensor<T> affine(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias);

template <typename T>
Tensor<T> relu(const Tensor<T>& x);

// Max-subtracted softmax along `axis`.
template <typename T>
Tensor<T> softmax(const Tensor<T>& x, std::size_t axis);

// log(max(x, floor)); entries at or below the floor get zero gradient.
template <typename T>
Tensor<T> log(const Tensor<T>& x, T floor = T(0));

// Normalizes the last axis then applies gain/bias.
template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gain, const Tensor<T>& bias,
                     T epsilon);

// Rows of `table` (vocab, d) gathered by id; result shape is ids_shape + {d}.
template <typename T>
Tensor<T> embedding(const Tensor<T>& table, std::span<const int> ids, const Shape& ids_shape);

template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& parts, std::size_t axis);

template <typename T>
Tensor<T> slice(const Tensor<T>& x, std::size_t axis, std::size_t start, std::size_t length);

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape);

// Mean of squares over the last axis; drops that axis ({1} for vectors).
template <typename T>
Tensor<T> mean_square(const Tensor<T>& x);

// x[..., ids[r]] for every row r of the last axis.
template <typename T>
Tensor<T> pick(const Tensor<T>& x, std::span<const int> ids);

// Sum of all entries, shape {1}.
template <typename T>
Tensor<T> sum(const Tensor<T>& x);

// Inverted dropout; identity when rate == 0.
template <typename T>
Tensor<T> dropout(const Tensor<T>& x, T rate, std::mt19937_64& rng);

// ---- differentiation ------------------------------------------------------

// Populates grad on every requires_grad tensor reachable from `loss`.
// Gradients accumulate across calls; zero them between steps.
template <typename T>
void backward(const Tensor<T>& loss);

// Copy between precisions (new leaf).
template <typename To, typename From>
Tensor<To> cast(const Tensor<From>& x) {
  std::vector<To> values(x.values().begin(), x.values().end());
  return Tensor<To>(x.shape(), std::move(values), x.requires_grad());
}

}  // namespace sdkd
