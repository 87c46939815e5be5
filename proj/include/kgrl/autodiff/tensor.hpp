#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kgrl::autodiff {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_string(const Shape& shape);

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

// One vertex of the computation graph. `backward` reads this node's grad and
// accumulates into the grads of `parents`.
template <typename T>
struct Node {
  Shape shape;
  std::vector<T> value;
  std::vector<T> grad;
  bool requires_grad = false;
  bool is_leaf = true;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), T{0});
  }
};

}  // namespace detail

// Handle to a node of a dynamically built reverse-mode graph. Copies share the
// node; use `detach()` to cut a value out of the graph.
template <typename T>
class Tensor {
 public:
  using value_type = T;
  using NodePtr = std::shared_ptr<detail::Node<T>>;

  Tensor() = default;
  explicit Tensor(NodePtr node) : node_(std::move(node)) {}

  static Tensor constant(Shape shape, std::vector<T> values);
  static Tensor parameter(Shape shape, std::vector<T> values);
  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor scalar(T value, bool requires_grad = false);

  bool defined() const { return static_cast<bool>(node_); }
  const Shape& shape() const { return node_->shape; }
  std::size_t size() const { return node_->value.size(); }
  bool requires_grad() const { return node_->requires_grad; }
  bool is_leaf() const { return node_->is_leaf; }

  std::span<const T> values() const { return node_->value; }
  // Only leaves may be mutated in place (optimizer steps, initialization).
  std::span<T> mutable_values();
  // Empty for tensors that do not require gradients.
  std::span<const T> grad() const { return node_->grad; }
  std::span<T> mutable_grad();

  T item() const;
  T operator[](std::size_t i) const { return node_->value[i]; }

  void zero_grad();
  Tensor detach() const;

  const NodePtr& node() const { return node_; }

 private:
  NodePtr node_;
};

// Builds an interior node from `parents`; it requires grad iff any parent does.
template <typename T>
Tensor<T> make_result(Shape shape, std::vector<T> value,
                      std::vector<typename Tensor<T>::NodePtr> parents,
                      std::function<void(detail::Node<T>&)> backward);

// Reverse sweep from a scalar loss. Leaf grads accumulate across calls until
// zeroed; interior grads are recomputed on each call.
template <typename T>
void backward(const Tensor<T>& loss);

}  // namespace kgrl::autodiff
