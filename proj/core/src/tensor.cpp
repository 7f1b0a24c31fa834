#include "dmn/tensor.hpp"

#include <sstream>

namespace dmn::ad {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

void check_shape(const Shape& shape, std::size_t n) {
  for (std::size_t e : shape) {
    if (e == 0) throw ShapeError("zero extent in shape " + shape_str(shape));
  }
  if (shape_numel(shape) != n) {
    throw ShapeError("shape " + shape_str(shape) + " does not hold " +
                     std::to_string(n) + " elements");
  }
}

thread_local GradTape tls_tape;
thread_local bool tls_grad_enabled = true;

}  // namespace

Tensor Tensor::zeros(Shape shape) { return full(std::move(shape), 0.0); }

Tensor Tensor::full(Shape shape, double value) {
  const std::size_t n = shape_numel(shape);
  return from(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::from(Shape shape, std::vector<double> data) {
  check_shape(shape, data.size());
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(double value) { return from({1}, {value}); }

Tensor Tensor::parameter(Shape shape, std::vector<double> data) {
  Tensor t = from(std::move(shape), std::move(data));
  t.node_->requires_grad = true;
  return t;
}

double Tensor::item() const {
  if (numel() != 1) {
    throw ShapeError("item() on tensor of shape " + shape_str(shape()));
  }
  return node_->data[0];
}

void Tensor::zero_grad() { node_->grad.assign(node_->data.size(), 0.0); }

Tensor Tensor::detach() const { return from(node_->shape, node_->data); }

void GradTape::clear() {
  for (auto& n : entries_) {
    n->parents.clear();
    n->backward_fn = nullptr;
  }
  entries_.clear();
}

void GradTape::backward(Tensor& loss) {
  if (loss.numel() != 1) {
    throw ShapeError("backward() needs a scalar loss, got shape " +
                     shape_str(loss.shape()));
  }
  if (entries_.empty()) {
    throw std::logic_error("backward() on an empty tape");
  }
  if (!loss.requires_grad()) {
    throw std::logic_error("backward() on a loss that does not require grad");
  }
  Node* root = loss.node();
  root->ensure_grad();
  root->grad[0] += 1.0;
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    Node& n = **it;
    if (n.grad.empty() || !n.backward_fn) continue;
    n.backward_fn(n);
  }
  clear();
}

GradTape& active_tape() { return tls_tape; }
bool grad_enabled() { return tls_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(tls_grad_enabled) {
  tls_grad_enabled = false;
}
NoGradGuard::~NoGradGuard() { tls_grad_enabled = previous_; }

void backward(Tensor& loss) { tls_tape.backward(loss); }

}  // namespace dmn::ad
