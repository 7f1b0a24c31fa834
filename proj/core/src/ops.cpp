#include "dmn/ops.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>

namespace dmn::ad {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

using BackwardFn = std::function<void(Node&)>;

Tensor make_result(Shape shape, std::vector<double> data,
                   std::initializer_list<const Tensor*> operands,
                   BackwardFn fn) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  if (grad_enabled()) {
    bool any = false;
    for (const Tensor* t : operands) any = any || t->requires_grad();
    if (any) {
      node->requires_grad = true;
      for (const Tensor* t : operands) node->parents.push_back(t->node_ptr());
      node->backward_fn = std::move(fn);
      active_tape().record(node);
    }
  }
  return Tensor(std::move(node));
}

Tensor make_result_n(Shape shape, std::vector<double> data,
                     const std::vector<Tensor>& operands, BackwardFn fn) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  if (grad_enabled()) {
    bool any = std::any_of(operands.begin(), operands.end(),
                           [](const Tensor& t) { return t.requires_grad(); });
    if (any) {
      node->requires_grad = true;
      for (const Tensor& t : operands) node->parents.push_back(t.node_ptr());
      node->backward_fn = std::move(fn);
      active_tape().record(node);
    }
  }
  return Tensor(std::move(node));
}

// Gradient sink for parent i, or nullptr when it does not need one.
double* grad_sink(Node& self, std::size_t i) {
  Node& p = *self.parents[i];
  if (!p.requires_grad) return nullptr;
  p.ensure_grad();
  return p.grad.data();
}

Shape strip_leading_ones(const Shape& s) {
  std::size_t k = 0;
  while (k + 1 < s.size() && s[k] == 1) ++k;
  return Shape(s.begin() + static_cast<std::ptrdiff_t>(k), s.end());
}

bool is_suffix(const Shape& small, const Shape& big) {
  if (small.size() > big.size()) return false;
  return std::equal(small.rbegin(), small.rend(), big.rbegin());
}

struct Broadcast {
  Shape out_shape;
  std::size_t n = 0;
  std::size_t na = 0;
  std::size_t nb = 0;
};

Broadcast broadcast_shapes(const char* op, const Tensor& a, const Tensor& b) {
  Broadcast bc;
  bc.na = a.numel();
  bc.nb = b.numel();
  if (a.shape() == b.shape()) {
    bc.out_shape = a.shape();
  } else if (bc.nb == 1 || is_suffix(strip_leading_ones(b.shape()), a.shape())) {
    bc.out_shape = a.shape();
  } else if (bc.na == 1 || is_suffix(strip_leading_ones(a.shape()), b.shape())) {
    bc.out_shape = b.shape();
  } else {
    throw ShapeError(std::string(op) + ": shapes " + shape_str(a.shape()) +
                     " and " + shape_str(b.shape()) + " do not conform");
  }
  bc.n = shape_numel(bc.out_shape);
  return bc;
}

// Elementwise binary with broadcasting. df returns (d/da, d/db) at (x, y).
template <typename F, typename DF>
Tensor binary(const char* name, const Tensor& a, const Tensor& b, F f, DF df) {
  Broadcast bc = broadcast_shapes(name, a, b);
  std::vector<double> out(bc.n);
  const auto ad = a.data();
  const auto bd = b.data();
  for (std::size_t i = 0; i < bc.n; ++i) {
    out[i] = f(ad[i % bc.na], bd[i % bc.nb]);
  }
  return make_result(bc.out_shape, std::move(out), {&a, &b},
                     [bc, df](Node& self) {
                       const auto& x = self.parents[0]->data;
                       const auto& y = self.parents[1]->data;
                       double* ga = grad_sink(self, 0);
                       double* gb = grad_sink(self, 1);
                       for (std::size_t i = 0; i < bc.n; ++i) {
                         const double g = self.grad[i];
                         const auto [da, db] = df(x[i % bc.na], y[i % bc.nb]);
                         if (ga) ga[i % bc.na] += g * da;
                         if (gb) gb[i % bc.nb] += g * db;
                       }
                     });
}

// Elementwise unary. df receives (input, output).
template <typename F, typename DF>
Tensor unary(const Tensor& a, F f, DF df) {
  const auto ad = a.data();
  std::vector<double> out(ad.size());
  for (std::size_t i = 0; i < ad.size(); ++i) out[i] = f(ad[i]);
  return make_result(a.shape(), std::move(out), {&a}, [df](Node& self) {
    double* ga = grad_sink(self, 0);
    if (!ga) return;
    const auto& x = self.parents[0]->data;
    for (std::size_t i = 0; i < x.size(); ++i) {
      ga[i] += self.grad[i] * df(x[i], self.data[i]);
    }
  });
}

std::size_t resolve_axis(int axis, std::size_t rank) {
  const int r = static_cast<int>(rank);
  const int ax = axis < 0 ? axis + r : axis;
  if (ax < 0 || ax >= r) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for rank " +
                     std::to_string(rank));
  }
  return static_cast<std::size_t>(ax);
}

// outer x extent x inner decomposition around an axis.
struct AxisSplit {
  std::size_t outer = 1;
  std::size_t extent = 1;
  std::size_t inner = 1;
};

AxisSplit split_axis(const Shape& s, std::size_t axis) {
  AxisSplit sp;
  for (std::size_t i = 0; i < axis; ++i) sp.outer *= s[i];
  sp.extent = s[axis];
  for (std::size_t i = axis + 1; i < s.size(); ++i) sp.inner *= s[i];
  return sp;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || (b.rank() != 2 && b.rank() != 1) || a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul: shapes " + shape_str(a.shape()) + " and " +
                     shape_str(b.shape()) + " do not conform");
  }
  const std::size_t m = a.dim(0);
  const std::size_t k = a.dim(1);
  const std::size_t n = b.rank() == 2 ? b.dim(1) : 1;
  std::vector<double> out(m * n);
  const auto ei = [](std::size_t v) { return static_cast<Eigen::Index>(v); };
  MutMap(out.data(), ei(m), ei(n)).noalias() =
      ConstMap(a.data().data(), ei(m), ei(k)) * ConstMap(b.data().data(), ei(k), ei(n));
  Shape shape = b.rank() == 2 ? Shape{m, n} : Shape{m};
  return make_result(std::move(shape), std::move(out), {&a, &b},
                     [m, k, n, ei](Node& self) {
                       ConstMap g(self.grad.data(), ei(m), ei(n));
                       if (double* ga = grad_sink(self, 0)) {
                         ConstMap bm(self.parents[1]->data.data(), ei(k), ei(n));
                         MutMap(ga, ei(m), ei(k)).noalias() += g * bm.transpose();
                       }
                       if (double* gb = grad_sink(self, 1)) {
                         ConstMap am(self.parents[0]->data.data(), ei(m), ei(k));
                         MutMap(gb, ei(k), ei(n)).noalias() += am.transpose() * g;
                       }
                     });
}

Tensor add(const Tensor& a, const Tensor& b) {
  return binary("add", a, b, [](double x, double y) { return x + y; },
                [](double, double) { return std::pair{1.0, 1.0}; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary("sub", a, b, [](double x, double y) { return x - y; },
                [](double, double) { return std::pair{1.0, -1.0}; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary("mul", a, b, [](double x, double y) { return x * y; },
                [](double x, double y) { return std::pair{y, x}; });
}

Tensor div(const Tensor& a, const Tensor& b) {
  return binary("div", a, b, [](double x, double y) { return x / y; },
                [](double x, double y) { return std::pair{1.0 / y, -x / (y * y)}; });
}

// Ties route the whole gradient to the first operand.
Tensor minimum(const Tensor& a, const Tensor& b) {
  return binary("minimum", a, b, [](double x, double y) { return std::min(x, y); },
                [](double x, double y) {
                  return x <= y ? std::pair{1.0, 0.0} : std::pair{0.0, 1.0};
                });
}

Tensor maximum(const Tensor& a, const Tensor& b) {
  return binary("maximum", a, b, [](double x, double y) { return std::max(x, y); },
                [](double x, double y) {
                  return x >= y ? std::pair{1.0, 0.0} : std::pair{0.0, 1.0};
                });
}

Tensor scale(const Tensor& a, double factor) {
  return unary(a, [factor](double x) { return x * factor; },
               [factor](double, double) { return factor; });
}

Tensor clamp_min(const Tensor& a, double floor) {
  return unary(a, [floor](double x) { return std::max(x, floor); },
               [floor](double x, double) { return x >= floor ? 1.0 : 0.0; });
}

Tensor tanh(const Tensor& a) {
  return unary(a, [](double x) { return std::tanh(x); },
               [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& a) {
  return unary(a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
               [](double, double y) { return y * (1.0 - y); });
}

Tensor relu(const Tensor& a) {
  return unary(a, [](double x) { return x > 0.0 ? x : 0.0; },
               [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor exp(const Tensor& a) {
  return unary(a, [](double x) { return std::exp(x); },
               [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
  return unary(a, [](double x) { return std::log(x); },
               [](double x, double) { return 1.0 / x; });
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v;
  return make_result({1}, {s}, {&a}, [](Node& self) {
    if (double* ga = grad_sink(self, 0)) {
      const double g = self.grad[0];
      for (std::size_t i = 0; i < self.parents[0]->data.size(); ++i) ga[i] += g;
    }
  });
}

Tensor mean(const Tensor& a) { return scale(sum(a), 1.0 / static_cast<double>(a.numel())); }

Tensor max(const Tensor& a) {
  const auto d = a.data();
  const std::size_t arg =
      static_cast<std::size_t>(std::max_element(d.begin(), d.end()) - d.begin());
  return make_result({1}, {d[arg]}, {&a}, [arg](Node& self) {
    if (double* ga = grad_sink(self, 0)) ga[arg] += self.grad[0];
  });
}

Tensor softmax(const Tensor& a, int axis) {
  const std::size_t ax = resolve_axis(axis, a.rank());
  const AxisSplit sp = split_axis(a.shape(), ax);
  const auto x = a.data();
  std::vector<double> out(x.size());
  for (std::size_t o = 0; o < sp.outer; ++o) {
    for (std::size_t in = 0; in < sp.inner; ++in) {
      const std::size_t base = o * sp.extent * sp.inner + in;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < sp.extent; ++j) mx = std::max(mx, x[base + j * sp.inner]);
      double z = 0.0;
      for (std::size_t j = 0; j < sp.extent; ++j) {
        const double e = std::exp(x[base + j * sp.inner] - mx);
        out[base + j * sp.inner] = e;
        z += e;
      }
      for (std::size_t j = 0; j < sp.extent; ++j) out[base + j * sp.inner] /= z;
    }
  }
  return make_result(a.shape(), std::move(out), {&a}, [sp](Node& self) {
    double* ga = grad_sink(self, 0);
    if (!ga) return;
    const auto& y = self.data;
    const auto& g = self.grad;
    for (std::size_t o = 0; o < sp.outer; ++o) {
      for (std::size_t in = 0; in < sp.inner; ++in) {
        const std::size_t base = o * sp.extent * sp.inner + in;
        double dot = 0.0;
        for (std::size_t j = 0; j < sp.extent; ++j) {
          const std::size_t i = base + j * sp.inner;
          dot += g[i] * y[i];
        }
        for (std::size_t j = 0; j < sp.extent; ++j) {
          const std::size_t i = base + j * sp.inner;
          ga[i] += y[i] * (g[i] - dot);
        }
      }
    }
  });
}

Tensor log_softmax(const Tensor& a, int axis) {
  const std::size_t ax = resolve_axis(axis, a.rank());
  const AxisSplit sp = split_axis(a.shape(), ax);
  const auto x = a.data();
  std::vector<double> out(x.size());
  for (std::size_t o = 0; o < sp.outer; ++o) {
    for (std::size_t in = 0; in < sp.inner; ++in) {
      const std::size_t base = o * sp.extent * sp.inner + in;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < sp.extent; ++j) mx = std::max(mx, x[base + j * sp.inner]);
      double z = 0.0;
      for (std::size_t j = 0; j < sp.extent; ++j) z += std::exp(x[base + j * sp.inner] - mx);
      const double lse = mx + std::log(z);
      for (std::size_t j = 0; j < sp.extent; ++j) {
        out[base + j * sp.inner] = x[base + j * sp.inner] - lse;
      }
    }
  }
  return make_result(a.shape(), std::move(out), {&a}, [sp](Node& self) {
    double* ga = grad_sink(self, 0);
    if (!ga) return;
    const auto& y = self.data;
    const auto& g = self.grad;
    for (std::size_t o = 0; o < sp.outer; ++o) {
      for (std::size_t in = 0; in < sp.inner; ++in) {
        const std::size_t base = o * sp.extent * sp.inner + in;
        double gsum = 0.0;
        for (std::size_t j = 0; j < sp.extent; ++j) gsum += g[base + j * sp.inner];
        for (std::size_t j = 0; j < sp.extent; ++j) {
          const std::size_t i = base + j * sp.inner;
          ga[i] += g[i] - std::exp(y[i]) * gsum;
        }
      }
    }
  });
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_numel(shape) != a.numel()) {
    throw ShapeError("reshape: cannot view " + shape_str(a.shape()) + " as " +
                     shape_str(shape));
  }
  std::vector<double> out(a.data().begin(), a.data().end());
  return make_result(std::move(shape), std::move(out), {&a}, [](Node& self) {
    if (double* ga = grad_sink(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) ga[i] += self.grad[i];
    }
  });
}

Tensor concat(const std::vector<Tensor>& parts, int axis) {
  if (parts.empty()) throw ShapeError("concat: no operands");
  const std::size_t ax = resolve_axis(axis, parts.front().rank());
  Shape out_shape = parts.front().shape();
  out_shape[ax] = 0;
  for (const Tensor& p : parts) {
    bool conform = p.rank() == out_shape.size();
    for (std::size_t i = 0; conform && i < p.rank(); ++i) {
      conform = i == ax || p.dim(i) == parts.front().dim(i);
    }
    if (!conform) {
      throw ShapeError("concat: shapes " + shape_str(parts.front().shape()) + " and " +
                       shape_str(p.shape()) + " do not conform");
    }
    out_shape[ax] += p.dim(ax);
  }
  const AxisSplit sp = split_axis(out_shape, ax);
  std::vector<std::size_t> extents;
  std::vector<double> out(shape_numel(out_shape));
  std::size_t offset = 0;
  for (const Tensor& p : parts) {
    const std::size_t e = p.dim(ax);
    extents.push_back(e);
    const auto d = p.data();
    for (std::size_t o = 0; o < sp.outer; ++o) {
      std::copy_n(d.begin() + static_cast<std::ptrdiff_t>(o * e * sp.inner), e * sp.inner,
                  out.begin() + static_cast<std::ptrdiff_t>((o * sp.extent + offset) * sp.inner));
    }
    offset += e;
  }
  return make_result_n(std::move(out_shape), std::move(out), parts,
                       [sp, extents](Node& self) {
                         std::size_t off = 0;
                         for (std::size_t k = 0; k < extents.size(); ++k) {
                           const std::size_t e = extents[k];
                           if (double* gp = grad_sink(self, k)) {
                             for (std::size_t o = 0; o < sp.outer; ++o) {
                               const double* src =
                                   self.grad.data() + (o * sp.extent + off) * sp.inner;
                               double* dst = gp + o * e * sp.inner;
                               for (std::size_t i = 0; i < e * sp.inner; ++i) dst[i] += src[i];
                             }
                           }
                           off += e;
                         }
                       });
}

Tensor slice(const Tensor& a, int axis, std::size_t begin, std::size_t end) {
  const std::size_t ax = resolve_axis(axis, a.rank());
  if (begin >= end || end > a.dim(ax)) {
    throw ShapeError("slice: range [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") invalid for shape " + shape_str(a.shape()));
  }
  const AxisSplit sp = split_axis(a.shape(), ax);
  const std::size_t e = end - begin;
  Shape out_shape = a.shape();
  out_shape[ax] = e;
  std::vector<double> out(sp.outer * e * sp.inner);
  const auto d = a.data();
  for (std::size_t o = 0; o < sp.outer; ++o) {
    std::copy_n(d.begin() + static_cast<std::ptrdiff_t>((o * sp.extent + begin) * sp.inner),
                e * sp.inner, out.begin() + static_cast<std::ptrdiff_t>(o * e * sp.inner));
  }
  return make_result(std::move(out_shape), std::move(out), {&a},
                     [sp, begin, e](Node& self) {
                       double* ga = grad_sink(self, 0);
                       if (!ga) return;
                       for (std::size_t o = 0; o < sp.outer; ++o) {
                         double* dst = ga + (o * sp.extent + begin) * sp.inner;
                         const double* src = self.grad.data() + o * e * sp.inner;
                         for (std::size_t i = 0; i < e * sp.inner; ++i) dst[i] += src[i];
                       }
                     });
}

}  // namespace dmn::ad
