#include "kgrl/autodiff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace kgrl::autodiff {

namespace {

template <typename T>
using NodeT = detail::Node<T>;

template <typename T>
void require_same_size(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  if (a.size() != b.size()) {
    throw ShapeError(std::string(op) + ": size mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

template <typename T>
T sigmoid(T x) {
  return T{1} / (T{1} + std::exp(-x));
}

}  // namespace

std::size_t conv_output_extent(std::size_t extent, std::size_t kernel, std::size_t stride) {
  if (stride == 0) throw ShapeError("convolution stride must be positive");
  if (kernel > extent) {
    throw ShapeError("kernel " + std::to_string(kernel) + " larger than input extent " +
                     std::to_string(extent));
  }
  return (extent - kernel) / stride + 1;
}

template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& kernel, const Tensor<T>& bias,
                 std::size_t stride) {
  const Shape& is = input.shape();
  const Shape& ks = kernel.shape();
  if (is.size() != 3) throw ShapeError("conv2d: input must be HxWxC, got " + shape_string(is));
  if (ks.size() != 4 || ks[0] != ks[1]) {
    throw ShapeError("conv2d: kernel must be k x k x Cin x Cout, got " + shape_string(ks));
  }
  if (ks[2] != is[2]) {
    throw ShapeError("conv2d: input has " + std::to_string(is[2]) + " channels, kernel expects " +
                     std::to_string(ks[2]));
  }
  if (bias.size() != ks[3]) throw ShapeError("conv2d: bias length must equal output channels");

  const std::size_t height = is[0], width = is[1], cin = is[2];
  const std::size_t k = ks[0], cout = ks[3];
  const std::size_t out_h = conv_output_extent(height, k, stride);
  const std::size_t out_w = conv_output_extent(width, k, stride);

  std::vector<T> out(out_h * out_w * cout);
  const T* in = input.values().data();
  const T* w = kernel.values().data();
  const T* b = bias.values().data();
  for (std::size_t oy = 0; oy < out_h; ++oy) {
    for (std::size_t ox = 0; ox < out_w; ++ox) {
      T* o = out.data() + (oy * out_w + ox) * cout;
      std::copy(b, b + cout, o);
      for (std::size_t ky = 0; ky < k; ++ky) {
        for (std::size_t kx = 0; kx < k; ++kx) {
          const T* ip = in + ((oy * stride + ky) * width + ox * stride + kx) * cin;
          const T* kp = w + (ky * k + kx) * cin * cout;
          for (std::size_t ci = 0; ci < cin; ++ci) {
            const T v = ip[ci];
            const T* row = kp + ci * cout;
            for (std::size_t co = 0; co < cout; ++co) o[co] += v * row[co];
          }
        }
      }
    }
  }

  return make_result<T>(
      {out_h, out_w, cout}, std::move(out), {input.node(), kernel.node(), bias.node()},
      [=](NodeT<T>& self) {
        auto& pin = *self.parents[0];
        auto& pk = *self.parents[1];
        auto& pb = *self.parents[2];
        const T* g = self.grad.data();
        const T* inv = pin.value.data();
        const T* kv = pk.value.data();
        T* din = nullptr;
        T* dk = nullptr;
        if (pin.requires_grad) din = pin.grad.data();
        if (pk.requires_grad) dk = pk.grad.data();
        if (pb.requires_grad) {
          for (std::size_t p = 0; p < out_h * out_w; ++p) {
            for (std::size_t co = 0; co < cout; ++co) pb.grad[co] += g[p * cout + co];
          }
        }
        if (!din && !dk) return;
        for (std::size_t oy = 0; oy < out_h; ++oy) {
          for (std::size_t ox = 0; ox < out_w; ++ox) {
            const T* go = g + (oy * out_w + ox) * cout;
            for (std::size_t ky = 0; ky < k; ++ky) {
              for (std::size_t kx = 0; kx < k; ++kx) {
                const std::size_t in_off = ((oy * stride + ky) * width + ox * stride + kx) * cin;
                const std::size_t k_off = (ky * k + kx) * cin * cout;
                for (std::size_t ci = 0; ci < cin; ++ci) {
                  const T* row = kv + k_off + ci * cout;
                  if (dk) {
                    const T v = inv[in_off + ci];
                    T* drow = dk + k_off + ci * cout;
                    for (std::size_t co = 0; co < cout; ++co) drow[co] += v * go[co];
                  }
                  if (din) {
                    T acc{0};
                    for (std::size_t co = 0; co < cout; ++co) acc += row[co] * go[co];
                    din[in_off + ci] += acc;
                  }
                }
              }
            }
          }
        }
      });
}

template <typename T>
Tensor<T> fully_connected(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias) {
  const Shape& ws = weight.shape();
  if (ws.size() != 2) throw ShapeError("fully_connected: weight must be n x m");
  const std::size_t n = ws[0], m = ws[1];
  if (input.size() != n) {
    throw ShapeError("fully_connected: input has " + std::to_string(input.size()) +
                     " entries, weight expects " + std::to_string(n));
  }
  if (bias.size() != m) throw ShapeError("fully_connected: bias length must equal weight columns");

  std::vector<T> out(bias.values().begin(), bias.values().end());
  const T* x = input.values().data();
  const T* w = weight.values().data();
  for (std::size_t i = 0; i < n; ++i) {
    const T v = x[i];
    if (v == T{0}) continue;
    const T* row = w + i * m;
    for (std::size_t j = 0; j < m; ++j) out[j] += v * row[j];
  }

  return make_result<T>({m}, std::move(out), {input.node(), weight.node(), bias.node()},
                        [=](NodeT<T>& self) {
                          auto& px = *self.parents[0];
                          auto& pw = *self.parents[1];
                          auto& pb = *self.parents[2];
                          const T* g = self.grad.data();
                          if (pb.requires_grad) {
                            for (std::size_t j = 0; j < m; ++j) pb.grad[j] += g[j];
                          }
                          const T* xv = px.value.data();
                          const T* wv = pw.value.data();
                          for (std::size_t i = 0; i < n; ++i) {
                            const T* row = wv + i * m;
                            if (pw.requires_grad && xv[i] != T{0}) {
                              T* drow = pw.grad.data() + i * m;
                              const T v = xv[i];
                              for (std::size_t j = 0; j < m; ++j) drow[j] += v * g[j];
                            }
                            if (px.requires_grad) {
                              T acc{0};
                              for (std::size_t j = 0; j < m; ++j) acc += row[j] * g[j];
                              px.grad[i] += acc;
                            }
                          }
                        });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& input) {
  std::vector<T> out(input.values().begin(), input.values().end());
  for (T& v : out) v = v > T{0} ? v : T{0};
  return make_result<T>(input.shape(), std::move(out), {input.node()}, [](NodeT<T>& self) {
    auto& p = *self.parents[0];
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (p.value[i] > T{0}) p.grad[i] += self.grad[i];
    }
  });
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& logits) {
  if (logits.size() == 0) throw ShapeError("softmax of an empty tensor");
  auto z = logits.values();
  const T peak = *std::max_element(z.begin(), z.end());
  std::vector<T> out(z.size());
  T total{0};
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = std::exp(z[i] - peak);
    total += out[i];
  }
  for (T& v : out) v /= total;
  return make_result<T>(logits.shape(), std::move(out), {logits.node()}, [](NodeT<T>& self) {
    auto& p = *self.parents[0];
    T dot{0};
    for (std::size_t i = 0; i < self.grad.size(); ++i) dot += self.grad[i] * self.value[i];
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      p.grad[i] += self.value[i] * (self.grad[i] - dot);
    }
  });
}

template <typename T>
Tensor<T> log_softmax(const Tensor<T>& logits) {
  if (logits.size() == 0) throw ShapeError("log_softmax of an empty tensor");
  auto z = logits.values();
  const T peak = *std::max_element(z.begin(), z.end());
  T total{0};
  for (T v : z) total += std::exp(v - peak);
  const T log_norm = peak + std::log(total);
  std::vector<T> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] - log_norm;
  return make_result<T>(logits.shape(), std::move(out), {logits.node()}, [](NodeT<T>& self) {
    auto& p = *self.parents[0];
    T gsum{0};
    for (T g : self.grad) gsum += g;
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      p.grad[i] += self.grad[i] - std::exp(self.value[i]) * gsum;
    }
  });
}

template <typename T>
LstmState<T> lstm_cell(const Tensor<T>& x, const Tensor<T>& h, const Tensor<T>& c,
                       const LstmWeights<T>& weights) {
  const Shape& wi = weights.w_input.shape();
  const Shape& wh = weights.w_hidden.shape();
  const std::size_t hidden = h.size();
  if (c.size() != hidden) throw ShapeError("lstm_cell: h and c widths differ");
  if (wh.size() != 2 || wh[0] != hidden || wh[1] != 4 * hidden) {
    throw ShapeError("lstm_cell: hidden weight must be " + std::to_string(hidden) + "x" +
                     std::to_string(4 * hidden) + ", got " + shape_string(wh));
  }
  if (wi.size() != 2 || wi[1] != 4 * hidden) {
    throw ShapeError("lstm_cell: input weight must have " + std::to_string(4 * hidden) +
                     " columns, got " + shape_string(wi));
  }
  if (wi[0] != x.size()) {
    throw ShapeError("lstm_cell: input width " + std::to_string(x.size()) +
                     " does not match configured width " + std::to_string(wi[0]));
  }
  if (weights.bias.size() != 4 * hidden) throw ShapeError("lstm_cell: bias must be 4*hidden long");

  const std::size_t d_in = x.size();
  const std::size_t g4 = 4 * hidden;
  // gates holds the activated i, f, g, o blocks; kept for the backward pass.
  std::vector<T> gates(weights.bias.values().begin(), weights.bias.values().end());
  auto accumulate = [&](std::span<const T> v, std::span<const T> w) {
    for (std::size_t r = 0; r < v.size(); ++r) {
      const T a = v[r];
      if (a == T{0}) continue;
      const T* row = w.data() + r * g4;
      for (std::size_t k = 0; k < g4; ++k) gates[k] += a * row[k];
    }
  };
  accumulate(x.values(), weights.w_input.values());
  accumulate(h.values(), weights.w_hidden.values());
  for (std::size_t k = 0; k < hidden; ++k) {
    gates[k] = sigmoid(gates[k]);
    gates[hidden + k] = sigmoid(gates[hidden + k]);
    gates[2 * hidden + k] = std::tanh(gates[2 * hidden + k]);
    gates[3 * hidden + k] = sigmoid(gates[3 * hidden + k]);
  }

  std::vector<T> out(2 * hidden);
  std::vector<T> tanh_c(hidden);
  auto cv = c.values();
  for (std::size_t k = 0; k < hidden; ++k) {
    const T c_next = gates[hidden + k] * cv[k] + gates[k] * gates[2 * hidden + k];
    tanh_c[k] = std::tanh(c_next);
    out[k] = gates[3 * hidden + k] * tanh_c[k];
    out[hidden + k] = c_next;
  }

  auto joint = make_result<T>(
      {2 * hidden}, std::move(out),
      {x.node(), h.node(), c.node(), weights.w_input.node(), weights.w_hidden.node(),
       weights.bias.node()},
      [gates = std::move(gates), tanh_c = std::move(tanh_c), hidden, d_in, g4](NodeT<T>& self) {
        auto& px = *self.parents[0];
        auto& ph = *self.parents[1];
        auto& pc = *self.parents[2];
        auto& pwi = *self.parents[3];
        auto& pwh = *self.parents[4];
        auto& pb = *self.parents[5];
        const T* dh = self.grad.data();
        const T* dc = self.grad.data() + hidden;
        std::vector<T> dpre(g4);
        for (std::size_t k = 0; k < hidden; ++k) {
          const T i = gates[k], f = gates[hidden + k], g = gates[2 * hidden + k],
                  o = gates[3 * hidden + k];
          const T dc_total = dc[k] + dh[k] * o * (T{1} - tanh_c[k] * tanh_c[k]);
          dpre[k] = dc_total * g * i * (T{1} - i);
          dpre[hidden + k] = dc_total * pc.value[k] * f * (T{1} - f);
          dpre[2 * hidden + k] = dc_total * i * (T{1} - g * g);
          dpre[3 * hidden + k] = dh[k] * tanh_c[k] * o * (T{1} - o);
          if (pc.requires_grad) pc.grad[k] += dc_total * f;
        }
        if (pb.requires_grad) {
          for (std::size_t k = 0; k < g4; ++k) pb.grad[k] += dpre[k];
        }
        auto propagate = [&](detail::Node<T>& v, detail::Node<T>& w, std::size_t rows) {
          for (std::size_t r = 0; r < rows; ++r) {
            const T* row = w.value.data() + r * g4;
            if (w.requires_grad && v.value[r] != T{0}) {
              T* drow = w.grad.data() + r * g4;
              const T a = v.value[r];
              for (std::size_t k = 0; k < g4; ++k) drow[k] += a * dpre[k];
            }
            if (v.requires_grad) {
              T acc{0};
              for (std::size_t k = 0; k < g4; ++k) acc += row[k] * dpre[k];
              v.grad[r] += acc;
            }
          }
        };
        propagate(px, pwi, d_in);
        propagate(ph, pwh, hidden);
      });
  return {slice(joint, 0, hidden), slice(joint, hidden, hidden)};
}

template <typename T>
Tensor<T> concat(const Tensor<T>& a, const Tensor<T>& b) {
  std::vector<T> out(a.values().begin(), a.values().end());
  out.insert(out.end(), b.values().begin(), b.values().end());
  const std::size_t na = a.size();
  return make_result<T>({out.size()}, std::move(out), {a.node(), b.node()},
                        [na](NodeT<T>& self) {
                          auto& pa = *self.parents[0];
                          auto& pb = *self.parents[1];
                          if (pa.requires_grad) {
                            for (std::size_t i = 0; i < na; ++i) pa.grad[i] += self.grad[i];
                          }
                          if (pb.requires_grad) {
                            for (std::size_t i = na; i < self.grad.size(); ++i) {
                              pb.grad[i - na] += self.grad[i];
                            }
                          }
                        });
}

template <typename T>
Tensor<T> slice(const Tensor<T>& input, std::size_t offset, std::size_t length) {
  if (length == 0 || offset + length > input.size()) {
    throw ShapeError("slice [" + std::to_string(offset) + ", " + std::to_string(offset + length) +
                     ") out of range for " + shape_string(input.shape()));
  }
  auto v = input.values();
  std::vector<T> out(v.begin() + offset, v.begin() + offset + length);
  return make_result<T>({length}, std::move(out), {input.node()}, [offset](NodeT<T>& self) {
    auto& p = *self.parents[0];
    for (std::size_t i = 0; i < self.grad.size(); ++i) p.grad[offset + i] += self.grad[i];
  });
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& input, Shape shape) {
  if (numel(shape) != input.size()) {
    throw ShapeError("reshape " + shape_string(input.shape()) + " to " + shape_string(shape));
  }
  std::vector<T> out(input.values().begin(), input.values().end());
  return make_result<T>(std::move(shape), std::move(out), {input.node()}, [](NodeT<T>& self) {
    auto& p = *self.parents[0];
    for (std::size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += self.grad[i];
  });
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_size(a, b, "add");
  std::vector<T> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  return make_result<T>(a.shape(), std::move(out), {a.node(), b.node()}, [](NodeT<T>& self) {
    for (int k = 0; k < 2; ++k) {
      auto& p = *self.parents[k];
      if (!p.requires_grad) continue;
      for (std::size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += self.grad[i];
    }
  });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_size(a, b, "mul");
  std::vector<T> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  return make_result<T>(a.shape(), std::move(out), {a.node(), b.node()}, [](NodeT<T>& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    // Read both values before writing: a and b may be the same node.
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const T av = pa.value[i], bv = pb.value[i];
      if (pa.requires_grad) pa.grad[i] += self.grad[i] * bv;
      if (pb.requires_grad) pb.grad[i] += self.grad[i] * av;
    }
  });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& input, T factor) {
  std::vector<T> out(input.values().begin(), input.values().end());
  for (T& v : out) v *= factor;
  return make_result<T>(input.shape(), std::move(out), {input.node()}, [factor](NodeT<T>& self) {
    auto& p = *self.parents[0];
    for (std::size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += factor * self.grad[i];
  });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& input) {
  T total{0};
  for (T v : input.values()) total += v;
  return make_result<T>({1}, {total}, {input.node()}, [](NodeT<T>& self) {
    auto& p = *self.parents[0];
    for (T& g : p.grad) g += self.grad[0];
  });
}

template <typename T>
Tensor<T> select(const Tensor<T>& input, std::size_t index) {
  if (index >= input.size()) {
    throw ShapeError("select index " + std::to_string(index) + " out of range for " +
                     shape_string(input.shape()));
  }
  return make_result<T>({1}, {input[index]}, {input.node()}, [index](NodeT<T>& self) {
    self.parents[0]->grad[index] += self.grad[0];
  });
}

template <typename T>
Tensor<T> weighted_sum(std::span<const Tensor<T>> terms, std::span<const T> weights) {
  if (terms.size() != weights.size()) throw ShapeError("weighted_sum: terms and weights differ in length");
  if (terms.empty()) return Tensor<T>::scalar(T{0});
  T total{0};
  std::vector<typename Tensor<T>::NodePtr> parents;
  parents.reserve(terms.size());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (terms[i].size() != 1) throw ShapeError("weighted_sum: terms must be scalars");
    total += weights[i] * terms[i].item();
    parents.push_back(terms[i].node());
  }
  std::vector<T> w(weights.begin(), weights.end());
  return make_result<T>({1}, {total}, std::move(parents), [w = std::move(w)](NodeT<T>& self) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      auto& p = *self.parents[i];
      if (p.requires_grad) p.grad[0] += w[i] * self.grad[0];
    }
  });
}

template <typename T>
Tensor<T> half_squared_error(std::span<const Tensor<T>> predictions, std::span<const T> targets) {
  if (predictions.size() != targets.size()) {
    throw ShapeError("half_squared_error: predictions and targets differ in length");
  }
  if (predictions.empty()) return Tensor<T>::scalar(T{0});
  T total{0};
  std::vector<typename Tensor<T>::NodePtr> parents;
  std::vector<T> residual(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i].size() != 1) throw ShapeError("half_squared_error: predictions must be scalars");
    residual[i] = predictions[i].item() - targets[i];
    total += residual[i] * residual[i];
    parents.push_back(predictions[i].node());
  }
  return make_result<T>({1}, {total / T{2}}, std::move(parents),
                        [residual = std::move(residual)](NodeT<T>& self) {
                          for (std::size_t i = 0; i < residual.size(); ++i) {
                            auto& p = *self.parents[i];
                            if (p.requires_grad) p.grad[0] += residual[i] * self.grad[0];
                          }
                        });
}

#define KGRL_INSTANTIATE_OPS(T)                                                                  \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, std::size_t); \
  template Tensor<T> fully_connected(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);     \
  template Tensor<T> relu(const Tensor<T>&);                                                    \
  template Tensor<T> softmax(const Tensor<T>&);                                                 \
  template Tensor<T> log_softmax(const Tensor<T>&);                                             \
  template LstmState<T> lstm_cell(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,         \
                                  const LstmWeights<T>&);                                       \
  template Tensor<T> concat(const Tensor<T>&, const Tensor<T>&);                                \
  template Tensor<T> slice(const Tensor<T>&, std::size_t, std::size_t);                         \
  template Tensor<T> reshape(const Tensor<T>&, Shape);                                          \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                   \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                                   \
  template Tensor<T> scale(const Tensor<T>&, T);                                                \
  template Tensor<T> sum(const Tensor<T>&);                                                     \
  template Tensor<T> select(const Tensor<T>&, std::size_t);                                     \
  template Tensor<T> weighted_sum(std::span<const Tensor<T>>, std::span<const T>);              \
  template Tensor<T> half_squared_error(std::span<const Tensor<T>>, std::span<const T>);

KGRL_INSTANTIATE_OPS(float)
KGRL_INSTANTIATE_OPS(double)

#undef KGRL_INSTANTIATE_OPS

}  // namespace kgrl::autodiff
