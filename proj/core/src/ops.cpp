// Copyright 2026 The ARC Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "arc/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace arc {

namespace {

void require_rank(const Tensor& t, int rank, const char* what) {
  if (!t.defined() || t.rank() != rank) {
    throw ShapeError(std::string(what) + " must have rank " +
                     std::to_string(rank) + ", got " +
                     (t.defined() ? shape_str(t.shape()) : "<undefined>"));
  }
}

// Marks the output as gradient-carrying and records the step. Output grad
// storage is allocated up front so later steps can read it unconditionally.
template <typename Fn>
void record_if_needed(Tape& tape, Tensor& out, bool any_input_grad, Fn&& fn) {
  if (!tape.recording() || !any_input_grad) return;
  out.set_requires_grad(true);
  out.ensure_grad();
  tape.record(std::forward<Fn>(fn));
}

}  // namespace

Tensor conv2d(Tape& tape, const Tensor& input, const Tensor& weight,
              const Tensor& bias, int stride, int padding) {
  require_rank(input, 4, "conv2d input");
  require_rank(weight, 4, "conv2d weight");
  require_rank(bias, 1, "conv2d bias");
  const int n = input.dim(0), cin = input.dim(1), h = input.dim(2),
            w = input.dim(3);
  const int cout = weight.dim(0), k = weight.dim(2);
  if (weight.dim(1) != cin) {
    throw ShapeError("conv2d channel mismatch: input " +
                     shape_str(input.shape()) + " vs weight " +
                     shape_str(weight.shape()));
  }
  if (weight.dim(3) != k) {
    throw ShapeError("conv2d kernel must be square, got " +
                     shape_str(weight.shape()));
  }
  if (bias.dim(0) != cout) {
    throw ShapeError("conv2d bias extent " + shape_str(bias.shape()) +
                     " does not match Cout " + std::to_string(cout));
  }
  if (k < 1 || stride < 1 || padding < 0) {
    throw ShapeError("conv2d requires k >= 1, stride >= 1, padding >= 0");
  }
  const int oh_num = h + 2 * padding - k;
  const int ow_num = w + 2 * padding - k;
  if (oh_num < 0 || ow_num < 0 || oh_num % stride != 0 || ow_num % stride != 0) {
    throw ShapeError("conv2d output extent is not a positive integer for " +
                     shape_str(input.shape()) + " with k=" + std::to_string(k) +
                     " stride=" + std::to_string(stride) +
                     " padding=" + std::to_string(padding));
  }
  const int oh = oh_num / stride + 1;
  const int ow = ow_num / stride + 1;

  Tensor out = Tensor::zeros({n, cout, oh, ow});
  {
    // Kernel-outer loop order: the innermost walk over ox is contiguous in
    // both the output and (for stride 1) the input row, which the compiler
    // vectorizes.
    const double* in = input.values().data();
    const double* wt = weight.values().data();
    const double* bs = bias.values().data();
    double* o = out.values_mut().data();
    const std::size_t in_plane_sz = static_cast<std::size_t>(h) * w;
    const std::size_t out_plane_sz = static_cast<std::size_t>(oh) * ow;
    for (int ni = 0; ni < n; ++ni) {
      for (int co = 0; co < cout; ++co) {
        double* o_plane =
            o + (static_cast<std::size_t>(ni) * cout + co) * out_plane_sz;
        for (std::size_t i = 0; i < out_plane_sz; ++i) o_plane[i] = bs[co];
        for (int ci = 0; ci < cin; ++ci) {
          const double* in_plane =
              in + (static_cast<std::size_t>(ni) * cin + ci) * in_plane_sz;
          const double* w_plane =
              wt + ((static_cast<std::size_t>(co) * cin + ci) * k) * k;
          for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
              const double wv = w_plane[ky * k + kx];
              if (wv == 0.0) continue;
              for (int oy = 0; oy < oh; ++oy) {
                const int iy = oy * stride - padding + ky;
                if (iy < 0 || iy >= h) continue;
                // Valid ox range so that 0 <= ix < w.
                int ox_lo = 0;
                while (ox_lo * stride - padding + kx < 0) ++ox_lo;
                int ox_hi = ow - 1;
                while (ox_hi >= 0 && ox_hi * stride - padding + kx >= w) --ox_hi;
                double* o_row = o_plane + static_cast<std::size_t>(oy) * ow;
                const double* in_row = in_plane + static_cast<std::size_t>(iy) * w;
                const int base = -padding + kx;
                if (stride == 1) {
                  for (int ox = ox_lo; ox <= ox_hi; ++ox) {
                    o_row[ox] += wv * in_row[ox + base];
                  }
                } else {
                  for (int ox = ox_lo; ox <= ox_hi; ++ox) {
                    o_row[ox] += wv * in_row[ox * stride + base];
                  }
                }
              }
            }
          }
        }
      }
    }
  }

  const bool any = input.requires_grad() || weight.requires_grad() ||
                   bias.requires_grad();
  Tensor in_h = input, w_h = weight, b_h = bias;
  record_if_needed(tape, out, any, [in_h, w_h, b_h, out, stride, padding,
                                    n, cin, h, w, cout, k, oh, ow]() mutable {
    const double* g = out.grad().data();
    const double* in = in_h.values().data();
    const double* wt = w_h.values().data();
    const bool gi = in_h.requires_grad();
    const bool gw = w_h.requires_grad();
    const bool gb = b_h.requires_grad();
    if (gi) in_h.ensure_grad();
    if (gw) w_h.ensure_grad();
    if (gb) b_h.ensure_grad();
    double* din = gi ? in_h.grad_mut().data() : nullptr;
    double* dwt = gw ? w_h.grad_mut().data() : nullptr;
    double* dbs = gb ? b_h.grad_mut().data() : nullptr;
    const std::size_t in_plane_sz = static_cast<std::size_t>(h) * w;
    const std::size_t out_plane_sz = static_cast<std::size_t>(oh) * ow;
    for (int ni = 0; ni < n; ++ni) {
      for (int co = 0; co < cout; ++co) {
        const double* g_plane =
            g + (static_cast<std::size_t>(ni) * cout + co) * out_plane_sz;
        if (gb) {
          double acc = 0.0;
          for (std::size_t i = 0; i < out_plane_sz; ++i) acc += g_plane[i];
          dbs[co] += acc;
        }
        if (!gi && !gw) continue;
        for (int ci = 0; ci < cin; ++ci) {
          const std::size_t in_base =
              (static_cast<std::size_t>(ni) * cin + ci) * in_plane_sz;
          const std::size_t w_base =
              ((static_cast<std::size_t>(co) * cin + ci) * k) * k;
          for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
              const std::size_t wi = w_base + static_cast<std::size_t>(ky) * k + kx;
              const double wv = wt[wi];
              double dw_acc = 0.0;
              const int base = -padding + kx;
              for (int oy = 0; oy < oh; ++oy) {
                const int iy = oy * stride - padding + ky;
                if (iy < 0 || iy >= h) continue;
                int ox_lo = 0;
                while (ox_lo * stride + base < 0) ++ox_lo;
                int ox_hi = ow - 1;
                while (ox_hi >= 0 && ox_hi * stride + base >= w) --ox_hi;
                const double* g_row = g_plane + static_cast<std::size_t>(oy) * ow;
                const double* in_row = in + in_base + static_cast<std::size_t>(iy) * w;
                double* din_row =
                    gi ? din + in_base + static_cast<std::size_t>(iy) * w : nullptr;
                if (stride == 1) {
                  if (gi && gw) {
                    for (int ox = ox_lo; ox <= ox_hi; ++ox) {
                      din_row[ox + base] += wv * g_row[ox];
                      dw_acc += in_row[ox + base] * g_row[ox];
                    }
                  } else if (gi) {
                    for (int ox = ox_lo; ox <= ox_hi; ++ox) {
                      din_row[ox + base] += wv * g_row[ox];
                    }
                  } else {
                    for (int ox = ox_lo; ox <= ox_hi; ++ox) {
                      dw_acc += in_row[ox + base] * g_row[ox];
                    }
                  }
                } else {
                  for (int ox = ox_lo; ox <= ox_hi; ++ox) {
                    const int ix = ox * stride + base;
                    if (gi) din_row[ix] += wv * g_row[ox];
                    if (gw) dw_acc += in_row[ix] * g_row[ox];
                  }
                }
              }
              if (gw) dwt[wi] += dw_acc;
            }
          }
        }
      }
    }
  });
  return out;
}

Tensor global_avg_pool(Tape& tape, const Tensor& input) {
  require_rank(input, 4, "global_avg_pool input");
  const int n = input.dim(0), c = input.dim(1), h = input.dim(2),
            w = input.dim(3);
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  Tensor out = Tensor::zeros({n, c, 1, 1});
  const double* in = input.values().data();
  double* o = out.values_mut().data();
  for (int i = 0; i < n * c; ++i) {
    double acc = 0.0;
    const double* p = in + static_cast<std::size_t>(i) * plane;
    for (std::size_t j = 0; j < plane; ++j) acc += p[j];
    o[i] = acc / static_cast<double>(plane);
  }
  Tensor in_h = input;
  record_if_needed(tape, out, input.requires_grad(),
                   [in_h, out, n, c, plane]() mutable {
                     in_h.ensure_grad();
                     const double* g = out.grad().data();
                     double* din = in_h.grad_mut().data();
                     const double inv = 1.0 / static_cast<double>(plane);
                     for (int i = 0; i < n * c; ++i) {
                       const double gv = g[i] * inv;
                       double* p = din + static_cast<std::size_t>(i) * plane;
                       for (std::size_t j = 0; j < plane; ++j) p[j] += gv;
                     }
                   });
  return out;
}

Tensor global_max_pool(Tape& tape, const Tensor& input) {
  require_rank(input, 4, "global_max_pool input");
  const int n = input.dim(0), c = input.dim(1), h = input.dim(2),
            w = input.dim(3);
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  Tensor out = Tensor::zeros({n, c, 1, 1});
  std::vector<std::size_t> argmax(static_cast<std::size_t>(n) * c);
  const double* in = input.values().data();
  double* o = out.values_mut().data();
  for (int i = 0; i < n * c; ++i) {
    const double* p = in + static_cast<std::size_t>(i) * plane;
    double best = p[0];
    std::size_t best_j = 0;
    for (std::size_t j = 1; j < plane; ++j) {
      if (p[j] > best) {  // strict: first maximal element wins ties
        best = p[j];
        best_j = j;
      }
    }
    o[i] = best;
    argmax[static_cast<std::size_t>(i)] = best_j;
  }
  Tensor in_h = input;
  record_if_needed(tape, out, input.requires_grad(),
                   [in_h, out, n, c, plane, argmax = std::move(argmax)]() mutable {
                     in_h.ensure_grad();
                     const double* g = out.grad().data();
                     double* din = in_h.grad_mut().data();
                     for (int i = 0; i < n * c; ++i) {
                       din[static_cast<std::size_t>(i) * plane + argmax[static_cast<std::size_t>(i)]] += g[i];
                     }
                   });
  return out;
}

Tensor linear(Tape& tape, const Tensor& input, const Tensor& weight,
              const Tensor& bias) {
  require_rank(input, 2, "linear input");
  require_rank(weight, 2, "linear weight");
  require_rank(bias, 1, "linear bias");
  const int n = input.dim(0), cin = input.dim(1);
  const int cout = weight.dim(0);
  if (weight.dim(1) != cin || bias.dim(0) != cout) {
    throw ShapeError("linear shape mismatch: input " + shape_str(input.shape()) +
                     " weight " + shape_str(weight.shape()) + " bias " +
                     shape_str(bias.shape()));
  }
  Tensor out = Tensor::zeros({n, cout});
  {
    const double* in = input.values().data();
    const double* wt = weight.values().data();
    const double* bs = bias.values().data();
    double* o = out.values_mut().data();
    for (int ni = 0; ni < n; ++ni) {
      for (int co = 0; co < cout; ++co) {
        double acc = bs[co];
        for (int ci = 0; ci < cin; ++ci) {
          acc += in[static_cast<std::size_t>(ni) * cin + ci] *
                 wt[static_cast<std::size_t>(co) * cin + ci];
        }
        o[static_cast<std::size_t>(ni) * cout + co] = acc;
      }
    }
  }
  const bool any = input.requires_grad() || weight.requires_grad() ||
                   bias.requires_grad();
  Tensor in_h = input, w_h = weight, b_h = bias;
  record_if_needed(tape, out, any, [in_h, w_h, b_h, out, n, cin, cout]() mutable {
    const double* g = out.grad().data();
    const double* in = in_h.values().data();
    const double* wt = w_h.values().data();
    const bool gi = in_h.requires_grad();
    const bool gw = w_h.requires_grad();
    const bool gb = b_h.requires_grad();
    if (gi) in_h.ensure_grad();
    if (gw) w_h.ensure_grad();
    if (gb) b_h.ensure_grad();
    double* din = gi ? in_h.grad_mut().data() : nullptr;
    double* dwt = gw ? w_h.grad_mut().data() : nullptr;
    double* dbs = gb ? b_h.grad_mut().data() : nullptr;
    for (int ni = 0; ni < n; ++ni) {
      for (int co = 0; co < cout; ++co) {
        const double go = g[static_cast<std::size_t>(ni) * cout + co];
        if (gb) dbs[co] += go;
        for (int ci = 0; ci < cin; ++ci) {
          if (gi) din[static_cast<std::size_t>(ni) * cin + ci] +=
              wt[static_cast<std::size_t>(co) * cin + ci] * go;
          if (gw) dwt[static_cast<std::size_t>(co) * cin + ci] +=
              in[static_cast<std::size_t>(ni) * cin + ci] * go;
        }
      }
    }
  });
  return out;
}

Tensor sigmoid(Tape& tape, const Tensor& input) {
  if (!input.defined()) throw ShapeError("sigmoid on undefined tensor");
  Tensor out = Tensor::zeros(input.shape());
  const double* in = input.values().data();
  double* o = out.values_mut().data();
  const std::size_t n = input.numel();
  for (std::size_t i = 0; i < n; ++i) {
    const double x = in[i];
    if (x >= 0.0) {
      o[i] = 1.0 / (1.0 + std::exp(-x));
    } else {
      const double e = std::exp(x);
      o[i] = e / (1.0 + e);
    }
  }
  Tensor in_h = input;
  record_if_needed(tape, out, input.requires_grad(), [in_h, out, n]() mutable {
    in_h.ensure_grad();
    const double* g = out.grad().data();
    const double* y = out.values().data();
    double* din = in_h.grad_mut().data();
    for (std::size_t i = 0; i < n; ++i) din[i] += g[i] * y[i] * (1.0 - y[i]);
  });
  return out;
}

Tensor relu(Tape& tape, const Tensor& input) {
  if (!input.defined()) throw ShapeError("relu on undefined tensor");
  Tensor out = Tensor::zeros(input.shape());
  const double* in = input.values().data();
  double* o = out.values_mut().data();
  const std::size_t n = input.numel();
  for (std::size_t i = 0; i < n; ++i) o[i] = in[i] > 0.0 ? in[i] : 0.0;
  Tensor in_h = input;
  record_if_needed(tape, out, input.requires_grad(), [in_h, out, n]() mutable {
    in_h.ensure_grad();
    const double* g = out.grad().data();
    const double* x = in_h.values().data();
    double* din = in_h.grad_mut().data();
    for (std::size_t i = 0; i < n; ++i) {
      if (x[i] > 0.0) din[i] += g[i];
    }
  });
  return out;
}

namespace {

// Flat index of the broadcast operand for a position in the full tensor.
// Only rank-4 singleton-axis broadcasting is supported.
struct Broadcast4 {
  int bc[4];
  int bdim[4];
  std::size_t stride[4];

  Broadcast4(const Shape& a, const Shape& b) {
    for (int i = 0; i < 4; ++i) {
      bdim[i] = b[static_cast<std::size_t>(i)];
      bc[i] = bdim[i] == 1 ? 0 : 1;
    }
    stride[3] = 1;
    for (int i = 2; i >= 0; --i) {
      stride[static_cast<std::size_t>(i)] =
          stride[static_cast<std::size_t>(i) + 1] * static_cast<std::size_t>(bdim[i + 1]);
    }
    (void)a;
  }

  std::size_t index(int i0, int i1, int i2, int i3) const {
    return static_cast<std::size_t>(bc[0] * i0) * stride[0] +
           static_cast<std::size_t>(bc[1] * i1) * stride[1] +
           static_cast<std::size_t>(bc[2] * i2) * stride[2] +
           static_cast<std::size_t>(bc[3] * i3) * stride[3];
  }
};

bool broadcastable_to(const Shape& b, const Shape& a) {
  if (a.size() != 4 || b.size() != 4) return false;
  for (std::size_t i = 0; i < 4; ++i) {
    if (b[i] != a[i] && b[i] != 1) return false;
  }
  return true;
}

}  // namespace

Tensor mul_elementwise(Tape& tape, const Tensor& a, const Tensor& b) {
  if (!a.defined() || !b.defined()) throw ShapeError("mul on undefined tensor");
  const bool same = a.shape() == b.shape();
  if (!same && !broadcastable_to(b.shape(), a.shape())) {
    throw ShapeError("mul shapes not broadcastable: " + shape_str(a.shape()) +
                     " vs " + shape_str(b.shape()));
  }
  Tensor out = Tensor::zeros(a.shape());
  const std::size_t n = a.numel();
  const double* av = a.values().data();
  const double* bv = b.values().data();
  double* o = out.values_mut().data();

  if (same) {
    for (std::size_t i = 0; i < n; ++i) o[i] = av[i] * bv[i];
  } else {
    const Broadcast4 bx(a.shape(), b.shape());
    const int d0 = a.dim(0), d1 = a.dim(1), d2 = a.dim(2), d3 = a.dim(3);
    std::size_t i = 0;
    for (int i0 = 0; i0 < d0; ++i0)
      for (int i1 = 0; i1 < d1; ++i1)
        for (int i2 = 0; i2 < d2; ++i2)
          for (int i3 = 0; i3 < d3; ++i3, ++i) o[i] = av[i] * bv[bx.index(i0, i1, i2, i3)];
  }

  const bool any = a.requires_grad() || b.requires_grad();
  Tensor a_h = a, b_h = b;
  record_if_needed(tape, out, any, [a_h, b_h, out, same, n]() mutable {
    const double* g = out.grad().data();
    const double* av = a_h.values().data();
    const double* bv = b_h.values().data();
    const bool ga = a_h.requires_grad();
    const bool gb = b_h.requires_grad();
    if (ga) a_h.ensure_grad();
    if (gb) b_h.ensure_grad();
    double* da = ga ? a_h.grad_mut().data() : nullptr;
    double* db = gb ? b_h.grad_mut().data() : nullptr;
    if (same) {
      for (std::size_t i = 0; i < n; ++i) {
        if (ga) da[i] += g[i] * bv[i];
        if (gb) db[i] += g[i] * av[i];
      }
    } else {
      const Broadcast4 bx(a_h.shape(), b_h.shape());
      const int d0 = a_h.dim(0), d1 = a_h.dim(1), d2 = a_h.dim(2), d3 = a_h.dim(3);
      std::size_t i = 0;
      for (int i0 = 0; i0 < d0; ++i0)
        for (int i1 = 0; i1 < d1; ++i1)
          for (int i2 = 0; i2 < d2; ++i2)
            for (int i3 = 0; i3 < d3; ++i3, ++i) {
              const std::size_t bi = bx.index(i0, i1, i2, i3);
              if (ga) da[i] += g[i] * bv[bi];
              if (gb) db[bi] += g[i] * av[i];  // sums over broadcast axes
            }
    }
  });
  return out;
}

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  if (!a.defined() || !b.defined()) throw ShapeError("add on undefined tensor");
  if (a.shape() != b.shape()) {
    throw ShapeError("add shape mismatch: " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  }
  Tensor out = Tensor::zeros(a.shape());
  const std::size_t n = a.numel();
  const double* av = a.values().data();
  const double* bv = b.values().data();
  double* o = out.values_mut().data();
  for (std::size_t i = 0; i < n; ++i) o[i] = av[i] + bv[i];
  const bool any = a.requires_grad() || b.requires_grad();
  Tensor a_h = a, b_h = b;
  record_if_needed(tape, out, any, [a_h, b_h, out, n]() mutable {
    const double* g = out.grad().data();
    if (a_h.requires_grad()) {
      a_h.ensure_grad();
      double* da = a_h.grad_mut().data();
      for (std::size_t i = 0; i < n; ++i) da[i] += g[i];
    }
    if (b_h.requires_grad()) {
      b_h.ensure_grad();
      double* db = b_h.grad_mut().data();
      for (std::size_t i = 0; i < n; ++i) db[i] += g[i];
    }
  });
  return out;
}

Tensor scale(Tape& tape, const Tensor& a, const Tensor& s) {
  if (!a.defined() || !s.defined()) throw ShapeError("scale on undefined tensor");
  if (s.numel() != 1) {
    throw ShapeError("scale factor must be a scalar tensor, got " +
                     shape_str(s.shape()));
  }
  Tensor out = Tensor::zeros(a.shape());
  const std::size_t n = a.numel();
  const double sv = s.value_at(0);
  const double* av = a.values().data();
  double* o = out.values_mut().data();
  for (std::size_t i = 0; i < n; ++i) o[i] = av[i] * sv;
  const bool any = a.requires_grad() || s.requires_grad();
  Tensor a_h = a, s_h = s;
  record_if_needed(tape, out, any, [a_h, s_h, out, n, sv]() mutable {
    const double* g = out.grad().data();
    const double* av = a_h.values().data();
    if (a_h.requires_grad()) {
      a_h.ensure_grad();
      double* da = a_h.grad_mut().data();
      for (std::size_t i = 0; i < n; ++i) da[i] += g[i] * sv;
    }
    if (s_h.requires_grad()) {
      s_h.ensure_grad();
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += g[i] * av[i];
      s_h.grad_mut()[0] += acc;
    }
  });
  return out;
}

Tensor reshape(Tape& tape, const Tensor& input, Shape shape) {
  if (!input.defined()) throw ShapeError("reshape on undefined tensor");
  if (shape_numel(shape) != input.numel()) {
    throw ShapeError("reshape from " + shape_str(input.shape()) + " to " +
                     shape_str(shape) + " changes element count");
  }
  Tensor out = Tensor::from_values(
      std::move(shape), std::vector<double>(input.values().begin(), input.values().end()));
  Tensor in_h = input;
  record_if_needed(tape, out, input.requires_grad(), [in_h, out]() mutable {
    in_h.ensure_grad();
    const double* g = out.grad().data();
    double* din = in_h.grad_mut().data();
    const std::size_t n = in_h.numel();
    for (std::size_t i = 0; i < n; ++i) din[i] += g[i];
  });
  return out;
}

Tensor sum(Tape& tape, const Tensor& input) {
  if (!input.defined()) throw ShapeError("sum on undefined tensor");
  double acc = 0.0;
  for (const double v : input.values()) acc += v;
  Tensor out = Tensor::scalar(acc);
  Tensor in_h = input;
  record_if_needed(tape, out, input.requires_grad(), [in_h, out]() mutable {
    in_h.ensure_grad();
    const double g = out.grad()[0];
    double* din = in_h.grad_mut().data();
    const std::size_t n = in_h.numel();
    for (std::size_t i = 0; i < n; ++i) din[i] += g;
  });
  return out;
}

}  // namespace arc
