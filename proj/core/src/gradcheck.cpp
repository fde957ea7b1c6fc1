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

#include "arc/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "arc/bridge.hpp"
#include "arc/model.hpp"
#include "arc/ops.hpp"
#include "arc/rng.hpp"

namespace arc {

double max_grad_rel_error(std::span<Tensor> inputs,
                          const std::function<double()>& forward_value,
                          double epsilon) {
  double max_err = 0.0;
  for (Tensor& t : inputs) {
    if (!t.requires_grad()) continue;
    if (!t.has_grad()) {
      throw NumericError("gradcheck: input lacks an analytic gradient");
    }
    auto vals = t.values_mut();
    auto grads = t.grad();
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const double saved = vals[i];
      vals[i] = saved + epsilon;
      const double up = forward_value();
      vals[i] = saved - epsilon;
      const double down = forward_value();
      vals[i] = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      const double analytic = grads[i];
      const double denom =
          std::max({std::abs(analytic), std::abs(numeric), 1e-6});
      max_err = std::max(max_err, std::abs(analytic - numeric) / denom);
    }
  }
  return max_err;
}

namespace {

Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (double& v : t.values_mut()) v = rng.uniform(lo, hi);
  return t;
}

// Random values with pairwise gaps, so max-pool argmax and relu activation
// patterns cannot flip under the +-epsilon probes.
Tensor random_separated(Shape shape, Rng& rng) {
  Tensor t = random_tensor(shape, rng);
  auto v = t.values_mut();
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&v](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  for (std::size_t r = 0; r < order.size(); ++r) {
    v[order[r]] += static_cast<double>(r) * 1e-3;
  }
  for (double& x : v) {
    if (std::abs(x) < 1e-2) x += x >= 0.0 ? 2e-2 : -2e-2;
  }
  return t;
}

// Fixed random projection making a scalar objective out of any op output.
double weighted_sum_value(const Tensor& out, const Tensor& w) {
  double acc = 0.0;
  auto ov = out.values();
  auto wv = w.values();
  for (std::size_t i = 0; i < ov.size(); ++i) acc += ov[i] * wv[i];
  return acc;
}

struct Case {
  std::vector<Tensor> inputs;  // tensors to check
  // Rebuilds the op output from the current input values.
  std::function<Tensor(Tape&, std::vector<Tensor>&)> forward;
};

double check_case(Case c, Rng& rng) {
  Tape tape;
  for (Tensor& t : c.inputs) t.set_requires_grad(true);
  Tensor out = c.forward(tape, c.inputs);
  Tensor w = random_tensor(out.shape(), rng);
  Tensor loss = sum(tape, mul_elementwise(tape, out, w));
  tape.backward(loss);
  const auto value = [&c, &w]() {
    Tape silent(false);
    return weighted_sum_value(c.forward(silent, c.inputs), w);
  };
  return max_grad_rel_error(c.inputs, value);
}

double check_conv2d(Rng& rng, bool spec_shape) {
  Case c;
  if (spec_shape) {
    // 1 x 4 x 8 x 8 input with a 7x7 kernel and padding 3.
    c.inputs = {random_tensor({1, 4, 8, 8}, rng),
                random_tensor({3, 4, 7, 7}, rng),
                random_tensor({3}, rng)};
    c.forward = [](Tape& t, std::vector<Tensor>& in) {
      return conv2d(t, in[0], in[1], in[2], 1, 3);
    };
  } else {
    const int stride = rng.next_int(1, 2);
    c.inputs = {random_tensor({2, 3, 7, 7}, rng),
                random_tensor({4, 3, 3, 3}, rng),
                random_tensor({4}, rng)};
    c.forward = [stride](Tape& t, std::vector<Tensor>& in) {
      return conv2d(t, in[0], in[1], in[2], stride, 1);
    };
  }
  return check_case(std::move(c), rng);
}

double check_avg_pool(Rng& rng) {
  Case c;
  c.inputs = {random_tensor({2, 3, 5, 5}, rng)};
  c.forward = [](Tape& t, std::vector<Tensor>& in) {
    return global_avg_pool(t, in[0]);
  };
  return check_case(std::move(c), rng);
}

double check_max_pool(Rng& rng) {
  Case c;
  c.inputs = {random_separated({2, 3, 5, 5}, rng)};
  c.forward = [](Tape& t, std::vector<Tensor>& in) {
    return global_max_pool(t, in[0]);
  };
  return check_case(std::move(c), rng);
}

double check_linear(Rng& rng) {
  Case c;
  c.inputs = {random_tensor({3, 5}, rng), random_tensor({4, 5}, rng),
              random_tensor({4}, rng)};
  c.forward = [](Tape& t, std::vector<Tensor>& in) {
    return linear(t, in[0], in[1], in[2]);
  };
  return check_case(std::move(c), rng);
}

double check_sigmoid(Rng& rng) {
  Case c;
  c.inputs = {random_tensor({2, 3, 4, 4}, rng, -4.0, 4.0)};
  c.forward = [](Tape& t, std::vector<Tensor>& in) { return sigmoid(t, in[0]); };
  return check_case(std::move(c), rng);
}

double check_relu(Rng& rng) {
  Case c;
  c.inputs = {random_separated({2, 3, 4, 4}, rng)};
  c.forward = [](Tape& t, std::vector<Tensor>& in) { return relu(t, in[0]); };
  return check_case(std::move(c), rng);
}

double check_mul(Rng& rng, int variant) {
  Case c;
  Shape b_shape;
  switch (variant) {
    case 0: b_shape = {2, 3, 4, 4}; break;  // same shape
    case 1: b_shape = {2, 3, 1, 1}; break;  // channel mask
    default: b_shape = {2, 1, 4, 4}; break;  // spatial mask
  }
  c.inputs = {random_tensor({2, 3, 4, 4}, rng), random_tensor(b_shape, rng)};
  c.forward = [](Tape& t, std::vector<Tensor>& in) {
    return mul_elementwise(t, in[0], in[1]);
  };
  return check_case(std::move(c), rng);
}

double check_add(Rng& rng) {
  Case c;
  c.inputs = {random_tensor({2, 3, 4, 4}, rng), random_tensor({2, 3, 4, 4}, rng)};
  c.forward = [](Tape& t, std::vector<Tensor>& in) { return add(t, in[0], in[1]); };
  return check_case(std::move(c), rng);
}

double check_scale(Rng& rng) {
  Case c;
  c.inputs = {random_tensor({2, 3, 4, 4}, rng), random_tensor({1}, rng)};
  c.forward = [](Tape& t, std::vector<Tensor>& in) { return scale(t, in[0], in[1]); };
  return check_case(std::move(c), rng);
}

double check_reshape(Rng& rng) {
  Case c;
  c.inputs = {random_tensor({2, 3, 4, 4}, rng)};
  c.forward = [](Tape& t, std::vector<Tensor>& in) {
    return reshape(t, in[0], {6, 16});
  };
  return check_case(std::move(c), rng);
}

double check_sum(Rng& rng) {
  Case c;
  c.inputs = {random_tensor({3, 7}, rng)};
  c.forward = [](Tape& t, std::vector<Tensor>& in) {
    return reshape(t, sum(t, in[0]), {1});
  };
  return check_case(std::move(c), rng);
}

// Full composition of the bridge equations: every bridge parameter plus both
// feature maps receive finite-difference coverage.
double check_bridge(Rng& rng) {
  BridgeConfig cfg;
  cfg.c_ctx = 8;
  cfg.c_task = 5;
  cfg.reduction_ratio = 4;
  cfg.alpha_init = 0.7;
  BridgeState state = make_bridge(cfg, "gc.", rng);
  // Nonzero biases exercise every gradient path.
  for (Parameter* p : state.params()) {
    for (double& v : p->tensor.values_mut()) {
      if (v == 0.0) v = rng.uniform(-0.3, 0.3);
    }
  }

  std::vector<Tensor> inputs = {random_tensor({2, 5, 6, 6}, rng),
                                random_tensor({2, 8, 6, 6}, rng)};
  for (Parameter* p : state.params()) inputs.push_back(p->tensor);

  for (Tensor& t : inputs) t.set_requires_grad(true);
  Tape tape;
  Tensor out = bridge_forward(tape, inputs[0], inputs[1], state);
  Tensor w = random_tensor(out.shape(), rng);
  Tensor loss = sum(tape, mul_elementwise(tape, out, w));
  tape.backward(loss);
  const auto value = [&]() {
    Tape silent(false);
    return weighted_sum_value(bridge_forward(silent, inputs[0], inputs[1], state),
                              w);
  };
  return max_grad_rel_error(inputs, value);
}

double check_detection_loss(Rng& rng) {
  const int classes = 3;
  Tensor raw = random_tensor({2, 5 + classes, 4, 4}, rng, -2.0, 2.0);
  raw.set_requires_grad(true);
  std::vector<ImageTargets> targets(2);
  for (int ni = 0; ni < 2; ++ni) {
    const int npos = rng.next_int(0, 3);
    std::vector<char> taken(16, 0);
    for (int p = 0; p < npos; ++p) {
      CellTarget ct;
      ct.row = rng.next_int(0, 3);
      ct.col = rng.next_int(0, 3);
      if (taken[static_cast<std::size_t>(ct.row * 4 + ct.col)]) continue;
      taken[static_cast<std::size_t>(ct.row * 4 + ct.col)] = 1;
      ct.tx = rng.uniform(0.1, 0.9);
      ct.ty = rng.uniform(0.1, 0.9);
      ct.tw = rng.uniform(-0.5, 1.2);
      ct.th = rng.uniform(-0.5, 1.2);
      ct.class_index = rng.next_int(0, classes - 1);
      targets[static_cast<std::size_t>(ni)].positives.push_back(ct);
    }
  }
  LossWeights weights{1.0, 1.0, 1.0};

  Tape tape;
  LossResult lr = detection_loss(tape, raw, targets, weights, classes);
  tape.backward(lr.total);
  std::vector<Tensor> inputs = {raw};
  const auto value = [&]() {
    Tape silent(false);
    return detection_loss(silent, raw, targets, weights, classes)
        .total.scalar_value();
  };
  return max_grad_rel_error(inputs, value);
}

}  // namespace

std::vector<OpGradCheck> run_gradcheck_suite(std::uint64_t seed, int cases,
                                             double tolerance) {
  if (cases < 1) throw ConfigError("gradcheck requires cases >= 1");

  struct Entry {
    const char* name;
    std::function<double(Rng&)> run;
  };
  const std::vector<Entry> entries = {
      {"conv2d", [](Rng& r) { return check_conv2d(r, false); }},
      {"conv2d_7x7_pad3", [](Rng& r) { return check_conv2d(r, true); }},
      {"global_avg_pool", check_avg_pool},
      {"global_max_pool", check_max_pool},
      {"linear", check_linear},
      {"sigmoid", check_sigmoid},
      {"relu", check_relu},
      {"mul_elementwise", [](Rng& r) { return check_mul(r, 0); }},
      {"mul_channel_mask", [](Rng& r) { return check_mul(r, 1); }},
      {"mul_spatial_mask", [](Rng& r) { return check_mul(r, 2); }},
      {"add", check_add},
      {"scale", check_scale},
      {"reshape", check_reshape},
      {"sum", check_sum},
      {"bridge_composed", check_bridge},
      {"detection_loss", check_detection_loss},
  };

  std::vector<OpGradCheck> results;
  results.reserve(entries.size());
  for (const Entry& e : entries) {
    OpGradCheck r;
    r.op = e.name;
    for (int c = 0; c < cases; ++c) {
      Rng rng = substream(seed, e.name, static_cast<std::uint64_t>(c));
      r.max_rel_err = std::max(r.max_rel_err, e.run(rng));
    }
    r.pass = r.max_rel_err < tolerance;
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace arc
