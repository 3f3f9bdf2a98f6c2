// Copyright 2026 The afx Authors.
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

#include "afx/tensor/ops.hpp"

#include <algorithm>
#include <cmath>

#include "afx/error.hpp"

namespace afx::ops {

using detail::Node;

namespace {

Node& parent(Node& self, std::size_t i) { return *self.parents[i]; }

void require_rank2(const Tensor& t, const char* what) {
  if (t.rank() != 2) {
    fail(ErrorCode::kShapeError, std::string(what) + " expects a 2-D tensor, got " +
                                     shape_string(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    fail(ErrorCode::kShapeError, std::string(what) + ": " + shape_string(a.shape()) + " vs " +
                                     shape_string(b.shape()));
  }
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  auto x = a.data();
  auto y = b.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    for (std::size_t k = 0; k < 2; ++k) {
      Node& p = parent(self, k);
      if (!p.requires_grad) continue;
      auto& g = p.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  auto x = a.data();
  auto y = b.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    Node& pa = parent(self, 0);
    Node& pb = parent(self, 1);
    if (pa.requires_grad) {
      auto& g = pa.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pb.data[i];
    }
    if (pb.requires_grad) {
      auto& g = pb.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pa.data[i];
    }
  });
}

Tensor scale(const Tensor& a, double factor) {
  auto x = a.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * factor;
  return make_result(a.shape(), std::move(out), {a}, [factor](Node& self) {
    auto& g = parent(self, 0).grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * factor;
  });
}

Tensor sum(const Tensor& a) {
  double total = 0.0;
  for (double v : a.data()) total += v;
  return make_result({1}, {total}, {a}, [](Node& self) {
    auto& g = parent(self, 0).grad_buffer();
    for (double& v : g) v += self.grad[0];
  });
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_numel(shape) != a.numel()) {
    fail(ErrorCode::kShapeError, "reshape " + shape_string(a.shape()) + " to " + shape_string(shape));
  }
  std::vector<double> out(a.data().begin(), a.data().end());
  return make_result(std::move(shape), std::move(out), {a}, [](Node& self) {
    auto& g = parent(self, 0).grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    fail(ErrorCode::kShapeError, "matmul " + shape_string(a.shape()) + " · " + shape_string(b.shape()));
  }
  auto x = a.data();
  auto y = b.data();
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double* row = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double s = x[i * k + p];
      const double* brow = y.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += s * brow[j];
    }
  }
  return make_result({m, n}, std::move(out), {a, b}, [m, k, n](Node& self) {
    Node& pa = parent(self, 0);
    Node& pb = parent(self, 1);
    const double* g = self.grad.data();
    if (pa.requires_grad) {
      auto& ga = pa.grad_buffer();
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          const double* brow = pb.data.data() + p * n;
          const double* grow = g + i * n;
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
          ga[i * k + p] += acc;
        }
      }
    }
    if (pb.requires_grad) {
      auto& gb = pb.grad_buffer();
      for (std::size_t i = 0; i < m; ++i) {
        const double* grow = g + i * n;
        for (std::size_t p = 0; p < k; ++p) {
          const double s = pa.data[i * k + p];
          double* gbrow = gb.data() + p * n;
          for (std::size_t j = 0; j < n; ++j) gbrow[j] += s * grow[j];
        }
      }
    }
  });
}

Tensor transpose(const Tensor& a) {
  require_rank2(a, "transpose");
  const std::size_t m = a.dim(0), n = a.dim(1);
  auto x = a.data();
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = x[i * n + j];
  return make_result({n, m}, std::move(out), {a}, [m, n](Node& self) {
    auto& g = parent(self, 0).grad_buffer();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) g[i * n + j] += self.grad[j * m + i];
  });
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  require_rank2(x, "linear input");
  require_rank2(w, "linear weight");
  const std::size_t m = x.dim(0), in = x.dim(1), out_dim = w.dim(0);
  if (w.dim(1) != in) {
    fail(ErrorCode::kShapeError, "linear: input " + shape_string(x.shape()) + " vs weight " +
                                     shape_string(w.shape()));
  }
  const bool has_bias = b.defined();
  if (has_bias && (b.rank() != 1 || b.dim(0) != out_dim)) {
    fail(ErrorCode::kShapeError, "linear: bias " + shape_string(b.shape()));
  }
  auto xv = x.data();
  auto wv = w.data();
  std::vector<double> out(m * out_dim);
  for (std::size_t i = 0; i < m; ++i) {
    const double* xrow = xv.data() + i * in;
    for (std::size_t o = 0; o < out_dim; ++o) {
      const double* wrow = wv.data() + o * in;
      double acc = has_bias ? b.data()[o] : 0.0;
      for (std::size_t p = 0; p < in; ++p) acc += xrow[p] * wrow[p];
      out[i * out_dim + o] = acc;
    }
  }
  std::vector<Tensor> parents{x, w};
  if (has_bias) parents.push_back(b);
  return make_result({m, out_dim}, std::move(out), std::move(parents),
                     [m, in, out_dim, has_bias](Node& self) {
    Node& px = parent(self, 0);
    Node& pw = parent(self, 1);
    const double* g = self.grad.data();
    if (px.requires_grad) {
      auto& gx = px.grad_buffer();
      for (std::size_t i = 0; i < m; ++i) {
        double* gxrow = gx.data() + i * in;
        for (std::size_t o = 0; o < out_dim; ++o) {
          const double go = g[i * out_dim + o];
          if (go == 0.0) continue;
          const double* wrow = pw.data.data() + o * in;
          for (std::size_t p = 0; p < in; ++p) gxrow[p] += go * wrow[p];
        }
      }
    }
    if (pw.requires_grad) {
      auto& gw = pw.grad_buffer();
      for (std::size_t i = 0; i < m; ++i) {
        const double* xrow = px.data.data() + i * in;
        for (std::size_t o = 0; o < out_dim; ++o) {
          const double go = g[i * out_dim + o];
          if (go == 0.0) continue;
          double* gwrow = gw.data() + o * in;
          for (std::size_t p = 0; p < in; ++p) gwrow[p] += go * xrow[p];
        }
      }
    }
    if (has_bias) {
      Node& pb = parent(self, 2);
      if (pb.requires_grad) {
        auto& gb = pb.grad_buffer();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t o = 0; o < out_dim; ++o) gb[o] += g[i * out_dim + o];
      }
    }
  });
}

Tensor relu(const Tensor& x) {
  auto v = x.data();
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = v[i] > 0.0 ? v[i] : 0.0;
  return make_result(x.shape(), std::move(out), {x}, [](Node& self) {
    Node& p = parent(self, 0);
    auto& g = p.grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (p.data[i] > 0.0) g[i] += self.grad[i];
    }
  });
}

Tensor softmax_rows(const Tensor& x) {
  require_rank2(x, "softmax_rows");
  const std::size_t m = x.dim(0), n = x.dim(1);
  auto v = x.data();
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = v.data() + i * n;
    const double peak = *std::max_element(row, row + n);
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      out[i * n + j] = std::exp(row[j] - peak);
      total += out[i * n + j];
    }
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] /= total;
  }
  return make_result({m, n}, std::move(out), {x}, [m, n](Node& self) {
    auto& g = parent(self, 0).grad_buffer();
    for (std::size_t i = 0; i < m; ++i) {
      const double* y = self.data.data() + i * n;
      const double* gy = self.grad.data() + i * n;
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += gy[j] * y[j];
      for (std::size_t j = 0; j < n; ++j) g[i * n + j] += y[j] * (gy[j] - dot);
    }
  });
}

Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t count) {
  require_rank2(x, "slice_cols");
  const std::size_t m = x.dim(0), n = x.dim(1);
  if (count == 0 || begin + count > n) {
    fail(ErrorCode::kShapeError, "slice_cols out of range for " + shape_string(x.shape()));
  }
  auto v = x.data();
  std::vector<double> out(m * count);
  for (std::size_t i = 0; i < m; ++i)
    std::copy_n(v.data() + i * n + begin, count, out.data() + i * count);
  return make_result({m, count}, std::move(out), {x}, [m, n, begin, count](Node& self) {
    auto& g = parent(self, 0).grad_buffer();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < count; ++j) g[i * n + begin + j] += self.grad[i * count + j];
  });
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) fail(ErrorCode::kShapeError, "concat_cols of nothing");
  const std::size_t m = parts[0].dim(0);
  std::vector<std::size_t> widths;
  std::size_t n = 0;
  for (const Tensor& t : parts) {
    require_rank2(t, "concat_cols");
    if (t.dim(0) != m) fail(ErrorCode::kShapeError, "concat_cols row mismatch");
    widths.push_back(t.dim(1));
    n += t.dim(1);
  }
  std::vector<double> out(m * n);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    auto v = parts[k].data();
    for (std::size_t i = 0; i < m; ++i)
      std::copy_n(v.data() + i * widths[k], widths[k], out.data() + i * n + offset);
    offset += widths[k];
  }
  return make_result({m, n}, std::move(out), {parts.begin(), parts.end()},
                     [m, n, widths](Node& self) {
    std::size_t offset = 0;
    for (std::size_t k = 0; k < widths.size(); ++k) {
      Node& p = parent(self, k);
      if (p.requires_grad) {
        auto& g = p.grad_buffer();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < widths[k]; ++j)
            g[i * widths[k] + j] += self.grad[i * n + offset + j];
      }
      offset += widths[k];
    }
  });
}

Tensor stack_rows(std::span<const Tensor> rows) {
  if (rows.empty()) fail(ErrorCode::kShapeError, "stack_rows of nothing");
  const std::size_t n = rows[0].numel();
  std::vector<double> out;
  out.reserve(rows.size() * n);
  for (const Tensor& t : rows) {
    if (t.numel() != n) fail(ErrorCode::kShapeError, "stack_rows width mismatch");
    out.insert(out.end(), t.data().begin(), t.data().end());
  }
  const std::size_t m = rows.size();
  return make_result({m, n}, std::move(out), {rows.begin(), rows.end()}, [m, n](Node& self) {
    for (std::size_t i = 0; i < m; ++i) {
      Node& p = parent(self, i);
      if (!p.requires_grad) continue;
      auto& g = p.grad_buffer();
      for (std::size_t j = 0; j < n; ++j) g[j] += self.grad[i * n + j];
    }
  });
}

Tensor mean_rows(const Tensor& x) {
  require_rank2(x, "mean_rows");
  const std::size_t m = x.dim(0), n = x.dim(1);
  auto v = x.data();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j] += v[i * n + j];
  for (double& o : out) o /= static_cast<double>(m);
  return make_result({1, n}, std::move(out), {x}, [m, n](Node& self) {
    auto& g = parent(self, 0).grad_buffer();
    const double inv = 1.0 / static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) g[i * n + j] += self.grad[j] * inv;
  });
}

Tensor layer_norm_rows(const Tensor& x, const Tensor& gain, const Tensor& bias, double epsilon) {
  require_rank2(x, "layer_norm");
  const std::size_t m = x.dim(0), n = x.dim(1);
  if (gain.numel() != n || bias.numel() != n) {
    fail(ErrorCode::kShapeError, "layer_norm: gain/bias width does not match " + shape_string(x.shape()));
  }
  auto v = x.data();
  auto gv = gain.data();
  auto bv = bias.data();
  std::vector<double> normed(m * n);
  std::vector<double> inv_std(m);
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = v.data() + i * n;
    double mean = 0.0;
    for (std::size_t j = 0; j < n; ++j) mean += row[j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) var += (row[j] - mean) * (row[j] - mean);
    var /= static_cast<double>(n);
    inv_std[i] = 1.0 / std::sqrt(var + epsilon);
    for (std::size_t j = 0; j < n; ++j) {
      normed[i * n + j] = (row[j] - mean) * inv_std[i];
      out[i * n + j] = normed[i * n + j] * gv[j] + bv[j];
    }
  }
  return make_result({m, n}, std::move(out), {x, gain, bias},
                     [m, n, normed = std::move(normed), inv_std = std::move(inv_std)](Node& self) {
    Node& px = parent(self, 0);
    Node& pg = parent(self, 1);
    Node& pb = parent(self, 2);
    const double* g = self.grad.data();
    if (pg.requires_grad) {
      auto& gg = pg.grad_buffer();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) gg[j] += g[i * n + j] * normed[i * n + j];
    }
    if (pb.requires_grad) {
      auto& gb = pb.grad_buffer();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) gb[j] += g[i * n + j];
    }
    if (px.requires_grad) {
      auto& gx = px.grad_buffer();
      std::vector<double> dnormed(n);
      for (std::size_t i = 0; i < m; ++i) {
        double mean_d = 0.0, mean_dx = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          dnormed[j] = g[i * n + j] * pg.data[j];
          mean_d += dnormed[j];
          mean_dx += dnormed[j] * normed[i * n + j];
        }
        mean_d /= static_cast<double>(n);
        mean_dx /= static_cast<double>(n);
        for (std::size_t j = 0; j < n; ++j) {
          gx[i * n + j] += inv_std[i] * (dnormed[j] - mean_d - normed[i * n + j] * mean_dx);
        }
      }
    }
  });
}

Tensor layer_norm_residual(const Tensor& x, const Tensor& sublayer_out, const Tensor& gain,
                           const Tensor& bias, double epsilon) {
  require_same_shape(x, sublayer_out, "layer_norm_residual");
  return layer_norm_rows(add(x, sublayer_out), gain, bias, epsilon);
}

std::size_t conv1d_output_length(std::size_t length, std::size_t window, std::size_t stride) {
  if (length < window) {
    fail(ErrorCode::kInputTooShort, "conv1d needs at least " + std::to_string(window) +
                                        " samples, got " + std::to_string(length));
  }
  return (length - window) / stride + 1;
}

Tensor conv1d(const Tensor& input, const Tensor& weights, const Tensor& bias, std::size_t stride) {
  require_rank2(input, "conv1d input");
  if (weights.rank() != 3) {
    fail(ErrorCode::kShapeError, "conv1d weights must be [out×in×window], got " +
                                     shape_string(weights.shape()));
  }
  const std::size_t c_in = input.dim(0), length = input.dim(1);
  const std::size_t c_out = weights.dim(0), window = weights.dim(2);
  if (weights.dim(1) != c_in) {
    fail(ErrorCode::kShapeError, "conv1d: input has " + std::to_string(c_in) +
                                     " channels, weights expect " + std::to_string(weights.dim(1)));
  }
  if (stride == 0) fail(ErrorCode::kInvalidArgument, "conv1d stride must be positive");
  const bool has_bias = bias.defined();
  if (has_bias && bias.numel() != c_out) fail(ErrorCode::kShapeError, "conv1d bias width");
  const std::size_t out_len = conv1d_output_length(length, window, stride);

  auto x = input.data();
  auto w = weights.data();
  std::vector<double> out(c_out * out_len, 0.0);
  for (std::size_t o = 0; o < c_out; ++o) {
    double* orow = out.data() + o * out_len;
    if (has_bias) std::fill_n(orow, out_len, bias.data()[o]);
    for (std::size_t c = 0; c < c_in; ++c) {
      const double* xrow = x.data() + c * length;
      for (std::size_t k = 0; k < window; ++k) {
        const double wk = w[(o * c_in + c) * window + k];
        for (std::size_t t = 0; t < out_len; ++t) orow[t] += wk * xrow[t * stride + k];
      }
    }
  }
  std::vector<Tensor> parents{input, weights};
  if (has_bias) parents.push_back(bias);
  return make_result({c_out, out_len}, std::move(out), std::move(parents),
                     [c_in, length, c_out, window, stride, out_len, has_bias](Node& self) {
    Node& px = parent(self, 0);
    Node& pw = parent(self, 1);
    const double* g = self.grad.data();
    if (px.requires_grad) {
      auto& gx = px.grad_buffer();
      for (std::size_t o = 0; o < c_out; ++o) {
        const double* grow = g + o * out_len;
        for (std::size_t c = 0; c < c_in; ++c) {
          double* gxrow = gx.data() + c * length;
          for (std::size_t k = 0; k < window; ++k) {
            const double wk = pw.data[(o * c_in + c) * window + k];
            for (std::size_t t = 0; t < out_len; ++t) gxrow[t * stride + k] += wk * grow[t];
          }
        }
      }
    }
    if (pw.requires_grad) {
      auto& gw = pw.grad_buffer();
      for (std::size_t o = 0; o < c_out; ++o) {
        const double* grow = g + o * out_len;
        for (std::size_t c = 0; c < c_in; ++c) {
          const double* xrow = px.data.data() + c * length;
          for (std::size_t k = 0; k < window; ++k) {
            double acc = 0.0;
            for (std::size_t t = 0; t < out_len; ++t) acc += grow[t] * xrow[t * stride + k];
            gw[(o * c_in + c) * window + k] += acc;
          }
        }
      }
    }
    if (has_bias) {
      Node& pb = parent(self, 2);
      if (pb.requires_grad) {
        auto& gb = pb.grad_buffer();
        for (std::size_t o = 0; o < c_out; ++o)
          for (std::size_t t = 0; t < out_len; ++t) gb[o] += g[o * out_len + t];
      }
    }
  });
}

Tensor dropout(const Tensor& x, double p, bool training, std::mt19937_64& rng) {
  if (!(p >= 0.0 && p < 1.0)) {
    fail(ErrorCode::kInvalidProbability, "dropout probability must be in [0, 1), got " + std::to_string(p));
  }
  if (!training || p == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - p);
  std::bernoulli_distribution drop(p);
  auto v = x.data();
  std::vector<double> mask(v.size());
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    mask[i] = drop(rng) ? 0.0 : keep_scale;
    out[i] = v[i] * mask[i];
  }
  return make_result(x.shape(), std::move(out), {x}, [mask = std::move(mask)](Node& self) {
    auto& g = parent(self, 0).grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * mask[i];
  });
}

Tensor softmax_cross_entropy(const Tensor& logits, std::span<const int> labels) {
  require_rank2(logits, "softmax_cross_entropy");
  const std::size_t batch = logits.dim(0), classes = logits.dim(1);
  if (labels.size() != batch) {
    fail(ErrorCode::kLabelError, "got " + std::to_string(labels.size()) + " labels for a batch of " +
                                     std::to_string(batch));
  }
  auto v = logits.data();
  std::vector<double> probs(batch * classes);
  double loss = 0.0;
  for (std::size_t i = 0; i < batch; ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes) {
      fail(ErrorCode::kLabelError, "label " + std::to_string(labels[i]) + " outside [0, " +
                                       std::to_string(classes) + ")");
    }
    const double* row = v.data() + i * classes;
    const double peak = *std::max_element(row, row + classes);
    double total = 0.0;
    for (std::size_t j = 0; j < classes; ++j) total += std::exp(row[j] - peak);
    const double log_norm = peak + std::log(total);
    for (std::size_t j = 0; j < classes; ++j) probs[i * classes + j] = std::exp(row[j] - log_norm);
    loss += log_norm - row[labels[i]];
  }
  loss /= static_cast<double>(batch);
  std::vector<int> targets(labels.begin(), labels.end());
  return make_result({1}, {loss}, {logits},
                     [batch, classes, probs = std::move(probs), targets = std::move(targets)](Node& self) {
    auto& g = parent(self, 0).grad_buffer();
    const double scale = self.grad[0] / static_cast<double>(batch);
    for (std::size_t i = 0; i < batch; ++i) {
      for (std::size_t j = 0; j < classes; ++j) {
        const double onehot = static_cast<int>(j) == targets[i] ? 1.0 : 0.0;
        g[i * classes + j] += scale * (probs[i * classes + j] - onehot);
      }
    }
  });
}

}  // namespace afx::ops
