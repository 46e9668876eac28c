// Copyright (c) 2026 The HINT-CIR Authors. All Rights Reserved.
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

#include "hint/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hint/errors.hpp"
#include "hint/kernels.hpp"

namespace hint {
namespace {

using kernels::Trans;

Graph& graph_of(Var a) {
  if (!a.graph) throw GraphError("use of an unbound Var");
  return *a.graph;
}

Graph& graph_of(Var a, Var b) {
  if (a.graph != b.graph) throw GraphError("operands belong to different graphs");
  return graph_of(a);
}

Tensor matrix_like(std::size_t rows, std::size_t cols) { return Tensor({rows, cols}); }

std::string shapes(const Tensor& a, const Tensor& b) { return to_string(a.shape()) + " and " + to_string(b.shape()); }

}  // namespace

Var add(Var a, Var b) {
  Graph& g = graph_of(a, b);
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  if (!x.same_shape(y)) throw DimensionError("add: shape mismatch between " + shapes(x, y));
  Tensor out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += y[i];
  return g.record(OpKind::add, std::move(out), {a, b}, [](const Graph&, const Tensor& go, std::span<Tensor* const> gi) {
    for (Tensor* t : gi)
      if (t)
        for (std::size_t i = 0; i < go.size(); ++i) (*t)[i] += go[i];
  });
}

Var add_row(Var xv, Var bv) {
  Graph& g = graph_of(xv, bv);
  const Tensor& x = xv.value();
  const Tensor& b = bv.value();
  if (b.size() != x.cols()) throw DimensionError("add_row: cannot broadcast " + shapes(b, x));
  Tensor out = matrix_like(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) out.at(r, c) = x.at(r, c) + b[c];
  return g.record(OpKind::add_row, std::move(out), {xv, bv},
                  [](const Graph&, const Tensor& go, std::span<Tensor* const> gi) {
                    const std::size_t n = go.cols();
                    if (gi[0])
                      for (std::size_t i = 0; i < go.size(); ++i) (*gi[0])[i] += go[i];
                    if (gi[1])
                      for (std::size_t i = 0; i < go.size(); ++i) (*gi[1])[i % n] += go[i];
                  });
}

Var mul(Var a, Var b) {
  Graph& g = graph_of(a, b);
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  if (!x.same_shape(y)) throw DimensionError("mul: shape mismatch between " + shapes(x, y));
  Tensor out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= y[i];
  const std::uint32_t ia = a.id, ib = b.id;
  return g.record(OpKind::mul, std::move(out), {a, b},
                  [ia, ib](const Graph& gr, const Tensor& go, std::span<Tensor* const> gi) {
                    const Tensor& xa = gr.value(ia);
                    const Tensor& xb = gr.value(ib);
                    for (std::size_t i = 0; i < go.size(); ++i) {
                      if (gi[0]) (*gi[0])[i] += go[i] * xb[i];
                      if (gi[1]) (*gi[1])[i] += go[i] * xa[i];
                    }
                  });
}

Var scale(Var xv, double factor) {
  Graph& g = graph_of(xv);
  Tensor out = xv.value();
  for (double& v : out.data()) v *= factor;
  return g.record(OpKind::scale, std::move(out), {xv},
                  [factor](const Graph&, const Tensor& go, std::span<Tensor* const> gi) {
                    for (std::size_t i = 0; i < go.size(); ++i) (*gi[0])[i] += factor * go[i];
                  });
}

Var matmul(Var av, Var bv) {
  Graph& g = graph_of(av, bv);
  const Tensor& a = av.value();
  const Tensor& b = bv.value();
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) throw DimensionError("matmul: inner dimensions differ for " + shapes(a, b));
  Tensor out = matrix_like(m, n);
  kernels::gemm(Trans::no, Trans::no, m, n, k, a.data().data(), b.data().data(), out.data().data(), false);
  const std::uint32_t ia = av.id, ib = bv.id;
  return g.record(OpKind::matmul, std::move(out), {av, bv},
                  [ia, ib, m, n, k](const Graph& gr, const Tensor& go, std::span<Tensor* const> gi) {
                    if (gi[0])  // dA += dC * B^T
                      kernels::gemm(Trans::no, Trans::yes, m, k, n, go.data().data(), gr.value(ib).data().data(),
                                    gi[0]->data().data(), true);
                    if (gi[1])  // dB += A^T * dC
                      kernels::gemm(Trans::yes, Trans::no, k, n, m, gr.value(ia).data().data(), go.data().data(),
                                    gi[1]->data().data(), true);
                  });
}

Var transpose(Var xv) {
  Graph& g = graph_of(xv);
  const Tensor& x = xv.value();
  const std::size_t m = x.rows(), n = x.cols();
  Tensor out = matrix_like(n, m);
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < n; ++c) out.at(c, r) = x.at(r, c);
  return g.record(OpKind::transpose, std::move(out), {xv},
                  [m, n](const Graph&, const Tensor& go, std::span<Tensor* const> gi) {
                    for (std::size_t r = 0; r < m; ++r)
                      for (std::size_t c = 0; c < n; ++c) (*gi[0])[r * n + c] += go[c * m + r];
                  });
}

Var softmax(Var xv, Axis axis) {
  Graph& g = graph_of(xv);
  const Tensor& x = xv.value();
  const std::size_t m = x.rows(), n = x.cols();
  // Walk one "line" (a row or a column) with a fixed stride.
  const std::size_t lines = axis == Axis::rows ? m : n;
  const std::size_t len = axis == Axis::rows ? n : m;
  const std::size_t line_step = axis == Axis::rows ? n : 1;
  const std::size_t elem_step = axis == Axis::rows ? 1 : n;
  if (len == 0) throw ArgumentError("softmax over an empty axis");

  Tensor out = matrix_like(m, n);
  for (std::size_t l = 0; l < lines; ++l) {
    const std::size_t base = l * line_step;
    double hi = x[base];
    for (std::size_t e = 1; e < len; ++e) hi = std::max(hi, x[base + e * elem_step]);
    double total = 0.0;
    for (std::size_t e = 0; e < len; ++e) {
      const double v = std::exp(x[base + e * elem_step] - hi);
      out[base + e * elem_step] = v;
      total += v;
    }
    for (std::size_t e = 0; e < len; ++e) out[base + e * elem_step] /= total;
  }
  const std::uint32_t self = static_cast<std::uint32_t>(g.size());
  return g.record(OpKind::softmax, std::move(out), {xv},
                  [self, lines, len, line_step, elem_step](const Graph& gr, const Tensor& go,
                                                           std::span<Tensor* const> gi) {
                    const Tensor& y = gr.value(self);
                    Tensor& dx = *gi[0];
                    for (std::size_t l = 0; l < lines; ++l) {
                      const std::size_t base = l * line_step;
                      double inner = 0.0;
                      for (std::size_t e = 0; e < len; ++e) {
                        const std::size_t i = base + e * elem_step;
                        inner += go[i] * y[i];
                      }
                      for (std::size_t e = 0; e < len; ++e) {
                        const std::size_t i = base + e * elem_step;
                        dx[i] += y[i] * (go[i] - inner);
                      }
                    }
                  });
}

Var log_softmax(Var xv) {
  Graph& g = graph_of(xv);
  const Tensor& x = xv.value();
  const std::size_t m = x.rows(), n = x.cols();
  Tensor out = matrix_like(m, n);
  for (std::size_t r = 0; r < m; ++r) {
    const auto row = x.row(r);
    const double hi = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (double v : row) total += std::exp(v - hi);
    const double lse = hi + std::log(total);
    for (std::size_t c = 0; c < n; ++c) out.at(r, c) = row[c] - lse;
  }
  const std::uint32_t self = static_cast<std::uint32_t>(g.size());
  return g.record(OpKind::log_softmax, std::move(out), {xv},
                  [self, m, n](const Graph& gr, const Tensor& go, std::span<Tensor* const> gi) {
                    const Tensor& y = gr.value(self);
                    for (std::size_t r = 0; r < m; ++r) {
                      double total = 0.0;
                      for (std::size_t c = 0; c < n; ++c) total += go[r * n + c];
                      for (std::size_t c = 0; c < n; ++c)
                        (*gi[0])[r * n + c] += go[r * n + c] - std::exp(y[r * n + c]) * total;
                    }
                  });
}

Var layer_norm(Var xv, Var gv, Var bv, double eps) {
  Graph& g = graph_of(xv, gv);
  graph_of(xv, bv);
  if (!(eps > 0.0)) throw ArgumentError("layer_norm: eps must be positive");
  const Tensor& x = xv.value();
  const std::size_t m = x.rows(), d = x.cols();
  if (gv.value().size() != d || bv.value().size() != d) {
    throw DimensionError("layer_norm: gamma/beta " + to_string(gv.shape()) + "/" + to_string(bv.shape()) +
                         " do not match width of " + to_string(x.shape()));
  }
  const Tensor& gamma = gv.value();
  const Tensor& beta = bv.value();
  Tensor out = matrix_like(m, d);
  std::vector<double> normed(m * d);
  std::vector<double> inv_std(m);
  for (std::size_t r = 0; r < m; ++r) {
    const auto row = x.row(r);
    double mu = 0.0;
    for (double v : row) mu += v;
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (double v : row) var += (v - mu) * (v - mu);
    var /= static_cast<double>(d);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < d; ++c) {
      normed[r * d + c] = (row[c] - mu) * inv_std[r];
      out.at(r, c) = normed[r * d + c] * gamma[c] + beta[c];
    }
  }
  const std::uint32_t ig = gv.id;
  return g.record(OpKind::layer_norm, std::move(out), {xv, gv, bv},
                  [m, d, ig, normed = std::move(normed), inv_std = std::move(inv_std)](
                      const Graph& gr, const Tensor& go, std::span<Tensor* const> gi) {
                    const Tensor& gamma_v = gr.value(ig);
                    for (std::size_t r = 0; r < m; ++r) {
                      double mean_dn = 0.0, mean_dn_n = 0.0;
                      for (std::size_t c = 0; c < d; ++c) {
                        const std::size_t i = r * d + c;
                        const double dn = go[i] * gamma_v[c];
                        mean_dn += dn;
                        mean_dn_n += dn * normed[i];
                        if (gi[1]) (*gi[1])[c] += go[i] * normed[i];
                        if (gi[2]) (*gi[2])[c] += go[i];
                      }
                      if (!gi[0]) continue;
                      mean_dn /= static_cast<double>(d);
                      mean_dn_n /= static_cast<double>(d);
                      for (std::size_t c = 0; c < d; ++c) {
                        const std::size_t i = r * d + c;
                        const double dn = go[i] * gamma_v[c];
                        (*gi[0])[i] += inv_std[r] * (dn - mean_dn - normed[i] * mean_dn_n);
                      }
                    }
                  });
}

Var relu(Var xv) {
  Graph& g = graph_of(xv);
  Tensor out = xv.value();
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  const std::uint32_t ix = xv.id;
  return g.record(OpKind::relu, std::move(out), {xv},
                  [ix](const Graph& gr, const Tensor& go, std::span<Tensor* const> gi) {
                    const Tensor& x = gr.value(ix);
                    for (std::size_t i = 0; i < go.size(); ++i)
                      if (x[i] > 0.0) (*gi[0])[i] += go[i];
                  });
}

Var mean_pool(Var xv) {
  Graph& g = graph_of(xv);
  const Tensor& x = xv.value();
  const std::size_t m = x.rows(), n = x.cols();
  Tensor out = matrix_like(1, n);
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < n; ++c) out[c] += x.at(r, c);
  for (double& v : out.data()) v /= static_cast<double>(m);
  return g.record(OpKind::mean_pool, std::move(out), {xv},
                  [m, n](const Graph&, const Tensor& go, std::span<Tensor* const> gi) {
                    const double w = 1.0 / static_cast<double>(m);
                    for (std::size_t r = 0; r < m; ++r)
                      for (std::size_t c = 0; c < n; ++c) (*gi[0])[r * n + c] += w * go[c];
                  });
}

Var concat_rows(Var a, Var b) {
  const Var parts[] = {a, b};
  return concat_rows(parts);
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ArgumentError("concat_rows of nothing");
  Graph& g = graph_of(parts[0]);
  const std::size_t n = parts[0].cols();
  std::size_t m = 0;
  for (const Var& p : parts) {
    graph_of(parts[0], p);
    if (p.cols() != n) {
      throw DimensionError("concat_rows: width mismatch between " + shapes(parts[0].value(), p.value()));
    }
    m += p.rows();
  }
  Tensor out = matrix_like(m, n);
  std::vector<std::size_t> offsets;
  std::size_t at = 0;
  for (const Var& p : parts) {
    offsets.push_back(at);
    std::copy(p.value().data().begin(), p.value().data().end(), out.data().begin() + static_cast<std::ptrdiff_t>(at));
    at += p.value().size();
  }
  return g.record(OpKind::concat_rows, std::move(out), std::vector<Var>(parts.begin(), parts.end()),
                  [offsets = std::move(offsets)](const Graph&, const Tensor& go, std::span<Tensor* const> gi) {
                    for (std::size_t p = 0; p < gi.size(); ++p) {
                      if (!gi[p]) continue;
                      for (std::size_t i = 0; i < gi[p]->size(); ++i) (*gi[p])[i] += go[offsets[p] + i];
                    }
                  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ArgumentError("concat_cols of nothing");
  Graph& g = graph_of(parts[0]);
  const std::size_t m = parts[0].rows();
  std::size_t n = 0;
  std::vector<std::size_t> widths;
  for (const Var& p : parts) {
    graph_of(parts[0], p);
    if (p.rows() != m) {
      throw DimensionError("concat_cols: row count mismatch between " + shapes(parts[0].value(), p.value()));
    }
    widths.push_back(p.cols());
    n += p.cols();
  }
  Tensor out = matrix_like(m, n);
  std::size_t c0 = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < v.cols(); ++c) out.at(r, c0 + c) = v.at(r, c);
    c0 += v.cols();
  }
  return g.record(OpKind::concat_cols, std::move(out), std::vector<Var>(parts.begin(), parts.end()),
                  [m, n, widths = std::move(widths)](const Graph&, const Tensor& go, std::span<Tensor* const> gi) {
                    std::size_t c0 = 0;
                    for (std::size_t p = 0; p < gi.size(); ++p) {
                      const std::size_t w = widths[p];
                      if (gi[p])
                        for (std::size_t r = 0; r < m; ++r)
                          for (std::size_t c = 0; c < w; ++c) (*gi[p])[r * w + c] += go[r * n + c0 + c];
                      c0 += w;
                    }
                  });
}

Var slice_rows(Var xv, std::size_t begin, std::size_t end) {
  Graph& g = graph_of(xv);
  const Tensor& x = xv.value();
  if (begin >= end || end > x.rows()) {
    throw ArgumentError("slice_rows: [" + std::to_string(begin) + ", " + std::to_string(end) + ") out of range for " +
                        to_string(x.shape()));
  }
  const std::size_t n = x.cols();
  Tensor out({end - begin, n},
             std::vector<double>(x.data().begin() + static_cast<std::ptrdiff_t>(begin * n),
                                 x.data().begin() + static_cast<std::ptrdiff_t>(end * n)));
  const std::size_t offset = begin * n;
  return g.record(OpKind::slice_rows, std::move(out), {xv},
                  [offset](const Graph&, const Tensor& go, std::span<Tensor* const> gi) {
                    for (std::size_t i = 0; i < go.size(); ++i) (*gi[0])[offset + i] += go[i];
                  });
}

Var slice_cols(Var xv, std::size_t begin, std::size_t end) {
  Graph& g = graph_of(xv);
  const Tensor& x = xv.value();
  if (begin >= end || end > x.cols()) {
    throw ArgumentError("slice_cols: [" + std::to_string(begin) + ", " + std::to_string(end) + ") out of range for " +
                        to_string(x.shape()));
  }
  const std::size_t m = x.rows(), n = x.cols(), w = end - begin;
  Tensor out = matrix_like(m, w);
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < w; ++c) out.at(r, c) = x.at(r, begin + c);
  return g.record(OpKind::slice_cols, std::move(out), {xv},
                  [m, n, w, begin](const Graph&, const Tensor& go, std::span<Tensor* const> gi) {
                    for (std::size_t r = 0; r < m; ++r)
                      for (std::size_t c = 0; c < w; ++c) (*gi[0])[r * n + begin + c] += go[r * w + c];
                  });
}

Var sum(Var xv) {
  Graph& g = graph_of(xv);
  double total = 0.0;
  for (double v : xv.value().data()) total += v;
  return g.record(OpKind::sum, Tensor::scalar(total), {xv},
                  [](const Graph&, const Tensor& go, std::span<Tensor* const> gi) {
                    for (double& v : gi[0]->data()) v += go[0];
                  });
}

Var mean(Var xv) { return scale(sum(xv), 1.0 / static_cast<double>(xv.value().size())); }

Var diagonal(Var xv) {
  Graph& g = graph_of(xv);
  const Tensor& x = xv.value();
  const std::size_t n = x.rows();
  if (x.cols() != n) throw DimensionError("diagonal of non-square " + to_string(x.shape()));
  Tensor out = matrix_like(1, n);
  for (std::size_t i = 0; i < n; ++i) out[i] = x.at(i, i);
  return g.record(OpKind::diagonal, std::move(out), {xv},
                  [n](const Graph&, const Tensor& go, std::span<Tensor* const> gi) {
                    for (std::size_t i = 0; i < n; ++i) (*gi[0])[i * n + i] += go[i];
                  });
}

Var max_entry(Var xv) {
  Graph& g = graph_of(xv);
  const Tensor& x = xv.value();
  std::size_t best = 0;
  for (std::size_t i = 1; i < x.size(); ++i)
    if (x[i] > x[best]) best = i;
  return g.record(OpKind::max_entry, Tensor::scalar(x[best]), {xv},
                  [best](const Graph&, const Tensor& go, std::span<Tensor* const> gi) { (*gi[0])[best] += go[0]; });
}

Var logsumexp(Var xv) {
  Graph& g = graph_of(xv);
  const Tensor& x = xv.value();
  const double hi = *std::max_element(x.data().begin(), x.data().end());
  double total = 0.0;
  for (double v : x.data()) total += std::exp(v - hi);
  const double lse = hi + std::log(total);
  const std::uint32_t ix = xv.id;
  return g.record(OpKind::logsumexp, Tensor::scalar(lse), {xv},
                  [ix, lse](const Graph& gr, const Tensor& go, std::span<Tensor* const> gi) {
                    const Tensor& xs = gr.value(ix);
                    for (std::size_t i = 0; i < xs.size(); ++i) (*gi[0])[i] += go[0] * std::exp(xs[i] - lse);
                  });
}

Var normalize_rows(Var xv) {
  Graph& g = graph_of(xv);
  const Tensor& x = xv.value();
  const std::size_t m = x.rows(), n = x.cols();
  Tensor out = matrix_like(m, n);
  std::vector<double> norms(m);
  for (std::size_t r = 0; r < m; ++r) {
    const auto row = x.row(r);
    norms[r] = std::sqrt(kernels::dot(row, row));
    if (!(norms[r] > 0.0)) throw ArgumentError("normalize_rows: row " + std::to_string(r) + " has zero norm");
    for (std::size_t c = 0; c < n; ++c) out.at(r, c) = row[c] / norms[r];
  }
  const std::uint32_t self = static_cast<std::uint32_t>(g.size());
  return g.record(OpKind::normalize_rows, std::move(out), {xv},
                  [self, m, n, norms = std::move(norms)](const Graph& gr, const Tensor& go,
                                                         std::span<Tensor* const> gi) {
                    const Tensor& y = gr.value(self);
                    for (std::size_t r = 0; r < m; ++r) {
                      double proj = 0.0;
                      for (std::size_t c = 0; c < n; ++c) proj += y[r * n + c] * go[r * n + c];
                      for (std::size_t c = 0; c < n; ++c)
                        (*gi[0])[r * n + c] += (go[r * n + c] - y[r * n + c] * proj) / norms[r];
                    }
                  });
}

Var stack(std::span<const Var> scalars, std::size_t rows, std::size_t cols) {
  if (scalars.size() != rows * cols || scalars.empty()) {
    throw DimensionError("stack: " + std::to_string(scalars.size()) + " scalars cannot fill " + std::to_string(rows) +
                         "x" + std::to_string(cols));
  }
  Graph& g = graph_of(scalars[0]);
  Tensor out = matrix_like(rows, cols);
  for (std::size_t i = 0; i < scalars.size(); ++i) {
    graph_of(scalars[0], scalars[i]);
    out[i] = scalars[i].value().item();
  }
  return g.record(OpKind::stack, std::move(out), std::vector<Var>(scalars.begin(), scalars.end()),
                  [](const Graph&, const Tensor& go, std::span<Tensor* const> gi) {
                    for (std::size_t i = 0; i < gi.size(); ++i)
                      if (gi[i]) (*gi[i])[0] += go[i];
                  });
}

}  // namespace hint
