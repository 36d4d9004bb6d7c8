// Copyright 2026 The trajcast Authors
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

#include "trajcast/ops.hpp"

#include <algorithm>
#include <cmath>

#include "kernels.hpp"
#include "trajcast/errors.hpp"

namespace trajcast
{

namespace
{

void require_matrix(const Var & v, const char * op)
{
  if (v.value().rank() != 2) {
    throw DimensionError(std::string(op) + ": expected a matrix, got " + to_string(v.shape()));
  }
}

[[noreturn]] void mismatch(const char * op, const Shape & a, const Shape & b)
{
  throw DimensionError(std::string(op) + ": incompatible shapes " + to_string(a) + " and " + to_string(b));
}

double fault_sign(debug::Fault f) { return debug::active_fault() == f ? -1.0 : 1.0; }

enum class BinaryKind
{
  add,
  sub,
  mul
};

Var binary(Var a, Var b, BinaryKind kind, const char * name)
{
  const Tensor & av = a.value();
  const Tensor & bv = b.value();
  const bool same = av.shape() == bv.shape();
  const bool a_scalar = !same && av.size() == 1;
  const bool b_scalar = !same && !a_scalar && bv.size() == 1;
  if (!same && !a_scalar && !b_scalar) {
    mismatch(name, av.shape(), bv.shape());
  }
  Tensor out(a_scalar ? bv.shape() : av.shape());
  const std::size_t n = out.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double x = av[a_scalar ? 0 : i];
    const double y = bv[b_scalar ? 0 : i];
    switch (kind) {
      case BinaryKind::add: out[i] = x + y; break;
      case BinaryKind::sub: out[i] = x - y; break;
      case BinaryKind::mul: out[i] = x * y; break;
    }
  }
  return a.graph()->record(
    std::move(out), {a, b}, [a, b, kind, a_scalar, b_scalar](Graph & g, const Tensor &, const Tensor & dy) {
      const std::size_t n = dy.size();
      if (a.requires_grad()) {
        Tensor & da = g.grad_buffer(a);
        const Tensor & bv = b.value();
        for (std::size_t i = 0; i < n; ++i) {
          const double local = kind == BinaryKind::mul ? bv[b_scalar ? 0 : i] : 1.0;
          da[a_scalar ? 0 : i] += dy[i] * local;
        }
      }
      if (b.requires_grad()) {
        Tensor & db = g.grad_buffer(b);
        const Tensor & av = a.value();
        for (std::size_t i = 0; i < n; ++i) {
          double local = 1.0;
          if (kind == BinaryKind::sub) {
            local = -1.0;
          } else if (kind == BinaryKind::mul) {
            local = av[a_scalar ? 0 : i];
          }
          db[b_scalar ? 0 : i] += dy[i] * local;
        }
      }
    });
}

// `deriv(x, y)` is dy/dx expressed through the input x and output y.
template <typename Fwd, typename Deriv>
Var unary(Var x, Fwd fwd, Deriv deriv)
{
  const Tensor & xv = x.value();
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) {
    out[i] = fwd(xv[i]);
  }
  return x.graph()->record(std::move(out), {x}, [x, deriv](Graph & g, const Tensor & y, const Tensor & dy) {
    Tensor & dx = g.grad_buffer(x);
    const Tensor & xv = x.value();
    for (std::size_t i = 0; i < dy.size(); ++i) {
      dx[i] += dy[i] * deriv(xv[i], y[i]);
    }
  });
}

}  // namespace

Var matmul(Var a, Var b)
{
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    mismatch("matmul", a.shape(), b.shape());
  }
  Tensor out({m, n});
  kernels::gemm_nn(m, n, k, a.value().ptr(), b.value().ptr(), out.ptr());
  return a.graph()->record(std::move(out), {a, b}, [a, b, m, n, k](Graph & g, const Tensor &, const Tensor & dy) {
    const double s = fault_sign(debug::Fault::matmul_backward_sign);
    if (a.requires_grad()) {
      // dA += dC . B^T
      Tensor tmp({m, k});
      kernels::gemm_nt(m, k, n, dy.ptr(), b.value().ptr(), tmp.ptr());
      Tensor & da = g.grad_buffer(a);
      for (std::size_t i = 0; i < da.size(); ++i) {
        da[i] += s * tmp[i];
      }
    }
    if (b.requires_grad()) {
      // dB += A^T . dC
      kernels::gemm_tn(k, n, m, a.value().ptr(), dy.ptr(), g.grad_buffer(b).ptr());
    }
  });
}

Var linear(Var x, Var weight, Var bias)
{
  require_matrix(x, "linear");
  require_matrix(weight, "linear");
  const std::size_t n = x.rows(), in = x.cols(), out_dim = weight.rows();
  if (weight.cols() != in) {
    mismatch("linear", x.shape(), weight.shape());
  }
  const bool has_bias = bias.valid();
  if (has_bias && bias.shape() != Shape{1, out_dim}) {
    mismatch("linear (bias)", weight.shape(), bias.shape());
  }
  Tensor out({n, out_dim});
  if (has_bias) {
    for (std::size_t i = 0; i < n; ++i) {
      std::copy_n(bias.value().ptr(), out_dim, out.ptr() + i * out_dim);
    }
  }
  kernels::gemm_nt(n, out_dim, in, x.value().ptr(), weight.value().ptr(), out.ptr());
  std::vector<Var> inputs{x, weight};
  if (has_bias) {
    inputs.push_back(bias);
  }
  return x.graph()->record(
    std::move(out), inputs, [x, weight, bias, has_bias, n, in, out_dim](Graph & g, const Tensor &, const Tensor & dy) {
      if (x.requires_grad()) {
        kernels::gemm_nn(n, in, out_dim, dy.ptr(), weight.value().ptr(), g.grad_buffer(x).ptr());
      }
      if (weight.requires_grad()) {
        kernels::gemm_tn(out_dim, in, n, dy.ptr(), x.value().ptr(), g.grad_buffer(weight).ptr());
      }
      if (has_bias && bias.requires_grad()) {
        Tensor & db = g.grad_buffer(bias);
        for (std::size_t i = 0; i < n; ++i) {
          kernels::axpy(1.0, dy.ptr() + i * out_dim, db.ptr(), out_dim);
        }
      }
    });
}

Var linear(Var x, Var weight) { return linear(x, weight, Var{}); }

Var add(Var a, Var b) { return binary(a, b, BinaryKind::add, "add"); }
Var sub(Var a, Var b) { return binary(a, b, BinaryKind::sub, "sub"); }
Var mul(Var a, Var b) { return binary(a, b, BinaryKind::mul, "mul"); }

Var scale(Var x, double factor)
{
  return unary(x, [factor](double v) { return factor * v; }, [factor](double, double) { return factor; });
}

Var add_scalar(Var x, double offset)
{
  return unary(x, [offset](double v) { return v + offset; }, [](double, double) { return 1.0; });
}

Var sigmoid(Var x)
{
  return unary(
    x,
    [](double v) {
      if (v >= 0.0) {
        return 1.0 / (1.0 + std::exp(-v));
      }
      const double e = std::exp(v);
      return e / (1.0 + e);
    },
    [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var x)
{
  return unary(
    x, [](double v) { return std::tanh(v); },
    [](double, double y) { return fault_sign(debug::Fault::tanh_backward_sign) * (1.0 - y * y); });
}

Var relu(Var x)
{
  return unary(x, [](double v) { return v > 0.0 ? v : 0.0; }, [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Var concat(std::span<const Var> parts, std::size_t axis)
{
  if (parts.empty()) {
    throw ContractError("concat: no inputs");
  }
  if (axis > 1) {
    throw DimensionError("concat: axis must be 0 or 1");
  }
  for (const auto & p : parts) {
    require_matrix(p, "concat");
  }
  const Shape & first = parts[0].shape();
  std::size_t total = 0;
  for (const auto & p : parts) {
    if (p.shape()[1 - axis] != first[1 - axis]) {
      mismatch("concat", first, p.shape());
    }
    total += p.shape()[axis];
  }
  if (parts.size() == 1) {
    return parts[0];
  }
  const std::size_t rows = axis == 0 ? total : first[0];
  const std::size_t cols = axis == 1 ? total : first[1];
  Tensor out({rows, cols});
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const auto & p : parts) {
    offsets.push_back(off);
    const Tensor & v = p.value();
    if (axis == 0) {
      std::copy(v.data().begin(), v.data().end(), out.ptr() + off * cols);
    } else {
      for (std::size_t r = 0; r < rows; ++r) {
        std::copy_n(v.ptr() + r * v.dim(1), v.dim(1), out.ptr() + r * cols + off);
      }
    }
    off += v.dim(axis);
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return parts[0].graph()->record(
    std::move(out), inputs, [inputs, offsets, axis, cols](Graph & g, const Tensor &, const Tensor & dy) {
      for (std::size_t k = 0; k < inputs.size(); ++k) {
        const Var & p = inputs[k];
        if (!p.requires_grad()) {
          continue;
        }
        Tensor & dp = g.grad_buffer(p);
        const std::size_t pr = dp.dim(0), pc = dp.dim(1);
        for (std::size_t r = 0; r < pr; ++r) {
          const double * src =
            axis == 0 ? dy.ptr() + (offsets[k] + r) * cols : dy.ptr() + r * cols + offsets[k];
          kernels::axpy(1.0, src, dp.ptr() + r * pc, pc);
        }
      }
    });
}

Var concat(std::initializer_list<Var> parts, std::size_t axis)
{
  return concat(std::span<const Var>(parts.begin(), parts.size()), axis);
}

Var slice_cols(Var x, std::size_t begin, std::size_t end)
{
  require_matrix(x, "slice_cols");
  if (begin >= end || end > x.cols()) {
    throw DimensionError(
      "slice_cols: range [" + std::to_string(begin) + "," + std::to_string(end) + ") out of " +
      to_string(x.shape()));
  }
  const std::size_t rows = x.rows(), cols = x.cols(), w = end - begin;
  Tensor out({rows, w});
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(x.value().ptr() + r * cols + begin, w, out.ptr() + r * w);
  }
  return x.graph()->record(std::move(out), {x}, [x, begin, rows, cols, w](Graph & g, const Tensor &, const Tensor & dy) {
    Tensor & dx = g.grad_buffer(x);
    for (std::size_t r = 0; r < rows; ++r) {
      kernels::axpy(1.0, dy.ptr() + r * w, dx.ptr() + r * cols + begin, w);
    }
  });
}

Var select_rows(Var x, std::vector<std::size_t> rows)
{
  require_matrix(x, "select_rows");
  if (rows.empty()) {
    throw ContractError("select_rows: empty row list");
  }
  const std::size_t cols = x.cols();
  for (auto r : rows) {
    if (r >= x.rows()) {
      throw DimensionError("select_rows: row " + std::to_string(r) + " out of " + to_string(x.shape()));
    }
  }
  Tensor out({rows.size(), cols});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy_n(x.value().ptr() + rows[i] * cols, cols, out.ptr() + i * cols);
  }
  return x.graph()->record(std::move(out), {x}, [x, rows = std::move(rows), cols](Graph & g, const Tensor &, const Tensor & dy) {
    Tensor & dx = g.grad_buffer(x);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      kernels::axpy(1.0, dy.ptr() + i * cols, dx.ptr() + rows[i] * cols, cols);
    }
  });
}

Var maxpool_rows(Var x)
{
  require_matrix(x, "maxpool_rows");
  const std::size_t n = x.rows(), d = x.cols();
  const Tensor & xv = x.value();
  Tensor out({1, d});
  std::vector<std::size_t> argmax(d, 0);
  for (std::size_t c = 0; c < d; ++c) {
    double best = xv.at(0, c);
    for (std::size_t r = 1; r < n; ++r) {
      if (xv.at(r, c) > best) {
        best = xv.at(r, c);
        argmax[c] = r;
      }
    }
    out[c] = best;
  }
  return x.graph()->record(std::move(out), {x}, [x, argmax = std::move(argmax), d](Graph & g, const Tensor &, const Tensor & dy) {
    Tensor & dx = g.grad_buffer(x);
    for (std::size_t c = 0; c < d; ++c) {
      dx.at(argmax[c], c) += dy[c];
    }
  });
}

Var repeat_rows(Var x, std::size_t n)
{
  require_matrix(x, "repeat_rows");
  if (x.rows() != 1) {
    throw DimensionError("repeat_rows: expected a single row, got " + to_string(x.shape()));
  }
  if (n == 0) {
    throw ContractError("repeat_rows: n must be positive");
  }
  const std::size_t d = x.cols();
  Tensor out({n, d});
  for (std::size_t r = 0; r < n; ++r) {
    std::copy_n(x.value().ptr(), d, out.ptr() + r * d);
  }
  return x.graph()->record(std::move(out), {x}, [x, n, d](Graph & g, const Tensor &, const Tensor & dy) {
    Tensor & dx = g.grad_buffer(x);
    for (std::size_t r = 0; r < n; ++r) {
      kernels::axpy(1.0, dy.ptr() + r * d, dx.ptr(), d);
    }
  });
}

Var sum(Var x)
{
  double s = 0.0;
  for (double v : x.value().data()) {
    s += v;
  }
  return x.graph()->record(Tensor::scalar(s), {x}, [x](Graph & g, const Tensor &, const Tensor & dy) {
    Tensor & dx = g.grad_buffer(x);
    for (auto & v : dx.data()) {
      v += dy[0];
    }
  });
}

Var row_sum(Var x)
{
  require_matrix(x, "row_sum");
  const std::size_t n = x.rows(), d = x.cols();
  Tensor out({n, 1});
  for (std::size_t r = 0; r < n; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      s += x.value().at(r, c);
    }
    out[r] = s;
  }
  return x.graph()->record(std::move(out), {x}, [x, n, d](Graph & g, const Tensor &, const Tensor & dy) {
    Tensor & dx = g.grad_buffer(x);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < d; ++c) {
        dx.at(r, c) += dy[r];
      }
    }
  });
}

Var reshape(Var x, Shape shape)
{
  Tensor out = x.value().reshaped(std::move(shape));
  return x.graph()->record(std::move(out), {x}, [x](Graph & g, const Tensor &, const Tensor & dy) {
    Tensor & dx = g.grad_buffer(x);
    for (std::size_t i = 0; i < dy.size(); ++i) {
      dx[i] += dy[i];
    }
  });
}

}  // namespace trajcast
