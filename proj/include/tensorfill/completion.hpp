#pragma once

#include <algorithm>
#include <array>
#include <string>

#include "tensorfill/svt.hpp"
#include "tensorfill/tensor_ops.hpp"
#include "tensorfill/weights.hpp"

namespace tensorfill {

struct CompletionParams {
  double tau = 0.85;          // cumulative-spectrum threshold
  double rho = 1e-2;          // initial ADMM penalty
  double rho_growth = 1.05;   // penalty multiplier per iteration
  int max_iters = 100;
  double tol = 1e-4;          // relative Frobenius change
  int weight_update_every = 1;
  bool use_rearranged_form = true;
};

inline constexpr double kRhoCap = 1e6;

inline void validate(const CompletionParams& p) {
  if (!(p.tau > 0.0 && p.tau < 1.0)) throw ParamError("tau must be in (0,1)");
  if (!(p.rho > 0.0)) throw ParamError("rho must be positive");
  if (!(p.rho_growth >= 1.0)) throw ParamError("rho_growth must be >= 1");
  if (p.max_iters <= 0) throw ParamError("max_iters must be positive");
  if (!(p.tol > 0.0)) throw ParamError("tol must be positive");
  if (p.weight_update_every <= 0) {
    throw ParamError("weight_update_every must be positive");
  }
}

struct CompletionResult {
  Tensor3 data;
  WeightVector weights;
  int iterations = 0;
  int degenerate_spectra = 0;
};

namespace detail {

inline double masked_mean(const Tensor3& y, const Mask3& omega, Index* count) {
  double sum = 0.0;
  Index n = 0;
  const double* py = y.data();
  const std::uint8_t* po = omega.data();
  for (Index i = 0; i < y.size(); ++i) {
    if (po[i]) {
      sum += py[i];
      ++n;
    }
  }
  if (count != nullptr) *count = n;
  return n > 0 ? sum / static_cast<double>(n) : 0.0;
}

// Weighted-nuclear-norm completion by ADMM with per-mode auxiliaries and an
// exact data constraint. Generic over the tensor axes; callers choose the
// rearranged or the original form by what they pass in.
inline CompletionResult admm_complete(const Tensor3& y, const Mask3& omega,
                                      const Tensor3& x0,
                                      const CompletionParams& params) {
  validate(params);
  contract(y.same_shape(x0), "admm_complete: x0 shape matches y");
  contract(omega.dim1() == y.dim1() && omega.dim2() == y.dim2() &&
               omega.dim3() == y.dim3(),
           "admm_complete: omega shape matches y");

  const Index n1 = y.dim1(), n2 = y.dim2(), n3 = y.dim3();
  const Index total = y.size();

  CompletionResult res;
  Tensor3 x = x0;
  // Hard constraint: the estimate always equals the data on omega.
  for (Index i = 0; i < total; ++i) {
    if (omega.data()[i]) x.data()[i] = y.data()[i];
  }

  // Fully observed: the constraint pins every entry, nothing to solve.
  if (count_true(omega) == total) {
    if (!all_finite(x)) {
      throw NumericalError(
          "completion diverged: non-finite values at iteration 1");
    }
    res.data = std::move(x);
    res.weights = update_weights(res.data, params.tau, &res.degenerate_spectra);
    res.iterations = 1;
    return res;
  }

  std::array<Tensor3, 3> aux;   // per-mode low-rank targets M_n
  std::array<Tensor3, 3> dual;  // per-mode multipliers Q_n
  for (int n = 0; n < 3; ++n) {
    aux[static_cast<std::size_t>(n)] = x;
    dual[static_cast<std::size_t>(n)] = Tensor3(n1, n2, n3, 0.0);
  }

  WeightVector w;  // starts equal
  double rho = params.rho;
  Tensor3 shifted(n1, n2, n3);
  Tensor3 x_prev(n1, n2, n3);

  for (int iter = 1; iter <= params.max_iters; ++iter) {
    if (!all_finite(x)) {
      throw NumericalError("completion diverged: non-finite values at iteration " +
                           std::to_string(iter));
    }
    x_prev = x;

    // (a) per-mode SVT of the shifted estimate
    bool all_modes_shrunk_to_zero = true;
    for (int n = 0; n < 3; ++n) {
      auto& q = dual[static_cast<std::size_t>(n)];
      for (Index i = 0; i < total; ++i) {
        shifted.data()[i] = x.data()[i] + q.data()[i] / rho;
      }
      const int mode = n + 1;
      aux[static_cast<std::size_t>(n)] =
          fold(svt(unfold(shifted, mode), w[n] / rho), mode, n1, n2, n3);
      if (frobenius_norm(aux[static_cast<std::size_t>(n)]) > 0.0) {
        all_modes_shrunk_to_zero = false;
      }
    }

    // (b) average the mode targets, then re-impose the data on omega
    for (Index i = 0; i < total; ++i) {
      double acc = 0.0;
      for (int n = 0; n < 3; ++n) {
        acc += aux[static_cast<std::size_t>(n)].data()[i] -
               dual[static_cast<std::size_t>(n)].data()[i] / rho;
      }
      x.data()[i] = omega.data()[i] ? y.data()[i] : acc / 3.0;
    }
    if (!all_finite(x)) {
      throw NumericalError("completion diverged: non-finite values at iteration " +
                           std::to_string(iter));
    }

    // (c) dual ascent
    for (int n = 0; n < 3; ++n) {
      auto& q = dual[static_cast<std::size_t>(n)];
      const auto& m = aux[static_cast<std::size_t>(n)];
      for (Index i = 0; i < total; ++i) {
        q.data()[i] += rho * (x.data()[i] - m.data()[i]);
      }
    }

    // (d) penalty growth
    rho = std::min(rho * params.rho_growth, kRhoCap);

    // (e) adaptive weights from the current estimate's spectra
    if (iter % params.weight_update_every == 0) {
      w = update_weights(x, params.tau, &res.degenerate_spectra);
    }

    res.iterations = iter;
    // While every mode target is fully shrunk to zero the iterate is pinned
    // by the projection alone; the change criterion is meaningless until the
    // duals lift at least one spectrum past its threshold.
    if (all_modes_shrunk_to_zero && frobenius_norm(x) > 0.0) continue;
    const double denom = std::max(frobenius_norm(x_prev), 1e-12);
    if (frobenius_distance(x, x_prev) / denom < params.tol) break;
  }

  res.data = std::move(x);
  res.weights = w;
  return res;
}

// Initial estimate for the original (rows x cols x T) form: per-pixel
// temporal mean, then the global valid mean.
inline Tensor3 initial_fill_temporal(const Tensor3& y, const Mask3& omega) {
  Index valid = 0;
  const double global_mean = masked_mean(y, omega, &valid);
  if (valid == 0) {
    throw EmptyInputError("initial_fill: tensor has no valid entry");
  }
  Tensor3 out = y;
  for (Index i = 0; i < y.dim1(); ++i) {
    for (Index j = 0; j < y.dim2(); ++j) {
      double sum = 0.0;
      Index n = 0;
      for (Index t = 0; t < y.dim3(); ++t) {
        if (omega(i, j, t)) {
          sum += y(i, j, t);
          ++n;
        }
      }
      const double pixel_mean = n > 0 ? sum / static_cast<double>(n) : global_mean;
      for (Index t = 0; t < y.dim3(); ++t) {
        if (!omega(i, j, t)) out(i, j, t) = pixel_mean;
      }
    }
  }
  return out;
}

}  // namespace detail

/// Fill the missing entries of a rearranged tensor with climatology-style
/// means: the same (pixel, step) across years, then the pixel mean, then the
/// global valid mean. Valid entries are copied through unchanged.
inline RearrangedTensor initial_fill(const RearrangedTensor& y) {
  Index valid = 0;
  const double global_mean = detail::masked_mean(y.data, y.omega, &valid);
  if (valid == 0) {
    throw EmptyInputError("initial_fill: patch has no valid entry");
  }
  const Index np = y.data.dim1(), nd = y.data.dim2(), ny = y.data.dim3();
  RearrangedTensor out;
  out.data = y.data;
  out.omega = y.omega;
  for (Index p = 0; p < np; ++p) {
    double pixel_sum = 0.0;
    Index pixel_n = 0;
    for (Index d = 0; d < nd; ++d) {
      for (Index yy = 0; yy < ny; ++yy) {
        if (y.omega(p, d, yy)) {
          pixel_sum += y.data(p, d, yy);
          ++pixel_n;
        }
      }
    }
    const double pixel_mean =
        pixel_n > 0 ? pixel_sum / static_cast<double>(pixel_n) : global_mean;
    for (Index d = 0; d < nd; ++d) {
      double day_sum = 0.0;
      Index day_n = 0;
      for (Index yy = 0; yy < ny; ++yy) {
        if (y.omega(p, d, yy)) {
          day_sum += y.data(p, d, yy);
          ++day_n;
        }
      }
      for (Index yy = 0; yy < ny; ++yy) {
        if (!y.omega(p, d, yy)) {
          out.data(p, d, yy) =
              day_n > 0 ? day_sum / static_cast<double>(day_n) : pixel_mean;
        }
      }
    }
  }
  return out;
}

/// Complete a rearranged tensor. Returns the estimate (equal to the input on
/// omega), the final mode weights, and the iteration count.
inline CompletionResult complete(const RearrangedTensor& y,
                                 const CompletionParams& params) {
  const RearrangedTensor filled = initial_fill(y);
  return detail::admm_complete(y.data, y.omega, filled.data, params);
}

/// Complete one patch: rearrange, fill, solve, reshape back. With
/// use_rearranged_form = false the same solver runs on the raw
/// (rows x cols x T) tensor instead. Valid entries pass through unchanged.
inline Patch complete_patch(const Patch& patch, Index nd, Index ny,
                            const CompletionParams& params) {
  Patch out;
  out.rows = patch.rows;
  out.cols = patch.cols;
  out.omega = patch.omega;
  if (params.use_rearranged_form) {
    const RearrangedTensor rt = rearrange(patch, nd, ny);
    CompletionResult res = complete(rt, params);
    RearrangedTensor completed;
    completed.data = std::move(res.data);
    completed.omega = rt.omega;
    out = inverse_rearrange(completed, patch.rows, patch.cols);
  } else {
    if (patch.data.dim3() != nd * ny) {
      throw ShapeError("complete_patch: T != nd*ny");
    }
    const Tensor3 x0 = detail::initial_fill_temporal(patch.data, patch.omega);
    CompletionResult res =
        detail::admm_complete(patch.data, patch.omega, x0, params);
    out.data = std::move(res.data);
  }
  return out;
}

}  // namespace tensorfill
