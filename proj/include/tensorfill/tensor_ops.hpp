#pragma once

#include <Eigen/Dense>
#include <string>

#include "tensorfill/types.hpp"

namespace tensorfill {

/// Mode-n unfolding. Rows index dimension `mode`; columns enumerate the two
/// remaining indices in increasing dimension order, the lower-numbered index
/// varying fastest. fold(unfold(x, n), n, dims) == x exactly.
inline Eigen::MatrixXd unfold(const Tensor3& x, int mode) {
  contract(mode >= 1 && mode <= 3, "unfold: mode in {1,2,3}");
  const Index n1 = x.dim1(), n2 = x.dim2(), n3 = x.dim3();
  Eigen::MatrixXd out;
  switch (mode) {
    case 1:
      out.resize(n1, n2 * n3);
      for (Index k = 0; k < n3; ++k)
        for (Index j = 0; j < n2; ++j)
          for (Index i = 0; i < n1; ++i) out(i, j + k * n2) = x(i, j, k);
      break;
    case 2:
      out.resize(n2, n1 * n3);
      for (Index k = 0; k < n3; ++k)
        for (Index j = 0; j < n2; ++j)
          for (Index i = 0; i < n1; ++i) out(j, i + k * n1) = x(i, j, k);
      break;
    default:
      out.resize(n3, n1 * n2);
      for (Index k = 0; k < n3; ++k)
        for (Index j = 0; j < n2; ++j)
          for (Index i = 0; i < n1; ++i) out(k, i + j * n1) = x(i, j, k);
      break;
  }
  return out;
}

/// Exact inverse of unfold under the same column ordering.
inline Tensor3 fold(const Eigen::MatrixXd& m, int mode, Index n1, Index n2,
                    Index n3) {
  contract(mode >= 1 && mode <= 3, "fold: mode in {1,2,3}");
  const Index rows = mode == 1 ? n1 : (mode == 2 ? n2 : n3);
  const Index cols = n1 * n2 * n3 / (rows > 0 ? rows : 1);
  if (n1 < 0 || n2 < 0 || n3 < 0 || m.rows() != rows || m.cols() != cols ||
      rows * cols != n1 * n2 * n3) {
    throw ShapeError("fold: matrix " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()) + " does not match mode-" +
                     std::to_string(mode) + " unfolding of (" +
                     std::to_string(n1) + "," + std::to_string(n2) + "," +
                     std::to_string(n3) + ")");
  }
  Tensor3 out(n1, n2, n3);
  switch (mode) {
    case 1:
      for (Index k = 0; k < n3; ++k)
        for (Index j = 0; j < n2; ++j)
          for (Index i = 0; i < n1; ++i) out(i, j, k) = m(i, j + k * n2);
      break;
    case 2:
      for (Index k = 0; k < n3; ++k)
        for (Index j = 0; j < n2; ++j)
          for (Index i = 0; i < n1; ++i) out(i, j, k) = m(j, i + k * n1);
      break;
    default:
      for (Index k = 0; k < n3; ++k)
        for (Index j = 0; j < n2; ++j)
          for (Index i = 0; i < n1; ++i) out(i, j, k) = m(k, i + j * n1);
      break;
  }
  return out;
}

/// Reshape an (rows x cols x T) patch into (rows*cols x nd x ny): pixel
/// (i, j) flattens row-major to p = i*cols + j, and step t splits year-major
/// into t = y*nd + d. The observation mask is remapped the same way.
inline RearrangedTensor rearrange(const Patch& p, Index nd, Index ny) {
  const Index T = p.data.dim3();
  if (nd <= 0 || ny <= 0 || T != nd * ny) {
    throw ShapeError("rearrange: T=" + std::to_string(T) +
                     " is not nd*ny=" + std::to_string(nd) + "*" +
                     std::to_string(ny));
  }
  contract(p.data.dim1() == p.rows && p.data.dim2() == p.cols,
           "rearrange: patch dims consistent");
  contract(p.omega.same_shape(Mask3(p.rows, p.cols, T)) ||
               (p.omega.dim1() == p.rows && p.omega.dim2() == p.cols &&
                p.omega.dim3() == T),
           "rearrange: omega shape matches data");
  RearrangedTensor rt;
  rt.data = Tensor3(p.rows * p.cols, nd, ny);
  rt.omega = Mask3(p.rows * p.cols, nd, ny);
  for (Index i = 0; i < p.rows; ++i) {
    for (Index j = 0; j < p.cols; ++j) {
      const Index pix = i * p.cols + j;
      for (Index y = 0; y < ny; ++y) {
        for (Index d = 0; d < nd; ++d) {
          const Index t = y * nd + d;
          rt.data(pix, d, y) = p.data(i, j, t);
          rt.omega(pix, d, y) = p.omega(i, j, t);
        }
      }
    }
  }
  return rt;
}

/// Exact inverse of rearrange for a (rows x cols) tile.
inline Patch inverse_rearrange(const RearrangedTensor& rt, Index rows,
                               Index cols) {
  if (rows <= 0 || cols <= 0 || rt.data.dim1() != rows * cols) {
    throw ShapeError("inverse_rearrange: first dimension " +
                     std::to_string(rt.data.dim1()) + " != rows*cols=" +
                     std::to_string(rows) + "*" + std::to_string(cols));
  }
  const Index nd = rt.data.dim2();
  const Index ny = rt.data.dim3();
  Patch p;
  p.rows = rows;
  p.cols = cols;
  p.data = Tensor3(rows, cols, nd * ny);
  p.omega = Mask3(rows, cols, nd * ny);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      const Index pix = i * cols + j;
      for (Index y = 0; y < ny; ++y) {
        for (Index d = 0; d < nd; ++d) {
          const Index t = y * nd + d;
          p.data(i, j, t) = rt.data(pix, d, y);
          p.omega(i, j, t) = rt.omega(pix, d, y);
        }
      }
    }
  }
  return p;
}

/// True exactly where the code marks a usable observation (good or
/// marginal). Unknown codes are rejected, naming the code and its location.
inline Mask3 omega_from_reliability(const Mask3& codes) {
  Mask3 out(codes.dim1(), codes.dim2(), codes.dim3());
  for (Index i = 0; i < codes.dim1(); ++i) {
    for (Index j = 0; j < codes.dim2(); ++j) {
      for (Index k = 0; k < codes.dim3(); ++k) {
        const std::uint8_t c = codes(i, j, k);
        if (!is_known_code(c)) {
          throw ValidationError(
              "unknown reliability code " + std::to_string(int(c)) + " at (" +
              std::to_string(i) + "," + std::to_string(j) + "," +
              std::to_string(k) + ")");
        }
        out(i, j, k) = is_valid_observation(c) ? 1 : 0;
      }
    }
  }
  return out;
}

}  // namespace tensorfill
