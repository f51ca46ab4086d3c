#pragma once

#include <Eigen/Dense>
#include <string>

#include "tensorfill/errors.hpp"

namespace tensorfill {

/// Singular value soft-thresholding, the proximal operator of the nuclear
/// norm: U * diag(max(sigma_i - threshold, 0)) * V^T. Works on the Gram
/// matrix of the short side, so the cost is one small eigendecomposition
/// plus matrix products.
inline Eigen::MatrixXd svt(const Eigen::MatrixXd& m, double threshold) {
  contract(threshold >= 0.0, "svt: threshold >= 0");
  const bool wide = m.rows() <= m.cols();
  const Eigen::MatrixXd gram =
      wide ? Eigen::MatrixXd(m * m.transpose())
           : Eigen::MatrixXd(m.transpose() * m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("svt: eigendecomposition failed on a " +
                         std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + " matrix");
  }
  const Eigen::VectorXd& ev = eig.eigenvalues();  // ascending
  const Eigen::Index s = ev.size();
  Eigen::Index keep = 0;
  while (keep < s && std::sqrt(std::max(ev[s - 1 - keep], 0.0)) > threshold) {
    ++keep;
  }
  if (keep == 0) return Eigen::MatrixXd::Zero(m.rows(), m.cols());

  Eigen::VectorXd factors(keep);
  Eigen::MatrixXd basis(s, keep);
  for (Eigen::Index k = 0; k < keep; ++k) {
    const double sigma = std::sqrt(ev[s - 1 - k]);
    factors[k] = (sigma - threshold) / sigma;
    basis.col(k) = eig.eigenvectors().col(s - 1 - k);
  }
  if (wide) {
    return basis * (factors.asDiagonal() * (basis.transpose() * m));
  }
  return ((m * basis) * factors.asDiagonal()) * basis.transpose();
}

/// Singular values of m, descending, via the short-side Gram spectrum.
inline Eigen::VectorXd singular_values(const Eigen::MatrixXd& m) {
  const bool wide = m.rows() <= m.cols();
  const Eigen::MatrixXd gram =
      wide ? Eigen::MatrixXd(m * m.transpose())
           : Eigen::MatrixXd(m.transpose() * m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram,
                                                     Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("singular_values: eigendecomposition failed on a " +
                         std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + " matrix");
  }
  const Eigen::VectorXd& ev = eig.eigenvalues();
  Eigen::VectorXd sigma(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    sigma[i] = std::sqrt(std::max(ev[ev.size() - 1 - i], 0.0));
  }
  return sigma;
}

}  // namespace tensorfill
