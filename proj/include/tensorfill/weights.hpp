#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>

#include "tensorfill/svt.hpp"
#include "tensorfill/tensor_ops.hpp"

namespace tensorfill {

/// Mode weights of the completion objective; strictly positive, sum to one.
struct WeightVector {
  std::array<double, 3> w{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};

  double operator[](int n) const { return w[static_cast<std::size_t>(n)]; }
  double sum() const { return w[0] + w[1] + w[2]; }
};

/// Spectrum of one unfolding: singular values sorted descending, the shortest
/// prefix length k whose cumulative share reaches tau, and k normalized by
/// the spectrum length.
struct SpectrumSummary {
  Eigen::VectorXd singular_values;
  Index k = 0;
  double k_norm = 0.0;
};

/// Smallest k such that the first k singular values hold at least a tau
/// fraction of the total spectral mass.
inline Index spectral_k(const Eigen::VectorXd& sigma, double tau) {
  contract(sigma.size() > 0, "spectral_k: non-empty spectrum");
  contract(tau > 0.0 && tau < 1.0, "spectral_k: tau in (0,1)");
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    contract(sigma[i] >= 0.0, "spectral_k: non-negative singular values");
    contract(i == 0 || sigma[i] <= sigma[i - 1], "spectral_k: descending");
  }
  const double total = sigma.sum();
  if (total <= 0.0) {
    throw DegenerateSpectrumError("spectral_k: all-zero spectrum");
  }
  double prefix = 0.0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    prefix += sigma[i];
    if (prefix / total >= tau) return static_cast<Index>(i) + 1;
  }
  return static_cast<Index>(sigma.size());
}

inline SpectrumSummary spectrum_summary(const Eigen::VectorXd& sigma,
                                        double tau) {
  SpectrumSummary s;
  s.singular_values = sigma;
  s.k = spectral_k(sigma, tau);
  s.k_norm = static_cast<double>(s.k) / static_cast<double>(sigma.size());
  return s;
}

/// Weights from the normalized prefix lengths: w_n proportional to 1/k_n.
inline WeightVector weights_from_knorm(const std::array<double, 3>& k_norm) {
  std::array<double, 3> inv{};
  double total = 0.0;
  for (int n = 0; n < 3; ++n) {
    contract(k_norm[static_cast<std::size_t>(n)] > 0.0 &&
                 k_norm[static_cast<std::size_t>(n)] <= 1.0,
             "weights_from_knorm: k_norm in (0,1]");
    inv[static_cast<std::size_t>(n)] = 1.0 / k_norm[static_cast<std::size_t>(n)];
    total += inv[static_cast<std::size_t>(n)];
  }
  WeightVector wv;
  for (int n = 0; n < 3; ++n) {
    wv.w[static_cast<std::size_t>(n)] = inv[static_cast<std::size_t>(n)] / total;
  }
  return wv;
}

/// Recompute the three mode weights from the unfolding spectra of the current
/// estimate. A mode whose unfolding is all-zero carries no rank evidence and
/// gets k_norm = 1, the weakest low-rank claim; `degenerate_modes`, when
/// given, counts such modes.
inline WeightVector update_weights(const Tensor3& x, double tau,
                                   int* degenerate_modes = nullptr) {
  std::array<double, 3> k_norm{};
  for (int mode = 1; mode <= 3; ++mode) {
    const Eigen::VectorXd sigma = singular_values(unfold(x, mode));
    try {
      k_norm[static_cast<std::size_t>(mode - 1)] =
          spectrum_summary(sigma, tau).k_norm;
    } catch (const DegenerateSpectrumError&) {
      k_norm[static_cast<std::size_t>(mode - 1)] = 1.0;
      if (degenerate_modes != nullptr) ++*degenerate_modes;
    }
  }
  return weights_from_knorm(k_norm);
}

}  // namespace tensorfill
