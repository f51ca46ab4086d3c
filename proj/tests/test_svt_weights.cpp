#include <catch2/catch.hpp>

#include <random>

#include "tensorfill/svt.hpp"
#include "tensorfill/weights.hpp"

using namespace tensorfill;

TEST_CASE("svt shrinks a diagonal spectrum", "[svt]") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
  m(0, 0) = 3.0;
  m(1, 1) = 1.0;
  const Eigen::MatrixXd out = svt(m, 2.0);
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(2, 2);
  expected(0, 0) = 1.0;
  REQUIRE((out - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("svt with zero threshold is the identity", "[svt]") {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> dist;
  Eigen::MatrixXd m(6, 4);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  REQUIRE((svt(m, 0.0) - m).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("svt beyond the largest singular value zeroes the matrix",
          "[svt]") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> dist;
  Eigen::MatrixXd m(5, 4);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  const double sigma_max = singular_values(m)(0);
  const Eigen::MatrixXd out = svt(m, sigma_max * 1.001);
  REQUIRE(out.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("svt is non-expansive", "[svt]") {
  std::mt19937_64 rng(43);
  std::normal_distribution<double> dist;
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::MatrixXd a(5, 7), b(5, 7);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      a.data()[i] = dist(rng);
      b.data()[i] = dist(rng);
    }
    const double theta = std::abs(dist(rng));
    const double lhs = (svt(a, theta) - svt(b, theta)).norm();
    REQUIRE(lhs <= (a - b).norm() + 1e-12);
  }
}

TEST_CASE("spectral_k picks the smallest sufficient prefix", "[weights]") {
  Eigen::VectorXd s1(3);
  s1 << 10.0, 0.0, 0.0;
  REQUIRE(spectral_k(s1, 0.85) == 1);

  Eigen::VectorXd s2(3);
  s2 << 5.0, 4.0, 1.0;
  REQUIRE(spectral_k(s2, 0.85) == 2);  // 0.5 < 0.85 <= 0.9

  Eigen::VectorXd s3(4);
  s3 << 1.0, 1.0, 1.0, 1.0;
  REQUIRE(spectral_k(s3, 0.85) == 4);
}

TEST_CASE("spectral_k rejects an all-zero spectrum", "[weights]") {
  Eigen::VectorXd z = Eigen::VectorXd::Zero(4);
  REQUIRE_THROWS_AS(spectral_k(z, 0.85), DegenerateSpectrumError);
}

TEST_CASE("spectral_k never shrinks when tau grows", "[weights]") {
  std::mt19937_64 rng(51);
  std::exponential_distribution<double> dist(1.0);
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng() % 12);
    Eigen::VectorXd sigma(n);
    for (Eigen::Index i = 0; i < n; ++i) sigma[i] = dist(rng);
    std::sort(sigma.data(), sigma.data() + n, std::greater<double>());
    Index prev = 0;
    for (double tau : {0.1, 0.3, 0.5, 0.7, 0.85, 0.95, 0.999}) {
      const Index k = spectral_k(sigma, tau);
      REQUIRE(k >= prev);
      prev = k;
    }
  }
}

TEST_CASE("weights invert the normalized prefix lengths", "[weights]") {
  const WeightVector w = weights_from_knorm({0.5, 0.25, 0.25});
  REQUIRE(w[0] == Approx(0.2).margin(1e-15));
  REQUIRE(w[1] == Approx(0.4).margin(1e-15));
  REQUIRE(w[2] == Approx(0.4).margin(1e-15));
}

TEST_CASE("equal prefix lengths give equal weights", "[weights]") {
  const WeightVector w = weights_from_knorm({0.7, 0.7, 0.7});
  for (int n = 0; n < 3; ++n) REQUIRE(w[n] == Approx(1.0 / 3.0).margin(1e-15));
}

TEST_CASE("weights sum to one and stay positive on random spectra",
          "[weights]") {
  std::mt19937_64 rng(52);
  std::exponential_distribution<double> dist(1.0);
  for (int rep = 0; rep < 200; ++rep) {
    std::array<double, 3> k_norm{};
    for (int n = 0; n < 3; ++n) {
      const Eigen::Index s = 1 + static_cast<Eigen::Index>(rng() % 20);
      Eigen::VectorXd sigma(s);
      for (Eigen::Index i = 0; i < s; ++i) sigma[i] = dist(rng) + 1e-9;
      std::sort(sigma.data(), sigma.data() + s, std::greater<double>());
      k_norm[static_cast<std::size_t>(n)] =
          static_cast<double>(spectral_k(sigma, 0.85)) / static_cast<double>(s);
    }
    const WeightVector w = weights_from_knorm(k_norm);
    REQUIRE(std::abs(w.sum() - 1.0) <= 1e-12);
    for (int n = 0; n < 3; ++n) REQUIRE(w[n] > 0.0);
  }
}

TEST_CASE("a rank-1 tensor weights modes by spectrum length", "[weights]") {
  // Outer product of three positive vectors: every unfolding has rank 1, so
  // k_n = 1 and w is proportional to the spectrum lengths (4, 5, 6).
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> dist(0.2, 1.0);
  Eigen::VectorXd u(4), v(5), w3(6);
  for (auto* vec : {&u, &v, &w3}) {
    for (Eigen::Index i = 0; i < vec->size(); ++i) (*vec)[i] = dist(rng);
  }
  Tensor3 x(4, 5, 6);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 5; ++j)
      for (Index k = 0; k < 6; ++k) x(i, j, k) = u[i] * v[j] * w3[k];

  // oracle: each unfolding has one dominant singular value (the spectrum
  // comes from a Gram eigendecomposition, so the floor is ~sqrt(eps))
  for (int mode = 1; mode <= 3; ++mode) {
    const Eigen::VectorXd sigma = singular_values(unfold(x, mode));
    REQUIRE(sigma(1) / sigma(0) < 1e-6);
    REQUIRE(spectral_k(sigma, 0.85) == 1);
  }

  const WeightVector weights = update_weights(x, 0.85);
  REQUIRE(weights[0] == Approx(4.0 / 15.0).margin(1e-12));
  REQUIRE(weights[1] == Approx(5.0 / 15.0).margin(1e-12));
  REQUIRE(weights[2] == Approx(6.0 / 15.0).margin(1e-12));
}

TEST_CASE("update_weights treats an all-zero tensor as rank-uninformative",
          "[weights]") {
  Tensor3 zero(3, 4, 5, 0.0);
  int degenerate = 0;
  const WeightVector w = update_weights(zero, 0.85, &degenerate);
  REQUIRE(degenerate == 3);
  for (int n = 0; n < 3; ++n) REQUIRE(w[n] == Approx(1.0 / 3.0).margin(1e-15));
}
