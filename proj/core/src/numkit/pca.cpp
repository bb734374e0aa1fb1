#include "gamette/numkit/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gamette/error.hpp"

namespace gamette::numkit {

namespace {

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double x : a.data()) s += x * x;
  return std::sqrt(s);
}

}  // namespace

SymmetricEigen jacobi_eigen(const Matrix& symmetric, double tolerance, int max_sweeps) {
  const std::size_t n = symmetric.rows();
  if (n != symmetric.cols()) throw numeric_error("jacobi_eigen: matrix not square");
  for (double x : symmetric.data()) {
    if (!std::isfinite(x)) throw numeric_error("jacobi_eigen: non-finite input");
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(symmetric(i, j) - symmetric(j, i)) > 1e-12 * (1.0 + std::abs(symmetric(i, j))))
        throw numeric_error("jacobi_eigen: matrix not symmetric");

  Matrix a = symmetric;
  Matrix v = Matrix::identity(n);
  const double threshold = tolerance * std::max(1.0, frobenius_norm(a));
  int sweep = 0;
  for (; sweep < max_sweeps && off_diagonal_norm(a) > threshold; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation angle that zeroes a(p,q); t is the smaller root.
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (off_diagonal_norm(a) > threshold) throw numeric_error("jacobi_eigen: did not converge");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
  SymmetricEigen out;
  out.sweeps = sweep;
  out.vectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values.push_back(a(order[j], order[j]));
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
  }
  return out;
}

Matrix covariance(const Matrix& data) {
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  if (n == 0) throw numeric_error("covariance: no rows");
  std::vector<double> means(d, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) means[c] += data(r, c);
  for (double& m : means) m /= static_cast<double>(n);
  Matrix cov(d, d);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < d; ++i) {
      const double di = data(r, i) - means[i];
      for (std::size_t j = i; j < d; ++j) cov(i, j) += di * (data(r, j) - means[j]);
    }
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) {
      cov(i, j) /= static_cast<double>(n);
      cov(j, i) = cov(i, j);
    }
  return cov;
}

PcaResult pca(const Matrix& data) {
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  if (n < d) throw numeric_error("pca: need at least as many rows as columns");
  for (double x : data.data()) {
    if (!std::isfinite(x)) throw numeric_error("pca: non-finite input");
  }

  PcaResult out;
  out.covariance = covariance(data);
  SymmetricEigen eig = jacobi_eigen(out.covariance);

  out.components = Matrix(d, d);
  for (std::size_t k = 0; k < d; ++k) {
    std::size_t lead = 0;
    for (std::size_t i = 1; i < d; ++i) {
      if (std::abs(eig.vectors(i, k)) > std::abs(eig.vectors(lead, k)) + 1e-12) lead = i;
    }
    const double sign = eig.vectors(lead, k) < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < d; ++i) out.components(k, i) = sign * eig.vectors(i, k);
  }

  out.eigenvalues = eig.values;
  // Round-off can leave tiny negative eigenvalues on singular covariances.
  for (double& ev : out.eigenvalues) {
    if (ev < 0.0 && ev > -1e-12) ev = 0.0;
  }
  const double total = std::accumulate(out.eigenvalues.begin(), out.eigenvalues.end(), 0.0);
  if (!(total > 0.0)) throw numeric_error("pca: total variance is zero");
  for (double ev : out.eigenvalues) out.explained_fraction.push_back(ev / total);

  std::vector<double> means(d, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) means[c] += data(r, c);
  for (double& m : means) m /= static_cast<double>(n);
  out.scores = Matrix(n, d);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = 0; k < d; ++k) {
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) s += (data(r, c) - means[c]) * out.components(k, c);
      out.scores(r, k) = s;
    }
  return out;
}

}  // namespace gamette::numkit
