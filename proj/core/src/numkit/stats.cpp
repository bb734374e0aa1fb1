#include "gamette/numkit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gamette/error.hpp"

namespace gamette::numkit {

double mean(std::span<const double> xs) {
  if (xs.empty()) throw numeric_error("mean of empty range");
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

double population_stddev(std::span<const double> xs) {
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size()));
}

Standardization standardize_columns(Matrix& data) {
  Standardization st;
  const std::size_t n = data.rows();
  if (n == 0) throw numeric_error("standardize_columns: no rows");
  for (std::size_t c = 0; c < data.cols(); ++c) {
    const auto col = data.column(c);
    for (double x : col) {
      if (!std::isfinite(x)) throw numeric_error("standardize_columns: non-finite input");
    }
    const double m = mean(col);
    const double sd = population_stddev(col);
    st.means.push_back(m);
    st.stddevs.push_back(sd);
    // Relative test: constant columns can carry rounding noise in sd.
    const bool flat = !(sd > 1e-12 * std::max(1.0, std::abs(m)));
    st.zero_variance.push_back(flat);
    for (std::size_t r = 0; r < n; ++r) data(r, c) = flat ? 0.0 : (data(r, c) - m) / sd;
  }
  return st;
}

double log_sum_exp(std::span<const double> xs) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double x : xs) hi = std::max(hi, x);
  if (!std::isfinite(hi)) return hi;
  double sum = 0.0;
  for (double x : xs) sum += std::exp(x - hi);
  return hi + std::log(sum);
}

namespace {

constexpr int kMaxIterations = 10000;
constexpr double kEps = 1e-16;

double gamma_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < kMaxIterations; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_continued_fraction(double a, double x) {
  constexpr double tiny = std::numeric_limits<double>::min() / kEps;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

void check_gamma_args(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0) || !std::isfinite(a))
    throw numeric_error("incomplete gamma: require a > 0 and x >= 0");
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return gamma_series(a, x);
  return 1.0 - gamma_continued_fraction(a, x);
}

double regularized_gamma_q(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - gamma_series(a, x);
  return gamma_continued_fraction(a, x);
}

double chi_square_sf(double statistic, double df) {
  if (!(df > 0.0)) throw numeric_error("chi_square_sf: df must be > 0");
  if (statistic <= 0.0) return 1.0;
  return regularized_gamma_q(df / 2.0, statistic / 2.0);
}

double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

}  // namespace gamette::numkit
