#include "gamette/numkit/chisq.hpp"

#include <cmath>

#include "gamette/error.hpp"
#include "gamette/numkit/stats.hpp"

namespace gamette::numkit {

ChiSquareResult chi_square_independence(const Matrix& observed, CellResidual cell) {
  ChiSquareResult out;
  double total = 0.0;
  for (double x : observed.data()) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw validation_error("chi_square: counts must be finite and >= 0");
    total += x;
  }
  if (!(total > 0.0)) throw validation_error("chi_square: table total must be > 0");

  for (std::size_t r = 0; r < observed.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < observed.cols(); ++c) s += observed(r, c);
    if (s > 0.0) out.kept_rows.push_back(r);
  }
  for (std::size_t c = 0; c < observed.cols(); ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < observed.rows(); ++r) s += observed(r, c);
    if (s > 0.0) out.kept_cols.push_back(c);
  }
  out.dropped_empty = out.kept_rows.size() != observed.rows() || out.kept_cols.size() != observed.cols();

  const std::size_t nr = out.kept_rows.size();
  const std::size_t nc = out.kept_cols.size();
  out.observed = Matrix(nr, nc);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j) out.observed(i, j) = observed(out.kept_rows[i], out.kept_cols[j]);

  std::vector<double> row_sum(nr, 0.0), col_sum(nc, 0.0);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j) {
      row_sum[i] += out.observed(i, j);
      col_sum[j] += out.observed(i, j);
    }

  out.expected = Matrix(nr, nc);
  out.pearson_residuals = Matrix(nr, nc);
  out.adjusted_residuals = Matrix(nr, nc);
  out.cell_p_values = Matrix(nr, nc, 1.0);
  for (std::size_t i = 0; i < nr; ++i) {
    for (std::size_t j = 0; j < nc; ++j) {
      const double e = row_sum[i] * col_sum[j] / total;
      out.expected(i, j) = e;
      if (e <= 0.0) continue;
      const double diff = out.observed(i, j) - e;
      out.statistic += diff * diff / e;
      const double r = diff / std::sqrt(e);
      out.pearson_residuals(i, j) = r;
      const double v = (1.0 - row_sum[i] / total) * (1.0 - col_sum[j] / total);
      out.adjusted_residuals(i, j) = v > 0.0 ? r / std::sqrt(v) : 0.0;
      const double z = cell == CellResidual::Pearson ? r : out.adjusted_residuals(i, j);
      out.cell_p_values(i, j) = normal_two_sided_p(z);
    }
  }
  out.degrees_of_freedom = static_cast<int>((nr > 0 ? nr - 1 : 0) * (nc > 0 ? nc - 1 : 0));
  out.p_value = out.degrees_of_freedom > 0 ? chi_square_sf(out.statistic, out.degrees_of_freedom) : 1.0;
  return out;
}

}  // namespace gamette::numkit
