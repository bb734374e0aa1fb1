#pragma once

#include <cstddef>
#include <vector>

#include "gamette/numkit/matrix.hpp"

namespace gamette::numkit {

enum class CellResidual { Pearson, Adjusted };

struct ChiSquareResult {
  double statistic = 0.0;
  int degrees_of_freedom = 0;
  double p_value = 1.0;
  // All matrices cover the kept rows/columns only.
  Matrix observed;
  Matrix expected;
  Matrix pearson_residuals;
  Matrix adjusted_residuals;
  Matrix cell_p_values;  // two-sided normal on the chosen residual
  std::vector<std::size_t> kept_rows;
  std::vector<std::size_t> kept_cols;
  bool dropped_empty = false;  // some all-zero row or column was removed
};

/// Pearson chi-square test of independence on a contingency table.
ChiSquareResult chi_square_independence(const Matrix& observed,
                                        CellResidual cell = CellResidual::Pearson);

}  // namespace gamette::numkit
