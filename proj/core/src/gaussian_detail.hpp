#pragma once

// Extended-precision variants of the bivariate kernels. The returned pairs
// carry the rounding error of the final products and sums so that callers
// combining several cancelling terms do not lose the low-order bits.

#include "double_double.hpp"
#include "reluprop/gaussian.hpp"

namespace reluprop::detail {

DoubleDouble bvn_pdf_dd(double x, double y, Correlation rho);
DoubleDouble bvn_cdf_dd(double x, double y, Correlation rho);

}  // namespace reluprop::detail
