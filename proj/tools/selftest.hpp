#pragma once

#include <functional>
#include <string>
#include <vector>

#include "reluprop/gaussian.hpp"

namespace reluprop::cli {

struct SelftestRow {
  std::string name;
  bool pass = false;
  double worst = 0.0;      // largest observed error
  double tolerance = 0.0;  // pass iff worst <= tolerance
  int cases = 0;
};

/// Gaussian kernels the suite evaluates. Tests swap in a perturbed Phi_2 to
/// check that the suite notices.
struct SelftestKernels {
  std::function<double(double, double, Correlation)> bvn_cdf = reluprop::bvn_cdf;
};

std::vector<SelftestRow> run_selftest(const SelftestKernels& kernels = {});

}  // namespace reluprop::cli
