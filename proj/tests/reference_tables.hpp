#pragma once

#include <cmath>
#include <vector>

#include "thermalnet/distribution.hpp"

namespace thermalnet::testing {

// Joint probability columns for the two reference graphs, listed with
// -1 ordered before +1.
inline const std::vector<double> kThreeNodeT3 = {
    0.04410419473467003, 0.3258883690926387, 0.04410419473467003, 0.08590324143802122,
    0.08590324143802122, 0.04410419473467003, 0.3258883690926387, 0.04410419473467003};
inline const std::vector<double> kThreeNodeT1000 = {
    0.12474987533391639, 0.125500624581416,   0.12474987533391639, 0.12499962475075126,
    0.12499962475075126, 0.12474987533391639, 0.125500624581416,   0.12474987533391639};
inline const std::vector<double> kFourNodeT3 = {
    0.0747011997784186,   0.14549806971605195,  0.010109708030127073, 0.0747011997784186,
    0.010109708030127073, 0.01969192247540231,  0.01969192247540231,  0.14549806971605195,
    0.14549806971605195,  0.01969192247540231,  0.01969192247540231,  0.010109708030127073,
    0.0747011997784186,   0.010109708030127073, 0.14549806971605195,  0.0747011997784186};
inline const std::vector<double> kFourNodeT1000 = {
    0.06262481195896036,  0.06275018691604371,  0.062250188082706305, 0.06262481195896036,
    0.062250188082706305, 0.06237481304228965,  0.06237481304228965,  0.06275018691604371,
    0.06275018691604371,  0.06237481304228965,  0.06237481304228965,  0.062250188082706305,
    0.06262481195896036,  0.062250188082706305, 0.06275018691604371,  0.06262481195896036};

/// Reorders a reference column (-1 first) into table order (+1 first).
inline DistributionTable reference_table(const std::vector<double>& column) {
  const std::size_t n = static_cast<std::size_t>(std::log2(column.size()));
  std::vector<double> probs(column.size());
  for (std::size_t k = 0; k < column.size(); ++k) probs[column.size() - 1 - k] = column[k];
  std::vector<std::size_t> vars(n);
  for (std::size_t i = 0; i < n; ++i) vars[i] = i;
  return DistributionTable::from_weights(vars, probs);
}

}  // namespace thermalnet::testing
