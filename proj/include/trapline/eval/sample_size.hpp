#pragma once

// Cochran sample size with finite-population correction, p = 0.5.

#include <cmath>
#include <cstdint>

#include "trapline/core/error.hpp"

namespace trapline::eval {

/// Two-sided z for the supported confidence levels (standard normal table).
inline double z_for_confidence(double confidence) {
  struct Row {
    double level;
    double z;
  };
  static constexpr Row kTable[] = {{0.90, 1.645}, {0.95, 1.96}, {0.99, 2.576}};
  for (const auto& r : kTable) {
    if (std::fabs(r.level - confidence) < 1e-9) return r.z;
  }
  throw ValidationError("unsupported confidence level " + std::to_string(confidence) +
                        " (expected 0.90, 0.95 or 0.99)");
}

inline std::uint64_t required_sample_size(std::uint64_t population, double margin,
                                          double confidence) {
  if (population < 1) throw ValidationError("population must be >= 1");
  if (!(margin > 0.0 && margin < 1.0)) throw ValidationError("margin must be in (0, 1)");
  const double z = z_for_confidence(confidence);
  const double n0 = z * z * 0.25 / (margin * margin);
  const double n = n0 / (1.0 + (n0 - 1.0) / static_cast<double>(population));
  // Guard the ceil against representation noise, e.g. 374.0000000001.
  auto out = static_cast<std::uint64_t>(std::ceil(n - 1e-9));
  return out > population ? population : out;
}

}  // namespace trapline::eval
