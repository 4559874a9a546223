#pragma once

#include <vector>

#include "dmcca/dataset.hpp"

namespace dmcca {

enum class GaborStat { Mean, Std, Median };

/// Complex Gabor bank, log-spaced center frequencies across `scales` and
/// orientations at k*pi/orientations. Filters are built DC-free, so features
/// ignore constant image offsets.
struct GaborBankSpec {
  int scales = 4;
  int orientations = 6;
  double f_min = 0.05;  // cycles/pixel
  double f_max = 0.4;
  double bandwidth = 1.0;  // octaves at half magnitude

  int filter_count() const { return scales * orientations; }
};

struct ZernikeSpec {
  int max_order = 10;

  /// Number of (n, m) pairs with 0 <= m <= n, n - m even, n <= max_order.
  int feature_count() const;
};

/// Per-filter statistic of the magnitude response, ordered scale-major then
/// orientation. Length scales * orientations.
Vector gabor_features(const Matrix& image, const GaborBankSpec& spec, GaborStat stat);

/// Zernike moment magnitudes |Z_nm| over the unit disk, centroid-centered
/// and radius-normalized, in (n, m) lexicographic order.
Vector zernike_features(const Matrix& image, const ZernikeSpec& spec);

GaborStat gabor_stat_from_string(const std::string& name);

}  // namespace dmcca
