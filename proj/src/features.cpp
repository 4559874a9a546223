#include "dmcca/features.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace dmcca {

namespace {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

// Truncation radius for the widest Gaussian envelope; images at desk scale
// are 28x28, so wider support adds nothing under zero padding.
constexpr int kMaxKernelRadius = 14;

void check_gabor_spec(const GaborBankSpec& spec) {
  if (spec.scales < 1 || spec.orientations < 1)
    throw std::invalid_argument("Gabor bank needs at least one scale and orientation");
  if (!(spec.f_min > 0.0) || !(spec.f_max >= spec.f_min))
    throw std::invalid_argument("Gabor frequency range must satisfy 0 < f_min <= f_max");
  if (spec.f_max > 0.5) throw std::invalid_argument("Gabor f_max exceeds the Nyquist limit 0.5");
  if (!(spec.bandwidth > 0.0)) throw std::invalid_argument("Gabor bandwidth must be positive");
}

/// One separable filter: complex 1-D factors along rows and columns plus the
/// shared Gaussian factor, with the DC coefficient and norm folded in so
/// response = (carrier_pass - dc * gauss_pass) * inv_norm has a DC-free,
/// unit-energy kernel.
struct SeparableGabor {
  ComplexVector row_kernel;  // along the row index
  ComplexVector col_kernel;
  Complex dc{0.0, 0.0};
  double inv_norm = 1.0;
};

struct GaborBank {
  int radius = 0;                          // shared per scale
  std::vector<Vector> gauss;               // per scale
  std::vector<std::vector<SeparableGabor>> filters;  // [scale][orientation]
};

GaborBank build_bank(const GaborBankSpec& spec) {
  check_gabor_spec(spec);
  const double two_pi = 2.0 * std::numbers::pi;
  const double band = std::pow(2.0, spec.bandwidth);
  const double sigma_factor = std::sqrt(std::numbers::ln2 / 2.0) * (band + 1.0) / (band - 1.0) /
                              std::numbers::pi;

  GaborBank bank;
  bank.gauss.resize(static_cast<std::size_t>(spec.scales));
  bank.filters.resize(static_cast<std::size_t>(spec.scales));

  int radius = 0;
  std::vector<double> freqs(static_cast<std::size_t>(spec.scales));
  std::vector<double> sigmas(static_cast<std::size_t>(spec.scales));
  for (int s = 0; s < spec.scales; ++s) {
    const double t = spec.scales > 1 ? double(s) / double(spec.scales - 1) : 0.0;
    freqs[static_cast<std::size_t>(s)] = spec.f_min * std::pow(spec.f_max / spec.f_min, t);
    sigmas[static_cast<std::size_t>(s)] = sigma_factor / freqs[static_cast<std::size_t>(s)];
    radius = std::max(radius, std::min<int>(kMaxKernelRadius,
                                            int(std::ceil(3.0 * sigmas[static_cast<std::size_t>(s)]))));
  }
  bank.radius = radius;
  const int k = 2 * radius + 1;

  for (int s = 0; s < spec.scales; ++s) {
    const double f = freqs[static_cast<std::size_t>(s)];
    const double sigma = sigmas[static_cast<std::size_t>(s)];
    Vector g(k);
    for (int t = -radius; t <= radius; ++t)
      g[t + radius] = std::exp(-double(t) * double(t) / (2.0 * sigma * sigma));
    bank.gauss[static_cast<std::size_t>(s)] = g;
    const double gauss_sum = g.sum();

    auto& row = bank.filters[static_cast<std::size_t>(s)];
    row.resize(static_cast<std::size_t>(spec.orientations));
    for (int o = 0; o < spec.orientations; ++o) {
      const double theta = double(o) * std::numbers::pi / double(spec.orientations);
      SeparableGabor filt;
      filt.row_kernel.resize(k);
      filt.col_kernel.resize(k);
      for (int t = -radius; t <= radius; ++t) {
        const double phase_row = two_pi * f * std::sin(theta) * double(t);
        const double phase_col = two_pi * f * std::cos(theta) * double(t);
        filt.row_kernel[t + radius] = g[t + radius] * Complex(std::cos(phase_row), std::sin(phase_row));
        filt.col_kernel[t + radius] = g[t + radius] * Complex(std::cos(phase_col), std::sin(phase_col));
      }
      filt.dc = filt.row_kernel.sum() * filt.col_kernel.sum() / (gauss_sum * gauss_sum);

      // Materialize the corrected kernel once to take its energy.
      double norm_sq = 0.0;
      for (int u = 0; u < k; ++u)
        for (int v = 0; v < k; ++v) {
          const Complex value =
              filt.row_kernel[u] * filt.col_kernel[v] - filt.dc * g[u] * g[v];
          norm_sq += std::norm(value);
        }
      filt.inv_norm = norm_sq > 0.0 ? 1.0 / std::sqrt(norm_sq) : 1.0;
      row[static_cast<std::size_t>(o)] = std::move(filt);
    }
  }
  return bank;
}

/// Same-size zero-padded correlation along the row index.
template <typename Out, typename In, typename Kernel>
void pass_rows(Out& out, const In& img, const Kernel& kernel, int radius) {
  const Eigen::Index rows = img.rows();
  const Eigen::Index cols = img.cols();
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      typename Out::Scalar acc{};
      const Eigen::Index lo = std::max<Eigen::Index>(-radius, -r);
      const Eigen::Index hi = std::min<Eigen::Index>(radius, rows - 1 - r);
      for (Eigen::Index t = lo; t <= hi; ++t) acc += kernel[t + radius] * img(r + t, c);
      out(r, c) = acc;
    }
  }
}

template <typename Out, typename In, typename Kernel>
void pass_cols(Out& out, const In& img, const Kernel& kernel, int radius) {
  const Eigen::Index rows = img.rows();
  const Eigen::Index cols = img.cols();
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      typename Out::Scalar acc{};
      const Eigen::Index lo = std::max<Eigen::Index>(-radius, -c);
      const Eigen::Index hi = std::min<Eigen::Index>(radius, cols - 1 - c);
      for (Eigen::Index t = lo; t <= hi; ++t) acc += kernel[t + radius] * img(r, c + t);
      out(r, c) = acc;
    }
  }
}

double reduce_stat(std::vector<double>& magnitudes, GaborStat stat) {
  const double n = double(magnitudes.size());
  switch (stat) {
    case GaborStat::Mean: {
      double sum = 0.0;
      for (double v : magnitudes) sum += v;
      return sum / n;
    }
    case GaborStat::Std: {
      double sum = 0.0;
      for (double v : magnitudes) sum += v;
      const double mean = sum / n;
      double var = 0.0;
      for (double v : magnitudes) var += (v - mean) * (v - mean);
      return std::sqrt(var / n);
    }
    case GaborStat::Median: {
      std::sort(magnitudes.begin(), magnitudes.end());
      const std::size_t half = magnitudes.size() / 2;
      if (magnitudes.size() % 2 == 1) return magnitudes[half];
      return 0.5 * (magnitudes[half - 1] + magnitudes[half]);
    }
  }
  return 0.0;
}

}  // namespace

GaborStat gabor_stat_from_string(const std::string& name) {
  if (name == "mean") return GaborStat::Mean;
  if (name == "std") return GaborStat::Std;
  if (name == "median") return GaborStat::Median;
  throw std::invalid_argument("unknown Gabor statistic '" + name + "'");
}

Vector gabor_features(const Matrix& image, const GaborBankSpec& spec, GaborStat stat) {
  if (image.size() == 0) throw std::invalid_argument("gabor_features: empty image");
  if (!image.allFinite()) throw std::invalid_argument("gabor_features: non-finite pixels");

  static thread_local GaborBankSpec cached_spec;
  static thread_local GaborBank cached_bank;
  static thread_local bool cached = false;
  if (!cached || cached_spec.scales != spec.scales ||
      cached_spec.orientations != spec.orientations || cached_spec.f_min != spec.f_min ||
      cached_spec.f_max != spec.f_max || cached_spec.bandwidth != spec.bandwidth) {
    cached_bank = build_bank(spec);
    cached_spec = spec;
    cached = true;
  }
  const GaborBank& bank = cached_bank;
  const int radius = bank.radius;

  // Removing the image mean up front keeps DC-free filtering exact under
  // zero padding: border pixels would otherwise see a truncated kernel whose
  // partial sums are not zero.
  const Matrix centered = image.array() - image.mean();

  Vector features(spec.filter_count());
  ComplexMatrix carrier_rows(image.rows(), image.cols());
  ComplexMatrix carrier(image.rows(), image.cols());
  Matrix gauss_rows(image.rows(), image.cols());
  Matrix gauss(image.rows(), image.cols());
  std::vector<double> magnitudes(static_cast<std::size_t>(image.size()));

  for (int s = 0; s < spec.scales; ++s) {
    pass_rows(gauss_rows, centered, bank.gauss[static_cast<std::size_t>(s)], radius);
    pass_cols(gauss, gauss_rows, bank.gauss[static_cast<std::size_t>(s)], radius);
    for (int o = 0; o < spec.orientations; ++o) {
      const SeparableGabor& filt =
          bank.filters[static_cast<std::size_t>(s)][static_cast<std::size_t>(o)];
      pass_rows(carrier_rows, centered, filt.row_kernel, radius);
      pass_cols(carrier, carrier_rows, filt.col_kernel, radius);

      std::size_t k = 0;
      for (Eigen::Index c = 0; c < image.cols(); ++c)
        for (Eigen::Index r = 0; r < image.rows(); ++r)
          magnitudes[k++] =
              std::abs((carrier(r, c) - filt.dc * gauss(r, c)) * filt.inv_norm);
      features[s * spec.orientations + o] = reduce_stat(magnitudes, stat);
    }
  }
  return features;
}

namespace {

struct ZernikePair {
  int n = 0;
  int m = 0;
  std::vector<double> radial_coeffs;  // over powers n, n-2, ..., m
};

double factorial(int n) {
  double out = 1.0;
  for (int k = 2; k <= n; ++k) out *= double(k);
  return out;
}

std::vector<ZernikePair> zernike_pairs(int max_order) {
  std::vector<ZernikePair> pairs;
  for (int n = 0; n <= max_order; ++n) {
    for (int m = n % 2; m <= n; m += 2) {
      ZernikePair pair;
      pair.n = n;
      pair.m = m;
      const int terms = (n - m) / 2;
      pair.radial_coeffs.resize(static_cast<std::size_t>(terms) + 1);
      for (int s = 0; s <= terms; ++s) {
        const double coeff = factorial(n - s) /
                             (factorial(s) * factorial((n + m) / 2 - s) *
                              factorial((n - m) / 2 - s));
        pair.radial_coeffs[static_cast<std::size_t>(s)] = (s % 2 == 0) ? coeff : -coeff;
      }
      pairs.push_back(std::move(pair));
    }
  }
  return pairs;
}

}  // namespace

int ZernikeSpec::feature_count() const {
  int count = 0;
  for (int n = 0; n <= max_order; ++n) count += n / 2 + 1;
  return count;
}

Vector zernike_features(const Matrix& image, const ZernikeSpec& spec) {
  if (image.size() == 0) throw std::invalid_argument("zernike_features: empty image");
  if (!image.allFinite()) throw std::invalid_argument("zernike_features: non-finite pixels");
  if (spec.max_order < 0) throw std::invalid_argument("zernike_features: negative order");

  const std::vector<ZernikePair> pairs = zernike_pairs(spec.max_order);
  Vector features = Vector::Zero(static_cast<Eigen::Index>(pairs.size()));

  const double total = image.sum();
  if (!(total > 0.0)) return features;  // no mass, all moments vanish

  double cx = 0.0, cy = 0.0;
  for (Eigen::Index r = 0; r < image.rows(); ++r)
    for (Eigen::Index c = 0; c < image.cols(); ++c) {
      cx += image(r, c) * double(c);
      cy += image(r, c) * double(r);
    }
  cx /= total;
  cy /= total;

  double radius = 0.0;
  for (Eigen::Index r = 0; r < image.rows(); ++r)
    for (Eigen::Index c = 0; c < image.cols(); ++c) {
      if (image(r, c) == 0.0) continue;
      radius = std::max(radius, std::hypot(double(c) - cx, double(r) - cy));
    }
  if (radius == 0.0) radius = 1.0;

  const int max_order = spec.max_order;
  std::vector<Complex> moments(pairs.size(), Complex(0.0, 0.0));
  std::vector<double> powers(static_cast<std::size_t>(max_order) + 1);
  std::vector<double> cosines(static_cast<std::size_t>(max_order) + 1);
  std::vector<double> sines(static_cast<std::size_t>(max_order) + 1);

  for (Eigen::Index row = 0; row < image.rows(); ++row) {
    for (Eigen::Index col = 0; col < image.cols(); ++col) {
      const double value = image(row, col);
      if (value == 0.0) continue;
      const double x = (double(col) - cx) / radius;
      const double y = (double(row) - cy) / radius;
      const double r = std::hypot(x, y);
      if (r > 1.0) continue;

      powers[0] = 1.0;
      for (int k = 1; k <= max_order; ++k) powers[static_cast<std::size_t>(k)] = powers[static_cast<std::size_t>(k) - 1] * r;
      const double theta = std::atan2(y, x);
      for (int m = 0; m <= max_order; ++m) {
        cosines[static_cast<std::size_t>(m)] = std::cos(double(m) * theta);
        sines[static_cast<std::size_t>(m)] = std::sin(double(m) * theta);
      }

      for (std::size_t k = 0; k < pairs.size(); ++k) {
        const ZernikePair& pair = pairs[k];
        double radial = 0.0;
        int power = pair.n;
        for (double coeff : pair.radial_coeffs) {
          radial += coeff * powers[static_cast<std::size_t>(power)];
          power -= 2;
        }
        // conj(V_nm) = R_nm(r) * exp(-i m theta)
        moments[k] += value * radial *
                      Complex(cosines[static_cast<std::size_t>(pair.m)],
                              -sines[static_cast<std::size_t>(pair.m)]);
      }
    }
  }

  const double area_element = 1.0 / (radius * radius);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const double scale = double(pairs[k].n + 1) / std::numbers::pi * area_element;
    features[static_cast<Eigen::Index>(k)] = std::abs(scale * moments[k]);
  }
  return features;
}

}  // namespace dmcca
