#include "ptrack/ddcf.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "ptrack/error.hpp"

namespace ptrack {

namespace {

Eigen::FFT<double>& fft_engine() {
  // Eigen::FFT caches twiddle plans and is not safe to share across threads.
  thread_local Eigen::FFT<double> fft;
  return fft;
}

/// In-place 2-D transform of an n x n row-major plane.
void fft2(ComplexPlane& plane, std::size_t n, bool inverse) {
  Eigen::FFT<double>& fft = fft_engine();
  std::vector<std::complex<double>> line(n), out(n);
  for (std::size_t r = 0; r < n; ++r) {
    std::copy_n(plane.begin() + static_cast<std::ptrdiff_t>(r * n), n, line.begin());
    if (inverse) fft.inv(out, line); else fft.fwd(out, line);
    std::copy(out.begin(), out.end(), plane.begin() + static_cast<std::ptrdiff_t>(r * n));
  }
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t r = 0; r < n; ++r) line[r] = plane[r * n + c];
    if (inverse) fft.inv(out, line); else fft.fwd(out, line);
    for (std::size_t r = 0; r < n; ++r) plane[r * n + c] = out[r];
  }
}

std::vector<double> hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  }
  return w;
}

/// Per-channel spectra of the patch, optionally cosine-windowed.
std::vector<ComplexPlane> patch_spectra(const FeaturePatch& patch, bool windowed) {
  const std::size_t n = patch.size;
  const std::vector<double> w = windowed ? hann(n) : std::vector<double>(n, 1.0);
  std::vector<ComplexPlane> spectra(patch.channels, ComplexPlane(n * n));
  for (std::size_t ch = 0; ch < patch.channels; ++ch) {
    ComplexPlane& plane = spectra[ch];
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) {
        plane[r * n + c] = patch.at(r, c, ch) * w[r] * w[c];
      }
    }
    fft2(plane, n, false);
  }
  return spectra;
}

ComplexPlane gaussian_label_spectrum(std::size_t n, double sigma) {
  ComplexPlane y(n * n);
  const double centre = static_cast<double>(n / 2);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      const double dr = static_cast<double>(r) - centre;
      const double dc = static_cast<double>(c) - centre;
      y[r * n + c] = std::exp(-(dr * dr + dc * dc) / (2.0 * sigma * sigma));
    }
  }
  fft2(y, n, false);
  return y;
}

void check_patch(const FeaturePatch& patch) {
  if (patch.size < 8 || patch.channels == 0 ||
      patch.data.size() != patch.size * patch.size * patch.channels) {
    throw Error(Errc::Shape, "malformed feature patch");
  }
  for (double v : patch.data) {
    if (!std::isfinite(v)) throw Error(Errc::InvalidInput, "non-finite patch value");
  }
}

void check_match(const CorrelationFilter& filter, const FeaturePatch& patch) {
  check_patch(patch);
  if (patch.size != filter.size() || patch.channels != filter.channels()) {
    throw Error(Errc::Shape, "patch dimensions do not match the filter");
  }
}

/// Statistics of one patch: per-channel y^ * conj(x^_c) and sum_c |x^_c|^2.
void patch_statistics(const FeaturePatch& patch, const DcfConfig& config,
                      std::vector<ComplexPlane>& numerator, std::vector<double>& denominator) {
  const std::size_t n = patch.size;
  const std::vector<ComplexPlane> x = patch_spectra(patch, true);
  const ComplexPlane y = gaussian_label_spectrum(n, config.label_sigma);
  numerator.assign(patch.channels, ComplexPlane(n * n));
  denominator.assign(n * n, 0.0);
  for (std::size_t ch = 0; ch < patch.channels; ++ch) {
    for (std::size_t k = 0; k < n * n; ++k) {
      numerator[ch][k] = y[k] * std::conj(x[ch][k]);
      denominator[k] += std::norm(x[ch][k]);
    }
  }
}

std::size_t wrap(std::ptrdiff_t i, std::size_t n) {
  const auto m = static_cast<std::ptrdiff_t>(n);
  return static_cast<std::size_t>(((i % m) + m) % m);
}

/// Sub-cell peak offset from a quadratic surface fitted to the 3x3
/// neighbourhood; each component lies in [-0.5, 0.5].
Eigen::Vector2d refine_peak(const std::vector<double>& resp, std::size_t n, std::size_t pr,
                            std::size_t pc) {
  Eigen::Matrix<double, 9, 6> a;
  Eigen::Matrix<double, 9, 1> f;
  int k = 0;
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx, ++k) {
      a.row(k) << 1.0, dx, dy, dx * dx, dx * dy, dy * dy;
      f(k) = resp[wrap(static_cast<std::ptrdiff_t>(pr) + dy, n) * n +
                  wrap(static_cast<std::ptrdiff_t>(pc) + dx, n)];
    }
  }
  const Eigen::Matrix<double, 6, 1> q = a.colPivHouseholderQr().solve(f);
  Eigen::Matrix2d hess;
  hess << 2.0 * q(3), q(4), q(4), 2.0 * q(5);
  Eigen::Vector2d sub(0.0, 0.0);
  if (hess(0, 0) < 0.0 && hess.determinant() > 0.0) {
    sub = hess.inverse() * Eigen::Vector2d(-q(1), -q(2));
  } else {
    // Separable parabolas along each axis.
    auto vertex = [](double l, double c, double r) {
      const double denom = l - 2.0 * c + r;
      return denom < 0.0 ? 0.5 * (l - r) / denom : 0.0;
    };
    sub(0) = vertex(f(3), f(4), f(5));
    sub(1) = vertex(f(1), f(4), f(7));
  }
  if (!sub.allFinite()) sub.setZero();
  return sub.cwiseMax(-0.5).cwiseMin(0.5);
}

}  // namespace

FeatureMap::FeatureMap(std::size_t h, std::size_t w, std::size_t c, double stride_px)
    : height(h), width(w), channels(c), stride(stride_px), data(h * w * c, 0.0f) {}

void FeatureMap::validate() const {
  if (height == 0 || width == 0 || channels == 0) {
    throw Error(Errc::Shape, "feature map dimensions must be >= 1");
  }
  if (!(stride > 0.0) || !std::isfinite(stride)) {
    throw Error(Errc::Shape, "feature map stride must be > 0");
  }
  if (data.size() != height * width * channels) {
    throw Error(Errc::Shape, "feature map payload does not match its dimensions");
  }
}

void DcfConfig::validate() const {
  if (patch_cells < 8) throw Error(Errc::Config, "dcf_patch_cells must be >= 8");
  if (!(lambda > 0.0)) throw Error(Errc::Config, "dcf_lambda must be > 0");
  if (!(learning_rate > 0.0) || learning_rate > 1.0) {
    throw Error(Errc::Config, "dcf_learning_rate must be in (0, 1]");
  }
  if (!(label_sigma > 0.0)) throw Error(Errc::Config, "dcf_label_sigma must be > 0");
  if (!std::isfinite(psr_min)) throw Error(Errc::Config, "dcf_psr_min must be finite");
}

FeaturePatch extract_patch(const FeatureMap& map, const Point& center, std::size_t size) {
  map.validate();
  if (!is_finite(center)) throw Error(Errc::InvalidInput, "non-finite patch centre");
  if (size < 8) throw Error(Errc::Shape, "patch size must be >= 8 cells");

  const double cx_cell = std::round(center.x / map.stride);
  const double cy_cell = std::round(center.y / map.stride);
  // Far-away centres replicate the border anyway; clamp to keep the index
  // arithmetic in range.
  const double reach = static_cast<double>(std::max(map.width, map.height) + size);
  const auto cx = static_cast<std::ptrdiff_t>(std::clamp(cx_cell, -reach, reach));
  const auto cy = static_cast<std::ptrdiff_t>(std::clamp(cy_cell, -reach, reach));

  FeaturePatch patch;
  patch.size = size;
  patch.channels = map.channels;
  patch.stride = map.stride;
  patch.origin = {static_cast<double>(cx) * map.stride, static_cast<double>(cy) * map.stride};
  patch.data.resize(size * size * map.channels);

  const auto half = static_cast<std::ptrdiff_t>(size / 2);
  const auto max_row = static_cast<std::ptrdiff_t>(map.height) - 1;
  const auto max_col = static_cast<std::ptrdiff_t>(map.width) - 1;
  for (std::size_t r = 0; r < size; ++r) {
    const auto src_r = static_cast<std::size_t>(
        std::clamp<std::ptrdiff_t>(cy - half + static_cast<std::ptrdiff_t>(r), 0, max_row));
    for (std::size_t c = 0; c < size; ++c) {
      const auto src_c = static_cast<std::size_t>(
          std::clamp<std::ptrdiff_t>(cx - half + static_cast<std::ptrdiff_t>(c), 0, max_col));
      for (std::size_t ch = 0; ch < map.channels; ++ch) {
        patch.at(r, c, ch) = map.at(src_r, src_c, ch);
      }
    }
  }
  return patch;
}

void CorrelationFilter::recompute() {
  filter_.assign(channels_, ComplexPlane(size_ * size_));
  for (std::size_t ch = 0; ch < channels_; ++ch) {
    for (std::size_t k = 0; k < size_ * size_; ++k) {
      filter_[ch][k] = numerator_[ch][k] / (denominator_[k] + config_.lambda);
    }
  }
}

CorrelationFilter train_filter(const FeaturePatch& patch, const DcfConfig& config) {
  config.validate();
  check_patch(patch);
  if (std::all_of(patch.data.begin(), patch.data.end(), [](double v) { return v == 0.0; })) {
    throw Error(Errc::DegeneratePatch, "cannot train a filter on an all-zero patch");
  }
  CorrelationFilter f;
  f.size_ = patch.size;
  f.channels_ = patch.channels;
  f.config_ = config;
  patch_statistics(patch, config, f.numerator_, f.denominator_);
  f.recompute();
  return f;
}

CorrelationFilter update_filter(const CorrelationFilter& filter, const FeaturePatch& patch) {
  check_match(filter, patch);
  std::vector<ComplexPlane> num;
  std::vector<double> den;
  patch_statistics(patch, filter.config_, num, den);

  const double eta = filter.config_.learning_rate;
  CorrelationFilter out = filter;
  for (std::size_t ch = 0; ch < out.channels_; ++ch) {
    for (std::size_t k = 0; k < num[ch].size(); ++k) {
      out.numerator_[ch][k] = (1.0 - eta) * out.numerator_[ch][k] + eta * num[ch][k];
    }
  }
  for (std::size_t k = 0; k < den.size(); ++k) {
    out.denominator_[k] = (1.0 - eta) * out.denominator_[k] + eta * den[k];
  }
  out.recompute();
  return out;
}

ComplexPlane complex_response(const CorrelationFilter& filter, const FeaturePatch& patch) {
  check_match(filter, patch);
  const std::size_t n = filter.size();
  // The search patch is correlated unwindowed: a windowed search patch gives
  // pure clutter a centre-heavy response envelope that inflates the PSR.
  const std::vector<ComplexPlane> z = patch_spectra(patch, false);
  ComplexPlane acc(n * n, {0.0, 0.0});
  const std::vector<ComplexPlane>& h = filter.frequency_filter();
  for (std::size_t ch = 0; ch < filter.channels(); ++ch) {
    for (std::size_t k = 0; k < n * n; ++k) acc[k] += h[ch][k] * z[ch][k];
  }
  fft2(acc, n, true);
  return acc;
}

std::vector<double> response_map(const CorrelationFilter& filter, const FeaturePatch& patch) {
  const ComplexPlane resp = complex_response(filter, patch);
  std::vector<double> out(resp.size());
  std::transform(resp.begin(), resp.end(), out.begin(), [](const auto& v) { return v.real(); });
  return out;
}

Localization localize(const CorrelationFilter& filter, const FeaturePatch& patch) {
  const std::vector<double> resp = response_map(filter, patch);
  const std::size_t n = filter.size();

  const auto peak_it = std::max_element(resp.begin(), resp.end());
  const auto peak_idx = static_cast<std::size_t>(peak_it - resp.begin());
  const std::size_t pr = peak_idx / n;
  const std::size_t pc = peak_idx % n;

  // Sidelobe statistics outside the exclusion window around the peak.
  const std::ptrdiff_t half = std::min<std::ptrdiff_t>(5, static_cast<std::ptrdiff_t>(n / 2) - 1);
  const auto circ = [n](std::size_t a, std::size_t b) {
    const std::size_t d = a > b ? a - b : b - a;
    return static_cast<std::ptrdiff_t>(std::min(d, n - d));
  };
  double sum = 0.0, sum_sq = 0.0;
  std::size_t count = 0;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      if (circ(r, pr) <= half && circ(c, pc) <= half) continue;
      const double v = resp[r * n + c];
      sum += v;
      sum_sq += v * v;
      ++count;
    }
  }
  Localization loc;
  loc.peak = *peak_it;
  if (count > 0) {
    const double mean = sum / static_cast<double>(count);
    const double var = std::max(0.0, sum_sq / static_cast<double>(count) - mean * mean);
    const double sd = std::sqrt(var);
    loc.psr = sd > 1e-12 ? (loc.peak - mean) / sd : 0.0;
  }

  const Eigen::Vector2d sub = refine_peak(resp, n, pr, pc);
  // Circular-shift convention: displacements live in [-S/2, S/2).
  const auto signed_shift = [n](std::size_t idx) {
    const auto centre = static_cast<std::ptrdiff_t>(n / 2);
    const auto m = static_cast<std::ptrdiff_t>(n);
    std::ptrdiff_t d = static_cast<std::ptrdiff_t>(idx) - centre;
    d = ((d + centre) % m + m) % m - centre;
    return static_cast<double>(d);
  };
  loc.offset = {(signed_shift(pc) + sub(0)) * patch.stride, (signed_shift(pr) + sub(1)) * patch.stride};
  return loc;
}

}  // namespace ptrack
