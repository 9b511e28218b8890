#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "ptrack/geometry.hpp"

namespace ptrack {

/// Dense per-frame feature grid, channel-last row-major. Cell (r, c) is
/// centred on image pixel (c * stride, r * stride).
struct FeatureMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  double stride = 1.0;
  std::vector<float> data;

  FeatureMap() = default;
  FeatureMap(std::size_t h, std::size_t w, std::size_t c, double stride_px);

  float& at(std::size_t row, std::size_t col, std::size_t ch) {
    return data[(row * width + col) * channels + ch];
  }
  float at(std::size_t row, std::size_t col, std::size_t ch) const {
    return data[(row * width + col) * channels + ch];
  }

  /// Throws Errc::Shape / Errc::InvalidInput on a malformed map.
  void validate() const;
};

/// Square S x S x C window cut from a FeatureMap.
struct FeaturePatch {
  std::size_t size = 0;
  std::size_t channels = 0;
  double stride = 1.0;
  Point origin;  // image px of the centre cell (index size / 2)
  std::vector<double> data;

  double at(std::size_t row, std::size_t col, std::size_t ch) const {
    return data[(row * size + col) * channels + ch];
  }
  double& at(std::size_t row, std::size_t col, std::size_t ch) {
    return data[(row * size + col) * channels + ch];
  }
};

struct DcfConfig {
  std::size_t patch_cells = 32;
  double lambda = 0.01;
  double learning_rate = 0.02;
  double label_sigma = 2.0;  // cells
  double psr_min = 5.0;
  /// Train only when a confirmed track first misses instead of keeping a
  /// warm model while it is matched.
  bool init_on_miss = false;

  void validate() const;
};

using ComplexPlane = std::vector<std::complex<double>>;

class CorrelationFilter {
 public:
  std::size_t size() const { return size_; }
  std::size_t channels() const { return channels_; }
  const DcfConfig& config() const { return config_; }

  /// Per-channel frequency-domain filter, S*S coefficients each.
  const std::vector<ComplexPlane>& frequency_filter() const { return filter_; }
  const std::vector<ComplexPlane>& model_numerator() const { return numerator_; }
  const std::vector<double>& model_denominator() const { return denominator_; }

 private:
  friend CorrelationFilter train_filter(const FeaturePatch&, const DcfConfig&);
  friend CorrelationFilter update_filter(const CorrelationFilter&, const FeaturePatch&);
  void recompute();

  std::size_t size_ = 0;
  std::size_t channels_ = 0;
  DcfConfig config_;
  std::vector<ComplexPlane> numerator_;
  std::vector<double> denominator_;
  std::vector<ComplexPlane> filter_;
};

struct Localization {
  Point offset;         // image px relative to the patch origin
  double psr = 0.0;     // peak-to-sidelobe ratio
  double peak = 0.0;    // raw response maximum
};

/// Edge-replicated window centred on the cell nearest center / stride.
FeaturePatch extract_patch(const FeatureMap& map, const Point& center, std::size_t size);

CorrelationFilter train_filter(const FeaturePatch& patch, const DcfConfig& config = {});

/// Spatial correlation response before discarding the imaginary residue.
ComplexPlane complex_response(const CorrelationFilter& filter, const FeaturePatch& patch);

/// Real part of complex_response, S*S row-major; the peak sits at
/// (S/2, S/2) for a stationary target.
std::vector<double> response_map(const CorrelationFilter& filter, const FeaturePatch& patch);

Localization localize(const CorrelationFilter& filter, const FeaturePatch& patch);

/// Exponential blend of the model statistics with the new patch.
CorrelationFilter update_filter(const CorrelationFilter& filter, const FeaturePatch& patch);

}  // namespace ptrack
