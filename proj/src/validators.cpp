#include "ptrack/validators.hpp"

#include <algorithm>
#include <cmath>

#include "ptrack/error.hpp"

namespace ptrack {

std::optional<double> validate(const TrajectoryValidator& validator, const ValidationContext& context) {
  const std::optional<double> p = validator.probability(context);
  if (p && (!(*p >= 0.0) || *p > 1.0)) {
    throw Error(Errc::InvalidScore, "validator returned a value outside [0, 1]");
  }
  return p;
}

std::optional<double> ScoreColumnValidator::probability(const ValidationContext& context) const {
  return context.detection_score;
}

void FeatureEnergyConfig::validate() const {
  if (!(scale > 0.0)) throw Error(Errc::Config, "energy_scale must be > 0");
  if (!std::isfinite(offset)) throw Error(Errc::Config, "energy_offset must be finite");
  if (radius_cells < 0) throw Error(Errc::Config, "energy_radius_cells must be >= 0");
}

FeatureEnergyValidator::FeatureEnergyValidator(FeatureEnergyConfig config) : config_(config) {
  config_.validate();
}

double FeatureEnergyValidator::energy(const FeatureMap& map, const Point& position) const {
  const auto cx = static_cast<std::ptrdiff_t>(std::lround(position.x / map.stride));
  const auto cy = static_cast<std::ptrdiff_t>(std::lround(position.y / map.stride));
  const auto max_r = static_cast<std::ptrdiff_t>(map.height) - 1;
  const auto max_c = static_cast<std::ptrdiff_t>(map.width) - 1;
  double total = 0.0;
  std::size_t cells = 0;
  for (std::ptrdiff_t dy = -config_.radius_cells; dy <= config_.radius_cells; ++dy) {
    for (std::ptrdiff_t dx = -config_.radius_cells; dx <= config_.radius_cells; ++dx) {
      const auto r = static_cast<std::size_t>(std::clamp(cy + dy, std::ptrdiff_t{0}, max_r));
      const auto c = static_cast<std::size_t>(std::clamp(cx + dx, std::ptrdiff_t{0}, max_c));
      for (std::size_t ch = 0; ch < map.channels; ++ch) {
        const double v = map.at(r, c, ch);
        total += v * v;
      }
      ++cells;
    }
  }
  return total / static_cast<double>(cells);
}

std::optional<double> FeatureEnergyValidator::probability(const ValidationContext& context) const {
  if (context.features == nullptr || !is_finite(context.position)) return std::nullopt;
  const double e = energy(*context.features, context.position);
  return 1.0 / (1.0 + std::exp(-(e - config_.offset) / config_.scale));
}

}  // namespace ptrack
