#pragma once

#include <cstdint>
#include <optional>

#include "ptrack/ddcf.hpp"
#include "ptrack/geometry.hpp"

namespace ptrack {

/// What a validator may look at for one track in one frame.
struct ValidationContext {
  std::int64_t frame = 0;
  Point position;
  std::optional<double> detection_score;
  const FeatureMap* features = nullptr;
};

/// Probability that a track's surroundings contain a real object. Returns
/// nullopt when the required context is missing for this frame.
class TrajectoryValidator {
 public:
  virtual ~TrajectoryValidator() = default;
  virtual std::optional<double> probability(const ValidationContext& context) const = 0;
};

/// Calls the validator and enforces the [0, 1] contract (Errc::InvalidScore).
std::optional<double> validate(const TrajectoryValidator& validator, const ValidationContext& context);

/// Uses the per-detection `score` column of the detections file.
class ScoreColumnValidator final : public TrajectoryValidator {
 public:
  std::optional<double> probability(const ValidationContext& context) const override;
};

struct FeatureEnergyConfig {
  double offset = 0.1;
  double scale = 0.02;
  int radius_cells = 1;

  void validate() const;
};

/// logistic((mean per-cell channel energy - offset) / scale) over a
/// (2r+1)^2 neighbourhood of the track position.
class FeatureEnergyValidator final : public TrajectoryValidator {
 public:
  explicit FeatureEnergyValidator(FeatureEnergyConfig config = {});

  std::optional<double> probability(const ValidationContext& context) const override;
  double energy(const FeatureMap& map, const Point& position) const;

 private:
  FeatureEnergyConfig config_;
};

}  // namespace ptrack
