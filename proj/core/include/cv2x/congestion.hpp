#pragma once

#include <vector>

#include "cv2x/config.hpp"
#include "cv2x/types.hpp"

namespace cv2x {

/// Per-vehicle BSM rate control: smoothed CBR mapped to an inter-transmit time.
struct RateControlState {
  double smoothed_cbr = 0.0;
  double weight = 0.5;
  std::vector<IttAnchor> anchors;
  double current_itt_ms = 100.0;
  double min_itt_ms = 100.0;
  double max_itt_ms = 600.0;
  bool enabled = true;
};

/// Throws std::invalid_argument for unsorted anchors or a weight outside (0, 1].
RateControlState make_rate_control(const ScenarioConfig& config);

/// smoothed <- w * sample + (1 - w) * smoothed. The sample must lie in [0, 100].
RateControlState smooth_cbr(RateControlState state, double sample_percent);

/// Piecewise-linear interpolation of smoothed_cbr over the anchors, clamped
/// to [min_itt, max_itt].
double target_itt(const RateControlState& state);

/// last_tx + current ITT (the lower bound when rate control is disabled).
Subframe next_bsm_time(Subframe last_tx_ms, const RateControlState& state);

/// smooth_cbr followed by current_itt <- target_itt.
RateControlState update(RateControlState state, double sample_percent);

}  // namespace cv2x
