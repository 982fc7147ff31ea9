#include "cv2x/congestion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cv2x {

RateControlState make_rate_control(const ScenarioConfig& config) {
  RateControlState s;
  s.weight = config.cbr_smoothing_weight;
  s.anchors = config.itt_map_anchors;
  s.min_itt_ms = static_cast<double>(config.bsm_itt_bounds_ms[0]);
  s.max_itt_ms = static_cast<double>(config.bsm_itt_bounds_ms[1]);
  s.enabled = config.rate_control_enabled;
  if (!(s.weight > 0.0 && s.weight <= 1.0)) throw std::invalid_argument("smoothing weight must lie in (0, 1]");
  if (s.anchors.empty()) throw std::invalid_argument("rate control needs at least one anchor");
  for (std::size_t i = 1; i < s.anchors.size(); ++i) {
    if (s.anchors[i].cbr_percent < s.anchors[i - 1].cbr_percent) {
      throw std::invalid_argument("ITT anchors must be sorted by CBR");
    }
  }
  s.current_itt_ms = target_itt(s);
  return s;
}

RateControlState smooth_cbr(RateControlState state, double sample_percent) {
  if (!(sample_percent >= 0.0 && sample_percent <= 100.0)) {
    throw std::invalid_argument("CBR sample outside [0, 100]");
  }
  state.smoothed_cbr = state.weight * sample_percent + (1.0 - state.weight) * state.smoothed_cbr;
  return state;
}

double target_itt(const RateControlState& state) {
  const auto& a = state.anchors;
  const double x = state.smoothed_cbr;
  double itt = 0.0;
  if (x <= a.front().cbr_percent) {
    itt = a.front().itt_ms;
  } else if (x >= a.back().cbr_percent) {
    itt = a.back().itt_ms;
  } else {
    for (std::size_t i = 1; i < a.size(); ++i) {
      if (x <= a[i].cbr_percent) {
        const double span = a[i].cbr_percent - a[i - 1].cbr_percent;
        const double t = span > 0.0 ? (x - a[i - 1].cbr_percent) / span : 1.0;
        itt = a[i - 1].itt_ms + t * (a[i].itt_ms - a[i - 1].itt_ms);
        break;
      }
    }
  }
  return std::clamp(itt, state.min_itt_ms, state.max_itt_ms);
}

Subframe next_bsm_time(Subframe last_tx_ms, const RateControlState& state) {
  const double itt = state.enabled ? state.current_itt_ms : state.min_itt_ms;
  return last_tx_ms + static_cast<Subframe>(std::llround(itt));
}

RateControlState update(RateControlState state, double sample_percent) {
  state = smooth_cbr(std::move(state), sample_percent);
  state.current_itt_ms = target_itt(state);
  return state;
}

}  // namespace cv2x
