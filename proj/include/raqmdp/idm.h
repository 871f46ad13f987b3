#pragma once

#include <limits>
#include <optional>

namespace raqmdp {

// Longitudinal driver parameters. Defaults are the highway values used by
// every scenario in this project.
struct IdmParams {
  double s0 = 2.0;           // minimum jam distance (m)
  double rho = 0.25;         // response time (s)
  double v_desired = 29.17;  // 105 km/h
  double a_max = 2.0;
  double b_safe = 4.0;
  double b_max = 8.0;

  void validate() const;
};

struct AccelBounds {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool operator==(const AccelBounds&) const = default;
};

struct LeadInfo {
  double gap = 0.0;       // bumper to bumper (m)
  double velocity = 0.0;  // lead longitudinal speed (m/s)
};

// Worst-case-braking following distance:
//   max{s0, v*rho + a_max*rho^2/2 + (v + rho*a_max)^2/(2 b_safe) - v_lead^2/(2 b_max)}
double safe_distance(double v, double v_lead, const IdmParams& p);

// Car-following acceleration with the interaction term built on
// safe_distance. A clear lane drops the interaction term. The raw value is
// clamped to `bounds` and then to [-b_max, a_max]. A non-positive gap is
// contact and yields -b_max.
double idm_accel(double v, const std::optional<LeadInfo>& lead, const IdmParams& p,
                 AccelBounds bounds = {});

// Same formula without any clamping; exposed for tests and diagnostics.
double idm_accel_unclamped(double v, const std::optional<LeadInfo>& lead,
                           const IdmParams& p);

}  // namespace raqmdp
