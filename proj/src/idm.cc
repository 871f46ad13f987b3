#include "raqmdp/idm.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace raqmdp {

void IdmParams::validate() const {
  const std::pair<const char*, double> fields[] = {{"s0", s0},         {"rho", rho},
                                                   {"v_desired", v_desired}, {"a_max", a_max},
                                                   {"b_safe", b_safe}, {"b_max", b_max}};
  for (const auto& [name, value] : fields) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw std::invalid_argument(std::string("idm.") + name + " must be finite and > 0");
    }
  }
  if (b_max < b_safe) throw std::invalid_argument("idm.b_max must be >= idm.b_safe");
}

double safe_distance(double v, double v_lead, const IdmParams& p) {
  if (v < 0.0 || v_lead < 0.0) {
    throw std::invalid_argument("safe_distance: negative velocity");
  }
  const double reaction = v * p.rho + 0.5 * p.a_max * p.rho * p.rho;
  const double v_after = v + p.rho * p.a_max;
  const double braking =
      v_after * v_after / (2.0 * p.b_safe) - v_lead * v_lead / (2.0 * p.b_max);
  return std::max(p.s0, reaction + braking);
}

double idm_accel_unclamped(double v, const std::optional<LeadInfo>& lead,
                           const IdmParams& p) {
  const double ratio = v / p.v_desired;
  double a = 1.0 - ratio * ratio * ratio * ratio;
  if (lead) {
    if (lead->gap <= 0.0) return -p.b_max;
    const double z = safe_distance(v, std::max(lead->velocity, 0.0), p) / lead->gap;
    a -= z * z;
  }
  return p.a_max * a;
}

double idm_accel(double v, const std::optional<LeadInfo>& lead, const IdmParams& p,
                 AccelBounds bounds) {
  if (v < 0.0) throw std::invalid_argument("idm_accel: negative velocity");
  if (lead && lead->gap <= 0.0) return -p.b_max;
  double a = idm_accel_unclamped(v, lead, p);
  a = std::clamp(a, bounds.lo, std::max(bounds.lo, bounds.hi));
  return std::clamp(a, -p.b_max, p.a_max);
}

}  // namespace raqmdp
