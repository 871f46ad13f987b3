#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "raqmdp/traffic_core.h"

namespace raqmdp {

enum class StateField { kX, kY, kVx, kVy, kAx, kAy };

double get_field(const VehicleState& s, StateField f);
void set_field(VehicleState& s, StateField f, double value);

// Addresses one continuous belief dimension: a field of one road object.
struct DimLabel {
  int object_id = kEgoId;
  StateField field = StateField::kVy;

  bool operator==(const DimLabel&) const = default;
};

// One discrete realization of the world (e.g. "object present" / "clear").
struct Hypothesis {
  std::string label;
  WorldState world;
  double probability = 1.0;
};

// Gaussian over the labelled continuous dims, layered on top of every discrete
// hypothesis. The mean is written into each hypothesis world at its dims.
struct BeliefState {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  std::vector<DimLabel> dims;
  std::vector<Hypothesis> hypotheses;

  static BeliefState certain(WorldState world, std::string label = "certain");

  // Throws std::invalid_argument when shapes disagree, the covariance is not
  // symmetric PSD (1e-9 tolerance), or probabilities do not form a
  // distribution.
  void validate() const;
};

using FeasibilityFn = std::function<bool(const WorldState&)>;

struct FeasibilityLimits {
  double v_min = 0.0;
  double v_max = kMaxSpeed;
  double accel_limit = 8.0;
};

// On-road position, no overlap between objects sharing a lane, and speed and
// acceleration within limits for every object including the ego.
FeasibilityFn make_default_feasibility(RoadModel road, FeasibilityLimits limits = {});

struct SigmaPointOptions {
  double w0 = 0.5;
  // Per-dim closeness tolerance; a single entry applies to all dims.
  std::vector<double> closeness_epsilon{1e-3};
  FeasibilityFn feasible;  // empty: everything feasible
};

struct SigmaPoint {
  WorldState world;
  double weight = 0.0;
  // 0 is the centre, i in [1, n] is mean + column i, n + i is mean - column i.
  int continuous_index = 0;
  int hypothesis_index = 0;
};

struct SigmaPointSet {
  std::vector<SigmaPoint> points;
  double w0 = 0.0;
  int n_effective = 0;
  int n_dims = 0;

  double total_weight() const;
};

// Symmetric square root of a PSD matrix via its eigen-decomposition; tiny
// negative eigenvalues are treated as zero.
Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& m);

// Unscented-transform sampling of the continuous block, with perturbation
// pairs dropped when either side is infeasible or the pair is within
// closeness_epsilon of the centre in every dim. Weights use the retained pair
// count. Each continuous point is crossed with every hypothesis.
SigmaPointSet generate_sigma_points(const BeliefState& belief,
                                    const SigmaPointOptions& options = {});

// Weighted mean and covariance of the labelled dims across the points.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> reconstruct_moments(
    const SigmaPointSet& set, const std::vector<DimLabel>& dims);

}  // namespace raqmdp
