#include "raqmdp/belief.h"

#include <cmath>
#include <stdexcept>

namespace raqmdp {

double get_field(const VehicleState& s, StateField f) {
  switch (f) {
    case StateField::kX: return s.x;
    case StateField::kY: return s.y;
    case StateField::kVx: return s.vx;
    case StateField::kVy: return s.vy;
    case StateField::kAx: return s.ax;
    case StateField::kAy: return s.ay;
  }
  return 0.0;
}

void set_field(VehicleState& s, StateField f, double value) {
  switch (f) {
    case StateField::kX: s.x = value; break;
    case StateField::kY: s.y = value; break;
    case StateField::kVx: s.vx = value; break;
    case StateField::kVy: s.vy = value; break;
    case StateField::kAx: s.ax = value; break;
    case StateField::kAy: s.ay = value; break;
  }
}

BeliefState BeliefState::certain(WorldState world, std::string label) {
  BeliefState b;
  b.mean = Eigen::VectorXd(0);
  b.covariance = Eigen::MatrixXd(0, 0);
  b.hypotheses.push_back(Hypothesis{std::move(label), std::move(world), 1.0});
  return b;
}

void BeliefState::validate() const {
  const auto n = static_cast<Eigen::Index>(dims.size());
  if (mean.size() != n || covariance.rows() != n || covariance.cols() != n) {
    throw std::invalid_argument("belief: mean/covariance/dims size mismatch");
  }
  if (!mean.allFinite() || !covariance.allFinite()) {
    throw std::invalid_argument("belief: non-finite moments");
  }
  if (n > 0) {
    if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
      throw std::invalid_argument("belief: covariance is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(covariance,
                                                      Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-9) {
      throw std::invalid_argument("belief: covariance is not positive semi-definite");
    }
  }
  if (hypotheses.empty()) throw std::invalid_argument("belief: no hypotheses");
  double total = 0.0;
  for (const auto& h : hypotheses) {
    if (!(h.probability > 0.0 && h.probability <= 1.0)) {
      throw std::invalid_argument("belief: hypothesis probability outside (0, 1]");
    }
    total += h.probability;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("belief: hypothesis probabilities do not sum to 1");
  }
}

FeasibilityFn make_default_feasibility(RoadModel road, FeasibilityLimits limits) {
  return [road = std::move(road), limits](const WorldState& w) {
    std::vector<const RoadObject*> objs{&w.ego};
    for (const auto& o : w.others) objs.push_back(&o);
    for (const RoadObject* o : objs) {
      const auto& s = o->state;
      if (!is_finite(s) || !road.has_lane(o->lane)) return false;
      if (s.vy < limits.v_min || s.vy > limits.v_max) return false;
      if (std::abs(s.ay) > limits.accel_limit || std::abs(s.ax) > limits.accel_limit) {
        return false;
      }
    }
    for (std::size_t i = 0; i < objs.size(); ++i) {
      for (std::size_t j = i + 1; j < objs.size(); ++j) {
        const auto& a = *objs[i];
        const auto& b = *objs[j];
        if (road.effective_lane(a.lane, a.state.y) !=
            road.effective_lane(b.lane, b.state.y)) {
          continue;
        }
        const bool apart = a.state.y - a.length >= b.state.y ||
                           b.state.y - b.length >= a.state.y;
        if (!apart) return false;
      }
    }
    return true;
  };
}

double SigmaPointSet::total_weight() const {
  double s = 0.0;
  for (const auto& p : points) s += p.weight;
  return s;
}

Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return m;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const Eigen::VectorXd roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
}

namespace {

WorldState apply_dims(const WorldState& base, const std::vector<DimLabel>& dims,
                      const Eigen::VectorXd& values) {
  WorldState w = base;
  for (std::size_t d = 0; d < dims.size(); ++d) {
    RoadObject* o = w.find(dims[d].object_id);
    if (o == nullptr) {
      throw std::invalid_argument("belief: dim refers to unknown object " +
                                  std::to_string(dims[d].object_id));
    }
    set_field(o->state, dims[d].field, values[static_cast<Eigen::Index>(d)]);
  }
  return w;
}

}  // namespace

SigmaPointSet generate_sigma_points(const BeliefState& belief,
                                    const SigmaPointOptions& options) {
  belief.validate();
  if (!(options.w0 > -1.0 && options.w0 < 1.0)) {
    throw std::invalid_argument("sigma points: w0 must lie in (-1, 1)");
  }
  const int n = static_cast<int>(belief.dims.size());
  if (options.closeness_epsilon.size() != 1 &&
      options.closeness_epsilon.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("sigma points: closeness_epsilon size mismatch");
  }
  auto eps = [&](int d) {
    return options.closeness_epsilon.size() == 1 ? options.closeness_epsilon[0]
                                                 : options.closeness_epsilon[d];
  };
  auto feasible = [&](const WorldState& w) {
    return !options.feasible || options.feasible(w);
  };
  auto feasible_everywhere = [&](const Eigen::VectorXd& x) {
    for (const auto& h : belief.hypotheses) {
      if (!feasible(apply_dims(h.world, belief.dims, x))) return false;
    }
    return true;
  };

  if (!feasible_everywhere(belief.mean)) {
    throw std::runtime_error("sigma points: belief mean is physically infeasible");
  }

  std::vector<int> kept;
  Eigen::MatrixXd root;
  if (n > 0) {
    root = symmetric_sqrt(belief.covariance * (n / (1.0 - options.w0)));
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd col = root.col(i);
      bool close = true;
      for (int d = 0; d < n; ++d) close = close && std::abs(col[d]) <= eps(d);
      if (close) continue;
      if (!feasible_everywhere(belief.mean + col) ||
          !feasible_everywhere(belief.mean - col)) {
        continue;
      }
      kept.push_back(i);
    }
  }

  SigmaPointSet out;
  out.w0 = options.w0;
  out.n_dims = n;
  out.n_effective = static_cast<int>(kept.size());
  const double w_center = kept.empty() ? 1.0 : options.w0;
  const double w_side = kept.empty() ? 0.0 : (1.0 - options.w0) / (2.0 * kept.size());

  auto emit = [&](const Eigen::VectorXd& x, double w, int index) {
    for (std::size_t h = 0; h < belief.hypotheses.size(); ++h) {
      const auto& hyp = belief.hypotheses[h];
      out.points.push_back(SigmaPoint{apply_dims(hyp.world, belief.dims, x),
                                      w * hyp.probability, index,
                                      static_cast<int>(h)});
    }
  };
  emit(belief.mean, w_center, 0);
  for (int i : kept) emit(belief.mean + root.col(i), w_side, i + 1);
  for (int i : kept) emit(belief.mean - root.col(i), w_side, n + i + 1);
  return out;
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> reconstruct_moments(
    const SigmaPointSet& set, const std::vector<DimLabel>& dims) {
  const auto n = static_cast<Eigen::Index>(dims.size());
  Eigen::MatrixXd values(n, static_cast<Eigen::Index>(set.points.size()));
  for (std::size_t k = 0; k < set.points.size(); ++k) {
    for (Eigen::Index d = 0; d < n; ++d) {
      const RoadObject* o = set.points[k].world.find(dims[d].object_id);
      if (o == nullptr) throw std::invalid_argument("reconstruct: unknown object");
      values(d, static_cast<Eigen::Index>(k)) = get_field(o->state, dims[d].field);
    }
  }
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
  for (std::size_t k = 0; k < set.points.size(); ++k) {
    mean += set.points[k].weight * values.col(static_cast<Eigen::Index>(k));
  }
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < set.points.size(); ++k) {
    const Eigen::VectorXd d = values.col(static_cast<Eigen::Index>(k)) - mean;
    cov += set.points[k].weight * d * d.transpose();
  }
  return {mean, cov};
}

}  // namespace raqmdp
