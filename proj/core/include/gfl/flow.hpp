#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gfl/losses.hpp"
#include "gfl/network.hpp"

namespace gfl {

struct ExplicitEuler {
  double h;
};
struct RK4 {
  double h;
};
/// Runge-Kutta-Fehlberg 4(5); advances with the fifth-order solution.
struct AdaptiveRKF45 {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double h_init = 1e-3;
  double h_min = 1e-12;
  double h_max = 1.0;
};
/// Linearly implicit Rosenbrock 2(3) W-method for stiff flows (large output weights).
/// The Jacobian of the flow is the negated Hessian, taken by central differences of
/// the gradient, so each step costs 2 dim(theta) + 3 gradient evaluations.
struct AdaptiveRosenbrock23 {
  double rel_tol = 1e-9;
  double abs_tol = 1e-10;
  double h_init = 1e-3;
  double h_min = 1e-12;
  double h_max = 100.0;
};
using Integrator = std::variant<ExplicitEuler, RK4, AdaptiveRKF45, AdaptiveRosenbrock23>;

struct FlowConfig {
  Integrator integrator = AdaptiveRKF45{};
  double horizon = 1.0;
  std::size_t record_every = 1;

  /// Throws DomainError when a step size, tolerance or the horizon is not positive,
  /// or h_min <= h_init <= h_max fails.
  void validate() const;
};

struct TrajectorySample {
  double t;
  double loss;
  double theta_norm;
  double grad_norm;
  double norm_grad_product;
};

struct TrajectoryLog {
  std::vector<TrajectorySample> samples;
  std::vector<double> final_theta;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;

  /// Header t,loss,theta_norm,grad_norm,norm_grad_product.
  void write_csv(std::ostream& os) const;
  /// Throws SchemaMismatch on a different header or malformed row.
  static TrajectoryLog read_csv(std::istream& is);
};

inline constexpr const char* kTrajectoryCsvHeader = "t,loss,theta_norm,grad_norm,norm_grad_product";

/// Loss at theta; writes the gradient into `grad` (same length as theta).
using Objective = std::function<double(std::span<const double> theta, std::span<double> grad)>;

/// Integrates theta' = -grad L(theta) from theta0 over [0, horizon].
///
/// Samples are taken at t = 0, after every `record_every` accepted steps, and at the
/// horizon. The adaptive integrator rejects a step whose error estimate exceeds the
/// tolerances or whose loss exceeds the previous one by more than abs_tol, and then
/// shrinks h; persistent rejection below h_min raises StepSizeUnderflow. NaN or Inf
/// in theta raises NonFiniteState.
TrajectoryLog integrate_flow(const Objective& objective, std::span<const double> theta0,
                             const FlowConfig& config);

/// Full-batch expected loss of `arch` over `data` as the objective. `data` is held by
/// reference and must outlive the returned callable, which is not thread-safe.
Objective network_objective(const Architecture& arch, const WeightedDataset& data,
                            const TargetSpec& target, const LossKind& kind);

TrajectoryLog integrate_flow(const Architecture& arch, const ParameterVector& theta0,
                             const WeightedDataset& data, const TargetSpec& target,
                             const LossKind& kind, const FlowConfig& config);

enum class VerdictTag { ConvergedToCriticalPoint, DivergingToInfinity, Undetermined };
std::string verdict_name(VerdictTag tag);

struct DichotomyThresholds {
  double grad_eps = 1e-6;
  double norm_growth_factor = 1.5;
  double tail_fraction = 0.5;
};

struct DichotomyVerdict {
  VerdictTag tag = VerdictTag::Undetermined;
  double final_grad_norm = 0.0;
  double theta_norm_slope = 0.0;   ///< least-squares slope over the tail, per unit t
  double loss_limit = 0.0;         ///< mean loss over the tail
  double norm_grad_product_slope = 0.0;
};

/// Finite-horizon trend tests on the log; thresholds on norms are relative so a common
/// rescaling of theta_norm and grad_norm leaves the verdict unchanged.
///
/// Converged: final grad_norm <= grad_eps * (largest grad_norm in the log), or exactly
/// below 1e-12, and theta_norm over the tail spans less than 1% of its largest value.
/// Diverging: final theta_norm >= growth factor * initial, positive tail slope of
/// theta_norm, and loss over the tail spans at most 1% of the initial loss.
/// Fewer than 10 samples give Undetermined.
DichotomyVerdict classify(const TrajectoryLog& log, const DichotomyThresholds& thresholds = {});

/// |(L(0) - L(T)) - trapezoid integral of grad_norm^2| / max(L(0), 1e-12).
double check_energy_identity(const TrajectoryLog& log);

/// min over samples of ||theta(0)|| + sqrt(t L(0)) - ||theta(t)||.
double check_norm_bound(const TrajectoryLog& log);

/// Least-squares slope of ys against xs (0 for fewer than two distinct xs).
double least_squares_slope(std::span<const double> xs, std::span<const double> ys);

}  // namespace gfl
