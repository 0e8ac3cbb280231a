#include "gfl/flow.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <memory>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>

#include "gfl/errors.hpp"

namespace gfl {

namespace {

struct AdaptiveParams {
  double rel_tol;
  double abs_tol;
  double h_init;
  double h_min;
  double h_max;
};

std::optional<AdaptiveParams> adaptive_params(const Integrator& integ) {
  if (const auto* a = std::get_if<AdaptiveRKF45>(&integ)) {
    return AdaptiveParams{a->rel_tol, a->abs_tol, a->h_init, a->h_min, a->h_max};
  }
  if (const auto* a = std::get_if<AdaptiveRosenbrock23>(&integ)) {
    return AdaptiveParams{a->rel_tol, a->abs_tol, a->h_init, a->h_min, a->h_max};
  }
  return std::nullopt;
}

double step_of(const Integrator& integ) {
  if (const auto ad = adaptive_params(integ)) return ad->h_init;
  if (const auto* e = std::get_if<ExplicitEuler>(&integ)) return e->h;
  return std::get<RK4>(integ).h;
}

double l2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Fehlberg tableau
constexpr double kA[6][5] = {
    {0, 0, 0, 0, 0},
    {1.0 / 4, 0, 0, 0, 0},
    {3.0 / 32, 9.0 / 32, 0, 0, 0},
    {1932.0 / 2197, -7200.0 / 2197, 7296.0 / 2197, 0, 0},
    {439.0 / 216, -8.0, 3680.0 / 513, -845.0 / 4104, 0},
    {-8.0 / 27, 2.0, -3544.0 / 2565, 1859.0 / 4104, -11.0 / 40},
};
constexpr double kB5[6] = {16.0 / 135, 0, 6656.0 / 12825, 28561.0 / 56430, -9.0 / 50, 2.0 / 55};
constexpr double kB4[6] = {25.0 / 216, 0, 1408.0 / 2565, 2197.0 / 4104, -1.0 / 5, 0};

class FlowRunner {
 public:
  FlowRunner(const Objective& f, std::span<const double> theta0, const FlowConfig& cfg)
      : f_(f), cfg_(cfg), n_(theta0.size()), theta_(theta0.begin(), theta0.end()), grad_(n_) {
    if (!all_finite(theta_)) throw NonFiniteState("initial parameters are not finite");
    loss_ = f_(theta_, grad_);
    check_eval(loss_, grad_);
    record(0.0);
  }

  TrajectoryLog run() {
    double t = 0.0;
    const double T = cfg_.horizon;
    double h = step_of(cfg_.integrator);
    std::size_t since_record = 0;
    bool recorded_last = true;
    while (t < T) {
      const bool final_step = t + h >= T * (1.0 - 1e-15);
      const double h_try = final_step ? T - t : h;
      double h_next = h;
      bool ok = false;
      if (const auto ad = adaptive_params(cfg_.integrator)) {
        ok = std::holds_alternative<AdaptiveRKF45>(cfg_.integrator) ? rkf45_step(*ad, h_try, h_next)
                                                                   : rosenbrock_step(*ad, h_try, h_next);
        if (!ok) {
          ++log_.rejected_steps;
          h = h_next;
          if (h < ad->h_min) {
            throw StepSizeUnderflow("step size fell below h_min = " + std::to_string(ad->h_min) +
                                    " at t = " + std::to_string(t));
          }
          continue;
        }
        // do not let a shortened final step shrink the controller's step
        h = final_step ? std::max(h, h_next) : h_next;
        h = std::min(h, ad->h_max);
      } else {
        fixed_step(h_try);
      }
      t = final_step ? T : t + h_try;
      ++log_.accepted_steps;
      ++since_record;
      recorded_last = false;
      if (since_record == cfg_.record_every || t >= T) {
        record(t);
        since_record = 0;
        recorded_last = true;
      }
    }
    if (!recorded_last) record(T);
    log_.final_theta = theta_;
    return std::move(log_);
  }

 private:
  void check_eval(double loss, std::span<const double> grad) const {
    if (!std::isfinite(loss) || !all_finite(grad)) {
      throw NonFiniteState("loss or gradient is not finite");
    }
  }

  void record(double t) {
    const double tn = l2(theta_);
    const double gn = l2(grad_);
    log_.samples.push_back({t, loss_, tn, gn, tn * gn});
  }

  // k = -grad at theta_ + h * sum_j a_j k_j
  void stage(std::size_t s, double h, std::vector<std::vector<double>>& k, std::vector<double>& tmp,
             std::vector<double>& g) {
    for (std::size_t i = 0; i < n_; ++i) {
      double acc = theta_[i];
      for (std::size_t j = 0; j < s; ++j) acc += h * kA[s][j] * k[j][i];
      tmp[i] = acc;
    }
    f_(tmp, g);
    for (std::size_t i = 0; i < n_; ++i) k[s][i] = -g[i];
  }

  void fixed_step(double h) {
    std::vector<double> next(n_);
    if (std::holds_alternative<ExplicitEuler>(cfg_.integrator)) {
      for (std::size_t i = 0; i < n_; ++i) next[i] = theta_[i] - h * grad_[i];
    } else {
      std::vector<double> k1(n_), k2(n_), k3(n_), k4(n_), tmp(n_), g(n_);
      for (std::size_t i = 0; i < n_; ++i) k1[i] = -grad_[i];
      for (std::size_t i = 0; i < n_; ++i) tmp[i] = theta_[i] + 0.5 * h * k1[i];
      f_(tmp, g);
      for (std::size_t i = 0; i < n_; ++i) k2[i] = -g[i];
      for (std::size_t i = 0; i < n_; ++i) tmp[i] = theta_[i] + 0.5 * h * k2[i];
      f_(tmp, g);
      for (std::size_t i = 0; i < n_; ++i) k3[i] = -g[i];
      for (std::size_t i = 0; i < n_; ++i) tmp[i] = theta_[i] + h * k3[i];
      f_(tmp, g);
      for (std::size_t i = 0; i < n_; ++i) k4[i] = -g[i];
      for (std::size_t i = 0; i < n_; ++i) {
        next[i] = theta_[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      }
    }
    if (!all_finite(next)) throw NonFiniteState("parameters became non-finite during integration");
    theta_ = std::move(next);
    loss_ = f_(theta_, grad_);
    check_eval(loss_, grad_);
  }

  bool rkf45_step(const AdaptiveParams& ad, double h, double& h_next) {
    if (k_.empty()) {
      k_.assign(6, std::vector<double>(n_));
      tmp_.resize(n_);
      g_.resize(n_);
      cand_.resize(n_);
      cand_grad_.resize(n_);
    }
    for (std::size_t i = 0; i < n_; ++i) k_[0][i] = -grad_[i];
    for (std::size_t s = 1; s < 6; ++s) stage(s, h, k_, tmp_, g_);

    double err = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      double hi5 = 0.0;
      double lo4 = 0.0;
      for (std::size_t s = 0; s < 6; ++s) {
        hi5 += kB5[s] * k_[s][i];
        lo4 += kB4[s] * k_[s][i];
      }
      cand_[i] = theta_[i] + h * hi5;
      const double scale = ad.abs_tol + ad.rel_tol * std::max(std::abs(theta_[i]), std::abs(cand_[i]));
      err = std::max(err, std::abs(h * (hi5 - lo4)) / scale);
    }
    if (!std::isfinite(err) || !all_finite(cand_)) {
      h_next = 0.5 * h;
      return false;
    }
    const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    if (err > 1.0) {
      h_next = h * std::min(factor, 0.5);
      return false;
    }
    return accept_candidate(ad, h, factor, h_next);
  }

  // Accepts cand_ if it passes the loss check; shared tail of the adaptive steps.
  bool accept_candidate(const AdaptiveParams& ad, double h, double factor, double& h_next) {
    const double cand_loss = f_(cand_, cand_grad_);
    if (!std::isfinite(cand_loss) || !all_finite(cand_grad_) || cand_loss > loss_ + ad.abs_tol) {
      h_next = 0.5 * h;
      return false;
    }
    theta_.swap(cand_);
    grad_.swap(cand_grad_);
    loss_ = cand_loss;
    h_next = h * factor;
    return true;
  }

  // Shampine-Reichelt modified Rosenbrock pair: second order for any Jacobian
  // approximation, third-order stage for the error estimate.
  bool rosenbrock_step(const AdaptiveParams& ad, double h, double& h_next) {
    using Eigen::MatrixXd;
    using Eigen::VectorXd;
    const auto n = static_cast<Eigen::Index>(n_);
    cand_.resize(n_);
    cand_grad_.resize(n_);
    tmp_.assign(theta_.begin(), theta_.end());
    g_.resize(n_);
    std::vector<double> gm(n_);
    MatrixXd hess(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      const double eps = 1e-6 * std::max(1.0, std::abs(theta_[ui]));
      tmp_[ui] = theta_[ui] + eps;
      f_(tmp_, g_);
      tmp_[ui] = theta_[ui] - eps;
      f_(tmp_, gm);
      tmp_[ui] = theta_[ui];
      for (Eigen::Index r = 0; r < n; ++r) {
        const auto ur = static_cast<std::size_t>(r);
        hess(r, i) = (g_[ur] - gm[ur]) / (2.0 * eps);
      }
    }
    hess = 0.5 * (hess + hess.transpose()).eval();

    const double d = 1.0 / (2.0 + std::sqrt(2.0));
    const double e32 = 6.0 + std::sqrt(2.0);
    const Eigen::PartialPivLU<MatrixXd> lu(MatrixXd::Identity(n, n) + h * d * hess);
    const VectorXd y = Eigen::Map<const VectorXd>(theta_.data(), n);
    const VectorXd f0 = -Eigen::Map<const VectorXd>(grad_.data(), n);
    const VectorXd k1 = lu.solve(f0);
    Eigen::Map<VectorXd>(tmp_.data(), n) = y + 0.5 * h * k1;
    f_(tmp_, g_);
    const VectorXd f1 = -Eigen::Map<const VectorXd>(g_.data(), n);
    const VectorXd k2 = lu.solve(f1 - k1) + k1;
    const VectorXd ynew = y + h * k2;
    Eigen::Map<VectorXd>(tmp_.data(), n) = ynew;
    f_(tmp_, g_);
    const VectorXd f2 = -Eigen::Map<const VectorXd>(g_.data(), n);
    const VectorXd k3 = lu.solve(f2 - e32 * (k2 - f1) - 2.0 * (k1 - f0));
    const VectorXd errv = h / 6.0 * (k1 - 2.0 * k2 + k3);

    double err = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double scale = ad.abs_tol + ad.rel_tol * std::max(std::abs(y(i)), std::abs(ynew(i)));
      err = std::max(err, std::abs(errv(i)) / scale);
    }
    if (!std::isfinite(err) || !ynew.allFinite()) {
      h_next = 0.5 * h;
      return false;
    }
    const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -1.0 / 3.0), 0.2, 5.0);
    if (err > 1.0) {
      h_next = h * std::min(factor, 0.5);
      return false;
    }
    Eigen::Map<VectorXd>(cand_.data(), n) = ynew;
    return accept_candidate(ad, h, factor, h_next);
  }

  const Objective& f_;
  const FlowConfig& cfg_;
  std::size_t n_;
  std::vector<double> theta_;
  std::vector<double> grad_;
  double loss_ = 0.0;
  TrajectoryLog log_;
  std::vector<std::vector<double>> k_;
  std::vector<double> tmp_, g_, cand_, cand_grad_;
};

std::span<const double> tail_of(std::span<const double> v, double fraction) {
  const auto n = v.size();
  auto len = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));
  len = std::clamp<std::size_t>(len, std::min<std::size_t>(2, n), n);
  return v.subspan(n - len);
}

}  // namespace

void FlowConfig::validate() const {
  if (!(horizon > 0.0)) throw DomainError("flow horizon must be positive");
  if (record_every == 0) throw DomainError("record_every must be positive");
  if (const auto ad = adaptive_params(integrator)) {
    if (!(ad->rel_tol > 0.0) || !(ad->abs_tol > 0.0)) throw DomainError("tolerances must be positive");
    if (!(ad->h_min > 0.0) || !(ad->h_min <= ad->h_init) || !(ad->h_init <= ad->h_max)) {
      throw DomainError("adaptive step sizes need 0 < h_min <= h_init <= h_max");
    }
  } else if (!(step_of(integrator) > 0.0)) {
    throw DomainError("step size must be positive");
  }
}

TrajectoryLog integrate_flow(const Objective& objective, std::span<const double> theta0,
                             const FlowConfig& config) {
  config.validate();
  return FlowRunner(objective, theta0, config).run();
}

Objective network_objective(const Architecture& arch, const WeightedDataset& data,
                            const TargetSpec& target, const LossKind& kind) {
  if (data.in_dim() != arch.input_dim()) throw DimensionMismatch("dataset input dimension");
  const std::size_t r = arch.output_dim();
  auto targets = std::make_shared<std::vector<double>>();
  targets->reserve(data.size() * r);
  if (const auto* poly = std::get_if<PolynomialTarget>(&target)) {
    if (poly->p.size() != r) throw DimensionMismatch("polynomial target has the wrong output count");
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto y = evaluate(poly->p, data.x(i));
      targets->insert(targets->end(), y.begin(), y.end());
    }
  } else {
    if (data.out_dim() != r) throw DimensionMismatch("dataset label dimension");
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto y = data.y(i);
      targets->insert(targets->end(), y.begin(), y.end());
    }
  }
  auto ws = std::make_shared<Workspace>(arch);
  auto dldy = std::make_shared<std::vector<double>>(r);
  return [arch, &data, kind, targets, ws, dldy](std::span<const double> theta,
                                                 std::span<double> grad) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double w = data.weight(i);
      if (w == 0.0) continue;
      forward_into(arch, theta, data.x(i), *ws);
      const std::span<const double> y(targets->data() + i * arch.output_dim(), arch.output_dim());
      total += w * loss_eval_grad(kind, workspace_output(*ws), y, *dldy);
      backward_accumulate(arch, theta, *dldy, w, grad, *ws);
    }
    return total;
  };
}

TrajectoryLog integrate_flow(const Architecture& arch, const ParameterVector& theta0,
                             const WeightedDataset& data, const TargetSpec& target,
                             const LossKind& kind, const FlowConfig& config) {
  if (theta0.size() != param_dim(arch)) throw DimensionMismatch("parameter vector length");
  return integrate_flow(network_objective(arch, data, target, kind), theta0.values(), config);
}

std::string verdict_name(VerdictTag tag) {
  switch (tag) {
    case VerdictTag::ConvergedToCriticalPoint:
      return "ConvergedToCriticalPoint";
    case VerdictTag::DivergingToInfinity:
      return "DivergingToInfinity";
    case VerdictTag::Undetermined:
      break;
  }
  return "Undetermined";
}

double least_squares_slope(std::span<const double> xs, std::span<const double> ys) {
  const std::size_t n = std::min(xs.size(), ys.size());
  if (n < 2) return 0.0;
  const double mx = std::accumulate(xs.begin(), xs.begin() + n, 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.begin() + n, 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxx == 0.0 ? 0.0 : sxy / sxx;
}

DichotomyVerdict classify(const TrajectoryLog& log, const DichotomyThresholds& thresholds) {
  DichotomyVerdict v;
  const auto& s = log.samples;
  if (s.empty()) return v;
  std::vector<double> t, loss, tn, gn, ngp;
  for (const auto& x : s) {
    t.push_back(x.t);
    loss.push_back(x.loss);
    tn.push_back(x.theta_norm);
    gn.push_back(x.grad_norm);
    ngp.push_back(x.norm_grad_product);
  }
  const double frac = thresholds.tail_fraction;
  const auto tt = tail_of(t, frac);
  const auto tl = tail_of(loss, frac);
  const auto ttn = tail_of(tn, frac);
  v.final_grad_norm = gn.back();
  v.theta_norm_slope = least_squares_slope(tt, ttn);
  v.loss_limit = std::accumulate(tl.begin(), tl.end(), 0.0) / static_cast<double>(tl.size());
  v.norm_grad_product_slope = least_squares_slope(tt, tail_of(ngp, frac));
  if (s.size() < 10) return v;

  const double max_grad = *std::max_element(gn.begin(), gn.end());
  const double max_norm = *std::max_element(tn.begin(), tn.end());
  const auto [tn_lo, tn_hi] = std::minmax_element(ttn.begin(), ttn.end());
  const bool small_grad = gn.back() <= thresholds.grad_eps * max_grad || gn.back() <= 1e-12;
  const bool settled = *tn_hi - *tn_lo <= 0.01 * max_norm;
  if (small_grad && settled) {
    v.tag = VerdictTag::ConvergedToCriticalPoint;
    return v;
  }

  const auto [l_lo, l_hi] = std::minmax_element(tl.begin(), tl.end());
  const bool grew = tn.front() > 0.0 && tn.back() >= thresholds.norm_growth_factor * tn.front();
  const bool flat_loss = *l_hi - *l_lo <= 0.01 * loss.front();
  if (grew && v.theta_norm_slope > 0.0 && flat_loss) v.tag = VerdictTag::DivergingToInfinity;
  return v;
}

double check_energy_identity(const TrajectoryLog& log) {
  const auto& s = log.samples;
  if (s.empty()) return 0.0;
  double integral = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    const double g0 = s[i - 1].grad_norm;
    const double g1 = s[i].grad_norm;
    integral += 0.5 * (s[i].t - s[i - 1].t) * (g0 * g0 + g1 * g1);
  }
  const double drop = s.front().loss - s.back().loss;
  return std::abs(drop - integral) / std::max(s.front().loss, 1e-12);
}

double check_norm_bound(const TrajectoryLog& log) {
  const auto& s = log.samples;
  if (s.empty()) return 0.0;
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& x : s) {
    worst = std::min(worst, s.front().theta_norm + std::sqrt(x.t * s.front().loss) - x.theta_norm);
  }
  return worst;
}

void TrajectoryLog::write_csv(std::ostream& os) const {
  os << kTrajectoryCsvHeader << '\n';
  os.precision(17);
  for (const auto& x : samples) {
    os << x.t << ',' << x.loss << ',' << x.theta_norm << ',' << x.grad_norm << ','
       << x.norm_grad_product << '\n';
  }
}

TrajectoryLog TrajectoryLog::read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kTrajectoryCsvHeader) {
    throw SchemaMismatch("trajectory CSV header must be '" + std::string(kTrajectoryCsvHeader) + "'");
  }
  TrajectoryLog log;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream ls(line);
    TrajectorySample x{};
    char c1 = 0, c2 = 0, c3 = 0, c4 = 0;
    ls >> x.t >> c1 >> x.loss >> c2 >> x.theta_norm >> c3 >> x.grad_norm >> c4 >> x.norm_grad_product;
    if (!ls || c1 != ',' || c2 != ',' || c3 != ',' || c4 != ',') {
      throw SchemaMismatch("malformed trajectory row " + std::to_string(row));
    }
    log.samples.push_back(x);
  }
  return log;
}

}  // namespace gfl
