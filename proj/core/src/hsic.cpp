#include "fsmirl/hsic.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

#include "fsmirl/rng.hpp"
#include "fsmirl/types.hpp"

namespace fsmirl {

SampleWeights SampleWeights::ones(Eigen::Index n) {
  return SampleWeights{Eigen::VectorXd::Ones(n)};
}

bool project_to_simplex(SampleWeights& sw) {
  const Eigen::Index n = sw.w.size();
  if (n == 0) throw ShapeError("project_to_simplex: empty weights");
  sw.w = sw.w.cwiseMax(0.0);
  const double total = sw.w.sum();
  if (total <= 0.0) return false;
  sw.w *= static_cast<double>(n) / total;
  return true;
}

namespace {

void check_gram_pair(const GramMatrix& kx, const GramMatrix& ky) {
  if (kx.rows() != kx.cols() || ky.rows() != ky.cols())
    throw ShapeError("hsic: Gram matrices must be square");
  if (kx.rows() != ky.rows())
    throw ShapeError("hsic: Gram sizes differ: " + std::to_string(kx.rows()) +
                     " vs " + std::to_string(ky.rows()));
}

// Tr(kx J ky J) = <J kx J, J ky J> because J is an idempotent projector.
// Centering both sides makes the value symmetric in its arguments down to
// the last bit: the elementwise products commute and the summation order
// is fixed by position.
double centered_trace(const GramMatrix& kx, const GramMatrix& ky) {
  return (center(kx).array() * center(ky).array()).sum();
}

}  // namespace

double hsic_biased(const GramMatrix& kx, const GramMatrix& ky) {
  check_gram_pair(kx, ky);
  const double n = static_cast<double>(kx.rows());
  return centered_trace(kx, ky) / (n * n);
}

double hsic_scaled(const GramMatrix& kx, const GramMatrix& ky) {
  check_gram_pair(kx, ky);
  if (kx.rows() < 2)
    throw ValidationError("hsic_scaled: divisor (n-1)^2 is zero for n=1");
  const double nm1 = static_cast<double>(kx.rows() - 1);
  return centered_trace(kx, ky) / (nm1 * nm1);
}

namespace {

KernelSpec resolve_bandwidth(const KernelSpec& spec, const Eigen::VectorXd& u) {
  if (spec.kind != KernelKind::Gaussian || spec.bandwidth != KernelSpec::kAuto)
    return spec;
  try {
    return KernelSpec::gaussian(median_heuristic(Eigen::MatrixXd(u)));
  } catch (const DegenerateBandwidthError&) {
    return KernelSpec::gaussian(1.0);
  }
}

}  // namespace

double weighted_hsic(const SampleWeights& w, const Eigen::VectorXd& xi,
                     const Eigen::VectorXd& xj, const KernelSpec& spec) {
  if (w.w.size() != xi.size() || xi.size() != xj.size())
    throw ShapeError("weighted_hsic: weight/column lengths differ");
  const Eigen::VectorXd ui = w.w.cwiseProduct(xi);
  const Eigen::VectorXd uj = w.w.cwiseProduct(xj);
  const GramMatrix ki = gram(resolve_bandwidth(spec, ui), Eigen::MatrixXd(ui));
  const GramMatrix kj = gram(resolve_bandwidth(spec, uj), Eigen::MatrixXd(uj));
  return hsic_scaled(ki, kj);
}

DependenceReport total_dependence(const SampleWeights& w,
                                  const Eigen::MatrixXd& X,
                                  std::span<const DimPair> pairs,
                                  const KernelSpec& spec) {
  if (pairs.empty())
    throw ValidationError(
        "total_dependence: empty pair list, objective undefined");
  if (w.w.size() != X.rows())
    throw ShapeError("total_dependence: weight length vs sample count");
  DependenceReport report;
  report.pairs.reserve(pairs.size());
  for (const auto& [i, j] : pairs) {
    if (i < 0 || j <= i || j >= X.cols())
      throw ValidationError("total_dependence: pair (" + std::to_string(i) +
                            "," + std::to_string(j) +
                            ") outside 0 <= i < j < cols");
    const double v = weighted_hsic(w, X.col(i), X.col(j), spec);
    report.pairs.push_back({i, j, v});
    report.total += v;
  }
  return report;
}

nlohmann::json DependenceReport::to_json() const {
  nlohmann::json jp = nlohmann::json::array();
  for (const auto& p : pairs)
    jp.push_back({{"i", p.i}, {"j", p.j}, {"hsic", p.value}});
  return {{"pairs", std::move(jp)}, {"total", total}, {"trace", trace}};
}

namespace {

// Gram of a weighted scalar column under a fixed gaussian bandwidth.
Eigen::MatrixXd scalar_gram(const Eigen::VectorXd& u, double bw) {
  const Eigen::Index n = u.size();
  Eigen::MatrixXd diff = u.replicate(1, n) - u.transpose().replicate(n, 1);
  return (-diff.array().square() / (2.0 * bw * bw)).exp();
}

double column_bandwidth(const Eigen::VectorXd& u) {
  try {
    return median_heuristic(Eigen::MatrixXd(u));
  } catch (const DegenerateBandwidthError&) {
    return 1.0;
  }
}

struct StepObjective {
  const Eigen::MatrixXd& X;
  std::vector<DimPair> pairs;
  // Per-column bandwidths frozen at the current iterate for this step.
  std::unordered_map<Eigen::Index, double> bandwidth;

  double eval(const Eigen::VectorXd& w) const {
    const double nm1 = static_cast<double>(X.rows() - 1);
    double total = 0.0;
    for (const auto& [a, b] : pairs) {
      const Eigen::VectorXd ua = w.cwiseProduct(X.col(a));
      const Eigen::VectorXd ub = w.cwiseProduct(X.col(b));
      const Eigen::MatrixXd ka = scalar_gram(ua, bandwidth.at(a));
      const Eigen::MatrixXd kb = scalar_gram(ub, bandwidth.at(b));
      total += (center(ka).array() * center(kb).array()).sum() / (nm1 * nm1);
    }
    return total;
  }

  Eigen::VectorXd analytic_gradient(const Eigen::VectorXd& w) const {
    const Eigen::Index n = X.rows();
    const double nm1 = static_cast<double>(n - 1);
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(n);
    for (const auto& [a, b] : pairs) {
      const double bwa = bandwidth.at(a);
      const double bwb = bandwidth.at(b);
      const Eigen::VectorXd ua = w.cwiseProduct(X.col(a));
      const Eigen::VectorXd ub = w.cwiseProduct(X.col(b));
      const Eigen::MatrixXd ka = scalar_gram(ua, bwa);
      const Eigen::MatrixXd kb = scalar_gram(ub, bwb);
      // d(trace)/d(ka) = J kb J / (n-1)^2 and symmetrically for kb; the
      // gaussian entry derivative contracts to row sums of the Hadamard
      // product, one O(n^2) pass per side.
      const Eigen::MatrixXd ga = center(kb) / (nm1 * nm1);
      const Eigen::MatrixXd gb = center(ka) / (nm1 * nm1);
      const Eigen::MatrixXd ma = ga.cwiseProduct(ka);
      const Eigen::MatrixXd mb = gb.cwiseProduct(kb);
      const Eigen::VectorXd ra = ma.rowwise().sum();
      const Eigen::VectorXd rb = mb.rowwise().sum();
      const Eigen::VectorXd mua = ma * ua;
      const Eigen::VectorXd mub = mb * ub;
      grad.array() -= 2.0 / (bwa * bwa) * X.col(a).array() *
                      (ua.array() * ra.array() - mua.array());
      grad.array() -= 2.0 / (bwb * bwb) * X.col(b).array() *
                      (ub.array() * rb.array() - mub.array());
    }
    return grad;
  }

  Eigen::VectorXd fd_gradient(const Eigen::VectorXd& w) const {
    const double h = 1e-4 * std::sqrt(static_cast<double>(X.rows()));
    Eigen::VectorXd grad(w.size());
    Eigen::VectorXd probe = w;
    for (Eigen::Index m = 0; m < w.size(); ++m) {
      probe[m] = w[m] + h;
      const double up = eval(probe);
      probe[m] = w[m] - h;
      const double down = eval(probe);
      probe[m] = w[m];
      grad[m] = (up - down) / (2.0 * h);
    }
    return grad;
  }
};

}  // namespace

ReweightResult optimize_weights(const Eigen::MatrixXd& X,
                                const ReweightConfig& config) {
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  if (n < 4) throw ValidationError("optimize_weights: needs >= 4 samples");
  if (d < 2) throw ValidationError("optimize_weights: needs >= 2 columns");
  if (config.steps < 0 || config.pairs_per_step < 1 ||
      config.holdout_pairs < 1 || !(config.learning_rate >= 0.0))
    throw ConfigError("optimize_weights: invalid config");

  std::vector<DimPair> all_pairs;
  all_pairs.reserve(static_cast<std::size_t>(d) * (d - 1) / 2);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = i + 1; j < d; ++j) all_pairs.emplace_back(i, j);

  rng::Engine holdout_eng(rng::derive(config.seed, rng::kReweight, 1));
  const std::size_t hcount = std::min<std::size_t>(
      static_cast<std::size_t>(config.holdout_pairs), all_pairs.size());
  std::vector<DimPair> holdout;
  for (std::size_t idx : holdout_eng.sample_indices(all_pairs.size(), hcount))
    holdout.push_back(all_pairs[idx]);

  ReweightResult result;
  SampleWeights current = SampleWeights::ones(n);
  SampleWeights best = current;
  double best_value = total_dependence(current, X, holdout).total;
  std::vector<double> trace{best_value};
  bool current_usable = true;
  double lr = config.learning_rate;

  rng::Engine step_eng(rng::derive(config.seed, rng::kReweight, 2));
  const std::size_t per_step = std::min<std::size_t>(
      static_cast<std::size_t>(config.pairs_per_step), all_pairs.size());
  for (int t = 0; t < config.steps; ++t) {
    StepObjective obj{X, {}, {}};
    obj.pairs.reserve(per_step);
    for (std::size_t idx : step_eng.sample_indices(all_pairs.size(), per_step))
      obj.pairs.push_back(all_pairs[idx]);
    for (const auto& [a, b] : obj.pairs) {
      if (!obj.bandwidth.contains(a))
        obj.bandwidth[a] = column_bandwidth(current.w.cwiseProduct(X.col(a)));
      if (!obj.bandwidth.contains(b))
        obj.bandwidth[b] = column_bandwidth(current.w.cwiseProduct(X.col(b)));
    }

    const Eigen::VectorXd grad = config.finite_differences
                                     ? obj.fd_gradient(current.w)
                                     : obj.analytic_gradient(current.w);
    if (!grad.allFinite()) {
      result.divergence = true;
      break;
    }
    SampleWeights next{current.w - lr * grad};
    if (!project_to_simplex(next)) {
      if (result.resets >= 3) {
        result.divergence = true;
        break;
      }
      ++result.resets;
      lr *= 0.5;
      next = SampleWeights::ones(n);
    }
    current = std::move(next);
    const double value = total_dependence(current, X, holdout).total;
    if (!std::isfinite(value)) {
      result.divergence = true;
      current_usable = false;
      break;
    }
    trace.push_back(value);
    if (value < best_value) {
      best_value = value;
      best = current;
    }
  }

  for (std::size_t t = 0; t + 10 < trace.size(); ++t) {
    if (trace[t + 10] > trace[t] + 1e-12 * std::max(1.0, std::abs(trace[t])))
      result.divergence = true;
  }

  // Final iterate unless it lost ground on the holdout; the fallback never
  // exceeds the baseline because all-ones seeds the best tracker.
  result.weights = (current_usable && trace.back() <= trace.front())
                       ? std::move(current)
                       : std::move(best);
  result.holdout = total_dependence(result.weights, X, holdout);
  result.holdout.trace = std::move(trace);
  return result;
}

double apply_weights(const SampleWeights& w,
                     const Eigen::VectorXd& per_sample_losses) {
  if (w.w.size() != per_sample_losses.size())
    throw ShapeError("apply_weights: weight/loss lengths differ");
  if (w.w.size() == 0) throw ShapeError("apply_weights: empty input");
  return w.w.dot(per_sample_losses) / static_cast<double>(w.w.size());
}

}  // namespace fsmirl
