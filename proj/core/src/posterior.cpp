#include "esc_dag/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "esc_dag/errors.hpp"

namespace esc_dag {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_binomial(int m, int k) {
  return std::lgamma(m + 1.0) - std::lgamma(k + 1.0) - std::lgamma(m - k + 1.0);
}

}  // namespace

std::vector<std::string> Hyperparams::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  if (!(gamma > 0.0)) throw InvalidArgument("gamma must be positive");
  if (!(nu0 >= 0.0)) throw InvalidArgument("nu0 must be nonnegative");
  if (!(c1 > 0.0)) throw InvalidArgument("c1 must be positive");
  if (!(c3 > 0.0)) throw InvalidArgument("c3 must be positive");
  if (variant == PriorVariant::MESC && !(nu0_prime > 0.0)) {
    throw InvalidArgument("nu0_prime must be positive for MESC");
  }
  if (r_rule == RRule::Explicit && r_explicit.empty()) {
    throw InvalidArgument("explicit R rule needs at least one cap value");
  }
  std::vector<std::string> warnings;
  if (c2 < 2.0) warnings.emplace_back("c2 < 2 is outside the regime where selection consistency is known");
  return warnings;
}

long strict_floor(double x) {
  return static_cast<long>(std::ceil(x)) - 1;
}

int default_R(int n, int p, const Hyperparams& hyper, int column) {
  if (n < 3 || p < 2) throw InvalidArgument("default_R needs n >= 3 and p >= 2");
  const double log_p = std::log(static_cast<double>(p));
  long rule = 0;
  switch (hyper.r_rule) {
    case RRule::ConditionP:
      rule = strict_floor(n / log_p * std::max(1.0 / std::log(static_cast<double>(n)), hyper.c3));
      break;
    case RRule::OrderCap:
      rule = static_cast<long>(std::floor(n / log_p));
      break;
    case RRule::Explicit: {
      const auto& caps = hyper.r_explicit;
      if (caps.empty()) throw InvalidArgument("explicit R rule needs at least one cap value");
      rule = caps.size() == 1 ? caps[0] : caps.at(static_cast<std::size_t>(column));
      break;
    }
  }
  return static_cast<int>(std::max(0L, std::min({rule, static_cast<long>(column), static_cast<long>(n - 2)})));
}

double log_prior_support(int size, int candidates, int p, const Hyperparams& hyper, int cap) {
  if (size > cap || size > candidates) return kNegInf;
  return -log_binomial(candidates, size) -
         size * (std::log(hyper.c1) + hyper.c2 * std::log(static_cast<double>(p)));
}

SupportScore score_from_d_hat(int size, int candidates, double d_hat, int n, int p,
                              const Hyperparams& hyper, int cap) {
  SupportScore score;
  score.d_hat = d_hat;
  const double prior = log_prior_support(size, candidates, p, hyper, cap);
  if (prior == kNegInf) return score;
  const double power = (hyper.alpha * n + hyper.nu0) / 2.0;
  double fit_term = 0.0;
  if (hyper.variant == PriorVariant::ESC) {
    if (!(d_hat > 0.0)) return score;
    fit_term = -power * std::log(d_hat);
  } else {
    fit_term = -power * std::log(hyper.alpha * n * d_hat / 2.0 + hyper.nu0_prime);
  }
  score.log_score = prior - 0.5 * size * std::log1p(hyper.alpha / hyper.gamma) + fit_term;
  return score;
}

SupportScore log_marginal_support(const DataMatrix& data, const SupportSet& support,
                                  const Hyperparams& hyper, int cap) {
  const int n = static_cast<int>(data.n());
  const int p = static_cast<int>(data.p());
  if (support.size() > cap) return SupportScore{};
  try {
    const double d_hat = residual_variance(data, support);
    return score_from_d_hat(support.size(), support.column(), d_hat, n, p, hyper, cap);
  } catch (const SingularGram&) {
    return SupportScore{};
  }
}

SupportScore log_marginal_support(const FitSummary& fit, const DataMatrix& data,
                                  const Hyperparams& hyper, int cap) {
  return score_from_d_hat(fit.size(), fit.column(), fit.d_hat(), static_cast<int>(data.n()),
                          static_cast<int>(data.p()), hyper, cap);
}

InverseGammaParams d_posterior_params(double d_hat, int n, const Hyperparams& hyper) {
  const double shape = (hyper.alpha * n + hyper.nu0) / 2.0;
  double rate = hyper.alpha * n * d_hat / 2.0;
  if (hyper.variant == PriorVariant::MESC) rate += hyper.nu0_prime;
  return {shape, rate};
}

double sample_d(double d_hat, int n, const Hyperparams& hyper, Rng& rng) {
  if (hyper.variant == PriorVariant::ESC && !(d_hat > 0.0)) {
    throw InvalidState("d_hat must be positive to sample d under ESC");
  }
  const auto [shape, rate] = d_posterior_params(d_hat, n, hyper);
  std::gamma_distribution<double> gamma(shape, 1.0 / rate);
  double draw = 0.0;
  while (!(draw > 0.0)) draw = gamma(rng);
  return 1.0 / draw;
}

double sample_d(const DataMatrix& data, const SupportSet& support, const Hyperparams& hyper, Rng& rng) {
  return sample_d(residual_variance(data, support), static_cast<int>(data.n()), hyper, rng);
}

Eigen::VectorXd sample_a(const FitSummary& fit, double d, const Hyperparams& hyper, Rng& rng) {
  if (!(d > 0.0)) throw InvalidArgument("sample_a needs d > 0");
  const Eigen::Index k = fit.size();
  if (k == 0) return Eigen::VectorXd(0);
  Eigen::VectorXd noise(k);
  for (Eigen::Index i = 0; i < k; ++i) noise(i) = standard_normal(rng);
  // L^-T xi has covariance (L L^T)^-1 = Gram^-1.
  fit.gram_chol().triangularView<Eigen::Lower>().transpose().solveInPlace(noise);
  noise *= std::sqrt(d / (hyper.alpha + hyper.gamma));

  const auto order = fit.factor_order();
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  std::sort(perm.begin(), perm.end(), [&](Eigen::Index a, Eigen::Index b) { return order[a] < order[b]; });
  Eigen::VectorXd draw = fit.a_hat();
  for (Eigen::Index i = 0; i < k; ++i) draw(i) += noise(perm[static_cast<std::size_t>(i)]);
  return draw;
}

Eigen::VectorXd sample_a(const DataMatrix& data, const SupportSet& support, double d,
                         const Hyperparams& hyper, Rng& rng) {
  if (support.empty()) throw InvalidArgument("sample_a needs a nonempty support");
  // Kernel over just the support columns followed by the response column.
  const int k = support.size();
  Eigen::MatrixXd sub(data.n(), k + 1);
  for (int i = 0; i < k; ++i) sub.col(i) = data.column(support.indices()[i]);
  sub.col(k) = data.column(support.column());
  const DataMatrix local(std::move(sub));
  const GramKernel kernel(local);
  std::vector<int> leading(static_cast<std::size_t>(k));
  std::iota(leading.begin(), leading.end(), 0);
  return sample_a(kernel.fit(SupportSet(k, std::move(leading))), d, hyper, rng);
}

std::string to_string(RRule rule) {
  switch (rule) {
    case RRule::ConditionP: return "condition_p";
    case RRule::OrderCap: return "order_cap";
    case RRule::Explicit: return "explicit";
  }
  return "order_cap";
}

std::string to_string(PriorVariant variant) {
  return variant == PriorVariant::ESC ? "esc" : "mesc";
}

RRule parse_r_rule(const std::string& text) {
  if (text == "condition_p") return RRule::ConditionP;
  if (text == "order_cap") return RRule::OrderCap;
  if (text == "explicit") return RRule::Explicit;
  throw InvalidArgument("unknown R rule '" + text + "'");
}

PriorVariant parse_variant(const std::string& text) {
  if (text == "esc" || text == "ESC") return PriorVariant::ESC;
  if (text == "mesc" || text == "MESC") return PriorVariant::MESC;
  throw InvalidArgument("unknown prior variant '" + text + "'");
}

}  // namespace esc_dag
