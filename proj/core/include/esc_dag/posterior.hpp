#pragma once

#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "esc_dag/data.hpp"
#include "esc_dag/gram_kernel.hpp"
#include "esc_dag/rng.hpp"

namespace esc_dag {

/// How the per-row support-size cap R_j is chosen.
///  - ConditionP: strict_floor(n / log p * max(1 / log n, c3))
///  - OrderCap:   floor(n / log p)
///  - Explicit:   r_explicit[j] (or r_explicit[0] if a single value is given)
/// Every rule is further capped at min(j, n - 2).
enum class RRule { ConditionP, OrderCap, Explicit };

/// ESC uses the improper power prior on d_j; MESC swaps in IG(nu0 / 2, nu0').
enum class PriorVariant { ESC, MESC };

struct Hyperparams {
  double alpha = 0.999;
  double gamma = 0.1;
  double nu0 = 0.0;
  double nu0_prime = 1.0;
  double c1 = 0.0005;
  double c2 = 2.0;
  double c3 = 1e-4;
  RRule r_rule = RRule::OrderCap;
  std::vector<int> r_explicit;
  PriorVariant variant = PriorVariant::ESC;

  /// Throws InvalidArgument for values that make the posterior undefined
  /// (alpha outside (0, 1), gamma <= 0, ...). Returns warnings for values that
  /// only leave the theoretical regime (c2 < 2).
  std::vector<std::string> validate() const;
};

struct SupportScore {
  double log_score = -std::numeric_limits<double>::infinity();
  double d_hat = 0.0;

  bool admissible() const noexcept { return log_score > -std::numeric_limits<double>::infinity(); }
};

/// Largest integer strictly smaller than `x`.
long strict_floor(double x);

/// Support-size cap for column `column` (zero-based; the column has `column`
/// candidate predictors).
int default_R(int n, int p, const Hyperparams& hyper, int column);

/// Unnormalized log prior of a support of `size` among `candidates`
/// predictors: -log C(candidates, size) - size (log c1 + c2 log p), or -inf
/// when size > cap.
double log_prior_support(int size, int candidates, int p, const Hyperparams& hyper, int cap);

inline double log_prior_support(const SupportSet& support, int p, const Hyperparams& hyper, int cap) {
  return log_prior_support(support.size(), support.column(), p, hyper, cap);
}

/// Log unnormalized marginal posterior of a support from its residual
/// variance; the shared core of the overloads below.
SupportScore score_from_d_hat(int size, int candidates, double d_hat, int n, int p,
                              const Hyperparams& hyper, int cap);

SupportScore log_marginal_support(const DataMatrix& data, const SupportSet& support,
                                  const Hyperparams& hyper, int cap);
SupportScore log_marginal_support(const FitSummary& fit, const DataMatrix& data,
                                  const Hyperparams& hyper, int cap);

/// Shape and rate of the inverse-gamma conditional of d_j.
struct InverseGammaParams {
  double shape;
  double rate;
};
InverseGammaParams d_posterior_params(double d_hat, int n, const Hyperparams& hyper);

/// Draw from the inverse-gamma conditional given d_hat. Throws InvalidState
/// for d_hat == 0 under ESC.
double sample_d(double d_hat, int n, const Hyperparams& hyper, Rng& rng);
double sample_d(const DataMatrix& data, const SupportSet& support, const Hyperparams& hyper, Rng& rng);

/// Draw a_S ~ N(a_hat, d / (alpha + gamma) (X_S^T X_S)^-1), sorted index order.
Eigen::VectorXd sample_a(const FitSummary& fit, double d, const Hyperparams& hyper, Rng& rng);
Eigen::VectorXd sample_a(const DataMatrix& data, const SupportSet& support, double d,
                         const Hyperparams& hyper, Rng& rng);

std::string to_string(RRule rule);
std::string to_string(PriorVariant variant);
RRule parse_r_rule(const std::string& text);
PriorVariant parse_variant(const std::string& text);

}  // namespace esc_dag
