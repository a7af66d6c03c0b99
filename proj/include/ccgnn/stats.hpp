#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace ccgnn {

/// Thrown when every paired difference is zero.
class NoInformationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct WilcoxonResult {
  double w_plus = 0.0;
  double w_minus = 0.0;
  double statistic = 0.0;  // min(w_plus, w_minus)
  std::size_t n = 0;       // pairs with a nonzero difference
  bool exact = false;
  double p_lower = 1.0;      // P(W+ <= statistic) under the null
  double p_two_sided = 1.0;  // P(min(W+, W-) <= statistic) under the null
  bool significant = false;  // p_two_sided < alpha
};

inline constexpr std::size_t kWilcoxonExactMaxN = 12;
inline constexpr std::size_t kWilcoxonMinN = 5;

/// Average ranks (1-based) of |d|, ties sharing the mean of their positions.
std::vector<double> average_ranks(std::span<const double> abs_values);

/// Two-sided signed-rank test on a - b. Zero differences are dropped; exact
/// null distribution for n <= 12, otherwise the normal approximation with tie
/// and continuity corrections.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b, double alpha = 0.05);

double normal_cdf(double z);

}  // namespace ccgnn
