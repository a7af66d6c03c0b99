#include "ccgnn/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace ccgnn {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

std::vector<double> average_ranks(std::span<const double> abs_values) {
  const std::size_t n = abs_values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return abs_values[i] < abs_values[j]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && abs_values[order[j + 1]] == abs_values[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

namespace {

// Ranks are multiples of 1/2, so doubling them makes the null distribution of
// W+ a subset-sum count over integers.
double exact_lower_tail(std::span<const double> ranks, double statistic) {
  std::vector<long long> doubled;
  long long total = 0;
  for (double r : ranks) {
    doubled.push_back(std::llround(2.0 * r));
    total += doubled.back();
  }
  std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
  count[0] = 1.0;
  long long reach = 0;
  for (long long r : doubled) {
    for (long long s = reach; s >= 0; --s) count[static_cast<std::size_t>(s + r)] += count[static_cast<std::size_t>(s)];
    reach += r;
  }
  const long long limit = std::llround(2.0 * statistic);
  double hits = 0.0;
  for (long long s = 0; s <= limit; ++s) hits += count[static_cast<std::size_t>(s)];
  return hits / std::ldexp(1.0, static_cast<int>(ranks.size()));
}

}  // namespace

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b, double alpha) {
  if (a.size() != b.size()) throw std::invalid_argument("wilcoxon_signed_rank: samples differ in length");
  std::vector<double> diff;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (!std::isfinite(d)) throw std::invalid_argument("wilcoxon_signed_rank: non-finite difference");
    if (d != 0.0) diff.push_back(d);
  }
  if (diff.empty()) throw NoInformationError("wilcoxon_signed_rank: no information (all differences are zero)");
  if (diff.size() < kWilcoxonMinN) {
    throw std::invalid_argument("wilcoxon_signed_rank: need at least " + std::to_string(kWilcoxonMinN) +
                                " nonzero differences, got " + std::to_string(diff.size()));
  }

  std::vector<double> mags(diff.size());
  std::transform(diff.begin(), diff.end(), mags.begin(), [](double d) { return std::abs(d); });
  const std::vector<double> ranks = average_ranks(mags);

  WilcoxonResult r;
  r.n = diff.size();
  for (std::size_t i = 0; i < diff.size(); ++i) (diff[i] > 0.0 ? r.w_plus : r.w_minus) += ranks[i];
  r.statistic = std::min(r.w_plus, r.w_minus);

  if (r.n <= kWilcoxonExactMaxN) {
    r.exact = true;
    r.p_lower = exact_lower_tail(ranks, r.statistic);
  } else {
    const double n = static_cast<double>(r.n);
    // tied magnitudes share a rank, so tie groups are runs of equal ranks
    double tie_term = 0.0;
    std::vector<double> sorted = ranks;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size();) {
      std::size_t j = i;
      while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
      const double t = static_cast<double>(j - i);
      tie_term += t * t * t - t;
      i = j;
    }
    const double mean = n * (n + 1.0) / 4.0;
    const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    const double z = std::min(0.0, r.statistic - mean + 0.5) / std::sqrt(var);
    r.p_lower = normal_cdf(z);
  }
  r.p_two_sided = std::min(1.0, 2.0 * r.p_lower);
  r.significant = r.p_two_sided < alpha;
  return r;
}

}  // namespace ccgnn
