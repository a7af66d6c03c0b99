#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace oracle {

std::vector<std::tuple<std::size_t, std::size_t, std::size_t, double>> prior_frame_edges(std::size_t n, std::size_t k) {
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t, double>> out;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j >= i) continue;
      const std::size_t d = i - j;
      if (d <= k) out.emplace_back(i, j, d, static_cast<double>(k + 1) - static_cast<double>(d));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

Matrix normalized_adjacency(std::size_t n, std::size_t k) {
  Matrix a(n, n);
  for (const auto& [i, j, d, w] : prior_frame_edges(n, k)) {
    (void)d;
    a(i, j) = std::max(a(i, j), w);
    a(j, i) = std::max(a(j, i), w);
  }
  for (std::size_t i = 0; i < n; ++i) a(i, i) = static_cast<double>(k);
  std::vector<double> deg(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) deg[i] += a(i, j);
  }
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out(i, j) = a(i, j) / std::sqrt(deg[i] * deg[j]);
  }
  return out;
}

Matrix product(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("oracle::product shape");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      long double s = 0.0L;
      for (std::size_t p = 0; p < a.cols(); ++p) s += static_cast<long double>(a(i, p)) * b(p, j);
      c(i, j) = static_cast<double>(s);
    }
  }
  return c;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Matrix gcn(const Matrix& adj, const Matrix& x, const Matrix& w, const Matrix* bias, double leaky_slope, bool leaky) {
  Matrix out = product(product(adj, x), w);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    for (std::size_t j = 0; j < out.cols(); ++j) {
      double v = out(i, j) + (bias != nullptr ? (*bias)(0, j) : 0.0);
      if (leaky && v < 0.0) v *= leaky_slope;
      out(i, j) = v;
    }
  }
  return out;
}

namespace {

// act(sum_p in[n][p] W[p][j] + b[j]) for a single node row.
double affine_unit(const std::vector<double>& in, const Matrix& w, const Matrix& b, std::size_t j) {
  long double s = b(0, j);
  for (std::size_t p = 0; p < in.size(); ++p) s += static_cast<long double>(in[p]) * w(p, j);
  return static_cast<double>(s);
}

}  // namespace

CorticalLiteral cortical_layer(const Matrix& h_a, const Matrix& h_v, const CorticalWeights& p, const Matrix& mu_init,
                               std::size_t segment_length) {
  const std::size_t n = h_a.rows();
  const std::size_t f_in = h_a.cols();
  const std::size_t f = p.w_a.cols();
  CorticalLiteral o{Matrix(n, f), Matrix(n, f), Matrix(n, f), Matrix(n, f), Matrix(n, f),
                    Matrix(n, f), Matrix(n, f), Matrix(n, f), Matrix(n, f), Matrix(n, f)};
  for (std::size_t node = 0; node < n; ++node) {
    std::vector<double> a(f_in), v(f_in), av(2 * f_in);
    for (std::size_t c = 0; c < f_in; ++c) {
      a[c] = h_a(node, c);
      v[c] = h_v(node, c);
      av[c] = a[c];
      av[f_in + c] = v[c];
    }
    for (std::size_t j = 0; j < f; ++j) {
      o.f_a(node, j) = sigmoid(affine_unit(a, p.w_a, p.b_a, j));
      o.f_v(node, j) = sigmoid(affine_unit(v, p.w_v, p.b_v, j));
      o.f_m(node, j) = sigmoid(affine_unit(av, p.w_m, p.b_m, j));
      o.f_w(node, j) = sigmoid(affine_unit(av, p.w_w, p.b_w, j));
      o.rho(node, j) = std::tanh(affine_unit(av, p.w_rho, p.b_rho, j));
      o.omega(node, j) = o.f_w(node, j) * o.rho(node, j);
    }
  }
  for (std::size_t node = 0; node < n; ++node) {
    for (std::size_t j = 0; j < f; ++j) {
      const double prev = (node % segment_length == 0) ? mu_init(0, j) : o.mu_raw(node - 1, j);
      o.mu_raw(node, j) = o.omega(node, j) + o.f_m(node, j) * prev;
    }
  }
  for (std::size_t node = 0; node < n; ++node) {
    std::vector<double> m(f);
    for (std::size_t c = 0; c < f; ++c) m[c] = o.mu_raw(node, c);
    for (std::size_t j = 0; j < f; ++j) {
      o.mu(node, j) = std::tanh(affine_unit(m, p.w_mu, p.b_mu, j));
      o.h_a(node, j) = o.mu(node, j) * o.f_a(node, j);
      o.h_v(node, j) = o.mu(node, j) * o.f_v(node, j);
    }
  }
  return o;
}

Matrix memory_scan_unrolled(const Matrix& omega, const Matrix& f_m, const Matrix& mu_init, std::size_t segment_length) {
  Matrix out(omega.rows(), omega.cols());
  for (std::size_t node = 0; node < omega.rows(); ++node) {
    const std::size_t start = node - node % segment_length;
    for (std::size_t j = 0; j < omega.cols(); ++j) {
      double total = 0.0;
      for (std::size_t t = start; t <= node; ++t) {
        double prod = 1.0;
        for (std::size_t s = t + 1; s <= node; ++s) prod *= f_m(s, j);
        total += omega(t, j) * prod;
      }
      double prod_all = 1.0;
      for (std::size_t s = start; s <= node; ++s) prod_all *= f_m(s, j);
      out(node, j) = total + mu_init(0, j) * prod_all;
    }
  }
  return out;
}

double pearson_offdiag(const Matrix& raw) {
  const std::size_t n = raw.rows();
  const std::size_t d = raw.cols();
  std::vector<double> mean(d, 0.0);
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t i = 0; i < n; ++i) mean[c] += raw(i, c);
    mean[c] /= static_cast<double>(n);
  }
  double total = 0.0;
  for (std::size_t x = 0; x < d; ++x) {
    for (std::size_t y = 0; y < d; ++y) {
      if (x == y) continue;
      double sxy = 0.0, sxx = 0.0, syy = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double dx = raw(i, x) - mean[x];
        const double dy = raw(i, y) - mean[y];
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
      }
      const double r = sxy / std::sqrt(sxx * syy);
      total += r * r;
    }
  }
  return total;
}

WilcoxonBrute wilcoxon(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) d.push_back(a[i] - b[i]);
  }
  const std::size_t n = d.size();
  if (n == 0 || n > 24) throw std::invalid_argument("oracle::wilcoxon: unsupported size");
  // rank = 1 + #smaller + (#equal - 1) / 2
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t smaller = 0, equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(d[j]) < std::abs(d[i])) ++smaller;
      if (std::abs(d[j]) == std::abs(d[i])) ++equal;
    }
    rank[i] = 1.0 + static_cast<double>(smaller) + (static_cast<double>(equal) - 1.0) / 2.0;
  }
  WilcoxonBrute r;
  r.n = n;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += rank[i];
    (d[i] > 0 ? r.w_plus : r.w_minus) += rank[i];
  }
  r.statistic = std::min(r.w_plus, r.w_minus);
  const double eps = 1e-9;
  std::size_t lower = 0, two = 0;
  const std::size_t count = std::size_t{1} << n;
  for (std::size_t mask = 0; mask < count; ++mask) {
    double wp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::size_t{1} << i)) wp += rank[i];
    }
    if (wp <= r.statistic + eps) ++lower;
    if (std::min(wp, total - wp) <= r.statistic + eps) ++two;
  }
  r.p_lower = static_cast<double>(lower) / static_cast<double>(count);
  r.p_two_sided = static_cast<double>(two) / static_cast<double>(count);
  return r;
}

std::vector<double> power_spectrum_naive(const std::vector<double>& frame, std::size_t fft_size) {
  const std::size_t len = frame.size();
  std::vector<double> out(fft_size / 2);
  for (std::size_t b = 1; b <= fft_size / 2; ++b) {
    long double re = 0.0L, im = 0.0L;
    for (std::size_t n = 0; n < len; ++n) {
      const double w = len == 1 ? 1.0
                                : 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                                         static_cast<double>(len - 1));
      const long double angle = -2.0L * std::numbers::pi_v<long double> * static_cast<long double>(b * n % fft_size) /
                                static_cast<long double>(fft_size);
      re += frame[n] * w * std::cos(angle);
      im += frame[n] * w * std::sin(angle);
    }
    out[b - 1] = static_cast<double>(re * re + im * im);
  }
  return out;
}

}  // namespace oracle
