// Independent reference computations used only by the tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

namespace oracle {

/// Least squares through the normal equations in long double with partial
/// pivoting. Only valid for full-column-rank designs; rows are length p.
inline std::vector<double> least_squares(const std::vector<std::vector<double>>& rows,
                                         const std::vector<double>& y) {
  const std::size_t p = rows.front().size();
  std::vector<std::vector<long double>> a(p, std::vector<long double>(p + 1, 0.0L));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      for (std::size_t k = 0; k < p; ++k) a[j][k] += static_cast<long double>(rows[i][j]) * rows[i][k];
      a[j][p] += static_cast<long double>(rows[i][j]) * y[i];
    }
  }
  for (std::size_t c = 0; c < p; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < p; ++r) {
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
    }
    std::swap(a[c], a[piv]);
    if (std::fabs(a[c][c]) < 1e-300L) throw std::runtime_error("oracle: singular normal equations");
    for (std::size_t r = 0; r < p; ++r) {
      if (r == c) continue;
      const long double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k <= p; ++k) a[r][k] -= f * a[c][k];
    }
  }
  std::vector<double> out(p);
  for (std::size_t c = 0; c < p; ++c) out[c] = static_cast<double>(a[c][p] / a[c][c]);
  return out;
}

/// Powers 1, x, ..., x^degree.
inline std::vector<double> powers(double x, int degree) {
  std::vector<double> v(static_cast<std::size_t>(degree) + 1, 1.0);
  for (int k = 1; k <= degree; ++k) v[static_cast<std::size_t>(k)] = v[static_cast<std::size_t>(k) - 1] * x;
  return v;
}

/// Random instance satisfying the hypotheses of the confidence-thresholding
/// clamp error bound on [0,1], with norms measured by the midpoint rule on `nodes` points.
struct ClampBoundScenario {
  std::function<double(double)> h, h1, h2;
  double e1 = 0.0, e2 = 0.0, e2_prime = 0.0;
};

inline double midpoint(const std::function<double(double)>& fn, int nodes) {
  long double s = 0.0L;
  for (int k = 0; k < nodes; ++k) s += fn((k + 0.5) / nodes);
  return static_cast<double>(s / nodes);
}

inline ClampBoundScenario make_clamp_bound_scenario(std::mt19937_64& rng, int nodes) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ClampBoundScenario s;
  const double a1 = 2.0 * u(rng) - 1.0, a2 = 2.0 * u(rng) - 1.0, fr = 1.0 + 9.0 * u(rng);
  s.h = [=](double x) { return a1 * std::sin(fr * x) + a2 * x * x; };
  s.e1 = 0.05 + 0.95 * u(rng);
  s.e2 = s.e1 * u(rng);

  // h1 = h + d1 with |d1| <= e1: a scaled cosine wave.
  const double c1 = s.e1 * u(rng), w1 = 1.0 + 20.0 * u(rng), ph1 = 6.3 * u(rng);
  auto d1 = [=](double x) { return c1 * std::cos(w1 * x + ph1); };
  // h2 = h + htilde + d2 with |d2| <= e2 and htilde a sum of planted spikes.
  const double c2 = s.e2 * u(rng), w2 = 1.0 + 30.0 * u(rng);
  auto d2 = [=](double x) { return c2 * std::sin(w2 * x); };
  const int spikes = 1 + static_cast<int>(4 * u(rng));
  std::vector<std::array<double, 3>> sp;  // centre, height, half-width
  for (int k = 0; k < spikes; ++k) {
    const double sign = u(rng) < 0.5 ? -1.0 : 1.0;
    sp.push_back({u(rng), sign * (0.1 + 20.0 * u(rng)), 0.001 + 0.05 * u(rng)});
  }
  auto htilde = [sp](double x) {
    double v = 0.0;
    for (const auto& p : sp) v += p[1] * std::max(0.0, 1.0 - std::abs(x - p[0]) / p[2]);
    return v;
  };
  const auto h = s.h;
  s.h1 = [=](double x) { return h(x) + d1(x); };
  s.h2 = [=](double x) { return h(x) + htilde(x) + d2(x); };
  s.e2_prime = midpoint([&](double x) { return std::abs(htilde(x)); }, nodes);
  return s;
}

}  // namespace oracle
