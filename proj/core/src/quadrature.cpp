#include "mppchaos/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "mppchaos/error.hpp"

namespace mppchaos {

double legendre(int n, double x) {
  if (n == 0) return 1.0;
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

double shifted_legendre(int n, double t, double horizon) {
  return legendre(n, 2.0 * t / horizon - 1.0);
}

GaussLegendre::GaussLegendre(int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "Gauss-Legendre rule needs at least one node");
  nodes_.resize(n);
  weights_.resize(n);
  // Returns P_n'(x) and stores P_n(x) in value.
  const auto derivative = [n](double x, double& value) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    value = p1;
    return n * (x * p1 - p0) / (x * x - 1.0);
  };
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double value = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      const double d = derivative(x, value);
      const double step = value / d;
      x -= step;
      if (std::abs(step) < 1e-16) break;
    }
    const double d = derivative(x, value);
    nodes_[n - 1 - i] = x;
    weights_[n - 1 - i] = 2.0 / ((1.0 - x * x) * d * d);
  }

  partial_.resize(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    const auto row = partial_at(nodes_[i]);
    for (int j = 0; j < n; ++j) partial_[static_cast<std::size_t>(i) * n + j] = row[j];
  }
}

std::vector<double> GaussLegendre::partial_at(double y) const {
  const int n = size();
  // Antiderivatives int_{-1}^{y} P_m for m < n.
  std::vector<double> pv(n + 1);
  for (int m = 0; m <= n; ++m) pv[m] = legendre(m, y);
  std::vector<double> anti(n);
  anti[0] = y + 1.0;
  for (int m = 1; m < n; ++m) anti[m] = (pv[m + 1] - pv[m - 1]) / (2.0 * m + 1.0);

  std::vector<double> out(n, 0.0);
  for (int j = 0; j < n; ++j) {
    double sum = 0.0;
    for (int m = 0; m < n; ++m) sum += 0.5 * (2.0 * m + 1.0) * legendre(m, nodes_[j]) * anti[m];
    out[j] = sum;
  }
  return out;
}

std::shared_ptr<const GaussLegendre> GaussLegendre::get(int n) {
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const GaussLegendre>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_shared<const GaussLegendre>(n);
  return slot;
}

ChebyshevGrid::ChebyshevGrid(int points, double a, double b) : a_(a), b_(b) {
  if (points < 2) throw Error(ErrorCode::InvalidArgument, "Chebyshev grid needs at least two points");
  points_.resize(points);
  bary_.resize(points);
  const int n = points - 1;
  for (int k = 0; k <= n; ++k) {
    const double x = std::cos(std::numbers::pi * k / n);
    points_[k] = 0.5 * (a + b) + 0.5 * (b - a) * x;
    bary_[k] = ((k % 2) ? -1.0 : 1.0) * ((k == 0 || k == n) ? 0.5 : 1.0);
  }
}

void ChebyshevGrid::coefficients(double x, std::span<double> out) const {
  const std::size_t n = points_.size();
  for (std::size_t k = 0; k < n; ++k) {
    if (x == points_[k]) {
      for (std::size_t j = 0; j < n; ++j) out[j] = (j == k) ? 1.0 : 0.0;
      return;
    }
  }
  double denom = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = bary_[k] / (x - points_[k]);
    denom += out[k];
  }
  for (std::size_t k = 0; k < n; ++k) out[k] /= denom;
}

double ChebyshevGrid::interpolate(std::span<const double> values, double x) const {
  double num = 0.0, denom = 0.0;
  for (std::size_t k = 0; k < points_.size(); ++k) {
    if (x == points_[k]) return values[k];
    const double c = bary_[k] / (x - points_[k]);
    num += c * values[k];
    denom += c;
  }
  return num / denom;
}

}  // namespace mppchaos
