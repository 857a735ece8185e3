#pragma once

#include <memory>
#include <span>
#include <vector>

namespace mppchaos {

// Legendre polynomial P_n(x) on [-1, 1].
double legendre(int n, double x);
// Shifted Legendre polynomial of degree n on [0, horizon].
double shifted_legendre(int n, double t, double horizon);

// Gauss-Legendre rule on [-1, 1] with the spectral partial-integration
// operator attached: for a smooth g sampled at the nodes,
//   int_{-1}^{x_i} g ~= sum_j weight_j * partial(i, j) * g(x_j).
class GaussLegendre {
 public:
  explicit GaussLegendre(int n);

  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }

  // (int_{-1}^{x_i} l_j) / w_j, where l_j is the j-th Lagrange basis polynomial.
  double partial(int i, int j) const { return partial_[static_cast<std::size_t>(i) * nodes_.size() + j]; }
  std::span<const double> partial_row(int i) const {
    return {partial_.data() + static_cast<std::size_t>(i) * nodes_.size(), nodes_.size()};
  }

  // Same ratio for an arbitrary upper limit y in [-1, 1].
  std::vector<double> partial_at(double y) const;

  // Integral of f over [a, b].
  template <class F>
  double integrate(F&& f, double a, double b) const {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) sum += weights_[i] * f(mid + half * nodes_[i]);
    return sum * half;
  }

  // Shared cached instance.
  static std::shared_ptr<const GaussLegendre> get(int n);

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<double> partial_;
};

// Barycentric interpolant on Chebyshev points of the second kind over [a, b].
class ChebyshevGrid {
 public:
  ChebyshevGrid(int points, double a, double b);

  int size() const { return static_cast<int>(points_.size()); }
  const std::vector<double>& points() const { return points_; }
  double lower() const { return a_; }
  double upper() const { return b_; }

  // Interpolates values sampled at points() to x.
  double interpolate(std::span<const double> values, double x) const;
  // Barycentric coefficients at x so that f(x) = sum_k c_k values_k.
  void coefficients(double x, std::span<double> out) const;

 private:
  double a_, b_;
  std::vector<double> points_;
  std::vector<double> bary_;
};

}  // namespace mppchaos
