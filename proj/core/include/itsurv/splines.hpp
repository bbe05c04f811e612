#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

namespace itsurv {

// Natural cubic spline basis on [boundary.lo, boundary.hi] with the given
// interior knots. Dimension K = (#interior knots) + 1; there is no intercept
// column, so the span is the set of natural cubic splines vanishing at the
// lower boundary. Every basis function has continuous first and second
// derivatives, zero second derivative at and beyond both boundaries, and is
// linear outside the boundary interval.
class SplineBasis {
 public:
  SplineBasis() = default;  // linear basis on [0, 1]
  SplineBasis(std::vector<double> interior_knots,
              std::pair<double, double> boundary_knots);

  int dim() const { return static_cast<int>(interior_.size()) + 1; }

  // Writes the K basis values at x into out (extrapolation allowed).
  void evaluate(double x, double* out) const;
  Eigen::VectorXd evaluate(double x) const;

  // Analytic derivative of each basis function (order 1 or 2). The basis is
  // C^2, so these are single-valued everywhere.
  void derivative(double x, int order, double* out) const;
  Eigen::VectorXd derivative(double x, int order) const;

  const std::vector<double>& interior_knots() const { return interior_; }
  std::pair<double, double> boundary_knots() const { return {lo_, hi_}; }

 private:
  std::vector<double> interior_;
  double lo_ = 0.0;
  double hi_ = 1.0;
  double scale_ = 1.0;  // (hi - lo), used to keep columns O(1)
};

struct KnotSelection {
  std::vector<double> interior;
  std::pair<double, double> boundary;
};

// Interior knots at the 25th/50th/75th percentiles (linear-interpolation
// quantile, h = (n-1)p), boundary knots at min/max. Duplicate percentile
// values collapse to a single knot, and interior knots falling on a boundary
// are dropped.
KnotSelection select_knots(std::vector<double> values);

// Quantile with the h = (n-1)p linear-interpolation rule; sorts a copy.
double quantile(std::vector<double> values, double p);

}  // namespace itsurv
