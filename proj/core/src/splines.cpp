#include "itsurv/splines.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "itsurv/errors.hpp"

namespace itsurv {

namespace {

inline double pos(double y) { return y > 0.0 ? y : 0.0; }

// Truncated cubic and its derivatives.
inline double p3(double y, int order) {
  const double z = pos(y);
  switch (order) {
    case 0: return z * z * z;
    case 1: return 3.0 * z * z;
    default: return 6.0 * z;
  }
}

}  // namespace

SplineBasis::SplineBasis(std::vector<double> interior_knots,
                         std::pair<double, double> boundary_knots)
    : interior_(std::move(interior_knots)),
      lo_(boundary_knots.first),
      hi_(boundary_knots.second) {
  if (!(lo_ < hi_)) {
    throw ConfigError("SplineBasis: boundary knots must satisfy lo < hi");
  }
  if (!std::is_sorted(interior_.begin(), interior_.end())) {
    throw ConfigError("SplineBasis: interior knots must be sorted");
  }
  for (std::size_t k = 0; k < interior_.size(); ++k) {
    if (!(interior_[k] > lo_ && interior_[k] < hi_)) {
      throw ConfigError("SplineBasis: interior knots must lie strictly inside the boundary");
    }
    if (k > 0 && interior_[k] == interior_[k - 1]) {
      throw ConfigError("SplineBasis: duplicate interior knot");
    }
  }
  scale_ = hi_ - lo_;
}

// Basis layout: column 0 is the scaled linear term (x - lo)/(hi - lo);
// columns 1..m are the curvature functions (d_{j-1}(x) - d_m(x))/(hi - lo)^2
// with d_k(x) = [(x - k_k)_+^3 - (x - hi)_+^3] / (hi - k_k), where k_0 = lo
// and k_1..k_m are the interior knots. The cubic terms cancel beyond hi,
// leaving linear tails, and every column vanishes identically below lo.
void SplineBasis::evaluate(double x, double* out) const {
  derivative(x, 0, out);
}

void SplineBasis::derivative(double x, int order, double* out) const {
  const std::size_t m = interior_.size();
  if (order == 0) {
    out[0] = (x - lo_) / scale_;
  } else if (order == 1) {
    out[0] = 1.0 / scale_;
  } else {
    out[0] = 0.0;
  }
  if (m == 0) return;
  const double hi_term = p3(x - hi_, order);
  const double s2 = scale_ * scale_;
  // d_m uses the last interior knot.
  const double dm = (p3(x - interior_[m - 1], order) - hi_term) / (hi_ - interior_[m - 1]);
  for (std::size_t j = 0; j < m; ++j) {
    const double knot = (j == 0) ? lo_ : interior_[j - 1];
    const double dj = (p3(x - knot, order) - hi_term) / (hi_ - knot);
    out[j + 1] = (dj - dm) / s2;
  }
}

Eigen::VectorXd SplineBasis::evaluate(double x) const {
  Eigen::VectorXd v(dim());
  evaluate(x, v.data());
  return v;
}

Eigen::VectorXd SplineBasis::derivative(double x, int order) const {
  Eigen::VectorXd v(dim());
  derivative(x, order, v.data());
  return v;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw ConfigError("quantile: empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n == 1) return values[0];
  const double h = static_cast<double>(n - 1) * p;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= n) return values[n - 1];
  const double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

KnotSelection select_knots(std::vector<double> values) {
  if (values.empty()) {
    throw ConfigError("select_knots: empty sample");
  }
  std::set<double> distinct(values.begin(), values.end());
  if (distinct.size() < 5) {
    throw ConfigError("insufficient support for spline knots");
  }
  std::sort(values.begin(), values.end());
  KnotSelection sel;
  sel.boundary = {values.front(), values.back()};
  std::vector<double> interior;
  for (double p : {0.25, 0.50, 0.75}) {
    interior.push_back(quantile(values, p));
  }
  std::sort(interior.begin(), interior.end());
  for (double k : interior) {
    if (k <= sel.boundary.first || k >= sel.boundary.second) continue;
    if (!sel.interior.empty() && sel.interior.back() == k) continue;
    sel.interior.push_back(k);
  }
  return sel;
}

}  // namespace itsurv
