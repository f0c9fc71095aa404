#pragma once

#include <vector>

namespace magspring::spline {

/// Natural cubic smoothing spline fitted to (t, y) samples by minimizing
/// sum (y_i - f(t_i))^2 + lambda * integral f''(t)^2 dt.
///
/// lambda = 0 reproduces the natural interpolating spline through all
/// samples. The fit is stored as knot values plus second derivatives, the
/// classical representation for piecewise-cubic evaluation.
class SmoothingSpline {
  public:
    /// Fits with a fixed smoothing parameter lambda >= 0.
    /// Knots must be strictly increasing, size >= 3.
    static SmoothingSpline fit(const std::vector<double>& t, const std::vector<double>& y, double lambda);

    /// Fits with lambda chosen by generalized cross-validation.
    static SmoothingSpline fit_gcv(const std::vector<double>& t, const std::vector<double>& y);

    double evaluate(double x) const;
    double derivative(double x) const;

    double lambda() const { return lambda_; }
    double min_knot() const { return t_.front(); }
    double max_knot() const { return t_.back(); }
    const std::vector<double>& knots() const { return t_; }
    const std::vector<double>& values() const { return g_; }
    const std::vector<double>& second_derivatives() const { return m_; }

  private:
    SmoothingSpline() = default;
    int interval_of(double x) const;

    std::vector<double> t_;  // knots
    std::vector<double> g_;  // fitted values at knots
    std::vector<double> m_;  // second derivatives at knots (natural: ends are 0)
    double lambda_ = 0.0;
};

}  // namespace magspring::spline
