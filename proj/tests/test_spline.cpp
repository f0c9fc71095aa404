#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "magspring/errors.hpp"
#include "magspring/spline.hpp"

using namespace magspring;
using spline::SmoothingSpline;

namespace {

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    return v;
}

}  // namespace

TEST_CASE("interpolating spline reproduces the samples at lambda = 0") {
    const auto t = linspace(0.0, 2.0, 15);
    std::vector<double> y;
    for (const double x : t) y.push_back(std::sin(3.0 * x) + 0.2 * x);
    const auto s = SmoothingSpline::fit(t, y, 0.0);
    for (std::size_t i = 0; i < t.size(); ++i)
        CHECK(s.evaluate(t[i]) == doctest::Approx(y[i]).epsilon(1e-9));
}

TEST_CASE("quadratic data: derivative matches analytically at interior points") {
    // natural end conditions perturb the ends; the effect decays geometrically
    // toward the middle of the sample range
    const auto t = linspace(-1.0, 1.0, 41);
    std::vector<double> y;
    for (const double x : t) y.push_back(2.5 * x * x - 0.7 * x + 0.3);
    const auto s = SmoothingSpline::fit(t, y, 0.0);
    for (const double x : linspace(-0.25, 0.25, 9)) {
        const double expected = 5.0 * x - 0.7;
        CHECK(s.derivative(x) == doctest::Approx(expected).epsilon(1e-8));
    }
}

TEST_CASE("smoothing beats interpolation on noisy derivatives") {
    const int n = 61;
    const auto t = linspace(0.0, 5.0, n);
    std::vector<double> truth(n), noisy(n);
    double range_lo = 1e300, range_hi = -1e300;
    for (int i = 0; i < n; ++i) {
        truth[i] = std::sin(t[i]) + 0.1 * t[i] * t[i];
        range_lo = std::min(range_lo, truth[i]);
        range_hi = std::max(range_hi, truth[i]);
    }
    std::mt19937 rng(20240817);
    std::uniform_real_distribution<double> noise(-0.01, 0.01);
    for (int i = 0; i < n; ++i) noisy[i] = truth[i] + noise(rng) * (range_hi - range_lo);

    const auto interp = SmoothingSpline::fit(t, noisy, 0.0);
    const auto smooth = SmoothingSpline::fit_gcv(t, noisy);
    CHECK(smooth.lambda() > 0.0);

    auto deriv_rms = [&](const SmoothingSpline& s) {
        double acc = 0.0;
        int count = 0;
        for (const double x : linspace(0.25, 4.75, 181)) {
            const double exact = std::cos(x) + 0.2 * x;
            const double err = s.derivative(x) - exact;
            acc += err * err;
            ++count;
        }
        return std::sqrt(acc / count);
    };
    CHECK(deriv_rms(smooth) < deriv_rms(interp));
}

TEST_CASE("gcv stays close to interpolation on exact smooth data") {
    const auto t = linspace(0.0, 3.0, 31);
    std::vector<double> y;
    for (const double x : t) y.push_back(std::exp(-x) * std::sin(2.0 * x));
    const auto s = SmoothingSpline::fit_gcv(t, y);
    for (const double x : linspace(0.3, 2.7, 25))
        CHECK(s.evaluate(x) == doctest::Approx(std::exp(-x) * std::sin(2.0 * x)).epsilon(1e-3));
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(SmoothingSpline::fit({0.0, 1.0}, {1.0, 2.0}, 0.0), DataError);
    CHECK_THROWS_AS(SmoothingSpline::fit({0.0, 1.0, 1.0}, {1.0, 2.0, 3.0}, 0.0), DataError);
    CHECK_THROWS_AS(SmoothingSpline::fit({0.0, 1.0, 2.0}, {1.0, 2.0, 3.0}, -1.0), DataError);

    const auto s = SmoothingSpline::fit({0.0, 1.0, 2.0, 3.0}, {0.0, 1.0, 0.0, 1.0}, 0.0);
    CHECK_THROWS_AS(s.evaluate(-0.5), DataError);
    CHECK_THROWS_AS(s.derivative(3.5), DataError);
}

TEST_CASE("derivative of a linear fit is the slope everywhere") {
    const auto t = linspace(0.0, 4.0, 12);
    std::vector<double> y;
    for (const double x : t) y.push_back(2.0e-3 * x + 1.0);
    for (const double lam : {0.0, 1e-6, 1e2}) {
        const auto s = SmoothingSpline::fit(t, y, lam);
        for (const double x : linspace(0.0, 4.0, 17))
            CHECK(s.derivative(x) == doctest::Approx(2.0e-3).epsilon(1e-8));
    }
}
