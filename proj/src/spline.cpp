#include "magspring/spline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "magspring/errors.hpp"

namespace magspring::spline {

namespace {

// Green & Silverman band matrices tying knot values g to interior second
// derivatives gamma: Q^T g = R gamma, penalty = gamma^T R gamma.
void build_qr(const std::vector<double>& t, Eigen::MatrixXd& Q, Eigen::MatrixXd& R) {
    const int n = static_cast<int>(t.size());
    const int m = n - 2;
    Q = Eigen::MatrixXd::Zero(n, m);
    R = Eigen::MatrixXd::Zero(m, m);
    for (int j = 0; j < m; ++j) {
        const double h0 = t[j + 1] - t[j];
        const double h1 = t[j + 2] - t[j + 1];
        Q(j, j) = 1.0 / h0;
        Q(j + 1, j) = -(1.0 / h0 + 1.0 / h1);
        Q(j + 2, j) = 1.0 / h1;
        R(j, j) = (h0 + h1) / 3.0;
        if (j + 1 < m) {
            R(j, j + 1) = h1 / 6.0;
            R(j + 1, j) = h1 / 6.0;
        }
    }
}

void validate_input(const std::vector<double>& t, const std::vector<double>& y) {
    if (t.size() != y.size()) throw DataError("spline: t and y sizes differ");
    if (t.size() < 3) throw DataError("spline: need at least 3 samples");
    if (t.size() > 20000) throw DataError("spline: too many samples for dense fit");
    for (std::size_t i = 1; i < t.size(); ++i)
        if (!(t[i] > t[i - 1])) throw DataError("spline: knots must be strictly increasing");
}

}  // namespace

SmoothingSpline SmoothingSpline::fit(const std::vector<double>& t, const std::vector<double>& y,
                                     double lambda) {
    validate_input(t, y);
    if (!(lambda >= 0.0)) throw DataError("spline: lambda must be >= 0");

    const int n = static_cast<int>(t.size());
    const int m = n - 2;
    Eigen::MatrixXd Q, R;
    build_qr(t, Q, R);

    Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
    // (R + lambda Q^T Q) gamma = Q^T y ; g = y - lambda Q gamma
    Eigen::MatrixXd A = R + lambda * (Q.transpose() * Q);
    Eigen::VectorXd gamma = A.ldlt().solve(Q.transpose() * yv);
    Eigen::VectorXd g = yv - lambda * (Q * gamma);

    SmoothingSpline s;
    s.t_ = t;
    s.g_.assign(g.data(), g.data() + n);
    s.m_.assign(n, 0.0);
    for (int j = 0; j < m; ++j) s.m_[j + 1] = gamma(j);
    s.lambda_ = lambda;
    return s;
}

SmoothingSpline SmoothingSpline::fit_gcv(const std::vector<double>& t, const std::vector<double>& y) {
    validate_input(t, y);
    const int n = static_cast<int>(t.size());
    Eigen::MatrixXd Q, R;
    build_qr(t, Q, R);
    Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
    const Eigen::MatrixXd QtQ = Q.transpose() * Q;
    const Eigen::VectorXd Qty = Q.transpose() * yv;

    auto gcv_score = [&](double lambda) {
        Eigen::MatrixXd A = R + lambda * QtQ;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
        Eigen::VectorXd gamma = ldlt.solve(Qty);
        Eigen::VectorXd resid = lambda * (Q * gamma);  // y - g
        const double rss = resid.squaredNorm();
        // trace(S) = n - lambda * trace(A^{-1} Q^T Q)
        const double tr_s = n - lambda * ldlt.solve(QtQ).trace();
        const double denom = n - tr_s;
        if (denom <= 1e-12) return std::numeric_limits<double>::infinity();
        return static_cast<double>(n) * rss / (denom * denom);
    };

    // lambda scales with (knot spacing)^3; scan a wide log grid around that
    // scale, then refine by golden section.
    const double span = t.back() - t.front();
    const double scale = std::pow(span / n, 3);
    double best_lambda = scale;
    double best_score = std::numeric_limits<double>::infinity();
    for (double e = -8.0; e <= 10.0; e += 0.5) {
        const double lam = scale * std::pow(10.0, e);
        const double sc = gcv_score(lam);
        if (sc < best_score) {
            best_score = sc;
            best_lambda = lam;
        }
    }
    double lo = best_lambda / 10.0;
    double hi = best_lambda * 10.0;
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = std::log(lo), b = std::log(hi);
    double c = b - ratio * (b - a), d = a + ratio * (b - a);
    double fc = gcv_score(std::exp(c)), fd = gcv_score(std::exp(d));
    for (int it = 0; it < 40; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = gcv_score(std::exp(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = gcv_score(std::exp(d));
        }
    }
    best_lambda = std::exp(0.5 * (a + b));
    return fit(t, y, best_lambda);
}

int SmoothingSpline::interval_of(double x) const {
    const double lo = t_.front();
    const double hi = t_.back();
    const double tol = 1e-9 * (hi - lo);
    if (x < lo - tol || x > hi + tol)
        throw DataError("spline: evaluation point " + std::to_string(x) + " outside fitted range [" +
                        std::to_string(lo) + ", " + std::to_string(hi) + "]");
    const double xc = std::clamp(x, lo, hi);
    auto it = std::upper_bound(t_.begin(), t_.end(), xc);
    int i = static_cast<int>(it - t_.begin()) - 1;
    return std::clamp(i, 0, static_cast<int>(t_.size()) - 2);
}

double SmoothingSpline::evaluate(double x) const {
    const int i = interval_of(x);
    const double h = t_[i + 1] - t_[i];
    const double a = t_[i + 1] - x;
    const double b = x - t_[i];
    return m_[i] * a * a * a / (6.0 * h) + m_[i + 1] * b * b * b / (6.0 * h) +
           (g_[i] / h - m_[i] * h / 6.0) * a + (g_[i + 1] / h - m_[i + 1] * h / 6.0) * b;
}

double SmoothingSpline::derivative(double x) const {
    const int i = interval_of(x);
    const double h = t_[i + 1] - t_[i];
    const double a = t_[i + 1] - x;
    const double b = x - t_[i];
    return -m_[i] * a * a / (2.0 * h) + m_[i + 1] * b * b / (2.0 * h) -
           (g_[i] / h - m_[i] * h / 6.0) + (g_[i + 1] / h - m_[i + 1] * h / 6.0);
}

}  // namespace magspring::spline
