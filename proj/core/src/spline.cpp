#include "strainforge/spline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "strainforge/types.hpp"

namespace strainforge {

void solve_tridiagonal(std::vector<double> lower, std::vector<double> diag,
                       std::vector<double> upper, std::vector<double>& rhs) {
    const int n = static_cast<int>(diag.size());
    for (int i = 1; i < n; ++i) {
        const double w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (int i = n - 2; i >= 0; --i)
        rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
}

void solve_cyclic_tridiagonal(std::vector<double> lower, std::vector<double> diag,
                              std::vector<double> upper, double corner_top,
                              double corner_bot, std::vector<double>& rhs) {
    const int n = static_cast<int>(diag.size());
    if (n == 1) {
        rhs[0] /= (diag[0] + corner_top + corner_bot);
        return;
    }
    if (n == 2) {
        // Wrap entries collapse onto the off-diagonals.
        const double a = diag[0], b = upper[0] + corner_top;
        const double c = lower[1] + corner_bot, d = diag[1];
        const double det = a * d - b * c;
        const double r0 = rhs[0], r1 = rhs[1];
        rhs[0] = (d * r0 - b * r1) / det;
        rhs[1] = (a * r1 - c * r0) / det;
        return;
    }
    // A = T + u v^T with u = (gamma, 0, ..., corner_bot), v = (1, 0, ..., corner_top/gamma).
    const double gamma = -diag[0];
    std::vector<double> d2 = diag;
    d2[0] -= gamma;
    d2[n - 1] -= corner_top * corner_bot / gamma;

    std::vector<double> z = rhs;
    solve_tridiagonal(lower, d2, upper, z);

    std::vector<double> u(n, 0.0);
    u[0] = gamma;
    u[n - 1] = corner_bot;
    solve_tridiagonal(lower, d2, upper, u);

    const double fact = (z[0] + corner_top * z[n - 1] / gamma) /
                        (1.0 + u[0] + corner_top * u[n - 1] / gamma);
    for (int i = 0; i < n; ++i) rhs[i] = z[i] - fact * u[i];
}

CubicSpline1D::CubicSpline1D(std::vector<double> t, std::vector<double> y, Kind kind)
    : t_(std::move(t)), y_(std::move(y)), kind_(kind) {
    const int n = static_cast<int>(y_.size());
    if (kind_ == Kind::Natural) {
        if (static_cast<int>(t_.size()) != n || n < 2)
            throw ValidationError("natural spline needs >= 2 knots with matching values");
    } else {
        if (static_cast<int>(t_.size()) != n + 1 || n < 3)
            throw ValidationError("periodic spline needs >= 3 points plus the closing knot");
    }
    for (std::size_t i = 0; i + 1 < t_.size(); ++i)
        if (!(t_[i + 1] > t_[i]))
            throw ValidationError("spline knots must be strictly increasing");

    if (kind_ == Kind::Natural) {
        m_.assign(n, 0.0);
        if (n == 2) return;  // straight line
        const int k = n - 2;  // interior unknowns
        std::vector<double> lower(k, 0.0), diag(k, 0.0), upper(k, 0.0), rhs(k, 0.0);
        for (int i = 1; i <= k; ++i) {
            const double hl = t_[i] - t_[i - 1];
            const double hr = t_[i + 1] - t_[i];
            lower[i - 1] = hl / 6.0;
            diag[i - 1] = (hl + hr) / 3.0;
            upper[i - 1] = hr / 6.0;
            rhs[i - 1] = (y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl;
        }
        lower[0] = 0.0;
        upper[k - 1] = 0.0;
        solve_tridiagonal(lower, diag, upper, rhs);
        for (int i = 1; i <= k; ++i) m_[i] = rhs[i - 1];
    } else {
        // Periodic: unknown M_0..M_{n-1}, indices wrap. h_i = t_{i+1} - t_i for i in [0, n).
        m_.assign(n, 0.0);
        std::vector<double> h(n);
        for (int i = 0; i < n; ++i) h[i] = t_[i + 1] - t_[i];
        std::vector<double> lower(n, 0.0), diag(n, 0.0), upper(n, 0.0), rhs(n, 0.0);
        for (int i = 0; i < n; ++i) {
            const double hl = h[(i + n - 1) % n];
            const double hr = h[i];
            lower[i] = hl / 6.0;
            diag[i] = (hl + hr) / 3.0;
            upper[i] = hr / 6.0;
            const double yl = y_[(i + n - 1) % n];
            const double yr = y_[(i + 1) % n];
            rhs[i] = (yr - y_[i]) / hr - (y_[i] - yl) / hl;
        }
        const double corner_top = lower[0];   // couples M_0 with M_{n-1}
        const double corner_bot = upper[n - 1];
        lower[0] = 0.0;
        upper[n - 1] = 0.0;
        solve_cyclic_tridiagonal(lower, diag, upper, corner_top, corner_bot, rhs);
        m_ = rhs;
    }
}

int CubicSpline1D::segment(double& t) const {
    if (kind_ == Kind::Periodic) {
        const double period = t_.back() - t_.front();
        t = t_.front() + std::fmod(t - t_.front(), period);
        if (t < t_.front()) t += period;
    }
    // Last knot maps into the final segment.
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    int i = static_cast<int>(it - t_.begin()) - 1;
    const int last = static_cast<int>(t_.size()) - 2;
    return std::clamp(i, 0, last);
}

double CubicSpline1D::value(double t) const {
    const int i = segment(t);
    const double h = t_[i + 1] - t_[i];
    const double a = (t_[i + 1] - t) / h;
    const double b = (t - t_[i]) / h;
    return a * y_at(i) + b * y_at(i + 1) +
           ((a * a * a - a) * m_at(i) + (b * b * b - b) * m_at(i + 1)) * h * h / 6.0;
}

double CubicSpline1D::derivative(double t) const {
    const int i = segment(t);
    const double h = t_[i + 1] - t_[i];
    const double a = (t_[i + 1] - t) / h;
    const double b = (t - t_[i]) / h;
    return (y_at(i + 1) - y_at(i)) / h +
           h / 6.0 * ((3.0 * b * b - 1.0) * m_at(i + 1) - (3.0 * a * a - 1.0) * m_at(i));
}

}  // namespace strainforge
