// 1D interpolating cubic splines over non-uniform knots.
// Natural splines have zero second derivative at both ends; periodic splines
// close smoothly over a period (the caller supplies knots t_0..t_n with
// y_n == y_0 identified implicitly).
#pragma once

#include <vector>

namespace strainforge {

class CubicSpline1D {
public:
    enum class Kind { Natural, Periodic };

    // Natural: t.size() == y.size() >= 2, t strictly increasing.
    // Periodic: t.size() == y.size() + 1; t.back() closes the period and the
    // value there is y.front(). Requires >= 3 distinct points.
    CubicSpline1D(std::vector<double> t, std::vector<double> y, Kind kind);

    double value(double t) const;
    double derivative(double t) const;

    Kind kind() const { return kind_; }
    double t_begin() const { return t_.front(); }
    double t_end() const { return t_.back(); }

private:
    std::vector<double> t_;  // knot parameters, size n (natural) or n+1 (periodic)
    std::vector<double> y_;  // knot values, size n
    std::vector<double> m_;  // second derivatives at knots, same layout as y_
    Kind kind_;

    double y_at(int i) const { return y_[i % y_.size()]; }
    double m_at(int i) const { return m_[i % m_.size()]; }
    int segment(double& t) const;  // normalizes t (wrap/clamp), returns segment index
};

// Solves a tridiagonal system in place (Thomas algorithm).
// diag/upper/lower are the matrix bands; rhs becomes the solution.
void solve_tridiagonal(std::vector<double> lower, std::vector<double> diag,
                       std::vector<double> upper, std::vector<double>& rhs);

// Solves a cyclic tridiagonal system (wrap entries corner_top = A[0][n-1],
// corner_bot = A[n-1][0]) via the Sherman-Morrison correction.
void solve_cyclic_tridiagonal(std::vector<double> lower, std::vector<double> diag,
                              std::vector<double> upper, double corner_top,
                              double corner_bot, std::vector<double>& rhs);

}  // namespace strainforge
