// 2D non-rigid registration: cubic B-spline free-form deformation, SSD
// similarity, discrete bending-energy regularizer, multi-resolution gradient
// descent with backtracking line search. Tracks contour points through an
// image sequence by sequential pairwise registration.
#pragma once

#include <array>
#include <vector>

#include "strainforge/image.hpp"
#include "strainforge/types.hpp"

namespace strainforge {

// Uniform cubic B-spline basis values at local parameter t in [0, 1].
std::array<double, 4> bspline_weights(double t);

// Control lattice covering the image with one extra ring of nodes on each
// side. Node (i, j) in storage maps to lattice index (i - 1, j - 1); lattice
// index a sits at pixel coordinate a * spacing along its axis.
struct BSplineGrid {
    double spacing = 8.0;  // pixels, both axes
    int cells_r = 0;       // lattice cells along rows
    int cells_c = 0;
    int nodes_r = 0;       // cells + 3
    int nodes_c = 0;
    std::vector<Vec2> displacement;  // (d_row, d_col) per node, pixels

    static BSplineGrid for_image(int width, int height, double spacing);

    Vec2& node(int i, int j) { return displacement[static_cast<std::size_t>(i) * nodes_c + j]; }
    const Vec2& node(int i, int j) const {
        return displacement[static_cast<std::size_t>(i) * nodes_c + j];
    }
    double domain_rows() const { return static_cast<double>(cells_r) * spacing; }
    double domain_cols() const { return static_cast<double>(cells_c) * spacing; }
};

// Interpolated control-point displacement u(x); x = (row, col) in pixels.
// Clamps the cell index at the lattice edge (continuous extension).
Vec2 ffd_displacement(const BSplineGrid& grid, double r, double c);

// T(x) = x + u(x). Throws if x lies outside the lattice coverage.
Vec2 evaluate_ffd(const BSplineGrid& grid, const Vec2& x);

// Mean squared intensity difference (1/M) sum (I_f(x) - I_m(T(x)))^2.
double ssd(const Image2D& fixed, const Image2D& moving, const BSplineGrid& grid);

// Mean over interior lattice nodes of squared second differences of the
// control displacements: (D_rr)^2 + (D_cc)^2 + 2 (D_rc)^2, both components.
double bending_energy(const BSplineGrid& grid);

struct RegistrationParams {
    double alpha = 0.01;        // regularization weight
    int pyramid_levels = 2;
    int max_iterations = 80;    // per level
    double step_tolerance = 1e-3;  // stop when the accepted update is smaller (pixels)
    double step_size = 1.0;     // initial line-search step scale
    double control_spacing = 8.0;  // pixels at full resolution
    bool temporal_smoothing = true;

    void validate() const;
};

// Full cost C = SSD + alpha * R and its analytic gradient w.r.t. the control
// displacements. `scale` maps level pixels to full-resolution coordinates
// (1 = native resolution); exposed for finite-difference verification.
double cost_and_gradient(const Image2D& fixed, const Image2D& moving, const BSplineGrid& grid,
                         double alpha, int scale, std::vector<Vec2>* gradient);

// Multi-resolution minimization of C. The returned grid never costs more than
// the zero grid. Throws NumericError if the cost turns non-finite.
BSplineGrid register_pair(const Image2D& fixed, const Image2D& moving,
                          const RegistrationParams& params);

struct TrackedSequence {
    std::vector<Vec2> seeds;                      // frame-0 positions (row, col)
    std::vector<std::vector<Vec2>> displacement;  // [frame][point], accumulated, pixels
    std::vector<bool> left_domain;                // per point: clamped at least once
};

// Sequential pairwise tracking of seed points through the sequence; optional
// window-3 moving-average smoothing of the trajectories (endpoints untouched).
TrackedSequence track_sequence(const std::vector<Image2D>& images,
                               const std::vector<Vec2>& seeds,
                               const RegistrationParams& params);

// Integer circular shifts aligning each curve's extremum frame to the
// reference curve's extremum frame (reference shift is 0). A curve whose
// extremum magnitude is below 1e-9 has no usable signal.
std::vector<int> align_peak_times(const std::vector<std::vector<double>>& curves, int reference);

}  // namespace strainforge
