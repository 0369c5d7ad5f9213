// Contour up-sampling: interpolating cubic splines (periodic for closed rings,
// natural for open curves) with chord-length parameterization, plus transport
// of per-frame displacement samples onto the resampled points.
#pragma once

#include <string>
#include <vector>

#include "strainforge/types.hpp"

namespace strainforge {

enum class RoiTag { Endo, Epi };

struct ContourRing {
    std::vector<Vec3> points;  // ordered, LV space
    std::vector<std::vector<Vec3>> frame_displacements;  // [frame][point]; may be empty
    bool closed = true;
    RoiTag roi = RoiTag::Endo;
    int slice = -1;

    void validate() const;  // >= 3 points, no consecutive duplicates
};

struct ResampledContour {
    std::vector<Vec3> points;
    std::vector<double> sample_params;  // parameter of each output point
    std::vector<double> knot_params;    // chord-length parameters of the source points
    double period = 0.0;                // closed curves only: total parameter span
    bool closed = true;
};

// Chord-length (or centripetal) parameters of an ordered point list. Closed
// curves get one extra entry closing the loop. Throws on degenerate input
// (total length < 1e-6 mm).
std::vector<double> curve_params(const std::vector<Vec3>& pts, bool closed,
                                 bool centripetal = false);

// Periodic cubic spline through ring.points, sampled at n equal parameter
// increments starting at the first point.
ResampledContour resample_closed(const ContourRing& ring, int n, bool centripetal = false);

// Natural cubic spline through an open polyline; endpoints reproduced exactly.
ResampledContour resample_open(const ContourRing& polyline, int n, bool centripetal = false);

// Splines each displacement component against the source parameterization and
// evaluates at the resampled parameters; frame 0 is copied as exact zeros.
std::vector<std::vector<Vec3>> carry_displacements(const ContourRing& original,
                                                   const ResampledContour& resampled);

// Arc length of the interpolating spline by per-segment Gauss-Legendre
// quadrature; used as a test oracle and for QC reporting.
double spline_arc_length(const std::vector<Vec3>& pts, bool closed, int gauss_order = 16);

}  // namespace strainforge
