#include "strainforge/contours.hpp"

#include <array>
#include <cmath>

#include "strainforge/spline.hpp"

namespace strainforge {

void ContourRing::validate() const {
    if (points.size() < 3)
        throw ValidationError("contour needs >= 3 points");
    for (std::size_t i = 0; i + 1 < points.size(); ++i)
        if ((points[i + 1] - points[i]).norm() < 1e-9)
            throw ValidationError("contour has consecutive duplicate points");
    if (closed && (points.front() - points.back()).norm() < 1e-9)
        throw ValidationError("closed contour must not repeat its first point");
    for (const auto& frame : frame_displacements)
        if (frame.size() != points.size())
            throw ValidationError("displacement count differs from contour point count");
}

std::vector<double> curve_params(const std::vector<Vec3>& pts, bool closed, bool centripetal) {
    const std::size_t n = pts.size();
    std::vector<double> t(closed ? n + 1 : n, 0.0);
    for (std::size_t i = 1; i < t.size(); ++i) {
        const Vec3& a = pts[(i - 1) % n];
        const Vec3& b = pts[i % n];
        double d = (b - a).norm();
        if (centripetal) d = std::sqrt(d);
        t[i] = t[i - 1] + d;
    }
    if (t.back() < 1e-6)
        throw ValidationError("degenerate contour: total chord length below 1e-6 mm");
    return t;
}

namespace {

// One spline per coordinate axis over a shared parameterization.
struct Spline3 {
    std::array<CubicSpline1D, 3> s;

    static Spline3 fit(const std::vector<Vec3>& pts, const std::vector<double>& t, bool closed) {
        const auto kind = closed ? CubicSpline1D::Kind::Periodic : CubicSpline1D::Kind::Natural;
        auto axis = [&](int k) {
            std::vector<double> y(pts.size());
            for (std::size_t i = 0; i < pts.size(); ++i) y[i] = pts[i][k];
            return CubicSpline1D(t, std::move(y), kind);
        };
        return Spline3{{axis(0), axis(1), axis(2)}};
    }

    Vec3 value(double t) const { return {s[0].value(t), s[1].value(t), s[2].value(t)}; }
    Vec3 derivative(double t) const {
        return {s[0].derivative(t), s[1].derivative(t), s[2].derivative(t)};
    }
};

}  // namespace

ResampledContour resample_closed(const ContourRing& ring, int n, bool centripetal) {
    if (n < 3) throw ValidationError("closed resampling needs n >= 3");
    if (!ring.closed) throw ValidationError("resample_closed requires a closed ring");
    ring.validate();

    ResampledContour out;
    out.closed = true;
    out.knot_params = curve_params(ring.points, true, centripetal);
    out.period = out.knot_params.back();
    const Spline3 spline = Spline3::fit(ring.points, out.knot_params, true);

    out.points.reserve(n);
    out.sample_params.reserve(n);
    for (int k = 0; k < n; ++k) {
        const double t = out.period * static_cast<double>(k) / static_cast<double>(n);
        out.sample_params.push_back(t);
        out.points.push_back(spline.value(t));
    }
    return out;
}

ResampledContour resample_open(const ContourRing& polyline, int n, bool centripetal) {
    if (n < 2) throw ValidationError("open resampling needs n >= 2");
    if (polyline.points.size() < 2)
        throw ValidationError("open curve needs >= 2 points");
    for (std::size_t i = 0; i + 1 < polyline.points.size(); ++i)
        if ((polyline.points[i + 1] - polyline.points[i]).norm() < 1e-9)
            throw ValidationError("contour has consecutive duplicate points");

    ResampledContour out;
    out.closed = false;
    out.knot_params = curve_params(polyline.points, false, centripetal);
    const double span = out.knot_params.back();
    const Spline3 spline = Spline3::fit(polyline.points, out.knot_params, false);

    out.points.reserve(n);
    out.sample_params.reserve(n);
    for (int k = 0; k < n; ++k) {
        const double t = span * static_cast<double>(k) / static_cast<double>(n - 1);
        out.sample_params.push_back(t);
        out.points.push_back(spline.value(t));
    }
    // Endpoint contract: exact, not spline-evaluated.
    out.points.front() = polyline.points.front();
    out.points.back() = polyline.points.back();
    return out;
}

std::vector<std::vector<Vec3>> carry_displacements(const ContourRing& original,
                                                   const ResampledContour& resampled) {
    const std::size_t npts = original.points.size();
    const bool closed = resampled.closed;
    if (closed && resampled.knot_params.size() != npts + 1)
        throw ValidationError("resampled parameterization does not match the source ring");
    if (!closed && resampled.knot_params.size() != npts)
        throw ValidationError("resampled parameterization does not match the source ring");
    for (const auto& frame : original.frame_displacements)
        if (frame.size() != npts)
            throw ValidationError("frame count mismatch: displacement rows differ from points");

    std::vector<std::vector<Vec3>> carried;
    carried.reserve(original.frame_displacements.size());
    const auto kind = closed ? CubicSpline1D::Kind::Periodic : CubicSpline1D::Kind::Natural;
    bool first_frame = true;
    for (const auto& frame : original.frame_displacements) {
        std::vector<Vec3> row(resampled.points.size(), Vec3::Zero());
        if (!first_frame) {  // frame 0 stays exactly zero
            for (int axis = 0; axis < 3; ++axis) {
                std::vector<double> y(npts);
                for (std::size_t i = 0; i < npts; ++i) y[i] = frame[i][axis];
                CubicSpline1D s(resampled.knot_params, std::move(y), kind);
                for (std::size_t k = 0; k < row.size(); ++k)
                    row[k][axis] = s.value(resampled.sample_params[k]);
            }
        }
        first_frame = false;
        carried.push_back(std::move(row));
    }
    return carried;
}

double spline_arc_length(const std::vector<Vec3>& pts, bool closed, int gauss_order) {
    // 16-point Gauss-Legendre nodes/weights on [-1, 1].
    static const double kNodes[16] = {
        -0.9894009349916499, -0.9445750230732326, -0.8656312023878318, -0.7554044083550030,
        -0.6178762444026438, -0.4580167776572274, -0.2816035507792589, -0.0950125098376374,
        0.0950125098376374,  0.2816035507792589,  0.4580167776572274,  0.6178762444026438,
        0.7554044083550030,  0.8656312023878318,  0.9445750230732326,  0.9894009349916499};
    static const double kWeights[16] = {
        0.0271524594117541, 0.0622535239386479, 0.0951585116824928, 0.1246289712555339,
        0.1495959888165767, 0.1691565193950025, 0.1826034150449236, 0.1894506104550685,
        0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
        0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};
    (void)gauss_order;  // fixed 16-point rule

    const auto t = curve_params(pts, closed, false);
    const Spline3 spline = Spline3::fit(pts, t, closed);
    double length = 0.0;
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        const double mid = 0.5 * (t[i] + t[i + 1]);
        const double half = 0.5 * (t[i + 1] - t[i]);
        double seg = 0.0;
        for (int g = 0; g < 16; ++g)
            seg += kWeights[g] * spline.derivative(mid + half * kNodes[g]).norm();
        length += seg * half;
    }
    return length;
}

}  // namespace strainforge
