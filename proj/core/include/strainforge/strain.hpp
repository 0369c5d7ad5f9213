// Per-element Green-Lagrange strain from constant-strain tetrahedra, local
// cardiac direction projections, AHA-16 segment assignment, and segment
// strain-time curves with signed peak extraction.
#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "strainforge/fusion.hpp"
#include "strainforge/mesh.hpp"
#include "strainforge/types.hpp"

namespace strainforge {

// F maps reference edge vectors onto deformed edge vectors.
Mat3 deformation_gradient(const std::array<Vec3, 4>& ref, const std::array<Vec3, 4>& def);

// E = (F^T F - I) / 2.
Mat3 green_lagrange(const Mat3& F);

struct LocalDirections {
    Vec3 radial;
    Vec3 circumferential;
    Vec3 longitudinal;
};

// Straight-axis model: l = +Z, r = outward transmural in the XY plane,
// c = l x r. Throws for centroids on the long axis (xy norm < 1e-6 mm).
LocalDirections local_directions(const Vec3& centroid);

// (Err, Ecc, Ell) projections of E.
Vec3 project_strain(const Mat3& E, const LocalDirections& dirs);

// AHA-16: equal-extent longitudinal thirds; 6 sectors of 60 degrees for basal
// (1-6) and mid (7-12), 4 sectors of 90 degrees for apical (13-16). Sector 1
// starts at theta0 (radians from +X); intervals are half-open so boundary
// angles land in the lower-id sector. Segment 1 is basal anterior, ids
// increase counterclockwise viewed from base.
int aha16_assign(const Vec3& centroid, double z_base, double z_apex, double theta0);

struct SegmentReport {
    int frames = 0;
    // [frame][segment 0..15] volume-weighted mean (Err, Ecc, Ell).
    std::vector<std::array<Vec3, 16>> curves;
    std::array<Vec3, 16> peaks{};       // max Err, min Ecc, min Ell over frames
    std::array<std::array<int, 3>, 16> peak_frames{};
    Vec3 global_peaks = Vec3::Zero();   // mean of per-segment peaks (populated segments)
    std::array<int, 3> global_peak_frames{};  // extrema frames of the segment-mean curve
    std::array<int, 16> element_counts{};
    std::vector<int> element_segments;  // per element, 1..16; 0 = excluded
    std::size_t excluded_elements = 0;
    std::size_t total_elements = 0;
    // [frame][element] per-element projections for export; excluded elements
    // carry zeros.
    std::vector<std::vector<Vec3>> element_strain;

    double excluded_fraction() const {
        return total_elements ? static_cast<double>(excluded_elements) / total_elements : 0.0;
    }
};

// theta0 in radians; motion must cover every mesh node at every frame.
// Elements whose reference geometry is degenerate or whose centroid sits on
// the long axis are excluded; more than 1% exclusions aborts the run.
SegmentReport strain_curves(const LvMesh& mesh, const FusedMotion& motion, double theta0 = 0.0);

// CSV exports: long-format per-frame curves and per-segment peaks.
void write_strain_curves_csv(const SegmentReport& report, const std::filesystem::path& path);
void write_strain_peaks_csv(const SegmentReport& report, const std::filesystem::path& path);

}  // namespace strainforge
