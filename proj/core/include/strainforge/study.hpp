// Study bundle ingestion and coordinate frames. A bundle is a directory with a
// study.json describing per-view plane geometry (mm, patient space), ED
// contours (pixels) and per-frame in-plane displacement vectors (pixels).
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "strainforge/types.hpp"

namespace strainforge {

enum class ViewKind { Sax, FourChamber, TwoChamber };

std::string to_string(ViewKind k);
ViewKind view_kind_from_string(const std::string& s);

struct ViewGeometry {
    Vec3 origin = Vec3::Zero();   // patient space, mm
    Vec3 row_dir = Vec3::UnitY(); // unit vector along increasing row index
    Vec3 col_dir = Vec3::UnitX(); // unit vector along increasing column index
    double row_spacing = 1.0;     // mm / pixel
    double col_spacing = 1.0;
    int rows = 0;
    int cols = 0;
    ViewKind kind = ViewKind::Sax;
    int slice_index = 0;          // SAX stack order; base documented as index 0

    void validate() const;
    Vec3 normal() const { return row_dir.cross(col_dir); }
};

// Maps a (row, col) pixel coordinate (fractional or out-of-bounds allowed) to
// patient space.
Vec3 pixel_to_patient(const ViewGeometry& geom, const Vec2& rc);

// Pure vector transform of an in-plane pixel displacement (no origin offset).
Vec3 inplane_displacement_to_patient(const ViewGeometry& geom, const Vec2& d_rc);

struct TrackedView {
    ViewGeometry geometry;
    std::vector<Vec2> endo;  // pixel-space (row, col) contour at ED
    std::vector<Vec2> epi;
    int frames = 0;
    // [frame][point][2] pixels; points ordered endo first, then epi.
    std::vector<std::vector<Vec2>> displacements;

    std::size_t point_count() const { return endo.size() + epi.size(); }
    void validate() const;
};

struct Study {
    std::vector<TrackedView> views;

    std::vector<const TrackedView*> sax_views() const;  // sorted by slice_index
    const TrackedView* first_view(ViewKind kind) const;
    int frame_count() const;
};

// Rigid map from patient space into the LV-centered frame (long axis -> +Z,
// base at high Z, +X from the 4CH in-plane direction projected onto the SAX
// plane).
struct LvFrame {
    Vec3 center = Vec3::Zero();
    Mat3 rotation = Mat3::Identity();  // patient -> LV

    Vec3 to_lv(const Vec3& p) const { return rotation * (p - center); }
    Vec3 to_lv_vector(const Vec3& d) const { return rotation * d; }
    Vec3 to_patient(const Vec3& q) const { return rotation.transpose() * q + center; }
    void validate() const;
};

LvFrame build_lv_frame(const Study& study);

Study load_study(const std::filesystem::path& bundle_dir);
void save_study(const Study& study, const std::filesystem::path& bundle_dir);

}  // namespace strainforge
