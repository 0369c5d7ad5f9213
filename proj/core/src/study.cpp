#include "strainforge/study.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

namespace strainforge {

using ordered_json = nlohmann::ordered_json;

std::string to_string(ViewKind k) {
    switch (k) {
        case ViewKind::Sax: return "SAX";
        case ViewKind::FourChamber: return "4CH";
        case ViewKind::TwoChamber: return "2CH";
    }
    return "SAX";
}

ViewKind view_kind_from_string(const std::string& s) {
    if (s == "SAX") return ViewKind::Sax;
    if (s == "4CH") return ViewKind::FourChamber;
    if (s == "2CH") return ViewKind::TwoChamber;
    throw ValidationError("views[].kind: unknown view kind '" + s + "'");
}

void ViewGeometry::validate() const {
    constexpr double tol = 1e-9;
    if (std::abs(row_dir.norm() - 1.0) > tol || std::abs(col_dir.norm() - 1.0) > tol)
        throw GeometryError("geometry direction vectors must be unit length");
    if (std::abs(row_dir.dot(col_dir)) > tol)
        throw GeometryError("geometry row_dir and col_dir must be orthogonal");
    if (!(row_spacing > 0.0) || !(col_spacing > 0.0))
        throw GeometryError("geometry pixel spacings must be positive");
}

Vec3 pixel_to_patient(const ViewGeometry& geom, const Vec2& rc) {
    return geom.origin + rc[0] * geom.row_spacing * geom.row_dir +
           rc[1] * geom.col_spacing * geom.col_dir;
}

Vec3 inplane_displacement_to_patient(const ViewGeometry& geom, const Vec2& d_rc) {
    return d_rc[0] * geom.row_spacing * geom.row_dir + d_rc[1] * geom.col_spacing * geom.col_dir;
}

void TrackedView::validate() const {
    geometry.validate();
    if (endo.size() < 3 || epi.size() < 3)
        throw ValidationError("views[].contours: every contour needs >= 3 points");
    if (frames < 1)
        throw ValidationError("views[].frames must be >= 1");
    if (displacements.size() != static_cast<std::size_t>(frames))
        throw ValidationError("views[].displacements: frame count differs from 'frames'");
    for (const auto& frame : displacements) {
        if (frame.size() != point_count())
            throw ValidationError(
                "views[].displacements: point count differs from contour point count");
        for (const auto& d : frame)
            if (!d.allFinite())
                throw ValidationError("views[].displacements must be finite");
    }
    for (const auto& d : displacements.front())
        if (d[0] != 0.0 || d[1] != 0.0)
            throw ValidationError("views[].displacements: frame 0 must be exactly zero (ED)");
}

std::vector<const TrackedView*> Study::sax_views() const {
    std::vector<const TrackedView*> out;
    for (const auto& v : views)
        if (v.geometry.kind == ViewKind::Sax) out.push_back(&v);
    std::stable_sort(out.begin(), out.end(), [](const TrackedView* a, const TrackedView* b) {
        return a->geometry.slice_index < b->geometry.slice_index;
    });
    return out;
}

const TrackedView* Study::first_view(ViewKind kind) const {
    for (const auto& v : views)
        if (v.geometry.kind == kind) return &v;
    return nullptr;
}

int Study::frame_count() const {
    int t = 0;
    for (const auto& v : views) t = std::max(t, v.frames);
    return t;
}

void LvFrame::validate() const {
    constexpr double tol = 1e-9;
    if ((rotation * rotation.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() > tol)
        throw GeometryError("LV frame rotation is not orthonormal");
    if (std::abs(rotation.determinant() - 1.0) > tol)
        throw GeometryError("LV frame rotation must be proper (det +1)");
}

namespace {

// In-plane polygon area (mm^2) of a pixel-space contour; orientation-free.
double contour_area_mm2(const ViewGeometry& geom, const std::vector<Vec2>& contour) {
    double a2 = 0.0;
    const std::size_t n = contour.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& p = contour[i];
        const Vec2& q = contour[(i + 1) % n];
        const double px = p[0] * geom.row_spacing, py = p[1] * geom.col_spacing;
        const double qx = q[0] * geom.row_spacing, qy = q[1] * geom.col_spacing;
        a2 += px * qy - qx * py;
    }
    return std::abs(a2) * 0.5;
}

Vec3 view_centroid_patient(const TrackedView& v) {
    Vec3 sum = Vec3::Zero();
    for (const auto& p : v.endo) sum += pixel_to_patient(v.geometry, p);
    for (const auto& p : v.epi) sum += pixel_to_patient(v.geometry, p);
    return sum / static_cast<double>(v.point_count());
}

}  // namespace

LvFrame build_lv_frame(const Study& study) {
    const auto sax = study.sax_views();
    if (sax.size() < 2)
        throw GeometryError("LV frame needs >= 2 SAX slices");

    // Common SAX normal; all slices must agree within 5 degrees.
    Vec3 normal = sax.front()->geometry.normal().normalized();
    for (const auto* v : sax) {
        const Vec3 n = v->geometry.normal().normalized();
        const double c = std::clamp(std::abs(n.dot(normal)), -1.0, 1.0);
        if (std::acos(c) > 5.0 * M_PI / 180.0)
            throw GeometryError("SAX slice normals disagree by more than 5 degrees");
    }

    // Basal end: lowest slice_index; if the stack ordering is flat, the end
    // with the larger mean contour area is basal.
    const TrackedView* basal = sax.front();
    const TrackedView* apical = sax.back();
    if (basal->geometry.slice_index == apical->geometry.slice_index) {
        auto area = [](const TrackedView& v) {
            return 0.5 * (contour_area_mm2(v.geometry, v.endo) + contour_area_mm2(v.geometry, v.epi));
        };
        if (area(*basal) < area(*apical)) std::swap(basal, apical);
    }
    const Vec3 basal_c = view_centroid_patient(*basal);
    const Vec3 apical_c = view_centroid_patient(*apical);
    if (normal.dot(basal_c - apical_c) < 0.0) normal = -normal;

    // Center of mass of every ED contour point across all views.
    Vec3 center = Vec3::Zero();
    std::size_t count = 0;
    for (const auto& v : study.views) {
        for (const auto& p : v.endo) { center += pixel_to_patient(v.geometry, p); ++count; }
        for (const auto& p : v.epi) { center += pixel_to_patient(v.geometry, p); ++count; }
    }
    if (count == 0) throw ValidationError("study has no contour points");
    center /= static_cast<double>(count);

    // +X: 4CH in-plane direction most transverse to the long axis, projected
    // onto the SAX plane; fallback is the projection of patient +X.
    Vec3 x_seed = Vec3::UnitX();
    if (const TrackedView* ch4 = study.first_view(ViewKind::FourChamber)) {
        const Vec3 r = ch4->geometry.row_dir, c = ch4->geometry.col_dir;
        x_seed = std::abs(r.dot(normal)) < std::abs(c.dot(normal)) ? r : c;
    }
    Vec3 x_axis = x_seed - x_seed.dot(normal) * normal;
    if (x_axis.norm() < 1e-9) {
        x_seed = Vec3::UnitX();
        x_axis = x_seed - x_seed.dot(normal) * normal;
        if (x_axis.norm() < 1e-9) {
            x_seed = Vec3::UnitY();
            x_axis = x_seed - x_seed.dot(normal) * normal;
        }
    }
    x_axis.normalize();
    const Vec3 y_axis = normal.cross(x_axis);

    LvFrame frame;
    frame.center = center;
    frame.rotation.row(0) = x_axis;
    frame.rotation.row(1) = y_axis;
    frame.rotation.row(2) = normal;
    frame.validate();
    return frame;
}

namespace {

Vec3 json_to_vec3(const ordered_json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 3)
        throw ValidationError(field + ": expected a 3-element array");
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

std::vector<Vec2> json_to_contour(const ordered_json& j, const std::string& field) {
    if (!j.is_array()) throw ValidationError(field + ": expected an array of [r,c] pairs");
    std::vector<Vec2> out;
    out.reserve(j.size());
    for (const auto& e : j) {
        if (!e.is_array() || e.size() != 2)
            throw ValidationError(field + ": expected [r,c] pairs");
        out.emplace_back(e[0].get<double>(), e[1].get<double>());
    }
    return out;
}

ordered_json vec3_to_json(const Vec3& v) { return ordered_json::array({v[0], v[1], v[2]}); }

ordered_json contour_to_json(const std::vector<Vec2>& c) {
    ordered_json j = ordered_json::array();
    for (const auto& p : c) j.push_back(ordered_json::array({p[0], p[1]}));
    return j;
}

}  // namespace

Study load_study(const std::filesystem::path& bundle_dir) {
    const auto path = bundle_dir / "study.json";
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    ordered_json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("study.json: " + std::string(e.what()));
    }
    if (!doc.contains("views") || !doc["views"].is_array())
        throw ValidationError("study.json: missing 'views' array");

    Study study;
    for (std::size_t vi = 0; vi < doc["views"].size(); ++vi) {
        const auto& jv = doc["views"][vi];
        const std::string where = "views[" + std::to_string(vi) + "]";
        TrackedView view;
        try {
            view.geometry.kind = view_kind_from_string(jv.at("kind").get<std::string>());
            view.geometry.slice_index = jv.value("slice_index", 0);
            const auto& jg = jv.at("geometry");
            view.geometry.origin = json_to_vec3(jg.at("origin"), where + ".geometry.origin");
            view.geometry.row_dir = json_to_vec3(jg.at("row_dir"), where + ".geometry.row_dir");
            view.geometry.col_dir = json_to_vec3(jg.at("col_dir"), where + ".geometry.col_dir");
            view.geometry.row_spacing = jg.at("row_spacing").get<double>();
            view.geometry.col_spacing = jg.at("col_spacing").get<double>();
            view.geometry.rows = jg.at("rows").get<int>();
            view.geometry.cols = jg.at("cols").get<int>();
            const auto& jc = jv.at("contours");
            view.endo = json_to_contour(jc.at("endo"), where + ".contours.endo");
            view.epi = json_to_contour(jc.at("epi"), where + ".contours.epi");
            view.frames = jv.at("frames").get<int>();
            const auto& jd = jv.at("displacements");
            if (!jd.is_array())
                throw ValidationError(where + ".displacements: expected [frame][point][2]");
            for (const auto& jframe : jd) {
                std::vector<Vec2> row;
                row.reserve(jframe.size());
                for (const auto& jp : jframe) {
                    if (!jp.is_array() || jp.size() != 2)
                        throw ValidationError(where + ".displacements: expected [r,c] pairs");
                    row.emplace_back(jp[0].get<double>(), jp[1].get<double>());
                }
                view.displacements.push_back(std::move(row));
            }
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(where + ": " + std::string(e.what()));
        }
        view.validate();
        study.views.push_back(std::move(view));
    }
    return study;
}

void save_study(const Study& study, const std::filesystem::path& bundle_dir) {
    std::filesystem::create_directories(bundle_dir);
    ordered_json doc;
    doc["views"] = ordered_json::array();
    for (const auto& v : study.views) {
        ordered_json jv;
        jv["kind"] = to_string(v.geometry.kind);
        jv["slice_index"] = v.geometry.slice_index;
        jv["geometry"] = {
            {"origin", vec3_to_json(v.geometry.origin)},
            {"row_dir", vec3_to_json(v.geometry.row_dir)},
            {"col_dir", vec3_to_json(v.geometry.col_dir)},
            {"row_spacing", v.geometry.row_spacing},
            {"col_spacing", v.geometry.col_spacing},
            {"rows", v.geometry.rows},
            {"cols", v.geometry.cols},
        };
        jv["contours"] = {{"endo", contour_to_json(v.endo)}, {"epi", contour_to_json(v.epi)}};
        jv["frames"] = v.frames;
        ordered_json jd = ordered_json::array();
        for (const auto& frame : v.displacements) jd.push_back(contour_to_json(frame));
        jv["displacements"] = std::move(jd);
        doc["views"].push_back(std::move(jv));
    }
    const auto path = bundle_dir / "study.json";
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << doc.dump(1) << "\n";
}

}  // namespace strainforge
