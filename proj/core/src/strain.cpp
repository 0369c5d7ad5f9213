#include "strainforge/strain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <Eigen/Dense>

#include "strainforge/threads.hpp"

namespace strainforge {

Mat3 deformation_gradient(const std::array<Vec3, 4>& ref, const std::array<Vec3, 4>& def) {
    Mat3 R, D;
    for (int k = 0; k < 3; ++k) {
        R.col(k) = ref[k + 1] - ref[0];
        D.col(k) = def[k + 1] - def[0];
    }
    const double vol6 = R.determinant();
    if (std::abs(vol6) < 6.0 * 1e-6)  // reference volume below 1e-6 mm^3
        throw NumericError("degenerate reference element in deformation gradient");
    return D * R.inverse();
}

Mat3 green_lagrange(const Mat3& F) {
    if (!F.allFinite()) throw NumericError("non-finite deformation gradient");
    return 0.5 * (F.transpose() * F - Mat3::Identity());
}

LocalDirections local_directions(const Vec3& centroid) {
    const double xy = std::hypot(centroid.x(), centroid.y());
    if (xy < 1e-6)
        throw GeometryError("element centroid lies on the long axis");
    LocalDirections d;
    d.longitudinal = Vec3::UnitZ();
    d.radial = Vec3(centroid.x() / xy, centroid.y() / xy, 0.0);
    d.circumferential = d.longitudinal.cross(d.radial);
    return d;
}

Vec3 project_strain(const Mat3& E, const LocalDirections& dirs) {
    return Vec3(dirs.radial.dot(E * dirs.radial),
                dirs.circumferential.dot(E * dirs.circumferential),
                dirs.longitudinal.dot(E * dirs.longitudinal));
}

int aha16_assign(const Vec3& centroid, double z_base, double z_apex, double theta0) {
    if (!(z_base > z_apex)) throw ValidationError("AHA assignment requires z_base > z_apex");
    constexpr double eps = 1.0;  // mm of longitudinal slack
    const double z = centroid.z();
    if (z > z_base + eps || z < z_apex - eps)
        throw ValidationError("element centroid outside the AHA longitudinal range");
    const double extent = z_base - z_apex;
    // Equal-extent thirds; boundaries belong to the more basal band.
    int band;  // 0 basal, 1 mid, 2 apical
    if (z >= z_base - extent / 3.0) band = 0;
    else if (z >= z_base - 2.0 * extent / 3.0) band = 1;
    else band = 2;

    double theta = std::atan2(centroid.y(), centroid.x()) - theta0;
    theta = std::fmod(theta, 2.0 * M_PI);
    if (theta < 0.0) theta += 2.0 * M_PI;

    // A centroid exactly on a sector edge belongs to the lower-id sector.
    auto sector_of = [&](double width, int sectors) {
        int k = std::min(static_cast<int>(theta / width), sectors - 1);
        if (k > 0 && theta - k * width < 1e-9) --k;
        return k;
    };
    if (band < 2) return band * 6 + sector_of(M_PI / 3.0, 6) + 1;
    return 12 + sector_of(M_PI / 2.0, 4) + 1;
}

SegmentReport strain_curves(const LvMesh& mesh, const FusedMotion& motion, double theta0) {
    const std::size_t n_elems = mesh.tets.size();
    if (motion.frames < 1) throw ValidationError("motion has no frames");
    for (const auto& frame : motion.displacement)
        if (frame.size() != mesh.nodes.size())
            throw ValidationError("motion does not cover all mesh nodes");

    double z_base = -std::numeric_limits<double>::infinity();
    double z_apex = std::numeric_limits<double>::infinity();
    for (const auto& p : mesh.nodes) {
        z_base = std::max(z_base, p.z());
        z_apex = std::min(z_apex, p.z());
    }

    SegmentReport rep;
    rep.frames = motion.frames;
    rep.total_elements = n_elems;
    rep.curves.assign(motion.frames, {});
    rep.element_strain.assign(motion.frames, std::vector<Vec3>(n_elems, Vec3::Zero()));

    // Frame-independent element data: inverse reference edges, directions,
    // segment id, reference volume.
    struct ElemRef {
        Mat3 r_inv;
        LocalDirections dirs;
        int segment = 0;   // 1..16; 0 = excluded
        double volume = 0.0;
    };
    std::vector<ElemRef> elems(n_elems);
    for (std::size_t e = 0; e < n_elems; ++e) {
        const auto& t = mesh.tets[e];
        const Vec3 centroid =
            0.25 * (mesh.nodes[t[0]] + mesh.nodes[t[1]] + mesh.nodes[t[2]] + mesh.nodes[t[3]]);
        Mat3 R;
        for (int k = 0; k < 3; ++k) R.col(k) = mesh.nodes[t[k + 1]] - mesh.nodes[t[0]];
        const double vol = R.determinant() / 6.0;
        if (!(vol >= 1e-6)) {
            ++rep.excluded_elements;
            continue;
        }
        try {
            elems[e].dirs = local_directions(centroid);
        } catch (const GeometryError&) {
            ++rep.excluded_elements;
            continue;
        }
        elems[e].r_inv = R.inverse();
        elems[e].volume = vol;
        elems[e].segment = aha16_assign(centroid, z_base, z_apex, theta0);
    }
    if (rep.excluded_elements * 100 >= n_elems && rep.excluded_elements > 0)
        throw NumericError("more than 1% of elements are degenerate or on-axis");

    rep.element_segments.resize(n_elems);
    for (std::size_t e = 0; e < n_elems; ++e) {
        rep.element_segments[e] = elems[e].segment;
        if (elems[e].segment > 0) ++rep.element_counts[elems[e].segment - 1];
    }

    parallel_for(motion.frames, [&](std::size_t t) {
        std::array<Vec3, 16> weighted{};
        std::array<double, 16> volume{};
        weighted.fill(Vec3::Zero());
        volume.fill(0.0);
        const auto& disp = motion.displacement[t];
        for (std::size_t e = 0; e < n_elems; ++e) {
            const ElemRef& er = elems[e];
            if (er.segment == 0) continue;
            const auto& tet = mesh.tets[e];
            Mat3 D;
            for (int k = 0; k < 3; ++k)
                D.col(k) = (mesh.nodes[tet[k + 1]] + disp[tet[k + 1]]) -
                           (mesh.nodes[tet[0]] + disp[tet[0]]);
            const Mat3 F = D * er.r_inv;
            const Mat3 E = 0.5 * (F.transpose() * F - Mat3::Identity());
            const Vec3 proj = project_strain(E, er.dirs);
            rep.element_strain[t][e] = proj;
            weighted[er.segment - 1] += er.volume * proj;
            volume[er.segment - 1] += er.volume;
        }
        for (int s = 0; s < 16; ++s)
            rep.curves[t][s] = volume[s] > 0.0 ? Vec3(weighted[s] / volume[s]) : Vec3::Zero();
    });

    // Signed peaks: max over frames for Err, min for Ecc and Ell.
    for (int s = 0; s < 16; ++s) {
        Vec3 peak = rep.curves[0][s];
        std::array<int, 3> pf{0, 0, 0};
        for (int t = 1; t < rep.frames; ++t) {
            const Vec3& v = rep.curves[t][s];
            if (v[0] > peak[0]) { peak[0] = v[0]; pf[0] = t; }
            if (v[1] < peak[1]) { peak[1] = v[1]; pf[1] = t; }
            if (v[2] < peak[2]) { peak[2] = v[2]; pf[2] = t; }
        }
        rep.peaks[s] = peak;
        rep.peak_frames[s] = pf;
    }
    int populated = 0;
    for (int s = 0; s < 16; ++s)
        if (rep.element_counts[s] > 0) {
            rep.global_peaks += rep.peaks[s];
            ++populated;
        }
    if (populated > 0) rep.global_peaks /= static_cast<double>(populated);

    // Extrema frames of the segment-mean curve per component.
    std::vector<Vec3> mean_curve(rep.frames, Vec3::Zero());
    for (int t = 0; t < rep.frames; ++t) {
        int k = 0;
        for (int s = 0; s < 16; ++s)
            if (rep.element_counts[s] > 0) {
                mean_curve[t] += rep.curves[t][s];
                ++k;
            }
        if (k > 0) mean_curve[t] /= static_cast<double>(k);
    }
    rep.global_peak_frames = {0, 0, 0};
    for (int t = 1; t < rep.frames; ++t) {
        if (mean_curve[t][0] > mean_curve[rep.global_peak_frames[0]][0])
            rep.global_peak_frames[0] = t;
        if (mean_curve[t][1] < mean_curve[rep.global_peak_frames[1]][1])
            rep.global_peak_frames[1] = t;
        if (mean_curve[t][2] < mean_curve[rep.global_peak_frames[2]][2])
            rep.global_peak_frames[2] = t;
    }
    return rep;
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_strain_curves_csv(const SegmentReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "frame,segment,Err,Ecc,Ell\n";
    for (int t = 0; t < report.frames; ++t)
        for (int s = 0; s < 16; ++s)
            out << t << "," << s + 1 << "," << fmt(report.curves[t][s][0]) << ","
                << fmt(report.curves[t][s][1]) << "," << fmt(report.curves[t][s][2]) << "\n";
}

void write_strain_peaks_csv(const SegmentReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "segment,peak_Err,peak_Ecc,peak_Ell,peak_frame_Err,peak_frame_Ecc,peak_frame_Ell\n";
    for (int s = 0; s < 16; ++s)
        out << s + 1 << "," << fmt(report.peaks[s][0]) << "," << fmt(report.peaks[s][1]) << ","
            << fmt(report.peaks[s][2]) << "," << report.peak_frames[s][0] << ","
            << report.peak_frames[s][1] << "," << report.peak_frames[s][2] << "\n";
}

}  // namespace strainforge
