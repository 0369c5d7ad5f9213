#include "strainforge/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "strainforge/contours.hpp"
#include "strainforge/ffd.hpp"
#include "strainforge/strain.hpp"
#include "strainforge/vtk_io.hpp"

namespace strainforge {

using ordered_json = nlohmann::ordered_json;

void PipelineConfig::validate() const {
    if (ring_samples < 8 || ring_samples > 4096)
        throw ValidationError("ring_samples must be in [8, 4096]");
    if (lax_samples < 4 || lax_samples > 4096)
        throw ValidationError("lax_samples must be in [4, 4096]");
    if (layers < 1 || layers > 16) throw ValidationError("layers must be in [1, 16]");
    if (alpha < 0.0) throw ValidationError("alpha must be >= 0");
    if (levels < 1 || levels > 6) throw ValidationError("levels must be in [1, 6]");
    if (weighting != "global" && weighting != "per_point")
        throw ValidationError("weighting must be 'global' or 'per_point'");
    if (extrapolation != "nearest")
        throw ValidationError("extrapolation mode 'nearest' is the only bounded option");
    if (apex != "auto" && apex != "annular" && apex != "fan")
        throw ValidationError("apex must be auto, annular or fan");
    if (!std::isfinite(theta0_deg)) throw ValidationError("theta0_deg must be finite");
}

void PipelineConfig::apply_json(const ordered_json& doc) {
    for (const auto& [key, value] : doc.items()) {
        if (key == "bundle") bundle = value.get<std::string>();
        else if (key == "out") out = value.get<std::string>();
        else if (key == "ring_samples") ring_samples = value.get<int>();
        else if (key == "lax_samples") lax_samples = value.get<int>();
        else if (key == "layers") layers = value.get<int>();
        else if (key == "alpha") alpha = value.get<double>();
        else if (key == "levels") levels = value.get<int>();
        else if (key == "weighting") weighting = value.get<std::string>();
        else if (key == "extrapolation") extrapolation = value.get<std::string>();
        else if (key == "theta0_deg") theta0_deg = value.get<double>();
        else if (key == "apex") apex = value.get<std::string>();
        else if (key == "align_peaks") align_peaks = value.get<bool>();
        else if (key == "smooth_tracks") smooth_tracks = value.get<bool>();
        else throw ValidationError("unknown config key '" + key + "'");
    }
}

ApexClosure PipelineConfig::apex_mode() const {
    if (apex == "annular") return ApexClosure::Annular;
    if (apex == "fan") return ApexClosure::Fan;
    return ApexClosure::Auto;
}

namespace {

template <typename Fn>
auto guard_stage(const std::string& stage, Fn&& fn) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const ValidationError& e) {
        throw StageError(stage, "validation", e.what(), 2);
    } catch (const NumericError& e) {
        throw StageError(stage, "numeric", e.what(), 3);
    } catch (const IoError& e) {
        throw StageError(stage, "io", e.what(), 4);
    }
}

// Shoelace area (mm^2) of tracked pixel points at one frame.
double tracked_polygon_area(const ViewGeometry& geom, const std::vector<Vec2>& base,
                            const std::vector<Vec2>& disp, std::size_t offset) {
    double a2 = 0.0;
    const std::size_t n = base.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 p = base[i] + disp[offset + i];
        const Vec2 q = base[(i + 1) % n] + disp[offset + (i + 1) % n];
        a2 += p[0] * geom.row_spacing * q[1] * geom.col_spacing -
              q[0] * geom.row_spacing * p[1] * geom.col_spacing;
    }
    return 0.5 * a2;
}

// Contraction curve of one view: |cavity area(t) - cavity area(0)| of the
// tracked endo polygon. The endocardial area is the same contraction signal
// for SAX rings and LAX cavity outlines, so extrema stay comparable across
// view kinds.
std::vector<double> contraction_curve(const TrackedView& view) {
    std::vector<double> curve(view.frames, 0.0);
    const double a0 = tracked_polygon_area(view.geometry, view.endo, view.displacements[0], 0);
    for (int t = 0; t < view.frames; ++t)
        curve[t] = std::abs(
            std::abs(tracked_polygon_area(view.geometry, view.endo, view.displacements[t], 0)) -
            std::abs(a0));
    return curve;
}

// Circular shift s with re-referencing so the new frame 0 is exactly zero.
void apply_shift(TrackedView& view, int s) {
    if (s == 0) return;
    const int T = view.frames;
    auto idx = [&](int t) { return ((t - s) % T + T) % T; };
    const std::vector<Vec2> ref = view.displacements[idx(0)];
    std::vector<std::vector<Vec2>> shifted(T);
    for (int t = 0; t < T; ++t) {
        shifted[t] = view.displacements[idx(t)];
        for (std::size_t p = 0; p < shifted[t].size(); ++p) shifted[t][p] -= ref[p];
    }
    view.displacements = std::move(shifted);
}

std::string roi_name(RoiTag roi) { return roi == RoiTag::Endo ? "endo" : "epi"; }
RoiTag roi_from_name(const std::string& s) {
    if (s == "endo") return RoiTag::Endo;
    if (s == "epi") return RoiTag::Epi;
    throw ValidationError("unknown roi tag '" + s + "'");
}

// Rotate ring samples (and their displacement rows) so sample 0 sits at the
// azimuth closest to +X about the ring centroid; keeps the transmural lattice
// aligned across slices.
void anchor_ring(std::vector<Vec3>& pts, std::vector<std::vector<Vec3>>& disp) {
    Vec3 c = Vec3::Zero();
    for (const auto& p : pts) c += p;
    c /= static_cast<double>(pts.size());
    int best = 0;
    double best_abs = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double az = std::abs(std::atan2(pts[i].y() - c.y(), pts[i].x() - c.x()));
        if (az < best_abs) {
            best_abs = az;
            best = static_cast<int>(i);
        }
    }
    if (best == 0) return;
    std::rotate(pts.begin(), pts.begin() + best, pts.end());
    for (auto& row : disp) std::rotate(row.begin(), row.begin() + best, row.end());
}

// CCW orientation about +Z; reversing keeps point/displacement correspondence.
void orient_ccw(std::vector<Vec3>& pts, std::vector<std::vector<Vec3>>& disp) {
    double a2 = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Vec3& p = pts[i];
        const Vec3& q = pts[(i + 1) % pts.size()];
        a2 += p.x() * q.y() - q.x() * p.y();
    }
    if (a2 >= 0.0) return;
    std::reverse(pts.begin(), pts.end());
    for (auto& row : disp) std::reverse(row.begin(), row.end());
}

}  // namespace

ReconstructResult reconstruct_study(const Study& input, const PipelineConfig& config) {
    config.validate();
    Study study = input;

    ReconstructResult result;
    // Peak-time alignment on the tracked bundle, before any resampling.
    if (config.align_peaks) {
        std::vector<std::vector<double>> curves;
        curves.push_back({});  // combined SAX reference
        std::vector<int> lax_view_index;
        std::vector<double> sax_curve;
        for (const auto& view : study.views) {
            const auto curve = contraction_curve(view);
            if (view.geometry.kind == ViewKind::Sax) {
                if (sax_curve.empty()) sax_curve.assign(curve.size(), 0.0);
                for (std::size_t t = 0; t < curve.size() && t < sax_curve.size(); ++t)
                    sax_curve[t] += curve[t];
            } else {
                lax_view_index.push_back(static_cast<int>(&view - study.views.data()));
                curves.push_back(curve);
            }
        }
        curves[0] = sax_curve;
        const double sax_peak =
            sax_curve.empty() ? 0.0 : *std::max_element(sax_curve.begin(), sax_curve.end());
        if (sax_peak < 1e-9) {
            result.alignment_note = "no contraction signal; alignment skipped";
        } else {
            const auto shifts = align_peak_times(curves, 0);
            result.align_shifts.assign(study.views.size(), 0);
            for (std::size_t k = 0; k < lax_view_index.size(); ++k) {
                result.align_shifts[lax_view_index[k]] = shifts[k + 1];
                apply_shift(study.views[lax_view_index[k]], shifts[k + 1]);
            }
            result.alignment_applied = true;
        }
    }

    result.frame = build_lv_frame(study);
    const LvFrame& frame = result.frame;

    result.cloud.frames = study.frame_count();
    struct RingEntry {
        double z;
        int slice;
        std::vector<Vec3> endo, epi;
        std::vector<std::vector<Vec3>> endo_disp, epi_disp;
    };
    std::vector<RingEntry> ring_entries;

    for (const auto& view : study.views) {
        const bool sax = view.geometry.kind == ViewKind::Sax;
        auto lv_contour = [&](const std::vector<Vec2>& contour, std::size_t offset) {
            ContourRing ring;
            ring.closed = sax;
            ring.slice = view.geometry.slice_index;
            for (const auto& rc : contour)
                ring.points.push_back(frame.to_lv(pixel_to_patient(view.geometry, rc)));
            ring.frame_displacements.resize(view.frames);
            for (int t = 0; t < view.frames; ++t)
                for (std::size_t i = 0; i < contour.size(); ++i)
                    ring.frame_displacements[t].push_back(frame.to_lv_vector(
                        inplane_displacement_to_patient(view.geometry,
                                                        view.displacements[t][offset + i])));
            return ring;
        };
        auto process = [&](RoiTag roi, const std::vector<Vec2>& contour, std::size_t offset) {
            ContourRing ring = lv_contour(contour, offset);
            ring.roi = roi;
            const int n = sax ? config.ring_samples : config.lax_samples;
            const ResampledContour res =
                sax ? resample_closed(ring, n) : resample_open(ring, n);
            auto carried = carry_displacements(ring, res);
            CloudView cv;
            cv.kind = view.geometry.kind;
            cv.roi = roi;
            cv.slice = view.geometry.slice_index;
            cv.points = res.points;
            cv.displacement = std::move(carried);
            // Views with fewer frames than the study pad with zero motion.
            while (static_cast<int>(cv.displacement.size()) < result.cloud.frames)
                cv.displacement.push_back(std::vector<Vec3>(cv.points.size(), Vec3::Zero()));
            result.cloud.views.push_back(std::move(cv));
            return res;
        };

        if (sax) {
            ContourRing er = lv_contour(view.endo, 0);
            er.roi = RoiTag::Endo;
            orient_ccw(er.points, er.frame_displacements);
            ContourRing pr = lv_contour(view.epi, view.endo.size());
            pr.roi = RoiTag::Epi;
            orient_ccw(pr.points, pr.frame_displacements);

            RingEntry entry;
            entry.slice = view.geometry.slice_index;
            auto finish = [&](ContourRing& ring, std::vector<Vec3>& pts,
                              std::vector<std::vector<Vec3>>& disp, RoiTag roi) {
                const ResampledContour res = resample_closed(ring, config.ring_samples);
                auto carried = carry_displacements(ring, res);
                pts = res.points;
                disp = std::move(carried);
                anchor_ring(pts, disp);
                CloudView cv;
                cv.kind = ViewKind::Sax;
                cv.roi = roi;
                cv.slice = view.geometry.slice_index;
                cv.points = pts;
                cv.displacement = disp;
                while (static_cast<int>(cv.displacement.size()) < result.cloud.frames)
                    cv.displacement.push_back(std::vector<Vec3>(cv.points.size(), Vec3::Zero()));
                result.cloud.views.push_back(std::move(cv));
            };
            finish(er, entry.endo, entry.endo_disp, RoiTag::Endo);
            finish(pr, entry.epi, entry.epi_disp, RoiTag::Epi);
            Vec3 c = Vec3::Zero();
            for (const auto& p : entry.endo) c += p;
            entry.z = c.z() / static_cast<double>(entry.endo.size());
            ring_entries.push_back(std::move(entry));
        } else {
            process(RoiTag::Endo, view.endo, 0);
            process(RoiTag::Epi, view.epi, view.endo.size());
        }
    }

    if (ring_entries.size() < 2)
        throw GeometryError("meshing needs >= 2 SAX slices");
    std::stable_sort(ring_entries.begin(), ring_entries.end(),
                     [](const RingEntry& a, const RingEntry& b) { return a.z > b.z; });
    std::vector<std::vector<Vec3>> endo_rings, epi_rings;
    for (const auto& e : ring_entries) {
        endo_rings.push_back(e.endo);
        epi_rings.push_back(e.epi);
    }
    result.mesh = tetrahedralize(endo_rings, epi_rings, config.layers, config.apex_mode());
    return result;
}

void write_cloud(const StudyCloud& cloud, const LvFrame& frame,
                 const std::filesystem::path& path) {
    ordered_json doc;
    doc["frames"] = cloud.frames;
    doc["lv_frame"] = {
        {"center", {frame.center.x(), frame.center.y(), frame.center.z()}},
        {"rotation",
         {{frame.rotation(0, 0), frame.rotation(0, 1), frame.rotation(0, 2)},
          {frame.rotation(1, 0), frame.rotation(1, 1), frame.rotation(1, 2)},
          {frame.rotation(2, 0), frame.rotation(2, 1), frame.rotation(2, 2)}}},
    };
    doc["views"] = ordered_json::array();
    for (const auto& v : cloud.views) {
        ordered_json jv;
        jv["kind"] = to_string(v.kind);
        jv["roi"] = roi_name(v.roi);
        jv["slice"] = v.slice;
        ordered_json pts = ordered_json::array();
        for (const auto& p : v.points) pts.push_back({p.x(), p.y(), p.z()});
        jv["points"] = std::move(pts);
        ordered_json disp = ordered_json::array();
        for (const auto& row : v.displacement) {
            ordered_json jrow = ordered_json::array();
            for (const auto& d : row) jrow.push_back({d.x(), d.y(), d.z()});
            disp.push_back(std::move(jrow));
        }
        jv["displacement"] = std::move(disp);
        doc["views"].push_back(std::move(jv));
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << doc.dump(1) << "\n";
}

std::pair<StudyCloud, LvFrame> read_cloud(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    ordered_json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("cloud.json: " + std::string(e.what()));
    }
    StudyCloud cloud;
    LvFrame frame;
    try {
        cloud.frames = doc.at("frames").get<int>();
        const auto& jf = doc.at("lv_frame");
        for (int i = 0; i < 3; ++i) frame.center[i] = jf.at("center")[i].get<double>();
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                frame.rotation(i, j) = jf.at("rotation")[i][j].get<double>();
        for (const auto& jv : doc.at("views")) {
            CloudView v;
            v.kind = view_kind_from_string(jv.at("kind").get<std::string>());
            v.roi = roi_from_name(jv.at("roi").get<std::string>());
            v.slice = jv.at("slice").get<int>();
            for (const auto& jp : jv.at("points"))
                v.points.emplace_back(jp[0].get<double>(), jp[1].get<double>(),
                                      jp[2].get<double>());
            for (const auto& jrow : jv.at("displacement")) {
                std::vector<Vec3> row;
                for (const auto& jd : jrow)
                    row.emplace_back(jd[0].get<double>(), jd[1].get<double>(),
                                     jd[2].get<double>());
                v.displacement.push_back(std::move(row));
            }
            cloud.views.push_back(std::move(v));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("cloud.json: " + std::string(e.what()));
    }
    return {std::move(cloud), frame};
}

namespace {

std::filesystem::path frame_path(const std::filesystem::path& out, int t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "frame_%03d.vtk", t);
    return out / buf;
}

void write_json_file(const ordered_json& doc, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << doc.dump(1) << "\n";
}

ordered_json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    ordered_json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path.filename().string() + ": " + std::string(e.what()));
    }
    return doc;
}

}  // namespace

void stage_reconstruct(const PipelineConfig& config) {
    guard_stage("reconstruct", [&] {
        config.validate();
        std::filesystem::create_directories(config.out);
        const Study study = load_study(config.bundle);
        const ReconstructResult rec = reconstruct_study(study, config);
        write_vtk(rec.mesh, config.out / "mesh.vtk", "strainforge reference mesh");
        write_cloud(rec.cloud, rec.frame, config.out / "cloud.json");
        ordered_json meta;
        meta["frames"] = rec.cloud.frames;
        meta["nodes"] = rec.mesh.nodes.size();
        meta["tets"] = rec.mesh.tets.size();
        meta["alignment"] = {{"applied", rec.alignment_applied},
                             {"shifts", rec.align_shifts},
                             {"note", rec.alignment_note}};
        write_json_file(meta, config.out / "reconstruct.json");
    });
}

void stage_fuse(const PipelineConfig& config) {
    guard_stage("fuse", [&] {
        config.validate();
        const LvMesh mesh = load_external_mesh(config.out / "mesh.vtk");
        auto [cloud, frame] = read_cloud(config.out / "cloud.json");
        FusionOptions opts;
        opts.per_point_weights = config.weighting == "per_point";
        const FusedMotion motion = deform_mesh(mesh, cloud, opts);

        std::vector<double> extrap(mesh.nodes.size());
        for (std::size_t i = 0; i < extrap.size(); ++i)
            extrap[i] = motion.extrapolated[i] ? 1.0 : 0.0;
        for (int t = 0; t < motion.frames; ++t) {
            VtkFields fields;
            fields.point_vectors.emplace_back("displacement", motion.displacement[t]);
            fields.point_scalars.emplace_back("extrapolated", extrap);
            write_vtk(mesh, frame_path(config.out, t), "strainforge deformed frame", &fields);
        }
        ordered_json meta;
        meta["frames"] = motion.frames;
        meta["w_min"] = motion.w_min;
        meta["w_max"] = motion.w_max;
        meta["weight_degenerate"] = motion.weight_degenerate;
        meta["extrapolated_node_fraction"] = motion.extrapolated_fraction();
        write_json_file(meta, config.out / "fusion.json");
    });
}

void stage_strain(const PipelineConfig& config) {
    guard_stage("strain", [&] {
        config.validate();
        const LvMesh mesh = load_external_mesh(config.out / "mesh.vtk");
        const ordered_json fusion = read_json_file(config.out / "fusion.json");
        const int frames = fusion.at("frames").get<int>();

        FusedMotion motion;
        motion.frames = frames;
        std::vector<VtkFields> frame_fields(frames);
        for (int t = 0; t < frames; ++t) {
            VtkDataset ds = read_vtk(frame_path(config.out, t));
            bool found = false;
            for (auto& [name, vecs] : ds.fields.point_vectors)
                if (name == "displacement") {
                    motion.displacement.push_back(std::move(vecs));
                    found = true;
                    break;
                }
            if (!found)
                throw ValidationError("frame file lacks a 'displacement' vector field");
            frame_fields[t].point_vectors.emplace_back("displacement",
                                                       motion.displacement.back());
            for (auto& [name, vals] : ds.fields.point_scalars)
                if (name == "extrapolated")
                    frame_fields[t].point_scalars.emplace_back(name, std::move(vals));
        }

        const SegmentReport report =
            strain_curves(mesh, motion, config.theta0_deg * M_PI / 180.0);
        write_strain_curves_csv(report, config.out / "strain_curves.csv");
        write_strain_peaks_csv(report, config.out / "strain_peaks.csv");

        for (int t = 0; t < frames; ++t) {
            std::vector<double> err(mesh.tets.size()), ecc(mesh.tets.size()),
                ell(mesh.tets.size());
            for (std::size_t e = 0; e < mesh.tets.size(); ++e) {
                err[e] = report.element_strain[t][e][0];
                ecc[e] = report.element_strain[t][e][1];
                ell[e] = report.element_strain[t][e][2];
            }
            frame_fields[t].cell_scalars.emplace_back("Err", std::move(err));
            frame_fields[t].cell_scalars.emplace_back("Ecc", std::move(ecc));
            frame_fields[t].cell_scalars.emplace_back("Ell", std::move(ell));
            write_vtk(mesh, frame_path(config.out, t), "strainforge deformed frame",
                      &frame_fields[t]);
        }

        ordered_json meta;
        meta["frames"] = frames;
        meta["global_peaks"] = {{"Err", report.global_peaks[0]},
                                {"Ecc", report.global_peaks[1]},
                                {"Ell", report.global_peaks[2]}};
        meta["global_peak_frames"] = {{"Err", report.global_peak_frames[0]},
                                      {"Ecc", report.global_peak_frames[1]},
                                      {"Ell", report.global_peak_frames[2]}};
        ordered_json segs = ordered_json::array();
        for (int s = 0; s < 16; ++s)
            segs.push_back({{"segment", s + 1},
                            {"peak_Err", report.peaks[s][0]},
                            {"peak_Ecc", report.peaks[s][1]},
                            {"peak_Ell", report.peaks[s][2]},
                            {"elements", report.element_counts[s]}});
        meta["segments"] = std::move(segs);
        meta["excluded_element_fraction"] = report.excluded_fraction();
        write_json_file(meta, config.out / "strain.json");
    });
}

ordered_json stage_report(const PipelineConfig& config) {
    return guard_stage("report", [&]() -> ordered_json {
        config.validate();
        const LvMesh mesh = load_external_mesh(config.out / "mesh.vtk");
        const ordered_json fusion = read_json_file(config.out / "fusion.json");
        const ordered_json strain = read_json_file(config.out / "strain.json");
        const MeshQualityReport quality = mesh_quality(mesh);

        const double extrap = fusion.at("extrapolated_node_fraction").get<double>();
        const double excluded = strain.at("excluded_element_fraction").get<double>();
        ordered_json qc;
        qc["degraded"] = false;
        qc["reasons"] = ordered_json::array();
        if (extrap > 0.20) {
            qc["degraded"] = true;
            qc["reasons"].push_back("extrapolated node fraction above 20%");
        }
        if (excluded > 0.01) {
            qc["degraded"] = true;
            qc["reasons"].push_back("excluded element fraction above 1%");
        }

        ordered_json report;
        report["global_peaks"] = strain.at("global_peaks");
        report["global_peak_frames"] = strain.at("global_peak_frames");
        report["segments"] = strain.at("segments");
        report["frames"] = strain.at("frames");
        report["extrapolated_node_fraction"] = extrap;
        report["excluded_element_fraction"] = excluded;
        report["weight_range"] = {{"w_min", fusion.at("w_min")}, {"w_max", fusion.at("w_max")},
                                  {"degenerate", fusion.at("weight_degenerate")}};
        report["mesh_quality"] = {{"tets", quality.tet_count},
                                  {"min_volume", quality.min_volume},
                                  {"mean_volume", quality.mean_volume},
                                  {"min_dihedral_deg", quality.min_dihedral_deg}};
        report["qc"] = std::move(qc);
        ordered_json artifacts = ordered_json::array();
        artifacts.push_back("mesh.vtk");
        artifacts.push_back("cloud.json");
        for (int t = 0; t < strain.at("frames").get<int>(); ++t)
            artifacts.push_back(frame_path("", t).string());
        artifacts.push_back("strain_curves.csv");
        artifacts.push_back("strain_peaks.csv");
        report["artifacts"] = std::move(artifacts);
        write_json_file(report, config.out / "report.json");
        return report;
    });
}

ordered_json run_pipeline(const PipelineConfig& config) {
    stage_reconstruct(config);
    stage_fuse(config);
    stage_strain(config);
    return stage_report(config);
}

CohortSummary cohort_summary(const std::vector<ordered_json>& reports) {
    if (reports.empty()) throw ValidationError("cohort summary needs >= 1 report");
    CohortSummary out;
    out.count = static_cast<int>(reports.size());
    std::vector<Vec3> peaks;
    for (const auto& rep : reports) {
        const auto& g = rep.at("global_peaks");
        peaks.emplace_back(g.at("Err").get<double>(), g.at("Ecc").get<double>(),
                           g.at("Ell").get<double>());
    }
    for (const auto& p : peaks) out.mean += p;
    out.mean /= static_cast<double>(out.count);
    Vec3 var = Vec3::Zero();
    for (const auto& p : peaks) var += (p - out.mean).cwiseProduct(p - out.mean);
    var /= static_cast<double>(out.count);  // population SD
    out.sd = var.cwiseSqrt();
    return out;
}

}  // namespace strainforge
