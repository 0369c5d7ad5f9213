#include "strainforge/phantom.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

namespace strainforge {

void AnnulusPhantom::validate() const {
    if (!(0.0 < ri && ri < ro)) throw ValidationError("phantom needs 0 < ri < ro");
    if (!(height > 0.0)) throw ValidationError("phantom height must be positive");
    const std::size_t t = lambda_z.size();
    if (t < 1) throw ValidationError("phantom needs >= 1 frame");
    if (ri_prime.size() != t || tau.size() != t || rot.size() != t || shift.size() != t)
        throw ValidationError("phantom waveforms must share the frame count");
    if (lambda_z[0] != 1.0 || ri_prime[0] != ri)
        throw ValidationError("phantom must be the identity at frame 0");
    for (double l : lambda_z)
        if (!(l > 0.0)) throw ValidationError("lambda_z must stay positive");
    for (double r : ri_prime)
        if (!(r > 0.0)) throw ValidationError("ri_prime must stay positive");
}

AnnulusPhantom AnnulusPhantom::identity(int frames) {
    AnnulusPhantom ph;
    ph.lambda_z.assign(frames, 1.0);
    ph.ri_prime.assign(frames, ph.ri);
    ph.tau.assign(frames, 0.0);
    ph.rot.assign(frames, 0.0);
    ph.shift.assign(frames, Vec3::Zero());
    return ph;
}

AnnulusPhantom phantom_preset(const std::string& name, int frames) {
    if (frames < 2) throw ValidationError("phantom presets need >= 2 frames");
    AnnulusPhantom ph = AnnulusPhantom::identity(frames);
    const double n = static_cast<double>(frames);
    if (name == "incompressible") {
        // Single longitudinal-shortening waveform with the volume-neutral
        // cavity coupling ri' = ri / sqrt(lambda); the in-plane motion is then
        // a pure scaling.
        for (int t = 0; t < frames; ++t) {
            const double s = std::sin(M_PI * t / (n - 1.0));
            ph.lambda_z[t] = 1.0 - 0.15 * s * s;
            ph.ri_prime[t] = ph.ri / std::sqrt(ph.lambda_z[t]);
        }
        ph.ri_prime[0] = ph.ri;
    } else if (name == "contractile") {
        // Longitudinal shortening peaks in the first half of the cycle; the
        // cavity contraction (positive Err, negative Ecc) dominates the second
        // half, when the longitudinal displacement has recovered. The cavity
        // waveform multiplies the volume-neutral coupling so the in-plane
        // motion during the longitudinal dip stays a pure scaling.
        for (int t = 0; t < frames; ++t) {
            const double half = 0.55 * (n - 1.0);
            if (t <= half) {
                const double s = std::sin(M_PI * t / half);
                ph.lambda_z[t] = 1.0 - 0.15 * s * s;
            }
            double shrink = 1.0;
            const double onset = 0.28 * (n - 1.0);
            if (t >= onset) {
                const double s = std::sin(M_PI * (t - onset) / (n - 1.0 - onset));
                shrink = 1.0 - 0.14 * s * s;
            }
            ph.ri_prime[t] = ph.ri * shrink / std::sqrt(ph.lambda_z[t]);
        }
        ph.ri_prime[0] = ph.ri;
    } else if (name == "rigid") {
        for (int t = 0; t < frames; ++t) {
            ph.rot[t] = 10.0 * M_PI / 180.0 * t;
            ph.shift[t] = t * Vec3(3.0, 4.0, 0.0);
        }
    } else if (name == "translate") {
        for (int t = 0; t < frames; ++t) ph.shift[t] = t * Vec3(2.0, -1.0, 1.5);
    } else {
        throw ValidationError("unknown phantom preset '" + name + "'");
    }
    ph.validate();
    return ph;
}

Vec3 motion_map(const AnnulusPhantom& ph, const Vec3& p, int t) {
    if (t < 0 || t >= ph.frames()) throw ValidationError("phantom frame index out of range");
    const double r = std::hypot(p.x(), p.y());
    constexpr double tol = 1e-9;
    if (r < ph.ri - tol || r > ph.ro + tol || p.z() < -tol || p.z() > ph.height + tol)
        throw ValidationError("point outside the annulus wall");
    const double lambda = ph.lambda_z[t];
    const double rp = std::sqrt(ph.ri_prime[t] * ph.ri_prime[t] +
                                (r * r - ph.ri * ph.ri) / lambda);
    const double theta = std::atan2(p.y(), p.x()) + ph.rot[t] + ph.tau[t] * p.z();
    return Vec3(rp * std::cos(theta), rp * std::sin(theta), lambda * p.z()) + ph.shift[t];
}

Mat3 analytic_deformation_gradient(const AnnulusPhantom& ph, const Vec3& p, int t) {
    constexpr double h = 1e-4;
    const double r = std::hypot(p.x(), p.y());
    if (r < ph.ri + 2.0 * h || r > ph.ro - 2.0 * h || p.z() < 2.0 * h ||
        p.z() > ph.height - 2.0 * h)
        throw ValidationError("finite-difference probe too close to the wall boundary");
    Mat3 F;
    for (int j = 0; j < 3; ++j) {
        Vec3 dp = Vec3::Zero();
        dp[j] = h;
        F.col(j) = (motion_map(ph, p + dp, t) - motion_map(ph, p - dp, t)) / (2.0 * h);
    }
    return F;
}

Mat3 analytic_strain(const AnnulusPhantom& ph, const Vec3& p, int t) {
    const Mat3 F = analytic_deformation_gradient(ph, p, t);
    return 0.5 * (F.transpose() * F - Mat3::Identity());
}

namespace {

Vec3 project_cylindrical(const Mat3& E, const Vec3& p) {
    const double r = std::hypot(p.x(), p.y());
    const Vec3 er(p.x() / r, p.y() / r, 0.0);
    const Vec3 el = Vec3::UnitZ();
    const Vec3 ec = el.cross(er);
    return Vec3(er.dot(E * er), ec.dot(E * ec), el.dot(E * el));
}

}  // namespace

std::vector<OracleRow> oracle_table(const AnnulusPhantom& ph) {
    ph.validate();
    // 8-point Gauss-Legendre rule across the wall thickness, weighted by the
    // cylindrical volume element r dr.
    static const double kNodes[8] = {-0.9602898564975363, -0.7966664774136267,
                                     -0.5255324099163290, -0.1834346424956498,
                                     0.1834346424956498,  0.5255324099163290,
                                     0.7966664774136267,  0.9602898564975363};
    static const double kWeights[8] = {0.1012285362903763, 0.2223810344533745,
                                       0.3137066458778873, 0.3626837833783620,
                                       0.3626837833783620, 0.3137066458778873,
                                       0.2223810344533745, 0.1012285362903763};
    const double azimuths[4] = {0.17, 0.17 + M_PI_2, 0.17 + M_PI, 0.17 + 3.0 * M_PI_2};
    const double z = ph.height / 2.0;
    const double mid_r = 0.5 * (ph.ri + ph.ro);

    std::vector<OracleRow> rows;
    rows.reserve(ph.frames());
    for (int t = 0; t < ph.frames(); ++t) {
        OracleRow row;
        row.frame = t;
        Vec3 acc = Vec3::Zero();
        double norm = 0.0;
        for (int g = 0; g < 8; ++g) {
            const double r = 0.5 * (ph.ri + ph.ro) + 0.5 * (ph.ro - ph.ri) * kNodes[g];
            const double wt = kWeights[g] * r;
            Vec3 at_r = Vec3::Zero();
            for (double az : azimuths) {
                const Vec3 p(r * std::cos(az), r * std::sin(az), z);
                at_r += project_cylindrical(analytic_strain(ph, p, t), p);
            }
            acc += wt * (at_r / 4.0);
            norm += wt;
        }
        row.wall_mean = acc / norm;
        const Vec3 pm(mid_r * std::cos(azimuths[0]), mid_r * std::sin(azimuths[0]), z);
        row.mid_wall = project_cylindrical(analytic_strain(ph, pm, t), pm);
        rows.push_back(row);
    }
    return rows;
}

Study sample_views(const AnnulusPhantom& ph, const ViewLayout& layout) {
    ph.validate();
    if (layout.sax_slices < 2) throw ValidationError("phantom layout needs >= 2 SAX slices");
    if (layout.contour_points < 3 || layout.lax_points_per_limb < 2)
        throw ValidationError("phantom layout has too few contour points");

    Study study;
    const double s = layout.pixel_spacing;
    const double half_grid = 0.5 * (layout.grid - 1) * s;

    auto make_view = [&](ViewGeometry geom, std::vector<Vec3> endo_pts,
                         std::vector<Vec3> epi_pts) {
        TrackedView view;
        view.geometry = geom;
        view.frames = ph.frames();
        auto to_pixel = [&](const Vec3& p) {
            const Vec3 rel = p - geom.origin;
            return Vec2(rel.dot(geom.row_dir) / geom.row_spacing,
                        rel.dot(geom.col_dir) / geom.col_spacing);
        };
        for (const auto& p : endo_pts) view.endo.push_back(to_pixel(p));
        for (const auto& p : epi_pts) view.epi.push_back(to_pixel(p));

        std::vector<Vec3> all = endo_pts;
        all.insert(all.end(), epi_pts.begin(), epi_pts.end());
        view.displacements.assign(ph.frames(), std::vector<Vec2>(all.size(), Vec2::Zero()));
        for (int t = 1; t < ph.frames(); ++t)
            for (std::size_t i = 0; i < all.size(); ++i) {
                const Vec3 delta = motion_map(ph, all[i], t) - all[i];
                view.displacements[t][i] = Vec2(delta.dot(geom.row_dir) / geom.row_spacing,
                                                delta.dot(geom.col_dir) / geom.col_spacing);
            }
        study.views.push_back(std::move(view));
    };

    // SAX stack, base (slice_index 0, largest z) to apex.
    for (int k = 0; k < layout.sax_slices; ++k) {
        const double z = ph.height * (layout.sax_slices - k - 0.5) / layout.sax_slices;
        ViewGeometry geom;
        geom.kind = ViewKind::Sax;
        geom.slice_index = k;
        geom.origin = Vec3(-half_grid, -half_grid, z);
        geom.row_dir = Vec3(0.0, 1.0, 0.0);
        geom.col_dir = Vec3(1.0, 0.0, 0.0);
        geom.row_spacing = geom.col_spacing = s;
        geom.rows = geom.cols = layout.grid;
        std::vector<Vec3> endo, epi;
        for (int i = 0; i < layout.contour_points; ++i) {
            const double phi = 2.0 * M_PI * i / layout.contour_points;
            endo.emplace_back(ph.ri * std::cos(phi), ph.ri * std::sin(phi), z);
            epi.emplace_back(ph.ro * std::cos(phi), ph.ro * std::sin(phi), z);
        }
        make_view(geom, std::move(endo), std::move(epi));
    }

    // LAX planes: wall limbs, left limb base->apex then right limb apex->base.
    auto lax_contour = [&](const Vec3& inplane, double radius) {
        std::vector<Vec3> pts;
        const int m = layout.lax_points_per_limb;
        for (int j = 0; j < m; ++j)
            pts.push_back(-radius * inplane + Vec3(0, 0, ph.height * (m - 1 - j) / (m - 1.0)));
        for (int j = 0; j < m; ++j)
            pts.push_back(radius * inplane + Vec3(0, 0, ph.height * j / (m - 1.0)));
        return pts;
    };
    const double z0 = ph.height / 2.0 - half_grid;
    if (layout.four_chamber) {
        ViewGeometry geom;
        geom.kind = ViewKind::FourChamber;
        geom.origin = Vec3(-half_grid, 0.0, z0);
        geom.row_dir = Vec3(0.0, 0.0, 1.0);
        geom.col_dir = Vec3(1.0, 0.0, 0.0);
        geom.row_spacing = geom.col_spacing = s;
        geom.rows = geom.cols = layout.grid;
        make_view(geom, lax_contour(Vec3::UnitX(), ph.ri), lax_contour(Vec3::UnitX(), ph.ro));
    }
    if (layout.two_chamber) {
        ViewGeometry geom;
        geom.kind = ViewKind::TwoChamber;
        geom.origin = Vec3(0.0, -half_grid, z0);
        geom.row_dir = Vec3(0.0, 0.0, 1.0);
        geom.col_dir = Vec3(0.0, 1.0, 0.0);
        geom.row_spacing = geom.col_spacing = s;
        geom.rows = geom.cols = layout.grid;
        make_view(geom, lax_contour(Vec3::UnitY(), ph.ri), lax_contour(Vec3::UnitY(), ph.ro));
    }
    for (auto& v : study.views) v.validate();
    return study;
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_phantom_bundle(const AnnulusPhantom& ph, const ViewLayout& layout,
                          const std::string& preset_name,
                          const std::filesystem::path& bundle_dir) {
    const Study study = sample_views(ph, layout);
    save_study(study, bundle_dir);

    const auto rows = oracle_table(ph);
    std::ofstream csv(bundle_dir / "oracle.csv");
    if (!csv) throw IoError("cannot write oracle.csv");
    csv << "frame,Err,Ecc,Ell,mid_Err,mid_Ecc,mid_Ell\n";
    for (const auto& row : rows)
        csv << row.frame << "," << fmt(row.wall_mean[0]) << "," << fmt(row.wall_mean[1]) << ","
            << fmt(row.wall_mean[2]) << "," << fmt(row.mid_wall[0]) << "," << fmt(row.mid_wall[1])
            << "," << fmt(row.mid_wall[2]) << "\n";

    nlohmann::ordered_json meta;
    meta["preset"] = preset_name;
    meta["ri"] = ph.ri;
    meta["ro"] = ph.ro;
    meta["height"] = ph.height;
    meta["frames"] = ph.frames();
    meta["lambda_z"] = ph.lambda_z;
    meta["ri_prime"] = ph.ri_prime;
    meta["tau"] = ph.tau;
    meta["rot"] = ph.rot;
    std::vector<std::array<double, 3>> shifts;
    for (const auto& v : ph.shift) shifts.push_back({v.x(), v.y(), v.z()});
    meta["shift"] = shifts;
    meta["layout"] = {{"sax_slices", layout.sax_slices},
                      {"contour_points", layout.contour_points},
                      {"lax_points_per_limb", layout.lax_points_per_limb},
                      {"pixel_spacing", layout.pixel_spacing},
                      {"grid", layout.grid}};
    std::ofstream pj(bundle_dir / "preset.json");
    if (!pj) throw IoError("cannot write preset.json");
    pj << meta.dump(1) << "\n";
}

Image2D textured_annulus_image(int width, int height, const Vec2& center_rc, double ri, double ro,
                               const Vec2& shift_rc, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> uangle(0.0, 2.0 * M_PI);
    std::uniform_real_distribution<double> uradius(ri, ro);
    std::uniform_real_distribution<double> uamp(40.0, 120.0);
    std::uniform_real_distribution<double> usigma(2.5, 5.0);
    struct Blob {
        Vec2 c;
        double amp, sigma2;
    };
    std::vector<Blob> blobs;
    const int count = std::max(24, static_cast<int>(ro));
    for (int k = 0; k < count; ++k) {
        const double a = uangle(rng);
        const double r = uradius(rng);
        const double sigma = usigma(rng);
        blobs.push_back({center_rc + r * Vec2(std::sin(a), std::cos(a)), uamp(rng),
                         sigma * sigma});
    }
    Image2D img(width, height);
    for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c) {
            const Vec2 p = Vec2(r, c) - shift_rc;
            const double rad = (p - center_rc).norm();
            // Smooth annulus band keeps the texture supported on the wall.
            const double band =
                1.0 / (1.0 + std::exp((ri - rad) / 1.5)) / (1.0 + std::exp((rad - ro) / 1.5));
            double v = 10.0 + 0.05 * p[0] + 0.03 * p[1];
            for (const auto& blob : blobs)
                v += blob.amp * band * std::exp(-(p - blob.c).squaredNorm() / (2.0 * blob.sigma2));
            img.at(r, c) = v;
        }
    return img;
}

}  // namespace strainforge
