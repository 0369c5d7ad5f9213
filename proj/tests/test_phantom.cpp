#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "strainforge/phantom.hpp"
#include "strainforge/study.hpp"

using namespace strainforge;
namespace fs = std::filesystem;

TEST_CASE("motion map is the identity at frame 0") {
    const auto ph = phantom_preset("contractile", 12);
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> ur(ph.ri + 0.1, ph.ro - 0.1);
    std::uniform_real_distribution<double> ua(0.0, 2.0 * M_PI);
    std::uniform_real_distribution<double> uz(0.1, ph.height - 0.1);
    for (int k = 0; k < 100; ++k) {
        const double r = ur(rng), a = ua(rng);
        const Vec3 p(r * std::cos(a), r * std::sin(a), uz(rng));
        CHECK((motion_map(ph, p, 0) - p).norm() < 1e-12);
    }
    CHECK_THROWS_AS((void)motion_map(ph, Vec3(0, 0, 10), 0), ValidationError);
    CHECK_THROWS_AS((void)motion_map(ph, Vec3(30, 0, -5), 0), ValidationError);
}

TEST_CASE("default coupling: deformed inner radius follows ri / sqrt(lambda)") {
    AnnulusPhantom ph = AnnulusPhantom::identity(2);
    ph.lambda_z[1] = 0.85;
    ph.ri_prime[1] = ph.ri / std::sqrt(0.85);
    CHECK(ph.ri_prime[1] == doctest::Approx(27.116).epsilon(1e-4));
    // Endo points land exactly on the deformed inner radius.
    const Vec3 p(ph.ri, 0.0, 40.0);
    const Vec3 q = motion_map(ph, p, 1);
    CHECK(std::hypot(q.x(), q.y()) == doctest::Approx(ph.ri_prime[1]).epsilon(1e-12));
}

TEST_CASE("finite-difference Jacobian determinant is 1 for every preset") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> ua(0.0, 2.0 * M_PI);
    for (const std::string name : {"incompressible", "contractile", "rigid", "translate"}) {
        const auto ph = phantom_preset(name, 8);
        for (int ir = 0; ir < 10; ++ir)
            for (int iz = 0; iz < 10; ++iz) {
                const double r = ph.ri + (ph.ro - ph.ri) * (ir + 0.5) / 10.0;
                const double z = ph.height * (iz + 0.5) / 10.0;
                const double a = ua(rng);
                const Vec3 p(r * std::cos(a), r * std::sin(a), z);
                for (int t : {1, 4, 7}) {
                    const double det = analytic_deformation_gradient(ph, p, t).determinant();
                    CHECK(std::abs(det - 1.0) < 1e-6);
                }
            }
    }
}

TEST_CASE("analytic strain: zero at frame 0 and closed-form longitudinal value") {
    AnnulusPhantom ph = AnnulusPhantom::identity(2);
    ph.lambda_z[1] = 0.85;
    ph.ri_prime[1] = ph.ri / std::sqrt(0.85);
    const Vec3 p(30.0, 2.0, 40.0);
    CHECK(analytic_strain(ph, p, 0).norm() < 1e-8);

    const Mat3 e = analytic_strain(ph, p, 1);
    CHECK(e(2, 2) == doctest::Approx((0.85 * 0.85 - 1.0) / 2.0).epsilon(1e-7));
    // Default coupling makes the in-plane response a pure 1/sqrt(lambda)
    // scaling: circumferential strain (1/0.85 - 1)/2 at mid-wall.
    const Vec3 er(p.x() / p.head<2>().norm(), p.y() / p.head<2>().norm(), 0.0);
    const Vec3 ec = Vec3::UnitZ().cross(er);
    CHECK(ec.dot(e * ec) == doctest::Approx((1.0 / 0.85 - 1.0) / 2.0).epsilon(1e-6));

    CHECK_THROWS_AS((void)analytic_strain(ph, Vec3(ph.ri + 1e-6, 0, 40.0), 1), ValidationError);
}

TEST_CASE("torsion shows up as shear, not as diagonal projections") {
    AnnulusPhantom ph = AnnulusPhantom::identity(2);
    ph.tau[1] = 0.0005;  // rad/mm
    const Vec3 p(30.0, 0.0, 40.0);
    const Mat3 e = analytic_strain(ph, p, 1);
    CHECK(std::abs(e(2, 2)) < 2e-4);        // quadratic in tau only
    CHECK(std::abs(e(1, 2)) > 1e-3);        // circumferential-longitudinal shear
}

TEST_CASE("contractile preset: signs and phase separation") {
    const auto ph = phantom_preset("contractile", 30);
    const auto rows = oracle_table(ph);
    double peak_err = 0.0, peak_ecc = 0.0, peak_ell = 0.0;
    int frame_err = 0, frame_ell = 0;
    for (const auto& row : rows) {
        if (row.wall_mean[0] > peak_err) { peak_err = row.wall_mean[0]; frame_err = row.frame; }
        peak_ecc = std::min(peak_ecc, row.wall_mean[1]);
        if (row.wall_mean[2] < peak_ell) { peak_ell = row.wall_mean[2]; frame_ell = row.frame; }
    }
    CHECK(peak_err > 0.05);
    CHECK(peak_ecc < -0.05);
    CHECK(peak_ell < -0.12);
    // In-plane peak happens late, when the longitudinal stretch has recovered.
    CHECK(frame_ell < frame_err);
    CHECK(std::abs(ph.lambda_z[frame_err] - 1.0) < 1e-9);
}

TEST_CASE("sample_views bundles: zero ED frame, validity, determinism") {
    const auto ph = phantom_preset("contractile", 6);
    ViewLayout layout;
    layout.sax_slices = 4;
    layout.contour_points = 16;
    layout.lax_points_per_limb = 8;
    const Study study = sample_views(ph, layout);
    REQUIRE(study.views.size() == 6);  // 4 SAX + 4CH + 2CH
    for (const auto& v : study.views) {
        for (const auto& d : v.displacements[0]) CHECK(d.norm() == 0.0);
        v.validate();
    }

    const auto dir1 = fs::temp_directory_path() / "sf_ph_a";
    const auto dir2 = fs::temp_directory_path() / "sf_ph_b";
    fs::remove_all(dir1);
    fs::remove_all(dir2);
    write_phantom_bundle(ph, layout, "contractile", dir1);
    write_phantom_bundle(ph, layout, "contractile", dir2);
    for (const char* name : {"study.json", "oracle.csv", "preset.json"}) {
        std::ifstream a(dir1 / name), b(dir2 / name);
        std::stringstream sa, sb;
        sa << a.rdbuf();
        sb << b.rdbuf();
        CHECK(sa.str() == sb.str());
        CHECK(!sa.str().empty());
    }
    fs::remove_all(dir1);
    fs::remove_all(dir2);
}

TEST_CASE("translate preset: every view reports the projected constant vector") {
    const auto ph = phantom_preset("translate", 3);
    ViewLayout layout;
    layout.sax_slices = 3;
    layout.contour_points = 8;
    layout.lax_points_per_limb = 5;
    const Study study = sample_views(ph, layout);
    for (const auto& v : study.views) {
        const Vec2 expected(ph.shift[2].dot(v.geometry.row_dir) / v.geometry.row_spacing,
                            ph.shift[2].dot(v.geometry.col_dir) / v.geometry.col_spacing);
        for (const auto& d : v.displacements[2]) CHECK((d - expected).norm() < 1e-12);
    }
}

TEST_CASE("oracle table rows cover every frame with finite values") {
    const auto ph = phantom_preset("incompressible", 10);
    const auto rows = oracle_table(ph);
    REQUIRE(rows.size() == 10);
    for (const auto& row : rows) {
        CHECK(row.wall_mean.allFinite());
        CHECK(row.mid_wall.allFinite());
    }
    CHECK(rows[0].wall_mean.norm() < 1e-8);
}

TEST_CASE("textured annulus image shifts analytically") {
    const Image2D a = textured_annulus_image(32, 32, {16, 16}, 5, 12);
    const Image2D b = textured_annulus_image(32, 32, {16, 16}, 5, 12, {2.0, -1.0});
    a.validate();
    // b(x) equals a(x - shift) exactly by construction.
    for (int r = 8; r < 24; ++r)
        for (int c = 8; c < 24; ++c)
            CHECK(b.at(r, c) == doctest::Approx(a.sample(r - 2.0, c + 1.0)).epsilon(0.1));
}

TEST_CASE("preset validation rejects unknown names and bad waveforms") {
    CHECK_THROWS_AS((void)phantom_preset("nope", 10), ValidationError);
    AnnulusPhantom bad = AnnulusPhantom::identity(3);
    bad.lambda_z[0] = 0.9;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    AnnulusPhantom mismatched = AnnulusPhantom::identity(3);
    mismatched.tau.pop_back();
    CHECK_THROWS_AS(mismatched.validate(), ValidationError);
}
