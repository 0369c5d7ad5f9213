#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "strainforge/mesh.hpp"
#include "strainforge/strain.hpp"

using namespace strainforge;

namespace {

std::array<Vec3, 4> unit_tet() {
    return {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
}

std::array<Vec3, 4> transform_tet(const std::array<Vec3, 4>& tet, const Mat3& m,
                          const Vec3& shift = Vec3::Zero()) {
    std::array<Vec3, 4> out;
    for (int i = 0; i < 4; ++i) out[i] = m * tet[i] + shift;
    return out;
}

Mat3 random_rotation(std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Vec3 axis = Vec3(u(rng), u(rng), u(rng)).normalized();
    std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
    return Eigen::AngleAxisd(ang(rng), axis).toRotationMatrix();
}

LvMesh annulus_mesh(int levels = 5, int n = 32, int layers = 2) {
    std::vector<std::vector<Vec3>> endo, epi;
    for (int k = 0; k < levels; ++k) {
        const double z = 40.0 - 80.0 * k / (levels - 1.0);
        std::vector<Vec3> re, rp;
        for (int a = 0; a < n; ++a) {
            const double phi = 2.0 * M_PI * a / n;
            re.emplace_back(25.0 * std::cos(phi), 25.0 * std::sin(phi), z);
            rp.emplace_back(35.0 * std::cos(phi), 35.0 * std::sin(phi), z);
        }
        endo.push_back(re);
        epi.push_back(rp);
    }
    return tetrahedralize(endo, epi, layers);
}

}  // namespace

TEST_CASE("deformation gradient basics") {
    const auto ref = unit_tet();
    CHECK((deformation_gradient(ref, ref) - Mat3::Identity()).norm() < 1e-14);

    Mat3 scale = Mat3::Identity();
    scale(0, 0) = 1.1;
    const Mat3 f = deformation_gradient(ref, transform_tet(ref, scale));
    CHECK((f - scale).norm() < 1e-12);

    const Mat3 rz = Eigen::AngleAxisd(30.0 * M_PI / 180.0, Vec3::UnitZ()).toRotationMatrix();
    const Mat3 fr = deformation_gradient(ref, transform_tet(ref, rz, Vec3(4, -1, 2)));
    CHECK((fr - rz).norm() < 1e-12);

    auto degenerate = ref;
    degenerate[3] = ref[0];  // zero volume
    CHECK_THROWS_AS((void)deformation_gradient(degenerate, ref), NumericError);
}

TEST_CASE("green_lagrange identities") {
    CHECK(green_lagrange(Mat3::Identity()).norm() == 0.0);

    Mat3 f = Mat3::Identity();
    f(0, 0) = 1.2;
    const Mat3 e = green_lagrange(f);
    CHECK(std::abs(e(0, 0) - 0.22) < 1e-15);
    CHECK(std::abs(e(1, 1)) == 0.0);
    CHECK(std::abs(e(0, 1)) == 0.0);

    std::mt19937 rng(5);
    for (int k = 0; k < 1000; ++k)
        CHECK(green_lagrange(random_rotation(rng)).norm() < 1e-12);
}

TEST_CASE("strain objectivity under rigid post-motion") {
    std::mt19937 rng(6);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 50; ++k) {
        std::array<Vec3, 4> ref;
        for (auto& p : ref) p = Vec3(u(rng), u(rng), u(rng)) * 10.0;
        if (std::abs(tet_volume(ref[0], ref[1], ref[2], ref[3])) < 1e-3) continue;
        std::array<Vec3, 4> def;
        for (int i = 0; i < 4; ++i) def[i] = ref[i] + 0.3 * Vec3(u(rng), u(rng), u(rng));

        const Mat3 e0 = green_lagrange(deformation_gradient(ref, def));
        const Mat3 q = random_rotation(rng);
        const Vec3 t(u(rng) * 20.0, u(rng) * 20.0, u(rng) * 20.0);
        const Mat3 e1 = green_lagrange(deformation_gradient(ref, transform_tet(def, q, t)));
        CHECK((e0 - e1).norm() < 1e-9);
    }
}

TEST_CASE("local directions: examples, orthonormality, handedness") {
    const LocalDirections d1 = local_directions(Vec3(30, 0, 12));
    CHECK((d1.radial - Vec3(1, 0, 0)).norm() < 1e-15);
    CHECK((d1.circumferential - Vec3(0, 1, 0)).norm() < 1e-15);
    CHECK((d1.longitudinal - Vec3(0, 0, 1)).norm() < 1e-15);

    const LocalDirections d2 = local_directions(Vec3(0, 30, -5));
    CHECK((d2.radial - Vec3(0, 1, 0)).norm() < 1e-15);
    CHECK((d2.circumferential - Vec3(-1, 0, 0)).norm() < 1e-15);

    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-40.0, 40.0);
    for (int k = 0; k < 200; ++k) {
        const Vec3 c(u(rng), u(rng), u(rng));
        if (c.head<2>().norm() < 1e-3) continue;
        const LocalDirections d = local_directions(c);
        CHECK(std::abs(d.radial.norm() - 1.0) < 1e-9);
        CHECK(std::abs(d.radial.dot(d.circumferential)) < 1e-9);
        CHECK((d.radial.cross(d.circumferential) - d.longitudinal).norm() < 1e-9);
    }

    CHECK_THROWS_AS((void)local_directions(Vec3(0, 0, 10)), GeometryError);
}

TEST_CASE("project_strain: diagonal case and rotation invariance") {
    LocalDirections axes{Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
    CHECK(project_strain(Mat3::Zero(), axes).norm() == 0.0);

    Mat3 e = Mat3::Zero();
    e.diagonal() = Vec3(0.2, -0.1, -0.05);
    CHECK((project_strain(e, axes) - Vec3(0.2, -0.1, -0.05)).norm() < 1e-15);

    std::mt19937 rng(8);
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    for (int k = 0; k < 100; ++k) {
        Mat3 sym;
        sym << u(rng), u(rng), u(rng), 0, u(rng), u(rng), 0, 0, u(rng);
        sym = ((sym + sym.transpose()) / 2.0).eval();
        const Mat3 q = random_rotation(rng);
        LocalDirections rotated{q.transpose() * axes.radial, q.transpose() * axes.circumferential,
                                q.transpose() * axes.longitudinal};
        const Vec3 a = project_strain(sym, axes);
        const Vec3 b = project_strain(q.transpose() * sym * q, rotated);
        CHECK((a - b).norm() < 1e-12);
    }
}

TEST_CASE("AHA-16 assignment follows the stated conventions") {
    const double z_base = 30.0, z_apex = -30.0;
    // theta = 30 degrees, basal third.
    const Vec3 c1(30.0 * std::cos(M_PI / 6.0), 30.0 * std::sin(M_PI / 6.0), 25.0);
    CHECK(aha16_assign(c1, z_base, z_apex, 0.0) == 1);
    // Same angle, apical third -> 90-degree sectors, segment 13.
    const Vec3 c2(30.0 * std::cos(M_PI / 6.0), 30.0 * std::sin(M_PI / 6.0), -25.0);
    CHECK(aha16_assign(c2, z_base, z_apex, 0.0) == 13);
    // Mid level, 100 degrees -> second 60-degree sector of the mid ring.
    const Vec3 c3(30.0 * std::cos(100.0 * M_PI / 180.0), 30.0 * std::sin(100.0 * M_PI / 180.0),
                  0.0);
    CHECK(aha16_assign(c3, z_base, z_apex, 0.0) == 8);
    // Sector boundary at exactly 60 degrees belongs to the lower id.
    const Vec3 c4(30.0 * std::cos(M_PI / 3.0), 30.0 * std::sin(M_PI / 3.0), 25.0);
    CHECK(aha16_assign(c4, z_base, z_apex, 0.0) == 1);
    // A hair below the boundary stays in segment 1.
    const double eps = 1e-9;
    const Vec3 c5(30.0 * std::cos(M_PI / 3.0 - eps), 30.0 * std::sin(M_PI / 3.0 - eps), 25.0);
    CHECK(aha16_assign(c5, z_base, z_apex, 0.0) == 1);

    // theta0 rotates the sector wheel.
    CHECK(aha16_assign(c1, z_base, z_apex, M_PI / 6.0) == 1);
    CHECK(aha16_assign(c1, z_base, z_apex, M_PI / 4.0) == 6);

    CHECK_THROWS_AS((void)aha16_assign(Vec3(30, 0, 45.0), z_base, z_apex, 0.0), ValidationError);
}

TEST_CASE("segment partition covers every off-axis element exactly once") {
    const LvMesh mesh = annulus_mesh();
    FusedMotion still;
    still.frames = 1;
    still.displacement.assign(1, std::vector<Vec3>(mesh.nodes.size(), Vec3::Zero()));
    still.extrapolated.assign(mesh.nodes.size(), 0);
    const SegmentReport rep = strain_curves(mesh, still);
    std::size_t assigned = 0;
    for (int s = 0; s < 16; ++s) assigned += rep.element_counts[s];
    CHECK(assigned + rep.excluded_elements == mesh.tets.size());
    CHECK(rep.excluded_elements == 0);  // annulus elements are all off-axis
    // The per-element assignment is consistent with the per-segment counts.
    REQUIRE(rep.element_segments.size() == mesh.tets.size());
    std::array<int, 16> recount{};
    for (int seg : rep.element_segments) {
        CHECK(seg >= 1);
        CHECK(seg <= 16);
        ++recount[seg - 1];
    }
    CHECK(recount == rep.element_counts);
    for (int t = 0; t < rep.frames; ++t)
        for (int s = 0; s < 16; ++s) CHECK(rep.curves[t][s].norm() < 1e-12);
    CHECK(rep.global_peaks.norm() < 1e-12);
}

TEST_CASE("rigid rotation motion produces vanishing strain curves") {
    const LvMesh mesh = annulus_mesh();
    const int frames = 4;
    FusedMotion motion;
    motion.frames = frames;
    motion.extrapolated.assign(mesh.nodes.size(), 0);
    for (int t = 0; t < frames; ++t) {
        const Mat3 q =
            Eigen::AngleAxisd(0.2 * t, Vec3::UnitZ()).toRotationMatrix();
        std::vector<Vec3> disp(mesh.nodes.size());
        for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
            disp[i] = q * mesh.nodes[i] + 5.0 * t * Vec3(1, 0, 0) - mesh.nodes[i];
        motion.displacement.push_back(std::move(disp));
    }
    const SegmentReport rep = strain_curves(mesh, motion);
    for (int t = 0; t < frames; ++t)
        for (int s = 0; s < 16; ++s) CHECK(rep.curves[t][s].norm() < 1e-9);
}

TEST_CASE("uniform stretch is recovered exactly by every element") {
    const LvMesh mesh = annulus_mesh();
    FusedMotion motion;
    motion.frames = 2;
    motion.extrapolated.assign(mesh.nodes.size(), 0);
    motion.displacement.assign(2, std::vector<Vec3>(mesh.nodes.size(), Vec3::Zero()));
    const double lambda = 0.85;
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
        motion.displacement[1][i] = Vec3(0, 0, (lambda - 1.0) * mesh.nodes[i].z());
    const SegmentReport rep = strain_curves(mesh, motion);
    const double ell = (lambda * lambda - 1.0) / 2.0;
    for (int s = 0; s < 16; ++s) {
        CHECK(rep.curves[1][s][2] == doctest::Approx(ell).epsilon(1e-12));
        CHECK(rep.peaks[s][2] == doctest::Approx(ell).epsilon(1e-12));
        CHECK(rep.peak_frames[s][2] == 1);
    }
    CHECK(rep.global_peaks[2] == doctest::Approx(ell).epsilon(1e-12));
}

TEST_CASE("volume consistency: det F times reference volume sums to deformed volume") {
    const LvMesh mesh = annulus_mesh(4, 24, 2);
    // A smooth non-rigid motion.
    std::vector<Vec3> disp(mesh.nodes.size());
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
        const Vec3& p = mesh.nodes[i];
        disp[i] = Vec3(0.02 * p.x() + 0.003 * p.z(), -0.01 * p.y(), 0.015 * p.z());
    }
    double det_sum = 0.0;
    LvMesh deformed = mesh;
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) deformed.nodes[i] += disp[i];
    for (std::size_t e = 0; e < mesh.tets.size(); ++e) {
        const auto& t = mesh.tets[e];
        std::array<Vec3, 4> ref = {mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]],
                                   mesh.nodes[t[3]]};
        std::array<Vec3, 4> def = {deformed.nodes[t[0]], deformed.nodes[t[1]],
                                   deformed.nodes[t[2]], deformed.nodes[t[3]]};
        const double v_ref = tet_volume(ref[0], ref[1], ref[2], ref[3]);
        det_sum += deformation_gradient(ref, def).determinant() * v_ref;
    }
    CHECK(std::abs(det_sum - deformed.total_volume()) < 1e-9 * deformed.total_volume());
}
