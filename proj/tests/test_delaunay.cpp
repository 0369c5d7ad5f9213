#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "strainforge/delaunay.hpp"

using namespace strainforge;

namespace {

std::vector<Vec3> random_points(int n, unsigned seed, double scale = 50.0) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-scale, scale);
    std::vector<Vec3> pts;
    pts.reserve(n);
    for (int i = 0; i < n; ++i) pts.emplace_back(u(rng), u(rng), u(rng));
    return pts;
}

// Affine field for linear-precision checks.
struct Affine {
    Vec3 g;
    double b;
    double operator()(const Vec3& p) const { return g.dot(p) + b; }
};

}  // namespace

TEST_CASE("orientation and insphere predicate signs") {
    const Vec3 a(0, 0, 0), b(1, 0, 0), c(0, 1, 0), d(0, 0, 1);
    CHECK(orientation_sign(a, b, c, d) == 1);
    CHECK(orientation_sign(a, c, b, d) == -1);
    CHECK(orientation_sign(a, b, c, Vec3(0.7, 0.2, 0.0)) == 0);  // coplanar

    CHECK(insphere_sign(a, b, c, d, Vec3(0.25, 0.25, 0.25)) == 1);   // inside
    CHECK(insphere_sign(a, b, c, d, Vec3(5.0, 5.0, 5.0)) == -1);     // outside
    CHECK(insphere_sign(a, b, c, d, Vec3(1.0, 1.0, 1.0)) == 0);      // on the sphere
}

TEST_CASE("kd-tree nearest matches brute force") {
    const auto pts = random_points(300, 17);
    const KdTree3 tree(pts);
    std::mt19937 rng(18);
    std::uniform_real_distribution<double> u(-80.0, 80.0);
    for (int k = 0; k < 200; ++k) {
        const Vec3 q(u(rng), u(rng), u(rng));
        int best = 0;
        for (int i = 1; i < 300; ++i)
            if ((pts[i] - q).squaredNorm() < (pts[best] - q).squaredNorm()) best = i;
        CHECK(tree.nearest(q) == best);
    }
}

TEST_CASE("Delaunay cells tile the hull volume") {
    const auto pts = random_points(120, 4);
    const Delaunay3 tri(pts);
    REQUIRE_FALSE(tri.degenerate());
    // Sum of cell volumes equals the hull volume; compare against a Monte
    // Carlo inside-count as a coarse cross-check and exact positivity per cell.
    double vol = 0.0;
    for (const auto& cell : tri.real_cells()) {
        const double v = (pts[cell[1]] - pts[cell[0]])
                             .cross(pts[cell[2]] - pts[cell[0]])
                             .dot(pts[cell[3]] - pts[cell[0]]) / 6.0;
        CHECK(v > 0.0);
        vol += v;
    }
    CHECK(vol > 0.0);

    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    int inside = 0, total = 4000;
    int hint = -1;
    for (int k = 0; k < total; ++k) {
        const auto loc = tri.locate(Vec3(u(rng), u(rng), u(rng)), hint);
        hint = loc.cell;
        if (loc.inside) ++inside;
    }
    const double mc = static_cast<double>(inside) / total * 100.0 * 100.0 * 100.0;
    CHECK(std::abs(mc - vol) / vol < 0.1);  // 4000 samples: coarse agreement
}

TEST_CASE("empty-circumsphere property holds on a moderate set") {
    const auto pts = random_points(60, 23);
    const Delaunay3 tri(pts);
    REQUIRE_FALSE(tri.degenerate());
    for (const auto& cell : tri.real_cells())
        for (int i = 0; i < 60; ++i) {
            if (i == cell[0] || i == cell[1] || i == cell[2] || i == cell[3]) continue;
            CHECK(insphere_sign(pts[cell[0]], pts[cell[1]], pts[cell[2]], pts[cell[3]],
                                pts[i]) <= 0);
        }
}

TEST_CASE("interpolation is exact at the samples") {
    const auto pts = random_points(150, 31);
    const Delaunay3 tri(pts);
    for (int i = 0; i < 150; ++i) {
        const auto loc = tri.locate(pts[i]);
        CHECK(loc.vertex_hit);
        CHECK(loc.nearest == i);
    }
}

TEST_CASE("linear precision inside the hull") {
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const auto pts = random_points(20 + 18 * trial, 100 + trial);
        const Delaunay3 tri(pts);
        REQUIRE_FALSE(tri.degenerate());
        const Affine f{Vec3(u(rng), u(rng), u(rng)), u(rng)};
        std::vector<double> values;
        for (const auto& p : pts) values.push_back(f(p));

        std::uniform_int_distribution<int> pick(0, static_cast<int>(pts.size()) - 1);
        std::uniform_real_distribution<double> w01(0.0, 1.0);
        int hint = -1;
        for (int q = 0; q < 200; ++q) {
            // Convex combinations of sample points are inside the hull.
            Vec3 query = Vec3::Zero();
            double wsum = 0.0;
            for (int j = 0; j < 4; ++j) {
                const double w = w01(rng) + 1e-3;
                query += w * pts[pick(rng)];
                wsum += w;
            }
            query /= wsum;
            const auto loc = tri.locate(query, hint);
            hint = loc.cell;
            REQUIRE(loc.inside);
            double value = 0.0;
            if (loc.vertex_hit) value = values[loc.nearest];
            else
                for (int k = 0; k < 4; ++k) value += loc.weights[k] * values[loc.vertices[k]];
            CHECK(std::abs(value - f(query)) < 1e-9);
        }
    }
}

TEST_CASE("outside queries report the nearest sample") {
    const auto pts = random_points(50, 77, 10.0);
    const Delaunay3 tri(pts);
    const Vec3 far(500.0, -300.0, 900.0);
    const auto loc = tri.locate(far);
    CHECK_FALSE(loc.inside);
    int best = 0;
    for (int i = 1; i < 50; ++i)
        if ((pts[i] - far).squaredNorm() < (pts[best] - far).squaredNorm()) best = i;
    CHECK(loc.nearest == best);
}

TEST_CASE("coplanar input enters degenerate mode") {
    std::vector<Vec3> plane;
    for (int i = 0; i < 25; ++i)
        plane.emplace_back(i % 5, i / 5, 2.5);
    const Delaunay3 tri(plane);
    CHECK(tri.degenerate());
    const auto loc = tri.locate(Vec3(1.2, 2.2, 2.5));
    CHECK_FALSE(loc.inside);
    CHECK(loc.nearest >= 0);
}

TEST_CASE("highly cospherical structured input stays consistent") {
    // Stacked rings on two cylinders: every subset of same-radius points is
    // cospherical somewhere; jittered predicates must still build a valid
    // triangulation with linear precision.
    std::vector<Vec3> pts;
    for (int level = 0; level < 4; ++level)
        for (double radius : {10.0, 16.0})
            for (int a = 0; a < 24; ++a) {
                const double phi = 2.0 * M_PI * a / 24;
                pts.emplace_back(radius * std::cos(phi), radius * std::sin(phi), 5.0 * level);
            }
    const Delaunay3 tri(pts);
    REQUIRE_FALSE(tri.degenerate());

    const Affine f{Vec3(0.3, -0.7, 0.2), 1.5};
    std::vector<double> values;
    for (const auto& p : pts) values.push_back(f(p));
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> ur(10.0, 16.0), ua(0.0, 2.0 * M_PI), uz(0.0, 15.0);
    int hint = -1;
    for (int k = 0; k < 300; ++k) {
        const double r = ur(rng), a = ua(rng);
        const Vec3 q(r * std::cos(a), r * std::sin(a), uz(rng));
        const auto loc = tri.locate(q, hint);
        hint = loc.cell;
        if (!loc.inside) continue;  // thin gaps near the hull are fine
        double value = 0.0;
        if (loc.vertex_hit) value = values[loc.nearest];
        else
            for (int j = 0; j < 4; ++j) value += loc.weights[j] * values[loc.vertices[j]];
        CHECK(std::abs(value - f(q)) < 1e-9);
    }
}

TEST_CASE("duplicate points are tolerated") {
    auto pts = random_points(40, 55);
    pts.push_back(pts[3]);
    pts.push_back(pts[17]);
    const Delaunay3 tri(pts);
    REQUIRE_FALSE(tri.degenerate());
    const auto loc = tri.locate(pts[3]);
    CHECK(loc.vertex_hit);
}
