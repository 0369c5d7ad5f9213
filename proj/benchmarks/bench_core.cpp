// Microbenchmarks for the hot paths: FFD evaluation, the registration cost,
// scattered interpolation, meshing, and per-frame strain.
#include <random>

#include <benchmark/benchmark.h>

#include "strainforge/delaunay.hpp"
#include "strainforge/ffd.hpp"
#include "strainforge/fusion.hpp"
#include "strainforge/mesh.hpp"
#include "strainforge/phantom.hpp"
#include "strainforge/pipeline.hpp"
#include "strainforge/strain.hpp"

using namespace strainforge;

namespace {

std::vector<Vec3> random_points(int n, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    std::vector<Vec3> pts;
    pts.reserve(n);
    for (int i = 0; i < n; ++i) pts.emplace_back(u(rng), u(rng), u(rng));
    return pts;
}

std::vector<std::vector<Vec3>> rings(double radius, int levels, int n) {
    std::vector<std::vector<Vec3>> out;
    for (int k = 0; k < levels; ++k) {
        const double z = 80.0 * (levels - 1 - k) / (levels - 1.0);
        std::vector<Vec3> ring;
        for (int a = 0; a < n; ++a) {
            const double phi = 2.0 * M_PI * a / n;
            ring.emplace_back(radius * std::cos(phi), radius * std::sin(phi), z);
        }
        out.push_back(std::move(ring));
    }
    return out;
}

void bm_ffd_displacement(benchmark::State& state) {
    BSplineGrid grid = BSplineGrid::for_image(128, 128, 8.0);
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& d : grid.displacement) d = Vec2(u(rng), u(rng));
    double x = 0.0;
    for (auto _ : state) {
        x += 0.37;
        if (x > 120.0) x = 0.0;
        benchmark::DoNotOptimize(ffd_displacement(grid, x, 127.0 - x));
    }
}
BENCHMARK(bm_ffd_displacement);

void bm_registration_cost(benchmark::State& state) {
    const Image2D fixed = textured_annulus_image(64, 64, {32, 32}, 10, 24);
    const Image2D moving = textured_annulus_image(64, 64, {32, 32}, 10, 24, {1.5, -0.5});
    BSplineGrid grid = BSplineGrid::for_image(64, 64, 8.0);
    std::vector<Vec2> grad;
    for (auto _ : state)
        benchmark::DoNotOptimize(cost_and_gradient(fixed, moving, grid, 0.01, 1, &grad));
}
BENCHMARK(bm_registration_cost);

void bm_delaunay_build(benchmark::State& state) {
    const auto pts = random_points(static_cast<int>(state.range(0)), 7);
    for (auto _ : state) {
        Delaunay3 tri(pts);
        benchmark::DoNotOptimize(tri.alive_cell_count());
    }
}
BENCHMARK(bm_delaunay_build)->Arg(200)->Arg(1000);

void bm_interpolant_query(benchmark::State& state) {
    const auto pts = random_points(1200, 9);
    std::vector<double> values(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) values[i] = pts[i].x() * 0.2 - pts[i].z();
    const ScatterBase base(pts);
    std::mt19937 rng(10);
    std::uniform_real_distribution<double> u(-40.0, 40.0);
    int hint = -1;
    for (auto _ : state) {
        const Vec3 q(u(rng), u(rng), u(rng));
        const auto plan = base.plan(q, hint);
        hint = plan.hint;
        benchmark::DoNotOptimize(base.apply(plan, values));
    }
}
BENCHMARK(bm_interpolant_query);

void bm_tetrahedralize(benchmark::State& state) {
    const auto endo = rings(25.0, 9, 64);
    const auto epi = rings(35.0, 9, 64);
    for (auto _ : state) {
        const LvMesh mesh = tetrahedralize(endo, epi, 3);
        benchmark::DoNotOptimize(mesh.tets.size());
    }
}
BENCHMARK(bm_tetrahedralize);

void bm_strain_frame(benchmark::State& state) {
    const auto endo = rings(25.0, 9, 64);
    const auto epi = rings(35.0, 9, 64);
    const LvMesh mesh = tetrahedralize(endo, epi, 3);
    FusedMotion motion;
    motion.frames = 2;
    motion.extrapolated.assign(mesh.nodes.size(), 0);
    motion.displacement.assign(2, std::vector<Vec3>(mesh.nodes.size(), Vec3::Zero()));
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
        motion.displacement[1][i] = Vec3(0, 0, -0.15 * mesh.nodes[i].z());
    for (auto _ : state) {
        const SegmentReport rep = strain_curves(mesh, motion);
        benchmark::DoNotOptimize(rep.global_peaks);
    }
}
BENCHMARK(bm_strain_frame);

}  // namespace

BENCHMARK_MAIN();
