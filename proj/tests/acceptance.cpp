// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Criterion 9 is dataset-gated and reports SKIP when no data directory is
// configured (STRAINFORGE_STACOM_DIR).
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include "strainforge/ffd.hpp"
#include "strainforge/fusion.hpp"
#include "strainforge/phantom.hpp"
#include "strainforge/pipeline.hpp"
#include "strainforge/strain.hpp"

using namespace strainforge;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;
int criterion_index = 0;

void report_line(const std::string& status, const std::string& what) {
    std::cout << "[" << status << "] criterion " << criterion_index << ": " << what << "\n";
    std::cout.flush();
}

void pass(const std::string& what) { report_line("PASS", what); }
void fail(const std::string& what) {
    report_line("FAIL", what);
    ++failures;
}
void check(bool ok, const std::string& what) { ok ? pass(what) : fail(what); }

fs::path work_dir() {
    const auto dir = fs::temp_directory_path() / "strainforge_acceptance";
    fs::create_directories(dir);
    return dir;
}

fs::path fresh_dir(const std::string& name) {
    const auto dir = work_dir() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct OraclePeaks {
    double err, ecc, ell;
};

OraclePeaks oracle_peaks(const fs::path& csv) {
    std::ifstream in(csv);
    std::string line;
    std::getline(in, line);  // header
    OraclePeaks peaks{0.0, 0.0, 0.0};
    while (std::getline(in, line)) {
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        int frame;
        double e_rr, e_cc, e_ll, m0, m1, m2;
        row >> frame >> e_rr >> e_cc >> e_ll >> m0 >> m1 >> m2;
        peaks.err = std::max(peaks.err, e_rr);
        peaks.ecc = std::min(peaks.ecc, e_cc);
        peaks.ell = std::min(peaks.ell, e_ll);
    }
    return peaks;
}

// Mean of per-segment component peaks over a segment id range.
Eigen::Vector3d band_mean(const nlohmann::ordered_json& report, int lo, int hi) {
    Eigen::Vector3d acc = Eigen::Vector3d::Zero();
    int n = 0;
    for (const auto& seg : report.at("segments")) {
        const int id = seg.at("segment").get<int>();
        if (id < lo || id > hi) continue;
        acc += Eigen::Vector3d(seg.at("peak_Err").get<double>(), seg.at("peak_Ecc").get<double>(),
                               seg.at("peak_Ell").get<double>());
        ++n;
    }
    return acc / std::max(n, 1);
}

Image2D smooth_random_image(int width, int height, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    Image2D img(width, height);
    for (auto& v : img.data()) v = u(rng);
    for (int pass_i = 0; pass_i < 3; ++pass_i) {
        Image2D out(width, height);
        for (int r = 0; r < height; ++r)
            for (int c = 0; c < width; ++c) {
                double acc = 0.0;
                int n = 0;
                for (int dr = -1; dr <= 1; ++dr)
                    for (int dc = -1; dc <= 1; ++dc) {
                        const int rr = r + dr, cc = c + dc;
                        if (rr < 0 || cc < 0 || rr >= height || cc >= width) continue;
                        acc += img.at(rr, cc);
                        ++n;
                    }
                out.at(r, c) = acc / n;
            }
        img = out;
    }
    return img;
}

void criterion_rigid_nullity() {
    criterion_index = 1;
    try {
        const auto t0 = Clock::now();
        const auto bundle = fresh_dir("rigid_bundle");
        write_phantom_bundle(phantom_preset("rigid", 10), ViewLayout{}, "rigid", bundle);
        PipelineConfig config;
        config.bundle = bundle;
        config.out = fresh_dir("rigid_out");
        const auto report = run_pipeline(config);

        double worst = 0.0;
        std::ifstream in(config.out / "strain_curves.csv");
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
            std::replace(line.begin(), line.end(), ',', ' ');
            std::istringstream row(line);
            int frame, seg;
            double e_rr, e_cc, e_ll;
            row >> frame >> seg >> e_rr >> e_cc >> e_ll;
            worst = std::max({worst, std::abs(e_rr), std::abs(e_cc), std::abs(e_ll)});
        }
        const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();
        std::ostringstream what;
        what << "rigid-motion nullity: max per-segment |E| = " << worst << " (< 1e-6), "
             << seconds << " s (< 60 s)";
        check(worst < 1e-6 && seconds < 60.0, what.str());
    } catch (const std::exception& e) {
        fail(std::string("rigid-motion nullity: ") + e.what());
    }
}

void criterion_strain_identities() {
    criterion_index = 2;
    try {
        Mat3 f = Mat3::Identity();
        f(0, 0) = 1.2;
        const double e11 = green_lagrange(f)(0, 0);
        bool ok = std::abs(e11 - 0.22) <= 1e-15;

        std::mt19937 rng(42);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
        double worst = 0.0;
        for (int k = 0; k < 1000; ++k) {
            const Vec3 axis = Vec3(u(rng), u(rng), u(rng)).normalized();
            const Mat3 q = Eigen::AngleAxisd(ang(rng), axis).toRotationMatrix();
            worst = std::max(worst, green_lagrange(q).norm());
        }
        ok = ok && worst < 1e-12;
        std::ostringstream what;
        what << "analytic strain identities: |E11 - 0.22| = " << std::abs(e11 - 0.22)
             << ", worst rotation |E| = " << worst;
        check(ok, what.str());
    } catch (const std::exception& e) {
        fail(std::string("analytic strain identities: ") + e.what());
    }
}

void criterion_phantom_oracle() {
    criterion_index = 3;
    try {
        const auto t0 = Clock::now();
        const auto bundle = fresh_dir("contractile_bundle");
        write_phantom_bundle(phantom_preset("contractile", 30), ViewLayout{}, "contractile",
                             bundle);
        PipelineConfig config;
        config.bundle = bundle;
        config.out = fresh_dir("contractile_out");
        const auto report = run_pipeline(config);
        const OraclePeaks oracle = oracle_peaks(bundle / "oracle.csv");
        const Eigen::Vector3d oracle_v(oracle.err, oracle.ecc, oracle.ell);

        bool ok = true;
        std::ostringstream what;
        what << "phantom oracle agreement:";
        const struct {
            int lo, hi;
            double rel;
            double abs_floor;
            const char* name;
        } bands[] = {{7, 12, 0.10, 0.01, "mid"}, {1, 6, 0.25, 0.0, "basal"},
                     {13, 16, 0.25, 0.0, "apical"}};
        for (const auto& band : bands) {
            const Eigen::Vector3d measured = band_mean(report, band.lo, band.hi);
            for (int c = 0; c < 3; ++c) {
                const double tol = std::max(band.rel * std::abs(oracle_v[c]), band.abs_floor);
                const double err = std::abs(measured[c] - oracle_v[c]);
                if (err > tol) ok = false;
            }
            what << " " << band.name << "=(" << measured[0] << "," << measured[1] << ","
                 << measured[2] << ")";
        }
        what << " vs oracle (" << oracle_v[0] << "," << oracle_v[1] << "," << oracle_v[2] << ")";
        const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();
        what << ", " << seconds << " s (< 120 s)";
        check(ok && seconds < 120.0, what.str());
    } catch (const std::exception& e) {
        fail(std::string("phantom oracle agreement: ") + e.what());
    }
}

void criterion_longitudinal_exactness() {
    criterion_index = 4;
    try {
        AnnulusPhantom ph = AnnulusPhantom::identity(3);
        ph.lambda_z = {1.0, 0.925, 0.85};
        for (int t = 0; t < 3; ++t) ph.ri_prime[t] = ph.ri / std::sqrt(ph.lambda_z[t]);
        ph.ri_prime[0] = ph.ri;
        const auto bundle = fresh_dir("lambda_bundle");
        write_phantom_bundle(ph, ViewLayout{}, "pure-lambda", bundle);

        PipelineConfig config;
        config.bundle = bundle;
        config.out = "";
        const Study study = load_study(bundle);
        const ReconstructResult rec = reconstruct_study(study, config);
        const FusedMotion motion = deform_mesh(rec.mesh, rec.cloud);
        const SegmentReport rep = strain_curves(rec.mesh, motion);

        const double expected = (0.85 * 0.85 - 1.0) / 2.0;
        double worst = 0.0;
        int interior = 0;
        for (std::size_t e = 0; e < rec.mesh.tets.size(); ++e) {
            bool all_interpolated = true;
            for (int v : rec.mesh.tets[e])
                if (motion.extrapolated[v]) all_interpolated = false;
            if (!all_interpolated) continue;
            ++interior;
            worst = std::max(worst, std::abs(rep.element_strain[2][e][2] - expected));
        }
        std::ostringstream what;
        what << "longitudinal exactness: " << interior << " interior elements, max |Ell - ("
             << expected << ")| = " << worst << " (< 1e-3)";
        check(interior > 100 && worst < 1e-3, what.str());
    } catch (const std::exception& e) {
        fail(std::string("longitudinal exactness: ") + e.what());
    }
}

void criterion_interpolant_properties() {
    criterion_index = 5;
    try {
        std::mt19937 rng(2026);
        std::uniform_real_distribution<double> u(-40.0, 40.0);
        std::uniform_real_distribution<double> coeff(-2.0, 2.0);
        std::uniform_int_distribution<int> count(20, 200);
        double worst_hull = 0.0, worst_sample = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const int n = count(rng);
            ScatteredSamples s;
            const Vec3 g(coeff(rng), coeff(rng), coeff(rng));
            const double b = coeff(rng);
            for (int i = 0; i < n; ++i) {
                const Vec3 p(u(rng), u(rng), u(rng));
                s.positions.push_back(p);
                s.values.push_back(g.dot(p) + b);
            }
            const Interpolant interp = build_interpolant(s);
            for (int i = 0; i < n; ++i)
                worst_sample = std::max(worst_sample, std::abs(interp.query(s.positions[i]).value -
                                                               s.values[i]));
            std::uniform_int_distribution<int> pick(0, n - 1);
            std::uniform_real_distribution<double> w01(0.05, 1.0);
            for (int q = 0; q < 30; ++q) {
                Vec3 query = Vec3::Zero();
                double wsum = 0.0;
                for (int k = 0; k < 4; ++k) {
                    const double w = w01(rng);
                    query += w * s.positions[pick(rng)];
                    wsum += w;
                }
                query /= wsum;
                const auto res = interp.query(query);
                if (res.extrapolated) continue;  // on-hull corner cases
                worst_hull = std::max(worst_hull,
                                      std::abs(res.value - (g.dot(query) + b)));
            }
        }
        std::ostringstream what;
        what << "interpolant linear precision: in-hull err " << worst_hull
             << ", sample err " << worst_sample << " (both < 1e-9)";
        check(worst_hull < 1e-9 && worst_sample < 1e-9, what.str());
    } catch (const std::exception& e) {
        fail(std::string("interpolant linear precision: ") + e.what());
    }
}

void criterion_registration() {
    criterion_index = 6;
    try {
        const Image2D fixed = textured_annulus_image(64, 64, {32, 32}, 10, 24);
        const Vec2 shift(2.5, -1.0);
        const Image2D moving = textured_annulus_image(64, 64, {32, 32}, 10, 24, shift);
        RegistrationParams params;
        params.max_iterations = 200;
        const BSplineGrid grid = register_pair(fixed, moving, params);
        double err_sum = 0.0;
        int n = 0;
        for (double r = 12.0; r <= 52.0; r += 4.0)
            for (double c = 12.0; c <= 52.0; c += 4.0) {
                const double rad = std::hypot(r - 32.0, c - 32.0);
                if (rad < 11.0 || rad > 23.0) continue;
                err_sum += (evaluate_ffd(grid, {r, c}) - (Vec2(r, c) + shift)).norm();
                ++n;
            }
        const double mean_err = err_sum / n;

        // Analytic vs central-difference gradient of the full cost. The cost
        // is piecewise smooth (bilinear sampling), so pick a control grid that
        // keeps every sampling position clear of pixel-grid kinks across the
        // probe step.
        const Image2D f32 = smooth_random_image(32, 32, 11);
        const Image2D m32 = smooth_random_image(32, 32, 12);
        BSplineGrid g32 = BSplineGrid::for_image(32, 32, 8.0);
        for (unsigned seed = 13;; ++seed) {
            if (seed > 13 + 256) throw NumericError("no kink-free control grid found");
            std::mt19937 rng(seed);
            std::uniform_real_distribution<double> u(-0.4, 0.4);
            for (auto& d : g32.displacement) d = Vec2(u(rng), u(rng));
            bool generic = true;
            for (int r = 0; r < 32 && generic; ++r)
                for (int c = 0; c < 32 && generic; ++c) {
                    const Vec2 du = ffd_displacement(g32, r, c);
                    for (const double y : {r + du[0], c + du[1]}) {
                        if (y < -2e-4 || y > 31.0 + 2e-4) continue;
                        if (std::abs(y - std::round(y)) < 2e-4) generic = false;
                    }
                }
            if (generic) break;
        }
        std::vector<Vec2> grad;
        cost_and_gradient(f32, m32, g32, 0.05, 1, &grad);
        const double h = 1e-4;
        double num2 = 0.0, den2 = 0.0;
        for (std::size_t k = 0; k < g32.displacement.size(); ++k)
            for (int comp = 0; comp < 2; ++comp) {
                BSplineGrid plus = g32, minus = g32;
                plus.displacement[k][comp] += h;
                minus.displacement[k][comp] -= h;
                const double fd = (cost_and_gradient(f32, m32, plus, 0.05, 1, nullptr) -
                                   cost_and_gradient(f32, m32, minus, 0.05, 1, nullptr)) /
                                  (2.0 * h);
                num2 += (fd - grad[k][comp]) * (fd - grad[k][comp]);
                den2 += fd * fd;
            }
        const double rel = std::sqrt(num2 / den2);
        std::ostringstream what;
        what << "registration recovery: mean landmark error " << mean_err
             << " px (< 0.3), gradient check rel " << rel << " (< 1e-4)";
        check(mean_err < 0.3 && rel < 1e-4, what.str());
    } catch (const std::exception& e) {
        fail(std::string("registration recovery: ") + e.what());
    }
}

void criterion_mesh_convergence() {
    criterion_index = 7;
    try {
        auto volume_error = [](int n) {
            std::vector<std::vector<Vec3>> endo, epi;
            for (int k = 0; k < 9; ++k) {
                const double z = 80.0 * (8 - k) / 8.0;
                std::vector<Vec3> re, rp;
                for (int a = 0; a < n; ++a) {
                    const double phi = 2.0 * M_PI * a / n;
                    re.emplace_back(25.0 * std::cos(phi), 25.0 * std::sin(phi), z);
                    rp.emplace_back(35.0 * std::cos(phi), 35.0 * std::sin(phi), z);
                }
                endo.push_back(re);
                epi.push_back(rp);
            }
            const LvMesh mesh = tetrahedralize(endo, epi, 3);
            const double analytic = M_PI * (35.0 * 35.0 - 25.0 * 25.0) * 80.0;
            return std::abs(mesh.total_volume() - analytic) / analytic;
        };
        const double e64 = volume_error(64);
        const double e128 = volume_error(128);
        std::ostringstream what;
        what << "mesh volume convergence: err(n=64) = " << e64 << " (< 0.02), err(n=128) = "
             << e128 << " (strictly smaller)";
        check(e64 < 0.02 && e128 < e64, what.str());
    } catch (const std::exception& e) {
        fail(std::string("mesh volume convergence: ") + e.what());
    }
}

void criterion_weighting() {
    criterion_index = 8;
    try {
        bool ok = true;
        {
            std::vector<double> wl;
            std::mt19937 rng(7);
            std::uniform_real_distribution<double> u(-30.0, 10.0);
            for (int i = 0; i < 100000; ++i) wl.push_back(u(rng));
            const FusionWeights w = compute_weights(wl, -10.0, 0.0);
            for (double v : w.w) ok = ok && v >= 0.0 && v <= 1.0;
            const FusionWeights anchors = compute_weights({0.0, -10.0}, -10.0, 0.0);
            ok = ok && anchors.w[0] == 0.0 && anchors.w[1] == 1.0;
        }
        std::mt19937 rng(8);
        std::uniform_real_distribution<double> u(-100.0, 100.0), w01(0.0, 1.0);
        double worst = 0.0;
        for (int k = 0; k < 1000000; ++k) {
            const double a = u(rng), b = u(rng), w = w01(rng);
            const double fused = (1.0 - w) * a + w * b;
            const double lo = std::min(a, b), hi = std::max(a, b);
            worst = std::max({worst, lo - fused, fused - hi});
        }
        ok = ok && worst <= 1e-12;
        std::ostringstream what;
        what << "weighting scheme: W in [0,1], anchors exact, convexity violation " << worst;
        check(ok, what.str());
    } catch (const std::exception& e) {
        fail(std::string("weighting scheme: ") + e.what());
    }
}

void criterion_stacom() {
    criterion_index = 9;
    const char* dir = std::getenv("STRAINFORGE_STACOM_DIR");
    if (dir == nullptr || std::string(dir).empty()) {
        report_line("SKIP", "dataset-gated STACOM check: STRAINFORGE_STACOM_DIR not set");
        return;
    }
    try {
        bool ok = true;
        int studies = 0;
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (!entry.is_directory() || !fs::exists(entry.path() / "study.json")) continue;
            PipelineConfig config;
            config.bundle = entry.path();
            config.out = fresh_dir("stacom_" + entry.path().filename().string());
            const auto report = run_pipeline(config);
            const auto& g = report.at("global_peaks");
            const double err = g.at("Err").get<double>();
            const double ecc = g.at("Ecc").get<double>();
            const double ell = g.at("Ell").get<double>();
            ok = ok && std::abs(err - 0.27) <= 2.0 * 0.13 && std::abs(ecc + 0.12) <= 2.0 * 0.04 &&
                 std::abs(ell + 0.05) <= 2.0 * 0.06;
            ++studies;
        }
        if (studies == 0) {
            report_line("SKIP", "dataset-gated STACOM check: no bundles found in " +
                                    std::string(dir));
            return;
        }
        std::ostringstream what;
        what << "dataset-gated STACOM check over " << studies << " studies (mean +/- 2 SD)";
        check(ok, what.str());
    } catch (const std::exception& e) {
        fail(std::string("dataset-gated STACOM check: ") + e.what());
    }
}

void criterion_determinism() {
    criterion_index = 10;
    try {
        const auto bundle = fresh_dir("det_bundle");
        write_phantom_bundle(phantom_preset("contractile", 30), ViewLayout{}, "contractile",
                             bundle);
        PipelineConfig config;
        config.bundle = bundle;
        config.out = fresh_dir("det_out1");
        run_pipeline(config);
        PipelineConfig config2 = config;
        config2.out = fresh_dir("det_out2");
        run_pipeline(config2);
        bool identical = true;
        int compared = 0;
        for (const auto& entry : fs::directory_iterator(config.out)) {
            const auto other = config2.out / entry.path().filename();
            if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) identical = false;
            ++compared;
        }
        std::ostringstream what;
        what << "determinism: " << compared << " artifacts byte-identical across two runs";
        check(identical && compared > 30, what.str());
    } catch (const std::exception& e) {
        fail(std::string("determinism: ") + e.what());
    }
}

}  // namespace

int main() {
    criterion_rigid_nullity();
    criterion_strain_identities();
    criterion_phantom_oracle();
    criterion_longitudinal_exactness();
    criterion_interpolant_properties();
    criterion_registration();
    criterion_mesh_convergence();
    criterion_weighting();
    criterion_stacom();
    criterion_determinism();
    std::cout << (failures == 0 ? "acceptance: all criteria passed\n"
                                : "acceptance: " + std::to_string(failures) + " failure(s)\n");
    return failures == 0 ? 0 : 1;
}
