// Scattered displacement interpolation and multi-view fusion: per-axis
// piecewise-linear interpolants over the simplicial decomposition of each
// source's point cloud (nearest-sample extrapolation outside the hull), the
// longitudinal weighting, and per-frame mesh deformation.
#pragma once

#include <memory>
#include <vector>

#include "strainforge/contours.hpp"
#include "strainforge/delaunay.hpp"
#include "strainforge/mesh.hpp"
#include "strainforge/study.hpp"
#include "strainforge/types.hpp"

namespace strainforge {

enum class SourceTag { Sax, Lax };

struct ScatteredSamples {
    std::vector<Vec3> positions;   // LV space, mm
    std::vector<double> values;
    SourceTag source = SourceTag::Sax;

    void validate() const;
};

// Shared point-cloud decomposition: one triangulation serves every value set
// sampled at the same positions.
class ScatterBase {
public:
    explicit ScatterBase(std::vector<Vec3> positions);

    struct Plan {
        std::array<int, 4> vertices{{-1, -1, -1, -1}};
        Eigen::Vector4d weights = Eigen::Vector4d::Zero();
        int nearest = -1;
        bool extrapolated = false;
        int hint = -1;
    };
    Plan plan(const Vec3& q, int hint = -1) const;
    double apply(const Plan& p, const std::vector<double>& values) const;

    bool degenerate() const { return tri_.degenerate(); }
    std::size_t size() const { return positions_.size(); }
    const std::vector<Vec3>& positions() const { return positions_; }

private:
    std::vector<Vec3> positions_;
    Delaunay3 tri_;
};

class Interpolant {
public:
    Interpolant(std::shared_ptr<const ScatterBase> base, std::vector<double> values);

    struct Result {
        double value = 0.0;
        bool extrapolated = false;
    };
    Result query(const Vec3& q) const;

    bool degenerate() const { return base_->degenerate(); }
    const ScatterBase& base() const { return *base_; }

private:
    std::shared_ptr<const ScatterBase> base_;
    std::vector<double> values_;
};

Interpolant build_interpolant(const ScatteredSamples& samples);

// Normalized longitudinal weight W = w_l / (w_min - w_max), clamped to [0,1].
// Degenerate normalization (w_min >= w_max) yields all-zero weights.
struct FusionWeights {
    std::vector<double> w;
    double w_min = 0.0;
    double w_max = 0.0;
    bool degenerate = false;
};
FusionWeights compute_weights(const std::vector<double>& w_l, double w_min, double w_max);

// u = (1-W) u_cs + W u_l per node; same for v.
std::pair<std::vector<double>, std::vector<double>> fuse_inplane(
    const std::vector<double>& u_cs, const std::vector<double>& v_cs,
    const std::vector<double>& u_l, const std::vector<double>& v_l,
    const std::vector<double>& w);

// One view's up-sampled, LV-space tracked point set: the product of the
// reconstruct stage and the input to sample assembly.
struct CloudView {
    ViewKind kind = ViewKind::Sax;
    RoiTag roi = RoiTag::Endo;
    int slice = -1;
    std::vector<Vec3> points;                      // ED positions, LV space
    std::vector<std::vector<Vec3>> displacement;   // [frame][point], in-plane 3D vectors
};

struct StudyCloud {
    std::vector<CloudView> views;
    int frames = 0;
};

struct PerAxisSamples {
    ScatteredSamples sax_x, sax_y;          // SAX in-plane fields
    ScatteredSamples lax_x, lax_y, lax_z;   // LAX fields at the 4CH+2CH union
};
PerAxisSamples assemble_samples(const StudyCloud& cloud, int frame);

struct FusionOptions {
    bool per_point_weights = false;  // normalize W per node over its own frames
};

struct FusedMotion {
    int frames = 0;
    std::vector<std::vector<Vec3>> displacement;  // [frame][node], LV space mm
    std::vector<char> extrapolated;               // per node: any source extrapolated
    double w_min = 0.0;
    double w_max = 0.0;
    bool weight_degenerate = false;

    double extrapolated_fraction() const;
};

FusedMotion deform_mesh(const LvMesh& mesh, const StudyCloud& cloud,
                        const FusionOptions& options = {});

}  // namespace strainforge
