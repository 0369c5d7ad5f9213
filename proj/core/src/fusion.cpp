#include "strainforge/fusion.hpp"

#include <algorithm>
#include <cmath>

#include "strainforge/threads.hpp"

namespace strainforge {

void ScatteredSamples::validate() const {
    if (positions.empty()) throw ValidationError("empty scattered sample set");
    if (positions.size() != values.size())
        throw ValidationError("scattered samples: position/value count mismatch");
    for (const auto& p : positions)
        if (!p.allFinite()) throw ValidationError("scattered sample positions must be finite");
    for (double v : values)
        if (!std::isfinite(v)) throw ValidationError("scattered sample values must be finite");
}

ScatterBase::ScatterBase(std::vector<Vec3> positions)
    : positions_(std::move(positions)), tri_(positions_) {
    if (positions_.empty()) throw ValidationError("interpolant needs at least one sample");
}

ScatterBase::Plan ScatterBase::plan(const Vec3& q, int hint) const {
    const Delaunay3::Location loc = tri_.locate(q, hint);
    Plan p;
    p.hint = loc.cell;
    if (loc.vertex_hit) {
        p.nearest = loc.nearest;
        p.vertices = {loc.nearest, loc.nearest, loc.nearest, loc.nearest};
        p.weights = Eigen::Vector4d(1.0, 0.0, 0.0, 0.0);
        return p;
    }
    if (loc.inside) {
        p.vertices = loc.vertices;
        p.weights = loc.weights;
        return p;
    }
    p.extrapolated = true;
    p.nearest = loc.nearest >= 0 ? loc.nearest : tri_.kd().nearest(q);
    return p;
}

double ScatterBase::apply(const Plan& p, const std::vector<double>& values) const {
    if (p.extrapolated || p.vertices[0] < 0) return values[p.nearest];
    if (p.nearest >= 0 && p.vertices[0] == p.nearest && p.weights[0] == 1.0)
        return values[p.nearest];  // vertex hit: exact sample value
    double acc = 0.0;
    for (int k = 0; k < 4; ++k) acc += p.weights[k] * values[p.vertices[k]];
    return acc;
}

Interpolant::Interpolant(std::shared_ptr<const ScatterBase> base, std::vector<double> values)
    : base_(std::move(base)), values_(std::move(values)) {
    if (base_->size() != values_.size())
        throw ValidationError("interpolant: value count differs from sample count");
}

Interpolant::Result Interpolant::query(const Vec3& q) const {
    const ScatterBase::Plan p = base_->plan(q);
    return {base_->apply(p, values_), p.extrapolated};
}

Interpolant build_interpolant(const ScatteredSamples& samples) {
    samples.validate();
    return Interpolant(std::make_shared<ScatterBase>(samples.positions), samples.values);
}

FusionWeights compute_weights(const std::vector<double>& w_l, double w_min, double w_max) {
    if (!std::isfinite(w_min) || !std::isfinite(w_max))
        throw NumericError("weight normalization constants must be finite");
    FusionWeights out;
    out.w_min = w_min;
    out.w_max = w_max;
    out.w.assign(w_l.size(), 0.0);
    if (!(w_min < w_max)) {
        out.degenerate = true;
        return out;
    }
    const double denom = w_min - w_max;
    for (std::size_t i = 0; i < w_l.size(); ++i) {
        if (!std::isfinite(w_l[i]))
            throw NumericError("non-finite longitudinal displacement in weighting");
        out.w[i] = std::clamp(w_l[i] / denom, 0.0, 1.0);
    }
    return out;
}

std::pair<std::vector<double>, std::vector<double>> fuse_inplane(
    const std::vector<double>& u_cs, const std::vector<double>& v_cs,
    const std::vector<double>& u_l, const std::vector<double>& v_l,
    const std::vector<double>& w) {
    const std::size_t n = u_cs.size();
    if (v_cs.size() != n || u_l.size() != n || v_l.size() != n || w.size() != n)
        throw ValidationError("fuse_inplane: array length mismatch");
    std::vector<double> u(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
        u[i] = (1.0 - w[i]) * u_cs[i] + w[i] * u_l[i];
        v[i] = (1.0 - w[i]) * v_cs[i] + w[i] * v_l[i];
    }
    return {std::move(u), std::move(v)};
}

PerAxisSamples assemble_samples(const StudyCloud& cloud, int frame) {
    if (frame < 0 || frame >= cloud.frames)
        throw ValidationError("assemble_samples: frame index out of range");
    PerAxisSamples out;
    out.sax_x.source = out.sax_y.source = SourceTag::Sax;
    out.lax_x.source = out.lax_y.source = out.lax_z.source = SourceTag::Lax;
    for (const auto& view : cloud.views) {
        const auto& disp = view.displacement.at(frame);
        if (view.kind == ViewKind::Sax) {
            for (std::size_t i = 0; i < view.points.size(); ++i) {
                out.sax_x.positions.push_back(view.points[i]);
                out.sax_x.values.push_back(disp[i].x());
                out.sax_y.positions.push_back(view.points[i]);
                out.sax_y.values.push_back(disp[i].y());
            }
        } else {
            for (std::size_t i = 0; i < view.points.size(); ++i) {
                out.lax_x.positions.push_back(view.points[i]);
                out.lax_x.values.push_back(disp[i].x());
                out.lax_y.positions.push_back(view.points[i]);
                out.lax_y.values.push_back(disp[i].y());
                out.lax_z.positions.push_back(view.points[i]);
                out.lax_z.values.push_back(disp[i].z());
            }
        }
    }
    if (out.sax_x.positions.empty()) throw ValidationError("no SAX tracked points in study");
    if (out.lax_x.positions.empty()) throw ValidationError("no LAX tracked points in study");
    return out;
}

double FusedMotion::extrapolated_fraction() const {
    if (extrapolated.empty()) return 0.0;
    std::size_t n = 0;
    for (char c : extrapolated)
        if (c) ++n;
    return static_cast<double>(n) / static_cast<double>(extrapolated.size());
}

namespace {

// Per-frame value arrays for one source; positions are frame-independent.
struct SourceValues {
    std::vector<double> x, y, z;
};

}  // namespace

FusedMotion deform_mesh(const LvMesh& mesh, const StudyCloud& cloud,
                        const FusionOptions& options) {
    if (cloud.frames < 1) throw ValidationError("study cloud has no frames");
    const std::size_t n_nodes = mesh.nodes.size();

    // Frame-independent sample geometry.
    std::vector<Vec3> sax_pos, lax_pos;
    for (const auto& view : cloud.views) {
        auto& dst = view.kind == ViewKind::Sax ? sax_pos : lax_pos;
        dst.insert(dst.end(), view.points.begin(), view.points.end());
    }
    if (sax_pos.empty()) throw ValidationError("no SAX tracked points in study");
    if (lax_pos.empty()) throw ValidationError("no LAX tracked points in study");
    const ScatterBase sax_base(std::move(sax_pos));
    const ScatterBase lax_base(std::move(lax_pos));

    // One locate per node per source, reused across frames and axes.
    std::vector<ScatterBase::Plan> sax_plan(n_nodes), lax_plan(n_nodes);
    int hint_sax = -1, hint_lax = -1;
    for (std::size_t i = 0; i < n_nodes; ++i) {
        sax_plan[i] = sax_base.plan(mesh.nodes[i], hint_sax);
        hint_sax = sax_plan[i].hint;
        lax_plan[i] = lax_base.plan(mesh.nodes[i], hint_lax);
        hint_lax = lax_plan[i].hint;
    }

    // Per-frame value arrays in source-concatenation order.
    std::vector<SourceValues> sax_vals(cloud.frames), lax_vals(cloud.frames);
    for (int t = 0; t < cloud.frames; ++t) {
        for (const auto& view : cloud.views) {
            auto& dst = view.kind == ViewKind::Sax ? sax_vals[t] : lax_vals[t];
            const auto& disp = view.displacement.at(t);
            for (const auto& d : disp) {
                dst.x.push_back(d.x());
                dst.y.push_back(d.y());
                if (view.kind != ViewKind::Sax) dst.z.push_back(d.z());
            }
        }
    }

    FusedMotion out;
    out.frames = cloud.frames;
    out.displacement.assign(cloud.frames, std::vector<Vec3>(n_nodes, Vec3::Zero()));
    out.extrapolated.assign(n_nodes, 0);
    for (std::size_t i = 0; i < n_nodes; ++i)
        out.extrapolated[i] = sax_plan[i].extrapolated || lax_plan[i].extrapolated;

    // Longitudinal displacement of every node at every frame fixes the global
    // normalization range before any fusion happens.
    std::vector<std::vector<double>> w_node(cloud.frames, std::vector<double>(n_nodes, 0.0));
    parallel_for(cloud.frames, [&](std::size_t t) {
        for (std::size_t i = 0; i < n_nodes; ++i)
            w_node[t][i] = lax_base.apply(lax_plan[i], lax_vals[t].z);
    });
    double w_min = 0.0, w_max = 0.0;
    for (int t = 0; t < cloud.frames; ++t)
        for (std::size_t i = 0; i < n_nodes; ++i) {
            w_min = std::min(w_min, w_node[t][i]);
            w_max = std::max(w_max, w_node[t][i]);
        }
    out.w_min = w_min;
    out.w_max = w_max;

    std::vector<double> node_w_min, node_w_max;
    if (options.per_point_weights) {
        node_w_min.assign(n_nodes, 0.0);
        node_w_max.assign(n_nodes, 0.0);
        for (int t = 0; t < cloud.frames; ++t)
            for (std::size_t i = 0; i < n_nodes; ++i) {
                node_w_min[i] = std::min(node_w_min[i], w_node[t][i]);
                node_w_max[i] = std::max(node_w_max[i], w_node[t][i]);
            }
    }
    out.weight_degenerate = !(w_min < w_max);

    parallel_for(cloud.frames, [&](std::size_t t) {
        if (t == 0) return;  // ED reference stays exactly zero
        for (std::size_t i = 0; i < n_nodes; ++i) {
            const double u_cs = sax_base.apply(sax_plan[i], sax_vals[t].x);
            const double v_cs = sax_base.apply(sax_plan[i], sax_vals[t].y);
            const double u_l = lax_base.apply(lax_plan[i], lax_vals[t].x);
            const double v_l = lax_base.apply(lax_plan[i], lax_vals[t].y);
            const double wl = w_node[t][i];
            double w = 0.0;
            const double lo = options.per_point_weights ? node_w_min[i] : w_min;
            const double hi = options.per_point_weights ? node_w_max[i] : w_max;
            if (lo < hi) w = std::clamp(wl / (lo - hi), 0.0, 1.0);
            out.displacement[t][i] =
                Vec3((1.0 - w) * u_cs + w * u_l, (1.0 - w) * v_cs + w * v_l, wl);
        }
    });
    return out;
}

}  // namespace strainforge
