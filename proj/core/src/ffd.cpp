#include "strainforge/ffd.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace strainforge {

std::array<double, 4> bspline_weights(double t) {
    const double t2 = t * t;
    const double t3 = t2 * t;
    return {
        (1.0 - 3.0 * t + 3.0 * t2 - t3) / 6.0,
        (4.0 - 6.0 * t2 + 3.0 * t3) / 6.0,
        (1.0 + 3.0 * t + 3.0 * t2 - 3.0 * t3) / 6.0,
        t3 / 6.0,
    };
}

BSplineGrid BSplineGrid::for_image(int width, int height, double spacing) {
    if (!(spacing > 0.0)) throw ValidationError("control spacing must be positive");
    BSplineGrid g;
    g.spacing = spacing;
    g.cells_r = std::max(1, static_cast<int>(std::ceil((height - 1) / spacing)));
    g.cells_c = std::max(1, static_cast<int>(std::ceil((width - 1) / spacing)));
    g.nodes_r = g.cells_r + 3;
    g.nodes_c = g.cells_c + 3;
    g.displacement.assign(static_cast<std::size_t>(g.nodes_r) * g.nodes_c, Vec2::Zero());
    return g;
}

namespace {

struct CellRef {
    int i0, j0;        // storage index of the first supporting node
    double tr, tc;     // local parameters
};

CellRef locate_cell(const BSplineGrid& grid, double r, double c) {
    double gr = r / grid.spacing;
    double gc = c / grid.spacing;
    int ir = static_cast<int>(std::floor(gr));
    int ic = static_cast<int>(std::floor(gc));
    ir = std::clamp(ir, 0, grid.cells_r - 1);
    ic = std::clamp(ic, 0, grid.cells_c - 1);
    return {ir, ic, gr - ir, gc - ic};
}

}  // namespace

Vec2 ffd_displacement(const BSplineGrid& grid, double r, double c) {
    const CellRef cell = locate_cell(grid, r, c);
    const auto wr = bspline_weights(cell.tr);
    const auto wc = bspline_weights(cell.tc);
    Vec2 u = Vec2::Zero();
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            u += wr[a] * wc[b] * grid.node(cell.i0 + a, cell.j0 + b);
    return u;
}

Vec2 evaluate_ffd(const BSplineGrid& grid, const Vec2& x) {
    if (x[0] < -1e-9 || x[1] < -1e-9 || x[0] > grid.domain_rows() + 1e-9 ||
        x[1] > grid.domain_cols() + 1e-9)
        throw ValidationError("FFD evaluation outside lattice coverage");
    return x + ffd_displacement(grid, x[0], x[1]);
}

double ssd(const Image2D& fixed, const Image2D& moving, const BSplineGrid& grid) {
    if (fixed.width() != moving.width() || fixed.height() != moving.height())
        throw ValidationError("SSD requires images of identical dimensions");
    double acc = 0.0;
    for (int r = 0; r < fixed.height(); ++r)
        for (int c = 0; c < fixed.width(); ++c) {
            const Vec2 u = ffd_displacement(grid, r, c);
            const double diff = fixed.at(r, c) - moving.sample(r + u[0], c + u[1]);
            acc += diff * diff;
        }
    return acc / (static_cast<double>(fixed.width()) * fixed.height());
}

double bending_energy(const BSplineGrid& grid) {
    double acc = 0.0;
    int count = 0;
    for (int i = 1; i < grid.nodes_r - 1; ++i)
        for (int j = 1; j < grid.nodes_c - 1; ++j) {
            for (int k = 0; k < 2; ++k) {
                const double drr =
                    grid.node(i + 1, j)[k] - 2.0 * grid.node(i, j)[k] + grid.node(i - 1, j)[k];
                const double dcc =
                    grid.node(i, j + 1)[k] - 2.0 * grid.node(i, j)[k] + grid.node(i, j - 1)[k];
                const double drc = 0.25 * (grid.node(i + 1, j + 1)[k] - grid.node(i + 1, j - 1)[k] -
                                           grid.node(i - 1, j + 1)[k] + grid.node(i - 1, j - 1)[k]);
                acc += drr * drr + dcc * dcc + 2.0 * drc * drc;
            }
            ++count;
        }
    return count > 0 ? acc / count : 0.0;
}

void RegistrationParams::validate() const {
    if (alpha < 0.0) throw ValidationError("alpha must be >= 0");
    if (pyramid_levels < 1) throw ValidationError("pyramid_levels must be >= 1");
    if (max_iterations < 1) throw ValidationError("max_iterations must be >= 1");
    if (!(control_spacing > 0.0)) throw ValidationError("control spacing must be positive");
    if (!(step_size > 0.0)) throw ValidationError("step size must be positive");
}

double cost_and_gradient(const Image2D& fixed, const Image2D& moving, const BSplineGrid& grid,
                         double alpha, int scale, std::vector<Vec2>* gradient) {
    if (fixed.width() != moving.width() || fixed.height() != moving.height())
        throw ValidationError("registration requires images of identical dimensions");
    if (gradient) gradient->assign(grid.displacement.size(), Vec2::Zero());

    const double f = static_cast<double>(scale);
    const double inv_m = 1.0 / (static_cast<double>(fixed.width()) * fixed.height());
    double cost = 0.0;
    for (int r = 0; r < fixed.height(); ++r)
        for (int c = 0; c < fixed.width(); ++c) {
            // Pixel-center alignment between the level image and full resolution.
            const double rf = (r + 0.5) * f - 0.5;
            const double cf = (c + 0.5) * f - 0.5;
            const CellRef cell = locate_cell(grid, rf, cf);
            const auto wr = bspline_weights(cell.tr);
            const auto wc = bspline_weights(cell.tc);
            Vec2 u = Vec2::Zero();
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b)
                    u += wr[a] * wc[b] * grid.node(cell.i0 + a, cell.j0 + b);
            const double yr = (rf + u[0] + 0.5) / f - 0.5;
            const double yc = (cf + u[1] + 0.5) / f - 0.5;
            const double resid = moving.sample(yr, yc) - fixed.at(r, c);
            cost += resid * resid;
            if (gradient) {
                const Vec2 g = moving.sample_gradient(yr, yc) / f;
                const double common = 2.0 * inv_m * resid;
                for (int a = 0; a < 4; ++a)
                    for (int b = 0; b < 4; ++b) {
                        const double w = wr[a] * wc[b] * common;
                        (*gradient)[static_cast<std::size_t>(cell.i0 + a) * grid.nodes_c +
                                    cell.j0 + b] += w * g;
                    }
            }
        }
    cost *= inv_m;

    if (alpha > 0.0) {
        cost += alpha * bending_energy(grid);
        if (gradient) {
            int count = 0;
            for (int i = 1; i < grid.nodes_r - 1; ++i)
                for (int j = 1; j < grid.nodes_c - 1; ++j) ++count;
            const double norm = count > 0 ? alpha / count : 0.0;
            const auto idx = [&](int i, int j) {
                return static_cast<std::size_t>(i) * grid.nodes_c + j;
            };
            for (int i = 1; i < grid.nodes_r - 1; ++i)
                for (int j = 1; j < grid.nodes_c - 1; ++j)
                    for (int k = 0; k < 2; ++k) {
                        const double drr = grid.node(i + 1, j)[k] - 2.0 * grid.node(i, j)[k] +
                                           grid.node(i - 1, j)[k];
                        const double dcc = grid.node(i, j + 1)[k] - 2.0 * grid.node(i, j)[k] +
                                           grid.node(i, j - 1)[k];
                        const double drc =
                            0.25 * (grid.node(i + 1, j + 1)[k] - grid.node(i + 1, j - 1)[k] -
                                    grid.node(i - 1, j + 1)[k] + grid.node(i - 1, j - 1)[k]);
                        (*gradient)[idx(i + 1, j)][k] += norm * 2.0 * drr;
                        (*gradient)[idx(i - 1, j)][k] += norm * 2.0 * drr;
                        (*gradient)[idx(i, j)][k] += norm * 2.0 * drr * -2.0;
                        (*gradient)[idx(i, j + 1)][k] += norm * 2.0 * dcc;
                        (*gradient)[idx(i, j - 1)][k] += norm * 2.0 * dcc;
                        (*gradient)[idx(i, j)][k] += norm * 2.0 * dcc * -2.0;
                        const double dmix = norm * 4.0 * drc * 0.25;
                        (*gradient)[idx(i + 1, j + 1)][k] += dmix;
                        (*gradient)[idx(i + 1, j - 1)][k] -= dmix;
                        (*gradient)[idx(i - 1, j + 1)][k] -= dmix;
                        (*gradient)[idx(i - 1, j - 1)][k] += dmix;
                    }
        }
    }
    return cost;
}

namespace {

// Gradient descent with backtracking line search; monotone by construction.
void minimize_level(const Image2D& fixed, const Image2D& moving, BSplineGrid& grid,
                    const RegistrationParams& params, int scale) {
    std::vector<Vec2> grad;
    double cost = cost_and_gradient(fixed, moving, grid, params.alpha, scale, &grad);
    double step = params.step_size;
    for (int iter = 0; iter < params.max_iterations; ++iter) {
        if (!std::isfinite(cost))
            throw NumericError("non-finite registration cost at iteration " +
                               std::to_string(iter));
        double gmax = 0.0, gnorm2 = 0.0;
        for (const auto& g : grad) {
            gmax = std::max({gmax, std::abs(g[0]), std::abs(g[1])});
            gnorm2 += g.squaredNorm();
        }
        if (gmax < 1e-14) break;

        BSplineGrid trial = grid;
        double trial_cost = cost;
        bool accepted = false;
        double s = step;
        for (int bt = 0; bt < 40; ++bt) {
            for (std::size_t k = 0; k < grid.displacement.size(); ++k)
                trial.displacement[k] = grid.displacement[k] - s * grad[k];
            trial_cost = cost_and_gradient(fixed, moving, trial, params.alpha, scale, nullptr);
            if (trial_cost <= cost - 1e-4 * s * gnorm2) {
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        if (!accepted) break;
        const double update = s * gmax;
        grid = std::move(trial);
        cost = cost_and_gradient(fixed, moving, grid, params.alpha, scale, &grad);
        step = s * 2.0;  // optimistic growth, line search trims it back
        if (update < params.step_tolerance) break;
    }
}

}  // namespace

BSplineGrid register_pair(const Image2D& fixed, const Image2D& moving,
                          const RegistrationParams& params) {
    params.validate();
    if (fixed.width() != moving.width() || fixed.height() != moving.height())
        throw ValidationError("registration requires images of identical dimensions");

    // Image pyramid; levels stop once a side would drop below 8 pixels.
    std::vector<Image2D> pyr_f{fixed}, pyr_m{moving};
    for (int l = 1; l < params.pyramid_levels; ++l) {
        const Image2D& prev = pyr_f.back();
        if (prev.width() / 2 < 8 || prev.height() / 2 < 8) break;
        pyr_f.push_back(downsample2(pyr_f.back()));
        pyr_m.push_back(downsample2(pyr_m.back()));
    }

    BSplineGrid grid = BSplineGrid::for_image(fixed.width(), fixed.height(),
                                              params.control_spacing);
    const double zero_cost = cost_and_gradient(fixed, moving, grid, params.alpha, 1, nullptr);
    for (int l = static_cast<int>(pyr_f.size()) - 1; l >= 0; --l)
        minimize_level(pyr_f[l], pyr_m[l], grid, params, 1 << l);
    // The optimizer contract is relative to the identity transform at native
    // resolution; fall back if coarse levels overfit.
    if (cost_and_gradient(fixed, moving, grid, params.alpha, 1, nullptr) > zero_cost)
        grid = BSplineGrid::for_image(fixed.width(), fixed.height(), params.control_spacing);
    return grid;
}

TrackedSequence track_sequence(const std::vector<Image2D>& images, const std::vector<Vec2>& seeds,
                               const RegistrationParams& params) {
    if (images.size() < 2) throw ValidationError("tracking needs >= 2 frames");
    const double rmax = images.front().height() - 1.0;
    const double cmax = images.front().width() - 1.0;
    for (const auto& s : seeds)
        if (s[0] < 0.0 || s[1] < 0.0 || s[0] > rmax || s[1] > cmax)
            throw ValidationError("seed point outside frame 0 domain");

    TrackedSequence out;
    out.seeds = seeds;
    out.left_domain.assign(seeds.size(), false);
    out.displacement.assign(images.size(), std::vector<Vec2>(seeds.size(), Vec2::Zero()));

    std::vector<Vec2> current = seeds;
    for (std::size_t t = 0; t + 1 < images.size(); ++t) {
        const BSplineGrid grid = register_pair(images[t], images[t + 1], params);
        for (std::size_t p = 0; p < current.size(); ++p) {
            Vec2 next = current[p] + ffd_displacement(grid, current[p][0], current[p][1]);
            if (next[0] < 0.0 || next[1] < 0.0 || next[0] > rmax || next[1] > cmax) {
                next[0] = std::clamp(next[0], 0.0, rmax);
                next[1] = std::clamp(next[1], 0.0, cmax);
                out.left_domain[p] = true;
            }
            current[p] = next;
            out.displacement[t + 1][p] = next - seeds[p];
        }
    }

    if (params.temporal_smoothing && images.size() >= 3) {
        auto smoothed = out.displacement;
        for (std::size_t t = 1; t + 1 < images.size(); ++t)
            for (std::size_t p = 0; p < seeds.size(); ++p)
                smoothed[t][p] = (out.displacement[t - 1][p] + out.displacement[t][p] +
                                  out.displacement[t + 1][p]) / 3.0;
        out.displacement = std::move(smoothed);
    }
    return out;
}

std::vector<int> align_peak_times(const std::vector<std::vector<double>>& curves, int reference) {
    if (curves.empty()) throw ValidationError("no curves to align");
    if (reference < 0 || reference >= static_cast<int>(curves.size()))
        throw ValidationError("reference curve index out of range");

    auto extremum_frame = [](const std::vector<double>& curve) {
        double best = 0.0;
        int frame = -1;
        for (std::size_t t = 0; t < curve.size(); ++t)
            if (std::abs(curve[t]) > best) {
                best = std::abs(curve[t]);
                frame = static_cast<int>(t);
            }
        if (frame < 0 || best < 1e-9)
            throw ValidationError("flat contraction curve: no extremum above noise floor");
        return frame;
    };

    const int ref_peak = extremum_frame(curves[reference]);
    std::vector<int> shifts(curves.size(), 0);
    for (std::size_t v = 0; v < curves.size(); ++v)
        shifts[v] = static_cast<int>(v) == reference ? 0 : ref_peak - extremum_frame(curves[v]);
    return shifts;
}

}  // namespace strainforge
