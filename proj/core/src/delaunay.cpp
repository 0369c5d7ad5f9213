#include "strainforge/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <Eigen/Dense>

namespace strainforge {

// ---------------------------------------------------------------------------
// KdTree3

KdTree3::KdTree3(const std::vector<Vec3>& points) {
    storage_ = points;
    if (points.empty()) return;
    std::vector<int> idx(points.size());
    std::iota(idx.begin(), idx.end(), 0);
    nodes_.reserve(points.size());
    build(idx, 0, static_cast<int>(points.size()), 0);
}

int KdTree3::build(std::vector<int>& idx, int lo, int hi, int depth) {
    if (lo >= hi) return -1;
    const int axis = depth % 3;
    const int mid = (lo + hi) / 2;
    std::nth_element(idx.begin() + lo, idx.begin() + mid, idx.begin() + hi,
                     [&](int a, int b) {
                         const double va = storage_[a][axis], vb = storage_[b][axis];
                         return va < vb || (va == vb && a < b);
                     });
    const int me = static_cast<int>(nodes_.size());
    nodes_.push_back({idx[mid], -1, -1, static_cast<std::uint8_t>(axis)});
    const int left = build(idx, lo, mid, depth + 1);
    const int right = build(idx, mid + 1, hi, depth + 1);
    nodes_[me].left = left;
    nodes_[me].right = right;
    return me;
}

void KdTree3::search(int node, const Vec3& q, int& best, double& best_d2) const {
    if (node < 0) return;
    const Node& n = nodes_[node];
    const Vec3& p = storage_[n.point];
    const double d2 = (p - q).squaredNorm();
    if (d2 < best_d2 || (d2 == best_d2 && n.point < best)) {
        best_d2 = d2;
        best = n.point;
    }
    const double delta = q[n.axis] - p[n.axis];
    const int first = delta < 0.0 ? n.left : n.right;
    const int second = delta < 0.0 ? n.right : n.left;
    search(first, q, best, best_d2);
    if (delta * delta <= best_d2) search(second, q, best, best_d2);
}

int KdTree3::nearest(const Vec3& q) const {
    if (nodes_.empty()) return -1;
    int best = nodes_[0].point;
    double best_d2 = std::numeric_limits<double>::infinity();
    search(0, q, best, best_d2);
    return best;
}

// ---------------------------------------------------------------------------
// Filtered predicates: plain double evaluation with a relative error filter,
// double-double fallback when the magnitude is too close to zero.

namespace {

struct DD {
    double hi = 0.0;
    double lo = 0.0;
};

inline DD two_sum(double a, double b) {
    const double s = a + b;
    const double bb = s - a;
    return {s, (a - (s - bb)) + (b - bb)};
}

inline DD two_diff(double a, double b) {
    const double s = a - b;
    const double bb = s - a;
    return {s, (a - (s - bb)) - (b + bb)};
}

inline DD two_prod(double a, double b) {
    const double p = a * b;
    return {p, std::fma(a, b, -p)};
}

inline DD dd_add(DD a, DD b) {
    DD s = two_sum(a.hi, b.hi);
    s.lo += a.lo + b.lo;
    DD t = two_sum(s.hi, s.lo);
    return t;
}

inline DD dd_sub(DD a, DD b) { return dd_add(a, {-b.hi, -b.lo}); }

inline DD dd_mul(DD a, DD b) {
    DD p = two_prod(a.hi, b.hi);
    p.lo += a.hi * b.lo + a.lo * b.hi;
    DD t = two_sum(p.hi, p.lo);
    return t;
}

inline DD dd_neg(DD a) { return {-a.hi, -a.lo}; }

template <typename T>
T det3(T a, T b, T c, T d, T e, T f, T g, T h, T i);

template <>
double det3<double>(double a, double b, double c, double d, double e, double f, double g,
                    double h, double i) {
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
}

template <>
DD det3<DD>(DD a, DD b, DD c, DD d, DD e, DD f, DD g, DD h, DD i) {
    const DD m1 = dd_sub(dd_mul(e, i), dd_mul(f, h));
    const DD m2 = dd_sub(dd_mul(d, i), dd_mul(f, g));
    const DD m3 = dd_sub(dd_mul(d, h), dd_mul(e, g));
    return dd_add(dd_sub(dd_mul(a, m1), dd_mul(b, m2)), dd_mul(c, m3));
}

// Companion magnitude bound: same expression on absolute values.
double det3_mag(double a, double b, double c, double d, double e, double f, double g, double h,
                double i) {
    a = std::abs(a); b = std::abs(b); c = std::abs(c);
    d = std::abs(d); e = std::abs(e); f = std::abs(f);
    g = std::abs(g); h = std::abs(h); i = std::abs(i);
    return a * (e * i + f * h) + b * (d * i + f * g) + c * (d * h + e * g);
}

constexpr double kFilter = 1e-12;
constexpr double kFilterDD = 1e-28;

int orient_filtered(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
    const double det = det3<double>(b.x() - a.x(), b.y() - a.y(), b.z() - a.z(),
                                    c.x() - a.x(), c.y() - a.y(), c.z() - a.z(),
                                    d.x() - a.x(), d.y() - a.y(), d.z() - a.z());
    const double mag = det3_mag(b.x() - a.x(), b.y() - a.y(), b.z() - a.z(),
                                c.x() - a.x(), c.y() - a.y(), c.z() - a.z(),
                                d.x() - a.x(), d.y() - a.y(), d.z() - a.z());
    if (std::abs(det) > mag * kFilter) return det > 0.0 ? 1 : -1;

    auto e = [&](double p, double q) { return two_diff(p, q); };
    const DD dd = det3<DD>(e(b.x(), a.x()), e(b.y(), a.y()), e(b.z(), a.z()),
                           e(c.x(), a.x()), e(c.y(), a.y()), e(c.z(), a.z()),
                           e(d.x(), a.x()), e(d.y(), a.y()), e(d.z(), a.z()));
    if (std::abs(dd.hi) > mag * kFilterDD) return dd.hi > 0.0 ? 1 : -1;
    return 0;
}

template <typename T>
T det4_last_col(const std::array<std::array<T, 4>, 4>& m);

// 4x4 determinant by cofactor expansion along the last column.
template <typename T>
T det4_impl(const std::array<std::array<T, 4>, 4>& m, auto neg, auto add, auto sub, auto mul) {
    auto minor = [&](int skip) {
        std::array<T, 9> r;
        int k = 0;
        for (int row = 0; row < 4; ++row) {
            if (row == skip) continue;
            r[k * 3 + 0] = m[row][0];
            r[k * 3 + 1] = m[row][1];
            r[k * 3 + 2] = m[row][2];
            ++k;
        }
        return det3<T>(r[0], r[1], r[2], r[3], r[4], r[5], r[6], r[7], r[8]);
    };
    // det = -m[0][3]*M0 + m[1][3]*M1 - m[2][3]*M2 + m[3][3]*M3
    T acc = neg(mul(m[0][3], minor(0)));
    acc = add(acc, mul(m[1][3], minor(1)));
    acc = sub(acc, mul(m[2][3], minor(2)));
    acc = add(acc, mul(m[3][3], minor(3)));
    return acc;
}

int insphere_filtered(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, const Vec3& e) {
    // Rows: (p - e, |p - e|^2). det < 0 when e is strictly inside the
    // circumsphere of the positively oriented (a,b,c,d); return +1 for inside.
    const Vec3 ps[4] = {a, b, c, d};
    std::array<std::array<double, 4>, 4> m;
    std::array<std::array<double, 4>, 4> mabs;
    for (int r = 0; r < 4; ++r) {
        const Vec3 dif = ps[r] - e;
        m[r] = {dif.x(), dif.y(), dif.z(), dif.squaredNorm()};
        mabs[r] = {std::abs(dif.x()), std::abs(dif.y()), std::abs(dif.z()), dif.squaredNorm()};
    }
    const double det = det4_impl<double>(
        m, [](double x) { return -x; }, [](double x, double y) { return x + y; },
        [](double x, double y) { return x - y; }, [](double x, double y) { return x * y; });
    const double mag = det4_impl<double>(
        mabs, [](double x) { return x; }, [](double x, double y) { return x + y; },
        [](double x, double y) { return x + y; }, [](double x, double y) { return x * y; });
    if (std::abs(det) > mag * kFilter) return det < 0.0 ? 1 : -1;

    std::array<std::array<DD, 4>, 4> md;
    for (int r = 0; r < 4; ++r) {
        const DD dx = two_diff(ps[r].x(), e.x());
        const DD dy = two_diff(ps[r].y(), e.y());
        const DD dz = two_diff(ps[r].z(), e.z());
        const DD n2 = dd_add(dd_add(dd_mul(dx, dx), dd_mul(dy, dy)), dd_mul(dz, dz));
        md[r] = {dx, dy, dz, n2};
    }
    const DD dd = det4_impl<DD>(
        md, [](DD x) { return dd_neg(x); }, [](DD x, DD y) { return dd_add(x, y); },
        [](DD x, DD y) { return dd_sub(x, y); }, [](DD x, DD y) { return dd_mul(x, y); });
    if (std::abs(dd.hi) > mag * kFilterDD) return dd.hi < 0.0 ? 1 : -1;
    return 0;
}

// Deterministic per-point jitter from a SplitMix64 stream.
std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

double jitter_unit(std::uint64_t seed) {
    return (static_cast<double>(splitmix64(seed) >> 11) / 9007199254740992.0) * 2.0 - 1.0;
}

// Inward-oriented faces of cell (v0,v1,v2,v3): cell's fourth vertex lies on
// the positive side of each face.
constexpr int kFace[4][3] = {{1, 3, 2}, {0, 2, 3}, {0, 3, 1}, {0, 1, 2}};

}  // namespace

int orientation_sign(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
    return orient_filtered(a, b, c, d);
}

int insphere_sign(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, const Vec3& e) {
    return insphere_filtered(a, b, c, d, e);
}

// ---------------------------------------------------------------------------
// Delaunay3

Delaunay3::Delaunay3(const std::vector<Vec3>& points) : original_(points) {
    kd_ = KdTree3(original_);
    if (points.size() < 4) return;

    Vec3 lo = points.front(), hi = points.front();
    for (const auto& p : points) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    scale_ = std::max((hi - lo).norm(), 1e-9);

    // Rank check on the original coordinates decides degenerate mode.
    Vec3 mean = Vec3::Zero();
    for (const auto& p : points) mean += p;
    mean /= static_cast<double>(points.size());
    centroid_ = mean;
    Mat3 cov = Mat3::Zero();
    for (const auto& p : points) cov += (p - mean) * (p - mean).transpose();
    Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
    if (eig.eigenvalues()(0) < 1e-18 * std::max(eig.eigenvalues()(2), 1e-30)) return;

    jittered_.resize(points.size());
    const double amp = 1e-9 * scale_;
    for (std::size_t i = 0; i < points.size(); ++i)
        for (int k = 0; k < 3; ++k)
            jittered_[i][k] = points[i][k] + amp * jitter_unit(i * 3 + k);

    // Deduplicate coincident points; only representatives are inserted.
    std::vector<int> order;
    order.reserve(points.size());
    {
        std::vector<int> idx(points.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::vector<char> dup(points.size(), 0);
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (dup[i]) continue;
            order.push_back(static_cast<int>(i));
            for (std::size_t j = i + 1; j < points.size(); ++j)
                if (!dup[j] && (original_[i] - original_[j]).norm() < 1e-12 * scale_) dup[j] = 1;
        }
    }
    if (order.size() < 4) return;

    std::vector<int> remaining = order;
    if (!build_initial_tet(remaining)) return;
    degenerate_ = false;
    for (int p : remaining) insert_point(p);
}

int Delaunay3::new_cell(std::array<int, 4> v) {
    // Canonicalize: ghost vertex at slot 3, via a parity-preserving double swap.
    for (int i = 0; i < 3; ++i)
        if (v[i] == kGhost) {
            std::swap(v[i], v[3]);
            std::swap(v[(i + 1) % 3], v[(i + 2) % 3]);
            break;
        }
    int idx;
    if (!free_cells_.empty()) {
        idx = free_cells_.back();
        free_cells_.pop_back();
    } else {
        idx = static_cast<int>(cells_.size());
        cells_.emplace_back();
    }
    Cell& c = cells_[idx];
    c.v = v;
    c.nbr = {-1, -1, -1, -1};
    c.alive = true;
    c.ghost = v[3] == kGhost;
    c.stamp = 0;
    return idx;
}

void Delaunay3::release_cell(int c) {
    cells_[c].alive = false;
    free_cells_.push_back(c);
}

bool Delaunay3::build_initial_tet(std::vector<int>& remaining) {
    const double tol = 1e-12 * scale_;
    std::vector<int> picked;
    std::vector<int> rest;
    for (int cand : remaining) {
        bool use = false;
        if (picked.empty()) {
            use = true;
        } else if (picked.size() == 1) {
            use = (jittered_[cand] - jittered_[picked[0]]).norm() > tol;
        } else if (picked.size() == 2) {
            use = (jittered_[picked[1]] - jittered_[picked[0]])
                      .cross(jittered_[cand] - jittered_[picked[0]])
                      .norm() > tol * scale_;
        } else if (picked.size() == 3) {
            use = orient_filtered(jittered_[picked[0]], jittered_[picked[1]],
                                  jittered_[picked[2]], jittered_[cand]) != 0;
        }
        if (use && picked.size() < 4) picked.push_back(cand);
        else rest.push_back(cand);
    }
    if (picked.size() < 4) return false;

    if (orient_filtered(jittered_[picked[0]], jittered_[picked[1]], jittered_[picked[2]],
                        jittered_[picked[3]]) < 0)
        std::swap(picked[1], picked[2]);

    const int t = new_cell({picked[0], picked[1], picked[2], picked[3]});
    std::array<int, 4> ghosts;
    for (int k = 0; k < 4; ++k) {
        const auto& f = kFace[k];
        // Reversed inward face -> hull-outward positive side for the ghost.
        ghosts[k] = new_cell({cells_[t].v[f[0]], cells_[t].v[f[2]], cells_[t].v[f[1]], kGhost});
    }
    for (int k = 0; k < 4; ++k) {
        cells_[t].nbr[k] = ghosts[k];
        cells_[ghosts[k]].nbr[3] = t;
    }
    // Ghost-to-ghost adjacency across hull edges: match faces (a, b, ghost).
    std::map<std::array<int, 2>, std::pair<int, int>> edge_owner;
    for (int g : ghosts)
        for (int k = 0; k < 3; ++k) {
            std::array<int, 3> face = {cells_[g].v[kFace[k][0]], cells_[g].v[kFace[k][1]],
                                       cells_[g].v[kFace[k][2]]};
            std::array<int, 2> real_edge{};
            int n = 0;
            for (int vv : face)
                if (vv != kGhost) real_edge[n++] = vv;
            std::sort(real_edge.begin(), real_edge.end());
            auto it = edge_owner.find(real_edge);
            if (it == edge_owner.end()) {
                edge_owner[real_edge] = {g, k};
            } else {
                cells_[g].nbr[k] = it->second.first;
                cells_[it->second.first].nbr[it->second.second] = g;
            }
        }
    hint_cell_ = t;
    remaining = std::move(rest);
    return true;
}

bool Delaunay3::in_conflict(int cell, int point) const {
    const Cell& c = cells_[cell];
    const Vec3& p = jittered_[point];
    if (c.ghost)
        return orient_filtered(jittered_[c.v[0]], jittered_[c.v[1]], jittered_[c.v[2]], p) > 0;
    return insphere_filtered(jittered_[c.v[0]], jittered_[c.v[1]], jittered_[c.v[2]],
                             jittered_[c.v[3]], p) > 0;
}

int Delaunay3::find_conflict_cell(int point) const {
    const Vec3& p = jittered_[point];
    int current = hint_cell_;
    if (current < 0 || !cells_[current].alive) {
        for (std::size_t i = 0; i < cells_.size(); ++i)
            if (cells_[i].alive && !cells_[i].ghost) {
                current = static_cast<int>(i);
                break;
            }
    }
    const std::size_t limit = 4 * cells_.size() + 64;
    for (std::size_t step = 0; step < limit && current >= 0; ++step) {
        const Cell& c = cells_[current];
        if (c.ghost) {
            if (in_conflict(current, point)) return current;
            current = c.nbr[3];  // re-enter the hull
            continue;
        }
        int worst = -1;
        int worst_sign = 1;
        for (int k = 0; k < 4; ++k) {
            const auto& f = kFace[k];
            const int s = orient_filtered(jittered_[c.v[f[0]]], jittered_[c.v[f[1]]],
                                          jittered_[c.v[f[2]]], p);
            if (s < worst_sign) {
                worst_sign = s;
                worst = k;
            }
        }
        if (worst_sign >= 0) {
            if (in_conflict(current, point)) return current;
            break;  // inside the cell but on its circumsphere boundary: scan
        }
        current = c.nbr[worst];
    }
    for (std::size_t i = 0; i < cells_.size(); ++i)
        if (cells_[i].alive && in_conflict(static_cast<int>(i), point))
            return static_cast<int>(i);
    throw NumericError("Delaunay insertion found no conflicting cell");
}

void Delaunay3::insert_point(int point) {
    const int seed = find_conflict_cell(point);

    // Grow the conflict cavity.
    ++stamp_;
    std::vector<int> cavity{seed};
    cells_[seed].stamp = stamp_;
    struct BoundaryFace {
        std::array<int, 3> oriented;  // cavity-side positive
        int outside;
    };
    std::vector<BoundaryFace> boundary;
    for (std::size_t qi = 0; qi < cavity.size(); ++qi) {
        const int ci = cavity[qi];
        for (int k = 0; k < 4; ++k) {
            const int nb = cells_[ci].nbr[k];
            if (nb < 0) throw NumericError("Delaunay adjacency is incomplete");
            if (cells_[nb].stamp == stamp_) continue;
            if (in_conflict(nb, point)) {
                cells_[nb].stamp = stamp_;
                cavity.push_back(nb);
            } else {
                const auto& f = kFace[k];
                boundary.push_back({{cells_[ci].v[f[0]], cells_[ci].v[f[1]], cells_[ci].v[f[2]]},
                                    nb});
            }
        }
    }

    // Fill the cavity: one new cell per boundary face.
    std::map<std::array<int, 3>, std::pair<int, int>> open_faces;
    std::vector<int> fresh;
    fresh.reserve(boundary.size());
    for (const auto& bf : boundary) {
        const int nc = new_cell({bf.oriented[0], bf.oriented[1], bf.oriented[2], point});
        fresh.push_back(nc);
        std::array<int, 3> outer_key = bf.oriented;
        std::sort(outer_key.begin(), outer_key.end());
        for (int k = 0; k < 4; ++k) {
            std::array<int, 3> key = {cells_[nc].v[kFace[k][0]], cells_[nc].v[kFace[k][1]],
                                      cells_[nc].v[kFace[k][2]]};
            std::sort(key.begin(), key.end());
            if (key == outer_key) {
                cells_[nc].nbr[k] = bf.outside;
                for (int j = 0; j < 4; ++j) {
                    std::array<int, 3> okey = {cells_[bf.outside].v[kFace[j][0]],
                                               cells_[bf.outside].v[kFace[j][1]],
                                               cells_[bf.outside].v[kFace[j][2]]};
                    std::sort(okey.begin(), okey.end());
                    if (okey == outer_key) {
                        cells_[bf.outside].nbr[j] = nc;
                        break;
                    }
                }
            } else {
                auto it = open_faces.find(key);
                if (it == open_faces.end()) {
                    open_faces[key] = {nc, k};
                } else {
                    cells_[nc].nbr[k] = it->second.first;
                    cells_[it->second.first].nbr[it->second.second] = nc;
                    open_faces.erase(it);
                }
            }
        }
        if (!cells_[nc].ghost) hint_cell_ = nc;
    }
    if (!open_faces.empty())
        throw NumericError("Delaunay cavity retriangulation left unmatched faces");

    for (int ci : cavity) release_cell(ci);
    if (hint_cell_ >= 0 && !cells_[hint_cell_].alive) hint_cell_ = fresh.empty() ? -1 : fresh[0];
}

std::vector<std::array<int, 4>> Delaunay3::real_cells() const {
    std::vector<std::array<int, 4>> out;
    for (const auto& c : cells_)
        if (c.alive && !c.ghost) out.push_back(c.v);
    return out;
}

std::size_t Delaunay3::alive_cell_count() const {
    std::size_t n = 0;
    for (const auto& c : cells_)
        if (c.alive) ++n;
    return n;
}

Delaunay3::Location Delaunay3::locate(const Vec3& q, int hint) const {
    Location loc;
    const int nn = kd_.nearest(q);
    if (nn >= 0 && (original_[nn] - q).norm() < 1e-9) {
        loc.vertex_hit = true;
        loc.inside = true;
        loc.nearest = nn;
        loc.vertices = {nn, nn, nn, nn};
        loc.weights = Eigen::Vector4d(1.0, 0.0, 0.0, 0.0);
        loc.cell = hint;
        return loc;
    }
    if (degenerate_) {
        loc.nearest = nn;
        return loc;
    }

    int start = hint;
    if (start < 0 || start >= static_cast<int>(cells_.size()) || !cells_[start].alive ||
        cells_[start].ghost) {
        start = -1;
        for (std::size_t i = 0; i < cells_.size(); ++i)
            if (cells_[i].alive && !cells_[i].ghost) {
                start = static_cast<int>(i);
                break;
            }
    }

    constexpr int kWalkOutside = -1;
    constexpr int kWalkStuck = -2;
    // Greedy visibility walk on the jittered coordinates.
    auto walk = [&](const Vec3& target, int from) -> int {
        int current = from;
        const std::size_t limit = 2 * cells_.size() + 64;
        for (std::size_t step = 0; step < limit && current >= 0; ++step) {
            const Cell& c = cells_[current];
            if (c.ghost) return kWalkOutside;
            double worst = 0.0;
            int worst_k = -1;
            for (int k = 0; k < 4; ++k) {
                const auto& f = kFace[k];
                const Vec3& a = jittered_[c.v[f[0]]];
                const Vec3& b = jittered_[c.v[f[1]]];
                const Vec3& d = jittered_[c.v[f[2]]];
                const double det = (b - a).cross(d - a).dot(target - a);
                if (det < worst) {
                    worst = det;
                    worst_k = k;
                }
            }
            if (worst_k < 0) return current;
            current = c.nbr[worst_k];
        }
        return kWalkStuck;
    };

    // Barycentric containment test against the original coordinates.
    auto bary_in_cell = [&](int ci, double tol, Eigen::Vector4d* out) {
        const Cell& c = cells_[ci];
        Eigen::Matrix3d A;
        const Vec3& p0 = original_[c.v[0]];
        A.col(0) = original_[c.v[1]] - p0;
        A.col(1) = original_[c.v[2]] - p0;
        A.col(2) = original_[c.v[3]] - p0;
        const Eigen::Vector3d rhs = q - p0;
        const Eigen::Vector3d w = Eigen::PartialPivLU<Eigen::Matrix3d>(A).solve(rhs);
        if (!w.allFinite() || (A * w - rhs).norm() > 1e-6 * scale_) return false;
        const Eigen::Vector4d bary(1.0 - w.sum(), w[0], w[1], w[2]);
        if (bary.minCoeff() < tol) return false;
        *out = bary;
        return true;
    };

    int cell = walk(q, start);
    if (cell == kWalkOutside) {
        // On-facet queries can fall out of the hull by one jitter width; try
        // again with the query nudged toward the sample centroid. A genuinely
        // exterior point stays outside after the ~1e-7-relative nudge.
        const Vec3 toward = centroid_ - q;
        if (toward.norm() > 1e-12) {
            const int retry = walk(q + toward.normalized() * (1e-7 * scale_), start);
            cell = retry == kWalkOutside ? kWalkOutside : retry;
        }
    }
    Eigen::Vector4d bary = Eigen::Vector4d::Zero();
    bool resolved = false;
    if (cell >= 0) resolved = bary_in_cell(cell, -1e-5, &bary);
    if (!resolved && cell != kWalkOutside) {
        // Walk got stuck in near-degenerate cells: scan for a containing cell.
        for (std::size_t i = 0; i < cells_.size() && !resolved; ++i)
            if (cells_[i].alive && !cells_[i].ghost && bary_in_cell(static_cast<int>(i), -1e-9,
                                                                    &bary)) {
                cell = static_cast<int>(i);
                resolved = true;
            }
    }
    if (!resolved) {
        loc.nearest = nn;
        loc.cell = cell >= 0 ? cell : -1;
        return loc;
    }
    loc.inside = true;
    loc.vertices = cells_[cell].v;
    loc.weights = bary;
    loc.cell = cell;
    return loc;
}

}  // namespace strainforge
