// Incremental (Bowyer-Watson) Delaunay tetrahedralization with ghost cells on
// the convex hull, plus a small k-d tree for nearest-sample queries. Topology
// is decided on deterministically jittered copies of the points so that
// cospherical/coplanar ties cannot occur; interpolation weights are always
// computed from the original coordinates, which preserves linear precision.
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "strainforge/types.hpp"

namespace strainforge {

class KdTree3 {
public:
    KdTree3() = default;
    explicit KdTree3(const std::vector<Vec3>& points);

    // Index of the closest point; ties broken toward the smaller index.
    int nearest(const Vec3& q) const;
    bool empty() const { return nodes_.empty(); }

private:
    struct Node {
        int point = -1;
        int left = -1;
        int right = -1;
        std::uint8_t axis = 0;
    };
    std::vector<Node> nodes_;
    std::vector<Vec3> storage_;

    int build(std::vector<int>& idx, int lo, int hi, int depth);
    void search(int node, const Vec3& q, int& best, double& best_d2) const;
};

class Delaunay3 {
public:
    static constexpr int kGhost = -1;

    explicit Delaunay3(const std::vector<Vec3>& points);

    // True when the input is rank-deficient (all points within a plane/line)
    // or has fewer than 4 distinct points; no cells exist in that case.
    bool degenerate() const { return degenerate_; }

    struct Location {
        bool inside = false;
        bool vertex_hit = false;          // query coincides with a sample
        std::array<int, 4> vertices{{-1, -1, -1, -1}};
        Eigen::Vector4d weights = Eigen::Vector4d::Zero();  // sums to 1 when inside
        int nearest = -1;                 // filled for vertex hits and outside queries
        int cell = -1;                    // walk hint for the next query
    };
    Location locate(const Vec3& q, int hint = -1) const;

    std::vector<std::array<int, 4>> real_cells() const;
    std::size_t alive_cell_count() const;
    const std::vector<Vec3>& points() const { return original_; }
    const KdTree3& kd() const { return kd_; }

private:
    struct Cell {
        std::array<int, 4> v;    // v may contain kGhost (canonically at slot 3)
        std::array<int, 4> nbr;  // neighbor opposite v[i]
        std::uint32_t stamp = 0;
        bool alive = false;
        bool ghost = false;
    };

    std::vector<Vec3> original_;
    std::vector<Vec3> jittered_;
    std::vector<Cell> cells_;
    std::vector<int> free_cells_;
    KdTree3 kd_;
    bool degenerate_ = true;
    int hint_cell_ = -1;
    mutable std::uint32_t stamp_ = 0;
    double scale_ = 1.0;   // bounding-box diagonal
    Vec3 centroid_ = Vec3::Zero();

    int new_cell(std::array<int, 4> v);
    void release_cell(int c);
    bool in_conflict(int cell, int point) const;
    int find_conflict_cell(int point) const;
    void insert_point(int point);
    bool build_initial_tet(std::vector<int>& remaining);
};

// Sign predicates used by the triangulation; exposed for tests.
// orientation(a,b,c,d): +1 when tet (a,b,c,d) has positive volume.
int orientation_sign(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);
// +1 when e lies strictly inside the circumsphere of the positively oriented
// tet (a,b,c,d), -1 outside, 0 on the sphere (within arithmetic resolution).
int insphere_sign(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, const Vec3& e);

}  // namespace strainforge
