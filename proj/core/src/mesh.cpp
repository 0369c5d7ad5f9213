#include "strainforge/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace strainforge {

double tet_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
    return (b - a).cross(c - a).dot(d - a) / 6.0;
}

const std::array<std::array<int, 4>, 6>& hex_to_tets() {
    // Six tets sharing the main diagonal 0-7, reordered for positive volume.
    static const std::array<std::array<int, 4>, 6> kSplit = {{
        {0, 1, 3, 7},
        {0, 5, 1, 7},
        {0, 3, 2, 7},
        {0, 2, 6, 7},
        {0, 4, 5, 7},
        {0, 6, 4, 7},
    }};
    return kSplit;
}

namespace {

using Edge = std::pair<int, int>;

Edge sorted_edge(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }

Vec3 centroid_of(const std::vector<Vec3>& pts) {
    Vec3 c = Vec3::Zero();
    for (const auto& p : pts) c += p;
    return c / static_cast<double>(pts.size());
}

void check_ring_stack(const std::vector<std::vector<Vec3>>& endo,
                      const std::vector<std::vector<Vec3>>& epi) {
    if (endo.size() < 2 || epi.size() < 2)
        throw MeshError("need >= 2 rings per surface");
    if (endo.size() != epi.size())
        throw MeshError("endo and epi ring counts differ");
    const std::size_t n = endo.front().size();
    if (n < 3) throw MeshError("rings need >= 3 samples");
    for (const auto& r : endo)
        if (r.size() != n) throw MeshError("inconsistent ring sample counts");
    for (const auto& r : epi)
        if (r.size() != n) throw MeshError("inconsistent ring sample counts");
    for (std::size_t k = 0; k + 1 < endo.size(); ++k)
        if (!(centroid_of(endo[k]).z() > centroid_of(endo[k + 1]).z()))
            throw MeshError("rings must be ordered base to apex (decreasing Z)");
    // Basal stitch sanity: endo strictly inside epi in the basal plane.
    const Vec3 c0 = centroid_of(endo.front());
    for (std::size_t a = 0; a < n; ++a) {
        const double re = (endo.front()[a] - c0).head<2>().norm();
        const double rp = (epi.front()[a] - c0).head<2>().norm();
        if (!(re < rp))
            throw MeshError("self-intersecting basal stitch: endo ring not inside epi ring");
    }
}

double mean_ring_radius(const std::vector<Vec3>& ring) {
    const Vec3 c = centroid_of(ring);
    double acc = 0.0;
    for (const auto& p : ring) acc += (p - c).norm();
    return acc / static_cast<double>(ring.size());
}

bool use_fan_closure(const std::vector<std::vector<Vec3>>& endo, ApexClosure apex) {
    switch (apex) {
        case ApexClosure::Fan: return true;
        case ApexClosure::Annular: return false;
        case ApexClosure::Auto:
            return mean_ring_radius(endo.back()) < 0.5 * mean_ring_radius(endo.front());
    }
    return false;
}

// Apex points for the fan closure. The endo cap sits half the last inter-ring
// spacing beyond the apical ring; the epi cap sits one apical wall thickness
// deeper so the plug between the two fans has volume.
struct ApexPoints {
    Vec3 endo;
    Vec3 epi;
};

ApexPoints apex_points(const std::vector<std::vector<Vec3>>& endo_rings,
                       const std::vector<std::vector<Vec3>>& epi_rings) {
    const Vec3 c_last = centroid_of(endo_rings.back());
    const Vec3 c_prev = centroid_of(endo_rings[endo_rings.size() - 2]);
    const Vec3 half_step = 0.5 * (c_last - c_prev);
    double thickness = 0.0;
    const std::size_t n = endo_rings.back().size();
    for (std::size_t a = 0; a < n; ++a)
        thickness += (epi_rings.back()[a] - endo_rings.back()[a]).norm();
    thickness /= static_cast<double>(n);
    const Vec3 axis = half_step.normalized();
    ApexPoints pts;
    pts.endo = c_last + half_step;
    pts.epi = pts.endo + thickness * axis;
    return pts;
}

}  // namespace

double TriSurface::area() const {
    double acc = 0.0;
    for (const auto& t : triangles) {
        const Vec3& a = vertices[t[0]];
        acc += 0.5 * (vertices[t[1]] - a).cross(vertices[t[2]] - a).norm();
    }
    return acc;
}

double TriSurface::enclosed_volume() const {
    double acc = 0.0;
    for (const auto& t : triangles)
        acc += vertices[t[0]].cross(vertices[t[1]]).dot(vertices[t[2]]) / 6.0;
    return acc;
}

int TriSurface::boundary_edge_count() const {
    std::map<Edge, int> use;
    for (const auto& t : triangles)
        for (int e = 0; e < 3; ++e) ++use[sorted_edge(t[e], t[(e + 1) % 3])];
    int boundary = 0;
    for (const auto& [edge, count] : use)
        if (count == 1) ++boundary;
    return boundary;
}

int TriSurface::euler_characteristic() const {
    std::map<Edge, int> edges;
    for (const auto& t : triangles)
        for (int e = 0; e < 3; ++e) edges[sorted_edge(t[e], t[(e + 1) % 3])] = 1;
    return static_cast<int>(vertices.size()) - static_cast<int>(edges.size()) +
           static_cast<int>(triangles.size());
}

TriSurface loft_surface(const std::vector<std::vector<Vec3>>& endo_rings,
                        const std::vector<std::vector<Vec3>>& epi_rings, ApexClosure apex) {
    check_ring_stack(endo_rings, epi_rings);
    const int n = static_cast<int>(endo_rings.front().size());
    const int levels = static_cast<int>(endo_rings.size());

    TriSurface surf;
    // Vertex layout: endo rings level-major, then epi rings, then cap vertices.
    auto endo_at = [&](int level, int a) { return level * n + (a % n); };
    auto epi_at = [&](int level, int a) { return levels * n + level * n + (a % n); };
    for (const auto& ring : endo_rings)
        surf.vertices.insert(surf.vertices.end(), ring.begin(), ring.end());
    for (const auto& ring : epi_rings)
        surf.vertices.insert(surf.vertices.end(), ring.begin(), ring.end());

    // Quad strips split along the shorter diagonal. `flip` mirrors orientation
    // so that endo faces point into the cavity and epi faces point outward.
    auto add_strip = [&](auto lower_of, auto upper_of, SurfaceRegion tag, bool flip) {
        for (int a = 0; a < n; ++a) {
            const int l0 = lower_of(a), l1 = lower_of(a + 1);
            const int u0 = upper_of(a), u1 = upper_of(a + 1);
            const double d0 = (surf.vertices[l0] - surf.vertices[u1]).norm();
            const double d1 = (surf.vertices[l1] - surf.vertices[u0]).norm();
            std::array<std::array<int, 3>, 2> tris;
            if (d0 <= d1) tris = {{{l0, l1, u1}, {l0, u1, u0}}};
            else tris = {{{l0, l1, u0}, {l1, u1, u0}}};
            for (auto t : tris) {
                if (flip) std::swap(t[1], t[2]);
                surf.triangles.push_back(t);
                surf.region.push_back(tag);
            }
        }
    };

    // Lateral walls. With rings ordered base->apex and CCW about +Z, the
    // outward solid normal is -radial on endo and +radial on epi.
    for (int k = 0; k + 1 < levels; ++k) {
        add_strip([&](int a) { return endo_at(k, a); }, [&](int a) { return endo_at(k + 1, a); },
                  SurfaceRegion::Endo, false);
        add_strip([&](int a) { return epi_at(k, a); }, [&](int a) { return epi_at(k + 1, a); },
                  SurfaceRegion::Epi, true);
    }

    // Base stitch: annular strip joining the basal endo ring to the basal epi ring.
    add_strip([&](int a) { return endo_at(0, a); }, [&](int a) { return epi_at(0, a); },
              SurfaceRegion::BaseCap, true);

    if (use_fan_closure(endo_rings, apex)) {
        // Each wall closes onto its own apex point; the solid plug sits
        // between the two fans.
        const ApexPoints apexes = apex_points(endo_rings, epi_rings);
        const int apex_endo = static_cast<int>(surf.vertices.size());
        surf.vertices.push_back(apexes.endo);
        const int apex_epi = static_cast<int>(surf.vertices.size());
        surf.vertices.push_back(apexes.epi);
        for (int a = 0; a < n; ++a) {
            surf.triangles.push_back({endo_at(levels - 1, a), endo_at(levels - 1, a + 1),
                                      apex_endo});
            surf.region.push_back(SurfaceRegion::ApexCap);
            surf.triangles.push_back({epi_at(levels - 1, a), apex_epi, epi_at(levels - 1, a + 1)});
            surf.region.push_back(SurfaceRegion::ApexCap);
        }
    } else {
        add_strip([&](int a) { return endo_at(levels - 1, a); },
                  [&](int a) { return epi_at(levels - 1, a); }, SurfaceRegion::ApexCap, false);
    }

    // Normalize global orientation: enclosed volume must be positive.
    if (surf.enclosed_volume() < 0.0)
        for (auto& t : surf.triangles) std::swap(t[1], t[2]);
    return surf;
}

double LvMesh::total_volume() const {
    double acc = 0.0;
    for (const auto& t : tets)
        acc += tet_volume(nodes[t[0]], nodes[t[1]], nodes[t[2]], nodes[t[3]]);
    return acc;
}

std::vector<std::array<int, 3>> LvMesh::boundary_faces() const {
    // Faces of tet (a,b,c,d) oriented outward for a positive-volume tet.
    static const int kFace[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};
    std::map<std::array<int, 3>, std::pair<int, std::array<int, 3>>> faces;
    for (const auto& t : tets)
        for (const auto& f : kFace) {
            std::array<int, 3> tri = {t[f[0]], t[f[1]], t[f[2]]};
            std::array<int, 3> key = tri;
            std::sort(key.begin(), key.end());
            auto it = faces.find(key);
            if (it == faces.end()) faces[key] = {1, tri};
            else ++it->second.first;
        }
    std::vector<std::array<int, 3>> out;
    for (const auto& [key, entry] : faces)
        if (entry.first == 1) out.push_back(entry.second);
    return out;
}

double LvMesh::boundary_volume() const {
    double acc = 0.0;
    for (const auto& t : boundary_faces())
        acc += nodes[t[0]].cross(nodes[t[1]]).dot(nodes[t[2]]) / 6.0;
    return acc;
}

void LvMesh::validate() const {
    for (std::size_t i = 0; i < tets.size(); ++i) {
        const auto& t = tets[i];
        const double v = tet_volume(nodes[t[0]], nodes[t[1]], nodes[t[2]], nodes[t[3]]);
        if (!(v >= 1e-6))
            throw MeshError("non-positive tet volume at element " + std::to_string(i));
    }
    // Duplicate-node scan on a rounded spatial hash.
    std::unordered_map<std::uint64_t, std::vector<int>> buckets;
    auto key_of = [](const Vec3& p) {
        const auto q = [](double x) {
            return static_cast<std::uint64_t>(static_cast<std::int64_t>(std::llround(x * 1e6)));
        };
        std::uint64_t h = q(p.x()) * 0x9E3779B97F4A7C15ull;
        h ^= q(p.y()) * 0xC2B2AE3D27D4EB4Full + (h << 6);
        h ^= q(p.z()) * 0x165667B19E3779F9ull + (h >> 3);
        return h;
    };
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        auto& bucket = buckets[key_of(nodes[i])];
        for (int j : bucket)
            if ((nodes[i] - nodes[j]).norm() < 1e-9)
                throw MeshError("duplicate nodes " + std::to_string(j) + " and " +
                                std::to_string(i));
        bucket.push_back(static_cast<int>(i));
    }
    // Single connected component over shared nodes.
    if (!tets.empty()) {
        std::vector<std::vector<int>> node_tets(nodes.size());
        for (std::size_t i = 0; i < tets.size(); ++i)
            for (int v : tets[i]) node_tets[v].push_back(static_cast<int>(i));
        std::vector<char> seen(tets.size(), 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        std::size_t visited = 1;
        while (!stack.empty()) {
            const int t = stack.back();
            stack.pop_back();
            for (int v : tets[t])
                for (int u : node_tets[v])
                    if (!seen[u]) {
                        seen[u] = 1;
                        ++visited;
                        stack.push_back(u);
                    }
        }
        if (visited != tets.size())
            throw MeshError("mesh is not a single connected component");
    }
}

LvMesh tetrahedralize(const std::vector<std::vector<Vec3>>& endo_rings,
                      const std::vector<std::vector<Vec3>>& epi_rings, int layers,
                      ApexClosure apex) {
    check_ring_stack(endo_rings, epi_rings);
    if (layers < 1) throw MeshError("transmural layer count must be >= 1");
    const int n = static_cast<int>(endo_rings.front().size());
    const int levels = static_cast<int>(endo_rings.size());
    const int shells = layers + 1;

    LvMesh mesh;
    auto node_at = [&](int level, int shell, int a) {
        return (level * shells + shell) * n + (a % n);
    };
    for (int l = 0; l < levels; ++l)
        for (int s = 0; s < shells; ++s) {
            const double alpha = static_cast<double>(s) / layers;
            for (int a = 0; a < n; ++a) {
                mesh.nodes.push_back((1.0 - alpha) * endo_rings[l][a] + alpha * epi_rings[l][a]);
                mesh.node_tags.push_back(s == 0 ? NodeTag::EndoSurface
                                       : s == layers ? NodeTag::EpiSurface : NodeTag::Interior);
                mesh.ring_level.push_back(l);
                mesh.shell_layer.push_back(s);
            }
        }

    // Hex corners in a right-handed local frame: x = angular (CCW), y = shell
    // (outward), z = level (toward apex).
    auto corner = [&](int l, int s, int a, int code) {
        const int dx = code & 1, dy = (code >> 1) & 1, dz = (code >> 2) & 1;
        return node_at(l + dz, s + dy, a + dx);
    };
    for (int l = 0; l + 1 < levels; ++l)
        for (int s = 0; s < layers; ++s)
            for (int a = 0; a < n; ++a)
                for (const auto& split : hex_to_tets()) {
                    std::array<int, 4> t = {corner(l, s, a, split[0]), corner(l, s, a, split[1]),
                                            corner(l, s, a, split[2]), corner(l, s, a, split[3])};
                    const double v =
                        tet_volume(mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]],
                                   mesh.nodes[t[3]]);
                    if (!(v > 0.0))
                        throw MeshError("non-positive tet volume in cell level=" +
                                        std::to_string(l) + " shell=" + std::to_string(s) +
                                        " angle=" + std::to_string(a));
                    mesh.tets.push_back(t);
                }

    if (use_fan_closure(endo_rings, apex)) {
        // Apex plug: per-shell axis nodes, wedges between the last ring level and
        // the axis, each wedge coned from its centroid (consistent shared faces).
        const ApexPoints apexes = apex_points(endo_rings, epi_rings);
        const Vec3 apex_endo = apexes.endo;
        const Vec3 apex_epi = apexes.epi;
        std::vector<int> axis(shells);
        for (int s = 0; s < shells; ++s) {
            const double alpha = static_cast<double>(s) / layers;
            axis[s] = static_cast<int>(mesh.nodes.size());
            mesh.nodes.push_back((1.0 - alpha) * apex_endo + alpha * apex_epi);
            mesh.node_tags.push_back(s == 0 ? NodeTag::EndoSurface
                                   : s == layers ? NodeTag::EpiSurface : NodeTag::Interior);
            mesh.ring_level.push_back(-1);
            mesh.shell_layer.push_back(s);
        }
        const int last = levels - 1;
        auto add_cone = [&](int center, std::array<int, 3> f) {
            std::array<int, 4> t = {f[0], f[1], f[2], center};
            if (tet_volume(mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]],
                           mesh.nodes[t[3]]) < 0.0)
                std::swap(t[1], t[2]);
            mesh.tets.push_back(t);
        };
        for (int s = 0; s < layers; ++s)
            for (int a = 0; a < n; ++a) {
                const int q00 = node_at(last, s, a), q01 = node_at(last, s, a + 1);
                const int q10 = node_at(last, s + 1, a), q11 = node_at(last, s + 1, a + 1);
                const int e0 = axis[s], e1 = axis[s + 1];
                const int center = static_cast<int>(mesh.nodes.size());
                mesh.nodes.push_back((mesh.nodes[q00] + mesh.nodes[q01] + mesh.nodes[q10] +
                                      mesh.nodes[q11] + mesh.nodes[e0] + mesh.nodes[e1]) / 6.0);
                mesh.node_tags.push_back(NodeTag::Interior);
                mesh.ring_level.push_back(-1);
                mesh.shell_layer.push_back(-1);
                // Ring quad: diagonal q00-q11 matches the hex level-face rule.
                add_cone(center, {q00, q01, q11});
                add_cone(center, {q00, q11, q10});
                // Side quads: diagonal from the smallest global node index.
                auto split_quad = [&](std::array<int, 4> q) {  // cyclic corner order
                    const int m = static_cast<int>(std::min_element(q.begin(), q.end()) -
                                                   q.begin());
                    add_cone(center, {q[m], q[(m + 1) % 4], q[(m + 2) % 4]});
                    add_cone(center, {q[m], q[(m + 2) % 4], q[(m + 3) % 4]});
                };
                split_quad({q00, q10, e1, e0});
                split_quad({q01, q11, e1, e0});
                // Shell caps.
                add_cone(center, {q00, q01, e0});
                add_cone(center, {q10, q11, e1});
            }
    }

    mesh.aha_segment.assign(mesh.tets.size(), 0);
    mesh.validate();
    return mesh;
}

MeshQualityReport mesh_quality(const LvMesh& mesh) {
    MeshQualityReport rep;
    rep.tet_count = static_cast<int>(mesh.tets.size());
    if (mesh.tets.empty()) return rep;

    rep.min_volume = std::numeric_limits<double>::infinity();
    rep.min_dihedral_deg = std::numeric_limits<double>::infinity();
    double vol_sum = 0.0;
    static const int kFace[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};
    for (const auto& t : mesh.tets) {
        const Vec3 p[4] = {mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]], mesh.nodes[t[3]]};
        const double v = tet_volume(p[0], p[1], p[2], p[3]);
        vol_sum += v;
        rep.min_volume = std::min(rep.min_volume, v);

        Vec3 normals[4];
        double face_area_sum = 0.0;
        for (int f = 0; f < 4; ++f) {
            const Vec3 n = (p[kFace[f][1]] - p[kFace[f][0]]).cross(p[kFace[f][2]] - p[kFace[f][0]]);
            normals[f] = n.normalized();
            face_area_sum += 0.5 * n.norm();
        }
        for (int f = 0; f < 4; ++f)
            for (int g = f + 1; g < 4; ++g) {
                const double c = std::clamp(-normals[f].dot(normals[g]), -1.0, 1.0);
                rep.min_dihedral_deg = std::min(rep.min_dihedral_deg, std::acos(c) * 180.0 / M_PI);
            }

        double longest = 0.0;
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j) longest = std::max(longest, (p[i] - p[j]).norm());
        const double r_in = 3.0 * v / face_area_sum;
        const double aspect = longest / (2.0 * std::sqrt(6.0) * r_in);
        const double edges[] = {1.5, 2.0, 3.0, 5.0, 10.0};
        int bin = 5;
        for (int b = 0; b < 5; ++b)
            if (aspect < edges[b]) { bin = b; break; }
        ++rep.aspect_histogram[bin];
    }
    rep.mean_volume = vol_sum / rep.tet_count;
    return rep;
}

std::string MeshQualityReport::summary() const {
    std::ostringstream os;
    os << "tets=" << tet_count << " min_vol=" << min_volume << " mean_vol=" << mean_volume
       << " min_dihedral_deg=" << min_dihedral_deg << " aspect_hist=[";
    for (std::size_t i = 0; i < aspect_histogram.size(); ++i)
        os << (i ? "," : "") << aspect_histogram[i];
    os << "]";
    return os.str();
}

}  // namespace strainforge
