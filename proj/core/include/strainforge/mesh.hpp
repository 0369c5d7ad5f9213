// Surface lofting and transmural tetrahedral meshing from stacked endo/epi
// contour rings. The lattice interpolates linearly between endo and epi in
// `layers+1` shells; each hexahedral cell splits into 6 tets with a
// translation-invariant diagonal rule so shared faces conform, including
// across the angular seam.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "strainforge/types.hpp"

namespace strainforge {

enum class SurfaceRegion : std::uint8_t { Endo, Epi, BaseCap, ApexCap };

struct TriSurface {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<SurfaceRegion> region;  // per triangle

    double area() const;
    double enclosed_volume() const;       // divergence theorem, outward orientation
    int boundary_edge_count() const;      // 0 for a watertight surface
    int euler_characteristic() const;     // V - E + F
};

enum class NodeTag : std::uint8_t { EndoSurface, EpiSurface, Interior, External };

struct LvMesh {
    std::vector<Vec3> nodes;
    std::vector<std::array<int, 4>> tets;
    std::vector<NodeTag> node_tags;
    std::vector<int> ring_level;    // per node; -1 for apex-structure/external nodes
    std::vector<int> shell_layer;   // per node; -1 where not applicable
    std::vector<int> aha_segment;   // per tet; 0 until assigned

    double total_volume() const;
    double boundary_volume() const;  // via boundary-face divergence theorem
    std::vector<std::array<int, 3>> boundary_faces() const;  // outward-oriented
    void validate() const;
};

enum class ApexClosure {
    Auto,     // fan when the apical endo ring has shrunk below half the basal radius
    Annular,  // flat annular strip (open-tube geometries)
    Fan,      // centroid fan offset half the last inter-ring spacing apically
};

double tet_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);

// The 6-tet decomposition of a hex cell; corner k encodes local offsets
// (x = k&1, y = (k>>1)&1, z = (k>>2)&1). All tets positively oriented for a
// right-handed corner frame.
const std::array<std::array<int, 4>, 6>& hex_to_tets();

TriSurface loft_surface(const std::vector<std::vector<Vec3>>& endo_rings,
                        const std::vector<std::vector<Vec3>>& epi_rings,
                        ApexClosure apex = ApexClosure::Auto);

LvMesh tetrahedralize(const std::vector<std::vector<Vec3>>& endo_rings,
                      const std::vector<std::vector<Vec3>>& epi_rings, int layers,
                      ApexClosure apex = ApexClosure::Auto);

struct MeshQualityReport {
    double min_volume = 0.0;
    double mean_volume = 0.0;
    double min_dihedral_deg = 0.0;
    // Aspect-ratio histogram over bins [1,1.5), [1.5,2), [2,3), [3,5), [5,10), [10,inf).
    std::array<int, 6> aspect_histogram{};
    int tet_count = 0;

    std::string summary() const;
};

MeshQualityReport mesh_quality(const LvMesh& mesh);

}  // namespace strainforge
