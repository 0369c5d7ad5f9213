// VTK legacy ASCII (DataFile 3.0) unstructured-grid reader/writer restricted
// to tetrahedral meshes, with optional point vectors/scalars and cell scalars.
// Output formatting is fixed (%.17g) so identical inputs reproduce identical
// bytes.
#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "strainforge/mesh.hpp"
#include "strainforge/types.hpp"

namespace strainforge {

struct VtkFields {
    std::vector<std::pair<std::string, std::vector<Vec3>>> point_vectors;
    std::vector<std::pair<std::string, std::vector<double>>> point_scalars;
    std::vector<std::pair<std::string, std::vector<double>>> cell_scalars;
};

void write_vtk(const LvMesh& mesh, const std::filesystem::path& path,
               const std::string& title = "strainforge mesh", const VtkFields* fields = nullptr);

struct VtkDataset {
    LvMesh mesh;
    VtkFields fields;
    std::vector<std::string> warnings;  // e.g. reoriented inverted tets
};

// Full parse including data arrays (used by the staged pipeline).
VtkDataset read_vtk(const std::filesystem::path& path);

// Mesh-only load with invariants checked; node tags are External. Inverted
// tets are fixed by a vertex swap and reported in `warnings` when given.
LvMesh load_external_mesh(const std::filesystem::path& path,
                          std::vector<std::string>* warnings = nullptr);

}  // namespace strainforge
