#include "strainforge/vtk_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace strainforge {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_vtk(const LvMesh& mesh, const std::filesystem::path& path, const std::string& title,
               const VtkFields* fields) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << mesh.nodes.size() << " double\n";
    for (const auto& p : mesh.nodes)
        out << fmt(p.x()) << " " << fmt(p.y()) << " " << fmt(p.z()) << "\n";
    out << "CELLS " << mesh.tets.size() << " " << mesh.tets.size() * 5 << "\n";
    for (const auto& t : mesh.tets)
        out << "4 " << t[0] << " " << t[1] << " " << t[2] << " " << t[3] << "\n";
    out << "CELL_TYPES " << mesh.tets.size() << "\n";
    for (std::size_t i = 0; i < mesh.tets.size(); ++i) out << "10\n";

    if (fields && (!fields->point_vectors.empty() || !fields->point_scalars.empty())) {
        out << "POINT_DATA " << mesh.nodes.size() << "\n";
        for (const auto& [name, vecs] : fields->point_vectors) {
            if (vecs.size() != mesh.nodes.size())
                throw ValidationError("point vector field '" + name + "' has wrong length");
            out << "VECTORS " << name << " double\n";
            for (const auto& v : vecs)
                out << fmt(v.x()) << " " << fmt(v.y()) << " " << fmt(v.z()) << "\n";
        }
        for (const auto& [name, vals] : fields->point_scalars) {
            if (vals.size() != mesh.nodes.size())
                throw ValidationError("point scalar field '" + name + "' has wrong length");
            out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
            for (double v : vals) out << fmt(v) << "\n";
        }
    }
    if (fields && !fields->cell_scalars.empty()) {
        out << "CELL_DATA " << mesh.tets.size() << "\n";
        for (const auto& [name, vals] : fields->cell_scalars) {
            if (vals.size() != mesh.tets.size())
                throw ValidationError("cell scalar field '" + name + "' has wrong length");
            out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
            for (double v : vals) out << fmt(v) << "\n";
        }
    }
}

namespace {

class Tokens {
public:
    explicit Tokens(const std::filesystem::path& path) : path_(path), in_(path) {
        if (!in_) throw IoError("cannot open " + path.string());
    }

    std::string next() {
        std::string t;
        if (!(in_ >> t)) throw IoError(path_.string() + ": truncated VTK file");
        return t;
    }
    double next_double() {
        double v;
        if (!(in_ >> v)) throw IoError(path_.string() + ": expected a number");
        return v;
    }
    long next_int() {
        long v;
        if (!(in_ >> v)) throw IoError(path_.string() + ": expected an integer");
        return v;
    }
    bool try_next(std::string& t) { return static_cast<bool>(in_ >> t); }
    void skip_line() { in_.ignore(std::numeric_limits<std::streamsize>::max(), '\n'); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::ifstream in_;
};

}  // namespace

VtkDataset read_vtk(const std::filesystem::path& path) {
    Tokens tok(path);
    tok.skip_line();  // "# vtk DataFile Version x"
    tok.skip_line();  // title
    const std::string format = tok.next();
    if (format != "ASCII") throw IoError(path.string() + ": only ASCII VTK is supported");
    if (tok.next() != "DATASET" || tok.next() != "UNSTRUCTURED_GRID")
        throw IoError(path.string() + ": expected DATASET UNSTRUCTURED_GRID");

    VtkDataset ds;
    if (tok.next() != "POINTS") throw IoError(path.string() + ": expected POINTS");
    const long n_points = tok.next_int();
    tok.next();  // dtype
    ds.mesh.nodes.reserve(n_points);
    for (long i = 0; i < n_points; ++i) {
        const double x = tok.next_double();
        const double y = tok.next_double();
        const double z = tok.next_double();
        ds.mesh.nodes.emplace_back(x, y, z);
    }
    if (tok.next() != "CELLS") throw IoError(path.string() + ": expected CELLS");
    const long n_cells = tok.next_int();
    tok.next_int();  // total index count
    for (long i = 0; i < n_cells; ++i) {
        const long k = tok.next_int();
        if (k != 4)
            throw ValidationError(path.string() + ": unsupported cell with " + std::to_string(k) +
                                  " vertices (only tetrahedra)");
        std::array<int, 4> t;
        for (int j = 0; j < 4; ++j) {
            const long v = tok.next_int();
            if (v < 0 || v >= n_points)
                throw ValidationError(path.string() + ": cell vertex index out of range");
            t[j] = static_cast<int>(v);
        }
        ds.mesh.tets.push_back(t);
    }
    if (tok.next() != "CELL_TYPES") throw IoError(path.string() + ": expected CELL_TYPES");
    const long n_types = tok.next_int();
    if (n_types != n_cells) throw ValidationError(path.string() + ": CELL_TYPES count mismatch");
    for (long i = 0; i < n_types; ++i)
        if (tok.next_int() != 10)
            throw ValidationError(path.string() + ": unsupported cell type (only VTK_TETRA)");

    // Optional data sections.
    std::string word;
    long point_n = 0, cell_n = 0;
    enum class Section { None, Point, Cell } section = Section::None;
    while (tok.try_next(word)) {
        if (word == "POINT_DATA") {
            point_n = tok.next_int();
            if (point_n != n_points)
                throw ValidationError(path.string() + ": POINT_DATA count mismatch");
            section = Section::Point;
        } else if (word == "CELL_DATA") {
            cell_n = tok.next_int();
            if (cell_n != n_cells)
                throw ValidationError(path.string() + ": CELL_DATA count mismatch");
            section = Section::Cell;
        } else if (word == "VECTORS") {
            const std::string name = tok.next();
            tok.next();  // dtype
            if (section != Section::Point)
                throw ValidationError(path.string() + ": VECTORS outside POINT_DATA");
            std::vector<Vec3> vecs;
            vecs.reserve(point_n);
            for (long i = 0; i < point_n; ++i) {
                const double x = tok.next_double();
                const double y = tok.next_double();
                const double z = tok.next_double();
                vecs.emplace_back(x, y, z);
            }
            ds.fields.point_vectors.emplace_back(name, std::move(vecs));
        } else if (word == "SCALARS") {
            const std::string name = tok.next();
            tok.next();  // dtype
            tok.next();  // component count
            const std::string lut = tok.next();
            if (lut != "LOOKUP_TABLE") throw IoError(path.string() + ": expected LOOKUP_TABLE");
            tok.next();  // table name
            const long n = section == Section::Point ? point_n : cell_n;
            if (section == Section::None)
                throw ValidationError(path.string() + ": SCALARS outside a data section");
            std::vector<double> vals;
            vals.reserve(n);
            for (long i = 0; i < n; ++i) vals.push_back(tok.next_double());
            if (section == Section::Point) ds.fields.point_scalars.emplace_back(name, std::move(vals));
            else ds.fields.cell_scalars.emplace_back(name, std::move(vals));
        } else {
            throw IoError(path.string() + ": unexpected token '" + word + "'");
        }
    }

    ds.mesh.node_tags.assign(ds.mesh.nodes.size(), NodeTag::External);
    ds.mesh.ring_level.assign(ds.mesh.nodes.size(), -1);
    ds.mesh.shell_layer.assign(ds.mesh.nodes.size(), -1);
    ds.mesh.aha_segment.assign(ds.mesh.tets.size(), 0);
    return ds;
}

LvMesh load_external_mesh(const std::filesystem::path& path, std::vector<std::string>* warnings) {
    VtkDataset ds = read_vtk(path);
    for (std::size_t i = 0; i < ds.mesh.tets.size(); ++i) {
        auto& t = ds.mesh.tets[i];
        const double v = tet_volume(ds.mesh.nodes[t[0]], ds.mesh.nodes[t[1]], ds.mesh.nodes[t[2]],
                                    ds.mesh.nodes[t[3]]);
        if (v < 0.0) {
            std::swap(t[2], t[3]);
            if (warnings)
                warnings->push_back("reoriented inverted tet " + std::to_string(i) + " in " +
                                    path.filename().string());
        }
    }
    ds.mesh.validate();
    return ds.mesh;
}

}  // namespace strainforge
