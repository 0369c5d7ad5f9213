// Analytic deforming-annulus phantoms: cylindrical motion maps with
// longitudinal stretch, cavity-radius waveforms, torsion, rigid rotation and
// translation; synthetic study bundles sampled from them; and ground-truth
// strain by central finite differences of the motion map (independent of the
// finite-element path).
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "strainforge/image.hpp"
#include "strainforge/study.hpp"
#include "strainforge/types.hpp"

namespace strainforge {

struct AnnulusPhantom {
    double ri = 25.0;      // reference inner radius, mm
    double ro = 35.0;      // reference outer radius, mm
    double height = 80.0;  // mm; apex at z = 0, base at z = height

    // Per-frame waveforms; all identity at frame 0.
    std::vector<double> lambda_z;  // longitudinal stretch
    std::vector<double> ri_prime;  // deformed inner radius, mm
    std::vector<double> tau;       // torsion rate, rad/mm
    std::vector<double> rot;       // rigid rotation about the axis, rad
    std::vector<Vec3> shift;       // rigid translation, mm

    int frames() const { return static_cast<int>(lambda_z.size()); }
    void validate() const;

    // Uniform-waveform phantom: identity at every frame.
    static AnnulusPhantom identity(int frames);
};

// Presets: "incompressible" (volume-preserving coupling, in-plane dilation),
// "contractile" (cavity shrink with positive Err / negative Ecc; longitudinal
// shortening peaks earlier in the cycle than the in-plane peak),
// "rigid" (10 deg/frame rotation + 5 mm/frame translation), "translate".
AnnulusPhantom phantom_preset(const std::string& name, int frames = 30);

// Deformed position of reference point p at frame t. Throws when p lies
// outside the annulus wall.
Vec3 motion_map(const AnnulusPhantom& ph, const Vec3& p, int t);

// Ground-truth deformation gradient by central finite differences
// (h = 1e-4 mm) and the strain it induces. Requires a 2h interior margin.
Mat3 analytic_deformation_gradient(const AnnulusPhantom& ph, const Vec3& p, int t);
Mat3 analytic_strain(const AnnulusPhantom& ph, const Vec3& p, int t);

struct ViewLayout {
    int sax_slices = 9;
    int contour_points = 32;        // per SAX circle
    int lax_points_per_limb = 24;   // per wall limb of a LAX contour
    double pixel_spacing = 1.0;     // mm
    int grid = 160;                 // nominal rows = cols
    bool four_chamber = true;
    bool two_chamber = true;
};

// Synthesizes a tracked study: exact circular contours on SAX planes, wall
// limbs on the two LAX planes, per-frame in-plane projections of the motion
// map as pixel displacements.
Study sample_views(const AnnulusPhantom& ph, const ViewLayout& layout);

// Per-frame analytic wall means (volume-weighted over the thickness) of
// Err/Ecc/Ell at mid height, from the finite-difference oracle.
struct OracleRow {
    int frame = 0;
    Vec3 wall_mean = Vec3::Zero();   // (Err, Ecc, Ell)
    Vec3 mid_wall = Vec3::Zero();    // point values at r = (ri+ro)/2
};
std::vector<OracleRow> oracle_table(const AnnulusPhantom& ph);

// Writes study.json, oracle.csv and preset.json into bundle_dir.
void write_phantom_bundle(const AnnulusPhantom& ph, const ViewLayout& layout,
                          const std::string& preset_name,
                          const std::filesystem::path& bundle_dir);

// Smooth random-blob texture restricted to an annulus band, evaluated
// analytically at pixel centers shifted by `shift` (pixels). Used to exercise
// the registration module with a known ground-truth translation.
Image2D textured_annulus_image(int width, int height, const Vec2& center_rc, double ri, double ro,
                               const Vec2& shift_rc = Vec2::Zero(), unsigned seed = 20240901);

}  // namespace strainforge
