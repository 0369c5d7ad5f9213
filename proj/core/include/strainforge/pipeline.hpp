// Pipeline orchestration: bundle -> LV-space clouds and mesh -> fused motion
// -> strain curves -> report, as four file-backed stages that can run
// standalone or chained. Identical configs and bundles produce byte-identical
// artifacts.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "strainforge/fusion.hpp"
#include "strainforge/mesh.hpp"
#include "strainforge/study.hpp"
#include "strainforge/types.hpp"

namespace strainforge {

struct PipelineConfig {
    std::filesystem::path bundle;
    std::filesystem::path out;
    int ring_samples = 64;   // samples per SAX ring
    int lax_samples = 64;    // samples per LAX curve
    int layers = 3;          // transmural layers
    double alpha = 0.01;     // registration regularization (track stage)
    int levels = 2;          // registration pyramid levels
    std::string weighting = "global";       // global | per_point
    std::string extrapolation = "nearest";  // nearest (the only bounded mode)
    double theta0_deg = 0.0;                // sector reference angle
    std::string apex = "auto";              // auto | annular | fan
    bool align_peaks = true;
    bool smooth_tracks = true;

    void validate() const;
    // Merges keys from a JSON config file; unknown keys are rejected.
    void apply_json(const nlohmann::ordered_json& doc);
    ApexClosure apex_mode() const;
};

// Wraps a module failure with the pipeline stage it occurred in.
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, std::string kind, const std::string& message, int exit_code)
        : std::runtime_error(message), stage(std::move(stage)), kind(std::move(kind)),
          exit_code(exit_code) {}
    std::string stage;
    std::string kind;  // validation | numeric | io
    int exit_code;
};

// Reconstruction products kept in memory when stages are chained in-process.
struct ReconstructResult {
    LvFrame frame;
    LvMesh mesh;
    StudyCloud cloud;
    std::vector<int> align_shifts;  // per view; empty when alignment was skipped
    bool alignment_applied = false;
    std::string alignment_note;
};

// Core transformations (also used by tests): bundle -> LV-space cloud + mesh.
ReconstructResult reconstruct_study(const Study& study, const PipelineConfig& config);

// File-backed stages; each reads its inputs from config.out (the bundle for
// reconstruct) and writes its artifacts there.
void stage_reconstruct(const PipelineConfig& config);
void stage_fuse(const PipelineConfig& config);
void stage_strain(const PipelineConfig& config);
nlohmann::ordered_json stage_report(const PipelineConfig& config);

// All four stages in sequence; returns the report document.
nlohmann::ordered_json run_pipeline(const PipelineConfig& config);

struct CohortSummary {
    Vec3 mean = Vec3::Zero();  // (Err, Ecc, Ell) global peaks
    Vec3 sd = Vec3::Zero();    // population standard deviation
    int count = 0;
};
CohortSummary cohort_summary(const std::vector<nlohmann::ordered_json>& reports);

// cloud.json round trip (stage interchange format).
void write_cloud(const StudyCloud& cloud, const LvFrame& frame,
                 const std::filesystem::path& path);
std::pair<StudyCloud, LvFrame> read_cloud(const std::filesystem::path& path);

}  // namespace strainforge
