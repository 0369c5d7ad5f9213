// strainforge command line: phantom generation, image tracking, and the
// reconstruct/fuse/strain/report pipeline over study bundles.
//
// Exit codes: 0 ok, 2 validation error, 3 numeric error, 4 I/O error.
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "strainforge/ffd.hpp"
#include "strainforge/image.hpp"
#include "strainforge/phantom.hpp"
#include "strainforge/pipeline.hpp"
#include "strainforge/study.hpp"

namespace fs = std::filesystem;
using strainforge::PipelineConfig;
using ordered_json = nlohmann::ordered_json;

namespace {

void print_error(const std::string& stage, const std::string& kind, const std::string& message) {
    ordered_json err;
    err["error"] = {{"stage", stage}, {"type", kind}, {"message", message}};
    std::cerr << err.dump() << "\n";
}

int run_guarded(const std::string& stage, const std::function<int()>& body) {
    try {
        return body();
    } catch (const strainforge::StageError& e) {
        print_error(e.stage, e.kind, e.what());
        return e.exit_code;
    } catch (const strainforge::ValidationError& e) {
        print_error(stage, "validation", e.what());
        return 2;
    } catch (const strainforge::NumericError& e) {
        print_error(stage, "numeric", e.what());
        return 3;
    } catch (const strainforge::IoError& e) {
        print_error(stage, "io", e.what());
        return 4;
    } catch (const std::exception& e) {
        print_error(stage, "internal", e.what());
        return 1;
    }
}

// Shared pipeline options; values given on the command line win over the
// config file.
struct ConfigCli {
    std::string config_file;
    PipelineConfig config;

    void attach(CLI::App* cmd, bool need_bundle) {
        cmd->add_option("--config", config_file, "JSON config file");
        auto* b = cmd->add_option("--bundle", config.bundle, "study bundle directory");
        if (need_bundle) b->check(CLI::ExistingDirectory);
        cmd->add_option("--out", config.out, "output directory");
        cmd->add_option("--ring-samples", config.ring_samples, "samples per SAX ring");
        cmd->add_option("--lax-samples", config.lax_samples, "samples per LAX curve");
        cmd->add_option("--layers", config.layers, "transmural layers");
        cmd->add_option("--alpha", config.alpha, "registration regularization weight");
        cmd->add_option("--levels", config.levels, "registration pyramid levels");
        cmd->add_option("--weighting", config.weighting, "global|per_point");
        cmd->add_option("--extrapolation", config.extrapolation, "nearest");
        cmd->add_option("--theta0", config.theta0_deg, "AHA reference angle (degrees)");
        cmd->add_option("--apex", config.apex, "auto|annular|fan");
        cmd->add_flag("--no-align,!--align", config.align_peaks, "peak-time alignment");
        cmd->add_flag("--no-smooth,!--smooth", config.smooth_tracks, "trajectory smoothing");
    }

    // CLI11 parsed values overwrite defaults already; file values fill the
    // rest. Re-apply command line by parsing file first into a fresh config.
    PipelineConfig resolve(CLI::App* cmd) {
        if (config_file.empty()) return config;
        PipelineConfig merged;
        std::ifstream in(config_file);
        if (!in) throw strainforge::IoError("cannot open config " + config_file);
        ordered_json doc;
        try {
            in >> doc;
        } catch (const nlohmann::json::exception& e) {
            throw strainforge::ValidationError("config: " + std::string(e.what()));
        }
        merged.apply_json(doc);
        // Flags given explicitly on the command line override the file.
        auto visit = [&](const std::string& name, auto member) {
            if (cmd->count(name) > 0) merged.*member = config.*member;
        };
        visit("--bundle", &PipelineConfig::bundle);
        visit("--out", &PipelineConfig::out);
        visit("--ring-samples", &PipelineConfig::ring_samples);
        visit("--lax-samples", &PipelineConfig::lax_samples);
        visit("--layers", &PipelineConfig::layers);
        visit("--alpha", &PipelineConfig::alpha);
        visit("--levels", &PipelineConfig::levels);
        visit("--weighting", &PipelineConfig::weighting);
        visit("--extrapolation", &PipelineConfig::extrapolation);
        visit("--theta0", &PipelineConfig::theta0_deg);
        visit("--apex", &PipelineConfig::apex);
        if (cmd->count("--no-align") || cmd->count("--align"))
            merged.align_peaks = config.align_peaks;
        if (cmd->count("--no-smooth") || cmd->count("--smooth"))
            merged.smooth_tracks = config.smooth_tracks;
        return merged;
    }
};

std::vector<fs::path> list_images(const fs::path& dir) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto ext = entry.path().extension().string();
        if (ext == ".pgm" || ext == ".f32grid") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"strainforge: multi-view 2D tracking to 3D myocardial strain"};
    app.require_subcommand(1);

    // phantom
    auto* cmd_phantom = app.add_subcommand("phantom", "write an analytic phantom study bundle");
    std::string preset = "contractile";
    std::string phantom_out;
    int phantom_frames = 30;
    strainforge::ViewLayout layout;
    cmd_phantom->add_option("--preset", preset, "incompressible|contractile|rigid|translate");
    cmd_phantom->add_option("--out", phantom_out, "bundle directory")->required();
    cmd_phantom->add_option("--frames", phantom_frames, "frames per cycle");
    cmd_phantom->add_option("--sax-slices", layout.sax_slices, "SAX slice count");
    cmd_phantom->add_option("--contour-points", layout.contour_points, "points per SAX circle");
    cmd_phantom->add_option("--lax-limb-points", layout.lax_points_per_limb,
                            "points per LAX wall limb");

    // track
    auto* cmd_track = app.add_subcommand("track", "track seed points through an image sequence");
    std::string track_images, track_seeds, track_out;
    strainforge::RegistrationParams reg;
    cmd_track->add_option("--images", track_images, "directory of .pgm/.f32grid frames")
        ->required()
        ->check(CLI::ExistingDirectory);
    cmd_track->add_option("--seeds", track_seeds, "JSON file with {\"points\":[[r,c],...]}")
        ->required()
        ->check(CLI::ExistingFile);
    cmd_track->add_option("--out", track_out, "tracked.json output path")->required();
    cmd_track->add_option("--alpha", reg.alpha, "regularization weight");
    cmd_track->add_option("--levels", reg.pyramid_levels, "pyramid levels");
    cmd_track->add_option("--iterations", reg.max_iterations, "max iterations per level");
    cmd_track->add_option("--spacing", reg.control_spacing, "control spacing (pixels)");
    cmd_track->add_flag("--no-smooth,!--smooth", reg.temporal_smoothing,
                        "trajectory smoothing");

    // pipeline stages
    ConfigCli cli_run, cli_reconstruct, cli_fuse, cli_strain, cli_report;
    auto* cmd_run = app.add_subcommand("run", "full pipeline: reconstruct, fuse, strain, report");
    cli_run.attach(cmd_run, false);
    auto* cmd_reconstruct =
        app.add_subcommand("reconstruct", "bundle -> LV mesh + up-sampled cloud");
    cli_reconstruct.attach(cmd_reconstruct, false);
    auto* cmd_fuse = app.add_subcommand("fuse", "interpolate and fuse displacement fields");
    cli_fuse.attach(cmd_fuse, false);
    auto* cmd_strain = app.add_subcommand("strain", "per-element strain and AHA-16 curves");
    cli_strain.attach(cmd_strain, false);
    auto* cmd_report = app.add_subcommand("report", "QC summary and report.json");
    cli_report.attach(cmd_report, false);

    // cohort
    auto* cmd_cohort = app.add_subcommand("cohort", "mean +/- SD of global peaks across reports");
    std::vector<std::string> cohort_reports;
    std::string cohort_out;
    cmd_cohort->add_option("reports", cohort_reports, "report.json paths")->required();
    cmd_cohort->add_option("--out", cohort_out, "write cohort.json here");

    CLI11_PARSE(app, argc, argv);

    if (cmd_phantom->parsed()) {
        return run_guarded("phantom", [&] {
            const auto ph = strainforge::phantom_preset(preset, phantom_frames);
            fs::create_directories(phantom_out);
            strainforge::write_phantom_bundle(ph, layout, preset, phantom_out);
            std::cout << "wrote phantom bundle: " << phantom_out << "\n";
            return 0;
        });
    }

    if (cmd_track->parsed()) {
        return run_guarded("track", [&] {
            const auto files = list_images(track_images);
            if (files.size() < 2)
                throw strainforge::ValidationError("need >= 2 image frames in " + track_images);
            std::vector<strainforge::Image2D> frames;
            for (const auto& f : files) frames.push_back(strainforge::load_image(f));
            for (const auto& img : frames) img.validate();

            std::ifstream sin(track_seeds);
            ordered_json sdoc;
            try {
                sin >> sdoc;
            } catch (const nlohmann::json::exception& e) {
                throw strainforge::ValidationError("seeds: " + std::string(e.what()));
            }
            std::vector<strainforge::Vec2> seeds;
            for (const auto& jp : sdoc.at("points"))
                seeds.emplace_back(jp[0].get<double>(), jp[1].get<double>());

            const auto tracked = strainforge::track_sequence(frames, seeds, reg);
            ordered_json out;
            out["frames"] = frames.size();
            ordered_json pts = ordered_json::array();
            for (const auto& p : tracked.seeds) pts.push_back({p[0], p[1]});
            out["points"] = std::move(pts);
            ordered_json disp = ordered_json::array();
            for (const auto& frame : tracked.displacement) {
                ordered_json row = ordered_json::array();
                for (const auto& d : frame) row.push_back({d[0], d[1]});
                disp.push_back(std::move(row));
            }
            out["displacements"] = std::move(disp);
            out["left_domain"] = tracked.left_domain;
            std::ofstream os(track_out);
            if (!os) throw strainforge::IoError("cannot write " + track_out);
            os << out.dump(1) << "\n";
            std::cout << "tracked " << seeds.size() << " points over " << frames.size()
                      << " frames -> " << track_out << "\n";
            return 0;
        });
    }

    auto stage_entry = [&](const std::string& name, ConfigCli& cli, CLI::App* cmd,
                           const std::function<void(const PipelineConfig&)>& fn) {
        return run_guarded(name, [&] {
            const PipelineConfig config = cli.resolve(cmd);
            fn(config);
            std::cout << name << ": ok (" << config.out.string() << ")\n";
            return 0;
        });
    };

    if (cmd_run->parsed()) {
        return run_guarded("run", [&] {
            const PipelineConfig config = cli_run.resolve(cmd_run);
            const ordered_json report = strainforge::run_pipeline(config);
            const auto& g = report.at("global_peaks");
            std::cout << "global peaks: Err=" << g.at("Err").get<double>()
                      << " Ecc=" << g.at("Ecc").get<double>()
                      << " Ell=" << g.at("Ell").get<double>()
                      << (report.at("qc").at("degraded").get<bool>() ? "  [degraded]" : "")
                      << "\n";
            return 0;
        });
    }
    if (cmd_reconstruct->parsed())
        return stage_entry("reconstruct", cli_reconstruct, cmd_reconstruct,
                           strainforge::stage_reconstruct);
    if (cmd_fuse->parsed()) return stage_entry("fuse", cli_fuse, cmd_fuse, strainforge::stage_fuse);
    if (cmd_strain->parsed())
        return stage_entry("strain", cli_strain, cmd_strain, strainforge::stage_strain);
    if (cmd_report->parsed())
        return stage_entry("report", cli_report, cmd_report,
                           [](const PipelineConfig& c) { strainforge::stage_report(c); });

    if (cmd_cohort->parsed()) {
        return run_guarded("cohort", [&] {
            std::vector<ordered_json> reports;
            for (const auto& path : cohort_reports) {
                std::ifstream in(path);
                if (!in) throw strainforge::IoError("cannot open " + path);
                ordered_json doc;
                try {
                    in >> doc;
                } catch (const nlohmann::json::exception& e) {
                    throw strainforge::ValidationError(path + ": " + std::string(e.what()));
                }
                reports.push_back(std::move(doc));
            }
            const auto summary = strainforge::cohort_summary(reports);
            ordered_json doc;
            doc["count"] = summary.count;
            doc["mean"] = {{"Err", summary.mean[0]}, {"Ecc", summary.mean[1]},
                           {"Ell", summary.mean[2]}};
            doc["sd"] = {{"Err", summary.sd[0]}, {"Ecc", summary.sd[1]}, {"Ell", summary.sd[2]}};
            std::cout << doc.dump(1) << "\n";
            if (!cohort_out.empty()) {
                std::ofstream os(cohort_out);
                if (!os) throw strainforge::IoError("cannot write " + cohort_out);
                os << doc.dump(1) << "\n";
            }
            return 0;
        });
    }
    return 0;
}
