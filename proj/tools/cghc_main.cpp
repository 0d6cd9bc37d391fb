// cghc: phase-only hologram compression experiments
// (synthesis, error diffusion, JPEG, CNN restoration, reconstruction, metrics)

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "cghc/config.hpp"
#include "cghc/error_diffusion.hpp"
#include "cghc/errors.hpp"
#include "cghc/fresnel.hpp"
#include "cghc/io.hpp"
#include "cghc/jpeg.hpp"
#include "cghc/metrics.hpp"
#include "cghc/pipeline.hpp"

namespace fs = std::filesystem;
using namespace cghc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitStage = 3;

struct GlobalOpts {
    std::string config_path;
    std::vector<std::string> sets;
    std::optional<uint64_t> seed;
    std::optional<std::string> out_dir;
    bool desk_scale = false;
};

ExperimentConfig resolve_config(const GlobalOpts& g) {
    ExperimentConfig cfg;
    if (!g.config_path.empty()) cfg = load_config(g.config_path);
    for (const auto& kv : g.sets) {
        const size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--set expects key=value, got: " + kv);
        apply_config_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (g.seed) cfg.seed = *g.seed;
    if (g.out_dir) cfg.out_dir = *g.out_dir;
    if (g.desk_scale) cfg.desk_scale = true;
    return cfg;
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"phase-only hologram compression pipeline"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config_path, "experiment config file (key = value)");
    app.add_option("--set", g.sets, "override a config key (key=value, repeatable)");
    uint64_t seed_opt = 0;
    auto* seed_flag = app.add_option("--seed", seed_opt, "override the experiment seed");
    std::string out_opt;
    auto* out_flag = app.add_option("--out", out_opt, "output directory");
    app.add_flag("--desk-scale", g.desk_scale, "force 256x256 holograms / 128x128 objects");

    // --- make-objects ---
    auto* mk = app.add_subcommand("make-objects", "write deterministic synthetic object images");
    int mk_count = 4;
    int mk_size = 0;
    std::string mk_dir;
    mk->add_option("--dir", mk_dir, "destination directory")->required();
    mk->add_option("--count", mk_count, "number of images");
    mk->add_option("--size", mk_size, "image side in pixels (default: config object size)");

    // --- generate ---
    auto* gen = app.add_subcommand("generate", "object image -> phase-only hologram artifacts");
    std::vector<std::string> gen_objects;
    gen->add_option("--object", gen_objects, "object image (PGM), repeatable")->required();

    // --- compress ---
    auto* comp = app.add_subcommand("compress", "JPEG-compress a quantized phase map");
    std::string comp_input, comp_output, comp_decoded;
    comp->add_option("--input", comp_input, "quantized phase map (PGM)")->required();
    comp->add_option("--output", comp_output, "JFIF output (default <stem>.jpg)");
    comp->add_option("--decoded", comp_decoded, "decoded output (default <stem>_decoded.pgm)");

    // --- train ---
    auto* tr = app.add_subcommand("train", "train the restoration model for one distance");
    double tr_distance = 0.0;
    bool tr_all_pairs = false;
    tr->add_option("--distance", tr_distance, "propagation distance in meters")->required();
    tr->add_flag("--all-pairs", tr_all_pairs,
                 "train on every clean/decoded pair (default: stems prefixed train_)");

    // --- restore ---
    auto* rs = app.add_subcommand("restore", "apply a trained model to a compressed phase map");
    std::string rs_model, rs_input, rs_output;
    rs->add_option("--model", rs_model, "model file (.arcn)")->required();
    rs->add_option("--input", rs_input, "compressed phase map (PGM)")->required();
    rs->add_option("--output", rs_output, "restored output (PGM)")->required();

    // --- reconstruct ---
    auto* rc = app.add_subcommand("reconstruct", "numerical reconstruction from a phase map");
    std::string rc_input, rc_output;
    double rc_distance = 0.0;
    int rc_crop = 0;
    rc->add_option("--input", rc_input, "phase map (.pgm quantized or .cghp)")->required();
    rc->add_option("--output", rc_output, "reconstruction image (PGM)")->required();
    rc->add_option("--distance", rc_distance, "propagation distance in meters");
    rc->add_option("--crop", rc_crop, "center crop side (default: config object size)");

    // --- evaluate ---
    auto* ev = app.add_subcommand("evaluate", "quality metrics for the test holograms");
    double ev_distance = 0.0;
    std::string ev_model;
    ev->add_option("--distance", ev_distance, "propagation distance in meters")->required();
    ev->add_option("--model", ev_model, "model file (default <out>/<zdir>/model.arcn)");

    // --- pipeline ---
    auto* pl = app.add_subcommand("pipeline", "full run: generate, compress, train, evaluate");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (seed_flag->count()) g.seed = seed_opt;
        if (out_flag->count()) g.out_dir = out_opt;
        ExperimentConfig cfg = resolve_config(g);

        if (mk->parsed()) {
            const int size = mk_size > 0 ? mk_size : cfg.object_px();
            fs::create_directories(mk_dir);
            for (int i = 0; i < mk_count; ++i) {
                char name[32];
                std::snprintf(name, sizeof(name), "obj_%02d.pgm", i);
                const Gray8Image img =
                    make_synthetic_object(size, cfg.seed + static_cast<uint64_t>(i));
                save_pgm(img, (fs::path(mk_dir) / name).string());
                std::cout << (fs::path(mk_dir) / name).string() << "\n";
            }
            return kExitOk;
        }

        if (gen->parsed()) {
            check_config(cfg);
            for (const auto& obj_path : gen_objects) {
                const Gray8Image object = load_pgm(obj_path);
                for (double z : cfg.distances) {
                    const auto out =
                        stage_generate(cfg, object, z, cfg.out_dir, stem_of(obj_path));
                    std::cout << out.phase_path << "\n" << out.clean_path << "\n";
                }
            }
            return kExitOk;
        }

        if (comp->parsed()) {
            const Gray8Image clean = load_pgm(comp_input);
            const JfifStream stream = jpeg_encode(clean, cfg.jpeg_quality);
            const Gray8Image decoded = jpeg_decode(stream);
            const std::string out_jpg =
                comp_output.empty() ? stem_of(comp_input) + ".jpg" : comp_output;
            const std::string out_dec =
                comp_decoded.empty() ? stem_of(comp_input) + "_decoded.pgm" : comp_decoded;
            save_jfif(stream, out_jpg);
            save_pgm(decoded, out_dec);
            const double ratio = compression_ratio(clean.data.size(), stream.size_bytes());
            std::cout << "raw_bytes,compressed_bytes,ratio\n"
                      << clean.data.size() << ',' << stream.size_bytes() << ','
                      << ratio << "\n";
            return kExitOk;
        }

        if (tr->parsed()) {
            check_config(cfg);
            const std::string zdir =
                (fs::path(cfg.out_dir) / distance_dir_name(tr_distance)).string();
            std::vector<std::string> stems;
            for (const auto& e : fs::directory_iterator(zdir + "/clean"))
                if (e.path().extension() == ".pgm") {
                    const std::string s = e.path().stem().string();
                    if (tr_all_pairs || s.rfind("train_", 0) == 0) stems.push_back(s);
                }
            std::sort(stems.begin(), stems.end());
            const auto out = stage_train(cfg, tr_distance, cfg.out_dir, stems);
            std::cout << out.model_path << "\n" << out.loss_csv_path << "\n";
            return kExitOk;
        }

        if (rs->parsed()) {
            const CnnModel model = load_model(rs_model);
            const Gray8Image input = load_pgm(rs_input);
            save_pgm(restore(model, input), rs_output);
            std::cout << rs_output << "\n";
            return kExitOk;
        }

        if (rc->parsed()) {
            const double z = rc_distance > 0 ? rc_distance : cfg.distances.at(0);
            OpticalConfig opt{cfg.wavelength, cfg.pitch, z};
            PhaseMap phase;
            if (fs::path(rc_input).extension() == ".cghp")
                phase = load_phase_map(rc_input);
            else
                phase = dequantize_phase(load_pgm(rc_input), cfg.pitch);
            const int crop = rc_crop > 0 ? rc_crop : cfg.object_px();
            bool degenerate = false;
            const Gray8Image recon = reconstruct(phase, opt, crop, crop, &degenerate);
            if (degenerate)
                std::cerr << "warning: flat reconstruction magnitude; output is all zero\n";
            save_pgm(recon, rc_output);
            std::cout << rc_output << "\n";
            return kExitOk;
        }

        if (ev->parsed()) {
            check_config(cfg);
            const std::string zdir =
                (fs::path(cfg.out_dir) / distance_dir_name(ev_distance)).string();
            const std::string model_path =
                ev_model.empty() ? zdir + "/model.arcn" : ev_model;
            const CnnModel model = load_model(model_path);
            std::vector<std::string> stems;
            for (const auto& e : fs::directory_iterator(zdir + "/clean"))
                if (e.path().extension() == ".pgm") {
                    const std::string s = e.path().stem().string();
                    if (s.rfind("test_", 0) == 0) stems.push_back(s);
                }
            std::sort(stems.begin(), stems.end());
            if (stems.empty()) throw IoError("no test_* holograms under " + zdir);
            std::cout << eval_csv_header() << "\n";
            for (const auto& stem : stems) {
                std::ifstream probe(zdir + "/jpeg/" + stem + ".jpg",
                                    std::ios::binary | std::ios::ate);
                if (!probe) throw IoError("missing compressed stream for " + stem);
                const Gray8Image clean = load_pgm(zdir + "/clean/" + stem + ".pgm");
                const double ratio = compression_ratio(
                    clean.data.size(), static_cast<size_t>(probe.tellg()));
                const EvalRow row =
                    stage_evaluate(cfg, model, ev_distance, cfg.out_dir, stem, ratio);
                std::cout << eval_csv_row(row) << "\n";
            }
            return kExitOk;
        }

        if (pl->parsed()) {
            const PipelineResult res = run_pipeline(cfg, &std::cout);
            std::cout << eval_csv_header() << "\n";
            for (const auto& r : res.rows) std::cout << eval_csv_row(r) << "\n";
            return kExitOk;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitStage;
    }
    return kExitOk;
}
