#include "cghc/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include "cghc/error_diffusion.hpp"
#include "cghc/errors.hpp"
#include "cghc/fresnel.hpp"
#include "cghc/io.hpp"
#include "cghc/jpeg.hpp"
#include "cghc/metrics.hpp"

namespace fs = std::filesystem;

namespace cghc {

namespace {

std::string join(const std::string& a, const std::string& b) {
    return (fs::path(a) / b).string();
}

void ensure_dir(const std::string& path) {
    std::error_code ec;
    fs::create_directories(path, ec);
    if (ec) throw IoError("cannot create directory: " + path);
}

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, v);
    return buf;
}

} // namespace

Gray8Image make_synthetic_object(int size, uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto uni = [&rng](double lo, double hi) {
        return lo + (hi - lo) * ((rng() >> 11) * 0x1.0p-53);
    };

    std::vector<double> img(static_cast<size_t>(size) * size);

    // smooth background ramp
    const double gx = uni(-0.3, 0.3), gy = uni(-0.3, 0.3), base = uni(0.3, 0.6);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
            img[static_cast<size_t>(y) * size + x] =
                base + gx * (x / double(size) - 0.5) + gy * (y / double(size) - 0.5);

    // soft-edged ellipses and rectangles
    const int nshapes = 8 + static_cast<int>(rng() % 6);
    for (int s = 0; s < nshapes; ++s) {
        const bool ellipse = rng() % 2 == 0;
        const double cx = uni(0.1, 0.9) * size;
        const double cy = uni(0.1, 0.9) * size;
        const double rx = uni(0.05, 0.25) * size;
        const double ry = uni(0.05, 0.25) * size;
        const double level = uni(0.0, 1.0);
        const double alpha = uni(0.5, 1.0);
        for (int y = 0; y < size; ++y)
            for (int x = 0; x < size; ++x) {
                const double u = (x - cx) / rx, v = (y - cy) / ry;
                const bool inside = ellipse ? (u * u + v * v <= 1.0)
                                            : (std::abs(u) <= 1.0 && std::abs(v) <= 1.0);
                if (inside) {
                    auto& p = img[static_cast<size_t>(y) * size + x];
                    p = (1.0 - alpha) * p + alpha * level;
                }
            }
    }

    // two box-blur passes soften edges
    for (int pass = 0; pass < 2; ++pass) {
        std::vector<double> tmp = img;
        for (int y = 1; y + 1 < size; ++y)
            for (int x = 1; x + 1 < size; ++x) {
                double acc = 0.0;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx)
                        acc += tmp[static_cast<size_t>(y + dy) * size + (x + dx)];
                img[static_cast<size_t>(y) * size + x] = acc / 9.0;
            }
    }

    double lo = img[0], hi = img[0];
    for (double v : img) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    Gray8Image out(size, size);
    const double scale = hi > lo ? 240.0 / (hi - lo) : 0.0;
    for (size_t i = 0; i < img.size(); ++i)
        out.data[i] = static_cast<uint8_t>(std::lround(8.0 + (img[i] - lo) * scale));
    return out;
}

std::string distance_dir_name(double z_m) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "z%04ldmm", std::lround(z_m * 1000.0));
    return buf;
}

std::string eval_csv_header() {
    return "object,distance_m,compression_ratio,psnr_compressed_db,ssim_compressed,"
           "psnr_restored_db,ssim_restored";
}

std::string eval_csv_row(const EvalRow& r) {
    std::ostringstream os;
    os << r.object << ',' << fmt("%.6g", r.distance_m) << ','
       << fmt("%.4f", r.compression_ratio) << ',' << fmt("%.4f", r.psnr_compressed_db)
       << ',' << fmt("%.6f", r.ssim_compressed) << ',' << fmt("%.4f", r.psnr_restored_db)
       << ',' << fmt("%.6f", r.ssim_restored);
    return os.str();
}

GenerateOutputs stage_generate(const ExperimentConfig& cfg, const Gray8Image& object,
                               double z, const std::string& out_dir,
                               const std::string& stem) {
    check_config(cfg);
    OpticalConfig opt{cfg.wavelength, cfg.pitch, z};
    const int canvas = cfg.hologram_px();

    const std::string zdir = join(out_dir, distance_dir_name(z));
    ensure_dir(join(zdir, "field"));
    ensure_dir(join(zdir, "phase"));
    ensure_dir(join(zdir, "clean"));

    const ComplexField holo = synthesize_hologram(object, opt, canvas, canvas);
    const PhaseMap phase = to_phase_only(holo, DiffusionKernel{}, cfg.scan_mode);
    const Gray8Image clean = quantize_phase(phase);

    GenerateOutputs out;
    out.field_path = join(zdir, "field/" + stem + ".cghf");
    out.phase_path = join(zdir, "phase/" + stem + ".cghp");
    out.clean_path = join(zdir, "clean/" + stem + ".pgm");
    save_field(holo, out.field_path);
    save_phase_map(phase, out.phase_path);
    save_pgm(clean, out.clean_path);
    return out;
}

CompressOutputs stage_compress(const ExperimentConfig& cfg,
                               const std::string& clean_pgm_path, double z,
                               const std::string& out_dir, const std::string& stem) {
    const Gray8Image clean = load_pgm(clean_pgm_path);
    const std::string zdir = join(out_dir, distance_dir_name(z));
    ensure_dir(join(zdir, "jpeg"));
    ensure_dir(join(zdir, "decoded"));

    const JfifStream stream = jpeg_encode(clean, cfg.jpeg_quality);
    const Gray8Image decoded = jpeg_decode(stream);

    CompressOutputs out;
    out.jpeg_path = join(zdir, "jpeg/" + stem + ".jpg");
    out.decoded_path = join(zdir, "decoded/" + stem + ".pgm");
    out.raw_bytes = clean.data.size();
    out.stream_bytes = stream.size_bytes();
    out.ratio = compression_ratio(out.raw_bytes, out.stream_bytes);
    save_jfif(stream, out.jpeg_path);
    save_pgm(decoded, out.decoded_path);
    return out;
}

TrainOutputs stage_train(const ExperimentConfig& cfg, double z,
                         const std::string& out_dir,
                         const std::vector<std::string>& stems) {
    if (stems.empty()) throw std::invalid_argument("train: empty dataset");
    const std::string zdir = join(out_dir, distance_dir_name(z));

    std::vector<PatchPair> pairs;
    for (const auto& stem : stems) {
        const Gray8Image decoded = load_pgm(join(zdir, "decoded/" + stem + ".pgm"));
        const Gray8Image clean = load_pgm(join(zdir, "clean/" + stem + ".pgm"));
        auto p = extract_patches(decoded, clean, cfg.patch_stride, cfg.augment);
        pairs.insert(pairs.end(), std::make_move_iterator(p.begin()),
                     std::make_move_iterator(p.end()));
    }

    CnnModel init = make_arcnn(z, cfg.seed, cfg.arcnn_c1, cfg.arcnn_c2, cfg.arcnn_c3,
                               cfg.init_std, cfg.init_std_last, cfg.identity_init);
    TrainConfig tc;
    tc.learning_rate = cfg.learning_rate;
    tc.momentum = cfg.momentum;
    tc.batch_size = cfg.batch_size;
    tc.iterations = cfg.iterations;
    tc.seed = cfg.seed;
    tc.val_size = cfg.val_size;
    tc.val_interval = cfg.val_interval;

    const TrainResult result = train(init, pairs, tc);

    TrainOutputs out;
    out.model_path = join(zdir, "model.arcn");
    out.loss_csv_path = join(zdir, "train_loss.csv");
    save_model(result.model, out.model_path);

    std::ofstream csv(out.loss_csv_path, std::ios::trunc);
    if (!csv) throw IoError("cannot open for write: " + out.loss_csv_path);
    csv << "iter,loss\n";
    for (size_t i = 0; i < result.loss_trace.size(); ++i)
        csv << (i + 1) << ',' << fmt("%.10g", result.loss_trace[i]) << '\n';
    return out;
}

EvalRow stage_evaluate(const ExperimentConfig& cfg, const CnnModel& model, double z,
                       const std::string& out_dir, const std::string& stem,
                       double ratio) {
    const std::string zdir = join(out_dir, distance_dir_name(z));
    ensure_dir(join(zdir, "restored"));
    ensure_dir(join(zdir, "recon"));

    if (std::abs(model.distance_tag - z) > 1e-9)
        std::fprintf(stderr,
                     "warning: model distance tag %g does not match evaluation distance %g\n",
                     model.distance_tag, z);

    const Gray8Image clean = load_pgm(join(zdir, "clean/" + stem + ".pgm"));
    const Gray8Image decoded = load_pgm(join(zdir, "decoded/" + stem + ".pgm"));
    const Gray8Image restored = restore(model, decoded);
    save_pgm(restored, join(zdir, "restored/" + stem + ".pgm"));

    OpticalConfig opt{cfg.wavelength, cfg.pitch, z};
    const int crop = cfg.object_px();
    auto recon_of = [&](const Gray8Image& g) {
        return reconstruct(dequantize_phase(g, cfg.pitch), opt, crop, crop);
    };
    const Gray8Image recon_clean = recon_of(clean);
    const Gray8Image recon_comp = recon_of(decoded);
    const Gray8Image recon_rest = recon_of(restored);
    save_pgm(recon_clean, join(zdir, "recon/" + stem + "_clean.pgm"));
    save_pgm(recon_comp, join(zdir, "recon/" + stem + "_compressed.pgm"));
    save_pgm(recon_rest, join(zdir, "recon/" + stem + "_restored.pgm"));

    EvalRow row;
    row.object = stem;
    row.distance_m = z;
    row.compression_ratio = ratio;
    row.psnr_compressed_db = psnr(recon_comp, recon_clean);
    row.ssim_compressed = ssim(recon_comp, recon_clean);
    row.psnr_restored_db = psnr(recon_rest, recon_clean);
    row.ssim_restored = ssim(recon_rest, recon_clean);
    return row;
}

namespace {

// ---- full-run orchestration with stage fingerprints ----

struct StageLog {
    std::vector<std::pair<std::string, double>> seconds;
};

std::vector<std::string> list_pgm_stems(const std::string& dir) {
    std::vector<std::string> stems;
    if (dir.empty()) return stems;
    if (!fs::is_directory(dir)) throw IoError("dataset directory missing: " + dir);
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".pgm")
            stems.push_back(e.path().stem().string());
    std::sort(stems.begin(), stems.end());
    if (stems.empty()) throw IoError("no .pgm objects in: " + dir);
    return stems;
}

uint64_t hash_string(const std::string& s, uint64_t h = 14695981039346656037ull) {
    return fnv1a64(s.data(), s.size(), h);
}

// Stamp file: fingerprint of (config, seed, inputs) plus output hashes.
// A stage is skipped when the fingerprint matches and every output is intact.
class StageCache {
public:
    StageCache(std::string stamp_dir, std::string root)
        : stamp_dir_(std::move(stamp_dir)), root_(std::move(root)) {
        ensure_dir(stamp_dir_);
    }

    bool is_valid(const std::string& stage, uint64_t fingerprint) const {
        std::ifstream is(stamp_path(stage));
        if (!is) return false;
        std::string tag;
        uint64_t fp = 0;
        if (!(is >> tag >> std::hex >> fp) || tag != "fingerprint") return false;
        if (fp != fingerprint) return false;
        std::string rel;
        uint64_t h;
        while (is >> tag >> rel >> std::hex >> h) {
            if (tag != "output") return false;
            const std::string full = join(root_, rel);
            if (!fs::is_regular_file(full)) return false;
            if (fnv1a64_file(full) != h) return false;
        }
        return true;
    }

    void record(const std::string& stage, uint64_t fingerprint,
                const std::vector<std::string>& rel_outputs) const {
        std::ofstream os(stamp_path(stage), std::ios::trunc);
        if (!os) throw IoError("cannot write stage stamp: " + stamp_path(stage));
        os << "fingerprint " << std::hex << fingerprint << '\n';
        for (const auto& rel : rel_outputs)
            os << "output " << rel << ' ' << std::hex << fnv1a64_file(join(root_, rel))
               << '\n';
    }

private:
    std::string stamp_path(const std::string& stage) const {
        return join(stamp_dir_, stage + ".stamp");
    }
    std::string stamp_dir_;
    std::string root_;
};

std::string rel_from(const std::string& root, const std::string& full) {
    return fs::relative(full, root).generic_string();
}

} // namespace

PipelineResult run_pipeline(const ExperimentConfig& cfg, std::ostream* log) {
    check_config(cfg);
    ensure_dir(cfg.out_dir);

    const std::string config_text = serialize_config(cfg);
    RunManifest manifest(config_text, cfg.seed);
    StageCache cache(join(cfg.out_dir, ".stamps"), cfg.out_dir);
    StageLog timing;

    auto say = [log](const std::string& msg) {
        if (log) (*log) << msg << std::endl;
    };

    const auto train_stems_src = list_pgm_stems(cfg.train_dir);
    const auto test_stems_src = list_pgm_stems(cfg.test_dir);

    // input fingerprint shared by all stages: config + seed + dataset content
    uint64_t input_fp = hash_string(config_text);
    input_fp = fnv1a64(&cfg.seed, sizeof(cfg.seed), input_fp);
    auto add_dataset = [&input_fp](const std::string& dir,
                                   const std::vector<std::string>& stems) {
        for (const auto& s : stems) {
            input_fp = hash_string(s, input_fp);
            input_fp ^= fnv1a64_file(join(dir, s + ".pgm"));
            input_fp *= 1099511628211ull;
        }
    };
    add_dataset(cfg.train_dir, train_stems_src);
    add_dataset(cfg.test_dir, test_stems_src);

    // stems get train_/test_ prefixes so the two sets cannot collide
    std::vector<std::pair<std::string, std::string>> all_objects; // (stem, src path)
    std::vector<std::string> train_stems, test_stems;
    for (const auto& s : train_stems_src) {
        all_objects.emplace_back("train_" + s, join(cfg.train_dir, s + ".pgm"));
        train_stems.push_back("train_" + s);
    }
    for (const auto& s : test_stems_src) {
        all_objects.emplace_back("test_" + s, join(cfg.test_dir, s + ".pgm"));
        test_stems.push_back("test_" + s);
    }

    PipelineResult result;
    std::vector<EvalRow> rows;

    for (double z : cfg.distances) {
        const std::string zname = distance_dir_name(z);
        const std::string zdir = join(cfg.out_dir, zname);

        // --- generate ---
        {
            const uint64_t fp = hash_string("generate:" + zname, input_fp);
            std::vector<std::string> rel_outputs;
            for (const auto& [stem, src] : all_objects)
                for (const char* sub : {"field/", "phase/", "clean/"})
                    rel_outputs.push_back(
                        zname + "/" + sub + stem +
                        (std::string(sub) == "field/" ? ".cghf"
                         : std::string(sub) == "phase/" ? ".cghp" : ".pgm"));
            if (cache.is_valid("generate_" + zname, fp)) {
                say("[skip] generate " + zname + " (cached)");
            } else {
                const double t0 = now_seconds();
                for (const auto& [stem, src] : all_objects) {
                    const Gray8Image object = load_pgm(src);
                    if (object.width != cfg.object_px() || object.height != cfg.object_px())
                        throw std::invalid_argument(
                            "generate: object " + src + " is not " +
                            std::to_string(cfg.object_px()) + "px square");
                    stage_generate(cfg, object, z, cfg.out_dir, stem);
                    say("[generate] " + zname + " " + stem);
                }
                cache.record("generate_" + zname, fp, rel_outputs);
                timing.seconds.emplace_back("generate_" + zname, now_seconds() - t0);
            }
            for (const auto& rel : rel_outputs)
                manifest.add_file("generate", cfg.out_dir, rel);
        }

        // --- compress ---
        std::vector<std::pair<std::string, double>> ratios;
        {
            const uint64_t fp = hash_string("compress:" + zname, input_fp);
            std::vector<std::string> rel_outputs;
            for (const auto& [stem, src] : all_objects) {
                rel_outputs.push_back(zname + "/jpeg/" + stem + ".jpg");
                rel_outputs.push_back(zname + "/decoded/" + stem + ".pgm");
            }
            if (cache.is_valid("compress_" + zname, fp)) {
                say("[skip] compress " + zname + " (cached)");
                for (const auto& [stem, src] : all_objects) {
                    const Gray8Image clean = load_pgm(join(zdir, "clean/" + stem + ".pgm"));
                    std::ifstream probe(join(zdir, "jpeg/" + stem + ".jpg"),
                                        std::ios::binary | std::ios::ate);
                    ratios.emplace_back(stem, compression_ratio(clean.data.size(),
                                                                static_cast<size_t>(probe.tellg())));
                }
            } else {
                const double t0 = now_seconds();
                for (const auto& [stem, src] : all_objects) {
                    const auto out = stage_compress(cfg, join(zdir, "clean/" + stem + ".pgm"),
                                                    z, cfg.out_dir, stem);
                    ratios.emplace_back(stem, out.ratio);
                    say("[compress] " + zname + " " + stem + " ratio " +
                        fmt("%.4f", out.ratio));
                }
                cache.record("compress_" + zname, fp, rel_outputs);
                timing.seconds.emplace_back("compress_" + zname, now_seconds() - t0);
            }
            for (const auto& rel : rel_outputs)
                manifest.add_file("compress", cfg.out_dir, rel);
        }

        // --- train ---
        {
            const uint64_t fp = hash_string("train:" + zname, input_fp);
            const std::vector<std::string> rel_outputs = {zname + "/model.arcn",
                                                          zname + "/train_loss.csv"};
            if (cache.is_valid("train_" + zname, fp)) {
                say("[skip] train " + zname + " (cached)");
            } else {
                const double t0 = now_seconds();
                say("[train] " + zname + " on " + std::to_string(train_stems.size()) +
                    " holograms");
                stage_train(cfg, z, cfg.out_dir, train_stems);
                cache.record("train_" + zname, fp, rel_outputs);
                timing.seconds.emplace_back("train_" + zname, now_seconds() - t0);
            }
            for (const auto& rel : rel_outputs)
                manifest.add_file("train", cfg.out_dir, rel);
        }

        // --- evaluate ---
        {
            const uint64_t fp = hash_string("evaluate:" + zname, input_fp);
            std::vector<std::string> rel_outputs;
            for (const auto& stem : test_stems) {
                rel_outputs.push_back(zname + "/restored/" + stem + ".pgm");
                rel_outputs.push_back(zname + "/recon/" + stem + "_clean.pgm");
                rel_outputs.push_back(zname + "/recon/" + stem + "_compressed.pgm");
                rel_outputs.push_back(zname + "/recon/" + stem + "_restored.pgm");
            }
            const double t0 = now_seconds();
            const CnnModel model = load_model(join(zdir, "model.arcn"));
            for (const auto& stem : test_stems) {
                double ratio = 0.0;
                for (const auto& [rstem, r] : ratios)
                    if (rstem == stem) ratio = r;
                rows.push_back(stage_evaluate(cfg, model, z, cfg.out_dir, stem, ratio));
                say("[evaluate] " + zname + " " + stem + " psnr_c " +
                    fmt("%.2f", rows.back().psnr_compressed_db) + " psnr_r " +
                    fmt("%.2f", rows.back().psnr_restored_db));
            }
            cache.record("evaluate_" + zname, fp, rel_outputs);
            timing.seconds.emplace_back("evaluate_" + zname, now_seconds() - t0);
            for (const auto& rel : rel_outputs)
                manifest.add_file("evaluate", cfg.out_dir, rel);
        }
    }

    // --- report ---
    result.rows = rows;
    result.report_path = join(cfg.out_dir, "report.csv");
    {
        std::ofstream csv(result.report_path, std::ios::trunc);
        if (!csv) throw IoError("cannot open for write: " + result.report_path);
        csv << eval_csv_header() << '\n';
        for (const auto& r : rows) csv << eval_csv_row(r) << '\n';
    }
    manifest.add_file("report", cfg.out_dir, "report.csv");

    result.manifest_path = join(cfg.out_dir, "manifest.txt");
    manifest.write(result.manifest_path);

    {
        std::ofstream t(join(cfg.out_dir, "timings.txt"), std::ios::trunc);
        for (const auto& [stage, sec] : timing.seconds)
            t << stage << ' ' << fmt("%.3f", sec) << "s\n";
    }
    say("[done] report " + result.report_path);
    return result;
}

} // namespace cghc
