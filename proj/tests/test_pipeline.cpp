#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "cghc/io.hpp"
#include "cghc/metrics.hpp"
#include "cghc/pipeline.hpp"

using namespace cghc;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "cghc_pipe_tests" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

// tiny geometry so the full pipeline runs in seconds
ExperimentConfig tiny_config(const fs::path& root, uint64_t seed) {
    ExperimentConfig cfg;
    cfg.hologram_size = 64;
    cfg.object_size = 32;
    cfg.distances = {0.05};
    cfg.jpeg_quality = 1;
    cfg.iterations = 4;
    cfg.batch_size = 8;
    cfg.patch_stride = 16;
    cfg.val_size = 0;
    cfg.arcnn_c1 = 4;
    cfg.arcnn_c2 = 4;
    cfg.arcnn_c3 = 2;
    cfg.seed = seed;
    cfg.train_dir = (root / "objects_train").string();
    cfg.test_dir = (root / "objects_test").string();
    cfg.out_dir = (root / "out").string();
    return cfg;
}

void write_objects(const ExperimentConfig& cfg, int train_n, int test_n) {
    fs::create_directories(cfg.train_dir);
    fs::create_directories(cfg.test_dir);
    for (int i = 0; i < train_n; ++i)
        save_pgm(make_synthetic_object(cfg.object_px(), 100 + i),
                 cfg.train_dir + "/obj_" + std::to_string(i) + ".pgm");
    for (int i = 0; i < test_n; ++i)
        save_pgm(make_synthetic_object(cfg.object_px(), 900 + i),
                 cfg.test_dir + "/obj_" + std::to_string(i) + ".pgm");
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("synthetic objects are deterministic and use the gray range") {
    const Gray8Image a = make_synthetic_object(64, 5);
    const Gray8Image b = make_synthetic_object(64, 5);
    const Gray8Image c = make_synthetic_object(64, 6);
    CHECK(a.data == b.data);
    CHECK(a.data != c.data);
    uint8_t lo = 255, hi = 0;
    for (uint8_t v : a.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(lo < 32);
    CHECK(hi > 200);
}

TEST_CASE("distance directory naming") {
    CHECK(distance_dir_name(0.3) == "z0300mm");
    CHECK(distance_dir_name(0.5) == "z0500mm");
    CHECK(distance_dir_name(0.05) == "z0050mm");
}

TEST_CASE("full tiny pipeline produces report, manifest and intermediates") {
    const fs::path root = fresh_dir("run1");
    ExperimentConfig cfg = tiny_config(root, 42);
    write_objects(cfg, 2, 1);

    const PipelineResult res = run_pipeline(cfg);
    REQUIRE(res.rows.size() == 1); // one test object x one distance
    CHECK(res.rows[0].object == "test_obj_0");
    CHECK(res.rows[0].compression_ratio > 1.0);

    const std::string zdir = cfg.out_dir + "/z0050mm";
    for (const char* p :
         {"/field/train_obj_0.cghf", "/phase/train_obj_0.cghp", "/clean/train_obj_0.pgm",
          "/jpeg/test_obj_0.jpg", "/decoded/test_obj_0.pgm", "/restored/test_obj_0.pgm",
          "/recon/test_obj_0_clean.pgm", "/recon/test_obj_0_compressed.pgm",
          "/recon/test_obj_0_restored.pgm", "/model.arcn", "/train_loss.csv"})
        CHECK(fs::is_regular_file(zdir + p));

    const std::string report = slurp(res.report_path);
    CHECK(report.find("object,distance_m") == 0);
    CHECK(report.find("test_obj_0") != std::string::npos);

    // every CSV value is recomputable from the persisted intermediates
    const Gray8Image clean_recon = load_pgm(zdir + "/recon/test_obj_0_clean.pgm");
    const Gray8Image comp_recon = load_pgm(zdir + "/recon/test_obj_0_compressed.pgm");
    CHECK(psnr(comp_recon, clean_recon) ==
          doctest::Approx(res.rows[0].psnr_compressed_db).epsilon(1e-6));
}

TEST_CASE("identical config and seed reproduce the manifest bit for bit") {
    const fs::path rootA = fresh_dir("detA");
    const fs::path rootB = fresh_dir("detB");
    ExperimentConfig a = tiny_config(rootA, 7);
    ExperimentConfig b = tiny_config(rootB, 7);
    write_objects(a, 2, 1);
    write_objects(b, 2, 1);

    const PipelineResult ra = run_pipeline(a);
    const PipelineResult rb = run_pipeline(b);
    CHECK(slurp(ra.manifest_path) == slurp(rb.manifest_path));

    // a different seed must change at least the trained model
    const fs::path rootC = fresh_dir("detC");
    ExperimentConfig c = tiny_config(rootC, 8);
    write_objects(c, 2, 1);
    const PipelineResult rc = run_pipeline(c);
    CHECK(slurp(ra.manifest_path) != slurp(rc.manifest_path));
}

TEST_CASE("rerun with valid stamps skips completed stages") {
    const fs::path root = fresh_dir("resume");
    ExperimentConfig cfg = tiny_config(root, 3);
    write_objects(cfg, 2, 1);

    run_pipeline(cfg);
    const auto model_time = fs::last_write_time(cfg.out_dir + "/z0050mm/model.arcn");

    std::ostringstream log;
    run_pipeline(cfg, &log);
    CHECK(log.str().find("[skip] generate z0050mm") != std::string::npos);
    CHECK(log.str().find("[skip] compress z0050mm") != std::string::npos);
    CHECK(log.str().find("[skip] train z0050mm") != std::string::npos);
    CHECK(fs::last_write_time(cfg.out_dir + "/z0050mm/model.arcn") == model_time);

    // corrupting an intermediate invalidates its stage
    save_pgm(Gray8Image(8, 8, 1), cfg.out_dir + "/z0050mm/clean/train_obj_0.pgm");
    std::ostringstream log2;
    run_pipeline(cfg, &log2);
    CHECK(log2.str().find("[generate] z0050mm") != std::string::npos);
}

TEST_CASE("degenerate evaluation: identical compressed and clean holograms") {
    const fs::path root = fresh_dir("degen");
    ExperimentConfig cfg = tiny_config(root, 11);
    write_objects(cfg, 1, 1);

    // generate artifacts, then force decoded == clean and use a pass-through
    // model so restored == clean as well
    const Gray8Image object = load_pgm(cfg.test_dir + "/obj_0.pgm");
    stage_generate(cfg, object, 0.05, cfg.out_dir, "test_obj_0");
    const std::string zdir = cfg.out_dir + "/z0050mm";
    fs::create_directories(zdir + "/decoded");
    fs::copy_file(zdir + "/clean/test_obj_0.pgm", zdir + "/decoded/test_obj_0.pgm");

    CnnModel identity = make_arcnn(0.05, 1, 2, 2, 2, 0.0, 0.0);
    for (auto& L : identity.layers)
        for (int o = 0; o < L.cout; ++o)
            L.weights[L.weight_index(L.kh / 2, L.kw / 2, 0, o)] = 1.0;

    const EvalRow row = stage_evaluate(cfg, identity, 0.05, cfg.out_dir, "test_obj_0", 1.0);
    CHECK(row.psnr_compressed_db == kPsnrCap);
    CHECK(row.ssim_compressed == 1.0);
    CHECK(row.psnr_restored_db == kPsnrCap);
    CHECK(row.ssim_restored == 1.0);
}

TEST_CASE("eval csv row formatting is stable") {
    EvalRow r;
    r.object = "test_a";
    r.distance_m = 0.3;
    r.compression_ratio = 7.21129;
    r.psnr_compressed_db = 19.1;
    r.ssim_compressed = 0.1651;
    r.psnr_restored_db = 28.86;
    r.ssim_restored = 0.6036;
    CHECK(eval_csv_row(r) == "test_a,0.3,7.2113,19.1000,0.165100,28.8600,0.603600");
}
