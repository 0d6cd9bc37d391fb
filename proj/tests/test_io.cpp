#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "cghc/errors.hpp"
#include "cghc/io.hpp"

using namespace cghc;
namespace fs = std::filesystem;

namespace {

std::string tmp_path(const std::string& name) {
    static const fs::path dir = [] {
        fs::path p = fs::temp_directory_path() / "cghc_io_tests";
        fs::create_directories(p);
        return p;
    }();
    return (dir / name).string();
}

std::vector<uint8_t> slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("pgm round trip is byte-identical") {
    Gray8Image img(37, 23);
    std::mt19937 rng(7);
    for (auto& v : img.data) v = static_cast<uint8_t>(rng());
    const auto path = tmp_path("rt.pgm");
    save_pgm(img, path);
    const Gray8Image back = load_pgm(path);
    REQUIRE(back.width == img.width);
    REQUIRE(back.height == img.height);
    CHECK(back.data == img.data);

    save_pgm(back, tmp_path("rt2.pgm"));
    CHECK(slurp(path) == slurp(tmp_path("rt2.pgm")));
}

TEST_CASE("pgm 2x2 layout matches the format spec") {
    Gray8Image img(2, 2);
    img.data = {0, 255, 128, 64};
    const auto path = tmp_path("tiny.pgm");
    save_pgm(img, path);
    const auto bytes = slurp(path);
    const std::string header(bytes.begin(), bytes.begin() + 11);
    CHECK(header == "P5\n2 2\n255\n");
    REQUIRE(bytes.size() == 15);
    CHECK(bytes[11] == 0);
    CHECK(bytes[12] == 255);
    CHECK(bytes[13] == 128);
    CHECK(bytes[14] == 64);
}

TEST_CASE("pgm loader reports distinct failure modes") {
    const auto bad_magic = tmp_path("bad_magic.pgm");
    std::ofstream(bad_magic, std::ios::binary) << "P6\n2 2\n255\n####";
    CHECK_THROWS_WITH_AS(load_pgm(bad_magic), doctest::Contains("expected P5"),
                         FormatError);

    const auto bad_maxval = tmp_path("bad_maxval.pgm");
    std::ofstream(bad_maxval, std::ios::binary) << "P5\n2 2\n65535\n####";
    CHECK_THROWS_WITH_AS(load_pgm(bad_maxval), doctest::Contains("maxval"), FormatError);

    const auto truncated = tmp_path("trunc.pgm");
    std::ofstream(truncated, std::ios::binary) << "P5\n2 2\n255\nab";
    CHECK_THROWS_WITH_AS(load_pgm(truncated), doctest::Contains("truncated"),
                         FormatError);

    CHECK_THROWS_AS(load_pgm(tmp_path("missing.pgm")), IoError);
}

TEST_CASE("field container round trip is bit exact") {
    ComplexField f(1, 1, 8e-6);
    f.data[0] = {3.0, 4.0};
    const auto path = tmp_path("one.cghf");
    save_field(f, path);
    const ComplexField back = load_field(path);
    CHECK(back.data[0] == f.data[0]);
    CHECK(back.pitch == f.pitch);

    ComplexField big(256, 256, 8e-6);
    std::mt19937_64 rng(42);
    for (auto& v : big.data) {
        const double re = (rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
        const double im = (rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
        v = {re, im};
    }
    const auto big_path = tmp_path("big.cghf");
    save_field(big, big_path);
    const ComplexField big_back = load_field(big_path);
    REQUIRE(big_back.size() == big.size());
    for (size_t i = 0; i < big.size(); ++i) CHECK(big_back.data[i] == big.data[i]);
}

TEST_CASE("field container rejects corruption") {
    const auto path = tmp_path("bad.cghf");
    std::ofstream(path, std::ios::binary) << "NOPE" << std::string(32, '\0');
    CHECK_THROWS_WITH_AS(load_field(path), doctest::Contains("bad magic"), FormatError);

    // valid header but short payload
    ComplexField f(4, 4, 1e-6);
    const auto trunc = tmp_path("trunc.cghf");
    save_field(f, trunc);
    fs::resize_file(trunc, fs::file_size(trunc) - 8);
    CHECK_THROWS_WITH_AS(load_field(trunc), doctest::Contains("truncated"), FormatError);
}

TEST_CASE("phase map container round trip") {
    PhaseMap p(13, 5, 8e-6);
    for (size_t i = 0; i < p.data.size(); ++i) p.data[i] = 6.28 * i / p.data.size();
    const auto path = tmp_path("p.cghp");
    save_phase_map(p, path);
    const PhaseMap back = load_phase_map(path);
    CHECK(back.data == p.data);
    CHECK(back.width == 13);
    CHECK(back.height == 5);

    CHECK_THROWS_AS(load_phase_map(tmp_path("one.cghf")), FormatError); // wrong magic
}
