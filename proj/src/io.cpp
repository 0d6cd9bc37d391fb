#include "cghc/io.hpp"

#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>
#include <limits>

#include "cghc/errors.hpp"

namespace cghc {
namespace {

// All integers in the binary containers are little-endian. The writers below
// assume a little-endian host, which covers every platform this builds on;
// a static check keeps the assumption honest.
static_assert(std::endian::native == std::endian::little,
              "container I/O assumes a little-endian host");

void write_exact(std::ofstream& os, const void* p, size_t n, const std::string& path) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!os) throw IoError("write failed: " + path);
}

void read_exact(std::ifstream& is, void* p, size_t n, const std::string& path) {
    is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (is.gcount() != static_cast<std::streamsize>(n))
        throw FormatError("truncated file: " + path);
}

// Reads one whitespace-delimited ASCII token, honoring '#' comments.
std::string next_pnm_token(std::ifstream& is, const std::string& path) {
    std::string tok;
    int c;
    while ((c = is.get()) != EOF) {
        if (c == '#') {
            while ((c = is.get()) != EOF && c != '\n') {}
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    if (tok.empty()) throw FormatError("malformed PGM header: " + path);
    return tok;
}

long parse_pnm_int(const std::string& tok, const std::string& what, const std::string& path) {
    for (char ch : tok)
        if (!std::isdigit(static_cast<unsigned char>(ch)))
            throw FormatError("malformed PGM header (" + what + "): " + path);
    return std::stol(tok);
}

} // namespace

Gray8Image load_pgm(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);

    char magic[2];
    read_exact(is, magic, 2, path);
    if (magic[0] != 'P' || magic[1] != '5')
        throw FormatError("not a binary PGM (expected P5): " + path);

    const long w = parse_pnm_int(next_pnm_token(is, path), "width", path);
    const long h = parse_pnm_int(next_pnm_token(is, path), "height", path);
    const long maxval = parse_pnm_int(next_pnm_token(is, path), "maxval", path);
    if (w < 1 || h < 1)
        throw FormatError("malformed PGM header (bad dimensions): " + path);
    if (maxval != 255)
        throw FormatError("unsupported PGM maxval (want 255): " + path);
    // header ends with exactly one whitespace byte, already consumed by the tokenizer

    Gray8Image img(static_cast<int>(w), static_cast<int>(h));
    is.read(reinterpret_cast<char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size()));
    if (is.gcount() != static_cast<std::streamsize>(img.data.size()))
        throw FormatError("truncated PGM payload: " + path);
    return img;
}

void save_pgm(const Gray8Image& img, const std::string& path) {
    check_image(img);
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for write: " + path);
    os << "P5\n" << img.width << ' ' << img.height << "\n255\n";
    write_exact(os, img.data.data(), img.data.size(), path);
}

namespace {

struct ContainerHeader {
    uint32_t width = 0;
    uint32_t height = 0;
    double pitch = 0.0;
};

void write_container_header(std::ofstream& os, const char magic[4],
                            const ContainerHeader& h, const std::string& path) {
    write_exact(os, magic, 4, path);
    write_exact(os, &h.width, 4, path);
    write_exact(os, &h.height, 4, path);
    write_exact(os, &h.pitch, 8, path);
}

ContainerHeader read_container_header(std::ifstream& is, const char magic[4],
                                      const std::string& path) {
    char m[4];
    read_exact(is, m, 4, path);
    if (std::memcmp(m, magic, 4) != 0)
        throw FormatError(std::string("bad magic (expected ") + std::string(magic, 4) + "): " + path);
    ContainerHeader h;
    read_exact(is, &h.width, 4, path);
    read_exact(is, &h.height, 4, path);
    read_exact(is, &h.pitch, 8, path);
    if (h.width < 1 || h.height < 1)
        throw FormatError("bad dimensions in container: " + path);
    const uint64_t n = static_cast<uint64_t>(h.width) * h.height;
    if (n > (1ull << 30))
        throw FormatError("implausible dimensions in container: " + path);
    return h;
}

} // namespace

void save_field(const ComplexField& f, const std::string& path) {
    check_field(f);
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for write: " + path);
    write_container_header(os, "CGHF",
                           {static_cast<uint32_t>(f.width), static_cast<uint32_t>(f.height), f.pitch},
                           path);
    // std::complex<double> is layout-compatible with double[2] (re, im)
    write_exact(os, f.data.data(), f.data.size() * sizeof(std::complex<double>), path);
}

ComplexField load_field(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    const ContainerHeader h = read_container_header(is, "CGHF", path);
    ComplexField f(static_cast<int>(h.width), static_cast<int>(h.height), h.pitch);
    read_exact(is, f.data.data(), f.data.size() * sizeof(std::complex<double>), path);
    if (is.peek() != EOF) throw FormatError("trailing bytes in container: " + path);
    check_field(f);
    return f;
}

void save_phase_map(const PhaseMap& p, const std::string& path) {
    check_phase_map(p);
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for write: " + path);
    write_container_header(os, "CGHP",
                           {static_cast<uint32_t>(p.width), static_cast<uint32_t>(p.height), p.pitch},
                           path);
    write_exact(os, p.data.data(), p.data.size() * sizeof(double), path);
}

PhaseMap load_phase_map(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    const ContainerHeader h = read_container_header(is, "CGHP", path);
    PhaseMap p(static_cast<int>(h.width), static_cast<int>(h.height), h.pitch);
    read_exact(is, p.data.data(), p.data.size() * sizeof(double), path);
    if (is.peek() != EOF) throw FormatError("trailing bytes in container: " + path);
    check_phase_map(p);
    return p;
}

} // namespace cghc
