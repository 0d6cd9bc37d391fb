#include "cghc/manifest.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cghc/errors.hpp"

namespace cghc {

uint64_t fnv1a64(const void* data, size_t n, uint64_t h) {
    const uint8_t* p = static_cast<const uint8_t*>(data);
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for hashing: " + path);
    uint64_t h = 14695981039346656037ull;
    char buf[1 << 16];
    while (is) {
        is.read(buf, sizeof(buf));
        h = fnv1a64(buf, static_cast<size_t>(is.gcount()), h);
    }
    return h;
}

std::string hash_hex(uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void RunManifest::add_file(const std::string& stage, const std::string& root,
                           const std::string& relpath) {
    const std::string full = root.empty() ? relpath : root + "/" + relpath;
    std::ifstream probe(full, std::ios::binary | std::ios::ate);
    if (!probe) throw IoError("manifest: missing artifact: " + full);
    ManifestEntry e;
    e.stage = stage;
    e.relpath = relpath;
    e.bytes = static_cast<uint64_t>(probe.tellg());
    e.hash = fnv1a64_file(full);
    entries_.push_back(std::move(e));
}

std::string RunManifest::serialize() const {
    std::vector<ManifestEntry> sorted = entries_;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
        return a.relpath < b.relpath;
    });

    std::ostringstream os;
    os << "manifest_version 1\n";
    os << "seed " << seed_ << "\n";
    os << "config_hash " << hash_hex(fnv1a64(config_text_.data(), config_text_.size()))
       << "\n";
    os << "begin_config\n" << config_text_ << "end_config\n";
    for (const auto& e : sorted)
        os << "artifact " << e.stage << ' ' << e.relpath << ' ' << e.bytes << ' '
           << hash_hex(e.hash) << '\n';
    return os.str();
}

void RunManifest::write(const std::string& path) const {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for write: " + path);
    const std::string text = serialize();
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!os) throw IoError("write failed: " + path);
}

} // namespace cghc
