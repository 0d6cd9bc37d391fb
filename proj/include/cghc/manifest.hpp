#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cghc {

// FNV-1a 64-bit content hash; integrity/rerun comparison, not cryptographic.
uint64_t fnv1a64(const void* data, size_t n,
                 uint64_t h = 14695981039346656037ull);
uint64_t fnv1a64_file(const std::string& path);

std::string hash_hex(uint64_t h);

struct ManifestEntry {
    std::string stage;
    std::string relpath;
    uint64_t bytes = 0;
    uint64_t hash = 0;
};

// Deterministic record of one run: config snapshot, seed, and a sorted list of
// produced artifacts with content hashes. Two runs with equal config and seed
// must serialize to identical text (timings are kept out of this file).
class RunManifest {
public:
    RunManifest(std::string config_text, uint64_t seed)
        : config_text_(std::move(config_text)), seed_(seed) {}

    // Hashes the file at root/relpath and records it under the given stage.
    void add_file(const std::string& stage, const std::string& root,
                  const std::string& relpath);

    const std::vector<ManifestEntry>& entries() const { return entries_; }

    std::string serialize() const;
    void write(const std::string& path) const;

private:
    std::string config_text_;
    uint64_t seed_;
    std::vector<ManifestEntry> entries_;
};

} // namespace cghc
