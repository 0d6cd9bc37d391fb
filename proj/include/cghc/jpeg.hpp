#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cghc/types.hpp"

namespace cghc {

// Serialized baseline JFIF stream (grayscale, single component) plus the
// parsed image dimensions.
struct JfifStream {
    std::vector<uint8_t> bytes;
    int width = 0;
    int height = 0;

    size_t size_bytes() const { return bytes.size(); }
};

// Baseline sequential encoder: 8x8 blocks, level shift, DCT, quality-scaled
// luminance quantization, zig-zag, standard Huffman tables, JFIF container.
// Right/bottom edges are padded by sample replication. quality in [1,100].
JfifStream jpeg_encode(const Gray8Image& img, int quality);

// Baseline sequential grayscale decoder. Rejects progressive streams,
// multi-component scans and restart intervals as UnsupportedError; malformed
// streams raise FormatError.
Gray8Image jpeg_decode(const std::vector<uint8_t>& bytes);
inline Gray8Image jpeg_decode(const JfifStream& s) { return jpeg_decode(s.bytes); }

JfifStream load_jfif(const std::string& path);
void save_jfif(const JfifStream& s, const std::string& path);

} // namespace cghc
