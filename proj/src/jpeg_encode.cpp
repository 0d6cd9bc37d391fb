#include <cmath>
#include <fstream>
#include <stdexcept>

#include "cghc/dct.hpp"
#include "cghc/errors.hpp"
#include "cghc/jpeg.hpp"
#include "jpeg_internal.hpp"

namespace cghc {

using jpegdetail::bit_category;
using jpegdetail::HuffSpec;

namespace {

// Canonical code assignment for an encoder-side table: symbol -> (code, length).
struct HuffEncTable {
    uint16_t code[256] = {};
    uint8_t len[256] = {};

    explicit HuffEncTable(const HuffSpec& spec) {
        uint16_t next = 0;
        int k = 0;
        for (int l = 1; l <= 16; ++l) {
            for (int i = 0; i < spec.bits[l - 1]; ++i, ++k) {
                code[spec.vals[k]] = next++;
                len[spec.vals[k]] = static_cast<uint8_t>(l);
            }
            next = static_cast<uint16_t>(next << 1);
        }
    }
};

class BitWriter {
public:
    explicit BitWriter(std::vector<uint8_t>& out) : out_(out) {}

    void put(uint32_t bits, int nbits) {
        acc_ = (acc_ << nbits) | (bits & ((1u << nbits) - 1));
        cnt_ += nbits;
        while (cnt_ >= 8) {
            const uint8_t byte = static_cast<uint8_t>(acc_ >> (cnt_ - 8));
            out_.push_back(byte);
            if (byte == 0xFF) out_.push_back(0x00); // byte stuffing
            cnt_ -= 8;
        }
    }

    // Pad the final partial byte with 1-bits.
    void flush() {
        if (cnt_ > 0) {
            const int pad = 8 - cnt_; // cnt_ is always < 8 here
            put((1u << pad) - 1, pad);
        }
    }

private:
    std::vector<uint8_t>& out_;
    uint64_t acc_ = 0;
    int cnt_ = 0;
};

void put_marker(std::vector<uint8_t>& out, uint8_t code) {
    out.push_back(0xFF);
    out.push_back(code);
}

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v & 0xFF));
}

void put_dht(std::vector<uint8_t>& out, int cls, int id, const HuffSpec& spec) {
    put_marker(out, 0xC4);
    put_u16(out, static_cast<uint16_t>(2 + 1 + 16 + spec.nvals));
    out.push_back(static_cast<uint8_t>((cls << 4) | id));
    for (int i = 0; i < 16; ++i) out.push_back(spec.bits[i]);
    for (int i = 0; i < spec.nvals; ++i) out.push_back(spec.vals[i]);
}

// Signed value -> (category, appended bits). Negative values are stored in
// one's-complement form within their category.
inline uint32_t value_bits(int v, int cat) {
    return v >= 0 ? static_cast<uint32_t>(v)
                  : static_cast<uint32_t>(v + (1 << cat) - 1);
}

} // namespace

JfifStream jpeg_encode(const Gray8Image& img, int quality) {
    check_image(img);
    const auto quant = scale_quant_table(quality); // validates quality

    JfifStream s;
    s.width = img.width;
    s.height = img.height;
    auto& out = s.bytes;

    // --- headers ---
    put_marker(out, 0xD8); // SOI
    put_marker(out, 0xE0); // APP0 / JFIF 1.01, no density, no thumbnail
    put_u16(out, 16);
    const uint8_t jfif[14] = {'J', 'F', 'I', 'F', 0, 1, 1, 0, 0, 1, 0, 1, 0, 0};
    out.insert(out.end(), jfif, jfif + 14);

    put_marker(out, 0xDB); // DQT, table 0, 8-bit, zig-zag order
    put_u16(out, 2 + 1 + 64);
    out.push_back(0x00);
    for (int i = 0; i < 64; ++i)
        out.push_back(static_cast<uint8_t>(quant[kZigZag[i]]));

    put_marker(out, 0xC0); // SOF0: 8-bit precision, 1 component, 1x1 sampling
    put_u16(out, 2 + 6 + 3);
    out.push_back(8);
    put_u16(out, static_cast<uint16_t>(img.height));
    put_u16(out, static_cast<uint16_t>(img.width));
    out.push_back(1);
    out.push_back(1);    // component id
    out.push_back(0x11); // H=1, V=1
    out.push_back(0);    // quant table 0

    put_dht(out, 0, 0, jpegdetail::kDcLuma);
    put_dht(out, 1, 0, jpegdetail::kAcLuma);

    put_marker(out, 0xDA); // SOS
    put_u16(out, 2 + 1 + 2 + 3);
    out.push_back(1);
    out.push_back(1);    // component id
    out.push_back(0x00); // DC table 0, AC table 0
    out.push_back(0);    // Ss
    out.push_back(63);   // Se
    out.push_back(0);    // Ah/Al

    // --- entropy-coded data ---
    static const HuffEncTable dc_table(jpegdetail::kDcLuma);
    static const HuffEncTable ac_table(jpegdetail::kAcLuma);
    BitWriter bw(out);

    const int bw8 = (img.width + 7) / 8;
    const int bh8 = (img.height + 7) / 8;
    int pred_dc = 0;

    for (int by = 0; by < bh8; ++by) {
        for (int bx = 0; bx < bw8; ++bx) {
            // fetch block with edge replication
            double block[64];
            for (int y = 0; y < 8; ++y) {
                int sy = by * 8 + y;
                if (sy >= img.height) sy = img.height - 1;
                for (int x = 0; x < 8; ++x) {
                    int sx = bx * 8 + x;
                    if (sx >= img.width) sx = img.width - 1;
                    block[y * 8 + x] = static_cast<double>(img.at(sy, sx)) - 128.0;
                }
            }

            double coef[64];
            fdct8x8(block, coef);

            int q[64]; // zig-zag order
            for (int i = 0; i < 64; ++i) {
                const int nat = kZigZag[i];
                q[i] = static_cast<int>(std::lround(coef[nat] / quant[nat]));
            }

            // DC difference
            const int diff = q[0] - pred_dc;
            pred_dc = q[0];
            const int dc_cat = bit_category(diff);
            bw.put(dc_table.code[dc_cat], dc_table.len[dc_cat]);
            if (dc_cat > 0) bw.put(value_bits(diff, dc_cat), dc_cat);

            // AC run/size coding
            int last_nz = 63;
            while (last_nz > 0 && q[last_nz] == 0) --last_nz;
            int run = 0;
            for (int k = 1; k <= last_nz; ++k) {
                if (q[k] == 0) {
                    ++run;
                    continue;
                }
                while (run >= 16) {
                    bw.put(ac_table.code[0xF0], ac_table.len[0xF0]); // ZRL
                    run -= 16;
                }
                const int cat = bit_category(q[k]);
                const int sym = (run << 4) | cat;
                bw.put(ac_table.code[sym], ac_table.len[sym]);
                bw.put(value_bits(q[k], cat), cat);
                run = 0;
            }
            if (last_nz < 63)
                bw.put(ac_table.code[0x00], ac_table.len[0x00]); // EOB
        }
    }
    bw.flush();

    put_marker(out, 0xD9); // EOI
    return s;
}

JfifStream load_jfif(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    JfifStream s;
    s.bytes.assign(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
    if (s.bytes.size() < 4)
        throw FormatError("not a JFIF stream (too short): " + path);
    // dimensions are recovered on decode; a quick SOF scan keeps the struct usable
    for (size_t i = 0; i + 9 < s.bytes.size(); ++i) {
        if (s.bytes[i] == 0xFF && s.bytes[i + 1] == 0xC0) {
            s.height = (s.bytes[i + 5] << 8) | s.bytes[i + 6];
            s.width = (s.bytes[i + 7] << 8) | s.bytes[i + 8];
            break;
        }
    }
    return s;
}

void save_jfif(const JfifStream& s, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for write: " + path);
    os.write(reinterpret_cast<const char*>(s.bytes.data()),
             static_cast<std::streamsize>(s.bytes.size()));
    if (!os) throw IoError("write failed: " + path);
}

} // namespace cghc
