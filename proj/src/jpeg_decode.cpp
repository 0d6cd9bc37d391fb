#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "cghc/dct.hpp"
#include "cghc/errors.hpp"
#include "cghc/jpeg.hpp"
#include "jpeg_internal.hpp"

namespace cghc {

namespace {

// Decoder-side canonical Huffman table (mincode/maxcode/valptr walk).
struct HuffDecTable {
    int32_t mincode[17] = {};
    int32_t maxcode[17] = {}; // -1 where no codes of that length
    int valptr[17] = {};
    uint8_t vals[256] = {};
    bool present = false;

    void build(const uint8_t bits[16], const uint8_t* v, int nvals) {
        std::memcpy(vals, v, static_cast<size_t>(nvals));
        int code = 0, k = 0;
        for (int l = 1; l <= 16; ++l) {
            if (bits[l - 1] == 0) {
                maxcode[l] = -1;
            } else {
                valptr[l] = k;
                mincode[l] = code;
                code += bits[l - 1];
                k += bits[l - 1];
                maxcode[l] = code - 1;
            }
            code <<= 1;
        }
        present = true;
    }
};

class Parser {
public:
    explicit Parser(const std::vector<uint8_t>& bytes) : b_(bytes) {}

    void run(Gray8Image& out) {
        if (next_marker() != 0xD8)
            throw FormatError("jpeg: stream does not start with SOI");
        for (;;) {
            const uint8_t m = next_marker();
            switch (m) {
                case 0xDB: parse_dqt(); break;
                case 0xC4: parse_dht(); break;
                case 0xC0: parse_sof(); break;
                case 0xC1: case 0xC2: case 0xC3: case 0xC5: case 0xC6: case 0xC7:
                case 0xC8: case 0xC9: case 0xCA: case 0xCB: case 0xCC: case 0xCD:
                case 0xCE: case 0xCF:
                    throw UnsupportedError("jpeg: unsupported mode (non-baseline SOF)");
                case 0xDD: parse_dri(); break;
                case 0xDA:
                    parse_sos();
                    decode_scan(out);
                    return;
                case 0xD9:
                    throw FormatError("jpeg: EOI before scan data");
                default:
                    if ((m >= 0xE0 && m <= 0xEF) || m == 0xFE) { skip_segment(); break; } // APPn/COM
                    throw FormatError("jpeg: bad marker 0x" + hex(m));
            }
        }
    }

private:
    const std::vector<uint8_t>& b_;
    size_t pos_ = 0;

    // scan state
    int width_ = 0, height_ = 0;
    int comp_qtab_ = 0;
    int dc_id_ = 0, ac_id_ = 0;
    uint16_t qtab_[4][64] = {};      // natural order
    bool qtab_present_[4] = {};
    HuffDecTable dc_[4], ac_[4];

    // bit reader state
    uint32_t bitbuf_ = 0;
    int bitcnt_ = 0;

    static std::string hex(uint8_t v) {
        static const char* d = "0123456789ABCDEF";
        return std::string{d[v >> 4], d[v & 15]};
    }

    uint8_t u8() {
        if (pos_ >= b_.size()) throw FormatError("jpeg: unexpected end of stream");
        return b_[pos_++];
    }
    uint16_t u16() {
        const uint16_t hi = u8();
        return static_cast<uint16_t>((hi << 8) | u8());
    }

    // Next marker code, skipping fill bytes (0xFF runs).
    uint8_t next_marker() {
        uint8_t c = u8();
        if (c != 0xFF) throw FormatError("jpeg: expected marker, got 0x" + hex(c));
        do {
            c = u8();
        } while (c == 0xFF);
        if (c == 0x00) throw FormatError("jpeg: stuffed byte outside entropy data");
        return c;
    }

    size_t segment_end() {
        const uint16_t len = u16();
        if (len < 2) throw FormatError("jpeg: segment length < 2");
        const size_t end = pos_ + len - 2;
        if (end > b_.size()) throw FormatError("jpeg: segment overruns stream");
        return end;
    }

    void skip_segment() { pos_ = segment_end(); }

    void parse_dqt() {
        const size_t end = segment_end();
        while (pos_ < end) {
            const uint8_t pq_tq = u8();
            const int prec = pq_tq >> 4, id = pq_tq & 15;
            if (id > 3) throw FormatError("jpeg: DQT table id > 3");
            if (prec > 1) throw FormatError("jpeg: DQT precision flag invalid");
            for (int i = 0; i < 64; ++i) {
                const uint16_t v = prec ? u16() : u8();
                if (v == 0) throw FormatError("jpeg: zero quantizer entry");
                qtab_[id][kZigZag[i]] = v;
            }
            qtab_present_[id] = true;
        }
        if (pos_ != end) throw FormatError("jpeg: DQT length mismatch");
    }

    void parse_dht() {
        const size_t end = segment_end();
        while (pos_ < end) {
            const uint8_t tc_th = u8();
            const int cls = tc_th >> 4, id = tc_th & 15;
            if (cls > 1 || id > 3) throw FormatError("jpeg: DHT class/id invalid");
            uint8_t bits[16];
            int total = 0;
            for (int i = 0; i < 16; ++i) total += bits[i] = u8();
            if (total > 256 || pos_ + total > end)
                throw FormatError("jpeg: DHT value count invalid");
            (cls == 0 ? dc_[id] : ac_[id]).build(bits, &b_[pos_], total);
            pos_ += static_cast<size_t>(total);
        }
        if (pos_ != end) throw FormatError("jpeg: DHT length mismatch");
    }

    void parse_sof() {
        const size_t end = segment_end();
        const int prec = u8();
        if (prec != 8) throw UnsupportedError("jpeg: unsupported sample precision");
        height_ = u16();
        width_ = u16();
        const int ncomp = u8();
        if (width_ < 1 || height_ < 1) throw FormatError("jpeg: zero dimension in SOF0");
        if (ncomp != 1)
            throw UnsupportedError("jpeg: unsupported mode (multi-component image)");
        u8(); // component id
        const uint8_t hv = u8();
        if (hv != 0x11) throw UnsupportedError("jpeg: unsupported subsampling");
        comp_qtab_ = u8();
        if (comp_qtab_ > 3) throw FormatError("jpeg: SOF0 quant table id invalid");
        if (pos_ != end) throw FormatError("jpeg: SOF0 length mismatch");
    }

    void parse_dri() {
        const size_t end = segment_end();
        const uint16_t interval = u16();
        if (interval != 0)
            throw UnsupportedError("jpeg: unsupported mode (restart markers)");
        if (pos_ != end) throw FormatError("jpeg: DRI length mismatch");
    }

    void parse_sos() {
        if (width_ == 0) throw FormatError("jpeg: SOS before SOF0");
        const size_t end = segment_end();
        const int ncomp = u8();
        if (ncomp != 1)
            throw UnsupportedError("jpeg: unsupported mode (multi-component scan)");
        u8(); // component selector
        const uint8_t tables = u8();
        dc_id_ = tables >> 4;
        ac_id_ = tables & 15;
        const int ss = u8(), se = u8(), ahl = u8();
        if (ss != 0 || se != 63 || ahl != 0)
            throw UnsupportedError("jpeg: unsupported mode (non-sequential scan)");
        if (pos_ != end) throw FormatError("jpeg: SOS length mismatch");
        if (!qtab_present_[comp_qtab_])
            throw FormatError("jpeg: missing quantization table");
        if (!dc_[dc_id_].present || !ac_[ac_id_].present)
            throw FormatError("jpeg: missing Huffman table");
    }

    // --- entropy-coded data ---

    int next_bit() {
        if (bitcnt_ == 0) {
            if (pos_ >= b_.size())
                throw FormatError("jpeg: truncated entropy data");
            uint8_t c = b_[pos_++];
            if (c == 0xFF) {
                if (pos_ >= b_.size())
                    throw FormatError("jpeg: truncated entropy data");
                const uint8_t c2 = b_[pos_++];
                if (c2 != 0x00) {
                    // a real marker inside the scan: data ended prematurely
                    throw FormatError("jpeg: truncated entropy data (marker 0x" +
                                      hex(c2) + " inside scan)");
                }
            }
            bitbuf_ = c;
            bitcnt_ = 8;
        }
        --bitcnt_;
        return (bitbuf_ >> bitcnt_) & 1;
    }

    int receive(int n) {
        int v = 0;
        for (int i = 0; i < n; ++i) v = (v << 1) | next_bit();
        return v;
    }

    static int extend(int v, int t) {
        return (t > 0 && v < (1 << (t - 1))) ? v - (1 << t) + 1 : v;
    }

    int decode_symbol(const HuffDecTable& t) {
        int code = next_bit();
        for (int l = 1; l <= 16; ++l) {
            if (t.maxcode[l] >= 0 && code <= t.maxcode[l])
                return t.vals[t.valptr[l] + code - t.mincode[l]];
            code = (code << 1) | next_bit();
        }
        throw FormatError("jpeg: invalid Huffman code in entropy data");
    }

    void decode_scan(Gray8Image& out) {
        out = Gray8Image(width_, height_);
        const uint16_t* quant = qtab_[comp_qtab_];
        const HuffDecTable& dct = dc_[dc_id_];
        const HuffDecTable& act = ac_[ac_id_];

        const int bw8 = (width_ + 7) / 8;
        const int bh8 = (height_ + 7) / 8;
        int pred_dc = 0;

        for (int by = 0; by < bh8; ++by) {
            for (int bx = 0; bx < bw8; ++bx) {
                double coef[64] = {};

                const int dc_cat = decode_symbol(dct);
                if (dc_cat > 11) throw FormatError("jpeg: DC category out of range");
                const int diff = extend(receive(dc_cat), dc_cat);
                pred_dc += diff;
                coef[0] = static_cast<double>(pred_dc) * quant[0];

                for (int k = 1; k < 64;) {
                    const int rs = decode_symbol(act);
                    const int r = rs >> 4, s = rs & 15;
                    if (s == 0) {
                        if (r == 15) { k += 16; continue; } // ZRL
                        break;                              // EOB
                    }
                    k += r;
                    if (k > 63) throw FormatError("jpeg: AC index overruns block");
                    const int nat = kZigZag[k];
                    coef[nat] = static_cast<double>(extend(receive(s), s)) * quant[nat];
                    ++k;
                }

                double pix[64];
                idct8x8(coef, pix);

                const int ymax = std::min(8, height_ - by * 8);
                const int xmax = std::min(8, width_ - bx * 8);
                for (int y = 0; y < ymax; ++y)
                    for (int x = 0; x < xmax; ++x) {
                        const long v = std::lround(pix[y * 8 + x] + 128.0);
                        out.at(by * 8 + y, bx * 8 + x) =
                            static_cast<uint8_t>(v < 0 ? 0 : (v > 255 ? 255 : v));
                    }
            }
        }

        // the scan must terminate with EOI (possibly after pad bits)
        bitcnt_ = 0;
        if (next_marker() != 0xD9)
            throw FormatError("jpeg: missing EOI after scan");
    }
};

} // namespace

Gray8Image jpeg_decode(const std::vector<uint8_t>& bytes) {
    Gray8Image out;
    Parser(bytes).run(out);
    return out;
}

} // namespace cghc
