// Minimal inflate after the structure of zlib's contrib/puff: canonical
// Huffman decoding by code length counts, no lookup tables.

#include <array>

#include "crackbench/png.hpp"

namespace crackbench::png {

namespace {

constexpr int kMaxBits = 15;
constexpr int kMaxLitLen = 286;
constexpr int kMaxDist = 30;

[[noreturn]] void corrupt(const std::string& what) {
    throw PngError(ErrorKind::Malformed, "IDAT", "malformed zlib stream: " + what);
}

struct Huffman {
    std::array<short, kMaxBits + 1> count{};
    std::array<short, 288> symbol{};
};

class BitReader {
public:
    explicit BitReader(std::span<const std::uint8_t> in) : in_(in) {}

    unsigned bits(int need) {
        long val = bitbuf_;
        while (bitcnt_ < need) {
            if (pos_ >= in_.size()) corrupt("unexpected end of data");
            val |= static_cast<long>(in_[pos_++]) << bitcnt_;
            bitcnt_ += 8;
        }
        bitbuf_ = static_cast<int>(val >> need);
        bitcnt_ -= need;
        return static_cast<unsigned>(val & ((1L << need) - 1));
    }

    void align() {
        bitbuf_ = 0;
        bitcnt_ = 0;
    }

    std::size_t pos() const noexcept { return pos_; }
    void skip(std::size_t n) { pos_ += n; }
    std::span<const std::uint8_t> data() const noexcept { return in_; }

private:
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
    int bitbuf_ = 0;
    int bitcnt_ = 0;
};

// Returns the number of unused codes (0 for a complete code), negative when
// the lengths over-subscribe the code space.
int build(Huffman& h, const short* lengths, int n) {
    h.count.fill(0);
    for (int s = 0; s < n; ++s) h.count[lengths[s]]++;
    if (h.count[0] == n) return 0;
    int left = 1;
    for (int len = 1; len <= kMaxBits; ++len) {
        left <<= 1;
        left -= h.count[len];
        if (left < 0) return left;
    }
    std::array<short, kMaxBits + 1> offs{};
    for (int len = 1; len < kMaxBits; ++len) offs[len + 1] = offs[len] + h.count[len];
    for (int s = 0; s < n; ++s) {
        if (lengths[s] != 0) h.symbol[offs[lengths[s]]++] = static_cast<short>(s);
    }
    return left;
}

int decode_symbol(BitReader& br, const Huffman& h) {
    int code = 0, first = 0, index = 0;
    for (int len = 1; len <= kMaxBits; ++len) {
        code |= static_cast<int>(br.bits(1));
        int count = h.count[len];
        if (code - count < first) return h.symbol[index + (code - first)];
        index += count;
        first += count;
        first <<= 1;
        code <<= 1;
    }
    corrupt("invalid Huffman code");
}

constexpr short kLenBase[29] = {3,  4,  5,  6,  7,  8,  9,  10, 11,  13,  15,  17,  19,  23, 27,
                                31, 35, 43, 51, 59, 67, 83, 99, 115, 131, 163, 195, 227, 258};
constexpr short kLenExtra[29] = {0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2,
                                 2, 3, 3, 3, 3, 4, 4, 4, 4, 5, 5, 5, 5, 0};
constexpr short kDistBase[30] = {1,   2,   3,   4,   5,   7,    9,    13,   17,   25,
                                 33,  49,  65,  97,  129, 193,  257,  385,  513,  769,
                                 1025, 1537, 2049, 3073, 4097, 6145, 8193, 12289, 16385, 24577};
constexpr short kDistExtra[30] = {0, 0, 0, 0, 1, 1, 2, 2,  3,  3,  4,  4,  5,  5,  6,
                                  6, 7, 7, 8, 8, 9, 9, 10, 10, 11, 11, 12, 12, 13, 13};

void codes(BitReader& br, std::vector<std::uint8_t>& out, const Huffman& lencode,
           const Huffman& distcode) {
    for (;;) {
        int symbol = decode_symbol(br, lencode);
        if (symbol < 256) {
            out.push_back(static_cast<std::uint8_t>(symbol));
        } else if (symbol == 256) {
            return;
        } else {
            symbol -= 257;
            if (symbol >= 29) corrupt("invalid length symbol");
            std::size_t len = kLenBase[symbol] + br.bits(kLenExtra[symbol]);
            int dsym = decode_symbol(br, distcode);
            if (dsym >= 30) corrupt("invalid distance symbol");
            std::size_t dist = kDistBase[dsym] + br.bits(kDistExtra[dsym]);
            if (dist > out.size()) corrupt("distance too far back");
            std::size_t from = out.size() - dist;
            for (std::size_t i = 0; i < len; ++i) out.push_back(out[from + i]);
        }
    }
}

void stored(BitReader& br, std::vector<std::uint8_t>& out) {
    br.align();
    auto data = br.data();
    std::size_t pos = br.pos();
    if (pos + 4 > data.size()) corrupt("truncated stored block header");
    unsigned len = data[pos] | (data[pos + 1] << 8);
    unsigned nlen = data[pos + 2] | (data[pos + 3] << 8);
    if (len != (~nlen & 0xffffu)) corrupt("stored block length check failed");
    pos += 4;
    if (pos + len > data.size()) corrupt("truncated stored block");
    out.insert(out.end(), data.begin() + static_cast<std::ptrdiff_t>(pos),
               data.begin() + static_cast<std::ptrdiff_t>(pos + len));
    br.skip(4 + len);
}

void fixed(BitReader& br, std::vector<std::uint8_t>& out) {
    static const auto tables = [] {
        std::pair<Huffman, Huffman> t;
        short lengths[288];
        int s = 0;
        for (; s < 144; ++s) lengths[s] = 8;
        for (; s < 256; ++s) lengths[s] = 9;
        for (; s < 280; ++s) lengths[s] = 7;
        for (; s < 288; ++s) lengths[s] = 8;
        build(t.first, lengths, 288);
        for (s = 0; s < kMaxDist; ++s) lengths[s] = 5;
        build(t.second, lengths, kMaxDist);
        return t;
    }();
    codes(br, out, tables.first, tables.second);
}

void dynamic(BitReader& br, std::vector<std::uint8_t>& out) {
    static constexpr short kOrder[19] = {16, 17, 18, 0, 8, 7, 9, 6, 10, 5,
                                         11, 4,  12, 3, 13, 2, 14, 1, 15};
    int nlen = static_cast<int>(br.bits(5)) + 257;
    int ndist = static_cast<int>(br.bits(5)) + 1;
    int ncode = static_cast<int>(br.bits(4)) + 4;
    if (nlen > kMaxLitLen || ndist > kMaxDist) corrupt("bad code counts");

    short lengths[kMaxLitLen + kMaxDist] = {};
    for (int i = 0; i < ncode; ++i) lengths[kOrder[i]] = static_cast<short>(br.bits(3));
    Huffman lencode, distcode;
    if (build(lencode, lengths, 19) != 0) corrupt("incomplete code-length code");

    int index = 0;
    while (index < nlen + ndist) {
        int symbol = decode_symbol(br, lencode);
        if (symbol < 16) {
            lengths[index++] = static_cast<short>(symbol);
            continue;
        }
        short len = 0;
        int repeat;
        if (symbol == 16) {
            if (index == 0) corrupt("repeat with no previous length");
            len = lengths[index - 1];
            repeat = 3 + static_cast<int>(br.bits(2));
        } else if (symbol == 17) {
            repeat = 3 + static_cast<int>(br.bits(3));
        } else {
            repeat = 11 + static_cast<int>(br.bits(7));
        }
        if (index + repeat > nlen + ndist) corrupt("too many lengths");
        while (repeat--) lengths[index++] = len;
    }
    if (lengths[256] == 0) corrupt("missing end-of-block code");

    int err = build(lencode, lengths, nlen);
    if (err < 0 || (err > 0 && nlen - lencode.count[0] != 1)) corrupt("bad literal/length code");
    err = build(distcode, lengths + nlen, ndist);
    if (err < 0 || (err > 0 && ndist - distcode.count[0] != 1)) corrupt("bad distance code");
    codes(br, out, lencode, distcode);
}

}  // namespace

std::vector<std::uint8_t> zlib_inflate(std::span<const std::uint8_t> stream) {
    if (stream.size() < 6) corrupt("stream too short");
    const unsigned cmf = stream[0], flg = stream[1];
    if ((cmf & 0x0f) != 8 || (cmf >> 4) > 7) corrupt("unsupported compression method");
    if (((cmf << 8) | flg) % 31 != 0) corrupt("header check failed");
    if (flg & 0x20) corrupt("preset dictionary not supported");

    BitReader br(stream.subspan(2));
    std::vector<std::uint8_t> out;
    bool last = false;
    while (!last) {
        last = br.bits(1) != 0;
        switch (br.bits(2)) {
            case 0: stored(br, out); break;
            case 1: fixed(br, out); break;
            case 2: dynamic(br, out); break;
            default: corrupt("invalid block type");
        }
    }

    const std::size_t trailer = 2 + br.pos();
    if (trailer + 4 > stream.size()) corrupt("missing Adler-32 trailer");
    const std::uint32_t expected = (std::uint32_t{stream[trailer]} << 24) |
                                   (std::uint32_t{stream[trailer + 1]} << 16) |
                                   (std::uint32_t{stream[trailer + 2]} << 8) |
                                   std::uint32_t{stream[trailer + 3]};
    if (adler32(out) != expected) corrupt("Adler-32 mismatch");
    return out;
}

}  // namespace crackbench::png
