#include "crackbench/png.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iterator>

namespace crackbench::png {

PngError::PngError(ErrorKind kind, std::string chunk, const std::string& what)
    : Error(chunk.empty() ? what : what + " (chunk " + chunk + ")"),
      kind_(kind),
      chunk_(std::move(chunk)) {}

namespace {

const std::array<std::uint32_t, 256>& crc_table() {
    static const auto table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t n = 0; n < 256; ++n) {
            std::uint32_t c = n;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
            t[n] = c;
        }
        return t;
    }();
    return table;
}

std::uint32_t crc_update(std::uint32_t crc, std::span<const std::uint8_t> bytes) noexcept {
    const auto& table = crc_table();
    for (std::uint8_t b : bytes) crc = table[(crc ^ b) & 0xff] ^ (crc >> 8);
    return crc;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t pos) {
    return (std::uint32_t{in[pos]} << 24) | (std::uint32_t{in[pos + 1]} << 16) |
           (std::uint32_t{in[pos + 2]} << 8) | std::uint32_t{in[pos + 3]};
}

void put_chunk(std::vector<std::uint8_t>& out, const char (&type)[5],
               std::span<const std::uint8_t> data) {
    put_u32(out, static_cast<std::uint32_t>(data.size()));
    const std::size_t type_at = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    put_u32(out, crc32(std::span<const std::uint8_t>(out).subspan(type_at, 4 + data.size())));
}

std::uint8_t paeth(int a, int b, int c) noexcept {
    const int p = a + b - c;
    const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return static_cast<std::uint8_t>(a);
    if (pb <= pc) return static_cast<std::uint8_t>(b);
    return static_cast<std::uint8_t>(c);
}

// Reverses the per-scanline filters in place. `bpp` is bytes per pixel.
void unfilter(std::vector<std::uint8_t>& data, std::size_t stride, std::size_t rows,
              std::size_t bpp) {
    std::vector<std::uint8_t> zero(stride, 0);
    for (std::size_t y = 0; y < rows; ++y) {
        std::uint8_t* line = &data[y * (stride + 1)];
        const std::uint8_t filter = line[0];
        std::uint8_t* cur = line + 1;
        const std::uint8_t* prev = y == 0 ? zero.data() : &data[(y - 1) * (stride + 1) + 1];
        for (std::size_t i = 0; i < stride; ++i) {
            const int a = i >= bpp ? cur[i - bpp] : 0;
            const int b = prev[i];
            const int c = i >= bpp ? prev[i - bpp] : 0;
            switch (filter) {
                case 0: break;
                case 1: cur[i] = static_cast<std::uint8_t>(cur[i] + a); break;
                case 2: cur[i] = static_cast<std::uint8_t>(cur[i] + b); break;
                case 3: cur[i] = static_cast<std::uint8_t>(cur[i] + ((a + b) >> 1)); break;
                case 4: cur[i] = static_cast<std::uint8_t>(cur[i] + paeth(a, b, c)); break;
                default:
                    throw PngError(ErrorKind::UnsupportedFormat, "IDAT",
                                   "unknown scanline filter " + std::to_string(filter));
            }
        }
    }
}

}  // namespace

std::uint32_t crc32(std::span<const std::uint8_t> bytes) noexcept {
    return crc_update(0xffffffffu, bytes) ^ 0xffffffffu;
}

std::uint32_t adler32(std::span<const std::uint8_t> bytes) noexcept {
    constexpr std::uint32_t kMod = 65521;
    // 5552 is the largest block for which the sums cannot overflow 32 bits.
    std::uint32_t a = 1, b = 0;
    std::size_t i = 0;
    while (i < bytes.size()) {
        const std::size_t end = std::min(bytes.size(), i + 5552);
        for (; i < end; ++i) {
            a += bytes[i];
            b += a;
        }
        a %= kMod;
        b %= kMod;
    }
    return (b << 16) | a;
}

std::vector<std::uint8_t> encode(const Raster& image) {
    if (image.empty()) throw InvalidArgument("png encode: raster is empty");

    const auto width = static_cast<std::uint32_t>(image.width());
    const auto height = static_cast<std::uint32_t>(image.height());
    const std::size_t stride = std::size_t{width} * 3;

    std::vector<std::uint8_t> raw;
    raw.reserve((stride + 1) * height);
    for (std::uint32_t y = 0; y < height; ++y) {
        raw.push_back(0);
        const std::uint8_t* row = image.row(static_cast<int>(y));
        raw.insert(raw.end(), row, row + stride);
    }

    const std::size_t blocks = std::max<std::size_t>(1, (raw.size() + kMaxStoredBlock - 1) / kMaxStoredBlock);
    std::vector<std::uint8_t> zlib;
    zlib.reserve(raw.size() + blocks * 5 + 6);
    zlib.push_back(0x78);  // deflate, 32K window
    zlib.push_back(0x01);  // no dictionary, fastest; (0x7801 % 31 == 0)
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::size_t begin = b * kMaxStoredBlock;
        const std::size_t len = std::min(kMaxStoredBlock, raw.size() - begin);
        zlib.push_back(b + 1 == blocks ? 1 : 0);
        zlib.push_back(static_cast<std::uint8_t>(len & 0xff));
        zlib.push_back(static_cast<std::uint8_t>(len >> 8));
        zlib.push_back(static_cast<std::uint8_t>(~len & 0xff));
        zlib.push_back(static_cast<std::uint8_t>((~len >> 8) & 0xff));
        zlib.insert(zlib.end(), raw.begin() + static_cast<std::ptrdiff_t>(begin),
                    raw.begin() + static_cast<std::ptrdiff_t>(begin + len));
    }
    put_u32(zlib, adler32(raw));

    std::vector<std::uint8_t> out(std::begin(kSignature), std::end(kSignature));
    out.reserve(8 + 25 + zlib.size() + 12 + 12);
    std::vector<std::uint8_t> ihdr;
    put_u32(ihdr, width);
    put_u32(ihdr, height);
    ihdr.insert(ihdr.end(), {8, 2, 0, 0, 0});  // depth, RGB, deflate, filter set 0, no interlace
    put_chunk(out, "IHDR", ihdr);
    put_chunk(out, "IDAT", zlib);
    put_chunk(out, "IEND", {});
    return out;
}

Raster decode(std::span<const std::uint8_t> file) {
    if (file.size() < 8 || !std::equal(std::begin(kSignature), std::end(kSignature), file.begin())) {
        throw PngError(ErrorKind::MalformedSignature, "", "not a PNG file: bad signature");
    }

    std::uint32_t width = 0, height = 0;
    int channels = 0;
    bool seen_ihdr = false, seen_iend = false;
    std::vector<std::uint8_t> idat;

    std::size_t pos = 8;
    while (!seen_iend) {
        if (pos + 12 > file.size()) {
            throw PngError(ErrorKind::Malformed, seen_ihdr ? "IEND" : "IHDR",
                           "truncated PNG: missing chunk");
        }
        const std::uint32_t length = get_u32(file, pos);
        const std::string type(reinterpret_cast<const char*>(&file[pos + 4]), 4);
        if (length > 0x7fffffffu || pos + 12 + length > file.size()) {
            throw PngError(ErrorKind::Malformed, type, "truncated PNG chunk");
        }
        const auto body = file.subspan(pos + 8, length);
        const std::uint32_t stored_crc = get_u32(file, pos + 8 + length);
        if (crc32(file.subspan(pos + 4, 4 + length)) != stored_crc) {
            throw PngError(ErrorKind::CrcMismatch, type, "chunk CRC mismatch");
        }
        pos += 12 + length;

        if (!seen_ihdr && type != "IHDR") {
            throw PngError(ErrorKind::Malformed, type, "first chunk must be IHDR");
        }
        if (type == "IHDR") {
            if (seen_ihdr || length != 13) {
                throw PngError(ErrorKind::Malformed, type, "bad IHDR");
            }
            seen_ihdr = true;
            width = get_u32(body, 0);
            height = get_u32(body, 4);
            const int depth = body[8], color = body[9];
            if (width == 0 || height == 0 || width > 0x7fffffffu || height > 0x7fffffffu) {
                throw PngError(ErrorKind::Malformed, type, "invalid image dimensions");
            }
            if (depth != 8 || (color != 2 && color != 6)) {
                throw PngError(ErrorKind::UnsupportedFormat, type,
                               "only 8-bit RGB and RGBA images are supported");
            }
            if (body[10] != 0 || body[11] != 0) {
                throw PngError(ErrorKind::UnsupportedFormat, type, "unknown compression or filter method");
            }
            if (body[12] != 0) {
                throw PngError(ErrorKind::UnsupportedFormat, type, "interlaced images are not supported");
            }
            channels = color == 2 ? 3 : 4;
        } else if (type == "IDAT") {
            idat.insert(idat.end(), body.begin(), body.end());
        } else if (type == "IEND") {
            seen_iend = true;
        } else if ((type[0] & 0x20) == 0) {
            // Unknown critical chunk (PLTE is critical but irrelevant for RGB).
            if (type != "PLTE") {
                throw PngError(ErrorKind::UnsupportedFormat, type, "unknown critical chunk");
            }
        }
    }
    if (idat.empty()) throw PngError(ErrorKind::Malformed, "IDAT", "no image data");

    std::vector<std::uint8_t> data = zlib_inflate(idat);
    const std::size_t stride = std::size_t{width} * static_cast<std::size_t>(channels);
    if (data.size() != (stride + 1) * height) {
        throw PngError(ErrorKind::Malformed, "IDAT", "decompressed size does not match IHDR");
    }
    unfilter(data, stride, height, static_cast<std::size_t>(channels));

    Raster out(static_cast<int>(width), static_cast<int>(height));
    for (std::uint32_t y = 0; y < height; ++y) {
        const std::uint8_t* src = &data[y * (stride + 1) + 1];
        std::uint8_t* dst = out.row(static_cast<int>(y));
        if (channels == 3) {
            std::memcpy(dst, src, stride);
            continue;
        }
        for (std::uint32_t x = 0; x < width; ++x) {
            const unsigned a = src[4 * x + 3];
            for (int c = 0; c < 3; ++c) {
                const unsigned v = src[4 * x + c] * a + 255u * (255u - a);
                dst[3 * x + c] = static_cast<std::uint8_t>((v + 127) / 255);
            }
        }
    }
    return out;
}

void write_file(const std::filesystem::path& path, const Raster& image) {
    const auto bytes = encode(image);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path, "io-failure: cannot open for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError(path, "io-failure: write failed");
}

Raster read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "io-failure: cannot open for reading");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode(bytes);
}

}  // namespace crackbench::png
