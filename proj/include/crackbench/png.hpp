#pragma once

// Uncompressed PNG writer and a general PNG reader.
//
// The writer emits 8-bit RGB, filter type 0 on every scanline, and a zlib
// stream made only of stored deflate blocks, so the bytes are a pure
// function of the pixels. The reader accepts 8-bit RGB and RGBA images from
// any encoder (all five scanline filters, stored/fixed/dynamic deflate).

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "crackbench/error.hpp"
#include "crackbench/raster.hpp"

namespace crackbench::png {

enum class ErrorKind { MalformedSignature, Malformed, CrcMismatch, UnsupportedFormat };

class PngError : public Error {
public:
    // `chunk` names the offending chunk type ("IHDR", "IDAT", ...), or is
    // empty when the failure precedes any chunk.
    PngError(ErrorKind kind, std::string chunk, const std::string& what);

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& chunk() const noexcept { return chunk_; }

private:
    ErrorKind kind_;
    std::string chunk_;
};

inline constexpr std::uint8_t kSignature[8] = {137, 80, 78, 71, 13, 10, 26, 10};

// Largest payload of one stored deflate block.
inline constexpr std::size_t kMaxStoredBlock = 65535;

std::uint32_t crc32(std::span<const std::uint8_t> bytes) noexcept;
std::uint32_t adler32(std::span<const std::uint8_t> bytes) noexcept;

// Throws InvalidArgument for an empty raster.
std::vector<std::uint8_t> encode(const Raster& image);

// RGBA input is composited over opaque white.
Raster decode(std::span<const std::uint8_t> file);

// zlib-wrapped inflate (RFC 1950/1951). Verifies the Adler-32 trailer.
// Throws PngError{Malformed, "IDAT"} on corrupt input.
std::vector<std::uint8_t> zlib_inflate(std::span<const std::uint8_t> stream);

void write_file(const std::filesystem::path& path, const Raster& image);
Raster read_file(const std::filesystem::path& path);

}  // namespace crackbench::png
