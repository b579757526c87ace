#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gaitforce/common.hpp"

static_assert(std::endian::native == std::endian::little,
              "binary file formats are little-endian; big-endian hosts are unsupported");

namespace gaitforce {

/// Byte buffer with CRC-tracked append/consume, backing the binary formats.
struct ByteWriter {
    std::string bytes;

    void raw(const void* p, std::size_t n) { bytes.append(static_cast<const char*>(p), n); }
    void u8(std::uint8_t v) { raw(&v, 1); }
    void u32(std::uint32_t v) { raw(&v, 4); }
    void u64(std::uint64_t v) { raw(&v, 8); }
    void f32(float v) { raw(&v, 4); }
    void f64(double v) { raw(&v, 8); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        raw(s.data(), s.size());
    }

    /// Appends the CRC-32 of everything written so far and flushes to disk.
    void finish_to_file(const std::filesystem::path& path) {
        const std::uint32_t crc = crc32(bytes.data(), bytes.size());
        u32(crc);
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) fail(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
        f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!f) fail(ErrorKind::IoError, "short write to " + path.string());
    }
};

struct ByteReader {
    std::string bytes;
    std::size_t pos = 0;

    explicit ByteReader(const std::filesystem::path& path) {
        std::ifstream f(path, std::ios::binary);
        if (!f) fail(ErrorKind::IoError, "cannot open " + path.string());
        std::ostringstream ss;
        ss << f.rdbuf();
        bytes = std::move(ss).str();
    }

    void raw(void* p, std::size_t n) {
        if (pos + n > bytes.size()) fail(ErrorKind::CorruptFile, "unexpected end of file");
        std::memcpy(p, bytes.data() + pos, n);
        pos += n;
    }
    std::uint8_t u8() { std::uint8_t v; raw(&v, 1); return v; }
    std::uint32_t u32() { std::uint32_t v; raw(&v, 4); return v; }
    std::uint64_t u64() { std::uint64_t v; raw(&v, 8); return v; }
    float f32() { float v; raw(&v, 4); return v; }
    double f64() { double v; raw(&v, 8); return v; }
    std::string str() {
        const std::uint32_t n = u32();
        if (pos + n > bytes.size()) fail(ErrorKind::CorruptFile, "truncated string field");
        std::string s = bytes.substr(pos, n);
        pos += n;
        return s;
    }

    /// Validates the trailing CRC-32 over everything before it.
    void check_crc() const {
        if (bytes.size() < 4) fail(ErrorKind::CorruptFile, "file too small for checksum");
        std::uint32_t stored;
        std::memcpy(&stored, bytes.data() + bytes.size() - 4, 4);
        const std::uint32_t actual = crc32(bytes.data(), bytes.size() - 4);
        if (stored != actual)
            fail(ErrorKind::CorruptFile,
                 strfmt("checksum mismatch: stored %08x, computed %08x", stored, actual));
    }
};

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) fail(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
    f << content;
    if (!f) fail(ErrorKind::IoError, "short write to " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail(ErrorKind::IoError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return std::move(ss).str();
}

inline std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

inline double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        fail(ErrorKind::CorruptFile, "cannot parse " + what + " from '" + s + "'");
    }
}

}  // namespace gaitforce
