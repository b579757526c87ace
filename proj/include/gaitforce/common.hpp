#pragma once

#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace gaitforce {

enum class ErrorKind {
    NonFiniteInput,
    LengthMismatch,
    ShapeMismatch,
    TooFewSwingSamples,
    TooShort,
    NonPositiveBodyWeight,
    InsufficientEvents,
    PoorAlignment,
    EmptyData,
    DivergenceDetected,
    TooFewSamples,
    CorruptFile,
    VersionMismatch,
    NoStanceFound,
    StanceTooShort,
    ZeroRange,
    ConstantSeries,
    TooFewSubjects,
    DegenerateDesign,
    MissingInputs,
    IoError,
    ConfigError,
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::NonFiniteInput: return "NonFiniteInput";
        case ErrorKind::LengthMismatch: return "LengthMismatch";
        case ErrorKind::ShapeMismatch: return "ShapeMismatch";
        case ErrorKind::TooFewSwingSamples: return "TooFewSwingSamples";
        case ErrorKind::TooShort: return "TooShort";
        case ErrorKind::NonPositiveBodyWeight: return "NonPositiveBodyWeight";
        case ErrorKind::InsufficientEvents: return "InsufficientEvents";
        case ErrorKind::PoorAlignment: return "PoorAlignment";
        case ErrorKind::EmptyData: return "EmptyData";
        case ErrorKind::DivergenceDetected: return "DivergenceDetected";
        case ErrorKind::TooFewSamples: return "TooFewSamples";
        case ErrorKind::CorruptFile: return "CorruptFile";
        case ErrorKind::VersionMismatch: return "VersionMismatch";
        case ErrorKind::NoStanceFound: return "NoStanceFound";
        case ErrorKind::StanceTooShort: return "StanceTooShort";
        case ErrorKind::ZeroRange: return "ZeroRange";
        case ErrorKind::ConstantSeries: return "ConstantSeries";
        case ErrorKind::TooFewSubjects: return "TooFewSubjects";
        case ErrorKind::DegenerateDesign: return "DegenerateDesign";
        case ErrorKind::MissingInputs: return "MissingInputs";
        case ErrorKind::IoError: return "IoError";
        case ErrorKind::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(gaitforce::to_string(kind)) + ": " + message),
          kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

inline std::string strfmt(const char* fmt, ...) {
    va_list args;
    va_start(args, fmt);
    va_list copy;
    va_copy(copy, args);
    const int n = std::vsnprintf(nullptr, 0, fmt, copy);
    va_end(copy);
    std::string out(n > 0 ? static_cast<std::size_t>(n) : 0, '\0');
    std::vsnprintf(out.data(), out.size() + 1, fmt, args);
    va_end(args);
    return out;
}

template <class It>
bool all_finite(It first, It last) {
    for (; first != last; ++first)
        if (!std::isfinite(static_cast<double>(*first))) return false;
    return true;
}

inline bool all_finite(const std::vector<double>& v) { return all_finite(v.begin(), v.end()); }

// splitmix64; used to derive independent sub-seeds so that parallel work
// items never share RNG state.
inline std::uint64_t mix_seed(std::uint64_t seed) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
    return mix_seed(seed ^ mix_seed(salt));
}

inline std::uint64_t derive_seed(std::uint64_t seed, const std::string& salt) {
    // FNV-1a over the salt string, then mixed with the base seed.
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : salt) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return derive_seed(seed, h);
}

// CRC-32 (IEEE 802.3, reflected) used by the binary file formats.
inline std::uint32_t crc32_update(std::uint32_t crc, const void* data, std::size_t len) {
    static const auto table = [] {
        std::vector<std::uint32_t> t(256);
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    const auto* p = static_cast<const unsigned char*>(data);
    crc ^= 0xffffffffu;
    for (std::size_t i = 0; i < len; ++i) crc = table[(crc ^ p[i]) & 0xffu] ^ (crc >> 8);
    return crc ^ 0xffffffffu;
}

inline std::uint32_t crc32(const void* data, std::size_t len) { return crc32_update(0, data, len); }

// Runs fn(i) for i in [0, n). Work items must be independent; each writes
// only to its own output slot, so the result is identical for any job count.
template <class Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
    if (jobs == 0) jobs = std::thread::hardware_concurrency();
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (unsigned w = 0; w < jobs; ++w) {
        workers.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += jobs) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : workers) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace gaitforce
