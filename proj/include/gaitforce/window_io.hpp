#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gaitforce/io_util.hpp"
#include "gaitforce/preprocess.hpp"

namespace gaitforce {

// Window container format "GFW1" (see docs/FORMATS.md for the byte layout):
// header, subject table, per-window index, then channel-major float32 blocks
// plus the target block per window, CRC-32 trailer.
inline constexpr char kWindowMagic[4] = {'G', 'F', 'W', '1'};
inline constexpr std::uint32_t kWindowFormatVersion = 1;

inline void save_windows(const std::filesystem::path& path, const WindowSet& set) {
    ByteWriter w;
    w.raw(kWindowMagic, 4);
    w.u32(kWindowFormatVersion);
    w.u32(set.normalized ? 1u : 0u);
    w.u32(static_cast<std::uint32_t>(set.manifest.channel_count()));
    w.u32(static_cast<std::uint32_t>(kWindowSamples));
    w.u32(static_cast<std::uint32_t>(set.windows.size()));

    std::vector<std::string> subjects;
    std::map<std::string, std::uint32_t> subject_idx;
    for (const auto& win : set.windows)
        if (subject_idx.emplace(win.subject_id, subjects.size()).second)
            subjects.push_back(win.subject_id);
    w.u32(static_cast<std::uint32_t>(subjects.size()));
    w.str(set.manifest.serialize());
    for (const auto& s : subjects) w.str(s);

    for (const auto& win : set.windows) {
        w.u32(subject_idx.at(win.subject_id));
        w.f64(win.speed_mps);
        w.u8(win.foot == FootSide::Left ? 0 : 1);
        w.u32(static_cast<std::uint32_t>(win.cycle_index));
        w.u32(static_cast<std::uint32_t>(win.valid_length));
    }
    for (const auto& win : set.windows) {
        if (win.x.size() != set.manifest.channel_count())
            fail(ErrorKind::ShapeMismatch, "window channel count differs from manifest");
        for (const auto& ch : win.x) {
            if (ch.size() != static_cast<std::size_t>(kWindowSamples))
                fail(ErrorKind::ShapeMismatch, "window is not 200 samples long");
            for (double v : ch) w.f32(static_cast<float>(v));
        }
        for (double v : win.y) w.f32(static_cast<float>(v));
    }
    w.finish_to_file(path);
}

inline WindowSet load_windows(const std::filesystem::path& path) {
    ByteReader r(path);
    char magic[4];
    r.raw(magic, 4);
    if (std::memcmp(magic, kWindowMagic, 4) != 0)
        fail(ErrorKind::CorruptFile, path.string() + " is not a window container");
    const std::uint32_t version = r.u32();
    if (version != kWindowFormatVersion)
        fail(ErrorKind::VersionMismatch,
             strfmt("window container version %u, expected %u", version, kWindowFormatVersion));
    r.check_crc();

    WindowSet set;
    set.normalized = (r.u32() & 1u) != 0;
    const std::uint32_t channels = r.u32();
    const std::uint32_t samples = r.u32();
    if (samples != static_cast<std::uint32_t>(kWindowSamples))
        fail(ErrorKind::CorruptFile, strfmt("unsupported window length %u", samples));
    const std::uint32_t count = r.u32();
    const std::uint32_t n_subjects = r.u32();
    set.manifest = ChannelManifest::parse(r.str());
    if (set.manifest.channel_count() != channels)
        fail(ErrorKind::CorruptFile, "manifest channel count disagrees with header");

    std::vector<std::string> subjects(n_subjects);
    for (auto& s : subjects) s = r.str();

    set.windows.resize(count);
    for (auto& win : set.windows) {
        const std::uint32_t si = r.u32();
        if (si >= subjects.size()) fail(ErrorKind::CorruptFile, "subject index out of range");
        win.subject_id = subjects[si];
        win.speed_mps = r.f64();
        win.foot = r.u8() == 0 ? FootSide::Left : FootSide::Right;
        win.cycle_index = static_cast<int>(r.u32());
        win.valid_length = r.u32();
        if (win.valid_length > static_cast<std::size_t>(kWindowSamples))
            fail(ErrorKind::CorruptFile, "valid_length exceeds window size");
    }
    for (auto& win : set.windows) {
        win.x.assign(channels, std::vector<double>(kWindowSamples));
        for (auto& ch : win.x)
            for (double& v : ch) v = static_cast<double>(r.f32());
        win.y.assign(kWindowSamples, 0.0);
        for (double& v : win.y) v = static_cast<double>(r.f32());
    }
    return set;
}

}  // namespace gaitforce
