#pragma once

#include <algorithm>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "gaitforce/common.hpp"
#include "gaitforce/types.hpp"

namespace gaitforce {

enum class FeatureSet { T1, T2, T3 };

inline const char* to_string(FeatureSet fs) {
    switch (fs) {
        case FeatureSet::T1: return "T1";
        case FeatureSet::T2: return "T2";
        case FeatureSet::T3: return "T3";
    }
    return "?";
}

inline FeatureSet feature_set_from_string(const std::string& s) {
    if (s == "T1") return FeatureSet::T1;
    if (s == "T2") return FeatureSet::T2;
    if (s == "T3") return FeatureSet::T3;
    fail(ErrorKind::ConfigError, "unknown feature set '" + s + "'");
}

struct ChannelDesc {
    FootSide foot = FootSide::Left;
    std::string signal;  // "accel" | "gyro" | "angle" | "cops"
    std::string axis;    // "x" | "y" | "z"

    std::string name() const {
        return std::string(to_string(foot)) + "_" + signal + "_" + axis;
    }

    friend bool operator==(const ChannelDesc& a, const ChannelDesc& b) {
        return a.foot == b.foot && a.signal == b.signal && a.axis == b.axis;
    }
};

/// Ordered list of the input channels a model consumes. Order is canonical:
/// sorted by (foot, signal name, axis), so any two manifests with the same
/// channel set serialize identically.
struct ChannelManifest {
    FeatureSet feature_set = FeatureSet::T3;
    std::vector<ChannelDesc> channels;

    std::size_t channel_count() const { return channels.size(); }

    static ChannelManifest standard(FeatureSet fs) {
        ChannelManifest m;
        m.feature_set = fs;
        const bool imu = fs == FeatureSet::T1 || fs == FeatureSet::T3;
        const bool cops = fs == FeatureSet::T2 || fs == FeatureSet::T3;
        for (FootSide foot : kBothFeet) {
            if (imu) {
                for (const char* sig : {"accel", "angle", "gyro"})
                    for (const char* axis : {"x", "y", "z"})
                        m.channels.push_back({foot, sig, axis});
            }
            if (cops) {
                for (const char* axis : {"x", "y"})
                    m.channels.push_back({foot, "cops", axis});
            }
        }
        m.sort_canonical();
        return m;
    }

    void sort_canonical() {
        std::sort(channels.begin(), channels.end(), [](const ChannelDesc& a, const ChannelDesc& b) {
            return std::tuple(a.foot == FootSide::Left ? 0 : 1, a.signal, a.axis) <
                   std::tuple(b.foot == FootSide::Left ? 0 : 1, b.signal, b.axis);
        });
    }

    /// Index of a channel in this manifest; throws if absent.
    std::size_t index_of(FootSide foot, const std::string& signal, const std::string& axis) const {
        for (std::size_t i = 0; i < channels.size(); ++i) {
            const auto& c = channels[i];
            if (c.foot == foot && c.signal == signal && c.axis == axis) return i;
        }
        fail(ErrorKind::ShapeMismatch, "manifest has no channel " + std::string(to_string(foot)) +
                                           "_" + signal + "_" + axis);
    }

    std::string serialize() const {
        std::ostringstream os;
        os << "feature_set " << to_string(feature_set) << "\n";
        for (const auto& c : channels)
            os << to_string(c.foot) << " " << c.signal << " " << c.axis << "\n";
        return os.str();
    }

    static ChannelManifest parse(const std::string& text) {
        ChannelManifest m;
        std::istringstream is(text);
        std::string line;
        bool saw_header = false;
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            std::istringstream ls(line);
            std::string a, b, c;
            ls >> a >> b >> c;
            if (!saw_header) {
                if (a != "feature_set" || b.empty())
                    fail(ErrorKind::CorruptFile, "manifest must begin with feature_set");
                m.feature_set = feature_set_from_string(b);
                saw_header = true;
                continue;
            }
            if (a.empty() || b.empty() || c.empty())
                fail(ErrorKind::CorruptFile, "bad manifest channel line: " + line);
            m.channels.push_back({foot_from_string(a), b, c});
        }
        if (!saw_header) fail(ErrorKind::CorruptFile, "empty manifest");
        m.sort_canonical();
        m.check();
        return m;
    }

    /// Construction invariant: T1/T2/T3 have exactly 18/4/22 channels.
    void check() const {
        const std::size_t expected =
            feature_set == FeatureSet::T1 ? 18u : feature_set == FeatureSet::T2 ? 4u : 22u;
        if (channels.size() != expected)
            fail(ErrorKind::ShapeMismatch,
                 strfmt("%s manifest must have %zu channels, got %zu", to_string(feature_set),
                        expected, channels.size()));
        for (std::size_t i = 1; i < channels.size(); ++i)
            if (channels[i] == channels[i - 1])
                fail(ErrorKind::ShapeMismatch, "duplicate channel " + channels[i].name());
    }

    friend bool operator==(const ChannelManifest& a, const ChannelManifest& b) {
        return a.feature_set == b.feature_set && a.channels == b.channels;
    }
};

/// Positions of one manifest's channels inside another (superset) manifest.
/// Used to slice T1/T2 inputs out of T3 window containers.
inline std::vector<std::size_t> channel_slice(const ChannelManifest& subset,
                                              const ChannelManifest& superset) {
    std::vector<std::size_t> idx;
    idx.reserve(subset.channels.size());
    for (const auto& c : subset.channels) idx.push_back(superset.index_of(c.foot, c.signal, c.axis));
    return idx;
}

}  // namespace gaitforce
