#pragma once

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "gaitforce/io_util.hpp"
#include "gaitforce/types.hpp"

namespace gaitforce {

// Trial directory layout: meta.txt plus one delimited text file per stream,
// tab-separated, first column the timestamp in seconds at microsecond
// precision. Column headers are fixed; readers reject anything unknown.

namespace detail {

inline std::string pressure_header(std::size_t sensors) {
    std::ostringstream os;
    os << "t";
    for (std::size_t i = 1; i <= sensors; ++i) os << "\t" << strfmt("p%03zu", i);
    return os.str();
}

inline constexpr const char* kImuHeader = "t\taccel_x\taccel_y\taccel_z\tgyro_x\tgyro_y\tgyro_z";
inline constexpr const char* kVgrfHeader = "t\tvgrf_n";

inline void expect_header(const std::string& got, const std::string& want,
                          const std::filesystem::path& path) {
    if (got != want)
        fail(ErrorKind::CorruptFile,
             path.string() + ": unknown column header row '" + got + "'");
}

}  // namespace detail

inline void write_trial(const std::filesystem::path& dir, const TrialRecord& trial) {
    std::filesystem::create_directories(dir);
    {
        std::ostringstream os;
        os << "subject_id " << trial.subject_id << "\n";
        os << "speed_mps " << strfmt("%.1f", trial.speed_mps) << "\n";
        os << "body_weight_N " << strfmt("%.6f", trial.body_weight_n) << "\n";
        os << "foot both\n";
        write_text_file(dir / "meta.txt", os.str());
    }
    for (FootSide foot : kBothFeet) {
        const std::string side = to_string(foot);
        {
            const auto& frames = trial.pressure[foot];
            std::ostringstream os;
            os << detail::pressure_header(frames.empty() ? 96 : frames.front().values.size())
               << "\n";
            for (const auto& f : frames) {
                os << strfmt("%.6f", f.t);
                for (double v : f.values) os << "\t" << strfmt("%.3f", v);
                os << "\n";
            }
            write_text_file(dir / ("pressure_" + side + ".tsv"), os.str());
        }
        {
            std::ostringstream os;
            os << detail::kImuHeader << "\n";
            for (const auto& s : trial.imu[foot]) {
                os << strfmt("%.6f\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f", s.t, s.accel[0],
                             s.accel[1], s.accel[2], s.gyro[0], s.gyro[1], s.gyro[2])
                   << "\n";
            }
            write_text_file(dir / ("imu_" + side + ".tsv"), os.str());
        }
        {
            std::ostringstream os;
            os << detail::kVgrfHeader << "\n";
            for (const auto& s : trial.vgrf[foot])
                os << strfmt("%.6f\t%.6f", s.t, s.value) << "\n";
            write_text_file(dir / ("vgrf_" + side + ".tsv"), os.str());
        }
    }
}

inline TrialRecord read_trial(const std::filesystem::path& dir, std::size_t sensor_count = 96) {
    TrialRecord trial;
    {
        std::istringstream is(read_text_file(dir / "meta.txt"));
        std::string line;
        bool saw_subject = false, saw_speed = false, saw_weight = false, saw_foot = false;
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            const auto pos = line.find(' ');
            const std::string key = line.substr(0, pos);
            const std::string val = pos == std::string::npos ? "" : line.substr(pos + 1);
            if (key == "subject_id") {
                trial.subject_id = val;
                saw_subject = true;
            } else if (key == "speed_mps") {
                trial.speed_mps = parse_double(val, "speed_mps");
                saw_speed = true;
            } else if (key == "body_weight_N") {
                trial.body_weight_n = parse_double(val, "body_weight_N");
                saw_weight = true;
            } else if (key == "foot") {
                if (val != "both" && val != "left" && val != "right")
                    fail(ErrorKind::CorruptFile, "meta.txt: bad foot value '" + val + "'");
                saw_foot = true;
            } else {
                fail(ErrorKind::CorruptFile, "meta.txt: unknown key '" + key + "'");
            }
        }
        if (!saw_subject || !saw_speed || !saw_weight || !saw_foot)
            fail(ErrorKind::CorruptFile, "meta.txt: missing required keys");
    }

    for (FootSide foot : kBothFeet) {
        const std::string side = to_string(foot);
        {
            const auto path = dir / ("pressure_" + side + ".tsv");
            std::istringstream is(read_text_file(path));
            std::string line;
            if (!std::getline(is, line)) fail(ErrorKind::CorruptFile, path.string() + ": empty");
            detail::expect_header(line, detail::pressure_header(sensor_count), path);
            while (std::getline(is, line)) {
                if (line.empty()) continue;
                const auto toks = split_ws(line);
                if (toks.size() != sensor_count + 1)
                    fail(ErrorKind::CorruptFile,
                         strfmt("%s: row has %zu columns, expected %zu", path.string().c_str(),
                                toks.size(), sensor_count + 1));
                PressureFrame f;
                f.t = parse_double(toks[0], "timestamp");
                f.values.reserve(sensor_count);
                for (std::size_t i = 1; i < toks.size(); ++i)
                    f.values.push_back(parse_double(toks[i], "pressure"));
                trial.pressure[foot].push_back(std::move(f));
            }
        }
        {
            const auto path = dir / ("imu_" + side + ".tsv");
            std::istringstream is(read_text_file(path));
            std::string line;
            if (!std::getline(is, line)) fail(ErrorKind::CorruptFile, path.string() + ": empty");
            detail::expect_header(line, detail::kImuHeader, path);
            while (std::getline(is, line)) {
                if (line.empty()) continue;
                const auto toks = split_ws(line);
                if (toks.size() != 7)
                    fail(ErrorKind::CorruptFile, path.string() + ": row needs 7 columns");
                ImuSample s;
                s.t = parse_double(toks[0], "timestamp");
                for (int i = 0; i < 3; ++i) s.accel[i] = parse_double(toks[1 + i], "accel");
                for (int i = 0; i < 3; ++i) s.gyro[i] = parse_double(toks[4 + i], "gyro");
                trial.imu[foot].push_back(s);
            }
        }
        {
            const auto path = dir / ("vgrf_" + side + ".tsv");
            std::istringstream is(read_text_file(path));
            std::string line;
            if (!std::getline(is, line)) fail(ErrorKind::CorruptFile, path.string() + ": empty");
            detail::expect_header(line, detail::kVgrfHeader, path);
            while (std::getline(is, line)) {
                if (line.empty()) continue;
                const auto toks = split_ws(line);
                if (toks.size() != 2)
                    fail(ErrorKind::CorruptFile, path.string() + ": row needs 2 columns");
                trial.vgrf[foot].push_back(
                    {parse_double(toks[0], "timestamp"), parse_double(toks[1], "vgrf")});
            }
        }
    }
    return trial;
}

inline void write_layout_file(const std::filesystem::path& path, const SensorArrayLayout& layout) {
    std::ostringstream os;
    os << "index\tx_mm\ty_mm\n";
    for (std::size_t i = 0; i < layout.coords.size(); ++i)
        os << strfmt("%zu\t%.6f\t%.6f", i + 1, layout.coords[i][0], layout.coords[i][1]) << "\n";
    write_text_file(path, os.str());
}

inline SensorArrayLayout read_layout_file(const std::filesystem::path& path) {
    std::istringstream is(read_text_file(path));
    std::string line;
    if (!std::getline(is, line)) fail(ErrorKind::CorruptFile, path.string() + ": empty");
    detail::expect_header(line, "index\tx_mm\ty_mm", path);
    SensorArrayLayout layout;
    std::size_t expect = 1;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto toks = split_ws(line);
        if (toks.size() != 3) fail(ErrorKind::CorruptFile, path.string() + ": row needs 3 columns");
        if (parse_double(toks[0], "index") != static_cast<double>(expect))
            fail(ErrorKind::CorruptFile, path.string() + ": sensor indices must be 1..N in order");
        layout.coords.push_back({parse_double(toks[1], "x_mm"), parse_double(toks[2], "y_mm")});
        ++expect;
    }
    layout.check();
    return layout;
}

}  // namespace gaitforce
