#include "ptfix/calibration.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "ptfix/errors.hpp"

namespace ptfix {

using nlohmann::json;

namespace {

constexpr const char* kFormatVersion = "dijit-calib/1";

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::vector<double> grid_values(double lo, double hi, double step) {
    const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = lo + i * step;
    return v;
}

} // namespace

int CalibrationSet::lookup(int pan_index, int tilt_index) const {
    if (pan_index < 0 || pan_index >= npan() || tilt_index < 0 || tilt_index >= ntilt())
        return -1;
    return index_[static_cast<size_t>(tilt_index) * npan() + pan_index];
}

int CalibrationSet::find_grid_sample(const MotorState& m) const {
    for (size_t i = 0; i < samples.size(); ++i)
        if (std::abs(samples[i].motor.pan - m.pan) < 1e-9 &&
            std::abs(samples[i].motor.tilt - m.tilt) < 1e-9)
            return static_cast<int>(i);
    return -1;
}

void CalibrationSet::rebuild_index() {
    index_.assign(static_cast<size_t>(npan()) * ntilt(), -1);
    for (size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        if (s.pan_index >= 0 && s.tilt_index >= 0)
            index_[static_cast<size_t>(s.tilt_index) * npan() + s.pan_index] = static_cast<int>(i);
    }
}

bool CalibrationSet::operator==(const CalibrationSet& other) const {
    if (pan_values != other.pan_values || tilt_values != other.tilt_values ||
        step != other.step || digest != other.digest ||
        samples.size() != other.samples.size())
        return false;
    for (size_t i = 0; i < samples.size(); ++i) {
        const auto& a = samples[i];
        const auto& b = other.samples[i];
        if (a.motor.pan != b.motor.pan || a.motor.tilt != b.motor.tilt ||
            a.obs.imu != b.obs.imu || a.obs.corners.size() != b.obs.corners.size())
            return false;
        for (size_t j = 0; j < a.obs.corners.size(); ++j)
            if (a.obs.corners[j].first != b.obs.corners[j].first ||
                a.obs.corners[j].second.u != b.obs.corners[j].second.u ||
                a.obs.corners[j].second.v != b.obs.corners[j].second.v)
                return false;
    }
    return true;
}

CollectResult collect(Rig& rig, const TargetBoard& board, const SweepConfig& sweep,
                      const std::string& digest, std::uint64_t seed) {
    if (sweep.step <= 0.0 || sweep.pan_max < sweep.pan_min || sweep.tilt_max < sweep.tilt_min)
        throw EmptyGrid("collect: empty sweep grid");
    const RigModel& model = rig.model();
    if (sweep.pan_min < model.pan_min || sweep.pan_max > model.pan_max ||
        sweep.tilt_min < model.tilt_min || sweep.tilt_max > model.tilt_max)
        throw OutOfRange("collect: sweep range exceeds rig motion range");

    CollectResult result;
    CalibrationSet& set = result.set;
    set.pan_values = grid_values(sweep.pan_min, sweep.pan_max, sweep.step);
    set.tilt_values = grid_values(sweep.tilt_min, sweep.tilt_max, sweep.step);
    set.step = sweep.step;
    set.digest = digest;

    // Raster order: ascending pan inner, ascending tilt outer. A pre-move
    // below the first pan of each row keeps every approach ascending, which
    // pins the backlash state.
    const double pre_pan = std::max(model.pan_min, sweep.pan_min - sweep.step);
    const double pre_tilt = std::max(model.tilt_min, sweep.tilt_min - sweep.step);
    rig.set_motors({pre_pan, pre_tilt});

    std::uint64_t sample_counter = 0;
    for (int ti = 0; ti < set.ntilt(); ++ti) {
        if (pre_pan < set.pan_values.front())
            rig.set_motors({pre_pan, set.tilt_values[ti]});
        for (int pi = 0; pi < set.npan(); ++pi) {
            const MotorState cmd{set.pan_values[pi], set.tilt_values[ti]};
            rig.set_motors(cmd);
            const std::uint64_t sample_seed = splitmix64(seed ^ sample_counter++);
            Observation obs = rig.observe(board, std::nullopt, sample_seed);
            if (obs.corners.empty()) {
                result.dropped.push_back(cmd);
                continue;
            }
            set.samples.push_back({cmd, std::move(obs), pi, ti});
        }
    }
    if (set.samples.empty())
        throw AllSamplesDropped("collect: no grid point saw the board");
    set.rebuild_index();
    return result;
}

void save(const CalibrationSet& set, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("save: cannot open '" + path + "' for writing");

    json header{
        {"format", kFormatVersion},
        {"grid_pan", set.pan_values},
        {"grid_tilt", set.tilt_values},
        {"step", set.step},
        {"digest", set.digest},
    };
    out << header.dump() << "\n";
    for (const auto& s : set.samples) {
        json corners = json::array();
        for (const auto& [id, p] : s.obs.corners)
            corners.push_back(json::array({id, p.u, p.v}));
        json rec{
            {"pan", s.motor.pan},
            {"tilt", s.motor.tilt},
            {"imu", {s.obs.imu[0], s.obs.imu[1], s.obs.imu[2]}},
            {"corners", corners},
        };
        out << rec.dump() << "\n";
    }
    if (!out) throw IoError("save: write failed for '" + path + "'");
}

namespace {

CalibrationSet load_impl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("load: cannot open '" + path + "'");

    CalibrationSet set;
    std::string line;
    long record = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError("load: malformed record " + std::to_string(record) + ": " + e.what(),
                             record);
        }
        try {
            if (record == 0) {
                if (j.at("format").get<std::string>() != kFormatVersion)
                    throw ParseError("load: unsupported format '" +
                                         j.at("format").get<std::string>() + "'",
                                     record);
                set.pan_values = j.at("grid_pan").get<std::vector<double>>();
                set.tilt_values = j.at("grid_tilt").get<std::vector<double>>();
                set.step = j.at("step").get<double>();
                set.digest = j.at("digest").get<std::string>();
            } else {
                CalibrationSample s;
                s.motor.pan = j.at("pan").get<double>();
                s.motor.tilt = j.at("tilt").get<double>();
                const auto imu = j.at("imu");
                s.obs.imu = {imu.at(0).get<double>(), imu.at(1).get<double>(),
                             imu.at(2).get<double>()};
                for (const auto& c : j.at("corners"))
                    s.obs.corners.emplace_back(
                        c.at(0).get<int>(), PixelPoint{c.at(1).get<double>(), c.at(2).get<double>()});
                for (size_t i = 0; i < set.pan_values.size(); ++i)
                    if (std::abs(set.pan_values[i] - s.motor.pan) < 1e-6) s.pan_index = static_cast<int>(i);
                for (size_t i = 0; i < set.tilt_values.size(); ++i)
                    if (std::abs(set.tilt_values[i] - s.motor.tilt) < 1e-6) s.tilt_index = static_cast<int>(i);
                if (s.pan_index < 0 || s.tilt_index < 0)
                    throw ParseError("load: record " + std::to_string(record) +
                                         " motor values not on the stored grid",
                                     record);
                set.samples.push_back(std::move(s));
            }
        } catch (const json::exception& e) {
            throw ParseError("load: record " + std::to_string(record) + ": " + e.what(), record);
        }
        ++record;
    }
    if (record == 0) throw ParseError("load: empty file", 0);
    set.rebuild_index();
    return set;
}

} // namespace

CalibrationSet load(const std::string& path) { return load_impl(path); }

CalibrationSet load_checked(const std::string& path, const std::string& expected_digest) {
    CalibrationSet set = load_impl(path);
    if (set.digest != expected_digest)
        throw DigestMismatch("load: calibration digest " + set.digest +
                             " does not match current config digest " + expected_digest);
    return set;
}

} // namespace ptfix
