#include "ptfix/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ptfix/errors.hpp"

namespace ptfix {

using nlohmann::json;

namespace {

Eigen::Vector3d to_vec3(const json& j) {
    if (!j.is_array() || j.size() != 3)
        throw ConfigError("config: expected a 3-element array");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json from_vec3(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void parse_rig(const json& j, RigModel& rig) {
    maybe(j, "image_width", rig.intr.width);
    maybe(j, "image_height", rig.intr.height);
    maybe(j, "fx", rig.intr.fx);
    maybe(j, "fy", rig.intr.fy);
    maybe(j, "cx", rig.intr.cx);
    maybe(j, "cy", rig.intr.cy);
    if (j.contains("pan_axis_dir")) rig.pan_axis.dir = to_vec3(j.at("pan_axis_dir")).normalized();
    if (j.contains("tilt_axis_dir")) rig.tilt_axis.dir = to_vec3(j.at("tilt_axis_dir")).normalized();
    if (j.contains("pan_axis_offset_mm")) rig.pan_axis.offset = to_vec3(j.at("pan_axis_offset_mm")) / 1000.0;
    if (j.contains("tilt_axis_offset_mm")) rig.tilt_axis.offset = to_vec3(j.at("tilt_axis_offset_mm")) / 1000.0;
    if (j.contains("joint_order")) {
        const std::string order = j.at("joint_order").get<std::string>();
        if (order == "tilt_then_pan") rig.joint_order = JointOrder::TiltThenPan;
        else if (order == "pan_then_tilt") rig.joint_order = JointOrder::PanThenTilt;
        else throw ConfigError("config: unknown joint_order '" + order + "'");
    }
    maybe(j, "quantization_step_deg", rig.quantization_step);
    maybe(j, "backlash_deg", rig.backlash);
    maybe(j, "gain_pan", rig.gain_pan);
    maybe(j, "gain_tilt", rig.gain_tilt);
    maybe(j, "corner_noise_sigma_px", rig.corner_noise_sigma);
    maybe(j, "target_noise", rig.target_noise);
    maybe(j, "pan_min_deg", rig.pan_min);
    maybe(j, "pan_max_deg", rig.pan_max);
    maybe(j, "tilt_min_deg", rig.tilt_min);
    maybe(j, "tilt_max_deg", rig.tilt_max);

    if (rig.quantization_step < 0.0 || rig.backlash < 0.0)
        throw ConfigError("config: quantization_step_deg and backlash_deg must be >= 0");
    if (rig.gain_pan <= 0.0 || rig.gain_tilt <= 0.0)
        throw ConfigError("config: gains must be > 0");
    if (!rig.intr.valid())
        throw ConfigError("config: invalid camera intrinsics");
}

void parse_board(const json& j, TargetBoard& board) {
    maybe(j, "rows", board.rows);
    maybe(j, "cols", board.cols);
    if (j.contains("square_mm")) board.square = j.at("square_mm").get<double>() / 1000.0;
    if (j.contains("position_m")) board.position = to_vec3(j.at("position_m"));
    if (j.contains("rpy_deg")) board.rpy_deg = to_vec3(j.at("rpy_deg"));
    if (board.rows < 2 || board.cols < 2 || board.square <= 0.0)
        throw ConfigError("config: board needs rows, cols >= 2 and square_mm > 0");
}

json rig_to_json(const RigModel& rig) {
    return json{
        {"image_width", rig.intr.width},
        {"image_height", rig.intr.height},
        {"fx", rig.intr.fx},
        {"fy", rig.intr.fy},
        {"cx", rig.intr.cx},
        {"cy", rig.intr.cy},
        {"pan_axis_dir", from_vec3(rig.pan_axis.dir)},
        {"pan_axis_offset_mm", from_vec3(rig.pan_axis.offset * 1000.0)},
        {"tilt_axis_dir", from_vec3(rig.tilt_axis.dir)},
        {"tilt_axis_offset_mm", from_vec3(rig.tilt_axis.offset * 1000.0)},
        {"joint_order", rig.joint_order == JointOrder::TiltThenPan ? "tilt_then_pan" : "pan_then_tilt"},
        {"quantization_step_deg", rig.quantization_step},
        {"backlash_deg", rig.backlash},
        {"gain_pan", rig.gain_pan},
        {"gain_tilt", rig.gain_tilt},
        {"corner_noise_sigma_px", rig.corner_noise_sigma},
        {"target_noise", rig.target_noise},
        {"pan_min_deg", rig.pan_min},
        {"pan_max_deg", rig.pan_max},
        {"tilt_min_deg", rig.tilt_min},
        {"tilt_max_deg", rig.tilt_max},
    };
}

json board_to_json(const TargetBoard& board) {
    return json{
        {"rows", board.rows},
        {"cols", board.cols},
        {"square_mm", board.square * 1000.0},
        {"position_m", from_vec3(board.position)},
        {"rpy_deg", from_vec3(board.rpy_deg)},
    };
}

} // namespace

Config parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    Config cfg;
    try {
        if (j.contains("rig")) parse_rig(j.at("rig"), cfg.rig);
        if (j.contains("board")) parse_board(j.at("board"), cfg.board);
        if (j.contains("sweep")) {
            const json& s = j.at("sweep");
            maybe(s, "pan_min_deg", cfg.sweep.pan_min);
            maybe(s, "pan_max_deg", cfg.sweep.pan_max);
            maybe(s, "tilt_min_deg", cfg.sweep.tilt_min);
            maybe(s, "tilt_max_deg", cfg.sweep.tilt_max);
            maybe(s, "step_deg", cfg.sweep.step);
        }
        if (j.contains("eval")) {
            const json& e = j.at("eval");
            maybe(e, "trials", cfg.eval.trials);
            maybe(e, "corrective", cfg.eval.corrective);
            maybe(e, "stop_threshold_deg", cfg.eval.stop_threshold_deg);
            maybe(e, "max_ecc_deg", cfg.eval.max_ecc_deg);
            if (e.contains("bucket_probs")) {
                const json& p = e.at("bucket_probs");
                if (!p.is_array() || p.size() != 3)
                    throw ConfigError("config: bucket_probs must have 3 entries");
                for (int i = 0; i < 3; ++i) cfg.eval.bucket_probs[i] = p[i].get<double>();
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string canonical_rig_json(const Config& cfg) {
    // json objects keep keys sorted, so the dump is canonical
    return json{{"rig", rig_to_json(cfg.rig)}, {"board", board_to_json(cfg.board)}}.dump();
}

std::string config_digest(const Config& cfg) {
    const std::string s = canonical_rig_json(cfg);
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string dump_config(const Config& cfg) {
    json j{
        {"rig", rig_to_json(cfg.rig)},
        {"board", board_to_json(cfg.board)},
        {"sweep",
         {{"pan_min_deg", cfg.sweep.pan_min},
          {"pan_max_deg", cfg.sweep.pan_max},
          {"tilt_min_deg", cfg.sweep.tilt_min},
          {"tilt_max_deg", cfg.sweep.tilt_max},
          {"step_deg", cfg.sweep.step}}},
        {"eval",
         {{"trials", cfg.eval.trials},
          {"corrective", cfg.eval.corrective},
          {"stop_threshold_deg", cfg.eval.stop_threshold_deg},
          {"bucket_probs", {cfg.eval.bucket_probs[0], cfg.eval.bucket_probs[1], cfg.eval.bucket_probs[2]}},
          {"max_ecc_deg", cfg.eval.max_ecc_deg}}},
    };
    return j.dump(2) + "\n";
}

} // namespace ptfix
