#include "ptfix/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "ptfix/errors.hpp"

namespace ptfix {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

TargetDraw sample_target(std::mt19937_64& rng, const RigModel& model, const MotorState& actual,
                         const TargetBoard& board, const EvalConfig& eval) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    TargetDraw draw;
    const double r = unit(rng);
    draw.bucket = r < eval.bucket_probs[0]              ? 0
                  : r < eval.bucket_probs[0] + eval.bucket_probs[1] ? 1
                                                                    : 2;
    const double lo = kBucketEdges[draw.bucket];
    const double hi = std::min(kBucketEdges[draw.bucket + 1], eval.max_ecc_deg);
    draw.ecc_deg = lo + (hi - lo) * unit(rng);

    const Eigen::Isometry3d c2w = cam_to_world(model, actual);
    const Eigen::Vector3d origin = c2w.translation();
    const Eigen::Vector3d plane_n = board.pose().linear() * Eigen::Vector3d::UnitZ();
    const Eigen::Vector3d plane_p = board.position;
    const double tan_e = std::tan(deg2rad(draw.ecc_deg));

    for (int attempt = 0; attempt < 100; ++attempt) {
        draw.dir_deg = 360.0 * unit(rng);
        const double th = deg2rad(draw.dir_deg);
        draw.pixel = {model.intr.cx + model.intr.fx * tan_e * std::cos(th),
                      model.intr.cy + model.intr.fy * tan_e * std::sin(th)};
        if (!model.intr.in_bounds(draw.pixel)) continue;
        const Ray3 ray = back_project(model.intr, draw.pixel);
        const Eigen::Vector3d d = c2w.linear() * Eigen::Vector3d(ray.dx, ray.dy, ray.dz);
        const double denom = plane_n.dot(d);
        if (std::abs(denom) < 1e-12) continue;
        const double s = plane_n.dot(plane_p - origin) / denom;
        if (s <= 0.0) continue;
        draw.world = origin + s * d;
        return draw;
    }
    throw Unreachable("sample_target: no in-bounds direction after 100 attempts");
}

std::vector<TrialRecord> run_experiment(const Config& cfg, const CalibrationSet& set,
                                        std::uint64_t seed, PlannerOptions opts) {
    if (cfg.eval.trials < 1) throw ConfigError("run_experiment: trials must be >= 1");

    Rig rig(cfg.rig);
    SaccadePlanner planner(set, cfg.rig.intr, opts);
    std::mt19937_64 rng(seed);

    // start at the grid sample nearest the home position
    int home = -1;
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < set.samples.size(); ++i) {
        const auto& m = set.samples[i].motor;
        const double d = m.pan * m.pan + m.tilt * m.tilt;
        if (d < best) {
            best = d;
            home = static_cast<int>(i);
        }
    }
    rig.set_motors(set.samples[home].motor);

    std::vector<TrialRecord> trials;
    trials.reserve(cfg.eval.trials);
    for (int id = 0; id < cfg.eval.trials; ++id) {
        TrialRecord trial;
        trial.id = id;
        trial.start = rig.commanded();

        const std::uint64_t obs_seed = splitmix64(seed ^ (0x10000ull + id));
        const Observation cur_obs = rig.observe(cfg.board, std::nullopt, obs_seed);
        const int s = set.find_grid_sample(trial.start);

        try {
            SaccadePlan plan;
            TargetDraw draw;
            bool planned = false;
            for (int attempt = 0; attempt < 100 && !planned; ++attempt) {
                draw = sample_target(rng, cfg.rig, rig.actual(), cfg.board, cfg.eval);
                plan = s >= 0 ? planner.solve_case_a(s, draw.pixel)
                              : planner.solve_case_b(trial.start, draw.pixel, cur_obs);
                if (plan.mode == PlanMode::InteriorBilinear && planner.within_hull(plan.solved))
                    planned = true;
                else
                    ++trial.resamples;
            }
            if (!planned)
                throw Unreachable("run_experiment: no in-hull target after 100 draws");
            trial.ecc_deg = draw.ecc_deg;
            trial.dir_deg = draw.dir_deg;
            trial.bucket = draw.bucket;
            trial.target_world = draw.world;

            const std::uint64_t exec_seed = splitmix64(seed ^ (0x20000ull + id));
            ExecutionResult res = execute(rig, cfg.board, draw.world, planner, plan,
                                          cfg.eval.corrective, cfg.eval.stop_threshold_deg,
                                          exec_seed);
            trial.plans = std::move(res.plans);
            trial.landings = std::move(res.landings);
        } catch (const Error& e) {
            trial.failed = true;
            trial.failure = e.what();
        }
        trials.push_back(std::move(trial));
    }
    return trials;
}

TrialSummary summarize(const std::vector<TrialRecord>& trials) {
    TrialSummary sum;
    std::vector<double> primary, final_err, h_signed, v_signed;
    std::array<double, 3> bucket_total{0.0, 0.0, 0.0};
    for (const auto& t : trials) {
        if (t.failed || t.landings.empty()) {
            ++sum.n_failed;
            continue;
        }
        sum.resampled_targets += t.resamples;
        const Landing& p = t.landings.front();
        const Landing& f = t.landings.back();
        primary.push_back(p.err_deg);
        final_err.push_back(f.err_deg);
        h_signed.push_back(p.err_h_deg);
        v_signed.push_back(p.err_v_deg);
        bucket_total[t.bucket] += p.err_deg;
        ++sum.bucket_n[t.bucket];
        sum.mean_abs_h += std::abs(p.err_h_deg);
        sum.mean_abs_v += std::abs(p.err_v_deg);
        if (p.err_deg < 1.0) sum.frac_under_1 += 1.0;
        if (p.err_deg < 2.0) sum.frac_under_2 += 1.0;
    }
    sum.n = static_cast<int>(primary.size());
    if (sum.n == 0) throw NoSuccessfulTrials("summarize: no successful trials");

    const double n = sum.n;
    for (double e : primary) sum.mean_primary += e;
    for (double e : final_err) sum.mean_final += e;
    sum.mean_primary /= n;
    sum.mean_final /= n;
    sum.median_primary = median(primary);
    sum.median_final = median(final_err);
    for (int b = 0; b < 3; ++b)
        sum.bucket_mean[b] = sum.bucket_n[b] ? bucket_total[b] / sum.bucket_n[b] : 0.0;
    sum.mean_abs_h /= n;
    sum.mean_abs_v /= n;
    sum.median_h = median(h_signed);
    sum.median_v = median(v_signed);
    sum.frac_under_1 /= n;
    sum.frac_under_2 /= n;
    return sum;
}

namespace {
const char* kCsvHeader =
    "trial_id,start_pan,start_tilt,ecc_deg,dir_deg,bucket,cmd_pan,cmd_tilt,mode,case,"
    "landing_u,landing_v,err_deg,err_h_deg,err_v_deg,pass_index";

const char* bucket_label(int b) {
    return b == 0 ? "0-6" : b == 1 ? "6-12" : "12-18";
}
} // namespace

void export_csv(const std::vector<TrialRecord>& trials, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("export_csv: cannot open '" + path + "'");
    out << kCsvHeader << "\n";
    for (const auto& t : trials) {
        if (t.failed) continue;
        for (size_t pass = 0; pass < t.landings.size(); ++pass) {
            const SaccadePlan& p = t.plans[pass];
            const Landing& l = t.landings[pass];
            out << t.id << ',' << fmt(t.start.pan) << ',' << fmt(t.start.tilt) << ','
                << fmt(t.ecc_deg) << ',' << fmt(t.dir_deg) << ',' << bucket_label(t.bucket) << ','
                << fmt(p.solved.pan) << ',' << fmt(p.solved.tilt) << ','
                << (p.mode == PlanMode::InteriorBilinear ? "interior" : "extrapolated") << ','
                << (p.plan_case == PlanCase::A ? 'A' : 'B') << ',' << fmt(l.pixel.u) << ','
                << fmt(l.pixel.v) << ',' << fmt(l.err_deg) << ',' << fmt(l.err_h_deg) << ','
                << fmt(l.err_v_deg) << ',' << pass << "\n";
        }
    }
    if (!out) throw IoError("export_csv: write failed for '" + path + "'");
}

void export_summary(const TrialSummary& s, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("export_summary: cannot open '" + path + "'");
    out << "n=" << s.n << "\n"
        << "n_failed=" << s.n_failed << "\n"
        << "mean_primary_deg=" << fmt(s.mean_primary) << "\n"
        << "median_primary_deg=" << fmt(s.median_primary) << "\n"
        << "mean_final_deg=" << fmt(s.mean_final) << "\n"
        << "median_final_deg=" << fmt(s.median_final) << "\n";
    for (int b = 0; b < 3; ++b)
        out << "bucket_" << bucket_label(b) << "_mean_deg=" << fmt(s.bucket_mean[b])
            << "\nbucket_" << bucket_label(b) << "_n=" << s.bucket_n[b] << "\n";
    out << "mean_abs_horizontal_deg=" << fmt(s.mean_abs_h) << "\n"
        << "mean_abs_vertical_deg=" << fmt(s.mean_abs_v) << "\n"
        << "median_horizontal_deg=" << fmt(s.median_h) << "\n"
        << "median_vertical_deg=" << fmt(s.median_v) << "\n"
        << "frac_under_1deg=" << fmt(s.frac_under_1) << "\n"
        << "frac_under_2deg=" << fmt(s.frac_under_2) << "\n"
        << "resampled_targets=" << s.resampled_targets << "\n"
        // DIJIT hardware medians, for side-by-side comparison
        << "reference_median_horizontal_deg=0.72\n"
        << "reference_median_vertical_deg=0.41\n";
    if (s.n == 0) out << "note=NoSuccessfulTrials\n";
}

void export_scatter(const std::vector<TrialRecord>& trials, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("export_scatter: cannot open '" + path + "'");
    out << "trial_id,h_deg,v_deg\n";
    for (const auto& t : trials) {
        if (t.failed || t.landings.empty()) continue;
        const Landing& l = t.landings.front();
        out << t.id << ',' << fmt(l.err_h_deg) << ',' << fmt(l.err_v_deg) << "\n";
    }
}

std::vector<TrialRecord> parse_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("parse_csv: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader)
        throw ParseError("parse_csv: bad header", 0);

    std::vector<TrialRecord> trials;
    long record = 0;
    while (std::getline(in, line)) {
        ++record;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) f.push_back(field);
        if (f.size() != 16) throw ParseError("parse_csv: bad field count", record);

        const int id = std::stoi(f[0]);
        if (trials.empty() || trials.back().id != id) {
            TrialRecord t;
            t.id = id;
            t.start.pan = std::strtod(f[1].c_str(), nullptr);
            t.start.tilt = std::strtod(f[2].c_str(), nullptr);
            t.ecc_deg = std::strtod(f[3].c_str(), nullptr);
            t.dir_deg = std::strtod(f[4].c_str(), nullptr);
            t.bucket = f[5] == "0-6" ? 0 : f[5] == "6-12" ? 1 : 2;
            trials.push_back(std::move(t));
        }
        TrialRecord& t = trials.back();
        SaccadePlan plan;
        plan.solved.pan = std::strtod(f[6].c_str(), nullptr);
        plan.solved.tilt = std::strtod(f[7].c_str(), nullptr);
        plan.mode = f[8] == "interior" ? PlanMode::InteriorBilinear : PlanMode::BoundaryExtrapolated;
        plan.plan_case = f[9] == "A" ? PlanCase::A : PlanCase::B;
        Landing l;
        l.pixel = {std::strtod(f[10].c_str(), nullptr), std::strtod(f[11].c_str(), nullptr)};
        l.err_deg = std::strtod(f[12].c_str(), nullptr);
        l.err_h_deg = std::strtod(f[13].c_str(), nullptr);
        l.err_v_deg = std::strtod(f[14].c_str(), nullptr);
        t.plans.push_back(plan);
        t.landings.push_back(l);
    }
    return trials;
}

} // namespace ptfix
