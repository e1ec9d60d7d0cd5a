// ptfix: pan/tilt saccade calibration and evaluation against a simulated rig.
//
// Subcommands:
//   calibrate  run the calibration sweep and save the set
//   evaluate   run chained saccade trials and export CSV/summary/scatter
//   saccade    plan and execute a single saccade, print the result
//   oracle     brute-force fixation search for one target (debugging)

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ptfix/calibration.hpp"
#include "ptfix/config.hpp"
#include "ptfix/errors.hpp"
#include "ptfix/eval.hpp"
#include "ptfix/saccade.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitCalibration = 3;
constexpr int kExitEvaluation = 4;

struct GlobalOpts {
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    int trials = -1;
    int corrective = -1;
    double step = -1.0;
    bool strict_digest = false;
};

ptfix::Config make_config(const GlobalOpts& g) {
    ptfix::Config cfg;
    if (!g.config_path.empty()) cfg = ptfix::load_config(g.config_path);
    if (g.step > 0.0) cfg.sweep.step = g.step;
    if (g.trials >= 0) cfg.eval.trials = g.trials;
    if (g.corrective >= 0) cfg.eval.corrective = g.corrective;
    return cfg;
}

ptfix::CalibrationSet obtain_calibration(const ptfix::Config& cfg, const GlobalOpts& g,
                                         const std::string& calib_path) {
    if (!calib_path.empty()) {
        if (g.strict_digest)
            return ptfix::load_checked(calib_path, ptfix::config_digest(cfg));
        return ptfix::load(calib_path);
    }
    ptfix::Rig rig(cfg.rig);
    auto result = ptfix::collect(rig, cfg.board, cfg.sweep, ptfix::config_digest(cfg), g.seed);
    if (!result.dropped.empty())
        std::cerr << "warning: " << result.dropped.size()
                  << " grid point(s) dropped (board not visible)\n";
    return std::move(result.set);
}

void warn_low_correspondences(const ptfix::SaccadePlanner& planner) {
    if (planner.low_correspondence_count() > 0)
        std::cerr << "warning: " << planner.low_correspondence_count()
                  << " homography estimate(s) used fewer than 10 correspondences; "
                     "conditioning may be poor near the field-of-view edges\n";
}

int cmd_calibrate(const GlobalOpts& g) {
    const ptfix::Config cfg = make_config(g);
    ptfix::Rig rig(cfg.rig);
    auto result = ptfix::collect(rig, cfg.board, cfg.sweep, ptfix::config_digest(cfg), g.seed);

    std::filesystem::create_directories(g.out_dir);
    const std::string path = g.out_dir + "/calibration.jsonl";
    ptfix::save(result.set, path);

    std::cout << "collected " << result.set.samples.size() << " samples on a "
              << result.set.npan() << "x" << result.set.ntilt() << " grid (step "
              << result.set.step << " deg)\n";
    for (const auto& d : result.dropped)
        std::cout << "dropped: pan=" << d.pan << " tilt=" << d.tilt << "\n";
    std::cout << "wrote " << path << "\n";
    return kExitOk;
}

int cmd_evaluate(const GlobalOpts& g, const std::string& calib_path, bool nearest_neighbor) {
    const ptfix::Config cfg = make_config(g);
    const ptfix::CalibrationSet set = obtain_calibration(cfg, g, calib_path);

    ptfix::PlannerOptions opts;
    opts.nearest_neighbor_only = nearest_neighbor;
    const auto trials = ptfix::run_experiment(cfg, set, g.seed, opts);
    const auto summary = ptfix::summarize(trials);

    std::filesystem::create_directories(g.out_dir);
    ptfix::export_csv(trials, g.out_dir + "/trials.csv");
    ptfix::export_summary(summary, g.out_dir + "/summary.txt");
    ptfix::export_scatter(trials, g.out_dir + "/scatter.csv");

    std::cout << "trials=" << summary.n << " failed=" << summary.n_failed
              << "\nmean_primary_deg=" << summary.mean_primary
              << "\nmean_final_deg=" << summary.mean_final
              << "\nfrac_under_1deg=" << summary.frac_under_1
              << "\nfrac_under_2deg=" << summary.frac_under_2 << "\n";
    std::cout << "wrote " << g.out_dir << "/{trials.csv,summary.txt,scatter.csv}\n";
    return kExitOk;
}

int cmd_saccade(const GlobalOpts& g, const std::string& calib_path, double ecc, double dir) {
    const ptfix::Config cfg = make_config(g);
    const ptfix::CalibrationSet set = obtain_calibration(cfg, g, calib_path);

    ptfix::Rig rig(cfg.rig);
    const int home = set.find_grid_sample({0.0, 0.0});
    if (home < 0) {
        std::cerr << "error: calibration grid has no sample at pan=0 tilt=0\n";
        return kExitEvaluation;
    }
    rig.set_motors(set.samples[home].motor);

    ptfix::SaccadePlanner planner(set, cfg.rig.intr);
    const double th = ptfix::deg2rad(dir);
    const double tan_e = std::tan(ptfix::deg2rad(ecc));
    const ptfix::PixelPoint t{cfg.rig.intr.cx + cfg.rig.intr.fx * tan_e * std::cos(th),
                              cfg.rig.intr.cy + cfg.rig.intr.fy * tan_e * std::sin(th)};

    // place the simulated marker where that pixel meets the board plane
    const ptfix::TargetDraw probe = [&] {
        ptfix::TargetDraw d;
        const Eigen::Isometry3d c2w = ptfix::cam_to_world(cfg.rig, rig.actual());
        const ptfix::Ray3 ray = ptfix::back_project(cfg.rig.intr, t);
        const Eigen::Vector3d dw = c2w.linear() * Eigen::Vector3d(ray.dx, ray.dy, ray.dz);
        const Eigen::Vector3d n = cfg.board.pose().linear() * Eigen::Vector3d::UnitZ();
        const double s = n.dot(cfg.board.position - c2w.translation()) / n.dot(dw);
        d.world = c2w.translation() + s * dw;
        d.pixel = t;
        d.ecc_deg = ecc;
        d.dir_deg = dir;
        return d;
    }();

    const auto plan = planner.solve_case_a(home, t);
    std::cout << "plan: pan=" << plan.solved.pan << " tilt=" << plan.solved.tilt
              << " cell=(" << plan.cell[0] << "," << plan.cell[1] << ")"
              << " alpha=" << plan.alpha << " beta=" << plan.beta << " mode="
              << (plan.mode == ptfix::PlanMode::InteriorBilinear ? "interior" : "extrapolated")
              << "\n";
    const auto res = ptfix::execute(rig, cfg.board, probe.world, planner, plan,
                                    cfg.eval.corrective, cfg.eval.stop_threshold_deg, g.seed);
    for (size_t i = 0; i < res.landings.size(); ++i) {
        const auto& l = res.landings[i];
        std::cout << (i == 0 ? "primary" : "corrective") << ": landing=(" << l.pixel.u << ","
                  << l.pixel.v << ") err=" << l.err_deg << " deg (h=" << l.err_h_deg
                  << ", v=" << l.err_v_deg << ")\n";
    }
    warn_low_correspondences(planner);
    return kExitOk;
}

int cmd_oracle(const GlobalOpts& g, double ecc, double dir, double resolution) {
    const ptfix::Config cfg = make_config(g);
    ptfix::Rig rig(cfg.rig);
    rig.set_motors({0.0, 0.0});

    const double th = ptfix::deg2rad(dir);
    const double tan_e = std::tan(ptfix::deg2rad(ecc));
    const ptfix::PixelPoint t{cfg.rig.intr.cx + cfg.rig.intr.fx * tan_e * std::cos(th),
                              cfg.rig.intr.cy + cfg.rig.intr.fy * tan_e * std::sin(th)};
    const Eigen::Isometry3d c2w = ptfix::cam_to_world(cfg.rig, rig.actual());
    const ptfix::Ray3 ray = ptfix::back_project(cfg.rig.intr, t);
    const Eigen::Vector3d dw = c2w.linear() * Eigen::Vector3d(ray.dx, ray.dy, ray.dz);
    const Eigen::Vector3d n = cfg.board.pose().linear() * Eigen::Vector3d::UnitZ();
    const double s = n.dot(cfg.board.position - c2w.translation()) / n.dot(dw);
    const Eigen::Vector3d world = c2w.translation() + s * dw;

    const auto best = ptfix::oracle_fixate(cfg.rig, cfg.board, world, resolution);
    std::cout << "target: world=(" << world.x() << "," << world.y() << "," << world.z()
              << ")\noracle: pan=" << best.pan << " tilt=" << best.tilt << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"data-driven saccade control on a simulated pan/tilt camera rig"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config_path, "JSON config file");
    app.add_option("--seed", g.seed, "master RNG seed");
    app.add_option("--out", g.out_dir, "output directory");
    app.add_option("--trials", g.trials, "number of chained trials");
    app.add_option("--corrective", g.corrective, "corrective saccades per trial");
    app.add_option("--step", g.step, "calibration sweep step, degrees");
    app.add_flag("--strict-digest", g.strict_digest,
                 "fail if a loaded calibration set's config digest differs");

    auto* calibrate = app.add_subcommand("calibrate", "run the calibration sweep and save it");
    calibrate->fallthrough();

    std::string calib_path;
    bool nearest_neighbor = false;
    auto* evaluate = app.add_subcommand("evaluate", "run saccade trials and export results");
    evaluate->fallthrough();
    evaluate->add_option("--calib", calib_path, "load a saved calibration set instead of sweeping");
    evaluate->add_flag("--nn", nearest_neighbor,
                       "ablation: nearest-neighbor lookup instead of bilinear interpolation");

    double ecc = 10.0, dir = 0.0;
    auto* saccade = app.add_subcommand("saccade", "single saccade: plan, execute, print");
    saccade->fallthrough();
    saccade->add_option("--calib", calib_path, "load a saved calibration set");
    saccade->add_option("--ecc", ecc, "target eccentricity, degrees");
    saccade->add_option("--dir", dir, "target direction angle, degrees (0 = right)");

    double resolution = 0.5;
    auto* oracle = app.add_subcommand("oracle", "brute-force fixation for one target");
    oracle->fallthrough();
    oracle->add_option("--ecc", ecc, "target eccentricity, degrees");
    oracle->add_option("--dir", dir, "target direction angle, degrees");
    oracle->add_option("--resolution", resolution, "grid search resolution, degrees");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (calibrate->parsed()) return cmd_calibrate(g);
        if (evaluate->parsed()) return cmd_evaluate(g, calib_path, nearest_neighbor);
        if (saccade->parsed()) return cmd_saccade(g, calib_path, ecc, dir);
        if (oracle->parsed()) return cmd_oracle(g, ecc, dir, resolution);
    } catch (const ptfix::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ptfix::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ptfix::DigestMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCalibration;
    } catch (const ptfix::EmptyGrid& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCalibration;
    } catch (const ptfix::AllSamplesDropped& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCalibration;
    } catch (const ptfix::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCalibration;
    } catch (const ptfix::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitEvaluation;
    }
    return kExitOk;
}
