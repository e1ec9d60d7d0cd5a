#include "ptfix/saccade.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "ptfix/errors.hpp"

namespace ptfix {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

double cross2(const PixelPoint& o, const PixelPoint& a, const PixelPoint& b) {
    return (a.u - o.u) * (b.v - o.v) - (a.v - o.v) * (b.u - o.u);
}

// Inclusive point-in-quad test: all edge cross products on the same side as
// the quad's winding, with points on an edge counted as inside.
bool point_in_quad(const PixelPoint& t, const std::array<PixelPoint, 4>& q) {
    double area = 0.0;
    for (int i = 0; i < 4; ++i) area += cross2(q[i], q[(i + 1) % 4], q[(i + 2) % 4]);
    const double sign = area >= 0.0 ? 1.0 : -1.0;
    for (int i = 0; i < 4; ++i) {
        const double c = cross2(q[i], q[(i + 1) % 4], t);
        const double scale = std::hypot(q[(i + 1) % 4].u - q[i].u, q[(i + 1) % 4].v - q[i].v);
        if (sign * c < -1e-9 * std::max(1.0, scale)) return false;
    }
    return true;
}

// Solves t = (1-a)(1-b) c00 + a(1-b) c10 + (1-a) b c01 + a b c11 for (a, b)
// by 2-D Newton iteration from (0.5, 0.5).
std::pair<double, double> inverse_bilinear(const PixelPoint& t, const PixelPoint& c00,
                                           const PixelPoint& c10, const PixelPoint& c01,
                                           const PixelPoint& c11, double tol, int max_iter) {
    double a = 0.5, b = 0.5;
    for (int it = 0; it < max_iter; ++it) {
        const double fu = (1 - a) * (1 - b) * c00.u + a * (1 - b) * c10.u +
                          (1 - a) * b * c01.u + a * b * c11.u - t.u;
        const double fv = (1 - a) * (1 - b) * c00.v + a * (1 - b) * c10.v +
                          (1 - a) * b * c01.v + a * b * c11.v - t.v;
        const double dua = (1 - b) * (c10.u - c00.u) + b * (c11.u - c01.u);
        const double dub = (1 - a) * (c01.u - c00.u) + a * (c11.u - c10.u);
        const double dva = (1 - b) * (c10.v - c00.v) + b * (c11.v - c01.v);
        const double dvb = (1 - a) * (c01.v - c00.v) + a * (c11.v - c10.v);
        const double det = dua * dvb - dub * dva;
        if (std::abs(det) < 1e-18)
            throw NonConvergence("inverse bilinear: singular Jacobian");
        const double da = (fu * dvb - fv * dub) / det;
        const double db = (fv * dua - fu * dva) / det;
        a -= da;
        b -= db;
        if (std::abs(da) < tol && std::abs(db) < tol) return {a, b};
    }
    throw NonConvergence("inverse bilinear: Newton did not converge");
}

double dist2(const PixelPoint& a, const PixelPoint& b) {
    const double du = a.u - b.u, dv = a.v - b.v;
    return du * du + dv * dv;
}

} // namespace

SaccadePlanner::SaccadePlanner(const CalibrationSet& set, const CameraIntrinsics& intr,
                               PlannerOptions opts)
    : set_(set), intr_(intr), opts_(opts) {}

std::vector<Correspondence> SaccadePlanner::shared_corners(const Observation& dst,
                                                           const Observation& src) const {
    std::vector<Correspondence> corrs;
    for (const auto& [id, b] : src.corners) {
        for (const auto& [id2, a] : dst.corners) {
            if (id2 == id) {
                corrs.push_back({id, a, b});
                break;
            }
        }
    }
    return corrs;
}

const CenterMap& SaccadePlanner::center_map(int s) {
    auto it = maps_.find(s);
    if (it != maps_.end()) return it->second;

    CenterMap map;
    map.s = s;
    map.entries.resize(set_.samples.size());
    const Observation& obs_s = set_.samples[s].obs;
    int valid = 0;
    for (size_t k = 0; k < set_.samples.size(); ++k) {
        if (static_cast<int>(k) == s) {
            map.entries[k] = {intr_.center(), true};
            ++valid;
            continue;
        }
        const auto corrs = shared_corners(obs_s, set_.samples[k].obs);
        if (corrs.size() < 4) continue; // flagged invalid
        if (static_cast<int>(corrs.size()) < opts_.warn_below_corrs) ++low_corr_count_;
        try {
            map.entries[k] = {map_center(corrs, intr_), true};
            ++valid;
        } catch (const Error&) {
            // degenerate correspondence geometry: leave the entry invalid
        }
    }
    if (valid <= 1)
        throw NoValidNeighbors("center_map: sample " + std::to_string(s) +
                               " shares no usable corners with any neighbor");
    return maps_.emplace(s, std::move(map)).first->second;
}

SaccadePlan SaccadePlanner::solve_in_cell(const CenterMap& map, const PixelPoint& t, int pi,
                                          int ti, PlanMode mode) {
    const PixelPoint c00 = map.entries[set_.lookup(pi, ti)].c;
    const PixelPoint c10 = map.entries[set_.lookup(pi + 1, ti)].c;
    const PixelPoint c01 = map.entries[set_.lookup(pi, ti + 1)].c;
    const PixelPoint c11 = map.entries[set_.lookup(pi + 1, ti + 1)].c;

    const auto [a, b] = inverse_bilinear(t, c00, c10, c01, c11, opts_.newton_tol,
                                         opts_.newton_max_iter);

    SaccadePlan plan;
    plan.target = t;
    plan.cell = {pi, ti};
    plan.alpha = a;
    plan.beta = b;
    plan.mode = mode;
    plan.solved.pan = set_.pan_values[pi] + a * (set_.pan_values[pi + 1] - set_.pan_values[pi]);
    plan.solved.tilt = set_.tilt_values[ti] + b * (set_.tilt_values[ti + 1] - set_.tilt_values[ti]);
    return plan;
}

SaccadePlan SaccadePlanner::solve_case_a(int s, const PixelPoint& t) {
    if (!std::isfinite(t.u) || !std::isfinite(t.v))
        throw NoValidCell("solve_case_a: non-finite target");
    const CenterMap& map = center_map(s);

    if (opts_.nearest_neighbor_only) {
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (size_t k = 0; k < map.entries.size(); ++k) {
            if (!map.entries[k].valid) continue;
            const double d = dist2(map.entries[k].c, t);
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(k);
            }
        }
        if (best < 0) throw NoValidCell("solve_case_a: no valid transferred centers");
        SaccadePlan plan;
        plan.target = t;
        plan.solved = set_.samples[best].motor;
        plan.cell = {set_.samples[best].pan_index, set_.samples[best].tilt_index};
        return plan;
    }

    auto cell_valid = [&](int pi, int ti) {
        for (int di = 0; di < 2; ++di)
            for (int dj = 0; dj < 2; ++dj) {
                const int pos = set_.lookup(pi + di, ti + dj);
                if (pos < 0 || !map.entries[pos].valid) return false;
            }
        return true;
    };
    auto quad_of = [&](int pi, int ti) {
        // perimeter order: c00, c10, c11, c01
        return std::array<PixelPoint, 4>{
            map.entries[set_.lookup(pi, ti)].c, map.entries[set_.lookup(pi + 1, ti)].c,
            map.entries[set_.lookup(pi + 1, ti + 1)].c, map.entries[set_.lookup(pi, ti + 1)].c};
    };

    // Containing-cell search. Noisy center maps can fold far from the
    // reference sample, so several quads may pass the winding test; a
    // candidate only counts if its bilinear solution is interior, and the
    // cell whose centroid is closest to t wins (exact ties toward the lower
    // (pan index, tilt index) via the lexicographic scan order).
    bool any_valid_cell = false;
    bool found = false;
    SaccadePlan best_plan;
    double best_d = std::numeric_limits<double>::infinity();
    for (int pi = 0; pi + 1 < set_.npan(); ++pi)
        for (int ti = 0; ti + 1 < set_.ntilt(); ++ti) {
            if (!cell_valid(pi, ti)) continue;
            any_valid_cell = true;
            const auto q = quad_of(pi, ti);
            if (!point_in_quad(t, q)) continue;
            SaccadePlan plan;
            try {
                plan = solve_in_cell(map, t, pi, ti, PlanMode::InteriorBilinear);
            } catch (const NonConvergence&) {
                continue;
            }
            if (plan.alpha < -1e-6 || plan.alpha > 1.0 + 1e-6 || plan.beta < -1e-6 ||
                plan.beta > 1.0 + 1e-6)
                continue;
            const PixelPoint centroid{(q[0].u + q[1].u + q[2].u + q[3].u) / 4.0,
                                      (q[0].v + q[1].v + q[2].v + q[3].v) / 4.0};
            const double d = dist2(centroid, t);
            if (d < best_d) {
                best_d = d;
                best_plan = plan;
                found = true;
            }
        }
    if (found) return best_plan;
    if (!any_valid_cell)
        throw NoValidCell("solve_case_a: no complete cell of valid centers");

    // t lies outside the calibration hull: extrapolate from the nearest cell.
    int best_pi = -1, best_ti = -1;
    double near_d = std::numeric_limits<double>::infinity();
    for (int pi = 0; pi + 1 < set_.npan(); ++pi)
        for (int ti = 0; ti + 1 < set_.ntilt(); ++ti) {
            if (!cell_valid(pi, ti)) continue;
            const auto q = quad_of(pi, ti);
            const PixelPoint centroid{(q[0].u + q[1].u + q[2].u + q[3].u) / 4.0,
                                      (q[0].v + q[1].v + q[2].v + q[3].v) / 4.0};
            const double d = dist2(centroid, t);
            if (d < near_d) {
                near_d = d;
                best_pi = pi;
                best_ti = ti;
            }
        }
    return solve_in_cell(map, t, best_pi, best_ti, PlanMode::BoundaryExtrapolated);
}

bool SaccadePlanner::within_hull(const MotorState& m) const {
    return m.pan >= set_.pan_values.front() - 1e-9 && m.pan <= set_.pan_values.back() + 1e-9 &&
           m.tilt >= set_.tilt_values.front() - 1e-9 && m.tilt <= set_.tilt_values.back() + 1e-9;
}

SaccadePlan SaccadePlanner::solve_case_b(const MotorState& current, const PixelPoint& t,
                                         const Observation& cur_obs) {
    if (!within_hull(current))
        throw OutsideCalibrationHull("solve_case_b: current state outside the calibration hull");

    auto locate = [](const std::vector<double>& grid, double x) {
        int i = static_cast<int>(std::upper_bound(grid.begin(), grid.end(), x) - grid.begin()) - 1;
        i = std::clamp(i, 0, static_cast<int>(grid.size()) - 2);
        return i;
    };
    const int pi = locate(set_.pan_values, current.pan);
    const int ti = locate(set_.tilt_values, current.tilt);
    const double wa = (current.pan - set_.pan_values[pi]) /
                      (set_.pan_values[pi + 1] - set_.pan_values[pi]);
    const double wb = (current.tilt - set_.tilt_values[ti]) /
                      (set_.tilt_values[ti + 1] - set_.tilt_values[ti]);

    SaccadePlan plan;
    plan.target = t;
    plan.cell = {pi, ti};
    plan.alpha = wa;
    plan.beta = wb;
    plan.plan_case = PlanCase::B;

    double pan = 0.0, tilt = 0.0;
    for (int di = 0; di < 2; ++di)
        for (int dj = 0; dj < 2; ++dj) {
            const double w = (di ? wa : 1.0 - wa) * (dj ? wb : 1.0 - wb);
            const int pos = set_.lookup(pi + di, ti + dj);
            if (pos < 0)
                throw NoValidCell("solve_case_b: enclosing grid sample was dropped");
            if (w < 1e-12) continue; // degenerate corner: skip the transfer
            const auto corrs = shared_corners(set_.samples[pos].obs, cur_obs);
            if (corrs.size() < 4)
                throw InsufficientCorrespondences(
                    "solve_case_b: fewer than 4 shared corners with an enclosing sample");
            const PixelPoint t_k = apply(estimate(corrs), t);
            const SaccadePlan sub = solve_case_a(pos, t_k);
            if (sub.mode == PlanMode::BoundaryExtrapolated)
                plan.mode = PlanMode::BoundaryExtrapolated;
            pan += w * sub.solved.pan;
            tilt += w * sub.solved.tilt;
        }
    plan.solved = {pan, tilt};
    return plan;
}

ExecutionResult execute(Rig& rig, const TargetBoard& board, const Eigen::Vector3d& target_world,
                        SaccadePlanner& planner, const SaccadePlan& plan, int corrective,
                        double stop_threshold_deg, std::uint64_t seed) {
    ExecutionResult res;
    SaccadePlan current = plan;
    for (int pass = 0; pass <= corrective; ++pass) {
        rig.set_motors(current.solved);
        const Observation obs =
            rig.observe(board, target_world, splitmix64(seed ^ static_cast<std::uint64_t>(pass)));
        if (!obs.target)
            throw TargetLost("execute: target left the field of view");
        Landing landing;
        landing.pixel = *obs.target;
        landing.err_deg = angular_error(planner.intrinsics(), landing.pixel);
        std::tie(landing.err_h_deg, landing.err_v_deg) =
            axis_errors(planner.intrinsics(), landing.pixel);
        res.plans.push_back(current);
        res.landings.push_back(landing);

        if (pass == corrective || landing.err_deg < stop_threshold_deg) break;
        current = planner.solve_case_b(rig.commanded(), landing.pixel, obs);
        // keep corrective commands inside the calibrated hull so the next
        // (chained) saccade can still be planned with case B
        const CalibrationSet& set = planner.set();
        current.solved.pan =
            std::clamp(current.solved.pan, set.pan_values.front(), set.pan_values.back());
        current.solved.tilt =
            std::clamp(current.solved.tilt, set.tilt_values.front(), set.tilt_values.back());
    }
    return res;
}

} // namespace ptfix
