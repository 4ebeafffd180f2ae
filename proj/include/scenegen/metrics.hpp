#ifndef SCENEGEN_METRICS_HPP
#define SCENEGEN_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "scenegen/sim.hpp"

namespace scenegen {

/// Table-style misbehavior metric suite. All conventions documented inline;
/// thresholds live in MetricConfig.
struct MetricReport {
    // safety
    double distance = 0;       // m travelled by the ego
    double duration = 0;       // s covered by the log
    bool crash = false;        // any collision event
    double mean_speed = 0;     // m/s, ego
    double speed_sd = 0;       // population SD
    double lateral_sd = 0;     // population SD of the route offset
    double lat_accel_max = 0;  // max |speed * yaw rate|
    double traj_offset_mean = 0;  // mean |route offset|
    std::optional<double> min_ttc;  // s, absent if never closing
    std::size_t collision_count = 0;
    bool sign_compliant = true;
    // comfort
    double throttle_mean = 0;
    double throttle_rate_max = 0;  // 1/s
    std::size_t lane_change_count = 0;
    double lane_change_mean_duration = 0;  // s, 0 when no lane change
    double steer_sd = 0;                   // rad, population SD
    double steering_reversal_rate = 0;     // 1/min
    double steer_rate_max = 0;             // rad/s
    // efficiency
    std::size_t braking_count = 0;            // rising edges of brake
    std::optional<double> reaction_time;      // s after hazard onset
};

struct MetricConfig {
    double reversal_rate_threshold = 0.05;  // rad/s significance cutoff
    double lane_change_dwell = 0.5;         // s a crossing must persist
    double brake_edge = 0.1;                // brake level counting as braking
    double ttc_risk_bound = 1.0;            // s
    double lat_accel_bound = 5.0;           // m/s^2
    double lane_width = 3.5;                // m
    double corridor_half_width = 1.6;       // m, TTC relevance band
};

struct Verdict {
    bool risk_found = false;
    std::vector<std::string> reasons;
};

/// Bumper-to-bumper time to collision along the ego's heading; absent unless
/// the pair is closing.
inline std::optional<double> ttc(const VehicleState& ego, const VehicleState& other) {
    auto [gap, closing] = detail::longitudinal_gap(ego, other);
    if (closing <= 0 || gap < 0) return std::nullopt;
    return gap / closing;
}

namespace detail {

inline double population_sd(const std::vector<double>& xs) {
    if (xs.empty()) return 0;
    double m = 0;
    for (double x : xs) m += x;
    m /= static_cast<double>(xs.size());
    double v = 0;
    for (double x : xs) v += (x - m) * (x - m);
    return std::sqrt(v / static_cast<double>(xs.size()));
}

}  // namespace detail

inline MetricReport compute_metrics(const SimLog& log, const MetricConfig& cfg = {}) {
    if (log.steps.size() < 2) throw InvalidInput("log needs at least two steps");
    MetricReport r;
    const double dt = log.dt;
    const std::size_t n = log.steps.size();

    std::vector<double> speeds, offsets, steers, throttles;
    for (const auto& s : log.steps) {
        speeds.push_back(s.states[log.ego].speed);
        offsets.push_back(s.ego_route_offset);
        steers.push_back(s.steer);
        throttles.push_back(s.throttle);
    }

    r.duration = log.steps.back().t - log.steps.front().t;
    for (std::size_t i = 1; i < n; ++i) {
        const auto& a = log.steps[i - 1].states[log.ego];
        const auto& b = log.steps[i].states[log.ego];
        r.distance += std::hypot(b.x - a.x, b.y - a.y);
        double yaw_rate = (b.heading - a.heading) / dt;
        r.lat_accel_max = std::max(r.lat_accel_max, std::abs(b.speed * yaw_rate));
        r.throttle_rate_max = std::max(
            r.throttle_rate_max, std::abs(log.steps[i].throttle - log.steps[i - 1].throttle) / dt);
        r.steer_rate_max =
            std::max(r.steer_rate_max, std::abs(steers[i] - steers[i - 1]) / dt);
    }

    double speed_sum = 0, throttle_sum = 0, offset_sum = 0;
    for (double v : speeds) speed_sum += v;
    for (double v : throttles) throttle_sum += v;
    for (double v : offsets) offset_sum += std::abs(v);
    r.mean_speed = speed_sum / static_cast<double>(n);
    r.throttle_mean = throttle_sum / static_cast<double>(n);
    r.traj_offset_mean = offset_sum / static_cast<double>(n);
    r.speed_sd = detail::population_sd(speeds);
    r.lateral_sd = detail::population_sd(offsets);
    r.steer_sd = detail::population_sd(steers);

    // events
    for (const auto& e : log.events) {
        if (e.type == EventType::collision) {
            r.crash = true;
            ++r.collision_count;
        }
        if (e.type == EventType::signal_violation && e.actor == log.ego)
            r.sign_compliant = false;
    }

    // min TTC against in-corridor actors
    for (const auto& s : log.steps) {
        const auto& ego = s.states[log.ego];
        for (std::size_t i = 0; i < s.states.size(); ++i) {
            if (i == log.ego) continue;
            double lat = detail::lateral_offset_from_ego(ego, s.states[i]);
            if (std::abs(lat) > cfg.corridor_half_width + s.states[i].width / 2) continue;
            auto t = ttc(ego, s.states[i]);
            if (t && (!r.min_ttc || *t < *r.min_ttc)) r.min_ttc = *t;
        }
    }

    // steering reversals: sign alternation between consecutive significant
    // steering-rate samples
    std::size_t reversals = 0;
    int last_sign = 0;
    for (std::size_t i = 1; i < n; ++i) {
        double rate = (steers[i] - steers[i - 1]) / dt;
        if (std::abs(rate) <= cfg.reversal_rate_threshold) continue;
        int sign = rate > 0 ? 1 : -1;
        if (last_sign != 0 && sign != last_sign) ++reversals;
        last_sign = sign;
    }
    r.steering_reversal_rate =
        r.duration > 0 ? static_cast<double>(reversals) / (r.duration / 60.0) : 0;

    // lane changes: the route-offset lane index changes and the new lane
    // persists for at least the dwell time; duration runs from leaving the
    // quarter-width band of the old lane center to entering the new one
    auto lane_of = [&](double off) {
        return static_cast<long>(std::lround(off / cfg.lane_width));
    };
    std::size_t dwell_steps = static_cast<std::size_t>(std::ceil(cfg.lane_change_dwell / dt));
    double total_duration = 0;
    long cur_lane = lane_of(offsets[0]);
    for (std::size_t i = 1; i < n; ++i) {
        long lane = lane_of(offsets[i]);
        if (lane == cur_lane) continue;
        // does the new lane persist?
        std::size_t ok = 0;
        for (std::size_t j = i; j < n && lane_of(offsets[j]) == lane; ++j) ++ok;
        if (ok < dwell_steps && i + ok < n) continue;  // transient crossing
        // walk back to the departure from the old center band
        std::size_t start = i;
        while (start > 0 &&
               std::abs(offsets[start - 1] - static_cast<double>(cur_lane) * cfg.lane_width) >
                   cfg.lane_width / 4)
            --start;
        // walk forward to the arrival inside the new center band
        std::size_t end = i;
        while (end + 1 < n &&
               std::abs(offsets[end] - static_cast<double>(lane) * cfg.lane_width) >
                   cfg.lane_width / 4)
            ++end;
        ++r.lane_change_count;
        total_duration += log.steps[end].t - log.steps[start].t;
        cur_lane = lane;
    }
    if (r.lane_change_count > 0)
        r.lane_change_mean_duration = total_duration / static_cast<double>(r.lane_change_count);

    // braking count: rising edges through the brake threshold
    bool braking = log.steps[0].brake > cfg.brake_edge;
    std::vector<double> brake_edges;
    for (std::size_t i = 1; i < n; ++i) {
        bool now = log.steps[i].brake > cfg.brake_edge;
        if (now && !braking) {
            ++r.braking_count;
            brake_edges.push_back(log.steps[i].t);
        }
        braking = now;
    }

    // reaction time: first braking edge at or after the hazard onset
    if (log.hazard_onset) {
        for (double t : brake_edges)
            if (t >= *log.hazard_onset) {
                r.reaction_time = t - *log.hazard_onset;
                break;
            }
    }
    return r;
}

/// Risk classification per the documented thresholds.
inline Verdict classify(const MetricReport& r, const MetricConfig& cfg = {}) {
    Verdict v;
    if (r.crash) v.reasons.push_back("crash");
    if (r.min_ttc && *r.min_ttc < cfg.ttc_risk_bound) v.reasons.push_back("ttc");
    if (!r.sign_compliant) v.reasons.push_back("sign");
    if (r.lat_accel_max > cfg.lat_accel_bound) v.reasons.push_back("lateral_accel");
    v.risk_found = !v.reasons.empty();
    return v;
}

}  // namespace scenegen

#endif
