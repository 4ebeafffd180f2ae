#include <catch2/catch_amalgamated.hpp>

#include "scenegen/metrics.hpp"
#include "scenegen/riskgen.hpp"

using namespace scenegen;

namespace {

// Minimal hand-built log: ego only, constant speed straight line.
SimLog straight_log(std::size_t steps, double speed, double dt = 0.05) {
    SimLog log;
    log.ego = 0;
    log.roles = {Role::ego};
    log.dt = dt;
    for (std::size_t i = 0; i < steps; ++i) {
        StepRecord r;
        r.t = static_cast<double>(i) * dt;
        VehicleState s;
        s.x = speed * r.t;
        s.speed = speed;
        r.states.push_back(s);
        log.steps.push_back(std::move(r));
    }
    return log;
}

SimLog nominal_following_log() {
    FunctionalScenario fs;
    for (const auto& s : default_seed_scenarios())
        if (s.id == "following") fs = s;
    auto logical = make_logical(fs, StaticCombination{}, std::nullopt);
    auto world = build_world(concretize(logical, 1, 301)[0]);
    return run(world, 20.0);
}

}  // namespace

TEST_CASE("ttc") {
    VehicleState ego;
    ego.speed = 5.0;
    VehicleState other;
    other.speed = 0.0;

    SECTION("gap 20 m closing 5 m/s gives 4.0 s") {
        other.x = 20.0 + ego.length / 2 + other.length / 2;
        auto t = ttc(ego, other);
        REQUIRE(t.has_value());
        CHECK(*t == Catch::Approx(4.0).margin(1e-12));
    }

    SECTION("opening pair has no TTC") {
        other.x = 30.0;
        other.speed = 8.0;  // same heading, faster
        CHECK_FALSE(ttc(ego, other).has_value());
    }

    SECTION("zero gap gives 0 s") {
        other.x = ego.length / 2 + other.length / 2;  // touching bumpers
        auto t = ttc(ego, other);
        REQUIRE(t.has_value());
        CHECK(*t == 0.0);
    }
}

TEST_CASE("compute_metrics") {
    SECTION("log too short rejected") {
        auto log = straight_log(1, 10.0);
        CHECK_THROWS_AS(compute_metrics(log), InvalidInput);
    }

    SECTION("constant-speed straight log has zero variation") {
        auto log = straight_log(100, 12.0);
        auto r = compute_metrics(log);
        CHECK(r.speed_sd == 0.0);
        CHECK(r.lateral_sd == 0.0);
        CHECK(r.steering_reversal_rate == 0.0);
        CHECK(r.mean_speed == Catch::Approx(12.0).margin(1e-12));
        CHECK(r.distance == Catch::Approx(12.0 * log.steps.back().t).margin(1e-9));
        CHECK_FALSE(r.crash);
        CHECK_FALSE(r.min_ttc.has_value());
        CHECK(r.sign_compliant);
        CHECK(r.lane_change_count == 0);
        CHECK(r.braking_count == 0);
        CHECK_FALSE(r.reaction_time.has_value());
    }

    SECTION("triangle steering trace gives exactly 120 reversals per minute") {
        // steering ramps between -0.1 and +0.1 rad, changing direction at
        // t = 0.25, 0.75, ..., 59.75: 120 direction changes over 60 s
        const double dt = 0.05;
        auto log = straight_log(1201, 10.0, dt);
        std::size_t hand_count = 0;
        double prev_rate = 0;
        for (std::size_t i = 0; i < log.steps.size(); ++i) {
            double t = static_cast<double>(i) * dt;
            double phase = std::fmod(t + 0.25, 1.0);  // direction flips at 0.25 + 0.5k
            double steer =
                phase < 0.5 ? 0.1 - 0.4 * phase : -0.1 + 0.4 * (phase - 0.5);
            log.steps[i].steer = steer;
            if (i > 0) {
                double rate = (steer - log.steps[i - 1].steer) / dt;
                if (std::abs(rate) > 0.05) {
                    if (prev_rate != 0 && ((rate > 0) != (prev_rate > 0))) ++hand_count;
                    prev_rate = rate;
                }
            }
        }
        REQUIRE(hand_count == 120);  // independent count of sign changes
        auto r = compute_metrics(log);
        CHECK(r.steering_reversal_rate == Catch::Approx(120.0).margin(1e-9));
    }

    SECTION("one collision event sets the crash flag and count") {
        auto log = straight_log(10, 10.0);
        log.events.push_back({0.2, EventType::collision, 0});
        auto r = compute_metrics(log);
        CHECK(r.crash);
        CHECK(r.collision_count == 1);
    }

    SECTION("reaction time measured from hazard onset to the next brake edge") {
        auto log = straight_log(100, 10.0);
        log.hazard_onset = 1.0;
        for (std::size_t i = 0; i < log.steps.size(); ++i)
            log.steps[i].brake = log.steps[i].t >= 1.4 ? 0.8 : 0.0;
        auto r = compute_metrics(log);
        REQUIRE(r.reaction_time.has_value());
        CHECK(*r.reaction_time == Catch::Approx(0.4).margin(1e-9));
        CHECK(r.braking_count == 1);
    }

    SECTION("lane change detected with its crossing duration") {
        const double dt = 0.05;
        auto log = straight_log(200, 10.0, dt);
        for (std::size_t i = 0; i < log.steps.size(); ++i) {
            double t = log.steps[i].t;
            double off = t < 2.0 ? 0.0 : (t < 3.0 ? (t - 2.0) * 3.5 : 3.5);
            log.steps[i].ego_route_offset = off;
        }
        auto r = compute_metrics(log);
        CHECK(r.lane_change_count == 1);
        // offset leaves the old quarter-width band (0.875) at t=2.25 and
        // enters the new one (>= 2.625) at t=2.75
        CHECK(r.lane_change_mean_duration == Catch::Approx(0.5).margin(0.06));
    }

    SECTION("transient swerve below the dwell time is not a lane change") {
        const double dt = 0.05;
        auto log = straight_log(200, 10.0, dt);
        for (std::size_t i = 0; i < log.steps.size(); ++i) {
            double t = log.steps[i].t;
            // darts over the boundary for 0.2 s only
            log.steps[i].ego_route_offset = (t >= 3.0 && t < 3.2) ? 2.0 : 0.0;
        }
        auto r = compute_metrics(log);
        CHECK(r.lane_change_count == 0);
    }

    SECTION("frame invariance under translation") {
        auto log = nominal_following_log();
        auto shifted = log;
        for (auto& s : shifted.steps)
            for (auto& st : s.states) {
                st.x += 1000.0;
                st.y += 500.0;
            }
        auto a = compute_metrics(log);
        auto b = compute_metrics(shifted);
        CHECK(a.distance == Catch::Approx(b.distance).margin(1e-6));
        CHECK(a.mean_speed == b.mean_speed);
        CHECK(a.speed_sd == b.speed_sd);
        CHECK(a.lateral_sd == b.lateral_sd);
        CHECK(a.steering_reversal_rate == b.steering_reversal_rate);
        CHECK(a.braking_count == b.braking_count);
        if (a.min_ttc && b.min_ttc) CHECK(*a.min_ttc == Catch::Approx(*b.min_ttc).margin(1e-9));
        else CHECK(a.min_ttc.has_value() == b.min_ttc.has_value());
    }

    SECTION("independent single-pass recomputation on a short fixture") {
        auto full = nominal_following_log();
        SimLog log = full;
        log.steps.resize(100);
        auto r = compute_metrics(log);

        // reference: plain accumulators
        double sum = 0, sum2 = 0, dist = 0;
        for (std::size_t i = 0; i < log.steps.size(); ++i) {
            double v = log.steps[i].states[log.ego].speed;
            sum += v;
            sum2 += v * v;
            if (i > 0) {
                const auto& a = log.steps[i - 1].states[log.ego];
                const auto& b = log.steps[i].states[log.ego];
                dist += std::hypot(b.x - a.x, b.y - a.y);
            }
        }
        double n = static_cast<double>(log.steps.size());
        double mean = sum / n;
        CHECK(r.mean_speed == Catch::Approx(mean).margin(1e-12));
        CHECK(r.speed_sd == Catch::Approx(std::sqrt(sum2 / n - mean * mean)).margin(1e-9));
        CHECK(r.distance == Catch::Approx(dist).margin(1e-12));
        CHECK(r.duration == Catch::Approx(log.steps.back().t).margin(1e-12));
    }
}

TEST_CASE("classify") {
    SECTION("nominal following run finds no risk") {
        auto r = compute_metrics(nominal_following_log());
        auto v = classify(r);
        CHECK_FALSE(v.risk_found);
        CHECK(v.reasons.empty());
    }

    SECTION("crash flag produces reason 'crash'") {
        MetricReport r;
        r.crash = true;
        auto v = classify(r);
        CHECK(v.risk_found);
        REQUIRE(v.reasons.size() == 1);
        CHECK(v.reasons[0] == "crash");
    }

    SECTION("min TTC 0.8 s without crash produces reason 'ttc'") {
        MetricReport r;
        r.min_ttc = 0.8;
        auto v = classify(r);
        CHECK(v.risk_found);
        REQUIRE(v.reasons.size() == 1);
        CHECK(v.reasons[0] == "ttc");
    }

    SECTION("sign non-compliance and lateral acceleration both flag") {
        MetricReport r;
        r.sign_compliant = false;
        r.lat_accel_max = 6.0;
        auto v = classify(r);
        CHECK(v.risk_found);
        REQUIRE(v.reasons.size() == 2);
        CHECK(v.reasons[0] == "sign");
        CHECK(v.reasons[1] == "lateral_accel");
    }

    SECTION("tightening thresholds never un-flags a risky run") {
        MetricReport r;
        r.min_ttc = 0.95;
        r.lat_accel_max = 5.5;
        MetricConfig base;
        auto v1 = classify(r, base);
        REQUIRE(v1.risk_found);
        MetricConfig tight = base;
        tight.ttc_risk_bound = 1.5;   // stricter: flags more runs
        tight.lat_accel_bound = 4.0;  // stricter: flags more runs
        auto v2 = classify(r, tight);
        CHECK(v2.risk_found);
        CHECK(v2.reasons.size() >= v1.reasons.size());
    }
}
