#ifndef SCENEGEN_SIM_HPP
#define SCENEGEN_SIM_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scenegen/defaults.hpp"
#include "scenegen/scenario.hpp"

namespace scenegen {

struct VehicleState {
    double x = 0, y = 0;    // m
    double heading = 0;     // rad
    double speed = 0;       // m/s, >= 0
    double accel = 0;       // m/s^2, last applied longitudinal accel
    double steer = 0;       // rad, |steer| <= kMaxSteer
    double length = 4.6, width = 1.8;
};

constexpr double kMaxSteer = 0.6;

struct EnvironmentEffects {
    double mu = 0.9;          // friction, (0, 1]
    double visibility = 150;  // m
    double crosswind = 0.0;   // lateral accel, m/s^2, signed
};

struct SimConfig {
    double dt = 0.05;        // s
    double wheelbase = 2.8;  // m
    double a_max = 3.0;      // m/s^2 pre-friction
    double b_max = 8.0;      // m/s^2 pre-friction
    double v_max = 30.0;     // m/s
    double headway_time = 1.5;   // s, car-following desired gap
    double ttc_hard_brake = 2.0; // s, emergency brake threshold
    double lane_width = 3.5;     // m
    double corridor_half_width = 1.6;  // m, relevance band for following/TTC
    double turn_speed = 5.0;           // m/s cap while negotiating a sharp curve
    double comfort_decel = 2.5;        // m/s^2 used to time the pre-turn slowdown
    double pedestrian_walk_speed = 2.0;  // m/s
    double lane_change_duration = 2.0;   // s, scripted lead swerve
    // effects tables, keyed by canonical state names
    std::map<std::string, double> mu_by_surface = {
        {"dry", 0.9}, {"wet", 0.6}, {"flooded", 0.4}, {"icy", 0.2}, {"debris", 0.7}};
    std::map<std::string, double> visibility_by_weather = {
        {"clear", 150.0}, {"rain", 50.0}, {"fog", 30.0}, {"snow", 60.0}, {"wind", 120.0}};
    std::map<std::string, double> visibility_by_lighting = {
        {"daylight", 150.0}, {"dusk_dawn", 80.0}, {"dark_lit", 60.0}, {"dark_unlit", 20.0}};
    double crosswind_when_windy = 1.5;  // m/s^2
    double intersection_x = 50.0;       // m, center of the crossing for intersection roads
    double stop_line_offset = 6.0;      // m before the intersection center
};

enum class EventType { action_trigger, collision, signal_violation, route_complete };

struct SimEvent {
    double t = 0;
    EventType type = EventType::action_trigger;
    std::size_t actor = 0;  // index into the actor list
};

struct Actor {
    Role role = Role::ego;
    VehicleState state;
    double target_speed = 0;  // scripted cruise speed for non-ego vehicles
    bool triggered = false;   // risk action fired for this actor
    bool violated_signal = false;
    double trigger_time = -1;
    double base_y = 0;  // lane the actor started in
};

struct World {
    std::vector<Actor> actors;
    std::size_t ego = 0;
    Road road = Road::straight_two_lane;
    Maneuver maneuver = Maneuver::lane_keeping;
    EnvironmentEffects env;
    std::optional<RiskAction> action;
    double trigger_threshold = 0;
    std::vector<std::pair<double, double>> route;  // ego waypoints
    double ego_set_speed = 0;
    double clock = 0;
    SimConfig config;
    bool collided = false;
    bool route_done = false;
    double last_throttle = 0, last_brake = 0;  // ego controls from the last step
    std::vector<SimEvent> pending_events;      // events raised during the last step
};

struct StepRecord {
    double t = 0;
    std::vector<VehicleState> states;
    double throttle = 0, brake = 0, steer = 0;  // ego controls
    double ego_route_offset = 0;                // m, lateral deviation from route
};

struct SimLog {
    std::vector<StepRecord> steps;
    std::vector<SimEvent> events;
    std::size_t ego = 0;
    std::vector<Role> roles;
    double dt = 0.05;
    std::optional<double> hazard_onset;  // first action trigger time
};

// ---------------------------------------------------------------------------
// Geometry

namespace detail {

struct Vec2 {
    double x = 0, y = 0;
};

inline std::array<Vec2, 4> obb_corners(const VehicleState& s) {
    double c = std::cos(s.heading), sn = std::sin(s.heading);
    double hl = s.length / 2, hw = s.width / 2;
    std::array<Vec2, 4> out;
    int i = 0;
    for (double dx : {hl, -hl})
        for (double dy : {hw, -hw})
            out[i++] = {s.x + dx * c - dy * sn, s.y + dx * sn + dy * c};
    return out;
}

inline bool separated_on_axis(const std::array<Vec2, 4>& a, const std::array<Vec2, 4>& b,
                              double ax, double ay) {
    double amin = 1e300, amax = -1e300, bmin = 1e300, bmax = -1e300;
    for (const auto& p : a) {
        double d = p.x * ax + p.y * ay;
        amin = std::min(amin, d);
        amax = std::max(amax, d);
    }
    for (const auto& p : b) {
        double d = p.x * ax + p.y * ay;
        bmin = std::min(bmin, d);
        bmax = std::max(bmax, d);
    }
    return amax < bmin || bmax < amin;  // strict: touching counts as contact
}

}  // namespace detail

/// Oriented-bounding-box overlap via the separating-axis test; boundary
/// contact is inclusive.
inline bool overlaps(const VehicleState& a, const VehicleState& b) {
    auto ca = detail::obb_corners(a);
    auto cb = detail::obb_corners(b);
    for (const VehicleState* s : {&a, &b}) {
        double c = std::cos(s->heading), sn = std::sin(s->heading);
        if (detail::separated_on_axis(ca, cb, c, sn)) return false;
        if (detail::separated_on_axis(ca, cb, -sn, c)) return false;
    }
    return true;
}

/// Pairwise collision scan over an actor list.
inline std::vector<std::pair<std::size_t, std::size_t>> detect_collision(
    const std::vector<Actor>& actors) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < actors.size(); ++i)
        for (std::size_t j = i + 1; j < actors.size(); ++j)
            if (overlaps(actors[i].state, actors[j].state)) out.push_back({i, j});
    return out;
}

// ---------------------------------------------------------------------------
// World construction

inline World build_world(const ConcreteScenario& scenario, const SimConfig& config = {}) {
    World w;
    w.config = config;
    w.road = scenario.road;
    w.maneuver = scenario.maneuver;
    w.action = scenario.action;

    // environment from the effects table
    auto schema = canonical_schema();
    auto state_name = [&](const std::string& var, int state) {
        std::size_t v = schema.index_of(var);
        const auto& states = schema.var(v).states;
        if (state < 0 || static_cast<std::size_t>(state) >= states.size())
            throw InvalidInput("unknown assignment for '" + var + "'");
        return states[static_cast<std::size_t>(state)];
    };
    for (const auto& [var, state] : scenario.environment.assignments) {
        std::string name = state_name(var, state);
        if (var == "surface_condition") {
            w.env.mu = config.mu_by_surface.at(name);
        } else if (var == "weather") {
            w.env.visibility = std::min(w.env.visibility, config.visibility_by_weather.at(name));
            if (name == "wind") w.env.crosswind = config.crosswind_when_windy;
        } else if (var == "lighting") {
            w.env.visibility = std::min(w.env.visibility, config.visibility_by_lighting.at(name));
        }
        // road_damage, obstacle and junction have no kinematic effect
    }

    bool found_ego = false;
    for (const auto& p : scenario.actors) {
        Actor a;
        a.role = p.role;
        a.state.x = p.x;
        a.state.y = p.y;
        a.state.heading = p.heading;
        a.state.speed = p.speed;
        a.state.length = p.length;
        a.state.width = p.width;
        a.target_speed = p.speed;
        a.base_y = p.y;
        if (p.role == Role::ego) {
            if (found_ego) throw InvalidInput("more than one ego");
            found_ego = true;
            w.ego = w.actors.size();
            w.ego_set_speed = p.speed;
        }
        w.actors.push_back(a);
    }
    if (!found_ego) throw InvalidInput("scenario has no ego");

    for (auto [i, j] : detect_collision(w.actors))
        throw InvalidInput("initial placements overlap");

    auto pit = scenario.params.find("trigger_threshold");
    w.trigger_threshold = pit != scenario.params.end()
                              ? pit->second
                              : (scenario.action ? scenario.action->trigger.threshold : 0.0);

    // ego route
    if (scenario.maneuver == Maneuver::left_turn_intersection) {
        double cx = config.intersection_x;
        w.route = {{0, 0},
                   {cx - 6, 0},
                   {cx - 3, 0.3},
                   {cx - 1, 1.2},
                   {cx + 0.5, 2.5},
                   {cx + 1, 4},
                   {cx + 1, 60}};
    } else {
        w.route = {{0, 0}, {400, 0}};
    }
    return w;
}

// ---------------------------------------------------------------------------
// Ego policy

namespace detail {

struct RoutePoint {
    double offset;          // signed lateral deviation
    Vec2 target;            // lookahead point
    double dist_to_curve;   // arc distance to the next sharp heading change
};

inline RoutePoint route_follow(const std::vector<std::pair<double, double>>& route,
                               const VehicleState& ego, double lookahead) {
    // closest point on the polyline plus a point `lookahead` further along
    double best_d2 = 1e300;
    double best_arc = 0, signed_off = 0;
    std::size_t best_seg = 0;
    double arc = 0;
    std::vector<double> seg_arc(route.size(), 0);
    for (std::size_t i = 0; i + 1 < route.size(); ++i) {
        seg_arc[i] = arc;
        double ax = route[i].first, ay = route[i].second;
        double bx = route[i + 1].first, by = route[i + 1].second;
        double vx = bx - ax, vy = by - ay;
        double len = std::hypot(vx, vy);
        double t = len > 0 ? ((ego.x - ax) * vx + (ego.y - ay) * vy) / (len * len) : 0;
        t = std::clamp(t, 0.0, 1.0);
        double px = ax + t * vx, py = ay + t * vy;
        double d2 = (ego.x - px) * (ego.x - px) + (ego.y - py) * (ego.y - py);
        if (d2 < best_d2) {
            best_d2 = d2;
            best_arc = arc + t * len;
            best_seg = i;
            double cross = vx * (ego.y - ay) - vy * (ego.x - ax);
            signed_off = len > 0 ? cross / len : 0;
        }
        arc += len;
    }
    seg_arc.back() = arc;

    // distance from the ego to the next segment whose heading departs from
    // the current one by more than ~14 degrees
    double dist_to_curve = 1e300;
    double base_heading = std::atan2(route[best_seg + 1].second - route[best_seg].second,
                                     route[best_seg + 1].first - route[best_seg].first);
    for (std::size_t i = best_seg + 1; i + 1 < route.size(); ++i) {
        double h = std::atan2(route[i + 1].second - route[i].second,
                              route[i + 1].first - route[i].first);
        double dh = h - base_heading;
        while (dh > M_PI) dh -= 2 * M_PI;
        while (dh < -M_PI) dh += 2 * M_PI;
        if (std::abs(dh) > 0.25) {
            dist_to_curve = seg_arc[i] - best_arc;
            break;
        }
    }

    double want = best_arc + lookahead;
    Vec2 target{route.back().first, route.back().second};
    double acc = 0;
    for (std::size_t i = 0; i + 1 < route.size(); ++i) {
        double len = std::hypot(route[i + 1].first - route[i].first,
                                route[i + 1].second - route[i].second);
        if (acc + len >= want && len > 0) {
            double t = (want - acc) / len;
            target = {route[i].first + t * (route[i + 1].first - route[i].first),
                      route[i].second + t * (route[i + 1].second - route[i].second)};
            break;
        }
        acc += len;
    }
    return {signed_off, target, dist_to_curve};
}

/// Bumper-to-bumper gap and closing speed of `other` as seen along the ego's
/// heading; negative gap means behind or overlapping.
inline std::pair<double, double> longitudinal_gap(const VehicleState& ego,
                                                  const VehicleState& other) {
    double c = std::cos(ego.heading), sn = std::sin(ego.heading);
    double dx = other.x - ego.x, dy = other.y - ego.y;
    double ahead = dx * c + dy * sn;
    double gap = ahead - ego.length / 2 - other.length / 2;
    double other_along = other.speed * (std::cos(other.heading) * c + std::sin(other.heading) * sn);
    double closing = ego.speed - other_along;
    return {gap, closing};
}

inline double lateral_offset_from_ego(const VehicleState& ego, const VehicleState& other) {
    double c = std::cos(ego.heading), sn = std::sin(ego.heading);
    return -(other.x - ego.x) * sn + (other.y - ego.y) * c;
}

}  // namespace detail

struct EgoCommand {
    double throttle = 0, brake = 0, steer = 0;
};

/// Rule-based ego policy: pure pursuit on the route, car-following against
/// the nearest in-corridor actor, and an emergency brake on low TTC.
/// `perceived` must already be limited to the visibility range.
inline EgoCommand ego_control(const std::vector<VehicleState>& perceived,
                              const VehicleState& ego,
                              const std::vector<std::pair<double, double>>& route,
                              double set_speed, const SimConfig& config) {
    EgoCommand cmd;

    // lateral: pure pursuit
    double lookahead = std::max(4.0, 0.6 * ego.speed);
    auto rp = detail::route_follow(route, ego, lookahead);
    double dx = rp.target.x - ego.x, dy = rp.target.y - ego.y;
    double alpha = std::atan2(dy, dx) - ego.heading;
    while (alpha > M_PI) alpha -= 2 * M_PI;
    while (alpha < -M_PI) alpha += 2 * M_PI;
    double ld = std::max(1.0, std::hypot(dx, dy));
    cmd.steer = std::clamp(std::atan2(2.0 * config.wheelbase * std::sin(alpha), ld), -kMaxSteer,
                           kMaxSteer);

    // longitudinal
    double min_gap = 1e300;
    bool emergency = false;
    for (const auto& o : perceived) {
        double lat = detail::lateral_offset_from_ego(ego, o);
        if (std::abs(lat) > config.corridor_half_width + o.width / 2) continue;
        auto [gap, closing] = detail::longitudinal_gap(ego, o);
        if (gap < -ego.length) continue;  // behind
        min_gap = std::min(min_gap, gap);
        if (closing > 0 && gap >= 0 && gap / closing < config.ttc_hard_brake) emergency = true;
        if (gap < 0) emergency = true;  // overlapping along heading
    }

    if (emergency) {
        cmd.brake = 1.0;
        return cmd;
    }
    double desired_gap = std::max(2.0, config.headway_time * ego.speed);
    if (min_gap < desired_gap) {
        cmd.brake = std::clamp((desired_gap - min_gap) / desired_gap, 0.0, 1.0);
        return cmd;
    }
    // slow ahead of sharp curves; stay slow while inside one
    double v = ego.speed;
    double slow_zone = std::max(0.0, (v * v - config.turn_speed * config.turn_speed) /
                                         (2.0 * config.comfort_decel)) +
                       6.0;
    if (rp.dist_to_curve < slow_zone || std::abs(cmd.steer) > 0.12)
        set_speed = std::min(set_speed, config.turn_speed);
    double err = set_speed - ego.speed;
    if (err > 0) cmd.throttle = std::clamp(err / 2.0, 0.0, 1.0);
    else cmd.brake = std::clamp(-err / 4.0, 0.0, 0.5);
    return cmd;
}

// ---------------------------------------------------------------------------
// Stepping

namespace detail {

inline void advance(VehicleState& s, double accel, double dt, double wheelbase, double v_max,
                    double crosswind) {
    double v = std::clamp(s.speed + accel * dt, 0.0, v_max);
    s.accel = (v - s.speed) / dt;
    s.speed = v;
    s.heading += (v / wheelbase) * std::tan(s.steer) * dt;
    s.x += v * std::cos(s.heading) * dt;
    s.y += v * std::sin(s.heading) * dt + 0.5 * crosswind * dt * dt;
}

inline Actor* find_role(World& w, Role r) {
    for (auto& a : w.actors)
        if (a.role == r) return &a;
    return nullptr;
}

inline bool trigger_fires(World& w) {
    if (!w.action || w.action->baseline) return false;
    const auto& ego = w.actors[w.ego].state;
    double th = w.trigger_threshold;
    switch (w.action->trigger.kind) {
        case TriggerKind::time_elapsed:
            return w.clock >= th;
        case TriggerKind::ego_in_zone:
            return ego.x >= th;
        case TriggerKind::gap_below: {
            const Actor* subject = nullptr;
            const Actor* reference = &w.actors[w.ego];
            if (w.action->action == "lane_change") {
                // lead swerves when it closes on the obstacle
                subject = find_role(w, Role::obstacle);
                reference = find_role(w, Role::lead_vehicle);
            } else {
                subject = find_role(w, w.action->actor);
            }
            if (!subject || !reference) return false;
            auto [gap, closing] = longitudinal_gap(reference->state, subject->state);
            return gap <= th;
        }
    }
    return false;
}

}  // namespace detail

/// One fixed-dt step: evaluate the event timeline, run the scripted actor
/// behaviors and the ego policy, integrate, and detect collisions.
inline void step(World& w) {
    const auto& cfg = w.config;
    const double dt = cfg.dt;
    w.pending_events.clear();

    // event timeline
    if (w.action && !w.action->baseline) {
        auto* actor = detail::find_role(w, w.action->actor);
        if (actor && !actor->triggered && detail::trigger_fires(w)) {
            actor->triggered = true;
            actor->trigger_time = w.clock;
            std::size_t idx = static_cast<std::size_t>(actor - w.actors.data());
            w.pending_events.push_back({w.clock, EventType::action_trigger, idx});
        }
    }

    // ego perception and control
    std::vector<VehicleState> perceived;
    const auto& ego_state = w.actors[w.ego].state;
    for (std::size_t i = 0; i < w.actors.size(); ++i) {
        if (i == w.ego) continue;
        const auto& s = w.actors[i].state;
        if (std::hypot(s.x - ego_state.x, s.y - ego_state.y) <= w.env.visibility)
            perceived.push_back(s);
    }
    auto cmd = ego_control(perceived, ego_state, w.route, w.ego_set_speed, cfg);

    // integrate all actors
    for (std::size_t i = 0; i < w.actors.size(); ++i) {
        Actor& a = w.actors[i];
        double accel = 0;
        bool is_vehicle = a.role != Role::pedestrian && a.role != Role::obstacle;
        if (i == w.ego) {
            a.state.steer = cmd.steer;
            accel = cmd.throttle * cfg.a_max * w.env.mu - cmd.brake * cfg.b_max * w.env.mu;
        } else if (a.role == Role::lead_vehicle) {
            a.state.steer = 0;
            if (a.triggered && w.action->action == "sudden_brake") {
                accel = -cfg.b_max * w.env.mu;
            } else if (a.triggered && w.action->action == "lane_change") {
                // scripted swerve into the adjacent lane
                double frac =
                    std::min(1.0, (w.clock - a.trigger_time) / cfg.lane_change_duration);
                a.state.y = a.base_y + frac * cfg.lane_width;
                accel = std::clamp((a.target_speed - a.state.speed) / dt, -cfg.a_max, cfg.a_max);
            } else {
                // simple car-following so the lead does not ram whatever sits
                // in its lane (e.g. a parked obstacle)
                double gap_ahead = 1e300;
                for (const auto& b : w.actors) {
                    if (&b == &a) continue;
                    if (std::abs(b.state.y - a.state.y) > 2.0) continue;
                    double g = b.state.x - a.state.x - a.state.length / 2 - b.state.length / 2;
                    if (g > -a.state.length) gap_ahead = std::min(gap_ahead, g);
                }
                double v = a.state.speed;
                double desired = 2.0 + 1.2 * v;
                if (gap_ahead <= v * v / (1.6 * cfg.b_max * w.env.mu))
                    accel = -cfg.b_max * w.env.mu;
                else if (gap_ahead < desired)
                    accel = -cfg.b_max * w.env.mu *
                            std::clamp((desired - gap_ahead) / desired, 0.0, 1.0);
                else
                    accel = std::clamp((a.target_speed - v) / dt, -cfg.a_max, cfg.a_max);
            }
        } else if (a.role == Role::oncoming_vehicle) {
            a.state.steer = 0;
            bool runs_light = a.triggered && w.action->action == "run_red_light";
            if (w.road == Road::intersection && !runs_light) {
                // slow to a stop at the stop line (approaching from +x)
                double stop_x = cfg.intersection_x + cfg.stop_line_offset;
                double dist = a.state.x - stop_x - a.state.length / 2;
                if (dist <= 0) {
                    accel = -cfg.b_max * w.env.mu;  // hold at the line
                } else if (a.state.speed * a.state.speed / (2 * std::max(dist, 0.1)) >
                           0.5 * cfg.b_max * w.env.mu) {
                    accel = -a.state.speed * a.state.speed / (2 * std::max(dist, 0.1));
                } else {
                    accel = std::clamp((a.target_speed - a.state.speed) / dt, -cfg.a_max,
                                       cfg.a_max);
                }
                if (dist <= 0 && a.state.speed > 0.5 && !a.violated_signal) {
                    a.violated_signal = true;
                    w.pending_events.push_back(
                        {w.clock, EventType::signal_violation,
                         static_cast<std::size_t>(&a - w.actors.data())});
                }
            } else {
                accel = std::clamp((a.target_speed - a.state.speed) / dt, -cfg.a_max, cfg.a_max);
            }
        } else if (a.role == Role::pedestrian) {
            if (a.triggered && w.action->action == "pedestrian_dart") {
                a.state.heading = a.base_y < 0 ? M_PI / 2 : -M_PI / 2;
                a.state.speed = cfg.pedestrian_walk_speed;
            } else {
                a.state.speed = 0;
            }
            accel = 0;
        } else {  // static obstacle
            a.state.speed = 0;
            accel = 0;
        }

        double wind = is_vehicle ? w.env.crosswind : 0.0;
        detail::advance(a.state, accel, dt, cfg.wheelbase, cfg.v_max, wind);
    }

    w.clock += dt;

    // collisions involving the ego terminate the run
    for (auto [i, j] : detect_collision(w.actors)) {
        w.pending_events.push_back({w.clock, EventType::collision, i == w.ego ? j : i});
        if (i == w.ego || j == w.ego) w.collided = true;
    }

    // route completion
    const auto& back = w.route.back();
    if (std::hypot(ego_state.x - back.first, ego_state.y - back.second) < 3.0) {
        w.route_done = true;
        w.pending_events.push_back({w.clock, EventType::route_complete, w.ego});
    }

    // store last applied ego controls for the logger
    w.actors[w.ego].state.steer = cmd.steer;
    w.last_throttle = cmd.throttle;
    w.last_brake = cmd.brake;
}

/// Run to `duration` seconds, stopping early on an ego collision or route
/// completion. Deterministic: the log is a pure function of the world.
inline SimLog run(World w, double duration) {
    if (duration <= 0) throw InvalidInput("run duration must be positive");
    const double dt = w.config.dt;
    SimLog log;
    log.ego = w.ego;
    log.dt = dt;
    for (const auto& a : w.actors) log.roles.push_back(a.role);

    auto record = [&](double throttle, double brake, double steer) {
        StepRecord r;
        r.t = w.clock;
        for (const auto& a : w.actors) r.states.push_back(a.state);
        r.throttle = throttle;
        r.brake = brake;
        r.steer = steer;
        r.ego_route_offset =
            detail::route_follow(w.route, w.actors[w.ego].state, 1.0).offset;
        log.steps.push_back(std::move(r));
    };
    record(0, 0, 0);

    std::size_t n = static_cast<std::size_t>(std::llround(duration / dt));
    for (std::size_t k = 0; k < n; ++k) {
        step(w);
        for (const auto& e : w.pending_events) {
            log.events.push_back(e);
            if (e.type == EventType::action_trigger && !log.hazard_onset)
                log.hazard_onset = e.t;
        }
        record(w.last_throttle, w.last_brake, w.actors[w.ego].state.steer);
        if (w.collided || w.route_done) break;
    }
    return log;
}

}  // namespace scenegen

#endif
