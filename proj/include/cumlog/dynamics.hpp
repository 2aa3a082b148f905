#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cumlog/cost.hpp"
#include "cumlog/network.hpp"

namespace cumlog {

// Proactivity schedule η^t, evaluated at the day being entered (t >= 1), so
// η(t) multiplies the costs experienced on day t-1.
struct Schedule {
    enum class Kind { Constant, Power, Harmonic, Table };
    Kind kind = Kind::Constant;
    double value = 1.0;          // Constant
    double alpha = 0.0;          // Power: η^t = (t+1)^alpha
    std::vector<double> table;   // Table: η^t = table[t-1]

    double eta(int t) const;
    // Theorem-style compliance tag: -1 <= alpha < 0 gives a divergent-sum
    // vanishing schedule; alpha = 0 is the constant-step regime; alpha > 0 is
    // flagged non-compliant.
    bool step_condition_compliant() const;

    static Schedule constant(double v) { return {Kind::Constant, v, 0.0, {}}; }
    static Schedule power(double a) { return {Kind::Power, 1.0, a, {}}; }
    static Schedule harmonic() { return {Kind::Harmonic, 1.0, 0.0, {}}; }
};

// Exploitation schedule r^t for the successive-average engine.
struct RSchedule {
    enum class Kind { Constant, Power };
    Kind kind = Kind::Constant;
    double r = 1.0;       // Constant
    double beta = 0.0;    // Power: r^t = (t+1)^beta

    double at(int t) const;
    static RSchedule constant(double v) { return {Kind::Constant, v, 0.0}; }
    static RSchedule power(double b) { return {Kind::Power, 1.0, b}; }
};

// Behavioral variants of the cumulative update; all three produce identical
// strategy sequences because logit is shift-invariant per OD.
enum class UpdateVariant {
    Raw,          // s' = s + η c
    RecenterMin,  // s' = s + η c, then subtract the per-OD minimum
    ExcessUpdate  // s' = s + η (c - per-OD min c)
};

struct DynamicsState {
    int day = 0;
    std::vector<double> s;
    std::vector<double> p;
    FlowState flow;
};

DynamicsState make_initial_state(const Network& net, const Incidence& inc,
                                 const std::vector<double>& s0, double r);

DynamicsState cumlog_step(const Network& net, const Incidence& inc, const DynamicsState& state,
                          double eta, double r, UpdateVariant variant = UpdateVariant::Raw);

DynamicsState sa_step(const Network& net, const Incidence& inc, const DynamicsState& state,
                      double eta, double r);

// s = Σ_i weights[i] * costs[i]; weights must be nonnegative and sum to 1.
std::vector<double> weighted_average_step(const std::vector<std::vector<double>>& costs,
                                          const std::vector<double>& weights);

enum class Termination { Converged, MaxDays, Diverged };

struct DayRecord {
    int t = 0;
    double gap = 0.0;
    double entropy = 0.0;
    double kl_to_ref = 0.0;  // 0 when no reference strategy is configured
    int used_routes = 0;
    std::vector<double> p, s, x, u, c;
};

struct Trajectory {
    std::vector<DayRecord> days;
    Termination status = Termination::MaxDays;
    int final_day = 0;
    double final_gap = 0.0;

    std::string to_csv() const;   // t, gap, entropy, used_routes, p_k (<= 16 routes)
    std::string to_json() const;  // full precision, all fields
};

struct StopRule {
    int max_days = 1000;
    double gap_tol = 0.0;            // 0 disables the gap stop
    bool divergence_check = true;
};

struct RunConfig {
    enum class Engine { CumLog, Sa };
    Engine engine = Engine::CumLog;
    Schedule schedule;
    RSchedule r_schedule;
    UpdateVariant variant = UpdateVariant::Raw;
    std::vector<double> s0;                      // empty => zeros
    std::optional<std::vector<double>> ref_p;    // reference strategy for KL diagnostics
};

Trajectory run(const Network& net, const Incidence& inc, const RunConfig& config,
               const StopRule& stop);

struct ClassSpec {
    std::string label;
    double r = 1.0;
    double share = 1.0;            // fraction of every OD's demand
    std::vector<double> s0;        // empty => zeros
};

struct MulticlassResult {
    std::vector<Trajectory> per_class;
    FlowState aggregate;
    double aggregate_gap = 0.0;
};

MulticlassResult run_multiclass(const Network& net, const Incidence& inc,
                                const std::vector<ClassSpec>& classes, const Schedule& schedule,
                                const StopRule& stop);

// Divergence proxy over a relative-gap series (needs >= 10 entries):
//   - gap exceeds 10x its initial value, or
//   - gap exceeds 1e3 absolute, or
//   - gap grows monotonically over the last 10 entries by more than 20%, or
//   - no new global minimum over the last 30 entries while the gap swings by
//     more than 1.5x within the window. A flat or gently rippling plateau, or
//     float noise around an essentially-zero gap, is not divergence.
bool detect_divergence(const std::vector<double>& gaps);

// Deterministic normal initial valuations (mean 0, given sigma).
std::vector<double> normal_s0(int n, std::uint64_t seed, double sigma = 0.5);

}  // namespace cumlog
