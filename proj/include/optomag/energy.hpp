#pragma once

// Energy ledger. Energies are kept as integer attojoules so totals are exact
// and independent of summation order.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "optomag/error.hpp"
#include "optomag/optics.hpp"
#include "optomag/trainer.hpp"

namespace optomag {

inline std::int64_t to_attojoules(double joules) { return std::llround(joules * 1e18); }
inline double attojoules_to_nj(std::int64_t aj) { return static_cast<double>(aj) * 1e-9; }

struct EnergyBeam {
    double average_power_w = 8.25e-7; ///< calibration power
    double repetition_rate_hz = 1000.0;
    double waist_diameter_um = 100.0;
};

/// Pulse energy apportioned to the written spot by area fraction:
/// E = (P / f) * (d_spot / d_waist)^2.
inline double energy_per_pulse(const EnergyBeam& beam, const SpotGeometry& spot) {
    if (!(beam.waist_diameter_um > 0.0)) throw UsageError("beam waist must be positive");
    if (!(beam.repetition_rate_hz > 0.0)) throw UsageError("repetition rate must be positive");
    const double fraction = spot.diameter_um / beam.waist_diameter_um;
    return beam.average_power_w / beam.repetition_rate_hz * fraction * fraction;
}

struct LedgerConfig {
    double per_pulse_energy_j = 0.0;
    double read_energy_j = 0.4e-9; ///< per synapse read
    bool include_initialization = true;
};

struct LedgerRecord {
    long step = 0; ///< 0 for initialization writes
    int site = 0;
    long pulses = 0;
    std::int64_t energy_aj = 0;
};

struct EnergyLedger {
    std::vector<LedgerRecord> writes;
    long read_events = 0;
    std::int64_t per_pulse_aj = 0;
    std::int64_t per_read_aj = 0;
    long steps = 0;

    std::int64_t write_aj() const {
        std::int64_t total = 0;
        for (const auto& r : writes) total += r.energy_aj;
        return total;
    }
    std::int64_t read_aj() const { return read_events * per_read_aj; }
    std::int64_t total_aj() const { return write_aj() + read_aj(); }

    long total_pulses() const {
        long n = 0;
        for (const auto& r : writes) n += r.pulses;
        return n;
    }

    std::string summary_line() const {
        return fmt::format("pulses={} write={:.3f} nJ read={:.3f} nJ total={:.3f} nJ steps={}", total_pulses(),
                           attojoules_to_nj(write_aj()), attojoules_to_nj(read_aj()),
                           attojoules_to_nj(total_aj()), steps);
    }
};

inline void to_json(nlohmann::json& j, const LedgerRecord& r) {
    j = nlohmann::json{{"step", r.step}, {"site", r.site}, {"pulses", r.pulses}, {"energy_aj", r.energy_aj}};
}

inline void to_json(nlohmann::json& j, const EnergyLedger& l) {
    j = nlohmann::json{
        {"per_pulse_energy_aj", l.per_pulse_aj},
        {"per_read_energy_aj", l.per_read_aj},
        {"read_events", l.read_events},
        {"total_pulses", l.total_pulses()},
        {"write_energy_aj", l.write_aj()},
        {"read_energy_aj", l.read_aj()},
        {"total_energy_aj", l.total_aj()},
        {"write_energy_nj", attojoules_to_nj(l.write_aj())},
        {"read_energy_nj", attojoules_to_nj(l.read_aj())},
        {"total_energy_nj", attojoules_to_nj(l.total_aj())},
        {"steps", l.steps},
        {"writes", l.writes},
    };
}

inline EnergyLedger account_run(const TrainingTrace& trace, const LedgerConfig& cfg) {
    if (!(cfg.per_pulse_energy_j >= 0.0) || !(cfg.read_energy_j >= 0.0))
        throw UsageError("ledger energies must be non-negative");
    EnergyLedger ledger;
    ledger.per_pulse_aj = to_attojoules(cfg.per_pulse_energy_j);
    ledger.per_read_aj = to_attojoules(cfg.read_energy_j);
    ledger.steps = trace.summary.total_steps;
    auto add = [&](long step, const SiteUpdate& u) {
        ledger.writes.push_back({step, u.site, u.pulses, u.pulses * ledger.per_pulse_aj});
    };
    if (cfg.include_initialization) {
        for (const auto& u : trace.init_updates) add(0, u);
        ledger.read_events += trace.init_reads;
    }
    for (const auto& s : trace.steps) {
        for (const auto& u : s.updates) add(s.step, u);
        ledger.read_events += s.site_reads;
    }
    return ledger;
}

} // namespace optomag
