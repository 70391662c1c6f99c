#include "delaykf/link_energy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "delaykf/errors.hpp"

namespace delaykf {

double dbm_per_hz_to_w(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

void LinkBudget::validate() const {
    const bool positive = bits > 0.0 && bandwidth > 0.0 && wavelength > 0.0 &&
                          tx_antenna_gain > 0.0 && rx_antenna_gain > 0.0 &&
                          noise_density > 0.0 && pa_efficiency > 0.0 && circuit_power > 0.0 &&
                          tx_power > 0.0 && min_snr > 0.0;
    if (!positive) throw ConfigError("LinkBudget: all parameters must be strictly positive");
    if (pa_efficiency > 1.0) throw ConfigError("LinkBudget: PA efficiency must be <= 1");
}

double channel_gain(const LinkBudget& budget, double distance) {
    if (!(distance > 0.0)) throw ConfigError("channel_gain: distance must be positive");
    const double denom = 4.0 * std::numbers::pi * distance;
    return budget.wavelength * budget.wavelength * budget.tx_antenna_gain *
           budget.rx_antenna_gain / (denom * denom);
}

double snr(const LinkBudget& budget, double gain) {
    return budget.pa_efficiency * budget.tx_power * gain /
           (budget.noise_density * budget.bandwidth);
}

double tx_energy(const LinkBudget& budget, double rho) {
    return (budget.tx_power + budget.circuit_power) * budget.bits /
           (budget.bandwidth * std::log2(1.0 + rho));
}

double tx_energy_at(const LinkBudget& budget, double distance) {
    const double gain = channel_gain(budget, distance);
    if (!budget.calibrate_tx_power) return tx_energy(budget, snr(budget, gain));
    // Smallest transmit power reaching min_snr, never below the configured P_t.
    const double needed = budget.min_snr * budget.noise_density * budget.bandwidth /
                          (budget.pa_efficiency * gain);
    LinkBudget calibrated = budget;
    calibrated.tx_power = std::max(budget.tx_power, needed);
    return tx_energy(calibrated, snr(calibrated, gain));
}

double assign_energies(std::vector<SensorModel>& sensors, const LinkBudget& budget) {
    budget.validate();
    double max_e = 0.0;
    for (auto& sensor : sensors) {
        const double e = tx_energy_at(budget, sensor.distance());
        sensor.set_energy(e);
        max_e = std::max(max_e, e);
    }
    return max_e;
}

double max_energy(const std::vector<SensorModel>& sensors) {
    double max_e = 0.0;
    for (const auto& sensor : sensors) max_e = std::max(max_e, sensor.energy());
    return max_e;
}

}  // namespace delaykf
