#pragma once

#include <vector>

#include "delaykf/linmodel.hpp"

namespace delaykf {

double dbm_per_hz_to_w(double dbm);
double db_to_linear(double db);

/// Wireless link parameters; defaults are the simulation-setup values
/// (280 bits, 2 MHz, unit antenna gains, 12.5 cm wavelength, -174 dBm/Hz,
/// 10 dB minimum SNR, 80% PA efficiency, 10 mW transmit and circuit power).
struct LinkBudget {
    double bits = 280.0;                           // N_b
    double bandwidth = 2e6;                        // B, Hz
    double wavelength = 0.125;                     // lambda, m
    double tx_antenna_gain = 1.0;                  // G_t
    double rx_antenna_gain = 1.0;                  // G_r
    double noise_density = 3.9810717055349853e-21; // N_0, W/Hz (-174 dBm/Hz)
    double pa_efficiency = 0.8;                    // eta
    double circuit_power = 0.01;                   // P_c, W
    double tx_power = 0.01;                        // P_t, W
    double min_snr = 10.0;                         // rho_min, linear (10 dB)
    // When set, each sensor's transmit power is raised (never lowered below
    // the configured P_t) until its SNR reaches min_snr at its distance.
    bool calibrate_tx_power = false;

    void validate() const;
};

/// Friis free-space gain: lambda^2 G_t G_r / (4 pi d)^2.
double channel_gain(const LinkBudget& budget, double distance);

/// rho = eta P_t G / (N_0 B).
double snr(const LinkBudget& budget, double gain);

/// E = (P_t + P_c) N_b / (B log2(1 + rho)).
double tx_energy(const LinkBudget& budget, double rho);

/// Per-transmission energy at a given distance, honoring the calibration
/// switch (per-sensor transmit power raised to meet min_snr when enabled).
double tx_energy_at(const LinkBudget& budget, double distance);

/// Fills every sensor's energy field; returns max_i E^i.
double assign_energies(std::vector<SensorModel>& sensors, const LinkBudget& budget);

double max_energy(const std::vector<SensorModel>& sensors);

}  // namespace delaykf
