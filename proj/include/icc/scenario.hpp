#pragma once

#include <optional>
#include <string>
#include <vector>

namespace icc {

/// Full description of one sensing scenario: the sensed field, the sensor
/// array geometry, and the reporting link. Noise powers and SNRs are kept
/// coherent: setting an SNR derives the matching noise power and vice
/// versa, and a config supplying both must agree to 1e-9 dB.
struct ScenarioConfig {
    int k = 6;    // sensors
    int m = 28;   // antennas per sensor
    int n = 100;  // samples per slot

    double sigma_s2 = 1.0;        // primary signal power
    double sigma_h2 = 1.0;        // sensing channel gain power
    double sigma_u2_sense = 0.0;  // sensing noise power (derived in ctor)
    double rho = 0.5;             // antenna correlation, [R]_{p,q} = rho^|p-q|
    double snr_sense_db = -15.0;

    double kappa = 1.0;            // reporting transmit power
    double sigma_u2_report = 0.0;  // reporting noise power (derived in ctor)
    double snr_report_db = 0.0;

    double k_factor_db = 0.0;  // Rician K-factor of the reporting fade, dB
    double iota = 0.9;         // channel estimation quality, (0, 1]
    double nu = 2.0;           // path loss exponent
    std::vector<double> distances;  // per sensor, defaults to all 1

    std::optional<std::vector<double>> snr_sense_db_per_sensor;

    ScenarioConfig();

    void set_snr_sense_db(double db);
    void set_snr_report_db(double db);
    void set_k(int sensors);

    double snr_sense_linear() const;
    double snr_report_linear() const;
    double sigma_u2_sense_for(int sensor) const;

    void validate() const;

    std::string to_json_string() const;
    static ScenarioConfig from_json_string(const std::string& text);

    void save(const std::string& path) const;
    static ScenarioConfig load(const std::string& path);
};

} // namespace icc
