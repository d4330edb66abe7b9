#include "icc/scenario.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>

namespace icc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double linear_to_db(double x) {
    if (x <= 0.0) return -kInf;
    return 10.0 * std::log10(x);
}

nlohmann::json encode_double(double v) {
    if (std::isfinite(v)) return v;
    if (v > 0.0) return "inf";
    if (v < 0.0) return "-inf";
    throw std::invalid_argument("config: nan is not representable");
}

double decode_double(const nlohmann::json& j, const std::string& key) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf" || s == "+inf") return kInf;
        if (s == "-inf") return -kInf;
    }
    throw std::invalid_argument("config: field '" + key + "' must be a number or \"inf\"/\"-inf\"");
}

} // namespace

ScenarioConfig::ScenarioConfig() {
    sigma_u2_sense = sigma_h2 * sigma_s2 * db_to_linear(-snr_sense_db);
    sigma_u2_report = kappa * db_to_linear(-snr_report_db);
    distances.assign(static_cast<size_t>(k), 1.0);
}

void ScenarioConfig::set_snr_sense_db(double db) {
    snr_sense_db = db;
    sigma_u2_sense = sigma_h2 * sigma_s2 * db_to_linear(-db);
}

void ScenarioConfig::set_snr_report_db(double db) {
    snr_report_db = db;
    sigma_u2_report = kappa * db_to_linear(-db);
}

void ScenarioConfig::set_k(int sensors) {
    if (sensors < 1) throw std::invalid_argument("config: k must be at least 1");
    k = sensors;
    distances.assign(static_cast<size_t>(k), 1.0);
    if (snr_sense_db_per_sensor &&
        static_cast<int>(snr_sense_db_per_sensor->size()) != k)
        snr_sense_db_per_sensor.reset();
}

double ScenarioConfig::snr_sense_linear() const { return db_to_linear(snr_sense_db); }

double ScenarioConfig::snr_report_linear() const { return db_to_linear(snr_report_db); }

double ScenarioConfig::sigma_u2_sense_for(int sensor) const {
    if (!snr_sense_db_per_sensor) return sigma_u2_sense;
    return sigma_h2 * sigma_s2 * db_to_linear(-snr_sense_db_per_sensor->at(sensor));
}

void ScenarioConfig::validate() const {
    if (k < 1) throw std::invalid_argument("config: k must be at least 1");
    if (m < 1) throw std::invalid_argument("config: m must be at least 1");
    if (n < 1) throw std::invalid_argument("config: n must be at least 1");
    if (!(sigma_s2 > 0.0)) throw std::invalid_argument("config: sigma_s2 must be positive");
    if (!(sigma_h2 > 0.0)) throw std::invalid_argument("config: sigma_h2 must be positive");
    if (!(sigma_u2_sense > 0.0))
        throw std::invalid_argument("config: sigma_u2_sense must be positive");
    if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("config: rho must lie in [0,1)");
    if (!(kappa > 0.0)) throw std::invalid_argument("config: kappa must be positive");
    if (!(sigma_u2_report >= 0.0))
        throw std::invalid_argument("config: sigma_u2_report must be non-negative");
    if (!(iota > 0.0 && iota <= 1.0))
        throw std::invalid_argument("config: iota must lie in (0,1]");
    if (!(nu >= 0.0)) throw std::invalid_argument("config: nu must be non-negative");
    if (std::isnan(k_factor_db)) throw std::invalid_argument("config: k_factor_db is nan");
    if (static_cast<int>(distances.size()) != k)
        throw std::invalid_argument("config: distances must have one entry per sensor");
    for (double d : distances)
        if (!(d > 0.0)) throw std::invalid_argument("config: distances must be positive");
    if (snr_sense_db_per_sensor &&
        static_cast<int>(snr_sense_db_per_sensor->size()) != k)
        throw std::invalid_argument("config: snr_sense_db_per_sensor must have one entry per sensor");

    const double snr_from_powers = linear_to_db(sigma_h2 * sigma_s2 / sigma_u2_sense);
    if (std::abs(snr_from_powers - snr_sense_db) > 1e-9)
        throw std::invalid_argument("config: snr_sense_db inconsistent with noise powers");
    const double report_from_powers = linear_to_db(kappa / sigma_u2_report);
    const bool both_inf = std::isinf(report_from_powers) && std::isinf(snr_report_db) &&
                          (report_from_powers > 0) == (snr_report_db > 0);
    if (!both_inf && std::abs(report_from_powers - snr_report_db) > 1e-9)
        throw std::invalid_argument("config: snr_report_db inconsistent with noise powers");
}

std::string ScenarioConfig::to_json_string() const {
    nlohmann::json j;
    j["k"] = k;
    j["m"] = m;
    j["n"] = n;
    j["sigma_s2"] = sigma_s2;
    j["sigma_h2"] = sigma_h2;
    j["sigma_u2_sense"] = sigma_u2_sense;
    j["rho"] = rho;
    j["snr_sense_db"] = encode_double(snr_sense_db);
    j["snr_report_db"] = encode_double(snr_report_db);
    j["kappa"] = kappa;
    j["sigma_u2_report"] = sigma_u2_report;
    j["k_factor_db"] = encode_double(k_factor_db);
    j["iota"] = iota;
    j["nu"] = nu;
    j["distances"] = distances;
    if (snr_sense_db_per_sensor) j["snr_sense_db_per_sensor"] = *snr_sense_db_per_sensor;
    return j.dump(2);
}

ScenarioConfig ScenarioConfig::from_json_string(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config: json parse failure: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");

    static const std::set<std::string> known = {
        "k", "m", "n", "sigma_s2", "sigma_h2", "sigma_u2_sense", "rho",
        "snr_sense_db", "snr_report_db", "kappa", "sigma_u2_report",
        "k_factor_db", "iota", "nu", "distances", "snr_sense_db_per_sensor"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key()))
            throw std::invalid_argument("config: unknown field '" + it.key() + "'");

    ScenarioConfig c;
    if (j.contains("k")) c.k = j["k"].get<int>();
    if (j.contains("m")) c.m = j["m"].get<int>();
    if (j.contains("n")) c.n = j["n"].get<int>();
    if (j.contains("sigma_s2")) c.sigma_s2 = j["sigma_s2"].get<double>();
    if (j.contains("sigma_h2")) c.sigma_h2 = j["sigma_h2"].get<double>();
    if (j.contains("rho")) c.rho = j["rho"].get<double>();
    if (j.contains("kappa")) c.kappa = j["kappa"].get<double>();
    if (j.contains("k_factor_db")) c.k_factor_db = decode_double(j["k_factor_db"], "k_factor_db");
    if (j.contains("iota")) c.iota = j["iota"].get<double>();
    if (j.contains("nu")) c.nu = j["nu"].get<double>();

    const bool has_sense_snr = j.contains("snr_sense_db");
    const bool has_sense_sigma = j.contains("sigma_u2_sense");
    if (has_sense_snr) c.snr_sense_db = decode_double(j["snr_sense_db"], "snr_sense_db");
    if (has_sense_sigma) c.sigma_u2_sense = j["sigma_u2_sense"].get<double>();
    if (has_sense_sigma && !has_sense_snr)
        c.snr_sense_db = linear_to_db(c.sigma_h2 * c.sigma_s2 / c.sigma_u2_sense);
    else if (!has_sense_sigma)
        c.sigma_u2_sense = c.sigma_h2 * c.sigma_s2 * db_to_linear(-c.snr_sense_db);

    const bool has_report_snr = j.contains("snr_report_db");
    const bool has_report_sigma = j.contains("sigma_u2_report");
    if (has_report_snr) c.snr_report_db = decode_double(j["snr_report_db"], "snr_report_db");
    if (has_report_sigma) c.sigma_u2_report = j["sigma_u2_report"].get<double>();
    if (has_report_sigma && !has_report_snr)
        c.snr_report_db = linear_to_db(c.kappa / c.sigma_u2_report);
    else if (!has_report_sigma)
        c.sigma_u2_report = c.kappa * db_to_linear(-c.snr_report_db);

    if (j.contains("distances"))
        c.distances = j["distances"].get<std::vector<double>>();
    else
        c.distances.assign(static_cast<size_t>(c.k), 1.0);
    if (j.contains("snr_sense_db_per_sensor"))
        c.snr_sense_db_per_sensor = j["snr_sense_db_per_sensor"].get<std::vector<double>>();

    c.validate();
    return c;
}

void ScenarioConfig::save(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("config: cannot open '" + path + "' for writing");
    f << to_json_string() << "\n";
}

ScenarioConfig ScenarioConfig::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("config: cannot open '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return from_json_string(text);
}

} // namespace icc
