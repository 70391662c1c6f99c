#include "delaykf/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "delaykf/csv.hpp"
#include "delaykf/errors.hpp"

namespace delaykf {

namespace {

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad number for '" + key + "': " + value);
    }
}

long long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad integer for '" + key + "': " + value);
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "on") return true;
    if (value == "false" || value == "0" || value == "off") return false;
    throw ConfigError("config: bad boolean for '" + key + "': " + value);
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

void ExperimentConfig::set(const std::string& key, const std::string& value) {
    using Setter = std::function<void(ExperimentConfig&, const std::string&)>;
    static const std::map<std::string, Setter> setters = {
        {"master_seed",
         [](ExperimentConfig& c, const std::string& v) {
             c.master_seed = static_cast<std::uint64_t>(parse_int("master_seed", v));
         }},
        {"n_states",
         [](ExperimentConfig& c, const std::string& v) {
             c.n_states = static_cast<int>(parse_int("n_states", v));
         }},
        {"n_sensors",
         [](ExperimentConfig& c, const std::string& v) {
             c.n_sensors = static_cast<int>(parse_int("n_sensors", v));
         }},
        {"epsilon",
         [](ExperimentConfig& c, const std::string& v) {
             c.ranges.epsilon = parse_double("epsilon", v);
         }},
        {"p_low",
         [](ExperimentConfig& c, const std::string& v) {
             c.ranges.p_low = parse_double("p_low", v);
         }},
        {"p_high",
         [](ExperimentConfig& c, const std::string& v) {
             c.ranges.p_high = parse_double("p_high", v);
         }},
        {"q_low",
         [](ExperimentConfig& c, const std::string& v) {
             c.ranges.q_low = parse_double("q_low", v);
         }},
        {"q_high",
         [](ExperimentConfig& c, const std::string& v) {
             c.ranges.q_high = parse_double("q_high", v);
         }},
        {"r_low",
         [](ExperimentConfig& c, const std::string& v) {
             c.ranges.r_low = parse_double("r_low", v);
         }},
        {"r_high",
         [](ExperimentConfig& c, const std::string& v) {
             c.ranges.r_high = parse_double("r_high", v);
         }},
        {"c_low",
         [](ExperimentConfig& c, const std::string& v) {
             c.ranges.c_low = parse_double("c_low", v);
         }},
        {"c_high",
         [](ExperimentConfig& c, const std::string& v) {
             c.ranges.c_high = parse_double("c_high", v);
         }},
        {"d_min",
         [](ExperimentConfig& c, const std::string& v) {
             c.ranges.d_min = parse_double("d_min", v);
         }},
        {"d_max",
         [](ExperimentConfig& c, const std::string& v) {
             c.ranges.d_max = parse_double("d_max", v);
         }},
        {"spectral_rescale",
         [](ExperimentConfig& c, const std::string& v) {
             c.ranges.rescale_spectral = parse_bool("spectral_rescale", v);
         }},
        {"spectral_target",
         [](ExperimentConfig& c, const std::string& v) {
             c.ranges.spectral_target = parse_double("spectral_target", v);
         }},
        {"bits_per_packet",
         [](ExperimentConfig& c, const std::string& v) {
             c.bits_per_packet = parse_double("bits_per_packet", v);
         }},
        {"bandwidth_hz",
         [](ExperimentConfig& c, const std::string& v) {
             c.bandwidth_hz = parse_double("bandwidth_hz", v);
         }},
        {"wavelength_m",
         [](ExperimentConfig& c, const std::string& v) {
             c.wavelength_m = parse_double("wavelength_m", v);
         }},
        {"antenna_gain_tx",
         [](ExperimentConfig& c, const std::string& v) {
             c.antenna_gain_tx = parse_double("antenna_gain_tx", v);
         }},
        {"antenna_gain_rx",
         [](ExperimentConfig& c, const std::string& v) {
             c.antenna_gain_rx = parse_double("antenna_gain_rx", v);
         }},
        {"noise_density_dbm_hz",
         [](ExperimentConfig& c, const std::string& v) {
             c.noise_density_dbm_hz = parse_double("noise_density_dbm_hz", v);
         }},
        {"min_snr_db",
         [](ExperimentConfig& c, const std::string& v) {
             c.min_snr_db = parse_double("min_snr_db", v);
         }},
        {"pa_efficiency",
         [](ExperimentConfig& c, const std::string& v) {
             c.pa_efficiency = parse_double("pa_efficiency", v);
         }},
        {"circuit_power_w",
         [](ExperimentConfig& c, const std::string& v) {
             c.circuit_power_w = parse_double("circuit_power_w", v);
         }},
        {"tx_power_w",
         [](ExperimentConfig& c, const std::string& v) {
             c.tx_power_w = parse_double("tx_power_w", v);
         }},
        {"snr_calibration",
         [](ExperimentConfig& c, const std::string& v) {
             c.snr_calibration = parse_bool("snr_calibration", v);
         }},
        {"horizon",
         [](ExperimentConfig& c, const std::string& v) {
             c.horizon = static_cast<int>(parse_int("horizon", v));
         }},
        {"beta",
         [](ExperimentConfig& c, const std::string& v) { c.beta = parse_double("beta", v); }},
        {"history_len",
         [](ExperimentConfig& c, const std::string& v) {
             c.history_len = static_cast<int>(parse_int("history_len", v));
         }},
        {"log_eps",
         [](ExperimentConfig& c, const std::string& v) {
             c.log_eps = parse_double("log_eps", v);
         }},
        {"buffer_len",
         [](ExperimentConfig& c, const std::string& v) {
             c.buffer_len = static_cast<int>(parse_int("buffer_len", v));
         }},
        {"learning_rate",
         [](ExperimentConfig& c, const std::string& v) {
             c.ppo.learning_rate = parse_double("learning_rate", v);
         }},
        {"discount",
         [](ExperimentConfig& c, const std::string& v) {
             c.ppo.discount = parse_double("discount", v);
         }},
        {"clip",
         [](ExperimentConfig& c, const std::string& v) { c.ppo.clip = parse_double("clip", v); }},
        {"entropy_coef",
         [](ExperimentConfig& c, const std::string& v) {
             c.ppo.entropy_coef = parse_double("entropy_coef", v);
         }},
        {"value_coef",
         [](ExperimentConfig& c, const std::string& v) {
             c.ppo.value_coef = parse_double("value_coef", v);
         }},
        {"n_envs",
         [](ExperimentConfig& c, const std::string& v) {
             c.ppo.n_envs = static_cast<int>(parse_int("n_envs", v));
         }},
        {"n_steps",
         [](ExperimentConfig& c, const std::string& v) {
             c.ppo.n_steps = static_cast<int>(parse_int("n_steps", v));
         }},
        {"n_minibatches",
         [](ExperimentConfig& c, const std::string& v) {
             c.ppo.n_minibatches = static_cast<int>(parse_int("n_minibatches", v));
         }},
        {"update_epochs",
         [](ExperimentConfig& c, const std::string& v) {
             c.ppo.update_epochs = static_cast<int>(parse_int("update_epochs", v));
         }},
        {"gae_lambda",
         [](ExperimentConfig& c, const std::string& v) {
             c.ppo.gae_lambda = parse_double("gae_lambda", v);
         }},
        {"total_steps",
         [](ExperimentConfig& c, const std::string& v) {
             c.ppo.total_steps = parse_int("total_steps", v);
         }},
        {"n_runs",
         [](ExperimentConfig& c, const std::string& v) {
             c.n_runs = static_cast<int>(parse_int("n_runs", v));
         }},
    };

    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("config: unknown key '" + key + "'");
    it->second(*this, value);
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    ExperimentConfig config;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config: line " + std::to_string(lineno) + ": empty key or value");
        config.set(key, value);
    }
    config.validate();
    return config;
}

std::string ExperimentConfig::to_text() const {
    std::ostringstream out;
    const auto num = [](double v) { return format_double(v); };
    out << "# experiment\n";
    out << "master_seed = " << master_seed << "\n";
    out << "n_runs = " << n_runs << "\n";
    out << "\n# system generation\n";
    out << "n_states = " << n_states << "\n";
    out << "n_sensors = " << n_sensors << "\n";
    out << "epsilon = " << num(ranges.epsilon) << "\n";
    out << "p_low = " << num(ranges.p_low) << "\n";
    out << "p_high = " << num(ranges.p_high) << "\n";
    out << "q_low = " << num(ranges.q_low) << "\n";
    out << "q_high = " << num(ranges.q_high) << "\n";
    out << "r_low = " << num(ranges.r_low) << "\n";
    out << "r_high = " << num(ranges.r_high) << "\n";
    out << "c_low = " << num(ranges.c_low) << "\n";
    out << "c_high = " << num(ranges.c_high) << "\n";
    out << "d_min = " << num(ranges.d_min) << "\n";
    out << "d_max = " << num(ranges.d_max) << "\n";
    out << "spectral_rescale = " << (ranges.rescale_spectral ? "true" : "false") << "\n";
    out << "spectral_target = " << num(ranges.spectral_target) << "\n";
    out << "\n# link budget\n";
    out << "bits_per_packet = " << num(bits_per_packet) << "\n";
    out << "bandwidth_hz = " << num(bandwidth_hz) << "\n";
    out << "wavelength_m = " << num(wavelength_m) << "\n";
    out << "antenna_gain_tx = " << num(antenna_gain_tx) << "\n";
    out << "antenna_gain_rx = " << num(antenna_gain_rx) << "\n";
    out << "noise_density_dbm_hz = " << num(noise_density_dbm_hz) << "\n";
    out << "min_snr_db = " << num(min_snr_db) << "\n";
    out << "pa_efficiency = " << num(pa_efficiency) << "\n";
    out << "circuit_power_w = " << num(circuit_power_w) << "\n";
    out << "tx_power_w = " << num(tx_power_w) << "\n";
    out << "snr_calibration = " << (snr_calibration ? "true" : "false") << "\n";
    out << "\n# environment\n";
    out << "horizon = " << horizon << "\n";
    out << "beta = " << num(beta) << "\n";
    out << "history_len = " << history_len << "\n";
    out << "log_eps = " << num(log_eps) << "\n";
    out << "buffer_len = " << buffer_len << "\n";
    out << "\n# ppo\n";
    out << "learning_rate = " << num(ppo.learning_rate) << "\n";
    out << "discount = " << num(ppo.discount) << "\n";
    out << "clip = " << num(ppo.clip) << "\n";
    out << "entropy_coef = " << num(ppo.entropy_coef) << "\n";
    out << "value_coef = " << num(ppo.value_coef) << "\n";
    out << "n_envs = " << ppo.n_envs << "\n";
    out << "n_steps = " << ppo.n_steps << "\n";
    out << "n_minibatches = " << ppo.n_minibatches << "\n";
    out << "update_epochs = " << ppo.update_epochs << "\n";
    out << "gae_lambda = " << num(ppo.gae_lambda) << "\n";
    out << "total_steps = " << ppo.total_steps << "\n";
    return out.str();
}

LinkBudget ExperimentConfig::link_budget() const {
    LinkBudget budget;
    budget.bits = bits_per_packet;
    budget.bandwidth = bandwidth_hz;
    budget.wavelength = wavelength_m;
    budget.tx_antenna_gain = antenna_gain_tx;
    budget.rx_antenna_gain = antenna_gain_rx;
    budget.noise_density = dbm_per_hz_to_w(noise_density_dbm_hz);
    budget.pa_efficiency = pa_efficiency;
    budget.circuit_power = circuit_power_w;
    budget.tx_power = tx_power_w;
    budget.min_snr = db_to_linear(min_snr_db);
    budget.calibrate_tx_power = snr_calibration;
    return budget;
}

void ExperimentConfig::validate() const {
    if (n_states < 1 || n_sensors < 1)
        throw ConfigError("config: n_states and n_sensors must be >= 1");
    if (n_runs < 1) throw ConfigError("config: n_runs must be >= 1");
    link_budget().validate();
    ppo.validate();
    if (horizon < 1 || history_len < 1 || buffer_len < 1 || beta < 0.0 || !(log_eps > 0.0))
        throw ConfigError("config: malformed environment block");
}

const std::vector<std::string>& variation_names() {
    static const std::vector<std::string> names = {"standard", "p-low", "p-high", "q-low",
                                                   "q-high",   "r-low", "r-high"};
    return names;
}

GenerationRanges ranges_for_variation(const GenerationRanges& base, const std::string& name) {
    GenerationRanges r = base;
    if (name == "standard") return r;
    if (name == "p-low") {
        r.p_low = 0.1;
        r.p_high = 0.3;
    } else if (name == "p-high") {
        r.p_low = 0.7;
        r.p_high = 0.9;
    } else if (name == "q-low") {
        r.q_low = 0.0;
        r.q_high = 0.1;
    } else if (name == "q-high") {
        r.q_low = 1.0;
        r.q_high = 10.0;
    } else if (name == "r-low") {
        r.r_low = 0.0;
        r.r_high = 0.1;
    } else if (name == "r-high") {
        r.r_low = 1.0;
        r.r_high = 10.0;
    } else {
        throw ConfigError("unknown variation '" + name + "'");
    }
    return r;
}

EnvConfig build_env_config(const ExperimentConfig& config, const std::string& variation) {
    config.validate();
    const GenerationRanges ranges = ranges_for_variation(config.ranges, variation);
    System system = generate_system(split_seed(config.master_seed, "system"), config.n_states,
                                    config.n_sensors, ranges);
    const LinkBudget budget = config.link_budget();
    assign_energies(system.sensors, budget);
    EnvConfig env{std::move(system.model), std::move(system.sensors), budget,
                  config.horizon,          config.beta,               config.history_len,
                  config.log_eps,          config.buffer_len,         0};
    return env;
}

}  // namespace delaykf
