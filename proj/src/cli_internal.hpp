#pragma once

#include "memsim/devices.hpp"
#include "memsim/sim_core.hpp"

#include <json.hpp>

#include <filesystem>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace memsim::cli {

using nlohmann::json;

struct RunContext {
    json cfg;
    std::filesystem::path out;
    std::ostream& log;
    std::vector<std::pair<std::string, std::string>> metrics;
    std::vector<std::string> artifacts;
    int exit_code = 0;

    void metric(const std::string& key, double v);
    void metric(const std::string& key, const std::string& v);
    void write_trace(const std::string& name, const Trace& tr);
    // Plain table, one row per entry; numbers in the same format as traces.
    void write_table(const std::string& name, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows);
    void write_text(const std::string& name, const std::string& body);
};

struct Command {
    std::string name;
    json defaults;
    std::map<std::string, json> presets;
    std::function<void(RunContext&)> run;
};

const std::vector<Command>& commands();

// Field access with the path in every error message.
double num(const json& j, const std::string& key);
int integer(const json& j, const std::string& key);
std::uint64_t seed_of(const json& cfg);

HpParams hp_from(const json& j);
json hp_to(const HpParams& p);
DriveSignal signal_from(const json& j);
json signal_to(const DriveSignal& s);
IntegratorSpec integrator_from(const json& j);
json integrator_to(const IntegratorSpec& s);

} // namespace memsim::cli
