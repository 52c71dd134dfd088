#pragma once

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace memsim::cli {

constexpr int exit_ok = 0;
constexpr int exit_validation = 2;
constexpr int exit_numerical = 3;

struct Options {
    std::string subcommand;
    std::string preset;      // empty: the subcommand defaults
    std::string config_path; // JSON overlay, applied after the preset
    std::string out_dir;     // empty: $MEMNET_OUT/<subcommand>, else ./memsim_out/<subcommand>
    std::string maze;        // maze file, maze subcommand only
    std::optional<std::uint64_t> seed;
    std::optional<double> dt;
    std::optional<double> t_end;
    bool literal = false;
};

std::vector<std::string> subcommands();
std::vector<std::string> presets(const std::string& subcommand);

// Defaults, then preset, then config file, then flags. Throws ValidationError naming the bad field.
nlohmann::json effective_config(const Options& opt);

std::string sha256_hex(const std::string& bytes);
std::string config_hash(const nlohmann::json& cfg);

// Runs one experiment and writes its artifacts. Never throws; returns the exit code.
int run(const Options& opt, std::ostream& out, std::ostream& err);

// argv front end.
int main(int argc, char** argv);

} // namespace memsim::cli
