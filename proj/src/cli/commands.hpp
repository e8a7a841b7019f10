#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

namespace aes::cli {

struct Command {
    CLI::App* app = nullptr;
    std::vector<std::string> path;  ///< subcommand names from the root
    const std::string* out_dir = nullptr;
    std::function<void(std::ostream&)> action;
    /// Values derived during the run (e.g. learner config after presets), echoed beside the options.
    std::shared_ptr<nlohmann::json> effective;
};

/// Boolean flag pair "--name" / "--no-name" whose default is recorded for the echo.
CLI::Option* add_switch(CLI::App* app, const std::string& name, bool& target, const std::string& description);

void register_commands(CLI::App& root, std::vector<Command>& commands);

}  // namespace aes::cli
