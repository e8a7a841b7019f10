#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "aes/cli.hpp"
#include "aes/csv.hpp"
#include "aes/error.hpp"
#include "aes/parallel.hpp"
#include "aes/rng.hpp"
#include "aes/version.hpp"
#include "commands.hpp"

namespace aes::cli {

namespace {

constexpr const char* kResolvedConfigFile = "resolved_config.json";

std::string scalar_text(const nlohmann::json& v) {
    if (v.is_string()) {
        return v.get<std::string>();
    }
    if (v.is_boolean()) {
        return v.get<bool>() ? "true" : "false";
    }
    return v.dump();
}

/// JSON config files. Two layouts are accepted: the resolved-config echo
/// {"command": [...], "options": {...}}, and nested objects whose keys are
/// subcommand names with option values at the leaves.
class JsonConfig : public CLI::Config {
public:
    std::string to_config(const CLI::App*, bool, bool, std::string) const override { return {}; }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(input);
        } catch (const nlohmann::json::exception& e) {
            throw CLI::ConfigError(std::string("config is not valid JSON: ") + e.what());
        }
        if (!j.is_object()) {
            throw CLI::ConfigError("config must be a JSON object");
        }
        std::vector<CLI::ConfigItem> items;
        if (j.contains("command") && j.contains("options")) {
            const auto parents = j.at("command").get<std::vector<std::string>>();
            for (const auto& [name, value] : j.at("options").items()) {
                add_item(items, parents, name, value);
            }
            return items;
        }
        walk(items, {}, j);
        return items;
    }

private:
    static void add_item(std::vector<CLI::ConfigItem>& items, const std::vector<std::string>& parents,
                         const std::string& name, const nlohmann::json& value) {
        if (value.is_null()) {
            return;
        }
        CLI::ConfigItem item;
        item.parents = parents;
        item.name = name;
        if (value.is_array()) {
            for (const auto& v : value) {
                item.inputs.push_back(scalar_text(v));
            }
        } else {
            item.inputs.push_back(scalar_text(value));
        }
        items.push_back(std::move(item));
    }

    static void walk(std::vector<CLI::ConfigItem>& items, std::vector<std::string> parents, const nlohmann::json& j) {
        for (const auto& [name, value] : j.items()) {
            if (value.is_object()) {
                auto sub = parents;
                sub.push_back(name);
                walk(items, sub, value);
            } else {
                add_item(items, parents, name, value);
            }
        }
    }
};

/// Effective value of every long option of `app` (given or defaulted).
nlohmann::json resolved_options(const CLI::App& app) {
    nlohmann::json options = nlohmann::json::object();
    for (const CLI::Option* op : app.get_options()) {
        const std::string& name = op->get_single_name();
        if (name.empty() || op->get_lnames().empty() || name == "help" || name == "config") {
            continue;
        }
        std::vector<std::string> values = op->results();
        if (values.empty()) {
            std::string d = op->get_default_str();
            if (d.empty() || d == "{}" || d == "[]") {
                continue;
            }
            if (d.size() >= 2 && d.front() == '[' && d.back() == ']') {
                // Vector defaults are rendered "[a,b,c]".
                std::stringstream items(d.substr(1, d.size() - 2));
                for (std::string v; std::getline(items, v, ',');) {
                    values.push_back(v);
                }
                if (values.empty()) {
                    continue;
                }
            } else {
                values.push_back(d);
            }
        }
        if (op->get_expected_max() == 0) {
            // Flags: record the resulting boolean.
            options[name] = op->as<bool>();
        } else if (op->get_items_expected_max() > 1 || values.size() > 1) {
            options[name] = values;
        } else {
            options[name] = values.front();
        }
    }
    return options;
}

std::string version_text() {
    std::ostringstream os;
    os << "aes " << kToolVersion << "\n"
       << "formats: " << kEmbeddingFormat << " " << kForestFormat << " " << kMlpFormat << " " << kVectorizerFormat
       << " " << kFeatureBundleFormat << " " << kHandcraftedSchema << "\n"
       << "prng: " << Rng::kName;
    return os.str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Batch toolkit for automated essay scoring", "aes"};
    app.fallthrough();
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    app.set_version_flag("--version", version_text());
    unsigned threads = 0;
    app.add_option("--threads", threads, "Worker thread cap (0 = hardware concurrency)");
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "JSON config file; command-line flags override its values");

    std::vector<Command> commands;
    register_commands(app, commands);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return static_cast<int>(ErrorKind::usage);
    }
    set_max_threads(threads);

    const Command* selected = nullptr;
    for (const auto& c : commands) {
        if (c.app->parsed() && c.app->get_subcommands().empty()) {
            selected = &c;
        }
    }
    if (selected == nullptr) {
        err << "aes: usage error: choose a subcommand (see --help)\n";
        return static_cast<int>(ErrorKind::usage);
    }
    try {
        selected->action(out);
        nlohmann::json echo = {
            {"command", selected->path},
            {"tool_version", kToolVersion},
            {"options", resolved_options(*selected->app)},
        };
        if (selected->effective && !selected->effective->is_null()) {
            echo["effective"] = *selected->effective;
        }
        write_file(std::filesystem::path(*selected->out_dir) / kResolvedConfigFile, echo.dump(2) + "\n");
    } catch (const Error& e) {
        err << "aes: " << kind_name(e.kind()) << " error: " << e.what() << "\n";
        return static_cast<int>(e.kind());
    } catch (const std::filesystem::filesystem_error& e) {
        err << "aes: io error: " << e.what() << "\n";
        return static_cast<int>(ErrorKind::io);
    } catch (const std::bad_alloc&) {
        err << "aes: numeric error: out of memory\n";
        return static_cast<int>(ErrorKind::numeric);
    }
    return 0;
}

}  // namespace aes::cli
