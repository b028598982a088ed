#pragma once

#include "hus/error.hpp"

#include <string>

namespace hus {

enum class OutputFormat { json, csv };

/// Process exit codes shared by the C API and the command-line tool.
enum class Status : int {
    ok = 0,
    internal = 1,
    config = 2,
    precondition = 3,
    certificate = 4,
    no_convergence = 5,
};

Status status_for(Errc code) noexcept;

struct CommandOutput {
    Status status = Status::ok;
    std::string text;   // report; may be present alongside a failing status
    std::string error;  // diagnostic when status != ok
    bool passed = false;
};

/// Runs `constants`, `solve`, `sweep` or `scenario` (with `scenario_name`).
/// An empty config means all defaults. Never throws.
CommandOutput run_command(const std::string& command, const std::string& scenario_name, const std::string& config,
                          OutputFormat format);

/// Default configuration as pretty JSON. An empty command lists every command
/// and scenario. Throws hus::Error (Errc::config) for unknown names.
std::string default_config(const std::string& command, const std::string& scenario_name);

/// 16 hex digits of FNV-1a over the canonical dump of a JSON document.
std::string config_hash(const std::string& canonical_json);

}  // namespace hus
