#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <functional>
#include <iosfwd>
#include <string>

namespace fragtail::cli {

using Json = nlohmann::ordered_json;

/// Single-line JSON with ": " and ", " separators; numbers keep nlohmann's shortest round-trip form.
void write_json(std::ostream& out, const Json& j);
std::string to_line(const Json& j);

/// Adds every verb to `app`. The selected verb's action is stored in `action` during parsing, and returns the
/// process exit status.
void register_commands(CLI::App& app, std::function<int()>& action);

} // namespace fragtail::cli
