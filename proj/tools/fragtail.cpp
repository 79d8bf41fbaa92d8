#include "commands.hpp"

#include "fragtail/errors.hpp"

#include <iostream>

namespace {

using fragtail::cli::Json;

int fail(int code, const std::string& kind, const std::string& message, std::optional<double> achieved = {})
{
    Json err = {{"error", kind}, {"message", message}};
    if (achieved)
        err["achieved_error"] = *achieved;
    std::cerr << fragtail::cli::to_line(err) << std::endl;
    return code;
}

} // namespace

// Exit status: 0 success, 1 numerical or domain failure, 2 configuration error, 3 acceptance criteria failed.
int main(int argc, char** argv)
{
    CLI::App app{"Extinction-time tails of self-similar fragmentations"};
    std::function<int()> action;
    fragtail::cli::register_commands(app, action);
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(2, "ConfigError", e.what());
    }

    try {
        return action();
    } catch (const fragtail::NumericalFailure& e) {
        return fail(1, e.kind(), e.what(), e.achieved_error());
    } catch (const fragtail::ConfigError& e) {
        return fail(2, e.kind(), e.what());
    } catch (const fragtail::UnsupportedSampling& e) {
        return fail(2, e.kind(), e.what());
    } catch (const fragtail::Error& e) {
        // DomainError and the asymptotic refusals: the inputs are well formed but outside what can be computed.
        return fail(1, e.kind(), e.what());
    } catch (const std::exception& e) {
        return fail(1, "NumericalFailure", e.what());
    }
}
