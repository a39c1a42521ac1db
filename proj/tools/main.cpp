#include <iostream>

#include "common.hpp"

using namespace chronocal;

int main(int argc, char** argv) {
    CLI::App app{"chronocal: fact-duration prediction, misalignment-aware confidence adjustment and evaluation"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.set_config("--config", "", "TOML config file; [section] names a subcommand")->envname("CHRONOCAL_CONFIG");
    app.require_subcommand(1);

    cli::CommonOptions common;
    std::vector<cli::Subcommand> subs;
    cli::add_data_commands(app, common, subs);
    cli::add_duration_commands(app, common, subs);
    cli::add_calibration_commands(app, common, subs);
    cli::add_ensemble_commands(app, common, subs);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::kExitValidation;
    }

    for (const auto& sub : subs) {
        if (!sub.app->parsed()) continue;
        const std::string name = sub.app->get_name();
        try {
            sub.run(cli::make_context(*sub.app, common));
            return 0;
        } catch (const ValidationError& e) {
            std::cerr << "chronocal " << name << ": error: " << e.what() << "\n";
            return cli::kExitValidation;
        } catch (const json::exception& e) {
            std::cerr << "chronocal " << name << ": error: " << e.what() << "\n";
            return cli::kExitValidation;
        } catch (const ContractError& e) {
            std::cerr << "chronocal " << name << ": contract violation: " << e.what() << "\n";
            return cli::kExitContract;
        } catch (const std::exception& e) {
            std::cerr << "chronocal " << name << ": internal error: " << e.what() << "\n";
            return cli::kExitContract;
        }
    }
    return cli::kExitValidation;
}
