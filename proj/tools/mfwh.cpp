// mfwh <config> [--mode M] [--out DIR]

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mfwh/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Multi-frequency WaveHoltz Helmholtz solver"};
    std::string config_path;
    std::string mode;
    std::string out;
    app.add_option("config", config_path, "INI run configuration")->required();
    app.add_option("--mode", mode, "fpi | gmres | direct | analyze | verify (overrides run.mode)");
    app.add_option("--out", out, "output directory (overrides output.directory)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        mfwh::RunOverrides ov;
        if (!mode.empty()) ov.mode = mfwh::parse_run_mode(mode, "--mode");
        if (!out.empty()) ov.output_directory = out;
        return mfwh::run(mfwh::load_run_config(config_path), ov);
    } catch (const std::exception& e) {
        std::cerr << "mfwh: error: " << e.what() << '\n';
        return 1;
    }
}
