// wgspec: effective 1D spectral models for thin bent/twisted waveguides
// with heterogeneous cross sections.
//
// Usage: wgspec <mode> --config <path> [--out <dir>] [--eigenpairs N]
//        [--scales a,b,c]
// Modes: homogenize | effective | localize | verify | oracle
// Exit:  0 ok, 2 config error, 3 solver error, 4 resource guard.

#include "wgspec/errors.hpp"
#include "wgspec/run.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

int fail_json(const std::string& module_tag, const std::string& message, int code) {
    nlohmann::json j;
    j["error"] = {{"module", module_tag}, {"message", message}, {"exit_code", code}};
    std::cout << j.dump(2) << std::endl;
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"effective spectral models for thin heterogeneous waveguides"};
    app.require_subcommand(1);

    std::string config_path, out_dir, scales_csv;
    int eigenpairs = -1;

    const std::vector<std::string> modes{"homogenize", "effective", "localize", "verify",
                                         "oracle"};
    std::string selected;
    for (const auto& m : modes) {
        CLI::App* sub = app.add_subcommand(m);
        sub->add_option("--config", config_path, "TOML configuration file")->required();
        sub->add_option("--out", out_dir, "output directory (overrides the config)");
        sub->add_option("--eigenpairs", eigenpairs, "number of eigenpairs (overrides the config)");
        sub->add_option("--scales", scales_csv, "comma-separated scale list (overrides)");
        sub->callback([&selected, m]() { selected = m; });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        std::ifstream in(config_path);
        if (!in)
            throw wgspec::ConfigError("cli", "cannot open config file '" + config_path + "'");
        std::stringstream buf;
        buf << in.rdbuf();

        wgspec::RunConfig config = wgspec::parse_config(buf.str(), selected);
        if (!out_dir.empty()) config.directory = out_dir;
        if (eigenpairs > 0) config.eigenpairs = eigenpairs;
        if (!scales_csv.empty()) {
            config.scales.clear();
            std::stringstream ss(scales_csv);
            std::string tok;
            while (std::getline(ss, tok, ','))
                config.scales.push_back(std::stod(tok));
        }

        const wgspec::RunResult result = wgspec::run(config);
        std::cout << result.summary << "\n";
        for (const auto& f : result.files_written) std::cout << "wrote " << f << "\n";
        return 0;
    } catch (const wgspec::ConfigError& e) {
        return fail_json(e.module_tag(), e.what(), 2);
    } catch (const wgspec::ResourceError& e) {
        return fail_json(e.module_tag(), e.what(), 4);
    } catch (const wgspec::SolverError& e) {
        return fail_json(e.module_tag(), e.what(), 3);
    } catch (const std::exception& e) {
        return fail_json("cli", e.what(), 3);
    }
}
