#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "swm/acceptance.hpp"
#include "swm/config.hpp"
#include "swm/optic.hpp"
#include "swm/sweep.hpp"
#include "swm/version.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::string& mode_override,
            long long seed_override, const std::string& out_override)
{
    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
        throw swm::IoError("cannot open config file: " + config_path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();

    swm::RunConfig cfg = swm::parse_config(ss.str());
    if (mode_override == "exact") {
        cfg.mode = swm::RunMode::Exact;
    } else if (mode_override == "sampled") {
        cfg.mode = swm::RunMode::Sampled;
        if (cfg.shots < 10000 || cfg.resamples < 100) {
            throw swm::ValidationError("sampled mode needs shots >= 10^4 and resamples >= 100");
        }
    } else if (!mode_override.empty()) {
        throw swm::ValidationError("--mode must be exact or sampled");
    }
    if (seed_override >= 0) {
        cfg.seed = static_cast<std::uint64_t>(seed_override);
    }
    if (!out_override.empty()) {
        cfg.output_path = out_override;
    }

    swm::SweepResult result = swm::run_sweep(cfg);
    swm::write_output(cfg, result, cfg.output_path);

    int flagged = 0;
    for (const swm::SweepRow& row : result.rows) {
        if (!row.flags.empty()) {
            flagged++;
        }
    }
    std::cout << "wrote " << result.rows.size() << " rows (" << flagged << " flagged) to "
              << cfg.output_path << "\n";
    return 0;
}

int cmd_verify_optics(const std::string& export_dir)
{
    const double deg = M_PI / 180.0;
    struct Case {
        swm::PauliObservable obs;
        const char* name;
        const char* slug;
    };
    std::vector<Case> observables = {{swm::sigma_phi(0.0), "sigma_phi(0)=sz", "phi0"},
                                     {swm::sigma_phi(M_PI / 8.0), "sigma_phi(pi/8)", "phi22.5"},
                                     {swm::sigma_phi(M_PI / 4.0), "sigma_phi(pi/4)=sx", "phi45"},
                                     {swm::sigma_phi(M_PI / 3.0), "sigma_phi(pi/3)", "phi60"},
                                     {swm::sigma_y(), "sy", "sy"}};
    std::vector<double> gammas = {0.0, 10.0 * deg, 25.0 * deg, 30.0 * deg};
    std::vector<std::pair<swm::PointerSetting, const char*>> settings = {
        {swm::PointerSetting::Plus, "Plus"}, {swm::PointerSetting::Circular, "Circular"}};

    int failures = 0;
    for (const Case& c : observables) {
        for (double g : gammas) {
            for (auto [s, sname] : settings) {
                swm::CircuitModule cm = swm::compile_module(c.obs, g, s);
                double dev = swm::verify_module(cm, c.obs, g);
                bool ok = dev < swm::kOpticVerifyTol;
                if (!ok) {
                    failures++;
                }
                std::printf("%-5s %-17s gamma=%5.1f deg  %-8s dev=%.3e\n",
                            ok ? "PASS" : "FAIL", c.name, g / deg, sname, dev);
                if (!export_dir.empty()) {
                    char name[128];
                    std::snprintf(name, sizeof(name), "%s/%s_g%.0f_%s.txt",
                                  export_dir.c_str(), c.slug, g / deg, sname);
                    std::ofstream out(name, std::ios::binary);
                    if (!out) {
                        throw swm::IoError(std::string("cannot write ") + name);
                    }
                    out << swm::export_circuit(cm);
                }
            }
        }
    }
    std::cout << (failures == 0 ? "verify-optics: all modules verified\n"
                                : "verify-optics: FAILURES present\n");
    return failures == 0 ? 0 : 3;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Sequential weak measurement simulator and analysis toolkit"};
    app.set_version_flag("--version", swm::kVersion);
    app.require_subcommand(1);

    std::string config_path, mode_override, out_override;
    long long seed_override = -1;
    CLI::App* run = app.add_subcommand("run", "run an experiment config");
    run->add_option("config", config_path, "JSON config file")->required();
    run->add_option("--mode", mode_override, "override mode: exact|sampled");
    run->add_option("--seed", seed_override, "override RNG seed");
    run->add_option("--out", out_override, "override output path");

    std::string grid = "default";
    std::string export_dir;
    CLI::App* verify = app.add_subcommand("verify-optics", "verify compiled optical modules");
    verify->add_option("--grid", grid, "verification grid (default)");
    verify->add_option("--export-dir", export_dir, "write each compiled circuit as text here");

    CLI::App* selftest = app.add_subcommand("selftest", "run the acceptance suite");

    try {
        app.parse(argc, argv);
        if (run->parsed()) {
            return cmd_run(config_path, mode_override, seed_override, out_override);
        }
        if (verify->parsed()) {
            if (grid != "default") {
                throw swm::ValidationError("only --grid default is available");
            }
            return cmd_verify_optics(export_dir);
        }
        if (selftest->parsed()) {
            return swm::run_acceptance(std::cout) == 0 ? 0 : 3;
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const swm::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const swm::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
