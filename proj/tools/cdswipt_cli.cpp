// Experiment runner: writes one CSV per subcommand into the output directory.

#include "cdswipt/config_file.hpp"
#include "cdswipt/experiment.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace cdswipt;

namespace {

struct CommonFlags {
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::optional<int> threads;
};

void add_common(CLI::App* cmd, CommonFlags& f)
{
    cmd->add_option("--config", f.config, "key-value experiment config file")->check(CLI::ExistingFile);
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--seed", f.seed, "master seed");
    cmd->add_option("--trials", f.trials, "Monte-Carlo channel realizations")->check(CLI::PositiveNumber);
    cmd->add_option("--threads", f.threads, "worker threads")->check(CLI::PositiveNumber);
}

std::vector<Strategy> strategies(std::initializer_list<const char*> names)
{
    std::vector<Strategy> out;
    for (const char* n : names)
        out.push_back(parse_strategy(n));
    return out;
}

ExperimentConfig defaults_for(const std::string& command)
{
    ExperimentConfig cfg;
    if (command == "region") {
        cfg.sweep = SweepVariable::Rho;
        cfg.grid = parse_grid("0:0.1:1");
        cfg.strategies = strategies({"RAND", "MAX-EH", "IA", "BAL-ICD(0.1)", "BAL-ICD(0.8)", "BAL-CD(0.1)", "BAL-CD(0.8)"});
    } else if (command == "sweep") {
        cfg.sweep = SweepVariable::SnrDb;
        cfg.grid = parse_grid("0:4:40");
        cfg.strategies = strategies({"IA", "BAL-ICD(0.1)", "BAL-ICD(0.8)", "PQFB(8)", "PAFB(20)"});
    } else if (command == "ser") {
        cfg.sweep = SweepVariable::SnrDb;
        cfg.grid = parse_grid("0:5:30");
        cfg.strategies = strategies({"IA", "BAL-ICD(0.1)", "BAL-ICD(0.8)"});
    }
    return cfg;
}

ExperimentConfig resolve(const std::string& command, const CommonFlags& f)
{
    ExperimentConfig cfg = defaults_for(command);
    if (!f.config.empty())
        cfg = load_experiment_config(f.config, cfg);
    if (f.seed)
        cfg.seed = *f.seed;
    if (f.trials)
        cfg.trials = *f.trials;
    if (f.threads)
        cfg.threads = *f.threads;
    return cfg;
}

void save(const ResultTable& table, const fs::path& path)
{
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os)
        throw Error(Errc::IoError, "cannot write " + path.string());
    write_csv(table, os);
    if (!os)
        throw Error(Errc::IoError, "failed writing " + path.string());
    std::cout << "wrote " << path.string() << " (" << table.rows.size() << " rows)\n";
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Chordal-distance balanced precoding for SWIPT interference channels"};
    app.require_subcommand(1);

    CommonFlags region_f, sweep_f, converge_f, ser_f;
    CLI::App* region = app.add_subcommand("region", "rate-energy region over the rho grid");
    CLI::App* sweep = app.add_subcommand("sweep", "metrics over an snr_db, z, rho or bits grid");
    CLI::App* converge = app.add_subcommand("converge", "balanced-precoder objective per iteration");
    CLI::App* ser = app.add_subcommand("ser", "Monte-Carlo QPSK symbol error rate over SNR");
    add_common(region, region_f);
    add_common(sweep, sweep_f);
    add_common(converge, converge_f);
    add_common(ser, ser_f);

    CLI11_PARSE(app, argc, argv);

    try {
        auto run = [](const std::string& name, const CommonFlags& f) {
            const ExperimentConfig cfg = resolve(name, f);
            const fs::path out(f.out);
            fs::create_directories(out);
            if (name == "region") {
                save(run_region(cfg), out / "region.csv");
            } else if (name == "sweep") {
                const ResultTable table = run_sweep(cfg);
                save(table, out / "sweep.csv");
                if (cfg.sweep == SweepVariable::SnrDb)
                    save(sweep_slopes(cfg, table), out / "sweep_slopes.csv");
            } else if (name == "converge") {
                save(run_convergence_trace(cfg), out / "converge.csv");
            } else {
                save(run_ser(cfg), out / "ser.csv");
            }
        };
        if (region->parsed())
            run("region", region_f);
        else if (sweep->parsed())
            run("sweep", sweep_f);
        else if (converge->parsed())
            run("converge", converge_f);
        else
            run("ser", ser_f);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
