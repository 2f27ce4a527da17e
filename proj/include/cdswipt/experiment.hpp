#pragma once

#include "cdswipt/metrics.hpp"
#include "cdswipt/swipt.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cdswipt {

enum class StrategyKind { Rand, MaxEh, IA, BalIcd, BalCd, Pqfb, Pafb };

struct Strategy {
    StrategyKind kind = StrategyKind::IA;
    double param = 0.0; // z for BAL-*, bits for PQFB, feedback SNR [dB] for PAFB

    [[nodiscard]] std::string label() const;
};

/// Accepts RAND, MAX-EH, IA, BAL-ICD(z), BAL-CD(z), PQFB(bits), PAFB(snr_db).
Strategy parse_strategy(std::string_view text);

enum class SweepVariable { SnrDb, Z, Rho, Bits };

SweepVariable parse_sweep_variable(std::string_view text);
std::string_view to_string(SweepVariable v);

struct SystemShape {
    int M = 5;
    int N = 5;
    int d = 2;
    int K = 3;

    [[nodiscard]] std::string label() const; // "(5x5,2)^3"
};

struct ExperimentConfig {
    std::vector<SystemShape> systems{{4, 4, 2, 3}, {5, 5, 2, 3}};
    double sigma2 = 1.0;
    double delta2 = 0.1;
    double rho = 0.5;
    double zeta = 0.5;
    double snr_db = 25.0; // SNR = P/σ² when not swept

    std::string solver = "mmse";
    SolverOptions ia;
    BalancedOptions balanced;

    std::vector<Strategy> strategies;
    SweepVariable sweep = SweepVariable::SnrDb;
    std::vector<double> grid;

    int trials = 100;
    std::uint64_t seed = 1;
    int threads = 1;

    double slope_window_db = 12.0;
    std::uint64_t ser_channel_uses = 10000;
    EnergyMode energy_mode = EnergyMode::Approximate;
    std::vector<double> z_list{0.1, 0.8}; // convergence traces
};

/// Throws InvalidConfig on an empty or non-monotone grid, trials < 1, and so on.
void validate(const ExperimentConfig& cfg);

/// System parameters of one grid point.
SystemConfig make_system(const ExperimentConfig& cfg, const SystemShape& shape, double snr_db, double rho);

using Cell = std::variant<std::string, double, std::int64_t>;

struct ResultTable {
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;
};

/// Header line plus one line per row; doubles with 12 significant digits.
void write_csv(const ResultTable& table, std::ostream& os);

/// Trial-averaged metrics for every (system, grid value, strategy).
ResultTable run_sweep(const ExperimentConfig& cfg);

/// run_sweep over the ρ grid.
ResultTable run_region(const ExperimentConfig& cfg);

/// Least-squares slope of the mean sum rate against log₂(SNR) over grid
/// points within `slope_window_db` of the top of an SNR sweep.
ResultTable sweep_slopes(const ExperimentConfig& cfg, const ResultTable& sweep);

/// Mean balanced-precoder objective Σ_j ‖H̃_j V_j‖²_F per iteration.
ResultTable run_convergence_trace(const ExperimentConfig& cfg);

/// Monte-Carlo QPSK SER per (system, SNR, strategy).
ResultTable run_ser(const ExperimentConfig& cfg);

/// Order-fixed pairwise summation.
double pairwise_sum(const double* x, std::size_t n);

} // namespace cdswipt
