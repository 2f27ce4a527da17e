#include "cdswipt/experiment.hpp"

#include "cdswipt/feedback.hpp"
#include "cdswipt/grassmann.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <thread>

namespace cdswipt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_number(double v)
{
    if (std::isnan(v))
        return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// RFC 4180 quoting for fields that contain separators or quotes.
std::string csv_field(const std::string& v)
{
    if (v.find_first_of(",\"\n\r") == std::string::npos)
        return v;
    std::string out = "\"";
    for (char c : v) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

bool has_param(StrategyKind k)
{
    return k == StrategyKind::BalIcd || k == StrategyKind::BalCd || k == StrategyKind::Pqfb
        || k == StrategyKind::Pafb;
}

bool is_balanced(StrategyKind k) { return k == StrategyKind::BalIcd || k == StrategyKind::BalCd; }

} // namespace

std::string Strategy::label() const
{
    std::string name;
    switch (kind) {
    case StrategyKind::Rand: return "RAND";
    case StrategyKind::MaxEh: return "MAX-EH";
    case StrategyKind::IA: return "IA";
    case StrategyKind::BalIcd: name = "BAL-ICD"; break;
    case StrategyKind::BalCd: name = "BAL-CD"; break;
    case StrategyKind::Pqfb: name = "PQFB"; break;
    case StrategyKind::Pafb: name = "PAFB"; break;
    }
    return name + "(" + format_number(param) + ")";
}

Strategy parse_strategy(std::string_view text)
{
    auto bad = [&] { return Error(Errc::InvalidConfig, "unknown strategy '" + std::string(text) + "'"); };
    std::string_view name = text;
    std::optional<double> param;
    if (const auto open = text.find('('); open != std::string_view::npos) {
        if (text.back() != ')')
            throw bad();
        name = text.substr(0, open);
        const std::string_view arg = text.substr(open + 1, text.size() - open - 2);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), v);
        if (ec != std::errc() || ptr != arg.data() + arg.size())
            throw bad();
        param = v;
    }

    static const std::map<std::string_view, StrategyKind> names{
        {"RAND", StrategyKind::Rand},     {"MAX-EH", StrategyKind::MaxEh}, {"IA", StrategyKind::IA},
        {"BAL-ICD", StrategyKind::BalIcd}, {"BAL-CD", StrategyKind::BalCd}, {"PQFB", StrategyKind::Pqfb},
        {"PAFB", StrategyKind::Pafb}};
    const auto it = names.find(name);
    if (it == names.end())
        throw bad();
    Strategy s{it->second, 0.0};
    if (has_param(s.kind) != param.has_value())
        throw bad();
    if (param)
        s.param = *param;
    if (is_balanced(s.kind) && s.param < 0.0)
        throw Error(Errc::InvalidConfig, "balanced strategies need z >= 0");
    if (s.kind == StrategyKind::Pqfb && (s.param < 0 || s.param > kMaxCodebookBits || s.param != std::floor(s.param)))
        throw Error(Errc::InvalidConfig, "PQFB needs an integer bit count in [0, 16]");
    return s;
}

SweepVariable parse_sweep_variable(std::string_view text)
{
    if (text == "snr_db")
        return SweepVariable::SnrDb;
    if (text == "z")
        return SweepVariable::Z;
    if (text == "rho")
        return SweepVariable::Rho;
    if (text == "bits")
        return SweepVariable::Bits;
    throw Error(Errc::InvalidConfig, "unknown sweep variable '" + std::string(text) + "'");
}

std::string_view to_string(SweepVariable v)
{
    switch (v) {
    case SweepVariable::SnrDb: return "snr_db";
    case SweepVariable::Z: return "z";
    case SweepVariable::Rho: return "rho";
    case SweepVariable::Bits: return "bits";
    }
    return "?";
}

std::string SystemShape::label() const
{
    return "(" + std::to_string(M) + "x" + std::to_string(N) + "," + std::to_string(d) + ")^" + std::to_string(K);
}

SystemConfig make_system(const ExperimentConfig& cfg, const SystemShape& shape, double snr_db, double rho)
{
    return SystemConfig::symmetric(shape.M, shape.N, shape.d, shape.K, cfg.sigma2 * std::pow(10.0, snr_db / 10.0),
                                   rho, cfg.sigma2, cfg.delta2, cfg.zeta);
}

void validate(const ExperimentConfig& cfg)
{
    auto fail = [](const std::string& what) { throw Error(Errc::InvalidConfig, what); };
    if (cfg.systems.empty())
        fail("no systems configured");
    if (cfg.trials < 1)
        fail("trials must be at least 1");
    if (cfg.threads < 1)
        fail("threads must be at least 1");
    if (cfg.ia.max_iters < 0 || cfg.balanced.max_iters < 0)
        fail("iteration caps must be non-negative");
    if (cfg.solver != "leakage" && cfg.solver != "mmse" && cfg.solver != "subspace3")
        fail("unknown IA solver '" + cfg.solver + "'");
    for (std::size_t i = 1; i < cfg.grid.size(); ++i) {
        const double step = cfg.grid[i] - cfg.grid[i - 1];
        const double first = cfg.grid[1] - cfg.grid[0];
        if (step == 0.0 || (step > 0.0) != (first > 0.0))
            fail("sweep grid must be strictly monotone");
    }
    for (double v : cfg.grid) {
        if (!std::isfinite(v))
            fail("sweep grid values must be finite");
        if (cfg.sweep == SweepVariable::Rho && !(v >= 0.0 && v <= 1.0))
            fail("rho grid must lie in [0, 1]");
        if (cfg.sweep == SweepVariable::Z && v < 0.0)
            fail("z grid must be non-negative");
        if (cfg.sweep == SweepVariable::Bits && (v < 0.0 || v > kMaxCodebookBits || v != std::floor(v)))
            fail("bits grid must hold integers in [0, 16]");
    }
    for (const auto& shape : cfg.systems) {
        SystemConfig sys = make_system(cfg, shape, cfg.snr_db, cfg.rho);
        validate(sys);
        if (!check_feasible(sys))
            fail("system " + shape.label() + " is not feasible");
        if (cfg.solver == "subspace3" && (shape.K != 3 || shape.M != shape.N))
            fail("subspace3 solver needs K = 3 and M = N");
    }
}

double pairwise_sum(const double* x, std::size_t n)
{
    if (n <= 8) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            acc += x[i];
        return acc;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

void write_csv(const ResultTable& table, std::ostream& os)
{
    for (std::size_t i = 0; i < table.header.size(); ++i)
        os << (i ? "," : "") << csv_field(table.header[i]);
    os << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i)
                os << ',';
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, double>)
                        os << format_number(v);
                    else if constexpr (std::is_same_v<T, std::string>)
                        os << csv_field(v);
                    else
                        os << v;
                },
                row[i]);
        }
        os << '\n';
    }
}

namespace {

struct MeanSe {
    double mean = kNaN;
    double se = kNaN;
};

MeanSe mean_se(const std::vector<double>& x)
{
    std::vector<double> v;
    v.reserve(x.size());
    for (double e : x)
        if (!std::isnan(e))
            v.push_back(e);
    if (v.empty())
        return {};
    const double n = static_cast<double>(v.size());
    const double mean = pairwise_sum(v.data(), v.size()) / n;
    if (v.size() == 1)
        return {mean, 0.0};
    std::vector<double> dev(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        dev[i] = (v[i] - mean) * (v[i] - mean);
    return {mean, std::sqrt(pairwise_sum(dev.data(), dev.size()) / (n - 1.0) / n)};
}

// Runs fn(t) for t in [0, n) on `threads` workers; results must be written
// to per-t slots so the outcome does not depend on scheduling.
template <typename Fn>
void parallel_trials(int n, int threads, Fn fn)
{
    const int workers = std::max(1, std::min(threads, n));
    if (workers == 1) {
        for (int t = 0; t < n; ++t)
            fn(t);
        return;
    }
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (int t = w; t < n; t += workers) {
                try {
                    fn(t);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!first_error)
                        first_error = std::current_exception();
                    return;
                }
            }
        });
    for (auto& th : pool)
        th.join();
    if (first_error)
        std::rethrow_exception(first_error);
}

std::uint64_t trial_seed(const ExperimentConfig& cfg, std::size_t system, int trial)
{
    return Rng::derive(Rng::derive(cfg.seed, system), static_cast<std::uint64_t>(trial));
}

// Seed streams inside one trial.
enum Stream : std::uint64_t { kChannels = 0, kIaStart = 1, kAnalog = 2, kRandom = 3, kSer = 4 };

using CodebookMap = std::map<int, Codebook>;

CodebookMap build_codebooks(const ExperimentConfig& cfg, const SystemShape& shape, std::size_t system,
                            const std::vector<Strategy>& strategies)
{
    CodebookMap books;
    std::vector<int> bits;
    for (const auto& s : strategies)
        if (s.kind == StrategyKind::Pqfb)
            bits.push_back(static_cast<int>(s.param));
    if (cfg.sweep == SweepVariable::Bits)
        for (double b : cfg.grid)
            bits.push_back(static_cast<int>(b));
    const std::uint64_t base = Rng::derive(Rng::derive(cfg.seed, system), 0xC0DEB00Cull);
    for (int b : bits)
        if (!books.count(b))
            books.emplace(b, build_codebook(shape.M, shape.d, b, Rng::derive(base, static_cast<std::uint64_t>(b))));
    return books;
}

struct Link {
    PrecoderSet v;
    DecoderSet u;
};

bool has_eh_branch(const SystemConfig& sys)
{
    for (int k = 0; k < sys.K; ++k)
        if (sys.rho_bar(k) > 0.0)
            return true;
    return false;
}

// One channel realization and IA solution shared by every strategy.
struct TrialState {
    SystemConfig sys;
    ChannelSet ch;
    IASolution ia;
    std::optional<MaxEHResult> eh;
    std::uint64_t seed = 0;
    double snr_db = 0.0;
    double rho = 0.0;
};

Link apply_strategy(const ExperimentConfig& cfg, const TrialState& st, const Strategy& s, const CodebookMap& books)
{
    const SystemConfig& sys = st.sys;
    const std::vector<double> z(static_cast<std::size_t>(sys.K), s.param);
    switch (s.kind) {
    case StrategyKind::IA:
        return {st.ia.precoders, st.ia.decoders};
    case StrategyKind::Rand: {
        Rng rng(Rng::derive(st.seed, kRandom));
        PrecoderSet v;
        for (int j = 0; j < sys.K; ++j)
            v.push_back(sample_grassmann(sys.M, sys.d, rng));
        return {v, mmse_decoders(sys, st.ch, v)};
    }
    case StrategyKind::MaxEh: {
        // Without a harvesting branch every precoder is energy-optimal.
        const PrecoderSet& v = st.eh ? st.eh->precoders : st.ia.precoders;
        return {v, mmse_decoders(sys, st.ch, v)};
    }
    case StrategyKind::BalIcd:
        if (!st.eh)
            return {st.ia.precoders, st.ia.decoders};
        return {balanced_precoders_iterative(sys, st.ch, st.ia.precoders, *st.eh, z, cfg.balanced).precoders,
                st.ia.decoders};
    case StrategyKind::BalCd:
        if (!st.eh)
            return {st.ia.precoders, st.ia.decoders};
        return {balanced_precoders_noniterative(sys, st.ch, st.ia.precoders, *st.eh, z).precoders, st.ia.decoders};
    case StrategyKind::Pqfb: {
        const auto v = quantized_feedback(st.ia.precoders, books.at(static_cast<int>(s.param))).precoders;
        return {v, mmse_decoders(sys, st.ch, v)};
    }
    case StrategyKind::Pafb: {
        const auto v = analog_feedback(st.ia.precoders, s.param, Rng::derive(st.seed, kAnalog)).precoders;
        return {v, mmse_decoders(sys, st.ch, v)};
    }
    }
    throw Error(Errc::InvalidArgument, "unhandled strategy");
}

Strategy effective_strategy(const ExperimentConfig& cfg, Strategy s, double value)
{
    if (cfg.sweep == SweepVariable::Z && is_balanced(s.kind))
        s.param = value;
    if (cfg.sweep == SweepVariable::Bits && s.kind == StrategyKind::Pqfb)
        s.param = value;
    return s;
}

std::pair<double, double> point_of(const ExperimentConfig& cfg, double value)
{
    double snr = cfg.snr_db;
    double rho = cfg.rho;
    if (cfg.sweep == SweepVariable::SnrDb)
        snr = value;
    if (cfg.sweep == SweepVariable::Rho)
        rho = value;
    return {snr, rho};
}

void refresh_trial(const ExperimentConfig& cfg, TrialState& st, const SystemShape& shape, double snr, double rho,
                   bool first)
{
    st.sys = make_system(cfg, shape, snr, rho);
    // Only the MMSE solver depends on power and splitting. Along the grid it
    // restarts from the previous point's solution.
    if (first)
        st.ia = solve_ia(cfg.solver, st.sys, st.ch, Rng::derive(st.seed, kIaStart), cfg.ia);
    else if (cfg.solver == "mmse" && (snr != st.snr_db || rho != st.rho))
        st.ia = solve_mmse(st.sys, st.ch, st.ia.precoders, cfg.ia);
    st.snr_db = snr;
    st.rho = rho;
    st.eh.reset();
    if (has_eh_branch(st.sys))
        st.eh = max_eh_precoders(st.sys, st.ch);
}

double mean_distance(const PrecoderSet& a, const PrecoderSet& b)
{
    std::vector<double> z;
    for (std::size_t j = 0; j < a.size(); ++j)
        z.push_back(chordal_distance_sq(a[j], b[j]));
    return pairwise_sum(z.data(), z.size()) / static_cast<double>(z.size());
}

std::vector<double> distances(const PrecoderSet& a, const PrecoderSet& b)
{
    std::vector<double> z;
    for (std::size_t j = 0; j < a.size(); ++j)
        z.push_back(chordal_distance_sq(a[j], b[j]));
    return z;
}

bool decodes(const SystemConfig& sys)
{
    for (int k = 0; k < sys.K; ++k)
        if (!(sys.rho.at(k) > 0.0))
            return false;
    return true;
}

} // namespace

ResultTable run_sweep(const ExperimentConfig& cfg)
{
    validate(cfg);
    if (cfg.grid.empty())
        throw Error(Errc::InvalidConfig, "sweep grid is empty");
    if (cfg.strategies.empty())
        throw Error(Errc::InvalidConfig, "no strategies configured");

    ResultTable table;
    table.header = {"system",         "sweep",       "value",         "strategy",    "z_target",
                    "trials",         "seed",        "sum_rate_mean", "sum_rate_se", "energy_mean",
                    "energy_se",      "realized_z_mean", "realized_z_se", "rlub_mean", "snr_db",
                    "rho"};

    const std::size_t G = cfg.grid.size();
    const std::size_t S = cfg.strategies.size();
    const auto T = static_cast<std::size_t>(cfg.trials);

    for (std::size_t sysi = 0; sysi < cfg.systems.size(); ++sysi) {
        const SystemShape& shape = cfg.systems[sysi];
        const CodebookMap books = build_codebooks(cfg, shape, sysi, cfg.strategies);
        // [grid][strategy][trial]
        auto slots = [&] {
            return std::vector<std::vector<std::vector<double>>>(G, std::vector<std::vector<double>>(S, std::vector<double>(T)));
        };
        auto rate = slots(), energy = slots(), zr = slots(), rlub = slots();

        parallel_trials(cfg.trials, cfg.threads, [&](int t) {
            TrialState st;
            st.seed = trial_seed(cfg, sysi, t);
            const SystemConfig probe = make_system(cfg, shape, cfg.snr_db, cfg.rho);
            st.ch = realize_channels(probe, Rng::derive(st.seed, kChannels));
            for (std::size_t g = 0; g < G; ++g) {
                const auto [snr, rho] = point_of(cfg, cfg.grid[g]);
                refresh_trial(cfg, st, shape, snr, rho, g == 0);
                for (std::size_t s = 0; s < S; ++s) {
                    const Strategy strat = effective_strategy(cfg, cfg.strategies[s], cfg.grid[g]);
                    const Link link = apply_strategy(cfg, st, strat, books);
                    const auto z = distances(link.v, st.ia.precoders);
                    energy[g][s][t] = total_energy(st.sys, st.ch, link.v, cfg.energy_mode);
                    zr[g][s][t] = pairwise_sum(z.data(), z.size()) / static_cast<double>(z.size());
                    if (decodes(st.sys)) {
                        rate[g][s][t] = sum_rate(st.sys, st.ch, link.v, link.u);
                        const auto b = rate_loss_bound(st.sys, z, st.sys.P[0]);
                        rlub[g][s][t] = pairwise_sum(b.data(), b.size());
                    } else {
                        rate[g][s][t] = kNaN;
                        rlub[g][s][t] = kNaN;
                    }
                }
            }
        });

        for (std::size_t g = 0; g < G; ++g) {
            const auto [snr, rho] = point_of(cfg, cfg.grid[g]);
            for (std::size_t s = 0; s < S; ++s) {
                const Strategy strat = effective_strategy(cfg, cfg.strategies[s], cfg.grid[g]);
                const MeanSe r = mean_se(rate[g][s]);
                const MeanSe e = mean_se(energy[g][s]);
                const MeanSe z = mean_se(zr[g][s]);
                const MeanSe b = mean_se(rlub[g][s]);
                table.rows.push_back({shape.label(), std::string(to_string(cfg.sweep)), cfg.grid[g], strat.label(),
                                      is_balanced(strat.kind) ? strat.param : kNaN,
                                      static_cast<std::int64_t>(cfg.trials), std::to_string(cfg.seed), r.mean,
                                      r.se, e.mean, e.se, z.mean, z.se, b.mean, snr, rho});
            }
        }
    }
    return table;
}

ResultTable run_region(const ExperimentConfig& cfg)
{
    ExperimentConfig region = cfg;
    region.sweep = SweepVariable::Rho;
    return run_sweep(region);
}

ResultTable sweep_slopes(const ExperimentConfig& cfg, const ResultTable& sweep)
{
    auto column = [&](std::string_view name) {
        const auto it = std::find(sweep.header.begin(), sweep.header.end(), name);
        if (it == sweep.header.end())
            throw Error(Errc::InvalidArgument, "sweep table lacks column " + std::string(name));
        return static_cast<std::size_t>(it - sweep.header.begin());
    };
    const std::size_t c_sys = column("system"), c_strat = column("strategy"), c_val = column("value"),
                      c_rate = column("sum_rate_mean");

    ResultTable out;
    out.header = {"system", "strategy", "slope_bits_per_octave", "from_snr_db", "to_snr_db", "points", "seed"};
    if (cfg.sweep != SweepVariable::SnrDb || cfg.grid.empty())
        return out;
    const double top = *std::max_element(cfg.grid.begin(), cfg.grid.end());
    const double from = top - cfg.slope_window_db;

    std::vector<std::pair<std::string, std::string>> keys;
    for (const auto& row : sweep.rows) {
        std::pair key{std::get<std::string>(row[c_sys]), std::get<std::string>(row[c_strat])};
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            keys.push_back(key);
    }
    for (const auto& key : keys) {
        std::vector<double> xs, ys;
        for (const auto& row : sweep.rows) {
            if (std::get<std::string>(row[c_sys]) != key.first || std::get<std::string>(row[c_strat]) != key.second)
                continue;
            const double snr = std::get<double>(row[c_val]);
            const double rate = std::get<double>(row[c_rate]);
            if (snr >= from - 1e-12 && !std::isnan(rate)) {
                xs.push_back(snr / 10.0 * std::log2(10.0));
                ys.push_back(rate);
            }
        }
        double slope = kNaN;
        if (xs.size() >= 2) {
            const double n = static_cast<double>(xs.size());
            const double mx = pairwise_sum(xs.data(), xs.size()) / n;
            const double my = pairwise_sum(ys.data(), ys.size()) / n;
            double sxy = 0.0, sxx = 0.0;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                sxy += (xs[i] - mx) * (ys[i] - my);
                sxx += (xs[i] - mx) * (xs[i] - mx);
            }
            slope = sxy / sxx;
        }
        out.rows.push_back({key.first, key.second, slope, from, top, static_cast<std::int64_t>(xs.size()),
                            std::to_string(cfg.seed)});
    }
    return out;
}

ResultTable run_convergence_trace(const ExperimentConfig& cfg)
{
    validate(cfg);
    if (cfg.z_list.empty())
        throw Error(Errc::InvalidConfig, "z_list is empty");
    ResultTable table;
    table.header = {"system", "z", "iteration", "objective_mean", "objective_se", "realized_z_mean",
                    "converged_fraction", "trials", "seed"};
    const auto T = static_cast<std::size_t>(cfg.trials);
    const auto L = static_cast<std::size_t>(cfg.balanced.max_iters) + 1;

    for (std::size_t sysi = 0; sysi < cfg.systems.size(); ++sysi) {
        const SystemShape& shape = cfg.systems[sysi];
        const std::size_t Z = cfg.z_list.size();
        // [z][iteration][trial]
        std::vector<std::vector<std::vector<double>>> obj(Z, std::vector<std::vector<double>>(L, std::vector<double>(T)));
        std::vector<std::vector<double>> zr(Z, std::vector<double>(T)), conv(Z, std::vector<double>(T));

        parallel_trials(cfg.trials, cfg.threads, [&](int t) {
            TrialState st;
            st.seed = trial_seed(cfg, sysi, t);
            st.sys = make_system(cfg, shape, cfg.snr_db, cfg.rho);
            st.ch = realize_channels(st.sys, Rng::derive(st.seed, kChannels));
            refresh_trial(cfg, st, shape, cfg.snr_db, cfg.rho, true);
            if (!st.eh)
                throw Error(Errc::AllPowerToID, "convergence traces need a harvesting branch");
            for (std::size_t zi = 0; zi < Z; ++zi) {
                const std::vector<double> z(static_cast<std::size_t>(shape.K), cfg.z_list[zi]);
                const BalancedResult b = balanced_precoders_iterative(st.sys, st.ch, st.ia.precoders, *st.eh, z, cfg.balanced);
                for (std::size_t i = 0; i < L; ++i) {
                    double acc = 0.0;
                    for (const auto& trace : b.objective_trace)
                        acc += trace[std::min(i, trace.size() - 1)];
                    obj[zi][i][t] = acc;
                }
                zr[zi][t] = pairwise_sum(b.per_user_z.data(), b.per_user_z.size()) / shape.K;
                conv[zi][t] = std::all_of(b.converged.begin(), b.converged.end(), [](bool c) { return c; }) ? 1.0 : 0.0;
            }
        });

        for (std::size_t zi = 0; zi < Z; ++zi) {
            const MeanSe zm = mean_se(zr[zi]);
            const MeanSe cm = mean_se(conv[zi]);
            for (std::size_t i = 0; i < L; ++i) {
                const MeanSe o = mean_se(obj[zi][i]);
                table.rows.push_back({shape.label(), cfg.z_list[zi], static_cast<std::int64_t>(i), o.mean, o.se, zm.mean,
                                      cm.mean, static_cast<std::int64_t>(cfg.trials), std::to_string(cfg.seed)});
            }
        }
    }
    return table;
}

ResultTable run_ser(const ExperimentConfig& base)
{
    ExperimentConfig cfg = base;
    cfg.sweep = SweepVariable::SnrDb;
    validate(cfg);
    if (cfg.grid.empty())
        throw Error(Errc::InvalidConfig, "SNR grid is empty");
    if (cfg.strategies.empty())
        throw Error(Errc::InvalidConfig, "no strategies configured");
    if (!(cfg.rho > 0.0))
        throw Error(Errc::InvalidConfig, "SER needs rho > 0");

    ResultTable table;
    table.header = {"system", "snr_db", "strategy", "trials", "seed", "ser", "ser_se", "errors", "symbols",
                    "realized_z_mean", "rho"};
    const std::size_t G = cfg.grid.size();
    const std::size_t S = cfg.strategies.size();
    const auto T = static_cast<std::size_t>(cfg.trials);

    for (std::size_t sysi = 0; sysi < cfg.systems.size(); ++sysi) {
        const SystemShape& shape = cfg.systems[sysi];
        const CodebookMap books = build_codebooks(cfg, shape, sysi, cfg.strategies);
        std::vector<std::vector<std::vector<double>>> ser(G, std::vector<std::vector<double>>(S, std::vector<double>(T)));
        auto zr = ser;
        std::vector<std::vector<std::vector<std::uint64_t>>> errors(
            G, std::vector<std::vector<std::uint64_t>>(S, std::vector<std::uint64_t>(T)));
        auto symbols = errors;

        parallel_trials(cfg.trials, cfg.threads, [&](int t) {
            TrialState st;
            st.seed = trial_seed(cfg, sysi, t);
            const SystemConfig probe = make_system(cfg, shape, cfg.snr_db, cfg.rho);
            st.ch = realize_channels(probe, Rng::derive(st.seed, kChannels));
            for (std::size_t g = 0; g < G; ++g) {
                refresh_trial(cfg, st, shape, cfg.grid[g], cfg.rho, g == 0);
                for (std::size_t s = 0; s < S; ++s) {
                    const Link link = apply_strategy(cfg, st, cfg.strategies[s], books);
                    const std::uint64_t seed = Rng::derive(Rng::derive(st.seed, kSer), g * S + s);
                    const SerResult r = ser_qpsk(st.sys, st.ch, link.v, link.u, cfg.grid[g], cfg.ser_channel_uses, seed);
                    ser[g][s][t] = r.ser();
                    errors[g][s][t] = r.errors;
                    symbols[g][s][t] = r.symbols;
                    zr[g][s][t] = mean_distance(link.v, st.ia.precoders);
                }
            }
        });

        for (std::size_t g = 0; g < G; ++g)
            for (std::size_t s = 0; s < S; ++s) {
                std::uint64_t e = 0, n = 0;
                for (std::size_t t = 0; t < T; ++t) {
                    e += errors[g][s][t];
                    n += symbols[g][s][t];
                }
                const MeanSe m = mean_se(ser[g][s]);
                table.rows.push_back({shape.label(), cfg.grid[g], cfg.strategies[s].label(),
                                      static_cast<std::int64_t>(cfg.trials), std::to_string(cfg.seed),
                                      n ? static_cast<double>(e) / static_cast<double>(n) : 0.0, m.se,
                                      static_cast<std::int64_t>(e), static_cast<std::int64_t>(n), mean_se(zr[g][s]).mean,
                                      cfg.rho});
            }
    }
    return table;
}

} // namespace cdswipt
