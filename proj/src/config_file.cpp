#include "cdswipt/config_file.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <optional>
#include <sstream>

namespace cdswipt {

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& text)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == ',' || c == ' ' || c == '\t') {
            if (!cur.empty())
                out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty())
        out.push_back(cur);
    return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value)
{
    throw Error(Errc::InvalidConfig, "bad value '" + value + "' for key " + key);
}

double to_double(const std::string& key, const std::string& text)
{
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v))
        bad_value(key, text);
    return v;
}

long long to_int(const std::string& key, const std::string& text)
{
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        bad_value(key, text);
    return v;
}

SystemShape parse_shape(const std::string& key, const std::string& text)
{
    int parts[4];
    std::size_t pos = 0;
    for (int i = 0; i < 4; ++i) {
        const std::size_t next = i < 3 ? text.find('x', pos) : text.size();
        if (next == std::string::npos)
            bad_value(key, text);
        parts[i] = static_cast<int>(to_int(key, text.substr(pos, next - pos)));
        pos = next + 1;
    }
    return SystemShape{parts[0], parts[1], parts[2], parts[3]};
}

} // namespace

std::vector<double> parse_grid(const std::string& text)
{
    const std::string t = trim(text);
    if (t.find(':') != std::string::npos) {
        const auto a = t.find(':');
        const auto b = t.find(':', a + 1);
        if (b == std::string::npos)
            bad_value("grid", t);
        const double start = to_double("grid", trim(t.substr(0, a)));
        const double step = to_double("grid", trim(t.substr(a + 1, b - a - 1)));
        const double stop = to_double("grid", trim(t.substr(b + 1)));
        if (step == 0.0 || (stop - start) / step < 0.0)
            bad_value("grid", t);
        const auto n = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
        if (n > 100000)
            bad_value("grid", t);
        std::vector<double> out;
        for (long long i = 0; i <= n; ++i)
            out.push_back(start + static_cast<double>(i) * step);
        return out;
    }
    std::vector<double> out;
    for (const auto& item : split_list(t))
        out.push_back(to_double("grid", item));
    return out;
}

std::map<std::string, std::string> parse_key_values(std::istream& is, const std::string& source)
{
    std::map<std::string, std::string> kv;
    std::string section = "experiment";
    std::string raw;
    int line_no = 0;
    while (std::getline(is, raw)) {
        ++line_no;
        const std::string line = trim(raw.substr(0, raw.find('#')));
        if (line.empty())
            continue;
        const std::string where = source + ":" + std::to_string(line_no);
        if (line.front() == '[') {
            if (line.back() != ']')
                throw Error(Errc::InvalidConfig, where + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(Errc::InvalidConfig, where + ": expected key = value");
        const std::string key = section + "." + trim(line.substr(0, eq));
        if (!kv.emplace(key, trim(line.substr(eq + 1))).second)
            throw Error(Errc::InvalidConfig, where + ": duplicate key " + key);
    }
    return kv;
}

void apply_config(ExperimentConfig& cfg, const std::map<std::string, std::string>& kv)
{
    using Setter = std::function<void(const std::string& key, const std::string& value)>;
    std::optional<SystemShape> single;
    auto single_field = [&](int SystemShape::*field) {
        return [&, field](const std::string& k, const std::string& v) {
            if (!single)
                single = cfg.systems.empty() ? SystemShape{} : cfg.systems.front();
            (*single).*field = static_cast<int>(to_int(k, v));
        };
    };
    const std::map<std::string, Setter> setters{
        {"system.systems",
         [&](const std::string& k, const std::string& v) {
             cfg.systems.clear();
             for (const auto& item : split_list(v))
                 cfg.systems.push_back(parse_shape(k, item));
         }},
        {"system.M", single_field(&SystemShape::M)},
        {"system.N", single_field(&SystemShape::N)},
        {"system.d", single_field(&SystemShape::d)},
        {"system.K", single_field(&SystemShape::K)},
        {"system.sigma2", [&](const std::string& k, const std::string& v) { cfg.sigma2 = to_double(k, v); }},
        {"system.delta2", [&](const std::string& k, const std::string& v) { cfg.delta2 = to_double(k, v); }},
        {"system.rho", [&](const std::string& k, const std::string& v) { cfg.rho = to_double(k, v); }},
        {"system.zeta", [&](const std::string& k, const std::string& v) { cfg.zeta = to_double(k, v); }},
        {"system.snr_db", [&](const std::string& k, const std::string& v) { cfg.snr_db = to_double(k, v); }},
        {"ia.solver", [&](const std::string&, const std::string& v) { cfg.solver = v; }},
        {"ia.max_iters",
         [&](const std::string& k, const std::string& v) { cfg.ia.max_iters = static_cast<int>(to_int(k, v)); }},
        {"ia.tol", [&](const std::string& k, const std::string& v) { cfg.ia.tol = to_double(k, v); }},
        {"balanced.max_iters",
         [&](const std::string& k, const std::string& v) { cfg.balanced.max_iters = static_cast<int>(to_int(k, v)); }},
        {"balanced.tol", [&](const std::string& k, const std::string& v) { cfg.balanced.tol = to_double(k, v); }},
        {"balanced.z_step",
         [&](const std::string& k, const std::string& v) {
             if (v == "exact")
                 cfg.balanced.z_step = ZStep::Exact;
             else if (v == "cross-term")
                 cfg.balanced.z_step = ZStep::CrossTerm;
             else
                 bad_value(k, v);
         }},
        {"experiment.strategies",
         [&](const std::string&, const std::string& v) {
             cfg.strategies.clear();
             for (const auto& item : split_list(v))
                 cfg.strategies.push_back(parse_strategy(item));
         }},
        {"experiment.sweep",
         [&](const std::string&, const std::string& v) { cfg.sweep = parse_sweep_variable(v); }},
        {"experiment.grid", [&](const std::string&, const std::string& v) { cfg.grid = parse_grid(v); }},
        {"experiment.trials",
         [&](const std::string& k, const std::string& v) { cfg.trials = static_cast<int>(to_int(k, v)); }},
        {"experiment.seed",
         [&](const std::string& k, const std::string& v) {
             const long long s = to_int(k, v);
             if (s < 0)
                 bad_value(k, v);
             cfg.seed = static_cast<std::uint64_t>(s);
         }},
        {"experiment.threads",
         [&](const std::string& k, const std::string& v) { cfg.threads = static_cast<int>(to_int(k, v)); }},
        {"experiment.slope_window_db",
         [&](const std::string& k, const std::string& v) { cfg.slope_window_db = to_double(k, v); }},
        {"experiment.ser_channel_uses",
         [&](const std::string& k, const std::string& v) {
             const long long n = to_int(k, v);
             if (n < 1)
                 bad_value(k, v);
             cfg.ser_channel_uses = static_cast<std::uint64_t>(n);
         }},
        {"experiment.energy_mode",
         [&](const std::string& k, const std::string& v) {
             if (v == "approximate")
                 cfg.energy_mode = EnergyMode::Approximate;
             else if (v == "exact")
                 cfg.energy_mode = EnergyMode::Exact;
             else
                 bad_value(k, v);
         }},
        {"experiment.z_list", [&](const std::string&, const std::string& v) { cfg.z_list = parse_grid(v); }},
    };

    for (const auto& [key, value] : kv) {
        const auto it = setters.find(key);
        if (it == setters.end())
            throw Error(Errc::InvalidConfig, "unknown config key " + key);
        it->second(key, value);
    }
    if (single)
        cfg.systems = {*single};
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path, ExperimentConfig defaults)
{
    std::ifstream is(path);
    if (!is)
        throw Error(Errc::IoError, "cannot open config " + path.string());
    apply_config(defaults, parse_key_values(is, path.string()));
    return defaults;
}

} // namespace cdswipt
