#include "vbnet/data_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <numbers>
#include <random>

#include "csv.hpp"
#include "vbnet/errors.hpp"
#include "vbnet/vb_core.hpp"

namespace vbnet {

namespace {

constexpr const char* kFeatureNames[] = {"T_out", "T_in", "P_ac", "mu_Tin", "sigma_Tin",
                                         "dT_range"};

struct Moments {
    double sum = 0.0;
    double sq = 0.0;
    std::size_t n = 0;
    void add(double v) {
        sum += v;
        sq += v * v;
        ++n;
    }
    void add(const std::vector<double>& vs) {
        for (double v : vs) add(v);
    }
    double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
    double stddev() const {
        if (n == 0) return 0.0;
        const double m = mean();
        return std::sqrt(std::max(0.0, sq / static_cast<double>(n) - m * m));
    }
};

std::size_t ceil_count(double frac, std::size_t n) {
    // guard against 0.8 * 91 landing a hair above an integer
    return static_cast<std::size_t>(std::ceil(frac * static_cast<double>(n) - 1e-9));
}

}  // namespace

nlohmann::json NormStats::to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (std::size_t i = 0; i < mean.size(); ++i) {
        j[kFeatureNames[i]] = {{"mean", mean[i]}, {"std", std[i]}};
    }
    return j;
}

NormStats NormStats::from_json(const nlohmann::json& j) {
    NormStats s;
    for (std::size_t i = 0; i < s.mean.size(); ++i) {
        s.mean[i] = j.at(kFeatureNames[i]).at("mean").get<double>();
        s.std[i] = j.at(kFeatureNames[i]).at("std").get<double>();
    }
    return s;
}

NormStats compute_norm_stats(const std::vector<Sample>& train) {
    std::array<Moments, static_cast<std::size_t>(Feature::Count)> m;
    for (const Sample& s : train) {
        m[static_cast<std::size_t>(Feature::T_out)].add(s.ctx_T_out);
        m[static_cast<std::size_t>(Feature::T_in)].add(s.ctx_T_in);
        m[static_cast<std::size_t>(Feature::P_ac)].add(s.ctx_P_ac);
        m[static_cast<std::size_t>(Feature::mu_Tin)].add(s.mu_Tin);
        m[static_cast<std::size_t>(Feature::sigma_Tin)].add(s.sigma_Tin);
        m[static_cast<std::size_t>(Feature::dT_range)].add(s.dT_range());
    }
    NormStats out;
    for (std::size_t i = 0; i < m.size(); ++i) {
        out.mean[i] = m[i].mean();
        out.std[i] = std::max(NormStats::kStdFloor, m[i].stddev());
    }
    return out;
}

double tou_price(int hour_of_day) {
    if (hour_of_day < 8) return 0.25;  // valley
    if ((hour_of_day >= 10 && hour_of_day < 12) || (hour_of_day >= 14 && hour_of_day < 19)) {
        return 1.05;  // peak
    }
    return 0.65;  // shoulder
}

EnvSeries synth_env(int days, std::uint64_t seed, const EnvSynthOptions& opts) {
    if (days < 2) throw DomainError("synth_env: days must be ≥ 2");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const std::size_t n = static_cast<std::size_t>(days) * 24;
    EnvSeries env;
    env.t.resize(n);
    env.T_out.resize(n);
    env.price.resize(n);
    double ar = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        env.t[k] = opts.start + static_cast<std::int64_t>(k) * 3600;
        const int hour = static_cast<int>(((env.t[k] / 3600) % 24 + 24) % 24);
        // draw both noises every hour so the streams stay aligned when a sigma is 0
        const double e_temp = gauss(rng);
        const double e_price = gauss(rng);
        ar = opts.ar_phi * ar + opts.ar_sigma * e_temp;
        env.T_out[k] = 29.0 + 4.0 * std::cos(2.0 * std::numbers::pi * (hour - 15) / 24.0) + ar;
        env.price[k] = std::max(0.01, tou_price(hour) + opts.price_noise * e_price);
    }
    return env;
}

void export_env_csv(const EnvSeries& env, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    out << "timestamp,T_out,price\n";
    for (std::size_t k = 0; k < env.size(); ++k) {
        out << env.t[k] << ',' << env.T_out[k] << ',' << env.price[k] << '\n';
    }
}

EnvSeries import_env_csv(const std::filesystem::path& path) {
    const csv::Table table = csv::read(path);
    const std::size_t it = table.column("timestamp");
    const std::size_t iT = table.column("T_out");
    const std::size_t ip = table.column("price");
    EnvSeries env;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::size_t line = r + 1;
        const auto ts = csv::parse_int(row[it], line, "timestamp");
        const double T = csv::parse_double(row[iT], line, "T_out");
        const double p = csv::parse_double(row[ip], line, "price");
        if (!std::isfinite(T) || !std::isfinite(p)) throw IngestionError("non-finite value", line);
        if (!env.t.empty() && ts - env.t.back() != 3600) {
            throw IngestionError("non-hourly gap of " + std::to_string(ts - env.t.back()) + " s",
                                 line);
        }
        env.t.push_back(ts);
        env.T_out.push_back(T);
        env.price.push_back(p);
    }
    return env;
}

std::vector<Sample> make_samples(const Trajectory& traj, const AcUnitSpec& unit, int seq_len,
                                 int rollout_len, int stride) {
    if (seq_len <= 0 || rollout_len <= 0 || stride <= 0) {
        throw DomainError("make_samples: window sizes must be positive");
    }
    const std::size_t L = static_cast<std::size_t>(seq_len);
    const std::size_t H = static_cast<std::size_t>(rollout_len);
    std::vector<Sample> out;
    if (traj.size() < L + H) {
        std::cerr << "warning: trajectory of unit " << traj.unit_id << " has " << traj.size()
                  << " rows, fewer than " << L + H << "; no samples\n";
        return out;
    }
    const auto slice = [](const std::vector<double>& v, std::size_t from, std::size_t len) {
        return std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(from),
                                   v.begin() + static_cast<std::ptrdiff_t>(from + len));
    };
    for (std::size_t s = 0; s + L + H <= traj.size(); s += static_cast<std::size_t>(stride)) {
        Sample x;
        x.unit_id = traj.unit_id;
        x.start = s;
        x.start_time = traj.env.t[s];
        x.ctx_T_out = slice(traj.env.T_out, s, L);
        x.ctx_T_in = slice(traj.T_in, s, L);
        x.ctx_P_ac = slice(traj.P_ac, s, L);
        x.hz_T_out = slice(traj.env.T_out, s + L, H);
        x.hz_P_ac = slice(traj.P_ac, s + L, H);
        x.S0 = traj.soc[s + L - 1];
        x.S_true = slice(traj.soc, s + L, H);
        Moments m;
        m.add(x.ctx_T_in);
        x.mu_Tin = m.mean();
        x.sigma_Tin = m.stddev();
        x.T_min = unit.T_min;
        x.T_max = unit.T_max;
        x.eta = unit.eta;
        out.push_back(std::move(x));
    }
    return out;
}

std::pair<std::vector<Sample>, std::vector<Sample>> chrono_split(const std::vector<Sample>& samples,
                                                                 double train_frac) {
    const std::size_t n_train = std::min(samples.size(), ceil_count(train_frac, samples.size()));
    std::vector<Sample> train(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<Sample> test(samples.begin() + static_cast<std::ptrdiff_t>(n_train), samples.end());
    return {std::move(train), std::move(test)};
}

std::size_t cold_start_count(std::size_t n, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("cold_start_subset: alpha ∉ (0, 1]");
    return std::min(n, ceil_count(alpha, n));
}

std::vector<Sample> cold_start_subset(const std::vector<Sample>& train, double alpha) {
    const std::size_t k = cold_start_count(train.size(), alpha);
    if (k == 0) throw DomainError("cold_start_subset: alpha leaves no samples");
    return {train.end() - static_cast<std::ptrdiff_t>(k), train.end()};
}

std::vector<UnitData> window_fleet_data(const FleetSpec& fleet, std::vector<Trajectory> trajs,
                                        const ExperimentConfig& cfg) {
    if (trajs.size() != fleet.units.size()) throw DomainError("fleet/trajectory count mismatch");
    std::vector<UnitData> out;
    for (std::size_t i = 0; i < fleet.units.size(); ++i) {
        UnitData d;
        d.unit = fleet.units[i];
        d.traj = std::move(trajs[i]);
        auto samples = make_samples(d.traj, d.unit, cfg.seq_len, cfg.rollout_len, cfg.stride);
        std::tie(d.train, d.test) = chrono_split(samples, cfg.train_frac);
        out.push_back(std::move(d));
    }
    return out;
}

std::vector<UnitData> build_fleet_data(const FleetSpec& fleet, const EnvSeries& env,
                                       const ExperimentConfig& cfg) {
    SimOptions opts;
    opts.dt = cfg.dt;
    opts.substeps = cfg.substeps;
    std::vector<Trajectory> trajs;
    for (const AcUnitSpec& u : fleet.units) {
        trajs.push_back(simulate_unit(u, env, 0.5 * (u.T_min + u.T_max), opts));
    }
    return window_fleet_data(fleet, std::move(trajs), cfg);
}

namespace {

std::string unit_file(int id) { return "unit_" + std::to_string(id) + ".csv"; }

nlohmann::json unit_json(const AcUnitSpec& u) {
    return {{"id", u.id},       {"file", unit_file(u.id)}, {"R", u.R},
            {"C_th", u.C_th},   {"eta", u.eta},            {"P_max", u.P_max},
            {"T_min", u.T_min}, {"T_max", u.T_max}};
}

}  // namespace

void write_dataset(const std::filesystem::path& dir, const std::vector<UnitData>& data,
                   const ExperimentConfig& cfg) {
    std::filesystem::create_directories(dir);
    nlohmann::json units = nlohmann::json::array();
    std::vector<Sample> train;
    std::size_t split_index = 0;
    for (const UnitData& d : data) {
        write_trajectory_csv(d.traj, dir / unit_file(d.unit.id));
        units.push_back(unit_json(d.unit));
        train.insert(train.end(), d.train.begin(), d.train.end());
        split_index = d.train.size();
    }
    nlohmann::json manifest = {
        {"units", units},
        {"seq_len", cfg.seq_len},
        {"rollout_len", cfg.rollout_len},
        {"stride", cfg.stride},
        {"dt", cfg.dt},
        {"split_index", split_index},
        {"norm_stats", compute_norm_stats(train).to_json()},
    };
    std::ofstream out(dir / "manifest.json");
    out << manifest.dump(2) << '\n';
}

Dataset read_dataset(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw IngestionError("missing manifest.json in " + dir.string(), 0);
    nlohmann::json m;
    try {
        m = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw IngestionError(std::string("manifest.json: ") + e.what(), 0);
    }
    Dataset ds;
    ds.seq_len = m.at("seq_len").get<int>();
    ds.rollout_len = m.at("rollout_len").get<int>();
    ds.split_index = m.at("split_index").get<std::size_t>();
    ds.norm_stats = NormStats::from_json(m.at("norm_stats"));
    ds.fleet.dt = m.value("dt", kSecondsPerHour);
    for (const auto& u : m.at("units")) {
        AcUnitSpec spec{u.at("id").get<int>(),     u.at("R").get<double>(),
                        u.at("C_th").get<double>(), u.at("eta").get<double>(),
                        u.at("P_max").get<double>(), u.at("T_min").get<double>(),
                        u.at("T_max").get<double>()};
        ds.fleet.units.push_back(spec);
        ds.trajectories.push_back(
            read_trajectory_csv(dir / u.at("file").get<std::string>(), spec.id));
    }
    ds.fleet.validate();
    if (!ds.trajectories.empty()) {
        ds.fleet.horizon_hours = static_cast<double>(ds.trajectories.front().size());
    }
    return ds;
}

}  // namespace vbnet
