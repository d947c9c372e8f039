#include "vbnet/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "vbnet/errors.hpp"
#include "vbnet/metrics.hpp"
#include "vbnet/vb_core.hpp"

namespace vbnet {

std::uint64_t derive_seed(std::uint64_t base, const std::string& tag) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 1099511628211ull;
    }
    // splitmix64 finaliser
    std::uint64_t z = base ^ h;
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    std::size_t threads = workers > 0 ? static_cast<std::size_t>(workers)
                                      : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            while (!failed.load()) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    failed = true;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

const UnitMetrics& ModelMetrics::unit(int id) const {
    for (const auto& u : units) {
        if (u.unit_id == id) return u;
    }
    throw LookupError("no metrics for unit " + std::to_string(id) + " in " + model);
}

const ModelMetrics& MetricReport::model(const std::string& name) const {
    for (const auto& m : models) {
        if (m.model == name) return m;
    }
    throw LookupError("no model '" + name + "' in report");
}

const PhysicalUnit& MetricReport::physical_unit(int id) const {
    for (const auto& p : physical) {
        if (p.unit_id == id) return p;
    }
    throw LookupError("no physical analysis for unit " + std::to_string(id));
}

namespace {

std::string hex(std::uint64_t v) {
    std::ostringstream s;
    s << std::hex << std::setw(16) << std::setfill('0') << v;
    return s.str();
}

nlohmann::json metadata(const ExperimentConfig& cfg) {
    return {{"seed", cfg.seed}, {"config_hash", hex(cfg.hash())}, {"config", cfg.to_json()}};
}

void log_line(const RunOptions& opts, const std::string& line) {
    if (opts.log) *opts.log << line << std::endl;
}

std::vector<Sample> pooled(const std::vector<UnitData>& data, bool train) {
    std::vector<Sample> out;
    for (const auto& d : data) {
        const auto& src = train ? d.train : d.test;
        out.insert(out.end(), src.begin(), src.end());
    }
    return out;
}

std::vector<double> flatten(const std::vector<std::vector<double>>& rows) {
    std::vector<double> out;
    for (const auto& r : rows) out.insert(out.end(), r.begin(), r.end());
    return out;
}

std::vector<double> targets(const std::vector<Sample>& samples) {
    std::vector<double> out;
    for (const auto& s : samples) out.insert(out.end(), s.S_true.begin(), s.S_true.end());
    return out;
}

double safe_r2(std::span<const double> pred, std::span<const double> truth) {
    try {
        return r2(pred, truth);
    } catch (const DomainError&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

nlohmann::json number(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

std::ofstream open_csv(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IngestionError("cannot write " + path.string(), 0);
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    return out;
}

std::string unit_name(int id) { return "AC" + std::to_string(id + 1); }

}  // namespace

ModelMetrics evaluate_model(const SocModel& model, const std::vector<UnitData>& data,
                            const NormStats& norm) {
    ModelMetrics m;
    m.model = model.kind();
    m.parameter_count = ad::parameter_count(model.parameters());
    std::vector<double> all_pred;
    std::vector<double> all_truth;
    for (const auto& d : data) {
        if (d.test.empty()) continue;
        const auto pred = flatten(predict_samples(model, d.test, norm));
        const auto truth = targets(d.test);
        m.units.push_back({d.unit.id, rmse(pred, truth), safe_r2(pred, truth)});
        all_pred.insert(all_pred.end(), pred.begin(), pred.end());
        all_truth.insert(all_truth.end(), truth.begin(), truth.end());
    }
    if (all_truth.empty()) throw DomainError("evaluate_model: no test samples");
    m.rmse = rmse(all_pred, all_truth);
    m.r2 = safe_r2(all_pred, all_truth);
    return m;
}

std::vector<RolloutRow> rollout_table(const VbNet& net, const std::vector<UnitData>& data,
                                      const NormStats& norm) {
    std::vector<RolloutRow> rows;
    for (const auto& d : data) {
        if (d.test.empty()) continue;
        const Batch batch = make_batch(d.test, norm);
        const NetOutput out = net.forward(batch);
        const std::size_t H = batch.horizon;
        for (std::size_t b = 0; b < d.test.size(); ++b) {
            const Sample& s = d.test[b];
            const std::size_t hs = s.horizon_start();
            for (std::size_t t = 0; t < H; ++t) {
                const std::size_t row = hs + t;
                const double T_state = d.traj.T_in[row - 1];
                const double T_out = d.traj.env.T_out[row];
                RolloutRow r;
                r.unit_id = d.unit.id;
                r.timestamp = d.traj.env.t[row];
                r.sample = b;
                r.step = t;
                r.S_true = s.S_true[t];
                r.S_hat = out.S_hat.data()[b * H + t];
                r.dT_phy = out.dT_phy.data()[b * H + t];
                r.P_loss_hat = out.P_loss_hat.data()[b * H + t];
                r.P_loss_oracle = (T_out - T_state) / d.unit.R;
                r.C_f_hat = out.C_f_hat.data()[b];
                rows.push_back(r);
            }
        }
    }
    return rows;
}

std::vector<PhysicalUnit> physical_analysis(const VbNet& net, const std::vector<UnitData>& data,
                                            std::span<const RolloutRow> rows) {
    std::vector<PhysicalUnit> out;
    for (const auto& d : data) {
        std::vector<double> x;
        std::vector<double> y;
        double cap_sum = 0.0;
        for (const auto& r : rows) {
            if (r.unit_id != d.unit.id) continue;
            x.push_back(r.dT_phy);
            y.push_back(r.P_loss_hat);
            cap_sum += r.C_f_hat;
        }
        if (x.empty()) continue;
        PhysicalUnit p;
        p.unit_id = d.unit.id;
        p.C_f_hat = cap_sum / static_cast<double>(x.size());
        p.C_f_oracle = oracle_capacity(d.unit);
        const LineFit fit = least_squares(x, y);
        p.slope = fit.slope;
        p.intercept = fit.intercept;
        p.inv_R = 1.0 / d.unit.R;
        p.gamma = net.gamma(d.unit.id);
        out.push_back(p);
    }
    return out;
}

nlohmann::json MetricReport::to_json() const {
    nlohmann::json j = metadata(config);
    j["models"] = nlohmann::json::array();
    for (const auto& m : models) {
        nlohmann::json units = nlohmann::json::array();
        for (const auto& u : m.units) {
            units.push_back({{"unit_id", u.unit_id}, {"rmse", u.rmse}, {"r2", number(u.r2)}});
        }
        j["models"].push_back({{"model", m.model},
                               {"rmse", m.rmse},
                               {"r2", number(m.r2)},
                               {"epochs_run", m.epochs_run},
                               {"best_epoch", m.best_epoch},
                               {"parameter_count", m.parameter_count},
                               {"units", units}});
    }
    j["physical"] = nlohmann::json::array();
    for (const auto& p : physical) {
        j["physical"].push_back({{"unit_id", p.unit_id},
                                 {"C_f_hat", p.C_f_hat},
                                 {"C_f_oracle", p.C_f_oracle},
                                 {"slope", p.slope},
                                 {"intercept", p.intercept},
                                 {"inv_R", p.inv_R},
                                 {"gamma", p.gamma}});
    }
    return j;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw IngestionError("cannot write " + path.string(), 0);
    out << j.dump(2) << '\n';
}

namespace {

struct TrainedModel {
    std::unique_ptr<SocModel> model;
    TrainResult result;
};

void write_case_a_csvs(const std::filesystem::path& dir, const std::vector<UnitData>& data,
                       const std::vector<RolloutRow>& rows, const MetricReport& report,
                       const std::vector<TrainedModel>& trained, const NormStats& norm) {
    // baseline predictions aligned with the VB-NET rollout rows
    std::vector<std::vector<double>> baseline_pred(trained.size() - 1);
    for (std::size_t m = 1; m < trained.size(); ++m) {
        for (const auto& d : data) {
            if (d.test.empty()) continue;
            const auto p = flatten(predict_samples(*trained[m].model, d.test, norm));
            baseline_pred[m - 1].insert(baseline_pred[m - 1].end(), p.begin(), p.end());
        }
    }

    auto soc = open_csv(dir / "soc_tracking.csv");
    soc << "unit_id,timestamp,sample,step,S_true,S_vbnet";
    for (std::size_t m = 1; m < trained.size(); ++m) soc << ",S_" << trained[m].model->kind();
    soc << '\n';
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        soc << r.unit_id << ',' << r.timestamp << ',' << r.sample << ',' << r.step << ','
            << r.S_true << ',' << r.S_hat;
        for (const auto& p : baseline_pred) soc << ',' << p[i];
        soc << '\n';
    }

    auto scatter = open_csv(dir / "ploss_scatter.csv");
    scatter << "unit_id,dT_phy,P_loss_hat,P_loss_oracle\n";
    for (const auto& r : rows) {
        scatter << r.unit_id << ',' << r.dT_phy << ',' << r.P_loss_hat << ',' << r.P_loss_oracle
                << '\n';
    }

    auto tv = open_csv(dir / "time_varying_params.csv");
    tv << "unit_id,timestamp,C_f_hat,P_loss_hat,P_loss_oracle\n";
    for (const auto& r : rows) {
        tv << r.unit_id << ',' << r.timestamp << ',' << r.C_f_hat << ',' << r.P_loss_hat << ','
           << r.P_loss_oracle << '\n';
    }

    auto cf = open_csv(dir / "cf_bars.csv");
    cf << "unit_id,name,C_f_hat,C_f_oracle,delta_T\n";
    auto gamma = open_csv(dir / "gamma_bars.csv");
    gamma << "unit_id,name,gamma,R,slope,inv_R\n";
    for (const auto& p : report.physical) {
        const auto& unit = data.at(static_cast<std::size_t>(p.unit_id)).unit;
        cf << p.unit_id << ',' << unit_name(p.unit_id) << ',' << p.C_f_hat << ',' << p.C_f_oracle
           << ',' << unit.band() << '\n';
        gamma << p.unit_id << ',' << unit_name(p.unit_id) << ',' << p.gamma << ',' << unit.R << ','
              << p.slope << ',' << p.inv_R << '\n';
    }

    auto metrics = open_csv(dir / "metrics.csv");
    metrics << "model,unit_id,rmse,r2\n";
    for (const auto& m : report.models) {
        for (const auto& u : m.units) {
            metrics << m.model << ',' << u.unit_id << ',' << u.rmse << ',' << u.r2 << '\n';
        }
    }
}

}  // namespace

MetricReport run_case_a(const ExperimentConfig& cfg_in, const RunOptions& opts) {
    ExperimentConfig cfg = cfg_in;
    cfg.n_units = 4;
    cfg.validate();
    const FleetSpec fleet = default_fleet(4);
    const EnvSeries env = synth_env(cfg.days, cfg.seed);
    const auto data = build_fleet_data(fleet, env, cfg);
    const auto train = pooled(data, true);
    const NormStats norm = compute_norm_stats(train);
    log_line(opts, "case-a: " + std::to_string(train.size()) + " training windows");

    std::vector<TrainedModel> trained;
    trained.push_back({std::make_unique<VbNet>(cfg, 4, derive_seed(cfg.seed, "vbnet")), {}});
    for (BaselineKind k : {BaselineKind::Dense, BaselineKind::Conv, BaselineKind::Recurrent}) {
        trained.push_back({std::make_unique<BaselineModel>(k, cfg, 4,
                                                           derive_seed(cfg.seed, to_string(k))),
                           {}});
    }
    std::mutex log_mutex;
    parallel_for(trained.size(), cfg.workers, [&](std::size_t i) {
        TrainOptions t = TrainOptions::from(cfg);
        t.seed = derive_seed(cfg.seed, "shuffle/" + trained[i].model->kind());
        trained[i].result = train_model(*trained[i].model, train, norm, t);
        std::lock_guard lock(log_mutex);
        log_line(opts, "case-a: trained " + trained[i].model->kind() + " (" +
                           std::to_string(trained[i].result.epochs_run) + " epochs)");
    });

    MetricReport report;
    report.config = cfg;
    for (const auto& t : trained) {
        ModelMetrics m = evaluate_model(*t.model, data, norm);
        m.epochs_run = t.result.epochs_run;
        m.best_epoch = t.result.best_epoch;
        report.models.push_back(std::move(m));
    }
    const auto& net = static_cast<const VbNet&>(*trained.front().model);
    const auto rows = rollout_table(net, data, norm);
    report.physical = physical_analysis(net, data, rows);

    if (!opts.out_dir.empty()) {
        std::filesystem::create_directories(opts.out_dir);
        write_json(opts.out_dir / "report.json", report.to_json());
        write_case_a_csvs(opts.out_dir, data, rows, report, trained, norm);
    }
    return report;
}

double CaseBReport::rmse(const std::string& method, double alpha) const {
    for (const auto& c : cells) {
        if (c.method == method && std::abs(c.alpha - alpha) < 1e-12) return c.rmse;
    }
    std::ostringstream s;
    s << "no case-b cell (" << method << ", " << alpha << ")";
    throw LookupError(s.str());
}

nlohmann::json CaseBReport::to_json() const {
    nlohmann::json j = metadata(config);
    j["n_mature"] = n_mature;
    j["new_unit"] = new_unit;
    j["cells"] = nlohmann::json::array();
    for (const auto& c : cells) {
        j["cells"].push_back({{"method", c.method},
                              {"alpha", c.alpha},
                              {"new_unit_train", c.new_unit_train},
                              {"rmse", c.rmse},
                              {"epochs_run", c.epochs_run}});
    }
    return j;
}

CaseBReport run_case_b(const ExperimentConfig& cfg_in, int n_mature, std::span<const double> alphas,
                       const RunOptions& opts) {
    if (n_mature != 3 && n_mature != 7) throw ConfigError("n_mature: must be 3 or 7");
    if (alphas.empty()) throw ConfigError("alphas: at least one value required");
    for (double a : alphas) {
        if (!(a > 0.0 && a <= 1.0)) throw ConfigError("alphas: each alpha must lie in (0, 1]");
    }
    ExperimentConfig cfg = cfg_in;
    cfg.n_units = n_mature + 1;
    cfg.validate();
    const FleetSpec fleet = default_fleet(cfg.n_units);
    const EnvSeries env = synth_env(cfg.days, cfg.seed);
    const auto data = build_fleet_data(fleet, env, cfg);
    const UnitData& newcomer = data.back();
    const std::vector<UnitData> eval_data{newcomer};
    const std::size_t K = data.size();

    CaseBReport report;
    report.config = cfg;
    report.n_mature = n_mature;
    report.new_unit = newcomer.unit.id;
    for (const char* method : {"stl", "mtl"}) {
        for (double a : alphas) report.cells.push_back({method, a, 0, 0.0, 0});
    }

    std::mutex log_mutex;
    parallel_for(report.cells.size(), cfg.workers, [&](std::size_t i) {
        CaseBCell& cell = report.cells[i];
        std::ostringstream tag;
        tag << "case-b/" << n_mature << '/' << cell.method;
        const auto subset = cold_start_subset(newcomer.train, cell.alpha);
        cell.new_unit_train = subset.size();
        std::vector<Sample> train;
        if (cell.method == "mtl") {
            for (std::size_t k = 0; k + 1 < K; ++k) {
                train.insert(train.end(), data[k].train.begin(), data[k].train.end());
            }
        }
        train.insert(train.end(), subset.begin(), subset.end());
        const NormStats norm = compute_norm_stats(train);
        VbNet net(cfg, K, derive_seed(cfg.seed, tag.str() + "/init"));
        TrainOptions t = TrainOptions::from(cfg);
        t.seed = derive_seed(cfg.seed, tag.str() + "/shuffle");
        const TrainResult res = train_model(net, train, norm, t);
        cell.epochs_run = res.epochs_run;
        cell.rmse = evaluate_model(net, eval_data, norm).rmse;
        std::lock_guard lock(log_mutex);
        std::ostringstream line;
        line << tag.str() << '/' << cell.alpha << ": " << cell.new_unit_train << " windows, rmse " << cell.rmse;
        log_line(opts, line.str());
    });

    if (!opts.out_dir.empty()) {
        std::filesystem::create_directories(opts.out_dir);
        const std::string stem = "case_b_" + std::to_string(n_mature);
        write_json(opts.out_dir / (stem + ".json"), report.to_json());
        auto csv = open_csv(opts.out_dir / (stem + ".csv"));
        csv << "alpha,new_unit_train";
        for (const char* method : {"stl", "mtl"}) csv << ',' << method << "_rmse";
        csv << '\n';
        for (double a : alphas) {
            std::size_t n = 0;
            for (const auto& c : report.cells) {
                if (c.alpha == a) n = c.new_unit_train;
            }
            csv << a << ',' << n << ',' << report.rmse("stl", a) << ',' << report.rmse("mtl", a)
                << '\n';
        }
    }
    return report;
}

}  // namespace vbnet
