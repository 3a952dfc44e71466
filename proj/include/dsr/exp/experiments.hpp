#pragma once

#include <chrono>
#include <filesystem>

#include "dsr/exp/config.hpp"
#include "dsr/identify/nullspace.hpp"
#include "dsr/io/bundle.hpp"
#include "dsr/io/checkpoint.hpp"
#include "dsr/io/hash.hpp"
#include "dsr/io/library_spec.hpp"
#include "dsr/landscape/entropy_sweep.hpp"
#include "dsr/landscape/hessian.hpp"
#include "dsr/landscape/radius.hpp"
#include "dsr/landscape/retrain.hpp"
#include "dsr/metrics/report.hpp"
#include "dsr/train/node.hpp"
#include "dsr/train/sindy.hpp"

namespace dsr::exp {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// run manifest and artifact bookkeeping

class ArtifactSink {
  public:
    explicit ArtifactSink(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

    const fs::path& dir() const { return dir_; }

    std::string path(const std::string& relative) {
        registered_.push_back(relative);
        fs::path full = dir_ / relative;
        fs::create_directories(full.parent_path());
        return full.string();
    }

    // Registers the contents of a sub-directory written by a bundle helper.
    void register_tree(const std::string& relative) {
        for (const auto& entry : fs::recursive_directory_iterator(dir_ / relative))
            if (entry.is_regular_file()) registered_.push_back(fs::relative(entry.path(), dir_).string());
    }

    json artifacts_json() const {
        json list = json::array();
        std::vector<std::string> sorted = registered_;
        std::sort(sorted.begin(), sorted.end());
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
        for (const auto& rel : sorted) {
            const fs::path full = dir_ / rel;
            if (!fs::exists(full)) continue;
            list.push_back({{"path", rel}, {"sha256", sha256_file(full.string())}});
        }
        return list;
    }

  private:
    fs::path dir_;
    std::vector<std::string> registered_;
};

struct RunManifest {
    json doc;

    bool failed() const { return doc.contains("failure") && !doc["failure"].is_null(); }

    void write(const std::string& path) const {
        std::ofstream out(path);
        require(out.good(), "manifest: cannot open " + path);
        out << doc.dump(2) << "\n";
    }
};

// ---------------------------------------------------------------------------
// shared experiment plumbing

struct ExperimentContext {
    json doc;
    bool paper_scale = false;
    int jobs = 1;
    std::uint64_t seed = 0;

    template <typename T>
    T get_or(const std::string& path, T fallback) const {
        return cfg::get_or<T>(doc, path, fallback);
    }
};

inline double default_record_dt(const std::string& system) { return system == "lorenz-like" ? 0.005 : 0.01; }

inline double default_t_int(const std::string& system) { return system == "lorenz-like" ? 80.0 : 40.0; }

inline Grid default_grid(const std::string& system) {
    if (system == "lorenz-like") return lorenz_like_grid();
    if (system == "two-cycle") return Grid::box2d(-0.7, 0.7, -0.7, 0.7, 10, 10);
    if (system == "lorenz96") {
        Grid g;
        g.lo = Vec::Constant(6, -1.0);
        g.hi = Vec::Constant(6, 2.0);
        g.counts = {2, 2, 2, 1, 1, 1};
        return g;
    }
    return duffing_grid();
}

inline Grid grid_from_cfg(const ExperimentContext& ctx, const Grid& fallback) {
    const json* node = cfg::find(ctx.doc, "grid");
    if (node == nullptr) return fallback;
    Grid g;
    const auto lo = cfg::get_required<std::vector<double>>(ctx.doc, "grid.lo");
    const auto hi = cfg::get_required<std::vector<double>>(ctx.doc, "grid.hi");
    g.counts = cfg::get_required<std::vector<int>>(ctx.doc, "grid.counts");
    require(lo.size() == hi.size() && lo.size() == g.counts.size(), "grid: lo/hi/counts size mismatch");
    g.lo = Eigen::Map<const Vec>(lo.data(), static_cast<Eigen::Index>(lo.size()));
    g.hi = Eigen::Map<const Vec>(hi.data(), static_cast<Eigen::Index>(hi.size()));
    g.check();
    return g;
}

// Initial conditions sampled uniformly within the requested basins (cycling
// through `basins`), by rejection against the basin labeler over the box.
inline std::vector<Vec> sample_basin_ics(const GroundTruthSystem& sys, const Grid& box,
                                         const std::vector<int>& basins, int count, std::uint64_t seed) {
    BasinLabeler labeler(sys);
    Rng rng(derive_seed(seed, "training-ics"));
    std::vector<Vec> ics;
    int attempts = 0;
    while (static_cast<int>(ics.size()) < count) {
        require(++attempts < 10000 * count, "ic sampling: rejection failed, check the basin spec");
        const int want = basins[ics.size() % basins.size()];
        Vec x(box.dim());
        for (int d = 0; d < box.dim(); ++d) x[d] = rng.uniform(box.lo[d], box.hi[d]);
        if (labeler.label(x) == want) ics.push_back(x);
    }
    return ics;
}

struct TrainingData {
    Dataset dataset;
    IntegratorConfig integrator;
    GroundTruthSystem system;
    std::string system_name;
};

inline TrainingData make_training_data(const ExperimentContext& ctx, const std::vector<int>& basins,
                                       std::uint64_t seed, int n_trajectories) {
    TrainingData data;
    data.system_name = ctx.get_or<std::string>("data.system", "duffing");
    data.system = system_from_name(data.system_name);
    data.integrator.method = IntegratorMethod::Rk4;
    data.integrator.record_interval = ctx.get_or<double>("data.dt", default_record_dt(data.system_name));
    data.integrator.dt = data.integrator.record_interval;
    data.integrator.t_int = ctx.get_or<double>("data.t_int", default_t_int(data.system_name));
    const Grid box = default_grid(data.system_name);
    const auto ics = sample_basin_ics(data.system, box, basins, n_trajectories, seed);
    data.dataset = generate_dataset(data.system, ics, data.integrator);
    return data;
}

inline TrainConfig shplrnn_train_config(const ExperimentContext& ctx, std::uint64_t seed) {
    TrainConfig cfg;
    cfg.steps = ctx.get_or<int>("train.steps", ctx.paper_scale ? 250000 : 20000);
    cfg.batch_size = ctx.get_or<int>("train.batch_size", 32);
    cfg.seq_len = ctx.get_or<int>("train.seq_len", 100);
    cfg.tf_interval = ctx.get_or<int>("train.tau", 15);
    cfg.lr_start = ctx.get_or<double>("train.lr_start", 1e-3);
    cfg.lr_end = ctx.get_or<double>("train.lr_end", 1e-6);
    cfg.optimizer = ctx.get_or<std::string>("train.optimizer", "radam") == "adam" ? OptimizerKind::Adam
                                                                                  : OptimizerKind::RAdam;
    cfg.seed = seed;
    cfg.check();
    return cfg;
}

struct TrainedModel {
    std::string family;
    std::shared_ptr<Flow> flow;
    LossReport loss;
    std::function<void(const std::string&)> save;
    // family internals, populated where the probes need them
    std::optional<ShPLRNN> shplrnn;
    StandardizationStats stats;
};

inline TrainedModel train_family(const std::string& family, const ExperimentContext& ctx,
                                 const TrainingData& data, std::uint64_t seed) {
    TrainedModel out;
    out.family = family;
    out.stats = data.dataset.stats;
    const double dt = data.integrator.record_interval;
    const int obs_dim = system_dim(data.system);

    if (family == "shplrnn") {
        InitConfig init_cfg;
        init_cfg.scheme = ctx.get_or<std::string>("shplrnn.init_scheme", "glorot-uniform") == "glorot-normal"
                              ? InitScheme::GlorotNormal
                              : InitScheme::GlorotUniform;
        init_cfg.gain = ctx.get_or<double>("shplrnn.init_gain", 0.3);
        const int latent = ctx.get_or<int>("shplrnn.latent_dim", data.system_name == "lorenz-like" ? 30 : 5);
        const int hidden = ctx.get_or<int>("shplrnn.hidden_dim", data.system_name == "lorenz-like" ? 500 : 100);
        TrainConfig cfg = shplrnn_train_config(ctx, seed);
        if (data.system_name == "lorenz-like") {
            cfg.seq_len = ctx.get_or<int>("train.seq_len", 50);
            cfg.lr_end = ctx.get_or<double>("train.lr_end", 1e-5);
        }
        ShPLRNN init = init_shplrnn(latent, hidden, obs_dim, init_cfg, derive_seed(seed, "init"));
        auto [model, report] = train_shplrnn(init, data.dataset.standardized, cfg);
        out.loss = std::move(report);
        out.shplrnn = model;
        out.flow = std::make_shared<ShplrnnFlow>(model, out.stats, dt);
        StandardizationStats stats = out.stats;
        out.save = [model, stats, seed](const std::string& path) {
            checkpoint::save_shplrnn(path, model, stats, seed);
        };
        return out;
    }
    if (family == "rc") {
        ReservoirConfig cfg;
        cfg.obs_dim = obs_dim;
        cfg.reservoir_dim = ctx.get_or<int>(
            "rc.reservoir_dim",
            data.system_name == "lorenz-like" ? (ctx.paper_scale ? 2000 : 500) : (ctx.paper_scale ? 500 : 300));
        cfg.spectral_radius = ctx.get_or<double>("rc.spectral_radius", data.system_name == "lorenz-like" ? 0.75 : 1.0);
        cfg.alpha = ctx.get_or<double>("rc.alpha", data.system_name == "lorenz-like" ? 0.4 : 0.7);
        cfg.sigma = ctx.get_or<double>("rc.sigma", data.system_name == "lorenz-like" ? 0.3 : 0.2);
        cfg.beta = ctx.get_or<double>("rc.beta", data.system_name == "lorenz-like" ? 0.7 : 0.5);
        cfg.ridge = ctx.get_or<double>("rc.ridge", 1e-8);
        const int washout = ctx.get_or<int>("rc.washout", 100);
        Reservoir rc(cfg, derive_seed(seed, "reservoir"));
        rc_train_next_step(rc, data.dataset.standardized, washout);
        out.flow = std::make_shared<RcFlow>(rc, out.stats, dt, ctx.get_or<int>("rc.drop_first", 10));
        StandardizationStats stats = out.stats;
        auto rc_copy = std::make_shared<Reservoir>(rc);
        out.save = [rc_copy, stats, seed](const std::string& path) {
            checkpoint::save_reservoir(path, *rc_copy, stats, seed);
        };
        return out;
    }
    if (family == "node") {
        InitConfig init_cfg;
        init_cfg.gain = ctx.get_or<double>("node.init_gain", 1.0);
        std::vector<int> hidden = ctx.get_or<std::vector<int>>(
            "node.hidden", data.system_name == "lorenz-like" ? std::vector<int>{100, 100, 100}
                                                             : std::vector<int>{40, 40});
        const Activation act = ctx.get_or<std::string>("node.activation",
                                                       data.system_name == "lorenz-like" ? "relu" : "tanh") == "relu"
                                   ? Activation::Relu
                                   : Activation::Tanh;
        TrainConfig cfg = shplrnn_train_config(ctx, seed);
        cfg.steps = ctx.get_or<int>("node.steps", ctx.paper_scale ? 100000 : 20000);
        cfg.seq_len = ctx.get_or<int>("node.seq_len", 30);
        cfg.lr_end = ctx.get_or<double>("node.lr_end", 1e-5);
        MLPOdeField init = init_mlp(obs_dim, hidden, act, init_cfg, derive_seed(seed, "node-init"));
        auto [field, report] = train_mlp_ode(init, data.dataset.standardized, dt, cfg);
        out.loss = std::move(report);
        out.flow = std::make_shared<NodeFlow>(field, out.stats, dt);
        StandardizationStats stats = out.stats;
        auto field_copy = std::make_shared<MLPOdeField>(field);
        const double dt_copy = dt;
        out.save = [field_copy, stats, seed, dt_copy](const std::string& path) {
            checkpoint::save_mlp(path, *field_copy, stats, seed, dt_copy);
        };
        return out;
    }
    throw ValidationError("models: unknown family '" + family + "' (expected shplrnn | rc | node)");
}

inline EStatConfig stat_config(const ExperimentContext& ctx, const std::string& system,
                               double unit_scale = 1.0) {
    EStatConfig cfg;
    cfg.horizon_steps = ctx.get_or<int>("metrics.horizon_steps", system == "lorenz-like" ? 16000 : 4000);
    cfg.sw1.directions = ctx.get_or<int>("metrics.sw1_directions", 1000);
    cfg.sw1.dq = ctx.get_or<double>("metrics.dq", 1e-3);
    cfg.sw1.seed = derive_seed(ctx.seed, "sw1");
    cfg.unit_scale = unit_scale;
    cfg.jobs = ctx.jobs;
    return cfg;
}

inline TopoConfig topo_config(const ExperimentContext& ctx, const std::string& system) {
    TopoConfig cfg;
    cfg.eps_lambda = ctx.get_or<double>("metrics.eps_lambda", 0.25);
    cfg.eps_dh = ctx.get_or<double>("metrics.eps_dh", 0.0);  // 0 resolves to V / K
    cfg.tail_steps = ctx.get_or<int>("metrics.tail_steps", system == "lorenz-like" ? 5000 : 500);
    cfg.zero_band = ctx.get_or<double>("metrics.zero_band", 1e-3);
    cfg.lyapunov.transient_steps =
        ctx.get_or<int>("metrics.lyapunov_transient", system == "lorenz-like" ? 5000 : 3000);
    cfg.lyapunov.eval_steps = ctx.get_or<int>("metrics.lyapunov_steps", system == "lorenz-like" ? 10000 : 3000);
    cfg.lyapunov.reorth_every = ctx.get_or<int>("metrics.lyapunov_reorth_every", 50);
    cfg.jobs = ctx.jobs;
    return cfg;
}

// ---------------------------------------------------------------------------
// experiments

inline void run_oodg_benchmark(const ExperimentContext& ctx, ArtifactSink& sink) {
    const auto basins = ctx.get_or<std::vector<int>>("data.basins", {1});
    const int n_traj = ctx.get_or<int>("data.n_trajectories", 4);
    const int n_seeds = ctx.get_or<int>("n_seeds", ctx.paper_scale ? 50 : 10);
    const auto families = ctx.get_or<std::vector<std::string>>("models", {"shplrnn", "rc"});
    const bool standardized_units = ctx.get_or<bool>("metrics.standardized_units", true);

    json summary;
    summary["families"] = json::object();
    std::map<std::string, std::vector<double>> e_stat_values, e_top_values;

    for (const std::string& family : families) {
        json per_seed = json::array();
        for (int s = 0; s < n_seeds; ++s) {
            const std::uint64_t run_seed = derive_seed(ctx.seed, family + "-run-" + std::to_string(s));
            TrainingData data = make_training_data(ctx, basins, run_seed, n_traj);
            TrainedModel trained = train_family(family, ctx, data, run_seed);

            const std::string tag = family + "_seed" + std::to_string(s);
            trained.save(sink.path("checkpoints/" + tag + ".json"));
            sink.path("checkpoints/" + tag + ".bin");
            if (!trained.loss.loss.empty()) write_loss_csv(trained.loss, sink.path("loss/" + tag + ".csv"));

            Grid grid = grid_from_cfg(ctx, default_grid(data.system_name));
            SystemFlow truth(data.system, data.integrator.record_interval);
            BasinLabeler labeler(data.system);
            const std::vector<int> labels = labeler.label_all(grid.points());
            EStatConfig stat_cfg =
                stat_config(ctx, data.system_name, standardized_units ? data.dataset.stats.std_dev : 1.0);
            MetricReport report =
                evaluate_model(truth, *trained.flow, grid, labels, stat_cfg, topo_config(ctx, data.system_name));
            report.write_json(sink.path("reports/" + tag + ".json"));
            report.write_csv(sink.path("reports/" + tag + ".csv"));

            e_stat_values[family].push_back(report.e_stat_total);
            e_top_values[family].push_back(report.e_top_total);
            json row;
            row["seed_index"] = s;
            row["e_stat"] = report.e_stat_total;
            row["e_top"] = report.e_top_total;
            for (const auto& [id, v] : report.e_stat_by_basin)
                row["e_stat_basin_" + std::to_string(id)] = v;
            per_seed.push_back(row);
        }
        write_ecdf_csv(ecdf(e_stat_values[family]), sink.path("ecdf/" + family + "_e_stat.csv"));
        write_ecdf_csv(ecdf(e_top_values[family]), sink.path("ecdf/" + family + "_e_top.csv"));
        summary["families"][family] = per_seed;
    }
    std::ofstream out(sink.path("summary.json"));
    out << summary.dump(2) << "\n";
}

inline void run_sample_size_sweep(const ExperimentContext& ctx, ArtifactSink& sink) {
    const auto counts = ctx.get_or<std::vector<int>>("sweep.trajectory_counts", {1, 2, 4, 8});
    json cells = json::array();
    std::ofstream csv(sink.path("cells.csv"));
    csv << "n_trajectories,coverage,e_stat,e_top\n";
    for (const std::string coverage : {"single", "both"}) {
        const std::vector<int> basins = coverage == "single" ? std::vector<int>{1} : std::vector<int>{1, 2};
        for (int n : counts) {
            const std::uint64_t run_seed = derive_seed(ctx.seed, coverage + "-" + std::to_string(n));
            TrainingData data = make_training_data(ctx, basins, run_seed, n);
            TrainedModel trained = train_family("shplrnn", ctx, data, run_seed);
            Grid grid = grid_from_cfg(ctx, default_grid(data.system_name));
            SystemFlow truth(data.system, data.integrator.record_interval);
            BasinLabeler labeler(data.system);
            MetricReport report = evaluate_model(truth, *trained.flow, grid, labeler.label_all(grid.points()),
                                                 stat_config(ctx, data.system_name, data.dataset.stats.std_dev),
                                                 topo_config(ctx, data.system_name));
            const std::string tag = coverage + "_" + std::to_string(n);
            report.write_json(sink.path("reports/" + tag + ".json"));
            report.write_csv(sink.path("reports/" + tag + ".csv"));
            csv << n << "," << coverage << "," << format_full(report.e_stat_total) << ","
                << format_full(report.e_top_total) << "\n";
            cells.push_back({{"n_trajectories", n},
                             {"coverage", coverage},
                             {"e_stat", report.e_stat_total},
                             {"e_top", report.e_top_total}});
        }
    }
    std::ofstream out(sink.path("summary.json"));
    out << json{{"cells", cells}}.dump(2) << "\n";
}

// Exact sample of the outer (algebraic) cycle of the two-cycle field: the
// unit circle traversed at angular speed -2. The cycle is unstable, so it is
// parameterized directly rather than integrated.
inline Trajectory outer_cycle_trajectory(double t_total, double dt) {
    const int n = static_cast<int>(std::llround(t_total / dt));
    Trajectory traj;
    traj.times.resize(n);
    traj.states.resize(n, 2);
    for (int k = 0; k < n; ++k) {
        const double t = k * dt;
        traj.times[k] = t;
        traj.states(k, 0) = std::cos(-2.0 * t);
        traj.states(k, 1) = std::sin(-2.0 * t);
    }
    traj.dt = dt;
    traj.system_id = "two-cycle";
    traj.initial_condition = traj.states.row(0);
    return traj;
}

inline Trajectory inner_cycle_trajectory(double t_total, double dt) {
    GroundTruthSystem sys = TwoCycleVF{};
    IntegratorConfig cfg;
    cfg.method = IntegratorMethod::Rk45;
    cfg.t_int = t_total;
    cfg.record_interval = dt;
    Vec x0(2);
    x0 << 0.6, 0.4;
    Trajectory traj = integrate(sys, x0, cfg);
    Trajectory sampled;  // drop the t = 0 row to match the outer parameterization length
    sampled.times = traj.times.tail(traj.length() - 1);
    sampled.states = traj.states.bottomRows(traj.length() - 1);
    sampled.dt = dt;
    sampled.system_id = "two-cycle";
    sampled.initial_condition = x0;
    return sampled;
}

inline void run_sindy_cycles(const ExperimentContext& ctx, ArtifactSink& sink) {
    const double t_total = ctx.get_or<double>("data.t_int", 100.0);
    const double dt = ctx.get_or<double>("data.dt", 0.01);
    const int degree = ctx.get_or<int>("library.poly_degree", 6);
    // learnability is checked on the low-degree library carrying the circle
    // invariant; high-degree monomials restricted to the small inner oval are
    // numerically dependent and would blur the algebraic/non-algebraic split
    const int check_degree = ctx.get_or<int>("library.check_degree", 2);
    STLSQConfig stlsq_cfg;
    stlsq_cfg.threshold = ctx.get_or<double>("stlsq.threshold", 0.01);
    stlsq_cfg.on_rank_deficient = STLSQConfig::RankPolicy::MinNorm;

    FunctionLibrary check_lib = polynomial_library(2, check_degree);
    FunctionLibrary lib = polynomial_library(2, degree);
    GroundTruthSystem sys = TwoCycleVF{};
    Grid grid = grid_from_cfg(ctx, default_grid("two-cycle"));
    SystemFlow truth(sys, dt);
    TopoConfig topo_cfg = topo_config(ctx, "two-cycle");

    json summary;
    for (const std::string which : {"inner", "outer"}) {
        Trajectory traj =
            which == "inner" ? inner_cycle_trajectory(t_total, dt) : outer_cycle_trajectory(t_total, dt);
        write_trajectory_csv(traj, sink.path("data/" + which + "_cycle.csv"));

        auto [learnable, nullspace_report] = is_strictly_learnable(traj, check_lib);
        {
            std::ofstream out(sink.path("identify/" + which + "_nullspace.json"));
            out << nullspace_report.to_json().dump(2) << "\n";
        }
        LibraryModel model = fit_sindy(traj, lib, stlsq_cfg);
        checkpoint::save_library_model(sink.path("checkpoints/" + which + ".json"), model, ctx.seed);
        sink.path("checkpoints/" + which + ".bin");
        LibraryFlow recon(model, dt);
        TopoResult topo = e_top(truth, recon, grid.points(), topo_cfg.eps_dh > 0.0 ? topo_cfg : [&] {
            TopoConfig c = topo_cfg;
            c.eps_dh = grid.volume() / grid.size();
            return c;
        }());
        summary[which] = {{"strictly_learnable", learnable},
                          {"kernel_dim", nullspace_report.kernel_dim},
                          {"e_top", topo.e_top}};
    }
    std::ofstream out(sink.path("summary.json"));
    out << summary.dump(2) << "\n";
}

inline void run_identifiability_demo(const ExperimentContext& ctx, ArtifactSink& sink) {
    const int degree = ctx.get_or<int>("library.poly_degree", 3);
    FunctionLibrary lib = polynomial_library(2, degree);
    json summary;

    {  // harmonic oscillator: the unit circle, algebraic
        GroundTruthSystem sys = HarmonicOscillator{};
        IntegratorConfig icfg;
        icfg.method = IntegratorMethod::Rk45;
        icfg.t_int = ctx.get_or<double>("data.circle_t", 6.28);
        icfg.record_interval = 0.01;
        Vec x0(2);
        x0 << 1.0, 0.0;
        Trajectory circle = integrate(sys, x0, icfg);
        write_trajectory_csv(circle, sink.path("data/circle.csv"));
        auto [learnable, report] = is_strictly_learnable(circle, lib);
        std::ofstream out(sink.path("identify/circle_nullspace.json"));
        out << report.to_json().dump(2) << "\n";
        FunctionLibrary restricted = restrict_library(lib, circle);
        summary["circle"] = {{"strictly_learnable", learnable},
                             {"kernel_dim", report.kernel_dim},
                             {"restricted_library", restricted.names()}};
    }
    {  // van der Pol limit cycle: non-algebraic
        GroundTruthSystem sys = VanDerPol{};
        IntegratorConfig icfg;
        icfg.t_int = 50.0;
        icfg.dt = 0.01;
        icfg.record_interval = 0.01;
        Vec x0(2);
        x0 << 2.0, 0.0;
        Trajectory full = integrate(sys, x0, icfg);
        Trajectory cycle;
        cycle.times = full.times.tail(2000);
        cycle.states = full.states.bottomRows(2000);
        cycle.dt = 0.01;
        cycle.system_id = "van-der-pol";
        cycle.initial_condition = cycle.states.row(0);
        write_trajectory_csv(cycle, sink.path("data/vdp_cycle.csv"));
        auto [learnable, report] = is_strictly_learnable(cycle, lib);
        std::ofstream out(sink.path("identify/vdp_nullspace.json"));
        out << report.to_json().dump(2) << "\n";
        summary["van_der_pol"] = {{"strictly_learnable", learnable}, {"kernel_dim", report.kernel_dim}};
    }
    std::ofstream out(sink.path("summary.json"));
    out << summary.dump(2) << "\n";
}

inline void run_entropy_sweep(const ExperimentContext& ctx, ArtifactSink& sink) {
    EntropySweepConfig cfg;
    cfg.latent_dim = ctx.get_or<int>("sweep.latent_dim", 2);
    cfg.hidden_dim = ctx.get_or<int>("sweep.hidden_dim", 100);
    cfg.obs_dim = cfg.latent_dim;
    cfg.scheme = ctx.get_or<std::string>("sweep.scheme", "glorot-uniform") == "glorot-normal"
                     ? InitScheme::GlorotNormal
                     : InitScheme::GlorotUniform;
    cfg.gains = ctx.get_or<std::vector<double>>("sweep.gains", {0.3, 0.6, 1.0, 1.5, 2.0});
    cfg.models_per_gain = ctx.get_or<int>("sweep.models_per_gain", 20);
    cfg.transient_steps = ctx.get_or<int>("sweep.transient_steps", 2000);
    cfg.tail_steps = ctx.get_or<int>("sweep.tail_steps", 200);
    cfg.bins = ctx.get_or<int>("sweep.bins", 64);
    cfg.seed = ctx.seed;
    cfg.jobs = ctx.jobs;
    Grid grid = grid_from_cfg(ctx, Grid::box2d(-5.0, 5.0, -5.0, 5.0, 10, 10));

    GainSweepResult result = entropy_gain_sweep(cfg, grid);
    std::ofstream csv(sink.path("entropies.csv"));
    csv << "gain,model_index,entropy\n";
    for (std::size_t g = 0; g < result.gains.size(); ++g)
        for (std::size_t k = 0; k < result.entropies[g].size(); ++k)
            csv << format_full(result.gains[g]) << "," << k << "," << format_full(result.entropies[g][k]) << "\n";
    json summary;
    summary["gains"] = result.gains;
    summary["mean_entropy"] = result.mean_entropy;
    summary["max_entropy"] = result.max_entropy;
    const bool constant =
        result.gains.size() < 2 ||
        std::all_of(result.mean_entropy.begin(), result.mean_entropy.end(),
                    [&](double v) { return v == result.mean_entropy.front(); });
    summary["spearman_mean_vs_gain"] =
        constant ? json(nullptr) : json(spearman_correlation(result.gains, result.mean_entropy));
    summary["bins"] = cfg.bins;
    std::ofstream out(sink.path("summary.json"));
    out << summary.dump(2) << "\n";
}

inline void run_retrain_unlearning(const ExperimentContext& ctx, ArtifactSink& sink) {
    const int n_models = ctx.get_or<int>("retrain.n_models", 5);
    const int n_traj = ctx.get_or<int>("data.n_trajectories", 4);
    const auto train_basins = ctx.get_or<std::vector<int>>("data.basins", {1, 2});

    json rows = json::array();
    std::ofstream csv(sink.path("fold_changes.csv"));
    csv << "seed_index,basin1_before,basin1_after,basin2_before,basin2_after,fold_basin1,fold_basin2\n";
    for (int s = 0; s < n_models; ++s) {
        const std::uint64_t run_seed = derive_seed(ctx.seed, "retrain-" + std::to_string(s));
        TrainingData data = make_training_data(ctx, train_basins, run_seed, n_traj);
        TrainedModel generalizing = train_family("shplrnn", ctx, data, run_seed);

        // basin-1 portion of the same dataset
        std::vector<Mat> basin1;
        BasinLabeler labeler(data.system);
        for (std::size_t k = 0; k < data.dataset.raw.size(); ++k)
            if (labeler.label(data.dataset.raw[k].initial_condition) == 1)
                basin1.push_back(data.dataset.standardized[k]);
        require(!basin1.empty(), "retrain: no basin-1 trajectories in the dataset");

        Grid grid = grid_from_cfg(ctx, default_grid(data.system_name));
        SystemFlow truth(data.system, data.integrator.record_interval);
        const std::vector<int> labels = labeler.label_all(grid.points());
        TrainConfig retrain_cfg = shplrnn_train_config(ctx, derive_seed(run_seed, "retrain"));
        EStatConfig stat_cfg = stat_config(ctx, data.system_name, data.dataset.stats.std_dev);

        RetrainReport report = retrain_unlearning(*generalizing.shplrnn, data.dataset.stats, truth, grid, labels,
                                                  basin1, retrain_cfg, stat_cfg);
        checkpoint::save_shplrnn(sink.path("checkpoints/generalizing_" + std::to_string(s) + ".json"),
                                 *generalizing.shplrnn, data.dataset.stats, run_seed);
        sink.path("checkpoints/generalizing_" + std::to_string(s) + ".bin");
        checkpoint::save_shplrnn(sink.path("checkpoints/retrained_" + std::to_string(s) + ".json"),
                                 report.retrained, data.dataset.stats, run_seed);
        sink.path("checkpoints/retrained_" + std::to_string(s) + ".bin");

        // a basin can be absent when the labeler resolves only one attractor
        auto stat_or_nan = [](const std::map<int, double>& m, int id) {
            const auto it = m.find(id);
            return it == m.end() ? std::numeric_limits<double>::quiet_NaN() : it->second;
        };
        const bool has_basin2 = report.e_stat_before.count(2) == 1;
        csv << s << "," << format_full(stat_or_nan(report.e_stat_before, 1)) << ","
            << format_full(stat_or_nan(report.e_stat_after, 1)) << ","
            << format_full(stat_or_nan(report.e_stat_before, 2)) << ","
            << format_full(stat_or_nan(report.e_stat_after, 2)) << "," << format_full(report.fold_change(1)) << ","
            << format_full(has_basin2 ? report.fold_change(2) : std::numeric_limits<double>::quiet_NaN()) << "\n";
        json row = {{"seed_index", s}, {"fold_basin1", report.fold_change(1)}};
        if (has_basin2) row["fold_basin2"] = report.fold_change(2);
        rows.push_back(row);
    }
    std::ofstream out(sink.path("summary.json"));
    out << json{{"models", rows}}.dump(2) << "\n";
}

inline void run_hessian_probe(const ExperimentContext& ctx, ArtifactSink& sink) {
    const int n_models = ctx.get_or<int>("hessian.n_models", 3);
    const int n_traj = ctx.get_or<int>("data.n_trajectories", 4);
    HessianConfig hessian_cfg;
    hessian_cfg.fd_step = ctx.get_or<double>("hessian.fd_step", 1e-4);
    hessian_cfg.zero_tol_rel = ctx.get_or<double>("hessian.zero_tol_rel", 1e-6);
    hessian_cfg.parameter_cap = ctx.get_or<int>("hessian.parameter_cap", 2500);
    hessian_cfg.jobs = ctx.jobs;

    std::ofstream csv(sink.path("eigendirections.csv"));
    csv << "seed_index,loss,positive,zero,negative,lambda_max,lambda_min,zero_tol\n";
    json rows = json::array();
    for (int s = 0; s < n_models; ++s) {
        const std::uint64_t run_seed = derive_seed(ctx.seed, "hessian-" + std::to_string(s));
        TrainingData data = make_training_data(ctx, {1, 2}, run_seed, n_traj);
        TrainedModel trained = train_family("shplrnn", ctx, data, run_seed);
        BasinLabeler labeler(data.system);
        std::vector<Mat> full, single;
        for (std::size_t k = 0; k < data.dataset.raw.size(); ++k) {
            full.push_back(data.dataset.standardized[k]);
            if (labeler.label(data.dataset.raw[k].initial_condition) == 1)
                single.push_back(data.dataset.standardized[k]);
        }
        const int seq_len = ctx.get_or<int>("train.seq_len", 100);
        const int tau = ctx.get_or<int>("train.tau", 15);
        json row = {{"seed_index", s}};
        for (const auto& [name, trajs] : std::vector<std::pair<std::string, std::vector<Mat>*>>{
                 {"full", &full}, {"single_basin", &single}}) {
            WindowLoss loss = WindowLoss::from_trajectories(*trajs, seq_len, tau);
            HessianReport report = hessian_eig_counts(*trained.shplrnn, loss, hessian_cfg);
            csv << s << "," << name << "," << report.positive << "," << report.zero << "," << report.negative
                << "," << format_full(report.lambda_max) << "," << format_full(report.lambda_min) << ","
                << format_full(report.zero_tol) << "\n";
            row[name] = {{"positive", report.positive},
                         {"zero", report.zero},
                         {"negative", report.negative},
                         {"lambda_max", report.lambda_max},
                         {"lambda_min", report.lambda_min}};
        }
        rows.push_back(row);
    }
    std::ofstream out(sink.path("summary.json"));
    out << json{{"models", rows}}.dump(2) << "\n";
}

inline void run_minima_radius(const ExperimentContext& ctx, ArtifactSink& sink) {
    const int n_pairs = ctx.get_or<int>("radius.n_pairs", 5);
    const int n_traj = ctx.get_or<int>("data.n_trajectories", 4);
    const double match_tol = ctx.get_or<double>("radius.match_tolerance", 0.2);
    RadiusConfig radius_cfg;
    radius_cfg.directions = ctx.get_or<int>("radius.directions", 200);
    radius_cfg.r_max = ctx.get_or<double>("radius.r_max", 1.0);
    radius_cfg.seed = derive_seed(ctx.seed, "radius-directions");
    radius_cfg.jobs = ctx.jobs;

    // train candidate pools; the shared loss is the basin-1 data of the
    // single-basin run
    struct Candidate {
        ShPLRNN model;
        double shared_loss = 0.0;
        WindowLoss loss;
    };
    const int pool = ctx.get_or<int>("radius.pool", n_pairs + 2);
    const int seq_len = ctx.get_or<int>("train.seq_len", 100);
    const int tau = ctx.get_or<int>("train.tau", 15);
    std::vector<Candidate> singles, boths;
    for (int s = 0; s < pool; ++s) {
        const std::uint64_t seed_single = derive_seed(ctx.seed, "radius-single-" + std::to_string(s));
        TrainingData sdata = make_training_data(ctx, {1}, seed_single, n_traj);
        TrainedModel strained = train_family("shplrnn", ctx, sdata, seed_single);
        WindowLoss shared = WindowLoss::from_trajectories(sdata.dataset.standardized, seq_len, tau);
        singles.push_back({*strained.shplrnn, shared.eval(*strained.shplrnn), shared});

        const std::uint64_t seed_both = derive_seed(ctx.seed, "radius-both-" + std::to_string(s));
        TrainingData bdata = make_training_data(ctx, {1, 2}, seed_both, n_traj);
        TrainedModel btrained = train_family("shplrnn", ctx, bdata, seed_both);
        // evaluated on the single-basin loss for matching
        boths.push_back({*btrained.shplrnn, shared.eval(*btrained.shplrnn), shared});
    }

    // greedy matched-loss pairing within the tolerance
    std::vector<std::pair<int, int>> pairs;
    std::vector<bool> used(boths.size(), false);
    for (std::size_t i = 0; i < singles.size() && pairs.size() < static_cast<std::size_t>(n_pairs); ++i) {
        int best = -1;
        double best_gap = match_tol;
        for (std::size_t j = 0; j < boths.size(); ++j) {
            if (used[j]) continue;
            const double gap = std::abs(boths[j].shared_loss - singles[i].shared_loss) /
                               std::max(singles[i].shared_loss, 1e-12);
            if (gap < best_gap) {
                best_gap = gap;
                best = static_cast<int>(j);
            }
        }
        if (best >= 0) {
            used[best] = true;
            pairs.emplace_back(static_cast<int>(i), best);
        }
    }

    json summary;
    summary["pairs_matched"] = pairs.size();
    std::ofstream csv(sink.path("radii.csv"));
    csv << "pair,p_th,model,median_radius,mean_radius,log_volume_bound,saturated\n";
    std::vector<double> medians_single_5, medians_both_5, medians_single_1, medians_both_1;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto& [si, bi] = pairs[p];
        for (double p_th : {0.05, 0.01}) {
            RadiusConfig rc = radius_cfg;
            rc.p_th = p_th;
            for (const auto& [label, cand] : std::vector<std::pair<std::string, const Candidate*>>{
                     {"single", &singles[si]}, {"both", &boths[bi]}}) {
                RadiusReport report = minima_radius(cand->model, cand->loss, rc);
                int saturated = 0;
                for (const auto& sample : report.samples) saturated += sample.saturated ? 1 : 0;
                csv << p << "," << p_th << "," << label << "," << format_full(report.median_radius) << ","
                    << format_full(report.mean_radius) << "," << format_full(report.log_volume_bound) << ","
                    << saturated << "\n";
                if (p_th == 0.05)
                    (label == "single" ? medians_single_5 : medians_both_5).push_back(report.median_radius);
                else
                    (label == "single" ? medians_single_1 : medians_both_1).push_back(report.median_radius);
            }
        }
    }
    auto pooled_median = [](std::vector<double> v) { return v.empty() ? 0.0 : detail::median_of(std::move(v)); };
    summary["median_radius"] = {{"p05", {{"single", pooled_median(medians_single_5)},
                                         {"both", pooled_median(medians_both_5)}}},
                                {"p01", {{"single", pooled_median(medians_single_1)},
                                         {"both", pooled_median(medians_both_1)}}}};
    std::ofstream out(sink.path("summary.json"));
    out << summary.dump(2) << "\n";
}

inline void run_learnability_ecdf(const ExperimentContext& ctx, ArtifactSink& sink) {
    const int n_runs = ctx.get_or<int>("n_runs", ctx.paper_scale ? 50 : 10);
    const auto basins = ctx.get_or<std::vector<int>>("data.basins", {1});
    const int n_traj = ctx.get_or<int>("data.n_trajectories", 4);
    const std::string family = ctx.get_or<std::string>("model", "shplrnn");

    LearnabilityResult result = learnability_ecdf(n_runs, ctx.jobs, [&](int run_index) {
        ExperimentContext local = ctx;
        local.jobs = 1;  // runs are parallel; inner evaluation stays serial
        const std::uint64_t run_seed = derive_seed(ctx.seed, "ecdf-run-" + std::to_string(run_index));
        TrainingData data = make_training_data(local, basins, run_seed, n_traj);
        TrainedModel trained = train_family(family, local, data, run_seed);
        Grid grid = grid_from_cfg(local, default_grid(data.system_name));
        SystemFlow truth(data.system, data.integrator.record_interval);
        BasinLabeler labeler(data.system);
        MetricReport report = evaluate_model(truth, *trained.flow, grid, labeler.label_all(grid.points()),
                                             stat_config(local, data.system_name, data.dataset.stats.std_dev),
                                             topo_config(local, data.system_name));
        return std::pair<double, double>{report.e_stat_total, report.e_top_total};
    });

    write_ecdf_csv(result.e_stat_ecdf(), sink.path("e_stat_ecdf.csv"));
    write_ecdf_csv(result.e_top_ecdf(), sink.path("e_top_ecdf.csv"));
    json summary;
    summary["n_runs"] = n_runs;
    summary["failed_runs"] = result.failed_runs;
    summary["failure_messages"] = result.failure_messages;
    summary["e_stat"] = result.e_stat_values;
    summary["e_top"] = result.e_top_values;
    std::ofstream out(sink.path("summary.json"));
    out << summary.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// dispatch

inline const std::vector<std::string>& experiment_tags() {
    static const std::vector<std::string> tags = {
        "duffing-oodg",     "lorenz-oodg",        "full-state-control", "sample-size-sweep",
        "sindy-cycles",     "identifiability-demo", "entropy-sweep",    "retrain-unlearning",
        "minima-radius",    "hessian-probe",      "learnability-ecdf"};
    return tags;
}

inline RunManifest run_experiment(json doc, const std::string& out_root) {
    const std::string tag = cfg::get_required<std::string>(doc, "experiment");
    const auto& tags = experiment_tags();
    if (std::find(tags.begin(), tags.end(), tag) == tags.end())
        throw ValidationError("experiment: unknown tag '" + tag + "'");
    require(cfg::find(doc, "seed") != nullptr, "seed: missing required field (no unseeded runs)");

    ExperimentContext ctx;
    ctx.doc = doc;
    ctx.paper_scale = cfg::get_or<bool>(doc, "paper_scale", false);
    ctx.jobs = cfg::get_or<int>(doc, "jobs", 1);
    ctx.seed = cfg::get_required<std::uint64_t>(doc, "seed");

    const std::string out_dir = cfg::get_or<std::string>(doc, "output", (fs::path(out_root) / tag).string());
    ArtifactSink sink(out_dir);

    RunManifest manifest;
    manifest.doc["experiment"] = tag;
    manifest.doc["config"] = doc;
    manifest.doc["tool_version"] = kToolVersion;
    manifest.doc["failure"] = nullptr;
    const auto start = std::chrono::steady_clock::now();
    try {
        if (tag == "duffing-oodg" || tag == "lorenz-oodg") {
            if (tag == "lorenz-oodg" && !doc.contains("data")) ctx.doc["data"]["system"] = "lorenz-like";
            run_oodg_benchmark(ctx, sink);
        } else if (tag == "full-state-control") {
            ctx.doc["data"]["basins"] = {1, 2};
            if (!ctx.doc.contains("models")) ctx.doc["models"] = {"shplrnn", "rc", "node"};
            if (cfg::find(ctx.doc, "n_seeds") == nullptr) ctx.doc["n_seeds"] = 1;
            run_oodg_benchmark(ctx, sink);
        } else if (tag == "sample-size-sweep") {
            run_sample_size_sweep(ctx, sink);
        } else if (tag == "sindy-cycles") {
            run_sindy_cycles(ctx, sink);
        } else if (tag == "identifiability-demo") {
            run_identifiability_demo(ctx, sink);
        } else if (tag == "entropy-sweep") {
            run_entropy_sweep(ctx, sink);
        } else if (tag == "retrain-unlearning") {
            run_retrain_unlearning(ctx, sink);
        } else if (tag == "minima-radius") {
            run_minima_radius(ctx, sink);
        } else if (tag == "hessian-probe") {
            run_hessian_probe(ctx, sink);
        } else if (tag == "learnability-ecdf") {
            run_learnability_ecdf(ctx, sink);
        }
    } catch (const std::exception& e) {
        manifest.doc["failure"] = {{"stage", tag}, {"message", e.what()}};
    }
    manifest.doc["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    manifest.doc["artifacts"] = sink.artifacts_json();
    manifest.write((fs::path(out_dir) / "manifest.json").string());
    return manifest;
}

}  // namespace dsr::exp
