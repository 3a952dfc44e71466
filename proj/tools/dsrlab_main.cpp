#include <CLI11.hpp>
#include <iostream>

#include "dsr/exp/experiments.hpp"

namespace {

using namespace dsr;
namespace fs = std::filesystem;
using nlohmann::json;

std::string out_root() {
    const char* env = std::getenv("DSRLAB_OUT_ROOT");
    return env != nullptr ? env : "runs";
}

// Grid spec of the form "(-5,5)x(-2,2):10x10".
Grid parse_grid_spec(const std::string& spec) {
    const std::size_t colon = spec.find(':');
    require(colon != std::string::npos, "grid spec: expected '(lo,hi)x...:NxM', got '" + spec + "'");
    const std::string box = spec.substr(0, colon);
    const std::string counts = spec.substr(colon + 1);

    std::vector<double> lo, hi;
    std::size_t pos = 0;
    while (pos < box.size()) {
        require(box[pos] == '(', "grid spec: expected '(' in '" + spec + "'");
        const std::size_t close = box.find(')', pos);
        require(close != std::string::npos, "grid spec: unbalanced parentheses in '" + spec + "'");
        const std::string pair = box.substr(pos + 1, close - pos - 1);
        const std::size_t comma = pair.find(',');
        require(comma != std::string::npos, "grid spec: expected 'lo,hi' in '" + spec + "'");
        lo.push_back(std::stod(pair.substr(0, comma)));
        hi.push_back(std::stod(pair.substr(comma + 1)));
        pos = close + 1;
        if (pos < box.size()) {
            require(box[pos] == 'x', "grid spec: expected 'x' between boxes in '" + spec + "'");
            ++pos;
        }
    }
    Grid g;
    g.lo = Eigen::Map<Vec>(lo.data(), static_cast<Eigen::Index>(lo.size()));
    g.hi = Eigen::Map<Vec>(hi.data(), static_cast<Eigen::Index>(hi.size()));
    std::stringstream count_stream(counts);
    std::string tok;
    while (std::getline(count_stream, tok, 'x')) g.counts.push_back(std::stoi(tok));
    g.check();
    require(static_cast<int>(g.counts.size()) == g.dim(), "grid spec: counts do not match box dimension");
    return g;
}

std::unique_ptr<Flow> flow_from_checkpoint(const std::string& path, double dt) {
    const std::string family = checkpoint::family_of(path);
    if (family == "shplrnn") {
        auto loaded = checkpoint::load_shplrnn(path);
        return std::make_unique<ShplrnnFlow>(loaded.model, loaded.stats, dt);
    }
    if (family == "reservoir") {
        auto loaded = checkpoint::load_reservoir(path);
        return std::make_unique<RcFlow>(loaded.reservoir, loaded.stats, dt);
    }
    if (family == "mlp-ode") {
        auto loaded = checkpoint::load_mlp(path);
        return std::make_unique<NodeFlow>(loaded.field, loaded.stats, dt);
    }
    if (family == "library") {
        return std::make_unique<LibraryFlow>(checkpoint::load_library_model(path), dt);
    }
    throw ValidationError("checkpoint: unknown family '" + family + "'");
}

int cmd_simulate(const std::string& system_name, const std::vector<std::string>& ic_strings, double t_int,
                 double dt, double record_interval, const std::string& method, std::uint64_t seed,
                 const std::string& out_dir) {
    GroundTruthSystem sys = system_from_name(system_name);
    IntegratorConfig cfg;
    cfg.method = method == "rk45" ? IntegratorMethod::Rk45 : IntegratorMethod::Rk4;
    cfg.t_int = t_int;
    cfg.dt = dt;
    cfg.record_interval = record_interval;

    std::vector<Vec> ics;
    for (const std::string& s : ic_strings) {
        std::vector<double> vals;
        std::stringstream stream(s);
        std::string tok;
        while (std::getline(stream, tok, ',')) vals.push_back(std::stod(tok));
        require(static_cast<int>(vals.size()) == system_dim(sys),
                "--ic '" + s + "': expected " + std::to_string(system_dim(sys)) + " components");
        ics.push_back(Eigen::Map<Vec>(vals.data(), static_cast<Eigen::Index>(vals.size())));
    }
    require(!ics.empty(), "simulate: provide at least one --ic");
    Dataset ds = generate_dataset(sys, ics, cfg);
    write_dataset_bundle(out_dir, ds, seed, cfg);
    std::cout << "wrote " << ds.raw.size() << " trajectories (" << ds.raw.front().length() << " rows each) to "
              << out_dir << "\n";
    if (!ds.excluded.empty()) std::cout << ds.excluded.size() << " divergent trajectories excluded\n";
    return 0;
}

int cmd_train(const std::string& data_dir, const std::string& family, const std::string& config_path,
              const std::vector<std::string>& overrides, std::uint64_t seed, const std::string& out_dir) {
    json doc = config_path.empty() ? json::object() : cfg::load_json_file(config_path);
    for (const auto& o : overrides) cfg::apply_override(doc, o);

    LoadedBundle bundle = read_dataset_bundle(data_dir);
    exp::ExperimentContext ctx;
    ctx.doc = doc;
    ctx.paper_scale = cfg::get_or<bool>(doc, "paper_scale", false);
    ctx.jobs = cfg::get_or<int>(doc, "jobs", 1);
    ctx.seed = seed;

    exp::TrainingData data;
    data.system_name = bundle.system_id;
    data.system = system_from_name(bundle.system_id);
    data.integrator.record_interval = bundle.dt;
    data.integrator.dt = bundle.dt;
    data.dataset.raw = bundle.raw;
    data.dataset.standardized = bundle.standardized;
    data.dataset.stats = bundle.stats;
    data.dataset.system_id = bundle.system_id;

    exp::TrainedModel trained = exp::train_family(family, ctx, data, seed);
    fs::create_directories(out_dir);
    trained.save((fs::path(out_dir) / "checkpoint.json").string());
    if (!trained.loss.loss.empty()) {
        write_loss_csv(trained.loss, (fs::path(out_dir) / "loss.csv").string());
        std::cout << "final training loss " << trained.loss.final_loss << "\n";
    }
    std::cout << "checkpoint written to " << out_dir << "\n";
    return 0;
}

int cmd_evaluate(const std::string& system_name, const std::string& checkpoint_path, const std::string& grid_spec,
                 double dt, std::uint64_t seed, bool standardized, const std::string& out_dir, int jobs) {
    GroundTruthSystem sys = system_from_name(system_name);
    if (dt <= 0.0) dt = exp::default_record_dt(system_name);
    Grid grid = grid_spec.empty() ? exp::default_grid(system_name) : parse_grid_spec(grid_spec);

    std::unique_ptr<Flow> model = flow_from_checkpoint(checkpoint_path, dt);
    SystemFlow truth(sys, dt);
    BasinLabeler labeler(sys);
    const std::vector<int> labels = labeler.label_all(grid.points());

    exp::ExperimentContext ctx;
    ctx.jobs = jobs;
    ctx.seed = seed;
    double unit_scale = 1.0;
    if (standardized && checkpoint::family_of(checkpoint_path) != "library") {
        std::ifstream in(checkpoint_path);
        json manifest = json::parse(in);
        unit_scale = manifest.at("standardization").at("std").get<double>();
    }
    MetricReport report = evaluate_model(truth, *model, grid, labels, exp::stat_config(ctx, system_name, unit_scale),
                                         exp::topo_config(ctx, system_name));
    fs::create_directories(out_dir);
    report.write_json((fs::path(out_dir) / "report.json").string());
    report.write_csv((fs::path(out_dir) / "report.csv").string());
    std::cout << "E_stat = " << report.e_stat_total << "  E_top = " << report.e_top_total << "\n";
    return 0;
}

int cmd_identify(const std::string& trajectory_path, const std::string& library_spec, double tol_rel,
                 bool restrict, const std::string& out_path) {
    Trajectory traj = read_trajectory_csv(trajectory_path);
    json spec;
    try {
        spec = json::parse(library_spec);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("--library: ") + e.what());
    }
    FunctionLibrary lib = library_from_spec(traj.dim(), spec);
    auto [learnable, report] = is_strictly_learnable(traj, lib, tol_rel);
    json out = report.to_json();
    out["strictly_learnable"] = learnable;
    if (restrict) {
        FunctionLibrary restricted = restrict_library(lib, traj, tol_rel);
        out["restricted_library"] = restricted.names();
        out["removed"] = lib.size() - restricted.size();
    }
    if (out_path.empty()) {
        std::cout << out.dump(2) << "\n";
    } else {
        std::ofstream file(out_path);
        require(file.good(), "cannot open for writing: " + out_path);
        file << out.dump(2) << "\n";
        std::cout << "kernel_dim = " << report.kernel_dim << " (report written to " << out_path << ")\n";
    }
    return 0;
}

int run_config(json doc, const std::vector<std::string>& overrides, bool paper_scale, int jobs) {
    for (const auto& o : overrides) cfg::apply_override(doc, o);
    if (paper_scale) doc["paper_scale"] = true;
    if (jobs > 0) doc["jobs"] = jobs;
    exp::RunManifest manifest = exp::run_experiment(doc, out_root());
    const std::string dir = cfg::get_or<std::string>(
        manifest.doc["config"], "output",
        (fs::path(out_root()) / manifest.doc["experiment"].get<std::string>()).string());
    if (manifest.failed()) {
        std::cerr << "experiment failed: " << manifest.doc["failure"]["message"].get<std::string>() << "\n"
                  << "partial outputs and failure record in " << dir << "\n";
        return 3;
    }
    std::cout << "experiment complete; outputs in " << dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dynamical systems reconstruction toolkit: simulation, training, "
                 "out-of-domain generalization metrics, identifiability checks, and "
                 "loss-landscape probes"};
    app.require_subcommand(1);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "integrate a ground-truth system into a dataset bundle");
    std::string sim_system = "duffing", sim_method = "rk45", sim_out = "dataset";
    std::vector<std::string> sim_ics;
    double sim_t_int = -1.0, sim_dt = -1.0, sim_record = -1.0;
    std::uint64_t sim_seed = 0;
    simulate->add_option("--system", sim_system, "system tag (duffing, lorenz-like, lorenz96, ...)");
    simulate->add_option("--ic", sim_ics, "initial condition as comma-separated components (repeatable)");
    simulate->add_option("--t-int", sim_t_int, "total integration time (default per system)");
    simulate->add_option("--dt", sim_dt, "fixed integrator step (rk4; defaults to the record interval)");
    simulate->add_option("--record-interval", sim_record, "read-out interval (default per system)");
    simulate->add_option("--method", sim_method, "rk4 | rk45")->check(CLI::IsMember({"rk4", "rk45"}));
    simulate->add_option("--seed", sim_seed, "seed recorded in the sidecar");
    simulate->add_option("--out", sim_out, "output bundle directory");

    // train
    auto* train = app.add_subcommand("train", "fit a reconstruction model on a dataset bundle");
    std::string train_data, train_family = "shplrnn", train_config, train_out = "model";
    std::vector<std::string> train_sets;
    std::uint64_t train_seed = 0;
    train->add_option("--data", train_data, "dataset bundle directory")->required();
    train->add_option("--family", train_family, "shplrnn | rc | node")
        ->check(CLI::IsMember({"shplrnn", "rc", "node"}));
    train->add_option("--config", train_config, "training config JSON");
    train->add_option("--set", train_sets, "config override path=value (repeatable)");
    train->add_option("--seed", train_seed, "training seed")->required();
    train->add_option("--out", train_out, "output directory");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "metric report for a checkpoint against a ground truth");
    std::string eval_system = "duffing", eval_ckpt, eval_grid, eval_out = "report";
    double eval_dt = -1.0;
    std::uint64_t eval_seed = 0;
    bool eval_standardized = false;
    int eval_jobs = 1;
    evaluate->add_option("--system", eval_system, "ground-truth system tag");
    evaluate->add_option("--checkpoint", eval_ckpt, "model checkpoint manifest")->required();
    evaluate->add_option("--grid", eval_grid, "grid spec '(-5,5)x(-2,2):10x10' (default per system)");
    evaluate->add_option("--dt", eval_dt, "rollout sampling interval (default per system)");
    evaluate->add_option("--seed", eval_seed, "direction-sampling seed");
    evaluate->add_flag("--standardized", eval_standardized, "report distances in standardized units");
    evaluate->add_option("--jobs", eval_jobs, "worker threads");
    evaluate->add_option("--out", eval_out, "output directory");

    // identify
    auto* identify = app.add_subcommand("identify", "algebraic-trajectory nullspace check");
    std::string id_traj, id_library = R"({"poly_degree": 3})", id_out;
    double id_tol = -1.0;
    bool id_restrict = false;
    identify->add_option("--trajectory", id_traj, "trajectory CSV")->required();
    identify->add_option("--library", id_library, "library spec JSON, e.g. {\"poly_degree\": 3}");
    identify->add_option("--tol", id_tol, "relative kernel tolerance (default 1e-8 sqrt(T))");
    identify->add_flag("--restrict", id_restrict, "also compute a strictly learnable sub-library");
    identify->add_option("--out", id_out, "report path (stdout when omitted)");

    // landscape
    auto* landscape = app.add_subcommand("landscape", "loss-landscape probes");
    std::string ls_probe, ls_config;
    std::vector<std::string> ls_sets;
    bool ls_paper = false;
    int ls_jobs = 0;
    landscape->add_option("--probe", ls_probe, "entropy | radius | hessian | retrain | ecdf")
        ->required()
        ->check(CLI::IsMember({"entropy", "radius", "hessian", "retrain", "ecdf"}));
    landscape->add_option("--config", ls_config, "probe config JSON");
    landscape->add_option("--set", ls_sets, "config override path=value (repeatable)");
    landscape->add_flag("--paper-scale", ls_paper, "restore the full-scale hyperparameter tables");
    landscape->add_option("--jobs", ls_jobs, "worker threads");

    // run
    auto* run = app.add_subcommand("run", "run a named experiment from a config file");
    std::string run_config_path;
    std::vector<std::string> run_sets;
    bool run_paper = false;
    int run_jobs = 0;
    run->add_option("--config", run_config_path, "experiment config JSON")->required();
    run->add_option("--set", run_sets, "config override path=value (repeatable)");
    run->add_flag("--paper-scale", run_paper, "restore the full-scale hyperparameter tables");
    run->add_option("--jobs", run_jobs, "worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (simulate->parsed()) {
            if (sim_t_int <= 0.0) sim_t_int = dsr::exp::default_t_int(sim_system);
            if (sim_record <= 0.0) sim_record = dsr::exp::default_record_dt(sim_system);
            if (sim_dt <= 0.0) sim_dt = sim_record;
            return cmd_simulate(sim_system, sim_ics, sim_t_int, sim_dt, sim_record, sim_method, sim_seed, sim_out);
        }
        if (train->parsed())
            return cmd_train(train_data, train_family, train_config, train_sets, train_seed, train_out);
        if (evaluate->parsed())
            return cmd_evaluate(eval_system, eval_ckpt, eval_grid, eval_dt, eval_seed, eval_standardized, eval_out,
                                eval_jobs);
        if (identify->parsed()) return cmd_identify(id_traj, id_library, id_tol, id_restrict, id_out);
        if (landscape->parsed()) {
            static const std::map<std::string, std::string> probe_tags = {
                {"entropy", "entropy-sweep"},
                {"radius", "minima-radius"},
                {"hessian", "hessian-probe"},
                {"retrain", "retrain-unlearning"},
                {"ecdf", "learnability-ecdf"}};
            json doc = ls_config.empty() ? json::object() : dsr::cfg::load_json_file(ls_config);
            doc["experiment"] = probe_tags.at(ls_probe);
            if (!doc.contains("seed")) doc["seed"] = 0;
            return run_config(doc, ls_sets, ls_paper, ls_jobs);
        }
        if (run->parsed())
            return run_config(dsr::cfg::load_json_file(run_config_path), run_sets, run_paper, run_jobs);
    } catch (const dsr::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const dsr::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
