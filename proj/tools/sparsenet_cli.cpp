#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sparsenet/analysis.hpp"
#include "sparsenet/experiments.hpp"
#include "sparsenet/io.hpp"
#include "sparsenet/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sparsenet;

namespace {

struct TrainArgs {
  std::string config;
  std::string data;
  std::string init;
  std::string out;
  std::string penalty;
  std::optional<double> alpha;
  std::optional<double> gamma;
  std::optional<int> n_trial;
  std::optional<int> T;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

struct ExperimentArgs {
  std::string name;
  std::string out = "results";
  std::uint64_t seed = 0;
  int threads = 1;
  bool smoke = false;
  std::optional<double> alpha;
  std::optional<double> gamma;
  std::optional<int> n_trial;
  std::optional<int> T;
};

struct CheckArgs {
  std::string network;
  std::string data;
  double alpha = 0.0;
  std::string penalty = "l1";
  std::optional<double> gamma;
  std::optional<double> w_norm;
  std::vector<double> radial_center;
  int samples = 10000;
  double tol = 1e-2;
  std::uint64_t seed = 0x5eed;
  int threads = 1;
};

struct ExportArgs {
  std::string network;
  std::string data;
  std::string out = "dual";
  int angles = 360;
  int grid = 101;
  double radius = 3.0;
};

struct GenerateArgs {
  std::string preset;
  std::string target = "gauss_sin";
  std::string sampling = "grid_1d";
  int size = 1000;
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> center{0.1, 0.1};
  std::string out;
};

PenaltySpec parse_penalty(const std::string& kind, std::optional<double> gamma) {
  json j{{"kind", kind}};
  if (gamma) j["gamma"] = *gamma;
  else if (kind != "l1") throw std::invalid_argument("penalty '" + kind + "' needs --gamma");
  return j.get<PenaltySpec>();
}

Dataset load_dataset(const json& spec, const fs::path& base) {
  if (spec.contains("csv")) {
    fs::path p = spec.at("csv").get<std::string>();
    if (p.is_relative() && !base.empty()) p = base / p;
    return load_csv(p.string());
  }
  if (spec.contains("synthetic")) return generate(spec.at("synthetic").get<SyntheticSpec>());
  throw std::invalid_argument("config 'data' needs a 'csv' path or a 'synthetic' block");
}

int cmd_train(const TrainArgs& args) {
  json config = json::object();
  fs::path base;
  if (!args.config.empty()) {
    config = read_json_file(args.config);
    base = fs::path(args.config).parent_path();
  }
  if (!args.data.empty()) config["data"] = {{"csv", fs::absolute(args.data).string()}};
  if (!args.init.empty()) config["init"] = fs::absolute(args.init).string();
  if (!args.out.empty()) config["out"] = args.out;
  if (!config.contains("data")) throw std::invalid_argument("no dataset given (use --data or a config file)");
  if (!config.contains("out")) throw std::invalid_argument("no output directory given (use --out)");

  json& alg = config["algorithm"];
  if (alg.is_null()) alg = json::object();
  if (args.alpha) alg["alpha"] = *args.alpha;
  if (args.T) alg["T"] = *args.T;
  if (args.seed) alg["seed"] = *args.seed;
  if (args.n_trial) alg["insertion"]["n_trial"] = *args.n_trial;
  if (args.threads) alg["insertion"]["threads"] = *args.threads;
  if (!args.penalty.empty() || args.gamma) {
    json pen = alg.value("penalty", json{{"kind", "l1"}});
    if (!args.penalty.empty()) pen["kind"] = args.penalty;
    if (args.gamma) pen["gamma"] = *args.gamma;
    if (pen.at("kind") != "l1" && !pen.contains("gamma")) {
      throw std::invalid_argument("penalty '" + pen.at("kind").get<std::string>() + "' needs --gamma");
    }
    alg["penalty"] = pen;
  }

  const Dataset data = load_dataset(config.at("data"), base);
  AlgorithmConfig cfg = alg.get<AlgorithmConfig>();
  cfg.final_check.threads = cfg.insertion.threads;
  if (config.contains("init")) {
    fs::path p = config.at("init").get<std::string>();
    if (p.is_relative() && !base.empty()) p = base / p;
    cfg.init = load_network_csv(p.string());
    if (cfg.init->dim() != data.dim()) {
      throw std::invalid_argument("initial network has d=" + std::to_string(cfg.init->dim()) +
                                  " but the dataset has d=" + std::to_string(data.dim()));
    }
  }

  auto [net, report] = run_algorithm1(data, cfg);

  const fs::path out = config.at("out").get<std::string>();
  fs::create_directories(out);
  save_network_csv(net, (out / "network.csv").string());
  save_predictions_csv(net, data, (out / "predictions.csv").string());
  json resolved = config;
  resolved["algorithm"] = cfg;
  const json meta{{"seed", cfg.seed}, {"alpha", cfg.alpha}, {"penalty", cfg.penalty}, {"config", resolved}};
  write_json_file(network_to_json(net, meta), (out / "network.json").string());

  json summary{{"seed", cfg.seed},
               {"config", resolved},
               {"width", net.width()},
               {"K", data.size()},
               {"loss", loss_value(net, data)},
               {"objective", loss_value(net, data) + cfg.alpha * total_penalty(cfg.penalty, net.weights())},
               {"representer_pass", representer_check(net, data)},
               {"report", report}};
  if (data.clean) summary["error"] = rms_error(net, data, *data.clean);
  write_json_file(summary, (out / "report.json").string());
  std::cout << "width " << net.width() << ", loss " << loss_value(net, data) << ", stationarity "
            << (report.final_stationarity.pass ? "pass" : "fail") << "\n";
  return 0;
}

int cmd_experiment(const ExperimentArgs& args) {
  ExperimentOptions options;
  options.seed = args.seed;
  options.threads = args.threads;
  options.smoke = args.smoke;
  options.alpha = args.alpha;
  options.gamma = args.gamma;
  options.n_trial = args.n_trial;
  options.T = args.T;
  const ExperimentSummary summary = run_experiment(args.name, options);
  write_summary(summary, args.out);
  for (const PresetRow& r : summary.rows) {
    std::cout << r.label << ": nodes " << r.nodes << ", error " << r.error << "\n";
  }
  return 0;
}

int cmd_check(const CheckArgs& args) {
  const ShallowNet net = load_network_csv(args.network);
  const Dataset data = load_csv(args.data);
  if (net.dim() != data.dim()) {
    throw std::invalid_argument("network has d=" + std::to_string(net.dim()) + " but the dataset has d=" +
                                std::to_string(data.dim()));
  }
  if (!(args.alpha > 0.0)) throw std::invalid_argument("--alpha must be positive");
  const PenaltySpec spec = parse_penalty(args.penalty, args.gamma);
  StationarityOptions opts;
  opts.n_samples = args.samples;
  opts.tol = args.tol;
  opts.seed = args.seed;
  opts.threads = args.threads;
  const StationarityReport rep = check_stationarity(net, data, spec, args.alpha, opts);
  const bool representer = representer_check(net, data);
  bool ok = rep.pass && representer;

  json out{{"stationarity", rep}, {"representer_pass", representer}, {"width", net.width()}, {"K", data.size()}};
  if (!rep.node_pass) {
    out["per_node_residual"] =
        std::vector<double>(rep.per_node_residual.data(), rep.per_node_residual.data() + rep.per_node_residual.size());
  }
  if (!args.radial_center.empty() || args.w_norm) {
    Vector clean = data.ys;
    double w_norm = args.w_norm.value_or(0.0);
    if (!args.radial_center.empty()) {
      if (args.radial_center.size() != 2 || data.dim() != 2) {
        throw std::invalid_argument("--radial-center needs two values and 2D data");
      }
      const Target target{TargetKind::RadialNorm, {args.radial_center[0], args.radial_center[1]}};
      clean = eval_target(target, data.xs);
      if (!args.w_norm) w_norm = wnorm_radial_2d(target.center, 4096);
    }
    const double gap = fidelity_gap(net, data, clean, data.ys, args.alpha, w_norm);
    out["w_norm"] = w_norm;
    out["fidelity_gap"] = gap;
    out["fidelity_pass"] = gap <= 0.0;
    ok = ok && gap <= 0.0;
  }
  std::cout << out.dump(2) << "\n";
  if (!representer) std::cerr << "representer check failed: N=" << net.width() << " > K=" << data.size() << "\n";
  return ok ? 0 : 1;
}

int cmd_export_dual(const ExportArgs& args) {
  const ShallowNet net = load_network_csv(args.network);
  const Dataset data = load_csv(args.data);
  if (net.dim() != data.dim()) throw std::invalid_argument("network and dataset dimensions differ");
  if (data.dim() > 2) throw std::invalid_argument("dual export supports d = 1 or d = 2, got d=" + std::to_string(data.dim()));
  fs::create_directories(args.out);
  const fs::path out(args.out);
  if (data.dim() == 1) {
    export_dual_angular(net, data, args.angles, (out / "dual.csv").string());
  } else {
    export_dual_chart(net, data, args.grid, args.radius, (out / "dual.csv").string());
  }
  export_dual_nodes(net, data, (out / "nodes.csv").string());
  return 0;
}

int cmd_generate(const GenerateArgs& args) {
  Dataset data;
  if (!args.preset.empty()) {
    ExperimentOptions opts;
    opts.seed = args.seed;
    data = preset_dataset(args.preset, opts);
  } else {
    json j{{"target", args.target}, {"sampling", args.sampling}, {"size", args.size}, {"noise_sigma", args.noise},
           {"seed", args.seed}};
    if (args.center.size() != 2) throw std::invalid_argument("--center needs two values");
    j["center"] = args.center;
    data = generate(j.get<SyntheticSpec>());
  }
  save_csv(data, args.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse shallow ReLU networks with nonconvex outer-weight penalties"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Run the insertion/training loop on a dataset");
  t->add_option("--config", train.config, "JSON config file");
  t->add_option("--data", train.data, "Dataset CSV (x_1..x_d,y)");
  t->add_option("--init", train.init, "Initial network CSV");
  t->add_option("--out", train.out, "Output directory");
  t->add_option("--penalty", train.penalty, "l1, log, mcp or mixed_log_l1");
  t->add_option("--alpha", train.alpha, "Regularization weight");
  t->add_option("--gamma", train.gamma, "Penalty curvature");
  t->add_option("--n-trial", train.n_trial, "Trial nodes per iteration");
  t->add_option("--T", train.T, "Outer iterations");
  t->add_option("--seed", train.seed, "Random seed");
  t->add_option("--threads", train.threads, "Worker cap for the ascents");

  ExperimentArgs exp;
  auto* e = app.add_subcommand("experiment", "Run a named experiment preset");
  e->add_option("name", exp.name, "fig1, exp1d, exp2d, table1, table2 or radial-fidelity")->required();
  e->add_option("--out", exp.out, "Output directory");
  e->add_option("--seed", exp.seed, "Random seed");
  e->add_option("--threads", exp.threads, "Worker cap for the ascents");
  e->add_flag("--smoke", exp.smoke, "Reduced 31x31 grid for exp2d");
  e->add_option("--alpha", exp.alpha, "Override alpha");
  e->add_option("--gamma", exp.gamma, "Override gamma of the nonconvex penalty");
  e->add_option("--n-trial", exp.n_trial, "Override trial nodes per iteration");
  e->add_option("--T", exp.T, "Override outer iterations");

  CheckArgs check;
  auto* c = app.add_subcommand("check", "Stationarity, representer and fidelity checks");
  c->add_option("--network", check.network, "Network CSV")->required();
  c->add_option("--data", check.data, "Dataset CSV")->required();
  c->add_option("--alpha", check.alpha, "Regularization weight")->required();
  c->add_option("--penalty", check.penalty, "l1, log, mcp or mixed_log_l1");
  c->add_option("--gamma", check.gamma, "Penalty curvature");
  c->add_option("--w-norm", check.w_norm, "Known W-norm bound of the target");
  c->add_option("--radial-center", check.radial_center, "Target |x - center|; derives the W-norm")->expected(2);
  c->add_option("--samples", check.samples, "Uniform sphere samples");
  c->add_option("--tol", check.tol, "Relative tolerance");
  c->add_option("--seed", check.seed, "Sampling seed");
  c->add_option("--threads", check.threads, "Worker cap for the ascents");

  ExportArgs exp_dual;
  auto* x = app.add_subcommand("export-dual", "Export the dual variable on a grid and at the nodes");
  x->add_option("--network", exp_dual.network, "Network CSV")->required();
  x->add_option("--data", exp_dual.data, "Dataset CSV")->required();
  x->add_option("--out", exp_dual.out, "Output directory");
  x->add_option("--angles", exp_dual.angles, "Angular grid size (d = 1)");
  x->add_option("--grid", exp_dual.grid, "Chart grid points per axis (d = 2)");
  x->add_option("--radius", exp_dual.radius, "Chart grid half-width (d = 2)");

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate-data", "Write a synthetic dataset CSV");
  g->add_option("--preset", gen.preset, "Use the dataset of an experiment preset");
  g->add_option("--target", gen.target, "fig1_cos, gauss_sin, gauss_cos or radial_norm");
  g->add_option("--sampling", gen.sampling, "uniform_1d, grid_1d or grid_2d");
  g->add_option("--size", gen.size, "K for 1D sampling, m for the m x m grid");
  g->add_option("--noise", gen.noise, "Gaussian noise level");
  g->add_option("--seed", gen.seed, "Noise and sampling seed");
  g->add_option("--center", gen.center, "Center of radial_norm")->expected(2);
  g->add_option("--out", gen.out, "Output CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*t) return cmd_train(train);
    if (*e) return cmd_experiment(exp);
    if (*c) return cmd_check(check);
    if (*x) return cmd_export_dual(exp_dual);
    if (*g) return cmd_generate(gen);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 1;
}
