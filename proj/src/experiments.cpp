#include "sparsenet/experiments.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "sparsenet/analysis.hpp"
#include "sparsenet/io.hpp"

namespace sparsenet {

namespace {

const Eigen::Vector2d kRadialCenter(0.1, 0.1);
constexpr int kRadialQuadrature = 4096;

void require_known(const std::string& name) {
  const auto& names = preset_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    throw std::invalid_argument("unknown experiment preset '" + name + "'");
  }
}

std::string gamma_label(const std::string& prefix, double gamma) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_gamma_%.3g", prefix.c_str(), gamma);
  return buf;
}

PresetRow train_row(const Dataset& data, AlgorithmConfig cfg, const PenaltySpec& penalty, double alpha,
                    std::string label, std::optional<ShallowNet> init = std::nullopt) {
  cfg.penalty = penalty;
  cfg.alpha = alpha;
  cfg.init = std::move(init);
  auto [net, report] = run_algorithm1(data, cfg);
  PresetRow row;
  row.label = std::move(label);
  row.penalty = penalty;
  row.alpha = alpha;
  row.nodes = net.width();
  row.error = rms_error(net, data, data.clean.value_or(data.ys));
  row.objective = loss_value(net, data) + alpha * total_penalty(penalty, net.weights());
  row.net = std::move(net);
  row.report = std::move(report);
  return row;
}

double preset_gamma(const ExperimentOptions& options, double fallback) { return options.gamma.value_or(fallback); }

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"fig1", "exp1d", "exp2d", "table1", "table2", "radial-fidelity"};
  return names;
}

Dataset preset_dataset(const std::string& name, const ExperimentOptions& options) {
  require_known(name);
  SyntheticSpec spec;
  spec.seed = options.seed;
  if (name == "fig1") {
    spec.target.kind = TargetKind::Fig1Cos;
    spec.sampling = {SamplingKind::Uniform1D, 5000};
    spec.noise_sigma = 0.05;
  } else if (name == "exp1d" || name == "table1") {
    spec.target.kind = TargetKind::GaussSin;
    spec.sampling = {SamplingKind::Grid1D, 1000};
  } else if (name == "exp2d") {
    spec.target.kind = TargetKind::GaussCos;
    spec.sampling = {SamplingKind::Grid2D, options.smoke ? 31 : 51};
  } else {
    spec.target = {TargetKind::RadialNorm, kRadialCenter};
    spec.sampling = {SamplingKind::Grid2D, 21};
  }
  return generate(spec);
}

AlgorithmConfig preset_config(const std::string& name, const ExperimentOptions& options) {
  require_known(name);
  AlgorithmConfig cfg;
  cfg.seed = options.seed;
  cfg.insertion.n_trial = options.n_trial.value_or(50);
  cfg.insertion.threads = options.threads;
  cfg.final_check.threads = options.threads;
  if (name == "fig1") {
    cfg.alpha = 1e-4;
    cfg.T = 20;
  } else if (name == "exp1d" || name == "table1" || name == "radial-fidelity") {
    cfg.alpha = 1e-5;
    cfg.T = 15;
  } else {
    cfg.alpha = 1e-5;
    cfg.T = 10;
  }
  if (options.alpha) cfg.alpha = *options.alpha;
  if (options.T) cfg.T = *options.T;
  return cfg;
}

ExperimentSummary run_experiment(const std::string& name, const ExperimentOptions& options) {
  require_known(name);
  const Dataset data = preset_dataset(name, options);
  const AlgorithmConfig base = preset_config(name, options);

  ExperimentSummary out;
  out.name = name;
  out.seed = options.seed;
  nlohmann::json cfg_json = base;
  cfg_json.erase("penalty");
  out.config = {{"algorithm", cfg_json}, {"smoke", options.smoke}, {"K", data.size()}, {"d", data.dim()},
                {"noise_sigma", data.meta.noise_sigma}};

  if (name == "fig1") {
    out.rows.push_back(train_row(data, base, PenaltySpec::l1(), base.alpha, "l1"));
    out.rows.push_back(train_row(data, base, PenaltySpec::log(preset_gamma(options, 1.0)), base.alpha, "phi"));
  } else if (name == "exp1d") {
    out.rows.push_back(train_row(data, base, PenaltySpec::l1(), base.alpha, "l1"));
    out.rows.push_back(
        train_row(data, base, PenaltySpec::mixed_log_l1(preset_gamma(options, 1.0)), base.alpha, "phi"));
  } else if (name == "exp2d") {
    out.rows.push_back(train_row(data, base, PenaltySpec::l1(), base.alpha, "l1"));
    out.rows.push_back(
        train_row(data, base, PenaltySpec::mixed_log_l1(preset_gamma(options, 5.0)), base.alpha, "phi"));
  } else if (name == "table1" || name == "table2") {
    out.table = true;
    const std::vector<double> gammas = name == "table1"
                                           ? std::vector<double>{1e-4, 1e-3, 1e-2, 1e-1, 1.0}
                                           : std::vector<double>{1e-3, 2.5e-2, 1.25e-1, 6.25e-1, 3.125};
    std::optional<ShallowNet> init;
    for (double gamma : gammas) {
      const PenaltySpec spec = name == "table1" ? PenaltySpec::mixed_log_l1(gamma) : PenaltySpec::log(gamma);
      out.rows.push_back(train_row(data, base, spec, base.alpha, gamma_label("phi", gamma), init));
      init = out.rows.back().net;
    }
  } else {
    const double w_norm = wnorm_radial_2d(kRadialCenter, kRadialQuadrature);
    const std::vector<double> alphas =
        options.alpha ? std::vector<double>{*options.alpha} : std::vector<double>{1e-4, 1e-5};
    for (double alpha : alphas) {
      char label[32];
      std::snprintf(label, sizeof label, "alpha_%.0e", alpha);
      PresetRow row = train_row(data, base, PenaltySpec::log(preset_gamma(options, 1.0)), alpha, label);
      row.w_norm = w_norm;
      row.fidelity_gap = fidelity_gap(row.net, data, *data.clean, data.ys, alpha, w_norm);
      out.rows.push_back(std::move(row));
    }
  }
  return out;
}

nlohmann::json to_summary_json(const ExperimentSummary& summary) {
  nlohmann::json rows = nlohmann::json::array();
  for (const PresetRow& r : summary.rows) {
    nlohmann::json row{{"label", r.label},
                       {"penalty", r.penalty},
                       {"alpha", r.alpha},
                       {"nodes", r.nodes},
                       {"error", r.error},
                       {"objective", r.objective},
                       {"stationarity_pass", r.report.final_stationarity.pass},
                       {"wall_time_seconds", r.report.wall_time_seconds},
                       {"network_csv", "net_" + r.label + ".csv"}};
    if (r.penalty.kind != PenaltyKind::L1) row["gamma"] = r.penalty.gamma;
    if (r.w_norm) row["w_norm"] = *r.w_norm;
    if (r.fidelity_gap) row["fidelity_gap"] = *r.fidelity_gap;
    row["report"] = r.report;
    rows.push_back(std::move(row));
  }
  return {{"experiment", summary.name}, {"seed", summary.seed}, {"config", summary.config}, {"rows", rows}};
}

void write_summary(const ExperimentSummary& summary, const std::string& outdir) {
  std::filesystem::create_directories(outdir);
  const std::filesystem::path dir(outdir);
  write_json_file(to_summary_json(summary), (dir / "summary.json").string());

  const std::string csv_path = (dir / "summary.csv").string();
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot write file: " + csv_path);
  if (summary.table) {
    csv << "gamma,nodes,error\n";
    for (const PresetRow& r : summary.rows) {
      csv << format_double(r.penalty.gamma) << ',' << r.nodes << ',' << format_double(r.error) << '\n';
    }
  } else {
    csv << "label,penalty,gamma,alpha,nodes,error\n";
    for (const PresetRow& r : summary.rows) {
      csv << r.label << ',' << kind_name(r.penalty.kind) << ',' << format_double(r.penalty.gamma) << ','
          << format_double(r.alpha) << ',' << r.nodes << ',' << format_double(r.error) << '\n';
    }
  }
  if (!csv) throw std::runtime_error("error while writing " + csv_path);

  for (const PresetRow& r : summary.rows) save_network_csv(r.net, (dir / ("net_" + r.label + ".csv")).string());
}

}  // namespace sparsenet
