#include "sparsenet/data.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

namespace sparsenet {

namespace {

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool parse_double(const std::string& text, double& value) {
  if (text.empty()) return false;
  char* end = nullptr;
  errno = 0;
  value = std::strtod(text.c_str(), &end);
  return end == text.c_str() + text.size() && errno != ERANGE && std::isfinite(value);
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvError::CsvError(const std::string& path, int row, int column, const std::string& what)
    : std::runtime_error(path + ": row " + std::to_string(row) +
                         (column > 0 ? ", column " + std::to_string(column) : std::string()) + ": " +
                         what),
      row_(row),
      column_(column) {}

int Target::dim() const {
  return (kind == TargetKind::Fig1Cos || kind == TargetKind::GaussSin) ? 1 : 2;
}

double eval_target(const Target& target, const Vector& x) {
  if (x.size() != target.dim()) {
    throw std::invalid_argument("target " + target_name(target.kind) + " expects d=" +
                                std::to_string(target.dim()) + ", got " + std::to_string(x.size()));
  }
  switch (target.kind) {
    case TargetKind::Fig1Cos:
      return std::cos(10.0 * std::pow(1e-3 + x[0] * x[0], 0.125));
    case TargetKind::GaussSin:
      return std::exp(-0.5 * x[0] * x[0]) * std::abs(std::sin(7.0 * std::sqrt(1.0 + x[0] * x[0])));
    case TargetKind::GaussCos:
      return std::exp(-0.5 * x.squaredNorm()) * std::cos(10.0 * x[0] * x[1]);
    case TargetKind::RadialNorm:
      return (x - target.center).norm();
  }
  return 0.0;
}

Vector eval_target(const Target& target, const Matrix& xs) {
  Vector out(xs.rows());
  for (Eigen::Index k = 0; k < xs.rows(); ++k) out[k] = eval_target(target, Vector(xs.row(k).transpose()));
  return out;
}

Dataset generate(const SyntheticSpec& spec) {
  const Sampling& s = spec.sampling;
  if (s.size < 2) throw std::invalid_argument("sampling size must be >= 2");
  if (!(spec.noise_sigma >= 0.0)) throw std::invalid_argument("noise_sigma must be >= 0");
  if (s.dim() != spec.target.dim()) {
    throw std::invalid_argument("sampling " + sampling_name(s.kind) + " does not match target " +
                                target_name(spec.target.kind));
  }

  std::mt19937_64 rng(spec.seed);
  Dataset data;
  data.xs.resize(s.count(), s.dim());
  switch (s.kind) {
    case SamplingKind::Uniform1D: {
      std::uniform_real_distribution<double> unif(-1.0, 1.0);
      for (int k = 0; k < s.size; ++k) data.xs(k, 0) = unif(rng);
      break;
    }
    case SamplingKind::Grid1D:
      data.xs.col(0) = Vector::LinSpaced(s.size, -1.0, 1.0);
      break;
    case SamplingKind::Grid2D: {
      const Vector t = Vector::LinSpaced(s.size, -1.0, 1.0);
      for (int i = 0; i < s.size; ++i) {
        for (int j = 0; j < s.size; ++j) {
          data.xs(i * s.size + j, 0) = t[i];
          data.xs(i * s.size + j, 1) = t[j];
        }
      }
      break;
    }
  }

  Vector clean = eval_target(spec.target, data.xs);
  data.ys = clean;
  if (spec.noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, spec.noise_sigma);
    for (Eigen::Index k = 0; k < data.ys.size(); ++k) data.ys[k] += noise(rng);
  }
  data.clean = std::move(clean);
  data.meta.source = "synthetic";
  data.meta.seed = spec.seed;
  data.meta.noise_sigma = spec.noise_sigma;
  data.meta.description = target_name(spec.target.kind) + "/" + sampling_name(s.kind);
  return data;
}

NumericTable read_numeric_csv(const std::string& path, int min_cols, const std::string& header_hint) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);

  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) throw CsvError(path, 1, 0, "empty file");
  NumericTable table;
  for (const auto& cell : split_commas(trim(line))) table.header.push_back(trim(cell));
  const int cols = static_cast<int>(table.header.size());
  if (cols < min_cols) throw CsvError(path, 1, 0, "expected header " + header_hint);

  std::vector<double> values;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto cells = split_commas(t);
    if (static_cast<int>(cells.size()) != cols) {
      throw CsvError(path, row, 0,
                     "expected " + std::to_string(cols) + " columns, found " + std::to_string(cells.size()));
    }
    for (int c = 0; c < cols; ++c) {
      double v = 0.0;
      if (!parse_double(trim(cells[c]), v)) {
        throw CsvError(path, row, c + 1, "cannot parse '" + cells[c] + "' as a number");
      }
      values.push_back(v);
    }
  }
  const int rows = static_cast<int>(values.size()) / cols;
  table.values.resize(rows, cols);
  for (int k = 0; k < rows; ++k) {
    for (int c = 0; c < cols; ++c) table.values(k, c) = values[k * cols + c];
  }
  table.last_row = row;
  return table;
}

Dataset load_csv(const std::string& path) {
  const NumericTable table = read_numeric_csv(path, 2, "x_1,...,x_d,y");
  const auto cols = table.values.cols();
  if (table.values.rows() == 0) throw CsvError(path, table.last_row, 0, "no data rows");
  Dataset data;
  data.xs = table.values.leftCols(cols - 1);
  data.ys = table.values.col(cols - 1);
  data.meta.source = "csv";
  data.meta.description = path;
  return data;
}

void save_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset file: " + path);
  for (int c = 0; c < data.dim(); ++c) out << "x_" << (c + 1) << ',';
  out << "y\n";
  for (int k = 0; k < data.size(); ++k) {
    for (int c = 0; c < data.dim(); ++c) out << format_double(data.xs(k, c)) << ',';
    out << format_double(data.ys[k]) << '\n';
  }
  if (!out) throw std::runtime_error("error while writing " + path);
}

std::string target_name(TargetKind kind) {
  switch (kind) {
    case TargetKind::Fig1Cos: return "fig1_cos";
    case TargetKind::GaussSin: return "gauss_sin";
    case TargetKind::GaussCos: return "gauss_cos";
    case TargetKind::RadialNorm: return "radial_norm";
  }
  return "unknown";
}

std::string sampling_name(SamplingKind kind) {
  switch (kind) {
    case SamplingKind::Uniform1D: return "uniform_1d";
    case SamplingKind::Grid1D: return "grid_1d";
    case SamplingKind::Grid2D: return "grid_2d";
  }
  return "unknown";
}

void to_json(nlohmann::json& j, const SyntheticSpec& spec) {
  j = nlohmann::json{{"target", target_name(spec.target.kind)},
                     {"sampling", sampling_name(spec.sampling.kind)},
                     {"size", spec.sampling.size},
                     {"noise_sigma", spec.noise_sigma},
                     {"seed", spec.seed}};
  if (spec.target.kind == TargetKind::RadialNorm) {
    j["center"] = {spec.target.center[0], spec.target.center[1]};
  }
}

void from_json(const nlohmann::json& j, SyntheticSpec& spec) {
  const auto target = j.at("target").get<std::string>();
  if (target == "fig1_cos") spec.target.kind = TargetKind::Fig1Cos;
  else if (target == "gauss_sin") spec.target.kind = TargetKind::GaussSin;
  else if (target == "gauss_cos") spec.target.kind = TargetKind::GaussCos;
  else if (target == "radial_norm") spec.target.kind = TargetKind::RadialNorm;
  else throw std::invalid_argument("unknown target '" + target + "'");
  if (j.contains("center")) {
    const auto c = j.at("center").get<std::vector<double>>();
    if (c.size() != 2) throw std::invalid_argument("center must have two entries");
    spec.target.center = {c[0], c[1]};
  }
  const auto sampling = j.at("sampling").get<std::string>();
  if (sampling == "uniform_1d") spec.sampling.kind = SamplingKind::Uniform1D;
  else if (sampling == "grid_1d") spec.sampling.kind = SamplingKind::Grid1D;
  else if (sampling == "grid_2d") spec.sampling.kind = SamplingKind::Grid2D;
  else throw std::invalid_argument("unknown sampling '" + sampling + "'");
  spec.sampling.size = j.at("size").get<int>();
  spec.noise_sigma = j.value("noise_sigma", 0.0);
  spec.seed = j.value("seed", std::uint64_t{0});
}

}  // namespace sparsenet
