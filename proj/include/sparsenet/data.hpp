#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "sparsenet/geometry.hpp"

namespace sparsenet {

struct DatasetMeta {
  std::string source = "csv";  // "csv" or "synthetic"
  std::optional<std::uint64_t> seed;
  double noise_sigma = 0.0;
  std::string description;
};

/// Training points: xs is K x d, ys has K entries. `clean` holds the noise-free
/// target values when the data is synthetic.
struct Dataset {
  Matrix xs;
  Vector ys;
  DatasetMeta meta;
  std::optional<Vector> clean;

  int size() const { return static_cast<int>(ys.size()); }
  int dim() const { return static_cast<int>(xs.cols()); }
};

enum class TargetKind {
  Fig1Cos,        // cos(10 (1e-3 + x^2)^(1/8)) on [-1, 1]
  GaussSin,       // exp(-x^2/2) |sin(7 sqrt(1 + x^2))| on [-1, 1]
  GaussCos,       // exp(-(x1^2 + x2^2)/2) cos(10 x1 x2) on [-1, 1]^2
  RadialNorm,     // |x - center| on [-1, 1]^2
};

struct Target {
  TargetKind kind = TargetKind::GaussSin;
  Eigen::Vector2d center = Eigen::Vector2d::Zero();

  int dim() const;
};

enum class SamplingKind {
  Uniform1D,  // K iid uniform draws on [-1, 1]
  Grid1D,     // K equispaced points including both endpoints
  Grid2D,     // m x m tensor grid on [-1, 1]^2
};

struct Sampling {
  SamplingKind kind = SamplingKind::Grid1D;
  int size = 1000;  // K for the 1D variants, m for Grid2D

  int dim() const { return kind == SamplingKind::Grid2D ? 2 : 1; }
  int count() const { return kind == SamplingKind::Grid2D ? size * size : size; }
};

struct SyntheticSpec {
  Target target;
  Sampling sampling;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

/// Raised by the CSV loader; row and column are 1-based (row 1 is the header).
class CsvError : public std::runtime_error {
 public:
  CsvError(const std::string& path, int row, int column, const std::string& what);
  int row() const { return row_; }
  int column() const { return column_; }

 private:
  int row_;
  int column_;
};

double eval_target(const Target& target, const Vector& x);
Vector eval_target(const Target& target, const Matrix& xs);

/// Deterministic for a fixed seed: points first (Uniform1D only consumes the
/// stream for points), then one Gaussian draw per point when noise_sigma > 0.
Dataset generate(const SyntheticSpec& spec);

/// Header plus a dense numeric body; shared by the dataset and network readers.
struct NumericTable {
  std::vector<std::string> header;
  Matrix values;
  int last_row = 1;
};

/// Throws CsvError on a short header, ragged rows or unparsable cells.
NumericTable read_numeric_csv(const std::string& path, int min_cols, const std::string& header_hint);

/// Round-trip formatting (%.17g) used by every CSV writer.
std::string format_double(double v);

Dataset load_csv(const std::string& path);
void save_csv(const Dataset& data, const std::string& path);

std::string target_name(TargetKind kind);
std::string sampling_name(SamplingKind kind);

void to_json(nlohmann::json& j, const SyntheticSpec& spec);
void from_json(const nlohmann::json& j, SyntheticSpec& spec);

}  // namespace sparsenet
