#include "sparsenet/io.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "sparsenet/loss_dual.hpp"

namespace sparsenet {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw std::runtime_error("error while writing " + path);
}

}  // namespace

void save_network_csv(const ShallowNet& net, const std::string& path) {
  auto out = open_out(path);
  const int d = net.dim();
  for (int i = 0; i < d; ++i) out << "a_" << (i + 1) << ',';
  out << "b,c\n";
  for (int n = 0; n < net.width(); ++n) {
    for (int i = 0; i <= d; ++i) out << format_double(net.nodes()(i, n)) << ',';
    out << format_double(net.weight(n)) << '\n';
  }
  finish(out, path);
}

ShallowNet load_network_csv(const std::string& path) {
  const NumericTable table = read_numeric_csv(path, 3, "a_1,...,a_d,b,c");
  const int cols = static_cast<int>(table.values.cols());
  const int d = cols - 2;
  const int n_nodes = static_cast<int>(table.values.rows());
  Matrix nodes = table.values.leftCols(d + 1).transpose();
  Vector c = table.values.col(d + 1);
  for (int n = 0; n < n_nodes; ++n) {
    const double norm = nodes.col(n).norm();
    if (!(norm > 0.0)) throw CsvError(path, n + 2, 0, "node (a, b) is zero");
    if (std::abs(norm - 1.0) > 1e-12) {
      nodes.col(n) /= norm;
      c[n] *= norm;
    }
    if (nodes(d, n) <= -1.0 + 1e-12) throw CsvError(path, n + 2, d + 1, "node lies on the south pole");
  }
  if (n_nodes == 0) return ShallowNet(d);
  return ShallowNet(std::move(nodes), std::move(c));
}

nlohmann::json network_to_json(const ShallowNet& net, const nlohmann::json& meta) {
  nlohmann::json nodes = nlohmann::json::array();
  for (int n = 0; n < net.width(); ++n) {
    nlohmann::json col = nlohmann::json::array();
    for (int i = 0; i <= net.dim(); ++i) col.push_back(net.nodes()(i, n));
    nodes.push_back(col);
  }
  nlohmann::json j = meta.is_object() ? meta : nlohmann::json::object();
  j["d"] = net.dim();
  j["N"] = net.width();
  j["nodes"] = nodes;
  j["weights"] = std::vector<double>(net.weights().data(), net.weights().data() + net.width());
  return j;
}

void save_predictions_csv(const ShallowNet& net, const Dataset& data, const std::string& path) {
  if (net.dim() != data.dim()) throw std::invalid_argument("network and data dimensions differ");
  const Vector pred = evaluate(net, data.xs);
  auto out = open_out(path);
  for (int i = 0; i < data.dim(); ++i) out << "x_" << (i + 1) << ',';
  out << "y,prediction\n";
  for (int k = 0; k < data.size(); ++k) {
    for (int i = 0; i < data.dim(); ++i) out << format_double(data.xs(k, i)) << ',';
    out << format_double(data.ys[k]) << ',' << format_double(pred[k]) << '\n';
  }
  finish(out, path);
}

void export_dual_angular(const ShallowNet& net, const Dataset& data, int n_angles, const std::string& path) {
  if (data.dim() != 1) throw std::invalid_argument("angular dual export needs d = 1");
  if (n_angles < 1) throw std::invalid_argument("n_angles must be positive");
  const DualField field = DualField::from_network(net, data);
  auto out = open_out(path);
  out << "angle,a,b,knot,p\n";
  Vector omega(2);
  for (int i = 0; i < n_angles; ++i) {
    const double t = -std::numbers::pi + 2.0 * std::numbers::pi * i / n_angles;
    omega << std::cos(t), std::sin(t);
    out << format_double(t) << ',' << format_double(omega[0]) << ',' << format_double(omega[1]) << ','
        << format_double(-omega[1] / omega[0]) << ',' << format_double(field.value(omega)) << '\n';
  }
  finish(out, path);
}

void export_dual_chart(const ShallowNet& net, const Dataset& data, int m, double radius, const std::string& path) {
  if (data.dim() != 2) throw std::invalid_argument("chart dual export needs d = 2");
  if (m < 2) throw std::invalid_argument("chart grid needs at least 2 points per axis");
  if (!(radius > 0.0)) throw std::invalid_argument("chart radius must be positive");
  const DualField field = DualField::from_network(net, data);
  auto out = open_out(path);
  out << "z_1,z_2,p\n";
  Vector z(2);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      z << -radius + 2.0 * radius * i / (m - 1), -radius + 2.0 * radius * j / (m - 1);
      out << format_double(z[0]) << ',' << format_double(z[1]) << ',' << format_double(field.value_chart(z))
          << '\n';
    }
  }
  finish(out, path);
}

void export_dual_nodes(const ShallowNet& net, const Dataset& data, const std::string& path) {
  if (net.dim() != data.dim()) throw std::invalid_argument("network and data dimensions differ");
  const int d = net.dim();
  const DualField field = DualField::from_network(net, data);
  const Matrix charts = net.charts();
  auto out = open_out(path);
  for (int i = 0; i < d; ++i) out << "a_" << (i + 1) << ',';
  out << "b,";
  for (int i = 0; i < d; ++i) out << "z_" << (i + 1) << ',';
  out << "c,p";
  if (d == 1) out << ",angle,knot";
  out << '\n';
  for (int n = 0; n < net.width(); ++n) {
    const Vector omega = net.nodes().col(n);
    for (int i = 0; i <= d; ++i) out << format_double(omega[i]) << ',';
    for (int i = 0; i < d; ++i) out << format_double(charts(i, n)) << ',';
    out << format_double(net.weight(n)) << ',' << format_double(field.value(omega));
    if (d == 1) out << ',' << format_double(std::atan2(omega[1], omega[0])) << ',' << format_double(-omega[1] / omega[0]);
    out << '\n';
  }
  finish(out, path);
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(path + ": malformed JSON: " + e.what());
  }
}

void write_json_file(const nlohmann::json& j, const std::string& path) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  finish(out, path);
}

}  // namespace sparsenet
