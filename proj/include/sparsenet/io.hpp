#pragma once

#include <string>

#include <json.hpp>

#include "sparsenet/data.hpp"
#include "sparsenet/network.hpp"

namespace sparsenet {

/// Network CSV: header a_1,...,a_d,b,c and one row per node.
void save_network_csv(const ShallowNet& net, const std::string& path);

/// Rows whose (a, b) is off the unit sphere by more than 1e-12 are rescaled,
/// moving the scale into c.
ShallowNet load_network_csv(const std::string& path);

/// {"d", "N", "nodes": [[a..., b], ...], "weights": [...]} merged with `meta`.
nlohmann::json network_to_json(const ShallowNet& net, const nlohmann::json& meta = nlohmann::json::object());

/// Header x_1,...,x_d,y,prediction.
void save_predictions_csv(const ShallowNet& net, const Dataset& data, const std::string& path);

/// p over n_angles equispaced angles t of omega = (cos t, sin t), t in [-pi, pi).
/// Header angle,a,b,knot,p with knot = -b / a.
void export_dual_angular(const ShallowNet& net, const Dataset& data, int n_angles, const std::string& path);

/// p over an m x m grid of chart points in [-radius, radius]^2 (d = 2 only).
/// Header z_1,z_2,p.
void export_dual_chart(const ShallowNet& net, const Dataset& data, int m, double radius, const std::string& path);

/// One row per node: a_1..a_d,b,z_1..z_d,c,p, plus angle and knot for d = 1.
void export_dual_nodes(const ShallowNet& net, const Dataset& data, const std::string& path);

nlohmann::json read_json_file(const std::string& path);
void write_json_file(const nlohmann::json& j, const std::string& path);

}  // namespace sparsenet
