#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

namespace swarm::svg {

/// Everything the plots need, lifted straight out of a log JSON document.
struct PlotData {
  struct Agent {
    int id = 0;
    double comm_radius = 0.0;
    std::vector<Eigen::Vector2d> trajectory;       // positions over time
    std::vector<Eigen::Vector2d> safe_polygon;     // origin-centered vertices
    double final_heading = 0.0;                    // from the last motion segment
  };
  struct Snapshot {
    int k = 0;
    std::vector<Eigen::Vector2d> positions;
    std::vector<std::pair<int, int>> edges;
  };
  std::vector<Agent> agents;
  std::vector<Snapshot> snapshots;
};

/// Throws std::invalid_argument on malformed or empty logs.
PlotData plot_data_from_log_json(const std::string& json_text, int snapshot_interval = 10);

/// Trajectory figure: one polyline per agent, final pose marker,
/// communication circle and safe-set polygon at the final position.
std::string trajectories_svg(const PlotData& data);

/// Strip of communication-graph snapshots (nodes and edges per panel).
std::string graph_strip_svg(const PlotData& data);

}  // namespace swarm::svg
