#pragma once

#include <Eigen/Dense>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "swarm/geometry.hpp"

namespace swarm::network {

/// Undirected communication graph at one time step. Edges are stored with
/// i < j, sorted lexicographically; no self loops.
struct CommGraph {
  int k = 0;
  int n_agents = 0;
  std::vector<std::pair<int, int>> edges;

  bool has_edge(int i, int j) const;
  /// N_i(k): neighbors of i, including i itself.
  std::set<int> neighbors(int i) const;
};

/// Partition of the agents into connected components of the graph they were
/// derived from. Clusters are sorted by smallest member id, members ascending.
struct ClusterTopology {
  CommGraph graph;
  std::vector<std::vector<int>> clusters;

  int num_clusters() const { return static_cast<int>(clusters.size()); }
  int cluster_of(int agent) const;
};

struct PlugEvent {
  enum class Kind { PlugIn, PlugOut };
  int agent = 0;
  Kind kind = Kind::PlugIn;
  std::set<int> affected;  // neighbors gained (plug-in) or lost (plug-out)
};

/// Edge {i, j} iff the communication discs intersect:
/// |p_i - p_j| <= r_i + r_j (boundary contact counts).
CommGraph build_graph(const std::vector<Eigen::Vector2d>& positions,
                      const std::vector<geometry::Disc>& comm, int k = 0);

/// OpenMP pairwise scan over rows. Output is identical to build_graph; the
/// serial version stays as the reference for tests and benchmarks.
CommGraph build_graph_parallel(const std::vector<Eigen::Vector2d>& positions,
                               const std::vector<geometry::Disc>& comm, int k = 0);

ClusterTopology connected_components(const CommGraph& g);

/// Wrapper around CommGraph::neighbors that validates the id.
std::set<int> neighbors(const ClusterTopology& topology, int i);

/// Per-agent neighbor-set deltas between consecutive topologies. An agent that
/// both gains and loses neighbors in one step yields two events.
std::vector<PlugEvent> diff_topology(const ClusterTopology& prev, const ClusterTopology& cur);

/// JSON snapshot {k, edges:[[i,j]...], clusters:[[ids]...]}.
std::string to_json(const ClusterTopology& topology);

}  // namespace swarm::network
