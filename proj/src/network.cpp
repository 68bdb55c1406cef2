#include "swarm/network.hpp"

#include <algorithm>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace swarm::network {

bool CommGraph::has_edge(int i, int j) const {
  if (i == j) return false;
  if (i > j) std::swap(i, j);
  return std::binary_search(edges.begin(), edges.end(), std::make_pair(i, j));
}

std::set<int> CommGraph::neighbors(int i) const {
  if (i < 0 || i >= n_agents) throw std::out_of_range("CommGraph::neighbors: unknown agent id");
  std::set<int> out{i};
  for (const auto& [a, b] : edges) {
    if (a == i) out.insert(b);
    if (b == i) out.insert(a);
  }
  return out;
}

int ClusterTopology::cluster_of(int agent) const {
  for (size_t m = 0; m < clusters.size(); ++m)
    if (std::binary_search(clusters[m].begin(), clusters[m].end(), agent))
      return static_cast<int>(m);
  throw std::out_of_range("ClusterTopology::cluster_of: unknown agent id");
}

CommGraph build_graph(const std::vector<Eigen::Vector2d>& positions,
                      const std::vector<geometry::Disc>& comm, int k) {
  if (positions.size() != comm.size())
    throw std::invalid_argument("build_graph: one communication disc per agent");
  CommGraph g;
  g.k = k;
  g.n_agents = static_cast<int>(positions.size());
  for (int i = 0; i < g.n_agents; ++i) {
    for (int j = i + 1; j < g.n_agents; ++j) {
      const double d = (positions[i] - positions[j]).norm();
      if (d <= comm[i].radius + comm[j].radius) g.edges.emplace_back(i, j);
    }
  }
  return g;
}

CommGraph build_graph_parallel(const std::vector<Eigen::Vector2d>& positions,
                               const std::vector<geometry::Disc>& comm, int k) {
  if (positions.size() != comm.size())
    throw std::invalid_argument("build_graph: one communication disc per agent");
  CommGraph g;
  g.k = k;
  g.n_agents = static_cast<int>(positions.size());
  std::vector<std::vector<int>> row_hits(g.n_agents);
#pragma omp parallel for schedule(dynamic, 8)
  for (int i = 0; i < g.n_agents; ++i) {
    for (int j = i + 1; j < g.n_agents; ++j) {
      const double d = (positions[i] - positions[j]).norm();
      if (d <= comm[i].radius + comm[j].radius) row_hits[i].push_back(j);
    }
  }
  // Rows merge in index order, so the edge list matches the serial scan.
  for (int i = 0; i < g.n_agents; ++i)
    for (int j : row_hits[i]) g.edges.emplace_back(i, j);
  return g;
}

ClusterTopology connected_components(const CommGraph& g) {
  ClusterTopology topo;
  topo.graph = g;
  std::vector<std::vector<int>> adj(g.n_agents);
  for (const auto& [a, b] : g.edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<bool> seen(g.n_agents, false);
  for (int root = 0; root < g.n_agents; ++root) {
    if (seen[root]) continue;
    std::vector<int> comp, stack{root};
    seen[root] = true;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      comp.push_back(v);
      for (int w : adj[v]) {
        if (!seen[w]) {
          seen[w] = true;
          stack.push_back(w);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    topo.clusters.push_back(std::move(comp));
  }
  // Roots are visited in ascending order, so clusters are already sorted by
  // smallest member.
  return topo;
}

std::set<int> neighbors(const ClusterTopology& topology, int i) { return topology.graph.neighbors(i); }

std::vector<PlugEvent> diff_topology(const ClusterTopology& prev, const ClusterTopology& cur) {
  if (prev.graph.n_agents != cur.graph.n_agents)
    throw std::invalid_argument("diff_topology: agent universes differ");
  std::vector<PlugEvent> events;
  for (int i = 0; i < cur.graph.n_agents; ++i) {
    const std::set<int> before = prev.graph.neighbors(i);
    const std::set<int> after = cur.graph.neighbors(i);
    std::set<int> gained, lost;
    std::set_difference(after.begin(), after.end(), before.begin(), before.end(),
                        std::inserter(gained, gained.end()));
    std::set_difference(before.begin(), before.end(), after.begin(), after.end(),
                        std::inserter(lost, lost.end()));
    if (!gained.empty()) events.push_back({i, PlugEvent::Kind::PlugIn, std::move(gained)});
    if (!lost.empty()) events.push_back({i, PlugEvent::Kind::PlugOut, std::move(lost)});
  }
  return events;
}

std::string to_json(const ClusterTopology& topology) {
  nlohmann::json j;
  j["k"] = topology.graph.k;
  j["edges"] = nlohmann::json::array();
  for (const auto& [a, b] : topology.graph.edges) j["edges"].push_back({a, b});
  j["clusters"] = topology.clusters;
  return j.dump(2);
}

}  // namespace swarm::network
