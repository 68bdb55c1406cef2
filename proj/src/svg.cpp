#include "swarm/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace swarm::svg {

namespace {

using nlohmann::json;

const char* kPalette[10] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

struct Box {
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  void take(const Eigen::Vector2d& p) {
    xmin = std::min(xmin, p.x());
    xmax = std::max(xmax, p.x());
    ymin = std::min(ymin, p.y());
    ymax = std::max(ymax, p.y());
  }
  void pad(double amount) {
    xmin -= amount;
    xmax += amount;
    ymin -= amount;
    ymax += amount;
  }
};

std::string num(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

}  // namespace

PlotData plot_data_from_log_json(const std::string& json_text, int snapshot_interval) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("log: invalid JSON: ") + e.what());
  }
  if (!doc.contains("format") || doc["format"] != "swarm-mpc-log-v1")
    throw std::invalid_argument("log: not a swarm-mpc log document");

  PlotData data;
  for (const auto& ja : doc["agents"]) {
    PlotData::Agent ag;
    ag.id = ja["id"].get<int>();
    ag.comm_radius = ja["comm_radius"].get<double>();
    for (const auto& v : ja["safe_polygon"])
      ag.safe_polygon.push_back({v[0].get<double>(), v[1].get<double>()});
    data.agents.push_back(std::move(ag));
  }
  const auto& steps = doc["steps"];
  for (const auto& js : steps) {
    for (size_t a = 0; a < data.agents.size(); ++a) {
      const auto& x = js["agents"][a]["x"];
      data.agents[a].trajectory.push_back({x[0].get<double>(), x[1].get<double>()});
    }
  }
  for (size_t a = 0; a < data.agents.size(); ++a) {
    const auto& xf = doc["final_states"][a];
    data.agents[a].trajectory.push_back({xf[0].get<double>(), xf[1].get<double>()});
  }
  if (data.agents.empty() || data.agents.front().trajectory.empty())
    throw std::invalid_argument("log: nothing to plot");
  for (auto& ag : data.agents) {
    ag.final_heading = 0.0;
    for (size_t i = ag.trajectory.size(); i-- > 1;) {
      const Eigen::Vector2d d = ag.trajectory[i] - ag.trajectory[i - 1];
      if (d.norm() > 1e-9) {
        ag.final_heading = std::atan2(d.y(), d.x());
        break;
      }
    }
  }

  for (size_t s = 0; s < steps.size(); ++s) {
    if (snapshot_interval <= 0 || s % static_cast<size_t>(snapshot_interval) != 0) continue;
    PlotData::Snapshot snap;
    snap.k = steps[s]["k"].get<int>();
    for (const auto& jr : steps[s]["agents"]) {
      const auto& x = jr["x"];
      snap.positions.push_back({x[0].get<double>(), x[1].get<double>()});
    }
    for (const auto& e : steps[s]["edges"]) snap.edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    data.snapshots.push_back(std::move(snap));
  }
  return data;
}

std::string trajectories_svg(const PlotData& data) {
  Box box;
  for (const auto& ag : data.agents) {
    for (const auto& p : ag.trajectory) box.take(p);
    const Eigen::Vector2d last = ag.trajectory.back();
    box.take(last + Eigen::Vector2d(ag.comm_radius, ag.comm_radius));
    box.take(last - Eigen::Vector2d(ag.comm_radius, ag.comm_radius));
  }
  box.pad(0.1 * std::max(box.xmax - box.xmin, box.ymax - box.ymin));

  const double w = box.xmax - box.xmin, h = box.ymax - box.ymin;
  std::ostringstream out;
  // Flip y so the world frame is y-up.
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\""
      << num(720.0 * h / w) << "\" viewBox=\"" << num(box.xmin) << ' ' << num(-box.ymax) << ' '
      << num(w) << ' ' << num(h) << "\">\n";
  out << "<g stroke-width=\"" << num(0.015 * w) << "\" fill=\"none\">\n";

  for (size_t a = 0; a < data.agents.size(); ++a) {
    const auto& ag = data.agents[a];
    const char* color = kPalette[a % 10];
    const Eigen::Vector2d last = ag.trajectory.back();

    out << "<polyline stroke=\"" << color << "\" stroke-dasharray=\"" << num(0.04 * w) << ' '
        << num(0.02 * w) << "\" points=\"";
    for (const auto& p : ag.trajectory) out << num(p.x()) << ',' << num(-p.y()) << ' ';
    out << "\"/>\n";

    out << "<circle cx=\"" << num(last.x()) << "\" cy=\"" << num(-last.y()) << "\" r=\""
        << num(ag.comm_radius) << "\" stroke=\"#e8a33d\" stroke-dasharray=\"" << num(0.02 * w)
        << ' ' << num(0.02 * w) << "\"/>\n";

    if (!ag.safe_polygon.empty()) {
      out << "<polygon stroke=\"" << color << "\" fill=\"" << color
          << "\" fill-opacity=\"0.15\" points=\"";
      for (const auto& v : ag.safe_polygon)
        out << num(last.x() + v.x()) << ',' << num(-(last.y() + v.y())) << ' ';
      out << "\"/>\n";
    }

    // Final pose triangle.
    const double th = ag.final_heading, r = 0.02 * w;
    out << "<polygon fill=\"#d62728\" stroke=\"none\" points=\"";
    for (int c = 0; c < 3; ++c) {
      const double phi = th + c * 2.0 * std::numbers::pi / 3.0;
      const double rr = c == 0 ? 2.0 * r : r;
      out << num(last.x() + rr * std::cos(phi)) << ',' << num(-(last.y() + rr * std::sin(phi)))
          << ' ';
    }
    out << "\"/>\n";
  }
  out << "</g>\n</svg>\n";
  return out.str();
}

std::string graph_strip_svg(const PlotData& data) {
  Box box;
  for (const auto& snap : data.snapshots)
    for (const auto& p : snap.positions) box.take(p);
  if (data.snapshots.empty()) {
    // Single-panel strip of the initial layout only.
    for (const auto& ag : data.agents) box.take(ag.trajectory.front());
  }
  box.pad(0.15 * std::max({box.xmax - box.xmin, box.ymax - box.ymin, 1.0}));

  const double w = box.xmax - box.xmin, h = box.ymax - box.ymin;
  const size_t panels = std::max<size_t>(1, data.snapshots.size());
  const double panel_w = 240.0, panel_h = panel_w * h / w;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(panel_w * panels)
      << "\" height=\"" << num(panel_h + 18.0) << "\">\n";
  for (size_t s = 0; s < data.snapshots.size(); ++s) {
    const auto& snap = data.snapshots[s];
    const double ox = panel_w * s;
    auto X = [&](double x) { return ox + (x - box.xmin) / w * panel_w; };
    auto Y = [&](double y) { return (box.ymax - y) / h * panel_h; };
    out << "<rect x=\"" << num(ox) << "\" y=\"0\" width=\"" << num(panel_w) << "\" height=\""
        << num(panel_h) << "\" fill=\"none\" stroke=\"#cccccc\"/>\n";
    out << "<text x=\"" << num(ox + 6.0) << "\" y=\"" << num(panel_h + 13.0)
        << "\" font-size=\"11\">k=" << snap.k << "</text>\n";
    for (const auto& [i, j] : snap.edges)
      out << "<line x1=\"" << num(X(snap.positions[static_cast<size_t>(i)].x())) << "\" y1=\""
          << num(Y(snap.positions[static_cast<size_t>(i)].y())) << "\" x2=\""
          << num(X(snap.positions[static_cast<size_t>(j)].x())) << "\" y2=\""
          << num(Y(snap.positions[static_cast<size_t>(j)].y()))
          << "\" stroke=\"#888888\" stroke-width=\"1\"/>\n";
    for (size_t i = 0; i < snap.positions.size(); ++i)
      out << "<circle cx=\"" << num(X(snap.positions[i].x())) << "\" cy=\""
          << num(Y(snap.positions[i].y())) << "\" r=\"4\" fill=\"" << kPalette[i % 10]
          << "\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace swarm::svg
