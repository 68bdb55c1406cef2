#include "swarm/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace swarm::io {

namespace {

using nlohmann::json;

void require_keys(const json& obj, std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional, const char* where) {
  for (const char* k : required)
    if (!obj.contains(k))
      throw std::invalid_argument(std::string("scenario: missing key '") + k + "' in " + where);
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : required)
      if (it.key() == k) known = true;
    for (const char* k : optional)
      if (it.key() == k) known = true;
    if (!known)
      throw std::invalid_argument(std::string("scenario: unknown key '") + it.key() + "' in " +
                                  where);
  }
}

Eigen::VectorXd to_vector(const json& arr, const char* what) {
  if (!arr.is_array()) throw std::invalid_argument(std::string("scenario: ") + what + " must be an array");
  Eigen::VectorXd v(arr.size());
  for (size_t i = 0; i < arr.size(); ++i) v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
  return v;
}

json from_vector(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

// Shortest round-trip decimal; identical inputs give identical bytes.
std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::shared_ptr<const dynamics::AgentModel> model_for(const std::string& kind) {
  static const auto bicycle =
      std::make_shared<const dynamics::AgentModel>(dynamics::make_bicycle());
  static const auto integrator =
      std::make_shared<const dynamics::AgentModel>(dynamics::make_double_integrator());
  if (kind == "bicycle") return bicycle;
  if (kind == "double_integrator") return integrator;
  throw std::invalid_argument("scenario: unknown model '" + kind + "'");
}

}  // namespace

sim::Scenario parse_scenario(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("scenario: invalid JSON: ") + e.what());
  }
  require_keys(doc, {"agents", "ocp", "sim"}, {}, "document");

  sim::Scenario sc;
  for (const auto& ja : doc["agents"]) {
    require_keys(ja, {"id", "model", "x0", "ref", "comm_radius", "sigma"}, {}, "agents[]");
    sim::AgentSpec spec;
    spec.id = ja["id"].get<int>();
    spec.model_kind = ja["model"].get<std::string>();
    spec.model = model_for(spec.model_kind);
    spec.x0 = to_vector(ja["x0"], "x0");
    spec.x_ref = to_vector(ja["ref"], "ref");
    spec.u_ref = Eigen::VectorXd::Zero(spec.model->m);
    spec.comm_radius = ja["comm_radius"].get<double>();
    spec.sigma = ja["sigma"].get<double>();
    sc.agents.push_back(std::move(spec));
  }
  if (sc.agents.empty()) throw std::invalid_argument("scenario: agents[] is empty");
  for (size_t i = 0; i < sc.agents.size(); ++i)
    for (size_t j = i + 1; j < sc.agents.size(); ++j)
      if (sc.agents[i].id == sc.agents[j].id)
        throw std::invalid_argument("scenario: duplicate agent id");

  const json& jo = doc["ocp"];
  require_keys(jo, {"N", "beta", "d_min", "n_facets"}, {"weights"}, "ocp");
  const int n = sc.agents.front().model->n;
  const int m = sc.agents.front().model->m;
  sc.ocp = ocp::default_config(n, m);
  sc.ocp.N = jo["N"].get<int>();
  sc.ocp.beta = jo["beta"].get<double>();
  sc.ocp.d_min = jo["d_min"].get<double>();
  sc.ocp.n_facets = jo["n_facets"].get<int>();
  if (jo.contains("weights")) {
    const json& jw = jo["weights"];
    require_keys(jw, {"q_t", "r_t", "q_s", "r_s", "t_o"}, {}, "ocp.weights");
    sc.ocp.q_t = to_vector(jw["q_t"], "q_t");
    sc.ocp.r_t = to_vector(jw["r_t"], "r_t");
    sc.ocp.q_s = to_vector(jw["q_s"], "q_s");
    sc.ocp.r_s = to_vector(jw["r_s"], "r_s");
    sc.ocp.t_o = to_vector(jw["t_o"], "t_o");
  }

  const json& js = doc["sim"];
  require_keys(js, {"steps", "seed"}, {}, "sim");
  sc.steps = js["steps"].get<int>();
  sc.seed = js["seed"].get<std::uint64_t>();

  sc.validate();
  return sc;
}

sim::Scenario load_scenario(const std::string& path) { return parse_scenario(read_file(path)); }

std::string scenario_to_json(const sim::Scenario& sc) {
  json doc;
  doc["agents"] = json::array();
  for (const auto& a : sc.agents) {
    json ja;
    ja["id"] = a.id;
    ja["model"] = a.model_kind;
    ja["x0"] = from_vector(a.x0);
    ja["ref"] = from_vector(a.x_ref);
    ja["comm_radius"] = a.comm_radius;
    ja["sigma"] = a.sigma;
    doc["agents"].push_back(std::move(ja));
  }
  doc["ocp"] = {{"N", sc.ocp.N},
                {"beta", sc.ocp.beta},
                {"d_min", sc.ocp.d_min},
                {"n_facets", sc.ocp.n_facets},
                {"weights",
                 {{"q_t", from_vector(sc.ocp.q_t)},
                  {"r_t", from_vector(sc.ocp.r_t)},
                  {"q_s", from_vector(sc.ocp.q_s)},
                  {"r_s", from_vector(sc.ocp.r_s)},
                  {"t_o", from_vector(sc.ocp.t_o)}}}};
  doc["sim"] = {{"steps", sc.steps}, {"seed", sc.seed}};
  return doc.dump(2);
}

std::string log_to_csv(const sim::SimLog& log, const sim::Scenario& scenario) {
  const int n = scenario.agents.front().model->n;
  const int m = scenario.agents.front().model->m;
  std::ostringstream out;
  out << "k,id";
  for (int i = 0; i < n; ++i) out << ",x" << i;
  for (int i = 0; i < m; ++i) out << ",u" << i;
  out << ",cluster,J_t,J_s,J_s_bound,status,fallback\n";
  for (const auto& step : log.steps) {
    for (size_t a = 0; a < step.agents.size(); ++a) {
      const auto& rec = step.agents[a];
      out << step.k << ',' << scenario.agents[a].id;
      for (int i = 0; i < n; ++i) out << ',' << fmt(rec.x(i));
      for (int i = 0; i < m; ++i) out << ',' << fmt(rec.u(i));
      out << ',' << rec.cluster << ',' << fmt(rec.j_track) << ',' << fmt(rec.j_safe) << ','
          << fmt(rec.j_safe_bound) << ',' << solver::to_string(rec.status) << ','
          << (rec.fallback ? 1 : 0) << '\n';
    }
  }
  for (size_t a = 0; a < log.final_states.size(); ++a) {
    out << log.steps.size() << ',' << scenario.agents[a].id;
    for (int i = 0; i < n; ++i) out << ',' << fmt(log.final_states[a](i));
    for (int i = 0; i < m; ++i) out << ',';
    out << ",,,,,\n";
  }
  return out.str();
}

std::string log_to_json(const sim::SimLog& log, const sim::Scenario& scenario) {
  json doc;
  doc["format"] = "swarm-mpc-log-v1";
  doc["agents"] = json::array();
  for (const auto& a : scenario.agents) {
    json ja;
    ja["id"] = a.id;
    ja["model"] = a.model_kind;
    ja["n"] = a.model->n;
    ja["m"] = a.model->m;
    ja["comm_radius"] = a.comm_radius;
    ja["sigma"] = a.sigma;
    ja["ref"] = from_vector(a.x_ref);
    const auto safe_set = geometry::build_safe_set(
        geometry::Disc{{0, 0}, a.comm_radius}, a.sigma + 0.5 * scenario.ocp.d_min,
        scenario.ocp.n_facets);
    json poly = json::array();
    for (const auto& v : safe_set.vertices()) poly.push_back({v.x(), v.y()});
    ja["safe_polygon"] = std::move(poly);
    doc["agents"].push_back(std::move(ja));
  }
  doc["ocp"] = {{"N", scenario.ocp.N},
                {"beta", scenario.ocp.beta},
                {"d_min", scenario.ocp.d_min},
                {"n_facets", scenario.ocp.n_facets}};
  doc["steps"] = json::array();
  for (const auto& step : log.steps) {
    json js;
    js["k"] = step.k;
    js["edges"] = json::array();
    for (auto [i, j] : step.topology.graph.edges) js["edges"].push_back({i, j});
    js["clusters"] = step.topology.clusters;
    js["agents"] = json::array();
    for (const auto& rec : step.agents) {
      json jr;
      jr["x"] = from_vector(rec.x);
      jr["u"] = from_vector(rec.u);
      jr["cluster"] = rec.cluster;
      jr["j_track"] = rec.j_track;
      jr["j_safe"] = rec.j_safe;
      if (std::isfinite(rec.j_safe_bound))
        jr["j_safe_bound"] = rec.j_safe_bound;
      else
        jr["j_safe_bound"] = nullptr;
      jr["status"] = solver::to_string(rec.status);
      jr["fallback"] = rec.fallback;
      js["agents"].push_back(std::move(jr));
    }
    js["plug_events"] = json::array();
    for (const auto& ev : step.plug_events) {
      json je;
      je["agent"] = ev.agent;
      je["kind"] = ev.kind == network::PlugEvent::Kind::PlugIn ? "plug_in" : "plug_out";
      je["affected"] = ev.affected;
      js["plug_events"].push_back(std::move(je));
    }
    js["warnings"] = step.warnings;
    if (!step.safe_predictions.empty()) {
      json preds = json::array();
      for (const auto& traj : step.safe_predictions) {
        json jt = json::array();
        for (const auto& p : traj) jt.push_back({p.x(), p.y()});
        preds.push_back(std::move(jt));
      }
      js["safe_predictions"] = std::move(preds);
    }
    doc["steps"].push_back(std::move(js));
  }
  doc["final_states"] = json::array();
  for (const auto& x : log.final_states) doc["final_states"].push_back(from_vector(x));
  return doc.dump();
}

sim::SimLog log_from_json(const std::string& json_text, const sim::Scenario& scenario) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("log: invalid JSON: ") + e.what());
  }
  if (!doc.contains("format") || doc["format"] != "swarm-mpc-log-v1")
    throw std::invalid_argument("log: not a swarm-mpc log document");
  if (doc["agents"].size() != scenario.agents.size())
    throw std::invalid_argument("log: agent count differs from the scenario");

  sim::SimLog log;
  for (const auto& js : doc["steps"]) {
    sim::SimStep step;
    step.k = js["k"].get<int>();
    step.topology.graph.k = step.k;
    step.topology.graph.n_agents = static_cast<int>(scenario.agents.size());
    for (const auto& e : js["edges"])
      step.topology.graph.edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    for (const auto& c : js["clusters"]) step.topology.clusters.push_back(c.get<std::vector<int>>());
    for (const auto& jr : js["agents"]) {
      sim::StepAgentRecord rec;
      rec.x = to_vector(jr["x"], "x");
      rec.u = to_vector(jr["u"], "u");
      rec.cluster = jr["cluster"].get<int>();
      rec.j_track = jr["j_track"].get<double>();
      rec.j_safe = jr["j_safe"].get<double>();
      rec.j_safe_bound = jr["j_safe_bound"].is_null()
                             ? std::numeric_limits<double>::infinity()
                             : jr["j_safe_bound"].get<double>();
      const std::string st = jr["status"].get<std::string>();
      rec.status = st == "optimal" ? solver::SolveStatus::Optimal
                   : st == "max_iter" ? solver::SolveStatus::MaxIter
                                      : solver::SolveStatus::Infeasible;
      rec.fallback = jr["fallback"].get<bool>();
      step.agents.push_back(std::move(rec));
    }
    for (const auto& je : js["plug_events"]) {
      network::PlugEvent ev;
      ev.agent = je["agent"].get<int>();
      ev.kind = je["kind"] == "plug_in" ? network::PlugEvent::Kind::PlugIn
                                        : network::PlugEvent::Kind::PlugOut;
      for (const auto& a : je["affected"]) ev.affected.insert(a.get<int>());
      step.plug_events.push_back(std::move(ev));
    }
    for (const auto& w : js["warnings"]) step.warnings.push_back(w.get<std::string>());
    if (js.contains("safe_predictions")) {
      for (const auto& jt : js["safe_predictions"]) {
        std::vector<Eigen::Vector2d> traj;
        for (const auto& p : jt) traj.push_back({p[0].get<double>(), p[1].get<double>()});
        step.safe_predictions.push_back(std::move(traj));
      }
    }
    log.steps.push_back(std::move(step));
  }
  for (const auto& x : doc["final_states"]) log.final_states.push_back(to_vector(x, "final state"));
  if (log.final_states.size() != scenario.agents.size())
    throw std::invalid_argument("log: missing final states");
  return log;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

}  // namespace swarm::io
