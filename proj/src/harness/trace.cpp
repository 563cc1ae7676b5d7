#include "siteswarm/harness/trace.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "siteswarm/errors.hpp"

namespace siteswarm::harness {

using nlohmann::json;

namespace {

json pose_json(const sim::Pose2& p) {
  return json::array({p.position.x(), p.position.y(), p.heading});
}

json vec_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json flags_json(const std::vector<std::uint8_t>& f) {
  json a = json::array();
  for (std::uint8_t v : f) a.push_back(static_cast<int>(v));
  return a;
}

}  // namespace

json terms_to_json(const tasks::RewardTerms& t) {
  return {{"d_o", t.d_o},
          {"d_T", t.d_T},
          {"align_object", t.align_object},
          {"align_grippers", t.align_grippers},
          {"v_o", t.v_o},
          {"c_s", t.c_s},
          {"c_o", t.c_o},
          {"box_shift", t.box_shift},
          {"h_g", t.h_g},
          {"r_o", t.r_o},
          {"r_T", t.r_T}};
}

tasks::RewardTerms terms_from_json(const json& j) {
  tasks::RewardTerms t;
  try {
    t.d_o = j.at("d_o").get<double>();
    t.d_T = j.at("d_T").get<double>();
    t.align_object = j.at("align_object").get<double>();
    t.align_grippers = j.at("align_grippers").get<double>();
    t.v_o = j.at("v_o").get<double>();
    t.c_s = j.at("c_s").get<double>();
    t.c_o = j.at("c_o").get<double>();
    t.box_shift = j.at("box_shift").get<double>();
    t.h_g = j.at("h_g").get<double>();
    t.r_o = j.at("r_o").get<double>();
    t.r_T = j.at("r_T").get<double>();
  } catch (const json::exception& e) {
    throw DecodeError(std::string("trace: bad reward terms: ") + e.what());
  }
  return t;
}

json world_to_json(const sim::WorldState& w) {
  json objects = json::array();
  for (const sim::Object& o : w.objects) objects.push_back({{"name", o.name}, {"pose", pose_json(o.pose)}});
  const sim::CollisionReport& c = w.collisions;
  return {{"step", w.step},
          {"joints", w.joints},
          {"base", pose_json(w.base)},
          {"objects", objects},
          {"grasped", w.grasped},
          {"collisions",
           {{"self", c.self},
            {"object", c.object},
            {"arm_object", flags_json(c.arm_object)},
            {"base_object", c.base_object}}}};
}

json trace_header(const ExperimentConfig& c, const tasks::TaskSpec& spec) {
  const tasks::RewardWeights& w = spec.weights;
  return {{"type", "header"},
          {"task", tasks::task_name(spec.id)},
          {"agents", spec.agent_names},
          {"weights",
           {{"phi1", w.phi1}, {"phi2", w.phi2}, {"phi3", w.phi3},
            {"phi4", w.phi4}, {"phi5", w.phi5}, {"phi6", w.phi6}}},
          {"config", to_json(c)}};
}

json step_to_json(const tasks::StepRecord& r) {
  json actions = json::array();
  for (const Eigen::VectorXd& a : r.actions) actions.push_back(vec_json(a));
  json terms = json::array();
  for (const tasks::RewardTerms& t : r.terms) terms.push_back(terms_to_json(t));
  json events = json::array();
  for (const tasks::StageEvent& e : r.events) {
    events.push_back({{"arm", e.arm},
                      {"kind", tasks::to_string(e.kind)},
                      {"ik_used", e.ik_used},
                      {"ik_success", e.ik.success},
                      {"ik_failure", ik::to_string(e.ik.failure)},
                      {"ik_steps", e.ik.path.size()},
                      {"ik_final_error", e.ik.final_error},
                      {"diagnostic", e.ik.diagnostic}});
  }
  json j = {{"type", "step"},
            {"seed", r.seed},
            {"t", r.t},
            {"world", r.world ? world_to_json(*r.world) : json()},
            {"actions", actions},
            {"terms", terms},
            {"rewards", std::vector<double>(r.rewards.begin(), r.rewards.end())},
            {"events", events},
            {"done", r.done},
            {"success", r.success}};
  if (r.progress) {
    j["progress"] = {{"picked", flags_json(r.progress->picked)},
                     {"placed", flags_json(r.progress->placed)},
                     {"handoff", r.progress->handoff}};
  }
  return j;
}

TraceWriter::TraceWriter(const std::filesystem::path& path, const json& header,
                         std::size_t max_episodes)
    : out_(path, std::ios::trunc), max_episodes_(max_episodes) {
  if (!out_) throw std::runtime_error("trace: cannot write '" + path.string() + "'");
  out_ << header.dump() << '\n';
  ++lines_;
}

std::function<void(const tasks::StepRecord&)> TraceWriter::sink() {
  return [this](const tasks::StepRecord& r) { write(r); };
}

void TraceWriter::write(const tasks::StepRecord& r) {
  if (r.t == 1) ++started_;
  if (started_ == 0 || started_ > max_episodes_) return;
  out_ << step_to_json(r).dump() << '\n';
  out_.flush();
  ++lines_;
}

Trace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("trace '" + path.string() + "' not found");
  Trace t;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DecodeError("trace line " + std::to_string(n) + ": " + e.what());
    }
    const std::string type = j.value("type", "");
    if (n == 1) {
      if (type != "header") throw DecodeError("trace: first line is not a header");
      t.header = std::move(j);
    } else if (type == "step") {
      t.steps.push_back(std::move(j));
    } else {
      throw DecodeError("trace line " + std::to_string(n) + ": unknown record type '" + type + "'");
    }
  }
  if (n == 0) throw DecodeError("trace: empty file");
  return t;
}

RewardAudit audit_rewards(const Trace& trace) {
  RewardAudit a;
  tasks::TaskId id;
  tasks::RewardWeights w;
  try {
    id = tasks::parse_task(trace.header.at("task").get<std::string>());
    const json& jw = trace.header.at("weights");
    w = {jw.at("phi1").get<double>(), jw.at("phi2").get<double>(), jw.at("phi3").get<double>(),
         jw.at("phi4").get<double>(), jw.at("phi5").get<double>(), jw.at("phi6").get<double>()};
  } catch (const json::exception& e) {
    throw DecodeError(std::string("trace: bad header: ") + e.what());
  }
  json prev;
  for (const json& s : trace.steps) {
    std::vector<tasks::RewardTerms> terms;
    for (const json& t : s.at("terms")) terms.push_back(terms_from_json(t));
    const std::vector<double> logged = s.at("rewards").get<std::vector<double>>();
    const std::vector<double> again = tasks::compute_rewards(id, terms, w);
    if (again.size() != logged.size()) throw DecodeError("trace: reward count differs from terms");
    for (std::size_t i = 0; i < logged.size(); ++i) {
      const double e = std::abs(again[i] - logged[i]);
      a.max_abs_error = std::isnan(e) ? INFINITY : std::max(a.max_abs_error, e);
      ++a.rewards;
    }
    ++a.steps;
    if (s.contains("progress")) {
      if (!prev.is_null() && s.at("t").get<int>() > 1) {
        for (const char* key : {"picked", "placed"}) {
          const auto before = prev.at(key).get<std::vector<int>>();
          const auto now = s.at("progress").at(key).get<std::vector<int>>();
          for (std::size_t i = 0; i < now.size() && i < before.size(); ++i) {
            if (before[i] && !now[i]) ++a.flag_reversals;
          }
        }
      }
      prev = s.at("progress");
    }
  }
  return a;
}

void print_trace(const Trace& trace, std::ostream& out) {
  const json& h = trace.header;
  out << "task " << h.value("task", "?") << ", agents";
  for (const json& a : h.at("agents")) out << ' ' << a.get<std::string>();
  out << ", " << trace.steps.size() << " steps\n";
  out << std::fixed << std::setprecision(4);
  for (const json& s : trace.steps) {
    const json& w = s.at("world");
    out << "seed " << s.at("seed").get<std::uint64_t>() << " t=" << s.at("t").get<int>();
    out << "  rewards";
    for (const json& r : s.at("rewards")) out << ' ' << r.get<double>();
    out << '\n';
    const auto& joints = w.at("joints");
    for (std::size_t a = 0; a < joints.size(); ++a) {
      out << "    arm " << a << " q";
      for (const json& q : joints[a]) out << ' ' << q.get<double>();
      out << "  grasped " << w.at("grasped")[a].get<int>() << '\n';
    }
    for (const json& o : w.at("objects")) {
      const auto p = o.at("pose").get<std::vector<double>>();
      out << "    " << o.at("name").get<std::string>() << " (" << p[0] << ", " << p[1] << ") "
          << p[2] << '\n';
    }
    const json& c = w.at("collisions");
    if (c.at("self").get<bool>() || c.at("object").get<bool>()) {
      out << "    contact self=" << c.at("self").get<bool>() << " object=" << c.at("object").get<bool>()
          << '\n';
    }
    for (const json& e : s.at("events")) {
      out << "    event " << e.at("kind").get<std::string>() << " arm " << e.at("arm").get<std::size_t>()
          << (e.at("ik_success").get<bool>() ? " ok" : " failed");
      if (e.at("ik_used").get<bool>()) {
        out << " ik " << e.at("ik_steps").get<std::size_t>() << " steps, error "
            << std::scientific << e.at("ik_final_error").get<double>() << std::fixed;
      }
      const std::string d = e.at("diagnostic").get<std::string>();
      if (!d.empty()) out << " (" << d << ")";
      out << '\n';
    }
    if (s.at("done").get<bool>()) out << "    episode end, success=" << s.at("success").get<bool>() << '\n';
  }
}

}  // namespace siteswarm::harness
