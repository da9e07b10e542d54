#include "gridrisk/campaign_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace gridrisk {

using nlohmann::json;

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::uint64_t parse_hash_hex(const std::string& text) {
  if (text.size() != 16) throw CampaignSchemaError("malformed hash '" + text + "'");
  char* end = nullptr;
  const auto v = std::strtoull(text.c_str(), &end, 16);
  if (end != text.c_str() + text.size()) throw CampaignSchemaError("malformed hash '" + text + "'");
  return v;
}

double round_sig6(double value) {
  if (!std::isfinite(value)) return value;
  if (std::abs(value) < kPersistFloor) return 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  const double r = std::strtod(buf, nullptr);
  return r == 0.0 ? 0.0 : r;  // no negative zero in the output
}

namespace {

json rounded(const std::vector<double>& values) {
  json a = json::array();
  for (const double v : values) a.push_back(round_sig6(v));
  return a;
}

json overload_json(const Overload& o) {
  return {{"branch", o.branch + 1},
          {"direction", o.direction == FlowDirection::Positive ? "+" : "-"},
          {"loading", round_sig6(o.loading_ratio)},
          {"excess_mw", round_sig6(o.excess_mw)}};
}

Overload overload_from_json(const json& j) {
  Overload o;
  const auto branch = j.at("branch").get<std::size_t>();
  if (branch == 0) throw CampaignSchemaError("branch numbers start at 1");
  o.branch = branch - 1;
  o.direction = j.at("direction").get<std::string>() == "-" ? FlowDirection::Negative : FlowDirection::Positive;
  o.loading_ratio = j.at("loading").get<double>();
  o.excess_mw = j.at("excess_mw").get<double>();
  return o;
}

std::string attack_status_text(AttackStatus s) { return s == AttackStatus::Found ? "found" : "none"; }

}  // namespace

json to_json(const GridCase& grid) {
  json buses = json::array();
  for (const auto& b : grid.buses) buses.push_back({b.external_id, b.demand_mw});
  json branches = json::array();
  for (const auto& br : grid.branches) branches.push_back({br.from, br.to, br.reactance_pu, br.capacity_mw});
  json gens = json::array();
  for (const auto& g : grid.generators) {
    gens.push_back({g.bus, g.base_dispatch_mw, g.min_output_mw, g.max_output_mw, g.redispatch_cost, g.quadratic_cost});
  }
  return {{"base_mva", grid.base_mva},
          {"reference_bus", grid.reference_bus},
          {"buses", buses},
          {"branches", branches},
          {"generators", gens}};
}

json to_json(const AttackerConfig& c) {
  json j = {{"U", c.min_overloads},
            {"A", c.budget},
            {"epsilon", c.epsilon},
            {"rho", c.rho},
            {"big_m_dual", c.big_m_dual},
            {"big_m_retries", c.big_m_retries}};
  j["big_m_flag"] = c.big_m_flag ? json(*c.big_m_flag) : json(nullptr);
  return j;
}

json to_json(const ErrorSpec& s) {
  return {{"target", to_string(s.target)},
          {"half_range", s.half_range},
          {"samples", s.sample_count},
          {"master_seed", s.master_seed}};
}

json to_json(const lp::SolveSettings& s) {
  return {{"time_limit", s.time_limit_s}, {"mip_gap", s.mip_rel_gap}, {"deterministic", s.deterministic},
          {"seed", s.seed}};
}

std::uint64_t CampaignSpec::attack_hash() const {
  const json j = {{"grid", to_json(grid.grid())}, {"attacker", to_json(attacker)}, {"solver", to_json(solver)}};
  return fnv1a64(j.dump());
}

std::uint64_t CampaignSpec::spec_hash() const {
  const json j = {{"grid", to_json(grid.grid())},
                  {"attacker", to_json(attacker)},
                  {"error", to_json(error)},
                  {"solver", to_json(solver)}};
  return fnv1a64(j.dump());
}

json to_json(const ImpactReport& impact) {
  json over = json::array();
  for (const auto& o : impact.overloaded) over.push_back(overload_json(o));
  json sub = json::array();
  for (const auto& o : impact.sub_threshold_overloads) sub.push_back(overload_json(o));
  return {{"overloaded", over},
          {"sub_threshold", sub},
          {"count", impact.count_above_threshold},
          {"total_mw", round_sig6(impact.total_impact)},
          {"measurable_mw", round_sig6(impact.measurable_impact)}};
}

ImpactReport impact_from_json(const json& j) {
  ImpactReport r;
  for (const auto& o : j.at("overloaded")) r.overloaded.push_back(overload_from_json(o));
  for (const auto& o : j.at("sub_threshold")) r.sub_threshold_overloads.push_back(overload_from_json(o));
  r.count_above_threshold = j.at("count").get<std::size_t>();
  r.total_impact = j.at("total_mw").get<double>();
  r.measurable_impact = j.at("measurable_mw").get<double>();
  return r;
}

json to_json(const PerfectBaseline& b) {
  return {{"found", b.found},
          {"config_hash", hash_hex(b.config_hash)},
          {"meter_flags", b.meter_flags},
          {"injections_mw", rounded(b.injections_mw)},
          {"impact", to_json(b.impact)}};
}

PerfectBaseline baseline_from_json(const json& j) {
  AttackerSolution attack;
  attack.status = j.at("found").get<bool>() ? AttackStatus::Found : AttackStatus::NoFeasibleAttack;
  attack.meter_flags = j.at("meter_flags").get<std::vector<int>>();
  attack.injections_mw = j.at("injections_mw").get<std::vector<double>>();
  return make_baseline(attack, impact_from_json(j.at("impact")),
                       parse_hash_hex(j.at("config_hash").get<std::string>()));
}

json to_json(const SampleRecord& rec) {
  const auto& a = rec.attacker_solution;
  json perceived = json::array();
  for (std::size_t l = 0; l < a.overload_pos.size(); ++l) {
    if (a.overload_pos[l] != 0 || (l < a.overload_neg.size() && a.overload_neg[l] != 0)) perceived.push_back(l + 1);
  }
  json attack = {{"status", attack_status_text(a.status)},
                 {"meter_flags", a.meter_flags},
                 {"injections_mw", rounded(a.injections_mw)},
                 {"perceived_objective_mw", round_sig6(a.perceived_objective)},
                 {"perceived_overloads", perceived},
                 {"big_m_doublings", a.big_m_doublings},
                 {"big_m_tight", a.big_m_tight}};
  const auto& r = rec.operator_response;
  json response = {{"status", r.status == OperatorStatus::Feasible ? "feasible" : "infeasible"},
                   {"redispatch_mw", rounded(r.redispatch_mw)},
                   {"cost", round_sig6(r.redispatch_cost)}};
  return {{"sample", rec.sample_index},
          {"multipliers", rounded(rec.multipliers)},
          {"attack", attack},
          {"response", response},
          {"true_flows_mw", rounded(rec.true_flows_mw)},
          {"impact", to_json(rec.true_impact)},
          {"category", to_string(rec.category)},
          {"operator_infeasible", rec.operator_infeasible},
          {"retried", rec.retried}};
}

SampleRecord record_from_json(const json& j) {
  SampleRecord rec;
  rec.sample_index = j.at("sample").get<int>();
  rec.multipliers = j.at("multipliers").get<std::vector<double>>();
  const auto& a = j.at("attack");
  auto& s = rec.attacker_solution;
  const auto status = a.at("status").get<std::string>();
  if (status != "found" && status != "none") throw CampaignSchemaError("unknown attack status '" + status + "'");
  s.status = status == "found" ? AttackStatus::Found : AttackStatus::NoFeasibleAttack;
  s.meter_flags = a.at("meter_flags").get<std::vector<int>>();
  s.injections_mw = a.at("injections_mw").get<std::vector<double>>();
  s.perceived_objective = a.at("perceived_objective_mw").get<double>();
  // Direction is not persisted; a listed branch comes back as a positive flag.
  const auto branches = j.at("true_flows_mw").size();
  s.overload_pos.assign(branches, 0);
  s.overload_neg.assign(branches, 0);
  for (const auto& b : a.at("perceived_overloads")) {
    const auto l = b.get<std::size_t>();
    if (l == 0 || l > branches) throw CampaignSchemaError("perceived overload on unknown branch");
    s.overload_pos[l - 1] = 1;
  }
  s.big_m_doublings = a.at("big_m_doublings").get<int>();
  s.big_m_tight = a.at("big_m_tight").get<bool>();
  const auto& r = j.at("response");
  rec.operator_response.status =
      r.at("status").get<std::string>() == "feasible" ? OperatorStatus::Feasible : OperatorStatus::Infeasible;
  rec.operator_response.redispatch_mw = r.at("redispatch_mw").get<std::vector<double>>();
  rec.operator_response.redispatch_cost = r.at("cost").get<double>();
  rec.true_flows_mw = j.at("true_flows_mw").get<std::vector<double>>();
  rec.true_impact = impact_from_json(j.at("impact"));
  try {
    rec.category = parse_category(j.at("category").get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw CampaignSchemaError(e.what());
  }
  rec.operator_infeasible = j.at("operator_infeasible").get<bool>();
  rec.retried = j.at("retried").get<bool>();
  return rec;
}

int CampaignHeader::min_overloads() const { return spec.at("attacker").at("U").get<int>(); }

CampaignHeader make_header(const CampaignSpec& spec, const PerfectBaseline& baseline) {
  CampaignHeader h;
  h.spec_hash = spec.spec_hash();
  h.spec = {{"grid", spec.grid_label},
            {"attacker", to_json(spec.attacker)},
            {"error", to_json(spec.error)},
            {"solver", to_json(spec.solver)}};
  for (const auto& b : spec.grid->buses) h.bus_ids.push_back(b.external_id);
  h.baseline = baseline;
  return h;
}

json to_json(const CampaignHeader& h) {
  return {{"format", kCampaignFormat},
          {"version", kCampaignVersion},
          {"spec_hash", hash_hex(h.spec_hash)},
          {"spec", h.spec},
          {"bus_ids", h.bus_ids},
          {"baseline", to_json(h.baseline)}};
}

CampaignHeader header_from_json(const json& j) {
  if (!j.is_object() || j.value("format", "") != kCampaignFormat) {
    throw CampaignSchemaError("not a campaign file header");
  }
  if (j.value("version", 0) != kCampaignVersion) {
    throw CampaignSchemaError("unsupported campaign format version " + j.value("version", json(0)).dump());
  }
  try {
    CampaignHeader h;
    h.spec_hash = parse_hash_hex(j.at("spec_hash").get<std::string>());
    h.spec = j.at("spec");
    h.bus_ids = j.at("bus_ids").get<std::vector<int>>();
    h.baseline = baseline_from_json(j.at("baseline"));
    (void)h.min_overloads();
    return h;
  } catch (const json::exception& e) {
    throw CampaignSchemaError(std::string("malformed campaign header: ") + e.what());
  }
}

CampaignFile read_campaign(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CampaignSchemaError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw CampaignSchemaError(path.string() + " is empty");
  CampaignFile file;
  try {
    file.header = header_from_json(json::parse(line));
  } catch (const json::exception& e) {
    throw CampaignSchemaError(std::string("unreadable campaign header: ") + e.what());
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      file.records.push_back(record_from_json(json::parse(line)));
    } catch (const std::exception&) {
      ++file.invalid_lines;
    }
  }
  return file;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    if (!out.flush()) throw std::runtime_error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_campaign(const std::filesystem::path& path, const CampaignHeader& header,
                    const std::vector<SampleRecord>& records) {
  std::ostringstream text;
  text << to_json(header).dump() << '\n';
  for (const auto& rec : records) text << to_json(rec).dump() << '\n';
  write_file_atomic(path, text.str());
}

}  // namespace gridrisk
