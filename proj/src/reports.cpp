#include "gridrisk/reports.hpp"

#include <cstdio>
#include <ostream>
#include <sstream>

namespace gridrisk {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

ReportSet build_reports(const CampaignFile& campaign, double bin_width_mw) {
  std::vector<SampleOutcome> outcomes;
  outcomes.reserve(campaign.records.size());
  for (const auto& rec : campaign.records) outcomes.push_back(rec.outcome());
  ReportSet r;
  r.summary = summarize(outcomes, campaign.header.min_overloads(), bin_width_mw);
  r.management = management_report(outcomes, campaign.header.baseline);
  return r;
}

std::string summary_csv(const RiskSummary& s) {
  std::ostringstream out;
  out << "metric,value\n";
  out << "samples," << s.samples << '\n';
  for (const auto c : kAllCategories) {
    out << "count_" << to_string(c) << ',' << s.count(c) << '\n';
  }
  for (const auto c : kAllCategories) {
    out << "share_" << to_string(c) << ',' << num(s.share(c)) << '\n';
  }
  out << "share_at_least_one_overload," << num(s.share_at_least_one) << '\n';
  out << "share_at_least_u_overloads," << num(s.share_at_least_u) << '\n';
  out << "mean_impact_mw," << num(s.mean_impact_mw) << '\n';
  out << "mean_measurable_impact_mw," << num(s.mean_measurable_impact_mw) << '\n';
  out << "unique_attack_vectors," << s.unique_attack_vectors << '\n';
  out << "unique_meter_sets," << s.unique_meter_sets << '\n';
  return out.str();
}

std::string meters_csv(const ManagementReport& m, std::span<const int> bus_ids) {
  std::ostringstream out;
  out << "bus_id,frequency\n";
  for (const auto& [bus, share] : m.meter_frequency) {
    out << (bus < bus_ids.size() ? bus_ids[bus] : static_cast<int>(bus)) << ',' << num(share) << '\n';
  }
  return out.str();
}

std::string overlap_csv(const ManagementReport& m) {
  std::ostringstream out;
  out << "k,share\n";
  for (std::size_t k = 1; k < m.overlap_counts.size(); ++k) out << k << ',' << num(m.overlap_counts[k]) << '\n';
  return out.str();
}

std::string branch_groups_csv(const ManagementReport& m) {
  std::ostringstream out;
  out << "branches,share\n";
  for (const auto& [set, share] : m.branch_group_frequency) {
    std::string key;
    for (const auto b : set) key += (key.empty() ? "" : ";") + std::to_string(b + 1);
    out << (key.empty() ? "none" : key) << ',' << num(share) << '\n';
  }
  return out.str();
}

std::string impact_hist_csv(const RiskSummary& s) {
  std::ostringstream out;
  out << "bin_left_mw,count\n";
  for (std::size_t k = 0; k < s.histogram.counts.size(); ++k) {
    out << num(static_cast<double>(k) * s.histogram.bin_width_mw) << ',' << s.histogram.counts[k] << '\n';
  }
  return out.str();
}

void write_reports(const std::filesystem::path& dir, const ReportSet& r, std::span<const int> bus_ids) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "summary.csv", summary_csv(r.summary));
  write_file_atomic(dir / "meters.csv", meters_csv(r.management, bus_ids));
  write_file_atomic(dir / "overlap.csv", overlap_csv(r.management));
  write_file_atomic(dir / "branch_groups.csv", branch_groups_csv(r.management));
  write_file_atomic(dir / "impact_hist.csv", impact_hist_csv(r.summary));
}

void print_summary(std::ostream& out, const RiskSummary& s) {
  char line[96];
  out << "samples: " << s.samples << '\n';
  for (const auto c : kAllCategories) {
    std::snprintf(line, sizeof line, "  %-15s %6zu  %6.1f%%\n", to_string(c).c_str(), s.count(c), 100.0 * s.share(c));
    out << line;
  }
  std::snprintf(line, sizeof line, "  >= 1 overload   %6.1f%%\n", 100.0 * s.share_at_least_one);
  out << line;
  std::snprintf(line, sizeof line, "  >= U overloads  %6.1f%%\n", 100.0 * s.share_at_least_u);
  out << line;
  std::snprintf(line, sizeof line, "mean impact: %.2f MW (measurable %.2f MW)\n", s.mean_impact_mw,
                s.mean_measurable_impact_mw);
  out << line;
  out << "unique attack vectors: " << s.unique_attack_vectors << " (meter sets: " << s.unique_meter_sets << ")\n";
}

}  // namespace gridrisk
