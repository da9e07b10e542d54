#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gridrisk/analytics.hpp"
#include "gridrisk/campaign_io.hpp"

namespace gridrisk {

struct ReportSet {
  RiskSummary summary;
  ManagementReport management;
};

ReportSet build_reports(const CampaignFile& campaign, double bin_width_mw = 5.0);

/// summary.csv, meters.csv, overlap.csv, branch_groups.csv and impact_hist.csv.
void write_reports(const std::filesystem::path& dir, const ReportSet& reports, std::span<const int> bus_ids);

std::string summary_csv(const RiskSummary& summary);
std::string meters_csv(const ManagementReport& report, std::span<const int> bus_ids);
std::string overlap_csv(const ManagementReport& report);
std::string branch_groups_csv(const ManagementReport& report);
std::string impact_hist_csv(const RiskSummary& summary);

void print_summary(std::ostream& out, const RiskSummary& summary);

}  // namespace gridrisk
