#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "gridrisk/analytics.hpp"
#include "gridrisk/simulation.hpp"

namespace gridrisk {

inline constexpr std::string_view kCampaignFormat = "gridrisk-campaign";
inline constexpr int kCampaignVersion = 1;

class CampaignSchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::uint64_t fnv1a64(std::string_view bytes);
std::string hash_hex(std::uint64_t hash);
std::uint64_t parse_hash_hex(const std::string& text);

/// Nearest double to `value` printed with 6 significant digits. Magnitudes
/// below `kPersistFloor` are solver noise and come out as 0.
inline constexpr double kPersistFloor = 1e-9;
double round_sig6(double value);

nlohmann::json to_json(const GridCase& grid);
nlohmann::json to_json(const AttackerConfig& config);
nlohmann::json to_json(const ErrorSpec& spec);
nlohmann::json to_json(const lp::SolveSettings& settings);

nlohmann::json to_json(const ImpactReport& impact);
ImpactReport impact_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PerfectBaseline& baseline);
PerfectBaseline baseline_from_json(const nlohmann::json& j);

/// The persisted subset of a record. Stage timings are left out so that
/// identical runs give identical files.
nlohmann::json to_json(const SampleRecord& record);
SampleRecord record_from_json(const nlohmann::json& j);

struct CampaignHeader {
  std::uint64_t spec_hash = 0;
  nlohmann::json spec;           // attacker, error and solver settings plus grid label
  std::vector<int> bus_ids;      // external ids by internal bus index
  PerfectBaseline baseline;

  [[nodiscard]] int min_overloads() const;
};

CampaignHeader make_header(const CampaignSpec& spec, const PerfectBaseline& baseline);
nlohmann::json to_json(const CampaignHeader& header);
/// Throws CampaignSchemaError on a wrong format tag or version.
CampaignHeader header_from_json(const nlohmann::json& j);

struct CampaignFile {
  CampaignHeader header;
  std::vector<SampleRecord> records;  // in file order
  std::size_t invalid_lines = 0;      // unparsable or torn lines that were skipped
};

/// Throws CampaignSchemaError when the file is missing or its header is unusable.
CampaignFile read_campaign(const std::filesystem::path& path);

/// Header line followed by one line per record, each newline-terminated.
void write_campaign(const std::filesystem::path& path, const CampaignHeader& header,
                    const std::vector<SampleRecord>& records);

/// Writes `text` to a sibling temporary and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace gridrisk
