#include "gridrisk/case_parser.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>

namespace gridrisk {

namespace {

// MATPOWER column indices (0-based).
constexpr std::size_t BUS_I = 0, BUS_TYPE = 1, PD = 2;
constexpr std::size_t GEN_BUS = 0, PG = 1, GEN_STATUS = 7, PMAX = 8, PMIN = 9;
constexpr std::size_t F_BUS = 0, T_BUS = 1, BR_X = 3, RATE_A = 5, BR_STATUS = 10;
constexpr std::size_t MODEL = 0, NCOST = 3, COST = 4;

constexpr int kReferenceBusType = 3;

std::string strip_comments(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_comment = false;
  for (char c : text) {
    if (c == '\n') {
      in_comment = false;
      out.push_back(c);
    } else if (c == '%') {
      in_comment = true;
    } else if (!in_comment) {
      out.push_back(c);
    }
  }
  return out;
}

std::size_t line_of(const std::string& text, std::size_t pos) {
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Position just after `mpc.<name> =`, or nullopt.
std::optional<std::size_t> find_assignment(const std::string& text, std::string_view name) {
  const std::string key = "mpc." + std::string(name);
  std::size_t pos = 0;
  while ((pos = text.find(key, pos)) != std::string::npos) {
    std::size_t after = pos + key.size();
    const bool bounded_left = pos == 0 || !is_ident_char(text[pos - 1]);
    if (bounded_left && (after >= text.size() || !is_ident_char(text[after]))) {
      while (after < text.size() && std::isspace(static_cast<unsigned char>(text[after]))) ++after;
      if (after < text.size() && text[after] == '=') return after + 1;
    }
    pos += key.size();
  }
  return std::nullopt;
}

double parse_number(std::string_view token, const std::string& text, std::size_t pos) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    std::ostringstream msg;
    msg << "non-numeric token '" << token << "' at line " << line_of(text, pos);
    throw CaseError(CaseError::Kind::NonNumericToken, msg.str());
  }
  return value;
}

NumericTable parse_matrix(const std::string& text, std::string_view name) {
  auto start = find_assignment(text, name);
  if (!start) {
    throw CaseError(CaseError::Kind::MissingTable, "missing table '" + std::string(name) + "'");
  }
  std::size_t pos = text.find('[', *start);
  const std::size_t close = text.find(']', *start);
  if (pos == std::string::npos || close == std::string::npos || close < pos) {
    throw CaseError(CaseError::Kind::MissingTable,
                    "table '" + std::string(name) + "' has no bracketed matrix");
  }
  ++pos;

  NumericTable rows;
  std::vector<double> row;
  auto flush = [&] {
    if (!row.empty()) rows.push_back(std::move(row));
    row.clear();
  };
  while (pos < close) {
    const char c = text[pos];
    if (c == ';' || c == '\n') {
      flush();
      ++pos;
    } else if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
      ++pos;
    } else {
      std::size_t end = pos;
      while (end < close && !std::isspace(static_cast<unsigned char>(text[end])) && text[end] != ';' &&
             text[end] != ',') {
        ++end;
      }
      row.push_back(parse_number(std::string_view(text).substr(pos, end - pos), text, pos));
      pos = end;
    }
  }
  flush();
  return rows;
}

double parse_scalar(const std::string& text, std::string_view name) {
  auto start = find_assignment(text, name);
  if (!start) {
    throw CaseError(CaseError::Kind::MissingTable, "missing table '" + std::string(name) + "'");
  }
  const std::size_t end = text.find(';', *start);
  std::string token(text.substr(*start, end == std::string::npos ? std::string::npos : end - *start));
  token.erase(std::remove_if(token.begin(), token.end(), [](unsigned char c) { return std::isspace(c); }),
              token.end());
  return parse_number(token, text, *start);
}

void check_shape(const NumericTable& table, std::string_view name, std::size_t min_columns) {
  if (table.empty()) {
    throw CaseError(CaseError::Kind::MissingTable, "table '" + std::string(name) + "' is empty");
  }
  const std::size_t width = table.front().size();
  for (std::size_t i = 0; i < table.size(); ++i) {
    std::string reason;
    if (table[i].size() < min_columns) {
      reason = "has " + std::to_string(table[i].size()) + " columns, need at least " +
               std::to_string(min_columns);
    } else if (table[i].size() != width) {
      reason = "has " + std::to_string(table[i].size()) + " columns, first row has " +
               std::to_string(width);
    }
    if (!reason.empty()) {
      throw CaseError(CaseError::Kind::MalformedRow,
                      "table '" + std::string(name) + "' row " + std::to_string(i) + " " + reason);
    }
  }
}

struct CostCoefficients {
  double linear = 0.0;
  double quadratic = 0.0;
};

CostCoefficients cost_coefficients(const std::vector<double>& row, std::size_t index) {
  const auto n = static_cast<std::size_t>(row[NCOST]);
  if (row[MODEL] == 2.0) {
    if (COST + n > row.size()) {
      throw CaseError(CaseError::Kind::MalformedRow,
                      "table 'gencost' row " + std::to_string(index) + " declares " + std::to_string(n) +
                          " coefficients but has fewer columns");
    }
    // Coefficients are stored highest order first: c(n-1) ... c1 c0.
    CostCoefficients out;
    if (n >= 2) out.linear = row[COST + n - 2];
    if (n >= 3) out.quadratic = row[COST + n - 3];
    return out;
  }
  if (row[MODEL] == 1.0) {
    if (n < 2 || COST + 2 * n > row.size()) {
      throw CaseError(CaseError::Kind::MalformedRow,
                      "table 'gencost' row " + std::to_string(index) + " has an invalid piecewise curve");
    }
    const double dx = row[COST + 2] - row[COST];
    return {dx != 0.0 ? (row[COST + 3] - row[COST + 1]) / dx : 0.0, 0.0};
  }
  throw CaseError(CaseError::Kind::MalformedRow,
                  "table 'gencost' row " + std::to_string(index) + " has unknown cost model");
}

}  // namespace

RawCaseTables parse_case(std::string_view text) {
  const std::string clean = strip_comments(text);
  RawCaseTables tables;
  tables.base_mva = parse_scalar(clean, "baseMVA");
  tables.bus = parse_matrix(clean, "bus");
  tables.gen = parse_matrix(clean, "gen");
  tables.branch = parse_matrix(clean, "branch");
  tables.gencost = parse_matrix(clean, "gencost");

  if (!(tables.base_mva > 0.0)) {
    throw CaseError(CaseError::Kind::MalformedRow, "baseMVA must be positive");
  }
  check_shape(tables.bus, "bus", kBusColumns);
  check_shape(tables.gen, "gen", kGenColumns);
  check_shape(tables.branch, "branch", kBranchColumns);
  check_shape(tables.gencost, "gencost", kGencostColumns);
  return tables;
}

RawCaseTables parse_case(std::istream& in) {
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_case(buffer.str());
}

RawCaseTables parse_case_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CaseError(CaseError::Kind::Unreadable, "cannot open case file '" + path + "'");
  return parse_case(in);
}

GridCase build_grid(const RawCaseTables& tables, double capacity_scale) {
  if (!(capacity_scale > 0.0 && capacity_scale <= 1.0)) {
    throw CaseError(CaseError::Kind::InvalidScale, "capacity scale must lie in (0, 1]");
  }
  if (tables.gencost.size() < tables.gen.size()) {
    throw CaseError(CaseError::Kind::MalformedRow, "table 'gencost' has fewer rows than 'gen'");
  }

  GridCase grid;
  grid.base_mva = tables.base_mva;

  std::map<int, std::size_t> index_of;
  std::optional<std::size_t> reference;
  for (const auto& row : tables.bus) {
    const int id = static_cast<int>(row[BUS_I]);
    if (!index_of.emplace(id, grid.buses.size()).second) {
      throw CaseError(CaseError::Kind::MalformedRow, "duplicate bus id " + std::to_string(id));
    }
    if (static_cast<int>(row[BUS_TYPE]) == kReferenceBusType && !reference) reference = grid.buses.size();
    if (row[PD] < 0.0) {
      throw CaseError(CaseError::Kind::MalformedRow, "bus " + std::to_string(id) + " has negative demand");
    }
    grid.buses.push_back({id, row[PD]});
  }
  grid.reference_bus = reference.value_or(0);

  auto lookup = [&](double external, const std::string& where) {
    auto it = index_of.find(static_cast<int>(external));
    if (it == index_of.end()) {
      throw CaseError(CaseError::Kind::MalformedRow,
                      where + " references unknown bus " + std::to_string(static_cast<int>(external)));
    }
    return it->second;
  };

  for (std::size_t i = 0; i < tables.branch.size(); ++i) {
    const auto& row = tables.branch[i];
    if (row[BR_STATUS] == 0.0) continue;
    const std::string where = "branch " + std::to_string(i + 1);
    if (!(row[BR_X] > 0.0)) {
      throw CaseError(CaseError::Kind::NonPositiveReactance, where + " has non-positive reactance");
    }
    if (!(row[RATE_A] > 0.0)) {
      throw CaseError(CaseError::Kind::NonPositiveCapacity, where + " has non-positive RATE_A");
    }
    grid.branches.push_back(
        {lookup(row[F_BUS], where), lookup(row[T_BUS], where), row[BR_X], capacity_scale * row[RATE_A]});
  }

  for (std::size_t i = 0; i < tables.gen.size(); ++i) {
    const auto& row = tables.gen[i];
    if (row[GEN_STATUS] <= 0.0) continue;
    const std::string where = "generator " + std::to_string(i + 1);
    const auto cost = cost_coefficients(tables.gencost[i], i);
    if (row[PMIN] > row[PMAX]) {
      throw CaseError(CaseError::Kind::InvalidGenerator, where + " has PMIN > PMAX");
    }
    if (cost.linear < 0.0) {
      throw CaseError(CaseError::Kind::InvalidGenerator, where + " has a negative redispatch cost");
    }
    grid.generators.push_back(
        {lookup(row[GEN_BUS], where), row[PG], row[PMIN], row[PMAX], cost.linear, cost.quadratic});
  }

  require_connected(grid);
  return grid;
}

void require_connected(const GridCase& grid) {
  const std::size_t n = grid.bus_count();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& br : grid.branches) parent[find(br.from)] = find(br.to);

  std::map<std::size_t, std::vector<int>> components;
  for (std::size_t b = 0; b < n; ++b) components[find(b)].push_back(grid.buses[b].external_id);
  if (components.size() <= 1) return;

  std::ostringstream msg;
  msg << "grid is disconnected into " << components.size() << " components:";
  for (const auto& [root, ids] : components) {
    msg << " {";
    for (std::size_t k = 0; k < ids.size(); ++k) msg << (k ? "," : "") << ids[k];
    msg << "}";
  }
  throw CaseError(CaseError::Kind::DisconnectedGraph, msg.str());
}

std::vector<double> GridCase::demands() const {
  std::vector<double> d;
  d.reserve(buses.size());
  for (const auto& b : buses) d.push_back(b.demand_mw);
  return d;
}

std::vector<double> GridCase::base_dispatch() const {
  std::vector<double> p;
  p.reserve(generators.size());
  for (const auto& g : generators) p.push_back(g.base_dispatch_mw);
  return p;
}

double GridCase::total_demand() const {
  double total = 0.0;
  for (const auto& b : buses) total += b.demand_mw;
  return total;
}

std::vector<double> GridCase::base_injections() const {
  std::vector<double> inj(buses.size(), 0.0);
  for (const auto& g : generators) inj[g.bus] += g.base_dispatch_mw;
  for (std::size_t n = 0; n < buses.size(); ++n) inj[n] -= buses[n].demand_mw;
  return inj;
}

}  // namespace gridrisk
