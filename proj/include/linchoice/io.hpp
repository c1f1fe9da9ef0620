#ifndef LINCHOICE_IO_HPP
#define LINCHOICE_IO_HPP

// Flat-file formats:
//   candidates.csv / voters.csv   header f1,...,fd; one vector per row
//   utilities.csv                 header c0,...,c(m-1); one voter per row
//   profile.jsonl                 {"ranking":[...]} or {"pairs":[[a,b],...]} per line
//   ratings.csv                   like utilities.csv; empty or "nan" cells are missing

#include "linchoice/model.hpp"

#include "json.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace linchoice {

/// Unreadable, unwritable, or syntactically malformed input.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using json = nlohmann::json;

/// Shortest round-trip decimal form; "inf" for infinities.
inline std::string format_number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline json number_json(double x) { return std::isfinite(x) ? json(x) : json(format_number(x)); }

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return in;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  return out;
}

inline double parse_cell(const std::string& cell, const std::string& where, bool allow_missing) {
  if (cell.empty() || cell == "nan" || cell == "NaN" || cell == "NA") {
    if (allow_missing) return std::numeric_limits<double>::quiet_NaN();
    throw IoError(where + ": missing value");
  }
  double x = 0.0;
  auto res = std::from_chars(cell.data(), cell.data() + cell.size(), x);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
    throw IoError(where + ": cannot parse '" + cell + "' as a number");
  }
  return x;
}

/// Header cells must read prefix+first, prefix+(first+1), ...
inline Matrix read_csv_matrix(const std::string& path, const std::string& prefix, int first, bool allow_missing) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ": empty file");
  const std::vector<std::string> header = split_csv(line);
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] != prefix + std::to_string(static_cast<int>(j) + first)) {
      throw IoError(path + ":1: header cell " + std::to_string(j + 1) + " should be '" + prefix +
                    std::to_string(static_cast<int>(j) + first) + "', got '" + header[j] + "'");
    }
  }
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> cells = split_csv(line);
    const std::string where = path + ":" + std::to_string(lineno);
    if (cells.size() != header.size()) {
      throw IoError(where + ": expected " + std::to_string(header.size()) + " values, got " +
                    std::to_string(cells.size()));
    }
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_cell(c, where, allow_missing));
    rows.push_back(std::move(row));
  }
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < header.size(); ++j) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return out;
}

inline void write_csv_matrix(std::ostream& out, const Matrix& m, const std::string& prefix, int first) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << prefix << (j + first);
  out << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_number(m(i, j));
    out << "\n";
  }
}

}  // namespace detail

inline Matrix read_vectors_csv(const std::string& path) { return detail::read_csv_matrix(path, "f", 1, false); }
inline Matrix read_utilities_csv(const std::string& path) { return detail::read_csv_matrix(path, "c", 0, false); }
inline Matrix read_ratings_csv(const std::string& path) { return detail::read_csv_matrix(path, "c", 0, true); }

inline void write_vectors_csv(const std::string& path, const Matrix& m) {
  auto out = detail::open_out(path);
  detail::write_csv_matrix(out, m, "f", 1);
}

inline void write_utilities_csv(const std::string& path, const Matrix& m) {
  auto out = detail::open_out(path);
  detail::write_csv_matrix(out, m, "c", 0);
}

/// Parses one preference record; syntax problems throw IoError naming the line.
inline Preference parse_preference(const std::string& text, const std::string& where) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw IoError(where + ": invalid JSON: " + e.what());
  }
  try {
    if (j.is_object() && j.contains("ranking")) return Preference::total(j.at("ranking").get<std::vector<int>>());
    if (j.is_object() && j.contains("pairs")) {
      std::vector<std::pair<int, int>> pairs;
      for (const auto& p : j.at("pairs")) {
        if (!p.is_array() || p.size() != 2) throw IoError(where + ": each pair must be [a, b]");
        pairs.emplace_back(p[0].get<int>(), p[1].get<int>());
      }
      return Preference::partial(std::move(pairs));
    }
  } catch (const json::exception& e) {
    throw IoError(where + ": " + e.what());
  }
  throw IoError(where + ": expected an object with \"ranking\" or \"pairs\"");
}

/// Reads profile.jsonl. The candidate count is taken from `m` when given,
/// otherwise from the largest index mentioned.
inline Profile read_profile_jsonl(const std::string& path, std::optional<std::size_t> m = std::nullopt) {
  std::ifstream in = detail::open_in(path);
  std::vector<Preference> prefs;
  std::string line;
  std::size_t lineno = 0;
  int top = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Preference p = parse_preference(line, path + ":" + std::to_string(lineno));
    for (int c : p.ranking) top = std::max(top, c);
    for (auto [a, b] : p.pairs) top = std::max({top, a, b});
    prefs.push_back(std::move(p));
  }
  if (prefs.empty()) throw IoError(path + ": no preference records");
  return Profile(std::move(prefs), m.value_or(static_cast<std::size_t>(top + 1)));
}

inline void write_profile_jsonl(std::ostream& out, const Profile& profile) {
  for (std::size_t v = 0; v < profile.num_voters(); ++v) {
    const Preference& p = profile.voter(v);
    json j;
    if (p.is_total()) {
      j["ranking"] = p.ranking;
    } else {
      json pairs = json::array();
      for (auto [a, b] : p.pairs) pairs.push_back({a, b});
      j["pairs"] = pairs;
    }
    out << j.dump() << "\n";
  }
}

inline void write_profile_jsonl(const std::string& path, const Profile& profile) {
  auto out = detail::open_out(path);
  write_profile_jsonl(out, profile);
}

inline json lottery_json(const Lottery& lottery) {
  json arr = json::array();
  for (Eigen::Index c = 0; c < lottery.probabilities().size(); ++c) arr.push_back(lottery.probabilities()(c));
  return arr;
}

/// Reads {"lottery":[...]} (as printed by the lottery command) or a bare array.
inline Lottery read_lottery_json(const std::string& path) {
  std::ifstream in = detail::open_in(path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError(path + ": invalid JSON: " + e.what());
  }
  const json& arr = j.is_object() ? j.value("lottery", json()) : j;
  if (!arr.is_array()) throw IoError(path + ": expected a \"lottery\" array");
  std::vector<double> p;
  try {
    p = arr.get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  return Lottery(Eigen::Map<const Vector>(p.data(), static_cast<Eigen::Index>(p.size())));
}

/// Writes candidates.csv, voters.csv (when known), utilities.csv (when known),
/// profile.jsonl and meta.json into `dir`.
inline void write_instance(const std::string& dir, const Instance& inst, const json& extra_meta = json::object()) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir + "': " + ec.message());
  const std::filesystem::path base(dir);
  write_vectors_csv((base / "candidates.csv").string(), inst.candidates.vectors());
  if (inst.voters) write_vectors_csv((base / "voters.csv").string(), inst.voters->vectors());
  if (inst.utilities) write_utilities_csv((base / "utilities.csv").string(), inst.utilities->matrix());
  write_profile_jsonl((base / "profile.jsonl").string(), inst.profile);
  json meta = extra_meta;
  meta["family"] = inst.family;
  meta["n"] = inst.profile.num_voters();
  meta["m"] = inst.candidates.size();
  meta["d"] = inst.candidates.dim();
  if (inst.seed) meta["seed"] = *inst.seed;
  auto out = detail::open_out((base / "meta.json").string());
  out << meta.dump(2) << "\n";
}

}  // namespace linchoice

#endif  // LINCHOICE_IO_HPP
