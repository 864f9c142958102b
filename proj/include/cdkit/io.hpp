#pragma once

// CSV for numeric arrays and JSON for reports and configs. Doubles are
// written with 17 significant digits so every value reads back exactly.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cdkit/bootstrap.hpp"
#include "cdkit/cd.hpp"
#include "cdkit/compare.hpp"
#include "cdkit/constructors.hpp"
#include "cdkit/error.hpp"
#include "cdkit/inference.hpp"
#include "cdkit/likelihood.hpp"
#include "cdkit/multivariate.hpp"
#include "cdkit/simlab.hpp"
#include "cdkit/special.hpp"

namespace cdkit::io {

using Json = nlohmann::ordered_json;

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::config, "cannot open '" + path + "'");
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  require(out.good(), ErrorKind::config, "cannot write '" + path + "'");
  return out;
}

struct CsvTable {
  std::vector<std::string> header;  // empty when the file has none
  std::vector<std::vector<double>> rows;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline bool parse_number(const std::string& cell, double& v) {
  if (cell.empty()) return false;
  std::size_t used = 0;
  try {
    v = std::stod(cell, &used);
  } catch (...) {
    return false;
  }
  return used == cell.size();
}

}  // namespace detail

/// Reads comma-separated rows; a first row that is not entirely numeric is
/// taken as the header. Blank lines are skipped. `columns` = 0 accepts any
/// width as long as every row has the same one.
inline CsvTable read_csv(std::istream& in, std::size_t columns = 0, const std::string& what = "CSV") {
  CsvTable t;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = columns;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split(line);
    std::vector<double> row(cells.size());
    bool numeric = true;
    for (std::size_t i = 0; i < cells.size(); ++i) numeric = numeric && detail::parse_number(cells[i], row[i]);
    if (!numeric && t.header.empty() && t.rows.empty()) {
      t.header = cells;
      if (width == 0) width = cells.size();
      require(cells.size() == width, ErrorKind::config,
              what + ": header has " + std::to_string(cells.size()) + " columns, expected " + std::to_string(width));
      continue;
    }
    require(numeric, ErrorKind::config, what + ": non-numeric value on line " + std::to_string(line_no));
    if (width == 0) width = row.size();
    require(row.size() == width, ErrorKind::config,
            what + ": line " + std::to_string(line_no) + " has " + std::to_string(row.size()) + " columns, expected " +
                std::to_string(width));
    t.rows.push_back(std::move(row));
  }
  require(!t.rows.empty(), ErrorKind::config, what + ": no data rows");
  return t;
}

inline void write_csv(std::ostream& out, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << format_double(row[j]);
    out << '\n';
  }
}

// ---- confidence distributions ----

/// Grid CDs are written as (theta, H) and weighted samples as (atom, weight).
inline void write_cd_csv(std::ostream& out, const ConfidenceDistribution& h) {
  if (const auto* g = std::get_if<GridRepr>(&h.repr())) {
    std::vector<std::vector<double>> rows(g->theta.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = {g->theta[i], g->value[i]};
    write_csv(out, {"theta", "H"}, rows);
    return;
  }
  if (const auto* s = std::get_if<SampleRepr>(&h.repr())) {
    std::vector<std::vector<double>> rows(s->atoms.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = {s->atoms[i], s->weights[i]};
    write_csv(out, {"atom", "weight"}, rows);
    return;
  }
  fail(ErrorKind::unsupported_representation, "analytic CDs must be tabulated before they are written");
}

/// The header decides the representation; without one the file is read as a grid.
inline ConfidenceDistribution read_cd_csv(std::istream& in) {
  const CsvTable t = read_csv(in, 2, "CD file");
  std::vector<double> a(t.rows.size()), b(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    a[i] = t.rows[i][0];
    b[i] = t.rows[i][1];
  }
  if (t.header.empty() || (t.header[0] == "theta" && t.header[1] == "H")) {
    return ConfidenceDistribution::grid(std::move(a), std::move(b));
  }
  require(t.header[0] == "atom" && t.header[1] == "weight", ErrorKind::config,
          "CD file header must be 'theta,H' or 'atom,weight'");
  return ConfidenceDistribution::weighted_sample(std::move(a), std::move(b));
}

/// Grid version of an analytic CD with knots at the quantiles of Phi(z),
/// z equally spaced on [-7.5, 7.5]. Grid and sample CDs are returned as is.
inline ConfidenceDistribution tabulate(const ConfidenceDistribution& h, std::size_t knots = 3001) {
  if (!h.is_analytic()) return h;
  require(knots >= 3, ErrorKind::domain, "tabulation needs at least 3 knots");
  std::vector<double> theta, value;
  theta.reserve(knots);
  value.reserve(knots);
  for (std::size_t i = 0; i < knots; ++i) {
    const double z = -7.5 + 15.0 * static_cast<double>(i) / static_cast<double>(knots - 1);
    const double t = h.quantile(special::normal_cdf(z));
    if (!std::isfinite(t) || (!theta.empty() && t <= theta.back())) continue;
    theta.push_back(t);
    value.push_back(std::clamp(h.eval(t), value.empty() ? 0.0 : value.back(), 1.0));
  }
  return ConfidenceDistribution::grid(std::move(theta), std::move(value));
}

// ---- data ----

inline DataSample read_data_csv(std::istream& in) {
  const CsvTable t = read_csv(in, 1, "data file");
  std::vector<double> xs;
  xs.reserve(t.rows.size());
  for (const auto& r : t.rows) xs.push_back(r[0]);
  return DataSample(std::move(xs));
}

inline PairedSample read_paired_csv(std::istream& in) {
  const CsvTable t = read_csv(in, 2, "paired data file");
  std::vector<double> xs, ys;
  for (const auto& r : t.rows) {
    xs.push_back(r[0]);
    ys.push_back(r[1]);
  }
  return PairedSample(std::move(xs), std::move(ys));
}

// ---- audit dumps ----

/// Columns replicate_index, theta_B and se_B (empty without an se estimator).
inline void write_replicates_csv(std::ostream& out, const ReplicateSet& set) {
  out << "replicate_index,theta_B,se_B\n";
  for (const auto& r : set.records) {
    out << r.index << ',' << format_double(r.theta) << ',';
    if (!std::isnan(r.se)) out << format_double(r.se);
    out << '\n';
  }
}

inline void write_profile_csv(std::ostream& out, const ProfileCurve& curve) {
  std::vector<std::vector<double>> rows(curve.grid.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = {curve.grid[i], curve.ell_star[i]};
  write_csv(out, {"theta", "ell_star"}, rows);
}

inline void write_cloud_csv(std::ostream& out, const MultiCd& mcd) {
  std::vector<std::string> header;
  for (Eigen::Index j = 0; j < mcd.dim(); ++j) header.push_back("x" + std::to_string(j + 1));
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(mcd.size()));
  for (Eigen::Index i = 0; i < mcd.size(); ++i) {
    const auto row = mcd.cloud().row(i);
    for (Eigen::Index j = 0; j < mcd.dim(); ++j) rows[static_cast<std::size_t>(i)].push_back(row(j));
  }
  write_csv(out, header, rows);
}

inline MultiCd read_cloud_csv(std::istream& in) {
  const CsvTable t = read_csv(in, 0, "cloud file");
  Matrix cloud(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(t.rows.front().size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    for (std::size_t j = 0; j < t.rows[i].size(); ++j) {
      cloud(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = t.rows[i][j];
    }
  }
  return MultiCd(std::move(cloud));
}

struct SlopeRow {
  std::size_t n = 0;
  double eps = 0.0;
  BahadurSlopes slopes;
};

/// Empty tails (slope -inf) are written as "-inf".
inline void write_slopes_csv(std::ostream& out, const std::vector<SlopeRow>& rows) {
  out << "n,eps,left_slope,right_slope\n";
  auto cell = [](double v) { return std::isinf(v) ? std::string(v < 0 ? "-inf" : "inf") : format_double(v); };
  for (const auto& r : rows) {
    out << r.n << ',' << format_double(r.eps) << ',' << cell(r.slopes.left) << ',' << cell(r.slopes.right) << '\n';
  }
}

inline void write_u_values_csv(std::ostream& out, const CalibrationReport& report) {
  out << "replicate,u\n";
  for (std::size_t i = 0; i < report.u_values.size(); ++i) {
    out << report.u_replicates[i] << ',' << format_double(report.u_values[i]) << '\n';
  }
}

// ---- JSON ----

/// Finite doubles as numbers; infinities and NaN as null.
inline Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json numbers(const std::vector<double>& vs) {
  Json a = Json::array();
  for (double v : vs) a.push_back(number(v));
  return a;
}

inline Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::config, what + ": " + e.what());
  }
}

inline Json read_json_file(const std::string& path) {
  auto in = open_input(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json(ss.str(), path);
}

namespace detail {

inline double bound(const Json& v, double if_null, const std::string& what) {
  if (v.is_null()) return if_null;
  require(v.is_number(), ErrorKind::config, what + " must be a number or null");
  return v.get<double>();
}

}  // namespace detail

namespace detail {

inline NullRegion parse_region(const Json& j) {
  require(j.is_object() && j.size() == 1 && (j.contains("intervals") || j.contains("points")), ErrorKind::config,
          "region must be {\"intervals\": [...]} or {\"points\": [...]}");
  if (j.contains("points")) {
    const Json& p = j.at("points");
    require(p.is_array(), ErrorKind::config, "points must be an array");
    std::vector<double> pts;
    for (const auto& v : p) {
      require(v.is_number(), ErrorKind::config, "points must be numbers");
      pts.push_back(v.get<double>());
    }
    return NullRegion::points(std::move(pts));
  }
  const Json& iv = j.at("intervals");
  require(iv.is_array(), ErrorKind::config, "intervals must be an array");
  std::vector<Interval> parts;
  for (const auto& pair : iv) {
    require(pair.is_array() && pair.size() == 2, ErrorKind::config, "each interval must be [lo, hi]");
    parts.push_back({detail::bound(pair[0], -kInfinity, "interval lo"), detail::bound(pair[1], kInfinity, "interval hi")});
  }
  return NullRegion::intervals(std::move(parts));
}

}  // namespace detail

/// {"intervals": [[lo, hi], ...]} with null for an infinite end, or {"points": [...]}.
/// Any problem with the region, including overlapping intervals, is a config error.
inline NullRegion region_from_json(const Json& j) {
  try {
    return detail::parse_region(j);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::config) throw;
    fail(ErrorKind::config, std::string("region: ") + e.what());
  }
}

inline Json to_json(const NullRegion& r) {
  Json j;
  if (r.is_points()) {
    j["points"] = r.point_list();
    return j;
  }
  Json a = Json::array();
  for (const auto& p : r.interval_list()) a.push_back(Json::array({number(p.lo), number(p.hi)}));
  j["intervals"] = a;
  return j;
}

inline Json to_json(const SupportReport& s) {
  Json j;
  j["p_s"] = s.p_s;
  j["p_w"] = s.p_w;
  j["p_s_star"] = s.points_region ? Json(nullptr) : Json(s.p_s_star);
  j["points_region"] = s.points_region;
  Json comps = Json::array();
  for (const auto& c : s.per_component) comps.push_back({{"p_s", c.p_s}, {"p_w", c.p_w}});
  j["per_component"] = comps;
  return j;
}

inline Json to_json(const McEstimate& e) {
  return {{"mean", number(e.mean)}, {"se", number(e.se)}, {"used", e.used}, {"failed", e.failed}};
}

inline Json to_json(const std::vector<CoverageEntry>& table) {
  Json a = Json::array();
  for (const auto& c : table) a.push_back({{"level", c.level}, {"coverage", c.coverage}, {"se", c.se}});
  return a;
}

/// u-values are left to the CSV dump; the report carries their summary.
inline Json to_json(const CalibrationReport& r) {
  Json j;
  j["replicates_used"] = r.u_values.size();
  j["failed"] = r.failed;
  j["ks_statistic"] = r.ks_statistic;
  j["ks_p_value"] = r.ks_p_value;
  j["median_unbiasedness"] = r.median_unbiasedness;
  j["coverage"] = to_json(r.coverage);
  return j;
}

inline Json to_json(const TailComparison& t) {
  return {{"ecdf1", numbers(t.ecdf1)},
          {"ecdf2", numbers(t.ecdf2)},
          {"first_within_tolerance", t.first_within_tolerance},
          {"second_within_tolerance", t.second_within_tolerance},
          {"area", t.area},
          {"verdict", to_string(t.verdict)}};
}

inline Json to_json(const DominanceReport& r) {
  Json j;
  j["verdict"] = to_string(r.verdict);
  j["reps"] = r.reps;
  j["failed"] = r.failed;
  j["tolerance"] = r.tolerance;
  j["interval_widths_consistent"] = r.interval_widths_consistent;
  j["grid"] = numbers(r.grid);
  Json per = Json::array();
  for (const auto& e : r.per_eps) {
    per.push_back({{"eps", e.eps}, {"verdict", to_string(e.verdict)}, {"left", to_json(e.left)}, {"right", to_json(e.right)}});
  }
  j["per_eps"] = per;
  return j;
}

inline Json to_json(const MvCoverageReport& r) {
  Json j;
  j["replicates"] = r.centrality.size();
  j["ks_statistic"] = r.ks_statistic;
  j["ks_p_value"] = r.ks_p_value;
  Json cov = Json::array();
  for (std::size_t i = 0; i < r.levels.size(); ++i) {
    cov.push_back({{"level", r.levels[i]}, {"coverage", r.coverage[i]}, {"se", r.se[i]}});
  }
  j["coverage"] = cov;
  return j;
}

inline Json to_json(const GeneratorConfig& c) {
  return {{"model", c.model},   {"constructor", c.constructor}, {"n", c.n},
          {"theta0", c.theta0}, {"seed", c.seed},               {"sigma", c.sigma},
          {"bootstrap_b", c.bootstrap_b}};
}

namespace detail {

template <class T>
T field(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorKind::config, std::string("config field '") + key + "' has the wrong type");
  }
}

inline std::size_t count_field(const Json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  const Json& v = j.at(key);
  require(v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0), ErrorKind::config,
          std::string("config field '") + key + "' must be a nonnegative integer");
  return v.get<std::size_t>();
}

inline void reject_unknown(const Json& j, const std::vector<std::string>& known) {
  require(j.is_object(), ErrorKind::config, "config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    require(std::find(known.begin(), known.end(), key) != known.end(), ErrorKind::config,
            "unknown config field '" + key + "'");
  }
}

}  // namespace detail

/// Fields missing from `j` keep their defaults; `extra` lists further keys
/// the caller reads from the same object.
inline GeneratorConfig generator_config_from_json(const Json& j, const std::vector<std::string>& extra = {}) {
  std::vector<std::string> known{"model", "constructor", "n", "theta0", "seed", "sigma", "bootstrap_b"};
  known.insert(known.end(), extra.begin(), extra.end());
  detail::reject_unknown(j, known);
  GeneratorConfig c;
  c.model = detail::field<std::string>(j, "model", c.model);
  c.constructor = detail::field<std::string>(j, "constructor", c.constructor);
  c.n = detail::count_field(j, "n", c.n);
  c.theta0 = detail::field<double>(j, "theta0", c.theta0);
  c.seed = detail::count_field(j, "seed", c.seed);
  c.sigma = detail::field<double>(j, "sigma", c.sigma);
  c.bootstrap_b = detail::count_field(j, "bootstrap_b", c.bootstrap_b);
  return c;
}

}  // namespace cdkit::io
