#pragma once

// The cdkit command-line program. run() parses arguments, dispatches to a
// subcommand and maps failures to exit codes: 0 on success, 2 for bad
// arguments, configs or files, 1 for numeric failures inside the library.

#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cdkit/compare.hpp"
#include "cdkit/inference.hpp"
#include "cdkit/io.hpp"
#include "cdkit/multivariate.hpp"
#include "cdkit/simlab.hpp"

namespace cdkit::cli {

using io::Json;

inline const std::vector<double>& summary_levels() {
  static const std::vector<double> levels{0.90, 0.95, 0.99};
  return levels;
}

namespace detail {

inline void emit(const Json& j, const std::string& path, std::ostream& out) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty()) {
    out << text;
    return;
  }
  auto f = io::open_output(path);
  f << text;
}

inline std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    double v = 0.0;
    require(io::detail::parse_number(io::detail::trim(cell), v), ErrorKind::config,
            what + ": '" + cell + "' is not a number");
    out.push_back(v);
  }
  require(!out.empty(), ErrorKind::config, what + " is empty");
  return out;
}

inline Vector to_vector(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())); }

inline void check_levels(const std::vector<double>& levels) {
  for (double l : levels) require(l > 0.0 && l < 1.0, ErrorKind::config, "levels must lie in (0, 1)");
}

/// Point estimates and equal-tailed intervals; the mode is null for CDs
/// without a density.
inline Json summarize(const ConfidenceDistribution& h, const std::vector<double>& levels) {
  Json est;
  est["median"] = io::number(cd_median(h));
  est["mean"] = io::number(cd_mean(h));
  try {
    est["mode"] = io::number(cd_mode(h));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::unsupported_representation) throw;
    est["mode"] = nullptr;
  }
  Json intervals = Json::array();
  for (double l : levels) {
    const Interval ci = central_interval(h, l);
    intervals.push_back({{"level", l}, {"lo", io::number(ci.lo)}, {"hi", io::number(ci.hi)}});
  }
  Json j;
  j["representation"] = h.is_grid() ? "grid" : h.is_sample() ? "sample" : "analytic";
  j["estimates"] = est;
  j["intervals"] = intervals;
  return j;
}

inline ConfidenceDistribution load_cd(const std::string& path) {
  auto in = io::open_input(path);
  return io::read_cd_csv(in);
}

inline MultiCd load_cloud(const std::string& path) {
  auto in = io::open_input(path);
  return io::read_cloud_csv(in);
}

inline DepthSpec depth_spec(const std::string& kind, int directions) {
  require(kind == "mahalanobis" || kind == "tukey", ErrorKind::config, "depth must be 'mahalanobis' or 'tukey'");
  require(directions >= 180, ErrorKind::config, "directions must be at least 180");
  return {kind == "mahalanobis" ? DepthSpec::Kind::mahalanobis : DepthSpec::Kind::tukey, directions};
}

// ---- construct ----

struct ConstructOptions {
  std::string model;
  std::string sigma = "unknown";
  std::string method = "pivot";
  std::string data;
  std::size_t bootstrap_b = 1000;
  std::uint64_t seed = 1;
  std::size_t knots = 3001;
  std::string out;
  std::string summary;
};

/// Maps the short model names onto generator presets. "known=<s>" or a bare
/// number fixes sigma for the normal mean; "unknown" leaves it free.
inline GeneratorConfig construct_config(const ConstructOptions& o, std::size_t n) {
  GeneratorConfig c;
  c.constructor = o.method;
  c.n = n;
  c.seed = o.seed;
  c.bootstrap_b = o.bootstrap_b;
  std::optional<double> sigma;
  if (o.sigma != "unknown") {
    const std::string v = o.sigma.rfind("known=", 0) == 0 ? o.sigma.substr(6) : o.sigma;
    double s = 0.0;
    require(io::detail::parse_number(v, s), ErrorKind::config, "--sigma must be 'unknown', 'known=<value>' or a number");
    sigma = s;
  }
  std::string model = o.model;
  if (model == "normal-mean") model = sigma ? "normal-mean-known-sigma" : "normal-mean-unknown-sigma";
  if (model == "correlation") model = "bivariate-normal-correlation";
  c.model = model;
  if (model == "normal-mean-known-sigma") {
    require(sigma.has_value(), ErrorKind::config, "normal-mean-known-sigma needs --sigma known=<value>");
  } else {
    require(!sigma.has_value(), ErrorKind::config, "--sigma applies only to the normal mean");
  }
  if (sigma) c.sigma = *sigma;
  // theta0 only drives simulation; it is set to a value every preset accepts.
  c.theta0 = (model == "normal-variance" || model == "exponential-rate") ? 1.0 : 0.0;
  return c;
}

inline int construct(const ConstructOptions& o, std::ostream& out) {
  require(o.knots >= 3, ErrorKind::config, "--knots must be at least 3");
  const bool paired = o.model == "correlation" || o.model == "bivariate-normal-correlation";
  Dataset d;
  {
    auto in = io::open_input(o.data);
    if (paired) {
      const PairedSample p = io::read_paired_csv(in);
      d.x.assign(p.x().begin(), p.x().end());
      d.y.assign(p.y().begin(), p.y().end());
    } else {
      const DataSample s = io::read_data_csv(in);
      d.x.assign(s.values().begin(), s.values().end());
    }
  }
  const GeneratorConfig c = construct_config(o, d.x.size());
  const CdGenerator gen = make_generator(c);
  const ConfidenceDistribution h = io::tabulate(gen.build(d, gen.aux_stream(0)), o.knots);
  if (!o.out.empty()) {
    auto f = io::open_output(o.out);
    io::write_cd_csv(f, h);
  }
  Json j;
  j["config"] = {{"command", "construct"}, {"model", c.model},        {"method", c.constructor},
                 {"sigma", o.sigma},       {"data", o.data},          {"n", c.n},
                 {"bootstrap_b", c.bootstrap_b}, {"seed", c.seed}, {"knots", o.knots},
                 {"out", o.out.empty() ? Json(nullptr) : Json(o.out)}};
  j.update(summarize(h, summary_levels()));
  emit(j, o.summary, out);
  return 0;
}

// ---- estimate / test ----

inline int estimate(const std::string& cd_path, const std::string& levels_text, const std::string& out_path,
                    std::ostream& out) {
  const auto levels = parse_list(levels_text, "--levels");
  check_levels(levels);
  const ConfidenceDistribution h = load_cd(cd_path);
  Json j;
  j["config"] = {{"command", "estimate"}, {"cd", cd_path}, {"levels", levels}};
  j.update(summarize(h, levels));
  emit(j, out_path, out);
  return 0;
}

inline int test(const std::string& cd_path, std::string region_text, const std::string& out_path, std::ostream& out) {
  Json region_json;
  if (!region_text.empty() && region_text.front() == '@') {
    region_json = io::read_json_file(region_text.substr(1));
  } else {
    region_json = io::parse_json(region_text, "--region");
  }
  const NullRegion region = io::region_from_json(region_json);
  const ConfidenceDistribution h = load_cd(cd_path);
  Json j;
  j["config"] = {{"command", "test"}, {"cd", cd_path}, {"region", io::to_json(region)}};
  j["support"] = io::to_json(support_report(h, region));
  emit(j, out_path, out);
  return 0;
}

// ---- compare ----

struct CompareOptions {
  std::string config1;
  std::string config2;
  std::string eps = "0.1,0.25,0.5";
  std::size_t reps = 1000;
  std::string loss = "squared";
  std::string psi = "identity";
  std::string weight = "point";
  double weight_sd = 1.0;
  std::string slopes1;
  std::string slopes2;
  std::string out;
};

inline std::vector<io::SlopeRow> slope_table(const CdGenerator& gen, const std::vector<double>& eps) {
  const ConfidenceDistribution h = gen.cd(0);
  std::vector<io::SlopeRow> rows;
  for (double e : eps) rows.push_back({gen.n, e, bahadur_slopes(h, gen.theta0, e, gen.n)});
  return rows;
}

inline Json to_json(const std::vector<io::SlopeRow>& rows) {
  Json a = Json::array();
  for (const auto& r : rows) {
    a.push_back({{"n", r.n}, {"eps", r.eps}, {"left_slope", io::number(r.slopes.left)},
                 {"right_slope", io::number(r.slopes.right)}});
  }
  return a;
}

inline int compare(const CompareOptions& o, std::ostream& out) {
  const auto eps = parse_list(o.eps, "--eps");
  for (double e : eps) require(e > 0.0, ErrorKind::config, "eps values must be positive");
  require(o.reps >= 100, ErrorKind::config, "--reps must be at least 100");
  require(o.loss == "squared" || o.loss == "absolute", ErrorKind::config, "--loss must be 'squared' or 'absolute'");
  require(o.psi == "identity" || o.psi == "square", ErrorKind::config, "--psi must be 'identity' or 'square'");
  require(o.weight == "point" || o.weight == "gaussian", ErrorKind::config, "--weight must be 'point' or 'gaussian'");
  require(o.weight_sd > 0.0, ErrorKind::config, "--weight-sd must be positive");
  const GeneratorConfig c1 = io::generator_config_from_json(io::read_json_file(o.config1));
  const GeneratorConfig c2 = io::generator_config_from_json(io::read_json_file(o.config2));
  require(c1.theta0 == c2.theta0, ErrorKind::config, "both configs must share theta0");
  const CdGenerator g1 = make_generator(c1);
  const CdGenerator g2 = make_generator(c2);

  const LossSpec loss = o.loss == "squared" ? squared_error() : absolute_error();
  const RiskSpec risk_spec{o.psi == "identity" ? psi_identity() : psi_square(),
                           o.weight == "point" ? point_mass_weight(c1.theta0) : gaussian_weight(c1.theta0, o.weight_sd)};
  const auto s1 = slope_table(g1, eps);
  const auto s2 = slope_table(g2, eps);
  if (!o.slopes1.empty()) {
    auto f = io::open_output(o.slopes1);
    io::write_slopes_csv(f, s1);
  }
  if (!o.slopes2.empty()) {
    auto f = io::open_output(o.slopes2);
    io::write_slopes_csv(f, s2);
  }

  Json j;
  j["config"] = {{"command", "compare"},
                 {"config1", io::to_json(c1)},
                 {"config2", io::to_json(c2)},
                 {"eps", eps},
                 {"reps", o.reps},
                 {"loss", o.loss},
                 {"psi", o.psi},
                 {"weight", o.weight},
                 {"weight_sd", o.weight_sd}};
  j["dominance"] = io::to_json(dominance_mc(g1, g2, c1.theta0, eps, o.reps));
  j["dispersion"] = {{"1", io::to_json(mc_dispersion(g1, loss, o.reps))},
                     {"2", io::to_json(mc_dispersion(g2, loss, o.reps))}};
  j["risk"] = {{"1", io::to_json(risk(g1, risk_spec, o.reps))}, {"2", io::to_json(risk(g2, risk_spec, o.reps))}};
  j["slopes"] = {{"1", to_json(s1)}, {"2", to_json(s2)}};
  emit(j, o.out, out);
  return 0;
}

// ---- calibrate ----

inline int calibrate(const std::string& config_path, const std::string& u_path, const std::string& out_path,
                     std::ostream& out) {
  const Json cfg = io::read_json_file(config_path);
  const GeneratorConfig c = io::generator_config_from_json(cfg, {"reps", "levels"});
  const std::size_t reps = io::detail::count_field(cfg, "reps", 1000);
  require(reps >= 100, ErrorKind::config, "reps must be at least 100");
  const auto levels = io::detail::field<std::vector<double>>(cfg, "levels", default_levels());
  check_levels(levels);
  const CalibrationReport report = cdkit::calibrate(make_generator(c), reps, levels);
  if (!u_path.empty()) {
    auto f = io::open_output(u_path);
    io::write_u_values_csv(f, report);
  }
  Json resolved = io::to_json(c);
  resolved["reps"] = reps;
  resolved["levels"] = levels;
  Json j;
  j["config"] = {{"command", "calibrate"}, {"generator", resolved}};
  j["report"] = io::to_json(report);
  emit(j, out_path, out);
  return 0;
}

// ---- mv ----

inline GaussianMeanModel gaussian_model_from_json(const Json& cfg, const std::vector<std::string>& extra) {
  std::vector<std::string> known{"theta0", "sigma", "n", "seed"};
  known.insert(known.end(), extra.begin(), extra.end());
  io::detail::reject_unknown(cfg, known);
  require(cfg.contains("theta0") && cfg.contains("sigma"), ErrorKind::config, "mv config needs theta0 and sigma");
  GaussianMeanModel m;
  const auto theta0 = io::detail::field<std::vector<double>>(cfg, "theta0", {});
  const auto sigma = io::detail::field<std::vector<std::vector<double>>>(cfg, "sigma", {});
  m.theta0 = to_vector(theta0);
  const auto k = static_cast<Eigen::Index>(theta0.size());
  require(static_cast<Eigen::Index>(sigma.size()) == k, ErrorKind::config, "sigma must have one row per coordinate");
  m.sigma.resize(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    require(static_cast<Eigen::Index>(sigma[static_cast<std::size_t>(i)].size()) == k, ErrorKind::config,
            "sigma must be square");
    for (Eigen::Index c = 0; c < k; ++c) m.sigma(i, c) = sigma[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
  }
  m.n = io::detail::count_field(cfg, "n", m.n);
  m.seed = io::detail::count_field(cfg, "seed", m.seed);
  m.validate();
  return m;
}

inline Json to_json(const GaussianMeanModel& m) {
  std::vector<std::vector<double>> rows;
  for (Eigen::Index i = 0; i < m.sigma.rows(); ++i) {
    rows.emplace_back();
    for (Eigen::Index c = 0; c < m.sigma.cols(); ++c) rows.back().push_back(m.sigma(i, c));
  }
  return {{"theta0", std::vector<double>(m.theta0.data(), m.theta0.data() + m.theta0.size())},
          {"sigma", rows},
          {"n", m.n},
          {"seed", m.seed}};
}

struct MvOptions {
  std::string cloud;
  std::string lambda;
  std::string x;
  std::string depth = "mahalanobis";
  int directions = 360;
  std::string levels = "0.5,0.9";
  std::string config;
  std::size_t rep = 0;
  std::size_t m = 2000;
  std::string out;
  std::string centrality_out;
};

inline int mv_cloud(const MvOptions& o, std::ostream& out) {
  const GaussianMeanModel model = gaussian_model_from_json(io::read_json_file(o.config), {});
  require(o.m >= 1000, ErrorKind::config, "--m must be at least 1000");
  require(!o.out.empty(), ErrorKind::config, "mv cloud needs --out");
  const MultiCd mcd = model.cloud(o.rep, o.m);
  {
    auto f = io::open_output(o.out);
    io::write_cloud_csv(f, mcd);
  }
  Json j;
  j["config"] = {{"command", "mv cloud"}, {"model", to_json(model)}, {"rep", o.rep}, {"m", o.m}, {"out", o.out}};
  j["dim"] = mcd.dim();
  j["size"] = mcd.size();
  emit(j, "", out);
  return 0;
}

inline int mv_project(const MvOptions& o, std::ostream& out) {
  const MultiCd mcd = load_cloud(o.cloud);
  const Vector lambda = to_vector(parse_list(o.lambda, "--lambda"));
  const ConfidenceDistribution h = project(mcd, lambda);
  if (!o.out.empty()) {
    auto f = io::open_output(o.out);
    io::write_cd_csv(f, h);
  }
  Json j;
  j["config"] = {{"command", "mv project"},
                 {"cloud", o.cloud},
                 {"lambda", parse_list(o.lambda, "--lambda")},
                 {"out", o.out.empty() ? Json(nullptr) : Json(o.out)}};
  j.update(summarize(h, summary_levels()));
  emit(j, "", out);
  return 0;
}

inline int mv_depth(const MvOptions& o, bool with_centrality, std::ostream& out) {
  const DepthSpec spec = depth_spec(o.depth, o.directions);
  const MultiCd mcd = load_cloud(o.cloud);
  const auto xs = parse_list(o.x, "--x");
  const Vector x = to_vector(xs);
  require(x.size() == mcd.dim(), ErrorKind::config, "--x has the wrong dimension for the cloud");
  Json j;
  j["config"] = {{"command", with_centrality ? "mv centrality" : "mv depth"},
                 {"cloud", o.cloud},
                 {"x", xs},
                 {"depth", o.depth},
                 {"directions", o.directions}};
  if (!with_centrality) {
    j["depth"] = depth(spec, mcd, x);
  } else {
    const auto levels = parse_list(o.levels, "--levels");
    check_levels(levels);
    j["config"]["levels"] = levels;
    const Centrality cf(spec, mcd);
    j["depth"] = cf.depth(x);
    j["centrality"] = cf(x);
    Json regions = Json::array();
    for (double l : levels) regions.push_back({{"level", l}, {"inside", central_region_test(cf, l, x)}});
    j["central_regions"] = regions;
  }
  emit(j, "", out);
  return 0;
}

inline int mv_coverage(const MvOptions& o, std::ostream& out) {
  const Json cfg = io::read_json_file(o.config);
  const GaussianMeanModel model = gaussian_model_from_json(cfg, {"reps", "m", "levels", "depth", "directions"});
  const std::size_t reps = io::detail::count_field(cfg, "reps", 1000);
  const std::size_t m = io::detail::count_field(cfg, "m", 2000);
  const auto levels = io::detail::field<std::vector<double>>(cfg, "levels", {0.5, 0.9});
  const std::string kind = io::detail::field<std::string>(cfg, "depth", "mahalanobis");
  const int directions = io::detail::field<int>(cfg, "directions", 360);
  require(reps >= 100, ErrorKind::config, "reps must be at least 100");
  require(m >= 1000, ErrorKind::config, "m must be at least 1000");
  check_levels(levels);
  const MvCoverageReport report = cdkit::mv_coverage(model, depth_spec(kind, directions), levels, reps, m);
  if (!o.centrality_out.empty()) {
    auto f = io::open_output(o.centrality_out);
    f << "replicate,centrality\n";
    for (std::size_t r = 0; r < report.centrality.size(); ++r) f << r << ',' << io::format_double(report.centrality[r]) << '\n';
  }
  Json resolved = to_json(model);
  resolved["reps"] = reps;
  resolved["m"] = m;
  resolved["levels"] = levels;
  resolved["depth"] = kind;
  resolved["directions"] = directions;
  Json j;
  j["config"] = {{"command", "mv coverage"}, {"experiment", resolved}};
  j["report"] = io::to_json(report);
  emit(j, o.out, out);
  return 0;
}

}  // namespace detail

/// Runs the program on `args` (without the program name).
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Confidence distributions from data files and simulation configs", "cdkit"};
  app.require_subcommand(1);

  detail::ConstructOptions co;
  auto* construct = app.add_subcommand("construct", "Build a CD from a data file");
  construct->add_option("--model", co.model, "normal-mean | normal-variance | correlation | exponential-rate")->required();
  construct->add_option("--sigma", co.sigma, "unknown | known=<value>")->capture_default_str();
  construct->add_option("--method", co.method, "pivot | bootstrap-* | likelihood | wald")->capture_default_str();
  construct->add_option("--data", co.data, "CSV with one column (two for correlation)")->required();
  construct->add_option("--B", co.bootstrap_b, "bootstrap replicates")->capture_default_str();
  construct->add_option("--seed", co.seed, "resampling seed")->capture_default_str();
  construct->add_option("--knots", co.knots, "knots when tabulating an analytic CD")->capture_default_str();
  construct->add_option("--out", co.out, "write the CD as CSV");
  construct->add_option("--summary", co.summary, "write the summary JSON here instead of stdout");

  std::string cd_path, levels = "0.9,0.95,0.99", region, out_path;
  auto* estimate = app.add_subcommand("estimate", "Point estimates and intervals from a CD file");
  estimate->add_option("--cd", cd_path, "CD CSV")->required();
  estimate->add_option("--levels", levels, "interval levels")->capture_default_str();
  estimate->add_option("--out", out_path, "write JSON here instead of stdout");

  auto* test = app.add_subcommand("test", "Support of a null region under a CD");
  test->add_option("--cd", cd_path, "CD CSV")->required();
  test->add_option("--region", region, "region JSON, or @file")->required();
  test->add_option("--out", out_path, "write JSON here instead of stdout");

  detail::CompareOptions cmp;
  auto* compare = app.add_subcommand("compare", "Compare two CD generators by simulation");
  compare->add_option("--config1", cmp.config1, "generator config JSON")->required();
  compare->add_option("--config2", cmp.config2, "generator config JSON")->required();
  compare->add_option("--eps", cmp.eps, "comma-separated eps grid")->capture_default_str();
  compare->add_option("--reps", cmp.reps, "Monte Carlo replications")->capture_default_str();
  compare->add_option("--loss", cmp.loss, "squared | absolute")->capture_default_str();
  compare->add_option("--psi", cmp.psi, "identity | square")->capture_default_str();
  compare->add_option("--weight", cmp.weight, "point | gaussian")->capture_default_str();
  compare->add_option("--weight-sd", cmp.weight_sd, "sd of the gaussian weight")->capture_default_str();
  compare->add_option("--slopes1", cmp.slopes1, "slope CSV for generator 1");
  compare->add_option("--slopes2", cmp.slopes2, "slope CSV for generator 2");
  compare->add_option("--out", cmp.out, "write JSON here instead of stdout");

  std::string cal_config, u_values;
  auto* calibrate = app.add_subcommand("calibrate", "Calibration report for a generator config");
  calibrate->add_option("--config", cal_config, "generator config JSON with reps and levels")->required();
  calibrate->add_option("--u-values", u_values, "write H(theta0) per replicate as CSV");
  calibrate->add_option("--out", out_path, "write JSON here instead of stdout");

  detail::MvOptions mo;
  auto* mv = app.add_subcommand("mv", "Multivariate CDs stored as clouds");
  mv->require_subcommand(1);
  auto* mv_cloud = mv->add_subcommand("cloud", "Draw a Gaussian-mean CD cloud");
  mv_cloud->add_option("--config", mo.config, "model JSON")->required();
  mv_cloud->add_option("--rep", mo.rep, "replicate index")->capture_default_str();
  mv_cloud->add_option("--m", mo.m, "cloud size")->capture_default_str();
  mv_cloud->add_option("--out", mo.out, "cloud CSV")->required();
  auto* mv_project = mv->add_subcommand("project", "CD of lambda' theta");
  mv_project->add_option("--cloud", mo.cloud, "cloud CSV")->required();
  mv_project->add_option("--lambda", mo.lambda, "comma-separated coefficients")->required();
  mv_project->add_option("--out", mo.out, "write the projected CD as CSV");
  auto* mv_depth = mv->add_subcommand("depth", "Depth of a point in a cloud");
  auto* mv_centrality = mv->add_subcommand("centrality", "Centrality and central-region membership");
  for (auto* sub : {mv_depth, mv_centrality}) {
    sub->add_option("--cloud", mo.cloud, "cloud CSV")->required();
    sub->add_option("--x", mo.x, "comma-separated point")->required();
    sub->add_option("--depth", mo.depth, "mahalanobis | tukey")->capture_default_str();
    sub->add_option("--directions", mo.directions, "directions for 2-D Tukey depth")->capture_default_str();
  }
  mv_centrality->add_option("--levels", mo.levels, "central-region levels")->capture_default_str();
  auto* mv_coverage = mv->add_subcommand("coverage", "Coverage experiment for a Gaussian-mean model");
  mv_coverage->add_option("--config", mo.config, "experiment JSON")->required();
  mv_coverage->add_option("--centrality", mo.centrality_out, "write C(theta0) per replicate as CSV");
  mv_coverage->add_option("--out", mo.out, "write JSON here instead of stdout");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "cdkit: error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*construct) return detail::construct(co, out);
    if (*estimate) return detail::estimate(cd_path, levels, out_path, out);
    if (*test) return detail::test(cd_path, region, out_path, out);
    if (*compare) return detail::compare(cmp, out);
    if (*calibrate) return detail::calibrate(cal_config, u_values, out_path, out);
    if (*mv_cloud) return detail::mv_cloud(mo, out);
    if (*mv_project) return detail::mv_project(mo, out);
    if (*mv_depth) return detail::mv_depth(mo, false, out);
    if (*mv_centrality) return detail::mv_depth(mo, true, out);
    if (*mv_coverage) return detail::mv_coverage(mo, out);
  } catch (const Error& e) {
    err << "cdkit: error: " << e.what() << '\n';
    return e.kind() == ErrorKind::config ? 2 : 1;
  } catch (const std::exception& e) {
    err << "cdkit: error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace cdkit::cli
