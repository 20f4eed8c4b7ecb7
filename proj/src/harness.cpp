#include "calderon/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "calderon/inverse.hpp"
#include "calderon/parallel.hpp"
#include "calderon/schrodinger.hpp"

namespace calderon::harness {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_number(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(v))
    fail(ErrorKind::config, "key '" + key + "' expects a number, got '" + text + "'");
  return v;
}

int parse_int(const std::string& key, const std::string& text) {
  const double v = parse_number(key, text);
  if (v != std::floor(v) || std::abs(v) > 1e9) fail(ErrorKind::config, "key '" + key + "' expects an integer");
  return static_cast<int>(v);
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(key, item));
  if (out.empty()) fail(ErrorKind::config, "key '" + key + "' expects a comma-separated list");
  return out;
}

Point parse_point(const std::string& key, const std::string& text) {
  const auto v = parse_list(key, text);
  if (v.size() != 2) fail(ErrorKind::config, "key '" + key + "' expects two coordinates");
  return Point(v[0], v[1]);
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {"experiment", "domain", "h",     "gamma", "gamma1", "gamma2",
                                             "t",          "tau",    "x0",    "x0_far", "k_min", "k_max",
                                             "seed",       "angle",  "out",   "threads"};
  return keys;
}

struct Pair {
  double t;
  ConductivityField gamma1;
  ConductivityField gamma2;
};

ConductivityField field_at(const std::string& text, std::optional<double> t) {
  expr::Expression e = expr::Expression::parse(text, {"t"});
  if (t) e = e.bind("t", *t);
  if (e.has_free_parameters()) fail(ErrorKind::config, "expression '" + text + "' uses t but no t list is set");
  return ConductivityField::from_expression(e);
}

bool uses_t(const std::string& text) {
  return expr::Expression::parse(text, {"t"}).has_free_parameters();
}

std::vector<Pair> make_pairs(const ExperimentConfig& c, const std::vector<double>& default_t) {
  std::vector<Pair> pairs;
  if (uses_t(c.gamma1) || uses_t(c.gamma2)) {
    for (double t : c.t.empty() ? default_t : c.t) pairs.push_back({t, field_at(c.gamma1, t), field_at(c.gamma2, t)});
  } else {
    pairs.push_back({c.t.empty() ? 1.0 : c.t.front(), field_at(c.gamma1, std::nullopt),
                     field_at(c.gamma2, std::nullopt)});
  }
  return pairs;
}

std::vector<inverse::LabelledPair> labelled(const std::vector<Pair>& pairs) {
  std::vector<inverse::LabelledPair> out;
  for (const auto& p : pairs) out.push_back({p.t, p.gamma1, p.gamma2});
  return out;
}

void check(bool ok, const std::string& what) {
  if (!ok) fail(ErrorKind::invariant, what);
}

}  // namespace

void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (!known_keys().count(key)) fail(ErrorKind::config, "unknown configuration key '" + key + "'");
  if (key == "experiment") c.experiment = value;
  else if (key == "domain") c.domain = value;
  else if (key == "h") c.h = parse_number(key, value);
  else if (key == "gamma") c.gamma = value;
  else if (key == "gamma1") c.gamma1 = value;
  else if (key == "gamma2") c.gamma2 = value;
  else if (key == "t") c.t = parse_list(key, value);
  else if (key == "tau") c.tau = parse_list(key, value);
  else if (key == "x0") c.x0 = parse_point(key, value);
  else if (key == "x0_far") c.x0_far = parse_point(key, value);
  else if (key == "k_min") c.k_min = parse_int(key, value);
  else if (key == "k_max") c.k_max = parse_int(key, value);
  else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_int(key, value));
  else if (key == "angle") c.angle = parse_number(key, value);
  else if (key == "out") c.out = value;
  else if (key == "threads") c.threads = parse_int(key, value);
  auto it = std::find_if(c.entries.begin(), c.entries.end(), [&](const auto& e) { return e.first == key; });
  if (it != c.entries.end())
    it->second = value;
  else
    c.entries.emplace_back(key, value);
}

ExperimentConfig parse_config(std::istream& is) {
  ExperimentConfig c;
  std::set<std::string> seen;
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      fail(ErrorKind::config, "line " + std::to_string(number) + ": expected 'key = value'");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    if (!seen.insert(key).second) fail(ErrorKind::config, "duplicate configuration key '" + key + "'");
    set_config_value(c, key, body.substr(eq + 1));
  }
  return c;
}

ExperimentConfig parse_config_text(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

void validate_config(const ExperimentConfig& c) {
  if (std::find(kExperiments.begin(), kExperiments.end(), c.experiment) == kExperiments.end())
    fail(ErrorKind::config, "unknown experiment '" + c.experiment + "'");
  geometry::parse_domain_spec(c.domain);
  if (!(c.h > 0.0)) fail(ErrorKind::config, "h must be positive");
  for (const auto* text : {&c.gamma, &c.gamma1, &c.gamma2}) expr::Expression::parse(*text, {"t"});
  for (double t : c.t)
    if (!(t > 0.0)) fail(ErrorKind::config, "t values must be positive");
  for (double t : c.tau)
    if (!(t > 0.0)) fail(ErrorKind::config, "tau values must be positive");
  if (c.k_min < 0 || c.k_max < c.k_min) fail(ErrorKind::config, "need 0 <= k_min <= k_max");
  if (c.threads < 0) fail(ErrorKind::config, "threads must be non-negative");
  if (uses_t(c.gamma)) fail(ErrorKind::config, "gamma must not depend on t");
}

std::string config_hash(const ExperimentConfig& c) {
  std::vector<std::pair<std::string, std::string>> e = c.entries;
  std::sort(e.begin(), e.end());
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& [k, v] : e) {
    if (k == "out" || k == "threads") continue;
    for (char ch : k + "=" + v + "\n") {
      h ^= static_cast<unsigned char>(ch);
      h *= 1099511628211ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invariant:
    case ErrorKind::ellipticity:
    case ErrorKind::coercivity:
    case ErrorKind::geometry:
    case ErrorKind::corkscrew: return 2;
    case ErrorKind::solver:
    case ErrorKind::iteration:
    case ErrorKind::meshing: return 3;
    default: return 1;
  }
}

report::ExperimentReport run_experiment(const ExperimentConfig& c, std::ostream* artifact) {
  validate_config(c);
  const auto domain = geometry::generate_prefractal(geometry::parse_domain_spec(c.domain));
  report::ExperimentReport rep;
  rep.kind = c.experiment;
  rep.add_meta("config_hash", config_hash(c));
  rep.add_meta("threads", std::to_string(parallel::num_threads()));
  for (const auto& [k, v] : c.entries) rep.add_meta("config." + k, v);

  if (c.experiment == "cgo-decay") {
    const std::vector<double> taus = c.tau.empty() ? std::vector<double>{5, 10, 20, 40} : c.tau;
    const auto r = schrodinger::cgo_decay_experiment(domain, field_at(c.gamma, std::nullopt), taus, {c.h, c.angle});
    rep.columns = {"tau", "abs_xi", "norm_R", "residual"};
    double worst = 0.0;
    for (const auto& row : r.rows) {
      rep.add_row({row.tau, row.abs_xi, row.norm_r, row.residual});
      worst = std::max(worst, row.residual);
    }
    rep.add_summary("q_sup", r.q_sup);
    rep.add_summary("slope", r.slope);
    rep.add_summary("plateau", r.plateau);
    rep.add_summary("fit_points", r.fit_points);
    if (r.degenerate) rep.warnings.push_back("q vanishes: R = 0 for every tau");
    check(worst <= 1e-8, "CGO solve residual above 1e-8");
    return rep;
  }
  if (c.experiment == "boundary-stability") {
    std::vector<inverse::ConductivityPair> pairs;
    for (const auto& p : make_pairs(c, {0.05, 0.1, 0.2}))
      pairs.push_back({"t=" + report::format_double(p.t), p.gamma1, p.gamma2});
    auto curve = inverse::boundary_stability_curve(domain, pairs, c.h);
    curve.meta.insert(curve.meta.begin(), rep.meta.begin(), rep.meta.end());
    return curve;
  }

  const Mesh mesh = triangulate(domain, c.h);
  rep.add_meta("vertices", std::to_string(mesh.num_vertices()));
  rep.add_meta("boundary_vertices", std::to_string(mesh.num_boundary()));

  if (c.experiment == "mesh") {
    rep.columns = {"vertices", "triangles", "boundary", "max_edge", "min_angle", "area", "domain_area"};
    rep.add_row({double(mesh.num_vertices()), double(mesh.num_triangles()), double(mesh.num_boundary()),
                 mesh.max_edge_length(), mesh.min_angle_degrees(), mesh.area(), domain.area});
    rep.add_summary("vertices", double(mesh.num_vertices()));
    rep.add_summary("triangles", double(mesh.num_triangles()));
    rep.add_summary("min_angle", mesh.min_angle_degrees());
    rep.add_summary("area", mesh.area());
    check(mesh.min_angle_degrees() >= 20.0, "mesh minimum angle below 20 degrees");
    check(std::abs(mesh.area() - domain.area) <= 1e-9 * domain.area, "mesh area differs from the polygon area");
    if (artifact) write_mesh(*artifact, mesh);
    return rep;
  }
  if (c.experiment == "dtn") {
    const auto dtn = trace::assemble_dtn(mesh, field_at(c.gamma, std::nullopt));
    const auto s = trace::check_structure(dtn.lambda);
    rep.columns = {"n", "symmetry", "constants", "min_eigenvalue"};
    rep.add_row({double(dtn.lambda.rows()), s.symmetry, s.constants, s.min_eigenvalue});
    rep.add_summary("n", double(dtn.lambda.rows()));
    rep.add_summary("min_eigenvalue", s.min_eigenvalue);
    if (artifact) trace::write_dense_csv(*artifact, dtn.lambda);
    check(s.symmetry <= 1e-10, "DtN matrix is not symmetric");
    check(s.constants <= 1e-10, "DtN matrix does not annihilate constants");
    check(s.min_eigenvalue >= -1e-10, "DtN matrix is not positive semidefinite on the complement of constants");
    return rep;
  }
  if (c.experiment == "direct-stability") {
    const auto r = inverse::direct_stability_experiment(mesh, labelled(make_pairs(c, {0.025, 0.05, 0.1, 0.2})));
    rep.columns = {"t", "gamma_diff", "lambda_diff", "measured_c", "formula_c", "ratio", "interpolation_diff"};
    for (const auto& row : r.rows)
      rep.add_row({row.t, row.gamma_diff, row.lambda_diff, row.measured, row.formula, row.ratio,
                   row.interpolation_diff});
    if (r.rows.size() >= 2) {
      rep.add_summary("slope", r.slope);
      rep.add_summary("r2", r.r2);
    }
    rep.add_summary("max_ratio", r.max_ratio);
    rep.add_summary("lambda_diff_max", std::max_element(r.rows.begin(), r.rows.end(), [](auto& a, auto& b) {
                                         return a.lambda_diff < b.lambda_diff;
                                       })->lambda_diff);
    check(r.max_ratio <= 1.0, "measured direct-stability constant exceeds the formula constant");
    return rep;
  }
  if (c.experiment == "boundary-recover") {
    if (uses_t(c.gamma1) || uses_t(c.gamma2)) fail(ErrorKind::config, "boundary-recover takes a single pair");
    const auto g1 = field_at(c.gamma1, std::nullopt);
    const auto g2 = field_at(c.gamma2, std::nullopt);
    const fem::Matrix l1 = trace::assemble_dtn(mesh, g1).lambda;
    const fem::Matrix l2 = trace::assemble_dtn(mesh, g2).lambda;
    const double h = mesh.max_edge_length();
    auto recover = [&](const Point& x0) {
      if (!geometry::on_boundary(domain, x0, 1e-9))
        fail(ErrorKind::config, "x0 must lie on the boundary of the domain");
      const Point p = geometry::nearest_boundary_point(domain, x0);
      return inverse::boundary_recovery(mesh, domain, l1, l2, g1, g2,
                                        inverse::make_schedule(domain, p, h, c.k_min, c.k_max));
    };
    const Point x0 = c.x0.value_or(0.5 * (domain.vertex(0) + domain.vertex(1)));
    const auto r = recover(x0);
    rep.columns = {"k", "sigma", "z_x", "z_y", "numerator", "denominator", "Q"};
    for (const auto& row : r.rows)
      rep.add_row({double(row.k), row.sigma, row.z.x(), row.z.y(), row.numerator, row.denominator, row.q});
    rep.warnings = r.warnings;
    rep.add_summary("estimate", r.estimate);
    rep.add_summary("exact", g1(r.x0) - g2(r.x0));
    rep.add_summary("h", r.h);
    rep.add_summary("sigma_min", r.sigma_min);
    rep.add_summary("sigma_max", r.sigma_max);
    if (c.x0_far) {
      const auto far = recover(*c.x0_far);
      rep.add_summary("far_estimate", far.estimate);
      rep.add_summary("far_exact", g1(far.x0) - g2(far.x0));
    }
    return rep;
  }
  if (c.experiment == "domain-stability") {
    const auto r = inverse::domain_stability_experiment(mesh, labelled(make_pairs(c, {0.4, 0.2, 0.1, 0.05})));
    rep.columns = {"t", "gamma_diff", "lambda_diff", "q_hminus1", "schrodinger_diff", "ok"};
    for (const auto& row : r.rows)
      rep.add_row({row.t, row.gamma_diff, row.lambda_diff, row.q_diff, row.schrodinger_diff, row.ok ? 1.0 : 0.0});
    rep.warnings = r.warnings;
    rep.add_summary("delta", r.delta);
    rep.add_summary("r2", r.r2);
    rep.add_summary("log_c", r.log_c);
    rep.add_summary("fit_points", r.fit_points);
    return rep;
  }
  fail(ErrorKind::config, "unknown experiment '" + c.experiment + "'");
}

GoldenRecord make_golden(const report::ExperimentReport& rep, const ExperimentConfig& config) {
  GoldenRecord g;
  g.config_hash = config_hash(config);
  for (const auto& [name, value] : rep.summary) {
    const bool exponent = name == "slope" || name == "delta" || name == "r2";
    g.entries.push_back({name, value, exponent ? 0.2 : 1e-6, !exponent});
  }
  return g;
}

void write_golden(std::ostream& os, const GoldenRecord& g) {
  os << "# calderon-golden v1\n";
  os << "config_hash " << g.config_hash << '\n';
  for (const auto& e : g.entries)
    os << e.name << ' ' << report::format_double(e.value) << ' ' << report::format_double(e.tolerance) << ' '
       << (e.relative ? "rel" : "abs") << '\n';
}

GoldenRecord read_golden(std::istream& is) {
  GoldenRecord g;
  std::string line;
  if (!std::getline(is, line) || trim(line) != "# calderon-golden v1")
    fail(ErrorKind::parse, "golden file must start with '# calderon-golden v1'");
  while (std::getline(is, line)) {
    if (trim(line).empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string name, value, tol, mode;
    ls >> name >> value;
    if (name == "config_hash") {
      g.config_hash = value;
      continue;
    }
    ls >> tol >> mode;
    if (mode != "rel" && mode != "abs") fail(ErrorKind::parse, "golden entry '" + name + "' needs rel or abs");
    g.entries.push_back({name, parse_number(name, value), parse_number(name, tol), mode == "rel"});
  }
  return g;
}

std::vector<std::string> compare_golden(const GoldenRecord& g, const report::ExperimentReport& rep) {
  std::vector<std::string> out;
  for (const auto& [k, v] : rep.meta)
    if (k == "config_hash" && v != g.config_hash)
      out.push_back("config hash " + v + " differs from the golden " + g.config_hash);
  for (const auto& e : g.entries) {
    const auto got = rep.summary_value(e.name);
    if (!got) {
      out.push_back(e.name + ": missing from the report");
      continue;
    }
    const double allowed = e.relative ? e.tolerance * std::max(std::abs(e.value), 1e-12) : e.tolerance;
    if (!(std::abs(*got - e.value) <= allowed))
      out.push_back(e.name + ": " + report::format_double(*got) + " vs golden " + report::format_double(e.value));
  }
  return out;
}

}  // namespace calderon::harness
