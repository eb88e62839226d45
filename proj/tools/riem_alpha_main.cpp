// riem-alpha: certification and convergence experiments from JSON configs.
// Subcommands: constants | certify | run | basin | verify. Config values
// lose to explicit flags; RIEM_ALPHA_THREADS caps the worker pool.
#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "riemalpha/errors.hpp"
#include "riemalpha/parallel.hpp"
#include "riemalpha/problems.hpp"
#include "riemalpha/serialize.hpp"

using namespace riemalpha;

namespace {

struct SamplerConfig {
  bool present = false;
  int count = 0;
  double radius = 0.0;
  int zero_index = 0;
  std::uint64_t seed = 20260822;
};

struct ExperimentConfig {
  std::string problem_id;
  std::vector<VectorXd> starts;
  SamplerConfig sampler;
  GammaOptions gamma;
  NewtonOptions iteration;
  std::string format = "json";  // json | csv
  std::string out_path;         // empty: stdout
};

// Flag values; unset members defer to the config file.
struct Overrides {
  bool json = false;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> k_max;
  std::optional<int> n_dirs;
  std::optional<int> max_iter;
  std::optional<double> tol;
};

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  if (!j.is_object()) throw ConfigError("config root must be an object");

  ExperimentConfig cfg;
  if (!j.contains("problem") || !j["problem"].is_string())
    throw ConfigError("config needs a \"problem\" string");
  cfg.problem_id = j["problem"].get<std::string>();

  if (j.contains("starts")) {
    if (!j["starts"].is_array()) throw ConfigError("\"starts\" must be an array of points");
    for (const Json& pt : j["starts"]) cfg.starts.push_back(vector_from_json(pt));
  }
  if (j.contains("sampler")) {
    const Json& s = j["sampler"];
    if (!s.is_object()) throw ConfigError("\"sampler\" must be an object");
    cfg.sampler.present = true;
    cfg.sampler.count = s.value("count", 0);
    cfg.sampler.radius = s.contains("radius") ? double_from_json(s["radius"]) : 0.0;
    cfg.sampler.zero_index = s.value("zero_index", 0);
    cfg.sampler.seed = s.value("seed", cfg.sampler.seed);
    if (cfg.sampler.count < 0) throw ConfigError("sampler count must be >= 0");
    if (!(cfg.sampler.radius >= 0.0)) throw ConfigError("sampler radius must be >= 0");
  }
  if (j.contains("gamma")) {
    const Json& g = j["gamma"];
    cfg.gamma.k_max = g.value("k_max", cfg.gamma.k_max);
    cfg.gamma.n_dirs = g.value("n_dirs", cfg.gamma.n_dirs);
    cfg.gamma.seed = g.value("seed", cfg.gamma.seed);
    cfg.gamma.polish = g.value("polish", cfg.gamma.polish);
  }
  if (j.contains("iteration")) {
    const Json& it = j["iteration"];
    cfg.iteration.max_iter = it.value("max_iter", cfg.iteration.max_iter);
    if (it.contains("stop_tol")) cfg.iteration.stop_tol = double_from_json(it["stop_tol"]);
  }
  if (j.contains("output")) {
    const Json& o = j["output"];
    cfg.format = o.value("format", cfg.format);
    cfg.out_path = o.value("path", cfg.out_path);
    if (cfg.format != "json" && cfg.format != "csv")
      throw ConfigError("output format must be \"json\" or \"csv\"");
  }
  return cfg;
}

void apply_overrides(ExperimentConfig& cfg, const Overrides& ov) {
  if (ov.json) cfg.format = "json";
  if (ov.out) cfg.out_path = *ov.out;
  if (ov.seed) {
    cfg.gamma.seed = *ov.seed;
    cfg.sampler.seed = *ov.seed;
  }
  if (ov.k_max) cfg.gamma.k_max = *ov.k_max;
  if (ov.n_dirs) cfg.gamma.n_dirs = *ov.n_dirs;
  if (ov.max_iter) cfg.iteration.max_iter = *ov.max_iter;
  if (ov.tol) cfg.iteration.stop_tol = *ov.tol;
}

void emit(const ExperimentConfig& cfg, const std::string& payload) {
  if (cfg.out_path.empty()) {
    std::cout << payload;
    return;
  }
  std::ofstream out(cfg.out_path, std::ios::binary);
  if (!out) throw ConfigError("cannot write output file: " + cfg.out_path);
  out << payload;
}

const Point& indexed_zero(const Problem& problem, int index) {
  if (index < 0 || index >= static_cast<int>(problem.known_zeros.size()))
    throw ConfigError("zero_index " + std::to_string(index) + " out of range; " +
                      problem.id + " registers " + std::to_string(problem.known_zeros.size()) +
                      " zeros");
  return problem.known_zeros[static_cast<std::size_t>(index)];
}

// Explicit starts win; otherwise the sampler draws around a registered zero.
std::vector<Point> resolve_starts(const Problem& problem, const ExperimentConfig& cfg) {
  std::vector<Point> starts;
  for (const VectorXd& x : cfg.starts) starts.push_back(make_point(problem.manifold, x));
  if (!starts.empty()) return starts;
  if (!cfg.sampler.present)
    throw ConfigError("config needs \"starts\" or a \"sampler\" block");
  if (!(cfg.sampler.radius > 0.0)) throw ConfigError("start sampler needs radius > 0");
  const Point& zero = indexed_zero(problem, cfg.sampler.zero_index);
  std::mt19937_64 rng(cfg.sampler.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int i = 0; i < cfg.sampler.count; ++i) {
    const Tangent u = random_tangent(zero, rng);
    const double un = zero.man->norm(zero.x, u.v);
    const double d = cfg.sampler.radius * (1.0 - uni(rng));
    starts.push_back(un < 1e-12 ? zero : exp_map(zero, make_tangent(zero, (d / un) * u.v)));
  }
  return starts;
}

int cmd_constants(bool as_json, const std::optional<std::string>& out_path) {
  const TheoryConstants& c = theory_constants();
  std::string payload;
  if (as_json) {
    payload = to_json(c).dump(2) + "\n";
  } else {
    const double sa = c.sigma * c.alpha0;
    const double s0_closed =
        1.0 / (c.sigma + ((1.0 - sa) * (1.0 - sa) / psi(sa)) * (1.0 + c.sigma / (1.0 - sa)));
    double resummed = 0.0;
    for (int k = 0; k < 12; ++k) resummed += std::pow(0.5, std::pow(2.0, k) - 1.0);
    const struct {
      const char* name;
      double value;
      const char* equation;
      double residual;
    } rows[] = {
        {"alpha0", c.alpha0, "2u - psi(u)^2", std::abs(2.0 * c.alpha0 - psi(c.alpha0) * psi(c.alpha0))},
        {"sigma", c.sigma, "series resum", std::abs(c.sigma - resummed)},
        {"s0", c.s0, "closed form", std::abs(c.s0 - s0_closed)},
        {"nu0", c.nu0, "nu/psi(nu)^2 - alpha0",
         std::abs(c.nu0 / (psi(c.nu0) * psi(c.nu0)) - c.alpha0)},
        {"t0", c.t0, "closed form",
         std::abs(c.t0 - c.s0 / (c.s0 + (1.0 - c.nu0) / psi(c.nu0)))},
    };
    char line[128];
    for (const auto& row : rows) {
      std::snprintf(line, sizeof(line), "%-7s %.15g  [%s: %.2e]\n", row.name, row.value,
                    row.equation, row.residual);
      payload += line;
    }
  }
  if (out_path) {
    std::ofstream out(*out_path, std::ios::binary);
    if (!out) throw ConfigError("cannot write output file: " + *out_path);
    out << payload;
  } else {
    std::cout << payload;
  }
  return 0;
}

int cmd_certify(const ExperimentConfig& cfg) {
  const Problem problem = make_problem(cfg.problem_id);
  const std::vector<Point> starts = resolve_starts(problem, cfg);
  std::vector<AlphaCertificate> certs(starts.size());
  parallel_for(static_cast<int>(starts.size()), [&](int i) {
    certs[static_cast<std::size_t>(i)] =
        alpha_certify(problem, starts[static_cast<std::size_t>(i)], cfg.gamma);
  });

  std::string payload;
  if (cfg.format == "json") {
    Json arr = Json::array();
    for (std::size_t i = 0; i < certs.size(); ++i)
      arr.push_back(Json{{"start", to_json(starts[i].x)}, {"certificate", to_json(certs[i])}});
    payload = arr.dump(2) + "\n";
  } else {
    payload =
        "index,beta,gamma_lower,gamma_upper,alpha_lower,alpha_upper,r_z,verdict,"
        "root_distance_bound\n";
    for (std::size_t i = 0; i < certs.size(); ++i) {
      const AlphaCertificate& c = certs[i];
      payload += std::to_string(i) + ',' + format_double(c.beta) + ',' +
                 format_double(c.gamma_bracket.lower) + ',' + format_double(c.gamma_bracket.upper) +
                 ',' + format_double(c.alpha_lower) + ',' + format_double(c.alpha_upper) + ',' +
                 format_double(c.r_z) + ',' + to_string(c.verdict) + ',' +
                 (c.root_distance_bound ? format_double(*c.root_distance_bound) : "") + '\n';
    }
  }
  emit(cfg, payload);

  bool any_singular = false;
  bool any_uncertified = false;
  for (const AlphaCertificate& c : certs) {
    any_singular = any_singular || c.verdict == Verdict::SingularDerivative;
    any_uncertified = any_uncertified || c.verdict == Verdict::NotCertified;
  }
  if (any_singular) return 3;
  if (any_uncertified) return 2;
  return 0;
}

// Root for the distance column: the registered zero nearest the endpoint.
void attach_nearest_zero(const Problem& problem, NewtonTrace& trace) {
  if (problem.known_zeros.empty()) return;
  const Point& last = trace.points.back();
  const Point* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  for (const Point& zero : problem.known_zeros) {
    const double d = distance(last, zero);
    if (d < best_d) {
      best_d = d;
      best = &zero;
    }
  }
  attach_root(trace, *best);
}

int cmd_run(const ExperimentConfig& cfg) {
  const Problem problem = make_problem(cfg.problem_id);
  const std::vector<Point> starts = resolve_starts(problem, cfg);
  std::vector<NewtonTrace> traces(starts.size());
  parallel_for(static_cast<int>(starts.size()), [&](int i) {
    NewtonTrace t =
        newton_sequence(problem, starts[static_cast<std::size_t>(i)], cfg.iteration);
    attach_nearest_zero(problem, t);
    traces[static_cast<std::size_t>(i)] = std::move(t);
  });

  std::string payload;
  if (cfg.format == "json") {
    Json arr = Json::array();
    for (const NewtonTrace& t : traces) arr.push_back(to_json(t));
    payload = arr.dump(2) + "\n";
  } else {
    for (std::size_t i = 0; i < traces.size(); ++i) {
      if (i > 0) payload += '\n';
      payload += trace_csv(traces[i]);
    }
  }
  emit(cfg, payload);
  return 0;
}

int cmd_basin(const ExperimentConfig& cfg) {
  const Problem problem = make_problem(cfg.problem_id);
  if (problem.known_zeros.empty())
    throw MissingRoot("basin sweeps need a problem with a registered zero");
  if (!cfg.sampler.present) throw ConfigError("basin sweeps need a \"sampler\" block");
  const Point& zero = indexed_zero(problem, cfg.sampler.zero_index);
  const int count = cfg.sampler.count;
  const double radius = cfg.sampler.radius;

  const GammaBracket gb = gamma_estimate(problem, zero, cfg.gamma);
  const double r_inj = injectivity_radius(zero);
  const std::optional<double> k = spreading_constant(zero);
  std::optional<BasinRadius> classic;
  if (k && std::isfinite(gb.upper)) classic = gamma_radius(k, gb.upper, r_inj);
  std::optional<BasinRadius> alt;
  if (std::isfinite(gb.upper)) alt = gamma_radius_alt(gb.upper, r_inj);

  // deterministic distance ladder, seeded directions, fan-out by index
  std::vector<Tangent> dirs;
  std::mt19937_64 rng(cfg.sampler.seed);
  for (int i = 0; i < count; ++i) dirs.push_back(random_tangent(zero, rng));
  std::vector<double> dist(static_cast<std::size_t>(count), 0.0);
  std::vector<char> quad_ok(static_cast<std::size_t>(count), 0);
  parallel_for(count, [&](int i) {
    const double d = count > 0 ? radius * double(i + 1) / double(count) : 0.0;
    dist[static_cast<std::size_t>(i)] = d;
    const Tangent& u = dirs[static_cast<std::size_t>(i)];
    const double un = zero.man->norm(zero.x, u.v);
    const Point start =
        (d < 1e-300 || un < 1e-12) ? zero : exp_map(zero, make_tangent(zero, (d / un) * u.v));
    NewtonTrace trace = newton_sequence(problem, start, cfg.iteration);
    attach_root(trace, zero);
    quad_ok[static_cast<std::size_t>(i)] = verify_quadratic_bound(trace).all_ok ? 1 : 0;
  });

  // largest sampled distance below which nothing failed
  double edge = 0.0;
  for (int i = 0; i < count; ++i) {
    if (!quad_ok[static_cast<std::size_t>(i)]) break;
    edge = dist[static_cast<std::size_t>(i)];
  }
  const double theory = classic ? classic->value : (alt ? alt->value : 0.0);
  const double covered = count > 0 ? std::min(theory, radius) : 0.0;
  const bool contract_ok = edge + 1e-12 >= covered;

  std::string payload;
  if (cfg.format == "json") {
    Json j{{"problem", problem.id},
           {"zero", to_json(zero.x)},
           {"gamma_upper", json_double(gb.upper)},
           {"radius_classic", classic ? to_json(*classic) : Json(nullptr)},
           {"radius_alt", alt ? to_json(*alt) : Json(nullptr)},
           {"empirical_edge", json_double(edge)},
           {"contract_ok", contract_ok},
           {"samples", Json::array()}};
    for (int i = 0; i < count; ++i)
      j["samples"].push_back(Json{{"distance", json_double(dist[static_cast<std::size_t>(i)])},
                                  {"quadratic_ok", quad_ok[static_cast<std::size_t>(i)] != 0}});
    payload = j.dump(2) + "\n";
  } else {
    payload = "index,distance,quadratic_ok\n";
    for (int i = 0; i < count; ++i)
      payload += std::to_string(i) + ',' + format_double(dist[static_cast<std::size_t>(i)]) + ',' +
                 (quad_ok[static_cast<std::size_t>(i)] ? "1" : "0") + '\n';
  }
  emit(cfg, payload);
  return contract_ok ? 0 : 2;
}

int cmd_verify(const ExperimentConfig& cfg) {
  const Problem problem = make_problem(cfg.problem_id);
  Point base = [&] {
    if (!cfg.starts.empty()) return make_point(problem.manifold, cfg.starts.front());
    return indexed_zero(problem, cfg.sampler.zero_index);
  }();
  const int n_samples = cfg.sampler.present ? cfg.sampler.count : 200;
  const LemmaReport rep = lemma_suite(problem, base, n_samples, cfg.sampler.seed);

  bool any_empty = false;
  for (const LemmaRow& row : rep.rows) any_empty = any_empty || row.samples == 0;
  if (any_empty)
    std::cerr << "warning: some rows received no samples; their pass is vacuous\n";

  std::string payload;
  if (cfg.format == "json") {
    payload = to_json(rep).dump(2) + "\n";
  } else {
    payload = "name,samples,passes,worst_margin,holds\n";
    for (const LemmaRow& row : rep.rows)
      payload += row.name + ',' + std::to_string(row.samples) + ',' + std::to_string(row.passes) +
                 ',' + format_double(row.worst_margin) + ',' + (row.holds() ? "1" : "0") + '\n';
  }
  emit(cfg, payload);
  return rep.all_hold ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Newton certification on Riemannian manifolds"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides ov;
  bool flag_json = false;
  std::string flag_out;
  std::uint64_t flag_seed = 0;
  int flag_kmax = 0, flag_dirs = 0, flag_max_iter = 0;
  double flag_tol = 0.0;

  const auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", config_path, "experiment config (JSON)");
    if (needs_config) c->required();
    sub->add_flag("--json", flag_json, "emit JSON regardless of the config");
    sub->add_option("--out", flag_out, "write output to this path");
    sub->add_option("--seed", flag_seed, "override sampler and gamma seeds");
    sub->add_option("--kmax", flag_kmax, "override gamma k_max");
    sub->add_option("--dirs", flag_dirs, "override gamma n_dirs");
    sub->add_option("--max-iter", flag_max_iter, "override iteration cap");
    sub->add_option("--tol", flag_tol, "override the step-norm stop tolerance");
  };

  CLI::App* c_constants = app.add_subcommand("constants", "print the universal constants");
  add_common(c_constants, false);
  CLI::App* c_certify = app.add_subcommand("certify", "alpha-certify start points");
  add_common(c_certify, true);
  CLI::App* c_run = app.add_subcommand("run", "record Newton traces");
  add_common(c_run, true);
  CLI::App* c_basin = app.add_subcommand("basin", "sweep the quadratic basin around a zero");
  add_common(c_basin, true);
  CLI::App* c_verify = app.add_subcommand("verify", "run the inequality suite");
  add_common(c_verify, true);

  CLI11_PARSE(app, argc, argv);

  ov.json = flag_json;
  const CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--out")) ov.out = flag_out;
  if (sub->count("--seed")) ov.seed = flag_seed;
  if (sub->count("--kmax")) ov.k_max = flag_kmax;
  if (sub->count("--dirs")) ov.n_dirs = flag_dirs;
  if (sub->count("--max-iter")) ov.max_iter = flag_max_iter;
  if (sub->count("--tol")) ov.tol = flag_tol;

  try {
    if (sub == c_constants) return cmd_constants(flag_json, ov.out);

    ExperimentConfig cfg = load_config(config_path);
    apply_overrides(cfg, ov);
    if (sub == c_certify) return cmd_certify(cfg);
    if (sub == c_run) return cmd_run(cfg);
    if (sub == c_basin) return cmd_basin(cfg);
    if (sub == c_verify) return cmd_verify(cfg);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
