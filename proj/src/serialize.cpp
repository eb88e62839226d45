#include "riemalpha/serialize.hpp"

#include <charconv>
#include <cmath>

#include "riemalpha/errors.hpp"

namespace riemalpha {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Json json_double(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

double double_from_json(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw ConfigError("expected a number, got " + j.dump());
}

Json to_json(const VectorXd& v) {
  Json arr = Json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(json_double(v(i)));
  return arr;
}

VectorXd vector_from_json(const Json& j) {
  if (!j.is_array()) throw ConfigError("expected an array of coordinates, got " + j.dump());
  VectorXd v(static_cast<int>(j.size()));
  int i = 0;
  for (const Json& cell : j) v(i++) = double_from_json(cell);
  return v;
}

Json to_json(const TheoryConstants& c) {
  return Json{{"alpha0", c.alpha0},
              {"sigma", c.sigma},
              {"s0", c.s0},
              {"nu0", c.nu0},
              {"t0", c.t0}};
}

Json to_json(const BasinRadius& radius) {
  Json j{{"value", json_double(radius.value)}, {"binding_term", to_string(radius.binding_term)}};
  if (radius.k_used) j["k_used"] = json_double(*radius.k_used);
  return j;
}

Json to_json(const GammaBracket& gb) {
  return Json{{"lower", json_double(gb.lower)},
              {"upper", json_double(gb.upper)},
              {"k_hit", gb.k_hit},
              {"truncation_order", gb.truncation_order},
              {"directions_sampled", gb.directions_sampled}};
}

Json to_json(const AlphaCertificate& cert) {
  Json j{{"beta", json_double(cert.beta)},
         {"gamma_bracket", to_json(cert.gamma_bracket)},
         {"alpha_lower", json_double(cert.alpha_lower)},
         {"alpha_upper", json_double(cert.alpha_upper)},
         {"r_z", json_double(cert.r_z)},
         {"verdict", to_string(cert.verdict)}};
  if (cert.root_distance_bound) j["root_distance_bound"] = json_double(*cert.root_distance_bound);
  return j;
}

Json to_json(const LemmaRow& row) {
  return Json{{"name", row.name},
              {"samples", row.samples},
              {"passes", row.passes},
              {"worst_margin", json_double(row.worst_margin)},
              {"holds", row.holds()}};
}

Json to_json(const LemmaReport& rep) {
  Json rows = Json::array();
  for (const LemmaRow& row : rep.rows) rows.push_back(to_json(row));
  return Json{{"all_hold", rep.all_hold}, {"rows", rows}};
}

Json to_json(const NewtonTrace& trace) {
  Json points = Json::array();
  for (const Point& z : trace.points) points.push_back(to_json(z.x));
  Json j{{"points", points},
         {"step_norms", Json::array()},
         {"ball_exits", Json::array()},
         {"termination", to_string(trace.termination)}};
  for (double s : trace.step_norms) j["step_norms"].push_back(json_double(s));
  for (bool e : trace.ball_exits) j["ball_exits"].push_back(e);
  if (!trace.points.empty()) j["manifold"] = trace.points.front().man->id();
  if (trace.root) {
    j["root"] = to_json(trace.root->x);
    Json dists = Json::array();
    for (double d : trace.distances_to_root) dists.push_back(json_double(d));
    j["distances_to_root"] = dists;
  }
  return j;
}

std::string trace_csv(const NewtonTrace& trace) {
  const bool with_root = trace.root.has_value();
  std::string out = with_root ? "k,beta_k,dist_to_root,cumulative_distance,termination\n"
                              : "k,beta_k,cumulative_distance,termination\n";
  const std::string term = to_string(trace.termination);
  double walked = 0.0;
  for (std::size_t k = 0; k < trace.points.size(); ++k) {
    if (k > 0) walked += trace.step_norms[k - 1];
    out += std::to_string(k);
    out += ',';
    if (k < trace.step_norms.size()) out += format_double(trace.step_norms[k]);
    out += ',';
    if (with_root) {
      out += format_double(trace.distances_to_root[k]);
      out += ',';
    }
    out += format_double(walked);
    out += ',';
    out += term;
    out += '\n';
  }
  return out;
}

}  // namespace riemalpha
