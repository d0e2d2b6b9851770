#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "affvortex/error.hpp"
#include "affvortex/moduli.hpp"
#include "affvortex/poly.hpp"
#include "affvortex/radial_oracle.hpp"
#include "affvortex/vortex.hpp"

namespace affvortex::io {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Reading

inline const json& field(const json& j, const std::string& key, const std::string& path) {
  require(j.is_object(), ErrorCode::ParseError, "'" + path + "' must be an object");
  const auto it = j.find(key);
  require(it != j.end(), ErrorCode::ParseError, "missing field '" + (path.empty() ? key : path + "." + key) + "'");
  return *it;
}

inline std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
inline std::string join(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

inline double get_real(const json& j, const std::string& path) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  }
  require(j.is_number(), ErrorCode::ParseError, "field '" + path + "' must be a number");
  return j.get<double>();
}

inline int get_int(const json& j, const std::string& path) {
  require(j.is_number_integer(), ErrorCode::ParseError, "field '" + path + "' must be an integer");
  const auto v = j.get<long long>();
  require(v >= std::numeric_limits<int>::min() && v <= std::numeric_limits<int>::max(), ErrorCode::ParseError,
          "field '" + path + "' is out of range");
  return static_cast<int>(v);
}

inline const json& get_array(const json& j, const std::string& path) {
  require(j.is_array(), ErrorCode::ParseError, "field '" + path + "' must be an array");
  return j;
}

inline cplx get_cplx(const json& j, const std::string& path) {
  require(j.is_array() && j.size() == 2, ErrorCode::ParseError, "field '" + path + "' must be [re, im]");
  const cplx c(get_real(j[0], path + "[0]"), get_real(j[1], path + "[1]"));
  require(std::isfinite(c.real()) && std::isfinite(c.imag()), ErrorCode::ParseError, "field '" + path + "' must be finite");
  return c;
}

inline std::vector<cplx> get_cplx_vector(const json& j, const std::string& path) {
  std::vector<cplx> out;
  for (std::size_t i = 0; i < get_array(j, path).size(); ++i) out.push_back(get_cplx(j[i], join(path, i)));
  return out;
}

inline json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ParseError, source + ": malformed JSON (" + e.what() + ")");
  }
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::ParseError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json(ss.str(), path.string());
}

/// { "n": int, "polys": [ [ [re, im], ... ] ] }, coefficients ascending.
inline NPair pair_from_json(const json& j, const std::string& path = "") {
  const int n = get_int(field(j, "n", path), join(path, "n"));
  const std::string pp = join(path, "polys");
  const json& polys = get_array(field(j, "polys", path), pp);
  require(n >= 1 && static_cast<std::size_t>(n) == polys.size(), ErrorCode::ParseError,
          "field '" + join(path, "n") + "' must equal the number of polynomials in '" + pp + "'");
  std::vector<CPoly> out;
  for (std::size_t i = 0; i < polys.size(); ++i) out.emplace_back(get_cplx_vector(polys[i], join(pp, i)));
  return NPair(std::move(out));
}

/// { "n": int, "d": int, "coords": [ [re, im], ... ] }, blocks l = d..0.
inline ModuliPoint moduli_point_from_json(const json& j) {
  return ModuliPoint(get_int(field(j, "n", ""), "n"), get_int(field(j, "d", ""), "d"),
                     get_cplx_vector(field(j, "coords", ""), "coords"));
}

inline D1LimitInput d1_input_from_json(const json& j) {
  D1LimitInput in;
  in.a = get_cplx_vector(field(j, "a", ""), "a");
  in.b = get_cplx_vector(field(j, "b", ""), "b");
  if (j.contains("ratio_limit") && !j["ratio_limit"].is_null()) in.ratio_limit = get_real(j["ratio_limit"], "ratio_limit");
  if (j.contains("samples")) {
    const json& s = get_array(j["samples"], "samples");
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::string p = join("samples", i);
      in.samples.push_back({get_cplx_vector(field(s[i], "a", p), join(p, "a")),
                            get_cplx_vector(field(s[i], "b", p), join(p, "b")), get_cplx(field(s[i], "w", p), join(p, "w"))});
    }
  }
  return in;
}

inline BubbleSequence bubble_from_json(const json& j) {
  BubbleSequence seq;
  const json& samples = get_array(field(j, "samples", ""), "samples");
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const std::string p = join("samples", k);
    const json& s = samples[k];
    BubbleSample out{get_real(field(s, "lambda", p), join(p, "lambda")), get_cplx(field(s, "z", p), join(p, "z")), {}, {}};
    const std::string zp = join(p, "zeros");
    const json& zeros = get_array(field(s, "zeros", p), zp);
    for (std::size_t jj = 0; jj < zeros.size(); ++jj) {
      std::vector<BubbleZero> list;
      for (std::size_t a = 0; a < get_array(zeros[jj], join(zp, jj)).size(); ++a) {
        const std::string ap = join(join(zp, jj), a);
        list.push_back({get_cplx(field(zeros[jj][a], "rho", ap), join(ap, "rho")), get_int(field(zeros[jj][a], "m", ap), join(ap, "m"))});
      }
      out.zeros.push_back(std::move(list));
    }
    const std::string fp = join(p, "f_abs");
    const json& f = get_array(field(s, "f_abs", p), fp);
    for (std::size_t jj = 0; jj < f.size(); ++jj) out.f_abs.push_back(get_real(f[jj], join(fp, jj)));
    seq.samples.push_back(std::move(out));
  }
  return seq;
}

// ---------------------------------------------------------------------------
// Writing

/// Finite reals as numbers, infinities as the string "inf".
inline json real_json(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

inline json to_json(cplx c) { return json::array({c.real(), c.imag()}); }

inline json to_json(std::span<const cplx> v) {
  json a = json::array();
  for (cplx c : v) a.push_back(to_json(c));
  return a;
}

inline json to_json(const NPair& pair) {
  json polys = json::array();
  for (const auto& p : pair.polys()) polys.push_back(to_json(p.coeffs()));
  return {{"n", pair.n()}, {"polys", polys}};
}

inline json to_json(const Observables& o) {
  return {{"d", o.d},
          {"energy", o.energy},
          {"energy_tail", o.energy_tail},
          {"decay_slope", o.decay_slope ? json(*o.decay_slope) : json(nullptr)},
          {"ev_inf", to_json(o.ev_inf.v)},
          {"max_moment_boundary", o.max_moment_boundary}};
}

inline json to_json(const UhlenbeckPoint& p) {
  return {{"kind", "stratum"},
          {"n", p.coords.n()},
          {"d", p.coords.d()},
          {"stratum_k", p.stratum_k},
          {"primary", {{"n", p.primary.n()}, {"d", p.primary.d()}, {"coords", to_json(p.primary.coords())}}}};
}

inline json to_json(const D1Limit& r) {
  json ratios = json::array();
  for (double x : r.ratios) ratios.push_back(real_json(x));
  return {{"kind", "d1_limit"},
          {"stratum", std::string(to_string(r.stratum))},
          {"distance", r.distance},
          {"ratio_limit", r.ratio_limit ? real_json(*r.ratio_limit) : json(nullptr)},
          {"ratios", ratios},
          {"v", r.v ? to_json(*r.v) : json(nullptr)}};
}

inline json to_json(const BubbleReport& r) {
  const auto series = [](const std::vector<double>& x) {
    json a = json::array();
    for (double v : x) a.push_back(real_json(v));
    return a;
  };
  return {{"kind", "bubble"},
          {"verdict", std::string(to_string(r.verdict))},
          {"in_w", r.in_w},
          {"d_w", r.d_w},
          {"t", series(r.t)},
          {"T", series(r.T)},
          {"ratio", series(r.ratio)},
          {"by_convention", r.by_convention},
          {"note", r.note}};
}

inline json error_json(const std::string& code, const std::string& message, int exit_code) {
  return {{"error", {{"code", code}, {"message", message}}}, {"exit_code", exit_code}};
}

/// Keys sorted (nlohmann objects are ordered maps); doubles in shortest
/// round-trip form.
inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string field_csv(const ScalarField& f) {
  const PolarGrid& g = f.grid();
  std::string out = "r,theta,value\n";
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const double theta = idx == 0 ? 0.0 : g.theta(g.angle_of(idx));
    out += format_real(g.r(g.ring_of(idx))) + "," + format_real(theta) + "," + format_real(static_cast<double>(f[idx])) + "\n";
  }
  return out;
}

inline std::string profile_csv(const RadialProfile& p) {
  std::string out = "r,h,dh_dr\n";
  for (std::size_t i = 0; i < p.r.size(); ++i)
    out += format_real(p.r[i]) + "," + format_real(p.h[i]) + "," + format_real(p.dh_dr[i]) + "\n";
  return out;
}

/// Writes to a sibling temporary and renames, so readers never see a
/// partial file.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(out.good(), ErrorCode::InvalidInput, "cannot write " + tmp.string());
    out << content;
    out.flush();
    require(out.good(), ErrorCode::InvalidInput, "failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace affvortex::io
