#pragma once

// Problem documents, validation, dispatch and reports for the command-line
// front end. Documents are JSON:
//
//   {"schema_version": 1, "kind": "stability", "options": {...}, "payload": {...}}
//
// Validation collects every violation before giving up. Exact rationals are
// written as "p/q" strings, never as floating-point numbers.

#include <json.hpp>

#include <complex>
#include <cstdint>
#include <exception>
#include <future>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gitstrat/conformal_bridge.hpp"
#include "gitstrat/graded_kuranishi.hpp"
#include "gitstrat/kempf_ness.hpp"
#include "gitstrat/random_instances.hpp"
#include "gitstrat/shb_model.hpp"
#include "gitstrat/stability.hpp"
#include "gitstrat/stratify.hpp"

namespace gitstrat::cli {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline const std::vector<std::string> kKinds = {"stability", "kempf-ness", "stratify", "shb", "kuranishi"};

enum ExitCode : int { kExitOk = 0, kExitInternal = 1, kExitRejected = 2 };

struct Options {
  double tol = 1e-10;
  std::uint64_t seed = 0;
  GradingConvention convention = GradingConvention::Default;
  bool emit_certificates = true;
};

struct ProblemSpec {
  std::string kind;
  json payload;
  Options options;
};

struct Validation {
  std::optional<ProblemSpec> spec;
  std::vector<std::string> errors;
  bool ok() const { return errors.empty(); }
};

namespace detail {

class Collector {
 public:
  explicit Collector(std::vector<std::string>& out) : out_(out) {}
  void add(const std::string& path, const std::string& msg) { out_.push_back(path + ": " + msg); }
  std::size_t count() const { return out_.size(); }

 private:
  std::vector<std::string>& out_;
};

inline bool is_int(const json& j) { return j.is_number_integer(); }

inline bool is_amplitude(const json& j) {
  if (j.is_number()) return true;
  return j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number();
}

inline Amplitude read_amplitude(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json write_amplitude(const Amplitude& a) { return json::array({a.real(), a.imag()}); }

inline std::string line_name(const json& line, std::size_t i) {
  if (line.is_object() && line.contains("label") && line["label"].is_string())
    return "line " + std::to_string(i) + " ('" + line["label"].get<std::string>() + "')";
  return "line " + std::to_string(i);
}

// rank + lines, shared by stability, kempf-ness and stratify.
inline void check_lines(const json& p, Collector& c, bool graded, bool require_rho) {
  std::optional<std::int64_t> rank;
  if (!p.contains("rank") || !is_int(p["rank"]) || p["rank"].get<std::int64_t>() < 0)
    c.add("payload.rank", "must be a nonnegative integer");
  else
    rank = p["rank"].get<std::int64_t>();
  if (!p.contains("lines") || !p["lines"].is_array() || p["lines"].empty()) {
    c.add("payload.lines", "must be a nonempty array");
    return;
  }
  std::set<std::string> labels;
  bool any_nonzero = false;
  for (std::size_t i = 0; i < p["lines"].size(); ++i) {
    const json& l = p["lines"][i];
    const std::string path = "payload.lines[" + std::to_string(i) + "]";
    const std::string who = line_name(l, i);
    if (!l.is_object()) {
      c.add(path, "must be an object");
      continue;
    }
    if (l.contains("label")) {
      if (!l["label"].is_string())
        c.add(path + ".label", "must be a string");
      else if (!labels.insert(l["label"].get<std::string>()).second)
        c.add(path + ".label", "duplicate label '" + l["label"].get<std::string>() + "'");
    }
    if (!l.contains("ell") || !l["ell"].is_array()) {
      c.add(path + ".ell", who + ": weight must be an integer array");
    } else {
      for (const auto& e : l["ell"])
        if (!is_int(e)) {
          c.add(path + ".ell", who + ": weight entries must be integers");
          break;
        }
      if (rank && static_cast<std::int64_t>(l["ell"].size()) != *rank)
        c.add(path + ".ell", who + ": weight has dimension " + std::to_string(l["ell"].size()) +
                                 ", expected rank " + std::to_string(*rank));
    }
    if (graded) {
      if (!l.contains("rho") || !is_int(l["rho"]))
        c.add(path + ".rho", who + ": rho must be an integer");
      else if (require_rho && l["rho"].get<std::int64_t>() < 1)
        c.add(path + ".rho", who + ": rho must be >= 1");
    } else if (l.contains("rho") && (!is_int(l["rho"]) || l["rho"].get<std::int64_t>() != 0)) {
      c.add(path + ".rho", who + ": rho is only allowed on graded problems");
    }
    if (l.contains("norm") && (!l["norm"].is_number() || !(l["norm"].get<double>() > 0)))
      c.add(path + ".norm", who + ": norm scale must be a positive number");
    if (!l.contains("amp") || !is_amplitude(l["amp"]))
      c.add(path + ".amp", who + ": amplitude must be a number or [re, im]");
    else if (read_amplitude(l["amp"]) != Amplitude(0, 0))
      any_nonzero = true;
  }
  if (!any_nonzero) c.add("payload.lines", "vector is zero (every amplitude is 0)");
}

inline RepVector read_rep(const json& p, bool graded) {
  const auto k = p["rank"].get<std::size_t>();
  std::vector<WeightLine> lines;
  std::vector<Amplitude> amps;
  for (std::size_t i = 0; i < p["lines"].size(); ++i) {
    const json& l = p["lines"][i];
    WeightLine w;
    w.label = l.contains("label") ? l["label"].get<std::string>() : "l" + std::to_string(i);
    w.ell = l["ell"].get<IVec>();
    w.rho = graded ? l["rho"].get<std::int64_t>() : 0;
    w.norm_scale = l.contains("norm") ? l["norm"].get<double>() : 1.0;
    lines.push_back(std::move(w));
    amps.push_back(read_amplitude(l["amp"]));
  }
  return RepVector(Representation(k, graded, std::move(lines)), std::move(amps));
}

inline bool is_matrix(const json& m, std::size_t* rows, std::size_t* cols) {
  if (!m.is_array() || m.empty()) return false;
  for (const auto& r : m)
    if (!r.is_array() || r.size() != m[0].size()) return false;
  for (const auto& r : m)
    for (const auto& e : r)
      if (!is_amplitude(e)) return false;
  *rows = m.size();
  *cols = m[0].size();
  return true;
}

inline CMat read_matrix(const json& m) {
  CMat out(static_cast<Eigen::Index>(m.size()), static_cast<Eigen::Index>(m[0].size()));
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[i].size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = read_amplitude(m[i][j]);
  return out;
}

inline json write_matrix(const CMat& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(write_amplitude(m(i, j)));
    out.push_back(row);
  }
  return out;
}

inline void check_kempf_ness(const json& p, Collector& c) {
  if (p.contains("phi")) {
    std::size_t r = 0, k = 0;
    if (!is_matrix(p["phi"], &r, &k) || r != k) {
      c.add("payload.phi", "must be a square matrix of numbers or [re, im] pairs");
      return;
    }
    for (const char* key : {"g", "direction"}) {
      if (!p.contains(key)) continue;
      std::size_t gr = 0, gc = 0;
      if (!is_matrix(p[key], &gr, &gc) || gr != r || gc != r) {
        c.add(std::string("payload.") + key, "must be a matrix of the same size as phi");
        continue;
      }
      const CMat g = read_matrix(p[key]);
      if ((g - g.adjoint()).norm() > 1e-12 || std::abs(g.trace()) > 1e-12)
        c.add(std::string("payload.") + key, "must be traceless hermitian");
    }
    return;
  }
  check_lines(p, c, false, false);
}

inline void check_shb(const json& p, Collector& c) {
  if (!p.contains("genus") || !is_int(p["genus"]) || p["genus"].get<std::int64_t>() < 2)
    c.add("payload.genus", "must be an integer >= 2");
  if (!p.contains("blocks") || !p["blocks"].is_array() || p["blocks"].empty()) {
    c.add("payload.blocks", "must be a nonempty array");
    return;
  }
  if (p["blocks"].size() > kMaxPartitionBlocks)
    c.add("payload.blocks", "at most " + std::to_string(kMaxPartitionBlocks) + " blocks are supported");
  for (std::size_t i = 0; i < p["blocks"].size(); ++i) {
    const json& b = p["blocks"][i];
    const std::string path = "payload.blocks[" + std::to_string(i) + "]";
    auto int_array = [&](const char* key) {
      if (!b.is_object() || !b.contains(key) || !b[key].is_array()) return false;
      for (const auto& e : b[key])
        if (!is_int(e)) return false;
      return true;
    };
    if (!int_array("ranks")) c.add(path + ".ranks", "must be an integer array");
    if (!int_array("degrees")) c.add(path + ".degrees", "must be an integer array");
    if (b.is_object() && b.contains("tag") && !b["tag"].is_string()) c.add(path + ".tag", "must be a string");
    if (!int_array("ranks") || !int_array("degrees")) continue;
    StableBlock blk{b["ranks"].get<std::vector<std::int64_t>>(), b["degrees"].get<std::vector<std::int64_t>>(), ""};
    try {
      blk.validate();
    } catch (const Error& e) {
      c.add(path, e.what());
    }
  }
  const std::size_t k = p["blocks"].size();
  if (p.contains("x")) {
    if (!p["x"].is_array() || p["x"].size() != k)
      c.add("payload.x", "must be an integer array with one entry per block");
    else
      for (const auto& e : p["x"])
        if (!is_int(e)) {
          c.add("payload.x", "entries must be integers");
          break;
        }
    if (!p.contains("sigma") || !is_int(p["sigma"]) || p["sigma"].get<std::int64_t>() < 1)
      c.add("payload.sigma", "must be an integer >= 1 when x is given");
  }
  if (p.contains("u")) {
    if (!p["u"].is_object() || p["u"].empty())
      c.add("payload.u", "must be a nonempty object mapping slice labels to amplitudes");
    else
      for (const auto& [key, val] : p["u"].items())
        if (!is_amplitude(val)) c.add("payload.u." + key, "amplitude must be a number or [re, im]");
  }
}

inline SHBSpec read_shb(const json& p) {
  SHBSpec s;
  s.genus = p["genus"].get<std::int64_t>();
  for (const auto& b : p["blocks"])
    s.blocks.push_back({b["ranks"].get<std::vector<std::int64_t>>(), b["degrees"].get<std::vector<std::int64_t>>(),
                        b.contains("tag") ? b["tag"].get<std::string>() : std::string()});
  return s;
}

inline void check_kuranishi(const json& p, Collector& c) {
  if (!p.contains("generator")) {
    c.add("payload.generator", "is required");
    return;
  }
  const json& g = p["generator"];
  if (!g.is_object() || !g.contains("type") || !g["type"].is_string() ||
      (g["type"] != "random" && g["type"] != "nilpotent")) {
    c.add("payload.generator.type", "must be \"random\" or \"nilpotent\"");
    return;
  }
  if (g.contains("seed") && !g["seed"].is_number_unsigned()) c.add("payload.generator.seed", "must be a nonnegative integer");
  for (const char* key : {"max_grade", "max_dim_per_grade", "dim_per_grade"})
    if (g.contains(key) && (!is_int(g[key]) || g[key].get<std::int64_t>() < 1 || g[key].get<std::int64_t>() > 8))
      c.add(std::string("payload.generator.") + key, "must be an integer in [1, 8]");
  if (g.contains("bracket_density") &&
      (!g["bracket_density"].is_number() || g["bracket_density"].get<double>() < 0 || g["bracket_density"].get<double>() > 1))
    c.add("payload.generator.bracket_density", "must be a number in [0, 1]");
}

inline GradedComplex build_complex(const json& g, std::uint64_t fallback_seed) {
  const std::uint64_t seed = g.contains("seed") ? g["seed"].get<std::uint64_t>() : fallback_seed;
  if (g["type"] == "nilpotent")
    return nilpotent_graded_complex(seed, g.value("max_grade", 4), g.value("dim_per_grade", 3));
  RandomComplexOptions o;
  o.max_grade = g.value("max_grade", o.max_grade);
  o.max_dim_per_grade = g.value("max_dim_per_grade", o.max_dim_per_grade);
  o.bracket_density = g.value("bracket_density", o.bracket_density);
  return random_graded_complex(seed, o);
}

inline void check_options(const json& o, Collector& c, Options& out) {
  if (!o.is_object()) {
    c.add("options", "must be an object");
    return;
  }
  if (o.contains("tol")) {
    if (!o["tol"].is_number() || !(o["tol"].get<double>() > 0))
      c.add("options.tol", "must be a positive number");
    else
      out.tol = o["tol"].get<double>();
  }
  if (o.contains("seed")) {
    if (!o["seed"].is_number_unsigned())
      c.add("options.seed", "must be a nonnegative integer");
    else
      out.seed = o["seed"].get<std::uint64_t>();
  }
  if (o.contains("convention")) {
    if (o["convention"] == "default")
      out.convention = GradingConvention::Default;
    else if (o["convention"] == "flipped")
      out.convention = GradingConvention::Flipped;
    else
      c.add("options.convention", "must be \"default\" or \"flipped\"");
  }
  if (o.contains("emit_certificates")) {
    if (!o["emit_certificates"].is_boolean())
      c.add("options.emit_certificates", "must be a boolean");
    else
      out.emit_certificates = o["emit_certificates"].get<bool>();
  }
}

inline std::string position_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace detail

inline Validation validate_document(const json& doc) {
  Validation v;
  detail::Collector c(v.errors);
  if (!doc.is_object()) {
    c.add("$", "document must be an object");
    return v;
  }
  if (!doc.contains("schema_version") || doc["schema_version"] != kSchemaVersion)
    c.add("schema_version", "must be " + std::to_string(kSchemaVersion));
  ProblemSpec spec;
  if (!doc.contains("kind") || !doc["kind"].is_string() ||
      std::find(kKinds.begin(), kKinds.end(), doc["kind"].get<std::string>()) == kKinds.end()) {
    c.add("kind", "must be one of stability, kempf-ness, stratify, shb, kuranishi");
  } else {
    spec.kind = doc["kind"].get<std::string>();
  }
  if (doc.contains("options")) detail::check_options(doc["options"], c, spec.options);
  if (!doc.contains("payload") || !doc["payload"].is_object()) {
    c.add("payload", "must be an object");
  } else if (!spec.kind.empty()) {
    const json& p = doc["payload"];
    if (spec.kind == "stability") detail::check_lines(p, c, false, false);
    if (spec.kind == "kempf-ness") detail::check_kempf_ness(p, c);
    if (spec.kind == "stratify") {
      detail::check_lines(p, c, true, true);
      if (p.contains("sigma_multiple") && (!detail::is_int(p["sigma_multiple"]) || p["sigma_multiple"].get<std::int64_t>() < 1))
        c.add("payload.sigma_multiple", "must be an integer >= 1");
    }
    if (spec.kind == "shb") detail::check_shb(p, c);
    if (spec.kind == "kuranishi") detail::check_kuranishi(p, c);
    spec.payload = p;
  }
  for (const auto& [key, _] : doc.items())
    if (key != "schema_version" && key != "kind" && key != "options" && key != "payload")
      c.add(key, "unknown top-level field");
  if (v.errors.empty()) v.spec = std::move(spec);
  return v;
}

/// Parses and validates document text; parse errors carry line and column.
inline Validation validate_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    Validation v;
    v.errors.push_back("parse error at " + detail::position_of(text, e.byte) + ": " + e.what());
    return v;
  }
  return validate_document(doc);
}

namespace detail {

inline json qvec_json(const QVec& v) {
  json out = json::array();
  for (const auto& q : v) out.push_back(to_string(q));
  return out;
}

inline json lattice_json(const Lattice& l) { return json(l.basis); }

inline json eigen_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline json stability_json(const StabilityResult& r, bool certs) {
  json out;
  out["class"] = to_string(r.cls);
  out["effective_weights"] = r.certificate.weights;
  if (certs) {
    json c;
    if (!r.certificate.combination.empty()) c["combination"] = qvec_json(r.certificate.combination);
    if (r.certificate.cocharacter) c["cocharacter"] = *r.certificate.cocharacter;
    c["flat"] = lattice_json(r.certificate.flat);
    c["verified"] = verify_certificate(r, r.certificate.weights.front().size());
    out["certificate"] = c;
  }
  return out;
}

inline json kn_json(const KNResult& r) {
  json out;
  out["status"] = to_string(r.status);
  out["stability"] = to_string(r.stability);
  out["value"] = r.value;
  if (r.status != KNStatus::Diverging) {
    out["minimizer"] = eigen_json(r.minimizer);
    out["gradient_norm"] = r.gradient_norm;
    out["iterations"] = r.iterations;
  }
  out["flat_space"] = lattice_json(r.flat_space);
  if (r.descent_ray) out["descent_ray"] = *r.descent_ray;
  return out;
}

inline std::vector<std::string> labels_of(const RepVector& u, const std::vector<std::size_t>& idx) {
  std::vector<std::string> out;
  for (auto i : idx) out.push_back(u.rep()[i].label);
  return out;
}

inline json stratify_json(const StratifyResult& r, const RepVector& u, const Options& opt) {
  json out;
  out["x"] = r.x;
  out["sigma"] = r.sigma;
  out["k"] = r.k();
  out["d"] = r.degrees();
  out["x_sum"] = qvec_json(r.x_sum);
  json stages = json::array();
  for (const auto& s : r.stages) {
    json js;
    js["torus"] = lattice_json(s.torus);
    js["nu"] = labels_of(u, s.nu);
    js["support"] = labels_of(u, s.support);
    js["c"] = to_string(s.c);
    js["c_upper"] = to_string(s.c_upper);
    js["x"] = qvec_json(s.x);
    js["d"] = s.d;
    js["hull_dim"] = s.hull_dim;
    js["projected_dim"] = s.projected_dim;
    js["support_class"] = to_string(s.support_class);
    json pts = json::array();
    for (const auto& p : s.hull_points) pts.push_back(qvec_json(p));
    js["hull_points"] = pts;
    js["face"] = s.face;
    stages.push_back(js);
  }
  out["stages"] = stages;
  out["residual"] = labels_of(u, r.residual);
  json ex = json::array();
  for (const auto& e : r.exponents) {
    json je{{"label", e.label}, {"role", to_string(e.role)}, {"exponent", e.exponent}};
    if (e.role != ComponentRole::Residual) je["stage"] = e.stage;
    ex.push_back(je);
  }
  out["exponents"] = ex;
  const auto ver = verify_decomposition(r, u);
  json checks = json::array();
  for (const auto& c : ver.checks) {
    json jc{{"name", c.name}, {"passed", c.passed}};
    if (!c.passed) jc["detail"] = c.detail;
    checks.push_back(jc);
  }
  out["verification"] = {{"all_passed", ver.all_passed()}, {"checks", checks}};
  json kn = json::array();
  KNOptions ko;
  ko.tol = opt.tol;
  for (const auto& m : stage_kn_minimizers(r, u, ko)) {
    json jm = kn_json(m.kn);
    jm["ambient_shift"] = eigen_json(m.ambient_shift);
    kn.push_back(jm);
  }
  out["stage_kn_minimizers"] = kn;
  return out;
}

inline json run_stability(const ProblemSpec& s) {
  const auto v = read_rep(s.payload, false);
  json out = stability_json(classify(v), s.options.emit_certificates);
  out["rank"] = v.rep().rank();
  return out;
}

inline json run_kempf_ness(const ProblemSpec& s) {
  const json& p = s.payload;
  if (p.contains("phi")) {
    const CMat phi = read_matrix(p["phi"]);
    const CMat g = p.contains("g") ? read_matrix(p["g"]) : CMat::Zero(phi.rows(), phi.cols());
    const auto e = kn_conjugation_eval(phi, g);
    json out;
    out["case"] = "conjugation";
    out["value"] = e.value;
    out["gradient"] = write_matrix(e.gradient);
    out["moment_map"] = write_matrix(moment_map_conjugation(phi));
    if (p.contains("direction")) out["directional_derivative"] = kn_conjugation_directional(phi, g, read_matrix(p["direction"]));
    return out;
  }
  KNOptions o;
  o.tol = s.options.tol;
  json out = kn_json(kn_minimize(read_rep(p, false), o));
  out["case"] = "torus";
  return out;
}

inline json run_stratify(const ProblemSpec& s) {
  const auto u = read_rep(s.payload, true);
  StratifyOptions o;
  o.sigma_multiple = s.payload.value("sigma_multiple", std::int64_t{1});
  return stratify_json(stratify(u, o), u, s.options);
}

inline json run_shb(const ProblemSpec& s) {
  const SHBSpec shb = read_shb(s.payload);
  shb.validate();
  json out;
  const auto r = shb.total_rank();
  out["genus"] = shb.genus;
  out["total_rank"] = r;
  out["blocks"] = shb.num_blocks();
  out["abelian"] = shb.abelian();
  out["expected_dim"] = r >= 2 ? json(expected_dim_central_locus(r, shb.genus)) : json(nullptr);
  json parts = json::array();
  const auto poset = partitions_with_order(shb);
  for (std::size_t i = 0; i < poset.partitions.size(); ++i) {
    const auto pd = partition_dim(poset.partitions[i], shb.block_ranks(), shb.genus);
    json pp = json::array();
    for (const auto& part : poset.partitions[i]) {
      json q = json::array();
      for (auto b : part) q.push_back(b + 1);
      pp.push_back(q);
    }
    json below = json::array();
    for (std::size_t j = 0; j < poset.partitions.size(); ++j)
      if (poset.greater(i, j)) below.push_back(j);
    parts.push_back({{"parts", pp}, {"dim", pd.dim}, {"proper", pd.proper}, {"strictly_less", pd.strictly_less},
                     {"coarser_than", below}});
  }
  out["partitions"] = parts;
  if (!shb.abelian()) return out;

  const auto ps = positive_slice_rep(shb, s.options.convention);
  out["automorphism_torus"] = {{"relation", ps.torus.relation}, {"cocharacters", lattice_json(ps.torus.cochar)}};
  json lines = json::array();
  for (const auto& l : ps.rep.lines()) lines.push_back({{"label", l.label}, {"ell", l.ell}, {"rho", l.rho}});
  out["positive_slice"] = lines;
  if (shb.num_blocks() >= 2) {
    const auto cyc = cyclic_phi_weights(shb);
    out["cyclic_phi"] = stability_json(cyc.verdict, s.options.emit_certificates);
  }
  if (s.payload.contains("x")) {
    const auto table = conformal_degree_table(shb, s.payload["x"].get<IVec>(), s.payload["sigma"].get<std::int64_t>(),
                                              s.options.convention);
    json t = json::array();
    for (const auto& [idx, deg] : table.entries()) {
      const auto [i, a, j, b] = idx;
      t.push_back({{"index", {i + 1, a + 1, j + 1, b + 1}}, {"degree", deg}});
    }
    out["conformal_degrees"] = t;
  }
  if (s.payload.contains("u")) {
    std::map<std::string, Amplitude> comps;
    for (const auto& [key, val] : s.payload["u"].items()) comps[key] = read_amplitude(val);
    const auto u = RepVector::from_components(ps.rep, comps);
    const auto res = stratify(u);
    out["stratification"] = stratify_json(res, u, s.options);
    const auto br = conformal_bridge(shb, ps, res, s.options.convention);
    out["bridge"] = {{"ok", br.ok()}, {"identities_checked", br.identities_checked},
                     {"filtration_checked", br.filtration_checked}, {"failures", br.failures}};
  }
  return out;
}

inline double rel(const CVec& a, const CVec& b) {
  const double s = std::max(b.norm(), 1e-300);
  return (a - b).norm() / s;
}

inline json run_kuranishi(const ProblemSpec& s) {
  const json& g = s.payload["generator"];
  const auto cx = build_complex(g, s.options.seed);
  std::mt19937_64 rng(s.options.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> n(0.0, 1.0);
  CVec x(static_cast<Eigen::Index>(cx.dim1()));
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = cx.grades1()[static_cast<std::size_t>(i)] > 0 ? cdouble(n(rng), n(rng)) : cdouble(0);
  const CVec y = kuranishi_inverse_graded(cx, x);
  const auto n2 = static_cast<Eigen::Index>(cx.dim2());
  const CMat lap = cx.data().d1 * cx.d1_adjoint();
  const CMat ident = cx.greens().gamma * lap + cx.greens().harmonic;
  json out;
  out["dims"] = {{"c0", cx.dim0()}, {"c1", cx.dim1()}, {"c2", cx.dim2()}};
  out["greens_status"] = cx.greens().status == GreensStatus::Ok ? "ok" : "ill-conditioned";
  out["greens_identity_residual"] = n2 == 0 ? 0.0 : (ident - CMat::Identity(n2, n2)).norm() / std::sqrt(static_cast<double>(n2));
  out["roundtrip_residual"] = rel(kuranishi_forward(cx, y), x);
  double eq = 0;
  for (cdouble t : {cdouble(2.0), cdouble(0.5), std::polar(1.0, 0.7)}) {
    eq = std::max(eq, rel(kuranishi_forward(cx, grading_action(cx.grades1(), t, y)),
                          grading_action(cx.grades1(), t, kuranishi_forward(cx, y))));
  }
  out["equivariance_residual"] = eq;
  bool lowest = true;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (cx.grades1()[static_cast<std::size_t>(i)] == 1 && y(i) != x(i)) lowest = false;
  out["lowest_grade_exact"] = lowest;
  out["obstruction_norm"] = obstruction(cx, y).norm();
  return out;
}

}  // namespace detail

struct RunOutcome {
  int exit_code = kExitOk;
  json report;
};

/// Runs a validated spec. Never throws: failures become report fields plus
/// exit code 2 (analysis-level rejection) or 1 (internal error).
inline RunOutcome run(const ProblemSpec& spec) {
  RunOutcome out;
  out.report["schema_version"] = kSchemaVersion;
  out.report["kind"] = spec.kind;
  try {
    json result;
    if (spec.kind == "stability") result = detail::run_stability(spec);
    else if (spec.kind == "kempf-ness") result = detail::run_kempf_ness(spec);
    else if (spec.kind == "stratify") result = detail::run_stratify(spec);
    else if (spec.kind == "shb") result = detail::run_shb(spec);
    else if (spec.kind == "kuranishi") result = detail::run_kuranishi(spec);
    else throw PreconditionError("unknown kind '" + spec.kind + "'");
    out.report["status"] = "ok";
    out.report["result"] = result;
  } catch (const NotStableError& e) {
    out.exit_code = kExitRejected;
    out.report["status"] = "rejected";
    out.report["error"] = e.what();
    out.report["result"] = detail::stability_json(e.result(), true);
  } catch (const InternalError& e) {
    out.exit_code = kExitInternal;
    out.report["status"] = "error";
    out.report["error"] = e.what();
  } catch (const Error& e) {
    out.exit_code = kExitRejected;
    out.report["status"] = "rejected";
    out.report["error"] = e.what();
  } catch (const std::exception& e) {
    out.exit_code = kExitInternal;
    out.report["status"] = "error";
    out.report["error"] = e.what();
  }
  return out;
}

/// Structural check of a report document; returns every violation.
inline std::vector<std::string> validate_report(const json& r) {
  std::vector<std::string> errs;
  detail::Collector c(errs);
  if (!r.is_object()) {
    c.add("$", "report must be an object");
    return errs;
  }
  if (!r.contains("schema_version") || r["schema_version"] != kSchemaVersion) c.add("schema_version", "must be 1");
  if (!r.contains("kind") || !r["kind"].is_string()) c.add("kind", "must be a string");
  if (!r.contains("status") || !r["status"].is_string() ||
      (r["status"] != "ok" && r["status"] != "rejected" && r["status"] != "error")) {
    c.add("status", "must be ok, rejected or error");
    return errs;
  }
  if (r["status"] != "ok") {
    if (!r.contains("error") || !r["error"].is_string()) c.add("error", "required when status is not ok");
    return errs;
  }
  if (!r.contains("result") || !r["result"].is_object()) {
    c.add("result", "must be an object");
    return errs;
  }
  const json& res = r["result"];
  auto need = [&](const char* key) {
    if (!res.contains(key)) c.add(std::string("result.") + key, "is required");
  };
  auto rational_strings = [&](const json& arr, const std::string& path) {
    if (!arr.is_array()) {
      c.add(path, "must be an array");
      return;
    }
    for (const auto& e : arr) {
      if (!e.is_string()) {
        c.add(path, "exact rationals must be strings");
        return;
      }
      try {
        parse_q(e.get<std::string>());
      } catch (const Error&) {
        c.add(path, "'" + e.get<std::string>() + "' is not a rational");
      }
    }
  };
  const std::string kind = r.value("kind", "");
  if (kind == "stability") {
    need("class");
    need("effective_weights");
    if (res.contains("certificate") && res["certificate"].contains("combination"))
      rational_strings(res["certificate"]["combination"], "result.certificate.combination");
  } else if (kind == "kempf-ness") {
    need("case");
    need("value");
  } else if (kind == "stratify") {
    for (const char* k : {"x", "sigma", "k", "d", "x_sum", "stages", "residual", "exponents", "verification"}) need(k);
    if (res.contains("x_sum")) rational_strings(res["x_sum"], "result.x_sum");
    if (res.contains("stages") && res["stages"].is_array())
      for (std::size_t i = 0; i < res["stages"].size(); ++i) {
        const json& st = res["stages"][i];
        const std::string path = "result.stages[" + std::to_string(i) + "]";
        if (!st.contains("c") || !st["c"].is_string()) c.add(path + ".c", "must be a rational string");
        if (st.contains("x")) rational_strings(st["x"], path + ".x");
      }
  } else if (kind == "shb") {
    for (const char* k : {"genus", "total_rank", "blocks", "partitions"}) need(k);
  } else if (kind == "kuranishi") {
    for (const char* k : {"dims", "roundtrip_residual", "equivariance_residual", "greens_identity_residual"}) need(k);
  } else {
    c.add("kind", "unknown kind '" + kind + "'");
  }
  return errs;
}

namespace detail {

inline void render(std::ostringstream& os, const json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      const bool scalar_like = !v.is_structured() || (v.is_array() && std::none_of(v.begin(), v.end(), [](const json& e) {
                                                        return e.is_object();
                                                      }));
      if (scalar_like) {
        os << pad << k << ": " << v.dump() << "\n";
      } else {
        os << pad << k << ":\n";
        render(os, v, indent + 1);
      }
    }
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (j[i].is_object()) {
        os << pad << "- [" << i << "]\n";
        render(os, j[i], indent + 1);
      } else {
        os << pad << "- " << j[i].dump() << "\n";
      }
    }
  } else {
    os << pad << j.dump() << "\n";
  }
}

}  // namespace detail

/// Indented human-readable rendering of a report.
inline std::string render_text(const json& report) {
  std::ostringstream os;
  detail::render(os, report, 0);
  return os.str();
}

/// A random problem document of the given kind, determined by the seed.
inline json generate(const std::string& kind, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  json doc{{"schema_version", kSchemaVersion}, {"kind", kind}, {"options", {{"seed", seed}}}};
  auto lines_json = [](const RepVector& v) {
    json lines = json::array();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto& l = v.rep()[i];
      json jl{{"label", l.label}, {"ell", l.ell}, {"norm", l.norm_scale}, {"amp", detail::write_amplitude(v[i])}};
      if (v.rep().graded()) jl["rho"] = l.rho;
      lines.push_back(jl);
    }
    return lines;
  };
  if (kind == "stability" || kind == "kempf-ness") {
    const auto v = random_rep_vector(rng, {});
    doc["payload"] = {{"rank", v.rep().rank()}, {"lines", lines_json(v)}};
  } else if (kind == "stratify") {
    RandomRepOptions o;
    o.max_rank = 2;
    const auto v = random_stable_graded(rng, o);
    doc["payload"] = {{"rank", v.rep().rank()}, {"lines", lines_json(v)}};
  } else if (kind == "shb") {
    std::uniform_int_distribution<int> nb(1, 4), rk(1, 3), g(2, 4);
    json blocks = json::array();
    const int k = nb(rng);
    for (int i = 0; i < k; ++i) {
      const int r = rk(rng);
      blocks.push_back({{"ranks", {r}}, {"degrees", {0}}, {"tag", "L" + std::to_string(i + 1)}});
    }
    doc["payload"] = {{"genus", g(rng)}, {"blocks", blocks}};
  } else if (kind == "kuranishi") {
    doc["payload"] = {{"generator", {{"type", "random"}, {"seed", seed}}}};
  } else {
    throw PreconditionError("generate: unknown kind '" + kind + "'");
  }
  return doc;
}

/// Runs independent specs concurrently; reports come back in input order.
inline std::vector<RunOutcome> run_batch(const std::vector<json>& docs) {
  std::vector<std::future<RunOutcome>> futs;
  for (const auto& d : docs)
    futs.push_back(std::async(std::launch::async, [d] {
      const auto v = validate_document(d);
      if (!v.ok()) {
        RunOutcome o;
        o.exit_code = kExitRejected;
        o.report = {{"schema_version", kSchemaVersion}, {"kind", d.value("kind", "")}, {"status", "rejected"},
                    {"error", "invalid spec"}, {"validation_errors", v.errors}};
        return o;
      }
      return run(*v.spec);
    }));
  std::vector<RunOutcome> out;
  for (auto& f : futs) out.push_back(f.get());
  return out;
}

}  // namespace gitstrat::cli
