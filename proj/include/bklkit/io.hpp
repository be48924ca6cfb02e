#pragma once

// JSON forms of torsion tensors, reports and exact models.
//
// Torsion: {"n": 2, "entries": [{"upper": 1, "lower": [1, 2], "value": [-1.0, 0.0]}]}
// with 1-based indices and lower[0] < lower[1]; omitted components are zero.
//
// Model: {"symbols": [{"name": "c1", "conj": "c1"}],
//         "generators": [{"name": "phi1", "type": "holo", "conj": "phib1"}, {"name": "rho1", "type": "real"}],
//         "structure": {"rho1": [{"coeff": "2*I*c1", "monomial": ["phi1", "phib1"]}]},
//         "coframe": ["phi1", "phit1"]}
// Structure equations of conjugate partners may be omitted.

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "bklkit/solver.hpp"

namespace bklkit::io {

using nlohmann::json;

inline json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline cplx complex_from(const json& j, const std::string& what) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw InputError(what + " must be a number or a [re, im] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json matrix_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(complex_json(m(i, k)));
    rows.push_back(row);
  }
  return rows;
}

inline json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(row);
  }
  return rows;
}

inline json vector_json(const CVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_json(v(i)));
  return out;
}

inline json vector_json(const RVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline CMatrix complex_matrix_from(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) throw InputError(what + " must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size()), cols = static_cast<Eigen::Index>(j[0].size());
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) throw InputError(what + " rows differ in length");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = complex_from(row[static_cast<std::size_t>(k)], what);
  }
  return m;
}

inline Eigen::MatrixXd real_matrix_from(const json& j, const std::string& what) {
  CMatrix c = complex_matrix_from(j, what);
  if (c.imag().cwiseAbs().maxCoeff() != 0.0) throw InputError(what + " must be real");
  return c.real();
}

template <class T> T field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw InputError(where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw InputError(where + ": field '" + key + "' has the wrong type");
  }
}

inline json torsion_json(const Torsion& t) {
  json entries = json::array();
  for (const auto& e : t.entries())
    entries.push_back({{"upper", e.upper}, {"lower", {e.i, e.k}}, {"value", complex_json(e.value)}});
  return {{"n", t.n()}, {"entries", entries}};
}

inline Torsion torsion_from_json(const json& j) {
  const int n = field<int>(j, "n", "torsion");
  if (n < 1) throw InputError("torsion: n must be positive");
  if (!j.contains("entries") || !j["entries"].is_array()) throw InputError("torsion: 'entries' must be an array");
  std::vector<TorsionEntry> entries;
  for (const auto& e : j["entries"]) {
    TorsionEntry te;
    te.upper = field<int>(e, "upper", "torsion entry");
    auto lower = field<std::vector<int>>(e, "lower", "torsion entry");
    if (lower.size() != 2) throw InputError("torsion entry: 'lower' needs two indices");
    te.i = lower[0];
    te.k = lower[1];
    if (te.i >= te.k) throw InputError("torsion entry: lower indices must satisfy i < k");
    if (!e.contains("value")) throw InputError("torsion entry: missing field 'value'");
    te.value = complex_from(e["value"], "torsion entry value");
    entries.push_back(te);
  }
  return Torsion::build(n, entries);
}

inline json parse_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(origin + ": malformed JSON (" + e.what() + ")");
  }
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str(), path);
}

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

inline json kernel_json(const KernelBasis& k) {
  return {{"dim", k.dim()}, {"basis", matrix_json(k.basis)}, {"singular_values", vector_json(k.singular_values)}};
}

inline json bkl_report_json(const BklReport& r) {
  return {{"admissible", r.admissible}, {"tol", r.tol},
          {"residuals",
           {{"bkl", r.main}, {"eta_orthogonality", r.eta_orth}, {"norm_gap", r.norm_gap},
            {"b_phi", r.b_phi_gap}, {"commutation", r.commutation}}}};
}

inline json frame_report_json(const FrameReport& r) {
  json groups = json::array();
  for (const auto& g : r.grouping) {
    json one = json::array();
    for (int i : g) one.push_back(i + 1);
    groups.push_back(one);
  }
  return {{"n", r.n},
          {"kahler", r.kahler},
          {"lambda", r.lambda},
          {"r", r.r},
          {"s", r.s},
          {"U", matrix_json(r.U)},
          {"a", vector_json(r.a)},
          {"b", matrix_json(r.b)},
          {"bhat", matrix_json(r.bhat)},
          {"bhat_rank", r.bhat_rank},
          {"full", r.full},
          {"min_eig_A", r.min_eig_a},
          {"grouping", groups},
          {"kernels", {{"A", kernel_json(r.ker_a)}, {"B", kernel_json(r.ker_b)}, {"phi", kernel_json(r.ker_phi)}}},
          {"residuals",
           {{"frame_a", r.dev_frame_a}, {"frame_b", r.dev_frame_b}, {"null_block", r.dev_null_block}, {"b_row_sums", r.dev_b_row_sums},
            {"sum_a_minus_lambda", r.sum_a_gap}}},
          {"normalized_torsion", torsion_json(r.normalized)}};
}

inline json dim5_json(const Dim5Report& d) {
  return {{"degenerate", d.degenerate},
          {"degeneracy", d.degeneracy},
          {"re_orthogonality", d.abik},
          {"lambda_identity", d.abi},
          {"B", vector_json(d.B)},
          {"B_direct", vector_json(d.B_direct)},
          {"Y", matrix_json(d.Y)},
          {"Y_orthonormality", d.y_orthonormality},
          {"b_4", vector_json(d.b4)}};
}

inline json classification_json(const ClassificationReport& c) {
  json out = {{"n", c.n},
              {"r", c.r},
              {"full", c.full},
              {"branch", to_string(c.branch)},
              {"lambda", c.lambda},
              {"admissibility", bkl_report_json(c.admissibility)},
              {"evidence",
               {{"weight_relation", c.weight_relation},
                {"A_block_offdiagonal", c.grouping.a_block_residual},
                {"distinct_required", c.grouping.distinct_required},
                {"distinct", c.grouping.distinct},
                {"isolated_roots", c.grouping.isolated_roots}}},
              {"note", c.note}};
  if (c.twist) {
    out["twist"] = {{"lambdas", c.twist->lambdas},
                    {"D", matrix_json(c.twist->D)},
                    {"factor_scales", c.twist->factor_scales},
                    {"reconstruction", c.twist->reconstruction},
                    {"re_orthogonality", c.twist->re_orthogonality}};
  }
  if (c.dim5) out["dim5"] = dim5_json(*c.dim5);
  return out;
}

inline json search_json(const SearchResult& s) {
  json trace = json::array();
  for (const auto& t : s.trace)
    trace.push_back({{"restart", t.restart}, {"iterations", t.iterations}, {"residual", t.residual}, {"success", t.success}});
  json out = {{"success", s.success},
              {"best_residual", s.best_residual},
              {"best_restart", s.best_restart},
              {"x", vector_json(s.x)},
              {"torsion", torsion_json(s.torsion)},
              {"trace", trace},
              {"note", s.post_note}};
  if (s.admissibility) out["admissibility"] = bkl_report_json(*s.admissibility);
  if (s.classification) out["classification"] = classification_json(*s.classification);
  if (s.frame) out["rank"] = {{"r", s.frame->r}, {"full", s.frame->full}};
  return out;
}

inline TwistedProductSpec twisted_spec_from_json(const json& j) {
  TwistedProductSpec spec;
  spec.lambdas = field<std::vector<double>>(j, "lambdas", "twisted-product spec");
  if (!j.contains("D")) throw InputError("twisted-product spec: missing field 'D'");
  spec.D = complex_matrix_from(j["D"], "D");
  if (j.contains("r") && field<int>(j, "r", "twisted-product spec") != static_cast<int>(spec.lambdas.size()))
    throw InputError("twisted-product spec: r disagrees with the number of lambdas");
  return spec;
}

inline SasakianProductSpec sasakian_spec_from_json(const json& j) {
  SasakianProductSpec spec;
  spec.r = field<int>(j, "r", "sasakian spec");
  spec.s = field<int>(j, "s", "sasakian spec");
  spec.c = field<std::vector<double>>(j, "c", "sasakian spec");
  if (!j.contains("D")) throw InputError("sasakian spec: missing field 'D'");
  spec.D = real_matrix_from(j["D"], "D");
  return spec;
}

// exact models

inline const char* type_name(exact::GenType t) {
  switch (t) {
  case exact::GenType::holo: return "holo";
  case exact::GenType::antiholo: return "antiholo";
  case exact::GenType::untyped: return "real";
  }
  return "real";
}

inline json model_json(const exact::CoframedModel& cm) {
  using namespace exact;
  const FormModel& m = cm.model;
  // symbols appearing in any structure equation
  std::set<SymbolId> syms;
  for (std::size_t g = 0; g < m.size(); ++g)
    for (const auto& [mono, c] : m.structure(static_cast<GenId>(g))->terms())
      for (const auto& [sm, num] : c.terms()) syms.insert(sm.begin(), sm.end());
  auto& table = SymbolTable::instance();
  json symbols = json::array();
  std::set<SymbolId> done;
  for (SymbolId s : syms) {
    if (done.count(s)) continue;
    SymbolId c = table.conj(s);
    done.insert(s);
    done.insert(c);
    symbols.push_back({{"name", table.name(s)}, {"conj", table.name(c)}});
  }
  json gens = json::array();
  json structure = json::object();
  std::set<GenId> listed;
  for (std::size_t g = 0; g < m.size(); ++g) {
    auto id = static_cast<GenId>(g);
    if (listed.count(id)) continue;
    const Generator& gen = m.generator(id);
    listed.insert(id);
    listed.insert(gen.conj);
    json entry = {{"name", gen.name}, {"type", gen.conj == id ? "real" : type_name(gen.type)}};
    if (gen.conj != id) entry["conj"] = m.generator(gen.conj).name;
    gens.push_back(entry);
    json terms = json::array();
    for (const auto& [mono, c] : m.structure(id)->terms()) {
      json names = json::array();
      for (GenId x : mono) names.push_back(m.generator(x).name);
      terms.push_back({{"coeff", c.str()}, {"monomial", names}});
    }
    structure[gen.name] = terms;
  }
  json coframe = json::array();
  for (GenId g : cm.coframe) coframe.push_back(m.generator(g).name);
  return {{"symbols", symbols}, {"generators", gens}, {"structure", structure}, {"coframe", coframe}};
}

inline exact::CoframedModel model_from_json(const json& j) {
  using namespace exact;
  auto& table = SymbolTable::instance();
  if (j.contains("symbols")) {
    if (!j["symbols"].is_array()) throw InputError("model: 'symbols' must be an array");
    for (const auto& s : j["symbols"]) {
      auto name = field<std::string>(s, "name", "model symbol");
      std::string conj = s.contains("conj") ? field<std::string>(s, "conj", "model symbol") : name;
      if (conj == name) table.declare_real(name);
      else table.declare_pair(name, conj);
    }
  }
  CoframedModel cm;
  FormModel& m = cm.model;
  if (!j.contains("generators") || !j["generators"].is_array()) throw InputError("model: 'generators' must be an array");
  for (const auto& g : j["generators"]) {
    auto name = field<std::string>(g, "name", "model generator");
    std::string type = g.contains("type") ? field<std::string>(g, "type", "model generator") : "real";
    if (type == "real") {
      m.add_real(name);
    } else if (type == "holo" || type == "antiholo" || type == "untyped") {
      auto conj = field<std::string>(g, "conj", "model generator");
      m.add_pair(name, conj,
                 type == "holo" ? GenType::holo : type == "antiholo" ? GenType::antiholo : GenType::untyped);
    } else {
      throw InputError("model generator '" + name + "': unknown type '" + type + "'");
    }
  }
  if (!j.contains("structure") || !j["structure"].is_object()) throw InputError("model: 'structure' must be an object");
  for (const auto& [name, terms] : j["structure"].items()) {
    if (!terms.is_array()) throw InputError("model: structure of '" + name + "' must be an array");
    Form f = m.zero();
    for (const auto& t : terms) {
      Scalar c = ScalarParser::parse(field<std::string>(t, "coeff", "structure term"));
      auto names = field<std::vector<std::string>>(t, "monomial", "structure term");
      Form term = m.scalar(c);
      for (const auto& nm : names) term = wedge(term, m.gen(nm));
      f += term;
    }
    m.set_d(name, f);
  }
  m.finalize();
  if (j.contains("coframe")) {
    for (const auto& nm : field<std::vector<std::string>>(j, "coframe", "model")) cm.coframe.push_back(m.id_of(nm));
  }
  return cm;
}

} // namespace bklkit::io
