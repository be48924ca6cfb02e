// bklkit command-line front end. Every report goes to stdout as JSON.
// Exit codes: 0 success, 1 check or verification failure, 2 usage or input error.

#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"

#include "bklkit/bklkit.hpp"

namespace {

using bklkit::io::json;

constexpr int exit_ok = 0;
constexpr int exit_check = 1;
constexpr int exit_input = 2;

void emit(const json& j) { std::cout << j.dump(2) << '\n'; }

int fail(const char* kind, const std::string& message, int code) {
  emit({{"error", {{"kind", kind}, {"message", message}}}});
  return code;
}

/// BKLKIT_TOL when set, else the library default; an explicit --tol wins later.
double default_tolerance() {
  const char* env = std::getenv("BKLKIT_TOL");
  if (!env || !*env) return bklkit::default_tol;
  char* end = nullptr;
  double v = std::strtod(env, &end);
  if (end == env || *end != '\0' || !(v > 0.0)) throw bklkit::InputError("BKLKIT_TOL must be a positive number");
  return v;
}

json exact_form_json(const bklkit::exact::FormModel& m, const bklkit::exact::Form& f) { return m.str(f); }

json verify_model(const bklkit::exact::CoframedModel& cm, bool& ok) {
  using namespace bklkit::exact;
  const FormModel& m = cm.model;
  if (cm.coframe.empty()) throw bklkit::InputError("model has no coframe");
  HermitianData h = hermitian_data(m, cm.coframe);
  const std::size_t n = cm.coframe.size();
  BklCondition bkl = bkl_condition(m, coframe_forms(m, cm.coframe), h.curvature_b);
  RicciAnalysis ric = bismut_ricci(m, cm.coframe, h.curvature_b);
  json torsion = json::array();
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = i + 1; k < n; ++k)
        if (!h.torsion[j][i][k].is_zero())
          torsion.push_back({{"upper", j + 1}, {"lower", {i + 1, k + 1}}, {"value", h.torsion[j][i][k].str()}});
  json curvature = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < n; ++j) row.push_back(exact_form_json(m, h.curvature_b[i][j]));
    curvature.push_back(row);
  }
  json residual = json::array();
  for (const auto& r : bkl.residual) residual.push_back(exact_form_json(m, r));
  json diag = json::array();
  for (const auto& s : ric.diagonal) diag.push_back(s.str());
  ok = bkl.holds;
  return {{"integrable", true},
          {"torsion", torsion},
          {"bismut_curvature", curvature},
          {"bkl_condition", {{"holds", bkl.holds}, {"residual", residual}}},
          {"ricci",
           {{"trace", exact_form_json(m, ric.trace)},
            {"normal_form", ric.normal_form},
            {"diagonal", diag},
            {"trace_zero_iff_flat", ric.cyt_implies_flat},
            {"reason", ric.reason}}}};
}

} // namespace

int main(int argc, char** argv) {
  using namespace bklkit;
  CLI::App app{"Torsion and curvature tools for Bismut Kahler-like Hermitian metrics"};
  app.require_subcommand(1);

  double tol = default_tol;
  std::uint64_t seed = 0;
  std::string file, spec_path, out_path, model_out, model_path;
  double t_scale = 0.0;
  SearchConfig scfg;
  int rank = -1;

  auto add_tol = [&](CLI::App* sub) { sub->add_option("--tol", tol, "absolute residual tolerance"); };

  auto* check = app.add_subcommand("check", "BKL admissibility of a torsion tensor");
  check->add_option("file", file, "torsion JSON")->required();
  add_tol(check);

  auto* normalize = app.add_subcommand("normalize", "phi-compatible frame report");
  normalize->add_option("file", file, "torsion JSON")->required();
  normalize->add_option("--seed", seed, "seed for simultaneous diagonalization");
  add_tol(normalize);

  auto* classify = app.add_subcommand("classify", "branch of an admissible point");
  classify->add_option("file", file, "torsion JSON")->required();
  add_tol(classify);

  auto* construct = app.add_subcommand("construct", "build an example family");
  construct->require_subcommand(1);
  auto* twisted = construct->add_subcommand("twisted-product", "pluriclosed twisted product of surfaces");
  auto* sasakian = construct->add_subcommand("sasakian", "multiple product of Sasakian 3-manifolds");
  for (auto* sub : {twisted, sasakian}) {
    sub->add_option("--spec", spec_path, "spec JSON")->required();
    sub->add_option("--out", out_path, "write the torsion here");
    sub->add_option("--model-out", model_out, "write the exact model here");
  }

  auto* scale = app.add_subcommand("scale-eta", "eta-scaling of an admissible point");
  scale->add_option("file", file, "torsion JSON")->required();
  scale->add_option("--t", t_scale, "scale factor t > 0")->required();
  scale->add_option("--out", out_path, "write the torsion here");
  scale->add_option("--model", model_path, "exact model of the base, coframe ending in the eta direction");
  scale->add_option("--model-out", model_out, "write the scaled exact model here");
  add_tol(scale);

  auto* verify = app.add_subcommand("verify-model", "exact Chern/Bismut data and the BKL condition of a model");
  verify->add_option("file", file, "model JSON")->required();

  auto* srch = app.add_subcommand("search", "seeded numerical search on the BKL variety");
  srch->add_option("--dim", scfg.n, "dimension n")->required();
  srch->add_option("--rank", rank, "target B-rank");
  srch->add_flag("--full", scfg.full, "require A > 0");
  srch->add_option("--seed", scfg.seed, "seed")->required();
  srch->add_option("--restarts", scfg.restarts, "number of restarts")->required();
  srch->add_option("--max-iters", scfg.max_iters, "iterations per restart");
  srch->add_option("--threads", scfg.threads, "worker threads");
  srch->add_option("--out", out_path, "write the best torsion here");

  try {
    tol = default_tolerance();
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), exit_input);
  } catch (const InputError& e) {
    return fail("input", e.what(), exit_input);
  }

  try {
    if (!(tol > 0.0)) throw InputError("--tol must be positive");
    FrameOptions fopt{tol, default_tol_rank, seed};
    if (*check) {
      Torsion t = io::torsion_from_json(io::read_json_file(file));
      BklReport r = is_bkl_admissible(t, tol);
      KernelRelations k = kernel_relations(derived_tensors(t));
      json out = io::bkl_report_json(r);
      out["lambda"] = derived_tensors(t).lambda;
      out["kernels"] = {{"xeta_in_ker_B", k.xeta_in_ker_b},
                        {"ker_phi_vs_ker_B", k.ker_phi_vs_ker_b},
                        {"ker_A_in_ker_B", k.ker_a_in_ker_b},
                        {"ker_A_perp_xeta", k.ker_a_perp_xeta}};
      emit(out);
      return r.admissible ? exit_ok : exit_check;
    }
    if (*normalize) {
      Torsion t = io::torsion_from_json(io::read_json_file(file));
      emit(io::frame_report_json(phi_compatible_frame(t, fopt)));
      return exit_ok;
    }
    if (*classify) {
      Torsion t = io::torsion_from_json(io::read_json_file(file));
      emit(io::classification_json(classify_point(t, fopt)));
      return exit_ok;
    }
    if (*construct) {
      json spec = io::read_json_file(spec_path);
      Constructed c;
      json extra = json::object();
      if (*twisted) {
        c = twisted_product(io::twisted_spec_from_json(spec));
      } else {
        SasakianConstructed sc = sasakian_product(io::sasakian_spec_from_json(spec));
        extra["P"] = io::matrix_json(sc.canonical.P);
        extra["P_orientation_reversing"] = sc.canonical.orientation_reversing;
        c = sc;
      }
      BklReport r = is_bkl_admissible(c.torsion);
      json out = {{"torsion", io::torsion_json(c.torsion)}, {"admissibility", io::bkl_report_json(r)}};
      out.update(extra);
      if (c.model) {
        json m = io::model_json(*c.model);
        bool ok = false;
        out["model"] = verify_model(*c.model, ok);
        if (!model_out.empty()) io::write_json_file(model_out, m);
      } else {
        out["model_note"] = c.model_note;
        if (!model_out.empty()) throw InputError(c.model_note);
      }
      if (!out_path.empty()) io::write_json_file(out_path, io::torsion_json(c.torsion));
      emit(out);
      return r.admissible ? exit_ok : exit_check;
    }
    if (*scale) {
      Torsion t = io::torsion_from_json(io::read_json_file(file));
      EtaScaled s = eta_scaling({t, t_scale}, fopt);
      BklReport r = is_bkl_admissible(s.torsion, tol);
      json out = {{"torsion", io::torsion_json(s.torsion)},
                  {"lambda", s.lambda},
                  {"base_lambda", s.base.lambda},
                  {"admissibility", io::bkl_report_json(r)}};
      if (!model_path.empty()) {
        exact::CoframedModel base = io::model_from_json(io::read_json_file(model_path));
        exact::ScaledModel sm = eta_scaled_model(base, t_scale);
        bool ok = false;
        out["model"] = verify_model(sm.scaled, ok);
        if (!model_out.empty()) io::write_json_file(model_out, io::model_json(sm.scaled));
      }
      if (!out_path.empty()) io::write_json_file(out_path, io::torsion_json(s.torsion));
      emit(out);
      return r.admissible ? exit_ok : exit_check;
    }
    if (*verify) {
      exact::CoframedModel cm = io::model_from_json(io::read_json_file(file));
      bool ok = false;
      json out = verify_model(cm, ok);
      emit(out);
      return ok ? exit_ok : exit_check;
    }
    if (*srch) {
      if (rank >= 0) scfg.target_rank = rank;
      SearchResult res = search(scfg);
      if (!out_path.empty()) io::write_json_file(out_path, io::torsion_json(res.torsion));
      emit(io::search_json(res));
      return exit_ok;
    }
  } catch (const CheckFailure& e) {
    return fail("check", e.what(), exit_check);
  } catch (const InputError& e) {
    return fail("input", e.what(), exit_input);
  } catch (const std::exception& e) {
    return fail("input", e.what(), exit_input);
  }
  return exit_input;
}
