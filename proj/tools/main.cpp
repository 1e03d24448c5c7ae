// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Mathesis Authors
//
// Command-line front end for the formalization harness. Subcommands cover
// the individual stages (formalize, verify, score, prove, lint) and the
// batch flows (e2e, eval, dpo-gen). Exit codes: 0 success, 1 usage error,
// 2 runtime failure.

#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mathesis/bench.hpp"
#include "mathesis/config.hpp"
#include "mathesis/dpo.hpp"
#include "mathesis/error.hpp"
#include "mathesis/gateway.hpp"
#include "mathesis/ledger.hpp"
#include "mathesis/leanscorer.hpp"
#include "mathesis/pipeline.hpp"
#include "mathesis/problems.hpp"
#include "mathesis/prompts.hpp"
#include "mathesis/util.hpp"
#include "mathesis/verifier.hpp"

namespace {

namespace fs = std::filesystem;
using mathesis::Errc;
using mathesis::Error;
using nlohmann::ordered_json;
namespace bench = mathesis::bench;
namespace config = mathesis::config;
namespace dpo = mathesis::dpo;
namespace gateway = mathesis::gateway;
namespace ledger = mathesis::ledger;
namespace leanscorer = mathesis::leanscorer;
namespace pipeline = mathesis::pipeline;
namespace verifier = mathesis::verifier;

struct Overrides {
  std::optional<long long> seed;
  std::optional<int> concurrency;
  std::optional<double> alpha;
  std::optional<int> samples;
  std::optional<int> prover_budget;
  std::string verifier_mode;  // "", "stub", or "real"
  std::string out;            // file or directory, meaning depends on subcommand
};

config::HarnessConfig effective_config(const std::string& config_path,
                                       const Overrides& ov) {
  config::HarnessConfig cfg = config_path.empty() ? config::default_config()
                                                  : config::load_config(config_path);
  if (ov.seed) {
    cfg.pipeline.seed = *ov.seed;
  }
  if (ov.concurrency) {
    cfg.pipeline.concurrency = *ov.concurrency;
  }
  if (ov.alpha) {
    cfg.pipeline.alpha = *ov.alpha;
    cfg.fuzzy.alpha = *ov.alpha;
  }
  if (ov.samples) {
    cfg.pipeline.sample_budget = *ov.samples;
  }
  if (ov.prover_budget) {
    cfg.pipeline.prover_budget = *ov.prover_budget;
  }
  if (ov.verifier_mode == "stub") {
    cfg.verifier.mode = verifier::VerifierConfig::Mode::Stub;
  } else if (ov.verifier_mode == "real") {
    if (cfg.verifier.command.empty()) {
      throw Error(Errc::ConfigError,
                  "--verifier real needs a verifier command in the config file");
    }
    cfg.verifier.mode = verifier::VerifierConfig::Mode::Command;
  }
  cfg.pipeline.validate();
  cfg.fuzzy.validate();
  return cfg;
}

// Owns the live objects a subcommand needs: clock, backends, verifier.
struct Runtime {
  config::HarnessConfig cfg;
  mathesis::ClockPtr clock;
  std::map<std::string, std::unique_ptr<gateway::Backend>> backends;
  std::unique_ptr<verifier::LeanVerifier> lean;

  gateway::Backend* role(const std::string& name) {
    auto it = backends.find(name);
    return it == backends.end() ? nullptr : it->second.get();
  }

  pipeline::RoleBindings bindings() {
    pipeline::RoleBindings roles;
    roles.autoformalizer = role("autoformalizer");
    roles.prover = role("prover");
    roles.semantic_judge = role("semantic_judge");
    roles.leanscorer_judge = role("leanscorer_judge");
    return roles;
  }

  pipeline::Pipeline make_pipeline() {
    return pipeline::Pipeline(cfg.pipeline, bindings(), *lean, cfg.fuzzy, clock);
  }
};

Runtime make_runtime(config::HarnessConfig cfg, const std::string& run_id) {
  Runtime rt;
  rt.cfg = std::move(cfg);
  rt.clock = rt.cfg.make_clock();
  for (const auto& [role, backend_cfg] : rt.cfg.backends) {
    rt.backends.emplace(role, gateway::make_backend(backend_cfg, rt.clock));
  }
  rt.lean = std::make_unique<verifier::LeanVerifier>(rt.cfg.verifier, run_id, rt.clock);
  return rt;
}

// The run configuration echoed into summaries. Paths are deliberately
// excluded so runs into different output directories stay byte-comparable.
ordered_json effective_echo(const config::HarnessConfig& cfg) {
  ordered_json backends = ordered_json::object();
  for (const auto& [role, b] : cfg.backends) {
    backends[role] = ordered_json{
        {"name", b.name},
        {"mode", b.scripted_dir.empty() ? "live" : "scripted"},
        {"model_id", b.model_id},
    };
  }
  return ordered_json{
      {"pipeline",
       ordered_json{
           {"sample_budget", cfg.pipeline.sample_budget},
           {"prover_budget", cfg.pipeline.prover_budget},
           {"alpha", cfg.pipeline.alpha},
           {"concurrency", cfg.pipeline.concurrency},
           {"seed", cfg.pipeline.seed},
           {"autoformalize_template", cfg.pipeline.autoformalize_template},
       }},
      {"fuzzy",
       ordered_json{
           {"f_a", cfg.fuzzy.f_a},
           {"f_b", cfg.fuzzy.f_b},
           {"f_c", cfg.fuzzy.f_c},
           {"minor_penalty_single", cfg.fuzzy.minor_penalty_single},
           {"minor_penalty_multi", cfg.fuzzy.minor_penalty_multi},
           {"alpha", cfg.fuzzy.alpha},
       }},
      {"verifier",
       ordered_json{
           {"mode",
            cfg.verifier.mode == verifier::VerifierConfig::Mode::Stub ? "stub"
                                                                      : "command"},
           {"timeout_s", cfg.verifier.timeout_s},
           {"pool_size", cfg.verifier.pool_size},
       }},
      {"backends", std::move(backends)},
      {"clock", ordered_json{{"mode", cfg.clock.mode}, {"epoch", cfg.clock.epoch}}},
  };
}

void write_or_print(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    if (text.empty() || text.back() != '\n') {
      std::cout << '\n';
    }
  } else {
    mathesis::write_text_file(out_path, text.empty() || text.back() == '\n'
                                            ? text
                                            : text + '\n');
  }
}

std::string load_input(const std::string& inline_text, const std::string& file_path) {
  if (!file_path.empty()) {
    return mathesis::read_text_file(file_path);
  }
  return inline_text;
}

bench::Problem resolve_problem(const config::HarnessConfig& cfg,
                               const std::string& statement,
                               const std::string& problem_id) {
  if (!statement.empty()) {
    bench::Problem p;
    p.id = "adhoc";
    p.nl_en = statement;
    p.category = "Comprehensive questions";
    return p;
  }
  if (cfg.paths.dataset.empty()) {
    throw Error(Errc::ConfigError, "no dataset configured; pass --statement instead");
  }
  for (bench::Problem& p : bench::load_problems(cfg.paths.dataset)) {
    if (p.id == problem_id) {
      return p;
    }
  }
  throw Error(Errc::UnknownProblemId, "problem '" + problem_id + "' not in dataset");
}

// ---------------------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------------------

int run_formalize(const std::string& config_path, const Overrides& ov,
                  const std::string& statement, const std::string& problem_id) {
  Runtime rt = make_runtime(effective_config(config_path, ov), "cli");
  const bench::Problem problem = resolve_problem(rt.cfg, statement, problem_id);
  pipeline::Pipeline pipe = rt.make_pipeline();

  std::vector<pipeline::CandidateRecord> candidates = pipe.formalize_candidates(problem);
  std::optional<int> selected = pipeline::Pipeline::select_best(candidates);

  ordered_json list = ordered_json::array();
  for (const auto& candidate : candidates) {
    list.push_back(ledger::candidate_to_json(candidate));
  }
  ordered_json out{
      {"problem_id", problem.id},
      {"candidates", std::move(list)},
  };
  out["selected_index"] = selected ? ordered_json(*selected) : ordered_json(nullptr);
  write_or_print(out.dump(2), ov.out);
  return 0;
}

int run_verify(const std::string& config_path, const Overrides& ov,
               const std::string& inline_text, const std::string& file_path,
               bool as_proof) {
  Runtime rt = make_runtime(effective_config(config_path, ov), "cli");
  const std::string text = load_input(inline_text, file_path);

  verifier::VerificationOutcome outcome;
  verifier::LintReport lints;
  if (as_proof) {
    outcome = rt.lean->check_proof(text);
    lints = verifier::lint_proof(text);
  } else {
    outcome = rt.lean->check_statement(text);
    try {
      lints = verifier::lint_statement(text);
    } catch (const Error&) {
      // Statements the splitter cannot analyze are reported unflagged.
    }
  }

  ordered_json out{
      {"check", ledger::outcome_to_json(outcome)},
      {"lints", ledger::lints_to_json(lints)},
  };
  write_or_print(out.dump(2), ov.out);
  return 0;
}

int run_score(const std::string& config_path, const Overrides& ov,
              const std::string& informal, const std::string& formal, bool full) {
  Runtime rt = make_runtime(effective_config(config_path, ov), "cli");
  gateway::Backend* judge = rt.role("leanscorer_judge");
  if (judge == nullptr) {
    throw Error(Errc::ConfigError, "role not bound: leanscorer_judge");
  }
  const leanscorer::LeanScore score =
      leanscorer::score_formalization(informal, formal, *judge, rt.cfg.fuzzy);

  ordered_json ratings = ordered_json::array();
  for (gateway::Rating r : score.ratings) {
    ratings.push_back(std::string(1, gateway::rating_letter(r)));
  }
  ordered_json out{
      {"score", score.score},
      {"verdict", score.verdict == leanscorer::Verdict::Accept ? "accept" : "reject"},
      {"ratings", std::move(ratings)},
      {"n", static_cast<int>(score.ratings.size())},
  };
  if (full) {
    out["decomposition"] = score.decomposition_text;
    out["evaluation"] = score.evaluation_text;
  }
  write_or_print(out.dump(2), ov.out);
  return 0;
}

int run_prove(const std::string& config_path, const Overrides& ov,
              const std::string& inline_text, const std::string& file_path) {
  Runtime rt = make_runtime(effective_config(config_path, ov), "cli");
  const std::string statement = load_input(inline_text, file_path);
  pipeline::Pipeline pipe = rt.make_pipeline();

  pipeline::ProveResult result = pipe.prove_with_budget(statement, "adhoc");
  ordered_json attempts = ordered_json::array();
  for (const auto& attempt : result.attempts) {
    attempts.push_back(ledger::proof_attempt_to_json(attempt));
  }
  ordered_json out{
      {"proved", result.proved},
      {"attempts", std::move(attempts)},
  };
  write_or_print(out.dump(2), ov.out);
  return 0;
}

int run_e2e(const std::string& config_path, const Overrides& ov) {
  Runtime rt = make_runtime(effective_config(config_path, ov), "e2e");
  if (rt.cfg.paths.dataset.empty()) {
    throw Error(Errc::ConfigError, "e2e requires paths.dataset in the config file");
  }
  const std::vector<bench::Problem> problems = bench::load_problems(rt.cfg.paths.dataset);

  const fs::path out_dir = ov.out.empty() ? rt.cfg.paths.out_dir : fs::path(ov.out);
  fs::create_directories(out_dir);

  pipeline::Pipeline pipe = rt.make_pipeline();
  pipeline::RunSummary summary = pipe.run_end_to_end(problems, out_dir / "ledger.jsonl");

  const ordered_json summary_json =
      summary.to_json(effective_echo(rt.cfg), rt.cfg.pipeline.seed);
  mathesis::write_text_file(out_dir / "summary.json", summary_json.dump(2) + "\n");
  std::cout << summary_json.dump(2) << '\n';
  return 0;
}

int run_eval(const std::string& config_path, const Overrides& ov,
             const std::string& ledger_path, const std::string& dataset_path,
             std::optional<int> k) {
  config::HarnessConfig cfg = effective_config(config_path, ov);

  const fs::path out_dir = ov.out.empty() ? cfg.paths.out_dir : fs::path(ov.out);
  fs::path ledger_file = ledger_path.empty() ? out_dir / "ledger.jsonl"
                                             : fs::path(ledger_path);
  fs::path dataset_file = dataset_path.empty() ? cfg.paths.dataset
                                               : fs::path(dataset_path);
  if (dataset_file.empty()) {
    throw Error(Errc::ConfigError, "eval needs a dataset (--dataset or config)");
  }

  const std::vector<pipeline::AttemptRecord> records = ledger::read_ledger(ledger_file);
  const std::vector<bench::Problem> problems = bench::load_problems(dataset_file);
  const bench::EvalReport report = bench::aggregate_report(records, problems, k);

  fs::create_directories(out_dir);
  mathesis::write_text_file(out_dir / "report.json",
                            bench::report_to_json(report).dump(2) + "\n");
  const std::string text = bench::report_to_text(report);
  mathesis::write_text_file(out_dir / "report.txt", text);
  if (ov.out.empty()) {
    std::cout << text;
  }
  return 0;
}

int run_dpo_gen(const std::string& config_path, const Overrides& ov,
                const std::string& ledger_path, const std::string& losers, int cap,
                bool curation) {
  config::HarnessConfig cfg = effective_config(config_path, ov);
  const fs::path ledger_file = ledger_path.empty()
                                   ? cfg.paths.out_dir / "ledger.jsonl"
                                   : fs::path(ledger_path);
  const std::vector<pipeline::AttemptRecord> records = ledger::read_ledger(ledger_file);

  if (curation) {
    std::cout << dpo::curation_report(records).dump(2) << '\n';
    return 0;
  }

  const dpo::LoserPolicy policy = losers == "compiled-only"
                                      ? dpo::LoserPolicy::CompiledOnly
                                      : dpo::LoserPolicy::All;
  const std::vector<dpo::PreferenceTuple> tuples =
      dpo::extract_preferences(records, policy, cap);
  const fs::path out_file =
      ov.out.empty() ? cfg.paths.out_dir / "dpo.jsonl" : fs::path(ov.out);
  dpo::emit_dpo_dataset(tuples, out_file);

  const ordered_json out{
      {"pairs", static_cast<int>(tuples.size())},
      {"path", out_file.string()},
  };
  std::cout << out.dump(2) << '\n';
  return 0;
}

int run_lint(const std::string& inline_text, const std::string& file_path,
             bool as_proof) {
  const std::string text = load_input(inline_text, file_path);
  const verifier::LintReport lints =
      as_proof ? verifier::lint_proof(text) : verifier::lint_statement(text);
  std::cout << ledger::lints_to_json(lints).dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"End-to-end harness: formalize, validate, prove, and export"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides ov;
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--seed", ov.seed, "Run seed echoed into artifacts");
  app.add_option("--concurrency", ov.concurrency, "Worker threads across problems");
  app.add_option("--alpha", ov.alpha, "Semantic acceptance threshold");
  app.add_option("--samples", ov.samples, "Formalization candidates per problem");
  app.add_option("--prover-budget", ov.prover_budget, "Proof attempts per problem");
  app.add_option("--verifier", ov.verifier_mode, "Checker to use")
      ->check(CLI::IsMember({"stub", "real"}));
  app.add_option("--out", ov.out, "Output file or directory");

  // formalize
  auto* formalize = app.add_subcommand(
      "formalize", "Sample formalization candidates for one problem");
  std::string fz_statement;
  std::string fz_problem_id;
  auto* fz_input = formalize->add_option_group("input");
  fz_input->add_option("--statement", fz_statement, "Natural-language statement");
  fz_input->add_option("--problem-id", fz_problem_id, "Problem id from the dataset");
  fz_input->require_option(1);

  // verify
  auto* verify = app.add_subcommand("verify", "Check one statement or proof");
  std::string vf_text;
  std::string vf_file;
  bool vf_proof = false;
  auto* vf_input = verify->add_option_group("input");
  vf_input->add_option("--text", vf_text, "Lean source text");
  vf_input->add_option("--file", vf_file, "File with Lean source text");
  vf_input->require_option(1);
  verify->add_flag("--proof", vf_proof, "Treat the input as a full proof");

  // score
  auto* score = app.add_subcommand("score", "Judge one informal/formal pair");
  std::string sc_informal;
  std::string sc_formal;
  bool sc_full = false;
  score->add_option("--informal", sc_informal, "Natural-language statement")
      ->required();
  score->add_option("--formal", sc_formal, "Formal statement")->required();
  score->add_flag("--full", sc_full, "Include the judge transcripts");

  // prove
  auto* prove = app.add_subcommand("prove", "Attempt proofs for one statement");
  std::string pv_text;
  std::string pv_file;
  auto* pv_input = prove->add_option_group("input");
  pv_input->add_option("--statement", pv_text, "Formal statement");
  pv_input->add_option("--file", pv_file, "File with the formal statement");
  pv_input->require_option(1);

  // e2e
  app.add_subcommand("e2e", "Run the full pipeline over the configured dataset");

  // eval
  auto* eval = app.add_subcommand("eval", "Aggregate a ledger into a report");
  std::string ev_ledger;
  std::string ev_dataset;
  std::optional<int> ev_k;
  eval->add_option("--ledger", ev_ledger, "Ledger file (default: <out_dir>/ledger.jsonl)");
  eval->add_option("--dataset", ev_dataset, "Problem file (default: from config)");
  eval->add_option("--k", ev_k, "Candidate budget used in the at-k metrics");

  // dpo-gen
  auto* dpo_gen = app.add_subcommand("dpo-gen", "Export preference pairs from a ledger");
  std::string dg_ledger;
  std::string dg_losers = "all";
  int dg_cap = 1;
  bool dg_curation = false;
  dpo_gen->add_option("--ledger", dg_ledger,
                      "Ledger file (default: <out_dir>/ledger.jsonl)");
  dpo_gen->add_option("--losers", dg_losers, "Loser eligibility")
      ->check(CLI::IsMember({"all", "compiled-only"}));
  dpo_gen->add_option("--cap", dg_cap, "Max pairs per problem (0 = unlimited)");
  dpo_gen->add_flag("--curation-report", dg_curation,
                    "Print the reward-group curation report instead");

  // lint
  auto* lint = app.add_subcommand("lint", "Run degenerate-content checks");
  std::string lt_text;
  std::string lt_file;
  bool lt_proof = false;
  auto* lt_input = lint->add_option_group("input");
  lt_input->add_option("--text", lt_text, "Lean source text");
  lt_input->add_option("--file", lt_file, "File with Lean source text");
  lt_input->require_option(1);
  lint->add_flag("--proof", lt_proof, "Treat the input as a full proof");

  for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; })) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (formalize->parsed()) {
      return run_formalize(config_path, ov, fz_statement, fz_problem_id);
    }
    if (verify->parsed()) {
      return run_verify(config_path, ov, vf_text, vf_file, vf_proof);
    }
    if (score->parsed()) {
      return run_score(config_path, ov, sc_informal, sc_formal, sc_full);
    }
    if (prove->parsed()) {
      return run_prove(config_path, ov, pv_text, pv_file);
    }
    if (app.get_subcommand("e2e")->parsed()) {
      return run_e2e(config_path, ov);
    }
    if (eval->parsed()) {
      return run_eval(config_path, ov, ev_ledger, ev_dataset, ev_k);
    }
    if (dpo_gen->parsed()) {
      return run_dpo_gen(config_path, ov, dg_ledger, dg_losers, dg_cap, dg_curation);
    }
    if (lint->parsed()) {
      return run_lint(lt_text, lt_file, lt_proof);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
