#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <variant>

#include <CLI11.hpp>

#include "loopunif/campaign.hpp"
#include "loopunif/classify.hpp"
#include "loopunif/decompose.hpp"
#include "loopunif/generate.hpp"
#include "loopunif/parse.hpp"
#include "loopunif/semiloop.hpp"
#include "loopunif/term.hpp"
#include "loopunif/unify.hpp"

namespace {

loopunif::SemiloopSpec load_semiloop(const std::string& path) {
  loopunif::ProblemInput p;
  if (path == "-") {
    p = loopunif::parse_problem(std::cin);
  } else {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    p = loopunif::parse_problem(in);
  }
  return loopunif::SemiloopSpec::make(p.extendable, p.fixed);
}

int cmd_extend(const std::string& file, std::uint32_t n, std::size_t budget) {
  loopunif::SemiloopSpec sl = load_semiloop(file);
  loopunif::Extension e = loopunif::extension(sl, n, budget);
  std::cout << "extendable: " << loopunif::to_string(e.term) << "\n";
  std::cout << "fixed: " << loopunif::to_string(e.fixed) << "\n";
  return 0;
}

int cmd_unify(const std::string& file, std::uint32_t n, std::size_t budget) {
  loopunif::SemiloopSpec sl = load_semiloop(file);
  loopunif::ExtendablyUnifiableReport rep =
      loopunif::unify_extension(sl, n, budget);
  switch (rep.outcome.status) {
    case loopunif::UnifyStatus::Unifiable:
      std::cout << "UNIFIABLE\n" << rep.outcome.mgu.to_string() << "\n";
      return 0;
    case loopunif::UnifyStatus::Clash:
      std::cout << "CLASH\n";
      return 1;
    case loopunif::UnifyStatus::OccursCheck:
      std::cout << "OCCURS-CHECK " << rep.outcome.occurs->variable.to_string()
                << "\n";
      return 1;
  }
  return 3;
}

int cmd_classify(const std::string& file, std::uint32_t bound,
                 std::size_t budget) {
  loopunif::SemiloopSpec sl = load_semiloop(file);
  loopunif::Classification c = loopunif::classify(sl, bound, budget);
  loopunif::write_classification(std::cout, c);
  return c.verdict == loopunif::Verdict::Inconclusive ? 2 : 0;
}

int cmd_decompose(const std::string& file, std::uint32_t k,
                  const std::string& op, std::size_t budget) {
  loopunif::SemiloopSpec sl = load_semiloop(file);
  loopunif::DecompResult r = op == "D"
                                 ? loopunif::decompose_D(sl, k, budget)
                                 : loopunif::decompose_Dprime(sl, k, budget);
  if (const auto* tr = std::get_if<loopunif::DecompTrace>(&r)) {
    loopunif::write_trace(std::cout, *tr);
    return 0;
  }
  const auto& f = std::get<loopunif::DecompPreconditionFailure>(r);
  std::cerr << "precondition failed: extension " << f.first_bad_extension
            << (f.unifiable ? " is unifiable but not extendably unifiable"
                            : " is not unifiable")
            << "\n";
  return 1;
}

int cmd_fuzz(std::uint64_t seed, std::uint64_t count, std::uint32_t bound,
             const std::string& out, unsigned jobs) {
  loopunif::GenConfig cfg;
  cfg.seed = seed;
  loopunif::CampaignReport rep =
      loopunif::run_campaign(cfg, count, bound, jobs, &std::cerr);
  loopunif::write_campaign_report(std::cout, rep);
  if (!out.empty()) {
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot open " + out);
    loopunif::write_campaign_report(f, rep);
  }
  const bool bad = !rep.oracle_disagreements.empty() ||
                   !rep.soundness_violations.empty();
  return bad ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"loop and semiloop unification toolkit"};
  app.require_subcommand(1);

  std::string file;
  std::uint32_t n = 1, k = 0, bound = 0;
  std::size_t budget = loopunif::kDefaultNodeBudget;
  std::string op = "Dprime";
  std::uint64_t seed = 0, count = 0;
  std::string out_path;
  unsigned jobs = 0;

  auto add_budget = [&](CLI::App* sub) {
    sub->add_option("--node-budget", budget, "term-node budget per operation")
        ->capture_default_str();
  };

  CLI::App* c_extend = app.add_subcommand(
      "extend", "print the n-extension of the problem in input format");
  c_extend->add_option("file", file, "problem file, or - for stdin")
      ->required();
  c_extend->add_option("--n", n, "extension index")->required();
  add_budget(c_extend);

  CLI::App* c_unify = app.add_subcommand(
      "unify", "unify the n-extension against the fixed side");
  c_unify->add_option("file", file, "problem file, or - for stdin")
      ->required();
  c_unify->add_option("--n", n, "extension index")->required();
  add_budget(c_unify);

  CLI::App* c_classify = app.add_subcommand(
      "classify", "probe extensions and report the loop-unifiability verdict");
  c_classify->add_option("file", file, "problem file, or - for stdin")
      ->required();
  c_classify->add_option("--bound", bound,
                         "probe depth (0 = spread-based default)");
  add_budget(c_classify);

  CLI::App* c_decompose = app.add_subcommand(
      "decompose", "print the decomposition trace of the k-extension");
  c_decompose->add_option("file", file, "problem file, or - for stdin")
      ->required();
  c_decompose->add_option("--k", k, "extension index")->required();
  c_decompose->add_option("--op", op, "operator variant")
      ->check(CLI::IsMember({"D", "Dprime"}))
      ->capture_default_str();
  add_budget(c_decompose);

  CLI::App* c_fuzz = app.add_subcommand(
      "fuzz", "classify a seeded batch of random problems and cross-check");
  c_fuzz->add_option("--seed", seed, "campaign seed")->required();
  c_fuzz->add_option("--count", count, "number of instances")->required();
  c_fuzz->add_option("--bound", bound,
                     "probe depth (0 = spread-based default)");
  c_fuzz->add_option("--out", out_path, "also write the report to this file");
  c_fuzz->add_option("--jobs", jobs, "worker threads (0 = hardware)");
  add_budget(c_fuzz);

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_extend->parsed()) return cmd_extend(file, n, budget);
    if (c_unify->parsed()) return cmd_unify(file, n, budget);
    if (c_classify->parsed()) return cmd_classify(file, bound, budget);
    if (c_decompose->parsed()) return cmd_decompose(file, k, op, budget);
    if (c_fuzz->parsed()) return cmd_fuzz(seed, count, bound, out_path, jobs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 3;
}
