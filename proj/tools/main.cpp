// cqkd: run protocol scenarios, inspect attacks, run verification suites.
//
// Exit status: 0 all expectations met, 1 an expectation or check failed,
// 2 configuration or usage error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "cqkd/cqkd.hpp"
#include "cqkd/scenario.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kConfigError = 2;

fs::path output_dir(const std::string& flag, const std::string& scenario) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("CQKD_OUT_DIR"); env && *env) return fs::path(env) / scenario;
  return fs::path("cqkd-out") / scenario;
}

int print_checks(const std::vector<cqkd::CheckRow>& rows) {
  bool ok = true;
  for (const auto& r : rows) {
    std::cout << (r.pass ? "PASS " : "FAIL ") << '[' << r.suite << "] " << r.name;
    if (!r.detail.empty()) std::cout << "  (" << r.detail << ')';
    std::cout << '\n';
    ok = ok && r.pass;
  }
  return ok ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-mode Fock-space simulator for semi-quantum key distribution and its attacks"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Execute a scenario and compare against its expectations");
  std::string scenario_path, out_dir, format = "text";
  std::uint64_t seed = 0, rounds = 0;
  unsigned jobs = 1;
  run->add_option("scenario", scenario_path, "Scenario file (YAML)")->required()->check(CLI::ExistingFile);
  auto* seed_opt = run->add_option("--seed", seed, "Override the scenario seed");
  auto* rounds_opt = run->add_option("--rounds", rounds, "Override the number of rounds");
  run->add_option("--out-dir", out_dir, "Report directory (default $CQKD_OUT_DIR/<name> or cqkd-out/<name>)");
  run->add_option("--format", format, "Machine-readable report format")->check(CLI::IsMember({"text", "csv"}));
  run->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  auto* analyze = app.add_subcommand("analyze", "Exact constraint and leakage report for a scenario's attack");
  std::string analyze_path;
  analyze->add_option("scenario", analyze_path, "Scenario file (YAML)")->required()->check(CLI::ExistingFile);

  auto* list = app.add_subcommand("list-attacks", "List the registered attacks");

  auto* describe = app.add_subcommand("describe", "Describe one attack");
  std::string attack_name;
  describe->add_option("name", attack_name)->required();

  auto* verify = app.add_subcommand("verify", "Run a verification suite");
  std::string suite = "all";
  std::uint64_t verify_seed = 1;
  std::string corpus = std::string(CQKD_DATA_DIR) + "/expansion_corpus.txt";
  verify->add_option("suite", suite)->check(CLI::IsMember({"fock", "lemma", "thresholds", "all"}));
  verify->add_option("--seed", verify_seed, "Seed for randomized checks");
  verify->add_option("--corpus", corpus, "Expansion coefficient corpus");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*list) {
      for (const auto& a : cqkd::attack_registry()) std::cout << a.name << "\t" << a.summary << '\n';
      return kOk;
    }
    if (*describe) {
      const auto& a = cqkd::find_attack(attack_name);
      std::cout << a.name << ": " << a.summary << "\n\n" << a.detail << '\n';
      return kOk;
    }
    if (*verify) {
      std::vector<cqkd::CheckRow> rows;
      auto add = [&](std::vector<cqkd::CheckRow> more) { rows.insert(rows.end(), more.begin(), more.end()); };
      if (suite == "fock" || suite == "all") add(cqkd::verify_fock(corpus));
      if (suite == "lemma" || suite == "all") add(cqkd::verify_lemma(verify_seed));
      if (suite == "thresholds" || suite == "all") add(cqkd::verify_thresholds());
      return print_checks(rows);
    }
    if (*analyze) {
      const cqkd::Scenario s = cqkd::load_scenario(analyze_path);
      const cqkd::AttackSpec atk = cqkd::build_attack(s);
      if (s.config.variant != cqkd::Variant::bb84 && s.config.variant != cqkd::Variant::b92) {
        cqkd::write_report(std::cout, cqkd::check_constraints(atk, s.config));
        std::cout << "action_discrimination = "
                  << cqkd::format_double(cqkd::action_discrimination(atk, s.config)) << '\n';
      }
      cqkd::write_report(std::cout, cqkd::eve_leakage(atk, s.config));
      return kOk;
    }

    cqkd::RunOptions opt;
    if (*seed_opt) opt.seed = seed;
    if (*rounds_opt) opt.rounds = rounds;
    opt.jobs = jobs;
    const cqkd::ScenarioResult result = cqkd::run_scenario(cqkd::load_scenario(scenario_path), opt);

    const fs::path dir = output_dir(out_dir, result.scenario.name);
    fs::create_directories(dir);
    const auto fmt = format == "csv" ? cqkd::ReportFormat::csv : cqkd::ReportFormat::text;
    {
      std::ofstream report(dir / (fmt == cqkd::ReportFormat::csv ? "report.csv" : "report.txt"));
      cqkd::write_report(report, result.report, result.scenario.name, fmt);
      if (fmt == cqkd::ReportFormat::text) cqkd::write_comparison(report, result.rows);
      if (!report) throw std::runtime_error("failed writing report in " + dir.string());
    }
    {
      std::ofstream summary(dir / "summary.txt");
      cqkd::write_summary(summary, result);
    }
    cqkd::write_summary(std::cout, result);
    std::cout << "\nReports written to " << dir.string() << '\n';
    return result.passed() ? kOk : kFailed;
  } catch (const cqkd::config_error& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::out_of_range& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
}
