// Command-line front end: tomo, overlap, lowerbound, oracle, report.

#include "ptomo/harness.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <stdexcept>
#include <string>

namespace {

struct Overrides {
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  std::map<std::string, bool> flags;
  std::map<std::string, CLI::Option*> flag_options;
  std::string config_path;

  void option(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    options[key] = app->add_option(flag, values[key], help);
  }
  void flag(CLI::App* app, const std::string& name, const std::string& key, const std::string& help) {
    flag_options[key] = app->add_flag(name, flags[key], help);
  }

  ptomo::ExperimentConfig build(ptomo::ExperimentKind kind) const {
    ptomo::ExperimentConfig config;
    if (!config_path.empty()) config = ptomo::ExperimentConfig::load(config_path);
    config.kind = kind;
    for (const auto& [key, opt] : options)
      if (opt->count() > 0) config.set(key, values.at(key));
    for (const auto& [key, opt] : flag_options)
      if (opt->count() > 0) config.set(key, flags.at(key) ? "true" : "false");
    return config;
  }
};

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config_path, "key = value config file")->check(CLI::ExistingFile);
  o.option(app, "--state", "state", "mixed:N | basis:BITS | ghz:N | random_pure:N:SEED | random_mixed:N:RANK:SEED");
  o.option(app, "-n,--n", "n", "qubit count");
  o.option(app, "--epsilon", "epsilon", "target accuracy");
  o.option(app, "--delta", "delta", "failure probability");
  o.option(app, "--trials", "trials", "number of independent trials");
  o.option(app, "--seed", "seed", "64-bit base seed");
  o.option(app, "--out", "out", "output directory");
  o.option(app, "--workers", "workers", "parallel trial workers (0 = all cores)");
  o.flag(app, "--record-timing", "record_timing", "add wall time to trial records");
}

void print_summary(const ptomo::ExperimentResult& result) { ptomo::write_summary_csv(std::cout, result.summary); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pauli-measurement tomography simulator"};
  app.require_subcommand(1);

  Overrides tomo_o, overlap_o, lower_o, oracle_o;

  auto* tomo = app.add_subcommand("tomo", "full-state tomography over all 3^n Pauli bases");
  add_common(tomo, tomo_o);
  tomo_o.option(tomo, "--shots-per-basis,-m", "shots_per_basis", "override the per-basis shot budget");
  tomo_o.flag(tomo, "--project", "project_to_physical", "also report the PSD-projected estimate");
  tomo_o.flag(tomo, "--save-shots", "save_shots", "write each trial's shot stream");

  auto* overlap = app.add_subcommand("overlap", "k-qubit marginals from random Pauli bases");
  add_common(overlap, overlap_o);
  overlap_o.option(overlap, "-k,--k", "k", "marginal size");
  overlap_o.option(overlap, "--total-shots,-T", "total_shots", "override the total shot budget");
  overlap_o.option(overlap, "--subsets", "subsets", "partial mode subsets, e.g. 0,1;2,3");
  overlap_o.flag(overlap, "--save-shots", "save_shots", "write each trial's shot stream");
  overlap_o.flag(overlap, "--save-estimates", "save_estimates", "write per-subset estimates");
  overlap_o.flag(overlap, "--include-smaller", "include_smaller", "also report marginals smaller than k");

  auto* lower = app.add_subcommand("lowerbound", "hidden biased-coin decoding experiment");
  add_common(lower, lower_o);
  lower_o.option(lower, "--samples,-m", "samples", "copies per trial");
  lower_o.option(lower, "--n-list", "n_list", "run the m*(n) scaling table, e.g. 1,2,4,8,16");

  auto* oracle = app.add_subcommand("oracle", "exact expectations, marginals and outcome distributions");
  add_common(oracle, oracle_o);
  oracle_o.option(oracle, "--subsets", "subsets", "marginals to report, e.g. 0,1;1,2");
  oracle_o.option(oracle, "--bases", "bases", "bases to report, e.g. XY,ZZ");

  auto* report = app.add_subcommand("report", "re-aggregate a saved trials.jsonl");
  std::string report_in, report_out;
  report->add_option("input", report_in, "trials.jsonl or a directory containing it")->required();
  report->add_option("--out", report_out, "write the summary CSV here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*tomo) {
      print_summary(ptomo::run_experiment(tomo_o.build(ptomo::ExperimentKind::Tomo)));
    } else if (*overlap) {
      print_summary(ptomo::run_experiment(overlap_o.build(ptomo::ExperimentKind::Overlap)));
    } else if (*lower) {
      const auto result = ptomo::run_experiment(lower_o.build(ptomo::ExperimentKind::LowerBound));
      if (!result.scaling.empty()) {
        ptomo::write_scaling_csv(std::cout, result.scaling);
      } else {
        print_summary(result);
      }
    } else if (*oracle) {
      const auto result = ptomo::run_experiment(oracle_o.build(ptomo::ExperimentKind::Oracle));
      std::cout << result.oracle.dump(2) << '\n';
    } else if (*report) {
      std::filesystem::path path = report_in;
      if (std::filesystem::is_directory(path)) path /= "trials.jsonl";
      std::ifstream is(path);
      if (!is) throw std::runtime_error("cannot open '" + path.string() + "'");
      const auto summary = ptomo::report_from_jsonl(is);
      if (report_out.empty()) {
        ptomo::write_summary_csv(std::cout, summary);
      } else {
        std::ofstream os(report_out);
        if (!os) throw std::runtime_error("cannot open '" + report_out + "' for writing");
        ptomo::write_summary_csv(os, summary);
        if (!os) throw std::runtime_error("failed writing '" + report_out + "'");
      }
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
