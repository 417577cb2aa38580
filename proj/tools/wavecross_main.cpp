// wavecross: run epsilon-convergence studies and numerical checks from JSON
// configs, and merge study summaries into reports.
//
// Exit codes: 0 success, 1 numerical failure (a check failed or a run blew
// up), 2 configuration/usage error.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wavecross/experiment.hpp"

namespace {

void print_error(const char* type, const std::string& msg) {
  wx::json err;
  err["error"]["type"] = type;
  err["error"]["message"] = msg;
  std::cerr << err.dump() << "\n";
}

int cmd_run(const std::string& config_path, const wx::RunOptions& opt) {
  wx::ExperimentConfig cfg = wx::load_config_file(config_path);
  wx::StudyResult res = wx::run_study(cfg, opt);
  wx::write_artifacts(res, opt);
  const wx::json merged = wx::report_merge({wx::summary_json(res)});
  std::cout << wx::report_text(merged);
  if (!res.all_pass) {
    print_error("numerical", "study '" + res.study +
                                 "' has failing checks; see the summary");
    return 1;
  }
  return 0;
}

int cmd_report(const std::vector<std::string>& files,
               const wx::RunOptions& opt) {
  std::vector<wx::json> summaries;
  for (const std::string& f : files) {
    std::ifstream is(f);
    if (!is) throw wx::ConfigError("cannot open summary file '" + f + "'");
    wx::json j;
    try {
      is >> j;
    } catch (const std::exception& e) {
      throw wx::ConfigError("summary parse error in '" + f + "': " +
                            e.what());
    }
    summaries.push_back(std::move(j));
  }
  const wx::json merged = wx::report_merge(summaries);
  if (!opt.out_dir.empty()) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(opt.out_dir, ec);
    if (ec)
      throw wx::ConfigError("cannot create output directory '" +
                            opt.out_dir + "': " + ec.message());
    auto dump = [&](const std::string& name, const std::string& content) {
      std::ofstream os(opt.out_dir + "/" + name, std::ios::binary);
      if (!os || !(os << content))
        throw wx::ConfigError("write failed for '" + opt.out_dir + "/" +
                              name + "'");
    };
    dump("report_summary.json", merged.dump(2) + "\n");
    dump("report_table.csv", wx::report_csv(merged));
  }
  std::cout << wx::report_text(merged);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "wavecross: semiclassical wave-packet propagation through band "
      "crossings, validated against a split-step grid solver"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> report_files;
  wx::RunOptions opt;
  opt.out_dir = ".";
  std::uint64_t seed_val = 0;

  CLI::App* run = app.add_subcommand("run", "run a study config");
  run->add_option("config", config_path, "JSON config file")->required();
  run->add_option("--out-dir", opt.out_dir, "artifact directory");
  run->add_option("--threads", opt.threads,
                  "worker threads for the epsilon sweep (0 = auto)");
  CLI::Option* seed_opt =
      run->add_option("--seed", seed_val, "override the config seed");
  run->add_flag("--verbose", opt.verbose, "progress lines on stderr");

  CLI::App* rep = app.add_subcommand("report", "merge study summaries");
  rep->add_option("files", report_files, "summary JSON files")
      ->required()
      ->expected(-1);
  rep->add_option("--out-dir", opt.out_dir, "artifact directory");
  rep->add_flag("--verbose", opt.verbose, "progress lines on stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (run->parsed()) {
      if (seed_opt->count() > 0) {
        opt.has_seed_override = true;
        opt.seed_override = seed_val;
      }
      return cmd_run(config_path, opt);
    }
    return cmd_report(report_files, opt);
  } catch (const wx::ConfigError& e) {
    print_error("config", e.what());
    return 2;
  } catch (const std::exception& e) {
    print_error("numerical", e.what());
    return 1;
  }
}
