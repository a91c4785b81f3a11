// logsync command-line interface.
//
// Exit codes: 0 success, 2 scenario validation failure, 3 numerical failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "logsync/shell.hpp"

namespace {

logsync::Json load_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw logsync::validation_error("cannot open scenario file '" + path + "'");
  try {
    return logsync::Json::parse(in);
  } catch (const std::exception& e) {
    throw logsync::validation_error("scenario is not valid JSON: " + std::string(e.what()));
  }
}

void write_error_report(const std::filesystem::path& out_dir, const std::string& kind,
                        const std::vector<std::string>& problems) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) return;
  logsync::Json j{{"error", kind}, {"problems", problems}};
  std::ofstream out(out_dir / "error_report.json", std::ios::binary);
  if (out) out << j.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"logical-synchronization channel simulator and solvers"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = "out", sweep;
  std::vector<std::string> formats;
  std::uint64_t seed = 0;
  bool seed_set = false;

  const std::vector<std::string> commands = {
      "simulate", "solve-tetra", "solve-ring5", "minimax", "frozen",
      "bitrate",  "steer",       "estimate-mu", "export-graph"};
  for (const auto& name : commands) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--scenario", scenario_path, "scenario JSON file")->required();
    sub->add_option("--out", out_dir, "output directory (default: out)");
    sub->add_option("--seed", seed, "seed override")->each([&](const std::string&) {
      seed_set = true;
    });
    sub->add_option("--format", formats, "artifact formats: json csv dot (default: all)");
    sub->add_option("--sweep", sweep, "parameter sweep 'param=start:stop:count'");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  logsync::CommandOptions opts;
  if (seed_set) opts.seed = seed;
  if (!formats.empty()) {
    opts.formats.clear();
    for (const auto& f : formats) opts.formats.insert(f);
    opts.formats.insert("json");
  }
  if (!sweep.empty()) opts.sweep = sweep;

  try {
    const auto doc = load_json(scenario_path);
    const auto res = logsync::run_command(command, doc, out_dir, opts);
    std::cout << res.report.dump(2) << "\n";
    return res.exit_code;
  } catch (const logsync::validation_error& e) {
    std::cerr << "validation failure:\n";
    for (const auto& p : e.problems()) std::cerr << "  - " << p << "\n";
    write_error_report(out_dir, "validation", e.problems());
    return 2;
  } catch (const logsync::domain_error& e) {
    std::cerr << "domain failure: " << e.what() << "\n";
    write_error_report(out_dir, "domain", {e.what()});
    return 3;
  } catch (const logsync::numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    write_error_report(out_dir, "numerical", {e.what()});
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    write_error_report(out_dir, "unexpected", {e.what()});
    return 3;
  }
}
