#include <CLI11.hpp>
#include <spdlog/spdlog.h>
#include <spdlog/sinks/stdout_sinks.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "faecc/explorer.hpp"

using namespace faecc::explorer;

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_logger_st("faecc");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("FAECC_LOG")) spdlog::set_level(spdlog::level::from_str(env));
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Retention, ECC and device reliability explorer"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "INI experiment file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Monte Carlo seed (overrides mc.seed)");
  app.add_option("--trials", trials, "Monte Carlo trials (overrides mc.trials)");
  app.add_option("--set", overrides, "section.key=value, applied after the file");
  app.add_option("--out", out_path, "Output file (default stdout)");

  auto* curve = app.add_subcommand("ebn-curve", "Required E_BN vs raw array size");
  auto* ecc_cmd = app.add_subcommand("ebn-ecc", "Required E_BN vs correction capability");
  auto* penalty = app.add_subcommand("ebn-penalty", "E_BN increase caused by defective cells");
  auto* verify = app.add_subcommand("codec-verify", "Exhaustive correction-capability matrix");
  auto* sweep = app.add_subcommand("device-sweep", "Write, read-decision and disturb failure vs width");
  auto* simulate = app.add_subcommand("simulate", "Write, age and read a simulated array");

  std::optional<int> deg;
  std::optional<std::size_t> k;
  std::optional<std::string> mode;
  verify->add_option("--deg", deg, "Galois field degree");
  verify->add_option("--k", k, "Data bits");
  verify->add_option("--mode", mode, "secded, dected or faecc")
      ->check(CLI::IsMember({"secded", "dected", "faecc"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kValidation;
  }

  try {
    ExperimentConfig cfg;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      cfg = load_config(in);
      // Fault maps named in a file are relative to that file.
      const std::filesystem::path fm = cfg.array.fault_map;
      if (!fm.empty() && fm.is_relative())
        cfg.array.fault_map = (std::filesystem::path(config_path).parent_path() / fm).string();
    }
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw faecc::InvalidArgument("--set expects section.key=value, got '" + kv + "'");
      set_key(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (seed) cfg.mc.seed = *seed;
    if (trials) cfg.mc.trials = *trials;
    validate(cfg);

    std::ostringstream buf;
    const auto start = std::chrono::steady_clock::now();
    int rc = kOk;
    if (*curve) {
      rc = cmd_ebn_curve(cfg, buf);
    } else if (*ecc_cmd) {
      rc = cmd_ebn_ecc(cfg, buf);
    } else if (*penalty) {
      rc = cmd_ebn_penalty(cfg, buf);
    } else if (*verify) {
      std::vector<CodecTarget> targets = default_codec_targets();
      if (deg || k || mode) {
        if (!(deg && k && mode)) throw faecc::InvalidArgument("codec-verify needs --deg, --k and --mode together");
        targets = {{*deg, *k, parse_mode(*mode)}};
      }
      rc = cmd_codec_verify(targets, buf);
    } else if (*sweep) {
      rc = cmd_device_sweep(cfg, buf);
    } else if (*simulate) {
      rc = cmd_simulate(cfg, buf);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    spdlog::info("{} finished in {:.3f} s", app.get_subcommands().front()->get_name(), secs);

    if (out_path.empty()) {
      std::cout << buf.str();
    } else {
      std::ofstream out(out_path);
      if (!out) throw faecc::InvalidArgument("cannot write '" + out_path + "'");
      out << buf.str();
    }
    if (rc == kVerification) spdlog::error("verification failed");
    return rc;
  } catch (const faecc::Error& e) {
    spdlog::error("{}", e.what());
    return kValidation;
  }
}
