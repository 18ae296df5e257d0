#include <CLI11.hpp>
#include <iostream>

#include "abe/config.hpp"
#include "abe/dispatch.hpp"
#include "abe/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Moving-packet Aharonov-Bohm simulations"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir;
  unsigned threads = 0;
  std::string tier;

  const char* names[] = {"sweep", "single", "smatrix", "fringe", "leakage", "validate"};
  const char* help[] = {"velocity sweep of the sup-in-time error",
                        "one velocity with probe snapshots",
                        "scattering distance and phase per velocity",
                        "two-arm interferogram",
                        "free-flight leakage and momentum-cutoff tables",
                        "exact-identity suite"};
  for (int k = 0; k < 6; ++k) {
    CLI::App* sub = app.add_subcommand(names[k], help[k]);
    sub->add_option("--config", config_path, "INI run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides [output] directory)");
    sub->add_option("--threads", threads, "worker threads (overrides [run] threads)")->check(CLI::PositiveNumber);
    sub->add_option("--tier", tier, "resolution tier")->check(CLI::IsMember({"base", "halved"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(abe::FailureClass::config);
  }

  try {
    abe::RunConfig cfg = abe::parse_config(config_path);
    if (!out_dir.empty()) cfg.output.directory = out_dir;
    if (threads > 0) cfg.threads = threads;
    if (!tier.empty()) cfg.sweep.tier = abe::parse_tier(tier);
    const abe::Subcommand sub = abe::parse_subcommand(app.get_subcommands().front()->get_name());
    return abe::dispatch(sub, cfg, std::cerr);
  } catch (const abe::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(abe::FailureClass::solver);
  }
}
