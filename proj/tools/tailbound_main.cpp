#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "tailbound/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Exponential tail bounds for suprema of discontinuous random fields"};
  app.require_subcommand(1);

  std::string config;
  std::string out = ".";
  unsigned threads = 0;
  for (const char* name : {"conjugate", "entropy", "bound", "sum-bound", "verify"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "JSON run configuration")->required();
    sub->add_option("--out", out, "output directory");
    sub->add_option("--threads", threads, "worker threads (default: TAILBOUND_THREADS or 1)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  tailbound::RunOptions options;
  options.out_dir = out;
  options.threads = threads;
  const auto result = tailbound::run_file(command, config, options, std::cout);
  if (result.status != 0 && !result.error_line.empty()) std::cerr << result.error_line << '\n';
  for (const auto& f : result.files) std::cout << "wrote " << f.string() << '\n';
  return result.status;
}
