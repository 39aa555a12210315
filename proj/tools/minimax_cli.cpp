#include <iostream>
#include <string>
#include <vector>

#include "minimax/cli.hpp"

namespace {

void usage(std::ostream& out) {
  out << "usage: minimax_cli <verb> ...\n"
         "  run <config>            run an experiment, write the trace CSV\n"
         "  sweep <config>          run the built-in learning-rate grid\n"
         "  validate <config>       check the config and declared constants\n"
         "  summarize <trace...>    summarize one or more trace CSVs\n"
         "exit codes: 0 ok, 2 config error, 3 numeric abort\n";
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty()) {
    usage(std::cerr);
    return 2;
  }
  const std::string verb = args[0];
  try {
    if (verb == "run" && args.size() == 2)
      return minimax::cli_run(args[1], std::cout);
    if (verb == "sweep" && args.size() == 2)
      return minimax::cli_sweep(args[1], std::cout);
    if (verb == "validate" && args.size() == 2)
      return minimax::cli_validate(args[1], std::cout);
    if (verb == "summarize" && args.size() >= 2)
      return minimax::cli_summarize(
          std::vector<std::string>(args.begin() + 1, args.end()), std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  usage(std::cerr);
  return 2;
}
