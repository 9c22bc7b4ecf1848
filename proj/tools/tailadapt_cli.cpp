#include <iostream>
#include <string>
#include <vector>

#include "tailadapt/app.hpp"
#include "tailadapt/goldens.hpp"

namespace {

int verify_goldens_main(const std::vector<std::string>& args) {
  CLI::App cli{"Re-run the recorded golden cases and compare their artifacts"};
  std::string dir = "goldens";
  bool bless = false;
  std::vector<std::string> only;
  cli.add_option("--goldens", dir, "golden directory holding manifest.json");
  cli.add_flag("--bless", bless, "record the current artifacts as the new goldens");
  cli.add_option("--case", only, "restrict to the named cases");
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    cli.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return cli.exit(e);
  }
  try {
    const auto report = tailadapt::goldens::verify_goldens(dir, bless, only);
    std::cout << tailadapt::goldens::format_report(report);
    return report.passed() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (!args.empty() && args.front() == "verify-goldens") {
    return verify_goldens_main({args.begin() + 1, args.end()});
  }
  return tailadapt::app::main_with_args(args);
}
