// halfheat: batch front end. Reads a JSON run specification, runs one command and writes
// report.json plus samples.csv. Exit codes: 0 completed, 1 input error, 2 numerical failure,
// 3 obstructed or diverged.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "halfheat/app.hpp"
#include "halfheat/errors.hpp"

using namespace halfheat;

int main(int argc, char** argv) {
  CLI::App cli{"Semilinear heat equation on the half-space with measure data"};
  std::string spec_path;
  RunContext ctx;
  std::string out_dir = ".";
  cli.add_option("--spec", spec_path, "Run specification (JSON)")->required();
  cli.add_option("--out", out_dir, "Output directory");
  cli.add_option("--seed", ctx.seed, "Seed for randomized sampling");
  cli.add_option("--threads", ctx.threads, "Worker threads")->check(CLI::Range(1, 64));
  cli.add_flag("--refine", ctx.refine, "Halve all grid spacings once");
  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }
  ctx.out_dir = out_dir;

  std::ifstream in(spec_path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot read " << spec_path << "\n";
    return kExitInput;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  RunSpec spec;
  try {
    spec = parse_run_spec(nlohmann::json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::cerr << spec_path << ":" << line << ":" << col << ": malformed JSON: " << e.what() << "\n";
    return kExitInput;
  } catch (const SpecError& e) {
    std::cerr << spec_path << ":" << locate_key(text, e.path()) << ": " << e.what() << "\n";
    return kExitInput;
  }

  try {
    const RunOutcome out = run(spec, ctx);
    std::cout << to_string(spec.command) << ": exit " << out.exit_code << ", report " << (ctx.out_dir / "report.json").string()
              << "\n";
    return out.exit_code;
  } catch (const SpecError& e) {
    std::cerr << spec_path << ":" << locate_key(text, e.path()) << ": " << e.what() << "\n";
    return kExitInput;
  } catch (const std::domain_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}
