// rw: classify, construct, verify and cross-check automorphisms of G wr Z^k.

#include <rw/cli.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

struct Common {
  std::string json_out;
  bool quiet = false;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--json-out", c.json_out, "also write the JSON document to this path");
  sub->add_flag("--quiet", c.quiet, "suppress stdout");
}

int emit(const rw::cli::CommandResult& r, const Common& c) {
  std::string text = r.output.dump(2) + "\n";
  if (!c.json_out.empty()) {
    std::ofstream out(c.json_out);
    if (!out) {
      std::cerr << "cannot write " << c.json_out << "\n";
      return rw::cli::kInputError;
    }
    out << text;
  }
  if (!c.quiet) std::cout << text;
  if (r.exit_code != 0 && r.output.contains("error"))
    std::cerr << r.output["error"]["stage"].get<std::string>() << ": "
              << r.output["error"]["message"].get<std::string>() << "\n";
  return r.exit_code;
}

// --construction accepts a file path or the JSON text itself.
nlohmann::json load_construction(const std::string& arg) {
  std::string text = arg;
  if (!arg.empty() && arg.front() != '{' && std::filesystem::exists(arg)) {
    std::ifstream in(arg);
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  return nlohmann::json::parse(text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reidemeister numbers of automorphisms of wreath products G wr Z^k"};
  app.set_version_flag("--version", rw::cli::kVersion);
  app.require_subcommand(1);

  std::string group;
  std::size_t k = 1;
  std::optional<int> case_no;
  Common common;

  auto* classify = app.add_subcommand("classify", "list which construction cases apply");
  classify->add_option("--group", group, "group spec, e.g. 2^2:2,3^1:3")->required();
  classify->add_option("--k", k, "rank of the acting lattice")->required();
  add_common(classify, common);

  auto* construct = app.add_subcommand("construct", "build the automorphism for one case");
  construct->add_option("--group", group)->required();
  construct->add_option("--k", k)->required();
  construct->add_option("--case", case_no)->check(CLI::Range(1, 3));
  add_common(construct, common);

  std::string construction;
  auto* verify = app.add_subcommand("verify", "certify the Reidemeister number of a construction");
  verify->add_option("--construction", construction, "construction JSON or a path to it")->required();
  add_common(verify, common);

  rw::cli::OracleOptions oo;
  std::string psi = "construction";
  auto* oracle = app.add_subcommand("oracle", "count twisted classes on a finite quotient three ways");
  oracle->add_option("--group", oo.group)->required();
  oracle->add_option("--k", oo.k)->required();
  oracle->add_option("--n", oo.n)->required()->check(CLI::PositiveNumber);
  oracle->add_option("--case", oo.case_no)->check(CLI::Range(1, 3));
  oracle->add_option("--psi", psi)->check(CLI::IsMember({"construction", "identity"}));
  oracle->add_option("--cap", oo.cap, "largest quotient order to enumerate");
  std::uint64_t oracle_seed = 0;
  oracle->add_option("--seed", oracle_seed, "accepted for uniformity; the oracle is deterministic");
  add_common(oracle, common);

  rw::cli::ReportOptions ro;
  auto* report = app.add_subcommand("report", "run the full pipeline");
  report->add_option("--group", ro.group)->required();
  report->add_option("--k", ro.k)->required();
  report->add_option("--case", ro.case_no)->check(CLI::Range(1, 3));
  report->add_option("--n", ro.ns, "quotient moduli (repeatable)")->check(CLI::PositiveNumber);
  report->add_option("--seed", ro.seed);
  report->add_option("--cap", ro.cap);
  add_common(report, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : rw::cli::kInputError;
  }

  rw::cli::CommandResult result;
  if (*classify) {
    result = rw::cli::cmd_classify(group, k);
  } else if (*construct) {
    result = rw::cli::cmd_construct(group, k, case_no);
  } else if (*verify) {
    try {
      result = rw::cli::cmd_verify(load_construction(construction));
    } catch (const nlohmann::json::exception& e) {
      result = {rw::cli::kInputError, {{"error", {{"stage", "verify"}, {"kind", "parse"}, {"message", e.what()}}}}};
    }
  } else if (*oracle) {
    oo.psi_identity = psi == "identity";
    result = rw::cli::cmd_oracle(oo);
  } else {
    result = rw::cli::cmd_report(ro);
  }
  return emit(result, common);
}
