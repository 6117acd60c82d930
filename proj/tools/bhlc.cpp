// bhlc: command-line front end for the verifier.
//
// Exit codes: 0 verified, 1 a verification condition failed, 2 frontend
// error, 3 I/O error, 4 demo requested on an unverified program.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "bhl/numstat.hpp"
#include "bhl/pretty.hpp"
#include "bhl/verify.hpp"

namespace {

constexpr int kExitVerified = 0;
constexpr int kExitVcFailed = 1;
constexpr int kExitFrontend = 2;
constexpr int kExitIo = 3;
constexpr int kExitUnverifiedDemo = 4;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw bhl::VerifyError("IoError", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int default_depth() {
  if (const char* env = std::getenv("BHL_DEPTH")) {
    int d = std::atoi(env);
    if (d > 0) return d;
  }
  return 12;
}

void emit_smt_files(const bhl::ProgramAST& prog, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& fn : prog.functions) {
    auto vcs = bhl::generate_vcs(prog, fn);
    for (std::size_t i = 0; i < vcs.size(); ++i) {
      std::string path = dir + "/vc_" + fn.name + "_" + std::to_string(i) + ".smt2";
      std::ofstream out(path);
      try {
        out << bhl::emit_smtlib(vcs[i]);
      } catch (const bhl::VerifyError& e) {
        out << "; not emitted: " << e.what() << "\n";
      }
    }
  }
}

struct CommonArgs {
  std::string file;
  std::string format = "text";
  std::string emit_smt;
  int depth = default_depth();
  int jobs = 1;
  double timeout = 10.0;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("file", a.file, "program to verify (.swl)")->required();
  cmd->add_option("--format", a.format, "output format")
      ->check(CLI::IsMember({"text", "json"}));
  cmd->add_option("--emit-smt", a.emit_smt, "also write one SMT-LIB file per VC into DIR");
  cmd->add_option("--depth", a.depth, "proof search depth limit");
  cmd->add_option("--jobs", a.jobs, "discharge VCs with N worker threads");
  cmd->add_option("--timeout", a.timeout, "per-VC timeout in seconds");
}

int run_verify(const CommonArgs& a, bool explain) {
  std::string source = read_file(a.file);
  bhl::ProgramAST prog = bhl::parse(source);
  bhl::bind_and_check(prog);
  if (!a.emit_smt.empty()) emit_smt_files(prog, a.emit_smt);
  bhl::VerifyOptions opt;
  opt.depth = a.depth;
  opt.jobs = a.jobs;
  opt.timeout_secs = a.timeout;
  bhl::ProgramReport rep = bhl::verify_program(prog, opt, a.file);
  rep.digest = bhl::fnv1a(source);
  if (a.format == "json") {
    std::cout << bhl::report_to_json(rep).dump(2) << "\n";
  } else {
    std::cout << bhl::render_text(rep);
    if (explain) {
      for (const auto& fr : rep.functions)
        for (const auto& o : fr.outcomes) {
          if (o.result.status == bhl::DischargeResult::Proved) continue;
          std::cout << "\n" << o.vc.id << " (" << a.file << ":" << o.vc.loc.line
                    << ":" << o.vc.loc.col << ")\n";
          std::cout << "  goal: " << o.vc.label << "\n";
          std::cout << "  facts in scope:\n";
          for (const auto& f : o.vc.hypothesis_facts)
            std::cout << "    " << bhl::pretty_print(f) << "\n";
          if (!o.result.detail.empty())
            std::cout << "  why it fails: " << o.result.detail << "\n";
          if (!o.missing.empty()) {
            std::cout << "  smallest set of additional requires conjuncts that fixes it:\n";
            for (const auto& m : o.missing)
              std::cout << "    " << bhl::pretty_print(m) << "\n";
          }
        }
    }
  }
  return rep.verified ? kExitVerified : kExitVcFailed;
}

int run_demo(const CommonArgs& a, const std::string& data_path, bool force) {
  std::string source = read_file(a.file);
  bhl::ProgramAST prog = bhl::parse(source);
  bhl::bind_and_check(prog);
  bhl::VerifyOptions opt;
  opt.depth = a.depth;
  opt.timeout_secs = a.timeout;
  opt.compute_missing = false;
  bhl::ProgramReport rep = bhl::verify_program(prog, opt, a.file);
  if (!rep.verified && !force) {
    std::cerr << "refusing to run an unverified program (use --force to override)\n";
    std::cerr << bhl::render_text(rep);
    return kExitUnverifiedDemo;
  }
  bhl::DataTable data = bhl::read_csv_file(data_path);
  for (const auto& fn : prog.functions) {
    bhl::DemoReport dr = bhl::run_demo(prog, fn, data);
    std::cout << "function " << fn.name << ":\n";
    for (const auto& [var, val] : dr.steps) {
      std::cout << "  " << var << " = " << val.p;
      if (!val.test.empty()) std::cout << "  (" << val.test << ")";
      std::cout << "\n";
    }
    for (const auto& [name, p] : dr.results)
      std::cout << "  result " << name << " = " << p << "\n";
  }
  return kExitVerified;
}

int run_specs() {
  for (const auto& [name, spec] : bhl::builtin_specs()) {
    std::cout << name << "(";
    for (std::size_t i = 0; i < spec.params.size(); ++i) {
      if (i) std::cout << ", ";
      const char* kind = "?";
      switch (spec.params[i].kind) {
        case bhl::ParamKind::PopulationK: kind = "population"; break;
        case bhl::ParamKind::DatasetK: kind = "dataset"; break;
        case bhl::ParamKind::RealK: kind = "real"; break;
        case bhl::ParamKind::AltK: kind = "alternative"; break;
        case bhl::ParamKind::GroupListK: kind = "group list"; break;
        case bhl::ParamKind::ControlK: kind = "control index"; break;
      }
      std::cout << spec.params[i].name << ": " << kind;
    }
    std::cout << ")\n";
    for (const auto& lf : spec.base_requires)
      std::cout << "  requires " << lf.label << "\n";
    if (spec.group_method)
      std::cout << "  expands to "
                << (bhl::method_all_pairs(*spec.group_method) ? "all pairwise"
                                                              : "control-vs-treatment")
                << " comparisons\n";
  }
  return kExitVerified;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"static verifier for statistical hypothesis-testing programs"};
  app.require_subcommand(1);

  CommonArgs va, ea, da;
  CLI::App* verify = app.add_subcommand("verify", "verify a program");
  add_common(verify, va);
  CLI::App* explain = app.add_subcommand("explain", "verify and explain failures");
  add_common(explain, ea);
  CLI::App* demo = app.add_subcommand("demo", "run a verified program on CSV data");
  add_common(demo, da);
  std::string data_path;
  bool force = false;
  demo->add_option("--data", data_path, "CSV file, one column per dataset")->required();
  demo->add_flag("--force", force, "run even if verification fails");
  CLI::App* specs = app.add_subcommand("specs", "list built-in command specifications");

  CLI11_PARSE(app, argc, argv);

  try {
    if (verify->parsed()) return run_verify(va, false);
    if (explain->parsed()) return run_verify(ea, true);
    if (demo->parsed()) return run_demo(da, data_path, force);
    if (specs->parsed()) return run_specs();
  } catch (const bhl::FrontendError& e) {
    std::cerr << bhl::render_diagnostic(verify->parsed()   ? va.file
                                        : explain->parsed() ? ea.file
                                                            : da.file,
                                        e.diag)
              << "\n";
    return kExitFrontend;
  } catch (const bhl::VerifyError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code == "IoError" || e.code == "BadData" ? kExitIo : kExitFrontend;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFrontend;
  }
  return kExitVerified;
}
