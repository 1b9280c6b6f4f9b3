// ewlab: numerical laboratory for three-dimensional Einstein-Weyl
// geometry and the Toda field equation.
//
// Exit codes: 0 all checks pass, 1 check failure, 2 configuration error,
// 3 gate failure (a precondition such as Einstein-Weyl or the Killing
// property does not hold).

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ewlab/report.hpp"

namespace {

std::map<std::string, double> parse_params(const std::string& text) {
  std::map<std::string, double> out;
  if (text.empty()) return out;
  std::istringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    const auto sep = tok.find('=');
    if (sep == std::string::npos)
      throw ewlab::ConfigError("params must look like k=v,k=v: '" + tok + "'");
    try {
      out[tok.substr(0, sep)] = std::stod(tok.substr(sep + 1));
    } catch (const std::exception&) {
      throw ewlab::ConfigError("bad parameter value in '" + tok + "'");
    }
  }
  return out;
}

void print_text(const ewlab::Report& rep) {
  for (const auto& c : rep.checks)
    std::printf("%-28s %5d probes  max %.3e  mean %.3e  tol %.1e  %s\n",
                c.name.c_str(), c.points, c.max_abs, c.mean_abs, c.tolerance,
                c.status.c_str());
  if (rep.structure_count) {
    const auto& sc = *rep.structure_count;
    std::printf("structure count: upper bound %d, confirmed %d\n",
                sc.upper_bound, sc.confirmed);
    std::printf("singular values: %.6e %.6e %.6e %.6e (gap %.3e)\n",
                sc.singular_values[0], sc.singular_values[1],
                sc.singular_values[2], sc.singular_values[3], sc.gap);
    std::printf("loop residual: %.3e\n", sc.loop_residual);
  }
  std::printf("wall time: %.1f ms\n", rep.wall_time_ms);
}

int run(ewlab::RunConfig cfg, const std::string& params_text) {
  cfg.params = parse_params(params_text);
  ewlab::Report rep = ewlab::run_command(cfg);
  if (cfg.format == "json")
    std::cout << ewlab::to_json(rep).dump(2) << "\n";
  else
    print_text(rep);
  return ewlab::report_exit_code(rep);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ewlab: a laboratory for three-dimensional Einstein-Weyl "
               "geometry and the Toda field equation"};
  app.require_subcommand(1);

  ewlab::RunConfig cfg;
  std::string params_text;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--space", cfg.space, "catalog space label");
    cmd->add_option("--params", params_text, "space parameters k=v,k=v");
    cmd->add_option("--probes", cfg.probes, "number of probe points")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", cfg.seed, "probe sampling seed");
    cmd->add_option("--tol", cfg.tol, "tolerance override");
    cmd->add_option("--format", cfg.format, "output format: text|json")
        ->check(CLI::IsMember({"text", "json"}));
  };

  auto* cat = app.add_subcommand("catalog", "catalog operations");
  auto* cat_list = cat->add_subcommand("list", "list the catalog spaces");
  cat_list->callback([]() {
    for (const auto& l : ewlab::catalog_labels()) std::printf("%s\n", l.c_str());
  });
  cat->require_subcommand(1);

  auto* verify = app.add_subcommand("verify", "run a verification check");
  verify->add_option("check", cfg.check,
                     "check: ew | toda | harmonic | crosscheck | killing")
      ->required()
      ->check(CLI::IsMember({"ew", "toda", "harmonic", "crosscheck",
                             "killing"}));
  verify->add_option("--u", cfg.u_expr, "Toda potential u(x,y,z)");
  verify->add_option("--V", cfg.V_expr, "harmonic profile V(rho,eta)");
  add_common(verify);
  verify->callback([&]() {
    cfg.command = "verify";
    std::exit(run(cfg, params_text));
  });

  auto* structures =
      app.add_subcommand("structures", "count the Toda structures");
  add_common(structures);
  structures->callback([&]() {
    cfg.command = "structures";
    if (cfg.probes == 100) cfg.probes = 2;
    std::exit(run(cfg, params_text));
  });

  auto* obstruct =
      app.add_subcommand("obstruct", "obstruction report for a congruence");
  obstruct
      ->add_option("--congruence", cfg.congruence,
                   "chart components c1,c2,c3 of the unit congruence")
      ->required();
  add_common(obstruct);
  obstruct->callback([&]() {
    cfg.command = "obstruct";
    if (cfg.probes == 100) cfg.probes = 10;
    std::exit(run(cfg, params_text));
  });

  auto* exp = app.add_subcommand("export", "export a grid as CSV");
  exp->add_option("--grid", cfg.grid, "grid size NxMxK")->required();
  exp->add_option("--out", cfg.out, "output CSV path")->required();
  exp->add_option("--box", cfg.box,
                  "coordinate box lo:hi,lo:hi,lo:hi (default: the "
                  "margin-shrunk chart box)");
  add_common(exp);
  exp->callback([&]() {
    cfg.command = "export";
    std::exit(run(cfg, params_text));
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const ewlab::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const ewlab::ParseError& e) {
    std::fprintf(stderr, "config error: parse error at offset %zu: %s\n",
                 e.offset, e.message.c_str());
    return 2;
  } catch (const ewlab::GateError& e) {
    std::fprintf(stderr, "gate failure: %s\n", e.what());
    return 3;
  } catch (const ewlab::DomainError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }
  return 0;
}
