// jtmodel: command-line front end for the Jahn-Teller ETH toolkit.
//
//   jtmodel <phase-scan|quench|eth-report|deff-scan|entropy|converge>
//           [--config PATH] [--out PATH] [--format csv|json] [--nmax N]
//           [--sector full|even|odd|auto] [--gauge complex|real]
//           [--shell-fraction P] [--paper-scale] [--jobs N]
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure,
// 4 empty microcanonical shell or mean-field validity-domain error.

#include <CLI11.hpp>

#include <iostream>

#include "jtmodel/io/drivers.hpp"

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kNumerical = 3, kDomain = 4 };

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact diagonalization and ETH diagnostics for the Jahn-Teller spin-two-boson model"};
  app.require_subcommand(1, 1);

  std::string config_path, out_path, format, sector, gauge;
  std::optional<int> nmax, jobs;
  std::optional<double> shell_fraction;
  bool paper_scale = false;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"phase-scan", "mean-field vs exact ground-state order parameters along a lambda_a sweep"},
      {"quench", "spin dynamics after a quench, with the diagonal-ensemble prediction"},
      {"eth-report", "diagonal vs microcanonical ensemble, EEV deviation and fluctuations along eta_b"},
      {"deff-scan", "effective dimension and time fluctuations along a g_b or n_max scan"},
      {"entropy", "second-order Renyi entropy of the spin after a quench"},
      {"converge", "truncation convergence of a scalar metric"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--out", out_path, "output file (default: stdout)");
    sub->add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--nmax", nmax, "Fock truncation for both modes");
    sub->add_option("--sector", sector, "parity sector")->check(CLI::IsMember({"full", "even", "odd", "auto"}));
    sub->add_option("--gauge", gauge, "matrix gauge")->check(CLI::IsMember({"complex", "real"}));
    sub->add_option("--shell-fraction", shell_fraction, "microcanonical shell fraction p");
    sub->add_flag("--paper-scale", paper_scale, "lift the desk-scale dimension cap");
    sub->add_option("--jobs", jobs, "worker threads for scan points");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    jt::io::RunConfig cfg = config_path.empty() ? jt::io::RunConfig{} : jt::io::load_config(config_path);
    cfg.command = command;
    if (!out_path.empty()) cfg.out = out_path;
    if (!format.empty()) cfg.format = format;
    if (nmax) {
      cfg.n_max = *nmax;
      cfg.n_max_a.reset();
      cfg.n_max_b.reset();
    }
    if (!sector.empty()) cfg.sector = jt::io::parse_sector(sector);
    if (!gauge.empty()) cfg.gauge = jt::io::parse_gauge(gauge);
    if (shell_fraction) cfg.shell_fraction = *shell_fraction;
    if (paper_scale) cfg.paper_scale = true;
    if (jobs) cfg.jobs = *jobs;
    cfg.validate();

    const jt::io::RunResult result = jt::io::run_command(command, cfg);
    for (const auto& w : result.warnings) std::cerr << "jtmodel: " << w << '\n';
    jt::io::write_table(cfg.out, result.table, cfg.format);
    if (result.exit_code != 0) std::cerr << "jtmodel: some scan points have an error status\n";
    return result.exit_code;
  } catch (const jt::EmptyShellError& e) {
    std::cerr << "jtmodel: " << e.what() << '\n';
    return kDomain;
  } catch (const jt::ValidityDomainError& e) {
    std::cerr << "jtmodel: " << e.what() << '\n';
    return kDomain;
  } catch (const jt::NumericalError& e) {
    std::cerr << "jtmodel: numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const jt::ConfigError& e) {
    std::cerr << "jtmodel: configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const jt::DomainError& e) {
    std::cerr << "jtmodel: invalid input: " << e.what() << '\n';
    return kConfig;
  } catch (const std::bad_alloc&) {
    std::cerr << "jtmodel: out of memory\n";
    return kNumerical;
  }
}
