#include "lsfem/lsfem.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>

using namespace lsfem;

namespace {

enum Exit { ok = 0, config_error = 2, assumption_error = 3, solver_error = 4 };

/// Prints the stage chain and the innermost message, returns the exit code for its type.
int report(const std::exception& e, const std::string& prefix = "") {
  const auto* staged = dynamic_cast<const StageError*>(&e);
  const std::string here = staged ? prefix + staged->stage() + ": " : prefix;
  if (staged) {
    try {
      std::rethrow_if_nested(e);
    } catch (const std::exception& inner) {
      return report(inner, here);
    }
  }
  std::cerr << "error: " << here << e.what() << '\n';
  if (dynamic_cast<const AssumptionViolation*>(&e)) return assumption_error;
  if (dynamic_cast<const SolverError*>(&e)) return solver_error;
  if (dynamic_cast<const ConfigError*>(&e)) return config_error;
  return solver_error;
}

void apply_threads(int cli, const ExperimentConfig& cfg) {
  const int n = cli > 0 ? cli : cfg.threads;
  if (n > 0) set_num_threads(n);
}

Logger stderr_logger(bool quiet) {
  if (quiet) return {};
  return [](const std::string& s) { std::cerr << s << std::endl; };
}

void write_output(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
}

void print_orders(const std::vector<ErrorReport>& rows) {
  std::size_t b = 0;
  while (b < rows.size()) {
    std::size_t e = b;
    while (e < rows.size() && rows[e].case_name == rows[b].case_name && rows[e].method == rows[b].method &&
           rows[e].m == rows[b].m) {
      ++e;
    }
    std::cout << rows[b].case_name << "  method=" << to_string(rows[b].method) << "  m=" << rows[b].m << '\n';
    std::cout << "  " << std::setw(10) << "h" << std::setw(13) << "u_l2" << std::setw(13) << "sigma_l2"
              << std::setw(13) << "energy" << std::setw(8) << "iters" << std::setw(13) << "kappa" << '\n';
    std::vector<double> h, eu, es, ee;
    for (std::size_t k = b; k < e; ++k) {
      const auto& r = rows[k];
      std::cout << "  " << std::setw(10) << std::setprecision(4) << r.h << std::scientific << std::setprecision(3)
                << std::setw(13) << r.errors.u_l2 << std::setw(13) << r.errors.sigma_l2 << std::setw(13)
                << r.errors.energy() << std::defaultfloat << std::setw(8) << r.iterations << std::setw(13)
                << std::setprecision(4) << r.kappa << '\n';
      h.push_back(r.h);
      eu.push_back(r.errors.u_l2);
      es.push_back(r.errors.sigma_l2);
      ee.push_back(r.errors.energy());
    }
    if (h.size() >= 2) {
      auto show = [](const std::optional<double>& v) {
        std::ostringstream os;
        if (v) {
          os << std::fixed << std::setprecision(2) << *v;
        } else {
          os << "sat.";
        }
        return os.str();
      };
      const auto ou = convergence_orders(h, eu), os = convergence_orders(h, es), oe = convergence_orders(h, ee);
      std::cout << "  " << std::setw(10) << "order" << std::setw(13) << show(ou.least_squares) << std::setw(13)
                << show(os.least_squares) << std::setw(13) << show(oe.least_squares) << '\n';
    }
    b = e;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unfitted least-squares finite elements for elasticity interface problems"};
  app.require_subcommand(1);

  std::string config_path, out_path, csv_path;
  int threads = 0;
  bool quiet = false;

  auto* solve = app.add_subcommand("solve", "Run a convergence study and write CSV");
  solve->add_option("--config", config_path, "JSON experiment file")->required();
  solve->add_option("--out", out_path, "CSV output path (overrides the config; - for stdout)");
  solve->add_option("--threads", threads, "Assembly threads")->check(CLI::PositiveNumber);
  solve->add_flag("-q,--quiet", quiet, "No progress messages");

  auto* orders = app.add_subcommand("orders", "Print error tables and observed orders of a CSV");
  orders->add_option("--csv", csv_path, "CSV written by solve")->required();

  auto* cond = app.add_subcommand("cond", "Condition-number sweep of the configured meshes");
  cond->add_option("--config", config_path, "JSON experiment file")->required();
  cond->add_option("--out", out_path, "CSV output path (- for stdout)");
  cond->add_option("--threads", threads, "Assembly threads")->check(CLI::PositiveNumber);
  cond->add_flag("-q,--quiet", quiet, "No progress messages");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }

  try {
    if (*orders) {
      std::ifstream in(csv_path);
      if (!in) throw ConfigError("cannot open " + csv_path);
      print_orders(parse_csv(in));
      return ok;
    }
    ExperimentConfig cfg = load_config(config_path);
    apply_threads(threads, cfg);
    if (*cond) cfg.condition = true;
    const auto rows = run_experiment(cfg, stderr_logger(quiet));
    for (const auto& r : rows) {
      for (const auto& v : r.violations) {
        std::cerr << "warning: h=" << r.h << ": assumption " << v.assumption << " violated at element " << v.element
                  << ": " << v.what << '\n';
      }
    }
    write_output(format_csv(rows), out_path.empty() ? cfg.output : out_path);
    if (*cond) print_orders(rows);
    return ok;
  } catch (const std::exception& e) {
    return report(e);
  }
}
