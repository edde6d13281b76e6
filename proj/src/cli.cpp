#include "quadmesh/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "quadmesh/boundary.hpp"
#include "quadmesh/error.hpp"
#include "quadmesh/functional.hpp"
#include "quadmesh/grid_io.hpp"
#include "quadmesh/optimizer.hpp"
#include "quadmesh/quality.hpp"
#include "quadmesh/weight_expr.hpp"

namespace quadmesh {

namespace {

namespace fs = std::filesystem;

// Raised for bad flag combinations found after CLI11 has parsed.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct Options {
  int nx = 17;
  int ny = 17;
  std::string domain;
  std::string in;
  std::string out;
  std::string functional = "winslow";
  double tol = OptimizerConfig{}.tol;
  int max_sweeps = OptimizerConfig{}.max_sweeps;
  std::string stencil;  // empty: full for optimize, own for adapt
  std::string weight_preset;
  std::string weight_expr;
  std::string format = "native";
  std::uint64_t seed = 0;
  std::string stats_out;
};

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

std::optional<WeightExpr> resolve_weight(const Options& o) {
  if (!o.weight_preset.empty()) {
    try {
      return weight_preset(o.weight_preset);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }
  if (!o.weight_expr.empty()) {
    try {
      return WeightExpr::parse(o.weight_expr);
    } catch (const ParseError& e) {
      throw UsageError(std::string("--weight-expr ") + e.what());
    }
  }
  return std::nullopt;
}

FunctionalKind resolve_functional(const std::string& name, std::optional<WeightExpr> weight) {
  try {
    return parse_functional(name, std::move(weight));
  } catch (const PreconditionError& e) {
    throw UsageError(std::string("--functional: ") + e.what());
  }
}

OptimizerConfig resolve_config(const Options& o, Stencil default_stencil) {
  OptimizerConfig cfg;
  cfg.tol = o.tol;
  cfg.max_sweeps = o.max_sweeps;
  cfg.stencil = o.stencil == "own" ? Stencil::Own : Stencil::Full;
  if (o.stencil.empty()) cfg.stencil = default_stencil;
  cfg.rng_seed = o.seed;
  try {
    cfg.validate();
  } catch (const PreconditionError& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

void check_domain(const Options& o) {
  const auto names = builtin_domain_names();
  if (std::find(names.begin(), names.end(), o.domain) == names.end()) {
    std::string list;
    for (auto n : names) list += (list.empty() ? "" : ", ") + std::string(n);
    throw UsageError("unknown domain '" + o.domain + "' (available: " + list + ")");
  }
  if (o.nx < 2 || o.ny < 2) throw UsageError("--nx and --ny must be at least 2");
}

// Exactly one of --in and --domain.
void check_source(const Options& o) {
  if (o.in.empty() == o.domain.empty()) throw UsageError("give exactly one of --in and --domain");
  if (!o.domain.empty()) check_domain(o);
}

StructuredGrid load_source(const Options& o) {
  if (!o.in.empty()) return read_grid_any(o.in);
  return tfi_init(builtin_domain(o.domain, o.nx, o.ny));
}

void write_output(const StructuredGrid& grid, const Options& o) {
  if (o.format == "vtk") {
    write_vtk(grid, fs::path(o.out));
  } else if (o.format == "svg") {
    write_svg(grid, fs::path(o.out));
  } else {
    write_grid(grid, fs::path(o.out));
  }
}

nlohmann::json stats_record(const char* phase, const SweepStats& s) {
  return {{"phase", phase},
          {"sweep", s.sweep_index},
          {"max_displacement", s.max_displacement},
          {"global_value_before", s.global_value_before},
          {"global_value_after", s.global_value_after},
          {"nodes_moved", s.nodes_moved},
          {"backtrack_failures", s.backtrack_failures}};
}

int run_optimize(const Options& o, const FunctionalKind& kind, Stencil default_stencil,
                 std::ostream& out, std::ostream& err) {
  const OptimizerConfig cfg = resolve_config(o, default_stencil);
  StructuredGrid grid = load_source(o);

  // Records are streamed to a temporary file and moved into place at the end.
  std::ofstream stats;
  fs::path stats_tmp;
  if (!o.stats_out.empty()) {
    stats_tmp = fs::path(o.stats_out);
    stats_tmp += ".tmp";
    stats.open(stats_tmp, std::ios::binary | std::ios::trunc);
    if (!stats) throw Error("cannot open '" + stats_tmp.string() + "' for writing");
  }

  OptimizeHooks hooks;
  hooks.on_warning = [&](std::string_view msg) { err << "quadmesh: warning: " << msg << '\n'; };
  if (stats.is_open()) {
    const auto emit = [&](const char* phase, const SweepStats& s) {
      stats << stats_record(phase, s).dump() << '\n';
      stats.flush();
    };
    hooks.on_untangle_sweep = [=](const SweepStats& s) { emit("untangle", s); };
    hooks.on_sweep = [=](const SweepStats& s) { emit("optimize", s); };
  }

  OptimizeResult result = optimize(std::move(grid), kind, cfg, hooks);
  write_output(result.grid, o);

  if (stats.is_open()) {
    stats.close();
    std::error_code ec;
    fs::rename(stats_tmp, o.stats_out, ec);
    if (ec) throw Error("cannot move statistics into place at '" + o.stats_out + "'");
  }

  out << "converged = " << (result.converged ? "true" : "false") << '\n'
      << "untangle_sweeps = " << result.untangle_sweeps << '\n'
      << "sweeps = " << result.sweeps.size() << '\n'
      << "folded_corner_count = " << result.final_quality.folded_corner_count << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Structured quadrilateral grid generation and variational smoothing", "quadmesh"};
  app.require_subcommand(1);

  const auto add_size = [&](CLI::App* c) {
    c->add_option("--nx", o.nx, "nodes along xi")->check(CLI::PositiveNumber);
    c->add_option("--ny", o.ny, "nodes along eta")->check(CLI::PositiveNumber);
  };
  const auto add_format = [&](CLI::App* c) {
    c->add_option("--format", o.format, "output format")
        ->check(CLI::IsMember({"native", "vtk", "svg"}));
  };
  const auto add_weight = [&](CLI::App* c) {
    auto* p = c->add_option("--weight-preset", o.weight_preset, "uniform, paper_abs_sine, paper_sine");
    auto* e = c->add_option("--weight-expr", o.weight_expr, "weight s(x, y) as an expression");
    p->excludes(e);
  };
  const auto add_optimizer = [&](CLI::App* c) {
    c->add_option("--in", o.in, "input grid (native or VTK)");
    c->add_option("--domain", o.domain, "built-in domain");
    add_size(c);
    c->add_option("--out", o.out, "output path")->required();
    add_format(c);
    c->add_option("--tol", o.tol, "relative displacement tolerance");
    c->add_option("--max-sweeps", o.max_sweeps, "sweep limit per phase");
    c->add_option("--stencil", o.stencil, "own or full")->check(CLI::IsMember({"own", "full"}));
    add_weight(c);
    c->add_option("--seed", o.seed, "reserved, recorded in the configuration");
    c->add_option("--stats-out", o.stats_out, "per-sweep statistics, one JSON object per line");
  };

  auto* generate = app.add_subcommand("generate", "build a built-in domain and write its TFI grid");
  generate->add_option("--domain", o.domain, "built-in domain")->required();
  add_size(generate);
  generate->add_option("--out", o.out, "output path")->required();
  add_format(generate);

  auto* optimize_cmd = app.add_subcommand("optimize", "smooth a grid with a functional");
  add_optimizer(optimize_cmd);
  optimize_cmd->add_option("--functional", o.functional, "length, area, ortho, knupp, "
                                                         "combined:kA,kL,kO, winslow, liao, modliao");

  auto* adapt = app.add_subcommand("adapt", "weighted area optimization");
  add_optimizer(adapt);

  auto* quality = app.add_subcommand("quality", "print a quality report");
  quality->add_option("input", o.in, "grid file");
  quality->add_option("--in", o.in, "grid file");
  quality->add_option("--functional", o.functional, "functional for the global value");
  add_weight(quality);

  auto* convert = app.add_subcommand("convert", "rewrite a grid in another format");
  convert->add_option("--in", o.in, "input grid (native or VTK)")->required();
  convert->add_option("--out", o.out, "output path")->required();
  add_format(convert);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      throw UsageError(e.what());
    }

    if (generate->parsed()) {
      check_domain(o);
      write_output(tfi_init(builtin_domain(o.domain, o.nx, o.ny)), o);
      return kExitOk;
    }
    if (optimize_cmd->parsed()) {
      check_source(o);
      const auto kind = resolve_functional(o.functional, resolve_weight(o));
      return run_optimize(o, kind, Stencil::Full, out, err);
    }
    if (adapt->parsed()) {
      check_source(o);
      auto weight = resolve_weight(o);
      if (!weight) throw UsageError("adapt needs --weight-preset or --weight-expr");
      // The full-stencil descent of the weighted area sum folds cells; the
      // node-local form keeps them convex.
      return run_optimize(o, FunctionalKind::area(std::move(weight)), Stencil::Own, out, err);
    }
    if (quality->parsed()) {
      if (o.in.empty()) throw UsageError("quality needs an input grid");
      const auto kind = resolve_functional(o.functional, resolve_weight(o));
      write_quality(quality_report(read_grid_any(o.in), kind), out);
      return kExitOk;
    }
    if (convert->parsed()) {
      write_output(read_grid_any(o.in), o);
      return kExitOk;
    }
    throw UsageError("no subcommand");
  } catch (const UsageError& e) {
    err << "quadmesh: error[usage]: " << one_line(e.what()) << '\n';
    return kExitUsage;
  } catch (const FormatError& e) {
    err << "quadmesh: error[input]: " << one_line(e.what()) << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "quadmesh: error[input]: " << one_line(e.what()) << '\n';
    return kExitUsage;
  } catch (const UntangleError& e) {
    err << "quadmesh: error[numeric]: " << one_line(e.what()) << '\n';
    return kExitNumeric;
  } catch (const BarrierError& e) {
    err << "quadmesh: error[numeric]: " << one_line(e.what()) << '\n';
    return kExitNumeric;
  } catch (const EvalError& e) {
    err << "quadmesh: error[numeric]: " << one_line(e.what()) << '\n';
    return kExitNumeric;
  } catch (const PreconditionError& e) {
    err << "quadmesh: error[numeric]: " << one_line(e.what()) << '\n';
    return kExitNumeric;
  } catch (const Error& e) {
    err << "quadmesh: error[io]: " << one_line(e.what()) << '\n';
    return kExitUsage;
  }
}

int run_cli(const std::vector<std::string>& args) { return run_cli(args, std::cout, std::cerr); }

}  // namespace quadmesh
