#include "saddle3/cli.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "saddle3/errors.hpp"
#include "saddle3/io/matrix_market.hpp"
#include "saddle3/io/reports.hpp"
#include "saddle3/krylov.hpp"
#include "saddle3/preconditioners.hpp"
#include "saddle3/problems.hpp"
#include "saddle3/spectral.hpp"

namespace saddle3 {

namespace {

using nlohmann::json;

struct Settings {
  std::string problem = "stokes-modified";
  std::string input;  // directory written by `generate`
  int p = 8;
  std::vector<int> sizes;
  double beta = 1e-2;
  std::size_t n = 12, m = 5, l = 4;
  std::uint64_t seed = 1;
  std::string recipe = "ex61";
  std::vector<std::string> kinds = {"all"};
  double droptol = 1e-8;
  std::size_t dense_threshold = 2048;
  double tol = 1e-6;
  std::size_t maxit = 1000;
  std::size_t restart = 0;  // 0: full GMRES
  std::string side = "right";
  std::size_t jobs = 1;
  std::size_t max_dense_order = 2500;
  std::string out;
  bool json_out = false;
};

std::string fmt_g(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::vector<PreconKind> resolve_kinds(const std::vector<std::string>& tags) {
  std::vector<PreconKind> out;
  for (const std::string& item : tags) {
    std::stringstream ss(item);
    std::string tag;
    while (std::getline(ss, tag, ',')) {
      if (tag.empty()) continue;
      if (tag == "all") {
        out.assign(kAllKinds.begin(), kAllKinds.end());
        continue;
      }
      PreconKind k = parse_kind(tag);
      if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
    }
  }
  if (out.empty()) throw InvalidArgument("no preconditioner kinds selected");
  return out;
}

ProblemSpec problem_spec(const Settings& s, int size) {
  ProblemSpec spec;
  spec.family = parse_problem_family(s.problem);
  spec.size = size;
  spec.beta = s.beta;
  spec.n = s.n;
  spec.m = s.m;
  spec.l = s.l;
  spec.seed = s.seed;
  return spec;
}

BlockSystem load_or_generate(const Settings& s, int size) {
  if (!s.input.empty()) return io::load_system(s.input);
  return generate(problem_spec(s, size));
}

Recipe make_recipe(const Settings& s) {
  Recipe r;
  r.kind = parse_recipe(s.recipe);
  if (r.kind == RecipeKind::Custom) throw InvalidArgument("the custom recipe is library-only");
  r.ichol_droptol = s.droptol;
  r.dense_threshold = s.dense_threshold;
  return r;
}

// Incomplete Cholesky can break down on a nonpositive pivot; retry with a
// smaller drop tolerance a few times before giving up.
std::shared_ptr<const ApproxBlocks> blocks_with_retry(const BlockSystem& sys, Recipe recipe,
                                                      std::ostream& err) {
  for (int attempt = 0;; ++attempt) {
    try {
      return std::make_shared<const ApproxBlocks>(build_blocks(sys, recipe));
    } catch (const BreakdownNonpositivePivot& e) {
      if (attempt >= 4) throw;
      err << "note: incomplete Cholesky broke down (" << e.what() << "); retrying with droptol "
          << fmt_g(recipe.ichol_droptol / 10) << "\n";
      recipe.ichol_droptol /= 10;
    }
  }
}

SolveConfig solve_config(const Settings& s) {
  SolveConfig c;
  c.tol = s.tol;
  c.maxit = s.maxit;
  if (s.restart > 0) c.restart = s.restart;
  c.side = parse_side(s.side);
  c.record_history = false;
  return c;
}

SolveResult run_solve(const BlockSystem& sys, const SparseMatrix& k,
                      std::shared_ptr<const ApproxBlocks> blocks, PreconKind kind,
                      const SolveConfig& cfg) {
  BlockPreconditioner p(kind, std::move(blocks), sys);
  LinearOperator kop = LinearOperator::from_matrix(k);
  LinearOperator mop = LinearOperator::from_preconditioner(p);
  Vector rhs = sys.rhs();
  return gmres(kop, &mop, rhs, cfg);
}

json settings_json(const Settings& s, const std::string& command) {
  json j;
  j["command"] = command;
  if (s.input.empty()) {
    j["problem"] = s.problem;
    if (s.problem == "random") {
      j["n"] = s.n;
      j["m"] = s.m;
      j["l"] = s.l;
      j["seed"] = s.seed;
    }
    if (s.problem == "poisson-control") j["beta"] = s.beta;
  } else {
    j["input"] = s.input;
  }
  j["recipe"] = s.recipe;
  j["droptol"] = s.droptol;
  j["dense_threshold"] = s.dense_threshold;
  j["tol"] = s.tol;
  j["maxit"] = s.maxit;
  j["restart"] = s.restart;
  j["side"] = s.side;
  std::vector<std::string> tags;
  for (PreconKind k : resolve_kinds(s.kinds)) tags.push_back(to_string(k));
  j["kinds"] = tags;
  return j;
}

// ---- subcommands ----------------------------------------------------------

int cmd_generate(const Settings& s, std::ostream& out) {
  if (s.out.empty()) throw InvalidArgument("generate needs --out DIR");
  BlockSystem sys = generate(problem_spec(s, s.p));
  json meta = settings_json(s, "generate");
  meta.erase("command");
  meta.erase("kinds");
  meta["p"] = s.p;
  io::save_system(sys, s.out, meta);
  out << "wrote " << s.out << ": n=" << sys.n() << " m=" << sys.m() << " l=" << sys.l()
      << " order=" << sys.order() << "\n";
  return kExitOk;
}

int cmd_solve(const Settings& s, std::ostream& out, std::ostream& err) {
  BlockSystem sys = load_or_generate(s, s.p);
  auto kinds = resolve_kinds(s.kinds);
  auto blocks = blocks_with_retry(sys, make_recipe(s), err);
  SparseMatrix k = sys.assemble();
  SolveConfig cfg = solve_config(s);
  bool all_converged = true;
  json rows = json::array();
  if (!s.json_out)
    out << "problem=" << (s.input.empty() ? s.problem : s.input) << " order=" << sys.order()
        << " recipe=" << s.recipe << " tol=" << fmt_g(s.tol) << "\n";
  for (PreconKind kind : kinds) {
    SolveResult r = run_solve(sys, k, blocks, kind, cfg);
    all_converged = all_converged && r.report.converged;
    if (s.json_out) {
      rows.push_back({{"kind", to_string(kind)},
                      {"iterations", r.report.iterations},
                      {"converged", r.report.converged},
                      {"final_residual", r.report.final_true_residual},
                      {"stopping_residual", r.report.final_residual}});
    } else {
      out << to_string(kind) << "  IT=" << r.report.iterations
          << "  RES=" << fmt_g(r.report.final_true_residual, 3)
          << "  time_ms=" << fmt_g(r.report.wall_time * 1e3, 4)
          << (r.report.converged ? "" : "  NOT CONVERGED") << "\n";
    }
  }
  if (s.json_out) out << rows.dump(2) << "\n";
  return all_converged ? kExitOk : kExitNotConverged;
}

int cmd_bench(const Settings& s, std::ostream& out, std::ostream& err) {
  std::vector<int> sizes = s.sizes.empty() ? std::vector<int>{s.p} : s.sizes;
  if (!s.input.empty()) sizes = {0};
  auto kinds = resolve_kinds(s.kinds);
  Recipe recipe = make_recipe(s);
  SolveConfig cfg = solve_config(s);

  struct Prepared {
    std::optional<BlockSystem> sys;
    SparseMatrix k;
    std::shared_ptr<const ApproxBlocks> blocks;
    std::string error;
  };
  std::vector<Prepared> prepared(sizes.size());
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    try {
      prepared[i].sys = load_or_generate(s, sizes[i]);
      prepared[i].k = prepared[i].sys->assemble();
      prepared[i].blocks = blocks_with_retry(*prepared[i].sys, recipe, err);
    } catch (const Error& e) {
      prepared[i].error = e.what();
    }
  }

  io::BenchReport report;
  report.config = settings_json(s, "bench");
  report.config["sizes"] = sizes;
  const std::size_t cells = sizes.size() * kinds.size();
  report.rows.resize(cells);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t c = next++; c < cells; c = next++) {
      const std::size_t si = c / kinds.size(), ki = c % kinds.size();
      const Prepared& prep = prepared[si];
      io::BenchRow& row = report.rows[c];
      row.problem = s.input.empty() ? s.problem : s.input;
      row.size = static_cast<std::size_t>(std::max(sizes[si], 0));
      row.recipe = s.recipe;
      row.kind = to_string(kinds[ki]);
      if (!prep.error.empty()) {
        row.error = prep.error;
        continue;
      }
      row.order = prep.sys->order();
      try {
        SolveResult r = run_solve(*prep.sys, prep.k, prep.blocks, kinds[ki], cfg);
        row.iterations = r.report.iterations;
        row.converged = r.report.converged;
        row.final_residual = r.report.final_true_residual;
        row.wall_time_ms = r.report.wall_time * 1e3;
      } catch (const Error& e) {
        row.error = e.what();
      }
    }
  };
  const std::size_t jobs = std::max<std::size_t>(1, std::min(s.jobs, cells));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::filesystem::path dir = s.out.empty() ? std::filesystem::path(".") : std::filesystem::path(s.out);
  io::write_report(report, dir / "bench_report.json", dir / "bench_report.csv");
  io::write_report_csv(report, out);
  bool ok = true;
  for (const auto& r : report.rows) ok = ok && r.converged && r.error.empty();
  return ok ? kExitOk : kExitNotConverged;
}

void print_box(std::ostream& out, PreconKind kind, const EigenBox& box) {
  out << to_string(kind) << "  eta_lo=" << fmt_g(box.re_lo, 10) << "  eta_hi=" << fmt_g(box.re_hi, 10)
      << "  rho=" << fmt_g(box.im_abs, 10) << "\n";
}

int cmd_bounds(const Settings& s, std::ostream& out, std::ostream& err) {
  BlockSystem sys = load_or_generate(s, s.p);
  auto kinds = resolve_kinds(s.kinds);
  Recipe recipe = make_recipe(s);
  auto blocks = blocks_with_retry(sys, recipe, err);
  EstimateOptions eo;
  eo.dense_threshold = s.dense_threshold;
  SpectralEstimates est = estimate_constants(sys, *blocks, eo);
  const bool exact = recipe.kind == RecipeKind::Exact;
  json rows = json::array();
  if (!s.json_out) {
    out << "constants (" << to_string(est.method) << "): mu=[" << fmt_g(est.mu_lo) << ", "
        << fmt_g(est.mu_hi) << "] nu=[" << fmt_g(est.nu_lo) << ", " << fmt_g(est.nu_hi)
        << "] omega=[" << fmt_g(est.omega_lo) << ", " << fmt_g(est.omega_hi) << "] tau=["
        << fmt_g(est.tau_lo) << ", " << fmt_g(est.tau_hi) << "] theta=[" << fmt_g(est.theta_lo)
        << ", " << fmt_g(est.theta_hi) << "]\n";
    if (exact) out << "exact blocks: closed-form bounds\n";
  }
  for (PreconKind kind : kinds) {
    EigenBox box = exact ? bounds_exact_blocks(kind, est.omega_hi, est.tau_lo)
                         : bounds_by_kind(kind, est);
    if (s.json_out)
      rows.push_back({{"kind", to_string(kind)},
                      {"eta_lo", box.re_lo},
                      {"eta_hi", box.re_hi},
                      {"rho", box.im_abs}});
    else
      print_box(out, kind, box);
  }
  if (s.json_out) out << rows.dump(2) << "\n";
  return kExitOk;
}

int cmd_spectrum(const Settings& s, std::ostream& out, std::ostream& err) {
  BlockSystem sys = load_or_generate(s, s.p);
  if (sys.order() > s.max_dense_order)
    throw NotSupported("spectrum is dense; order " + std::to_string(sys.order()) + " exceeds --max-order " +
                       std::to_string(s.max_dense_order));
  auto kinds = resolve_kinds(s.kinds);
  auto blocks = blocks_with_retry(sys, make_recipe(s), err);
  SpectralEstimates est = estimate_constants(sys, *blocks);
  for (PreconKind kind : kinds) {
    SpectrumCheck check = spectrum_and_check(sys, blocks, kind, est);
    out << to_string(kind) << "  eigenvalues=" << check.points.size() << "  inside=" << check.contained
        << "  by_cluster=" << check.cluster_resolved << "  worst_excess=" << fmt_g(check.worst_excess, 3) << "  box=[" << fmt_g(check.box.re_lo)
        << ", " << fmt_g(check.box.re_hi) << "] x +-" << fmt_g(check.box.im_abs) << "\n";
    if (!s.out.empty())
      io::write_plotdata(check, std::filesystem::path(s.out) / (std::string(to_string(kind)) + ".csv"));
  }
  return kExitOk;
}

int cmd_validate(const Settings& s, std::ostream& out) {
  BlockSystem sys = load_or_generate(s, s.p);
  ValidationReport rep = validate(sys, s.dense_threshold);
  for (const auto& c : rep.checks)
    out << (c.passed ? "ok    " : "FAIL  ") << c.name << (c.detail.empty() ? "" : "  (" + c.detail + ")")
        << "\n";
  for (const auto& w : rep.warnings) out << "warning: " << w << "\n";
  out << (rep.ok ? "valid" : "invalid") << "\n";
  return rep.ok ? kExitOk : kExitUsage;
}

// ---- option plumbing ------------------------------------------------------

struct Binding {
  CLI::Option* opt;
  std::function<void(const json&)> from_json;
};

template <class T>
Binding bind_option(CLI::App& app, const std::string& flag, T& target, const std::string& help) {
  CLI::Option* o = app.add_option(flag, target, help);
  return {o, [&target](const json& v) { target = v.get<T>(); }};
}

void apply_config(const std::string& path, const std::map<std::string, Binding>& bindings) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config ") + path + ": " + e.what(), 0);
  }
  if (!cfg.is_object()) throw InvalidArgument("config " + path + " must be a JSON object");
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    auto b = bindings.find(it.key());
    if (b == bindings.end()) throw InvalidArgument("unknown config key '" + it.key() + "'");
    if (b->second.opt->count() > 0) continue;  // flags win
    try {
      if (it.key() == "kinds" && it.value().is_string())
        b->second.from_json(json::array({it.value()}));
      else
        b->second.from_json(it.value());
    } catch (const json::exception& e) {
      throw InvalidArgument("config key '" + it.key() + "': " + e.what());
    }
  }
}

const char* kBenchFooter =
    "Writes bench_report.json (schema v1) and bench_report.csv to --out (default .).\n"
    "CSV columns: problem,size,order,recipe,kind,iterations,converged,final_residual,\n"
    "wall_time_ms,error. Timing fields are the only nondeterministic values.";
const char* kSpectrumFooter =
    "With --out DIR, writes DIR/<kind>.csv with columns re,im,in_box (one row per\n"
    "eigenvalue) and DIR/<kind>_box.csv with columns corner,re,im.";

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Block preconditioners for three-by-three saddle-point systems", "saddle3"};
  app.require_subcommand(1);
  Settings s;
  std::string config_path;

  struct Sub {
    CLI::App* app;
    std::map<std::string, Binding> bindings;
  };
  std::map<std::string, Sub> subs;
  auto add_sub = [&](const std::string& name, const std::string& help) -> Sub& {
    Sub& sub = subs[name];
    sub.app = app.add_subcommand(name, help);
    CLI::App& a = *sub.app;
    auto& b = sub.bindings;
    a.add_option("--config", config_path, "JSON file with option values; flags win");
    b.emplace("problem", bind_option(a, "--problem", s.problem,
                              "stokes-modified | image-restoration | poisson-control | "
                              "fd-stokes-substitute | random"));
    b.emplace("p", bind_option(a, "--p", s.p, "generator size (p, grid power or cell count)"));
    b.emplace("beta", bind_option(a, "--beta", s.beta, "poisson-control regularization"));
    b.emplace("n", bind_option(a, "--n", s.n, "random family: size of A"));
    b.emplace("m", bind_option(a, "--m", s.m, "random family: rows of B"));
    b.emplace("l", bind_option(a, "--l", s.l, "random family: rows of C"));
    b.emplace("seed", bind_option(a, "--seed", s.seed, "random family seed"));
    return sub;
  };
  auto add_solver_opts = [&](Sub& sub) {
    CLI::App& a = *sub.app;
    auto& b = sub.bindings;
    b.emplace("input", bind_option(a, "--input", s.input, "load a system directory written by generate"));
    b.emplace("recipe", bind_option(a, "--recipe", s.recipe, "ex61 | ex62 | ex63 | ex64 | ex65 | exact"));
    b.emplace("kinds", bind_option(a, "--kinds", s.kinds, "comma list of d,ut,lt,f1..f5 or all"));
    b.emplace("droptol", bind_option(a, "--droptol", s.droptol, "incomplete Cholesky drop tolerance"));
    b.emplace("dense_threshold",
              bind_option(a, "--dense-threshold", s.dense_threshold, "largest order handled densely"));
  };
  auto add_gmres_opts = [&](Sub& sub) {
    CLI::App& a = *sub.app;
    auto& b = sub.bindings;
    b.emplace("tol", bind_option(a, "--tol", s.tol, "relative residual tolerance"));
    b.emplace("maxit", bind_option(a, "--maxit", s.maxit, "iteration cap"));
    b.emplace("restart", bind_option(a, "--restart", s.restart, "GMRES restart length (0: none)"));
    b.emplace("side", bind_option(a, "--side", s.side,
                                  "right (stop on true residual) | left (stop on preconditioned residual)"));
  };

  Sub& gen = add_sub("generate", "write a problem as A/B/C/D .mtx plus system.json");
  gen.bindings.emplace("out", bind_option(*gen.app, "--out", s.out, "output directory"));

  Sub& solve = add_sub("solve", "run GMRES for each kind and print IT/RES");
  add_solver_opts(solve);
  add_gmres_opts(solve);
  solve.app->add_flag("--json", s.json_out, "print JSON instead of a table");

  Sub& bench = add_sub("bench", "sweep sizes and kinds, write a benchmark report");
  add_solver_opts(bench);
  add_gmres_opts(bench);
  bench.bindings.emplace("sizes", bind_option(*bench.app, "--sizes", s.sizes, "generator sizes to sweep"));
  bench.bindings.emplace("jobs", bind_option(*bench.app, "--jobs", s.jobs, "worker threads"));
  bench.bindings.emplace("out", bind_option(*bench.app, "--out", s.out, "report directory"));
  bench.app->footer(kBenchFooter);

  Sub& bounds = add_sub("bounds", "print the eigenvalue box per kind");
  add_solver_opts(bounds);
  bounds.app->add_flag("--json", s.json_out, "print JSON instead of a table");

  Sub& spectrum = add_sub("spectrum", "dense spectrum of the preconditioned matrix versus the box");
  add_solver_opts(spectrum);
  spectrum.bindings.emplace("out", bind_option(*spectrum.app, "--out", s.out, "plot data directory"));
  spectrum.bindings.emplace("max_order",
                            bind_option(*spectrum.app, "--max-order", s.max_dense_order, "largest order accepted"));
  spectrum.app->footer(kSpectrumFooter);

  Sub& val = add_sub("validate", "check the structural hypotheses of a system");
  val.bindings.emplace("input", bind_option(*val.app, "--input", s.input, "load a system directory"));
  val.bindings.emplace("dense_threshold",
                       bind_option(*val.app, "--dense-threshold", s.dense_threshold, "largest order handled densely"));

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    auto parsed = app.get_subcommands();
    out << (parsed.empty() ? app.help() : parsed.front()->help());
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    CLI::App* chosen = app.get_subcommands().front();
    Sub& sub = subs.at(chosen->get_name());
    if (!config_path.empty()) apply_config(config_path, sub.bindings);
    const std::string name = chosen->get_name();
    if (name == "generate") return cmd_generate(s, out);
    if (name == "solve") return cmd_solve(s, out, err);
    if (name == "bench") return cmd_bench(s, out, err);
    if (name == "bounds") return cmd_bounds(s, out, err);
    if (name == "spectrum") return cmd_spectrum(s, out, err);
    return cmd_validate(s, out);
  } catch (const NonConvergence& e) {
    err << "error: " << e.what() << "\n";
    return kExitNotConverged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace saddle3
