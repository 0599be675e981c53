// Command-line front end: solve a pencil eigenproblem from Matrix Market
// inputs, generate synthetic pencils with planted spectra, or check a
// solve report against residuals and a known spectrum.
//
// Exit codes: 0 success, 1 failed check rows, 2 usage or input errors,
// 3 no trajectory converged.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "penceig/penceig.hpp"

namespace {

using penceig::cx;

std::string short_complex(cx v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g%+.6gi", v.real(), v.imag());
  return buf;
}

std::vector<cx> parse_plant_list(const std::string& text) {
  std::vector<cx> out;
  size_t start = 0;
  while (start <= text.size()) {
    size_t comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    const std::string part = text.substr(start, comma - start);
    if (!part.empty() &&
        part.find_first_not_of(" \t") != std::string::npos)
      out.push_back(penceig::parse_complex(part));
    start = comma + 1;
  }
  return out;
}

struct SolveArgs {
  std::string input_j;
  std::string input_l;
  std::string algorithm;
  std::string sigma_text;
  std::string shift_a_text;
  int p = 0;
  int r = 4;
  int s = 6;
  int t = 4;
  double eps = 1.0;
  double tol = 0.0;
  int max_iter = 200;
  double dedupe_tol = 1e-6;
  int block = 8;
  int ritz_period = 4;
  int max_cycles = 100;
  int threads = 1;
  std::string report_json = "report.json";
  std::string report_csv = "report.csv";
};

int cmd_solve(const SolveArgs& args) {
  const auto j = penceig::read_matrix_market(args.input_j);
  const auto l = penceig::read_l_diag(args.input_l, j.order());
  const penceig::Pencil pencil(j, l);

  penceig::SolveOutcome outcome;
  nlohmann::json params;
  params["input_j"] = args.input_j;
  params["input_l"] = args.input_l;
  params["order"] = pencil.order();

  if (args.algorithm == "one" || args.algorithm == "two") {
    if (args.sigma_text.empty())
      throw penceig::StructuralError("--sigma is required for algorithms one and two");
    const cx sigma = penceig::parse_complex(args.sigma_text);
    penceig::IterationConfig cfg;
    cfg.r = args.r;
    cfg.s = args.s;
    cfg.p = args.p;
    cfg.t = args.t;
    cfg.eps = args.eps;
    cfg.tol = (args.tol > 0.0) ? args.tol : 1e-4;
    cfg.max_iter = args.max_iter;
    cfg.dedupe_tol = args.dedupe_tol;
    cfg.validate();

    penceig::CayleyOperator op(pencil, sigma);
    penceig::SolveOptions opts;
    opts.threads = args.threads;
    outcome = (args.algorithm == "one") ? penceig::algorithm_one(op, cfg, opts)
                                        : penceig::algorithm_two(op, cfg, opts);

    params["sigma"] = penceig::complex_to_json(sigma);
    params["r"] = cfg.r;
    params["s"] = cfg.s;
    params["p"] = cfg.p;
    params["t"] = cfg.t;
    params["eps"] = cfg.eps;
    params["tol"] = cfg.tol;
    params["max_iter"] = cfg.max_iter;
    params["dedupe_tol"] = cfg.dedupe_tol;
  } else if (args.algorithm == "subspace") {
    if (args.shift_a_text.empty())
      throw penceig::StructuralError("--shift-a is required for the subspace algorithm");
    penceig::SubspaceConfig cfg;
    cfg.a = penceig::parse_complex(args.shift_a_text);
    cfg.block = args.block;
    cfg.ritz_period = args.ritz_period;
    cfg.tol = (args.tol > 0.0) ? args.tol : 1e-5;
    cfg.max_cycles = args.max_cycles;
    cfg.validate();

    outcome = penceig::subspace_iteration(pencil, cfg);

    params["a"] = penceig::complex_to_json(cfg.a);
    params["block"] = cfg.block;
    params["ritz_period"] = cfg.ritz_period;
    params["tol"] = cfg.tol;
    params["max_cycles"] = cfg.max_cycles;
  } else {
    throw penceig::StructuralError("unknown algorithm \"" + args.algorithm +
                                   "\" (expected one, two, or subspace)");
  }

  const auto report =
      penceig::report_to_json(args.algorithm, params, outcome);
  penceig::write_json_file(report, args.report_json);
  penceig::write_report_csv(outcome.records, args.report_csv);

  std::cout << "converged records: " << outcome.records.size() << "\n";
  for (const auto& rec : outcome.records)
    std::cout << "  lambda=" << short_complex(rec.lambda)
              << " iter=" << rec.iterations << " lu=" << rec.lu_count
              << " residual_order=" << rec.residual_order << "\n";
  std::cout << "report: " << args.report_json << ", " << args.report_csv
            << "\n";
  return outcome.records.empty() ? 3 : 0;
}

struct GenerateArgs {
  int states = 60;
  int algebraic = 40;
  std::string plant_text;
  double density = 0.0;
  uint64_t seed = 1;
  double left_fill_lo = -8.0;
  double left_fill_hi = -0.5;
  bool exact = false;
  std::string output_j = "J.mtx";
  std::string output_l = "L.txt";
  std::string output_spectrum = "spectrum.json";
};

int cmd_generate(const GenerateArgs& args) {
  penceig::PlantSpec spec;
  spec.planted = parse_plant_list(args.plant_text);
  spec.n_states = args.states;
  spec.m_algebraic = args.algebraic;
  const int order = args.states + args.algebraic;
  spec.density = (args.density > 0.0)
                     ? args.density
                     : std::min(1.0, std::max(0.05, 2.0 / std::max(1, order)));
  spec.seed = args.seed;
  spec.left_fill_lo = args.left_fill_lo;
  spec.left_fill_hi = args.left_fill_hi;
  spec.exact = args.exact;

  const auto planted = penceig::planted_pencil(spec);
  penceig::write_matrix_market(planted.pencil.j(), args.output_j);
  penceig::write_l_diag(planted.pencil.l_diag(), args.output_l);
  penceig::write_json_file(penceig::spectrum_to_json(planted.spectrum),
                           args.output_spectrum);

  std::cout << "order " << planted.pencil.order() << " ("
            << planted.pencil.n_states() << " states, "
            << planted.pencil.n_algebraic() << " algebraic), nnz "
            << planted.pencil.j().nnz() << "\n";
  std::cout << "spectrum size " << planted.spectrum.size() << " -> "
            << args.output_spectrum << "\n";
  std::cout << "files: " << args.output_j << ", " << args.output_l << "\n";
  return 0;
}

struct CheckArgs {
  std::string input_j;
  std::string input_l;
  std::string report;
  std::string spectrum;
};

int cmd_check(const CheckArgs& args) {
  const auto j = penceig::read_matrix_market(args.input_j);
  const auto l = penceig::read_l_diag(args.input_l, j.order());
  const penceig::Pencil pencil(j, l);
  const auto report = penceig::read_json_file(args.report);
  const std::string algorithm = report.at("algorithm").get<std::string>();

  std::optional<std::vector<cx>> spectrum;
  if (!args.spectrum.empty())
    spectrum = penceig::spectrum_from_json(
        penceig::read_json_file(args.spectrum));

  std::vector<penceig::ConvergenceRecord> records;
  for (const auto& rj : report.at("records"))
    records.push_back(penceig::record_from_json(rj));

  const auto rebuild_vector = [&](auto&& advance) {
    auto vecs = penceig::default_initial_vectors(pencil, 1);
    std::vector<cx> x = std::move(vecs[0]);
    for (int step = 0; step < 3; ++step) {
      x = advance(x);
      double m = 0.0;
      for (const cx& e : x) m = std::max(m, std::abs(e));
      if (m == 0.0) break;
      for (cx& e : x) e /= m;
    }
    return x;
  };

  int failures = 0;
  const int res_bound = (algorithm == "subspace") ? -4 : -6;
  const double match_tol = (algorithm == "subspace") ? 1e-4 : 1e-6;
  for (size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    int recomputed = 0;
    if (algorithm == "subspace") {
      // Inverse iteration on the pencil near lambda rebuilds the
      // eigenvector; the residual is taken against the reported Ritz
      // operator S = L (J - aL)^{-1} L and its Ritz value.
      cx b = rec.lambda + cx(1e-7, 1e-7);
      std::optional<penceig::SparseLU> lub;
      for (int attempt = 0; attempt < 2 && !lub; ++attempt) {
        try {
          lub.emplace(pencil.assemble_shifted(b));
        } catch (const penceig::SingularShift&) {
          b += cx(1e-5, 1e-5);
        }
      }
      if (!lub) {
        std::cout << "row " << i << ": FAIL (cannot factorize near lambda)\n";
        ++failures;
        continue;
      }
      const std::vector<cx> x = rebuild_vector([&](const std::vector<cx>& v) {
        return pencil.apply_l(lub->solve(pencil.apply_l(v)));
      });
      const penceig::SparseLU lua(pencil.assemble_shifted(rec.sigma));
      double nrm = 0.0;
      for (const cx& e : x) nrm += std::norm(e);
      nrm = std::sqrt(nrm);
      std::vector<cx> xu(x);
      for (cx& e : xu) e /= nrm;
      std::vector<cx> sx = pencil.apply_l(lua.solve(pencil.apply_l(xu)));
      double res = 0.0;
      for (size_t row = 0; row < sx.size(); ++row)
        res += std::norm(sx[row] - rec.mu * xu[row]);
      res = std::sqrt(res);
      recomputed = (res == 0.0)
                       ? -324
                       : static_cast<int>(std::floor(std::log10(res)));
    } else {
      penceig::CayleyOperator op(pencil, rec.sigma);
      cx mu = rec.mu;
      std::vector<cx> x;
      try {
        x = rebuild_vector([&](const std::vector<cx>& v) {
          return pencil.project_state_space(op.shift_invert_c_inv(mu, v));
        });
      } catch (const penceig::SingularShift&) {
        mu += cx(1e-10, 1e-10);
        x = rebuild_vector([&](const std::vector<cx>& v) {
          return pencil.project_state_space(op.shift_invert_c_inv(mu, v));
        });
      }
      recomputed = penceig::residual_order(op, rec.mu, x);
    }

    bool pass = recomputed <= res_bound;
    std::string spec_note;
    if (spectrum) {
      double best = -1.0;
      cx nearest{};
      for (cx tv : *spectrum) {
        const double d = std::abs(rec.lambda - tv);
        if (best < 0.0 || d < best) {
          best = d;
          nearest = tv;
        }
      }
      const bool spec_ok = best <= match_tol * (1.0 + std::abs(nearest));
      if (!spec_ok) pass = false;
      spec_note = spec_ok ? " spectrum=match" : " spectrum=MISMATCH";
    }

    std::cout << "row " << i << ": " << (pass ? "PASS" : "FAIL")
              << " lambda=" << short_complex(rec.lambda)
              << " residual_order=" << recomputed << spec_note << "\n";
    if (!pass) ++failures;
  }

  std::cout << (failures == 0 ? "all rows PASS" : "failed rows present")
            << " (" << records.size() - failures << "/" << records.size()
            << ")\n";
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse pencil eigenvalue toolkit"};
  app.require_subcommand(1);

  SolveArgs solve_args;
  CLI::App* solve = app.add_subcommand("solve", "Run a solver on a pencil");
  solve->add_option("--input-j", solve_args.input_j, "Matrix Market file for J")
      ->required();
  solve->add_option("--input-l", solve_args.input_l, "Diagonal file for L")
      ->required();
  solve->add_option("--algorithm", solve_args.algorithm,
                    "one | two | subspace")
      ->required();
  solve->add_option("--sigma", solve_args.sigma_text,
                    "Transform parameter sigma (complex, e.g. 4.8334)");
  solve->add_option("--shift-a", solve_args.shift_a_text,
                    "Subspace shift a (complex, e.g. 4i)");
  solve->add_option("--p", solve_args.p, "Preconditioning power");
  solve->add_option("--r", solve_args.r, "Iteration vectors per trajectory");
  solve->add_option("--s", solve_args.s, "Number of initial shifts");
  solve->add_option("--t", solve_args.t, "Iterations between shift updates");
  solve->add_option("--eps", solve_args.eps, "Initial shift radius in (0,1]");
  solve->add_option("--tol", solve_args.tol,
                    "Convergence tolerance (default 1e-4; subspace 1e-5)");
  solve->add_option("--max-iter", solve_args.max_iter,
                    "Iteration cap per trajectory");
  solve->add_option("--dedupe-tol", solve_args.dedupe_tol,
                    "Eigenvalue coalescing tolerance");
  solve->add_option("--block", solve_args.block, "Subspace block size");
  solve->add_option("--ritz-period", solve_args.ritz_period,
                    "Applications per Rayleigh-Ritz step");
  solve->add_option("--max-cycles", solve_args.max_cycles,
                    "Subspace cycle cap");
  solve->add_option("--threads", solve_args.threads,
                    "Parallel trajectories (algorithm one)");
  solve->add_option("--report-json", solve_args.report_json,
                    "Output JSON report path");
  solve->add_option("--report-csv", solve_args.report_csv,
                    "Output CSV table path");

  GenerateArgs gen_args;
  CLI::App* generate =
      app.add_subcommand("generate", "Generate a synthetic pencil");
  generate->add_option("--states", gen_args.states, "State dimension n")
      ->required();
  generate->add_option("--algebraic", gen_args.algebraic,
                       "Algebraic dimension m")
      ->required();
  generate->add_option("--plant", gen_args.plant_text,
                       "Comma-separated planted eigenvalues (a+bi)");
  generate->add_option("--density", gen_args.density,
                       "Target nonzero fraction of J");
  generate->add_option("--seed", gen_args.seed, "Generator seed");
  generate->add_option("--left-fill-lo", gen_args.left_fill_lo,
                       "Filler real-part lower bound");
  generate->add_option("--left-fill-hi", gen_args.left_fill_hi,
                       "Filler real-part upper bound");
  generate->add_flag("--exact", gen_args.exact,
                     "Quantize to a dyadic grid for a bit-exact plant");
  generate->add_option("--output-j", gen_args.output_j, "J output path");
  generate->add_option("--output-l", gen_args.output_l, "L output path");
  generate->add_option("--output-spectrum", gen_args.output_spectrum,
                       "Spectrum JSON output path");

  CheckArgs check_args;
  CLI::App* check = app.add_subcommand("check", "Check a solve report");
  check->add_option("--input-j", check_args.input_j, "Matrix Market file for J")
      ->required();
  check->add_option("--input-l", check_args.input_l, "Diagonal file for L")
      ->required();
  check->add_option("--report", check_args.report, "report.json from solve")
      ->required();
  check->add_option("--spectrum", check_args.spectrum,
                    "Known spectrum JSON (optional)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (solve->parsed()) return cmd_solve(solve_args);
    if (generate->parsed()) return cmd_generate(gen_args);
    if (check->parsed()) return cmd_check(check_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
