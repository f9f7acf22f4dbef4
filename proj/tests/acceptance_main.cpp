// Release gate: one pass/fail line per criterion.
//
//   usage: acceptance_tests [criterion...]
//
// With no arguments every criterion runs in order; numeric arguments select a
// subset. The exit code is the number of failed criteria. Each criterion also
// enforces its own wall-clock budget, so a pass certifies both the numbers
// and the runtime.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "core/error.hpp"
#include "core/global_simpls.hpp"
#include "core/l1_spls.hpp"
#include "core/model_selection.hpp"
#include "core/pls.hpp"
#include "core/random.hpp"
#include "core/simgen.hpp"
#include "core/sphere_quad.hpp"
#include "core/types.hpp"
#include "oracles.hpp"

using namespace spls;

namespace {

bool check(bool cond, const char* what) {
  if (!cond) std::fprintf(stderr, "  failed: %s\n", what);
  return cond;
}

Matrix random_gaussian(RandomStream& rs, Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = rs.normal();
  return m;
}

// ---- criterion 1: hand-checkable sphere-solver instances ----

bool criterion_sphere_exactness() {
  bool ok = true;
  SphereQuadProblem prob;
  prob.cross_factor = Matrix::Zero(2, 2);
  prob.cross_factor(0, 0) = 1.0;
  prob.cross_factor(1, 1) = std::sqrt(2.0);
  prob.basis = Matrix(2, 0);
  prob.quad_coeff = -1.0;  // quadratic form diag(-1, -2)
  prob.linear_term = Vector(2);

  prob.linear_term << 2.0, 0.0;
  const SecularSolution generic = solve_sphere_quadratic(prob);
  ok &= check(std::abs(generic.alpha + 3.0) <= 1e-8, "generic multiplier is -3");
  ok &= check(std::abs(generic.w[0] - 1.0) <= 1e-8 && std::abs(generic.w[1]) <= 1e-8,
              "generic minimizer is (1, 0)");

  prob.linear_term << 0.5, 0.0;
  const SecularSolution hard = solve_sphere_quadratic(prob);
  ok &= check(hard.hard_case, "degenerate instance takes the boundary branch");
  ok &= check(std::abs(hard.alpha + 2.0) <= 1e-6, "boundary multiplier is -2");
  ok &= check(std::abs(hard.w[0] - 0.5) <= 1e-6 && std::abs(hard.w[1] - std::sqrt(0.75)) <= 1e-6,
              "boundary minimizer is (0.5, sqrt(0.75))");

  Matrix A = Matrix::Zero(2, 2);
  A(0, 0) = -1.0;
  A(1, 1) = -2.0;
  Vector b(2);
  b << 0.5, 0.0;
  const oracles::CircleSweepResult sweep = oracles::circle_sweep_min(A, b, 1000000);
  ok &= check(std::abs(hard.objective - sweep.objective) <= 1e-9,
              "boundary objective matches the full-circle sweep");
  return ok;
}

// ---- criterion 2: random instances against brute-force optima ----

SphereQuadProblem random_instance(int idx, Matrix& a_out) {
  RandomStream rs(4242, static_cast<uint64_t>(idx));
  const Index p = 2 + static_cast<Index>(rs.index(7));     // 2..8
  const Index q = 1 + static_cast<Index>(rs.index(2));     // 1..2
  Index r = static_cast<Index>(rs.index(3));               // 0..2
  if (r >= p) r = p - 1;

  SphereQuadProblem prob;
  prob.cross_factor = random_gaussian(rs, p, q);
  if (r > 0) {
    const Matrix raw = random_gaussian(rs, p, r);
    Eigen::HouseholderQR<Matrix> qr(raw);
    prob.basis = qr.householderQ() * Matrix::Identity(p, r);
  } else {
    prob.basis = Matrix(p, 0);
  }
  const double scales[] = {0.0, 0.1, 1.0, 10.0};
  Vector braw = random_gaussian(rs, p, 1);
  braw -= prob.basis * (prob.basis.transpose() * braw);
  prob.linear_term = scales[idx % 4] * braw;
  prob.quad_coeff = idx % 5 == 4 ? 0.5 : -1.0;

  const Matrix PG = prob.cross_factor - prob.basis * (prob.basis.transpose() * prob.cross_factor);
  a_out = prob.quad_coeff * (PG * PG.transpose());
  return prob;
}

bool criterion_oracle_equivalence() {
  bool ok = true;
  for (int idx = 0; idx < 100; ++idx) {
    Matrix A;
    const SphereQuadProblem prob = random_instance(idx, A);
    const SecularSolution sol = solve_sphere_quadratic(prob);

    const oracles::DenseForm form = oracles::dense_restrict(prob);
    const Vector w_r = form.basis.transpose() * sol.w;
    const double ours =
        w_r.dot(form.a_tilde * w_r) - 2.0 * form.b_tilde.dot(w_r);
    const double oracle = oracles::kkt_sphere_min(form.a_tilde, form.b_tilde);
    if (!(ours <= oracle + 1e-6)) {
      std::fprintf(stderr, "  instance %d: objective %.12f vs oracle %.12f\n", idx, ours, oracle);
      ok = false;
    }

    const double dmin = min_eig_factored(prob);
    for (const double gap : {0.3, 1.1, 3.7}) {
      const double alpha = dmin - gap * (1.0 + std::abs(dmin));
      const double g_fast = g_and_gprime(prob, alpha).first;
      const double g_dense = oracles::dense_g(form, alpha);
      if (!(std::abs(g_fast - g_dense) <= 1e-8 * std::max(1.0, std::abs(g_dense)))) {
        std::fprintf(stderr, "  instance %d: resolvent mismatch at alpha %.6f\n", idx, alpha);
        ok = false;
      }
    }
  }
  return ok;
}

// ---- criterion 3: classic fits agree with each other and with least squares ----

bool criterion_classic_pls() {
  bool ok = true;

  // (a) the two dense algorithms build the same univariate score sequence
  {
    const Matrix X = oracles::random_matrix(30, 8, 301, 0);
    Matrix Y = 0.3 * oracles::random_matrix(30, 1, 301, 1);
    Y.col(0) += X.col(0) + 0.5 * X.col(1);
    const CenteredData cd = center_columns(X, Y, false);
    const PlsModel nip = nipals_pls2(cd.Xc, cd.Yc, 3);
    const PlsModel sim = simpls(cd.Xc, cd.Yc, 3);
    for (int k = 0; k < 3; ++k) {
      const double corr =
          std::abs(oracles::correlation(nip.T.col(k), sim.T.col(k)));
      if (!(corr > 1.0 - 1e-8)) {
        std::fprintf(stderr, "  component %d: score correlation %.12f\n", k + 1, corr);
        ok = false;
      }
    }
  }

  // (b) coefficient norms grow strictly with the component count and land
  // on the least-squares solution at full rank
  {
    const Matrix X = oracles::random_matrix(50, 10, 302, 0);
    Matrix Y = 0.5 * oracles::random_matrix(50, 1, 302, 1);
    Y.col(0) += X.col(0) - X.col(3) + 2.0 * X.col(7);
    const CenteredData cd = center_columns(X, Y, false);
    const Matrix ols = oracles::ols_coefficients(cd.Xc, cd.Yc);
    for (const bool use_nipals : {false, true}) {
      double prev = -1.0;
      for (int K = 1; K <= 10; ++K) {
        const PlsModel m = use_nipals ? nipals_pls2(cd.Xc, cd.Yc, K) : simpls(cd.Xc, cd.Yc, K);
        const double nrm = m.beta.norm();
        ok &= check(nrm > prev, "coefficient norm strictly increases with K");
        prev = nrm;
        if (K == 10)
          ok &= check((m.beta - ols).cwiseAbs().maxCoeff() <= 1e-6,
                      "full-rank fit equals least squares");
      }
    }
  }
  return ok;
}

// ---- criterion 4: penalty limits bracket the sparse fit ----

bool criterion_penalty_limits() {
  bool ok = true;
  const Matrix Xall = oracles::random_matrix(100, 40, 404, 0);
  Matrix Yall = 0.4 * oracles::random_matrix(100, 2, 404, 1);
  Yall.col(0) += Xall.col(0) + 0.5 * Xall.col(2);
  Yall.col(1) += Xall.col(1) - Xall.col(3);
  const Matrix Xtr = Xall.topRows(60), Xte = Xall.bottomRows(40);
  const Matrix Ytr = Yall.topRows(60), Yte = Yall.bottomRows(40);

  MethodConfig sparse_cfg;
  sparse_cfg.method = Method::global_simpls;
  MethodConfig dense_cfg;
  dense_cfg.method = Method::simpls;

  const SparsePlsModel free_fit = fit_method(Xtr, Ytr, 2, 0.0, sparse_cfg);
  const SparsePlsModel dense_fit = fit_method(Xtr, Ytr, 2, 0.0, dense_cfg);
  ok &= check(free_fit.selected.size() == 40, "unpenalized fit keeps all predictors");
  const double mse_free = mse(Yte, predict(free_fit, Xte));
  const double mse_dense = mse(Yte, predict(dense_fit, Xte));
  ok &= check(std::abs(mse_free - mse_dense) <= 0.02 * mse_dense,
              "unpenalized test error within 2% of the dense fit");

  const CenteredData cd = center_columns(Xtr, Ytr, false);
  const double lmax = global_simpls_lambda_max(cd.Xc, cd.Yc, 2);
  for (const double lambda : {lmax, 2.0 * lmax}) {
    const SparsePlsModel collapsed = fit_method(Xtr, Ytr, 2, lambda, sparse_cfg);
    ok &= check(collapsed.selected.empty(), "saturating penalty drops every predictor");
    const Matrix pred = predict(collapsed, Xte);
    const Vector mean = Ytr.colwise().mean();
    double worst = 0.0;
    for (Index i = 0; i < pred.rows(); ++i)
      worst = std::max(worst, (pred.row(i).transpose() - mean).cwiseAbs().maxCoeff());
    ok &= check(worst <= 1e-10, "collapsed fit predicts the training mean");
  }
  return ok;
}

// ---- criteria 5 and 6: seeded multi-trial protocol on synthetic designs ----

constexpr uint64_t kProtocolSeed = 216;
constexpr int kProtocolTrials = 10;
constexpr int kProtocolFolds = 10;
// Penalty grids run log-spaced over [floor * lambda_max, lambda_max]. With
// n = 100 and p = 500 every sub-percent multiple of lambda_max produces a
// near-dense fit, so a lower floor would spend most of the eight cells on
// duplicates of the unpenalized model; 1.5% starts the grid where the
// selected set begins to respond to the penalty.
constexpr double kProtocolGridFloor = 0.015;

uint64_t protocol_seed(int trial, uint64_t tag) {
  return mix_seed(kProtocolSeed, (static_cast<uint64_t>(trial) << 3) | tag);
}

std::vector<double> protocol_grid(double lambda_max) {
  std::vector<double> grid(8);
  for (int i = 0; i < 8; ++i)
    grid[static_cast<size_t>(i)] = lambda_max * std::pow(kProtocolGridFloor, (7 - i) / 7.0);
  grid[7] = lambda_max;
  return grid;
}

struct ProtocolOutcome {
  double test_mse = 0.0;
  Index selected = 0;
  Index in_support = 0;
  int best_k = 0;
};

ProtocolOutcome run_protocol_method(const Dataset& train, const Dataset& test,
                                    uint64_t fold_seed, Method method) {
  MethodConfig mc;
  mc.method = method;
  std::vector<double> grid{0.0};
  if (method != Method::simpls && method != Method::nipals) {
    const CenteredData cd = center_columns(train.X, train.Y, false);
    grid = protocol_grid(method == Method::global_simpls
                             ? global_simpls_lambda_max(cd.Xc, cd.Yc, 3, mc.admm)
                             : l1_spls_lambda_max(cd.Xc, cd.Yc, mc.l1.kappa));
  }
  const CvResult cv = cross_validate(train, mc, {1, 2, 3}, grid, kProtocolFolds, fold_seed,
                                     MseMode::mean, 1);
  const SparsePlsModel fit = fit_method(train.X, train.Y, cv.best_k, cv.best_lambda, mc);
  ProtocolOutcome out;
  out.best_k = cv.best_k;
  out.selected = static_cast<Index>(fit.selected.size());
  for (const Index v : fit.selected) out.in_support += v < 50 ? 1 : 0;
  out.test_mse = mse(test.Y, predict(fit, test.X), MseMode::mean);
  return out;
}

struct ProtocolTrialData {
  Dataset train, test;
  uint64_t fold_seed = 0;
};

ProtocolTrialData protocol_trial(int model_id, int trial) {
  ProtocolTrialData data;
  SimModelSpec spec;
  spec.model_id = model_id;
  spec.n = 100;
  spec.p = 500;
  spec.seed = protocol_seed(trial, 1);
  data.train = generate(spec);
  spec.seed = protocol_seed(trial, 2);
  data.test = generate(spec);
  data.fold_seed = protocol_seed(trial, 3);
  return data;
}

bool criterion_sparse_recovery() {
  double mse_rows = 0.0, mse_dense = 0.0, mean_selected = 0.0, support_frac = 0.0;
  double mean_best_k = 0.0;
  for (int t = 0; t < kProtocolTrials; ++t) {
    const ProtocolTrialData d = protocol_trial(1, t);
    const ProtocolOutcome rows =
        run_protocol_method(d.train, d.test, d.fold_seed, Method::global_simpls);
    const ProtocolOutcome dense = run_protocol_method(d.train, d.test, d.fold_seed, Method::simpls);
    mse_rows += rows.test_mse;
    mse_dense += dense.test_mse;
    mean_selected += static_cast<double>(rows.selected);
    support_frac += rows.selected == 0
                        ? 0.0
                        : static_cast<double>(rows.in_support) / static_cast<double>(rows.selected);
    mean_best_k += rows.best_k;
  }
  mse_rows /= kProtocolTrials;
  mse_dense /= kProtocolTrials;
  mean_selected /= kProtocolTrials;
  support_frac /= kProtocolTrials;
  mean_best_k /= kProtocolTrials;

  std::fprintf(stderr, "  mse %.4f (dense %.4f), selected %.1f, support %.3f, components %.2f\n",
               mse_rows, mse_dense, mean_selected, support_frac, mean_best_k);
  bool ok = check(mse_rows <= mse_dense,
                  "row-sparse fit does not lose to the dense fit on held-out error");
  ok &= check(mean_selected <= 150.0, "mean selected variables at most 150");
  ok &= check(support_frac >= 0.6, "mean in-support fraction at least 0.6");
  ok &= check(mean_best_k <= 2.0, "mean chosen component count at most 2");
  return ok;
}

bool criterion_row_sparsity_advantage() {
  double sel_rows = 0.0, sel_entries = 0.0;
  for (int t = 0; t < kProtocolTrials; ++t) {
    const ProtocolTrialData d = protocol_trial(2, t);
    sel_rows += static_cast<double>(
        run_protocol_method(d.train, d.test, d.fold_seed, Method::global_simpls).selected);
    sel_entries += static_cast<double>(
        run_protocol_method(d.train, d.test, d.fold_seed, Method::l1_spls).selected);
  }
  sel_rows /= kProtocolTrials;
  sel_entries /= kProtocolTrials;
  std::fprintf(stderr, "  row-sparse selected %.1f vs entrywise %.1f\n", sel_rows, sel_entries);
  return check(sel_rows < sel_entries,
               "row-wise penalty selects strictly fewer variables than the entrywise baseline");
}

// ---- criterion 7: worked examples hold exactly ----

bool criterion_worked_examples() {
  bool ok = true;

  Matrix A(1, 2);
  A << 3.0, 4.0;
  const Matrix shrunk = row_soft_threshold(A, 2.0);
  ok &= check(std::abs(shrunk(0, 0) - 1.8) <= 1e-12 && std::abs(shrunk(0, 1) - 2.4) <= 1e-12,
              "norm-5 row shrinks to (1.8, 2.4)");
  Matrix unit(1, 2);
  unit << 1.0, 0.0;
  const Matrix gone = row_soft_threshold(unit, 1.0);
  ok &= check(gone(0, 0) == 0.0 && gone(0, 1) == 0.0, "boundary row is removed");

  const Matrix W = oracles::random_matrix(4, 2, 701, 0);
  const Matrix D = oracles::random_matrix(4, 2, 701, 1);
  ok &= check(((update_m(W, D, 0.0, 100.0)) - (W - D)).cwiseAbs().maxCoeff() == 0.0,
              "zero penalty leaves the splitting target untouched");

  Matrix y(2, 1), yhat(2, 1);
  y << 0.0, 2.0;
  yhat << 1.0, 1.0;
  ok &= check(mse(y, yhat) == 1.0, "two-row squared error averages to 1");
  Matrix Y2 = Matrix::Zero(5, 2), Yhat2 = Y2;
  Yhat2(0, 0) = 1.0;
  Yhat2(0, 1) = std::sqrt(2.0);
  ok &= check(std::abs(mse(Y2, Yhat2, MseMode::mean) - 0.3) <= 1e-15, "mean mode averages columns");
  ok &= check(std::abs(mse(Y2, Yhat2, MseMode::sum) - 0.6) <= 1e-15, "sum mode adds columns");

  const Matrix Yr = oracles::random_matrix(10, 2, 702, 0);
  const Matrix Ybar = Matrix::Ones(10, 1) * Yr.colwise().mean();
  const Matrix halfway = Yr - std::sqrt(0.5) * (Yr - Ybar);
  ok &= check(std::abs(r_squared(Yr, halfway) - 0.5) <= 1e-12,
              "half-variance residual scores 0.5");

  const std::vector<double> a = {-1, 0, -2, 1, -3};
  const std::vector<double> zero = {0, 0, 0, 0, 0};
  const TTestResult t = paired_t_test_one_sided(a, zero);
  ok &= check(std::abs(t.statistic + std::sqrt(2.0)) <= 1e-12, "textbook statistic is -sqrt(2)");
  ok &= check(t.df == 4.0, "textbook test has 4 degrees of freedom");
  ok &= check(std::abs(t.p_value - oracles::t_cdf_quadrature(-std::sqrt(2.0), 4.0)) <= 1e-6,
              "p-value matches direct quadrature");
  const TTestResult nul = paired_t_test_one_sided(zero, zero);
  ok &= check(nul.p_value == 0.5 && nul.statistic == 0.0, "identical samples are a coin flip");
  return ok;
}

// ---- criterion 8: generator noise level and covariance factor ----

bool criterion_generator_statistics() {
  bool ok = true;
  double sum = 0.0, sum_sq = 0.0;
  long count = 0;
  for (int r = 0; r < 20; ++r) {
    SimModelSpec spec;
    spec.model_id = 1;
    spec.n = 100;
    spec.p = 60;
    spec.seed = 9000 + static_cast<uint64_t>(r);
    const Dataset d = generate(spec);
    const Matrix resid = d.Y - d.X * (*d.beta_true);
    for (Index i = 0; i < resid.rows(); ++i) {
      sum += resid(i, 0);
      sum_sq += resid(i, 0) * resid(i, 0);
      ++count;
    }
  }
  const double mean = sum / static_cast<double>(count);
  const double var = (sum_sq - static_cast<double>(count) * mean * mean) /
                     static_cast<double>(count - 1);
  std::fprintf(stderr, "  pooled response-noise variance %.4f (target 2.25)\n", var);
  ok &= check(std::abs(var - 2.25) <= 0.15 * 2.25, "noise variance within 15% of 2.25");

  const double rho = 0.9;
  const Matrix L = ar1_covariance_factor(rho, 50);
  const Matrix S = L * L.transpose();
  double worst = 0.0;
  for (Index i = 0; i < 50; ++i)
    for (Index j = 0; j < 50; ++j)
      worst = std::max(worst, std::abs(S(i, j) - std::pow(rho, std::abs(double(i - j)))));
  ok &= check(worst <= 1e-10, "factor reconstructs the autoregressive covariance");
  return ok;
}

// ---- criterion 9: the command-line runner reproduces reports byte for byte ----

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool criterion_byte_identical_reruns() {
#ifndef SPLS_CLI_BIN
  std::fprintf(stderr, "  no CLI path compiled in\n");
  return false;
#else
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / ("spls_accept_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const std::string cfg = (dir / "config.json").string();
  {
    std::ofstream out(cfg, std::ios::binary);
    out << "{\"source\": {\"type\": \"sim\", \"model\": 1, \"n\": 40, \"p\": 60},\n"
           " \"methods\": [\"simpls\", \"global_simpls\"],\n"
           " \"k_grid\": [1, 2], \"lambda_points\": 3, \"folds\": 3,\n"
           " \"trials\": 2, \"seed\": 11}\n";
  }

  bool ok = true;
  std::string dumps[2];
  for (int run = 0; run < 2; ++run) {
    const std::string out_path = (dir / ("report" + std::to_string(run) + ".json")).string();
    const std::string cmd = std::string(SPLS_CLI_BIN) + " experiment --config " + cfg + " --out " +
                            out_path + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    ok &= check(rc != -1 && WIFEXITED(rc) && WEXITSTATUS(rc) == 0, "runner exits cleanly");
    dumps[run] = read_file(out_path);
    ok &= check(!dumps[run].empty(), "report file is non-empty");
  }
  ok &= check(dumps[0] == dumps[1], "two runs produce byte-identical reports");

  std::error_code ec;
  std::filesystem::remove_all(dir, ec);
  return ok;
#endif
}

struct Criterion {
  int id;
  const char* slug;
  double budget_seconds;
  bool (*fn)();
};

const Criterion kCriteria[] = {
    {1, "sphere-solver-exactness", 1.0, criterion_sphere_exactness},
    {2, "solver-oracle-equivalence", 30.0, criterion_oracle_equivalence},
    {3, "classic-pls-correctness", 5.0, criterion_classic_pls},
    {4, "penalty-limit-behavior", 30.0, criterion_penalty_limits},
    {5, "sparse-recovery-protocol", 900.0, criterion_sparse_recovery},
    {6, "row-sparsity-advantage", 1200.0, criterion_row_sparsity_advantage},
    {7, "threshold-and-test-examples", 1.0, criterion_worked_examples},
    {8, "generator-statistics", 30.0, criterion_generator_statistics},
    {9, "byte-identical-reruns", 120.0, criterion_byte_identical_reruns},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) {
    const int id = std::atoi(argv[i]);
    if (id < 1 || id > 9) {
      std::fprintf(stderr, "usage: %s [criterion ids in 1..9]\n", argv[0]);
      return 64;
    }
    only.push_back(id);
  }

  int failures = 0;
  for (const Criterion& c : kCriteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto started = std::chrono::steady_clock::now();
    bool ok = false;
    try {
      ok = c.fn();
    } catch (const Error& e) {
      std::fprintf(stderr, "  error: %s\n", e.what());
    } catch (const std::exception& e) {
      std::fprintf(stderr, "  error: %s\n", e.what());
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (seconds >= c.budget_seconds) {
      std::fprintf(stderr, "  over budget: %.1fs >= %.0fs\n", seconds, c.budget_seconds);
      ok = false;
    }
    std::printf("criterion %d (%s): %s (%.1fs)\n", c.id, c.slug, ok ? "PASS" : "FAIL", seconds);
    std::fflush(stdout);
    failures += ok ? 0 : 1;
  }
  return failures;
}
