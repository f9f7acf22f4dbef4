#include "core/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "core/error.hpp"
#include "core/threading.hpp"

namespace spls {

namespace {

constexpr double kLambdaGridSpan = 1e-4;  // smallest grid point relative to the anchor
constexpr double kBetaCfTol = 1e-14;
constexpr int kBetaCfMaxIter = 300;

// Continued fraction of the incomplete beta function (modified Lentz scheme).
double beta_cf(double a, double b, double x) {
  const double tiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kBetaCfMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kBetaCfTol) return h;
  }
  fail(ErrorCode::numeric, "incomplete beta continued fraction did not converge");
}

double reg_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                                a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

SparsePlsModel wrap_dense(PlsModel model, int requested_k) {
  SparsePlsModel out;
  out.sparse_weights = model.W;
  out.selected.resize(static_cast<size_t>(model.W.rows()));
  std::iota(out.selected.begin(), out.selected.end(), Index{0});
  out.requested_k = requested_k;
  out.diagnostics.converged = true;
  out.model = std::move(model);
  return out;
}

Matrix take_rows(const Matrix& A, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), A.cols());
  for (Index i = 0; i < out.rows(); ++i) out.row(i) = A.row(rows[static_cast<size_t>(i)]);
  return out;
}

}  // namespace

MseMode mse_mode_from_string(const std::string& name) {
  if (name == "mean") return MseMode::mean;
  if (name == "sum") return MseMode::sum;
  fail(ErrorCode::parse, "unknown mse mode '" + name + "' (expected mean or sum)");
}

std::string to_string(MseMode mode) { return mode == MseMode::mean ? "mean" : "sum"; }

double mse(const Matrix& Y, const Matrix& Yhat, MseMode mode) {
  if (Y.rows() != Yhat.rows() || Y.cols() != Yhat.cols())
    fail(ErrorCode::invalid_argument, "response and prediction shapes differ");
  if (Y.rows() < 1) fail(ErrorCode::invalid_argument, "need at least one row");
  const double per_cell = (Y - Yhat).squaredNorm() / static_cast<double>(Y.rows() * Y.cols());
  return mode == MseMode::mean ? per_cell : per_cell * static_cast<double>(Y.cols());
}

double r_squared(const Matrix& Y, const Matrix& Yhat) {
  if (Y.rows() != Yhat.rows() || Y.cols() != Yhat.cols())
    fail(ErrorCode::invalid_argument, "response and prediction shapes differ");
  if (Y.rows() < 2) fail(ErrorCode::invalid_argument, "need at least two rows");
  const Matrix centered = Y.rowwise() - Y.colwise().mean();
  const double denom = centered.squaredNorm();
  if (denom == 0.0) fail(ErrorCode::invalid_argument, "responses are constant");
  return 1.0 - (Y - Yhat).squaredNorm() / denom;
}

double student_t_cdf(double x, double df) {
  if (!(df > 0.0)) fail(ErrorCode::invalid_argument, "degrees of freedom must be positive");
  if (x == 0.0) return 0.5;
  const double tail = 0.5 * reg_incomplete_beta(0.5 * df, 0.5, df / (df + x * x));
  return x > 0.0 ? 1.0 - tail : tail;
}

TTestResult paired_t_test_one_sided(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) fail(ErrorCode::invalid_argument, "paired samples differ in length");
  const size_t m = a.size();
  if (m < 2) fail(ErrorCode::invalid_argument, "need at least two pairs");
  double mean = 0.0;
  for (size_t i = 0; i < m; ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(m);
  double ss = 0.0;
  for (size_t i = 0; i < m; ++i) {
    const double d = a[i] - b[i] - mean;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / static_cast<double>(m - 1));

  TTestResult result;
  result.df = static_cast<double>(m - 1);
  if (sd == 0.0) {
    if (mean < 0.0) {
      result.statistic = -std::numeric_limits<double>::infinity();
      result.p_value = 0.0;
    } else if (mean > 0.0) {
      result.statistic = std::numeric_limits<double>::infinity();
      result.p_value = 1.0;
    } else {
      result.statistic = 0.0;
      result.p_value = 0.5;
    }
    return result;
  }
  result.statistic = mean / (sd / std::sqrt(static_cast<double>(m)));
  result.p_value = student_t_cdf(result.statistic, result.df);
  return result;
}

Method method_from_string(const std::string& name) {
  if (name == "nipals") return Method::nipals;
  if (name == "simpls") return Method::simpls;
  if (name == "global_simpls") return Method::global_simpls;
  if (name == "l1_spls") return Method::l1_spls;
  fail(ErrorCode::parse, "unknown method '" + name +
                             "' (expected nipals, simpls, global_simpls, or l1_spls)");
}

std::string to_string(Method method) {
  switch (method) {
    case Method::nipals: return "nipals";
    case Method::simpls: return "simpls";
    case Method::global_simpls: return "global_simpls";
    case Method::l1_spls: return "l1_spls";
  }
  fail(ErrorCode::invalid_argument, "unknown method value");
}

SparsePlsModel fit_method(const Matrix& X, const Matrix& Y, int k, double lambda,
                          const MethodConfig& config) {
  const CenteredData cd = center_columns(X, Y, config.scale);
  SparsePlsModel out;
  switch (config.method) {
    case Method::nipals:
      out = wrap_dense(nipals_pls2(cd.Xc, cd.Yc, k, config.pls), k);
      break;
    case Method::simpls:
      out = wrap_dense(simpls(cd.Xc, cd.Yc, k, config.pls), k);
      break;
    case Method::global_simpls:
      out = fit_global_simpls(cd.Xc, cd.Yc, k, lambda, config.admm);
      break;
    case Method::l1_spls:
      out = fit_l1_spls(cd.Xc, cd.Yc, k, lambda, config.l1);
      break;
  }
  out.model.centering = cd.stats;
  return out;
}

Matrix predict(const SparsePlsModel& fit, const Matrix& Xnew) { return predict(fit.model, Xnew); }

CvResult cross_validate(const Dataset& data, const MethodConfig& config,
                        const std::vector<int>& k_grid, const std::vector<double>& lambda_grid,
                        int n_folds, uint64_t seed, MseMode mse_mode, int threads) {
  validate(data);
  if (k_grid.empty()) fail(ErrorCode::invalid_argument, "component grid is empty");
  if (lambda_grid.empty()) fail(ErrorCode::invalid_argument, "penalty grid is empty");

  CvResult result;
  result.k_grid = k_grid;
  std::sort(result.k_grid.begin(), result.k_grid.end());
  result.lambda_grid = lambda_grid;
  std::sort(result.lambda_grid.begin(), result.lambda_grid.end());
  result.folds = split_folds(data.n(), n_folds, seed, data.subject_ids);

  const Index kn = static_cast<Index>(result.k_grid.size());
  const Index ln = static_cast<Index>(result.lambda_grid.size());
  result.fold_mse.assign(static_cast<size_t>(n_folds), Matrix::Zero(kn, ln));

  parallel_for(n_folds, threads, [&](int f) {
    std::vector<Index> train_rows, test_rows;
    for (Index i = 0; i < data.n(); ++i) {
      if (result.folds.fold_of[static_cast<size_t>(i)] == f)
        test_rows.push_back(i);
      else
        train_rows.push_back(i);
    }
    if (train_rows.size() < 2)
      fail(ErrorCode::invalid_argument,
           "fold " + std::to_string(f) + " leaves fewer than two training rows");
    const Matrix Xtr = take_rows(data.X, train_rows);
    const Matrix Ytr = take_rows(data.Y, train_rows);
    const Matrix Xte = take_rows(data.X, test_rows);
    const Matrix Yte = take_rows(data.Y, test_rows);

    Matrix& cell = result.fold_mse[static_cast<size_t>(f)];
    for (Index ki = 0; ki < kn; ++ki) {
      for (Index li = 0; li < ln; ++li) {
        Matrix yhat;
        try {
          const SparsePlsModel fit =
              fit_method(Xtr, Ytr, result.k_grid[static_cast<size_t>(ki)],
                         result.lambda_grid[static_cast<size_t>(li)], config);
          yhat = predict(fit, Xte);
        } catch (const Error&) {
          // Unattainable cell (rank, convergence, grid too ambitious): score
          // the training-mean predictor instead of propagating the failure.
          yhat = Vector::Ones(Xte.rows()) * Ytr.colwise().mean();
        }
        cell(ki, li) = mse(Yte, yhat, mse_mode);
      }
    }
  });

  result.mean_mse = Matrix::Zero(kn, ln);
  for (const Matrix& cell : result.fold_mse) result.mean_mse += cell;
  result.mean_mse /= static_cast<double>(n_folds);

  // Scan components ascending and penalties descending with a strict
  // improvement test: ties resolve to fewer components, then more shrinkage.
  double best = std::numeric_limits<double>::infinity();
  for (Index ki = 0; ki < kn; ++ki) {
    for (Index li = ln - 1; li >= 0; --li) {
      if (result.mean_mse(ki, li) < best) {
        best = result.mean_mse(ki, li);
        result.best_k = result.k_grid[static_cast<size_t>(ki)];
        result.best_lambda = result.lambda_grid[static_cast<size_t>(li)];
      }
    }
  }
  return result;
}

std::vector<double> default_lambda_grid(const Matrix& X, const Matrix& Y,
                                        const MethodConfig& config, int max_k, int n_points) {
  if (n_points < 1) fail(ErrorCode::invalid_argument, "need at least one grid point");
  if (config.method == Method::nipals || config.method == Method::simpls) return {0.0};

  const CenteredData cd = center_columns(X, Y, config.scale);
  const double lmax = config.method == Method::global_simpls
                          ? global_simpls_lambda_max(cd.Xc, cd.Yc, max_k, config.admm)
                          : l1_spls_lambda_max(cd.Xc, cd.Yc, config.l1.kappa);
  if (lmax <= 0.0) return {0.0};
  if (n_points == 1) return {lmax};

  std::vector<double> grid(static_cast<size_t>(n_points));
  const double lo = std::log10(kLambdaGridSpan * lmax);
  const double hi = std::log10(lmax);
  for (int i = 0; i < n_points; ++i)
    grid[static_cast<size_t>(i)] =
        std::pow(10.0, lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_points - 1));
  grid.back() = lmax;
  return grid;
}

}  // namespace spls
