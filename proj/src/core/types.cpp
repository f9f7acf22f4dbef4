#include "core/types.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "core/error.hpp"
#include "core/random.hpp"

namespace spls {

void validate(const Dataset& data) {
  if (data.X.rows() < 2) fail(ErrorCode::invalid_argument, "dataset needs at least 2 rows");
  if (data.X.cols() < 1 || data.Y.cols() < 1)
    fail(ErrorCode::invalid_argument, "dataset needs at least one predictor and one response");
  if (data.X.rows() != data.Y.rows())
    fail(ErrorCode::invalid_argument, "X and Y row counts differ: " + std::to_string(data.X.rows()) +
                                          " vs " + std::to_string(data.Y.rows()));
  if (!data.X.allFinite() || !data.Y.allFinite())
    fail(ErrorCode::invalid_argument, "dataset contains non-finite values");
  if (!data.subject_ids.empty() && static_cast<Index>(data.subject_ids.size()) != data.X.rows())
    fail(ErrorCode::invalid_argument, "subject id count does not match row count");
  if (data.beta_true &&
      (data.beta_true->rows() != data.X.cols() || data.beta_true->cols() != data.Y.cols()))
    fail(ErrorCode::invalid_argument, "beta_true shape does not match (p, q)");
}

Centering Centering::zeros(Index p, Index q) {
  Centering c;
  c.x_mean = Vector::Zero(p);
  c.y_mean = Vector::Zero(q);
  return c;
}

Matrix apply_centering(const Centering& c, const Matrix& x) {
  if (x.cols() != c.x_mean.size())
    fail(ErrorCode::invalid_argument, "prediction rows have " + std::to_string(x.cols()) +
                                          " columns, model expects " + std::to_string(c.x_mean.size()));
  Matrix out = x.rowwise() - c.x_mean.transpose();
  if (c.x_scale) out.array().rowwise() /= c.x_scale->transpose().array();
  return out;
}

CenteredData center_columns(const Matrix& X, const Matrix& Y, bool scale) {
  if (X.rows() != Y.rows()) fail(ErrorCode::invalid_argument, "X and Y row counts differ");
  if (X.rows() < 2) fail(ErrorCode::invalid_argument, "centering needs at least 2 rows");
  CenteredData out;
  out.stats.x_mean = X.colwise().mean();
  out.stats.y_mean = Y.colwise().mean();
  out.Xc = X.rowwise() - out.stats.x_mean.transpose();
  out.Yc = Y.rowwise() - out.stats.y_mean.transpose();
  if (scale) {
    const double denom = static_cast<double>(X.rows() - 1);
    Vector sd = (out.Xc.colwise().squaredNorm() / denom).cwiseSqrt();
    for (Index j = 0; j < sd.size(); ++j) {
      if (sd[j] <= 0.0) {
        sd[j] = 1.0;  // constant column: leave values at zero, flag it
        out.constant_columns.push_back(j);
      }
    }
    out.Xc.array().rowwise() /= sd.transpose().array();
    out.stats.x_scale = sd;
  }
  return out;
}

CenteredData center_columns(const Dataset& data, bool scale) {
  return center_columns(data.X, data.Y, scale);
}

namespace {

// Units for grouping: each row its own unit, or rows grouped by subject id
// (unit order = first appearance).
std::vector<std::vector<Index>> group_units(Index n, const std::vector<std::string>& subject_ids) {
  std::vector<std::vector<Index>> units;
  if (subject_ids.empty()) {
    units.resize(static_cast<size_t>(n));
    for (Index i = 0; i < n; ++i) units[static_cast<size_t>(i)] = {i};
  } else {
    std::map<std::string, size_t> seen;
    for (Index i = 0; i < n; ++i) {
      auto [it, inserted] = seen.emplace(subject_ids[static_cast<size_t>(i)], units.size());
      if (inserted) units.emplace_back();
      units[it->second].push_back(i);
    }
  }
  return units;
}

std::vector<size_t> shuffled_order(size_t count, std::uint64_t seed) {
  std::vector<size_t> order(count);
  for (size_t i = 0; i < count; ++i) order[i] = i;
  RandomStream rng(seed, 0);
  for (size_t i = count; i > 1; --i) {  // Fisher-Yates with our own index draws
    const size_t j = static_cast<size_t>(rng.index(i));
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

}  // namespace

FoldAssignment split_folds(Index n, int k, std::uint64_t seed,
                           const std::vector<std::string>& subject_ids) {
  if (!subject_ids.empty() && static_cast<Index>(subject_ids.size()) != n)
    fail(ErrorCode::invalid_argument, "subject id count does not match row count");
  const auto units = group_units(n, subject_ids);
  if (k < 2) fail(ErrorCode::invalid_argument, "fold count must be at least 2");
  if (static_cast<size_t>(k) > units.size())
    fail(ErrorCode::invalid_argument, "fold count " + std::to_string(k) + " exceeds unit count " +
                                          std::to_string(units.size()));
  FoldAssignment fa;
  fa.k = k;
  fa.seed = seed;
  fa.fold_of.assign(static_cast<size_t>(n), -1);
  const auto order = shuffled_order(units.size(), seed);
  for (size_t pos = 0; pos < order.size(); ++pos) {
    const int fold = static_cast<int>(pos % static_cast<size_t>(k));
    for (Index row : units[order[pos]]) fa.fold_of[static_cast<size_t>(row)] = fold;
  }
  return fa;
}

void split_train_test(Index n, double test_fraction, std::uint64_t seed,
                      const std::vector<std::string>& subject_ids,
                      std::vector<Index>& train_rows, std::vector<Index>& test_rows) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    fail(ErrorCode::invalid_argument, "test fraction must lie in (0, 1)");
  const auto units = group_units(n, subject_ids);
  if (units.size() < 2) fail(ErrorCode::invalid_argument, "train/test split needs at least 2 units");
  size_t n_test = static_cast<size_t>(std::ceil(test_fraction * static_cast<double>(units.size())));
  n_test = std::min(n_test, units.size() - 1);
  n_test = std::max<size_t>(n_test, 1);
  const auto order = shuffled_order(units.size(), seed);
  train_rows.clear();
  test_rows.clear();
  for (size_t pos = 0; pos < order.size(); ++pos) {
    auto& dst = pos < n_test ? test_rows : train_rows;
    for (Index row : units[order[pos]]) dst.push_back(row);
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
}

}  // namespace spls
