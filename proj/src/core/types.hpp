#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace spls {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Predictor/response pair, optionally with grouping labels and (for synthetic
// data) the generating coefficient matrix.
struct Dataset {
  Matrix X;                              // n x p
  Matrix Y;                              // n x q
  std::vector<std::string> subject_ids;  // empty, or one label per row
  std::optional<Matrix> beta_true;       // p x q
  std::vector<std::string> x_names;      // optional csv headers
  std::vector<std::string> y_names;

  Index n() const { return X.rows(); }
  Index p() const { return X.cols(); }
  Index q() const { return Y.cols(); }
};

// Throws Error(invalid_argument) when shapes/labels/values are inconsistent.
void validate(const Dataset& data);

// Column statistics captured at fit time and replayed at prediction time.
struct Centering {
  Vector x_mean;                  // p
  Vector y_mean;                  // q
  std::optional<Vector> x_scale;  // p, present iff scaling was requested

  static Centering zeros(Index p, Index q);
};

// (Xnew - x_mean) with columns divided by x_scale when present.
Matrix apply_centering(const Centering& c, const Matrix& x);

struct CenteredData {
  Matrix Xc;
  Matrix Yc;
  Centering stats;
  std::vector<Index> constant_columns;  // zero-variance X columns (scale forced to 1)
};

// Column means removed from X and Y; when scale is set, X columns are divided
// by their sample standard deviation (n-1 denominator). Constant columns keep
// scale 1 and are recorded in constant_columns.
CenteredData center_columns(const Matrix& X, const Matrix& Y, bool scale);
CenteredData center_columns(const Dataset& data, bool scale);

struct FoldAssignment {
  std::vector<int> fold_of;  // size n, values in [0, k)
  int k = 0;
  std::uint64_t seed = 0;
};

// Seeded shuffle of units followed by round-robin assignment. Units are rows,
// or distinct subjects (in order of first appearance) when ids are given; all
// rows of one subject land in the same fold. Fold sizes differ by at most one
// unit. k must be in [2, #units].
FoldAssignment split_folds(Index n, int k, std::uint64_t seed,
                           const std::vector<std::string>& subject_ids = {});

// Seeded train/test split used by experiment trials on fixed datasets;
// subject-aware like split_folds. Returns row indices.
void split_train_test(Index n, double test_fraction, std::uint64_t seed,
                      const std::vector<std::string>& subject_ids,
                      std::vector<Index>& train_rows, std::vector<Index>& test_rows);

}  // namespace spls
