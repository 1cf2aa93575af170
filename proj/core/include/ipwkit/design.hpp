#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ipwkit/dataset.hpp"

namespace ipwkit {

enum class ColumnRole { kContinuous, kBinary, kIndicator };

struct MainColumn {
  std::string name;
  Eigen::VectorXd values;
  ColumnRole role = ColumnRole::kContinuous;
};

/// Column scaling fitted on one corpus. Continuous columns are z-scored with
/// the sample SD (n-1 divisor); binary and indicator columns pass through.
struct Standardization {
  struct Entry {
    std::string name;
    ColumnRole role;
    double mean = 0.0;  // 0 for pass-through columns
    double sd = 1.0;    // 1 for pass-through columns
  };
  std::vector<Entry> kept;
  std::vector<std::string> constant_columns;

  /// Applies the stored scaling to columns with the same names. Columns
  /// listed in constant_columns are skipped; anything else unknown throws.
  Eigen::MatrixXd apply(const std::vector<MainColumn>& columns) const;
};

struct StandardizedMains {
  Standardization scaling;
  Eigen::MatrixXd matrix;  // N x scaling.kept.size()
  std::vector<std::string> names;
  std::vector<ColumnRole> roles;
};

StandardizedMains standardize(const std::vector<MainColumn>& columns);

/// Main-effect columns of an imputed corpus: the loaded covariates (binary
/// ones by role) followed by one "<key>_missing" indicator per covariate
/// with missing values.
std::vector<MainColumn> main_columns(const ImputedCorpus& corpus);

StandardizedMains standardize(const ImputedCorpus& corpus);

struct InteractionPolicy {
  enum class Mode {
    kAllMainPairs,  // every unordered pair of non-indicator mains
    kNone,
    kExplicit,      // exactly `pairs`, by column name
  };
  Mode mode = Mode::kAllMainPairs;
  std::vector<std::pair<std::string, std::string>> pairs;
};

struct ColumnTag {
  enum class Kind { kIntercept, kMain, kIndicator, kInteraction };
  Kind kind = Kind::kMain;
  int parent_a = -1;  // design column indices for interactions
  int parent_b = -1;
};

struct DesignMatrix {
  Eigen::MatrixXd x;  // first column is the all-ones intercept
  std::vector<std::string> names;
  std::vector<ColumnTag> tags;

  Eigen::Index rows() const { return x.rows(); }
  Eigen::Index cols() const { return x.cols(); }
  std::optional<Eigen::Index> index_of(const std::string& name) const;

  /// Intercept followed by `columns`, all tagged as main effects.
  static DesignMatrix with_intercept(const Eigen::MatrixXd& columns,
                                     std::vector<std::string> names);
};

DesignMatrix expand_interactions(const StandardizedMains& mains,
                                 const InteractionPolicy& policy = {});

}  // namespace ipwkit
