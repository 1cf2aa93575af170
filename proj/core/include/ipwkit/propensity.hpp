#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ipwkit/design.hpp"
#include "ipwkit/glm.hpp"

namespace ipwkit {

struct ClipBounds {
  double lo = 0.001;
  double hi = 0.999;
};

/// N x K treatment-membership probabilities, one column per category of
/// the scheme.
struct PropensityMatrix {
  Eigen::MatrixXd scores;
  std::optional<ClipBounds> bounds;  // unset until clip_scores runs
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> clipped;
  std::shared_ptr<const MultinomFit> fit;

  Eigen::Index rows() const { return scores.rows(); }
  int num_treatments() const { return static_cast<int>(scores.cols()); }
  Eigen::Index clipped_count() const { return clipped.count(); }
};

PropensityMatrix estimate_propensities(const DesignMatrix& design,
                                       std::span<const int> labels,
                                       int num_treatments,
                                       const FitOptions& options = {});

/// Entrywise clamp into [lo, hi]. Rows are not renormalized afterwards.
PropensityMatrix clip_scores(const PropensityMatrix& p, ClipBounds bounds = {});

struct FiveNumber {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

/// Tukey's five-number summary: quartiles are the medians of the lower and
/// upper halves, each half including the median when n is odd.
FiveNumber five_number_summary(std::vector<double> values);

struct OverlapCell {
  int assigned = 0;
  int scored = 0;
  std::size_t count = 0;
  FiveNumber summary;
};

/// Distribution of P[i, scored] over the records assigned to `assigned`,
/// for every (assigned, scored) pair in row-major order.
struct OverlapSummary {
  std::vector<std::string> scheme;
  std::vector<OverlapCell> cells;

  const OverlapCell& at(int assigned, int scored) const;
};

OverlapSummary overlap_summary(const PropensityMatrix& p,
                               std::span<const int> labels,
                               const std::vector<std::string>& scheme);

/// CSV: assigned,scored,count,min,q1,median,q3,max. `comment` (if non-empty)
/// is written first as a '#' line.
void write_overlap_csv(std::ostream& out, const OverlapSummary& summary,
                       const std::string& comment = {});
OverlapSummary read_overlap_csv(std::istream& in);

}  // namespace ipwkit
