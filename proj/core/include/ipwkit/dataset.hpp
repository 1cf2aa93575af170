#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace ipwkit {

/// The thirteen factors potentially influencing citations. Enumerator order
/// is the canonical column order used throughout reports.
enum class Covariate : int {
  kSubjectCategories = 0,
  kPages,
  kCoauthors,
  kAuthorAddresses,
  kJoinedCountries,
  kUsa,
  kEurope,
  kAsia,
  kKeywords,
  kTitleWords,
  kCitedReferences,
  kLinkedCitedReferences,
  kJournalImpactFactor,
};

inline constexpr std::size_t kNumCovariates = 13;

enum class CovariateKind { kCount, kBinary, kReal };

struct CovariateInfo {
  Covariate id;
  std::string_view key;    // machine name, also the default CSV column
  std::string_view label;  // human label used in reports
  CovariateKind kind;
  double minimum;          // smallest admissible value
};

const std::array<CovariateInfo, kNumCovariates>& covariate_table();
const CovariateInfo& info(Covariate c);
std::optional<Covariate> covariate_from_key(std::string_view key);

struct PaperRecord {
  std::string id;
  int year = 0;
  std::int64_t citations = 0;
  std::vector<std::string> categories;
  std::array<std::optional<double>, kNumCovariates> covariates{};

  const std::optional<double>& operator[](Covariate c) const {
    return covariates[static_cast<std::size_t>(c)];
  }
  std::optional<double>& operator[](Covariate c) {
    return covariates[static_cast<std::size_t>(c)];
  }
};

/// Maps record fields to CSV header names. Covariates absent from
/// `covariates` are not loaded at all (as opposed to loaded-but-missing).
struct ColumnSchema {
  std::string id = "id";
  std::string year = "year";  // empty: no year column
  std::string citations = "citations";
  std::string categories = "categories";
  std::map<Covariate, std::string> covariates;
  char delimiter = ',';
  char category_delimiter = ';';

  /// All thirteen covariates under their machine names.
  static ColumnSchema standard();
};

/// Records plus the covariates that were actually loaded, in canonical order.
struct Corpus {
  std::vector<Covariate> covariates;
  std::vector<PaperRecord> records;
};

Corpus load_corpus(const std::string& path, const ColumnSchema& schema);
Corpus read_corpus(std::istream& in, const ColumnSchema& schema);

/// Writes `corpus` as CSV under the column names of `schema`. Absent values
/// become empty cells.
void write_corpus(std::ostream& out, const Corpus& corpus,
                  const ColumnSchema& schema);

/// Keeps only papers with exactly one category code.
Corpus filter_single_category(const Corpus& corpus);

struct LabeledCorpus {
  std::vector<Covariate> covariates;
  std::vector<PaperRecord> records;
  std::vector<int> labels;  // index into scheme, one per record
  std::vector<std::string> scheme;
  std::uint64_t seed = 0;
  std::size_t dropped = 0;  // records with no category in the scheme

  std::size_t size() const { return records.size(); }
  int num_treatments() const { return static_cast<int>(scheme.size()); }
};

/// Gives every record a single treatment. A record with m eligible codes
/// gets one of them uniformly at random; the draw for input row i uses
/// Rng(seed, i) and the eligible codes in scheme order, so the result is a
/// pure function of (records, scheme, seed).
LabeledCorpus resolve_multilabel(const Corpus& corpus,
                                 const std::vector<std::string>& scheme,
                                 std::uint64_t seed);

using CategoryMapping = std::vector<std::pair<std::string, std::string>>;

/// Relabels to supercategories. The new scheme lists the supercategories
/// reached from the current scheme, in first-appearance order of `mapping`.
LabeledCorpus aggregate_to_scheme(const LabeledCorpus& corpus,
                                  const CategoryMapping& mapping);

std::vector<std::string> read_scheme(const std::string& path);
CategoryMapping read_mapping(const std::string& path);

struct ImputedCorpus {
  LabeledCorpus labeled;
  /// N x covariates().size(), ABSENT replaced by 0.
  Eigen::MatrixXd values;
  /// Covariates that had at least one ABSENT value, canonical order.
  std::vector<Covariate> indicator_for;
  /// N x indicator_for.size(), 1 where the original value was ABSENT.
  Eigen::MatrixXd indicators;

  const std::vector<Covariate>& covariates() const {
    return labeled.covariates;
  }
  Eigen::Index column_of(Covariate c) const;
  Eigen::VectorXd outcome() const;
};

/// Constant-plus-missingness-indicator imputation.
ImputedCorpus impute_missing(const LabeledCorpus& corpus);

}  // namespace ipwkit
