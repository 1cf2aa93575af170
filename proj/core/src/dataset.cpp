#include "ipwkit/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "csv.hpp"
#include "format.hpp"
#include "ipwkit/error.hpp"
#include "ipwkit/rng.hpp"

namespace ipwkit {

namespace {

using Kind = CovariateKind;

constexpr std::array<CovariateInfo, kNumCovariates> kCovariates{{
    {Covariate::kSubjectCategories, "number_of_subject_categories",
     "Number of subject categories", Kind::kCount, 1},
    {Covariate::kPages, "number_of_pages", "Number of pages", Kind::kCount, 0},
    {Covariate::kCoauthors, "number_of_coauthors", "Number of co-authors",
     Kind::kCount, 1},
    {Covariate::kAuthorAddresses, "number_of_author_addresses",
     "Number of author addresses", Kind::kCount, 0},
    {Covariate::kJoinedCountries, "number_of_joined_countries",
     "Number of joined countries", Kind::kCount, 1},
    {Covariate::kUsa, "usa", "USA", Kind::kBinary, 0},
    {Covariate::kEurope, "europe", "Europe", Kind::kBinary, 0},
    {Covariate::kAsia, "asia", "Asia", Kind::kBinary, 0},
    {Covariate::kKeywords, "number_of_keywords", "Number of keywords",
     Kind::kCount, 0},
    {Covariate::kTitleWords, "number_of_title_words", "Number of title words",
     Kind::kCount, 1},
    {Covariate::kCitedReferences, "number_of_cited_references",
     "Number of cited references", Kind::kCount, 0},
    {Covariate::kLinkedCitedReferences, "number_of_linked_cited_references",
     "Number of linked cited references", Kind::kCount, 0},
    {Covariate::kJournalImpactFactor, "journal_impact_factor",
     "Journal Impact Factor", Kind::kReal, 0},
}};

std::string row_error(std::size_t line_no, const std::string& what) {
  return "line " + std::to_string(line_no) + ": " + what;
}

std::optional<double> parse_double(std::string_view s) {
  s = detail::trim(s);
  if (s.empty()) return std::nullopt;
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
    throw DataError("not a number: '" + std::string(s) + "'");
  return v;
}

std::int64_t parse_int(std::string_view s) {
  s = detail::trim(s);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
    throw DataError("not an integer: '" + std::string(s) + "'");
  return v;
}

void validate_covariate(Covariate c, double v) {
  const auto& ci = info(c);
  if (v < ci.minimum)
    throw DataError(std::string(ci.key) + " below minimum " +
                    std::to_string(static_cast<int>(ci.minimum)));
  if (ci.kind == Kind::kBinary && v != 0.0 && v != 1.0)
    throw DataError(std::string(ci.key) + " must be 0 or 1");
  if (ci.kind == Kind::kCount && v != std::floor(v))
    throw DataError(std::string(ci.key) + " must be an integer");
}

std::vector<std::string> split_categories(std::string_view cell, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= cell.size()) {
    const auto end = cell.find(delim, start);
    const auto piece = detail::trim(cell.substr(
        start, end == std::string_view::npos ? std::string_view::npos
                                             : end - start));
    if (!piece.empty() &&
        std::find(out.begin(), out.end(), piece) == out.end())
      out.emplace_back(piece);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

}  // namespace

const std::array<CovariateInfo, kNumCovariates>& covariate_table() {
  return kCovariates;
}

const CovariateInfo& info(Covariate c) {
  return kCovariates[static_cast<std::size_t>(c)];
}

std::optional<Covariate> covariate_from_key(std::string_view key) {
  for (const auto& ci : kCovariates)
    if (ci.key == key) return ci.id;
  return std::nullopt;
}

ColumnSchema ColumnSchema::standard() {
  ColumnSchema s;
  for (const auto& ci : kCovariates) s.covariates[ci.id] = std::string(ci.key);
  return s;
}

Corpus load_corpus(const std::string& path, const ColumnSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file: " + path);
  return read_corpus(in, schema);
}

Corpus read_corpus(std::istream& in, const ColumnSchema& schema) {
  std::string line;
  std::size_t line_no = 0;
  if (!detail::next_data_line(in, line, line_no))
    throw DataError("corpus file is empty");

  std::vector<std::string> header;
  detail::split_csv_line(line, schema.delimiter, header);
  std::unordered_map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i)
    col.emplace(std::string(detail::trim(header[i])), i);

  auto require = [&](const std::string& name) -> std::size_t {
    auto it = col.find(name);
    if (it == col.end())
      throw DataError("column '" + name + "' not found in header");
    return it->second;
  };
  const std::size_t id_col = require(schema.id);
  const std::size_t cit_col = require(schema.citations);
  const std::size_t cat_col = require(schema.categories);
  const std::optional<std::size_t> year_col =
      schema.year.empty() ? std::nullopt
                          : std::optional<std::size_t>(require(schema.year));

  Corpus corpus;
  std::vector<std::pair<Covariate, std::size_t>> cov_cols;
  for (const auto& [c, name] : schema.covariates) {
    cov_cols.emplace_back(c, require(name));
    corpus.covariates.push_back(c);
  }

  std::vector<std::string> cells;
  while (detail::next_data_line(in, line, line_no)) {
    if (!detail::split_csv_line(line, schema.delimiter, cells))
      throw DataError(row_error(line_no, "unterminated quoted field"));
    if (cells.size() != header.size())
      throw DataError(row_error(
          line_no, "expected " + std::to_string(header.size()) +
                       " fields, found " + std::to_string(cells.size())));
    PaperRecord r;
    try {
      r.id = std::string(detail::trim(cells[id_col]));
      if (year_col) r.year = static_cast<int>(parse_int(cells[*year_col]));
      r.citations = parse_int(cells[cit_col]);
      if (r.citations < 0) throw DataError("negative citations");
      r.categories = split_categories(cells[cat_col], schema.category_delimiter);
      if (r.categories.empty()) throw DataError("no category");
      for (const auto& [c, idx] : cov_cols) {
        const auto v = parse_double(cells[idx]);
        if (v) validate_covariate(c, *v);
        r[c] = v;
      }
      const auto& cited = r[Covariate::kCitedReferences];
      const auto& linked = r[Covariate::kLinkedCitedReferences];
      if (cited && linked && *linked > *cited)
        throw DataError("linked cited references exceed cited references");
    } catch (const DataError& e) {
      throw DataError(row_error(line_no, e.what()));
    }
    corpus.records.push_back(std::move(r));
  }
  return corpus;
}

void write_corpus(std::ostream& out, const Corpus& corpus,
                  const ColumnSchema& schema) {
  const char d = schema.delimiter;
  out << schema.id;
  if (!schema.year.empty()) out << d << schema.year;
  out << d << schema.citations << d << schema.categories;
  for (Covariate c : corpus.covariates) out << d << schema.covariates.at(c);
  out << '\n';
  for (const auto& r : corpus.records) {
    out << detail::csv_escape(r.id, d);
    if (!schema.year.empty()) out << d << r.year;
    out << d << r.citations << d;
    std::string cats;
    for (std::size_t i = 0; i < r.categories.size(); ++i) {
      if (i) cats.push_back(schema.category_delimiter);
      cats += r.categories[i];
    }
    out << detail::csv_escape(cats, d);
    for (Covariate c : corpus.covariates) {
      out << d;
      if (r[c]) out << detail::fmt_g(*r[c]);
    }
    out << '\n';
  }
}

Corpus filter_single_category(const Corpus& corpus) {
  Corpus out;
  out.covariates = corpus.covariates;
  for (const auto& r : corpus.records)
    if (r.categories.size() == 1) out.records.push_back(r);
  return out;
}

LabeledCorpus resolve_multilabel(const Corpus& corpus,
                                 const std::vector<std::string>& scheme,
                                 std::uint64_t seed) {
  if (scheme.empty()) throw DataError("category scheme is empty");
  std::unordered_map<std::string, int> index;
  for (std::size_t t = 0; t < scheme.size(); ++t)
    if (!index.emplace(scheme[t], static_cast<int>(t)).second)
      throw DataError("duplicate category in scheme: " + scheme[t]);

  LabeledCorpus out;
  out.covariates = corpus.covariates;
  out.scheme = scheme;
  out.seed = seed;
  std::vector<int> eligible;
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    const auto& r = corpus.records[i];
    eligible.clear();
    for (const auto& code : r.categories) {
      auto it = index.find(code);
      if (it != index.end()) eligible.push_back(it->second);
    }
    if (eligible.empty()) {
      ++out.dropped;
      continue;
    }
    std::sort(eligible.begin(), eligible.end());
    int label = eligible.front();
    if (eligible.size() > 1) {
      Rng rng(seed, i);
      label = eligible[rng.below(eligible.size())];
    }
    out.records.push_back(r);
    out.labels.push_back(label);
  }
  if (out.records.empty())
    throw DataError("no record has a category in the scheme");
  return out;
}

LabeledCorpus aggregate_to_scheme(const LabeledCorpus& corpus,
                                  const CategoryMapping& mapping) {
  std::unordered_map<std::string, std::string> to_super;
  for (const auto& [from, to] : mapping) {
    auto [it, inserted] = to_super.emplace(from, to);
    if (!inserted && it->second != to)
      throw DataError("category '" + from + "' mapped to both '" +
                      it->second + "' and '" + to + "'");
  }
  std::set<std::string> reached;
  for (const auto& code : corpus.scheme) {
    auto it = to_super.find(code);
    if (it == to_super.end())
      throw DataError("category '" + code + "' has no supercategory");
    reached.insert(it->second);
  }
  std::vector<std::string> scheme;
  for (const auto& entry : mapping) {
    const auto& to = entry.second;
    if (reached.count(to) &&
        std::find(scheme.begin(), scheme.end(), to) == scheme.end())
      scheme.push_back(to);
  }
  std::vector<int> remap(corpus.scheme.size());
  for (std::size_t t = 0; t < corpus.scheme.size(); ++t) {
    const auto& super = to_super.at(corpus.scheme[t]);
    remap[t] = static_cast<int>(
        std::find(scheme.begin(), scheme.end(), super) - scheme.begin());
  }

  LabeledCorpus out = corpus;
  out.scheme = std::move(scheme);
  for (auto& l : out.labels) l = remap[static_cast<std::size_t>(l)];
  return out;
}

std::vector<std::string> read_scheme(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open scheme file: " + path);
  std::vector<std::string> scheme;
  std::string line;
  std::size_t line_no = 0;
  while (detail::next_data_line(in, line, line_no))
    scheme.emplace_back(detail::trim(line));
  return scheme;
}

CategoryMapping read_mapping(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open mapping file: " + path);
  CategoryMapping mapping;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> cells;
  while (detail::next_data_line(in, line, line_no)) {
    detail::split_csv_line(line, ',', cells);
    if (cells.size() != 2)
      throw DataError(path + ": " +
                      row_error(line_no, "expected 'category,supercategory'"));
    mapping.emplace_back(std::string(detail::trim(cells[0])),
                         std::string(detail::trim(cells[1])));
  }
  return mapping;
}

Eigen::Index ImputedCorpus::column_of(Covariate c) const {
  const auto& cs = covariates();
  auto it = std::find(cs.begin(), cs.end(), c);
  if (it == cs.end())
    throw DataError(std::string("covariate not loaded: ") +
                    std::string(info(c).key));
  return static_cast<Eigen::Index>(it - cs.begin());
}

Eigen::VectorXd ImputedCorpus::outcome() const {
  Eigen::VectorXd y(static_cast<Eigen::Index>(labeled.size()));
  for (std::size_t i = 0; i < labeled.size(); ++i)
    y[static_cast<Eigen::Index>(i)] =
        static_cast<double>(labeled.records[i].citations);
  return y;
}

ImputedCorpus impute_missing(const LabeledCorpus& corpus) {
  ImputedCorpus out;
  out.labeled = corpus;
  const auto n = static_cast<Eigen::Index>(corpus.size());
  const auto& cs = corpus.covariates;
  out.values.resize(n, static_cast<Eigen::Index>(cs.size()));
  std::vector<bool> any_missing(cs.size(), false);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = corpus.records[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < cs.size(); ++j) {
      const auto& v = r[cs[j]];
      out.values(i, static_cast<Eigen::Index>(j)) = v ? *v : 0.0;
      if (!v) any_missing[j] = true;
    }
  }
  for (std::size_t j = 0; j < cs.size(); ++j)
    if (any_missing[j]) out.indicator_for.push_back(cs[j]);
  out.indicators.resize(n, static_cast<Eigen::Index>(out.indicator_for.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = corpus.records[static_cast<std::size_t>(i)];
    for (std::size_t k = 0; k < out.indicator_for.size(); ++k)
      out.indicators(i, static_cast<Eigen::Index>(k)) =
          r[out.indicator_for[k]] ? 0.0 : 1.0;
  }
  return out;
}

}  // namespace ipwkit
