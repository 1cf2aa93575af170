#include "ipwkit/propensity.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>

#include "csv.hpp"
#include "format.hpp"
#include "ipwkit/error.hpp"

namespace ipwkit {

namespace {

double median_of_sorted(const std::vector<double>& v, std::size_t begin,
                        std::size_t end) {
  const std::size_t n = end - begin;
  const std::size_t mid = begin + n / 2;
  return n % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

double parse_number(const std::string& s, std::size_t line_no) {
  const auto t = detail::trim(s);
  double v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size())
    throw DataError("overlap csv line " + std::to_string(line_no) +
                    ": not a number: '" + std::string(t) + "'");
  return v;
}

}  // namespace

PropensityMatrix estimate_propensities(const DesignMatrix& design,
                                       std::span<const int> labels,
                                       int num_treatments,
                                       const FitOptions& options) {
  auto fit = std::make_shared<MultinomFit>(
      fit_multinomial(design, labels, num_treatments, options));
  PropensityMatrix p;
  p.scores = predict_proba(*fit, design.x);
  p.clipped.setConstant(p.scores.rows(), p.scores.cols(), false);
  p.fit = std::move(fit);
  return p;
}

PropensityMatrix clip_scores(const PropensityMatrix& p, ClipBounds bounds) {
  if (!(bounds.lo > 0.0 && bounds.lo < bounds.hi && bounds.hi < 1.0))
    throw DataError("clip bounds must satisfy 0 < lo < hi < 1");
  PropensityMatrix out = p;
  out.bounds = bounds;
  out.clipped.resize(p.scores.rows(), p.scores.cols());
  for (Eigen::Index i = 0; i < p.scores.rows(); ++i) {
    for (Eigen::Index k = 0; k < p.scores.cols(); ++k) {
      const double v = p.scores(i, k);
      const double c = std::clamp(v, bounds.lo, bounds.hi);
      out.scores(i, k) = c;
      out.clipped(i, k) = c != v;
    }
  }
  return out;
}

FiveNumber five_number_summary(std::vector<double> values) {
  if (values.empty()) throw DataError("five-number summary of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  const std::size_t half = (n + 1) / 2;
  FiveNumber f;
  f.min = values.front();
  f.max = values.back();
  f.median = median_of_sorted(values, 0, n);
  f.q1 = median_of_sorted(values, 0, half);
  f.q3 = median_of_sorted(values, n - half, n);
  return f;
}

const OverlapCell& OverlapSummary::at(int assigned, int scored) const {
  const auto k = static_cast<int>(scheme.size());
  if (assigned < 0 || assigned >= k || scored < 0 || scored >= k)
    throw DataError("overlap cell out of range");
  return cells[static_cast<std::size_t>(assigned * k + scored)];
}

OverlapSummary overlap_summary(const PropensityMatrix& p,
                               std::span<const int> labels,
                               const std::vector<std::string>& scheme) {
  const int k = p.num_treatments();
  if (static_cast<int>(scheme.size()) != k)
    throw DataError("scheme size does not match the propensity matrix");
  if (static_cast<Eigen::Index>(labels.size()) != p.rows())
    throw DataError("label count does not match the propensity matrix");
  std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= k) throw DataError("label out of range");
    members[static_cast<std::size_t>(labels[i])].push_back(
        static_cast<Eigen::Index>(i));
  }
  OverlapSummary out;
  out.scheme = scheme;
  for (int a = 0; a < k; ++a) {
    const auto& rows = members[static_cast<std::size_t>(a)];
    if (rows.empty())
      throw DataError("no records assigned to category '" +
                      scheme[static_cast<std::size_t>(a)] + "'");
    for (int s = 0; s < k; ++s) {
      std::vector<double> v;
      v.reserve(rows.size());
      for (auto i : rows) v.push_back(p.scores(i, s));
      out.cells.push_back({a, s, rows.size(), five_number_summary(std::move(v))});
    }
  }
  return out;
}

void write_overlap_csv(std::ostream& out, const OverlapSummary& summary,
                       const std::string& comment) {
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "assigned,scored,count,min,q1,median,q3,max\n";
  for (const auto& c : summary.cells) {
    out << detail::csv_escape(summary.scheme[static_cast<std::size_t>(c.assigned)])
        << ',' << detail::csv_escape(summary.scheme[static_cast<std::size_t>(c.scored)])
        << ',' << c.count << ',' << detail::fmt_g(c.summary.min) << ','
        << detail::fmt_g(c.summary.q1) << ',' << detail::fmt_g(c.summary.median)
        << ',' << detail::fmt_g(c.summary.q3) << ','
        << detail::fmt_g(c.summary.max) << '\n';
  }
}

OverlapSummary read_overlap_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!detail::next_data_line(in, line, line_no))
    throw DataError("overlap csv is empty");
  std::vector<std::string> cells;
  detail::split_csv_line(line, ',', cells);
  if (cells.size() != 8 || detail::trim(cells[0]) != "assigned")
    throw DataError("overlap csv: unexpected header");

  struct Row {
    std::string assigned, scored;
    OverlapCell cell;
  };
  std::vector<Row> rows;
  std::vector<std::string> scheme;
  auto note = [&](const std::string& name) {
    if (std::find(scheme.begin(), scheme.end(), name) == scheme.end())
      scheme.push_back(name);
  };
  while (detail::next_data_line(in, line, line_no)) {
    detail::split_csv_line(line, ',', cells);
    if (cells.size() != 8)
      throw DataError("overlap csv line " + std::to_string(line_no) +
                      ": expected 8 fields");
    Row r;
    r.assigned = std::string(detail::trim(cells[0]));
    r.scored = std::string(detail::trim(cells[1]));
    const double count = parse_number(cells[2], line_no);
    if (count < 0 || count != static_cast<double>(static_cast<std::size_t>(count)))
      throw DataError("overlap csv line " + std::to_string(line_no) +
                      ": bad count");
    r.cell.count = static_cast<std::size_t>(count);
    r.cell.summary = {parse_number(cells[3], line_no), parse_number(cells[4], line_no),
                      parse_number(cells[5], line_no), parse_number(cells[6], line_no),
                      parse_number(cells[7], line_no)};
    const auto& f = r.cell.summary;
    if (!(f.min <= f.q1 && f.q1 <= f.median && f.median <= f.q3 && f.q3 <= f.max))
      throw DataError("overlap csv line " + std::to_string(line_no) +
                      ": summary is not ordered");
    note(r.assigned);
    note(r.scored);
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw DataError("overlap csv has no rows");

  const auto k = static_cast<int>(scheme.size());
  OverlapSummary out;
  out.scheme = scheme;
  out.cells.resize(static_cast<std::size_t>(k * k));
  std::vector<bool> filled(out.cells.size(), false);
  auto index = [&](const std::string& name) {
    return static_cast<int>(std::find(scheme.begin(), scheme.end(), name) -
                            scheme.begin());
  };
  for (auto& r : rows) {
    const int a = index(r.assigned), s = index(r.scored);
    const auto slot = static_cast<std::size_t>(a * k + s);
    if (filled[slot])
      throw DataError("overlap csv: duplicate row for (" + r.assigned + ", " +
                      r.scored + ")");
    r.cell.assigned = a;
    r.cell.scored = s;
    out.cells[slot] = r.cell;
    filled[slot] = true;
  }
  for (int a = 0; a < k; ++a) {
    for (int s = 0; s < k; ++s) {
      const auto slot = static_cast<std::size_t>(a * k + s);
      if (!filled[slot] || out.cells[slot].count == 0)
        throw DataError("overlap csv: category '" +
                        scheme[static_cast<std::size_t>(a)] +
                        "' has no records scored against '" +
                        scheme[static_cast<std::size_t>(s)] + "'");
    }
  }
  return out;
}

}  // namespace ipwkit
