#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "ipwkit/config.hpp"
#include "ipwkit/error.hpp"
#include "ipwkit/pipeline.hpp"
#include "ipwkit/propensity.hpp"
#include "ipwkit/report.hpp"
#include "ipwkit/svg_plot.hpp"
#include "ipwkit/synth.hpp"
#include "oracles.hpp"

namespace ipwkit {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ipwkit-test-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Data rows of one of our CSV outputs, keyed by header name.
std::vector<std::map<std::string, std::string>> read_rows(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::string line;
  std::vector<std::string> header;
  std::vector<std::map<std::string, std::string>> rows;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
  };
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header.empty()) {
      header = split(line);
      continue;
    }
    const auto cells = split(line);
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < header.size() && i < cells.size(); ++i) row[header[i]] = cells[i];
    rows.push_back(row);
  }
  return rows;
}

PipelineConfig ten_papers_config(const fs::path& out) {
  auto c = load_pipeline_config(testing::data_path("ten_papers.json"));
  c.out_dir = out.string();
  return c;
}

TEST(PipelineConfig, ParsesFixture) {
  const auto c = load_pipeline_config(testing::data_path("ten_papers.json"));
  EXPECT_EQ(fs::path(c.input).filename(), "ten_papers.csv");
  EXPECT_TRUE(fs::path(c.input).is_absolute() || fs::exists(c.input));
  EXPECT_EQ(c.scheme, (std::vector<std::string>{"field1", "field2"}));
  EXPECT_EQ(c.interactions.mode, InteractionPolicy::Mode::kNone);
  EXPECT_EQ(c.seed, 1u);
}

TEST(PipelineConfig, RejectsBadInput) {
  EXPECT_THROW(parse_pipeline_config("{}"), DataError);
  EXPECT_THROW(parse_pipeline_config(R"({"input": "a.csv", "colour": 1})"), DataError);
  EXPECT_THROW(parse_pipeline_config(R"({"input": "a.csv", "clip": {"lo": 0.6, "hi": 0.4}})"),
               DataError);
  EXPECT_THROW(parse_pipeline_config(R"({"input": "a.csv", "ridge": -1})"), DataError);
  EXPECT_THROW(parse_pipeline_config(R"({"input": 3})"), DataError);
  EXPECT_THROW(parse_pipeline_config("{not json"), DataError);
  EXPECT_THROW(load_pipeline_config("/nonexistent/config.json"), DataError);
}

TEST(PipelineConfig, HashIgnoresKeyOrderAndTracksValues) {
  const auto a = parse_pipeline_config(R"({"input": "a.csv", "seed": 3, "ridge": 0.5})");
  const auto b = parse_pipeline_config(R"({"ridge": 0.5, "seed": 3, "input": "a.csv"})");
  const auto c = parse_pipeline_config(R"({"ridge": 0.5, "seed": 4, "input": "a.csv"})");
  EXPECT_EQ(canonical_json(a), canonical_json(b));
  EXPECT_NE(fnv1a64(canonical_json(a)), fnv1a64(canonical_json(c)));
  EXPECT_EQ(hex64(fnv1a64("")), "cbf29ce484222325");
  EXPECT_EQ(hex64(fnv1a64("a")), "af63dc4c8601ec8c");
}

OverlapSummary ten_papers_overlap() {
  const auto c = testing::ten_papers_corpus();
  FitOptions fit;
  fit.ridge = 1e-12;
  fit.tol = 1e-10;
  const auto design = expand_interactions(standardize(c), {InteractionPolicy::Mode::kNone, {}});
  const auto p = clip_scores(estimate_propensities(design, c.labeled.labels, 2, fit));
  return overlap_summary(p, c.labeled.labels, c.labeled.scheme);
}

int count_of(const std::string& text, const std::string& needle) {
  int n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1))
    ++n;
  return n;
}

TEST(OverlapSvg, TenPapersHasTwoPanelsOfTwoBoxes) {
  const auto summary = ten_papers_overlap();
  EXPECT_NEAR(summary.at(0, 0).summary.median, 0.8, 1e-8);
  const std::string svg = render_overlap_svg(summary, "ten_papers");
  EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
  EXPECT_EQ(count_of(svg, "class=\"panel\""), 2);
  EXPECT_EQ(count_of(svg, "class=\"box\""), 4);
  const std::regex own(R"re(data-assigned="field1"[\s\S]*?data-scored="field1"[^>]*data-median="([0-9.]+)")re");
  std::smatch m;
  ASSERT_TRUE(std::regex_search(svg, m, own));
  EXPECT_EQ(m[1].str(), "0.800000");
  EXPECT_EQ(svg, render_overlap_svg(summary, "ten_papers"));
}

TEST(OverlapCsv, RoundTripsAndNamesEmptyCategory) {
  const auto summary = ten_papers_overlap();
  std::ostringstream out;
  write_overlap_csv(out, summary, "comment");
  std::istringstream in(out.str());
  const auto back = read_overlap_csv(in);
  EXPECT_EQ(back.scheme, summary.scheme);
  EXPECT_EQ(render_overlap_svg(back), render_overlap_svg(summary));

  std::istringstream empty(
      "assigned,scored,count,min,q1,median,q3,max\n"
      "a,a,3,0.1,0.2,0.3,0.4,0.5\na,b,3,0.1,0.2,0.3,0.4,0.5\n"
      "b,a,0,0,0,0,0,0\nb,b,0,0,0,0,0,0\n");
  try {
    read_overlap_csv(empty);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("'b'"), std::string::npos) << e.what();
  }
}

TEST(Pipeline, TenPapersEffectsBeforeAndAfter) {
  const auto out = scratch("ten_papers");
  const auto result = run_pipeline(ten_papers_config(out), Command::kRun);
  EXPECT_EQ(result.records, 10u);
  const auto rows = read_rows(out / "effects.csv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].at("category"), "field1");
  EXPECT_NEAR(std::stod(rows[0].at("mean_before")), 60.0, 1e-9);
  EXPECT_NEAR(std::stod(rows[1].at("mean_before")), 90.0, 1e-9);
  EXPECT_NEAR(std::stod(rows[0].at("mean_after")), 75.0, 1e-6);
  EXPECT_NEAR(std::stod(rows[1].at("mean_after")), 75.0, 1e-6);
  for (const char* f : {"propensities.csv", "overlap.csv", "overlap.svg", "balance.csv",
                        "balance.md", "effects.csv", "effects.md", "ace.csv",
                        "run-metadata.json"}) {
    ASSERT_TRUE(fs::exists(out / f)) << f;
    if (std::string(f) != "run-metadata.json")
      EXPECT_NE(slurp(out / f).find(result.config_hash), std::string::npos) << f;
  }
}

TEST(Pipeline, RerunIsByteIdentical) {
  const auto out = scratch("rerun");
  const auto config = ten_papers_config(out);
  const auto first = run_pipeline(config, Command::kRun);
  std::map<std::string, std::string> before;
  for (const auto& f : first.files) before[f] = slurp(out / f);
  before["run-metadata.json"] = slurp(out / "run-metadata.json");
  const auto second = run_pipeline(config, Command::kRun);
  EXPECT_EQ(first.files, second.files);
  for (const auto& [f, text] : before) EXPECT_EQ(slurp(out / f), text) << f;
}

TEST(Pipeline, SubcommandsWriteTheirSubset) {
  const auto out_b = scratch("balance-only");
  const auto b = run_pipeline(ten_papers_config(out_b), Command::kBalance);
  EXPECT_TRUE(fs::exists(out_b / "balance.csv"));
  EXPECT_FALSE(fs::exists(out_b / "effects.csv"));
  const auto out_e = scratch("effects-only");
  run_pipeline(ten_papers_config(out_e), Command::kEffects);
  EXPECT_TRUE(fs::exists(out_e / "effects.csv"));
  EXPECT_FALSE(fs::exists(out_e / "balance.csv"));
  EXPECT_FALSE(b.files.empty());
}

TEST(Pipeline, SingleCategoryFilterLeavesTenPapersUnchanged) {
  const auto out_a = scratch("all"), out_s = scratch("single");
  run_pipeline(ten_papers_config(out_a), Command::kEffects);
  auto config = ten_papers_config(out_s);
  config.single_category_only = true;
  run_pipeline(config, Command::kEffects);
  EXPECT_EQ(read_rows(out_a / "effects.csv"), read_rows(out_s / "effects.csv"));
}

TEST(Pipeline, FailureIsRecordedInMetadata) {
  const auto out = scratch("failure");
  auto config = load_pipeline_config(testing::data_path("separable.json"));
  config.out_dir = out.string();
  EXPECT_THROW(run_pipeline(config, Command::kRun), NumericalError);
  const std::string meta = slurp(out / "run-metadata.json");
  EXPECT_NE(meta.find("\"status\": \"failed\""), std::string::npos);
  EXPECT_NE(meta.find("\"stage\": \"propensity\""), std::string::npos);
  EXPECT_NE(meta.find("\"partial\": false"), std::string::npos);

  config.input = (out / "missing.csv").string();
  EXPECT_THROW(run_pipeline(config, Command::kRun), DataError);
  EXPECT_NE(slurp(out / "run-metadata.json").find("\"stage\": \"load\""), std::string::npos);
}

TEST(Pipeline, NullCorpusEffectsNearZero) {
  const auto dir = scratch("null");
  const auto gen = GeneratorConfig::null_config(3000, 3);
  const auto s = generate(gen, 21);
  {
    std::ofstream csv(dir / "corpus.csv", std::ios::binary);
    write_corpus(csv, s.corpus, synthetic_schema(gen));
  }
  PipelineConfig config;
  config.input = (dir / "corpus.csv").string();
  config.schema = synthetic_schema(gen);
  config.scheme = gen.categories;
  config.seed = 21;
  config.out_dir = (dir / "out").string();
  run_pipeline(config, Command::kEffects);

  const auto effects = read_rows(dir / "out" / "effects.csv");
  ASSERT_EQ(effects.size(), 3u);
  for (const auto& row : read_rows(dir / "out" / "ace.csv")) {
    if (row.at("row") == row.at("column")) continue;
    auto find = [&](const std::string& name) {
      for (const auto& e : effects)
        if (e.at("category") == name) return e;
      throw std::runtime_error("no category " + name);
    };
    const auto a = find(row.at("row")), b = find(row.at("column"));
    // Standard error from the effective sample sizes of the two arms.
    const double se = std::sqrt(std::pow(std::stod(a.at("sd_after")), 2) / std::stod(a.at("ess")) +
                                std::pow(std::stod(b.at("sd_after")), 2) / std::stod(b.at("ess")));
    EXPECT_LT(std::abs(std::stod(row.at("ipw_difference"))), 4.0 * se)
        << row.at("row") << " vs " << row.at("column");
  }
}

#ifdef IPWKIT_CLI
int cli(const std::string& args) {
  const std::string cmd = std::string(IPWKIT_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, ExitCodes) {
  const auto out = scratch("cli");
  EXPECT_EQ(cli(""), 1);
  EXPECT_EQ(cli("run --no-such-flag"), 1);
  EXPECT_EQ(cli("frobnicate"), 1);
  EXPECT_EQ(cli("run --config " + (out / "none.json").string()), 2);
  EXPECT_EQ(cli("run --config " + testing::data_path("separable.json") + " --out " +
                (out / "sep").string()),
            3);
  EXPECT_EQ(cli("run --config " + testing::data_path("ten_papers.json") + " --out " +
                (out / "t1").string()),
            0);
  EXPECT_EQ(cli("plot-overlap " + (out / "t1" / "overlap.csv").string() + " --out " +
                (out / "plot").string()),
            0);
  EXPECT_EQ(slurp(out / "plot" / "overlap.svg"), slurp(out / "t1" / "overlap.svg"));
  EXPECT_EQ(cli("plot-overlap " + testing::data_path("ten_papers.csv")), 2);
  EXPECT_EQ(cli("synth --config " + testing::data_path("separated.json") + " --seed 2 --out " +
                (out / "syn").string()),
            0);
  EXPECT_TRUE(fs::exists(out / "syn" / "corpus.csv"));
  EXPECT_TRUE(fs::exists(out / "syn" / "truth.json"));
}

TEST(Cli, SeedFlagOverridesConfig) {
  const auto out = scratch("cli-seed");
  ASSERT_EQ(cli("effects --config " + testing::data_path("ten_papers.json") + " --seed 99 --out " +
                out.string()),
            0);
  EXPECT_NE(slurp(out / "effects.csv").find("seed=99"), std::string::npos);
}
#endif

}  // namespace
}  // namespace ipwkit
