#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "ipwkit/config.hpp"
#include "ipwkit/error.hpp"
#include "ipwkit/glm.hpp"
#include "ipwkit/pipeline.hpp"
#include "ipwkit/report.hpp"
#include "ipwkit/svg_plot.hpp"
#include "ipwkit/synth.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

struct AnalysisFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  bool single_category_only = false;
  std::string scheme;
  std::string aggregate;
  std::string out;
};

void add_analysis_flags(CLI::App* cmd, AnalysisFlags& f) {
  cmd->add_option("--config", f.config, "Pipeline config (JSON)")->required();
  cmd->add_option("--seed", f.seed, "Seed for multi-label resolution");
  cmd->add_flag("--single-category-only", f.single_category_only,
                "Keep only papers with exactly one category");
  cmd->add_option("--scheme", f.scheme, "Category scheme file, one code per line");
  cmd->add_option("--aggregate", f.aggregate, "Category to supercategory mapping CSV");
  cmd->add_option("--out", f.out, "Output directory");
}

int run_analysis(const AnalysisFlags& f, ipwkit::Command command) {
  ipwkit::PipelineConfig config = ipwkit::load_pipeline_config(f.config);
  if (f.seed) config.seed = *f.seed;
  if (f.single_category_only) config.single_category_only = true;
  if (!f.scheme.empty()) {
    config.scheme.clear();
    config.scheme_path = f.scheme;
  }
  if (!f.aggregate.empty()) config.aggregate_path = f.aggregate;
  if (!f.out.empty()) config.out_dir = f.out;
  const auto result = ipwkit::run_pipeline(config, command, &std::cerr);
  std::cerr << "ipwkit: wrote " << result.files.size() << " files to " << config.out_dir
            << " (config " << result.config_hash << ")\n";
  return kOk;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ipwkit::DataError("cannot write " + path.string());
  out << content;
  if (!out) throw ipwkit::DataError("error writing " + path.string());
}

int run_synth(const std::string& config_path, std::uint64_t seed, const std::string& out) {
  const ipwkit::GeneratorConfig config = ipwkit::load_generator_config(config_path);
  const auto data = ipwkit::generate(config, seed);
  const fs::path dir = out.empty() ? fs::path("ipwkit-synth") : fs::path(out);
  fs::create_directories(dir);
  std::ostringstream csv;
  const std::string hash = ipwkit::hex64(ipwkit::fnv1a64(ipwkit::canonical_json(config)));
  csv << "# ipwkit " << ipwkit::library_version() << " config_hash=" << hash
      << " seed=" << seed << '\n';
  ipwkit::write_corpus(csv, data.corpus, ipwkit::synthetic_schema(config));
  write_file(dir / "corpus.csv", csv.str());
  std::ostringstream truth;
  ipwkit::write_truth_json(truth, config, seed, data.truth);
  write_file(dir / "truth.json", truth.str());
  std::cerr << "ipwkit: wrote " << data.corpus.records.size() << " records to "
            << (dir / "corpus.csv").string() << '\n';
  return kOk;
}

int run_plot(const std::string& input, const std::string& out) {
  std::ifstream in(input);
  if (!in) throw ipwkit::DataError("cannot open " + input);
  // Carry the provenance line of the csv over to the plot.
  std::string first, comment;
  std::getline(in, first);
  if (first.rfind("# ", 0) == 0) comment = first.substr(2);
  if (!comment.empty() && comment.back() == '\r') comment.pop_back();
  in.clear();
  in.seekg(0);
  const auto summary = ipwkit::read_overlap_csv(in);
  const fs::path dir = out.empty() ? fs::path(".") : fs::path(out);
  fs::create_directories(dir);
  write_file(dir / "overlap.svg", ipwkit::render_overlap_svg(summary, comment));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inverse probability weighting for citation effects of categories"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ipwkit::library_version()));

  AnalysisFlags run_flags, balance_flags, effects_flags;
  auto* run = app.add_subcommand("run", "Full analysis: scores, overlap, balance, effects");
  add_analysis_flags(run, run_flags);
  auto* balance = app.add_subcommand("balance", "Covariate balance before and after IPW");
  add_analysis_flags(balance, balance_flags);
  auto* effects = app.add_subcommand("effects", "Category means and effects after IPW");
  add_analysis_flags(effects, effects_flags);

  std::string overlap_csv, plot_out;
  auto* plot = app.add_subcommand("plot-overlap", "Render overlap.csv as box plots (SVG)");
  plot->add_option("overlap", overlap_csv, "overlap.csv from a previous run")->required();
  plot->add_option("--out", plot_out, "Output directory");

  std::string synth_config, synth_out;
  std::uint64_t synth_seed = 0;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus with known effects");
  synth->add_option("--config", synth_config, "Generator config (JSON)")->required();
  synth->add_option("--seed", synth_seed, "Random seed");
  synth->add_option("--out", synth_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*run) return run_analysis(run_flags, ipwkit::Command::kRun);
    if (*balance) return run_analysis(balance_flags, ipwkit::Command::kBalance);
    if (*effects) return run_analysis(effects_flags, ipwkit::Command::kEffects);
    if (*plot) return run_plot(overlap_csv, plot_out);
    if (*synth) return run_synth(synth_config, synth_seed, synth_out);
  } catch (const ipwkit::NumericalError& e) {
    std::cerr << "ipwkit: numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const ipwkit::DataError& e) {
    std::cerr << "ipwkit: data error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "ipwkit: error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}
