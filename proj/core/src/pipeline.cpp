#include "ipwkit/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ipwkit/balance.hpp"
#include "ipwkit/error.hpp"
#include "ipwkit/estimator.hpp"
#include "ipwkit/report.hpp"
#include "ipwkit/rng.hpp"
#include "ipwkit/svg_plot.hpp"

namespace ipwkit {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> scheme_by_appearance(const Corpus& corpus) {
  std::vector<std::string> scheme;
  for (const auto& r : corpus.records)
    for (const auto& c : r.categories)
      if (std::find(scheme.begin(), scheme.end(), c) == scheme.end())
        scheme.push_back(c);
  return scheme;
}

const char* command_name(Command c) {
  switch (c) {
    case Command::kRun: return "run";
    case Command::kBalance: return "balance";
    case Command::kEffects: return "effects";
  }
  return "run";
}

class OutputDir {
 public:
  explicit OutputDir(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw DataError("cannot create output directory " + dir_.string() + ": " +
                            ec.message());
  }

  void write(const std::string& name, const std::string& content) {
    const fs::path path = dir_ / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << content;
    out.close();
    if (!out) throw DataError("error writing " + path.string());
    if (std::find(files_.begin(), files_.end(), name) == files_.end())
      files_.push_back(name);
  }

  template <typename Fn>
  void emit(const std::string& name, Fn&& fn) {
    std::ostringstream buf;
    fn(buf);
    write(name, buf.str());
  }

  const std::vector<std::string>& files() const { return files_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config, Command command,
                            std::ostream* log) {
  const std::string canon = canonical_json(config);
  PipelineResult result;
  result.config_hash = hex64(fnv1a64(canon));
  const Provenance prov{result.config_hash, config.seed};

  OutputDir out(config.out_dir);
  std::string stage = "load";
  auto note = [&](const std::string& s) {
    stage = s;
    if (log) *log << "ipwkit: " << s << '\n';
  };

  auto write_metadata = [&](const std::string& status, const std::string& error) {
    nlohmann::json meta;
    meta["tool"] = "ipwkit";
    meta["version"] = std::string(library_version());
    meta["command"] = command_name(command);
    meta["status"] = status;
    meta["stage"] = stage;
    if (!error.empty()) meta["error"] = error;
    meta["config"] = nlohmann::json::parse(canon);
    meta["config_hash"] = result.config_hash;
    meta["seed"] = config.seed;
    meta["rng"] = std::string(kRngAlgorithm);
    meta["records"] = result.records;
    meta["dropped"] = result.dropped;
    auto files = out.files();
    files.erase(std::remove(files.begin(), files.end(), "run-metadata.json"), files.end());
    meta["files"] = files;
    if (status != "ok") meta["partial"] = !files.empty();
    out.write("run-metadata.json", meta.dump(2) + "\n");
  };

  try {
    note("load");
    Corpus corpus = load_corpus(config.input, config.schema);
    if (config.single_category_only) {
      const std::size_t before = corpus.records.size();
      corpus = filter_single_category(corpus);
      if (log)
        *log << "ipwkit: kept " << corpus.records.size() << " of " << before
             << " single-category records\n";
    }

    note("labels");
    std::vector<std::string> scheme = config.scheme;
    if (!config.scheme_path.empty()) scheme = read_scheme(config.scheme_path);
    if (scheme.empty()) scheme = scheme_by_appearance(corpus);
    LabeledCorpus labeled = resolve_multilabel(corpus, scheme, config.seed);
    if (!config.aggregate_path.empty())
      labeled = aggregate_to_scheme(labeled, read_mapping(config.aggregate_path));
    result.dropped = labeled.dropped;
    if (log && labeled.dropped > 0)
      *log << "ipwkit: dropped " << labeled.dropped
           << " records with no category in the scheme\n";
    const ImputedCorpus imputed = impute_missing(labeled);
    result.records = imputed.labeled.size();
    const int k = labeled.num_treatments();
    const auto& labels = imputed.labeled.labels;
    const Eigen::VectorXd y = imputed.outcome();
    const auto& names = imputed.labeled.scheme;

    note("effects_before");
    // Unit weights give the unadjusted summaries; weighted fields are
    // overwritten once the scores exist.
    WeightVector unit{Eigen::VectorXd::Ones(static_cast<Eigen::Index>(labels.size())), {}};
    const IpwEstimates before = ipw_estimates(y, unit, labels, k);

    BalancePass balance_before;
    const bool want_balance = command != Command::kEffects;
    if (want_balance) {
      note("balance_before");
      balance_before = balance_pass(imputed, nullptr, config.families, config.fit);
    }

    note("propensity");
    const StandardizedMains mains = standardize(imputed);
    const DesignMatrix design = expand_interactions(mains, config.interactions);
    const PropensityMatrix raw = estimate_propensities(design, labels, k, config.fit);
    const PropensityMatrix clipped = clip_scores(raw, config.clip);
    if (log)
      *log << "ipwkit: " << clipped.clipped_count() << " scores clipped to ["
           << config.clip.lo << ", " << config.clip.hi << "]\n";
    if (command == Command::kRun) {
      std::vector<std::string> ids;
      ids.reserve(imputed.labeled.records.size());
      for (const auto& r : imputed.labeled.records) ids.push_back(r.id);
      out.emit("propensities.csv", [&](std::ostream& o) {
        write_propensities_csv(o, ids, labels, clipped, names, prov);
      });

      note("overlap");
      const OverlapSummary overlap = overlap_summary(clipped, labels, names);
      out.emit("overlap.csv",
               [&](std::ostream& o) { write_overlap_csv(o, overlap, prov.line()); });
      out.write("overlap.svg", render_overlap_svg(overlap, prov.line()));
    }

    if (want_balance) {
      note("balance_after");
      const BalancePass balance_after =
          balance_pass(imputed, &clipped, config.families, config.fit);
      const BalanceReport report = combine_balance(imputed, balance_before, balance_after);
      out.emit("balance.csv", [&](std::ostream& o) { write_balance_csv(o, report, prov); });
      out.emit("balance.md",
               [&](std::ostream& o) { write_balance_markdown(o, report, prov); });
    }

    if (command != Command::kBalance) {
      note("effects_after");
      const WeightVector w = ipw_weights(clipped, labels);
      IpwEstimates est = ipw_estimates(y, w, labels, k);
      for (int t = 0; t < k; ++t) {
        auto& c = est.categories[static_cast<std::size_t>(t)];
        c.mean = before.categories[static_cast<std::size_t>(t)].mean;
        c.sd = before.categories[static_cast<std::size_t>(t)].sd;
      }
      out.emit("effects.csv", [&](std::ostream& o) { write_effects_csv(o, est, names, prov); });
      out.emit("effects.md",
               [&](std::ostream& o) { write_effects_markdown(o, est, names, prov); });
      out.emit("ace.csv", [&](std::ostream& o) {
        write_ace_csv(o, ace_matrix(est, EffectBasis::kUnweighted),
                      ace_matrix(est, EffectBasis::kWeighted), names, prov);
      });
    }
    note("done");
    write_metadata("ok", "");
  } catch (const std::exception& e) {
    try {
      write_metadata("failed", e.what());
    } catch (...) {
    }
    throw;
  }
  result.files = out.files();
  return result;
}

}  // namespace ipwkit
