/*
 * Copyright 2026 The pcad Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "pcad/cli.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

#include "CLI11.hpp"
#include "json.hpp"
#include "pcad/config.h"
#include "pcad/error.h"
#include "pcad/evaluation.h"
#include "pcad/feature_io.h"
#include "pcad/manifest.h"
#include "pcad/pipeline.h"
#include "pcad/scoring.h"
#include "pcad/subspace_model.h"
#include "pcad/synthgen.h"

namespace pcad {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kScoresFile = "scores.jsonl";
constexpr const char* kRunFile = "run.json";

// Flags that mirror RunConfig keys one-to-one. Values given on the command
// line override the --config file, which overrides the defaults.
struct ConfigFlags {
  std::string config_path;
  double tau = 0, rho = 0, sigma = 0, pro_fpr_limit = 0;
  std::uint32_t resolution = 0, k = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<int> layers;
  std::string normalization, model_precision, pixel_auroc_method;
  std::map<std::string, CLI::Option*> options;

  void Register(CLI::App* app) {
    app->add_option("--config", config_path, "JSON config file");
    options["tau"] = app->add_option("--tau", tau, "explained variance");
    options["rho"] = app->add_option("--rho", rho, "tail percent");
    options["sigma"] = app->add_option("--sigma", sigma, "smoothing sigma");
    options["resolution"] = app->add_option("--resolution", resolution);
    options["k"] = app->add_option("--k", k, "support images per sample");
    options["seeds"] =
        app->add_option("--seeds", seeds)->delimiter(',')->expected(1, -1);
    options["pro_fpr_limit"] = app->add_option("--pro_fpr_limit", pro_fpr_limit);
    options["normalization"] =
        app->add_option("--normalization", normalization, "raw | per_image");
    options["layers"] =
        app->add_option("--layers", layers)->delimiter(',')->expected(1, -1);
    options["model_precision"] =
        app->add_option("--model_precision", model_precision, "f64 | f32");
    options["pixel_auroc_method"] = app->add_option(
        "--pixel_auroc_method", pixel_auroc_method, "exact | histogram");
  }

  RunConfig Resolve() const {
    RunConfig config;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) {
        throw Error(ErrorCode::kIoFailure, "cannot open " + config_path);
      }
      json j;
      try {
        in >> j;
      } catch (const json::exception& ex) {
        throw Error(ErrorCode::kInvalidConfig, ex.what());
      }
      config = RunConfigFromJson(j, config);
    }
    json overrides = json::object();
    auto set = [&](const char* key, const json& value) {
      if (options.at(key)->count() > 0) overrides[key] = value;
    };
    set("tau", tau);
    set("rho", rho);
    set("sigma", sigma);
    set("resolution", resolution);
    set("k", k);
    set("seeds", seeds);
    set("pro_fpr_limit", pro_fpr_limit);
    set("normalization", normalization);
    set("layers", layers);
    set("model_precision", model_precision);
    set("pixel_auroc_method", pixel_auroc_method);
    return RunConfigFromJson(overrides, config);
  }
};

fs::path SeedModelPath(const fs::path& out, std::uint64_t seed,
                       bool multiple) {
  if (!multiple) return out;
  fs::path p = out;
  p.replace_filename(out.stem().string() + ".seed" + std::to_string(seed) +
                     out.extension().string());
  return p;
}

fs::path SidecarPath(const fs::path& model) {
  return fs::path(model.string() + ".json");
}

void WriteJsonFile(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  out << j.dump(2) << "\n";
}

json ReadJsonFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::kInvalidArgument,
                path.string() + ": " + std::string(ex.what()));
  }
}

std::string FileStem(const std::string& image_id) {
  std::string s = image_id;
  for (char& c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
    if (!ok) c = '_';
  }
  return s.empty() ? "image" : s;
}

// Writes the PGM and RAWF maps for one image and returns its JSONL record.
class ScoreWriter {
 public:
  explicit ScoreWriter(const fs::path& dir) : dir_(dir) {
    fs::create_directories(dir_ / "maps");
    jsonl_.open(dir_ / kScoresFile, std::ios::trunc);
    if (!jsonl_) {
      throw Error(ErrorCode::kIoFailure, "cannot write scores in " + dir.string());
    }
  }

  void Add(const std::string& image_id, const ScoredImage& scored) {
    std::string stem = FileStem(image_id);
    for (int n = 1; !used_.insert(stem).second; ++n) {
      stem = FileStem(image_id) + "_" + std::to_string(n);
    }
    const std::string map_file = "maps/" + stem + ".pgm";
    const std::string raw_file = "maps/" + stem + ".rawf";
    WriteMapPgmFile(scored.pixel_map, dir_ / map_file);
    WriteRawMapFile(scored.raw_pixels, dir_ / raw_file);
    const json record = {{"image_id", image_id},
                         {"image_score", scored.image_score.value},
                         {"map_file", map_file},
                         {"raw_file", raw_file}};
    jsonl_ << record.dump() << "\n";
    ++count_;
  }

  std::size_t count() const { return count_; }

 private:
  fs::path dir_;
  std::ofstream jsonl_;
  std::set<std::string> used_;
  std::size_t count_ = 0;
};

int FinishReport(const EvalReport& report, const fs::path& out_path,
                 std::ostream& out, std::ostream& err) {
  WriteJsonFile(out_path, EvalReportToJson(report));
  out << FormatSummaryTable(report);
  bool undefined = report.mean.AnyMissing();
  for (const auto& s : report.samples) {
    for (const auto& w : s.warnings) err << "warning: " << w << "\n";
    undefined = undefined || s.metrics.AnyMissing();
  }
  return undefined ? kExitMetricUndefined : kExitOk;
}

int CmdFit(const std::string& manifest_path, const std::string& out_path,
           const RunConfig& config, std::ostream& out) {
  const Manifest manifest = LoadManifest(manifest_path);
  const bool multiple = config.seeds.size() > 1;
  for (std::uint64_t seed : config.seeds) {
    const FittedSample sample = FitSample(manifest, config, seed);
    const fs::path path = SeedModelPath(out_path, seed, multiple);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    SaveModel(sample.model, path, config.model_precision);
    const auto curve = sample.model.ExplainedVarianceCurve();
    WriteJsonFile(SidecarPath(path),
                  {{"seed", seed},
                   {"k", config.k},
                   {"support", sample.support},
                   {"fit_row_count", sample.model.fit_row_count},
                   {"dim", sample.model.dim},
                   {"rank", sample.model.rank},
                   {"tau", sample.model.tau},
                   {"explained_variance", curve},
                   {"config", RunConfigToJson(config)}});
    out << "fit seed=" << seed << " n=" << sample.model.fit_row_count
        << " D=" << sample.model.dim << " r=" << sample.model.rank
        << " explained=" << curve[sample.model.rank - 1] << " -> "
        << path.string() << "\n";
  }
  return kExitOk;
}

int CmdScore(const std::string& model_path, const std::string& manifest_path,
             const std::string& out_dir, const std::string& role,
             const RunConfig& config, std::ostream& out) {
  const SubspaceModel model = LoadModel(model_path);
  const Manifest manifest = LoadManifest(manifest_path);
  std::vector<const ManifestItem*> items;
  for (const auto& item : manifest.items) {
    if (role == "all" || (role == "test" && item.role == Role::kTest) ||
        (role == "train" && item.role == Role::kTrain)) {
      items.push_back(&item);
    }
  }
  if (items.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no " + role + " items to score");
  }
  ScoreWriter writer(out_dir);
  for (const ManifestItem* item : items) {
    writer.Add(item->image_id,
               ScoreItem(model, manifest, *item, config).scored);
  }
  json run = {{"model", model_path},
              {"seed", nullptr},
              {"k", config.k},
              {"support", json::array()},
              {"config", RunConfigToJson(config)}};
  const fs::path sidecar = SidecarPath(model_path);
  if (fs::exists(sidecar)) {
    const json meta = ReadJsonFile(sidecar);
    run["seed"] = meta.value("seed", json(nullptr));
    run["k"] = meta.value("k", config.k);
    run["support"] = meta.value("support", json::array());
  }
  WriteJsonFile(fs::path(out_dir) / kRunFile, run);
  out << "scored " << writer.count() << " images -> " << out_dir << "\n";
  return kExitOk;
}

std::vector<fs::path> ExpandScoreDirs(const std::vector<std::string>& dirs) {
  std::vector<fs::path> out;
  for (const auto& d : dirs) {
    if (fs::exists(fs::path(d) / kScoresFile)) {
      out.emplace_back(d);
      continue;
    }
    std::vector<fs::path> children;
    if (fs::is_directory(d)) {
      for (const auto& e : fs::directory_iterator(d)) {
        if (e.is_directory() && fs::exists(e.path() / kScoresFile)) {
          children.push_back(e.path());
        }
      }
    }
    if (children.empty()) {
      throw Error(ErrorCode::kIoFailure, "no " + std::string(kScoresFile) +
                                             " under " + d);
    }
    std::sort(children.begin(), children.end());
    out.insert(out.end(), children.begin(), children.end());
  }
  return out;
}

SampleReport EvaluateScoreDir(const fs::path& dir, const Manifest& manifest,
                              const RunConfig& config, std::uint32_t& k) {
  SampleReport sample;
  if (fs::exists(dir / kRunFile)) {
    const json run = ReadJsonFile(dir / kRunFile);
    if (run.contains("seed") && !run.at("seed").is_null()) {
      sample.seed = run.at("seed").get<std::uint64_t>();
    }
    if (run.contains("k")) k = run.at("k").get<std::uint32_t>();
    sample.support = run.value("support", std::vector<std::string>{});
  }
  std::map<std::string, json> records;
  std::ifstream in(dir / kScoresFile);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json r;
    try {
      r = json::parse(line);
    } catch (const json::exception& ex) {
      throw Error(ErrorCode::kInvalidArgument,
                  "bad score record: " + std::string(ex.what()));
    }
    records[r.at("image_id").get<std::string>()] = r;
  }
  std::vector<TestImageResult> results;
  for (const ManifestItem* item : manifest.Items(Role::kTest)) {
    const auto it = records.find(item->image_id);
    if (it == records.end()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "no score for test image " + item->image_id + " in " +
                      dir.string());
    }
    TestImageResult r;
    r.image_id = item->image_id;
    r.label = item->image_label;
    r.image_score = it->second.at("image_score").get<double>();
    r.raw_pixels = ReadRawMapFile(dir / it->second.at("raw_file").get<std::string>());
    if (item->mask_file) {
      r.mask = ReadMaskPgmFile(manifest.Resolve(*item->mask_file));
    }
    results.push_back(std::move(r));
  }
  sample.metrics = ComputeMetrics(results, config, sample.warnings);
  return sample;
}

int CmdEval(const std::vector<std::string>& score_dirs,
            const std::string& manifest_path, std::string out_path,
            const RunConfig& config, std::ostream& out, std::ostream& err) {
  const Manifest manifest = LoadManifest(manifest_path);
  const auto dirs = ExpandScoreDirs(score_dirs);
  EvalReport report;
  report.category = manifest.category;
  report.k = config.k;
  report.config = RunConfigToJson(config);
  for (const auto& dir : dirs) {
    report.samples.push_back(EvaluateScoreDir(dir, manifest, config, report.k));
  }
  report.mean = MeanMetrics(report.samples);
  if (out_path.empty()) out_path = (dirs.front() / "eval.json").string();
  return FinishReport(report, out_path, out, err);
}

int CmdBatched(const std::string& manifest_path, const std::string& out_dir,
               const RunConfig& config, std::ostream& out, std::ostream& err) {
  const Manifest manifest = LoadManifest(manifest_path);
  const auto tests = manifest.Items(Role::kTest);
  if (tests.empty()) {
    throw Error(ErrorCode::kEmptyInput, "manifest has no test items");
  }
  const auto maps = LoadFeatures(manifest, tests);
  const SubspaceModel model = FitBatched(maps, config.tau);
  fs::create_directories(out_dir);
  SaveModel(model, fs::path(out_dir) / "model.ssm", config.model_precision);

  ScoreWriter writer(out_dir);
  std::vector<TestImageResult> results;
  for (std::size_t i = 0; i < tests.size(); ++i) {
    const auto [h, w] = PixelTarget(*tests[i], config);
    ScoredItem s{tests[i], ScoreImage(model, maps[i], h, w,
                                      ScoringParams{config.rho, config.sigma})};
    writer.Add(tests[i]->image_id, s.scored);
    results.push_back(ToTestResult(manifest, s));
  }
  WriteJsonFile(fs::path(out_dir) / kRunFile,
                {{"model", (fs::path(out_dir) / "model.ssm").string()},
                 {"seed", config.seeds.front()},
                 {"k", 0},
                 {"support", json::array()},
                 {"config", RunConfigToJson(config)}});

  EvalReport report;
  report.category = manifest.category;
  report.k = 0;
  report.config = RunConfigToJson(config);
  SampleReport sample;
  sample.seed = config.seeds.front();
  sample.metrics = ComputeMetrics(results, config, sample.warnings);
  report.samples.push_back(std::move(sample));
  report.mean = MeanMetrics(report.samples);
  out << "batched fit n=" << model.fit_row_count << " D=" << model.dim
      << " r=" << model.rank << "\n";
  return FinishReport(report, fs::path(out_dir) / "eval.json", out, err);
}

int CmdSynth(const std::string& spec_path, const std::string& out_dir,
             std::ostream& out) {
  const SynthSpec spec = SynthSpecFromJson(ReadJsonFile(spec_path));
  const SynthCategory category = GenerateSynthetic(spec);
  const Manifest manifest = WriteSynthCategory(category, out_dir);
  out << "synth " << spec.category << ": " << category.train.size()
      << " train views, " << category.test.size() << " test images -> "
      << out_dir << "\n";
  return kExitOk;
}

void ReportError(std::ostream& err, std::string_view code,
                 const std::string& message) {
  err << json{{"error", code}, {"message", message}}.dump() << "\n";
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"PCA subspace anomaly detection", "pcad"};
  app.require_subcommand(1);

  ConfigFlags fit_flags, score_flags, eval_flags, batched_flags;
  std::string manifest, out_path, model_path, role = "test", spec_path;
  std::vector<std::string> score_dirs;

  auto* fit = app.add_subcommand("fit", "fit subspace models on support sets");
  fit->add_option("--manifest", manifest)->required();
  fit->add_option("--out", out_path, "model path (seed-suffixed if several)")
      ->required();
  fit_flags.Register(fit);

  auto* score = app.add_subcommand("score", "score images against a model");
  score->add_option("--model", model_path)->required();
  score->add_option("--manifest", manifest)->required();
  score->add_option("--out", out_path, "output directory")->required();
  score->add_option("--role", role, "test | train | all")
      ->check(CLI::IsMember({"test", "train", "all"}));
  score_flags.Register(score);

  auto* eval = app.add_subcommand("eval", "compute metrics for score dirs");
  eval->add_option("--scores", score_dirs, "score directory (repeatable)")
      ->required();
  eval->add_option("--manifest", manifest)->required();
  eval->add_option("--out", out_path, "report path");
  eval_flags.Register(eval);

  auto* batched =
      app.add_subcommand("batched", "fit and score on the unlabeled test set");
  batched->add_option("--manifest", manifest)->required();
  batched->add_option("--out", out_path, "output directory")->required();
  batched_flags.Register(batched);

  auto* synth = app.add_subcommand("synth", "generate a synthetic category");
  synth->add_option("--spec", spec_path)->required();
  synth->add_option("--out", out_path, "output directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    ReportError(err, "InvalidArgument", e.what());
    return kExitInputError;
  }

  try {
    if (fit->parsed()) {
      return CmdFit(manifest, out_path, fit_flags.Resolve(), out);
    }
    if (score->parsed()) {
      return CmdScore(model_path, manifest, out_path, role,
                      score_flags.Resolve(), out);
    }
    if (eval->parsed()) {
      return CmdEval(score_dirs, manifest, out_path, eval_flags.Resolve(), out,
                     err);
    }
    if (batched->parsed()) {
      return CmdBatched(manifest, out_path, batched_flags.Resolve(), out, err);
    }
    return CmdSynth(spec_path, out_path, out);
  } catch (const Error& e) {
    ReportError(err, ErrorCodeName(e.code()), e.what());
  } catch (const fs::filesystem_error& e) {
    ReportError(err, "IoFailure", e.what());
  } catch (const json::exception& e) {
    ReportError(err, "InvalidArgument", e.what());
  }
  return kExitInputError;
}

}  // namespace pcad
