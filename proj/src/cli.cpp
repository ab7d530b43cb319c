#include "slideagg/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "slideagg/baselines.hpp"
#include "slideagg/csv.hpp"
#include "slideagg/errors.hpp"
#include "slideagg/features.hpp"
#include "slideagg/ingest.hpp"
#include "slideagg/synth.hpp"
#include "slideagg/widedeep.hpp"

namespace slideagg {

namespace fs = std::filesystem;

std::string heatmap_csv(const SlideRecord& slide) {
  if (slide.patches.empty()) return {};
  const auto cell = [](std::int64_t v) { return v / kPatchSize; };
  std::int64_t x0 = cell(slide.patches[0].x), x1 = x0, y0 = cell(slide.patches[0].y), y1 = y0;
  for (const auto& p : slide.patches) {
    x0 = std::min(x0, cell(p.x));
    x1 = std::max(x1, cell(p.x));
    y0 = std::min(y0, cell(p.y));
    y1 = std::max(y1, cell(p.y));
  }
  std::map<std::pair<std::int64_t, std::int64_t>, double> grid;
  for (const auto& p : slide.patches) {
    auto [it, inserted] = grid.try_emplace({cell(p.y), cell(p.x)}, p.prob_malignant);
    if (!inserted) it->second = std::max(it->second, p.prob_malignant);
  }
  std::string out;
  for (std::int64_t r = y0; r <= y1; ++r) {
    for (std::int64_t c = x0; c <= x1; ++c) {
      if (c > x0) out += ',';
      if (const auto it = grid.find({r, c}); it != grid.end()) out += csv::format_real(it->second);
    }
    out += '\n';
  }
  return out;
}

namespace {

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string manifest;
  std::string features;
  std::string out;
  std::string model = "widedeep";
  std::string model_file;
  std::string slide;
  std::string classifiers;
  int k = 5;
  std::uint64_t seed = 0;
  int epochs = 10000;
  double lr = 1e-3;
  int jobs = 1;
  SynthConfig synth;
};

void write_text(const fs::path& path, const std::string& text) {
  auto out = csv::open_for_write(path);
  out << text;
  if (!out) throw Error(Errc::WriteFailed, path.string());
}

void require_file(const std::string& path, const char* flag) {
  if (path.empty()) throw UsageError(std::string(flag) + " is required");
  if (!fs::is_regular_file(path)) throw Error(Errc::MissingFile, path);
}

fs::path prepare_out_dir(const std::string& out) {
  if (out.empty()) throw UsageError("--out is required");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (!fs::is_directory(out)) throw Error(Errc::WriteFailed, "cannot create output directory " + out);
  return fs::path(out);
}

void check_data_inputs(const RunConfig& rc) {
  if (!rc.features.empty() && !rc.manifest.empty()) throw UsageError("give either --manifest or --features, not both");
  if (!rc.features.empty())
    require_file(rc.features, "--features");
  else
    require_file(rc.manifest, "--manifest (or --features)");
}

Dataset load_features(const RunConfig& rc, std::ostream& err) {
  check_data_inputs(rc);
  if (!rc.features.empty()) return read_feature_csv(rc.features);
  const auto manifest = load_manifest(rc.manifest);
  const auto slides = load_slides(manifest, rc.jobs);
  err << "extracted features for " << slides.size() << " slides\n";
  return extract_dataset(slides, rc.jobs);
}

ClassifierConfigs classifier_configs(const RunConfig& rc) {
  ClassifierConfigs configs;
  configs.network.epochs = rc.epochs;
  configs.network.learning_rate = rc.lr;
  configs.network.seed = rc.seed;
  return configs;
}

std::vector<ClassifierKind> parse_kinds(const std::string& list) {
  if (list.empty()) return all_classifier_kinds();
  std::vector<ClassifierKind> kinds;
  for (auto token : csv::split(list)) {
    const auto kind = parse_classifier_kind(csv::trim(token));
    if (!kind) throw UsageError("unknown classifier '" + std::string(token) + "'");
    if (std::find(kinds.begin(), kinds.end(), *kind) == kinds.end()) kinds.push_back(*kind);
  }
  return kinds;
}

ManifestEntry slide_entry(const std::string& path) {
  require_file(path, "--slide");
  return {fs::path(path).stem().string(), Label::Normal, path};
}

int cmd_synth(const RunConfig& rc, std::ostream& err) {
  const auto dir = prepare_out_dir(rc.out);
  const auto slides = generate_dataset(rc.synth);
  write_dataset(slides, dir);
  err << "wrote " << slides.size() << " slides and manifest.csv to " << dir.string() << "\n";
  return kExitOk;
}

int cmd_validate(const RunConfig& rc, std::ostream& out) {
  require_file(rc.manifest, "--manifest");
  const auto summary = validate_dataset(load_manifest(rc.manifest));
  out << "malignant," << summary.malignant << "\nnormal," << summary.normal << "\n";
  out << "zero_patch_slides," << summary.zero_patch_slides.size() << "\n";
  for (const auto& id : summary.zero_patch_slides) out << "zero_patch," << id << "\n";
  for (const auto& [id, what] : summary.problems) out << "problem," << id << "," << what << "\n";
  return summary.ok() ? kExitOk : kExitValidation;
}

int cmd_extract(const RunConfig& rc, std::ostream& err) {
  require_file(rc.manifest, "--manifest");
  const auto dir = prepare_out_dir(rc.out);
  const auto data = load_features(rc, err);
  write_feature_csv(data, dir / "features.csv");
  return kExitOk;
}

int cmd_cv(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  check_data_inputs(rc);
  const auto kind = parse_classifier_kind(rc.model);
  if (!kind) throw UsageError("unknown model '" + rc.model + "'");
  const auto dir = prepare_out_dir(rc.out);
  const auto data = load_features(rc, err);
  const auto folds = dataset_folds(data, rc.k, rc.seed);
  const auto report = cross_validate(data, make_factory(*kind, classifier_configs(rc)), folds, rc.seed, rc.jobs);
  write_text(dir / "folds.csv", fold_manifest_csv(data, folds));
  write_report(report, dir / ("cv_" + rc.model + ".csv"), dir / ("cv_" + rc.model + ".json"));
  out << report_csv(report);
  return kExitOk;
}

int cmd_compare(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  check_data_inputs(rc);
  const auto kinds = parse_kinds(rc.classifiers);
  const auto dir = prepare_out_dir(rc.out);
  const auto data = load_features(rc, err);
  const auto table = run_comparison(data, rc.k, rc.seed, kinds, classifier_configs(rc), rc.jobs);
  write_text(dir / "folds.csv", fold_manifest_csv(data, table.folds));
  for (const auto& r : table.reports)
    write_report(r, dir / ("cv_" + r.model + ".csv"), dir / ("cv_" + r.model + ".json"));
  write_text(dir / "comparison.csv", comparison_csv(table));
  out << comparison_csv(table);
  return kExitOk;
}

int cmd_train(const RunConfig& rc, std::ostream& err) {
  check_data_inputs(rc);
  const auto dir = prepare_out_dir(rc.out);
  const auto data = load_features(rc, err);
  auto config = classifier_configs(rc).network;
  const auto model = train_widedeep(data, config);
  save_widedeep(model, dir / "model.json");
  err << "saved " << (dir / "model.json").string() << "\n";
  return kExitOk;
}

int cmd_predict(const RunConfig& rc, std::ostream& out) {
  require_file(rc.model_file, "--model-file");
  const auto entry = slide_entry(rc.slide);
  const auto model = load_widedeep(rc.model_file);
  const auto prediction = predict_slide(model, extract_features(load_slide(entry)));
  out << to_string(prediction.label) << ' ' << csv::format_real(prediction.p_malignant) << '\n';
  return kExitOk;
}

int cmd_heatmap(const RunConfig& rc) {
  const auto entry = slide_entry(rc.slide);
  const auto dir = prepare_out_dir(rc.out);
  write_text(dir / "heatmap.csv", heatmap_csv(load_slide(entry)));
  return kExitOk;
}

int exit_code_for(const Error& e) {
  switch (category(e.code())) {
    case ErrorCategory::Io: return kExitIo;
    case ErrorCategory::Validation: return kExitValidation;
    case ErrorCategory::Pipeline: break;
  }
  // Bad --k or too few slides per class surface from fold assignment.
  return e.code() == Errc::TooFewExamples ? kExitUsage : kExitPipeline;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Slide-level screening from patch-level malignancy predictions", "slideagg"};
  app.require_subcommand(1);
  RunConfig rc;

  auto add_out = [&](CLI::App* sub) { sub->add_option("--out", rc.out, "Output directory")->required(); };
  auto add_data = [&](CLI::App* sub) {
    sub->add_option("--manifest", rc.manifest, "Manifest CSV (slide_id,label,predictions_path)");
    sub->add_option("--features", rc.features, "Feature CSV written by `extract`");
    sub->add_option("--jobs", rc.jobs, "Worker threads for slides and folds")->check(CLI::Range(1, 1024));
  };
  auto add_training = [&](CLI::App* sub) {
    sub->add_option("--seed", rc.seed, "Master seed");
    sub->add_option("--epochs", rc.epochs, "Training epochs")->check(CLI::Range(1, 100000000));
    sub->add_option("--lr", rc.lr, "Adam learning rate")->check(CLI::PositiveNumber);
  };

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  add_out(synth);
  synth->add_option("--seed", rc.synth.seed, "Master seed");
  synth->add_option("--n-per-label", rc.synth.slides_per_label, "Slides per label")->check(CLI::Range(0, 1000000));
  synth->add_option("--grid", rc.synth.grid_extent, "Patches per grid side")->check(CLI::Range(1, 100000));
  synth->add_option("--noise-rate", rc.synth.noise_rate, "False-positive rate")->check(CLI::Range(0.0, 1.0));
  synth->add_option("--blobs-min", rc.synth.blobs_min)->check(CLI::Range(1, 1000));
  synth->add_option("--blobs-max", rc.synth.blobs_max)->check(CLI::Range(1, 1000));
  synth->add_option("--radius-min", rc.synth.blob_radius_min)->check(CLI::NonNegativeNumber);
  synth->add_option("--radius-max", rc.synth.blob_radius_max)->check(CLI::NonNegativeNumber);

  auto* validate = app.add_subcommand("validate", "Summarise a manifest and its slides");
  validate->add_option("--manifest", rc.manifest)->required();

  auto* extract = app.add_subcommand("extract", "Write the 18-feature CSV for a manifest");
  add_out(extract);
  extract->add_option("--manifest", rc.manifest)->required();
  extract->add_option("--jobs", rc.jobs)->check(CLI::Range(1, 1024));

  auto* cv = app.add_subcommand("cv", "Stratified K-fold cross-validation of one model");
  add_out(cv);
  add_data(cv);
  add_training(cv);
  cv->add_option("--model", rc.model, "widedeep|ann|svm|rf|knn");
  cv->add_option("--k", rc.k, "Number of folds")->check(CLI::Range(2, 1000));

  auto* compare = app.add_subcommand("compare", "Cross-validate every classifier on shared folds");
  add_out(compare);
  add_data(compare);
  add_training(compare);
  compare->add_option("--k", rc.k, "Number of folds")->check(CLI::Range(2, 1000));
  compare->add_option("--classifiers", rc.classifiers, "Comma-separated subset of widedeep,ann,svm,rf,knn");

  auto* train = app.add_subcommand("train", "Train the wide & deep model on a whole dataset");
  add_out(train);
  add_data(train);
  add_training(train);

  auto* predict = app.add_subcommand("predict", "Classify one slide with a trained model");
  predict->add_option("--model-file", rc.model_file)->required();
  predict->add_option("--slide", rc.slide, "Patch CSV (x,y,prob_malignant)")->required();

  auto* heatmap = app.add_subcommand("heatmap", "Export a slide's probability grid");
  add_out(heatmap);
  heatmap->add_option("--slide", rc.slide)->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (synth->parsed()) {
      if (rc.synth.blobs_max < rc.synth.blobs_min || rc.synth.blob_radius_max < rc.synth.blob_radius_min)
        throw UsageError("blob ranges need min <= max");
      return cmd_synth(rc, err);
    }
    if (validate->parsed()) return cmd_validate(rc, out);
    if (extract->parsed()) return cmd_extract(rc, err);
    if (cv->parsed()) return cmd_cv(rc, out, err);
    if (compare->parsed()) return cmd_compare(rc, out, err);
    if (train->parsed()) return cmd_train(rc, err);
    if (predict->parsed()) return cmd_predict(rc, out);
    if (heatmap->parsed()) return cmd_heatmap(rc);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitPipeline;
  }
  return kExitUsage;
}

}  // namespace slideagg
