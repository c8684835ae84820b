// trapline: dataset preparation, the ingest/classify/store service,
// evaluation and reporting.

#include <csignal>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "trapline/annotations/dataset.hpp"
#include "trapline/annotations/export.hpp"
#include "trapline/annotations/voc.hpp"
#include "trapline/eval/report.hpp"
#include "trapline/eval/sample_size.hpp"
#include "trapline/eval/trial.hpp"
#include "trapline/inference/http_backend.hpp"
#include "trapline/inference/mock_backend.hpp"
#include "trapline/ingest/imap_mailbox.hpp"
#include "trapline/ingest/mailbox.hpp"
#include "trapline/metrics/average_precision.hpp"
#include "trapline/metrics/interchange.hpp"
#include "trapline/service/config.hpp"
#include "trapline/service/pipeline.hpp"
#include "trapline/train/profile.hpp"

namespace fs = std::filesystem;
using namespace trapline;

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

/// A stop source tripped by SIGINT/SIGTERM.
class SignalStop {
 public:
  SignalStop() {
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    watcher_ = std::jthread([this](std::stop_token st) {
      while (!st.stop_requested()) {
        if (g_interrupted) {
          source_.request_stop();
          return;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
      }
    });
  }
  std::stop_token token() const { return source_.get_token(); }

 private:
  std::stop_source source_;
  std::jthread watcher_;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed) {
  if (seed) return *seed;
  std::random_device rd;
  const std::uint64_t s = (static_cast<std::uint64_t>(rd()) << 32) | rd();
  std::cerr << "seed: " << s << " (pass --seed " << s << " to reproduce)\n";
  return s;
}

void write_output(const std::optional<std::string>& path, const std::string& text) {
  if (!path || *path == "-") {
    std::cout << text;
    return;
  }
  write_file_text(*path, text);
  std::cerr << "wrote " << *path << '\n';
}

std::string percent_or_na(const std::optional<double>& v) { return eval::format_percent(v); }

// ---------------------------------------------------------------------------
// prepare

struct PrepareArgs {
  std::string annotations;
  std::string images;
  std::string out;
  double split = 0.9;
  std::optional<std::uint64_t> seed;
};

fs::path with_suffix(const fs::path& out, const std::string& tag) {
  return out.parent_path() / (out.stem().string() + "." + tag + out.extension().string());
}

int run_prepare(const PrepareArgs& a) {
  const std::uint64_t seed = resolve_seed(a.seed);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(a.annotations)) {
    if (e.is_regular_file() && e.path().extension() == ".xml") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error("no .xml annotations in " + a.annotations);

  std::vector<AnnotatedImage> parsed;
  std::vector<std::string> warnings;
  for (const auto& f : files) {
    try {
      auto p = annotations::parse_annotation_file(f);
      for (auto& w : p.warnings) warnings.push_back(f.filename().string() + ": " + w);
      parsed.push_back(std::move(p.image));
    } catch (const Error& e) {
      warnings.push_back(f.filename().string() + ": skipped: " + e.what());
    }
  }
  auto filtered = annotations::filter_unusable(parsed);
  for (auto& w : filtered.warnings) warnings.push_back(std::move(w));
  if (filtered.kept.empty()) throw Error("no usable annotated images");

  auto split = annotations::split_dataset(std::span<const AnnotatedImage>(filtered.kept), a.split, seed);
  std::set<std::string> train_ids(split.train.begin(), split.train.end());
  std::vector<AnnotatedImage> train, val;
  for (const auto& img : filtered.kept) (train_ids.count(img.image_id) ? train : val).push_back(img);

  const fs::path out(a.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  const auto provider = annotations::directory_provider(a.images);
  const auto train_path = with_suffix(out, "train");
  const auto val_path = with_suffix(out, "val");
  auto tr = annotations::export_records(train, provider, train_path);
  auto vr = annotations::export_records(val, provider, val_path);

  auto summary = annotations::dataset_summary(filtered.kept);
  nlohmann::json classes = nlohmann::json::object();
  for (const auto& [label, n] : summary.class_counts) classes[label] = n;
  nlohmann::json j = {
      {"seed", seed},
      {"split_ratio", a.split},
      {"annotation_files", files.size()},
      {"parsed", parsed.size()},
      {"kept", filtered.kept.size()},
      {"removed", filtered.removed.size()},
      {"tags", summary.tag_count},
      {"mean_width", summary.mean_width},
      {"mean_height", summary.mean_height},
      {"class_counts", classes},
      {"train", {{"path", train_path.string()}, {"images", train.size()}, {"written", tr.written}, {"missing_images", tr.skipped}}},
      {"validation", {{"path", val_path.string()}, {"images", val.size()}, {"written", vr.written}, {"missing_images", vr.skipped}}},
      {"warnings", warnings}};
  const auto summary_path = with_suffix(out, "summary").replace_extension(".json");
  write_file_text(summary_path, j.dump(2) + "\n");
  std::cout << "images kept " << filtered.kept.size() << " of " << parsed.size() << ", train " << tr.written
            << ", validation " << vr.written << "\n"
            << "records: " << train_path.string() << ", " << val_path.string() << "\n"
            << "summary: " << summary_path.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// serve

struct ServeArgs {
  std::optional<std::string> config;
  std::optional<std::string> db;
  std::optional<std::string> drop_dir;
  std::optional<std::string> backend_url;
  std::optional<std::string> mock_fixtures;
  std::optional<unsigned> workers;
  bool dry_run = false;
};

int run_serve(const ServeArgs& a) {
  auto cfg = service::load_config(a.config ? std::optional<fs::path>(*a.config) : std::nullopt);
  if (a.db) cfg.db = *a.db;
  if (a.drop_dir) cfg.drop_dir = *a.drop_dir;
  if (a.backend_url) cfg.backend.endpoint = *a.backend_url;
  if (a.mock_fixtures) cfg.mock_fixtures = *a.mock_fixtures;
  if (a.workers) cfg.backend.workers = *a.workers;
  cfg.validate();
  if (!cfg.drop_dir && !cfg.imap) throw ValidationError("nothing to ingest: give --drop-dir or an imap config");
  if (a.dry_run && !cfg.drop_dir) throw ValidationError("--dry-run needs a drop directory");

  std::unique_ptr<inference::DetectionBackend> backend;
  if (cfg.mock_fixtures) {
    backend = std::make_unique<inference::MockBackend>(fs::path(*cfg.mock_fixtures));
  } else {
    backend = std::make_unique<inference::HttpBackend>(cfg.backend);
    auto h = inference::backend_health(*backend, cfg.backend);
    log::info("classify", "backend_health",
              {{"endpoint", cfg.backend.endpoint}, {"status", inference::to_string(h.status)},
               {"latency_ms", h.latency.count()}});
  }

  store::Store db(cfg.db, cfg.backend.confidence_floor);
  for (const auto& cam : cfg.cameras) {
    if (!db.camera(cam.camera_id)) db.register_camera(cam);
  }
  store::AlertDispatcher dispatcher(store::store_recorder(db));

  service::PipelineOptions opt;
  opt.queue_capacity = cfg.queue_capacity;
  opt.workers = cfg.backend.workers;
  opt.dry_run = a.dry_run;
  opt.scan_interval = cfg.scan_interval;
  opt.redrive_rounds = cfg.redrive_rounds;
  opt.rules = cfg.alerts;
  service::Pipeline pipeline(*backend, db, cfg.backend, opt, interruptible_sleep, &dispatcher);

  SignalStop stop;
  service::PipelineStats stats;
  if (a.dry_run) {
    ingest::DirectorySource source(*cfg.drop_dir);
    stats = pipeline.run_once(source, stop.token());
  } else {
    std::optional<ingest::DirectorySource> source;
    if (cfg.drop_dir) source.emplace(*cfg.drop_dir);
    std::unique_ptr<ingest::ImapMailbox> mailbox;
    std::jthread poller;
    if (cfg.imap) {
      mailbox = std::make_unique<ingest::ImapMailbox>(*cfg.imap);
      ingest::PollerConfig pc;
      pc.interval = cfg.poll_interval;
      poller = std::jthread([&, pc](std::stop_token st) {
        ingest::MailPoller mp(*mailbox, pipeline.queue(), pc);
        try {
          std::stop_source merged;
          std::stop_callback a1(st, [&] { merged.request_stop(); });
          std::stop_callback a2(stop.token(), [&] { merged.request_stop(); });
          mp.run(merged.get_token());
        } catch (const std::exception& e) {
          log::error("poller", "stopped", {{"error", e.what()}});
        }
      });
    }
    stats = pipeline.run(source ? &*source : nullptr, stop.token());
  }
  dispatcher.flush();
  dispatcher.shutdown();

  auto j = service::to_json(stats);
  j["dry_run"] = a.dry_run;
  j["db"] = cfg.db;
  j["parked_remaining"] = db.parked_count();
  j["alerts_delivered"] = dispatcher.delivered();
  j["alerts_failed"] = dispatcher.failed();
  std::cout << j.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct TrialArgs {
  std::string fixtures;
  std::size_t folds = 10;
  std::size_t per_class = 25;
  std::optional<std::uint64_t> seed;
  std::string mode = "auto";
  std::vector<std::string> classes;
  std::optional<std::uint64_t> population;
  double margin = 0.05;
  double confidence = 0.95;
  std::string format = "text";
  std::optional<std::string> out;
};

int run_eval_trial(const TrialArgs& a) {
  std::ifstream in(a.fixtures);
  if (!in) throw Error("cannot open " + a.fixtures);
  auto records = eval::read_trial_records(in, a.fixtures);
  eval::TrialOptions opt;
  opt.spec.folds = a.folds;
  opt.spec.per_class = a.per_class;
  opt.spec.classes = a.classes;
  if (a.mode == "replay") {
    opt.mode = eval::TrialMode::kReplay;
  } else if (a.mode == "sample") {
    opt.mode = eval::TrialMode::kSample;
  } else if (a.mode != "auto") {
    throw ValidationError("--mode must be auto, replay or sample");
  }
  const bool samples = opt.mode == eval::TrialMode::kSample ||
                       (opt.mode == eval::TrialMode::kAuto &&
                        !std::all_of(records.begin(), records.end(), [](auto& r) { return r.fold.has_value(); }));
  opt.spec.seed = samples ? resolve_seed(a.seed) : a.seed.value_or(0);
  opt.population = a.population;
  opt.margin = a.margin;
  opt.confidence = a.confidence;
  const auto format = eval::parse_report_format(a.format);
  auto outcome = eval::run_trial(records, opt);
  write_output(a.out, eval::emit_report(outcome, format));
  return 0;
}

struct DetectionsArgs {
  std::string interchange;
  std::optional<std::string> out;
};

int run_eval_detections(const DetectionsArgs& a) {
  std::ifstream in(a.interchange);
  if (!in) throw Error("cannot open " + a.interchange);
  auto images = metrics::read_image_evals(in);
  if (images.empty()) throw ValidationError("no images in " + a.interchange);
  auto s = metrics::summarize_detections(images);
  std::ostringstream out;
  auto line = [&](const char* name, const std::optional<double>& v) {
    out << name << " = ";
    if (v) {
      out << std::fixed << std::setprecision(4) << *v << '\n';
    } else {
      out << "n/a\n";
    }
  };
  line("AP  @[IoU=0.50:0.95 | area=all   | maxDets=100]", s.map);
  line("AP  @[IoU=0.50      | area=all   | maxDets=100]", s.map_50);
  line("AP  @[IoU=0.75      | area=all   | maxDets=100]", s.map_75);
  line("AP  @[IoU=0.50:0.95 | area=small | maxDets=100]", s.map_small);
  line("AP  @[IoU=0.50:0.95 | area=medium| maxDets=100]", s.map_medium);
  line("AP  @[IoU=0.50:0.95 | area=large | maxDets=100]", s.map_large);
  line("AR  @[IoU=0.50:0.95 | area=all   | maxDets=1  ]", s.ar_1);
  line("AR  @[IoU=0.50:0.95 | area=all   | maxDets=10 ]", s.ar_10);
  line("AR  @[IoU=0.50:0.95 | area=all   | maxDets=100]", s.ar_100);
  line("AR  @[IoU=0.50:0.95 | area=small | maxDets=100]", s.ar_100_small);
  line("AR  @[IoU=0.50:0.95 | area=medium| maxDets=100]", s.ar_100_medium);
  line("AR  @[IoU=0.50:0.95 | area=large | maxDets=100]", s.ar_100_large);
  out << "\nper-class AP @[IoU=0.50]\n";
  for (const auto& label : metrics::labels_in(images)) {
    out << "  " << std::left << std::setw(28) << label.canonical_name
        << percent_or_na(metrics::average_precision(images, label, 0.5)) << '\n';
  }
  write_output(a.out, out.str());
  return 0;
}

struct SampleSizeArgs {
  std::uint64_t population = 0;
  double margin = 0.05;
  double confidence = 0.95;
};

int run_sample_size(const SampleSizeArgs& a) {
  std::cout << eval::required_sample_size(a.population, a.margin, a.confidence) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// config

struct ConfigArgs {
  std::optional<std::string> out;
  std::string file;
};

int run_config_emit(const ConfigArgs& a) {
  write_output(a.out, train::render_profile(train::baseline_profile()));
  return 0;
}

int run_config_validate(const ConfigArgs& a) {
  train::TrainProfile p;
  try {
    p = train::parse_profile(read_file_text(a.file));
  } catch (const ValidationError& e) {
    std::cerr << a.file << ": " << e.what() << '\n';
    return 1;
  }
  std::cout << a.file << ": ok (" << p.augmentations.size() << " augmentations, lr "
            << train::detail::format_double(p.learning_rate) << ", batch " << p.batch_size << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// report

struct ReportArgs {
  std::string db = "trapline.db";
  std::optional<std::string> from;
  std::optional<std::string> to;
  std::optional<std::string> camera;
  std::string format = "text";
  std::optional<std::string> export_kind;
  std::optional<std::string> out;
};

std::optional<Timestamp> parse_time_arg(const std::optional<std::string>& s, const char* flag) {
  if (!s) return std::nullopt;
  auto t = parse_iso8601(*s);
  if (!t) throw ValidationError(std::string(flag) + ": '" + *s + "' is not an ISO-8601 time");
  return t;
}

int run_report(const ReportArgs& a) {
  if (!fs::exists(a.db)) throw Error("database not found: " + a.db);
  store::Store db(a.db);
  store::CountQuery q;
  q.from = parse_time_arg(a.from, "--from");
  q.to = parse_time_arg(a.to, "--to");
  q.camera_id = a.camera;

  if (a.export_kind) {
    std::ostringstream out;
    std::size_t n = 0;
    if (*a.export_kind == "detections") {
      store::DetectionQuery dq;
      dq.from = q.from;
      dq.to = q.to;
      dq.camera_id = q.camera_id;
      n = db.export_detections(dq, out);
    } else if (*a.export_kind == "images") {
      n = db.export_image_predictions(out, q);
    } else {
      throw ValidationError("--export must be detections or images");
    }
    write_output(a.out, out.str());
    std::cerr << "exported " << n << " rows\n";
    return 0;
  }

  auto c = db.species_counts(q);
  if (a.format == "json") {
    nlohmann::json j = {{"total_images", c.total_images},
                        {"detection_images", c.detection_images},
                        {"blank_images", c.blank_images},
                        {"total_detection_records", c.total_detection_records},
                        {"detection_records", c.detection_records},
                        {"species_images", c.species_images}};
    write_output(a.out, j.dump(2) + "\n");
    return 0;
  }
  if (a.format != "text") throw ValidationError("--format must be text or json");
  std::ostringstream out;
  out << "images            " << c.total_images << '\n'
      << "  with detections " << c.detection_images << '\n'
      << "  blank           " << c.blank_images << '\n'
      << "detection records " << c.total_detection_records << "\n\n"
      << std::left << std::setw(28) << "species" << std::right << std::setw(10) << "records" << std::setw(10)
      << "images" << '\n';
  for (const auto& [label, n] : c.detection_records) {
    auto it = c.species_images.find(label);
    out << std::left << std::setw(28) << label << std::right << std::setw(10) << n << std::setw(10)
        << (it == c.species_images.end() ? 0 : it->second) << '\n';
  }
  write_output(a.out, out.str());
  return 0;
}

// ---------------------------------------------------------------------------
// mock-backend

struct MockArgs {
  std::string fixtures;
  std::string host = "127.0.0.1";
  int port = 8500;
};

int run_mock_backend(const MockArgs& a) {
  inference::MockBackend backend{fs::path(a.fixtures)};
  inference::MockDetectionServer server(backend);
  server.start(a.host, a.port);
  std::cout << "mock backend on " << server.endpoint() << " with " << backend.fixture_count() << " fixtures"
            << std::endl;
  SignalStop stop;
  while (!stop.token().stop_requested()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trapline: camera-trap image pipeline"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "debug, info, warn or error")
      ->check(CLI::IsMember({"debug", "info", "warn", "error"}));

  int rc = 0;
  std::function<int()> action;

  PrepareArgs prep;
  auto* cmd_prepare = app.add_subcommand("prepare", "Parse annotations, filter, split and write record files");
  cmd_prepare->add_option("--annotations", prep.annotations, "Directory of annotation XML files")->required();
  cmd_prepare->add_option("--images", prep.images, "Directory holding the annotated images")->required();
  cmd_prepare->add_option("--out", prep.out, "Output path; .train/.val/.summary are derived from it")->required();
  cmd_prepare->add_option("--split", prep.split, "Training fraction")->capture_default_str();
  cmd_prepare->add_option("--seed", prep.seed, "Split seed (printed when omitted)");
  cmd_prepare->callback([&] { action = [&] { return run_prepare(prep); }; });

  ServeArgs serve;
  auto* cmd_serve = app.add_subcommand("serve", "Run ingest, classification and storage");
  cmd_serve->add_option("--config", serve.config, "JSON service config");
  cmd_serve->add_option("--db", serve.db, "SQLite database path");
  cmd_serve->add_option("--drop-dir", serve.drop_dir, "Camera drop directory");
  cmd_serve->add_option("--backend-url", serve.backend_url, "Detection backend endpoint");
  cmd_serve->add_option("--mock-fixtures", serve.mock_fixtures, "Answer from fixture files instead of a backend");
  cmd_serve->add_option("--workers", serve.workers, "Classify workers");
  cmd_serve->add_flag("--dry-run", serve.dry_run, "Process the drop directory once, deliver no alerts, exit");
  cmd_serve->callback([&] { action = [&] { return run_serve(serve); }; });

  auto* cmd_eval = app.add_subcommand("eval", "Evaluation: fold trials, detection metrics, sample size");
  cmd_eval->require_subcommand(1);
  TrialArgs trial;
  auto* cmd_trial = cmd_eval->add_subcommand("trial", "Per-fold metrics, fold averages and pooled confusion");
  cmd_trial->add_option("--fixtures", trial.fixtures, "JSONL of image_id/true_label/predicted_label[/fold]")->required();
  cmd_trial->add_option("--folds", trial.folds, "Folds to sample")->capture_default_str();
  cmd_trial->add_option("--per-class", trial.per_class, "Images per class per fold")->capture_default_str();
  cmd_trial->add_option("--seed", trial.seed, "Sampling seed (printed when omitted)");
  cmd_trial->add_option("--mode", trial.mode, "auto, replay (use the fold column) or sample")->capture_default_str();
  cmd_trial->add_option("--classes", trial.classes, "Class order; default is fixture order")->delimiter(',');
  cmd_trial->add_option("--population", trial.population, "Population for the sample-size line");
  cmd_trial->add_option("--margin", trial.margin, "Margin of error")->capture_default_str();
  cmd_trial->add_option("--confidence", trial.confidence, "Confidence level")->capture_default_str();
  cmd_trial->add_option("--format", trial.format, "text, markdown or json")->capture_default_str();
  cmd_trial->add_option("--out", trial.out, "Report path (stdout when omitted)");
  cmd_trial->callback([&] { action = [&] { return run_eval_trial(trial); }; });

  DetectionsArgs dets;
  auto* cmd_dets = cmd_eval->add_subcommand("detections", "AP/AR summary over a detection interchange file");
  cmd_dets->add_option("--interchange", dets.interchange, "JSONL of image_id/truths/detections")->required();
  cmd_dets->add_option("--out", dets.out, "Report path (stdout when omitted)");
  cmd_dets->callback([&] { action = [&] { return run_eval_detections(dets); }; });

  SampleSizeArgs ss;
  auto* cmd_ss = cmd_eval->add_subcommand("sample-size", "Cochran sample size with finite-population correction");
  cmd_ss->add_option("--population", ss.population, "Population size")->required();
  cmd_ss->add_option("--margin", ss.margin, "Margin of error")->capture_default_str();
  cmd_ss->add_option("--confidence", ss.confidence, "0.90, 0.95 or 0.99")->capture_default_str();
  cmd_ss->callback([&] { action = [&] { return run_sample_size(ss); }; });

  auto* cmd_config = app.add_subcommand("config", "Training profile");
  cmd_config->require_subcommand(1);
  ConfigArgs conf;
  auto* cmd_emit = cmd_config->add_subcommand("emit", "Write the baseline training profile");
  cmd_emit->add_option("--out", conf.out, "Profile path (stdout when omitted)");
  cmd_emit->callback([&] { action = [&] { return run_config_emit(conf); }; });
  auto* cmd_validate = cmd_config->add_subcommand("validate", "Parse and check a profile file");
  cmd_validate->add_option("file", conf.file, "Profile file")->required();
  cmd_validate->callback([&] { action = [&] { return run_config_validate(conf); }; });

  ReportArgs rep;
  auto* cmd_report = app.add_subcommand("report", "Species counts or exports from the store");
  cmd_report->add_option("--db", rep.db, "SQLite database path")->capture_default_str();
  cmd_report->add_option("--from", rep.from, "Inclusive start, ISO-8601");
  cmd_report->add_option("--to", rep.to, "Exclusive end, ISO-8601");
  cmd_report->add_option("--camera", rep.camera, "Camera id");
  cmd_report->add_option("--format", rep.format, "text or json")->capture_default_str();
  cmd_report->add_option("--export", rep.export_kind, "Export JSONL instead: detections or images");
  cmd_report->add_option("--out", rep.out, "Output path (stdout when omitted)");
  cmd_report->callback([&] { action = [&] { return run_report(rep); }; });

  MockArgs mock;
  auto* cmd_mock = app.add_subcommand("mock-backend", "Serve fixture detections over the backend HTTP protocol");
  cmd_mock->add_option("--fixtures", mock.fixtures, "Fixture directory")->required();
  cmd_mock->add_option("--host", mock.host, "Listen address")->capture_default_str();
  cmd_mock->add_option("--port", mock.port, "Listen port (0 picks one)")->capture_default_str();
  cmd_mock->callback([&] { action = [&] { return run_mock_backend(mock); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  if (log_level == "debug") log::Logger::instance().set_min_level(log::Level::kDebug);
  if (log_level == "warn") log::Logger::instance().set_min_level(log::Level::kWarn);
  if (log_level == "error") log::Logger::instance().set_min_level(log::Level::kError);

  try {
    rc = action ? action() : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return rc;
}
