#include "xqa/cli.hpp"

#include <algorithm>
#include <iostream>
#include <sstream>
#include <map>
#include <memory>
#include <optional>
#include <thread>

#include "CLI11.hpp"
#include "json_util.hpp"
#include "xqa/calibration.hpp"
#include "xqa/datamodel.hpp"
#include "xqa/error.hpp"
#include "xqa/format.hpp"
#include "xqa/qa_client.hpp"
#include "xqa/rating_service.hpp"
#include "xqa/rating_store.hpp"
#include "xqa/report.hpp"
#include "xqa/rules.hpp"

namespace xqa::cli {
namespace {

namespace fs = std::filesystem;

struct CommonOptions {
  std::vector<std::string> annotations;
  std::vector<std::string> predictions;
  std::string ratings;
  std::string scored;
  std::string format = "text";
  std::string out;
  std::string vote = "majority";
  bool raw = false;
  std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
};

void emit(const std::string& content, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
  } else {
    detail::write_file(path, content);
  }
}

std::vector<data::AnnotationSet> load_all_annotations(const std::vector<std::string>& paths, std::ostream& err) {
  std::vector<data::AnnotationSet> sets;
  for (const auto& p : paths) {
    sets.push_back(data::load_annotations(p));
    for (const auto& w : sets.back().warnings) err << "warning: " << w << '\n';
  }
  return sets;
}

std::vector<data::PredictionSet> load_all_predictions(const std::vector<std::string>& paths) {
  std::vector<data::PredictionSet> sets;
  for (const auto& p : paths) sets.push_back(data::load_predictions(p));
  return sets;
}

void report_mismatches(const std::vector<report::Mismatch>& mismatches, std::ostream& err) {
  const auto list = [](const std::vector<std::string>& ids) {
    std::string s;
    for (std::size_t i = 0; i < ids.size() && i < 10; ++i) s += (i ? ", " : "") + ids[i];
    if (ids.size() > 10) s += ", ...";
    return s;
  };
  for (const auto& m : mismatches) {
    if (!m.missing_predictions.empty()) {
      err << "warning: model '" << m.model_id << "' has no prediction for " << m.missing_predictions.size()
          << " question(s) of '" << m.dataset_id << "' (scored as empty answers): " << list(m.missing_predictions)
          << '\n';
    }
    if (!m.unknown_predictions.empty()) {
      err << "warning: model '" << m.model_id << "' has " << m.unknown_predictions.size()
          << " prediction(s) for unknown questions (ignored): " << list(m.unknown_predictions) << '\n';
    }
  }
}

// Scored instances either from a pre-scored file or by scoring predictions.
std::vector<report::ScoredInstance> scored_instances(const CommonOptions& opt, std::ostream& err,
                                                     std::vector<report::Mismatch>* mismatches) {
  if (!opt.scored.empty()) {
    if (!opt.annotations.empty() || !opt.predictions.empty()) {
      throw UsageError("--scored cannot be combined with --annotations/--predictions");
    }
    return report::load_scored(opt.scored);
  }
  if (opt.annotations.empty() || opt.predictions.empty()) {
    throw UsageError("need --annotations and --predictions (or --scored)");
  }
  const auto annotations = load_all_annotations(opt.annotations, err);
  const auto predictions = load_all_predictions(opt.predictions);
  std::optional<report::HumanVerdicts> verdicts;
  if (!opt.ratings.empty()) {
    verdicts = report::aggregate_verdicts(data::latest_ratings(data::read_ratings(opt.ratings)),
                                          report::parse_vote_rule(opt.vote));
  }
  const report::ScoringInput input{
      .annotations = annotations,
      .predictions = predictions,
      .verdicts = verdicts ? &*verdicts : nullptr,
      .options = {.normalize = !opt.raw},
      .threads = opt.threads,
  };
  auto result = report::score_predictions(input);
  report_mismatches(result.mismatches, err);
  if (mismatches != nullptr) *mismatches = std::move(result.mismatches);
  return std::move(result.instances);
}

void add_scoring_options(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--annotations", opt.annotations, "Annotation file(s), SQuAD-style JSON");
  cmd->add_option("--predictions", opt.predictions, "Prediction file(s)");
  cmd->add_option("--ratings", opt.ratings, "Human ratings JSONL");
  cmd->add_option("--scored", opt.scored, "Pre-scored instances JSON instead of annotations/predictions");
  cmd->add_option("--format", opt.format, "Output format")->check(CLI::IsMember({"text", "csv", "json"}));
  cmd->add_option("--out", opt.out, "Output file (default stdout)");
  cmd->add_option("--vote", opt.vote, "Combine several raters by majority, any or all")
      ->check(CLI::IsMember({"majority", "any", "all"}));
  cmd->add_flag("--raw", opt.raw, "Score raw text without normalization");
  cmd->add_option("--threads", opt.threads, "Scoring threads")->check(CLI::PositiveNumber);
}

// ---------------------------------------------------------------------------

int cmd_evaluate(const CommonOptions& opt, const std::string& group_by, const std::string& scored_out,
                 std::ostream& out, std::ostream& err) {
  std::vector<report::Mismatch> mismatches;
  const auto instances = scored_instances(opt, err, &mismatches);
  if (!scored_out.empty()) detail::write_file(scored_out, report::scored_to_json(instances));
  auto rep = report::build_report(instances, report::parse_group_by(group_by));
  rep.mismatches = std::move(mismatches);
  if (opt.format == "csv") {
    emit(report::render_csv(rep), opt.out, out);
  } else if (opt.format == "json") {
    emit(report::render_json(rep), opt.out, out);
  } else {
    emit(report::render_text(rep), opt.out, out);
  }
  return 0;
}

int cmd_calibrate(const CommonOptions& opt, const std::string& fit_by, std::size_t k, std::uint64_t seed,
                  const std::string& weights_csv, std::ostream& out, std::ostream& err) {
  if (opt.scored.empty() && opt.ratings.empty()) throw UsageError("calibrate needs --ratings (or --scored)");
  const auto instances = scored_instances(opt, err, nullptr);

  std::vector<std::pair<std::pair<std::string, std::string>, std::vector<calibration::Sample>>> groups;
  for (const auto& inst : instances) {
    if (!inst.human) continue;
    std::pair<std::string, std::string> key{inst.dataset_id, inst.model_id};
    if (fit_by == "dataset") key.second = "*";
    if (fit_by == "model") key.first = "*";
    if (fit_by == "all") key = {"*", "*"};
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == key; });
    if (it == groups.end()) {
      groups.push_back({key, {}});
      it = std::prev(groups.end());
    }
    it->second.push_back({inst.scores, *inst.human, inst.dataset_id + "/" + inst.document_id});
  }
  if (groups.empty()) throw DataError("too few samples: no rated instances");

  std::vector<calibration::FitReport> reports;
  for (const auto& [key, samples] : groups) {
    calibration::FitReport rep;
    try {
      rep = calibration::fit_weights(samples, key.first, key.second);
      if (k >= 2) {
        rep.cv_accuracy = calibration::cross_validated_accuracy(samples, k, seed);
        rep.cv_folds = k;
      }
    } catch (const UsageError& e) {
      throw DataError("(" + key.first + ", " + key.second + "): " + e.what());
    } catch (const DataError& e) {
      throw DataError("(" + key.first + ", " + key.second + "): " + e.what());
    }
    reports.push_back(std::move(rep));
  }

  std::optional<calibration::WeightComparison> cmp;
  if (reports.size() >= 2) {
    cmp = calibration::compare_weights(reports);
  } else {
    err << "note: only one fit; weight comparison skipped\n";
  }
  if (!weights_csv.empty()) {
    if (!cmp) throw UsageError("--weights-csv needs at least two fitted groups");
    detail::write_file(weights_csv, calibration::comparison_to_csv(*cmp));
  }

  if (opt.format == "json") {
    emit(calibration::fit_reports_to_json(reports), opt.out, out);
  } else if (opt.format == "csv") {
    if (!cmp) throw UsageError("CSV output needs at least two fitted groups");
    emit(calibration::comparison_to_csv(*cmp), opt.out, out);
  } else {
    std::ostringstream text;
    for (const auto& r : reports) {
      text << r.dataset_id << " / " << r.model_id << ": n=" << r.sample_count << " w_em=" << fixed(r.weights.w_em)
           << " w_lev=" << fixed(r.weights.w_lev) << " w_f1=" << fixed(r.weights.w_f1)
           << " w_rge=" << fixed(r.weights.w_rge) << " intercept=" << fixed(r.weights.intercept)
           << " r2=" << fixed(r.r_squared) << " accuracy=" << fixed(r.accuracy);
      if (r.cv_accuracy) text << " cv_accuracy=" << fixed(*r.cv_accuracy) << " (k=" << r.cv_folds << ")";
      text << '\n';
    }
    if (cmp) text << '\n' << calibration::render_weight_bars(*cmp);
    emit(text.str(), opt.out, out);
  }
  return 0;
}

struct ExtractOptions {
  std::string documents;
  std::string rules;
  std::string endpoint;
  std::string out;
  std::string model_id = "qa-endpoint";
  std::string dataset_id;
  std::string hyperparameters;
  std::size_t window = 256;
  std::size_t doc_stride = 0;
  int top_k = 3;
  std::size_t parallelism = 1;
  int timeout_ms = 30000;
};

int cmd_extract(const ExtractOptions& opt, std::ostream& out, std::ostream& err) {
  const auto documents = qa::load_documents(opt.documents);
  const auto book = rules::load_rules(opt.rules);

  qa::QueryConfig config;
  config.window = opt.window;
  if (!opt.hyperparameters.empty()) {
    config = qa::QueryConfig::from(data::load_hyperparameters(opt.hyperparameters), opt.window);
  }
  if (opt.doc_stride > 0) config.doc_stride = opt.doc_stride;
  config.top_k = opt.top_k;
  config.parallelism = opt.parallelism;
  qa::chunk_context(0, config.window, config.doc_stride);  // validates window/stride up front

  qa::HttpQaEndpoint endpoint(opt.endpoint, std::chrono::milliseconds(opt.timeout_ms));
  data::PredictionSet preds;
  preds.model_id = opt.model_id;
  if (!opt.dataset_id.empty()) preds.dataset_id = opt.dataset_id;

  std::size_t failed_documents = 0;
  for (const auto& doc : documents) {
    bool failed = false;
    for (const auto& q : book.questions) {
      const auto scope = q.scope ? qa::restrict_scope(doc, *q.scope) : qa::full_scope(doc);
      qa::QueryResult result;
      try {
        result = qa::query_model(endpoint, q.question, scope.text, config);
      } catch (const TransportError& e) {
        err << "error: document '" << doc.document_id << "', question '" << q.question_key << "': " << e.what()
            << '\n';
        failed = true;
        break;
      }
      if (result.partial) {
        err << "warning: document '" << doc.document_id << "', question '" << q.question_key << "': "
            << result.timed_out_chunks.size() << " chunk(s) timed out; answer may be incomplete\n";
      }
      const auto merged = qa::merge_predictions(result.candidates);
      data::PredictionRecord rec;
      rec.question_id = doc.document_id + "#" + q.question_key;
      rec.model_id = preds.model_id;
      if (!merged.empty()) {
        const auto& best = merged.front();
        const auto verdict = q.validation ? qa::validate_answer(best.text, *q.validation) : qa::Verdict::accept();
        if (verdict.accepted) {
          rec.answer_text = best.text;
          rec.confidence = best.confidence;
        } else {
          rec.rejection_reason = verdict.reason;
        }
      }
      preds.records.push_back(std::move(rec));
    }
    if (failed) ++failed_documents;
  }

  if (opt.out.empty()) {
    const auto tmp = fs::temp_directory_path() / "xqa-extract.json";
    data::save_predictions(preds, tmp);
    out << detail::read_file(tmp);
    fs::remove(tmp);
  } else {
    data::save_predictions(preds, opt.out);
  }
  if (failed_documents > 0) {
    err << failed_documents << " of " << documents.size() << " document(s) failed\n";
    return static_cast<int>(ExitCode::kTransport);
  }
  return 0;
}

int cmd_split(const std::string& annotations, std::size_t k, double test_fraction, std::uint64_t seed,
              const std::string& out_dir, std::ostream& out, std::ostream& err) {
  const auto set = data::load_annotations(annotations);
  for (const auto& w : set.warnings) err << "warning: " << w << '\n';
  const auto plan = data::make_splits(set.document_ids(), k, test_fraction, seed);
  if (out_dir.empty()) {
    out << data::split_plan_to_json(plan);
    return 0;
  }
  fs::create_directories(out_dir);
  detail::write_file(fs::path(out_dir) / "split_plan.json", data::split_plan_to_json(plan));
  for (std::size_t f = 0; f < plan.fold_count(); ++f) {
    detail::write_file(fs::path(out_dir) / ("fold_" + std::to_string(f) + ".json"), data::fold_to_json(plan, f));
  }
  out << "wrote " << plan.fold_count() << " fold file(s) to " << out_dir << '\n';
  return 0;
}

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string session = "default";
  std::uint64_t seed = 0;
  std::size_t margin = 500;
  bool full_context = false;
  bool blind = false;
  std::string rules;
  std::string ui_dir;
};

int cmd_serve(const CommonOptions& opt, const ServeOptions& serve, std::ostream& out, std::ostream& err) {
  if (opt.annotations.empty() || opt.predictions.empty() || opt.ratings.empty()) {
    throw UsageError("serve needs --annotations, --predictions and --ratings");
  }
  const auto annotations = load_all_annotations(opt.annotations, err);
  const auto predictions = load_all_predictions(opt.predictions);
  std::optional<rules::RuleBook> book;
  if (!serve.rules.empty()) book = rules::load_rules(serve.rules);
  auto items = rating::build_items(annotations, predictions, book ? &*book : nullptr);

  rating::RatingService service;
  service.add_session(std::make_unique<rating::RatingSession>(
      serve.session, std::move(items), std::make_shared<data::RatingStore>(opt.ratings),
      rating::SessionOptions{serve.seed, serve.margin, serve.full_context, serve.blind}));
  rating::RatingServer server(service, serve.ui_dir.empty() ? std::nullopt : std::optional<fs::path>(serve.ui_dir));
  const int port = server.bind(serve.host, serve.port);
  out << "serving session '" << serve.session << "' on http://" << serve.host << ':' << port << '\n' << std::flush;
  return server.listen() ? 0 : static_cast<int>(ExitCode::kTransport);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Extractive QA evaluation, calibration and rating toolkit", "xqa-eval"};
  app.require_subcommand(1);

  CommonOptions common;

  auto* evaluate = app.add_subcommand("evaluate", "Score predictions and render a report");
  add_scoring_options(evaluate, common);
  std::string group_by = "question_key";
  std::string scored_out;
  evaluate->add_option("--group-by", group_by, "question_key, dataset or model")
      ->check(CLI::IsMember({"question_key", "dataset", "model"}));
  evaluate->add_option("--scored-out", scored_out, "Also write per-instance scores as JSON");

  auto* calibrate = app.add_subcommand("calibrate", "Fit combined-metric weights against human ratings");
  add_scoring_options(calibrate, common);
  std::string fit_by = "dataset-model";
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::string weights_csv;
  calibrate->add_option("--fit-by", fit_by, "Fit one model per dataset-model, dataset, model or all")
      ->check(CLI::IsMember({"dataset-model", "dataset", "model", "all"}));
  calibrate->add_option("--k", k, "Cross-validation folds for out-of-sample accuracy (0 = off)");
  calibrate->add_option("--seed", seed, "Fold assignment seed");
  calibrate->add_option("--weights-csv", weights_csv, "Write the weight comparison CSV here");

  auto* extract = app.add_subcommand("extract", "Query a QA endpoint and write predictions");
  ExtractOptions ex;
  extract->add_option("--documents", ex.documents, "Document regions JSON")->required();
  extract->add_option("--rules", ex.rules, "Question/scope/validation rules JSON")->required();
  extract->add_option("--endpoint", ex.endpoint, "QA endpoint base URL")->required();
  extract->add_option("--out", ex.out, "Predictions output file (default stdout)");
  extract->add_option("--model-id", ex.model_id, "model_id written to the predictions");
  extract->add_option("--dataset-id", ex.dataset_id, "dataset_id written to the predictions");
  extract->add_option("--hyperparameters", ex.hyperparameters, "Hyperparameter JSON providing doc_stride");
  extract->add_option("--window", ex.window, "Words per request")->check(CLI::PositiveNumber);
  extract->add_option("--doc-stride", ex.doc_stride, "Overlapping words between chunks");
  extract->add_option("--top-k", ex.top_k, "Answers requested per chunk")->check(CLI::PositiveNumber);
  extract->add_option("--parallelism", ex.parallelism, "Concurrent requests per document")->check(CLI::PositiveNumber);
  extract->add_option("--timeout-ms", ex.timeout_ms, "Per-request timeout")->check(CLI::PositiveNumber);

  auto* split = app.add_subcommand("split", "Document-level train/test splits");
  std::string split_annotations;
  std::size_t split_k = 5;
  double test_fraction = 0.2;
  std::uint64_t split_seed = 0;
  std::string split_out;
  split->add_option("--annotations", split_annotations, "Annotation file")->required();
  split->add_option("--k", split_k, "Number of folds (1 = single split)")->check(CLI::PositiveNumber);
  split->add_option("--test-fraction", test_fraction, "Test share for a single split")->check(CLI::Range(0.0, 1.0));
  split->add_option("--seed", split_seed, "Shuffle seed");
  split->add_option("--out", split_out, "Directory for split_plan.json and fold files (default: plan to stdout)");

  auto* serve = app.add_subcommand("serve", "Run the human rating service");
  CommonOptions serve_common;
  ServeOptions sv;
  serve->add_option("--annotations", serve_common.annotations, "Annotation file(s)")->required();
  serve->add_option("--predictions", serve_common.predictions, "Prediction file(s)")->required();
  serve->add_option("--ratings", serve_common.ratings, "Ratings JSONL store")->required();
  serve->add_option("--rules", sv.rules, "Rules JSON with rating criteria");
  serve->add_option("--host", sv.host, "Bind address");
  serve->add_option("--port", sv.port, "Port (0 = any free port)");
  serve->add_option("--session", sv.session, "Session id");
  serve->add_option("--seed", sv.seed, "Queue shuffle seed");
  serve->add_option("--margin", sv.margin, "Context characters shown around the answer");
  serve->add_flag("--full-context", sv.full_context, "Show the full context instead of an excerpt");
  serve->add_flag("--blind", sv.blind, "Hide gold answers from raters");
  serve->add_option("--ui-dir", sv.ui_dir, "Directory with the rating UI assets");

  std::vector<std::string> argv_storage{"xqa-eval"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kUsage);
  }

  try {
    if (evaluate->parsed()) return cmd_evaluate(common, group_by, scored_out, out, err);
    if (calibrate->parsed()) return cmd_calibrate(common, fit_by, k, seed, weights_csv, out, err);
    if (extract->parsed()) return cmd_extract(ex, out, err);
    if (split->parsed()) return cmd_split(split_annotations, split_k, test_fraction, split_seed, split_out, out, err);
    if (serve->parsed()) return cmd_serve(serve_common, sv, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kUsage);
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kData);
  } catch (const TransportError& e) {
    err << "transport error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kTransport);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kData);
  }
  return static_cast<int>(ExitCode::kUsage);
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace xqa::cli
