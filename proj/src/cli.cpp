#include "ttscale/cli.hpp"

#include <cstdio>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ttscale/chat_backend.hpp"
#include "ttscale/config.hpp"
#include "ttscale/curation.hpp"
#include "ttscale/eval.hpp"
#include "ttscale/io.hpp"
#include "ttscale/parallel.hpp"
#include "ttscale/plot.hpp"
#include "ttscale/regression.hpp"
#include "ttscale/sampler.hpp"
#include "ttscale/scripted_model.hpp"

namespace ttscale::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Config flags shared by all subcommands. Storage is shared; each
/// subcommand owns its own Option objects.
struct ConfigFlags {
  std::string config_path;
  std::map<std::string, std::string> values;
  std::map<std::string, std::vector<CLI::Option*>> options;
  std::vector<CLI::Option*> config_options;

  void attach(CLI::App* app) {
    config_options.push_back(app->add_option("--config", config_path, "Configuration file"));
    for (const auto& key : Config::keys()) {
      options[key].push_back(app->add_option(flag_for_key(key), values[key], "Sets " + key));
    }
  }

  [[nodiscard]] std::map<std::string, std::string> given() const {
    std::map<std::string, std::string> out;
    for (const auto& [key, opts] : options) {
      for (const auto* opt : opts) {
        if (opt->count() > 0) out[key] = values.at(key);
      }
    }
    return out;
  }

  [[nodiscard]] Config resolve(const std::map<std::string, std::string>& env) const {
    std::optional<fs::path> path;
    if (!config_path.empty()) path = config_path;
    return load_config(path, env, given());
  }
};

struct Context {
  Config config;
  std::map<std::string, std::string> env;
  std::ostream& out;
  std::ostream& err;

  [[nodiscard]] RetryPolicy retry() const {
    RetryPolicy r;
    r.max_retries = config.max_retries;
    return r;
  }

  [[nodiscard]] std::shared_ptr<const Backend> backend(const std::string& model = {}) const {
    if (!config.mock.empty()) return std::make_shared<ScriptedModel>(ScriptedModel::load(config.mock));
    ChatBackendOptions options;
    options.base_url = config.base_url;
    options.model = model.empty() ? config.model : model;
    if (const auto it = env.find(kApiKeyEnv); it != env.end()) options.api_key = it->second;
    return std::make_shared<ChatCompletionsBackend>(options);
  }

  [[nodiscard]] ArtifactHeader header(const std::vector<fs::path>& inputs) const {
    ArtifactHeader h;
    h.config = config.to_json();
    // Where the artifact lands is not part of how it was made.
    h.config["paths"].erase("output");
    for (const auto& p : inputs) h.add_input(p);
    if (!config.mock.empty()) h.add_input(config.mock);
    return h;
  }
};

fs::path require_path(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string(flag) + " is required");
  return value;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::size_t> parse_size_list(const std::string& text, const char* flag) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(text)) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != item.size() || item.front() == '-') {
      throw UsageError(std::string(flag) + ": not a nonnegative integer: " + item);
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw UsageError(std::string(flag) + " is empty");
  return out;
}

template <typename Item>
std::vector<json> to_records(const std::vector<Item>& items) {
  std::vector<json> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back(item.to_json());
  return out;
}

void write_report(const Context& ctx, const std::string& path, const CurationReport& report,
                  const ArtifactHeader& header) {
  if (path.empty()) return;
  report.validate();
  atomic_write(path, json_with_header(header, report.to_json()));
  ctx.err << "wrote " << path << "\n";
}

bool is_trace_file(const fs::path& path) {
  bool traces = false;
  bool seen = false;
  for_each_jsonl(path, [&](const json& j, std::size_t) {
    if (seen) return;
    seen = true;
    traces = j.contains("response") || j.contains("thinking");
  });
  return traces;
}

template <typename Item>
std::vector<Item> load_items(const fs::path& path);

template <>
std::vector<McqQuestion> load_items<McqQuestion>(const fs::path& path) {
  return load_questions(path);
}

template <>
std::vector<TraceRecord> load_items<TraceRecord>(const fs::path& path) {
  return load_traces(path);
}

/// Calls fn(items) with questions or trace records, whichever the file holds.
template <typename Fn>
void with_items(const fs::path& path, Fn&& fn) {
  if (is_trace_file(path)) {
    fn(load_items<TraceRecord>(path));
  } else {
    fn(load_items<McqQuestion>(path));
  }
}

// ---------------------------------------------------------------------------
// curate

struct CurateArgs {
  std::string input;
  std::string report;
  std::string verdicts;
  std::vector<std::string> graders;
  std::string eval_sets;
  std::size_t ngram = kDefaultNgramSize;
  std::size_t n = 0;
  std::string lexicon;
  std::string think_delimiter = "</think>";
};

template <typename Item>
void finish_stage(const Context& ctx, const CurateArgs& args, const std::vector<Item>& input,
                  const StageResult<Item>& result, CurationReport report,
                  const std::vector<fs::path>& inputs) {
  const fs::path out = require_path(ctx.config.output, "--output");
  const auto header = ctx.header(inputs);
  atomic_write(out, jsonl_with_header(header, to_records(result.kept)));
  ctx.out << result.row.name << ": " << input.size() << " -> " << result.kept.size() << "\n";
  report.add_stage(result.row);
  write_report(ctx, args.report, report, header);
}

int curate_filter(const Context& ctx, const CurateArgs& args) {
  const fs::path input = require_path(args.input, "--input");
  std::vector<std::shared_ptr<const Grader>> graders;
  std::vector<std::shared_ptr<const BackendGrader>> live;
  std::vector<fs::path> inputs = {input};
  if (!args.verdicts.empty()) {
    if (!args.graders.empty()) throw UsageError("--verdicts and --grader are mutually exclusive");
    graders = load_recorded_graders(args.verdicts);
    inputs.emplace_back(args.verdicts);
  } else {
    if (args.graders.empty()) throw UsageError("either --verdicts or --grader is required");
    GenerationRequest request;
    request.temperature = ctx.config.temperature;
    request.seed = ctx.config.seed;
    for (const auto& name : args.graders) {
      auto g = std::make_shared<BackendGrader>(name, ctx.backend(name), request, ctx.retry());
      live.push_back(g);
      graders.push_back(g);
    }
  }
  const auto pool = load_questions(input);
  auto result = difficulty_filter(pool, graders, ctx.config.workers);
  for (const auto& g : live) {
    for (const auto& id : g->failures()) {
      ctx.err << "warning: grader " << g->name() << " failed on " << id << "; counted incorrect\n";
    }
  }
  CurationReport report;
  std::string names;
  for (const auto& g : graders) names += (names.empty() ? "" : ",") + g->name();
  report.set_setting("graders", names);
  report.add_stage(count_by_source(kStageInitial, pool));
  finish_stage(ctx, args, pool, result, std::move(report), inputs);
  return kExitOk;
}

int curate_generate(const Context& ctx, const CurateArgs& args) {
  const fs::path input = require_path(args.input, "--input");
  const auto questions = load_questions(input);
  const auto backend = ctx.backend();
  TraceGenerationOptions options;
  options.request_template.temperature = ctx.config.temperature;
  options.request_template.seed = ctx.config.seed;
  options.think_delimiter = args.think_delimiter;
  options.retry = ctx.retry();

  std::vector<std::optional<TraceRecord>> slots(questions.size());
  std::vector<std::string> errors(questions.size());
  parallel_for(questions.size(), ctx.config.workers, [&](std::size_t i) {
    try {
      slots[i] = generate_trace(*backend, questions[i], options);
    } catch (const BackendError& e) {
      errors[i] = e.what();
    }
  });
  std::vector<TraceRecord> traces;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i]) {
      traces.push_back(std::move(*slots[i]));
    } else {
      ctx.err << "warning: no trace for " << questions[i].id << ": " << errors[i] << "\n";
    }
  }
  if (traces.empty() && !questions.empty()) {
    throw BackendError(BackendErrorKind::connection, "no trace could be generated: " + errors.front());
  }
  const fs::path out = require_path(ctx.config.output, "--output");
  atomic_write(out, jsonl_with_header(ctx.header({input}), to_records(traces)));
  ctx.out << "generated " << traces.size() << " of " << questions.size() << " traces\n";
  return kExitOk;
}

int curate_validate(const Context& ctx, const CurateArgs& args) {
  const fs::path input = require_path(args.input, "--input");
  const auto traces = load_traces(input);
  finish_stage(ctx, args, traces, validate_traces(traces), {}, {input});
  return kExitOk;
}

int curate_decontaminate(const Context& ctx, const CurateArgs& args) {
  const fs::path input = require_path(args.input, "--input");
  const auto eval_paths = split_list(args.eval_sets);
  if (eval_paths.empty()) throw UsageError("--eval is required");
  std::vector<McqQuestion> eval_questions;
  std::vector<fs::path> inputs = {input};
  for (const auto& p : eval_paths) {
    auto qs = load_questions(p);
    eval_questions.insert(eval_questions.end(), qs.begin(), qs.end());
    inputs.emplace_back(p);
  }
  CurationReport report;
  report.set_setting("ngram", std::to_string(args.ngram));
  report.set_setting("normalization", std::string(kNormalizationName));
  with_items(input, [&](const auto& items) {
    finish_stage(ctx, args, items, decontaminate(items, eval_questions, {args.ngram}), report, inputs);
  });
  return kExitOk;
}

int curate_dedup(const Context& ctx, const CurateArgs& args) {
  const fs::path input = require_path(args.input, "--input");
  CurationReport report;
  report.set_setting("normalization", std::string(kNormalizationName));
  with_items(input, [&](const auto& items) {
    auto kept = deduplicate(items);
    auto row = count_by_source(kStageDedup, kept);
    using Item = typename std::decay_t<decltype(items)>::value_type;
    finish_stage(ctx, args, items, StageResult<Item>{std::move(kept), std::move(row)}, report,
                 {input});
  });
  return kExitOk;
}

int curate_sample(const Context& ctx, const CurateArgs& args) {
  const fs::path input = require_path(args.input, "--input");
  if (args.n == 0) throw UsageError("--n must be positive");
  CurationReport report;
  report.set_setting("seed", std::to_string(ctx.config.seed));
  report.set_setting("rng", std::string(StableRng::kAlgorithm));
  with_items(input, [&](const auto& items) {
    finish_stage(ctx, args, items, diversity_sample_items(items, args.n, ctx.config.seed), report,
                 {input});
  });
  return kExitOk;
}

int curate_annotate(const Context& ctx, const CurateArgs& args) {
  const fs::path input = require_path(args.input, "--input");
  const fs::path lexicon_path = require_path(args.lexicon, "--lexicon");
  const auto questions = annotate_domains(load_questions(input), load_lexicon(lexicon_path));
  const fs::path out = require_path(ctx.config.output, "--output");
  atomic_write(out, jsonl_with_header(ctx.header({input, lexicon_path}), to_records(questions)));
  std::map<std::string, std::size_t> counts;
  for (const auto& q : questions) {
    for (const auto& d : q.domains) ++counts[d];
  }
  for (const auto& [domain, count] : counts) ctx.out << domain << "\t" << count << "\n";
  return kExitOk;
}

int curate_format_sft(const Context& ctx, const CurateArgs& args) {
  const fs::path input = require_path(args.input, "--input");
  const auto traces = load_traces(input);
  std::vector<json> records;
  records.reserve(traces.size());
  for (const auto& t : traces) {
    records.push_back({{"id", t.question.id}, {"text", format_sft_example(t)}});
  }
  const fs::path out = require_path(ctx.config.output, "--output");
  atomic_write(out, jsonl_with_header(ctx.header({input}), records));
  ctx.out << "formatted " << records.size() << " examples\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval and sweeps

std::vector<fs::path> dataset_paths(const Config& config) {
  std::vector<fs::path> out;
  for (const auto& p : split_list(config.dataset)) out.emplace_back(p);
  if (out.empty()) throw UsageError("--dataset is required");
  return out;
}

fs::path output_dir(const Config& config) {
  const fs::path dir = require_path(config.output, "--output");
  fs::create_directories(dir);
  return dir;
}

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", fraction * 100.0);
  return buf;
}

void fail_if_unreachable(const EvalResult& r) {
  if (r.n() > 0 && r.failures == r.n()) {
    throw BackendError(BackendErrorKind::connection,
                       "every question of " + r.dataset + " failed: " + r.outcomes.front().error);
  }
}

EvalOptions eval_options(const Context& ctx) {
  EvalOptions o;
  o.workers = ctx.config.workers;
  o.retry = ctx.retry();
  return o;
}

int run_eval(const Context& ctx) {
  const auto paths = dataset_paths(ctx.config);
  const fs::path dir = output_dir(ctx.config);
  const auto backend = ctx.backend();
  const auto policy = ctx.config.policy();
  const auto header = ctx.header(paths);

  json datasets = json::array();
  std::vector<double> percents;
  for (const auto& path : paths) {
    const auto dataset = Dataset::load(path);
    const auto result = evaluate(dataset, *backend, policy, eval_options(ctx));
    fail_if_unreachable(result);
    std::vector<json> records;
    for (const auto& o : result.outcomes) records.push_back(o.to_json());
    atomic_write(dir / (dataset.name + ".results.jsonl"), jsonl_with_header(header, records));
    const double pct = result.accuracy() * 100.0;
    percents.push_back(pct);
    datasets.push_back({{"name", dataset.name},
                        {"n", result.n()},
                        {"correct", result.correct},
                        {"failures", result.failures},
                        {"accuracy", result.accuracy()},
                        {"mean_thinking_tokens", result.mean_thinking_tokens()}});
    ctx.out << dataset.name << "\t" << percent(result.accuracy()) << "\t(" << result.correct << "/"
            << result.n() << ")\n";
    if (result.failures > 0) {
      ctx.err << "warning: " << result.failures << " question(s) of " << dataset.name
              << " failed and were counted incorrect\n";
    }
  }
  const double macro = macro_average(percents);
  atomic_write(dir / "summary.json",
               json_with_header(header, {{"datasets", datasets}, {"macro_accuracy_percent", macro}}));
  ctx.out << "macro\t" << std::fixed << std::setprecision(2) << macro << "\n";
  return kExitOk;
}

std::optional<RegressionFit> try_fit(const SweepResult& sweep, std::string& note) {
  const auto pts = sweep.percent_points();
  try {
    return fit_linear_with_ci(pts);
  } catch (const FitRefused& e) {
    note = e.what();
    return std::nullopt;
  }
}

json fit_json(const std::optional<RegressionFit>& fit, const std::string& note) {
  if (!fit) return {{"refused", note}};
  return {{"slope", fit->slope},
          {"intercept", fit->intercept},
          {"residual_se", fit->residual_se},
          {"n", fit->n},
          {"t_critical", fit->t_critical},
          {"confidence", fit->confidence},
          {"x_mean", fit->x_mean},
          {"sxx", fit->sxx}};
}

void write_sweep_outputs(const Context& ctx, const fs::path& dir, const std::string& stem,
                         const SweepResult& sweep, const ArtifactHeader& header) {
  std::string note;
  const auto fit = try_fit(sweep, note);
  const fs::path csv = dir / (stem + ".csv");
  atomic_write(csv, emit_plot(sweep, fit, PlotFormat::csv));
  atomic_write(meta_sidecar(csv), json_with_header(header, json::object()));
  PlotOptions po;
  po.metadata = header.to_json().dump();
  po.x_label = sweep.x_name == "budget" ? "Thinking budget (tokens)" : "Forcing count";
  atomic_write(dir / (stem + ".svg"), emit_plot(sweep, fit, PlotFormat::svg, po));
  atomic_write(dir / (stem + ".summary.json"),
               json_with_header(header, {{"sweep", sweep.to_json()}, {"fit", fit_json(fit, note)}}));
  for (const auto& p : sweep.points) {
    ctx.out << sweep.x_name << "=" << p.x << "\t" << percent(p.accuracy) << "\t(" << p.correct << "/"
            << p.n << ")\tmean_thinking_tokens=" << p.mean_thinking_tokens << "\n";
  }
  if (!fit) ctx.err << "note: no regression fit: " << note << "\n";
}

int run_sweep(const Context& ctx, const std::string& budgets_text, bool fast) {
  const auto paths = dataset_paths(ctx.config);
  if (paths.size() != 1) throw UsageError("sweep takes exactly one --dataset");
  const auto budgets = budgets_text.empty() ? kDefaultBudgetGrid : parse_size_list(budgets_text, "--budgets");
  const fs::path dir = output_dir(ctx.config);
  const auto dataset = Dataset::load(paths.front());
  SweepOptions options;
  options.eval = eval_options(ctx);
  options.reuse_truncated = fast;
  auto header = ctx.header(paths);
  header.config["sweep"] = {{"budgets", budgets}, {"reuse_truncated", fast}};
  const auto sweep = budget_sweep(dataset, *ctx.backend(), budgets, ctx.config.policy(), options);
  write_sweep_outputs(ctx, dir, "budget_sweep", sweep, header);
  return kExitOk;
}

int run_force_sweep(const Context& ctx, std::size_t max_forcings) {
  const auto paths = dataset_paths(ctx.config);
  if (paths.size() != 1) throw UsageError("force-sweep takes exactly one --dataset");
  const fs::path dir = output_dir(ctx.config);
  const auto dataset = Dataset::load(paths.front());
  SweepOptions options;
  options.eval = eval_options(ctx);
  auto header = ctx.header(paths);
  header.config["sweep"] = {{"max_forcings", max_forcings}};
  const auto sweep = forcing_sweep(dataset, *ctx.backend(), max_forcings, ctx.config.policy(), options);
  write_sweep_outputs(ctx, dir, "forcing_sweep", sweep, header);
  return kExitOk;
}

json strip_meta(json j) {
  if (j.is_object()) j.erase(kMetaKey);
  return j;
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path.string() + ": invalid JSON: " + e.what());
  }
}

int run_plot(const Context& ctx, const std::string& sweep_path, const std::string& format_name,
             bool no_fit) {
  const fs::path input = require_path(sweep_path, "--sweep");
  const auto format = parse_plot_format(format_name);
  auto doc = strip_meta(read_json(input));
  const auto sweep = SweepResult::from_json(doc.contains("sweep") ? doc.at("sweep") : doc);
  std::string note;
  const auto fit = no_fit ? std::nullopt : try_fit(sweep, note);
  const auto header = ctx.header({input});
  PlotOptions po;
  po.metadata = header.to_json().dump();
  po.x_label = sweep.x_name == "budget" ? "Thinking budget (tokens)" : "Forcing count";
  const fs::path out = require_path(ctx.config.output, "--output");
  atomic_write(out, emit_plot(sweep, fit, format, po));
  if (format == PlotFormat::csv) atomic_write(meta_sidecar(out), json_with_header(header, json::object()));
  if (!fit && !no_fit) ctx.err << "note: no regression fit: " << note << "\n";
  ctx.out << "wrote " << out.string() << "\n";
  return kExitOk;
}

int run_report(const Context& ctx, const std::vector<std::string>& curation,
               const std::vector<std::string>& summaries) {
  if (curation.empty() && summaries.empty()) {
    throw UsageError("report needs --curation and/or --summary files");
  }
  std::vector<fs::path> inputs;
  json body = json::object();

  if (!curation.empty()) {
    CurationReport merged;
    for (const auto& p : curation) {
      merged.append(CurationReport::from_json(strip_meta(read_json(p))));
      inputs.emplace_back(p);
    }
    merged.validate();
    body["curation"] = merged.to_json();
    std::set<std::string> sources;
    for (const auto& s : merged.stages()) {
      for (const auto& [src, _] : s.counts) sources.insert(src);
    }
    ctx.out << "stage";
    for (const auto& s : sources) ctx.out << "\t" << s;
    ctx.out << "\ttotal\n";
    for (const auto& s : merged.stages()) {
      ctx.out << s.name;
      for (const auto& src : sources) {
        const auto it = s.counts.find(src);
        ctx.out << "\t" << (it == s.counts.end() ? 0 : it->second);
      }
      ctx.out << "\t" << s.total << "\n";
    }
  }

  if (!summaries.empty()) {
    json rows = json::array();
    std::vector<double> percents;
    for (const auto& p : summaries) {
      const auto doc = strip_meta(read_json(p));
      inputs.emplace_back(p);
      for (const auto& d : doc.at("datasets")) {
        const auto n = d.at("n").get<std::size_t>();
        const auto correct = d.at("correct").get<std::size_t>();
        const double acc = n == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(n);
        percents.push_back(acc * 100.0);
        rows.push_back({{"name", d.at("name")}, {"n", n}, {"correct", correct}, {"accuracy", acc}});
        ctx.out << d.at("name").get<std::string>() << "\t" << percent(acc) << "\n";
      }
    }
    const double macro = macro_average(percents);
    body["datasets"] = rows;
    body["macro_accuracy_percent"] = macro;
    ctx.out << "macro\t" << std::fixed << std::setprecision(2) << macro << "\n";
  }

  if (!ctx.config.output.empty()) {
    atomic_write(ctx.config.output, json_with_header(ctx.header(inputs), body));
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Budgeted test-time reasoning: data curation, evaluation and scaling sweeps",
               "ttscale"};
  app.require_subcommand(1);
  ConfigFlags flags;

  auto* curate = app.add_subcommand("curate", "Data curation stages");
  curate->require_subcommand(1);
  CurateArgs ca;
  auto add_stage = [&](const char* name, const char* help) {
    auto* sub = curate->add_subcommand(name, help);
    flags.attach(sub);
    sub->add_option("--input", ca.input, "Input JSONL")->required();
    return sub;
  };
  auto* filter = add_stage("filter", "Keep questions that every grader gets wrong");
  filter->add_option("--verdicts", ca.verdicts, "Recorded grader verdicts (JSONL)");
  filter->add_option("--grader", ca.graders, "Grader model name (repeatable)");
  filter->add_option("--report", ca.report, "Write the stage rows here");
  auto* generate = add_stage("generate", "Generate reasoning traces");
  generate->add_option("--think-delimiter", ca.think_delimiter, "Splits thinking from the response");
  auto* validate = add_stage("validate", "Keep traces whose answer matches the gold label");
  validate->add_option("--report", ca.report, "Write the stage rows here");
  auto* decon = add_stage("decontaminate", "Drop items overlapping evaluation questions, then dedup");
  decon->add_option("--eval", ca.eval_sets, "Comma-separated evaluation question files")->required();
  decon->add_option("--ngram", ca.ngram, "Window size in words")->check(CLI::PositiveNumber);
  decon->add_option("--report", ca.report, "Write the stage rows here");
  auto* dedup = add_stage("dedup", "Drop exact duplicates by normalized stem");
  dedup->add_option("--report", ca.report, "Write the stage rows here");
  auto* sample = add_stage("sample", "Diversity-sample by domain, then dataset");
  sample->add_option("--n", ca.n, "Target size")->required();
  sample->add_option("--report", ca.report, "Write the stage rows here");
  auto* annotate = add_stage("annotate", "Label domains from a term lexicon");
  annotate->add_option("--lexicon", ca.lexicon, "JSON object: term -> domain")->required();
  auto* format_sft = add_stage("format-sft", "Render verified traces as training examples");

  auto* eval = app.add_subcommand("eval", "Accuracy per dataset and macro average");
  flags.attach(eval);

  auto* sweep = app.add_subcommand("sweep", "Accuracy across thinking budgets");
  flags.attach(sweep);
  std::string budgets;
  bool fast = false;
  sweep->add_option("--budgets", budgets, "Comma-separated budgets (default 512,...,8192)");
  sweep->add_flag("--fast", fast, "Reuse one long run, truncated per budget (approximate)");

  auto* force = app.add_subcommand("force-sweep", "Accuracy across forcing counts");
  flags.attach(force);
  std::size_t max_forcings = 4;
  force->add_option("--max-forcings", max_forcings, "Largest forcing count");

  auto* plot = app.add_subcommand("plot", "Render a sweep as CSV or SVG");
  flags.attach(plot);
  std::string sweep_path;
  std::string format = "svg";
  bool no_fit = false;
  plot->add_option("--sweep", sweep_path, "Sweep summary JSON")->required();
  plot->add_option("--format", format, "csv or svg");
  plot->add_flag("--no-fit", no_fit, "Omit the regression line and band");

  auto* report = app.add_subcommand("report", "Merge curation ledgers and evaluation summaries");
  flags.attach(report);
  std::vector<std::string> curation_files;
  std::vector<std::string> summary_files;
  report->add_option("--curation", curation_files, "Curation report JSON (repeatable)");
  report->add_option("--summary", summary_files, "Evaluation summary JSON (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const Context ctx{flags.resolve(process_env()), process_env(), out, err};
    if (filter->parsed()) return curate_filter(ctx, ca);
    if (generate->parsed()) return curate_generate(ctx, ca);
    if (validate->parsed()) return curate_validate(ctx, ca);
    if (decon->parsed()) return curate_decontaminate(ctx, ca);
    if (dedup->parsed()) return curate_dedup(ctx, ca);
    if (sample->parsed()) return curate_sample(ctx, ca);
    if (annotate->parsed()) return curate_annotate(ctx, ca);
    if (format_sft->parsed()) return curate_format_sft(ctx, ca);
    if (eval->parsed()) return run_eval(ctx);
    if (sweep->parsed()) return run_sweep(ctx, budgets, fast);
    if (force->parsed()) return run_force_sweep(ctx, max_forcings);
    if (plot->parsed()) return run_plot(ctx, sweep_path, format, no_fit);
    if (report->parsed()) return run_report(ctx, curation_files, summary_files);
    err << "error: no subcommand\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UnknownFormat& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const BackendError& e) {
    err << "error: backend: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace ttscale::cli
