// Copyright (c) 2026, cotvars contributors
// SPDX-License-Identifier: Apache-2.0

#include "cotvars/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "cotvars/corpus.hpp"
#include "cotvars/error.hpp"
#include "cotvars/grader.hpp"
#include "cotvars/intervention.hpp"
#include "cotvars/json.hpp"
#include "cotvars/parallel.hpp"
#include "cotvars/plot.hpp"
#include "cotvars/probe.hpp"

namespace fs = std::filesystem;

namespace cotvars {

namespace {

struct Common {
  std::string out_dir = "cotvars-out";
  std::size_t jobs = 1;
};

struct TokenFlags {
  std::string cot_open = SpecialTokens{}.cot_open;
  std::string cot_close = SpecialTokens{}.cot_close;
  std::string latent = SpecialTokens{}.latent;

  SpecialTokens tokens() const { return {cot_open, cot_close, latent}; }
};

void add_token_flags(CLI::App* sub, TokenFlags& t) {
  sub->add_option("--cot-open", t.cot_open, "Token opening the chain of thought")->capture_default_str();
  sub->add_option("--cot-close", t.cot_close, "Token closing the chain of thought")->capture_default_str();
  sub->add_option("--latent-token", t.latent, "Latent placeholder token")->capture_default_str();
}

// Every stage collects the files it wrote so the manifest can list them.
class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, std::string_view contents) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create " + dir_.string() + ": " + ec.message());
    write_file_atomic(dir_ / name, contents);
    files_.emplace_back(name, contents.size());
  }

  const fs::path& dir() const { return dir_; }
  const std::vector<std::pair<std::string, std::size_t>>& files() const { return files_; }

 private:
  fs::path dir_;
  std::vector<std::pair<std::string, std::size_t>> files_;
};

std::vector<Entry> load_dataset(const fs::path& path) {
  const auto card = path.parent_path() / "card.json";
  if (fs::exists(card)) {
    const auto j = read_json(card);
    if (j.value("format_version", -1) != kCorpusFormatVersion) {
      throw ValidationError(card.string() + ": unsupported corpus format_version " + j.value("format_version", Json()).dump());
    }
  }
  std::vector<Entry> entries;
  for_each_jsonl(path, [&](const Json& j, std::size_t line) {
    try {
      entries.push_back(entry_from_json(j));
    } catch (const std::exception& e) {
      throw ValidationError(path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  return entries;
}

std::map<std::string, std::string> load_text_by_id(const fs::path& path, const char* field) {
  std::map<std::string, std::string> out;
  for_each_jsonl(path, [&](const Json& j, std::size_t line) {
    if (!j.is_object() || !j.contains("id") || !j.contains(field) || !j["id"].is_string() || !j[field].is_string()) {
      throw ValidationError(path.string() + ":" + std::to_string(line) + ": expected {\"id\", \"" + field + "\"}");
    }
    if (!out.emplace(j["id"].get<std::string>(), j[field].get<std::string>()).second) {
      throw ValidationError(path.string() + ":" + std::to_string(line) + ": duplicate id " + j["id"].get<std::string>());
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// gen

struct GenFlags {
  std::string task;
  std::string scale;
  std::string style = "full";
  std::size_t count = 100'000;
  double split = 0.9;
  std::uint64_t seed = 0;
  TokenFlags tokens;
};

void run_gen(const GenFlags& f, const Common& c, Outputs& out) {
  DatasetSpec spec;
  spec.task = task_from_string(f.task);
  spec.scale = Scale::parse(f.scale);
  spec.style = style_from_string(f.style);
  spec.count = f.count;
  spec.split_ratio = f.split;
  spec.seed = f.seed;
  spec.tokens = f.tokens.tokens();
  if (spec.style == PromptStyle::MergedLatentCot) spec.merge_plan = make_merge_plan(spec.scale.m, spec.scale.n);
  spec.validate();
  const auto ds = generate_dataset(spec, c.jobs);
  auto dump = [](const std::vector<Entry>& entries) {
    std::string s;
    for (const auto& e : entries) {
      s += entry_to_json(e).dump();
      s += '\n';
    }
    return s;
  };
  out.write("train.jsonl", dump(ds.train));
  out.write("test.jsonl", dump(ds.test));
  out.write("card.json", dataset_card(spec, ds).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// render

struct RenderFlags {
  std::string task = "mul";
  std::string style = "full";
  std::string a, b;
  std::string grid;  // rows separated by ';', cells by ','
  std::string dataset;
  TokenFlags tokens;
};

Grid parse_grid_flag(const std::string& text) {
  std::vector<std::vector<std::int64_t>> rows;
  std::stringstream rs(text);
  std::string row;
  while (std::getline(rs, row, ';')) {
    std::vector<std::int64_t> cells;
    std::stringstream cs(row);
    std::string cell;
    while (std::getline(cs, cell, ',')) {
      try {
        std::size_t used = 0;
        cells.push_back(std::stoll(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::logic_error&) {
        throw ValidationError("bad grid cell '" + cell + "'");
      }
    }
    rows.push_back(std::move(cells));
  }
  return Grid::from_rows(rows);
}

void run_render(const RenderFlags& f, std::ostream& stdout_, Outputs& out) {
  const auto style = style_from_string(f.style);
  const auto tokens = f.tokens.tokens();
  if (!f.dataset.empty()) {
    std::string s;
    for (const auto& e : load_dataset(f.dataset)) {
      s += entry_to_json(restyle_entry(e, style, tokens)).dump();
      s += '\n';
    }
    out.write("rendered.jsonl", s);
    return;
  }
  const auto task = task_from_string(f.task);
  if (!style_valid_for(task, style)) {
    throw ValidationError("style " + f.style + " is not defined for task " + f.task);
  }
  RenderedExample ex;
  if (task == Task::Multiplication) {
    if (f.a.empty() || f.b.empty()) throw ValidationError("render --task mul needs --a and --b");
    ex = render(multiply_with_trace(Decimal::parse(f.a), Decimal::parse(f.b)), style, tokens);
  } else {
    if (f.grid.empty()) throw ValidationError("render --task dp needs --grid");
    const auto grid = parse_grid_flag(f.grid);
    std::optional<MergePlan> plan;
    if (style == PromptStyle::MergedLatentCot) plan = make_merge_plan(grid.rows(), grid.cols());
    ex = render(dp_with_trace(grid), style, tokens, plan ? &*plan : nullptr);
  }
  const auto text = ex.prompt + ex.target;
  out.write("rendered.txt", text);
  stdout_ << text << '\n';
}

// ---------------------------------------------------------------------------
// grade

struct GradeFlags {
  std::string dataset;
  std::string outputs;
  TokenFlags tokens;
};

void run_grade(const GradeFlags& f, const Common& c, Outputs& out, std::ostream& stdout_) {
  const auto entries = load_dataset(f.dataset);
  std::map<std::string, const Entry*> by_id;
  for (const auto& e : entries) by_id.emplace(e.id, &e);

  std::vector<std::pair<std::string, std::string>> outputs;
  std::set<std::string> seen;
  for_each_jsonl(f.outputs, [&](const Json& j, std::size_t line) {
    if (!j.is_object() || !j.contains("id") || !j.contains("output") || !j["id"].is_string() ||
        !j["output"].is_string()) {
      throw ValidationError(f.outputs + ":" + std::to_string(line) + ": expected {\"id\", \"output\"}");
    }
    const auto id = j["id"].get<std::string>();
    if (by_id.find(id) == by_id.end()) {
      throw ValidationError(f.outputs + ":" + std::to_string(line) + ": unknown id " + id);
    }
    if (!seen.insert(id).second) throw ValidationError(f.outputs + ":" + std::to_string(line) + ": duplicate id " + id);
    outputs.emplace_back(id, j["output"].get<std::string>());
  });
  if (outputs.empty()) throw ValidationError(f.outputs + ": no model outputs");

  const auto tokens = f.tokens.tokens();
  std::vector<GradeReport> reports(outputs.size());
  parallel_for(outputs.size(), c.jobs, [&](std::size_t i) {
    reports[i] = grade_entry(outputs[i].second, *by_id.at(outputs[i].first), tokens);
  });

  std::string lines;
  std::size_t correct = 0, wrong = 0, missing = 0, with_step_diffs = 0, with_diagnostics = 0;
  std::set<std::string> tasks, scales, styles;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    lines += grade_report_to_json(r).dump();
    lines += '\n';
    if (r.final_correct) {
      ++correct;
    } else if (r.parsed_final) {
      ++wrong;
    } else {
      ++missing;
    }
    if (!r.step_diffs.empty()) ++with_step_diffs;
    if (!r.diagnostics.empty()) ++with_diagnostics;
    const auto* e = by_id.at(outputs[i].first);
    tasks.insert(std::string(to_string(e->task)));
    scales.insert(e->scale.str());
    styles.insert(std::string(to_string(e->style)));
  }
  auto one_or_mixed = [](const std::set<std::string>& s) { return s.size() == 1 ? *s.begin() : std::string("mixed"); };
  Json summary;
  summary["format_version"] = kReportFormatVersion;
  summary["task"] = one_or_mixed(tasks);
  summary["scale"] = one_or_mixed(scales);
  summary["style"] = one_or_mixed(styles);
  summary["total"] = reports.size();
  summary["accuracy"] = accuracy(reports);
  summary["counts"] = {{"correct", correct}, {"wrong_final", wrong}, {"missing_final", missing}};
  summary["with_step_diffs"] = with_step_diffs;
  summary["with_diagnostics"] = with_diagnostics;
  summary["ungraded_entries"] = entries.size() - outputs.size();
  out.write("grade_report.jsonl", lines);
  out.write("grade_summary.json", summary.dump(2) + "\n");
  stdout_ << "accuracy " << summary["accuracy"].get<double>() << " over " << reports.size() << " outputs\n";
}

// ---------------------------------------------------------------------------
// intervene

struct IntervenFlags {
  std::string dataset;
  std::uint64_t seed = 0;
  std::string continuations;
  std::string interventions;
  TokenFlags tokens;
};

InterventionRecord make_record(const Entry& e, std::uint64_t seed, std::size_t index, const SpecialTokens& tokens) {
  auto rng = Rng::derive(seed, "intervention", index);
  InterventionRecord rec;
  if (e.task == Task::Multiplication) {
    const auto trace = mul_trace_of(e);
    const auto site = pick_site(trace, rng);
    rec = simulate_expected(trace, site, substitute_value(site_value(trace, site), rng), tokens);
  } else {
    const auto trace = dp_trace_of(e);
    const auto site = pick_site(trace, rng);
    rec = simulate_expected(trace, site, substitute_value(site_value(trace, site), rng), tokens);
  }
  rec.entry_id = e.id;
  return rec;
}

InterventionRecord record_from_json(const Json& j, const Entry& e, const SpecialTokens& tokens) {
  const auto site = site_from_json(j.at("site"));
  const auto value = decimal_from_json(j.at("substituted"));
  InterventionRecord rec = e.task == Task::Multiplication ? simulate_expected(mul_trace_of(e), site, value, tokens)
                                                          : simulate_expected(dp_trace_of(e), site, value, tokens);
  rec.entry_id = e.id;
  if (j.contains("prefix") && j["prefix"] != rec.truncated_prefix) {
    throw ValidationError("intervention " + e.id + ": prefix does not match the dataset entry");
  }
  return rec;
}

void run_intervene(const IntervenFlags& f, const Common& c, Outputs& out, std::ostream& stdout_) {
  const auto entries = load_dataset(f.dataset);
  if (entries.empty()) throw ValidationError(f.dataset + ": empty dataset");
  const auto tokens = f.tokens.tokens();
  std::vector<InterventionRecord> records(entries.size());

  if (!f.interventions.empty()) {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < entries.size(); ++i) index.emplace(entries[i].id, i);
    std::vector<Json> docs = read_jsonl(f.interventions);
    records.resize(docs.size());
    parallel_for(docs.size(), c.jobs, [&](std::size_t i) {
      const auto id = docs[i].at("id").get<std::string>();
      const auto it = index.find(id);
      if (it == index.end()) throw ValidationError(f.interventions + ": unknown id " + id);
      records[i] = record_from_json(docs[i], entries[it->second], tokens);
    });
  } else {
    parallel_for(entries.size(), c.jobs, [&](std::size_t i) { records[i] = make_record(entries[i], f.seed, i, tokens); });
  }

  std::string lines;
  for (const auto& r : records) {
    lines += intervention_to_json(r).dump();
    lines += '\n';
  }
  out.write("interventions.jsonl", lines);
  if (f.continuations.empty()) {
    stdout_ << records.size() << " interventions\n";
    return;
  }

  const auto continuations = load_text_by_id(f.continuations, "continuation");
  std::vector<std::size_t> graded;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (continuations.count(records[i].entry_id) != 0) graded.push_back(i);
  }
  if (graded.empty()) throw ValidationError(f.continuations + ": no continuation matches an intervention id");
  std::vector<ErrorType> outcomes(graded.size());
  parallel_for(graded.size(), c.jobs, [&](std::size_t k) {
    const auto& rec = records[graded[k]];
    outcomes[k] = classify_failure(continuations.at(rec.entry_id), rec, tokens);
  });
  std::string outcome_lines;
  for (std::size_t k = 0; k < graded.size(); ++k) {
    Json j;
    j["id"] = records[graded[k]].entry_id;
    j["outcome"] = std::string(to_string(outcomes[k]));
    outcome_lines += j.dump();
    outcome_lines += '\n';
  }
  const auto breakdown = aggregate_report(outcomes);
  Json summary = breakdown.to_json();
  summary["format_version"] = kReportFormatVersion;
  summary["without_continuation"] = records.size() - graded.size();
  out.write("outcomes.jsonl", outcome_lines);
  out.write("breakdown.json", summary.dump(2) + "\n");
  stdout_ << "success rate " << breakdown.success_rate() << " over " << breakdown.total << " interventions\n";
}

// ---------------------------------------------------------------------------
// probe

struct ProbeFlags {
  std::string dumps;
  std::string eval_dumps;
  double holdout = 0.2;
  bool synthetic = false;
  std::size_t layers = 8;
  int signal_from = 4;
  std::size_t samples = 5000;
  std::size_t eval_samples = 1000;
  double sigma = 0.01;
  std::size_t hidden = 128;
  std::string layout = "number_groups";
  ProbeHyper hyper;
};

RecordStore load_dumps(const std::string& dir) {
  std::vector<std::string> diagnostics;
  auto store = read_dump_dir(dir, &diagnostics);
  if (!diagnostics.empty()) {
    std::string msg = "tensor dump diagnostics:";
    for (const auto& d : diagnostics) msg += "\n  " + d;
    throw ValidationError(msg);
  }
  if (store.empty()) throw ValidationError(dir + ": no tensor dumps found");
  return store;
}

void run_probe(const ProbeFlags& f, const Common& c, Outputs& out, std::ostream& stdout_) {
  RecordStore train, test;
  if (f.synthetic) {
    SynthFixtureConfig cfg;
    cfg.seed = f.hyper.seed;
    const auto kind = layout_kind_from_string(f.layout);
    cfg.layout = kind == LayoutKind::DigitCarry ? LatentLayout::digit_carry() : LatentLayout::dp_default();
    cfg.n_samples = f.samples;
    cfg.noise_sigma = f.sigma;
    cfg.n_layers = f.layers;
    cfg.signal_from_layer = f.signal_from;
    cfg.hidden_width = f.hidden;
    train = synth_fixture(cfg);
    cfg.n_samples = f.eval_samples;
    cfg.sample_stream = 1;
    test = synth_fixture(cfg);
  } else {
    if (f.dumps.empty()) throw ValidationError("probe needs --dumps or --synthetic");
    train = load_dumps(f.dumps);
    if (!f.eval_dumps.empty()) {
      test = load_dumps(f.eval_dumps);
    } else {
      if (!(f.holdout > 0.0 && f.holdout < 1.0)) throw ValidationError("--holdout must lie in (0, 1)");
      RecordStore all = std::move(train);
      train.clear();
      for (auto& [layer, records] : all) {
        std::vector<std::size_t> order(records.size());
        std::iota(order.begin(), order.end(), 0);
        auto rng = Rng::derive(f.hyper.seed, "probe-split");
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.uniform(0, i - 1)]);
        const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(records.size()) * f.holdout));
        if (n_test == 0 || n_test == records.size()) {
          throw ValidationError("layer " + std::to_string(layer) + ": too few records to hold out a split");
        }
        std::vector<bool> in_test(records.size(), false);
        for (std::size_t k = 0; k < n_test; ++k) in_test[order[k]] = true;
        for (std::size_t k = 0; k < records.size(); ++k) {
          (in_test[k] ? test : train)[layer].push_back(std::move(records[k]));
        }
      }
    }
  }
  const auto rows = layer_sweep(train, test, f.hyper, c.jobs);
  out.write("sweep.csv", sweep_to_csv(rows));
  out.write("sweep.json", sweep_to_json(rows).dump(2) + "\n");
  out.write("sweep.svg", sweep_to_svg(rows));
  for (const auto& r : rows) {
    stdout_ << "layer " << r.layer << " element " << r.metrics.element_accuracy << " token " << r.metrics.token_accuracy
            << '\n';
  }
}

// ---------------------------------------------------------------------------
// report

struct ReportFlags {
  std::vector<std::string> grades;
  std::string breakdown;
  std::string sweep;
};

Json load_versioned(const std::string& path) {
  auto j = read_json(path);
  if (!j.is_object() || j.value("format_version", -1) != kReportFormatVersion) {
    throw ValidationError(path + ": missing or unsupported format_version");
  }
  return j;
}

std::vector<LayerSweepRow> read_sweep_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  std::getline(in, line);
  if (line.rfind("layer,element_accuracy,token_accuracy", 0) != 0) throw ValidationError(path + ": not a sweep CSV");
  std::vector<LayerSweepRow> rows;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() < 3) throw ValidationError(path + ":" + std::to_string(n) + ": expected at least 3 columns");
    try {
      LayerSweepRow r;
      r.layer = std::stoi(fields[0]);
      r.metrics.element_accuracy = std::stod(fields[1]);
      r.metrics.token_accuracy = std::stod(fields[2]);
      if (fields.size() > 3) r.metrics.count = std::stoull(fields[3]);
      if (fields.size() > 4) r.final_train_loss = std::stod(fields[4]);
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw ValidationError(path + ":" + std::to_string(n) + ": bad number");
    }
  }
  return rows;
}

std::string fixed4(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << v;
  return s.str();
}

void run_report(const ReportFlags& f, Outputs& out, std::ostream& stdout_) {
  if (f.grades.empty() && f.breakdown.empty() && f.sweep.empty()) {
    throw ValidationError("report needs at least one of --grade, --breakdown, --sweep");
  }
  std::ostringstream md;
  md << "# cotvars report\n";

  if (!f.grades.empty()) {
    // scale -> style -> accuracy
    std::map<std::string, std::map<std::string, double>> table;
    std::set<std::string> styles;
    md << "\n## Accuracy by scale\n\n| task | scale | style | total | accuracy |\n|---|---|---|---|---|\n";
    for (const auto& path : f.grades) {
      const auto j = load_versioned(path);
      const auto scale = j.at("scale").get<std::string>();
      const auto style = j.at("style").get<std::string>();
      const double acc = j.at("accuracy").get<double>();
      md << "| " << j.at("task").get<std::string>() << " | " << scale << " | " << style << " | "
         << j.at("total").get<std::size_t>() << " | " << fixed4(acc) << " |\n";
      table[scale][style] = acc;
      styles.insert(style);
    }
    std::vector<std::string> labels;
    for (const auto& [scale, row] : table) labels.push_back(scale);
    std::vector<PlotSeries> series;
    for (const auto& style : styles) {
      PlotSeries s{style, {}};
      for (const auto& scale : labels) {
        const auto& row = table[scale];
        const auto it = row.find(style);
        s.values.push_back(it == row.end() ? std::nan("") : it->second);
      }
      series.push_back(std::move(s));
    }
    out.write("accuracy_by_scale.svg", line_plot_svg("Accuracy by scale", "scale", labels, series));
    md << "\n![accuracy by scale](accuracy_by_scale.svg)\n";
  }

  if (!f.breakdown.empty()) {
    const auto b = InterventionBreakdown::from_json(load_versioned(f.breakdown));
    md << "\n## Intervention outcomes\n\n| outcome | count |\n|---|---|\n";
    std::vector<std::string> labels;
    std::vector<double> values;
    for (const auto& [label, count] : b.rows()) {
      md << "| " << label << " | " << count << " |\n";
      if (label != "Total" && label != "Error") {
        labels.push_back(label.substr(0, label.find(' ')));
        values.push_back(static_cast<double>(count));
      }
    }
    md << "\nSuccess rate: " << fixed4(b.success_rate()) << "\n";
    out.write("breakdown.svg", bar_chart_svg("Intervention outcomes", labels, values));
    md << "\n![intervention outcomes](breakdown.svg)\n";
  }

  if (!f.sweep.empty()) {
    const auto rows = read_sweep_csv(f.sweep);
    md << "\n## Probe accuracy by layer\n\n| layer | element accuracy | token accuracy |\n|---|---|---|\n";
    for (const auto& r : rows) {
      md << "| " << r.layer << " | " << fixed4(r.metrics.element_accuracy) << " | " << fixed4(r.metrics.token_accuracy)
         << " |\n";
    }
    out.write("layers.svg", sweep_to_svg(rows));
    md << "\n![probe accuracy by layer](layers.svg)\n";
  }
  out.write("report.md", md.str());
  stdout_ << "wrote " << (out.dir() / "report.md").string() << '\n';
}

// ---------------------------------------------------------------------------

// run.toml: global options, then one section for the subcommand that ran.
// Every option is written, given or defaulted, so replay does not depend on
// the defaults of a later build.
void append_options(std::string& toml, const CLI::App& app) {
  for (const auto* opt : app.get_options()) {
    const auto name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "help-all" || name == "version" || name == "config") continue;
    if (opt->get_expected_min() == 0) {
      toml += name + "=" + (opt->count() > 0 ? "true" : "false") + "\n";
      continue;
    }
    std::vector<std::string> values = opt->count() > 0 ? opt->results() : std::vector<std::string>{};
    if (opt->count() == 0) {
      const auto envname = opt->get_envname();
      if (const char* env = envname.empty() ? nullptr : std::getenv(envname.c_str()); env != nullptr) {
        values.emplace_back(env);
      } else if (!opt->get_default_str().empty()) {
        values.push_back(opt->get_default_str());
      }
    }
    if (values.empty()) continue;
    toml += name + "=";
    if (opt->get_expected_max() > 1) {
      toml += "[";
      for (std::size_t i = 0; i < values.size(); ++i) toml += (i ? "," : "") + Json(values[i]).dump();
      toml += "]";
    } else {
      toml += Json(values.back()).dump();
    }
    toml += "\n";
  }
}

void write_manifest(const CLI::App& app, const std::string& subcommand, Outputs& out) {
  Json m;
  m["tool"] = "cotvars";
  m["version"] = kToolVersion;
  m["subcommand"] = subcommand;
  m["format_versions"] = {{"corpus", kCorpusFormatVersion},
                          {"tensor_dump", kTensorDumpFormatVersion},
                          {"report", kReportFormatVersion}};
  std::string toml;
  append_options(toml, app);
  toml += "[" + subcommand + "]\n";
  append_options(toml, *app.get_subcommand(subcommand));
  m["config"] = toml;
  Json files = Json::array();
  for (const auto& [name, bytes] : out.files()) files.push_back({{"path", name}, {"bytes", bytes}});
  m["outputs"] = std::move(files);
  m["replay"] = "cotvars --config run.toml --out <dir>";
  // Written directly: these two files describe the run and are not listed in it.
  write_file_atomic(out.dir() / "run.toml", toml);
  write_file_atomic(out.dir() / "manifest.json", m.dump(2) + "\n");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"cotvars: synthetic chain-of-thought corpora, grading, interventions and probes", "cotvars"};
  app.set_version_flag("--version", kToolVersion);
  app.set_config("--config", "", "TOML run file (e.g. a previous run.toml); explicit flags win");
  app.require_subcommand(1);

  Common common;
  app.add_option("--out", common.out_dir, "Output directory")->envname("COTVARS_OUT")->capture_default_str();
  app.add_option("--jobs", common.jobs, "Worker threads; output order does not depend on it")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  GenFlags gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a dataset (train.jsonl, test.jsonl, card.json)");
  gen_cmd->add_option("--task", gen.task, "mul | dp")->required();
  gen_cmd->add_option("--scale", gen.scale, "Operand digits or grid shape, e.g. 4x4")->required();
  gen_cmd->add_option("--style", gen.style, "plain | full | compressed | latent | merged_latent")->capture_default_str();
  gen_cmd->add_option("--count", gen.count, "Entries before the split")->capture_default_str();
  gen_cmd->add_option("--split", gen.split, "Train fraction")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Root seed")->capture_default_str();
  add_token_flags(gen_cmd, gen.tokens);

  RenderFlags rend;
  auto* render_cmd = app.add_subcommand("render", "Render one instance, or re-render a dataset in another style");
  render_cmd->add_option("--task", rend.task, "mul | dp")->capture_default_str();
  render_cmd->add_option("--style", rend.style, "Prompt style")->capture_default_str();
  render_cmd->add_option("--a", rend.a, "Multiplicand");
  render_cmd->add_option("--b", rend.b, "Multiplier");
  render_cmd->add_option("--grid", rend.grid, "Grid rows separated by ';', cells by ','");
  render_cmd->add_option("--dataset", rend.dataset, "Dataset JSONL to re-render");
  add_token_flags(render_cmd, rend.tokens);

  GradeFlags grade;
  auto* grade_cmd = app.add_subcommand("grade", "Grade model outputs {id, output} against a dataset");
  grade_cmd->add_option("--dataset", grade.dataset, "Dataset JSONL")->required();
  grade_cmd->add_option("--outputs", grade.outputs, "Model output JSONL")->required();
  add_token_flags(grade_cmd, grade.tokens);

  IntervenFlags inter;
  auto* inter_cmd = app.add_subcommand("intervene", "Build interventions; classify continuations when given");
  inter_cmd->add_option("--dataset", inter.dataset, "Dataset JSONL")->required();
  inter_cmd->add_option("--seed", inter.seed, "Seed for site and value choice")->capture_default_str();
  inter_cmd->add_option("--interventions", inter.interventions, "Reuse sites from an intervention JSONL");
  inter_cmd->add_option("--continuations", inter.continuations, "Continuation JSONL {id, continuation}");
  add_token_flags(inter_cmd, inter.tokens);

  ProbeFlags probe;
  auto* probe_cmd = app.add_subcommand("probe", "Train per-layer linear probes and sweep layers");
  probe_cmd->add_option("--dumps", probe.dumps, "Directory of tensor dumps");
  probe_cmd->add_option("--eval-dumps", probe.eval_dumps, "Held-out tensor dumps (default: split --dumps)");
  probe_cmd->add_option("--holdout", probe.holdout, "Held-out fraction when --eval-dumps is absent")->capture_default_str();
  probe_cmd->add_flag("--synthetic", probe.synthetic, "Use the synthetic fixture instead of dumps");
  probe_cmd->add_option("--layers", probe.layers, "Synthetic: layer count")->capture_default_str();
  probe_cmd->add_option("--signal-from", probe.signal_from, "Synthetic: first layer with signal")->capture_default_str();
  probe_cmd->add_option("--samples", probe.samples, "Synthetic: training samples per layer")->capture_default_str();
  probe_cmd->add_option("--eval-samples", probe.eval_samples, "Synthetic: held-out samples per layer")
      ->capture_default_str();
  probe_cmd->add_option("--sigma", probe.sigma, "Synthetic: noise on signal layers")->capture_default_str();
  probe_cmd->add_option("--hidden", probe.hidden, "Synthetic: hidden width")->capture_default_str();
  probe_cmd->add_option("--layout", probe.layout, "Synthetic: number_groups | digit_carry")->capture_default_str();
  probe_cmd->add_option("--lr", probe.hyper.learning_rate, "Learning rate")->capture_default_str();
  probe_cmd->add_option("--clip", probe.hyper.grad_clip, "Global gradient-norm clip")->capture_default_str();
  probe_cmd->add_option("--epochs", probe.hyper.epochs, "Epochs")->capture_default_str();
  probe_cmd->add_option("--batch", probe.hyper.batch_size, "Training batch size")->capture_default_str();
  probe_cmd->add_option("--seed", probe.hyper.seed, "Seed")->capture_default_str();

  ReportFlags report;
  auto* report_cmd = app.add_subcommand("report", "Markdown summary and SVG plots from stage outputs");
  report_cmd->add_option("--grade", report.grades, "grade_summary.json files (repeatable)");
  report_cmd->add_option("--breakdown", report.breakdown, "breakdown.json from intervene");
  report_cmd->add_option("--sweep", report.sweep, "sweep.csv from probe");

  for (auto* sub : app.get_subcommands({})) sub->configurable();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return 0;
  } catch (const CLI::FileError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    if (e.get_exit_code() != 0) err << "run with --help for usage\n";
    return 1;
  }

  const auto* sub = app.get_subcommands().front();
  Outputs outputs(common.out_dir);
  try {
    const auto& name = sub->get_name();
    if (name == "gen") {
      run_gen(gen, common, outputs);
      out << "wrote dataset to " << outputs.dir().string() << '\n';
    } else if (name == "render") {
      run_render(rend, out, outputs);
    } else if (name == "grade") {
      run_grade(grade, common, outputs, out);
    } else if (name == "intervene") {
      run_intervene(inter, common, outputs, out);
    } else if (name == "probe") {
      run_probe(probe, common, outputs, out);
    } else if (name == "report") {
      run_report(report, outputs, out);
    }
    write_manifest(app, name, outputs);
    return 0;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed input: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace cotvars
