// Copyright (c) 2026, cotvars contributors
// SPDX-License-Identifier: Apache-2.0

#include "cotvars/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "cotvars/error.hpp"
#include "cotvars/parallel.hpp"

namespace cotvars {

Scale Scale::parse(std::string_view text) {
  const auto x = text.find('x');
  auto read = [&](std::string_view part) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc{} || ptr != part.data() + part.size() || v == 0) {
      throw ValidationError("invalid scale '" + std::string(text) + "' (expected MxN, e.g. 4x4)");
    }
    return v;
  };
  if (x == std::string_view::npos) throw ValidationError("invalid scale '" + std::string(text) + "' (expected MxN)");
  return {read(text.substr(0, x)), read(text.substr(x + 1))};
}

void DatasetSpec::validate() const {
  if (count < 1) throw ValidationError("count must be at least 1");
  if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw ValidationError("split ratio must lie strictly in (0, 1)");
  if (scale.m < 1 || scale.n < 1) throw ValidationError("scale dimensions must be positive");
  if (!style_valid_for(task, style)) {
    throw ValidationError("style '" + std::string(to_string(style)) + "' is not valid for task '" +
                          std::string(to_string(task)) + "'");
  }
  if (merge_plan && style != PromptStyle::MergedLatentCot) {
    throw ValidationError("a merge plan is only valid with the merged_latent style");
  }
  if (merge_plan) merge_plan->validate(scale.m, scale.n);
  if (tokens.cot_open.empty() || tokens.cot_close.empty() || tokens.latent.empty()) {
    throw ValidationError("special tokens must be nonempty");
  }
}

Decimal sample_operand(std::size_t n_digits, Rng& rng) {
  if (n_digits < 1) throw ValidationError("operand needs at least one digit");
  std::vector<std::uint8_t> le(n_digits);
  for (std::size_t k = 0; k + 1 < n_digits; ++k) le[k] = static_cast<std::uint8_t>(rng.uniform(0, 9));
  le[n_digits - 1] = static_cast<std::uint8_t>(rng.uniform(1, 9));
  return Decimal::from_digits(std::move(le));
}

MergePlan make_merge_plan(std::size_t m, std::size_t n) {
  if (m != 5 || n != 5) {
    throw ValidationError("merge plans are defined for 5x5 grids only (got " + std::to_string(m) + "x" +
                          std::to_string(n) + ")");
  }
  return MergePlan{{1, 3, 4}, {1, 3, 4}};
}

namespace {

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > UINT64_MAX / a) return UINT64_MAX;
  return a * b;
}

std::uint64_t pow_sat(std::uint64_t base, std::size_t exp) {
  std::uint64_t v = 1;
  for (std::size_t k = 0; k < exp; ++k) v = saturating_mul(v, base);
  return v;
}

constexpr std::uint64_t kCellValues = static_cast<std::uint64_t>(kMaxCell - kMinCell + 1);

Grid sample_grid(Scale scale, Rng& rng) {
  Grid g(scale.m, scale.n);
  for (std::size_t i = 0; i < scale.m; ++i) {
    for (std::size_t j = 0; j < scale.n; ++j) {
      g.at(i, j) = static_cast<std::int64_t>(rng.uniform(kMinCell, kMaxCell));
    }
  }
  return g;
}

Grid enumerate_grid(Scale scale, std::uint64_t index) {
  Grid g(scale.m, scale.n);
  // Row-major cells, last cell varies fastest.
  for (std::size_t c = scale.m * scale.n; c-- > 0;) {
    g.at(c / scale.n, c % scale.n) = kMinCell + static_cast<std::int64_t>(index % kCellValues);
    index /= kCellValues;
  }
  return g;
}

std::pair<Decimal, Decimal> enumerate_pair(Scale scale, std::uint64_t index) {
  const std::uint64_t b_span = 9 * pow_sat(10, scale.n - 1);
  const std::uint64_t a = pow_sat(10, scale.m - 1) + index / b_span;
  const std::uint64_t b = pow_sat(10, scale.n - 1) + index % b_span;
  return {Decimal(a), Decimal(b)};
}

std::string grid_key(const Grid& g) {
  std::string key;
  for (auto v : g.cells()) {
    key += std::to_string(v);
    key.push_back(',');
  }
  return key;
}

std::string entry_id(const DatasetSpec& spec, std::size_t index, std::size_t width) {
  auto digits = std::to_string(index);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return std::string(to_string(spec.task)) + "-" + spec.scale.str() + "-" + std::string(to_string(spec.style)) + "-" +
         digits;
}

void render_into(Entry& e, const SpecialTokens& tokens, const MergePlan* plan) {
  RenderedExample ex;
  if (e.task == Task::Multiplication) {
    ex = render(multiply_with_trace(e.operands->first, e.operands->second), e.style, tokens);
  } else {
    ex = render(dp_with_trace(*e.grid), e.style, tokens, plan);
  }
  e.prompt = std::move(ex.prompt);
  e.target = std::move(ex.target);
  e.gold_final = std::move(ex.gold_final);
  e.latent_slots = std::move(ex.latent_slots);
}

struct Instance {
  std::optional<std::pair<Decimal, Decimal>> operands;
  std::optional<Grid> grid;
};

}  // namespace

std::uint64_t operand_space_size(Task task, Scale scale) {
  if (task == Task::Multiplication) {
    return saturating_mul(saturating_mul(9, pow_sat(10, scale.m - 1)), saturating_mul(9, pow_sat(10, scale.n - 1)));
  }
  return pow_sat(kCellValues, scale.m * scale.n);
}

Dataset generate_dataset(const DatasetSpec& spec, std::size_t jobs) {
  spec.validate();
  Dataset out;
  const std::uint64_t space = operand_space_size(spec.task, spec.scale);
  out.exhaustive = space < spec.count;
  const std::size_t count = out.exhaustive ? static_cast<std::size_t>(space) : spec.count;

  // Instances. Sampling is sequential so that duplicate rejection is
  // deterministic; each entry still draws only from its own stream.
  std::vector<Instance> instances(count);
  if (out.exhaustive) {
    for (std::size_t i = 0; i < count; ++i) {
      if (spec.task == Task::Multiplication) {
        instances[i].operands = enumerate_pair(spec.scale, i);
      } else {
        instances[i].grid = enumerate_grid(spec.scale, i);
      }
    }
  } else {
    std::unordered_set<std::string> seen;
    seen.reserve(count * 2);
    for (std::size_t i = 0; i < count; ++i) {
      auto rng = Rng::derive(spec.seed, "dataset", i);
      for (;;) {
        std::string key;
        if (spec.task == Task::Multiplication) {
          auto a = sample_operand(spec.scale.m, rng);
          auto b = sample_operand(spec.scale.n, rng);
          key = a.str() + "*" + b.str();
          instances[i].operands = std::make_pair(std::move(a), std::move(b));
        } else {
          auto g = sample_grid(spec.scale, rng);
          key = grid_key(g);
          instances[i].grid = std::move(g);
        }
        if (seen.insert(std::move(key)).second) break;
      }
    }
  }

  std::optional<MergePlan> plan = spec.merge_plan;
  if (spec.style == PromptStyle::MergedLatentCot && !plan) plan = make_merge_plan(spec.scale.m, spec.scale.n);

  const std::size_t width = std::max<std::size_t>(6, std::to_string(count).size());
  std::vector<Entry> entries(count);
  parallel_for(count, jobs, [&](std::size_t i) {
    Entry& e = entries[i];
    e.id = entry_id(spec, i, width);
    e.task = spec.task;
    e.scale = spec.scale;
    e.style = spec.style;
    e.operands = instances[i].operands;
    e.grid = instances[i].grid;
    render_into(e, spec.tokens, plan ? &*plan : nullptr);
  });

  // Split by a seeded permutation; each split keeps index order.
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  auto split_rng = Rng::derive(spec.seed, "split");
  for (std::size_t i = count; i > 1; --i) {
    std::swap(order[i - 1], order[split_rng.uniform(0, i - 1)]);
  }
  const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(count) * spec.split_ratio));
  std::vector<std::size_t> train_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test_idx(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  out.train.reserve(train_idx.size());
  out.test.reserve(test_idx.size());
  for (auto i : train_idx) out.train.push_back(std::move(entries[i]));
  for (auto i : test_idx) out.test.push_back(std::move(entries[i]));
  return out;
}

Entry restyle_entry(const Entry& source, PromptStyle style, const SpecialTokens& tokens, const MergePlan* plan) {
  if (!style_valid_for(source.task, style)) {
    throw ValidationError("style " + std::string(to_string(style)) + " is not defined for task " +
                          std::string(to_string(source.task)));
  }
  if (source.task == Task::Multiplication ? !source.operands : !source.grid) {
    throw ValidationError("entry " + source.id + " has no operands or grid");
  }
  Entry e;
  e.id = source.id;
  const auto old_style = "-" + std::string(to_string(source.style)) + "-";
  if (auto pos = e.id.find(old_style); pos != std::string::npos) {
    e.id.replace(pos, old_style.size(), "-" + std::string(to_string(style)) + "-");
  }
  e.task = source.task;
  e.scale = source.scale;
  e.style = style;
  e.operands = source.operands;
  e.grid = source.grid;
  std::optional<MergePlan> default_plan;
  if (style == PromptStyle::MergedLatentCot && plan == nullptr) {
    default_plan = make_merge_plan(e.scale.m, e.scale.n);
    plan = &*default_plan;
  }
  render_into(e, tokens, plan);
  return e;
}

MulTrace mul_trace_of(const Entry& entry) {
  if (entry.task != Task::Multiplication || !entry.operands) {
    throw ValidationError("entry " + entry.id + " has no multiplication operands");
  }
  return multiply_with_trace(entry.operands->first, entry.operands->second);
}

DpTrace dp_trace_of(const Entry& entry) {
  if (entry.task != Task::DP || !entry.grid) throw ValidationError("entry " + entry.id + " has no grid");
  return dp_with_trace(*entry.grid);
}

// ---------------------------------------------------------------------------
// JSON

namespace {

Json layout_to_json(const LatentLayout& layout) {
  Json j;
  j["kind"] = std::string(to_string(layout.kind));
  j["n_groups"] = layout.n_groups;
  return j;
}

LatentLayout layout_from_json(const Json& j) {
  const auto kind = layout_kind_from_string(j.at("kind").get<std::string>());
  const auto groups = j.at("n_groups").get<std::size_t>();
  if (kind == LayoutKind::DigitCarry) {
    if (groups != 2) throw ValidationError("digit_carry layout must have 2 groups");
    return LatentLayout::digit_carry();
  }
  return LatentLayout::number_groups(groups);
}

}  // namespace

Json merge_plan_to_json(const MergePlan& plan) {
  Json j;
  j["kept_rows"] = plan.kept_rows;
  j["kept_cols"] = plan.kept_cols;
  return j;
}

MergePlan merge_plan_from_json(const Json& j) {
  return MergePlan{j.at("kept_rows").get<std::vector<std::size_t>>(), j.at("kept_cols").get<std::vector<std::size_t>>()};
}

Json tokens_to_json(const SpecialTokens& tokens) {
  Json j;
  j["cot_open"] = tokens.cot_open;
  j["cot_close"] = tokens.cot_close;
  j["latent"] = tokens.latent;
  return j;
}

Json entry_to_json(const Entry& e) {
  Json j;
  j["id"] = e.id;
  j["task"] = std::string(to_string(e.task));
  j["scale"] = e.scale.str();
  j["style"] = std::string(to_string(e.style));
  j["prompt"] = e.prompt;
  j["target"] = e.target;
  j["gold_final"] = decimal_to_json(e.gold_final);
  if (e.operands) {
    j["operands"] = Json::array({decimal_to_json(e.operands->first), decimal_to_json(e.operands->second)});
  }
  if (e.grid) j["grid"] = e.grid->to_rows();
  Json slots = Json::array();
  for (const auto& s : e.latent_slots) {
    Json slot;
    slot["offset"] = s.offset;
    slot["hot_indices"] = s.vec.hot_indices();
    slot["layout"] = layout_to_json(s.vec.layout());
    slots.push_back(std::move(slot));
  }
  j["latent_slots"] = std::move(slots);
  return j;
}

Entry entry_from_json(const Json& j) {
  Entry e;
  e.id = j.at("id").get<std::string>();
  e.task = task_from_string(j.at("task").get<std::string>());
  e.scale = Scale::parse(j.at("scale").get<std::string>());
  e.style = style_from_string(j.at("style").get<std::string>());
  e.prompt = j.at("prompt").get<std::string>();
  e.target = j.at("target").get<std::string>();
  e.gold_final = decimal_from_json(j.at("gold_final"));
  if (j.contains("operands")) {
    const auto& ops = j.at("operands");
    if (!ops.is_array() || ops.size() != 2) throw ValidationError("operands must be a two-element array");
    e.operands = std::make_pair(decimal_from_json(ops[0]), decimal_from_json(ops[1]));
  }
  if (j.contains("grid")) e.grid = Grid::from_rows(j.at("grid").get<std::vector<std::vector<std::int64_t>>>());
  if (e.task == Task::Multiplication && !e.operands) throw ValidationError("multiplication entry without operands");
  if (e.task == Task::DP && !e.grid) throw ValidationError("dp entry without grid");
  for (const auto& s : j.value("latent_slots", Json::array())) {
    const auto layout = layout_from_json(s.at("layout"));
    const auto hot = s.at("hot_indices").get<std::vector<std::size_t>>();
    e.latent_slots.push_back({s.at("offset").get<std::size_t>(), LatentVec::from_hot_indices(layout, hot)});
  }
  return e;
}

Json dataset_card(const DatasetSpec& spec, const Dataset& dataset) {
  Json j;
  j["format_version"] = kCorpusFormatVersion;
  j["task"] = std::string(to_string(spec.task));
  j["scale"] = spec.scale.str();
  j["style"] = std::string(to_string(spec.style));
  j["count"] = spec.count;
  j["split_ratio"] = spec.split_ratio;
  j["seed"] = spec.seed;
  j["exhaustive"] = dataset.exhaustive;
  j["train_count"] = dataset.train.size();
  j["test_count"] = dataset.test.size();
  j["tokens"] = tokens_to_json(spec.tokens);
  if (spec.style == PromptStyle::MergedLatentCot) {
    j["merge_plan"] = merge_plan_to_json(spec.merge_plan ? *spec.merge_plan : make_merge_plan(spec.scale.m, spec.scale.n));
  }
  return j;
}

}  // namespace cotvars
