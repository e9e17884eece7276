// Copyright (c) 2026, cotvars contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <set>

#include "cotvars/corpus.hpp"
#include "cotvars/error.hpp"

using namespace cotvars;

namespace {

DatasetSpec small_spec(Task task, const char* scale, PromptStyle style, std::size_t count, std::uint64_t seed = 1) {
  DatasetSpec spec;
  spec.task = task;
  spec.scale = Scale::parse(scale);
  spec.style = style;
  spec.count = count;
  spec.seed = seed;
  return spec;
}

std::vector<std::string> ids(const std::vector<Entry>& v) {
  std::vector<std::string> out;
  for (const auto& e : v) out.push_back(e.id);
  return out;
}

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("scale parsing") {
    CHECK(Scale::parse("4x5") == Scale{4, 5});
    CHECK(Scale::parse("4x5").str() == "4x5");
    CHECK_THROWS_AS(Scale::parse("4*5"), ValidationError);
    CHECK_THROWS_AS(Scale::parse("0x5"), ValidationError);
  }

  TEST_CASE("sampled operands have exact digit counts") {
    auto rng = Rng::derive(4, "t");
    for (int i = 0; i < 500; ++i) {
      const auto v = sample_operand(5, rng);
      REQUIRE(v.digit_count() == 5);
      REQUIRE(v.leading_digit() != 0);
    }
  }

  TEST_CASE("split sizes and disjointness") {
    const auto ds = generate_dataset(small_spec(Task::Multiplication, "4x4", PromptStyle::FullCot, 1000));
    CHECK_FALSE(ds.exhaustive);
    CHECK(ds.train.size() == 900);
    CHECK(ds.test.size() == 100);
    std::set<std::string> seen;
    for (const auto& e : ds.train) seen.insert(e.operands->first.str() + "*" + e.operands->second.str());
    for (const auto& e : ds.test) seen.insert(e.operands->first.str() + "*" + e.operands->second.str());
    CHECK(seen.size() == 1000);
  }

  TEST_CASE("generation is deterministic and job-count independent") {
    const auto spec = small_spec(Task::DP, "3x3", PromptStyle::LatentCot, 300, 9);
    const auto one = generate_dataset(spec, 1);
    const auto four = generate_dataset(spec, 4);
    CHECK(one.train == four.train);
    CHECK(one.test == four.test);
    const auto other_seed = generate_dataset(small_spec(Task::DP, "3x3", PromptStyle::LatentCot, 300, 10));
    CHECK(ids(one.test) != ids(other_seed.test));
  }

  TEST_CASE("small spaces are enumerated exhaustively") {
    const auto ds = generate_dataset(small_spec(Task::Multiplication, "1x2", PromptStyle::FullCot, 100000));
    CHECK(ds.exhaustive);
    CHECK(ds.train.size() + ds.test.size() == 810);
    CHECK(ds.train.size() == 729);
    CHECK(operand_space_size(Task::Multiplication, Scale{1, 2}) == 810);
    CHECK(operand_space_size(Task::DP, Scale{1, 2}) == 98 * 98);
    CHECK(operand_space_size(Task::Multiplication, Scale{20, 20}) == UINT64_MAX);
  }

  TEST_CASE("entries keep their gold answer and ids") {
    const auto ds = generate_dataset(small_spec(Task::Multiplication, "3x2", PromptStyle::CompressedCot, 50, 3));
    for (const auto& e : ds.train) {
      REQUIRE(e.gold_final == mul_trace_of(e).final);
      REQUIRE(e.id.rfind("mul-3x2-compressed-", 0) == 0);
      REQUIRE(e.target.size() > e.gold_final.str().size());
    }
  }

  TEST_CASE("entry JSON round trip and key order") {
    const auto ds = generate_dataset(small_spec(Task::DP, "5x5", PromptStyle::MergedLatentCot, 5, 2));
    REQUIRE_FALSE(ds.train.empty());
    const auto& e = ds.train.front();
    CHECK(e.latent_slots.size() == 9);
    const auto j = entry_to_json(e);
    std::vector<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
    CHECK(keys == std::vector<std::string>{"id", "task", "scale", "style", "prompt", "target", "gold_final", "grid",
                                           "latent_slots"});
    CHECK(entry_from_json(Json::parse(j.dump())) == e);

    const auto m = generate_dataset(small_spec(Task::Multiplication, "2x2", PromptStyle::LatentCot, 5, 2));
    const auto mj = entry_to_json(m.train.front());
    CHECK(mj.contains("operands"));
    CHECK(entry_from_json(mj) == m.train.front());
  }

  TEST_CASE("merge plan") {
    const auto plan = make_merge_plan(5, 5);
    CHECK(plan.kept_rows == std::vector<std::size_t>{1, 3, 4});
    CHECK(plan.kept_cols == std::vector<std::size_t>{1, 3, 4});
    CHECK(plan.cell_count() == 9);
    CHECK_THROWS_AS(make_merge_plan(4, 4), ValidationError);
    CHECK(merge_plan_from_json(merge_plan_to_json(plan)) == plan);
  }

  TEST_CASE("invalid specs") {
    auto spec = small_spec(Task::Multiplication, "2x2", PromptStyle::MergedLatentCot, 10);
    CHECK_THROWS_AS(generate_dataset(spec), ValidationError);
    spec = small_spec(Task::DP, "2x2", PromptStyle::CompressedCot, 10);
    CHECK_THROWS_AS(generate_dataset(spec), ValidationError);
    spec = small_spec(Task::Multiplication, "2x2", PromptStyle::FullCot, 10);
    spec.split_ratio = 1.5;
    CHECK_THROWS_AS(generate_dataset(spec), ValidationError);
    spec.split_ratio = 0.9;
    spec.count = 0;
    CHECK_THROWS_AS(generate_dataset(spec), ValidationError);
  }

  TEST_CASE("restyle keeps operands and rewrites the id") {
    const auto ds = generate_dataset(small_spec(Task::Multiplication, "3x3", PromptStyle::FullCot, 10, 5));
    const auto& e = ds.train.front();
    const auto latent = restyle_entry(e, PromptStyle::LatentCot);
    CHECK(latent.operands == e.operands);
    CHECK(latent.id.find("-latent-") != std::string::npos);
    CHECK(latent.latent_slots.size() == 9);
    CHECK_THROWS_AS(restyle_entry(e, PromptStyle::MergedLatentCot), ValidationError);
  }

  TEST_CASE("dataset card") {
    const auto spec = small_spec(Task::Multiplication, "2x2", PromptStyle::FullCot, 100, 8);
    const auto ds = generate_dataset(spec);
    const auto card = dataset_card(spec, ds);
    CHECK(card["format_version"] == kCorpusFormatVersion);
    CHECK(card["train_count"] == 90);
    CHECK(card["seed"] == 8);
  }
}
