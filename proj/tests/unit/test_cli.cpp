// Copyright (c) 2026, cotvars contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include "cotvars/cli.hpp"
#include "cotvars/corpus.hpp"
#include "cotvars/json.hpp"
#include "cotvars/probe.hpp"
#include "support.hpp"

using namespace cotvars;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t line_count(const fs::path& p) {
  const auto s = slurp(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("gen writes dataset, card, manifest") {
    const auto dir = testing::scratch_dir("cli-gen");
    const auto r = cli({"--out", dir.string(), "gen", "--task", "mul", "--scale", "3x3", "--count", "50", "--seed", "7"});
    REQUIRE(r.code == 0);
    CHECK(line_count(dir / "train.jsonl") == 45);
    CHECK(line_count(dir / "test.jsonl") == 5);
    const auto card = read_json(dir / "card.json");
    CHECK(card["seed"] == 7);
    const auto manifest = read_json(dir / "manifest.json");
    CHECK(manifest["subcommand"] == "gen");
    CHECK(manifest["format_versions"]["corpus"] == kCorpusFormatVersion);
    CHECK(manifest["outputs"].size() == 3);
    CHECK(fs::exists(dir / "run.toml"));
  }

  TEST_CASE("default count is 100000") {
    const auto dir = testing::scratch_dir("cli-gen-default");
    REQUIRE(cli({"--out", dir.string(), "--jobs", "2", "gen", "--task", "mul", "--scale", "4x4", "--style", "full",
                 "--seed", "7"})
                .code == 0);
    CHECK(line_count(dir / "train.jsonl") + line_count(dir / "test.jsonl") == 100000);
  }

  TEST_CASE("replaying run.toml reproduces every stage byte for byte") {
    const auto base = testing::scratch_dir("cli-replay");
    const auto ds = (base / "gen" / "test.jsonl").string();
    REQUIRE(cli({"--out", (base / "gen").string(), "gen", "--task", "dp", "--scale", "3x3", "--count", "80",
                 "--style", "latent", "--seed", "2"})
                .code == 0);
    {
      std::ofstream o(base / "outputs.jsonl");
      for (const auto& j : read_jsonl(ds)) o << Json{{"id", j["id"]}, {"output", j["target"]}}.dump() << '\n';
    }
    REQUIRE(cli({"--out", (base / "grade").string(), "grade", "--dataset", ds, "--outputs",
                 (base / "outputs.jsonl").string()})
                .code == 0);
    REQUIRE(cli({"--out", (base / "inter").string(), "intervene", "--dataset", ds, "--seed", "3"}).code == 0);
    REQUIRE(cli({"--out", (base / "probe").string(), "probe", "--synthetic", "--samples", "200", "--eval-samples",
                 "50", "--layers", "3", "--signal-from", "1", "--hidden", "64"})
                .code == 0);
    for (const char* stage : {"gen", "grade", "inter", "probe"}) {
      const auto first = base / stage;
      const auto again = base / (std::string(stage) + "-replay");
      REQUIRE(cli({"--config", (first / "run.toml").string(), "--out", again.string()}).code == 0);
      for (const auto& e : fs::directory_iterator(first)) {
        const auto name = e.path().filename().string();
        if (name == "manifest.json" || name == "run.toml" || e.path().extension() == ".svg") continue;
        INFO(stage << "/" << name);
        CHECK(slurp(e.path()) == slurp(again / name));
      }
    }
  }

  TEST_CASE("grade and intervene outputs") {
    const auto base = testing::scratch_dir("cli-grade");
    REQUIRE(cli({"--out", base.string(), "gen", "--task", "mul", "--scale", "2x3", "--count", "40"}).code == 0);
    const auto ds = (base / "test.jsonl").string();
    {
      std::ofstream o(base / "o.jsonl");
      bool flip = false;
      for (const auto& j : read_jsonl(ds)) {
        o << Json{{"id", j["id"]}, {"output", flip ? std::string("Result: 0") : j["target"].get<std::string>()}}.dump()
          << '\n';
        flip = !flip;
      }
    }
    REQUIRE(cli({"--out", (base / "g").string(), "grade", "--dataset", ds, "--outputs", (base / "o.jsonl").string()})
                .code == 0);
    const auto summary = read_json(base / "g" / "grade_summary.json");
    CHECK(summary["accuracy"] == 0.5);
    CHECK(line_count(base / "g" / "grade_report.jsonl") == 4);

    REQUIRE(cli({"--out", (base / "i").string(), "intervene", "--dataset", ds, "--seed", "3"}).code == 0);
    CHECK(line_count(base / "i" / "interventions.jsonl") == 4);

    {
      std::ofstream c(base / "c.jsonl");
      for (const auto& j : read_jsonl(base / "i" / "interventions.jsonl")) {
        c << Json{{"id", j["id"]}, {"continuation", "\n\nResult: " + j["expected_final"].dump()}}.dump() << '\n';
      }
    }
    REQUIRE(cli({"--out", (base / "k").string(), "intervene", "--dataset", ds, "--interventions",
                 (base / "i" / "interventions.jsonl").string(), "--continuations", (base / "c.jsonl").string()})
                .code == 0);
    const auto b = read_json(base / "k" / "breakdown.json");
    CHECK(b["success"] == 4);
    CHECK(slurp(base / "k" / "interventions.jsonl") == slurp(base / "i" / "interventions.jsonl"));

    REQUIRE(cli({"--out", (base / "r").string(), "report", "--grade", (base / "g" / "grade_summary.json").string(),
                 "--breakdown", (base / "k" / "breakdown.json").string()})
                .code == 0);
    CHECK(slurp(base / "r" / "report.md").find("| Success | 4 |") != std::string::npos);
    CHECK(fs::exists(base / "r" / "accuracy_by_scale.svg"));
    CHECK(fs::exists(base / "r" / "breakdown.svg"));
  }

  TEST_CASE("probe reads tensor dumps") {
    const auto base = testing::scratch_dir("cli-probe");
    SynthFixtureConfig cfg;
    cfg.n_samples = 3000;
    cfg.n_layers = 2;
    cfg.signal_from_layer = 1;
    cfg.hidden_width = 64;
    write_dump_dir(base / "dumps", synth_fixture(cfg));
    REQUIRE(cli({"--out", (base / "p").string(), "probe", "--dumps", (base / "dumps").string()}).code == 0);
    const auto sweep = read_json(base / "p" / "sweep.json");
    CHECK(sweep["layers"].size() == 2);
    CHECK(sweep["layers"][1]["token_accuracy"].get<double>() >= 0.99);
    REQUIRE(cli({"--out", (base / "r").string(), "report", "--sweep", (base / "p" / "sweep.csv").string()}).code == 0);
    CHECK(fs::exists(base / "r" / "layers.svg"));
  }

  TEST_CASE("render prints the worked example") {
    const auto dir = testing::scratch_dir("cli-render");
    const auto r = cli({"--out", dir.string(), "render", "--task", "mul", "--a", "3773", "--b", "6821"});
    REQUIRE(r.code == 0);
    CHECK(slurp(dir / "rendered.txt") == testing::read_golden("mul_full_cot.txt"));
    const auto d = cli({"--out", dir.string(), "render", "--task", "dp", "--style", "latent", "--grid",
                        "15,5,59,62,22;41,61,7,12,27;98,60,34,94,24;45,40,12,77,11;56,94,46,34,45"});
    REQUIRE(d.code == 0);
    CHECK(slurp(dir / "rendered.txt") == testing::read_golden("dp_latent_cot.txt"));
  }

  TEST_CASE("exit codes") {
    const auto dir = testing::scratch_dir("cli-errors");
    CHECK(cli({}).code == 1);
    CHECK(cli({"gen", "--task", "mul"}).code == 1);                                  // missing flag
    CHECK(cli({"gen", "--task", "mul", "--scale", "2x2", "--bogus"}).code == 1);     // unknown flag
    CHECK(cli({"--out", dir.string(), "gen", "--task", "mul", "--scale", "2x2", "--style", "merged"}).code == 1);
    CHECK(cli({"--out", dir.string(), "grade", "--dataset", (dir / "none.jsonl").string(), "--outputs", "x"}).code == 2);
    CHECK(cli({"--config", (dir / "none.toml").string()}).code == 2);
    {
      std::ofstream bad(dir / "bad.jsonl");
      bad << "{\"id\": 1}\n";
    }
    CHECK(cli({"--out", dir.string(), "intervene", "--dataset", (dir / "bad.jsonl").string()}).code == 1);
    {
      std::ofstream card(dir / "card.json");
      card << "{\"format_version\": 99}\n";
    }
    const auto schema = cli({"--out", dir.string(), "intervene", "--dataset", (dir / "bad.jsonl").string()});
    CHECK(schema.code == 1);
    CHECK(schema.err.find("format_version") != std::string::npos);
    CHECK(cli({"--help"}).code == 0);
  }

  TEST_CASE("output directory from the environment") {
    const auto dir = testing::scratch_dir("cli-env");
    ::setenv("COTVARS_OUT", dir.string().c_str(), 1);
    const auto r = cli({"render", "--task", "mul", "--a", "12", "--b", "34"});
    ::unsetenv("COTVARS_OUT");
    REQUIRE(r.code == 0);
    CHECK(fs::exists(dir / "rendered.txt"));
  }
}
