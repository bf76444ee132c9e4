// Copyright 2026 The Compod Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "compod/error.hpp"
#include "compod/io.hpp"
#include "compod/pipeline.hpp"
#include "compod/synthetic.hpp"

using namespace compod;
namespace fs = std::filesystem;

TEST_CASE("toml subset") {
  const auto kv = parse_toml(
      "# comment\nseed = 7\n\n[labelling]\nmethod = \"proxy=a#b.obj\"  # trailing\n"
      "lambda = 0.25\n[surface]\nremesh = false\n");
  CHECK(kv.at("seed") == "7");
  CHECK(kv.at("labelling.method") == "proxy=a#b.obj");
  CHECK(kv.at("labelling.lambda") == "0.25");
  CHECK(kv.at("surface.remesh") == "false");
  CHECK_THROWS_AS(parse_toml("[open\n"), ParseError);
  CHECK_THROWS_AS(parse_toml("a = 1\na = 2\n"), ParseError);
  CHECK_THROWS_AS(parse_toml("novalue\n"), ParseError);
  try {
    parse_toml("a = 1\n\nb =\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 3);
  }
}

TEST_CASE("config file values and validation") {
  PipelineConfig cfg;
  apply_toml(cfg,
             "seed = 3\n[arrangement]\nordering = \"area-desc\"\nbasis = \"hull-sampled=500\"\n"
             "[decomposition]\ntau = \"2%\"\ncell_merge = false\n");
  CHECK(cfg.seed == 3);
  CHECK(cfg.ordering == Ordering::AreaDesc);
  CHECK(cfg.basis == Basis::HullSampled);
  CHECK(cfg.hull_samples == 500);
  CHECK(cfg.tau == doctest::Approx(0.02));
  CHECK(cfg.tau_is_fraction);
  CHECK_FALSE(cfg.cell_merge);
  CHECK(cfg.arrangement().seed == 3);
  CHECK(cfg.label_config().seed == 3);

  CHECK_THROWS_AS(apply_toml(cfg, "bogus = 1\n"), ParseError);
  CHECK_THROWS_AS(apply_toml(cfg, "[labelling]\nlambda = abc\n"), ValidationError);
  CHECK_THROWS_AS(parse_ordering("random"), ValidationError);
  CHECK_THROWS_AS(parse_label("proxy=", cfg), ValidationError);
  PipelineConfig bad;
  bad.labelling.lambda = -1.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("config hash tracks result-affecting fields only") {
  PipelineConfig a, b;
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  b.threads = 8;
  b.out_dir = "/elsewhere";
  CHECK(config_hash(a) == config_hash(b));
  b.labelling.lambda = 0.6;
  CHECK(config_hash(a) != config_hash(b));
  PipelineConfig c;
  c.seed = 1;
  CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("pipeline on the cube") {
  const SyntheticScene s = box_union_scene({{Vec3::Zero(), Vec3::Ones()}}, 2000.0, 2000, 1);
  PipelineConfig cfg;
  const PipelineResult r = run_pipeline(s.cloud, s.primitives, cfg);
  CHECK(r.report.cells == 7);
  CHECK(r.report.surface_facets == 6);
  CHECK(r.report.volume_cells == 1);
  CHECK(r.labels.count(Label::Inside) == 1);

  cfg.remesh = false;
  cfg.cell_merge = false;
  const PipelineResult raw = run_pipeline(s.cloud, s.primitives, cfg);
  CHECK(raw.surface.remeshed.facets.size() == raw.surface.raw.facets.size());
  CHECK(raw.report.volume_cells == 1);
}

#ifdef COMPOD_CLI_PATH
namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(COMPOD_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("command line") {
  const fs::path dir = fs::temp_directory_path() / "compod_cli_test";
  fs::remove_all(dir);
  const std::string d = dir.string();

  REQUIRE(run_cli("synth --kind cube --out " + d + "/fx") == 0);
  CHECK(run_cli("partition " + d + "/fx/primitives.json --cloud " + d + "/fx/cloud.ply --out " +
                d + "/p") == 0);
  const Arrangement arr = arrangement_from_json(read_file(d + "/p/arrangement.json"));
  CHECK(arr.leaves().size() == 7);

  const std::string label_args =
      " --primitives " + d + "/fx/primitives.json --cloud " + d + "/fx/cloud.ply";
  CHECK(run_cli("surface " + d + "/p/arrangement.json" + label_args + " --out " + d + "/s") == 0);
  CHECK(load_mesh(d + "/s/surface_remeshed.obj").facets.size() == 6);

  // A huge smoothness weight labels every cell outside.
  CHECK(run_cli("surface " + d + "/p/arrangement.json" + label_args + " --lambda 1000 --out " +
                d + "/empty") == 0);
  CHECK(fs::exists(d + "/empty/surface.obj"));
  CHECK(fs::file_size(d + "/empty/surface.obj") == 0);

  CHECK(run_cli("decompose " + d + "/p/arrangement.json --labels " + d +
                "/s/labels.json --out " + d + "/c") == 0);
  CHECK(decomposition_from_json(read_file(d + "/c/convexes.json")).halfspaces.size() == 1);

  CHECK(run_cli("evaluate " + d + "/s/surface.obj " + d + "/missing.obj --out " + d + "/e") == 3);
  CHECK(run_cli("partition " + d + "/fx/primitives.json --cloud " + d +
                "/fx/cloud.ply --ordering sideways") == 2);
  CHECK(run_cli("surface " + d + "/p/arrangement.json --out " + d + "/x") == 2);

  // Flags override the file; thread count changes nothing.
  {
    std::ofstream(d + "/cfg.toml") << "seed = 5\n[labelling]\nlambda = 1000.0\n";
  }
  CHECK(run_cli("evaluate " + d + "/s/surface.obj " + d + "/fx/ground_truth.obj --samples 5000 " +
                "--config " + d + "/cfg.toml --lambda 0.5 --threads 1 --out " + d + "/e1") == 0);
  CHECK(run_cli("evaluate " + d + "/s/surface.obj " + d + "/fx/ground_truth.obj --samples 5000 " +
                "--config " + d + "/cfg.toml --lambda 0.5 --threads 3 --out " + d + "/e3") == 0);
  const std::string r1 = read_file(d + "/e1/report.json");
  CHECK(r1 == read_file(d + "/e3/report.json"));
  PipelineConfig expect;
  expect.seed = 5;
  expect.samples = 5000;
  CHECK(report_from_json(r1).config_hash == config_hash(expect));

  CHECK(run_cli("bench --levels 2,4,8 --methods exhaustive --out " + d + "/b") == 0);
  std::istringstream csv(read_file(d + "/b/bench.csv"));
  std::string line;
  std::getline(csv, line);
  std::size_t prev = 0;
  int rows = 0;
  while (std::getline(csv, line)) {
    std::stringstream ls(line);
    std::string method, planes, cells;
    std::getline(ls, method, ',');
    std::getline(ls, planes, ',');
    std::getline(ls, cells, ',');
    CHECK(std::stoul(cells) >= prev);
    prev = std::stoul(cells);
    ++rows;
  }
  CHECK(rows == 3);
  fs::remove_all(dir);
}
#endif
