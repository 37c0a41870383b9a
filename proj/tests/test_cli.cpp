#include "hsr/degradation.hpp"
#include "hsr/io.hpp"
#include "hsr/metrics.hpp"
#include "cli_runner.hpp"

#include <doctest.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>

using nlohmann::json;

namespace {

// 27x27x16 synthetic SRI with known factors.
void generate(const cli::TempDir& d, const std::string& extra = "") {
  const auto r = cli::hsrfuse("generate --dims 27 27 16 --R 3 --L 2 --seed 42 --out " + d / "sri.hsrt" +
                                  " --factors-out " + d / "truth.json" + " " + extra,
                              d.path);
  REQUIRE(r.code == 0);
}

const std::string kDeg = " --kernel-size 3 --sigma 1.5 --ratio 3";

}  // namespace

TEST_CASE("usage errors") {
  cli::TempDir d("hsr_cli_usage");
  CHECK(cli::hsrfuse("", d.path).code == 1);
  CHECK(cli::hsrfuse("frobnicate", d.path).code == 1);
  CHECK(cli::hsrfuse("generate --dims 3 3", d.path).code == 1);
  CHECK(cli::hsrfuse("--help", d.path).code == 0);
  generate(d);
  const auto r = cli::hsrfuse("simulate --sri " + d / "sri.hsrt" + " --hsi-out " + d / "h" + " --msi-out " + d / "m" +
                                  " --kernel-size 4",
                              d.path);
  CHECK(r.code == 1);
  CHECK(r.err.find("error:") != std::string::npos);
  CHECK(cli::hsrfuse("simulate --sri " + d / "sri.hsrt" + " --hsi-out " + d / "h" + " --msi-out " + d / "m" +
                         " --snr-db loud",
                     d.path)
            .code == 1);
}

TEST_CASE("simulate") {
  cli::TempDir d("hsr_cli_simulate");
  generate(d);
  const std::string base = "simulate --sri " + d / "sri.hsrt" + kDeg + " --msi-bands 4 --seed 5";
  const auto r = cli::hsrfuse(base + " --hsi-out " + d / "h1" + " --msi-out " + d / "m1", d.path);
  REQUIRE(r.code == 0);
  const auto manifest = json::parse(r.out);
  CHECK(manifest["hsi"]["dims"] == json::array({9, 9, 16}));
  CHECK(manifest["msi"]["dims"] == json::array({27, 27, 4}));
  CHECK(std::abs(manifest["hsi"]["realized_snr_db"].get<double>() - 30.0) < 0.5);

  REQUIRE(cli::hsrfuse(base + " --hsi-out " + d / "h2" + " --msi-out " + d / "m2", d.path).code == 0);
  CHECK(cli::slurp(d / "h1") == cli::slurp(d / "h2"));
  CHECK(cli::slurp(d / "m1") == cli::slurp(d / "m2"));

  // Noiseless output is exactly the library degradation.
  REQUIRE(cli::hsrfuse(base + " --snr-db inf --hsi-out " + d / "h3" + " --msi-out " + d / "m3", d.path).code == 0);
  const auto sri = hsr::read_tensor(d / "sri.hsrt");
  const auto ops = hsr::build_degradation(sri.dims(), {3, 1.5, 3, 0, ""}, 4);
  const auto pair = hsr::apply_degradation(sri, ops);
  CHECK(hsr::read_tensor(d / "h3") == pair.hsi);
  CHECK(hsr::read_tensor(d / "m3") == pair.msi);

  const auto missing = cli::hsrfuse("simulate --sri " + d / "nope.hsrt" + " --hsi-out " + d / "h" + " --msi-out " +
                                        d / "m",
                                    d.path);
  CHECK(missing.code == 2);
  CHECK(missing.err.find(d / "nope.hsrt") != std::string::npos);
}

TEST_CASE("fuse and evaluate") {
  cli::TempDir d("hsr_cli_fuse");
  generate(d);
  REQUIRE(cli::hsrfuse("simulate --sri " + d / "sri.hsrt" + kDeg + " --snr-db inf --hsi-out " + d / "hsi" +
                           " --msi-out " + d / "msi",
                       d.path)
              .code == 0);
  const std::string io = " --hsi " + d / "hsi" + " --msi " + d / "msi" + kDeg;

  SUBCASE("evaluate identity") {
    const auto r = cli::hsrfuse("evaluate --ref " + d / "sri.hsrt" + " --est " + d / "sri.hsrt" + " --ratio 3", d.path);
    REQUIRE(r.code == 0);
    const auto m = json::parse(r.out);
    CHECK(m["r_snr_db"] == 300.0);
    CHECK(m["cc"].get<double>() == doctest::Approx(1.0));
    CHECK(m["sam_rad"].get<double>() == doctest::Approx(0.0));
    CHECK(m["ergas"] == 0.0);
    const auto missing = cli::hsrfuse("evaluate --ref " + d / "sri.hsrt" + " --est " + d / "gone.hsrt", d.path);
    CHECK(missing.code == 2);
    CHECK(missing.err.find(d / "gone.hsrt") != std::string::npos);
    const auto mismatch = cli::hsrfuse("evaluate --ref " + d / "sri.hsrt" + " --est " + d / "hsi", d.path);
    CHECK(mismatch.code == 1);
  }

  SUBCASE("stereo and cnn_btd both report their configuration") {
    for (const char* m : {"stereo", "cnn_btd"}) {
      const auto r = cli::hsrfuse(std::string("fuse") + io + " --method " + m + " --R 3 --L 2 --outer-iters 3 --out " +
                                      d / "est",
                                  d.path);
      REQUIRE(r.code == 0);
      const auto s = json::parse(r.out);
      CHECK(s["method"] == m);
      CHECK(s["trace_length"] == 9);
      CHECK(s["outer_iters"] == 3);
      CHECK(s.contains("final_objective"));
      CHECK(s.contains("wall_time_s"));
    }
  }

  SUBCASE("cnn_cpd equals cnn_btd with L = 1") {
    REQUIRE(cli::hsrfuse("fuse" + io + " --method cnn_cpd --R 4 --outer-iters 4 --seed 3 --out " + d / "cpd", d.path)
                .code == 0);
    REQUIRE(cli::hsrfuse("fuse" + io + " --method cnn_btd --R 4 --L 1 --outer-iters 4 --seed 3 --out " + d / "btd",
                         d.path)
                .code == 0);
    const auto a = hsr::read_tensor(d / "cpd");
    const auto b = hsr::read_tensor(d / "btd");
    CHECK(hsr::frob_norm(a - b) <= 1e-12 * hsr::frob_norm(b));
  }

  SUBCASE("two_stage from a warm start") {
    const auto r = cli::hsrfuse("fuse" + io + " --method two_stage --R 3 --L 2 --outer-iters 50 --init-factors " +
                                    d / "truth.json" + " --init-perturb 0.01 --seed 7 --out " + d / "est" +
                                    " --factors-out " + d / "fit.json",
                                d.path);
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["init"] == "provided");
    const auto e = cli::hsrfuse("evaluate --ref " + d / "sri.hsrt" + " --est " + d / "est" + " --ratio 3", d.path);
    REQUIRE(e.code == 0);
    CHECK(json::parse(e.out)["r_snr_db"].get<double>() >= 40.0);
    CHECK(hsr::read_factors(d / "fit.json").rank == hsr::RankSpec::uniform(3, 2));

    // Metrics equal the library call.
    const auto lib = hsr::evaluate(hsr::read_tensor(d / "sri.hsrt"), hsr::read_tensor(d / "est"), 3.0);
    CHECK(json::parse(e.out) == json::parse(lib.to_json()));
  }

  SUBCASE("identifiability warning is not fatal") {
    const auto r =
        cli::hsrfuse("fuse" + io + " --method cnn_btd --R 10 --L 20 --outer-iters 1 --out " + d / "est", d.path);
    CHECK(r.code == 0);
    CHECK(r.err.find("warning") != std::string::npos);
    CHECK(json::parse(r.out)["warnings"].size() >= 1);
  }

  SUBCASE("inputs are not modified") {
    const std::string before = cli::slurp(d / "hsi");
    REQUIRE(cli::hsrfuse("fuse" + io + " --R 3 --L 2 --outer-iters 1 --out " + d / "est", d.path).code == 0);
    CHECK(cli::slurp(d / "hsi") == before);
  }

  SUBCASE("provided init needs factors") {
    CHECK(cli::hsrfuse("fuse" + io + " --init provided --out " + d / "est", d.path).code == 1);
  }
}

TEST_CASE("bench") {
  cli::TempDir d("hsr_cli_bench");
  auto write_config = [&](const std::string& out, bool timing) {
    json cfg{{"trials", 2},
             {"snr_db", 30},
             {"seed_base", 11},
             {"output", out},
             {"timing", timing},
             {"degradation", {{"kernel_size", 3}, {"sigma", 1.5}, {"ratio", 3}, {"msi_bands", 4}}},
             {"synthetic", {{"dims", {18, 18, 12}}, {"R", 2}, {"L", 2}, {"seed", 1}}},
             {"methods",
              {{{"method", "cnn_btd"}, {"label", "CNN-BTD"}, {"R", 2}, {"L", 2}, {"outer_iters", 3}},
               {{"method", "stereo"}, {"label", "STEREO"}, {"R", 4}, {"outer_iters", 3}},
               {{"method", "two_stage"}, {"R", 2}, {"L", 2}, {"outer_iters", 3}}}}};
    std::ofstream(d / "bench.json") << cfg.dump();
  };

  write_config(d / "t1.md", false);
  REQUIRE(cli::hsrfuse("bench " + d / "bench.json", d.path).code == 0);
  const std::string table = cli::slurp(d / "t1.md");
  CHECK(table.find("| Algorithm | R-SNR | CC | SAM | ERGAS |") == 0);
  CHECK(table.find("| CNN-BTD |") != std::string::npos);
  CHECK(table.find("| STEREO |") != std::string::npos);
  CHECK(table.find("| two_stage |") != std::string::npos);
  CHECK(table.find("n/a") == std::string::npos);
  CHECK(table.find("2/2") != std::string::npos);

  write_config(d / "t2.md", false);
  REQUIRE(cli::hsrfuse("bench " + d / "bench.json", d.path).code == 0);
  CHECK(cli::slurp(d / "t2.md") == table);

  write_config(d / "t.csv", true);
  REQUIRE(cli::hsrfuse("bench " + d / "bench.json", d.path).code == 0);
  const std::string csv = cli::slurp(d / "t.csv");
  CHECK(csv.find("Algorithm,R-SNR,CC,SAM,ERGAS,runtime(sec),trials_ok\n") == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);

  std::ofstream(d / "bad.json") << "{\"trials\": 0}";
  CHECK(cli::hsrfuse("bench " + d / "bad.json", d.path).code == 1);
  CHECK(cli::hsrfuse("bench " + d / "absent.json", d.path).code == 2);
}

TEST_CASE("check") {
  cli::TempDir d("hsr_cli_check");
  const auto no = cli::hsrfuse("check --msi-dims 145 145 4 --hsi-dims 29 29 --R 10 --L 20", d.path);
  REQUIRE(no.code == 0);
  CHECK(json::parse(no.out)["identifiable"] == false);
  const auto yes = cli::hsrfuse("check --msi-dims 27 27 4 --hsi-dims 9 9 --R 3 --L 2", d.path);
  REQUIRE(yes.code == 0);
  CHECK(json::parse(yes.out)["identifiable"] == true);
}
