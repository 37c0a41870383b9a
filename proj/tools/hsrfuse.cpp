// hsrfuse: command-line front end to the hsr C API.
//
//   hsrfuse generate  --dims I J K --R 3 --L 2 --out sri.hsrt
//   hsrfuse simulate  --sri sri.hsrt --hsi-out hsi.hsrt --msi-out msi.hsrt
//   hsrfuse fuse      --hsi hsi.hsrt --msi msi.hsrt --method cnn_btd --out est.hsrt
//   hsrfuse evaluate  --ref sri.hsrt --est est.hsrt --ratio 5
//   hsrfuse bench     bench.json
//   hsrfuse check     --msi-dims 145 145 4 --hsi-dims 29 29 --R 10 --L 20
//
// Exit codes: 0 success, 1 usage, 2 I/O, 3 numerical.

#include "hsr/hsr.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using json = nlohmann::ordered_json;

namespace {

class CliError : public std::runtime_error {
 public:
  CliError(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
  int code() const { return code_; }

 private:
  int code_;
};

void check(hsr_status s) {
  if (s != HSR_OK) throw CliError(int(s), hsr_last_error());
}

struct TensorDeleter {
  void operator()(hsr_tensor* t) const { hsr_tensor_free(t); }
};
struct OpsDeleter {
  void operator()(hsr_ops* o) const { hsr_ops_free(o); }
};
struct FactorsDeleter {
  void operator()(hsr_factors* f) const { hsr_factors_free(f); }
};
struct ResultDeleter {
  void operator()(hsr_result* r) const { hsr_result_free(r); }
};
using Tensor = std::unique_ptr<hsr_tensor, TensorDeleter>;
using Ops = std::unique_ptr<hsr_ops, OpsDeleter>;
using Factors = std::unique_ptr<hsr_factors, FactorsDeleter>;
using Result = std::unique_ptr<hsr_result, ResultDeleter>;

Tensor read_tensor(const std::string& path) {
  hsr_tensor* t = nullptr;
  check(hsr_tensor_read(path.c_str(), &t));
  return Tensor(t);
}

std::vector<std::size_t> dims_of(const hsr_tensor* t) {
  std::size_t d[3];
  hsr_tensor_dims(t, d);
  return {d[0], d[1], d[2]};
}

double parse_snr(const std::string& text) {
  if (text == "inf" || text == "+inf" || text == "Inf") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw CliError(1, "invalid --snr-db value '" + text + "'");
  }
}

// Independent noise streams for the two images of one simulation.
constexpr std::uint64_t kMsiSeedMix = 0x9E3779B97F4A7C15ULL;

json metrics_json(const hsr_metrics& m) {
  std::size_t needed = 0;
  check(hsr_metrics_json(&m, nullptr, 0, &needed));
  std::string buf(needed + 1, '\0');
  check(hsr_metrics_json(&m, buf.data(), buf.size(), &needed));
  buf.resize(needed);
  return json::parse(buf);
}

// ---------------------------------------------------------------------------

struct DegradationFlags {
  std::size_t kernel_size = 9;
  std::optional<double> sigma;
  std::size_t ratio = 5;
  std::size_t offset = 0;
  std::size_t msi_bands = 4;
  std::string srf_csv;

  void add_to(CLI::App* cmd, bool with_bands) {
    cmd->add_option("--kernel-size", kernel_size, "Odd Gaussian blur kernel size")->capture_default_str();
    cmd->add_option("--sigma", sigma, "Blur sigma in pixels (default: ratio/2)");
    cmd->add_option("--ratio", ratio, "Spatial downsampling ratio d")->capture_default_str();
    cmd->add_option("--offset", offset, "Index of the first kept pixel (0 <= offset < d)")->capture_default_str();
    if (with_bands) cmd->add_option("--msi-bands", msi_bands, "MSI bands for the uniform SRF")->capture_default_str();
    cmd->add_option("--srf-csv", srf_csv, "Spectral response CSV (K_M rows of K_H values)");
  }

  hsr_degradation_params params() const {
    hsr_degradation_params p;
    hsr_degradation_params_default(&p);
    p.kernel_size = kernel_size;
    p.sigma = sigma ? *sigma : double(ratio) / 2.0;
    p.ratio = ratio;
    p.offset = offset;
    p.msi_bands = msi_bands;
    p.srf_csv = srf_csv.empty() ? nullptr : srf_csv.c_str();
    return p;
  }

  json to_json() const {
    const auto p = params();
    return {{"kernel_size", p.kernel_size}, {"sigma", p.sigma},          {"ratio", p.ratio},
            {"offset", p.offset},           {"msi_bands", p.msi_bands}, {"srf", srf_csv.empty() ? "uniform" : srf_csv}};
  }
};

Ops make_ops(std::size_t I_M, std::size_t J_M, std::size_t K_H, const DegradationFlags& flags) {
  const auto p = flags.params();
  hsr_ops* ops = nullptr;
  check(hsr_ops_new(I_M, J_M, K_H, &p, &ops));
  return Ops(ops);
}

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
  std::vector<std::size_t> dims;
  std::size_t R = 3;
  std::size_t L = 2;
  std::uint64_t seed = 0;
  std::string out;
  std::string factors_out;
};

int run_generate(const GenerateArgs& a) {
  hsr_factors* raw = nullptr;
  check(hsr_factors_random(a.dims[0], a.dims[1], a.dims[2], a.R, a.L, a.seed, &raw));
  Factors f(raw);
  hsr_tensor* t = nullptr;
  check(hsr_factors_reconstruct(f.get(), &t));
  Tensor sri(t);
  check(hsr_tensor_write(sri.get(), a.out.c_str()));
  if (!a.factors_out.empty()) check(hsr_factors_write(f.get(), a.factors_out.c_str()));
  std::cout << json{{"command", "generate"}, {"dims", a.dims}, {"R", a.R}, {"L", a.L}, {"seed", a.seed},
                    {"out", a.out}}
                   .dump()
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string sri, hsi_out, msi_out;
  DegradationFlags deg;
  std::string snr_db = "30";
  std::uint64_t seed = 0;
};

struct Simulated {
  Tensor hsi, msi;
  double hsi_snr, msi_snr;
};

Simulated simulate(const hsr_tensor* sri, const hsr_ops* ops, double snr_db, std::uint64_t seed) {
  hsr_tensor *h = nullptr, *m = nullptr;
  check(hsr_degrade(sri, ops, &h, &m));
  Tensor clean_h(h), clean_m(m);
  hsr_tensor *nh = nullptr, *nm = nullptr;
  check(hsr_add_noise(clean_h.get(), snr_db, seed, &nh));
  Tensor noisy_h(nh);
  check(hsr_add_noise(clean_m.get(), snr_db, seed ^ kMsiSeedMix, &nm));
  Tensor noisy_m(nm);
  double sh = 0.0, sm = 0.0;
  check(hsr_r_snr(clean_h.get(), noisy_h.get(), &sh));
  check(hsr_r_snr(clean_m.get(), noisy_m.get(), &sm));
  return {std::move(noisy_h), std::move(noisy_m), sh, sm};
}

int run_simulate(const SimulateArgs& a) {
  const double snr = parse_snr(a.snr_db);
  Tensor sri = read_tensor(a.sri);
  const auto d = dims_of(sri.get());
  Ops ops = make_ops(d[0], d[1], d[2], a.deg);
  Simulated sim = simulate(sri.get(), ops.get(), snr, a.seed);
  check(hsr_tensor_write(sim.hsi.get(), a.hsi_out.c_str()));
  check(hsr_tensor_write(sim.msi.get(), a.msi_out.c_str()));
  json manifest{{"command", "simulate"},
                {"sri", {{"path", a.sri}, {"dims", d}}},
                {"hsi", {{"path", a.hsi_out}, {"dims", dims_of(sim.hsi.get())}, {"realized_snr_db", sim.hsi_snr}}},
                {"msi", {{"path", a.msi_out}, {"dims", dims_of(sim.msi.get())}, {"realized_snr_db", sim.msi_snr}}},
                {"degradation", a.deg.to_json()},
                {"snr_db", std::isinf(snr) ? json("inf") : json(snr)},
                {"seed", a.seed}};
  std::cout << manifest.dump() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// fuse

struct FuseArgs {
  std::string hsi, msi, out, factors_out;
  std::string method = "cnn_btd";
  std::optional<std::size_t> R, L, outer_iters, inner_iters;
  std::optional<double> rho;
  double tol = 0.0;
  std::uint64_t seed = 0;
  std::string init = "random_uniform";
  std::string init_factors;
  double init_perturb = 0.0;
  DegradationFlags deg;
};

struct FuseOutcome {
  Result result;
  json summary;
};

FuseOutcome fuse(const hsr_tensor* hsi, const hsr_tensor* msi, const hsr_ops* ops, hsr_fuse_config cfg,
                 const hsr_factors* initial) {
  cfg.initial = initial;
  const auto dh = dims_of(hsi);
  const auto dm = dims_of(msi);
  json warnings = json::array();
  const std::size_t L = cfg.method == HSR_METHOD_CNN_CPD || cfg.method == HSR_METHOD_STEREO ? 1 : cfg.L;
  int holds = 0;
  char why[512];
  if (hsr_check_coupled_identifiability(dm[0], dm[1], dm[2], dh[0], dh[1], cfg.R, L, &holds, why, sizeof why) ==
          HSR_OK &&
      !holds) {
    const std::string msg = std::string("identifiability conditions not met: ") + why;
    std::cerr << "warning: " << msg << "\n";
    warnings.push_back(msg);
  }
  hsr_result* raw = nullptr;
  check(hsr_fuse(hsi, msi, ops, &cfg, &raw));
  Result r(raw);
  const double* trace = nullptr;
  const std::size_t n = hsr_result_trace(r.get(), &trace);
  for (std::size_t w = 0; w < hsr_result_warning_count(r.get()); ++w) {
    std::cerr << "warning: " << hsr_result_warning(r.get(), w) << "\n";
    warnings.push_back(hsr_result_warning(r.get(), w));
  }
  json summary{{"method", hsr_method_name(cfg.method)},
               {"R", cfg.R},
               {"L", L},
               {"outer_iters", cfg.outer_iters},
               {"inner_iters", cfg.inner_iters},
               {"rho", cfg.rho > 0.0 ? json(cfg.rho) : json("auto")},
               {"tol", cfg.tol},
               {"seed", cfg.seed},
               {"iters_run", hsr_result_iters(r.get())},
               {"trace_length", n},
               {"final_objective", n ? trace[n - 1] : 0.0},
               {"max_sylvester_residual", hsr_result_max_residual(r.get())},
               {"wall_time_s", hsr_result_wall_time(r.get())},
               {"warnings", warnings}};
  return {std::move(r), std::move(summary)};
}

int run_fuse(const FuseArgs& a) {
  Tensor hsi = read_tensor(a.hsi);
  Tensor msi = read_tensor(a.msi);
  const auto dh = dims_of(hsi.get());
  const auto dm = dims_of(msi.get());
  DegradationFlags deg = a.deg;
  deg.msi_bands = dm[2];
  Ops ops = make_ops(dm[0], dm[1], dh[2], deg);

  hsr_fuse_config cfg;
  hsr_method method;
  check(hsr_method_parse(a.method.c_str(), &method));
  hsr_fuse_config_default(&cfg, method);
  if (a.R) cfg.R = *a.R;
  if (a.L) cfg.L = *a.L;
  if (a.outer_iters) cfg.outer_iters = *a.outer_iters;
  if (a.inner_iters) cfg.inner_iters = *a.inner_iters;
  if (a.rho) cfg.rho = *a.rho;
  cfg.tol = a.tol;
  cfg.seed = a.seed;
  check(hsr_init_parse(a.init.c_str(), &cfg.init));

  Factors initial;
  if (!a.init_factors.empty()) {
    hsr_factors* f = nullptr;
    check(hsr_factors_read(a.init_factors.c_str(), &f));
    initial.reset(f);
    if (a.init_perturb > 0.0) {
      hsr_factors* p = nullptr;
      check(hsr_factors_perturb(initial.get(), a.init_perturb, a.seed, &p));
      initial.reset(p);
    }
    cfg.init = HSR_INIT_PROVIDED;
  } else if (cfg.init == HSR_INIT_PROVIDED) {
    throw CliError(1, "--init provided needs --init-factors");
  }

  FuseOutcome outcome = fuse(hsi.get(), msi.get(), ops.get(), cfg, initial.get());
  check(hsr_tensor_write(hsr_result_sri(outcome.result.get()), a.out.c_str()));
  if (!a.factors_out.empty()) {
    hsr_factors* f = nullptr;
    check(hsr_result_factors(outcome.result.get(), &f));
    Factors owned(f);
    check(hsr_factors_write(owned.get(), a.factors_out.c_str()));
  }
  json summary{{"command", "fuse"}};
  summary.update(outcome.summary);
  summary["init"] = a.init_factors.empty() ? a.init : "provided";
  summary["degradation"] = deg.to_json();
  summary["out"] = a.out;
  std::cout << summary.dump() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
  std::string ref, est;
  double ratio = 5.0;
};

int run_evaluate(const EvaluateArgs& a) {
  Tensor ref = read_tensor(a.ref);
  Tensor est = read_tensor(a.est);
  hsr_metrics m;
  check(hsr_evaluate(ref.get(), est.get(), a.ratio, &m));
  std::cout << metrics_json(m).dump() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// bench

struct MethodSpec {
  std::string label;
  hsr_fuse_config cfg;
};

struct Row {
  std::string label;
  std::size_t ok = 0;
  std::size_t failed = 0;
  double r_snr = 0, cc = 0, sam = 0, ergas = 0, runtime = 0;
};

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) && !j.at(key).is_null() ? j.at(key).get<T>() : fallback;
}

std::string format_number(double v, int precision) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

int run_bench(const std::string& config_path) {
  std::ifstream in(config_path);
  if (!in) throw CliError(2, "cannot open bench config " + config_path);
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::exception& e) {
    throw CliError(1, std::string("bench config does not parse: ") + e.what());
  }

  std::size_t trials = 0;
  std::vector<MethodSpec> methods;
  DegradationFlags deg;
  double snr = 30.0;
  std::uint64_t seed_base = 0;
  std::string output;
  bool timing = true;
  Tensor sri;
  try {
    trials = cfg.at("trials").get<std::size_t>();
    if (trials < 1) throw CliError(1, "bench config: trials must be at least 1");
    const json& snr_field = cfg.value("snr_db", json(30.0));
    snr = snr_field.is_string() ? parse_snr(snr_field.get<std::string>()) : snr_field.get<double>();
    seed_base = get_or<std::uint64_t>(cfg, "seed_base", 0);
    output = cfg.at("output").get<std::string>();
    timing = get_or<bool>(cfg, "timing", true);

    const json d = cfg.value("degradation", json::object());
    deg.kernel_size = get_or<std::size_t>(d, "kernel_size", 9);
    deg.ratio = get_or<std::size_t>(d, "ratio", 5);
    if (d.contains("sigma") && !d.at("sigma").is_null()) deg.sigma = d.at("sigma").get<double>();
    deg.offset = get_or<std::size_t>(d, "offset", 0);
    deg.msi_bands = get_or<std::size_t>(d, "msi_bands", 4);
    deg.srf_csv = get_or<std::string>(d, "srf_csv", "");

    for (const json& m : cfg.at("methods")) {
      MethodSpec spec;
      hsr_method method;
      check(hsr_method_parse(m.at("method").get<std::string>().c_str(), &method));
      hsr_fuse_config_default(&spec.cfg, method);
      spec.label = get_or<std::string>(m, "label", hsr_method_name(method));
      spec.cfg.R = get_or<std::size_t>(m, "R", spec.cfg.R);
      spec.cfg.L = get_or<std::size_t>(m, "L", spec.cfg.L);
      spec.cfg.outer_iters = get_or<std::size_t>(m, "outer_iters", spec.cfg.outer_iters);
      spec.cfg.inner_iters = get_or<std::size_t>(m, "inner_iters", spec.cfg.inner_iters);
      spec.cfg.rho = get_or<double>(m, "rho", 0.0);
      spec.cfg.tol = get_or<double>(m, "tol", 0.0);
      check(hsr_init_parse(get_or<std::string>(m, "init", "random_uniform").c_str(), &spec.cfg.init));
      if (spec.cfg.init == HSR_INIT_PROVIDED) throw CliError(1, "bench does not support init=provided");
      methods.push_back(spec);
    }
    if (methods.empty()) throw CliError(1, "bench config: no methods listed");

    if (cfg.contains("sri")) {
      sri = read_tensor(cfg.at("sri").get<std::string>());
    } else {
      const json& s = cfg.at("synthetic");
      const auto dims = s.at("dims").get<std::vector<std::size_t>>();
      if (dims.size() != 3) throw CliError(1, "bench config: synthetic.dims needs three entries");
      hsr_factors* f = nullptr;
      check(hsr_factors_random(dims[0], dims[1], dims[2], s.at("R").get<std::size_t>(), s.at("L").get<std::size_t>(),
                               get_or<std::uint64_t>(s, "seed", 0), &f));
      Factors owned(f);
      hsr_tensor* t = nullptr;
      check(hsr_factors_reconstruct(owned.get(), &t));
      sri.reset(t);
    }
  } catch (const json::exception& e) {
    throw CliError(1, std::string("malformed bench config: ") + e.what());
  }

  const auto d = dims_of(sri.get());
  Ops ops = make_ops(d[0], d[1], d[2], deg);
  std::vector<Row> rows(methods.size());
  for (std::size_t m = 0; m < methods.size(); ++m) rows[m].label = methods[m].label;

  std::size_t failures = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::uint64_t seed = seed_base + t;
    Simulated sim = simulate(sri.get(), ops.get(), snr, seed);
    for (std::size_t m = 0; m < methods.size(); ++m) {
      hsr_fuse_config c = methods[m].cfg;
      c.seed = seed;
      try {
        FuseOutcome outcome = fuse(sim.hsi.get(), sim.msi.get(), ops.get(), c, nullptr);
        hsr_metrics metrics;
        check(hsr_evaluate(sri.get(), hsr_result_sri(outcome.result.get()), double(deg.ratio), &metrics));
        Row& row = rows[m];
        ++row.ok;
        row.r_snr += metrics.r_snr_db;
        row.cc += metrics.cc;
        row.sam += metrics.sam_rad;
        row.ergas += metrics.ergas;
        row.runtime += hsr_result_wall_time(outcome.result.get());
      } catch (const CliError& e) {
        ++rows[m].failed;
        ++failures;
        std::cerr << "trial " << t << " (" << methods[m].label << ") failed: " << e.what() << "\n";
      }
    }
  }

  const bool csv = output.size() >= 4 && output.substr(output.size() - 4) == ".csv";
  std::ostringstream table;
  if (csv) {
    table << "Algorithm,R-SNR,CC,SAM,ERGAS" << (timing ? ",runtime(sec)" : "") << ",trials_ok\n";
  } else {
    table << "| Algorithm | R-SNR | CC | SAM | ERGAS |" << (timing ? " runtime(sec) |" : "") << " trials_ok |\n";
    table << "|---|---|---|---|---|" << (timing ? "---|" : "") << "---|\n";
  }
  json summary_rows = json::array();
  for (Row& row : rows) {
    std::vector<std::string> cells{row.label};
    if (row.ok > 0) {
      const double n = double(row.ok);
      cells.push_back(format_number(row.r_snr / n, 4));
      cells.push_back(format_number(row.cc / n, 4));
      cells.push_back(format_number(row.sam / n, 4));
      cells.push_back(format_number(row.ergas / n, 4));
      if (timing) cells.push_back(format_number(row.runtime / n, 2));
    } else {
      for (int c = 0; c < (timing ? 5 : 4); ++c) cells.push_back("n/a");
    }
    cells.push_back(std::to_string(row.ok) + "/" + std::to_string(row.ok + row.failed));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (csv) {
        table << (c ? "," : "") << cells[c];
      } else {
        table << (c ? " " : "| ") << cells[c] << " |";
      }
    }
    table << "\n";
    summary_rows.push_back({{"label", row.label}, {"trials_ok", row.ok}, {"trials_failed", row.failed}});
  }
  std::ofstream out(output, std::ios::trunc);
  if (!out) throw CliError(2, "cannot write bench table " + output);
  out << table.str();
  out.close();
  if (!out) throw CliError(2, "error writing bench table " + output);

  std::cout << json{{"command", "bench"}, {"trials", trials}, {"output", output}, {"methods", summary_rows}}.dump()
            << "\n";
  return failures == trials * methods.size() ? 3 : 0;
}

// ---------------------------------------------------------------------------
// check

struct CheckArgs {
  std::vector<std::size_t> msi_dims, hsi_dims;
  std::size_t R = 1, L = 1;
};

int run_check(const CheckArgs& a) {
  int holds = 0;
  char why[512];
  check(hsr_check_coupled_identifiability(a.msi_dims[0], a.msi_dims[1], a.msi_dims[2], a.hsi_dims[0], a.hsi_dims[1],
                                          a.R, a.L, &holds, why, sizeof why));
  std::cout << json{{"command", "check"}, {"identifiable", bool(holds)}, {"detail", why}}.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hyperspectral super-resolution by coupled block-term decomposition"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write a synthetic nonnegative BTD super-resolution image");
  generate->add_option("--dims", gen.dims, "I J K")->expected(3)->required();
  generate->add_option("--R", gen.R, "Number of blocks")->capture_default_str();
  generate->add_option("--L", gen.L, "Block rank")->capture_default_str();
  generate->add_option("--seed", gen.seed)->capture_default_str();
  generate->add_option("--out", gen.out, "Output tensor file")->required();
  generate->add_option("--factors-out", gen.factors_out, "Also write the generating factors as JSON");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Degrade an SRI into an HSI/MSI pair");
  simulate->add_option("--sri", sim.sri)->required();
  simulate->add_option("--hsi-out", sim.hsi_out)->required();
  simulate->add_option("--msi-out", sim.msi_out)->required();
  sim.deg.add_to(simulate, true);
  simulate->add_option("--snr-db", sim.snr_db, "Noise level in dB, or inf")->capture_default_str();
  simulate->add_option("--seed", sim.seed)->capture_default_str();

  FuseArgs fz;
  auto* fuse_cmd = app.add_subcommand("fuse", "Estimate the SRI from an HSI/MSI pair");
  fuse_cmd->add_option("--hsi", fz.hsi)->required();
  fuse_cmd->add_option("--msi", fz.msi)->required();
  fuse_cmd->add_option("--out", fz.out)->required();
  fuse_cmd->add_option("--method", fz.method, "cnn_btd, cnn_cpd, stereo or two_stage")->capture_default_str();
  fuse_cmd->add_option("--R", fz.R, "Blocks (CPD rank F for cnn_cpd/stereo)");
  fuse_cmd->add_option("--L", fz.L, "Block rank");
  fuse_cmd->add_option("--outer-iters", fz.outer_iters);
  fuse_cmd->add_option("--inner-iters", fz.inner_iters);
  fuse_cmd->add_option("--rho", fz.rho, "ADMM penalty (default: automatic)");
  fuse_cmd->add_option("--tol", fz.tol, "Relative objective change stopping rule (0 disables)")->capture_default_str();
  fuse_cmd->add_option("--seed", fz.seed)->capture_default_str();
  fuse_cmd->add_option("--init", fz.init, "random_uniform, svd_warm or provided")->capture_default_str();
  fuse_cmd->add_option("--init-factors", fz.init_factors, "Starting factors (JSON)");
  fuse_cmd->add_option("--init-perturb", fz.init_perturb, "Relative Gaussian perturbation of --init-factors");
  fuse_cmd->add_option("--factors-out", fz.factors_out, "Write the estimated factors as JSON");
  fz.deg.add_to(fuse_cmd, false);

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Compare an estimate with the reference SRI");
  evaluate->add_option("--ref", ev.ref)->required();
  evaluate->add_option("--est", ev.est)->required();
  evaluate->add_option("--ratio", ev.ratio, "Spatial ratio d used by ERGAS")->capture_default_str();

  std::string bench_config;
  auto* bench = app.add_subcommand("bench", "Monte Carlo comparison table");
  bench->add_option("config", bench_config, "Bench configuration (JSON)")->required();

  CheckArgs ck;
  auto* check_cmd = app.add_subcommand("check", "Evaluate the coupled identifiability conditions");
  check_cmd->add_option("--msi-dims", ck.msi_dims, "I_M J_M K_M")->expected(3)->required();
  check_cmd->add_option("--hsi-dims", ck.hsi_dims, "I_H J_H")->expected(2)->required();
  check_cmd->add_option("--R", ck.R)->required();
  check_cmd->add_option("--L", ck.L)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*generate) return run_generate(gen);
    if (*simulate) return run_simulate(sim);
    if (*fuse_cmd) return run_fuse(fz);
    if (*evaluate) return run_evaluate(ev);
    if (*bench) return run_bench(bench_config);
    if (*check_cmd) return run_check(ck);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == HSR_ERR_INTERNAL ? 3 : e.code();
  }
  return 1;
}
