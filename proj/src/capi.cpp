#include "hsr/hsr.h"

#include "hsr/degradation.hpp"
#include "hsr/error.hpp"
#include "hsr/io.hpp"
#include "hsr/metrics.hpp"
#include "hsr/model.hpp"
#include "hsr/solver.hpp"
#include "hsr/synthetic.hpp"

#include <algorithm>
#include <cstring>
#include <new>
#include <string>

struct hsr_tensor {
  hsr::Tensor3 value;
};

struct hsr_ops {
  hsr::DegradationOps value;
  hsr::Dims3 sri;
};

struct hsr_factors {
  hsr::BtdFactors value;
};

struct hsr_result {
  hsr::FusionResult value;
  hsr_tensor sri;
};

namespace {

thread_local std::string last_error;

template <typename Fn>
hsr_status guarded(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return HSR_OK;
  } catch (const hsr::Error& e) {
    last_error = e.what();
    return static_cast<hsr_status>(static_cast<int>(e.kind()));
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return HSR_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return HSR_ERR_INTERNAL;
  }
}

template <typename T>
void require(const T* p, const char* what) {
  if (p == nullptr) throw hsr::UsageError(std::string(what) + " must not be NULL");
}

void copy_string(const std::string& s, char* buf, std::size_t cap) {
  if (buf == nullptr || cap == 0) return;
  const std::size_t n = std::min(s.size(), cap - 1);
  std::memcpy(buf, s.data(), n);
  buf[n] = '\0';
}

}  // namespace

extern "C" {

const char* hsr_last_error(void) { return last_error.c_str(); }

const char* hsr_version(void) { return "1.0.0"; }

hsr_status hsr_tensor_new(size_t I, size_t J, size_t K, const double* data, hsr_tensor** out) {
  return guarded([&] {
    require(out, "out");
    hsr::Tensor3 t({I, J, K});
    if (data) std::copy(data, data + t.numel(), t.data().begin());
    *out = new hsr_tensor{std::move(t)};
  });
}

void hsr_tensor_free(hsr_tensor* t) { delete t; }

void hsr_tensor_dims(const hsr_tensor* t, size_t dims[3]) {
  dims[0] = t->value.dims().I;
  dims[1] = t->value.dims().J;
  dims[2] = t->value.dims().K;
}

const double* hsr_tensor_data(const hsr_tensor* t) { return t->value.data().data(); }

hsr_status hsr_tensor_read(const char* path, hsr_tensor** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new hsr_tensor{hsr::read_tensor(path)};
  });
}

hsr_status hsr_tensor_write(const hsr_tensor* t, const char* path) {
  return guarded([&] {
    require(t, "tensor");
    require(path, "path");
    hsr::write_tensor(t->value, path);
  });
}

void hsr_degradation_params_default(hsr_degradation_params* p) {
  const hsr::DegradationParams d;
  p->kernel_size = d.kernel_size;
  p->sigma = d.sigma;
  p->ratio = d.ratio;
  p->offset = d.offset;
  p->msi_bands = 4;
  p->srf_csv = nullptr;
}

hsr_status hsr_ops_new(size_t I_M, size_t J_M, size_t K_H, const hsr_degradation_params* p, hsr_ops** out) {
  return guarded([&] {
    require(p, "params");
    require(out, "out");
    hsr::DegradationParams params;
    params.kernel_size = p->kernel_size;
    params.sigma = p->sigma;
    params.ratio = p->ratio;
    params.offset = p->offset;
    const hsr::Dims3 sri{I_M, J_M, K_H};
    auto ops = hsr::build_degradation(sri, params, p->msi_bands,
                                      p->srf_csv ? std::filesystem::path(p->srf_csv) : std::filesystem::path());
    *out = new hsr_ops{std::move(ops), sri};
  });
}

void hsr_ops_free(hsr_ops* ops) { delete ops; }

void hsr_ops_output_dims(const hsr_ops* ops, size_t hsi_dims[3], size_t msi_dims[3]) {
  const auto h = ops->value.hsi_dims(ops->sri);
  const auto m = ops->value.msi_dims(ops->sri);
  hsi_dims[0] = h.I, hsi_dims[1] = h.J, hsi_dims[2] = h.K;
  msi_dims[0] = m.I, msi_dims[1] = m.J, msi_dims[2] = m.K;
}

hsr_status hsr_degrade(const hsr_tensor* sri, const hsr_ops* ops, hsr_tensor** hsi, hsr_tensor** msi) {
  return guarded([&] {
    require(sri, "sri");
    require(ops, "ops");
    require(hsi, "hsi");
    require(msi, "msi");
    auto pair = hsr::apply_degradation(sri->value, ops->value);
    auto* h = new hsr_tensor{std::move(pair.hsi)};
    try {
      *msi = new hsr_tensor{std::move(pair.msi)};
    } catch (...) {
      delete h;
      throw;
    }
    *hsi = h;
  });
}

hsr_status hsr_add_noise(const hsr_tensor* t, double snr_db, uint64_t seed, hsr_tensor** out) {
  return guarded([&] {
    require(t, "tensor");
    require(out, "out");
    *out = new hsr_tensor{hsr::add_noise(t->value, {snr_db, seed})};
  });
}

hsr_status hsr_factors_random(size_t I, size_t J, size_t K, size_t R, size_t L, uint64_t seed, hsr_factors** out) {
  return guarded([&] {
    require(out, "out");
    *out = new hsr_factors{hsr::random_factors({I, J, K}, hsr::RankSpec::uniform(R, L), seed)};
  });
}

hsr_status hsr_factors_perturb(const hsr_factors* f, double relative, uint64_t seed, hsr_factors** out) {
  return guarded([&] {
    require(f, "factors");
    require(out, "out");
    *out = new hsr_factors{hsr::perturb_factors(f->value, relative, seed)};
  });
}

hsr_status hsr_factors_reconstruct(const hsr_factors* f, hsr_tensor** out) {
  return guarded([&] {
    require(f, "factors");
    require(out, "out");
    *out = new hsr_tensor{hsr::btd_reconstruct(f->value)};
  });
}

hsr_status hsr_factors_read(const char* path, hsr_factors** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new hsr_factors{hsr::read_factors(path)};
  });
}

hsr_status hsr_factors_write(const hsr_factors* f, const char* path) {
  return guarded([&] {
    require(f, "factors");
    require(path, "path");
    hsr::write_factors(f->value, path);
  });
}

void hsr_factors_free(hsr_factors* f) { delete f; }

hsr_status hsr_check_coupled_identifiability(size_t I_M, size_t J_M, size_t K_M, size_t I_H, size_t J_H, size_t R,
                                             size_t L, int* holds, char* explain, size_t cap) {
  return guarded([&] {
    require(holds, "holds");
    const auto check = hsr::check_coupled_identifiability(I_M, J_M, K_M, I_H, J_H, hsr::RankSpec::uniform(R, L));
    *holds = check.holds ? 1 : 0;
    copy_string(check.explain(), explain, cap);
  });
}

void hsr_fuse_config_default(hsr_fuse_config* cfg, hsr_method method) {
  *cfg = hsr_fuse_config{};
  cfg->method = method;
  const bool cpd = method == HSR_METHOD_CNN_CPD || method == HSR_METHOD_STEREO;
  cfg->R = cpd ? 100 : 10;
  cfg->L = cpd ? 1 : 20;
  cfg->block_ranks = nullptr;
  cfg->outer_iters = method == HSR_METHOD_STEREO ? 100 : 20;
  cfg->inner_iters = 5;
  cfg->rho = 0.0;
  cfg->tol = 0.0;
  cfg->seed = 0;
  cfg->init = HSR_INIT_RANDOM_UNIFORM;
  cfg->initial = nullptr;
}

hsr_status hsr_method_parse(const char* name, hsr_method* out) {
  return guarded([&] {
    require(name, "name");
    require(out, "out");
    *out = static_cast<hsr_method>(hsr::parse_method(name));
  });
}

const char* hsr_method_name(hsr_method method) {
  switch (method) {
    case HSR_METHOD_CNN_BTD: return "cnn_btd";
    case HSR_METHOD_CNN_CPD: return "cnn_cpd";
    case HSR_METHOD_STEREO: return "stereo";
    case HSR_METHOD_TWO_STAGE: return "two_stage";
  }
  return "unknown";
}

hsr_status hsr_init_parse(const char* name, hsr_init* out) {
  return guarded([&] {
    require(name, "name");
    require(out, "out");
    *out = static_cast<hsr_init>(hsr::parse_init(name));
  });
}

static_assert(int(hsr::Method::cnn_btd) == HSR_METHOD_CNN_BTD && int(hsr::Method::two_stage) == HSR_METHOD_TWO_STAGE);
static_assert(int(hsr::InitStrategy::provided) == HSR_INIT_PROVIDED);

hsr_status hsr_fuse(const hsr_tensor* hsi, const hsr_tensor* msi, const hsr_ops* ops, const hsr_fuse_config* cfg,
                    hsr_result** out) {
  return guarded([&] {
    require(hsi, "hsi");
    require(msi, "msi");
    require(ops, "ops");
    require(cfg, "config");
    require(out, "out");
    if (int(cfg->method) < 0 || int(cfg->method) > 3) throw hsr::UsageError("invalid method");
    if (int(cfg->init) < 0 || int(cfg->init) > 2) throw hsr::UsageError("invalid init strategy");
    hsr::FusionConfig c;
    c.method = static_cast<hsr::Method>(cfg->method);
    if (cfg->block_ranks) {
      c.rank = hsr::RankSpec(std::vector<std::size_t>(cfg->block_ranks, cfg->block_ranks + cfg->R));
    } else {
      c.rank = hsr::RankSpec::uniform(cfg->R, cfg->L);
    }
    c.outer_iters = cfg->outer_iters;
    c.inner_iters = cfg->inner_iters;
    if (cfg->rho > 0.0) c.rho = cfg->rho;
    c.tol = cfg->tol;
    c.seed = cfg->seed;
    c.init = static_cast<hsr::InitStrategy>(cfg->init);
    if (cfg->initial) c.initial = cfg->initial->value;
    auto result = hsr::fuse(hsi->value, msi->value, ops->value, c);
    auto* r = new hsr_result{std::move(result), {}};
    r->sri.value = r->value.sri_estimate;
    *out = r;
  });
}

const hsr_tensor* hsr_result_sri(const hsr_result* r) { return &r->sri; }

size_t hsr_result_trace(const hsr_result* r, const double** values) {
  if (values) *values = r->value.objective_trace.data();
  return r->value.objective_trace.size();
}

size_t hsr_result_iters(const hsr_result* r) { return r->value.iters_run; }
double hsr_result_wall_time(const hsr_result* r) { return r->value.wall_time_s; }
double hsr_result_max_residual(const hsr_result* r) { return r->value.max_sylvester_residual; }
size_t hsr_result_warning_count(const hsr_result* r) { return r->value.warnings.size(); }

const char* hsr_result_warning(const hsr_result* r, size_t index) {
  return index < r->value.warnings.size() ? r->value.warnings[index].c_str() : nullptr;
}

hsr_status hsr_result_factors(const hsr_result* r, hsr_factors** out) {
  return guarded([&] {
    require(r, "result");
    require(out, "out");
    *out = new hsr_factors{r->value.factors};
  });
}

void hsr_result_free(hsr_result* r) { delete r; }

hsr_status hsr_evaluate(const hsr_tensor* ref, const hsr_tensor* est, double d, hsr_metrics* out) {
  return guarded([&] {
    require(ref, "ref");
    require(est, "est");
    require(out, "out");
    const auto m = hsr::evaluate(ref->value, est->value, d);
    *out = {m.r_snr_db, m.cc, m.sam_rad, m.ergas, m.down_ratio};
  });
}

hsr_status hsr_r_snr(const hsr_tensor* ref, const hsr_tensor* est, double* out) {
  return guarded([&] {
    require(ref, "ref");
    require(est, "est");
    require(out, "out");
    *out = hsr::r_snr(ref->value, est->value);
  });
}

hsr_status hsr_metrics_json(const hsr_metrics* m, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    require(m, "metrics");
    const std::string s = hsr::MetricsReport{m->r_snr_db, m->cc, m->sam_rad, m->ergas, m->down_ratio}.to_json();
    if (needed) *needed = s.size();
    copy_string(s, buf, cap);
  });
}

}  // extern "C"
