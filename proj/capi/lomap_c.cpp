#include "lomap/lomap_c.h"

#include <cmath>
#include <cstring>
#include <exception>
#include <limits>
#include <string>
#include <utility>

#include "lomap/ann.hpp"
#include "lomap/commands.hpp"
#include "lomap/config.hpp"
#include "lomap/dataset.hpp"
#include "lomap/diffusion.hpp"
#include "lomap/error.hpp"

namespace {

thread_local std::string g_last_error;

int code_of(const lomap::Error& e) { return static_cast<int>(e.kind()); }

// Runs fn, captures any failure into the thread-local message, and returns a
// status code. Non-library exceptions count as numeric failures.
template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return LOMAP_OK;
  } catch (const lomap::Error& e) {
    g_last_error = e.what();
    return code_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return LOMAP_ERR_NUMERIC;
  } catch (...) {
    g_last_error = "unknown failure";
    return LOMAP_ERR_NUMERIC;
  }
}

}  // namespace

struct lomap_schedule {
  lomap::NoiseSchedule sched;
};

struct lomap_dataset {
  lomap::Dataset ds;
};

struct lomap_index {
  lomap::AnnIndex index;
  Eigen::MatrixXd rows;
};

extern "C" {

const char* lomap_last_error(void) { return g_last_error.c_str(); }

int lomap_run(const char* command, const char* config_path,
              const char* const* keys, const char* const* values, size_t nkv,
              uint64_t seed, const char* out_path, int threads) {
  return guarded([&] {
    lomap::require_param(command != nullptr, "command must not be null");
    lomap::require_param(out_path != nullptr, "out_path must not be null");
    lomap::require_param(nkv == 0 || (keys != nullptr && values != nullptr),
                         "key/value arrays must not be null");
    lomap::Config cfg;
    if (config_path != nullptr && config_path[0] != '\0')
      cfg = lomap::Config::from_file(config_path);
    for (size_t i = 0; i < nkv; ++i) {
      lomap::require_param(keys[i] != nullptr && values[i] != nullptr,
                           "key/value entries must not be null");
      cfg.set(keys[i], values[i]);
    }
    lomap::run_command(command, cfg, seed, out_path, threads);
  });
}

lomap_schedule* lomap_schedule_create(int steps, const char* kind,
                                      double beta_min, double beta_max,
                                      int force) {
  lomap_schedule* out = nullptr;
  guarded([&] {
    lomap::require_param(kind != nullptr, "kind must not be null");
    lomap::NoiseSchedule s = lomap::build_schedule(
        steps, lomap::schedule_kind_from_string(kind), beta_min, beta_max,
        force != 0);
    out = new lomap_schedule{std::move(s)};
  });
  return out;
}

void lomap_schedule_destroy(lomap_schedule* s) { delete s; }

int lomap_schedule_steps(const lomap_schedule* s) {
  return s == nullptr ? -LOMAP_ERR_PARAM : s->sched.steps;
}

double lomap_schedule_alpha_bar(const lomap_schedule* s, int i) {
  if (s == nullptr || i < 0 || i > s->sched.steps)
    return std::numeric_limits<double>::quiet_NaN();
  return s->sched.alpha_bar[i];
}

lomap_dataset* lomap_dataset_load(const char* path) {
  lomap_dataset* out = nullptr;
  guarded([&] {
    lomap::require_param(path != nullptr, "path must not be null");
    out = new lomap_dataset{lomap::load_dataset(path)};
  });
  return out;
}

void lomap_dataset_destroy(lomap_dataset* d) { delete d; }

int lomap_dataset_info(const lomap_dataset* d, uint64_t* n, uint32_t* horizon,
                       uint32_t* state_dim, uint32_t* action_dim) {
  return guarded([&] {
    lomap::require_param(d != nullptr, "dataset must not be null");
    if (n != nullptr) *n = static_cast<uint64_t>(d->ds.n());
    if (horizon != nullptr) *horizon = static_cast<uint32_t>(d->ds.horizon);
    if (state_dim != nullptr)
      *state_dim = static_cast<uint32_t>(d->ds.state_dim);
    if (action_dim != nullptr)
      *action_dim = static_cast<uint32_t>(d->ds.action_dim);
  });
}

int lomap_dataset_row(const lomap_dataset* d, uint64_t i, double* out,
                      size_t out_len) {
  return guarded([&] {
    lomap::require_param(d != nullptr && out != nullptr,
                         "dataset and out must not be null");
    lomap::require_param(i < static_cast<uint64_t>(d->ds.n()),
                         "row index out of range");
    lomap::require_param(
        out_len == static_cast<size_t>(d->ds.row_dim()),
        "out_len must equal horizon*(state_dim+action_dim)");
    Eigen::VectorXd row = d->ds.rows.row(static_cast<Eigen::Index>(i));
    std::memcpy(out, row.data(), out_len * sizeof(double));
  });
}

lomap_index* lomap_index_build(const lomap_dataset* d, int n_list,
                               uint64_t seed) {
  lomap_index* out = nullptr;
  guarded([&] {
    lomap::require_param(d != nullptr, "dataset must not be null");
    auto ix = new lomap_index;
    ix->rows = d->ds.rows;
    ix->index = lomap::AnnIndex::build(ix->rows, n_list, seed);
    out = ix;
  });
  return out;
}

void lomap_index_destroy(lomap_index* ix) { delete ix; }

int lomap_index_knn(const lomap_index* ix, const double* query, size_t dim,
                    int k, int n_probe, int* ids, double* scores) {
  int found = 0;
  const int rc = guarded([&] {
    lomap::require_param(ix != nullptr && query != nullptr,
                         "index and query must not be null");
    lomap::require_param(ids != nullptr && scores != nullptr,
                         "ids and scores must not be null");
    lomap::require_param(dim == static_cast<size_t>(ix->index.dim()),
                         "query dimension does not match the index");
    Eigen::VectorXd q(static_cast<Eigen::Index>(dim));
    std::memcpy(q.data(), query, dim * sizeof(double));
    const auto hits = ix->index.knn(q, k, n_probe);
    for (const auto& [id, score] : hits) {
      ids[found] = id;
      scores[found] = score;
      ++found;
    }
  });
  return rc == LOMAP_OK ? found : -rc;
}

}  // extern "C"
