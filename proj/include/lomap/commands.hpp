#pragma once

#include <cstdint>
#include <string>

#include "lomap/config.hpp"

namespace lomap {

// Orchestration behind the CLI verbs. Each command validates its own key
// set, writes its artifact(s) under `out`, and throws Error on failure.
// `threads` caps Eigen's internal parallelism.
void cmd_gen_data(const Config& cfg, std::uint64_t seed, const std::string& out,
                  int threads);
void cmd_train(const Config& cfg, std::uint64_t seed, const std::string& out,
               int threads);
void cmd_plan(const Config& cfg, std::uint64_t seed, const std::string& out,
              int threads);
void cmd_eval(const Config& cfg, std::uint64_t seed, const std::string& out,
              int threads);
void cmd_gap(const Config& cfg, std::uint64_t seed, const std::string& out,
             int threads);
void cmd_plot(const Config& cfg, std::uint64_t seed, const std::string& out,
              int threads);

// Dispatch by verb name; unknown names are parameter errors.
void run_command(const std::string& name, const Config& cfg,
                 std::uint64_t seed, const std::string& out, int threads);

}  // namespace lomap
