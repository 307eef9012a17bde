// Command-line front end. Talks to the library exclusively through the C
// interface; exit codes are the library status codes (0 ok, 2 parameter,
// 3 data, 4 numeric), and usage errors exit 2.

#include <array>
#include <cstdint>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "lomap/lomap_c.h"

namespace {

struct VerbArgs {
  std::string config;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  std::string out;
  int threads = 1;
};

void add_common(CLI::App* sub, VerbArgs* a) {
  sub->add_option("--config", a->config, "settings file (key=value lines)");
  sub->add_option("--set", a->sets,
                  "override one setting as key=value (repeatable)");
  sub->add_option("--seed", a->seed, "random seed");
  sub->add_option("--out", a->out, "output artifact path")->required();
  sub->add_option("--threads", a->threads, "internal thread cap");
}

int run_verb(const std::string& verb, const VerbArgs& a) {
  std::vector<std::string> keys;
  std::vector<std::string> vals;
  for (const std::string& kv : a.sets) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::fprintf(stderr, "error: --set expects key=value, got '%s'\n",
                   kv.c_str());
      return LOMAP_ERR_PARAM;
    }
    keys.push_back(kv.substr(0, eq));
    vals.push_back(kv.substr(eq + 1));
  }
  std::vector<const char*> kp;
  std::vector<const char*> vp;
  for (const std::string& k : keys) kp.push_back(k.c_str());
  for (const std::string& v : vals) vp.push_back(v.c_str());
  const int rc = lomap_run(verb.c_str(),
                           a.config.empty() ? nullptr : a.config.c_str(),
                           kp.data(), vp.data(), kp.size(), a.seed,
                           a.out.c_str(), a.threads);
  if (rc != LOMAP_OK) std::fprintf(stderr, "error: %s\n", lomap_last_error());
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"manifold-aware guided diffusion trajectory planner"};
  app.require_subcommand(1);

  const std::array<std::pair<const char*, const char*>, 6> verbs = {{
      {"gen-data", "generate an offline dataset"},
      {"train", "train a denoiser or guide checkpoint"},
      {"plan", "run closed-loop planning episodes"},
      {"eval", "paired baseline/projection plan metrics"},
      {"gap", "guidance-gap dimension sweep"},
      {"plot", "render a maze figure"},
  }};
  std::array<VerbArgs, verbs.size()> args;
  std::array<CLI::App*, verbs.size()> subs{};
  for (std::size_t i = 0; i < verbs.size(); ++i) {
    subs[i] = app.add_subcommand(verbs[i].first, verbs[i].second);
    add_common(subs[i], &args[i]);
  }

  // Convenience spellings for the settings toggled most often.
  CLI::App* plan = subs[2];
  double omega = 0.0;
  CLI::Option* omega_opt =
      plan->add_option("--omega", omega, "guidance strength");
  CLI::Option* proj_on =
      plan->add_flag("--projection", "project candidates onto local charts");
  CLI::Option* proj_off =
      plan->add_flag("--no-projection", "disable projection");
  CLI::Option* hier = plan->add_flag("--hier", "hierarchical planning");
  proj_on->excludes(proj_off);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : LOMAP_ERR_PARAM;
  }

  for (std::size_t i = 0; i < verbs.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    if (subs[i] == plan) {
      if (omega_opt->count() > 0)
        args[i].sets.push_back("omega=" + std::to_string(omega));
      if (proj_on->count() > 0) args[i].sets.push_back("projection=1");
      if (proj_off->count() > 0) args[i].sets.push_back("projection=0");
      if (hier->count() > 0) args[i].sets.push_back("hier=1");
    }
    return run_verb(verbs[i].first, args[i]);
  }
  std::fprintf(stderr, "error: missing command\n");
  return LOMAP_ERR_PARAM;
}
