// Acceptance gate: runs every bundled study config through the library and
// prints one PASS/FAIL line per acceptance criterion. Exits nonzero if any
// criterion fails. Each criterion maps to named checks inside one config;
// the config's wall time is charged against the sum of its criteria budgets.
#include <chrono>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "wavecross/experiment.hpp"

namespace {

struct ConfigRun {
  bool ok = false;
  std::string error;
  double secs = 0.0;
  wx::StudyResult res;
};

struct Criterion {
  const char* id;
  const char* label;
  const char* config;
  std::vector<const char*> checks;
};

}  // namespace

int main(int argc, char** argv) {
  std::string dir = "configs";
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config-dir" && i + 1 < argc) dir = argv[++i];
  }

  const std::vector<std::pair<std::string, double>> configs = {
      {"library_checks", 17.0},          // C1 5s + C2 2s + C3 5s + C8 5s
      {"gapped_adiabatic_1d", 60.0},     // C5
      {"schrodinger_crossing_1d", 180.0},// C6 (+C7)
      {"pendulum_hk_1d", 60.0},          // C9
      {"oracle_selfcheck_1d", 20.0},     // C10
  };

  std::map<std::string, ConfigRun> runs;
  for (const auto& [name, budget] : configs) {
    ConfigRun& cr = runs[name];
    const auto t0 = std::chrono::steady_clock::now();
    try {
      wx::ExperimentConfig cfg = wx::load_config_file(dir + "/" + name +
                                                      ".json");
      cr.res = wx::run_study(cfg);
      cr.ok = true;
    } catch (const std::exception& e) {
      cr.error = e.what();
    }
    cr.secs = std::chrono::duration<double>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
    std::fprintf(stderr, "config %s: %.1fs (budget %.0fs)\n", name.c_str(),
                 cr.secs, budget);
  }

  const std::vector<Criterion> criteria = {
      {"C01", "crossing transfer closed form matches quadrature",
       "library_checks", {"transfer_closed_form"}},
      {"C02", "Fourier intertwining of the transfer family",
       "library_checks", {"fourier_intertwining"}},
      {"C03", "linearized flow symplectic, width in the Siegel domain",
       "library_checks", {"symplectic_siegel"}},
      {"C04", "band-frame transport: unit norm, in-band, Hermitian generator",
       "library_checks", {"parallel_transport"}},
      {"C05", "gapped adiabatic sweep, observed order >= 0.9",
       "gapped_adiabatic_1d", {"adiabatic_order"}},
      {"C06", "crossing sweep, observed order >= 0.5 past the event",
       "schrodinger_crossing_1d", {"crossing_order"}},
      {"C07", "spawned-packet overlap and transferred mass vs oracle",
       "schrodinger_crossing_1d", {"transfer_fidelity"}},
      {"C08", "finite-difference Taylor data at the crossing",
       "library_checks", {"phase_taylor"}},
      {"C09", "Herman-Kluk: pendulum order >= 0.8 and exact harmonic",
       "pendulum_hk_1d", {"hk_pendulum_order", "hk_harmonic_exact"}},
      {"C10", "grid oracle: unitarity and dt-halving order",
       "oracle_selfcheck_1d", {"oracle_unitarity", "oracle_dt_order"}},
  };

  std::map<std::string, double> budget;
  for (const auto& [name, b] : configs) budget[name] = b;

  bool all = true;
  for (const Criterion& c : criteria) {
    const ConfigRun& cr = runs[c.config];
    bool pass = cr.ok;
    std::string detail;
    if (!cr.ok) {
      detail = "config run failed: " + cr.error;
    } else {
      for (const char* want : c.checks) {
        const wx::CheckResult* found = nullptr;
        for (const wx::CheckResult& r : cr.res.checks)
          if (r.name == want) found = &r;
        if (!found) {
          pass = false;
          detail += std::string(detail.empty() ? "" : "; ") + want +
                    ": missing from config";
          continue;
        }
        pass = pass && found->pass;
        detail += std::string(detail.empty() ? "" : "; ") + found->detail;
      }
      if (cr.secs > budget[c.config]) {
        pass = false;
        char buf[96];
        std::snprintf(buf, sizeof buf, "; over time budget (%.1fs > %.0fs)",
                      cr.secs, budget[c.config]);
        detail += buf;
      }
    }
    all = all && pass;
    std::printf("%s %s  %s -- %s\n", c.id, pass ? "PASS" : "FAIL", c.label,
                detail.c_str());
  }
  std::printf("acceptance: %s\n", all ? "ALL PASS" : "FAILURES PRESENT");
  return all ? 0 : 1;
}
