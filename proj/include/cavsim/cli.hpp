#pragma once

namespace cavsim::cli {

/**
 * @brief Command-line entry point (verbs: run, compare, validate, bounds).
 *
 * `run`      — simulate a scenario and write trajectories/planning/metrics
 *              outputs; flags `--scenario --mode --duration --reps --seed
 *              --tracking --out`.
 * `compare`  — diff two metrics.json files from paired optimal/baseline runs.
 * `validate` — parse a scenario file and report every problem found.
 * `bounds`   — print the feasible exit-time window for a (v0, S, limits)
 *              triple, one `key=value` per line.
 *
 * @return process exit code: 0 ok, 1 runtime failure, 2 usage/config error,
 *         3 safety violation detected.
 */
int run(int argc, const char* const* argv);

} // namespace cavsim::cli
