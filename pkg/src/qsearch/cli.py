"""Command-line front end.

Every subcommand builds a result document with the fields ``algorithm``,
``parameters``, ``query_count``, ``probabilities``, ``closed_form_predictions``,
``residuals`` and ``wall_time_ms`` and writes it as JSON or CSV.

Exit codes: 0 success, 2 invalid configuration, 3 algorithm-level
infeasibility, 4 numerical accuracy failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import adiabatic as adb
from . import early, grover, partial, structured, sure_success
from .emit import render, sample_measurement
from .errors import AccuracyError, InfeasibleError, SearchError
from .state import BlockLayout, SearchSpace, probability_of_set, uniform_state

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_ACCURACY = 0, 2, 3, 4
OUTPUT_DIR_ENV = "QSEARCH_OUTPUT_DIR"

SUBCOMMANDS = ("dj", "bv", "grover", "amplify", "structured", "optimality", "partial",
               "sure-success", "adiabatic", "compare-partial")


class ConfigError(SearchError, ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    params: dict[str, Any] = field(default_factory=dict)
    fmt: str = "json"
    output: str | None = None
    seed: int = 0
    shots: int | None = None
    timing: bool = False


def _doc(algorithm, params, query_count, probabilities, predictions, residuals, **extra):
    doc = {
        "algorithm": algorithm,
        "parameters": params,
        "query_count": query_count,
        "probabilities": probabilities,
        "closed_form_predictions": predictions,
        "residuals": residuals,
    }
    doc.update(extra)
    return doc


def _targets(p, n) -> tuple[int, ...]:
    if p.get("targets"):
        return tuple(int(t) for t in str(p["targets"]).split(","))
    return tuple(range(1 if p.get("m") is None else int(p["m"])))


def _maybe_sample(doc, state, cfg: RunConfig):
    if cfg.shots:
        doc["samples"] = {"seed": cfg.seed, "shots": cfg.shots,
                          "histogram": {str(k): v for k, v in
                                        sample_measurement(state, cfg.seed, cfg.shots).items()}}
    return doc


# -- subcommands ----------------------------------------------------------------

def _oracle(p) -> early.BooleanOracle:
    promise = p["promise"]
    if p.get("truth_table"):
        return early.BooleanOracle.from_file(p["truth_table"], promise)
    kind, n = p.get("function") or "constant0", int(p["n"])
    if kind in ("constant0", "constant1"):
        o = early.BooleanOracle.constant(n, int(kind[-1]))
        return early.BooleanOracle(n, o.truth_table, promise)
    if kind.startswith("balanced"):
        bit = int(kind.split(":")[1]) if ":" in kind else 0
        o = early.BooleanOracle.single_bit(n, bit)
        return early.BooleanOracle(n, o.truth_table, promise)
    raise ConfigError(f"unknown function {kind!r}; use constant0, constant1 or balanced:<bit>")


def run_dj(cfg: RunConfig):
    p = dict(cfg.params, promise=early.Promise.CONSTANT_OR_BALANCED)
    oracle = _oracle(p)
    counter = early.QueryCounter()
    cls = early.classify_deutsch_jozsa(oracle, counter)
    psi = early.one_query_state(oracle)
    ones = sum(oracle.truth_table)
    expected = "constant" if ones in (0, len(oracle.truth_table)) else "balanced"
    p0 = float(abs(psi[0]) ** 2)
    doc = _doc("deutsch-jozsa" if oracle.n_bits > 1 else "deutsch",
               {"n_bits": oracle.n_bits}, counter.oracle_calls,
               {"p_all_zero": p0}, {"p_all_zero": 1.0 if expected == "constant" else 0.0},
               {"p_all_zero": abs(p0 - (1.0 if expected == "constant" else 0.0))},
               result=cls.value)
    return _maybe_sample(doc, psi, cfg)


def run_bv(cfg: RunConfig):
    p = cfg.params
    if p.get("truth_table"):
        oracle = early.BooleanOracle.from_file(p["truth_table"], early.Promise.LINEAR)
    elif p.get("hidden"):
        oracle = early.BooleanOracle.linear(str(p["hidden"]))
    else:
        raise ConfigError("bv needs --hidden or --truth-table")
    counter = early.QueryCounter()
    hidden = early.recover_hidden_string(oracle, counter)
    psi = early.one_query_state(oracle)
    idx = early.bits_to_int(hidden)
    p_hidden = float(abs(psi[idx]) ** 2)
    doc = _doc("bernstein-vazirani", {"n_bits": oracle.n_bits}, counter.oracle_calls,
               {"p_hidden": p_hidden}, {"p_hidden": 1.0}, {"p_hidden": abs(p_hidden - 1.0)},
               result=hidden)
    return _maybe_sample(doc, psi, cfg)


def run_grover_cmd(cfg: RunConfig):
    p = cfg.params
    n = int(p["n"])
    space = SearchSpace(n, _targets(p, n))
    plan = grover.plan_grover(n, space.n_marked)
    j = plan.j_opt if p.get("j") is None else int(p["j"])
    psi, counter = grover.run_grover(space, j)
    p_target = probability_of_set(psi, space.marked)
    pred = grover.success_probability(plan, j)
    doc = _doc("grover", {"n": n, "targets": list(space.marked), "j": j, "j_opt": plan.j_opt},
               counter.oracle_calls, {"p_target": p_target}, {"p_target": pred},
               {"p_target": abs(p_target - pred)})
    return _maybe_sample(doc, psi, cfg)


def run_amplify(cfg: RunConfig):
    p = cfg.params
    n = int(p["n"])
    space = SearchSpace(n, _targets(p, n))
    prep = p.get("prepare") or "hadamard"
    if prep == "hadamard":
        plan = grover.walsh_hadamard_plan(space)
    elif prep == "biased":
        a = float(p.get("amplitude") or 0.5)
        if not 0 < a <= 1:
            raise ConfigError("--amplitude must lie in (0, 1]")
        rest = n - space.n_marked
        vec = np.zeros(n)
        vec[list(space.marked)] = a / math.sqrt(space.n_marked)
        if rest:
            mask = np.ones(n, dtype=bool)
            mask[list(space.marked)] = False
            vec[mask] = math.sqrt(1 - a * a) / math.sqrt(rest)
        u, u_inv = grover.householder_preparation(vec)
        plan = grover.plan_amplification(u, space, inverse=u_inv)
    else:
        raise ConfigError(f"unknown preparation {prep!r}; use hadamard or biased")
    j = plan.j_u if p.get("j") is None else int(p["j"])
    psi, counter = grover.run_amplified(plan, space, j)
    p_target = probability_of_set(psi, space.marked)
    theta_u = math.asin(min(1.0, abs(plan.target_amplitude)))
    pred = math.sin((2 * j + 1) * theta_u) ** 2
    doc = _doc("amplitude-amplification",
               {"n": n, "targets": list(space.marked), "prepare": prep, "j": j, "j_u": plan.j_u},
               counter.oracle_calls, {"p_target": p_target}, {"p_target": pred},
               {"p_target": abs(p_target - pred)},
               target_amplitude=abs(plan.target_amplitude))
    return _maybe_sample(doc, psi, cfg)


def run_structured_cmd(cfg: RunConfig):
    p = cfg.params
    n, m = int(p["n"]), int(p.get("m") or 1)
    a_t = int(p.get("a_target") or 0)
    b_t = int(p.get("b_target") or 0)
    others = [a for a in range(n) if a != a_t][: max(0, m - 1)]
    g_true = (a_t, *others)
    oracle = structured.StructuredOracle(n, a_t, b_t, g_true)
    found, counter, res = structured.run_structured(oracle)
    doc = _doc("structured-search",
               {"n": n, "m": oracle.m, "a_target": a_t, "b_target": b_t,
                "j1": res.counts.j1, "j12": res.counts.j12, "j": res.counts.j,
                "exact_angles": res.counts.exact_angles},
               counter.oracle_calls, {"p_target": res.p_target, "p_found": res.p_found},
               {"literal_queries": res.counts.literal_queries,
                "leading_queries": res.counts.leading_queries,
                "asymptotic_queries": res.asymptotic_queries,
                "plain_grover_queries": res.plain_grover_queries},
               {"query_count_vs_literal": counter.oracle_calls - res.counts.literal_queries},
               found=list(found), correct=found == (a_t, b_t),
               exceeds_plain_grover=res.exceeds_plain_grover)
    return doc


def run_optimality(cfg: RunConfig):
    p = cfg.params
    n = int(p["n"])
    J = grover.plan_grover(n, 1).j_opt if p.get("j") is None else int(p["j"])
    rep = grover.optimality_experiment(n, J)
    return _doc("optimality-drift", {"n": n, "J": J}, J * n,
                {"mean_success": rep.mean_success},
                {"lower_bound": rep.lower_bound, "upper_bound": rep.upper_bound},
                {"relative_to_lower_bound": abs(rep.drift_sum - rep.lower_bound) / rep.lower_bound},
                drift_sum=rep.drift_sum, upper_bound_holds=rep.upper_bound_holds,
                J_at_least_sqrt_half_n=rep.J_at_least_sqrt_half_n)


def _layout(p) -> BlockLayout:
    return partial.layout_from_counts(int(p["n"]), int(p["k"]), int(p.get("kt") or 1),
                                      int(p.get("bt") or 1))


def run_partial_cmd(cfg: RunConfig):
    p = cfg.params
    layout = _layout(p)
    plan = partial.plan_partial(layout)
    j1 = plan.j1 if p.get("j1") is None else int(p["j1"])
    j2 = plan.j2 if p.get("j2") is None else int(p["j2"])
    final = p.get("final") or "reversed"
    psi, blocks, counter = partial.run_partial(layout, j1, j2, final)
    reduced = partial.run_partial_reduced(layout, j1, j2, final)
    p_block = float(sum(blocks[list(layout.target_blocks)]))
    pred = float(abs(reduced[0]) ** 2 + abs(reduced[1]) ** 2)
    doc = _doc("grk-partial-search",
               {"n": layout.n_elements, "k": layout.n_blocks, "kt": layout.n_target_blocks,
                "bt": layout.targets_per_block, "j1": j1, "j2": j2, "final": final,
                "beta": plan.beta, "eta": plan.eta, "k_eff": plan.k_eff,
                "j1_analytic": plan.j1_analytic, "j2_analytic": plan.j2_analytic},
               counter.oracle_calls, {"p_target_block": p_block, "blocks": blocks.tolist()},
               {"p_target_block": pred, "block_angle_limit": plan.block_angle,
                "queries_per_sqrt_n": plan.queries_per_sqrt_n},
               {"p_target_block": abs(p_block - pred),
                "reduced_vs_full": float(np.max(np.abs(partial.reduce_state(psi, layout) - reduced)))},
               found_block=partial.found_block(blocks))
    return _maybe_sample(doc, psi, cfg)


def run_sure_success_cmd(cfg: RunConfig):
    layout = _layout(cfg.params)
    final, sol, counter, res = sure_success.run_sure_success(layout)
    return _doc("sure-success-partial-search",
                {"n": layout.n_elements, "k": layout.n_blocks, "kt": layout.n_target_blocks,
                 "bt": layout.targets_per_block, "j1": res.j1, "j2": res.j2,
                 "extra_local_steps": sol.extra_local_steps},
                counter.oracle_calls,
                {"p_target_block": res.success_probability, "p_unphased": res.unphased_success},
                {"p_target_block": 1.0},
                {"p_target_block": abs(res.success_probability - 1.0),
                 "vanish_condition": sol.residual, "non_target_amplitude": res.non_target_amplitude},
                phi1=sol.phi1, phi2=sol.phi2, xyz=list(sol.xyz), c=list(sol.c))


def run_adiabatic(cfg: RunConfig):
    p = cfg.params
    conf = adb.AdiabaticConfig(int(p["n"]), int(p.get("m") or 1), float(p.get("epsilon") or 0.1),
                               p.get("schedule") or "local",
                               None if p.get("time") is None else float(p["time"]),
                               None if p.get("dt") is None else float(p["dt"]))
    res = adb.integrate(conf)
    N, M = conf.n_elements, conf.n_targets
    preds = {"linear_runtime_bound": adb.linear_runtime_bound(N, M, conf.epsilon),
             "local_total_time": adb.local_total_time(N, M, conf.epsilon),
             "local_total_time_asymptotic": math.pi / (2 * conf.epsilon) * math.sqrt(N / M),
             "min_gap": math.sqrt(M / N)}
    return _doc("adiabatic-search",
                {"n": N, "m": M, "epsilon": conf.epsilon, "schedule": conf.schedule.value,
                 "total_time": res.total_time, "dt": res.total_time / max(1, res.n_steps)},
                None, {"fidelity": res.fidelity}, preds,
                {"norm_drift": res.norm_drift, "min_gap": abs(adb.exact_gap(N, M, 0.5) - preds["min_gap"])},
                rows=[{"N": N, "M": M, "epsilon": conf.epsilon, "schedule": conf.schedule.value,
                       "T": res.total_time, "fidelity": res.fidelity}])


def run_compare(cfg: RunConfig):
    p = cfg.params
    n, k = int(p["n"]), int(p["k"])
    counts = partial.compare_strategies(n, k)
    rows = [{"strategy": s, "queries": q, "prefactor": q / math.sqrt(n)} for s, q in counts.items()]
    return _doc("compare-partial", {"n": n, "k": k}, None, {}, counts, {}, rows=rows)


RUNNERS: dict[str, Callable[[RunConfig], dict]] = {
    "dj": run_dj,
    "bv": run_bv,
    "grover": run_grover_cmd,
    "amplify": run_amplify,
    "structured": run_structured_cmd,
    "optimality": run_optimality,
    "partial": run_partial_cmd,
    "sure-success": run_sure_success_cmd,
    "adiabatic": run_adiabatic,
    "compare-partial": run_compare,
}


# -- argument parsing -----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qsearch", description="Exact quantum search simulations.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--output", help="output file (default: stdout, or $%s/<cmd>.<fmt>)" % OUTPUT_DIR_ENV)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--shots", type=int, default=None, help="sample measurements of the final state")
    common.add_argument("--timing", action="store_true", help="record wall time (breaks byte-identical output)")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add(name, *args):
        sp = sub.add_parser(name, parents=[common])
        for flag, kw in args:
            sp.add_argument(flag, **kw)
        return sp

    n_req = ("--n", dict(type=int, required=True))
    add("dj", ("--n", dict(type=int, default=1, help="number of input bits")),
        ("--function", dict(default="constant0")), ("--truth-table", dict()))
    add("bv", ("--hidden", dict()), ("--truth-table", dict()))
    add("grover", n_req, ("--targets", dict()), ("--m", dict(type=int)), ("--j", dict(type=int)))
    add("amplify", n_req, ("--targets", dict()), ("--m", dict(type=int)), ("--j", dict(type=int)),
        ("--prepare", dict(choices=("hadamard", "biased"), default="hadamard")),
        ("--amplitude", dict(type=float)))
    add("structured", n_req, ("--m", dict(type=int, default=1)),
        ("--a-target", dict(type=int, default=0)), ("--b-target", dict(type=int, default=0)))
    add("optimality", n_req, ("--j", dict(type=int)))
    block = (n_req, ("--k", dict(type=int, required=True)), ("--kt", dict(type=int, default=1)),
             ("--bt", dict(type=int, default=1)))
    add("partial", *block, ("--j1", dict(type=int)), ("--j2", dict(type=int)),
        ("--final", dict(choices=partial.FINAL_STEPS, default="reversed")))
    add("sure-success", *block)
    add("adiabatic", n_req, ("--m", dict(type=int, default=1)), ("--epsilon", dict(type=float, default=0.1)),
        ("--schedule", dict(choices=("linear", "local"), default="local")),
        ("--time", dict(type=float)), ("--dt", dict(type=float)))
    add("compare-partial", n_req, ("--k", dict(type=int, required=True)))
    return parser


_GLOBAL_KEYS = {"subcommand", "format", "output", "seed", "shots", "timing"}


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    params = {k: v for k, v in vars(ns).items() if k not in _GLOBAL_KEYS}
    fmt = ns.format or ("csv" if ns.subcommand == "compare-partial" else "json")
    if ns.shots is not None and ns.shots < 1:
        raise ConfigError("--shots must be at least 1")
    return RunConfig(ns.subcommand, params, fmt, ns.output, ns.seed, ns.shots, ns.timing)


def execute(cfg: RunConfig) -> tuple[int, str]:
    """Run one configuration; returns ``(exit_code, rendered document or diagnostic)``."""
    start = time.perf_counter()
    try:
        doc = RUNNERS[cfg.subcommand](cfg)
    except AccuracyError as exc:
        return EXIT_ACCURACY, f"accuracy failure: {exc}"
    except InfeasibleError as exc:
        return EXIT_INFEASIBLE, f"infeasible: {exc}"
    except (SearchError, ValueError, KeyError) as exc:
        return EXIT_CONFIG, f"invalid configuration: {exc}"
    doc["wall_time_ms"] = (time.perf_counter() - start) * 1e3 if cfg.timing else None
    return EXIT_OK, render(doc, cfg.fmt)


def _destination(cfg: RunConfig) -> Path | None:
    if cfg.output:
        return Path(cfg.output)
    out_dir = os.environ.get(OUTPUT_DIR_ENV)
    if out_dir:
        return Path(out_dir) / f"{cfg.subcommand}.{cfg.fmt}"
    return None


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)  # argparse exits with 2 on bad flags
    try:
        cfg = config_from_args(ns)
    except ConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    code, text = execute(cfg)
    if code != EXIT_OK:
        print(text, file=sys.stderr)
        return code
    dest = _destination(cfg)
    if dest is None:
        sys.stdout.write(text)
    else:
        dest.parent.mkdir(parents=True, exist_ok=True)
        dest.write_text(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
