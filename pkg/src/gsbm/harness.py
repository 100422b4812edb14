"""Experiment configuration, sweeps, and CSV emission.

Configs are flat `key = value` text (TOML grammar); the profile is an
inline literal, either

    profile = { kind = "step", a = 0.9, b = 0.1, r = 1.0 }
    profile = { kind = "pwl", knots_in = [[0.0, 0.9], [1.0, 0.1]],
                knots_out = [[0.0, 0.1], [1.0, 0.9]], r = 1.0 }

Sweeps derive one seed per (n, trial) cell by hashing, so adding trials
or n values never reshuffles earlier rows, and rows are written
incrementally so an interrupted sweep resumes by row count.
"""

from __future__ import annotations

import csv
import sys
import time
from dataclasses import dataclass

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .divergence import information_metric
from .oracle import flip_bad_census
from .partition import (
    build_block_grid,
    build_visibility_graph,
    occupied_blocks,
    vertex_visibility_connected,
)
from .profiles import Profile, make_piecewise_linear_profile, make_step_profile
from .recovery import STATUS_OK, agreement, run_exact_recovery
from .rng import trial_seed
from .sampler import load_graph, sample, save_graph

MODES = ("metric", "sample", "recover", "sweep", "genie", "flipbad", "connectivity")

SWEEP_COLUMNS = (
    "seed", "n", "I", "status", "agreement", "phase1_mistakes",
    "flip_bad_count", "block_connected", "vertex_connected", "elapsed_ms",
)


class ConfigError(Exception):
    """Invalid experiment configuration; carries one message per problem."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(eq=False)
class ExperimentConfig:
    mode: str | None = None
    d: int | None = None
    lam: float | None = None
    r: float | None = None
    profile_literal: dict | None = None
    ns: tuple[float, ...] = ()
    chi: float | None = None
    delta: float | None = None
    chi0: float | None = None
    delta_factor: float = 0.5
    eps: float | None = None
    trials: int = 1
    seed: int = 0
    out: str | None = None
    graph: str | None = None
    workers: int = 1

    def build_profile(self) -> Profile:
        lit = self.profile_literal
        if lit is None:
            if self.r is None:
                raise ConfigError(["a profile literal (or at least r) is required"])
            # geometry-only runs (connectivity) need a placeholder profile
            return make_step_profile(0.6, 0.4, self.r)
        return build_profile_literal(lit)


@dataclass(frozen=True)
class TrialResult:
    seed: int
    n: float
    I: float
    status: str
    agreement: float
    phase1_mistakes: int
    flip_bad_count: int
    block_connected: bool
    vertex_connected: bool
    elapsed_ms: float

    def row(self) -> list:
        return [
            self.seed,
            repr(self.n),
            repr(self.I),
            self.status,
            repr(self.agreement),
            self.phase1_mistakes,
            self.flip_bad_count,
            str(self.block_connected).lower(),
            str(self.vertex_connected).lower(),
            repr(self.elapsed_ms),
        ]


def build_profile_literal(lit: dict) -> Profile:
    kind = lit.get("kind")
    if kind == "step":
        return make_step_profile(lit["a"], lit["b"], lit["r"])
    if kind == "pwl":
        return make_piecewise_linear_profile(
            [(t, v) for t, v in lit["knots_in"]],
            [(t, v) for t, v in lit["knots_out"]],
            lit["r"],
        )
    raise ConfigError([f"unknown profile kind {kind!r}"])


def serialize_profile_literal(lit: dict) -> str:
    """Inline-table text for a profile literal; parses back to itself."""
    if lit.get("kind") == "step":
        return (
            f'{{ kind = "step", a = {lit["a"]!r}, b = {lit["b"]!r}, '
            f'r = {lit["r"]!r} }}'
        )
    def knot_text(knots):
        return "[" + ", ".join(f"[{t!r}, {v!r}]" for t, v in knots) + "]"

    return (
        f'{{ kind = "pwl", knots_in = {knot_text(lit["knots_in"])}, '
        f'knots_out = {knot_text(lit["knots_out"])}, r = {lit["r"]!r} }}'
    )


def _key_lines(text: str) -> dict[str, int]:
    lines = {}
    for i, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if "=" in stripped:
            key = stripped.split("=", 1)[0].strip()
            if key and key not in lines:
                lines[key] = i
    return lines


_KNOWN_KEYS = {
    "mode", "d", "lambda", "r", "profile", "n", "chi", "delta", "chi0",
    "delta_factor", "eps", "trials", "seed", "out", "graph", "workers",
}


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate config text; raises ConfigError listing problems."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([f"config syntax error: {exc}"]) from exc
    where = _key_lines(text)
    errors: list[str] = []

    def at(key: str) -> str:
        return f"line {where.get(key, '?')}: {key}"

    for key in raw:
        if key not in _KNOWN_KEYS:
            errors.append(f"{at(key)}: unknown key")

    cfg = ExperimentConfig()

    def take_number(key, *, positive=False, integer=False, minimum=None):
        if key not in raw:
            return None
        val = raw[key]
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            errors.append(f"{at(key)}: expected a number")
            return None
        if integer and not isinstance(val, int):
            errors.append(f"{at(key)}: expected an integer")
            return None
        if positive and not val > 0:
            errors.append(f"{at(key)}: must be positive")
            return None
        if minimum is not None and val < minimum:
            errors.append(f"{at(key)}: must be >= {minimum}")
            return None
        return val

    mode = raw.get("mode")
    if mode is not None:
        if mode not in MODES:
            errors.append(f"{at('mode')}: must be one of {', '.join(MODES)}")
        else:
            cfg.mode = mode

    d = take_number("d", positive=True, integer=True)
    if d is not None:
        cfg.d = int(d)
    lam = take_number("lambda", positive=True)
    if lam is not None:
        cfg.lam = float(lam)
    r = take_number("r", positive=True)
    if r is not None:
        cfg.r = float(r)
    for key, attr, positive in (
        ("chi", "chi", True),
        ("delta", "delta", True),
        ("chi0", "chi0", True),
        ("delta_factor", "delta_factor", True),
        ("eps", "eps", True),
    ):
        val = take_number(key, positive=positive)
        if val is not None:
            setattr(cfg, attr, float(val))
    trials = take_number("trials", integer=True, minimum=1)
    if trials is not None:
        cfg.trials = int(trials)
    seed = take_number("seed", integer=True)
    if seed is not None:
        cfg.seed = int(seed)
    workers = take_number("workers", integer=True, minimum=1)
    if workers is not None:
        cfg.workers = int(workers)

    if "n" in raw:
        val = raw["n"]
        items = val if isinstance(val, list) else [val]
        if not items:
            errors.append(f"{at('n')}: n-list must be nonempty")
        ok = all(isinstance(x, (int, float)) and not isinstance(x, bool) and x > 1 for x in items)
        if not ok:
            errors.append(f"{at('n')}: entries must be numbers greater than 1")
        else:
            cfg.ns = tuple(float(x) for x in items)

    for key, attr in (("out", "out"), ("graph", "graph")):
        if key in raw:
            if not isinstance(raw[key], str):
                errors.append(f"{at(key)}: expected a string path")
            else:
                setattr(cfg, attr, raw[key])

    if "profile" in raw:
        lit = raw["profile"]
        if not isinstance(lit, dict):
            errors.append(f"{at('profile')}: expected an inline table")
        else:
            try:
                build_profile_literal(lit)
                cfg.profile_literal = lit
            except ConfigError as exc:
                errors.extend(f"{at('profile')}: {e}" for e in exc.errors)
            except Exception as exc:
                errors.append(f"{at('profile')}: {exc}")

    if errors:
        raise ConfigError(errors)
    return cfg


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config(fh.read())


def _require(cfg: ExperimentConfig, *keys: str) -> None:
    missing = []
    for key in keys:
        attr = {"lambda": "lam", "n": "ns", "profile": "profile_literal"}.get(key, key)
        val = getattr(cfg, attr)
        if val is None or (attr == "ns" and not val):
            missing.append(key)
    if missing:
        raise ConfigError([f"missing required key: {k}" for k in missing])


def run_trial(cfg: ExperimentConfig, n: float, trial_index: int, i_value: float) -> TrialResult:
    """One sweep cell: sample, recover, census, connectivity checks."""
    profile = cfg.build_profile()
    seed = trial_seed(cfg.seed, n, trial_index)
    t0 = time.perf_counter()
    graph = sample(cfg.lam, n, profile, cfg.d, seed)
    outcome = run_exact_recovery(graph, cfg.chi, cfg.delta, cfg.eps)
    census = flip_bad_census(graph)
    vconn = vertex_visibility_connected(graph)
    elapsed_ms = (time.perf_counter() - t0) * 1000.0
    return TrialResult(
        seed=seed,
        n=n,
        I=i_value,
        status=outcome.status,
        agreement=agreement(outcome.labeling, graph.sigma_star),
        phase1_mistakes=outcome.mistakes_phase1,
        flip_bad_count=census.count,
        block_connected=outcome.status == STATUS_OK,
        vertex_connected=vconn,
        elapsed_ms=elapsed_ms,
    )


def _count_data_rows(path) -> int:
    try:
        with open(path, newline="") as fh:
            return max(sum(1 for _ in csv.reader(fh)) - 1, 0)
    except FileNotFoundError:
        return 0


def run_sweep(cfg: ExperimentConfig, out_path=None) -> list[TrialResult]:
    """All (n, trial) cells in order; rows appended to out_path as computed.

    If out_path already holds k data rows the first k cells are skipped,
    which makes an interrupted sweep resumable.
    """
    _require(cfg, "d", "lambda", "profile", "n", "chi", "delta")
    profile = cfg.build_profile()
    i_value = information_metric(profile, cfg.lam, cfg.d).I
    cells = [(n, t) for n in cfg.ns for t in range(cfg.trials)]
    done = 0
    writer = None
    fh = None
    if out_path is not None:
        done = _count_data_rows(out_path)
        fh = open(out_path, "a", newline="")
        writer = csv.writer(fh)
        if done == 0:
            writer.writerow(SWEEP_COLUMNS)
            fh.flush()
    results: list[TrialResult] = []
    try:
        todo = cells[done:]
        if cfg.workers > 1 and todo:
            from concurrent.futures import ProcessPoolExecutor

            with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
                futures = [
                    pool.submit(run_trial, cfg, n, t, i_value) for n, t in todo
                ]
                for fut in futures:
                    res = fut.result()
                    results.append(res)
                    if writer is not None:
                        writer.writerow(res.row())
                        fh.flush()
        else:
            for n, t in todo:
                res = run_trial(cfg, n, t, i_value)
                results.append(res)
                if writer is not None:
                    writer.writerow(res.row())
                    fh.flush()
    finally:
        if fh is not None:
            fh.close()
    return results


def run_metric(cfg: ExperimentConfig) -> str:
    _require(cfg, "d", "lambda", "profile")
    rep = information_metric(cfg.build_profile(), cfg.lam, cfg.d)
    return (
        "I,D_plus,t_star,quad_error\n"
        f"{rep.I!r},{rep.D_plus!r},{rep.t_star!r},{rep.quad_error!r}\n"
    )


def run_sample(cfg: ExperimentConfig, out_path) -> str:
    _require(cfg, "d", "lambda", "profile", "n")
    graph = sample(cfg.lam, cfg.ns[0], cfg.build_profile(), cfg.d, cfg.seed)
    save_graph(graph, out_path)
    return f"wrote {graph.n_vertices} vertices, {graph.n_edges} edges to {out_path}"


def run_recover(cfg: ExperimentConfig, out_path) -> str:
    _require(cfg, "profile", "chi", "delta")
    if cfg.graph is None:
        raise ConfigError(["recover mode needs `graph` (path to a graph file)"])
    graph = load_graph(cfg.graph, cfg.build_profile())
    t0 = time.perf_counter()
    outcome = run_exact_recovery(graph, cfg.chi, cfg.delta, cfg.eps)
    elapsed_ms = (time.perf_counter() - t0) * 1000.0
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["vertex_id", "phase1_label", "phase2_label", "true_label"])
        for v in range(graph.n_vertices):
            writer.writerow(
                [
                    v,
                    int(outcome.phase1.values[v]),
                    int(outcome.labeling.values[v]),
                    int(graph.sigma_star[v]),
                ]
            )
    acc = agreement(outcome.labeling, graph.sigma_star)
    return f"{outcome.status},{acc!r},{outcome.mistakes_phase1},{elapsed_ms:.3f}"


def run_genie(cfg: ExperimentConfig, out_path) -> str:
    _require(cfg, "d", "lambda", "profile", "n")
    graph = sample(cfg.lam, cfg.ns[0], cfg.build_profile(), cfg.d, cfg.seed)
    census = flip_bad_census(graph)
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["vertex", "tau", "true_label"])
        for v in range(graph.n_vertices):
            writer.writerow([v, repr(float(census.tau_values[v])), int(graph.sigma_star[v])])
    return f"flip_bad_count={census.count}"


def run_flipbad(cfg: ExperimentConfig, out_path) -> str:
    _require(cfg, "d", "lambda", "profile", "n")
    profile = cfg.build_profile()
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "seed", "count"])
        total = 0
        for n in cfg.ns:
            for t in range(cfg.trials):
                seed = trial_seed(cfg.seed, n, t)
                graph = sample(cfg.lam, n, profile, cfg.d, seed)
                count = flip_bad_census(graph).count
                total += count
                writer.writerow([repr(n), seed, count])
                fh.flush()
    return f"total flip-bad vertices: {total}"


def run_connectivity(cfg: ExperimentConfig, out_path) -> str:
    _require(cfg, "d", "lambda", "n", "chi", "delta")
    profile = cfg.build_profile()
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trial", "block_connected", "vertex_connected", "occupied_blocks"])
        for t in range(cfg.trials):
            seed = trial_seed(cfg.seed, cfg.ns[0], t)
            graph = sample(cfg.lam, cfg.ns[0], profile, cfg.d, seed)
            grid = build_block_grid(graph, cfg.chi, cfg.delta)
            vis = build_visibility_graph(grid, graph)
            vconn = vertex_visibility_connected(graph)
            writer.writerow(
                [
                    t,
                    str(vis.connected).lower(),
                    str(vconn).lower(),
                    len(occupied_blocks(grid)),
                ]
            )
            fh.flush()
    return f"ran {cfg.trials} trials"
