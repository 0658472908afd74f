"""Monte-Carlo sweeps of visited-node complexity and symbol error rate.

Each trial draws a channel, a uniformly random transmit vector and noise
from its own streams keyed by ``(snr_index, trial_index, purpose)``, and
every configured detector decodes the same received vector. Results are
therefore independent of scheduling and SD/KSD are always compared on
identical instances.
"""

from concurrent.futures import ProcessPoolExecutor
import configparser
import csv
from dataclasses import dataclass, field, replace
import logging
import math

import numpy as np

from .channel import ChannelSpec, Fading, RngStream, add_noise, draw_channel, eta0_for_snr
from .detection import (
    Enumeration,
    SearchConfig,
    Traversal,
    ml_exhaustive,
    sphere_decode,
)
from .dominance import king_decode, king_sphere_decode
from .errors import InvalidArgument, KingSphereError
from .modulation import Modulation, ModulationKind, build_problem, lifted_to_symbols

__all__ = [
    "DETECTORS",
    "SimConfig",
    "SweepRow",
    "TrialOutcome",
    "DominanceViolation",
    "decode_with",
    "draw_instance",
    "run_trial",
    "run_sweep",
    "emit_csv",
    "read_csv",
    "load_config",
    "parse_snr_grid",
    "parse_radius",
    "config_from_mapping",
]

log = logging.getLogger(__name__)

DETECTORS = ("ml", "sd", "kd", "ksd")
CSV_HEADER = ["snr_db", "detector", "channel", "modulation", "K", "N",
              "avg_visited_nodes", "ser", "trials"]

# stream purposes within a trial
_CHANNEL, _SYMBOLS, _NOISE = 0, 1, 2


class DominanceViolation(KingSphereError, AssertionError):
    """KSD visited more nodes than SD on the same instance."""


@dataclass(frozen=True)
class SimConfig:
    channel: ChannelSpec
    modulation: ModulationKind = ModulationKind.QAM4
    detectors: tuple = ("sd", "ksd")
    search: SearchConfig = SearchConfig()
    snr_grid_db: tuple = tuple(range(0, 21, 2))
    trials_per_point: int = 10_000
    seed: int = 0
    Ex: float = 1.0
    output_path: str | None = None
    workers: int = 1

    def __post_init__(self):
        if self.trials_per_point < 1:
            raise InvalidArgument("trials_per_point must be at least 1")
        grid = tuple(float(s) for s in self.snr_grid_db)
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise InvalidArgument("SNR grid must be strictly increasing")
        object.__setattr__(self, "snr_grid_db", grid)
        dets = tuple(d.lower() for d in self.detectors)
        unknown = set(dets) - set(DETECTORS)
        if unknown or not dets:
            raise InvalidArgument(f"unknown detectors {sorted(unknown)}")
        object.__setattr__(self, "detectors", tuple(dict.fromkeys(dets)))
        object.__setattr__(self, "modulation", ModulationKind(self.modulation))

    @property
    def mod(self):
        return Modulation(self.modulation, self.Ex / self.channel.K)


@dataclass
class TrialOutcome:
    visited: dict
    symbol_errors: dict
    bits: dict
    ml_mismatch: dict = field(default_factory=dict)


@dataclass
class SweepRow:
    snr_db: float
    detector: str
    channel: str
    modulation: str
    K: int
    N: int
    avg_visited_nodes: float
    ser: float
    trials: int
    # in-memory only, not written to CSV
    var_visited_nodes: float = field(default=0.0, compare=False)
    ml_mismatches: int = field(default=0, compare=False)
    dominance_violations: int = field(default=0, compare=False)


def decode_with(name, problem, search):
    if name == "ml":
        return ml_exhaustive(problem)
    if name == "sd":
        return sphere_decode(problem, replace(search, dominance_enabled=False))
    if name == "kd":
        return king_decode(problem)
    return king_sphere_decode(problem, search)


def draw_instance(cfg, snr_index, snr_db, trial_index):
    """Channel, transmitted grid symbols and received vector of one trial."""
    mod = cfg.mod
    H = draw_channel(cfg.channel, RngStream(cfg.seed, (snr_index, trial_index, _CHANNEL)))
    gen = RngStream(cfg.seed, (snr_index, trial_index, _SYMBOLS)).generator()
    x = mod.grid[gen.integers(len(mod.grid), size=cfg.channel.K)]
    eta0 = eta0_for_snr(snr_db, cfg.Ex)
    y = add_noise(H @ (mod.scale * x), eta0,
                  RngStream(cfg.seed, (snr_index, trial_index, _NOISE)))
    return H, x, y


def run_trial(cfg, snr_db, trial_index, snr_index=None):
    """Decode one random instance with every configured detector.

    Symbol errors are counted on complex symbols (16-QAM after
    recomposition). When ML is configured, ``ml_mismatch[d]`` flags a
    detector whose decision differs from ML's by more than a metric tie.
    """
    if snr_index is None:
        snr_index = cfg.snr_grid_db.index(float(snr_db))
    H, x, y = draw_instance(cfg, snr_index, snr_db, trial_index)
    problem = build_problem(cfg.mod, H, y)
    K = cfg.channel.K
    out = TrialOutcome({}, {}, {})
    results = {}
    for name in cfg.detectors:
        res = decode_with(name, problem, cfg.search)
        results[name] = res
        xhat = lifted_to_symbols(res.symbols, cfg.modulation, K)
        out.visited[name] = res.visited_nodes
        out.symbol_errors[name] = int(np.count_nonzero(xhat != x))
        out.bits[name] = res.symbols
    if "ml" in results:
        ml = results["ml"]
        for name, res in results.items():
            same = np.array_equal(res.symbols, ml.symbols)
            out.ml_mismatch[name] = not same and abs(res.metric - ml.metric) > 1e-9
    return out


def _run_point(args):
    cfg, snr_index, trials = args
    snr_db = cfg.snr_grid_db[snr_index]
    dets = cfg.detectors
    visited = dict.fromkeys(dets, 0)
    visited_sq = dict.fromkeys(dets, 0)
    errors = dict.fromkeys(dets, 0)
    mismatches = dict.fromkeys(dets, 0)
    violations = 0
    for t in trials:
        o = run_trial(cfg, snr_db, t, snr_index)
        for d in dets:
            v = o.visited[d]
            visited[d] += v
            visited_sq[d] += v * v
            errors[d] += o.symbol_errors[d]
            mismatches[d] += o.ml_mismatch.get(d, False)
        if "sd" in o.visited and "ksd" in o.visited and o.visited["ksd"] > o.visited["sd"]:
            violations += 1
            log.error("KSD visited %d > SD %d at snr=%g trial=%d",
                      o.visited["ksd"], o.visited["sd"], snr_db, t)
    return snr_index, visited, visited_sq, errors, mismatches, violations


def run_sweep(cfg, strict=True):
    """Aggregate ``trials_per_point`` trials at every SNR of the grid.

    With ``strict`` (the default) any trial where KSD visits more nodes
    than SD raises :class:`DominanceViolation` after the sweep.
    """
    n = cfg.trials_per_point
    if cfg.workers > 1:
        chunks = np.array_split(np.arange(n), cfg.workers)
        jobs = [(cfg, i, c.tolist()) for i in range(len(cfg.snr_grid_db)) for c in chunks]
        with ProcessPoolExecutor(cfg.workers) as pool:
            parts = list(pool.map(_run_point, jobs))
    else:
        parts = [_run_point((cfg, i, range(n))) for i in range(len(cfg.snr_grid_db))]

    dets = cfg.detectors
    tot = {i: [dict.fromkeys(dets, 0) for _ in range(4)] + [0]
           for i in range(len(cfg.snr_grid_db))}
    for i, *sums, viol in parts:
        for acc, part in zip(tot[i][:4], sums):
            for d in dets:
                acc[d] += part[d]
        tot[i][4] += viol

    K, N = cfg.channel.K, cfg.channel.N
    rows = []
    total_violations = 0
    for i, snr in enumerate(cfg.snr_grid_db):
        visited, visited_sq, errors, mismatches, viol = tot[i]
        total_violations += viol
        for d in dets:
            mean = visited[d] / n
            var = max(visited_sq[d] / n - mean * mean, 0.0) * n / max(n - 1, 1)
            rows.append(SweepRow(
                snr, d, cfg.channel.tag, cfg.modulation.value, K, N,
                mean, errors[d] / (n * K), n,
                var_visited_nodes=var,
                ml_mismatches=mismatches[d],
                dominance_violations=viol if d == "ksd" else 0,
            ))
    rows.sort(key=lambda r: (r.snr_db, r.detector))
    if strict and total_violations:
        raise DominanceViolation(
            f"KSD exceeded SD visited nodes on {total_violations} trials")
    if cfg.output_path:
        emit_csv(rows, cfg.output_path)
    return rows


def _fmt(v):
    return f"{v:.6g}"


def emit_csv(rows, path):
    """Write rows sorted by SNR then detector name; ``path`` may be a stream."""
    if hasattr(path, "write"):
        _write_rows(rows, path)
        return
    with open(path, "w", newline="") as fh:
        _write_rows(rows, fh)


def _write_rows(rows, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in sorted(rows, key=lambda r: (r.snr_db, r.detector)):
        w.writerow([_fmt(r.snr_db), r.detector, r.channel, r.modulation,
                    r.K, r.N, _fmt(r.avg_visited_nodes), _fmt(r.ser), r.trials])


def read_csv(path):
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise ValueError(f"unexpected header {reader.fieldnames}")
        for rec in reader:
            rows.append(SweepRow(
                float(rec["snr_db"]), rec["detector"], rec["channel"],
                rec["modulation"], int(rec["K"]), int(rec["N"]),
                float(rec["avg_visited_nodes"]), float(rec["ser"]),
                int(rec["trials"])))
    return rows


def parse_snr_grid(text):
    """``"start:step:stop"`` (stop inclusive) or a comma-separated list."""
    text = text.strip()
    if ":" in text:
        start, step, stop = (float(p) for p in text.split(":"))
        if step <= 0:
            raise InvalidArgument("SNR step must be positive")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + i * step, 10) for i in range(n))
    return tuple(float(p) for p in text.split(","))


def parse_radius(text):
    text = str(text).strip().lower()
    if text in ("inf", "infinite"):
        return math.inf
    if text == "babai":
        return "babai"
    return float(text)


def config_from_mapping(opts):
    """Build a :class:`SimConfig` from flat string options.

    Keys: ``k, n, mod, channel, rho_t, rho_r, detectors, snr, trials,
    seed, ex, out, enumeration, traversal, radius, growth, workers``.
    """
    o = {k.replace("-", "_"): v for k, v in opts.items() if v is not None}
    fading = Fading(str(o.get("channel", "iid")))
    rho_t = float(o.get("rho_t", 0.5 if fading is Fading.KRONECKER else 0.0))
    rho_r = float(o.get("rho_r", 0.5 if fading is Fading.KRONECKER else 0.0))
    channel = ChannelSpec(int(o.get("n", 2)), int(o.get("k", 2)), fading, rho_t, rho_r)
    search = SearchConfig(
        traversal=Traversal(str(o.get("traversal", "dfs"))),
        enumeration=Enumeration(str(o.get("enumeration", "zigzag"))),
        initial_radius_sq=parse_radius(o.get("radius", "inf")),
        restart_growth=float(o.get("growth", 4.0)),
    )
    dets = o.get("detectors", "sd,ksd")
    if isinstance(dets, str):
        dets = [d.strip() for d in dets.split(",") if d.strip()]
    snr = o.get("snr", "0:2:20")
    grid = parse_snr_grid(snr) if isinstance(snr, str) else tuple(snr)
    return SimConfig(
        channel=channel,
        modulation=ModulationKind(str(o.get("mod", "4qam"))),
        detectors=tuple(dets),
        search=search,
        snr_grid_db=grid,
        trials_per_point=int(o.get("trials", 10_000)),
        seed=int(o.get("seed", 0)),
        Ex=float(o.get("ex", 1.0)),
        output_path=o.get("out"),
        workers=int(o.get("workers", 1)),
    )


def load_config(path, overrides=None):
    """Read an INI-style ``[sim]`` section and apply ``overrides`` on top."""
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_file(fh)
    if not parser.has_section("sim"):
        raise InvalidArgument(f"{path}: missing [sim] section")
    opts = dict(parser["sim"])
    opts.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return config_from_mapping(opts)
