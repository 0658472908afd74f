"""Command line entry point: ``kingsphere sweep|decode|selftest``."""

import argparse
import json
import logging
import sys

import numpy as np

from .detection import Enumeration, SearchConfig, Traversal
from .harness import (
    DETECTORS,
    DominanceViolation,
    decode_with,
    parse_radius,
    config_from_mapping,
    emit_csv,
    load_config,
    run_sweep,
)
from .modulation import (
    Modulation,
    ModulationKind,
    build_problem,
    lifted_to_symbols,
    normalize_energy,
)
from .problem import DetectionProblem

SWEEP_KEYS = ("k", "n", "mod", "channel", "rho_t", "rho_r", "detectors", "snr",
              "trials", "seed", "out", "enumeration", "traversal", "radius",
              "workers")


def _add_search_flags(p):
    p.add_argument("--enumeration", choices=["natural", "zigzag"])
    p.add_argument("--traversal", choices=["dfs", "bfs"])
    p.add_argument("--radius", help="initial squared radius: inf, babai or a number")


def build_parser():
    parser = argparse.ArgumentParser(prog="kingsphere", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="run an SNR sweep and write a CSV")
    sw.add_argument("--config", help="INI file with a [sim] section")
    sw.add_argument("--seed", type=int)
    sw.add_argument("--snr", help="start:step:stop in dB (stop inclusive)")
    sw.add_argument("--detectors", help="comma list from ml,sd,kd,ksd")
    sw.add_argument("--channel", choices=["iid", "kron"])
    sw.add_argument("--rho-t", dest="rho_t", type=float)
    sw.add_argument("--rho-r", dest="rho_r", type=float)
    sw.add_argument("--mod", choices=["4qam", "16qam"])
    sw.add_argument("--k", type=int)
    sw.add_argument("--n", type=int)
    sw.add_argument("--trials", type=int)
    sw.add_argument("--out", help="CSV output path (default: stdout)")
    sw.add_argument("--workers", type=int)
    _add_search_flags(sw)

    dc = sub.add_parser("decode", help="decode one instance from a JSON file")
    dc.add_argument("input", help="JSON instance file, '-' for stdin")
    dc.add_argument("--detectors", default="ml,sd,kd,ksd")
    _add_search_flags(dc)

    st = sub.add_parser("selftest", help="check every detector against ML")
    st.add_argument("--trials", type=int, default=200)
    st.add_argument("--seed", type=int, default=1)
    return parser


def cmd_sweep(args):
    opts = {k: getattr(args, k, None) for k in SWEEP_KEYS}
    if args.config:
        cfg = load_config(args.config, opts)
    else:
        cfg = config_from_mapping(opts)
    try:
        rows = run_sweep(cfg)
    except DominanceViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if not cfg.output_path:
        emit_csv(rows, sys.stdout)
    return 0


def _search_from_args(args):
    return SearchConfig(
        traversal=Traversal(args.traversal or "dfs"),
        enumeration=Enumeration(args.enumeration or "zigzag"),
        initial_radius_sq=parse_radius(args.radius or "inf"),
    )


def _complex(obj):
    if isinstance(obj, dict):
        return np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj.get("im", 0.0))
    return np.asarray(obj, dtype=complex)


def load_instance(data):
    """Problem, modulation kind, K and symbol scale from a JSON instance.

    Complex form: ``{"H": {"re": .., "im": ..}, "y": {...}, "mod": "4qam",
    "ex": 1.0}`` (or ``"scale"`` instead of ``"ex"``). Real binary form:
    ``{"Hr": [[..]], "yr": [..]}``.
    """
    if "Hr" in data:
        return DetectionProblem.from_real(data["Hr"], data["yr"]), None, None, None
    H = np.atleast_2d(_complex(data["H"]))
    y = _complex(data["y"]).reshape(-1)
    kind = ModulationKind(data.get("mod", "4qam"))
    K = H.shape[1]
    scale = data.get("scale")
    if scale is None:
        scale = normalize_energy(kind, K, float(data.get("ex", 1.0)))
    mean_energy = 2.0 if kind is ModulationKind.QAM4 else 10.0
    mod = Modulation(kind, mean_energy * scale ** 2)
    return build_problem(mod, H, y), kind, K, scale


def cmd_decode(args):
    if args.input == "-":
        data = json.load(sys.stdin)
    else:
        with open(args.input) as fh:
            data = json.load(fh)
    problem, kind, K, scale = load_instance(data)
    search = _search_from_args(args)
    out = {}
    for name in [d.strip().lower() for d in args.detectors.split(",") if d.strip()]:
        if name not in DETECTORS:
            print(f"error: unknown detector {name!r}", file=sys.stderr)
            return 2
        res = decode_with(name, problem, search)
        rec = res.as_dict()
        if kind is not None:
            x = scale * lifted_to_symbols(res.symbols, kind, K)
            rec["complex_symbols"] = [[float(v.real), float(v.imag)] for v in x]
        out[name] = rec
    json.dump(out, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


SELFTEST_CASES = [
    (2, 2, "4qam", "iid"), (2, 2, "4qam", "kron"),
    (4, 4, "4qam", "iid"), (4, 4, "4qam", "kron"),
    (2, 4, "16qam", "iid"), (2, 4, "16qam", "kron"),
]


def cmd_selftest(args):
    failed = 0
    for ksearch in (SearchConfig(), SearchConfig(traversal=Traversal.BFS,
                                                 initial_radius_sq="babai")):
        for K, N, mod, ch in SELFTEST_CASES:
            cfg = config_from_mapping(dict(
                k=K, n=N, mod=mod, channel=ch, detectors="ml,sd,kd,ksd",
                snr="0:10:20", trials=args.trials, seed=args.seed,
                traversal=ksearch.traversal.value,
                radius="babai" if ksearch.initial_radius_sq == "babai" else "inf"))
            rows = run_sweep(cfg, strict=False)
            mism = sum(r.ml_mismatches for r in rows)
            viol = sum(r.dominance_violations for r in rows)
            ok = mism == 0 and viol == 0
            failed += not ok
            print(f"{'PASS' if ok else 'FAIL'} {ksearch.traversal.value} "
                  f"K={K} N={N} {mod} {ch}: ml_mismatches={mism} "
                  f"ksd>sd={viol} trials={3 * args.trials}")
    return 1 if failed else 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    handler = {"sweep": cmd_sweep, "decode": cmd_decode, "selftest": cmd_selftest}
    return handler[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
