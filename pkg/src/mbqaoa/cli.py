"""``mbqaoa`` command line: solve, spectrum, estimate, verify, pattern.

Exit codes
----------
0  success
2  input error (bad flags, malformed graph, unsupported request)
3  I/O error (missing or unwritable file)
4  size guard (instance too large to simulate or enumerate)
5  verification failure

Every file written with ``--out PATH`` is accompanied by
``PATH.manifest.json`` recording the command, its configuration, the seed,
package versions and input hashes.  The manifest timestamp comes from
``SOURCE_DATE_EPOCH`` when set.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import scipy

from mbqaoa import __version__, kernels
from mbqaoa.graph import Graph, GraphFormatError, InstanceTooLarge, complete_graph, parse_graph
from mbqaoa.hamiltonian import EncodingParams, build_penalized_target, build_target, spectrum
from mbqaoa.pattern import COST_CALIBRATION, MIXER_CALIBRATION, assemble_pattern, export_pattern, pattern_stats
from mbqaoa.qaoa import OptimizerConfig, frequency_weighted_cut, optimize
from mbqaoa.resources import crossover, sweep, sweep_csv
from mbqaoa.verify import SELECTORS, run_checks

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_IO = 3
EXIT_SIZE = 4
EXIT_VERIFY = 5

log = logging.getLogger("mbqaoa")


class InputError(ValueError):
    pass


@dataclass
class RunManifest:
    command: str
    config: dict
    seed: int | None
    versions: dict
    inputs: dict = field(default_factory=dict)
    timestamp: str = ""

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = datetime.fromtimestamp(int(epoch), timezone.utc) if epoch else datetime.now(timezone.utc)
    return when.strftime("%Y-%m-%dT%H:%M:%SZ")


def _versions() -> dict:
    return {"mbqaoa": __version__, "numpy": np.__version__, "scipy": scipy.__version__, "kernels": kernels.BACKEND}


def _load_graph(args) -> tuple[Graph, dict]:
    if args.graph and args.complete is not None:
        raise InputError("give either --graph or --complete, not both")
    if args.complete is not None:
        if args.complete < 1:
            raise InputError("--complete needs at least one vertex")
        return complete_graph(args.complete), {}
    if not args.graph:
        raise InputError("an instance is required (--graph FILE or --complete N)")
    raw = Path(args.graph).read_bytes()
    g = parse_graph(raw.decode("utf-8"))
    if g.has_negative_weights():
        log.warning("graph has negative edge weights; the cut objective is no longer monotone in crossings")
    return g, {args.graph: hashlib.sha256(raw).hexdigest()}


def _emit(args, text: str, inputs: dict) -> None:
    """Write ``text`` to ``--out`` (plus manifest) or stdout."""
    if not args.out:
        sys.stdout.write(text)
        return
    out = Path(args.out)
    out.write_text(text)
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out")}
    manifest = RunManifest(args.command, config, getattr(args, "seed", None), _versions(), inputs, _timestamp())
    Path(f"{out}.manifest.json").write_text(manifest.to_json())


def _check_K(K: int) -> None:
    if K < 2:
        raise InputError("--K must be at least 2")


def cmd_solve(args) -> int:
    g, inputs = _load_graph(args)
    _check_K(args.K)
    enc = EncodingParams(args.K, g.vertex_count)
    backend = "mbqc" if args.backend == "mbqc" else "reference"
    if args.penalty and backend == "mbqc" and not enc.is_power_of_two:
        log.warning("no pattern exists for the penalty term; using the reference backend")
        backend = "reference"
    cfg = OptimizerConfig(
        method="grid" if args.optimizer == "grid" else "nelder-mead",
        p=args.p,
        restarts=args.restarts,
        max_evals=args.max_evals,
        seed=args.seed,
        use_penalty=args.penalty,
        backend=backend,
        grid_points=args.grid_points,
        shots=args.shots,
    )
    res = optimize(g, args.K, cfg)
    text = res.history_csv() if args.format == "csv" else res.to_json()
    _emit(args, text, inputs)
    mean, se = frequency_weighted_cut(res.sampled, g)
    summary = [
        f"instance: |V|={g.vertex_count} |E|={g.edge_count} K={args.K} p={args.p} backend={backend}",
        f"best <H>: {res.best_expectation:.6f} after {len(res.history)} evaluations",
        f"mean sampled cut: {mean:.4f} +/- {se:.4f}",
    ]
    if res.best_assignment is not None:
        summary.append(f"best sampled cut: {res.best_sampled_value:g} with {'-'.join(map(str, res.best_assignment))}")
    else:
        summary.append("best sampled cut: none (every sample used a surplus label)")
    if res.optimum is not None:
        summary.append(f"optimum: {res.optimum:g}, approximation ratio {res.approximation_ratio}")
    print("\n".join(summary), file=sys.stderr if not args.out else sys.stdout)
    return EXIT_OK


def cmd_spectrum(args) -> int:
    g, inputs = _load_graph(args)
    _check_K(args.K)
    enc = EncodingParams(args.K, g.vertex_count)
    h = build_penalized_target(g, enc) if args.penalty else build_target(g, enc)
    report = spectrum(h, enc)
    _emit(args, report.to_csv(), inputs)
    return EXIT_OK


def _parse_range(text: str, powers: bool = False) -> list[int]:
    """``a``, ``a,b,c`` or ``start:stop[:step]`` (inclusive); ``powers`` steps by doubling."""
    try:
        if ":" in text:
            parts = [int(x) for x in text.split(":")]
            if len(parts) not in (2, 3):
                raise ValueError
            start, stop = parts[0], parts[1]
            step = parts[2] if len(parts) == 3 else (2 if powers else 1)
            values = []
            v = start
            while v <= stop:
                values.append(v)
                v = v * step if powers else v + step
                if step <= (1 if powers else 0):
                    raise ValueError
            return values
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"bad range {text!r}") from None


def cmd_estimate(args) -> int:
    if args.K is None and args.V is None:
        # the two standard sweeps: K=2 over |V|, and |V|=100 over K
        rows = sweep([2], range(4, 201)) + sweep([1 << m for m in range(1, 17)], [100])
    else:
        Ks = _parse_range(args.K or "2", powers=True)
        Vs = _parse_range(args.V or "100")
        if not Ks or not Vs:
            raise InputError("empty range")
        rows = sweep(Ks, Vs, args.edges)
    if args.format == "json":
        text = json.dumps(rows, indent=2) + "\n"
    else:
        text = sweep_csv(rows)
    _emit(args, text, {})
    if args.out:
        lit, fp = crossover(source="closed-form"), crossover(source="counts")
        print(f"{len(rows)} rows; emc-m-optimised asymptotic crossover K={lit} (closed form), K={fp} (gate counts)")
    return EXIT_OK


def cmd_verify(args) -> int:
    selectors = args.check or list(SELECTORS)
    results = run_checks(
        selectors,
        cases=args.cases,
        seed=args.seed,
        cost_calibration=args.cost_calibration,
        mixer_calibration=args.mixer_calibration,
    )
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


def cmd_pattern(args) -> int:
    g, inputs = _load_graph(args)
    _check_K(args.K)
    enc = EncodingParams(args.K, g.vertex_count)
    if args.penalty and not enc.is_power_of_two:
        raise InputError(
            f"K={args.K} needs the penalty term, which has no measurement pattern; "
            "use K=2^m or run `solve --penalty` on the reference backend"
        )
    if args.format not in ("json", "dot"):
        raise InputError("pattern export supports --format json or dot")
    pat = assemble_pattern(g, args.K, args.p)
    _emit(args, export_pattern(pat, args.format), inputs)
    stats = pattern_stats(pat)
    print(json.dumps(stats, sort_keys=True), file=sys.stderr if not args.out else sys.stdout)
    return EXIT_OK


def _instance_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--graph", help="edge-list file ('p N' header, 'u v [w]' lines)")
    p.add_argument("--complete", type=int, metavar="N", help="use the unweighted complete graph on N vertices")
    p.add_argument("--K", type=int, default=2, help="number of classes")
    p.add_argument("--penalty", action="store_true", help="add the surplus-label penalty (K not a power of two)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mbqaoa", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="optimise QAOA angles and sample cuts")
    _instance_flags(s)
    s.add_argument("--p", type=int, default=1, help="number of QAOA layers")
    s.add_argument("--optimizer", choices=("grid", "nm"), default="nm")
    s.add_argument("--grid-points", type=int, default=32)
    s.add_argument("--max-evals", type=int, default=2000)
    s.add_argument("--restarts", type=int, default=1)
    s.add_argument("--shots", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--backend", choices=("mbqc", "ref"), default="ref")
    s.add_argument("--format", choices=("json", "csv"), default="json")
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("spectrum", help="levels of the cost Hamiltonian as CSV")
    _instance_flags(s)
    s.add_argument("--format", choices=("csv",), default="csv")
    s.add_argument("--out")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("estimate", help="cluster-size comparison table")
    s.add_argument("--K", help="K values: 4, 2,4,8 or 2:65536 (doubling)")
    s.add_argument("--V", help="vertex counts: 100, 4,8 or 4:200[:step]")
    s.add_argument("--edges", type=int, help="fixed edge count instead of the complete graph")
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--out")
    s.set_defaults(func=cmd_estimate)

    s = sub.add_parser("verify", help="run the self-check suite")
    s.add_argument("--check", action="append", choices=SELECTORS, help="run only this check (repeatable)")
    s.add_argument("--cases", type=int, default=40, help="random cases for the oracle check")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--cost-calibration", type=float, default=COST_CALIBRATION, help=argparse.SUPPRESS)
    s.add_argument("--mixer-calibration", type=float, default=MIXER_CALIBRATION, help=argparse.SUPPRESS)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("pattern", help="export the measurement pattern")
    _instance_flags(s)
    s.add_argument("--p", type=int, default=1)
    s.add_argument("--format", choices=("json", "dot", "csv"), default="json")
    s.add_argument("--out")
    s.set_defaults(func=cmd_pattern)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except InstanceTooLarge as exc:
        log.error("%s", exc)
        return EXIT_SIZE
    except (GraphFormatError, InputError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
