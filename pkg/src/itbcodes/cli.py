"""Command-line entry point: construct, distance, search, simulate, fit, verify.

Exit codes: 0 ok, 1 usage, 2 validation failure, 3 budget exhausted before a
result could be certified.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import secrets
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from ._backend import BACKEND, default_threads
from .algebra import ParseError
from .catalog import code_from_record, load_code, load_record
from .code import CodeError, CssCode, code_from_strings, verify_css
from .decoder import DecoderConfig, DecoderError
from .distance import DistanceCertificate, DistanceError, DistancePolicy, certify_distance, validate_witness
from .linalg import write_alist, write_dense
from .montecarlo import (
    MonteCarloError,
    fit_scaling,
    parse_p_grid,
    per_round_rate,
    pseudothreshold_break_even,
    pseudothreshold_code_capacity,
    read_curve,
    run_code_capacity,
    write_points_csv,
)
from .search import SearchHit, SearchSpec, k6_divisibility_report, run_search, validate_hit

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID = 2
EXIT_INCONCLUSIVE = 3

log = logging.getLogger("itbcodes")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def config_hash(config: dict[str, Any]) -> str:
    return hashlib.sha256(json.dumps(config, sort_keys=True, default=str).encode()).hexdigest()[:16]


@dataclass
class RunManifest:
    argv: list[str]
    seed: int | None
    config: dict[str, Any]
    started: str = field(default_factory=_now)
    finished: str = ""
    inputs: dict[str, str] = field(default_factory=dict)
    outputs: dict[str, str] = field(default_factory=dict)

    def add_input(self, path: str | Path) -> None:
        if Path(path).is_file():
            self.inputs[str(path)] = _digest(path)

    def add_output(self, path: str | Path) -> None:
        self.outputs[str(path)] = _digest(path)

    def finish(self) -> "RunManifest":
        self.finished = _now()
        return self

    def to_dict(self) -> dict[str, Any]:
        return {
            "tool": "itbcodes",
            "version": __version__,
            "backend": BACKEND,
            "argv": self.argv,
            "seed": self.seed,
            "config_hash": config_hash(self.config),
            "config": self.config,
            "started": self.started,
            "finished": self.finished,
            "inputs": self.inputs,
            "outputs": self.outputs,
        }

    def write_beside(self, out: Path) -> Path:
        path = out.with_name(out.name + ".manifest.json")
        path.write_text(json.dumps(self.to_dict(), indent=2) + "\n")
        return path


def _emit_json(doc: dict[str, Any], out: str | None, manifest: RunManifest) -> None:
    """Print or write a JSON document with the manifest embedded."""
    if out:
        path = Path(out)
        doc["manifest"] = manifest.finish().to_dict()
        path.write_text(json.dumps(doc, indent=2) + "\n")
        manifest.add_output(path)
        manifest.write_beside(path)
    else:
        doc["manifest"] = manifest.finish().to_dict()
        print(json.dumps(doc, indent=2))


def _seed(args) -> int:
    return args.seed if args.seed is not None else secrets.randbits(63)


# --------------------------------------------------------------------------
# code selection shared by several commands


def _add_code_args(p: argparse.ArgumentParser, required: bool = False) -> None:
    g = p.add_argument_group("code")
    g.add_argument("--code", help="code record file or bundled name (e.g. 84_6_10, table1/84_6_10.json, bb72)")
    g.add_argument("--torus", help="cycle lengths, e.g. 2,3,7")
    g.add_argument("--a", help="polynomial A, e.g. 1+y2z4+xyz5")
    g.add_argument("--b", help="polynomial B")
    g.add_argument("--self-dual", action="store_true", help="set B = A^T")


def _code_from_args(args, manifest: RunManifest | None = None) -> CssCode:
    if args.code:
        if manifest is not None:
            manifest.add_input(args.code)
        return load_code(args.code)
    if not (args.torus and args.a):
        raise UsageError("give --code, or --torus with --a (and --b or --self-dual)")
    if args.self_dual and args.b:
        raise UsageError("--self-dual and --b are mutually exclusive")
    if not args.self_dual and not args.b:
        raise UsageError("--b is required unless --self-dual is given")
    return code_from_strings(args.torus, args.a, None if args.self_dual else args.b)


def _decoder_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("decoder")
    g.add_argument("--max-iter", type=int, default=50)
    g.add_argument("--ms-scaling", type=float, default=0.625)
    g.add_argument("--osd-order", type=int, default=10)
    g.add_argument("--osd-method", default="combination-sweep", choices=["zero", "combination-sweep"])
    g.add_argument("--osd-always", action="store_true", help="run OSD even when BP converges")


def _policy_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("distance policy")
    g.add_argument("--is-iterations", type=int, default=100_000)
    g.add_argument("--exhaustive-cap", type=int, default=None, help="highest weight swept exhaustively")
    g.add_argument("--node-limit", type=float, default=1e10)
    g.add_argument("--table-limit", type=float, default=2e7)


def _policy(args, seed: int) -> DistancePolicy:
    return DistancePolicy(
        is_iterations=args.is_iterations,
        exhaustive_cap=args.exhaustive_cap,
        node_limit=int(args.node_limit),
        table_limit=int(args.table_limit),
        seed=seed,
        threads=args.threads,
    )


# --------------------------------------------------------------------------
# commands


def cmd_construct(args) -> int:
    manifest = RunManifest(args.argv, None, {"command": "construct", **_code_config(args)})
    code = _code_from_args(args, manifest)
    report = verify_css(code)
    print(f"n={code.n} k={code.k} weight={code.stabilizer_weight} self_dual={str(code.self_dual).lower()}", file=sys.stderr)
    if args.emit_matrices:
        d = Path(args.emit_matrices)
        d.mkdir(parents=True, exist_ok=True)
        writer = write_alist if args.matrix_format == "alist" else write_dense
        for name, m in (("hx", code.hx), ("hz", code.hz)):
            path = d / f"{code.label}_{name}.{args.matrix_format}"
            writer(m, path)
            manifest.add_output(path)
    doc = {"code": code.to_record(), "verify": report.to_dict()}
    _emit_json(doc, args.out, manifest)
    return EXIT_OK if report.ok else EXIT_INVALID


def _code_config(args) -> dict[str, Any]:
    return {k: getattr(args, k, None) for k in ("code", "torus", "a", "b", "self_dual")}


def cmd_distance(args) -> int:
    seed = _seed(args)
    code = None
    manifest = RunManifest(args.argv, seed, {"command": "distance", **_code_config(args), **_policy_config(args)})
    code = _code_from_args(args, manifest)
    cert = certify_distance(code, _policy(args, seed))
    summary = cert.summary()
    print(summary, file=sys.stderr)
    _emit_json({"code": code.to_record(), "certificate": cert.to_dict(), "summary": summary}, args.out, manifest)
    return EXIT_OK if cert.exact else EXIT_INCONCLUSIVE


def _policy_config(args) -> dict[str, Any]:
    return {k: getattr(args, k) for k in ("is_iterations", "exhaustive_cap", "node_limit", "table_limit")}


def _checkpoint_path(args, spec: SearchSpec) -> Path | None:
    if args.checkpoint:
        return Path(args.checkpoint)
    root = os.environ.get("ITBCODES_CHECKPOINT_DIR")
    if not root:
        return None
    Path(root).mkdir(parents=True, exist_ok=True)
    tag = "x".join(map(str, spec.torus.dims))
    return Path(root) / f"search_{tag}_{config_hash(spec.to_dict())}.jsonl"


def cmd_search(args) -> int:
    from .algebra import Torus

    seed = _seed(args)
    pair_range = None
    if args.range:
        lo, _, hi = args.range.partition(":")
        pair_range = (int(lo), int(hi))
    spec = SearchSpec(
        torus=Torus.parse(args.torus),
        weight_a=args.wa,
        weight_b=args.wb,
        require_asymmetric=not args.allow_symmetric,
        normalize_identity=not args.full,
        min_k=args.min_k,
        min_d=args.min_d,
        triage_iterations=args.triage_iterations,
        certify=args.certify,
        policy=_policy(args, seed),
        seed=seed,
        pair_range=pair_range,
    )
    manifest = RunManifest(args.argv, seed, {"command": "search", **spec.to_dict(), **_policy_config(args)})
    ck = _checkpoint_path(args, spec)
    if ck is not None:
        manifest.add_input(ck)
    hits = run_search(spec, checkpoint=ck, progress=not args.quiet)
    lines = [json.dumps(h.to_dict()) for h in hits]
    if args.out:
        out = Path(args.out)
        out.write_text("".join(line + "\n" for line in lines))
        manifest.add_output(out)
        manifest.finish().write_beside(out)
    else:
        for line in lines:
            print(line)
    print(f"{len(hits)} hits", file=sys.stderr)
    if args.report:
        rep = k6_divisibility_report(hits)
        print(json.dumps(rep, indent=2), file=sys.stderr)
    return EXIT_OK


def cmd_simulate(args) -> int:
    seed = _seed(args)
    cfg = DecoderConfig(
        max_iter=args.max_iter,
        ms_scaling=args.ms_scaling,
        osd_order=args.osd_order,
        osd_method=args.osd_method,
        osd_always=args.osd_always,
    )
    ps = parse_p_grid(args.p_grid)
    manifest = RunManifest(
        args.argv,
        seed,
        {"command": "simulate", **_code_config(args), "decoder": cfg.to_dict(), "p_grid": ps,
         "shots": args.shots, "target_width": args.target_width},
    )
    code = _code_from_args(args, manifest)
    points = []
    for i, p in enumerate(ps):
        pt = run_code_capacity(
            code, p, args.shots, cfg, seed, point_index=i, target_width=args.target_width,
            min_shots=min(args.min_shots, args.shots), threads=args.threads,
        )
        log.info("p=%.4g shots=%d failures=%d rate=%.4g", pt.p, pt.shots, pt.failures, pt.rate)
        points.append(pt)
    try:
        p0 = pseudothreshold_code_capacity(points).to_dict()
    except MonteCarloError:
        p0 = None
    out = Path(args.out) if args.out else None
    if out is not None and out.suffix == ".csv":
        write_points_csv(points, out)
        manifest.add_output(out)
        manifest.finish().write_beside(out)
        if p0:
            print(f"p0 = {p0['p0']:.4g} [{p0['low']:.4g}, {p0['high']:.4g}]", file=sys.stderr)
        return EXIT_OK
    doc = {"points": [pt.to_dict() for pt in points], "decoder": cfg.to_dict(), "pseudothreshold": p0}
    _emit_json(doc, args.out, manifest)
    return EXIT_OK


def cmd_fit(args) -> int:
    manifest = RunManifest(args.argv, None, {"command": "fit", "d": args.d, "k": args.k, "p_min": args.p_min, "rounds": args.rounds})
    manifest.add_input(args.input)
    pts = read_curve(args.input)
    if args.rounds:
        pts = [(p, per_round_rate(q, args.rounds)) for p, q in pts]
    fit = fit_scaling(pts, args.d, args.p_min)
    try:
        p0 = pseudothreshold_break_even(fit, args.k)
    except MonteCarloError as exc:
        print(f"break-even: {exc}", file=sys.stderr)
        p0 = None
    evals = {f"{p:g}": fit.evaluate(p) for p in args.eval}
    if p0 is not None:
        print(f"p0 = {100 * p0:.3f}%", file=sys.stderr)
    for key, val in evals.items():
        print(f"p_L({key}) = {val:.3g}", file=sys.stderr)
    _emit_json({"fit": fit.to_dict(), "k": args.k, "p0": p0, "evaluations": evals}, args.out, manifest)
    return EXIT_OK if p0 is not None else EXIT_INCONCLUSIVE


def cmd_verify(args) -> int:
    ok = True
    manifest = RunManifest(args.argv, None, {"command": "verify", **_code_config(args)})
    doc: dict[str, Any] = {}
    if args.hits:
        manifest.add_input(args.hits)
        bad = 0
        total = 0
        with open(args.hits) as fh:
            for line in fh:
                if line.strip():
                    total += 1
                    bad += not validate_hit(SearchHit.from_dict(json.loads(line)))
        doc["hits"] = {"total": total, "invalid": bad}
        ok &= bad == 0
    if args.code or args.torus:
        code = _code_from_args(args, manifest)
        report = verify_css(code)
        doc["code"] = code.to_record()
        doc["verify"] = report.to_dict()
        ok &= report.ok
        if args.code:
            rec = load_record(args.code)
            if "certificate" in rec:
                cert = DistanceCertificate.from_dict(rec["certificate"], code.n)
                good = all(
                    b.witness is None or validate_witness(code, s, b.witness, b.upper)
                    for s, b in (("X", cert.x), ("Z", cert.z))
                )
                doc["certificate_ok"] = good
                ok &= good
    if args.certificate:
        manifest.add_input(args.certificate)
        with open(args.certificate) as fh:
            data = json.load(fh)
        code = code_from_record(data["code"])
        cert = DistanceCertificate.from_dict(data["certificate"], code.n)
        good = all(
            b.witness is None or validate_witness(code, s, b.witness, b.upper)
            for s, b in (("X", cert.x), ("Z", cert.z))
        )
        doc["certificate_ok"] = good
        ok &= good
    if not doc:
        raise UsageError("nothing to verify: give a code, --certificate or --hits")
    doc["ok"] = ok
    _emit_json(doc, args.out, manifest)
    return EXIT_OK if ok else EXIT_INVALID


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="itbcodes", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"itbcodes {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("construct", help="build a code and check it")
    _add_code_args(p)
    p.add_argument("--emit-matrices", metavar="DIR", help="write H_X and H_Z to DIR")
    p.add_argument("--matrix-format", choices=["alist", "dense"], default="alist")
    p.add_argument("--out", help="JSON output file (default: stdout)")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("distance", help="bound or certify the distance")
    _add_code_args(p)
    _policy_args(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("search", help="enumerate polynomial pairs on a torus")
    p.add_argument("--torus", required=True)
    p.add_argument("--wa", type=int, default=3)
    p.add_argument("--wb", type=int, default=3)
    p.add_argument("--min-k", type=int, default=1)
    p.add_argument("--min-d", type=int, default=4)
    p.add_argument("--allow-symmetric", action="store_true", help="keep pairs with B a translate of A^T")
    p.add_argument("--full", action="store_true", help="enumerate without fixing the identity term")
    p.add_argument("--triage-iterations", type=int, default=1000)
    p.add_argument("--certify", choices=["front", "all", "none"], default="front")
    p.add_argument("--range", metavar="LO:HI", help="restrict to pair indices [LO, HI)")
    p.add_argument("--checkpoint", help="JSON-lines checkpoint (default under $ITBCODES_CHECKPOINT_DIR)")
    p.add_argument("--report", action="store_true", help="print the k = 6 divisibility report")
    p.add_argument("--quiet", action="store_true")
    _policy_args(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", help="JSON-lines output (default: stdout)")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("simulate", help="code-capacity Monte Carlo")
    _add_code_args(p)
    _decoder_args(p)
    p.add_argument("--p-grid", required=True, help="LO:HI:logN, LO:HI:N or a comma list")
    p.add_argument("--shots", type=int, default=100_000, help="maximum shots per point")
    p.add_argument("--min-shots", type=int, default=1000)
    p.add_argument("--target-width", type=float, default=None, help="stop when Wilson width / rate drops below this")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", help="CSV (by suffix) or JSON output")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit p_L = p^(d/2) exp(c0 + c1 p + c2 p^2) and solve break-even")
    p.add_argument("--in", dest="input", required=True, help="CSV with p and p_L (or shots/failures) columns")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--p-min", type=float, default=2e-3)
    p.add_argument("--rounds", type=int, default=None, help="convert P_any to a per-round rate over N_c rounds")
    p.add_argument("--eval", type=float, nargs="*", default=[1e-3, 1e-4])
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("verify", help="re-check a code, a distance certificate or a hits file")
    _add_code_args(p)
    p.add_argument("--certificate", help="JSON written by 'distance --out'")
    p.add_argument("--hits", help="JSON-lines written by 'search --out'")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # --help, --version and usage errors
        return int(exc.code or 0)
    args.argv = argv
    logging.basicConfig(
        level=logging.INFO if args.verbose or args.command in ("search", "simulate") else logging.WARNING,
        format="%(message)s",
        stream=sys.stderr,
    )
    if getattr(args, "threads", None) is None and hasattr(args, "threads"):
        args.threads = default_threads()
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"itbcodes {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, CodeError, DistanceError, DecoderError, MonteCarloError, ValueError, KeyError) as exc:
        print(f"itbcodes {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except FileNotFoundError as exc:
        print(f"itbcodes {args.command}: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
