"""Command-line front end.

Every subcommand writes its outputs into ``--out`` (default ``./out``) plus a
``manifest.json`` describing the run.  Numeric inputs are exact rationals
(``3/10``); outputs carry both the exact fraction and a 17-digit decimal.

Exit codes: 0 success, 2 invalid parameters, 3 budget exceeded,
4 certification failure, 5 construction failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import time
from fractions import Fraction
from importlib import metadata
from pathlib import Path
from typing import Callable, Sequence

from .errors import BudgetExceeded, CertificationFailed, ConstructionFailed, InvalidParameter, LabError
from .numerics import RatInterval, decimal_str, frac_str, to_scalar

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_BUDGET = 3
EXIT_CERT = 4
EXIT_CONSTRUCT = 5


# ---------------------------------------------------------------------------
# outputs and manifest
# ---------------------------------------------------------------------------


class RunManifest:
    """Record of one run: command, resolved configuration and output hashes."""

    def __init__(self, command: str, config: dict, out_dir: Path) -> None:
        self.command = command
        self.config = config
        self.out_dir = out_dir
        self.artifacts: dict[str, str] = {}
        self.started = time.perf_counter()
        self.exit_code: int | None = None

    def write_text(self, name: str, text: str) -> Path:
        path = self.out_dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        data = text.encode("utf-8")
        path.write_bytes(data)
        self.artifacts[name] = hashlib.sha256(data).hexdigest()
        return path

    def write_json(self, name: str, obj) -> Path:
        return self.write_text(name, json.dumps(obj, sort_keys=True, indent=1) + "\n")

    def write_csv(self, name: str, header: Sequence[str], rows: Sequence[Sequence]) -> Path:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return self.write_text(name, buf.getvalue())

    def to_json_obj(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "artifacts": dict(sorted(self.artifacts.items())),
            "tool_version": tool_version(),
            "wall_time_s": round(time.perf_counter() - self.started, 3),
            "exit_code": self.exit_code,
        }

    def finish(self, code: int) -> int:
        self.exit_code = code
        path = self.out_dir / "manifest.json"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_json_obj(), sort_keys=True, indent=1) + "\n", encoding="utf-8")
        return code


def tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def dual(x: Fraction) -> dict:
    return {"exact": frac_str(x), "decimal": decimal_str(x)}


# ---------------------------------------------------------------------------
# config file: "key = value" lines, '#' comments; keys mirror long flags
# ---------------------------------------------------------------------------


def load_config(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidParameter(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParameter(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out


def _apply_config(sub: argparse.ArgumentParser, cfg: dict[str, str]) -> None:
    known = {}
    for a in sub._actions:
        known[a.dest] = a
        for opt in a.option_strings:
            known[opt.lstrip("-").replace("-", "_")] = a
    defaults = {}
    for key, value in cfg.items():
        if key not in known or key in ("help", "config"):
            raise InvalidParameter(f"unknown config key {key!r} for this command")
        action = known[key]
        key = action.dest
        if isinstance(action, argparse._StoreTrueAction):
            defaults[key] = value.lower() in ("1", "true", "yes", "on")
        elif action.type is not None:
            defaults[key] = action.type(value)
        else:
            defaults[key] = value
    sub.set_defaults(**defaults)


# ---------------------------------------------------------------------------
# argument types
# ---------------------------------------------------------------------------


def rational(s: str) -> Fraction:
    try:
        return to_scalar(s)
    except InvalidParameter as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _param_pair(lam: Fraction, t: Fraction):
    from .symbolic_ifs import ParamPair

    return ParamPair(lam, t)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_delta(args, run: RunManifest) -> int:
    from .separation import log_over_n, min_gap
    from .symbolic_ifs import format_word3

    p = _param_pair(args.lam, args.t)
    rows = []
    summary_rows = []
    for n in range(args.n_min, args.n_max + 1):
        g = min_gap(p, n)
        flag = "EXACT_OVERLAP" if g.delta == 0 else ""
        lg = log_over_n(g.delta, n)
        rows.append([n, frac_str(g.delta), decimal_str(g.delta), repr(lg), flag,
                     format_word3(g.pair[0]), format_word3(g.pair[1])])
        summary_rows.append({"n": n, "delta_n": dual(g.delta), "log_delta_over_n": None if g.delta == 0 else lg,
                             "flag": flag, "pair": [format_word3(w) for w in g.pair], "method": g.method})
    run.write_csv("delta.csv", ["n", "delta_n", "delta_n_decimal", "log_delta_over_n", "flag", "word_i", "word_j"],
                  rows)
    first = next((r for r in summary_rows if r["flag"]), None)
    run.write_json("delta.json", {
        "lambda": dual(p.lam),
        "t": dual(p.t),
        "rows": summary_rows,
        "exact_overlap": first is not None,
        "first_overlap_level": first["n"] if first else None,
    })
    for r in rows:
        print(f"n={r[0]:>3}  delta={r[2]:<24} {r[4]}")
    return EXIT_OK


def cmd_lambda_gamma(args, run: RunManifest) -> int:
    from .separation import lambda_gamma

    p = _param_pair(args.lam, args.t)
    gamma = p.lam if args.gamma is None else args.gamma
    rows = []
    for n in range(1, args.n + 1):
        rows.append([n, repr(lambda_gamma(p, n, gamma))])
    run.write_csv("lambda_gamma.csv", ["n", "lambda_n"], rows)
    run.write_json("lambda_gamma.json", {"lambda": dual(p.lam), "t": dual(p.t), "gamma": dual(gamma),
                                         "values": {str(r[0]): float(r[1]) for r in rows}})
    print(f"Lambda_{args.n}(gamma={frac_str(gamma)}) = {rows[-1][1]}")
    return EXIT_OK


def _verify_projhull_demo(eps0: Fraction) -> tuple[bool, dict]:
    from .projection_geometry import HullPoint, hull_projection_interval, projected_cylinder_interval
    from .symbolic_ifs import format_word_j, word_j

    lam = Fraction(3, 10)
    iv = hull_projection_interval(HullPoint(Fraction(3, 10), Fraction(1)), lam, 2)
    k = word_j("0 1,1 1,0 -1")
    rep = projected_cylinder_interval(k, lam, depth=2)
    ok = rep.ok and iv == RatInterval(Fraction(6, 35), Fraction(3, 7))
    return ok, {
        "claim": "projected hull interval of a scaled copy above the x-axis",
        "example": {"a": "3/10", "b": "1", "lambda": "3/10", "n": 2, "interval": iv.to_strs()},
        "cylinder": {
            "word": format_word_j(k),
            "lambda": frac_str(lam),
            "center": dual(rep.center),
            "interval": rep.hull_interval.to_strs(),
            "length": dual(rep.length),
            "length_bounds": [dual(rep.length_lower), dual(rep.length_upper)],
            "child_unions_checked": rep.chain_checked,
            "covering": rep.covering.to_json_obj(),
        },
        "status": "PROVED" if ok else "FAILED",
    }


def _verify_indproj(eps0: Fraction) -> tuple[bool, dict]:
    from .projection_geometry import check_covering, projint_box

    dom = RatInterval(Fraction(1, 4) + eps0, Fraction(1, 3) - eps0)
    cert = check_covering(projint_box, dom, 3, uniform=True)
    return cert.proved, cert.to_json_obj()


def _verify_projint(eps0: Fraction) -> tuple[bool, dict]:
    from .projection_geometry import verify_projint_numeric

    cert = verify_projint_numeric()
    return cert.proved, cert.to_json_obj()


def _verify_trans(eps0: Fraction) -> tuple[bool, dict]:
    from .transversality import certify_transversality

    dom = RatInterval(Fraction(1, 4) + eps0, Fraction(1, 3) - eps0)
    try:
        cert = certify_transversality(dom)
    except CertificationFailed as exc:
        return False, {"status": "FAILED", "reason": str(exc)}
    obj = cert.to_json_obj()
    obj["lower_decimal"] = decimal_str(cert.lower)
    obj["upper_decimal"] = decimal_str(cert.upper)
    obj["status"] = "PROVED"
    return True, obj


_VERIFIERS: dict[str, Callable[[Fraction], tuple[bool, dict]]] = {
    "projhull-demo": _verify_projhull_demo,
    "indproj": _verify_indproj,
    "projint": _verify_projint,
    "trans": _verify_trans,
}


def cmd_verify(args, run: RunManifest) -> int:
    if not (0 < args.eps0 < Fraction(1, 24)):
        raise InvalidParameter("eps0 must lie in (0, 1/24)")
    names = list(_VERIFIERS) if args.which == "all" else [args.which]
    all_ok = True
    bundle = {}
    for name in names:
        ok, obj = _VERIFIERS[name](args.eps0)
        obj["eps0"] = frac_str(args.eps0)
        bundle[name] = obj
        run.write_json(f"verify_{name}.json", obj)
        print(f"{name}: {'PROVED' if ok else 'FAILED'}")
        all_ok &= ok
    if len(names) > 1:
        run.write_json("verify_all.json", {"status": "PROVED" if all_ok else "FAILED",
                                           "certificates": sorted(bundle)})
    return EXIT_OK if all_ok else EXIT_CERT


def cmd_construct(args, run: RunManifest) -> int:
    from .construction import construct, parse_eta

    eta = parse_eta(args.eta, args.rho)
    try:
        tree, bundles = construct(eta, args.depth, args.cert_n, max_word_len=args.max_word_len)
    except (BudgetExceeded, ConstructionFailed) as exc:
        partial = getattr(exc, "partial_tree", None)
        if partial is not None:
            run.write_json("tree.json", partial.to_json_obj())
        run.write_json("failure.json", {"error": type(exc).__name__, "message": str(exc),
                                        "partial_tree": partial is not None})
        raise
    run.write_json("tree.json", tree.to_json_obj())
    rows = []
    for b in bundles:
        run.write_json(f"bundle_{b.omega_prefix}.json", b.to_json_obj())
        for r in b.table:
            rows.append([b.omega_prefix, r["n"], r["delta_n"]["exact"], r["delta_n"]["decimal"],
                         r["eta_prime_n"]["exact"], r["eta_prime_n"]["decimal"], r["ok"]])
    if rows:
        run.write_csv("tables.csv", ["omega", "n", "delta_n", "delta_n_decimal", "eta_prime_n",
                                     "eta_prime_n_decimal", "ok"], rows)
    ok = tree.ok and all(b.ok for b in bundles)
    print(f"tree: {len(tree.nodes)} nodes, depth {args.depth}, K = {tree.K}, ok = {tree.ok}")
    for b in bundles:
        print(f"bundle {b.omega_prefix}: ok = {b.ok}")
    return EXIT_OK if ok else EXIT_CONSTRUCT


def cmd_dimension(args, run: RunManifest) -> int:
    from .dimension import dim_estimate, enumerate_atoms, entropy, scale_index

    p = _param_pair(args.lam, args.t)
    rep = dim_estimate(p, args.n, args.q, args.mode)
    run.write_json("dimension.json", rep.to_json_obj())
    rows = []
    for n in range(0, args.n + 1):
        r = scale_index(p, n)
        h = 0.0 if r == 0 or n == 0 else entropy(enumerate_atoms(p, r), n)
        rows.append([n, r, repr(h), repr(h / (n * math.log(2))) if n else "0.0"])
    run.write_csv("entropy_vs_scale.csv", ["n", "r_n", "entropy_nats", "entropy_over_n_log2"], rows)
    print(f"dim_S = {rep.dim_similarity:.6f}  entropy route = {rep.dim_entropy:.6f}  "
          f"combined = {rep.dim_combined:.6f}")
    return EXIT_OK


def planar_points(lam: Fraction, depth: int) -> list[tuple[Fraction, Fraction]]:
    """S_w(0,0) for every word of the given length over the seven-letter alphabet."""
    from .symbolic_ifs import J_ALPHABET

    pts = [(Fraction(0), Fraction(0))]
    for _ in range(depth):
        pts = [(i + lam * x, j + lam * y) for (i, j) in J_ALPHABET for (x, y) in pts]
    return pts


def cmd_plotdata(args, run: RunManifest) -> int:
    from .projection_geometry import ADMISSIBLE_3_PREFIXES, CHILD_ORDER, HullPoint, hull_projection_interval, hull_vertices
    from .symbolic_ifs import J_ALPHABET, format_word_j, s_orbit_point

    if args.depth < 0:
        raise InvalidParameter("depth must be nonnegative")
    if 7**args.depth > 7**8:
        raise BudgetExceeded(f"depth {args.depth} would emit 7^{args.depth} points (cap 7^8)")
    lam = args.lam
    pts = planar_points(lam, args.depth)
    run.write_csv("points.csv", ["x", "y"], [[float(x), float(y)] for x, y in pts])
    verts = hull_vertices(lam)
    run.write_csv("fixed_points.csv", ["i", "j", "x_exact", "y_exact"],
                  [[i, j, frac_str(i / (1 - lam)), frac_str(j / (1 - lam))] for i, j in J_ALPHABET])
    run.write_csv("hull_vertices.csv", ["x_exact", "y_exact", "x", "y"],
                  [[frac_str(x), frac_str(y), float(x), float(y)] for x, y in verts])
    rows = []
    if Fraction(1, 4) < lam < Fraction(1, 3):
        for prefix in ADMISSIBLE_3_PREFIXES:
            for c in CHILD_ORDER:
                w = prefix + (c,)
                a, b = s_orbit_point(w, lam)
                iv = hull_projection_interval(HullPoint(a, b), lam, len(w))
                rows.append([format_word_j(w), frac_str(a / b), frac_str(iv.lo), frac_str(iv.hi),
                             float(iv.lo), float(iv.hi)])
    run.write_csv("projection_intervals.csv", ["word", "center", "lo_exact", "hi_exact", "lo", "hi"], rows)
    print(f"{len(pts)} points, {len(verts)} hull vertices, {len(rows)} intervals")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--out", default="out", help="output directory")
    sp.add_argument("--config", help="key = value file; explicit flags override it")
    sp.add_argument("--threads", type=int, default=1, help="worker bound (recorded; computation is sequential)")


def _pair_args(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--lambda", dest="lam", type=rational, help="contraction ratio, e.g. 3/10")
    sp.add_argument("--t", type=rational, help="translation, e.g. 1/5")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="condensation-lab", description=__doc__.splitlines()[0])
    subs = ap.add_subparsers(dest="command", required=True)

    sp = subs.add_parser("delta", help="table of the minimal level-n gap")
    _pair_args(sp)
    sp.add_argument("--n-min", type=int, default=1)
    sp.add_argument("--n-max", type=int, default=8)
    _common(sp)
    sp.set_defaults(func=cmd_delta, needs_pair=True)

    sp = subs.add_parser("lambda-gamma", help="averaged logarithmic neighbour counts")
    _pair_args(sp)
    sp.add_argument("--n", type=int, default=8)
    sp.add_argument("--gamma", type=rational, default=None, help="closeness base; defaults to lambda")
    _common(sp)
    sp.set_defaults(func=cmd_lambda_gamma, needs_pair=True)

    sp = subs.add_parser("verify", help="run an inequality certification")
    sp.add_argument("which", choices=[*_VERIFIERS, "all"])
    sp.add_argument("--eps0", type=rational, default=Fraction(1, 10**9))
    _common(sp)
    sp.set_defaults(func=cmd_verify, needs_pair=False)

    sp = subs.add_parser("construct", help="build the nested-interval tree and parameter bundles")
    sp.add_argument("--eta", default="nsq", help="nsq, nn, nlogn or table:PATH")
    sp.add_argument("--rho", type=rational, default=None, help="declared ratio bound for a table")
    sp.add_argument("--depth", type=int, default=2)
    sp.add_argument("--cert-n", type=int, default=12)
    sp.add_argument("--max-word-len", type=int, default=4000)
    _common(sp)
    sp.set_defaults(func=cmd_construct, needs_pair=False)

    sp = subs.add_parser("dimension", help="entropy and neighbour-count dimension estimates")
    _pair_args(sp)
    sp.add_argument("--n", type=int, default=8)
    sp.add_argument("--q", type=int, default=2)
    sp.add_argument("--mode", choices=["proof", "statement"], default="proof")
    _common(sp)
    sp.set_defaults(func=cmd_dimension, needs_pair=True)

    sp = subs.add_parser("plotdata", help="point clouds, hull vertices and projected intervals")
    sp.add_argument("--lambda", dest="lam", type=rational, default=Fraction(3, 10))
    sp.add_argument("--depth", type=int, default=4)
    _common(sp)
    sp.set_defaults(func=cmd_plotdata, needs_pair=False)
    return ap


def _subparser(ap: argparse.ArgumentParser, name: str) -> argparse.ArgumentParser:
    for action in ap._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)


def _snapshot(ns: argparse.Namespace) -> dict:
    out = {}
    for k, v in sorted(vars(ns).items()):
        if k in ("func", "needs_pair"):
            continue
        out[k] = frac_str(v) if isinstance(v, Fraction) else v
    return out


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        pre, _ = ap.parse_known_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        if pre.config:
            _apply_config(_subparser(ap, pre.command), load_config(pre.config))
        args = ap.parse_args(argv)
    except InvalidParameter as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    run = RunManifest(args.command, _snapshot(args), Path(args.out))
    try:
        if args.needs_pair:
            if args.lam is None or args.t is None:
                raise InvalidParameter("--lambda and --t are required")
            if not (0 < args.lam < Fraction(1, 3)):
                raise InvalidParameter(f"lambda must lie in (0, 1/3), got {frac_str(args.lam)}")
        if args.threads < 1:
            raise InvalidParameter("--threads must be at least 1")
        code = args.func(args, run)
    except InvalidParameter as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_INVALID
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        code = EXIT_BUDGET
    except CertificationFailed as exc:
        print(f"certification failed: {exc}", file=sys.stderr)
        code = EXIT_CERT
    except ConstructionFailed as exc:
        print(f"construction failed: {exc}", file=sys.stderr)
        code = EXIT_CONSTRUCT
    except LabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_INVALID
    return run.finish(code)


if __name__ == "__main__":
    sys.exit(main())
