"""Command-line front end.

    delsarte analyze      --input cfg.json
    delsarte matrix       --preset section1 --coset 0
    delsarte operators    --preset section7 --format latex
    delsarte infinity     --preset section7
    delsarte verify       --preset section1 --order 40
    delsarte hypersurface --degree 6 --weights 1 2 3

Exit codes: 0 success, 1 verification failure, 2 invalid configuration,
3 arithmetic failure.  PF_THREADS > 1 verifies cosets in parallel.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import ConfigError, DelsarteError, NonIntegral, PoleInBracket, PoleInPochhammer
from .hyper import CancellationMismatch, entry_series, infinity_solutions, row_operator
from .hypersurface import Hypersurface, HypersurfaceFilter
from .lattice import ExponentConfig, LatticeData, build
from .reduction import Reducer, ode_latex, ode_to_dict
from .series import verify_fundamental

PRESETS = ("section1", "section7", "section11", "fermat2")
NORMALIZATION_NOTE = (
    "Entries use the normalization f = sum l_j x^(a_j) - l0 lam x^(a0). The monomial x^u of "
    "the hypersurface subspace matches its de Rham form only up to a scalar multiple, "
    "so constants may differ from other normalizations."
)


@dataclass
class RunConfig:
    command: str
    input: str | None
    order: int | None
    fmt: str
    out: str | None

    def truncation(self, lat: LatticeData) -> int:
        T = self.order if self.order is not None else 6 * lat.ell0 + 1
        if T < lat.ell0 + 1:
            raise ConfigError(f"--order must be at least l0 + 1 = {lat.ell0 + 1}, got {T}")
        return T


def preset_path(name: str):
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return resources.files("delsarte") / "presets" / f"{name}.json"


def _read_json(args) -> dict:
    if args.preset:
        src = preset_path(args.preset)
    elif args.input:
        src = Path(args.input)
    else:
        raise ConfigError("one of --input or --preset is required")
    try:
        return json.loads(src.read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"cannot read {src}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{src} is not valid JSON: {exc}") from exc


def _load_lattice(args) -> LatticeData:
    data = _read_json(args)
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    return build(ExponentConfig.from_dict(data))


def _cosets(lat: LatticeData, args) -> list[int]:
    if args.coset is None:
        return list(range(lat.N))
    if not 0 <= args.coset < lat.N:
        raise ConfigError(f"--coset must lie in 0..{lat.N - 1}")
    return [args.coset]


# ---------------------------------------------------------------------------
# commands: each returns (json report, latex text)
# ---------------------------------------------------------------------------

def cmd_analyze(lat: LatticeData, args) -> tuple[dict, str]:
    report = lat.to_dict()
    report["interior_count"] = sum(lat.is_interior(b) for b in lat.points)
    lines = [
        r"\ell = (%s),\quad \ell_0 = %d,\quad d = %d,\quad N = %d"
        % (", ".join(map(str, lat.ells)), lat.ell0, lat.d, lat.N),
        r"\begin{tabular}{rlc}",
        r"coset & points & $R_k$ \\ \hline",
    ]
    for k, block in enumerate(lat.cosets):
        pts = ", ".join(("(%s)" % ",".join(map(str, b))) + ("" if lat.is_interior(b) else "^*")
                        for b in block)
        lines.append(r"%d & $%s$ & %d \\" % (k, pts, lat.R[k]))
    lines.append(r"\end{tabular}")
    return report, "\n".join(lines)


def _matrix_latex(rows) -> str:
    body = " \\\\\n".join(" & ".join(s.latex() for s in row) for row in rows)
    return "\\begin{pmatrix}\n" + body + "\n\\end{pmatrix}"


def _solution_matrix(lat: LatticeData, block):
    return [[entry_series(lat, bi, bj).cancel() for bj in block] for bi in block]


def cmd_matrix(lat: LatticeData, args) -> tuple[dict, str]:
    out, tex = [], []
    for k in _cosets(lat, args):
        block = lat.cosets[k]
        rows = _solution_matrix(lat, block)
        out.append({
            "coset": k,
            "points": [list(b) for b in block],
            "entries": [[s.to_dict() for s in row] for row in rows],
        })
        tex.append("%% coset %d: %s\n%s" % (k, ", ".join(map(str, block)), _matrix_latex(rows)))
    return {"ell0": lat.ell0, "cosets": out, "note": NORMALIZATION_NOTE}, "\n\n".join(tex)


def _operator_entry(lat: LatticeData, b, reducer: Reducer | None) -> tuple[dict, str]:
    op = row_operator(lat, b)
    entry = {
        "point": list(b),
        "interior": lat.is_interior(b),
        "lambda_form": op.to_dict(),
        "x_form": op.x_form().to_dict(),
    }
    tex = r"%s:\quad %s \;\leftrightarrow\; %s" % (str(b), op.latex(), op.x_form().latex())
    if reducer is not None:
        ode = reducer.annihilator(b)
        entry["annihilator"] = ode_to_dict(ode)
        tex += "\n\\quad " + ode_latex(ode)
    return entry, tex


def cmd_operators(lat: LatticeData, args) -> tuple[dict, str]:
    reducer = Reducer(lat) if args.annihilators else None
    out, tex = [], []
    for k in _cosets(lat, args):
        rows = []
        for b in lat.cosets[k]:
            entry, t = _operator_entry(lat, b, reducer)
            rows.append(entry)
            tex.append(t)
        out.append({"coset": k, "R": lat.R[k], "rows": rows})
    return {"ell0": lat.ell0, "cosets": out}, "\n\n".join(tex)


def cmd_infinity(lat: LatticeData, args) -> tuple[dict, str]:
    seen: dict = {}
    for k in _cosets(lat, args):
        for b in lat.cosets[k]:
            seen.setdefault(row_operator(lat, b), []).append(list(b))
    out, tex, warnings = [], [], []
    for op, pts in seen.items():
        inf = infinity_solutions(op)
        entry = {"operator": op.to_dict(), "points": pts, **inf.to_dict()}
        out.append(entry)
        if inf.logarithmic:
            warnings.append(f"{op.text()}: {entry['note']}")
        sols = r",\quad ".join(s.latex() for s in inf.solutions) or r"\text{none}"
        tex.append(r"%s:\quad %s" % (op.latex(), sols))
    return {"operators": out, "warnings": warnings}, "\n\n".join(tex)


def _verify_worker(cfg: dict, ks: list[int], T: int) -> list[dict]:
    lat = build(ExponentConfig.from_dict(cfg))
    reducer = Reducer(lat)
    return [verify_fundamental(lat, k, T, reducer) for k in ks]


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("PF_THREADS", "1")))
    except ValueError:
        return 1


def cmd_verify(lat: LatticeData, args, T: int) -> tuple[dict, str]:
    ks = _cosets(lat, args)
    workers = min(_threads(), len(ks))
    if workers > 1:
        chunks = [ks[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_verify_worker, [lat.cfg.to_dict()] * workers, chunks,
                                  [T] * workers))
        reports = sorted((r for part in parts for r in part), key=lambda r: r["coset"])
    else:
        reducer = Reducer(lat)
        reports = [verify_fundamental(lat, k, T, reducer) for k in ks]
    ok = all(r["all_pass"] for r in reports)
    lines = [r"\begin{tabular}{rcc}", r"coset & checks & status \\ \hline"]
    for r in reports:
        lines.append(r"%d & %d & %s \\" % (r["coset"], len(r["checks"]),
                                           "pass" if r["all_pass"] else "fail"))
    lines.append(r"\end{tabular}")
    return {"T": T, "all_pass": ok, "cosets": reports}, "\n".join(lines)


def _hypersurface_filter(args) -> HypersurfaceFilter:
    if args.degree is not None or args.weights:
        if args.degree is None or not args.weights:
            raise ConfigError("--degree and --weights must be given together")
        return HypersurfaceFilter(args.degree, tuple(args.weights))
    data = _read_json(args)
    if "d" not in data or "weights" not in data:
        raise ConfigError("hypersurface input needs \"d\" and \"weights\"")
    return HypersurfaceFilter.from_dict(data)


def cmd_hypersurface(args) -> tuple[dict, str]:
    hs = Hypersurface(_hypersurface_filter(args))
    lat = hs.lat
    blocks, tex = [], []
    for blk in hs.blocks:
        rows = hs.solution_matrix(blk)
        ops = hs.operators(blk)
        conn = hs.connection_block(blk)
        blocks.append({
            **blk.to_dict(),
            "size": len(blk.points),
            "solution_matrix": [[s.to_dict() for s in row] for row in rows],
            "operators": [{"point": list(b), "lambda_form": op.to_dict(),
                           "x_form": op.x_form().to_dict()} for b, op in zip(blk.points, ops)],
            "connection": conn.to_dict(),
        })
        tex.append("%% block %s\n%s\n%s" % (
            ", ".join(map(str, blk.points)), _matrix_latex(rows),
            "\n".join(op.x_form().latex() for op in ops)))
    report = {
        "degree": hs.filter.degree,
        "weights": list(hs.filter.weights),
        "config": lat.cfg.to_dict(),
        "ell": list(lat.ells),
        "ell0": lat.ell0,
        "basis_size": len(hs.basis),
        "block_sizes": hs.block_sizes(),
        "blocks": blocks,
        "note": NORMALIZATION_NOTE,
    }
    return report, "\n\n".join(tex)


# ---------------------------------------------------------------------------
# plumbing
# ---------------------------------------------------------------------------

def _emit(report: dict, tex: str, args) -> None:
    text = json.dumps(report, indent=2, ensure_ascii=False)
    if args.out is None:
        if args.format in ("json", "both"):
            print(text)
        if args.format in ("latex", "both"):
            print(tex)
        return
    out = Path(args.out)
    if args.format == "json":
        out.write_text(text + "\n")
    elif args.format == "latex":
        out.write_text(tex + "\n")
    else:
        out.with_suffix(".json").write_text(text + "\n")
        out.with_suffix(".tex").write_text(tex + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="delsarte",
                                     description="Picard-Fuchs systems of Delsarte families.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_coset=True, with_order=False):
        p.add_argument("--input", help="JSON configuration file")
        p.add_argument("--preset", choices=PRESETS, help="use a shipped configuration")
        p.add_argument("--format", choices=("json", "latex", "both"), default="json")
        p.add_argument("--out", help="output path (both: .json and .tex siblings)")
        if with_coset:
            p.add_argument("--coset", type=int, help="restrict to one coset index")
        if with_order:
            p.add_argument("--order", type=int, help="truncation order T (default 6*l0+1)")
        return p

    common(sub.add_parser("analyze", help="weights, basis and coset table"), with_coset=False)
    common(sub.add_parser("matrix", help="solution matrices per coset"))
    ops = common(sub.add_parser("operators", help="row operators per basis point"))
    ops.add_argument("--annihilators", action="store_true",
                     help="also compute the minimal ODE of each basis monomial")
    common(sub.add_parser("infinity", help="series solutions at infinity"))
    common(sub.add_parser("verify", help="check dG = C G and the operators"), with_order=True)
    hs = common(sub.add_parser("hypersurface", help="blocks of a diagonal hypersurface"),
                with_coset=False)
    hs.add_argument("--degree", type=int)
    hs.add_argument("--weights", type=int, nargs="+")
    return parser


def run(args) -> int:
    if args.command == "hypersurface":
        report, tex = cmd_hypersurface(args)
        _emit(report, tex, args)
        return 0
    lat = _load_lattice(args)
    if args.command == "verify":
        T = RunConfig(args.command, args.input, args.order, args.format, args.out).truncation(lat)
        report, tex = cmd_verify(lat, args, T)
        _emit(report, tex, args)
        return 0 if report["all_pass"] else 1
    handler = {"analyze": cmd_analyze, "matrix": cmd_matrix,
               "operators": cmd_operators, "infinity": cmd_infinity}[args.command]
    report, tex = handler(lat, args)
    _emit(report, tex, args)
    for w in report.get("warnings", ()):
        print(f"warning: {w}", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NonIntegral, PoleInBracket, PoleInPochhammer, CancellationMismatch,
            ArithmeticError, ZeroDivisionError) as exc:
        print(f"arithmetic failure: {exc}", file=sys.stderr)
        return 3
    except DelsarteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
