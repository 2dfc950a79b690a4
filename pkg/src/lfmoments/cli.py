"""Command-line front end.

Every subcommand writes one JSON object or CSV rows.  Reports carry the
coefficient limit, quadrature step and build identifier; the thread count is
written to a ``<path>.meta.json`` sidecar so that report files stay
byte-identical across thread counts.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import subprocess
import sys
from pathlib import Path

import numpy as np

THREADS_ENV = "LFMOMENTS_THREADS"
DEFAULT_LIMIT = 200_000
DEFAULT_STEP = 1.0 / 16


class ConfigError(ValueError):
    """Invalid command-line configuration."""


@dataclasses.dataclass(frozen=True)
class RunConfig:
    subcommand: str
    q: int | None = None
    q_list: tuple[int, ...] = ()
    t: float = 0.0
    s1: complex | None = None
    s2: complex | None = None
    a: int = 1
    b: int = 1
    k: float = 1.0
    limit: int = DEFAULT_LIMIT
    step: float = DEFAULT_STEP
    threads: int = 1
    out: str = "json"
    path: str = "-"
    fast_weights: bool = False
    interpretation: str = "log"
    normalization: str = "rankin_selberg"
    extra: dict = dataclasses.field(default_factory=dict)

    def validate(self) -> None:
        from .moments import INTERPRETATIONS, validate_modulus, validate_twist
        from .special import NORMALIZATIONS

        if self.limit < 1:
            raise ConfigError("--limit must be positive")
        if not 0 < self.step <= 1:
            raise ConfigError("--step must lie in (0, 1]")
        if self.threads < 1:
            raise ConfigError("--threads must be at least 1")
        if self.out not in ("json", "csv"):
            raise ConfigError("--out must be json or csv")
        if self.interpretation not in INTERPRETATIONS:
            raise ConfigError(f"--interpretation must be one of {INTERPRETATIONS}")
        if self.normalization not in NORMALIZATIONS:
            raise ConfigError(f"--normalization must be one of {NORMALIZATIONS}")
        if self.subcommand in ("moment-compare", "kmoment", "mollify", "lvalue"):
            validate_modulus(self.q)
        if self.subcommand == "chars" and self.q < 1:
            raise ConfigError("--q must be positive")
        if self.subcommand == "moment-compare":
            validate_twist(self.q, self.a, self.b)
        if self.subcommand == "moment-scan":
            if not self.q_list:
                raise ConfigError("--q-list must name at least one modulus")
            if any(q < 1 for q in self.q_list):
                raise ConfigError("--q-list entries must be positive")
        if self.subcommand in ("kmoment", "mollify") and self.k < 0:
            raise ConfigError("--k must be non-negative")
        if self.subcommand == "mollify":
            if self.q < 16:
                raise ConfigError("mollify needs q >= 16")
            if self.k <= 0:
                raise ConfigError("mollify needs k > 0")


def build_id() -> str:
    """Short git commit of the source tree, or "unknown"."""
    try:
        out = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return out.stdout.strip() if out.returncode == 0 and out.stdout.strip() else "unknown"


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def to_plain(obj):
    """Dataclasses, numpy scalars and complex numbers to JSON-ready values."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    return obj


def dumps(obj, indent: int = 0) -> str:
    """JSON text with stable key order and floats at 17 significant digits."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(k)}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + dumps(v, indent + 1) for v in obj) + "\n" + pad + "]"
    if isinstance(obj, float):
        return _fmt_float(obj)
    return json.dumps(obj)


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (complex, np.complexfloating)):
        return f"{_fmt_float(value.real)}{'+' if value.imag >= 0 or math.isnan(value.imag) else '-'}{_fmt_float(abs(value.imag))}j"
    if isinstance(value, (float, np.floating)):
        return _fmt_float(float(value))
    return str(value)


def rows_to_csv(fields: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        writer.writerow([_csv_cell(row.get(f)) for f in fields])
    return buf.getvalue()


def _provenance(cfg: RunConfig) -> dict:
    return {"coefficient_limit": cfg.limit, "quadrature_step": cfg.step, "build": build_id()}


def _coeffs(cfg: RunConfig):
    from .hecke import delta_coefficients

    return delta_coefficients(cfg.limit)


def _row(record) -> dict:
    if dataclasses.is_dataclass(record):
        return {f.name: getattr(record, f.name) for f in dataclasses.fields(record)}
    return dict(record)


def _single(cfg: RunConfig, kind: str, payload) -> tuple[str, str]:
    if cfg.out == "json":
        obj = {"kind": kind, "provenance": _provenance(cfg), "report": to_plain(payload)}
        return dumps(obj) + "\n", "json"
    rows = [_row(r) for r in (payload if isinstance(payload, list) else [payload])]
    prov = _provenance(cfg)
    fields = (list(rows[0]) if rows else []) + list(prov)
    return rows_to_csv(fields, [{**r, **prov} for r in rows]), "csv"


def cmd_coeffs(cfg: RunConfig):
    table = _coeffs(cfg)
    count = min(cfg.extra.get("count") or table.limit, table.limit)
    rows = [{"n": n, "raw": int(table.raw[n]), "lam": float(table.lam[n])} for n in range(1, count + 1)]
    if cfg.out == "csv":
        return _single(cfg, "coeffs", rows)
    return _single(cfg, "coeffs", {"kappa": table.kappa, "limit": table.limit, "coefficients": rows})


def cmd_chars(cfg: RunConfig):
    from .dirichlet import build_group, gauss_root_data

    group = build_group(cfg.q)
    rows = []
    for chi in group.characters:
        row = {
            "index": chi.index,
            "exponents": " ".join(map(str, chi.exponent_vector)),
            "conductor": chi.conductor,
            "parity": chi.parity,
            "primitive": chi.is_primitive,
            "gauss_sum": None,
            "root_number": None,
        }
        if chi.is_primitive:
            data = gauss_root_data(chi, 12)
            row["gauss_sum"], row["root_number"] = data.gauss_sum, data.root_number
        rows.append(row)
    return _single(cfg, "chars", rows)


def _s_pair(cfg: RunConfig) -> tuple[complex, complex]:
    s1 = cfg.s1 if cfg.s1 is not None else complex(0.5, cfg.t)
    s2 = cfg.s2 if cfg.s2 is not None else s1.conjugate()
    return s1, s2


def cmd_lvalue(cfg: RunConfig):
    from .afe import l_value
    from .dirichlet import build_group

    group = build_group(cfg.q)
    index = cfg.extra.get("index")
    if index is None:
        index = group.primitive_index[0]
    if not 0 <= index < len(group.characters) or not group.characters[index].is_primitive:
        raise ConfigError(f"character {index} mod {cfg.q} is not primitive")
    s, _ = _s_pair(cfg)
    res = l_value(s, group.characters[index], cfg.extra.get("balance", 1.0), _coeffs(cfg), step=cfg.step, threads=cfg.threads)
    return _single(cfg, "lvalue", res)


def cmd_weights(cfg: RunConfig):
    from .afe import WeightEvaluator

    xs = np.geomspace(cfg.extra["xmin"], cfg.extra["xmax"], cfg.extra["points"])
    if cfg.extra.get("kind") == "pair":
        ev = WeightEvaluator.pair(*_s_pair(cfg), quadrature_step=cfg.step)
    else:
        ev = WeightEvaluator.single(cfg.t, quadrature_step=cfg.step)
    vals, cert = ev(xs)
    rows = [{"x": float(x), "value": complex(v), "certificate": cert} for x, v in zip(xs, vals)]
    return _single(cfg, "weights", rows)


def cmd_moment_compare(cfg: RunConfig):
    from .moments import MainTermEvaluator, MomentTask, moment_compare

    s1, s2 = _s_pair(cfg)
    task = MomentTask(cfg.q, cfg.a, cfg.b, s1, s2)
    coeffs = _coeffs(cfg)
    rep = moment_compare(
        task,
        coeffs,
        MainTermEvaluator(coeffs, cfg.normalization),
        interpretation=cfg.interpretation,
        step=cfg.step,
        threads=cfg.threads,
        fast_weights=cfg.fast_weights,
    )
    return _single(cfg, "moment-compare", rep)


def cmd_moment_scan(cfg: RunConfig):
    from .moments import MainTermEvaluator, MomentReport, moment_scan

    coeffs = _coeffs(cfg)
    entries = moment_scan(
        cfg.q_list,
        cfg.t,
        cfg.a,
        cfg.b,
        coeffs,
        MainTermEvaluator(coeffs, cfg.normalization),
        interpretation=cfg.interpretation,
        threads=cfg.threads,
        fast_weights=cfg.fast_weights,
    )
    fields = [f.name for f in dataclasses.fields(MomentReport)]
    rows = []
    for e in entries:
        row = {f: getattr(e.report, f) for f in fields} if e.report else {"q": e.q, "a": cfg.a, "b": cfg.b}
        row["status"] = e.status
        rows.append(row)
    if cfg.out == "json":
        return _single(cfg, "moment-scan", rows)
    prov = _provenance(cfg)
    for r in rows:
        r.update(prov)
    return rows_to_csv(fields + list(prov), rows), "csv"


def cmd_kmoment(cfg: RunConfig):
    from .dirichlet import build_group
    from .moments import kth_moment_sum

    group = build_group(cfg.q)
    # k = 0 only counts characters and never touches the coefficients
    coeffs = _coeffs(cfg) if cfg.k != 0 else None
    res = kth_moment_sum(cfg.q, cfg.t, cfg.k, group, coeffs, threads=cfg.threads, fast_weights=cfg.fast_weights)
    return _single(cfg, "kmoment", res)


def cmd_mollify(cfg: RunConfig):
    from .dirichlet import build_group
    from .mollifier import build_spec, desk_max_prime, mollified_first_moment, mollified_second_moment_terms

    N, M = cfg.extra.get("N", 1), cfg.extra.get("M", 1)
    max_prime = cfg.extra.get("max_prime") or desk_max_prime(cfg.q, N, M)
    coeffs = _coeffs(cfg)
    group = build_group(cfg.q)
    spec = build_spec(cfg.q, N, M, cfg.k, coeffs, max_prime=max_prime)
    first = mollified_first_moment(cfg.q, cfg.t, cfg.k, spec, group, coeffs, threads=cfg.threads)
    payload = {
        "lengths": list(spec.lengths),
        "blocks": [list(b) for b in spec.blocks],
        "max_prime": float(max_prime),
        "c_k": spec.c_k,
        "r_k": spec.r_k,
        "first_moment": first,
    }
    v = cfg.extra.get("v")
    if v is not None:
        payload["second_moment_terms"] = mollified_second_moment_terms(
            cfg.q, cfg.t, cfg.k, v, spec, group, coeffs, threads=cfg.threads
        )
    if cfg.out == "csv":
        return _single(cfg, "mollify", first)
    return _single(cfg, "mollify", payload)


COMMANDS = {
    "coeffs": cmd_coeffs,
    "chars": cmd_chars,
    "lvalue": cmd_lvalue,
    "weights": cmd_weights,
    "moment-compare": cmd_moment_compare,
    "moment-scan": cmd_moment_scan,
    "kmoment": cmd_kmoment,
    "mollify": cmd_mollify,
}


def _default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV}={raw!r} is not an integer") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lfmoments", description="Twisted modular L-values and their moments.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--limit", type=int, default=DEFAULT_LIMIT, help="coefficient table size")
    common.add_argument("--step", type=float, default=DEFAULT_STEP, help="quadrature step")
    common.add_argument("--threads", type=int, default=None, help=f"worker threads (default ${THREADS_ENV} or 1)")
    common.add_argument("--out", choices=("json", "csv"), default="json", help="output format")
    common.add_argument("--path", default="-", help="output file ('-' for stdout)")
    common.add_argument("--fast-weights", action="store_true", help="interpolate weights on a geometric grid")
    common.add_argument("--interpretation", default="log", help="derivative reading in the diagonal limit")
    common.add_argument("--normalization", default="rankin_selberg", help="degree-two factor convention")

    sub = parser.add_subparsers(dest="subcommand", required=True)
    p = sub.add_parser("coeffs", parents=[common], help="dump the coefficient table")
    p.add_argument("--count", type=int, default=None, help="number of coefficients to write")

    p = sub.add_parser("chars", parents=[common], help="characters, conductors and Gauss sums")
    p.add_argument("--q", type=int, required=True)

    p = sub.add_parser("lvalue", parents=[common], help="one L-value with certificates")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--index", type=int, default=None, help="character index (default: first primitive)")
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--s", type=complex, default=None, help="s as a Python complex literal, e.g. 2.5+1j")
    p.add_argument("--balance", type=float, default=1.0)

    p = sub.add_parser("weights", parents=[common], help="tabulate the smoothing weights")
    p.add_argument("--kind", choices=("single", "pair"), default="single")
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--s1", type=complex, default=None)
    p.add_argument("--s2", type=complex, default=None)
    p.add_argument("--xmin", type=float, default=1e-3)
    p.add_argument("--xmax", type=float, default=1e2)
    p.add_argument("--points", type=int, default=21)

    helps = {
        "moment-compare": "twisted second moment against its main term at one modulus",
        "moment-scan": "the same comparison over a list of moduli, one row per q",
    }
    for name in ("moment-compare", "moment-scan"):
        p = sub.add_parser(name, parents=[common], help=helps[name])
        if name == "moment-compare":
            p.add_argument("--q", type=int, required=True)
            p.add_argument("--s1", type=complex, default=None)
            p.add_argument("--s2", type=complex, default=None)
        else:
            p.add_argument("--q-list", required=True, help="comma-separated moduli")
        p.add_argument("--t", type=float, default=0.0)
        p.add_argument("--a", type=int, default=1)
        p.add_argument("--b", type=int, default=1)

    p = sub.add_parser("kmoment", parents=[common], help="sum of |L(1/2+it)|^{2k} over primitive characters")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--t", type=float, default=0.0)

    p = sub.add_parser("mollify", parents=[common], help="mollified first moment and its prediction")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--k", type=float, default=0.5)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--N", type=int, default=1)
    p.add_argument("--M", type=int, default=1)
    p.add_argument("--max-prime", type=float, default=None, help="block cutoff (default q^{2/l_1})")
    p.add_argument("--v", type=int, default=None, help="also report second-moment terms at this v")
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    threads = ns.threads if ns.threads is not None else _default_threads()
    extra = {}
    for key in ("count", "index", "balance", "kind", "xmin", "xmax", "points", "N", "M", "max_prime", "v"):
        if hasattr(ns, key):
            extra[key] = getattr(ns, key)
    if ns.subcommand == "weights" and (ns.points < 1 or not 0 < ns.xmin <= ns.xmax):
        raise ConfigError("weights needs 0 < xmin <= xmax and points >= 1")
    q_list = ()
    if getattr(ns, "q_list", None):
        try:
            q_list = tuple(int(v) for v in ns.q_list.split(",") if v.strip())
        except ValueError:
            raise ConfigError(f"--q-list must be comma-separated integers, got {ns.q_list!r}") from None
    s1 = getattr(ns, "s1", None)
    if getattr(ns, "s", None) is not None:
        s1 = ns.s
    return RunConfig(
        subcommand=ns.subcommand,
        q=getattr(ns, "q", None),
        q_list=q_list,
        t=getattr(ns, "t", 0.0),
        s1=s1,
        s2=getattr(ns, "s2", None),
        a=getattr(ns, "a", 1),
        b=getattr(ns, "b", 1),
        k=getattr(ns, "k", 1.0),
        limit=ns.limit,
        step=ns.step,
        threads=threads,
        out=ns.out,
        path=ns.path,
        fast_weights=ns.fast_weights,
        interpretation=ns.interpretation,
        normalization=ns.normalization,
        extra=extra,
    )


def run(cfg: RunConfig) -> int:
    """Validate, compute and emit; returns the process exit status."""
    cfg.validate()
    text, _ = COMMANDS[cfg.subcommand](cfg)
    if cfg.path == "-":
        sys.stdout.write(text)
    else:
        Path(cfg.path).write_text(text)
        meta = {"subcommand": cfg.subcommand, "thread_count": cfg.threads, **_provenance(cfg)}
        Path(cfg.path + ".meta.json").write_text(dumps(to_plain(meta)) + "\n")
    return 0


def main(argv=None) -> int:
    from .moments import TaskError

    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        return run(config_from_args(ns))
    except (ConfigError, TaskError) as exc:
        print(f"lfmoments {ns.subcommand}: {exc}", file=sys.stderr)
        return 2
