"""Scenario runner: sweep kt, compute the three entanglement curves, detect
events, and emit CSV/JSON.

For a chosen initial-state family the runner computes, on a kt grid, the
cavity-cavity and reservoir-reservoir negativities (closed forms) and the
four-qubit monotone (witness SDP per point, worker pool), then locates
sudden-death/birth times (analytic formulas and independent bisection), the
monotone peak, and any plateau: a maximal stretch inside the doubly
unentangled window on which the monotone stays within ``plateau_tol`` of
its mean.

Exit codes: 0 success, 2 configuration error, 3 too many solver failures
(more than 5% of grid points).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from dataclasses import dataclass
from multiprocessing import get_context

from . import __version__
from .channel import KT_MAX
from .families import (FamilySpec, SeparableInitialStateError, numeric_event_times,
                       parse_family)
from .negativity import xstate_negativity
from .channel import cavity_reduced, reservoir_reduced
from .qstate import QUBIT_ORDER, Bipartition
from .sdp import SdpSettings
from .witness import GME_ZERO_TOL, gme_point

CSV_HEADER = "kt,e_cc,e_rr,e_gme,status"
# Curves treat closed-form negativities at or below this as exactly zero.
CURVE_ZERO = 1e-9


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    family: str
    kt_max: float = 4.0
    points: int = 161
    gap_tol: float = 1e-8
    feas_tol: float = 1e-8
    plateau_tol: float = 2e-3
    # Shortest kt span that counts as a plateau: single-peaked monotone
    # curves are flat to ~1e-3 over ~0.3 around their maximum, and a genuine
    # plateau runs well past 0.5, so 0.45 separates the two regimes.
    plateau_min_len: float = 0.45
    out_dir: str = "."
    include_joint_raw: bool = False
    cuts_subset: str | None = None
    workers: int | None = None

    def __post_init__(self):
        if self.points < 2:
            raise ConfigError("points must be at least 2")
        if not 0.0 < self.kt_max <= KT_MAX:
            raise ConfigError(f"kt_max must lie in (0, {KT_MAX}]")

    def spec(self) -> FamilySpec:
        return parse_family(self.family)

    def grid(self) -> list[float]:
        return [self.kt_max * i / (self.points - 1) for i in range(self.points)]

    def settings(self) -> SdpSettings:
        return SdpSettings(gap_tol=self.gap_tol, feas_tol=self.feas_tol)

    def cuts(self) -> list[Bipartition] | None:
        if self.cuts_subset is None:
            return None
        return parse_cuts(self.cuts_subset)


@dataclass(frozen=True)
class TraceRow:
    kt: float
    e_cc: float
    e_rr: float
    e_gme: float      # clamped at GME_ZERO_TOL, NaN on solver failure
    raw_gme: float    # raw -optimum, kept for audit
    status: str


@dataclass(frozen=True)
class Plateau:
    start_kt: float
    end_kt: float
    level: float
    variation: float


@dataclass(frozen=True)
class Events:
    t_esd_analytic: float | None
    t_esb_analytic: float | None
    t_esd_numeric: float | None
    t_esb_numeric: float | None
    gme_peak_kt: float
    gme_peak_value: float
    plateau: Plateau | None


@dataclass(frozen=True)
class EntanglementTrace:
    config: RunConfig
    rows: list[TraceRow]
    events: Events

    def failed_fraction(self) -> float:
        bad = sum(1 for r in self.rows if math.isnan(r.e_gme))
        return bad / len(self.rows)


def parse_cuts(text: str) -> list[Bipartition]:
    """Debug cut subsets like 'C1,C1C2' (side of the split by qubit labels)."""
    label_index = {label: i for i, label in enumerate(QUBIT_ORDER)}
    cuts = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        members = set()
        while chunk:
            for label, idx in label_index.items():
                if chunk.startswith(label):
                    members.add(idx)
                    chunk = chunk[len(label):]
                    break
            else:
                raise ConfigError(f"unparseable cut component {chunk!r}")
        if not members:
            raise ConfigError("empty cut in cuts subset")
        cuts.append(Bipartition(len(QUBIT_ORDER), frozenset(members)))
    if len(set(cuts)) != len(cuts):
        raise ConfigError("duplicate cuts in cuts subset")
    return cuts


def _gme_worker(args) -> tuple[float, float, float, str]:
    family_text, kt, gap_tol, feas_tol, cuts_text = args
    spec = parse_family(family_text)
    cuts = parse_cuts(cuts_text) if cuts_text else None
    settings = SdpSettings(gap_tol=gap_tol, feas_tol=feas_tol)
    return gme_point(spec, kt, cuts, settings)


def _compute_gme_rows(config: RunConfig, grid: list[float]):
    tasks = [(config.family, kt, config.gap_tol, config.feas_tol,
              config.cuts_subset) for kt in grid]
    workers = config.workers
    if workers is None:
        workers = min(os.cpu_count() or 1, 8)
    if workers <= 1 or len(grid) < 4:
        return [_gme_worker(t) for t in tasks]
    # Spawned children inherit the current environment; keep their BLAS
    # single-threaded so the pool scales.
    os.environ.setdefault("OMP_NUM_THREADS", "1")
    os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
    ctx = get_context("spawn")
    with ctx.Pool(processes=workers) as pool:
        return pool.map(_gme_worker, tasks, chunksize=1)


def detect_plateau(rows: list[TraceRow], tol: float, min_len: float) -> Plateau | None:
    """Largest window inside the doubly-unentangled zone where the monotone
    varies (max - min) by at most ``tol``; None if no qualifying window
    spans at least ``min_len`` in kt."""
    runs = []
    current = []
    for i, r in enumerate(rows):
        if r.e_cc <= CURVE_ZERO and r.e_rr <= CURVE_ZERO and not math.isnan(r.e_gme):
            current.append(i)
        else:
            if current:
                runs.append(current)
            current = []
    if current:
        runs.append(current)
    best: Plateau | None = None
    for run in runs:
        n = len(run)
        for a in range(n):
            for b in range(n - 1, a - 1, -1):
                ia, ib = run[a], run[b]
                if rows[ib].kt - rows[ia].kt < min_len:
                    break
                window = [rows[i].e_gme for i in range(ia, ib + 1)]
                variation = max(window) - min(window)
                if variation <= tol:
                    span = rows[ib].kt - rows[ia].kt
                    if best is None or span > best.end_kt - best.start_kt:
                        best = Plateau(start_kt=rows[ia].kt, end_kt=rows[ib].kt,
                                       level=sum(window) / len(window),
                                       variation=variation)
                    break
    return best


def run(config: RunConfig) -> EntanglementTrace:
    spec = config.spec()  # raises for malformed family text
    x = spec.build()
    grid = config.grid()
    gme_rows = _compute_gme_rows(config, grid)
    rows = []
    for kt, (kt_echo, value, raw, status) in zip(grid, gme_rows):
        rows.append(TraceRow(
            kt=kt,
            e_cc=xstate_negativity(cavity_reduced(x, kt)),
            e_rr=xstate_negativity(reservoir_reduced(x, kt)),
            e_gme=value,
            raw_gme=raw,
            status=status,
        ))

    if spec.initially_entangled():
        analytic = spec.event_times()
        numeric = numeric_event_times(spec)
    else:
        analytic = numeric = None
    finite = [r for r in rows if not math.isnan(r.e_gme)]
    if not finite:
        raise RuntimeError("every grid point failed to solve")
    peak = max(finite, key=lambda r: r.e_gme)
    events = Events(
        t_esd_analytic=analytic.t_esd if analytic else None,
        t_esb_analytic=analytic.t_esb if analytic else None,
        t_esd_numeric=numeric.t_esd if numeric else None,
        t_esb_numeric=numeric.t_esb if numeric else None,
        gme_peak_kt=peak.kt,
        gme_peak_value=peak.e_gme,
        plateau=detect_plateau(rows, config.plateau_tol, config.plateau_min_len),
    )
    return EntanglementTrace(config=config, rows=rows, events=events)


def _fmt(v: float) -> str:
    return f"{v:.9f}"


def emit_csv(trace: EntanglementTrace, path: str):
    lines = [CSV_HEADER]
    for r in trace.rows:
        lines.append(",".join([
            _fmt(r.kt), _fmt(r.e_cc), _fmt(r.e_rr),
            "nan" if math.isnan(r.e_gme) else _fmt(r.e_gme),
            r.status,
        ]))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _maybe_joint_states(trace: EntanglementTrace):
    from .channel import evolve_joint
    spec = trace.config.spec()
    x = spec.build()
    states = []
    for r in trace.rows:
        m = evolve_joint(x, r.kt).matrix
        states.append({"re": m.real.tolist(), "im": m.imag.tolist()})
    return states


def emit_json(trace: EntanglementTrace, path: str):
    payload = {
        "config": dataclasses.asdict(trace.config),
        "solver_settings": dataclasses.asdict(trace.config.settings()),
        "rows": [dataclasses.asdict(r) for r in trace.rows],
        "events": dataclasses.asdict(trace.events),
        "version": __version__,
    }
    if trace.config.include_joint_raw:
        payload["joint_states"] = _maybe_joint_states(trace)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def load_trace_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _read_config_file(path: str) -> dict:
    values: dict[str, str] = {}
    try:
        with open(path) as fh:
            for line_no, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{line_no}: expected key=value")
                key, value = line.split("=", 1)
                values[key.strip()] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}")
    return values


_FIELD_TYPES = {
    "family": str, "kt_max": float, "points": int, "gap_tol": float,
    "feas_tol": float, "plateau_tol": float, "plateau_min_len": float,
    "out_dir": str, "include_joint_raw": bool, "cuts_subset": str,
    "workers": int,
}


def build_config(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if args.config:
        for key, raw in _read_config_file(args.config).items():
            if key not in _FIELD_TYPES:
                raise ConfigError(f"unknown config key {key!r}")
            typ = _FIELD_TYPES[key]
            if typ is bool:
                values[key] = raw.lower() in ("1", "true", "yes")
            else:
                values[key] = typ(raw)
    overrides = {
        "family": args.family, "kt_max": args.kt_max, "points": args.points,
        "gap_tol": args.gap_tol, "feas_tol": args.feas_tol,
        "plateau_tol": args.plateau_tol, "plateau_min_len": args.plateau_min_len,
        "out_dir": args.out, "include_joint_raw": args.include_joint_raw or None,
        "cuts_subset": args.cuts, "workers": args.workers,
    }
    for key, val in overrides.items():
        if val is not None:
            values[key] = val
    if "family" not in values:
        raise ConfigError("a family must be given (--family or config file)")
    try:
        return RunConfig(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc))


def _cmd_run(args) -> int:
    try:
        config = build_config(args)
        spec = config.spec()
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    trace = run(config)
    os.makedirs(config.out_dir, exist_ok=True)
    stem = spec.text().replace(":", "_").replace("=", "_")
    csv_path = os.path.join(config.out_dir, f"{stem}.csv")
    json_path = os.path.join(config.out_dir, f"{stem}.json")
    emit_csv(trace, csv_path)
    emit_json(trace, json_path)
    ev = trace.events
    print(f"family {config.family}: {len(trace.rows)} points up to kt={config.kt_max}")
    print(f"  t_esd analytic={_opt_fmt(ev.t_esd_analytic)} "
          f"numeric={_opt_fmt(ev.t_esd_numeric)}")
    print(f"  t_esb analytic={_opt_fmt(ev.t_esb_analytic)} "
          f"numeric={_opt_fmt(ev.t_esb_numeric)}")
    print(f"  gme peak {ev.gme_peak_value:.6f} at kt={ev.gme_peak_kt:.4f}")
    if ev.plateau:
        p = ev.plateau
        print(f"  plateau [{p.start_kt:.3f}, {p.end_kt:.3f}] level={p.level:.6f} "
              f"variation={p.variation:.2e}")
    else:
        print("  no plateau detected")
    print(f"  wrote {csv_path} and {json_path}")
    frac = trace.failed_fraction()
    if frac > 0.05:
        print(f"error: {frac:.0%} of grid points failed to solve", file=sys.stderr)
        return 3
    return 0


def _opt_fmt(v: float | None) -> str:
    return "none" if v is None else f"{v:.6f}"


def _cmd_events(args) -> int:
    try:
        spec = parse_family(args.family)
        times = spec.event_times()
    except SeparableInitialStateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"family {args.family}")
    print(f"  t_esd = {_opt_fmt(times.t_esd)}"
          + ("  (asymptotic decay, no finite-time death)" if times.t_esd is None else ""))
    print(f"  t_esb = {_opt_fmt(times.t_esb)}"
          + ("  (reservoirs entangle immediately)" if times.t_esb == 0 else ""))
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gmedyn",
        description="Cavity-reservoir entanglement dynamics and the "
                    "genuine-multipartite-entanglement monotone.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="sweep kt and write CSV/JSON traces")
    p_run.add_argument("--family", help="e.g. pure:alpha2=0.1, werner:p=0.45")
    p_run.add_argument("--kt-max", dest="kt_max", type=float, default=None)
    p_run.add_argument("--points", type=int, default=None)
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--gap-tol", dest="gap_tol", type=float, default=None)
    p_run.add_argument("--feas-tol", dest="feas_tol", type=float, default=None)
    p_run.add_argument("--plateau-tol", dest="plateau_tol", type=float, default=None)
    p_run.add_argument("--plateau-min-len", dest="plateau_min_len", type=float,
                       default=None)
    p_run.add_argument("--cuts", default=None,
                       help="debug: restrict to a cut subset, e.g. 'C1,C1C2'")
    p_run.add_argument("--workers", type=int, default=None)
    p_run.add_argument("--include-joint-raw", action="store_true",
                       help="embed the evolved 16x16 states in the JSON")
    p_run.add_argument("--config", default=None, help="key=value config file")
    p_run.set_defaults(func=_cmd_run)

    p_ev = sub.add_parser("events", help="print analytic event times only")
    p_ev.add_argument("--family", required=True)
    p_ev.set_defaults(func=_cmd_events)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
