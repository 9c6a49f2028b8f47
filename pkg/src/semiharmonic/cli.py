"""Batch experiment runner.

    python -m semiharmonic --config configs/decay_n.toml --out results/

A config file is TOML holding one experiment at top level or a list of
``[[experiment]]`` tables.  Each experiment has a ``kind``, a
``[semigroup]`` table and, where needed, a ``[measure]`` table; the
remaining keys are per-kind parameters.  See ``configs/`` for one
example per kind.

Exit codes: 0 all assertions pass, 1 an assertion failed (the failing
row is printed), 2 configuration error, 3 support overflow.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

import tomli

from . import central, harmonic, reiter, semigroup as sg, semigroupoid as sgd
from .errors import (
    CapExceeded,
    InvalidElement,
    MalformedTable,
    NotProbability,
    SupportOverflow,
    WellDefinednessError,
)
from .measure import Measure, decay_profile
from .serialize import (
    decay_csv,
    fraction_pair,
    system_to_dict,
    to_json,
    write_atomic,
)

KINDS = ("decay", "harmonic", "reiter-mix", "cesaro", "central-series", "quotient",
         "semigroupoid")
EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_OVERFLOW = 0, 1, 2, 3


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    kind: str
    semigroup: dict
    measure: dict | None = None
    horizon: int = 10
    ball_radius: int | None = None
    tolerance: str | None = None
    output: str | None = None
    mode: str = "exact"
    element: object = None
    params: dict = field(default_factory=dict)
    base_dir: str = "."

    @classmethod
    def from_dict(cls, data: dict, base_dir: str = ".", index: int = 0) -> "ExperimentConfig":
        data = dict(data)
        try:
            kind = data.pop("kind")
            sgspec = data.pop("semigroup")
        except KeyError as exc:
            raise ConfigError(f"experiment {index}: missing key {exc}") from None
        if kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {kind!r}; expected one of {KINDS}")
        mode = data.pop("mode", "exact")
        if mode not in ("exact", "float"):
            raise ConfigError(f"unknown mode {mode!r}")
        known = {k: data.pop(k) for k in ("horizon", "ball_radius", "tolerance", "output",
                                           "element", "measure") if k in data}
        cfg = cls(name=str(data.pop("name", f"{kind}-{index}")), kind=kind,
                  semigroup=dict(sgspec), mode=mode, params=data, base_dir=base_dir, **known)
        cfg.validate()
        return cfg

    def validate(self):
        if not isinstance(self.horizon, int) or self.horizon < 1:
            raise ConfigError(f"{self.name}: horizon must be a positive integer")
        if self.ball_radius is not None and (not isinstance(self.ball_radius, int)
                                             or self.ball_radius < 0):
            raise ConfigError(f"{self.name}: ball_radius must be a nonnegative integer")
        if self.tolerance is not None:
            try:
                Fraction(str(self.tolerance))
            except ValueError:
                raise ConfigError(f"{self.name}: bad tolerance {self.tolerance!r}") from None
        S = build_semigroup(self.semigroup, self.base_dir)
        if self.measure is not None:
            mu = build_measure(S, self.measure)
            if self.ball_radius is not None and not S.finite:
                B = sg.ball(S, self.ball_radius)
                outside = [a for a in mu.support if a not in B]
                if outside:
                    raise ConfigError(f"{self.name}: measure charges {outside[0]!r} outside "
                                      f"ball({self.ball_radius})")
        if self.element is not None:
            parse_key(S, self.element)


def build_semigroup(spec: dict, base_dir: str = ".") -> sg.Semigroup:
    spec = dict(spec)
    kind = spec.pop("kind", None)
    try:
        if kind == "table":
            if "file" in spec:
                path = Path(base_dir) / spec["file"]
                if not path.exists():
                    raise ConfigError(f"table file {path} does not exist")
                return sg.load_table(path)
            return sg.table_from_dict(spec)
        if kind == "left-zero":
            return sg.left_zero(int(spec["n"]), bool(spec.get("identity", True)))
        if kind == "right-zero":
            return sg.right_zero(int(spec["n"]), bool(spec.get("identity", True)))
        if kind == "cyclic":
            return sg.cyclic_group(int(spec["n"]))
        if kind == "abelian":
            return sg.abelian_group(*map(int, spec["orders"]))
        if kind == "symmetric":
            return sg.symmetric_group(int(spec["n"]))
        if kind == "dihedral":
            return sg.dihedral_group(int(spec["n"]))
        if kind == "quaternion":
            return sg.quaternion_group()
        if kind == "transformation":
            return sg.transformation_monoid(spec["maps"])
        if kind == "free":
            return sg.FreeMonoid(int(spec["k"]))
        if kind == "commutative":
            return sg.CommutativeMonoid(int(spec.get("k", 1)))
        if kind == "heisenberg":
            return sg.HeisenbergMonoid()
    except (KeyError, TypeError, ValueError, MalformedTable) as exc:
        raise ConfigError(f"bad semigroup config {kind!r}: {exc}") from None
    raise ConfigError(f"unknown semigroup kind {kind!r}")


def parse_key(S: sg.Semigroup, obj):
    try:
        return S.key_from_json(obj)
    except InvalidElement as exc:
        raise ConfigError(str(exc)) from None


def build_measure(S: sg.Semigroup, spec: dict) -> Measure:
    """``atoms = [[key, "p/q"], ...]``, ``uniform = [keys] | "generators"`` or ``point = key``."""
    try:
        if "atoms" in spec:
            mu = Measure((parse_key(S, k), Fraction(str(w))) for k, w in spec["atoms"])
        elif "uniform" in spec:
            keys = spec["uniform"]
            if keys == "generators":
                keys = S.generators
            mu = Measure.uniform(parse_key(S, k) for k in keys)
        elif "point" in spec:
            mu = Measure.point(parse_key(S, spec["point"]))
        else:
            raise ConfigError("measure needs 'atoms', 'uniform' or 'point'")
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad measure spec: {exc}") from None
    if not mu.is_probability():
        raise ConfigError(f"measure has mass {mu.mass()}, not 1")
    return mu


def load_config(path) -> list[ExperimentConfig]:
    path = Path(path)
    try:
        data = tomli.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found") from None
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    entries = data["experiment"] if "experiment" in data else [data]
    if not isinstance(entries, list):
        raise ConfigError("'experiment' must be an array of tables")
    cfgs = [ExperimentConfig.from_dict(e, str(path.parent), i) for i, e in enumerate(entries)]
    names = [c.name for c in cfgs]
    if len(set(names)) != len(names):
        raise ConfigError("experiment names must be distinct")
    return cfgs


# -- runners -------------------------------------------------------------------------

@dataclass
class Outcome:
    name: str
    code: int
    files: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    message: str = ""


def _fr(v) -> list:
    return fraction_pair(v) if not isinstance(v, float) else [v]


def _tol(cfg):
    return None if cfg.tolerance is None else Fraction(str(cfg.tolerance))


def _run_decay(cfg, S, cap):
    if cfg.measure is None or cfg.element is None:
        raise ConfigError("decay needs 'measure' and 'element'")
    pi = build_measure(S, cfg.measure)
    s = parse_key(S, cfg.element)
    prof = decay_profile(S, pi, s, cfg.horizon, cfg.mode, cap)
    failures = []
    if cfg.params.get("assert_nonincreasing"):
        slack = 0 if cfg.mode == "exact" else 1e-12
        for n in range(1, cfg.horizon):
            if prof.values[n + 1] > prof.values[n] + slack:
                failures.append(f"n={n + 1}: {prof.values[n + 1]} > {prof.values[n]}")
                break
    tol = _tol(cfg)
    if tol is not None and not prof.values[-1] < tol:
        failures.append(f"n={cfg.horizon}: {prof.values[-1]} >= tolerance {tol}")
    return {"csv": decay_csv(prof)}, failures


def _run_harmonic(cfg, S, cap):
    if not S.finite:
        raise ConfigError("harmonic spaces need a finite semigroup")
    if cfg.measure is None:
        raise ConfigError("harmonic needs 'measure'")
    pi = build_measure(S, cfg.measure)
    space = harmonic.harmonic_space_finite(S, pi)
    report = space.to_report(S)
    report["liouville"] = space.dimension == 1
    report["contains_constants"] = space.contains_constants()
    failures = []
    want = cfg.params.get("expect_dimension")
    if want is not None and space.dimension != want:
        failures.append(f"dimension {space.dimension} != expected {want}")
    return {"json": to_json(report)}, failures


def _run_reiter(cfg, S, cap):
    if not isinstance(S, sg.CommutativeMonoid):
        raise ConfigError("reiter-mix uses Folner-cube witnesses and needs a commutative (N^k) semigroup")
    schedule = reiter.build_schedule(int(cfg.params.get("M", 3)))
    radius = 1 if cfg.ball_radius is None else cfg.ball_radius
    _, rep = reiter.reiter_mix(S, reiter.folner_oracle(S, cap), schedule, radius, cap)
    report = {"schedule": _schedule_json(schedule),
              "stages": [{"m": m, "test_set": a, "witness_support": b, "max_deviation": _fr(c)}
                         for m, (a, b, c) in enumerate(rep.stages, start=1)],
              "rows": rep.to_rows(S)}
    failures = [f"m={r.m} s={S.key_to_json(r.s)} n={r.n}: {r.measured} >= {r.bound}"
                for r in rep.failures()]
    return {"json": to_json(report)}, failures


def _schedule_json(schedule):
    return {"t": [_fr(t) for t in schedule.t], "eps": [_fr(e) for e in schedule.eps],
            "n": list(schedule.n)}


def _run_cesaro(cfg, S, cap):
    if cfg.measure is None:
        raise ConfigError("cesaro needs 'measure'")
    pi = build_measure(S, cfg.measure)
    if cfg.mode == "float":
        pi = pi.to_float()
    if cfg.element is not None:
        shifts = [parse_key(S, cfg.element)]
    else:
        shifts = S.sorted(S.elements() if S.finite else sg.ball(S, cfg.ball_radius or 1))
    thetas = reiter.cesaro_witnesses(S, pi, cfg.horizon, cap=cap)
    rows, last = [], {}
    for n, th in enumerate(thetas):
        for s in shifts:
            d = reiter.deviation(S, th, s)
            last[s] = d
            rows.append({"n": n, "s": S.key_to_json(s), "deviation": _fr(d),
                         "float_approx": float(d)})
    failures = []
    tol = _tol(cfg)
    if tol is not None:
        for s, d in last.items():
            if not d < tol:
                failures.append(f"n={cfg.horizon} s={S.key_to_json(s)}: {float(d)} >= {float(tol)}")
    return {"json": to_json({"rows": rows})}, failures


def _run_central(cfg, S, cap):
    failures = []
    if isinstance(S, sg.HeisenbergMonoid):
        fx = central.HeisenbergFixture(S)
        radius = 3 if cfg.ball_radius is None else cfg.ball_radius
        checks = fx.verify_on_ball(radius)
        sampled = fx.verify_sampled(int(cfg.params.get("samples", 500)),
                                    int(cfg.params.get("seed", 0)))
        report = {"scope": f"verified on ball {radius}",
                  "chain": ["{e}", "z-axis", "S"],
                  "levels": [{"m": m, "right_reversible": a.holds, "pairs_checked": a.checked,
                              "central_condition": b.holds, "pairs_checked_ii": b.checked}
                             for m, (a, b) in sorted(checks.items())],
                  "sampled_witnesses": sampled}
        for m, (a, b) in sorted(checks.items()):
            if not a.holds:
                failures.append(f"level {m} (i) fails at {a.counterexample}")
            if not b.holds:
                failures.append(f"level {m} (ii) fails at {b.counterexample}")
        if not sampled:
            failures.append("symbolic witnesses fail on a sampled pair")
        return {"json": to_json(report)}, failures
    series = central.find_central_series(S, int(cfg.params.get("cap", 8)))
    report = {"found": series is not None}
    if series is not None:
        report.update(series.to_report(S))
    want = cfg.params.get("expect_length")
    got = series.length if series is not None else "none"
    if want is not None and want != got:
        failures.append(f"series length {got} != expected {want}")
    return {"json": to_json(report)}, failures


def _subsemigroup(cfg, S):
    spec = cfg.params.get("S1", "center")
    if spec == "z-axis":
        if not isinstance(S, sg.HeisenbergMonoid):
            raise ConfigError("S1 = 'z-axis' needs the Heisenberg semigroup")
        return central.ZAxis()
    if spec == "center":
        return sg.center(S)
    if spec == "all":
        return frozenset(S.elements())
    return frozenset(parse_key(S, k) for k in spec)


def _run_quotient(cfg, S, cap):
    S1 = _subsemigroup(cfg, S)
    radius = cfg.ball_radius
    if not S.finite and radius is None:
        raise ConfigError("quotient of an infinite semigroup needs 'ball_radius'")
    try:
        q = central.quotient_by_S1(S, S1, radius=None if S.finite else radius,
                                   slack=int(cfg.params.get("slack", 2)))
    except WellDefinednessError as exc:
        return {"json": to_json({"error": str(exc)})}, [str(exc)]
    report = q.to_report()
    if cfg.measure is not None:
        mu = central.pushforward(q, build_measure(S, cfg.measure))
        report["pushforward"] = [[k, *fraction_pair(mu[k])] for k in sorted(mu.support)]
    failures = []
    if cfg.params.get("assert_decided") and q.undecided:
        failures.append(f"{len(q.undecided)} undecided pairs, first {q.undecided[0]}")
    return {"json": to_json(report)}, failures


def _build_semigroupoid(cfg, S):
    units = cfg.params.get("units")
    if isinstance(units, dict) and "rotation" in units:
        return sgd.rotation_semigroupoid(int(units["rotation"]), S)
    if isinstance(units, dict) and "action" in units:
        table = {(x, parse_key(S, g)): y for x, g, y in units["action"]}
        return sgd.action_from_generators(units["keys"], S, table)
    raise ConfigError("semigroupoid needs units = {rotation = n} or {keys, action}")


def _build_system(cfg, G):
    S = G.S
    if "fibers" in cfg.params:
        fibers = {x: build_measure(S, spec) for x, spec in cfg.params["fibers"]}
        return sgd.MeasureSystem(fibers)
    if cfg.measure is None:
        raise ConfigError("semigroupoid needs 'measure' or 'fibers'")
    return sgd.MeasureSystem.constant(G, build_measure(S, cfg.measure))


def _run_semigroupoid(cfg, S, cap):
    G = _build_semigroupoid(cfg, S)
    task = cfg.params.get("task", "cesaro")
    failures = []
    if task == "cesaro":
        pi = _build_system(cfg, G)
        x, s = cfg.params.get("arrow", [G.units[0], S.key_to_json(S.generators[0])])
        g = sgd.Arrow(x, parse_key(S, s))
        devs = [sgd.arrow_deviation(G, th, g)
                for th in sgd.system_cesaro(G, pi, pi, cfg.horizon, cap)]
        rows = [{"n": n, "deviation": _fr(d), "float_approx": float(d)}
                for n, d in enumerate(devs)]
        report = {"arrow": [x, S.key_to_json(g.s)], "rows": rows}
        if cfg.params.get("assert_nonincreasing"):
            for n in range(1, len(devs)):
                if devs[n] > devs[n - 1]:
                    failures.append(f"n={n}: {devs[n]} > {devs[n - 1]}")
                    break
        tol = _tol(cfg)
        if tol is not None and not devs[-1] < tol:
            failures.append(f"n={cfg.horizon}: {float(devs[-1])} >= {float(tol)}")
    elif task == "harmonic":
        pi = _build_system(cfg, G)
        dims = {x: sgd.fibrewise_harmonic_space(G, pi, x).dimension for x in G.units}
        report = {"dimensions": [[x, d] for x, d in dims.items()],
                  "system": system_to_dict(G, pi)}
        want = cfg.params.get("expect_dimension")
        for x, d in dims.items():
            if want is not None and d != want:
                failures.append(f"unit {x}: dimension {d} != expected {want}")
    elif task == "reiter-mix":
        if not isinstance(S, sg.CommutativeMonoid):
            raise ConfigError("semigroupoid reiter-mix needs an N^k semigroup")
        schedule = reiter.build_schedule(int(cfg.params.get("M", 2)))
        radius = 1 if cfg.ball_radius is None else cfg.ball_radius
        _, rep = sgd.system_reiter_mix(G, reiter.folner_oracle(S, cap), schedule, radius, cap)
        report = {"schedule": _schedule_json(schedule), "rows": rep.to_rows(G)}
        failures = [f"m={r.m} arrow=({r.s.x}, {S.key_to_json(r.s.s)}) n={r.n}: "
                    f"{r.measured} >= {r.bound}" for r in rep.failures()]
    else:
        raise ConfigError(f"unknown semigroupoid task {task!r}")
    return {"json": to_json(report)}, failures


RUNNERS = {"decay": _run_decay, "harmonic": _run_harmonic, "reiter-mix": _run_reiter,
           "cesaro": _run_cesaro, "central-series": _run_central, "quotient": _run_quotient,
           "semigroupoid": _run_semigroupoid}


def run(cfg: ExperimentConfig, out_dir, cap: int = sg.DEFAULT_CAP) -> Outcome:
    """Run one experiment and write its report atomically."""
    try:
        S = build_semigroup(cfg.semigroup, cfg.base_dir)
        texts, failures = RUNNERS[cfg.kind](cfg, S, cap)
    except ConfigError as exc:
        return Outcome(cfg.name, EXIT_CONFIG, message=str(exc))
    except (SupportOverflow, CapExceeded) as exc:
        stage = getattr(exc, "stage", None)
        where = f" at stage m={stage}" if stage is not None else ""
        return Outcome(cfg.name, EXIT_OVERFLOW, message=f"overflow{where}: {exc}")
    except (InvalidElement, NotProbability, MalformedTable) as exc:
        return Outcome(cfg.name, EXIT_CONFIG, message=str(exc))
    files = []
    for ext, text in texts.items():
        name = cfg.output or f"{cfg.name}.{ext}"
        files.append(str(write_atomic(Path(out_dir) / name, text)))
    return Outcome(cfg.name, EXIT_FAIL if failures else EXIT_OK, files, failures)


def _combine(codes) -> int:
    for code in (EXIT_CONFIG, EXIT_OVERFLOW, EXIT_FAIL):
        if code in codes:
            return code
    return EXIT_OK


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="semiharmonic", description=__doc__.splitlines()[0])
    ap.add_argument("--config", required=True, help="TOML experiment config")
    ap.add_argument("--out", default="results", help="output directory")
    ap.add_argument("--mode", choices=("exact", "float"),
                    help="override the numeric mode of every experiment")
    ap.add_argument("--max-support", type=int, default=sg.DEFAULT_CAP,
                    help="support / carrier cap (default %(default)s)")
    ap.add_argument("--jobs", type=int, default=1, help="experiments run in parallel")
    args = ap.parse_args(argv)
    try:
        cfgs = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.mode:
        cfgs = [replace(c, mode=args.mode) for c in cfgs]
    if args.jobs > 1 and len(cfgs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            outcomes = list(pool.map(run, cfgs, [args.out] * len(cfgs),
                                     [args.max_support] * len(cfgs)))
    else:
        outcomes = [run(c, args.out, args.max_support) for c in cfgs]
    for o in outcomes:
        status = {EXIT_OK: "ok", EXIT_FAIL: "FAIL", EXIT_CONFIG: "config error",
                  EXIT_OVERFLOW: "overflow"}[o.code]
        print(f"{o.name}: {status}" + (f" ({o.message})" if o.message else ""))
        for f in o.failures:
            print(f"  failing row: {f}", file=sys.stderr)
    return _combine([o.code for o in outcomes])


if __name__ == "__main__":
    sys.exit(main())
