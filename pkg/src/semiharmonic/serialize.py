"""Deterministic text serializations: measures as [key, num, den] rows, CSV, JSON."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from fractions import Fraction
from pathlib import Path

from .measure import DecayProfile, Measure, SignedMeasure
from .semigroup import Semigroup


def fraction_pair(v) -> list:
    v = Fraction(v)
    return [v.numerator, v.denominator]


def measure_to_rows(S: Semigroup, mu: SignedMeasure) -> list[list]:
    """[[key_json, numerator, denominator], ...] in the semigroup's key order."""
    rows = []
    for key in S.sorted(mu.support):
        rows.append([S.key_to_json(key), *fraction_pair(mu[key])])
    return rows


def measure_from_rows(S: Semigroup, rows, signed: bool = False) -> SignedMeasure:
    cls = SignedMeasure if signed else Measure
    return cls((S.key_from_json(k), Fraction(n, d)) for k, n, d in rows)


def system_to_dict(G, system) -> dict:
    """Unit -> measure rows, plus the action table on generators."""
    S = G.S
    return {
        "units": list(G.units),
        "fibers": [[x, measure_to_rows(S, system[x])] for x in G.units],
        "action": [[x, S.key_to_json(g), y] for x, g, y in G.action_table()],
    }


def system_from_dict(G, data: dict):
    from .semigroupoid import MeasureSystem
    return MeasureSystem({x: measure_from_rows(G.S, rows) for x, rows in data["fibers"]})


def decay_csv(profile: DecayProfile, start: int = 1) -> str:
    """Columns n, numerator, denominator, float_approx for n = start..horizon."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "numerator", "denominator", "float_approx"])
    for n in range(start, profile.horizon + 1):
        v = profile.values[n]
        num, den = (v.as_integer_ratio() if isinstance(v, float)
                    else (Fraction(v).numerator, Fraction(v).denominator))
        w.writerow([n, num, den, repr(float(v))])
    return buf.getvalue()


def to_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_default) + "\n"


def _default(obj):
    if isinstance(obj, Fraction):
        return fraction_pair(obj)
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_atomic(path, text: str) -> Path:
    """Write via a temporary file in the same directory and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path
