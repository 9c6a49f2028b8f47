import csv
import io
import json
from fractions import Fraction

from hypothesis import given

from strategies import heis, probability
from semiharmonic import semigroup as sg
from semiharmonic.measure import Measure, decay_profile
from semiharmonic.semigroupoid import MeasureSystem, rotation_semigroupoid
from semiharmonic.serialize import (
    decay_csv,
    measure_from_rows,
    measure_to_rows,
    system_from_dict,
    system_to_dict,
    to_json,
    write_atomic,
)

H = sg.HeisenbergMonoid()


@given(probability(list(sg.ball(H, 2))))
def test_measure_rows_roundtrip_through_json(mu):
    rows = json.loads(to_json(measure_to_rows(H, mu)))
    assert measure_from_rows(H, rows) == mu


def test_system_roundtrip():
    G = rotation_semigroupoid(2)
    sys = MeasureSystem({0: Measure({(0,): Fraction(1, 3), (2,): Fraction(2, 3)}),
                         1: Measure({(1,): 1})})
    data = json.loads(to_json(system_to_dict(G, sys)))
    assert system_from_dict(G, data) == sys
    assert data["action"] == [[0, [1], 1], [1, [1], 0]]


def test_decay_csv_columns():
    N1 = sg.CommutativeMonoid(1)
    prof = decay_profile(N1, Measure({(0,): Fraction(1, 2), (1,): Fraction(1, 2)}), (1,), 10)
    rows = list(csv.reader(io.StringIO(decay_csv(prof))))
    assert rows[0] == ["n", "numerator", "denominator", "float_approx"]
    assert len(rows) == 11
    assert rows[3] == ["3", "3", "4", "0.75"]


def test_write_atomic(tmp_path):
    p = write_atomic(tmp_path / "sub" / "x.json", "abc")
    assert p.read_text() == "abc"
    write_atomic(p, "def")
    assert p.read_text() == "def"
    assert [f.name for f in p.parent.iterdir()] == ["x.json"]
