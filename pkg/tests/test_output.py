import csv
import io
import json
import math
import os

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lrperc.output import (ROW_COLUMNS, atomic_write, csv_bytes, json_bytes, read_csv, read_json, sha256,
                           write_csv, write_json, write_rows)

finite = st.floats(allow_nan=False, allow_infinity=False)
plain = st.text(st.characters(blacklist_categories=("Cs", "Cc")), max_size=8)


@given(st.lists(st.tuples(finite, st.integers(-2**63, 2**63 - 1), plain), max_size=6))
def test_csv_round_trip_preserves_values(rows):
    text = csv_bytes("demo", ["x", "k", "s"], rows).decode()
    lines = text.splitlines()
    assert lines[0] == "# lrperc demo v1"
    back = list(csv.DictReader(io.StringIO(text.split("\n", 1)[1], newline="")))
    assert len(back) == len(rows)
    for got, (x, k, s) in zip(back, rows):
        assert float(got["x"]) == x and int(got["k"]) == k and got["s"] == s


@given(st.dictionaries(st.text(max_size=5), st.one_of(finite, st.integers(), st.lists(finite, max_size=3))))
def test_json_round_trip(payload):
    head, body = json_bytes("demo", payload).decode().splitlines()
    assert json.loads(head) == {"format": "lrperc-demo", "version": 1}
    assert json.loads(body) == payload


def test_cells_for_special_values():
    text = csv_bytes("t", ["a", "b", "c", "d"], [[None, True, math.nan, np.int64(3)]]).decode()
    assert text.splitlines()[-1] == ",true,nan,3"
    assert '"inf"' in json_bytes("t", {"v": math.inf}).decode()


def test_writers_and_readers(tmp_path):
    rows = [{"experiment": "lambda", "d": 1, "mean": 0.1 + 0.2}]
    p = write_rows(tmp_path / "a", "rows", rows)
    head, back = read_csv(p)
    assert head == "# lrperc rows v1" and list(back[0]) == list(ROW_COLUMNS)
    assert back[0]["mean"] == repr(0.1 + 0.2)
    p = write_rows(tmp_path / "a", "rows", rows, fmt="json")
    assert read_json(p)[1][0]["mean"] == 0.1 + 0.2
    with pytest.raises(ValueError):
        write_rows(tmp_path / "a", "rows", rows, fmt="xml")


def test_outputs_are_byte_identical(tmp_path):
    rows = [[1.0 / 3, 2], [2.5e-17, -1]]
    a = write_csv(tmp_path / "a.csv", "x", ["u", "v"], rows)
    b = write_csv(tmp_path / "b.csv", "x", ["u", "v"], rows)
    assert a.read_bytes() == b.read_bytes() and sha256(a) == sha256(b)
    c = write_json(tmp_path / "c.json", "x", {"b": 1, "a": [0.1]})
    d = write_json(tmp_path / "d.json", "x", {"a": [0.1], "b": 1})
    assert c.read_bytes() == d.read_bytes()


def test_atomic_write_leaves_no_temporary_files(tmp_path):
    atomic_write(tmp_path / "sub" / "f.txt", b"one")
    atomic_write(tmp_path / "sub" / "f.txt", b"two")
    assert os.listdir(tmp_path / "sub") == ["f.txt"]
    assert (tmp_path / "sub" / "f.txt").read_bytes() == b"two"
