import csv
import io

import pytest

from ryseri.perfmodel import (
    GQ_PATTERNS,
    RR_PATTERNS,
    TripCounts,
    UnrollPlan,
    apply_further_unrolling,
    base_trip_counts,
    emit_model_table,
    intermediate_size,
    model_rows,
    modeled_geris,
    pattern_combinations,
)
from ryseri.shells import QuartetClass, all_classes, num_eriq

# class: (general optimization, further unrolling)
TRIP_TABLE = {
    "ss|ss": ((3, 1, 1), (1, 1, 1)),
    "pp|pp": ((18, 9, 3), (3, 3, 3)),
    "dd|ps": ((9, 3, 4), (3, 3, 4)),
    "dd|dd": ((45, 36, 41), (45, 36, 41)),
    "ff|fd": ((54, 60, 188), (54, 60, 188)),
    "ff|ff": ((84, 100, 313), (84, 100, 313)),
}

# class: (f_max MHz, final counts, modeled GERIS)
THROUGHPUT_TABLE = {
    "fd|ps": (408.3, (12, 3, 6), 3.34),
    "ps|fd": (408.2, (12, 60, 6), 1.05),
    "ff|dp": (373.4, (30, 18, 57), 10.03),
    "dp|ff": (407.7, (60, 100, 57), 6.67),
    "fd|fd": (400.2, (72, 60, 113), 11.71),
    "df|fd": (392.5, (72, 60, 113), 11.49),
}


@pytest.mark.parametrize("cls", TRIP_TABLE)
def test_trip_table(cls):
    base, final = TRIP_TABLE[cls]
    assert base_trip_counts(cls).as_tuple() == base
    assert apply_further_unrolling(cls)[1].as_tuple() == final


@pytest.mark.parametrize("cls", ["fd|ps", "ps|fd", "ff|dp", "dp|ff"])
def test_throughput_table_counts(cls):
    assert apply_further_unrolling(cls)[1].as_tuple() == THROUGHPUT_TABLE[cls][1]


@pytest.mark.parametrize("cls", ["fd|fd", "df|fd"])
def test_throughput_table_recurrence_base(cls):
    # base n_RR = 3 n_rys (Ld + 1) = 3 * 6 * 3; n_GQ and n_CS as tabulated
    got = apply_further_unrolling(cls)[1]
    assert got.as_tuple() == (54, 60, 113)
    assert got.bottleneck == "n_CS"


@pytest.mark.parametrize("cls", THROUGHPUT_TABLE)
def test_geris_from_listed_inputs(cls):
    f, counts, geris = THROUGHPUT_TABLE[cls]
    assert modeled_geris(cls, TripCounts(*counts), f).geris == pytest.approx(geris, abs=0.005)


@pytest.mark.parametrize("cls", THROUGHPUT_TABLE)
def test_geris_from_model(cls):
    f, _, geris = THROUGHPUT_TABLE[cls]
    final = apply_further_unrolling(cls)[1]
    assert modeled_geris(cls, final, f).geris == pytest.approx(geris, abs=0.01)


def test_seven_combinations():
    combos = pattern_combinations(all_classes())
    assert len(combos) == 7
    assert all(r in RR_PATTERNS and g in GQ_PATTERNS for r, g in combos)
    assert len(RR_PATTERNS) * len(GQ_PATTERNS) == 12


def test_invariants_all_classes():
    for c in all_classes():
        base = base_trip_counts(c)
        plan, final = apply_further_unrolling(c)
        assert final.n_CS == base.n_CS
        assert final.n_RR <= base.n_RR and final.n_GQ <= base.n_GQ
        assert final.cycles <= base.cycles
        if plan.rr_storage == "block-memory":
            assert plan.gq_pattern == "ξμab"
        if plan.rr_pattern in ("ijklμ", "ijklμξ"):
            assert intermediate_size(c) <= 108


def test_more_bits_never_faster():
    for c in all_classes()[::7]:
        a = apply_further_unrolling(c, n=12)[1]
        b = apply_further_unrolling(c, n=24)[1]
        assert b.n_CS >= a.n_CS


def test_bottleneck_ties():
    assert TripCounts(3, 3, 3).bottleneck == "n_CS"
    assert TripCounts(5, 5, 1).bottleneck == "n_GQ"
    assert TripCounts(9, 3, 4).bottleneck == "n_RR"
    with pytest.raises(ValueError):
        TripCounts(0, 1, 1)


def test_plan_validation():
    assert UnrollPlan().rr_storage == "block-memory"
    assert UnrollPlan("ijklμ", "ξμabc").gq_storage == "registers"
    with pytest.raises(ValueError):
        UnrollPlan("ij", "ξμab")


def test_geris_rejects_bad_fmax():
    with pytest.raises(ValueError):
        modeled_geris("ss|ss", TripCounts(1, 1, 1), 0.0)


def test_rows_and_csv():
    rows = model_rows(all_classes())
    assert len(rows) == 256
    text = emit_model_table(["fd|ps"], f_max={QuartetClass.parse("fd|ps"): 408.3}, fmt="csv")
    got = list(csv.DictReader(io.StringIO(text)))
    assert got == [{"class": "[fd|ps]", "n_RR": "12", "n_GQ": "3", "n_CS": "6", "bottleneck": "n_RR", "geris": "3.34"}]
    assert num_eriq(QuartetClass.parse("fd|ps")) == 180


def test_text_table():
    out = emit_model_table(["pp|pp", "dd|dd"])
    lines = out.splitlines()
    assert len(lines) == 3
    assert "18*" in lines[1] and lines[1].split()[-3:-1] == ["ijklμ", "ξμabc"]
    assert lines[2].count("45*") == 2
    with pytest.raises(ValueError):
        emit_model_table(["ss|ss"], fmt="xml")
