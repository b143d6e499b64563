import io

import numpy as np
import pytest
from hypothesis import given, strategies as st

from costcut.encoding import (INTERCEPT, EncodingError, EncodingPlan, Provenance, ThresholdSet,
                              build_design, drop_column, encode_terms, interactions, parse_plan,
                              reference_level, traffic_light)
from costcut.tabular import load_table

AGE = ThresholdSet("age", (16, 17, 18))


def _data(text, outcome="y"):
    return load_table(io.StringIO(text), outcome)


@pytest.mark.parametrize("x, expected", [
    (16.5, [1, 0, 0]),
    (15, [0, 0, 0]),
    (20, [1, 1, 1]),
    (16, [1, 0, 0]),  # closed on the left
    (18, [1, 1, 1]),
])
def test_traffic_light(x, expected):
    assert traffic_light([x], AGE)[0].tolist() == expected


def test_threshold_set_validation():
    with pytest.raises(EncodingError, match="empty"):
        ThresholdSet("age", ())
    with pytest.raises(EncodingError, match="increasing"):
        ThresholdSet("age", (17, 16))


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=50))
def test_traffic_light_monotone_and_interval_bijection(xs):
    enc = traffic_light(xs, AGE)
    assert np.all(enc[:, :-1] >= enc[:, 1:])
    t = np.array(AGE.thresholds)
    interval = np.searchsorted(t, np.asarray(xs), side="right")
    # number of ones identifies the interval exactly
    assert np.array_equal(enc.sum(axis=1), interval)


AGE_TABLE = "age,sex,y\n15,m,0\n16.5,f,1\n17.5,m,0\n19,m,1\n"


def test_build_design_age():
    d = _data(AGE_TABLE)
    design = build_design(d, parse_plan("traffic_light age: 16,17,18"))
    assert design.names == (INTERCEPT, "age>=16", "age>=17", "age>=18")
    assert design.values.tolist() == [[1, 0, 0, 0], [1, 1, 0, 0], [1, 1, 1, 0], [1, 1, 1, 1]]


def test_empty_plan_gives_intercept_column():
    d = _data("x,y\n1,0\n2,1\n3,0\n4,1\n")
    design = build_design(d, EncodingPlan())
    assert design.shape == (4, 1)
    assert np.all(design.values == 1)


def test_unknown_variable():
    with pytest.raises(EncodingError, match="unknown variable"):
        build_design(_data(AGE_TABLE), parse_plan("raw height"))


def test_categorical_reference_is_most_frequent():
    d = _data(AGE_TABLE)
    design = build_design(d, parse_plan("categorical sex"))
    assert design.names == (INTERCEPT, "sex=f")
    assert reference_level(["b", "a", "b", "a"]) == "a"  # tie -> lexicographic


def test_drop_merges_adjacent_groups():
    d = _data(AGE_TABLE)
    design = drop_column(build_design(d, parse_plan("traffic_light age: 16,17,18")), "age>=17")
    rows = design.values
    assert rows[1, 1:].tolist() == rows[2, 1:].tolist() == [1, 0]
    assert rows[0, 1:].tolist() != rows[1, 1:].tolist()


def test_drop_errors():
    design = build_design(_data(AGE_TABLE), parse_plan("traffic_light age: 16,17,18"))
    with pytest.raises(EncodingError, match="unknown column"):
        drop_column(design, "age>=99")
    with pytest.raises(EncodingError, match="intercept"):
        drop_column(design, INTERCEPT)


def test_drop_then_rebuild_restores():
    d = _data(AGE_TABLE)
    plan = parse_plan("traffic_light age: 16,17,18")
    full = build_design(d, plan)
    dropped = drop_column(full, "age>=17")
    assert dropped != full
    assert build_design(d, plan) == full
    assert encode_terms(d, full.provenance) == full


class TestInteractions:
    def _design(self):
        d = _data("a,b,c,d,e,y\n1,1,0,2,3,0\n0,1,1,5,1,1\n1,0,0,1,1,0\n")
        return build_design(d, parse_plan("raw a\nraw b\nraw c\nraw d\nraw e\nintercept off"))

    def test_product(self):
        design = interactions(self._design(), [("a", "b")])
        assert design.column("a×b").tolist() == [1, 0, 0]

    def test_self_interaction_is_square_and_flagged(self):
        design = interactions(self._design(), [("d", "d")])
        assert design.column("d×d").tolist() == [4, 25, 1]
        assert design.provenance[-1].squared

    def test_count(self):
        design = interactions(self._design(), [("a", "b"), ("c", "d"), ("a", "e")])
        assert design.shape[1] == 8

    def test_errors(self):
        with pytest.raises(EncodingError, match="unknown column"):
            interactions(self._design(), [("a", "zz")])
        with pytest.raises(EncodingError, match="duplicate"):
            interactions(self._design(), [("a", "b"), ("a", "b")])


def test_plan_file_grammar():
    plan = parse_plan("""
        # comment
        traffic_light age: 16, 17, 18
        categorical sex
        raw income
        interact age>=18 sex=m
    """)
    assert plan.traffic_lights == (AGE,)
    assert plan.categorical == ("sex",)
    assert plan.raw == ("income",)
    assert plan.interactions == (("age>=18", "sex=m"),)
    assert [v for _, v in plan.variable_order()] == ["age", "sex", "income"]


@pytest.mark.parametrize("text", ["frobnicate x", "traffic_light age 16", "interact a",
                                  "raw a\nraw a", "traffic_light age: 18,16"])
def test_plan_file_errors(text):
    with pytest.raises(EncodingError):
        parse_plan(text)


def test_column_order_intercept_variables_interactions():
    d = _data("age,sex,y\n15,m,0\n17,f,1\n19,m,0\n")
    design = build_design(d, parse_plan(
        "categorical sex\ntraffic_light age: 16,18\ninteract age>=18 sex=f"))
    assert design.names == (INTERCEPT, "sex=f", "age>=16", "age>=18", "age>=18×sex=f")


@pytest.mark.parametrize("term", ["intercept", "raw|x", "ge|age|16.5", "eq|sex|f",
                                  "mul|ge|age|16|eq|sex|f"])
def test_term_text_round_trip(term):
    assert Provenance.from_text(term).to_text() == term
