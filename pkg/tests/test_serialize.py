import json

import pytest
from hypothesis import given, settings, strategies as st

from oracles import all_dags
from pchsat import serialize
from pchsat.gallery import vaccination_observed
from pchsat.model import bn_from_joint, joint_distribution, random_scm


def assert_byte_stable(obj):
    text = serialize.dumps(obj)
    back = serialize.loads(text)
    assert serialize.dumps(back) == text
    return back


def test_fig1_round_trip(fig1):
    back = assert_byte_stable(fig1)
    assert joint_distribution(back).entries == joint_distribution(fig1).entries
    assert back.exo.markovian


def test_joint_bn_dag_round_trip():
    jt = vaccination_observed()
    assert assert_byte_stable(jt).entries == jt.entries
    bn = bn_from_joint(jt)
    assert assert_byte_stable(bn).cpts == bn.cpts
    for g in all_dags(("A", "B", "C")):
        assert assert_byte_stable(g) == g


def test_decimal_probabilities_read_exactly():
    doc = {
        "kind": "joint", "domain": 2, "variables": ["X"],
        "entries": [{"x": [0], "p": "0.0474"}, {"x": [1], "p": "0.9526"}],
    }
    jt = serialize.loads(json.dumps(doc))
    assert str(jt[(0,)]) == "237/5000"
    assert '"237/5000"' in serialize.dumps(jt)


@pytest.mark.parametrize(
    "text",
    [
        "{",
        '{"kind": "scm"}',
        '{"kind": "teapot"}',
        '{"kind": "dag", "variables": ["X", "Y"], "edges": [["X", "Y"], ["Y", "X"]]}',
        '{"kind": "joint", "domain": 2, "variables": ["X"], "entries": [{"x": [0], "p": "one"}]}',
    ],
)
def test_malformed_documents(text):
    with pytest.raises(serialize.ModelFileError):
        serialize.loads(text)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 3), st.integers(1, 4), st.booleans())
def test_random_scm_round_trip(seed, n, p, markovian):
    scm = random_scm(seed, n, 2, p, markovian=markovian)
    back = assert_byte_stable(scm)
    assert joint_distribution(back).entries == joint_distribution(scm).entries
