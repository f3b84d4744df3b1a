import threading

import pytest

from streamcover.oracle import (
    CallCounter,
    CoverInstance,
    InputFormatError,
    OracleError,
    UtilityOracle,
    check_submodular_monotone,
    load_cover_instance,
    marginal_gain,
    parse_cover_instance,
)
from streamcover.utilities import (
    KernelConfig,
    domset_oracle,
    logdet_oracle,
    setcover_oracle,
)

from conftest import random_graph, union_size


class SquareOracle(UtilityOracle):
    """|S|^2: monotone but supermodular."""

    def _fresh(self):
        return []

    def _value(self, state):
        return len(state) ** 2

    def _gain(self, state, e):
        return 0 if e in state else (len(state) + 1) ** 2 - len(state) ** 2

    def _extend(self, state, e):
        if e not in state:
            state.append(e)

    def copy(self, state):
        return list(state)

    def evaluate(self, elements):
        return len(set(elements)) ** 2


def test_gain_from_empty_state_is_singleton_value():
    o = setcover_oracle(CoverInstance(4, [[1, 2, 3]]))
    assert marginal_gain(o, o.fresh(), 0) == 3


def test_duplicate_arrival_has_zero_gain():
    o = setcover_oracle(CoverInstance(4, [[1, 2, 3], [0]]))
    s = o.state_of([0])
    assert marginal_gain(o, s, 0) == 0


def test_gain_matches_hand_union():
    sets = [[0, 1], [1, 2, 3]]
    o = setcover_oracle(CoverInstance(4, sets))
    s = o.state_of([0])
    expected = union_size(sets, [0, 1]) - union_size(sets, [0])
    assert expected == 2
    assert marginal_gain(o, s, 1) == expected


def test_gain_increments_counter_by_one():
    o = setcover_oracle(CoverInstance(4, [[1, 2, 3]]))
    s = o.fresh()
    before = o.counter.snapshot()
    o.gain(s, 0)
    delta = o.counter.snapshot() - before
    assert (delta.gain, delta.value, delta.extend) == (1, 0, 0)


def test_unknown_element_rejected():
    o = setcover_oracle(CoverInstance(4, [[1, 2, 3]]))
    with pytest.raises(OracleError, match="element out of universe"):
        o.gain(o.fresh(), 5)


def test_counter_tolerates_concurrent_increments():
    c = CallCounter()

    def work():
        for _ in range(2000):
            c.bump("gain")

    threads = [threading.Thread(target=work) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert c.gain == 16000


def test_checker_accepts_dominating_set(rng):
    g = random_graph(rng, 10, 0.3)
    rep = check_submodular_monotone(domset_oracle(g), range(10), trials=100, seed=1)
    assert rep.violations == 0


def test_checker_accepts_logdet(rng):
    pts = rng.normal(size=(25, 4))
    rep = check_submodular_monotone(logdet_oracle(KernelConfig(pts, 1.0, 2.0)), range(25), trials=100, seed=2)
    assert rep.violations == 0


def test_checker_flags_supermodular_oracle():
    rep = check_submodular_monotone(SquareOracle(10), range(10), trials=100, seed=3)
    assert rep.violations > 0
    assert rep.worst_gap >= 2


def test_checker_empty_universe():
    rep = check_submodular_monotone(SquareOracle(0), [], trials=10)
    assert rep.trials == 0 and rep.violations == 0


def test_checker_rejects_zero_trials():
    with pytest.raises(ValueError):
        check_submodular_monotone(SquareOracle(3), range(3), trials=0)


def test_cover_instance_roundtrip(tmp_path):
    inst = CoverInstance(6, [[0, 1], [2, 3, 5], [4]], ["a", "b", ""])
    path = tmp_path / "x.sets"
    inst.write(path)
    back = load_cover_instance(path)
    assert back.n == 6 and back.sets == inst.sets and back.labels == ["a", "b", ""]


def test_cover_instance_comments_and_header():
    text = "# leading comment\n5 2\n0 1 2  # first\n# between\n3 4\n"
    inst = parse_cover_instance(text)
    assert inst.sets == [[0, 1, 2], [3, 4]]
    assert inst.labels == ["first", ""]


@pytest.mark.parametrize("text, lineno", [
    ("3 2\n0 1\n0 7\n", 3),
    ("3 2\n0 x\n1\n", 2),
    ("3\n0\n", 1),
])
def test_cover_instance_errors_carry_line_numbers(text, lineno):
    with pytest.raises(InputFormatError) as exc:
        parse_cover_instance(text, "f.sets")
    assert exc.value.lineno == lineno


def test_cover_instance_too_few_sets():
    with pytest.raises(InputFormatError, match="expected 3 sets"):
        parse_cover_instance("3 3\n0\n1\n")


def test_cover_instance_validates_ids():
    with pytest.raises(ValueError):
        CoverInstance(2, [[0, 2]])
