import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pmbsi.metrics import SMAPE_NOTE, mae, smape, summarize

vals = st.floats(-1e4, 1e4, allow_nan=False)


def test_mae_examples():
    assert mae([1, 2], [1, 2]) == 0
    assert mae([1, 2], [2, 4]) == 1.5


def test_smape_examples():
    assert smape([1.0], [3.0]) == 100.0
    # 100 * 0.5 * |1 - 3| / (1 + 3)
    assert smape([1.0], [3.0], "literal") == 25.0
    assert smape([2, 3], [2, 3]) == 0 and smape([2, 3], [2, 3], "literal") == 0
    assert smape([0.0, 1.0], [0.0, 1.0]) == 0.0


def test_errors():
    with pytest.raises(ValueError):
        mae([1, 2], [1])
    with pytest.raises(ValueError):
        smape([], [])
    with pytest.raises(ValueError):
        smape([1], [1], "other")


def test_note_mentions_cap():
    assert "50" in SMAPE_NOTE and "standard" in SMAPE_NOTE


@given(st.lists(st.tuples(vals, vals), min_size=1, max_size=40), st.randoms())
@settings(max_examples=200, deadline=None)
def test_properties(pairs, random):
    a = np.array([p[0] for p in pairs])
    f = np.array([p[1] for p in pairs])
    std, lit = smape(a, f), smape(a, f, "literal")
    assert std == pytest.approx(4 * lit, rel=1e-12, abs=0)
    assert 0 <= std <= 200 + 1e-9 and 0 <= lit <= 50 + 1e-9
    assert smape(f, a) == std
    perm = list(range(len(a)))
    random.shuffle(perm)
    assert mae(a[perm], f[perm]) == pytest.approx(mae(a, f), rel=1e-12)
    assert smape(a[perm], f[perm]) == pytest.approx(std, rel=1e-12)
    s = summarize(a, f)
    assert s.n == len(a) and s.mae >= 0
