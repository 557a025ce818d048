import numpy as np
import pytest

from itermix.errors import EmptyMatrix, LengthMismatch
from itermix.metrics import ConfusionMatrix, confusion, macro_f1, macro_scores, per_class


def hand_macro(cm):
    """Independent re-derivation straight from the counts."""

    def prf(tp, fp, fn):
        p = tp / (tp + fp) if tp + fp else 0.0
        r = tp / (tp + fn) if tp + fn else 0.0
        f = 2 * tp / (2 * tp + fp + fn) if tp else 0.0
        return p, r, f

    a = prf(cm.tp, cm.fp, cm.fn)
    b = prf(cm.tn, cm.fn, cm.fp)
    return tuple((x + y) / 2 for x, y in zip(a, b))


class TestConfusion:
    def test_examples(self):
        assert confusion([0, 1], [0, 1]) == ConfusionMatrix(tp=1, fp=0, tn=1, fn=0)
        assert confusion([1], [0]) == ConfusionMatrix(tp=0, fp=0, tn=0, fn=1)
        assert confusion([0, 0, 0, 1], [0, 0, 0, 0]) == ConfusionMatrix(tp=0, fp=0, tn=3, fn=1)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            confusion([0, 1], [0])


class TestMacroScores:
    def test_perfect(self):
        s = macro_scores(confusion([0, 1, 1, 0], [0, 1, 1, 0]))
        assert (s.precision, s.recall, s.f1) == (1.0, 1.0, 1.0)

    def test_all_majority_predictor(self):
        s = macro_scores(confusion([0, 0, 0, 1], [0, 0, 0, 0]))
        assert s.precision == pytest.approx(0.375, abs=1e-12)
        assert s.recall == pytest.approx(0.5, abs=1e-12)
        assert s.f1 == pytest.approx(3 / 7, abs=1e-12)

    def test_symmetric_case(self):
        s = macro_scores(confusion([0, 1, 1, 0], [1, 1, 0, 0]))
        assert (s.precision, s.recall, s.f1) == (0.5, 0.5, 0.5)

    def test_empty(self):
        with pytest.raises(EmptyMatrix):
            macro_scores(ConfusionMatrix(0, 0, 0, 0))

    def test_random_matrices(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            cm = ConfusionMatrix(*(int(v) for v in rng.integers(0, 6, size=4)))
            if cm.total == 0:
                continue
            s = macro_scores(cm)
            np.testing.assert_allclose((s.precision, s.recall, s.f1), hand_macro(cm), atol=1e-12)
            assert macro_scores(cm.swapped()) == s
            for p, r, f in per_class(cm):
                hm = 2 * p * r / (p + r) if p + r else 0.0
                assert f == pytest.approx(hm, abs=1e-12)
                assert 0.0 <= p <= 1.0 and 0.0 <= r <= 1.0

    def test_macro_f1_helper(self):
        assert macro_f1([0, 1], [0, 1]) == 1.0
