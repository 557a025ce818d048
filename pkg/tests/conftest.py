import numpy as np
import pytest

from itermix.data import Dataset


class ConstantClassifier:
    """Stub returning a fixed minority probability and accepting any update."""

    def __init__(self, p=0.5, dim=2):
        self.p = p
        self.dim = dim
        self.updates = []

    def predict_proba(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            return self.p
        return np.full(X.shape[0], self.p)

    def predict(self, X):
        return (np.atleast_1d(self.predict_proba(X)) > 0.5).astype(np.int64)

    def update(self, samples):
        self.updates.append(list(samples))
        return self

    def snapshot(self):
        c = ConstantClassifier(self.p, self.dim)
        c.updates = list(self.updates)
        return c


class ScriptedScores:
    """Scorer that replays a fixed list of validation scores (baseline first)."""

    def __init__(self, scores):
        self.scores = list(scores)
        self.calls = 0

    def __call__(self, classifier, val):
        s = self.scores[min(self.calls, len(self.scores) - 1)]
        self.calls += 1
        return s


@pytest.fixture
def blobs():
    """Small 2-D imbalanced set: 40 majority around the origin, 8 minority near (3, 3)."""
    rng = np.random.default_rng(11)
    X = np.vstack([rng.normal(0, 1, (40, 2)), rng.normal(3, 0.4, (8, 2))])
    y = np.r_[np.zeros(40, int), np.ones(8, int)]
    return Dataset(X, y)


# verdict lines collected by the acceptance suite, echoed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
