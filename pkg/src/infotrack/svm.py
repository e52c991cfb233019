"""Online budgeted kernel SVM with passive-aggressive updates.

The model is a list of support vectors with signed coefficients. An update
on a labeled example does nothing when the example is already scored with
margin >= 1; otherwise the example joins the support set with the
coefficient that restores the margin, capped by the aggressiveness C.
When the support set exceeds its budget, the vector contributing least to
the decision surface (smallest beta^2 * K(sv, sv), ties to the oldest) is
evicted. An empty model scores exactly 0, and classification maps an exact
zero onto the negative class.

Snapshots round-trip exactly: floats are written as C99 hex literals.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

SNAPSHOT_MAGIC = "infotrack-svm"
SNAPSHOT_VERSION = 1


@dataclass(frozen=True)
class LabeledExample:
    """A feature vector with a binary label in {-1, +1}."""

    features: np.ndarray
    label: int

    def __post_init__(self) -> None:
        if self.label not in (-1, 1):
            raise ValueError(f"label must be -1 or +1, got {self.label}")


class BudgetedSvm:
    """Kernel perceptron-style classifier with a hard support-vector budget.

    Parameters
    ----------
    c : aggressiveness cap on |beta| per update.
    gamma : gaussian kernel width (ignored for the linear kernel).
    budget : maximum support-set size, or None for unbudgeted.
    kernel : "gaussian" or "linear".
    bias : constant added to every score (never touched by updates).
    """

    def __init__(self, c: float = 10.0, gamma: float = 0.7,
                 budget: int | None = 100, kernel: str = "gaussian",
                 bias: float = 0.0) -> None:
        if kernel not in ("gaussian", "linear"):
            raise ValueError(f"unknown kernel: {kernel}")
        if budget is not None and budget < 1:
            raise ValueError("budget must be positive or None")
        if c <= 0:
            raise ValueError("c must be positive")
        self.c = float(c)
        self.gamma = float(gamma)
        self.budget = budget
        self.kernel = kernel
        self.bias = float(bias)
        self.dim: int | None = None
        self._sv = np.zeros((0, 0))
        self._beta = np.zeros(0)
        self._labels = np.zeros(0, dtype=np.int64)
        self._ages = np.zeros(0, dtype=np.int64)
        self._next_age = 0

    def __len__(self) -> int:
        return self._sv.shape[0]

    @property
    def support_set(self) -> list[tuple[np.ndarray, int, float]]:
        """Support vectors as (features, label, coefficient) tuples."""
        return [
            (self._sv[i].copy(), int(self._labels[i]), float(self._beta[i]))
            for i in range(len(self))
        ]

    def _kernel_matrix(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        if self.kernel == "linear":
            return x @ y.T
        xx = np.sum(x * x, axis=1)[:, None]
        yy = np.sum(y * y, axis=1)[None, :]
        d2 = np.maximum(xx + yy - 2.0 * (x @ y.T), 0.0)
        return np.exp(-self.gamma * d2)

    def _self_kernel(self, x: np.ndarray) -> float:
        if self.kernel == "linear":
            return float(x @ x)
        return 1.0

    def _check_dim(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if self.dim is not None and x.shape[-1] != self.dim:
            raise ValueError(f"feature length {x.shape[-1]} != model dim {self.dim}")
        return x

    def score_many(self, x: np.ndarray) -> np.ndarray:
        """Decision values for the rows of x; zeros for an empty model."""
        x = self._check_dim(np.atleast_2d(x))
        if len(self) == 0:
            return np.full(x.shape[0], self.bias)
        k = self._kernel_matrix(x, self._sv)
        return k @ self._beta + self.bias

    def score(self, x: np.ndarray) -> float:
        return float(self.score_many(np.asarray(x)[None, :])[0])

    def classify(self, x: np.ndarray, tau: float = 0.0) -> int:
        """+1 if score exceeds tau, else -1 (an exact tie is negative)."""
        return 1 if self.score(x) - tau > 0 else -1

    def update(self, batch) -> None:
        """Run one passive-aggressive step per example, in order.

        Accepts a list of LabeledExample or an (X, labels) pair.
        """
        if isinstance(batch, tuple):
            xs, labels = batch
            xs = np.asarray(xs, dtype=np.float64)
            labels = np.asarray(labels)
            items = ((xs[i], int(labels[i])) for i in range(xs.shape[0]))
        else:
            items = ((ex.features, ex.label) for ex in batch)
        for x, y in items:
            if y not in (-1, 1):
                raise ValueError(f"label must be -1 or +1, got {y}")
            x = self._check_dim(np.asarray(x, dtype=np.float64))
            if self.dim is None:
                self.dim = x.shape[0]
                self._sv = np.zeros((0, self.dim))
            margin = y * self.score(x)
            if margin >= 1.0:
                continue
            kxx = self._self_kernel(x)
            if kxx <= 0.0:
                continue  # a zero vector under the linear kernel cannot move the margin
            beta = y * min(self.c, (1.0 - margin) / kxx)
            self._sv = np.vstack([self._sv, x[None, :]])
            self._beta = np.append(self._beta, beta)
            self._labels = np.append(self._labels, y)
            self._ages = np.append(self._ages, self._next_age)
            self._next_age += 1
            while self.budget is not None and len(self) > self.budget:
                self.evict()

    def evict(self) -> None:
        """Drop the support vector with the smallest beta^2 * K(sv, sv).

        Ties go to the oldest insertion. Only meaningful when the support
        set has overflowed its budget.
        """
        if len(self) == 0:
            raise ValueError("cannot evict from an empty model")
        if self.kernel == "linear":
            self_k = np.sum(self._sv * self._sv, axis=1)
        else:
            self_k = np.ones(len(self))
        weight = self._beta * self._beta * self_k
        order = np.lexsort((self._ages, weight))
        drop = order[0]
        keep = np.ones(len(self), dtype=bool)
        keep[drop] = False
        self._sv = self._sv[keep]
        self._beta = self._beta[keep]
        self._labels = self._labels[keep]
        self._ages = self._ages[keep]

    # -- snapshots -----------------------------------------------------

    def dumps(self) -> str:
        """Versioned ASCII snapshot; floats as hex so loads() is exact."""
        out = io.StringIO()
        out.write(f"{SNAPSHOT_MAGIC} {SNAPSHOT_VERSION}\n")
        out.write(f"kernel {self.kernel}\n")
        out.write(f"gamma {self.gamma.hex()}\n")
        out.write(f"c {self.c.hex()}\n")
        out.write(f"budget {self.budget if self.budget is not None else 'none'}\n")
        out.write(f"bias {self.bias.hex()}\n")
        out.write(f"dim {self.dim if self.dim is not None else 'none'}\n")
        out.write(f"next_age {self._next_age}\n")
        out.write(f"sv {len(self)}\n")
        for i in range(len(self)):
            fields = [str(int(self._labels[i])), float(self._beta[i]).hex(),
                      str(int(self._ages[i]))]
            fields.extend(v.hex() for v in self._sv[i])
            out.write(" ".join(fields) + "\n")
        return out.getvalue()

    @classmethod
    def loads(cls, text: str) -> "BudgetedSvm":
        lines = text.splitlines()
        magic, version = lines[0].rsplit(" ", 1)
        if magic != SNAPSHOT_MAGIC:
            raise ValueError(f"not a model snapshot (magic {magic!r})")
        if int(version) != SNAPSHOT_VERSION:
            raise ValueError(f"unsupported snapshot version {version}")

        def field(i: int, name: str) -> str:
            key, value = lines[i].split(" ", 1)
            if key != name:
                raise ValueError(f"expected {name!r} on line {i + 1}, got {key!r}")
            return value

        kernel = field(1, "kernel")
        gamma = float.fromhex(field(2, "gamma"))
        c = float.fromhex(field(3, "c"))
        budget_s = field(4, "budget")
        budget = None if budget_s == "none" else int(budget_s)
        bias = float.fromhex(field(5, "bias"))
        dim_s = field(6, "dim")
        model = cls(c=c, gamma=gamma, budget=budget, kernel=kernel, bias=bias)
        model._next_age = int(field(7, "next_age"))
        count = int(field(8, "sv"))
        if dim_s != "none":
            model.dim = int(dim_s)
            sv = np.zeros((count, model.dim))
            beta = np.zeros(count)
            labels = np.zeros(count, dtype=np.int64)
            ages = np.zeros(count, dtype=np.int64)
            for i in range(count):
                parts = lines[9 + i].split(" ")
                labels[i] = int(parts[0])
                beta[i] = float.fromhex(parts[1])
                ages[i] = int(parts[2])
                sv[i] = [float.fromhex(p) for p in parts[3:]]
            model._sv = sv
            model._beta = beta
            model._labels = labels
            model._ages = ages
        return model

    def save(self, path: str) -> None:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(self.dumps())

    @classmethod
    def load(cls, path: str) -> "BudgetedSvm":
        with open(path, "r", encoding="ascii") as fh:
            return cls.loads(fh.read())
