"""Floating point operation accounting.

``CountedReal`` is a float that reports every addition, subtraction and
multiplication to a ``FlopLedger``. Running the stencil on numpy object
arrays of counted reals gives an exact, instrumented operation count from the
very code that computes the numbers. Negation is a sign flip and is free.
"""

from dataclasses import dataclass, field

import numpy as np

STAGES = (1, 2, 3, 4)

# Costs of the vector operations used by the solver, per complex entry.
DOT_FLOPS_PER_ENTRY = 8    # conj(a) * b (4 mul + 2 add) and 2 accumulations
AXPY_FLOPS_PER_ENTRY = 4   # y + alpha * x with real alpha


@dataclass
class FlopLedger:
    """Integer operation counters, split by class and by kernel stage."""

    counts: dict = field(default_factory=lambda: {s: {"add": 0, "mul": 0} for s in STAGES})
    stage: int = 1
    mat_vec_calls: int = 0

    def enter(self, stage):
        if stage not in STAGES:
            raise ValueError(f"unknown stage {stage!r}")
        self.stage = stage

    def tally(self, kind):
        self.counts[self.stage][kind] += 1

    def stage_total(self, stage):
        c = self.counts[stage]
        return c["add"] + c["mul"]

    @property
    def adds(self):
        return sum(c["add"] for c in self.counts.values())

    @property
    def muls(self):
        return sum(c["mul"] for c in self.counts.values())

    @property
    def total(self):
        return self.adds + self.muls

    stage1 = property(lambda self: self.stage_total(1))
    stage2 = property(lambda self: self.stage_total(2))
    stage3 = property(lambda self: self.stage_total(3))
    stage4 = property(lambda self: self.stage_total(4))

    def as_dict(self):
        return {
            "stages": {str(s): dict(c) for s, c in self.counts.items()},
            "add": self.adds,
            "mul": self.muls,
            "total": self.total,
            "mat_vec_calls": self.mat_vec_calls,
        }


class CountedReal:
    __slots__ = ("value", "ledger")

    def __init__(self, value, ledger):
        self.value = float(value)
        self.ledger = ledger

    def _v(self, other):
        return other.value if isinstance(other, CountedReal) else float(other)

    def _op(self, kind, value):
        self.ledger.tally(kind)
        return CountedReal(value, self.ledger)

    def __add__(self, other):
        return self._op("add", self.value + self._v(other))

    def __radd__(self, other):
        return self._op("add", self._v(other) + self.value)

    def __sub__(self, other):
        return self._op("add", self.value - self._v(other))

    def __rsub__(self, other):
        return self._op("add", self._v(other) - self.value)

    def __mul__(self, other):
        return self._op("mul", self.value * self._v(other))

    def __rmul__(self, other):
        return self._op("mul", self._v(other) * self.value)

    def __neg__(self):
        return CountedReal(-self.value, self.ledger)

    def __float__(self):
        return self.value

    def __repr__(self):
        return f"CountedReal({self.value!r})"


def counted(arr, ledger):
    """Wrap a float array into an object array of CountedReal."""
    arr = np.asarray(arr, dtype=np.float64)
    out = np.empty(arr.shape, dtype=object)
    flat = out.reshape(-1)
    for k, v in enumerate(arr.reshape(-1)):
        flat[k] = CountedReal(v, ledger)
    return out


def uncounted(arr):
    """Float values of an object array of CountedReal (or plain numbers)."""
    arr = np.asarray(arr, dtype=object)
    return np.array([float(v) for v in arr.reshape(-1)], dtype=np.float64).reshape(arr.shape)
