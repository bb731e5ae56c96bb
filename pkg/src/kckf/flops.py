"""Analytical FLOP accounting for the two cubature prediction routes.

Convention: one addition, subtraction or multiplication is one FLOP and a
division is four. A dense product of an ``l x m`` and an ``m x n`` matrix
costs ``l m n`` multiplications and ``l (m - 1) n`` additions (each output
entry starts from its first product). The cost of ``Q_k`` is excluded from
both routes.

Every line below is assembled from :func:`matrix_product_flops` plus
explicit element-wise terms; no total is written down directly.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidArgumentError

#: weight of one division in FLOPs
DIV_WEIGHT = 4

NQ = 4
N_POINTS = 2 * NQ


@dataclass(frozen=True)
class FlopCount:
    mul: int = 0
    add: int = 0
    div: int = 0

    @property
    def total(self) -> int:
        return self.mul + self.add + DIV_WEIGHT * self.div

    def __add__(self, other: "FlopCount") -> "FlopCount":
        return FlopCount(self.mul + other.mul, self.add + other.add, self.div + other.div)

    def __mul__(self, k: int) -> "FlopCount":
        return FlopCount(k * self.mul, k * self.add, k * self.div)

    __rmul__ = __mul__

    def as_dict(self) -> dict[str, int]:
        return {"mul": self.mul, "add": self.add, "div": self.div, "total": self.total}


@dataclass(frozen=True)
class FlopLine:
    """One step of a prediction route and its cost."""

    name: str
    formula: str
    count: FlopCount


@dataclass(frozen=True)
class FlopBreakdown:
    route: str
    lines: tuple[FlopLine, ...]

    @property
    def count(self) -> FlopCount:
        out = FlopCount()
        for line in self.lines:
            out = out + line.count
        return out

    @property
    def total(self) -> int:
        return self.count.total

    def line(self, name: str) -> FlopLine:
        for item in self.lines:
            if item.name == name:
                return item
        raise KeyError(name)

    def as_dict(self) -> dict:
        return {
            "route": self.route,
            "lines": [{"name": x.name, "formula": x.formula, **x.count.as_dict()} for x in self.lines],
            **self.count.as_dict(),
        }


def matrix_product_flops(l: int, m: int, n: int) -> FlopCount:
    """Cost of an ``(l, m) @ (m, n)`` product."""
    for d in (l, m, n):
        if int(d) != d or d < 1:
            raise InvalidArgumentError("matrix dimensions must be positive integers")
    return FlopCount(mul=l * m * n, add=l * (m - 1) * n)


def elementwise(n: int, *, mul: int = 0, add: int = 0) -> FlopCount:
    """``mul``/``add`` operations on each of ``n`` entries."""
    return FlopCount(mul=n * mul, add=n * add)


def _weight_1_over_2nq() -> FlopCount:
    # 2 * nq, then its reciprocal
    return FlopCount(mul=1, div=1)


def ckf_prediction_flops() -> FlopBreakdown:
    """Literal CKF prediction: draw points, propagate each, average, scatter."""
    vec = NQ
    mat = NQ * NQ
    points = N_POINTS * (matrix_product_flops(NQ, NQ, 1) + elementwise(vec, add=1))
    propagate = N_POINTS * matrix_product_flops(NQ, NQ, 1)
    mean = (N_POINTS - 1) * elementwise(vec, add=1) + _weight_1_over_2nq() + elementwise(vec, mul=1)
    scatter = (
        N_POINTS * matrix_product_flops(NQ, 1, NQ)  # p_i p_i^T
        + (N_POINTS - 1) * elementwise(mat, add=1)  # sum of the outer products
        + _weight_1_over_2nq()
        + elementwise(mat, mul=1)  # scale by 1/(2 nq)
        + matrix_product_flops(NQ, 1, NQ)  # mean mean^T
        + elementwise(mat, add=1)  # subtract it
        + elementwise(mat, add=1)  # + Q
    )
    return FlopBreakdown(
        "ckf",
        (
            FlopLine("cubature points", "S e_i + q, i = 1..8", points),
            FlopLine("propagated points", "F X_i, i = 1..8", propagate),
            FlopLine("predicted mean", "sum_i X*_i / (2 nq)", mean),
            FlopLine("predicted covariance", "sum_i X*_i X*_i^T / (2 nq) - q q^T + Q", scatter),
        ),
    )


def kckf_prediction_flops() -> FlopBreakdown:
    """Simplified prediction: ``M = F S``, ``F q``, ``M e_i + q``, ``M M^T + Q``."""
    vec = NQ
    mat = NQ * NQ
    return FlopBreakdown(
        "kckf",
        (
            FlopLine("propagated factor", "M = F S", matrix_product_flops(NQ, NQ, NQ)),
            FlopLine("predicted mean", "F q", matrix_product_flops(NQ, NQ, 1)),
            FlopLine(
                "cubature points",
                "M e_i + q, i = 1..8",
                N_POINTS * (matrix_product_flops(NQ, NQ, 1) + elementwise(vec, add=1)),
            ),
            FlopLine(
                "predicted covariance",
                "M M^T + Q",
                matrix_product_flops(NQ, NQ, NQ) + elementwise(mat, add=1),
            ),
        ),
    )


def reduction_ratio() -> float:
    """Fraction of prediction FLOPs the simplified route saves."""
    return 1.0 - kckf_prediction_flops().total / ckf_prediction_flops().total


def format_breakdown(b: FlopBreakdown) -> str:
    rows = [f"{b.route.upper()} prediction"]
    rows.append(f"  {'step':<22}{'formula':<42}{'mul':>5}{'add':>5}{'div':>5}{'FLOPs':>7}")
    for x in b.lines:
        c = x.count
        rows.append(f"  {x.name:<22}{x.formula:<42}{c.mul:>5}{c.add:>5}{c.div:>5}{c.total:>7}")
    c = b.count
    rows.append(f"  {'total':<64}{c.mul:>5}{c.add:>5}{c.div:>5}{c.total:>7}")
    return "\n".join(rows)


__all__ = [
    "DIV_WEIGHT",
    "FlopBreakdown",
    "FlopCount",
    "FlopLine",
    "ckf_prediction_flops",
    "elementwise",
    "format_breakdown",
    "kckf_prediction_flops",
    "matrix_product_flops",
    "reduction_ratio",
]
