"""Independent reference computations used as test oracles.

None of these call into trendlex's arithmetic; they are deliberately slow and
obvious.
"""
import math
from decimal import Decimal, localcontext

from trendlex.lexicon import LabelMatrix


def sse(xs, ys, slope, intercept, x0):
    return sum((y - (intercept + slope * (x - x0))) ** 2 for x, y in zip(xs, ys))


def grid_search_slope(xs, ys, points=21, tol=Decimal("1e-12")):
    """Minimize squared error over a (slope, intercept) grid, zooming in until the
    cell is narrower than ``tol``. SSE is convex, so the zoom cannot lose the minimum.

    Runs in 50-digit decimal arithmetic: near the optimum the SSE surface is
    flatter than double precision can resolve.
    """
    with localcontext() as ctx:
        ctx.prec = 50
        xs = [Decimal(repr(float(x))) for x in xs]
        ys = [Decimal(repr(float(y))) for y in ys]
        x0 = xs[len(xs) // 2]
        span = 4 * (max(abs(y) for y in ys) + 1)
        b_lo, b_hi, a_lo, a_hi = -span, span, -span, span
        steps = points - 1
        while True:
            db, da = (b_hi - b_lo) / steps, (a_hi - a_lo) / steps
            _, b, a = min(
                (sse(xs, ys, b_lo + i * db, a_lo + j * da, x0), b_lo + i * db, a_lo + j * da)
                for i in range(points) for j in range(points)
            )
            if db < tol and da < tol:
                return float(b)
            b_lo, b_hi, a_lo, a_hi = b - 2 * db, b + 2 * db, a - 2 * da, a + 2 * da


def naive_prevalence(labels: LabelMatrix, category: str, year: int, venues=None) -> float:
    j = list(labels.categories).index(category)
    total = hits = 0
    for r in range(len(labels.record_ids)):
        if int(labels.years[r]) != year:
            continue
        if venues and labels.venues[r] not in venues:
            continue
        total += 1
        hits += bool(labels.cells[r][j])
    return hits / total


def naive_raw_mass(labels: LabelMatrix, category: str, year: int) -> float:
    n = len(labels.record_ids)
    df = {}
    for row in labels.terms:
        for t in {t for found in row.values() for t in found}:
            df[t] = df.get(t, 0) + 1
    total = 0.0
    for r in range(n):
        if int(labels.years[r]) == year:
            for t, c in labels.terms[r].get(category, {}).items():
                total += c * math.log(1 + n / df[t])
    return total
