"""Random expression trees that are smooth and finite on the whole plane."""

from __future__ import annotations

import numpy as np

from isowreath.expr import evaluate, parse


def _leaf(rng) -> str:
    k = rng.integers(4)
    if k == 0:
        return "u"
    if k == 1:
        return "v"
    if k == 2:
        return f"{rng.uniform(-2, 2):.3f}"
    return "a"


def random_source(rng, depth: int) -> str:
    """Expression text of depth at most ``depth``; every operator keeps arguments in a safe domain."""
    if depth <= 1 or rng.random() < 0.15:
        return _leaf(rng)
    d = depth - 1
    k = rng.integers(14)
    x = random_source(rng, d)
    if k < 6:
        y = random_source(rng, d)
        op = "+-*"[k % 3]
        return f"({x} {op} {y})"
    if k == 6:
        return f"({x})/(2 + cos({random_source(rng, d)}))"
    if k == 7:
        return f"sin({x})"
    if k == 8:
        return f"cos({x})"
    if k == 9:
        return f"exp(sin({x}))"
    if k == 10:
        return f"log(1 + ({x})^2)"
    if k == 11:
        return f"sqrt(2 + sin({x}))"
    if k == 12:
        return f"tanh({x})" if rng.random() < 0.5 else f"sinh(sin({x}))"
    return f"({x})^{int(rng.integers(2, 4))}" if rng.random() < 0.7 else f"cosh(cos({x}))"


def central_differences(e, u: float, v: float, params, h: float = 1e-4) -> np.ndarray:
    """(du, dv, duu, duv, dvv) from central differences with step h."""
    f = lambda a, b: float(evaluate(e, a, b, params))  # noqa: E731
    f0 = f(u, v)
    fu = (f(u + h, v) - f(u - h, v)) / (2 * h)
    fv = (f(u, v + h) - f(u, v - h)) / (2 * h)
    fuu = (f(u + h, v) - 2 * f0 + f(u - h, v)) / h**2
    fvv = (f(u, v + h) - 2 * f0 + f(u, v - h)) / h**2
    fuv = (f(u + h, v + h) - f(u + h, v - h) - f(u - h, v + h) + f(u - h, v - h)) / (4 * h * h)
    return np.array([fu, fv, fuu, fuv, fvv])


def random_exprs(seed: int, n: int, depth: int = 6):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        src = random_source(rng, depth)
        yield src, parse(src), {"a": float(rng.uniform(-1, 1))}, rng.uniform(-1, 1, 2)
