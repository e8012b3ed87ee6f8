"""Reference fields used by the tests and the README."""
from __future__ import annotations

from dataclasses import dataclass

from .field import Field, build_field


@dataclass(frozen=True)
class Entry:
    name: str
    text: str
    window: tuple[float, float]
    expected: str  # Unique | NonUnique

    def build(self, **kw) -> Field:
        return build_field(self.text, self.window, **kw)


CORPUS = {
    e.name: e
    for e in [
        Entry("constant", "on (-inf,inf): 1", (-10.0, 10.0), "Unique"),
        Entry("constant-override", "on (-inf,inf): 1; at 0: 0", (-10.0, 10.0), "Unique"),
        Entry("sqrt-abs", "on (-inf,inf): abs(x)^0.5", (-10.0, 10.0), "NonUnique"),
        Entry("heaviside", "on (-inf,0]: 0; on (0,inf): 1", (-10.0, 10.0), "NonUnique"),
        Entry("one-plus-sqrt", "on (-inf,inf): 1 + abs(x)^0.5", (-10.0, 10.0), "Unique"),
        Entry("x-log-x", "on (-inf,inf): -x*log(abs(x))", (-2.0, 2.0), "Unique"),
        Entry("minus-sign", "on (-inf,inf): -sign(x)", (-10.0, 10.0), "Unique"),
        Entry("sign", "on (-inf,0): -1; on [0,inf): 1", (-10.0, 10.0), "NonUnique"),
        Entry("dense-1-2", "dense on (-10,10): {1, 2} measure builtin-fat-cantor", (-10.0, 10.0), "NonUnique"),
    ]
}

UNIQUE_STARTS = {
    "constant": 0.0,
    "constant-override": 0.0,
    "one-plus-sqrt": 0.0,
    "x-log-x": 0.5,
    "minus-sign": 1.0,
}
