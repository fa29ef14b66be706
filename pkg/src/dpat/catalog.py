"""Named definable sets used by the experiment harness.

Parametric entries take their argument either as keywords or after a colon:
``catalog_lookup("dth-powers", d=5)`` and ``catalog_lookup("dth-powers:5")``
are the same; ``polynomial-image:1,0,2`` is the image of 1 + 2y^2.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

from . import formula as fm
from .errors import UnknownCatalogEntry


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    formula: fm.Formula
    free: Tuple[str, ...]
    description: str
    residue_modulus: Optional[int] = None   # CDM fits split primes by p mod this

    @property
    def text(self) -> str:
        return fm.print_formula(self.formula)

    @property
    def arity(self) -> int:
        return len(self.free)


def _power(d: int) -> str:
    return "*".join(["y"] * d)


def _dth_powers(d=3) -> CatalogEntry:
    d = int(d)
    if d < 1:
        raise ValueError("d must be >= 1")
    return CatalogEntry(f"dth-powers:{d}", fm.parse(f"E y ({_power(d)} = x)"), ("x",),
                        f"image of y -> y^{d}", d if d > 1 else None)


def _polynomial_image(coeffs=(0, 1)) -> CatalogEntry:
    if isinstance(coeffs, str):
        coeffs = [c for c in coeffs.split(",") if c.strip()]
    coeffs = [int(c) for c in coeffs]
    if not coeffs:
        raise ValueError("polynomial-image needs at least one coefficient")
    parts = []
    for i, c in enumerate(coeffs):
        if c == 0 and len(coeffs) > 1:
            continue
        parts.append(str(c) if i == 0 else f"{c}*{_power(i)}")
    text = " + ".join(parts) if parts else "0"
    label = ",".join(str(c) for c in coeffs)
    return CatalogEntry(f"polynomial-image:{label}", fm.parse(f"E y ({text} = x)"), ("x",),
                        f"image of y -> sum c_i y^i, c = [{label}]")


_FIXED: Dict[str, Tuple[str, Tuple[str, ...], str, Optional[int]]] = {
    "squares": ("E y (y*y = x)", ("x",), "squares, including 0", 2),
    "nonzero-squares": ("E y (~(y = 0) & y*y = x)", ("x",), "nonzero squares", 2),
    "cubes": ("E y (y*y*y = x)", ("x",), "cubes, including 0", 3),
    "paley2": ("E z (~(z = 0) & z*z = x - y)", ("x", "y"), "pairs whose difference is a nonzero square", None),
    "diagonal": ("x = y", ("x", "y"), "the diagonal of k^2", None),
    "full": ("x = x", ("x",), "all of k", None),
}

_PARAMETRIC: Dict[str, Callable[..., CatalogEntry]] = {
    "dth-powers": _dth_powers,
    "polynomial-image": _polynomial_image,
}

CATALOG_NAMES = tuple(_FIXED) + tuple(_PARAMETRIC)


def catalog_lookup(name: str, **params) -> CatalogEntry:
    base, colon, arg = name.partition(":")
    if base in _FIXED:
        if colon or params:
            raise ValueError(f"catalog entry {base!r} takes no parameters")
        text, free, desc, modulus = _FIXED[base]
        return CatalogEntry(base, fm.parse(text), free, desc, modulus)
    if base in _PARAMETRIC:
        if colon:
            if not arg.strip():
                raise ValueError(f"catalog entry {base!r} needs an argument after ':'")
            key = "d" if base == "dth-powers" else "coeffs"
            params = {key: arg, **params}
        return _PARAMETRIC[base](**params)
    raise UnknownCatalogEntry(f"unknown catalog entry {name!r}; known: {', '.join(CATALOG_NAMES)}")
