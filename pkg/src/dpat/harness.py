"""Batch experiment runner.

A run is described by an :class:`ExperimentConfig` (a JSON object on disk),
executed by :func:`run_experiment`, and emitted as CSV rows plus a JSON
report. Result rows depend only on the config; timing lives in a separate
``metadata`` block so reruns produce byte-identical CSV.
"""
from __future__ import annotations

import csv
import io
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

from . import __version__
from . import formula as fm
from .catalog import catalog_lookup
from .cdm import dichotomy_classify, fit_dimension_density
from .errors import ConfigError, DpatError, FormulaSyntaxError, TooFewPoints, UnknownCatalogEntry
from .evaluate import evaluate
from .finfield import additive_subgroup, full_subgroup, make_field, multiplicative_subgroup
from .mset import MembershipSet, write_atomic
from .numtheory import is_prime, primes_in_range
from .patterns import ap3_profile, bad_points, dense_points, sarkozy_profile, skew_corner_counts
from .util import as_fraction, dumps
from .zsets import ConstructibleSet, Hyperplane, ap3_counts_z, sarkozy_counts_z, skew_gap_scan_z

SCHEMA_VERSION = 1
FIELD_MODES = ("cdm", "roth", "sarkozy", "skew")
Z_MODES = ("zap3", "zsarkozy", "zskew")
MODES = FIELD_MODES + Z_MODES

COLUMNS = {
    "cdm": ("p", "n", "q", "count", "residue_class"),
    "roth": ("p", "x", "count", "class"),
    "sarkozy": ("p", "x", "count", "class"),
    "skew": ("p", "g", "count", "class"),
    "zap3": ("a", "count"),
    "zsarkozy": ("a", "count"),
    "zskew": ("g", "count", "contained"),
}


# ------------------------------------------------------------------ parsing helpers

def parse_range(text) -> Tuple[int, int]:
    """"5..499" or [5, 499] -> (5, 499), inclusive."""
    if isinstance(text, (list, tuple)) and len(text) == 2:
        lo, hi = text
    elif isinstance(text, str) and ".." in text:
        lo, hi = text.split("..", 1)
    else:
        raise ConfigError(f"expected a range like 5..499, got {text!r}")
    try:
        lo, hi = int(lo), int(hi)
    except ValueError:
        raise ConfigError(f"range bounds must be integers: {text!r}") from None
    if lo > hi:
        raise ConfigError(f"empty range {text!r}")
    return lo, hi


def parse_threshold(value, name: str, allow_zero: bool = False) -> Fraction:
    try:
        d = as_fraction(value)
    except (ValueError, ZeroDivisionError, TypeError):
        raise ConfigError(f"{name} must be a rational like 1/32, got {value!r}") from None
    if not (0 <= d <= 1 if allow_zero else 0 < d <= 1):
        raise ConfigError(f"{name} must lie in (0, 1], got {value}")
    return d


def _nonneg_int(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise ConfigError(f"{name} must be a non-negative integer, got {value!r}")
    return value


# ------------------------------------------------------------------ config

def load_config_doc(path) -> Dict[str, Any]:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    # file references are relative to the config's own directory
    base = os.path.dirname(os.path.abspath(path))
    for key in ("mset", "zset"):
        ref = doc.get(key)
        if isinstance(ref, str) and not ref.lstrip().startswith("{") and not os.path.isabs(ref):
            doc[key] = os.path.join(base, ref)
    return doc


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str
    # set sources (exactly one for the modes that need a set)
    set: Optional[str] = None
    formula: Optional[str] = None
    free: Optional[Tuple[str, ...]] = None
    mset: Optional[str] = None
    zset: Optional[Any] = None
    # field sweep
    p_range: Optional[str] = None
    primes: Optional[Tuple[int, ...]] = None
    degree: int = 1
    # pattern inputs
    subgroup: Optional[Dict[str, Any]] = None
    w_set: Optional[str] = None
    w_subgroup: Optional[Dict[str, Any]] = None
    p1: Tuple[int, ...] = (0, 1)
    p2: Tuple[int, ...] = (0, 1)
    allow_constant: bool = False
    # thresholds
    r: Optional[int] = None
    delta: Optional[str] = None
    delta_prime: Optional[str] = None
    ell: Optional[int] = None
    tolerance: float = 4.0
    residue_modulus: Optional[int] = None
    include_zero: bool = True
    # Z-side windows
    k: int = 1
    a: Optional[Tuple[int, ...]] = None
    a_range: Optional[str] = None
    gap_bound: Optional[int] = None
    n_max: Optional[int] = None
    kind: Optional[str] = None
    lo: Optional[int] = None
    hi: Optional[int] = None
    planes: Tuple[Tuple[Tuple[int, ...], int], ...] = ()
    # outputs
    out: Optional[str] = None
    json: Optional[str] = None
    jobs: int = 1

    # -- construction

    @classmethod
    def from_dict(cls, doc: Dict[str, Any]) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        if "mode" not in doc:
            raise ConfigError("config needs a mode")
        doc = dict(doc)
        for key in ("free", "primes", "p1", "p2", "a"):
            if doc.get(key) is not None:
                if not isinstance(doc[key], (list, tuple)):
                    raise ConfigError(f"{key} must be a list")
                doc[key] = tuple(doc[key])
        if doc.get("planes"):
            try:
                doc["planes"] = tuple((tuple(int(c) for c in pl["coeffs"]), int(pl.get("target", 0)))
                                      for pl in doc["planes"])
            except (KeyError, TypeError, ValueError):
                raise ConfigError("planes must be a list of {coeffs, target}") from None
        for key in ("delta", "delta_prime"):
            if doc.get(key) is not None:
                doc[key] = str(doc[key])
        cfg = cls(**doc)
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path, overrides: Optional[Dict[str, Any]] = None) -> "ExperimentConfig":
        doc = load_config_doc(path)
        doc.update({k: v for k, v in (overrides or {}).items() if v is not None})
        return cls.from_dict(doc)

    def to_dict(self) -> Dict[str, Any]:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "planes":
                v = [{"coeffs": list(c), "target": t} for c, t in v]
            elif isinstance(v, tuple):
                v = list(v)
            out[f.name] = v
        return out

    # -- validation

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; expected one of {', '.join(MODES)}")
        if self.mode in FIELD_MODES:
            self._validate_field_mode()
        else:
            self._validate_z_mode()
        if self.r is not None:
            _nonneg_int(self.r, "r")
        if self.ell is not None:
            _nonneg_int(self.ell, "ell")
        if self.delta is not None:
            parse_threshold(self.delta, "delta")
        if self.delta_prime is not None:
            parse_threshold(self.delta_prime, "delta_prime")
        if not isinstance(self.jobs, int) or self.jobs < 1:
            raise ConfigError("jobs must be a positive integer")
        if not isinstance(self.include_zero, bool):
            raise ConfigError("include_zero must be true or false")
        if not isinstance(self.tolerance, (int, float)) or self.tolerance <= 0:
            raise ConfigError("tolerance must be a positive number")

    def _validate_field_mode(self):
        sources = [s for s in (self.set, self.formula, self.mset) if s is not None]
        if len(sources) != 1:
            raise ConfigError("give exactly one of set, formula or mset")
        if self.mset is None:
            if self.p_range is None and not self.primes:
                raise ConfigError("missing field range: give p_range or primes")
            for p in self.field_primes():
                if not is_prime(p):
                    raise ConfigError(f"{p} is not prime")
            if not isinstance(self.degree, int) or self.degree < 1:
                raise ConfigError("degree must be a positive integer")
        try:
            if self.set is not None:
                catalog_lookup(self.set)
            if self.w_set is not None:
                catalog_lookup(self.w_set)
            if self.formula is not None:
                fm.parse(self.formula)
        except (UnknownCatalogEntry, FormulaSyntaxError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        for spec in (self.subgroup, self.w_subgroup):
            if spec is not None:
                _check_subgroup_spec(spec)
        if self.mode == "roth" and self.r is None and self.delta is None:
            raise ConfigError("roth mode needs r and/or delta")
        if self.mode == "sarkozy" and self.w_set is None and self.w_subgroup is None:
            raise ConfigError("sarkozy mode needs w_set or w_subgroup")
        if not self.p1 or not self.p2:
            raise ConfigError("gap maps p1 and p2 must be non-empty coefficient lists")
        if self.mode == "cdm" and (self.ell is None) != (self.delta is None):
            raise ConfigError("the dichotomy check needs both ell and delta")
        if self.residue_modulus is not None and (not isinstance(self.residue_modulus, int) or self.residue_modulus < 1):
            raise ConfigError("residue_modulus must be a positive integer")

    def _validate_z_mode(self):
        self.constructible()
        if not isinstance(self.k, int) or self.k < 1:
            raise ConfigError("k must be a positive integer")
        if self.mode in ("zap3", "zsarkozy"):
            if self.a is None and self.a_range is None:
                raise ConfigError(f"{self.mode} needs a or a_range")
            self.a_values()
        if self.mode == "zap3" and self.gap_bound is None:
            raise ConfigError("zap3 needs gap_bound")
        if self.mode == "zsarkozy":
            if self.n_max is None:
                raise ConfigError("zsarkozy needs n_max")
            if str(self.kind).upper() not in ("SF", "PR"):
                raise ConfigError("zsarkozy needs kind SF or PR")
        if self.mode == "zskew":
            if self.lo is None or self.hi is None or self.gap_bound is None:
                raise ConfigError("zskew needs lo, hi and gap_bound")
            for coeffs, _ in self.planes:
                if len(coeffs) != 3 or not any(coeffs):
                    raise ConfigError("zskew planes need three coefficients, not all zero")

    # -- derived inputs

    def field_primes(self) -> List[int]:
        if self.primes:
            if any(isinstance(p, bool) or not isinstance(p, int) for p in self.primes):
                raise ConfigError("primes must be integers")
            return sorted(set(self.primes))
        lo, hi = parse_range(self.p_range)
        return primes_in_range(lo, hi)

    def a_values(self) -> List[int]:
        if self.a is not None:
            return [int(v) for v in self.a]
        lo, hi = parse_range(self.a_range)
        return list(range(lo, hi + 1))

    def constructible(self) -> ConstructibleSet:
        try:
            if self.zset is not None:
                if isinstance(self.zset, dict):
                    return ConstructibleSet.from_dict(self.zset)
                return ConstructibleSet.from_json(self.zset)
            if self.set is not None:
                kind, _, k = self.set.partition(":")
                if kind.upper() in ("SF", "PR"):
                    return ConstructibleSet.predicate(kind.upper(), int(k or 1))
                if kind == "Z":
                    return ConstructibleSet.everything()
        except (OSError, ValueError, KeyError, TypeError, DpatError) as exc:
            raise ConfigError(f"bad constructible set: {exc}") from None
        raise ConfigError("Z-side modes need zset (JSON) or set SF, PR, SF:k, PR:k or Z")


def _check_subgroup_spec(spec):
    if not isinstance(spec, dict) or spec.get("kind") not in ("full", "trivial", "multiplicative", "additive"):
        raise ConfigError("subgroup needs kind full, trivial, multiplicative or additive")
    if spec["kind"] == "multiplicative" and not (isinstance(spec.get("d"), int) and spec["d"] >= 1):
        raise ConfigError("multiplicative subgroup needs an exponent d >= 1")
    if spec["kind"] == "additive" and not isinstance(spec.get("generators"), list):
        raise ConfigError("additive subgroup needs a generators list")


def _subgroup(spec, F):
    spec = spec or {"kind": "full"}
    kind = spec["kind"]
    if kind == "full":
        return full_subgroup(F)
    if kind == "trivial":
        return additive_subgroup(F, [])
    if kind == "multiplicative":
        return multiplicative_subgroup(F, spec["d"])
    return additive_subgroup(F, spec["generators"])


# ------------------------------------------------------------------ per-field jobs

def _source_set(cfg: ExperimentConfig, F, arity: int) -> MembershipSet:
    if cfg.mset is not None:
        s = MembershipSet.load(cfg.mset)
    else:
        if cfg.set is not None:
            entry = catalog_lookup(cfg.set)
            f, free = entry.formula, entry.free
        else:
            f = fm.parse(cfg.formula)
            free = tuple(cfg.free) if cfg.free else tuple(fm.free_vars(f))
        s = evaluate(f, F, free=free)
    if arity and s.arity != arity:
        raise ConfigError(f"{cfg.mode} mode needs a set of arity {arity}, got {s.arity}")
    return s


def _fields(cfg: ExperimentConfig):
    if cfg.mset is not None:
        return [MembershipSet.load(cfg.mset).field]
    return [make_field(p, cfg.degree) for p in cfg.field_primes()]


def _cdm_job(cfg, F):
    s = _source_set(cfg, F, 0)
    return {"p": F.p, "n": s.arity, "q": F.q, "count": s.cardinality}


def _roth_job(cfg, F):
    X = _source_set(cfg, F, 1)
    prof = ap3_profile(X, _subgroup(cfg.subgroup, F), F, include_zero=cfg.include_zero)
    rows = [(F.p, x, c, label) for x, c, label in prof.rows(cfg.r, cfg.delta)]
    info = {"p": F.p, "q": F.q, "size_X": X.cardinality}
    if cfg.r is not None:
        info["bad"] = len(bad_points(prof, cfg.r))
    if cfg.delta is not None:
        info["dense"] = len(dense_points(prof, cfg.delta))
    return rows, info


def _sarkozy_job(cfg, F):
    X = _source_set(cfg, F, 1)
    if cfg.w_set is not None:
        entry = catalog_lookup(cfg.w_set)
        W = evaluate(entry.formula, F, free=entry.free)
    else:
        W = MembershipSet.from_elements(F, _subgroup(cfg.w_subgroup, F).elements.tolist())
    prof = sarkozy_profile(X, W, F, include_zero=cfg.include_zero)
    rows = []
    for x, c, _ in prof.rows():
        label = "bad" if cfg.r is not None and c <= cfg.r else "ok"
        rows.append((F.p, x, c, label))
    counts = [c for _, _, c, _ in rows]
    info = {"p": F.p, "q": F.q, "size_X": X.cardinality, "size_W": W.cardinality,
            "min_count": min(counts) if counts else None, "max_count": max(counts) if counts else None}
    if cfg.r is not None:
        info["bad"] = sum(1 for row in rows if row[3] == "bad")
    return rows, info


def _skew_job(cfg, F):
    S = _source_set(cfg, F, 2)
    rep = skew_corner_counts(S, cfg.p1, cfg.p2, F, allow_constant=cfg.allow_constant,
                             include_zero=cfg.include_zero, delta_prime=cfg.delta_prime)
    rows = [(F.p, g, c, label) for g, c, label in rep.rows()]
    q3 = F.q ** 3
    info = {"p": F.p, "q": F.q, "size_S": S.cardinality,
            "min_count": int(rep.counts.min()), "min_density": str(Fraction(int(rep.counts.min()), q3))}
    if cfg.delta_prime is not None:
        info["exceptional"] = len(rep.exceptional)
    return rows, info


_JOBS = {"cdm": _cdm_job, "roth": _roth_job, "sarkozy": _sarkozy_job, "skew": _skew_job}


def _run_field_job(args):
    cfg, field_args = args
    return _JOBS[cfg.mode](cfg, make_field(*field_args))


# ------------------------------------------------------------------ reports

@dataclass
class RunReport:
    mode: str
    config: Dict[str, Any]
    columns: Tuple[str, ...]
    rows: List[tuple]
    summary: Dict[str, Any]
    conventions: Dict[str, Any]
    metadata: Dict[str, Any] = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow(["true" if v is True else "false" if v is False else v for v in row])
        return buf.getvalue()

    def result_dict(self) -> Dict[str, Any]:
        """Everything except the metadata block; deterministic for a given config."""
        return {
            "schema_version": SCHEMA_VERSION,
            "mode": self.mode,
            "config": self.config,
            "conventions": self.conventions,
            "columns": list(self.columns),
            "rows": [list(r) for r in self.rows],
            "summary": self.summary,
        }

    def to_json(self) -> str:
        return dumps({**self.result_dict(), "metadata": self.metadata})

    def write(self, csv_path: Optional[str] = None, json_path: Optional[str] = None) -> None:
        if csv_path:
            write_atomic(csv_path, self.to_csv())
        if json_path:
            write_atomic(json_path, self.to_json())


def _conventions(cfg: ExperimentConfig) -> Dict[str, Any]:
    conv = {"thresholds": {k: getattr(cfg, k) for k in ("r", "delta", "delta_prime", "ell")}}
    if cfg.mode in FIELD_MODES:
        conv["include_zero"] = cfg.include_zero
    elif cfg.mode == "zap3":
        conv["include_zero"] = False
    if cfg.mode == "zskew":
        conv["include_zero"] = True
    return conv


def _cdm_summary(cfg, infos):
    arity = infos[0]["n"] if infos else 1
    modulus = cfg.residue_modulus
    if modulus is None and cfg.set is not None:
        modulus = catalog_lookup(cfg.set).residue_modulus
    groups: Dict[str, list] = {}
    for info in infos:
        key = "all" if not modulus else f"{info['p'] % modulus} mod {modulus}"
        groups.setdefault(key, []).append(info)
    fits = {}
    for key in sorted(groups):
        series = [(i["q"], i["count"], arity) for i in groups[key]]
        try:
            fits[key] = fit_dimension_density(series, cfg.tolerance).to_dict()
        except TooFewPoints as exc:
            fits[key] = {"verdict": "TooFewPoints", "detail": str(exc), "points": len(series)}
    summary = {"residue_modulus": modulus, "fits": fits}
    if cfg.ell is not None and arity == 1:
        rep = dichotomy_classify([(i["q"], i["count"]) for i in infos], cfg.ell, cfg.delta)
        summary["dichotomy"] = rep.to_dict()
    return summary, modulus


def _field_summary(mode, infos):
    summary: Dict[str, Any] = {"per_field": infos}
    if mode == "roth":
        if infos and "bad" in infos[0]:
            summary["max_bad"] = max(i["bad"] for i in infos)
        if infos and "dense" in infos[0]:
            worst = min(infos, key=lambda i: Fraction(i["dense"], i["q"]))
            summary["min_dense_over_q"] = str(Fraction(worst["dense"], worst["q"]))
            fracs = [Fraction(i["dense"], i["size_X"]) for i in infos if i["size_X"]]
            summary["min_dense_over_size_X"] = str(min(fracs)) if fracs else None
    elif mode == "sarkozy":
        mins = [i["min_count"] for i in infos if i["min_count"] is not None]
        summary["min_count"] = min(mins) if mins else None
    elif mode == "skew":
        summary["min_density"] = str(min(Fraction(i["min_density"]) for i in infos)) if infos else None
        if infos and "exceptional" in infos[0]:
            summary["exceptional_total"] = sum(i["exceptional"] for i in infos)
    return summary


def _run_field_mode(cfg: ExperimentConfig):
    fields_ = _fields(cfg)
    tasks = [(cfg, (F.p, F.n)) for F in fields_]
    if cfg.jobs > 1 and len(tasks) > 1 and cfg.mset is None:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_run_field_job, tasks))
    else:
        results = [_JOBS[cfg.mode](cfg, F) for F in fields_]
    if cfg.mode == "cdm":
        summary, modulus = _cdm_summary(cfg, results)
        rows = [(i["p"], i["n"], i["q"], i["count"], i["p"] % modulus if modulus else "all") for i in results]
        return rows, summary
    rows = [row for part, _ in results for row in part]
    return rows, _field_summary(cfg.mode, [info for _, info in results])


def _run_z_mode(cfg: ExperimentConfig):
    C = cfg.constructible()
    if cfg.mode == "zap3":
        rows = [(a, ap3_counts_z(C, cfg.k, a, cfg.gap_bound)) for a in cfg.a_values()]
        counts = [c for _, c in rows]
        return rows, {"k": cfg.k, "gap_bound": cfg.gap_bound, "total": sum(counts), "max": max(counts),
                      "zero_count_a": sum(1 for c in counts if c == 0)}
    if cfg.mode == "zsarkozy":
        kind = cfg.kind.upper()
        rows = [(a, sarkozy_counts_z(C, kind, a, cfg.n_max)) for a in cfg.a_values()]
        counts = [c for _, c in rows]
        return rows, {"kind": kind, "n_max": cfg.n_max, "min": min(counts), "max": max(counts)}
    planes = [Hyperplane(c, t) for c, t in cfg.planes]
    scan = skew_gap_scan_z(C, cfg.k, cfg.lo, cfg.hi, planes, cfg.gap_bound)
    rows = [(r.g, r.count, r.contained) for r in scan]
    return rows, {"window": [cfg.lo, cfg.hi], "k": cfg.k, "gaps": len(rows),
                  "contained_gaps": sum(1 for r in scan if r.contained),
                  "nonempty_gaps": sum(1 for r in scan if r.count)}


def run_experiment(cfg: ExperimentConfig, write: bool = True) -> RunReport:
    """Run ``cfg``; when ``write`` is set, emit the configured CSV / JSON outputs."""
    if isinstance(cfg, dict):
        cfg = ExperimentConfig.from_dict(cfg)
    cfg.validate()
    started = time.time()
    t0 = time.perf_counter()
    if cfg.mode in FIELD_MODES:
        rows, summary = _run_field_mode(cfg)
    else:
        rows, summary = _run_z_mode(cfg)
    report = RunReport(
        mode=cfg.mode,
        config=cfg.to_dict(),
        columns=COLUMNS[cfg.mode],
        rows=rows,
        summary=summary,
        conventions=_conventions(cfg),
        metadata={"version": __version__, "started_unix": round(started, 3),
                  "wall_clock_seconds": round(time.perf_counter() - t0, 6)},
    )
    if write:
        report.write(cfg.out, cfg.json)
    return report
