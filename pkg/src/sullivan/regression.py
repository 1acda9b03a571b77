"""Run model files against their `.expected.json` sidecars.

A sidecar holds a list of checks, each naming an operation and a block of the
model file::

    {"checks": [{"op": "obstruction", "target": "E", "o": 1, "basis": ["w1*"]}]}
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from . import gottlieb as gt
from .cdga import KsExtension, cohomology, compose_ks, pullback_model
from .errors import SullivanError
from .modelfile import load
from .splitting import split, verify_certificate

CORPUS_ENV = "SULLIVAN_CORPUS_DIR"


def default_corpus_dir() -> Path:
    env = os.environ.get(CORPUS_ENV)
    if env:
        return Path(env)
    return Path(str(resources.files("sullivan") / "corpus"))


@dataclass
class CheckResult:
    fixture: str
    op: str
    target: str
    passed: bool
    expected: object = None
    actual: object = None
    error: str | None = None


@dataclass
class FixtureResult:
    name: str
    checks: list = field(default_factory=list)
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.error is None and all(c.passed for c in self.checks)


def _actual(doc, check: dict):
    op = check["op"]
    tgt = check.get("target")
    if op == "valid":
        obj = _lookup(doc, tgt)
        return {"valid": obj.validate().ok}
    if op == "gottlieb":
        alg = doc.algebra(tgt)
        if "degree" in check:
            return {"basis": gt.gottlieb_group(alg, check["degree"]).duals()}
        return {"basis": gt.gottlieb_groups(alg).duals()}
    if op == "evaluation":
        ks = doc.extensions[tgt]
        if "degree" in check:
            return {"basis": gt.evaluation_subgroup(ks, check["degree"]).duals()}
        return {"basis": gt.evaluation_subgroups(ks).duals()}
    if op == "obstruction":
        obj = _lookup(doc, tgt)
        if isinstance(obj, KsExtension):
            rep = gt.obstruction_group(obj)
            return {"o": rep.o, "basis": rep.basis(), "consistent": rep.consistent}
        sub = gt.morphism_obstruction(obj)
        return {"o": sub.dim, "basis": sub.duals()}
    if op == "rg_map":
        return {"verdict": gt.is_rg_map(_lookup(doc, tgt))}
    if op == "wmap":
        return {"verdict": gt.is_w_map(_lookup(doc, tgt))}
    if op == "center":
        return {"basis": gt.homotopy_centers(doc.algebra(tgt)).duals()}
    if op == "cohomology":
        return {"dims": cohomology(doc.algebra(tgt), check["max_degree"]).dims}
    if op == "classify":
        return {"class": gt.classify_generator(doc.extensions[tgt], check["generator"])}
    if op == "gottlieb_homology":
        ks = doc.extensions[tgt]
        return {"dims": [gt.gottlieb_homology(ks, n).dim for n in check["degrees"]]}
    if op == "split":
        ks = doc.extensions[tgt]
        cert = split(ks, check.get("generators"))
        return {"selected": list(cert.selected), "verified": verify_certificate(cert).ok}
    if op == "compose":
        outer, inner = doc.extensions[check["outer"]], doc.extensions[check["inner"]]
        return {"equals": _same_extension(compose_ks(outer, inner), doc.extensions[check["with"]])}
    if op == "pullback":
        ks, f = doc.extensions[tgt], doc.morphisms[check["map"]]
        return {"equals": _same_extension(pullback_model(ks, f), doc.extensions[check["with"]])}
    raise ValueError(f"unknown check op {op!r}")


def _same_extension(a: KsExtension, b: KsExtension) -> bool:
    """Equal base and total differential; names and fiber order are ignored."""
    return a.base == b.base and a.total == b.total


def _lookup(doc, name):
    for table in (doc.extensions, doc.morphisms, doc.algebras):
        if name in table:
            return table[name]
    raise KeyError(name)


_META = {"op", "target", "degree", "max_degree", "generator", "generators", "degrees", "outer", "inner", "map", "with", "note"}


def run_check(doc, fixture: str, check: dict) -> CheckResult:
    expected = {k: v for k, v in check.items() if k not in _META}
    try:
        actual = _actual(doc, check)
    except (SullivanError, KeyError, ValueError) as exc:
        return CheckResult(fixture, check["op"], str(check.get("target")), False, expected, None, str(exc))
    actual = {k: v for k, v in actual.items() if k in expected}
    return CheckResult(fixture, check["op"], str(check.get("target")), actual == expected, expected, actual)


def run_fixture(path) -> FixtureResult:
    path = Path(path)
    name = path.stem
    sidecar = path.with_name(name + ".expected.json")
    res = FixtureResult(name)
    try:
        doc = load(path)
    except (SullivanError, OSError) as exc:
        res.error = str(exc)
        return res
    if not sidecar.exists():
        res.error = "missing sidecar"
        return res
    try:
        spec = json.loads(sidecar.read_text())
    except (OSError, ValueError) as exc:
        res.error = f"bad sidecar: {exc}"
        return res
    for check in spec.get("checks", []):
        res.checks.append(run_check(doc, name, check))
    return res


def run_corpus(directory=None, jobs: int = 1) -> list:
    """Run every fixture in ``directory``; ``jobs > 1`` uses worker processes."""
    directory = Path(directory) if directory else default_corpus_dir()
    paths = sorted(directory.glob("*.sul"))
    if jobs > 1 and len(paths) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(run_fixture, paths))
    return [run_fixture(p) for p in paths]
