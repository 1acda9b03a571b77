"""Command-line front end.

Exit codes: 0 success or positive verdict, 1 refused computation,
2 unreadable input (I/O, parse, unknown block name), 3 negative verdict.
"""

from __future__ import annotations

import json
import os
import sys
import time

import click

from . import gottlieb as gt
from .cdga import Morphism, SullivanAlgebra, cohomology
from .errors import ParseError, SullivanError
from .modelfile import load
from .regression import default_corpus_dir, run_corpus
from .splitting import split, verify_certificate

EXIT_REFUSED = 1
EXIT_INPUT = 2
EXIT_NEGATIVE = 3


class InputError(click.ClickException):
    exit_code = EXIT_INPUT


class Refusal(click.ClickException):
    exit_code = EXIT_REFUSED


class Emitter:
    """Writes either human text or line-delimited JSON records."""

    def __init__(self, command: str, fmt: str, target: str | None = None):
        self.command = command
        self.structured = fmt == "structured"
        self.target = target
        self.start = time.perf_counter()

    def text(self, line: str = ""):
        if not self.structured:
            click.echo(line)

    def record(self, **fields):
        if self.structured:
            rec = {"command": self.command}
            if self.target is not None:
                rec["target"] = self.target
            rec.update(fields)
            click.echo(json.dumps(rec, sort_keys=False))

    def degree(self, label: str, n: int, sub):
        basis = sub.duals()
        self.text(f"{label}_{n}: dim {sub.dim}" + (f"  basis {{{', '.join(basis)}}}" if basis else ""))
        self.record(degree=n, dim=sub.dim, basis=basis)

    def finish(self, verdict=None, **extra):
        if self.structured:
            rec = {"command": self.command}
            if self.target is not None:
                rec["target"] = self.target
            rec["verdict"] = verdict
            rec.update(extra)
            rec["timing"] = round(time.perf_counter() - self.start, 6)
            click.echo(json.dumps(rec))


def _load(path):
    try:
        return load(path)
    except ParseError as exc:
        raise InputError(f"{path}:{exc}") from None
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None


def _resolve(doc, name, kinds):
    tables = {"algebra": doc.algebras, "extension": doc.extensions, "morphism": doc.morphisms}
    for kind in kinds:
        if name in tables[kind]:
            return tables[kind][name]
    if "algebra" in kinds and name in doc.extensions:
        return doc.extensions[name].total
    raise InputError(f"no {' or '.join(kinds)} named {name!r}; available: {', '.join(doc.names()) or '(none)'}")


def _default_max_degree(alg: SullivanAlgebra) -> int:
    top_gen = max((g.degree for g in alg.generators), default=0)
    top_rel = max((g.degree + 1 for g, v in zip(alg.generators, alg.d) if v), default=0)
    return top_gen + top_rel


def _max_degree(em: Emitter, alg: SullivanAlgebra, given):
    if given is None:
        n = _default_max_degree(alg)
        em.text(f"max-degree: {n} (default: largest generator degree + largest relation degree)")
    else:
        n = given
        em.text(f"max-degree: {n}")
    return n


def _run(fn):
    try:
        return fn()
    except click.ClickException:
        raise
    except SullivanError as exc:
        raise Refusal(str(exc)) from None


FORMAT = click.option(
    "--format", "fmt", type=click.Choice(["text", "structured"]), default="text", show_default=True, help="Output style."
)
MAXDEG = click.option("--max-degree", type=click.IntRange(min=0), default=None, help="Largest degree to compute.")


@click.group()
@click.version_option(package_name="sullivan")
def main():
    """Rational Gottlieb groups and obstruction groups of maps from Sullivan models."""


@main.command()
@click.argument("file", type=click.Path(dir_okay=False))
@FORMAT
def validate(file, fmt):
    """Check every block of FILE (degrees, d^2 = 0, ordering, chain maps)."""
    em = Emitter("validate", fmt)
    doc = _load(file)
    for w in doc.warnings:
        em.text(str(w))
        em.record(warning=str(w))
    bad = False
    for kind, name in doc.order:
        obj = {"algebra": doc.algebras, "extension": doc.extensions, "morphism": doc.morphisms}[kind][name]
        rep = obj.validate()
        em.text(f"{kind} {name}: {'valid' if rep.ok else 'INVALID'}")
        for e in rep.errors:
            em.text(f"  error: {e}")
        for w in rep.warnings:
            em.text(f"  warning: {w}")
        em.record(block=name, kind=kind, verdict=rep.ok, errors=[str(e) for e in rep.errors], warnings=[str(w) for w in rep.warnings])
        bad = bad or not rep.ok
    em.finish(not bad)
    if bad:
        sys.exit(EXIT_NEGATIVE)


@main.command()
@click.argument("file", type=click.Path(dir_okay=False))
@click.argument("name")
@MAXDEG
@FORMAT
def gottlieb(file, name, max_degree, fmt):
    """Gottlieb groups G_n of algebra NAME for n up to the maximal degree."""
    doc = _load(file)
    alg = _resolve(doc, name, ["algebra"])
    em = Emitter("gottlieb", fmt, name)
    n_max = _max_degree(em, alg, max_degree)

    def go():
        total = gt.gottlieb_groups(alg, n_max)
        for n in sorted(total.per_degree):
            if total[n].names:
                em.degree("G", n, total[n])
        em.text(f"total dimension: {total.dim}")
        em.finish(None, max_degree=n_max, dim=total.dim)

    _run(go)


@main.command("eval-subgroup")
@click.argument("file", type=click.Path(dir_okay=False))
@click.argument("name")
@MAXDEG
@FORMAT
def eval_subgroup(file, name, max_degree, fmt):
    """Evaluation subgroups G_n(B, E; f) of extension NAME."""
    doc = _load(file)
    ks = _resolve(doc, name, ["extension"])
    em = Emitter("eval-subgroup", fmt, name)
    n_max = _max_degree(em, ks.total, max_degree)

    def go():
        total = gt.evaluation_subgroups(ks, n_max)
        for n in sorted(total.per_degree):
            if total[n].names:
                em.degree("G", n, total[n])
        em.text(f"total dimension: {total.dim}")
        em.finish(None, max_degree=n_max, dim=total.dim)

    _run(go)


@main.command()
@click.argument("file", type=click.Path(dir_okay=False))
@click.argument("name")
@click.option("--check-permutations", is_flag=True, help="Re-run under reorderings of equal-degree base generators.")
@FORMAT
def obstruction(file, name, check_permutations, fmt):
    """Obstruction group O(f) of extension or morphism NAME, with o(f) and the G-map verdict."""
    doc = _load(file)
    obj = _resolve(doc, name, ["extension", "morphism"])
    em = Emitter("obstruction", fmt, name)

    def go():
        if isinstance(obj, Morphism):
            sub = gt.morphism_obstruction(obj)
            for n in sorted(sub.per_degree):
                em.degree("O", n, sub[n])
            o = sub.dim
            em.text(f"o(f) = {o}")
            em.text(f"r.G-map: {'yes' if o == 0 else 'no'}")
            em.finish(o == 0, o=o)
            return
        rep = gt.obstruction_group(obj, check_permutations=check_permutations)
        em.text(f"base order: {', '.join(rep.order)}")
        for n in sorted(rep.per_degree):
            if rep.per_degree[n].names:
                em.degree("O", n, rep.per_degree[n])
        for d in rep.diagnostics:
            em.text("  " + d.describe())
        em.text(f"o(f) = {rep.o}")
        if rep.consistent:
            em.text("image-quotient cross-check: agrees in every degree")
        else:
            em.text(f"image-quotient cross-check: MISMATCH in degrees {rep.mismatches}")
        if check_permutations:
            if rep.permutation_discrepancies:
                for order, got in rep.permutation_discrepancies:
                    em.text(f"order {', '.join(order)} gives {{{', '.join(g + '*' for g in got)}}}")
            else:
                em.text("equal-degree reorderings: no discrepancy")
        em.text(f"r.G-map: {'yes' if rep.o == 0 else 'no'}")
        em.finish(
            rep.o == 0,
            o=rep.o,
            basis=rep.basis(),
            consistent=rep.consistent,
            order=list(rep.order),
            permutation_discrepancies=[[list(o), g] for o, g in rep.permutation_discrepancies],
        )

    _run(go)


@main.command("split")
@click.argument("file", type=click.Path(dir_okay=False))
@click.argument("name")
@click.option("--generators", default=None, help="Comma-separated base generators to split off (default: all eligible).")
@FORMAT
def split_cmd(file, name, generators, fmt):
    """Split odd spheres off the total space of extension NAME and verify the certificate."""
    doc = _load(file)
    ks = _resolve(doc, name, ["extension"])
    em = Emitter("split", fmt, name)
    gens = [g.strip() for g in generators.split(",") if g.strip()] if generators else None

    def go():
        cert = split(ks, gens)
        check = verify_certificate(cert)
        em.text(cert.describe())
        for chk, g, msg in check.failures:
            em.text(f"  FAIL {chk} at {g}: {msg}")
        em.text(f"certificate: {'verified' if check.ok else 'REJECTED'}")
        em.finish(
            check.ok,
            selected=list(cert.selected),
            witnesses={w: str(s) for w, s in zip(cert.selected, cert.witnesses)},
            factored={g: str(v) for g, v in zip(cert.factored.names, cert.factored.d) if v},
            failing=check.failing_generators(),
        )
        return check.ok

    if not _run(go):
        sys.exit(EXIT_NEGATIVE)


@main.command()
@click.argument("file", type=click.Path(dir_okay=False))
@click.argument("name")
@MAXDEG
@FORMAT
def center(file, name, max_degree, fmt):
    """Centers P_n of the homotopy Lie algebra of minimal algebra NAME."""
    doc = _load(file)
    alg = _resolve(doc, name, ["algebra"])
    em = Emitter("center", fmt, name)
    n_max = _max_degree(em, alg, max_degree)

    def go():
        total = gt.homotopy_centers(alg, n_max)
        for n in sorted(total.per_degree):
            if total[n].names:
                em.degree("P", n, total[n])
        em.finish(None, max_degree=n_max, dim=total.dim)

    _run(go)


@main.command()
@click.argument("file", type=click.Path(dir_okay=False))
@click.argument("name")
@FORMAT
def wmap(file, name, fmt):
    """Decide whether extension or morphism NAME maps centers into centers."""
    doc = _load(file)
    obj = _resolve(doc, name, ["extension", "morphism"])
    em = Emitter("wmap", fmt, name)

    def go():
        rep = gt.w_map_report(obj)
        for n, label in rep.failures:
            em.text(f"  degree {n}: image of {label} is not central in the base")
        em.text(f"W-map: {'yes' if rep.verdict else 'no'}")
        em.finish(rep.verdict, failures=[[n, s] for n, s in rep.failures])
        return rep.verdict

    if not _run(go):
        sys.exit(EXIT_NEGATIVE)


@main.command("cohomology")
@click.argument("file", type=click.Path(dir_okay=False))
@click.argument("name")
@MAXDEG
@FORMAT
def cohomology_cmd(file, name, max_degree, fmt):
    """Dimensions of H^k of algebra NAME for k up to the maximal degree."""
    doc = _load(file)
    alg = _resolve(doc, name, ["algebra"])
    em = Emitter("cohomology", fmt, name)
    n_max = _max_degree(em, alg, max_degree)

    def go():
        res = cohomology(alg, n_max)
        for k, (dim, reps) in enumerate(zip(res.dims, res.bases)):
            basis = [str(r) for r in reps]
            em.text(f"H^{k}: dim {dim}" + (f"  [{', '.join(basis)}]" if basis else ""))
            em.record(degree=k, dim=dim, basis=basis)
        em.finish(None, max_degree=n_max)

    _run(go)


@main.command()
@click.option("--dir", "directory", type=click.Path(file_okay=False), default=None, help="Corpus directory.")
@click.option("--jobs", type=click.IntRange(min=1), default=None, help="Worker processes (default: CPU count, at most 8).")
@FORMAT
def corpus(directory, jobs, fmt):
    """Run every fixture of the corpus against its expected-result sidecar."""
    em = Emitter("corpus", fmt)
    path = directory or str(default_corpus_dir())
    if not os.path.isdir(path):
        raise InputError(f"corpus directory {path} does not exist")
    if jobs is None:
        jobs = min(os.cpu_count() or 1, 8)
    results = run_corpus(path, jobs=jobs)
    failed = 0
    for fx in results:
        status = "PASS" if fx.passed else "FAIL"
        em.text(f"{status}  {fx.name}  ({len(fx.checks)} checks)")
        if fx.error:
            em.text(f"      error: {fx.error}")
        for c in fx.checks:
            if not c.passed:
                em.text(f"      {c.op} {c.target}: expected {c.expected}, got {c.error or c.actual}")
        em.record(fixture=fx.name, verdict=fx.passed, checks=len(fx.checks), error=fx.error)
        failed += not fx.passed
    em.text(f"{len(results) - failed}/{len(results)} fixtures passed")
    em.finish(failed == 0, fixtures=len(results), failed=failed)
    if failed or not results:
        sys.exit(EXIT_NEGATIVE)


if __name__ == "__main__":
    main()
