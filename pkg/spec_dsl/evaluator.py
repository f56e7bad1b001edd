"""
Spec Evaluator
==============
Executes validated declarations against the engine and answers the queries.

Declarations are built in order into one SpacetimeComplex. A declaration the
engine rejects is recorded as failed; anything referencing it fails with a
FailedDependency error, and evaluation goes on. Each query yields a
QueryRecord holding either (numerator, denominator, quotient) or an error.

Usage:
    records = eval_spec(parse(text).ast, jobs=4)
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

import numpy as np

from probe_helpers.engineLevers import DEFAULT_JOBS, MEMBERSHIP_TOL
from probe_engine import (
    BoundaryAssignment,
    KrausSet,
    SpacetimeComplex,
    compatibility,
    compose,
    cond_prob_boundary,
    cond_prob_probe,
    distribution_bc,
    expectation,
    generic_space,
    make_probe,
    null_probe_qm,
    permissive_probe,
    probe_from_kraus,
    qm_space,
    slice_null_probe,
    stat_probe,
    stat_space,
    state_bc,
    value,
)
from probe_engine.classical_model import StateSet
from probe_engine.errors import (
    DuplicateEntityError,
    FailedDependencyError,
    ProbeFrameworkError,
    RegionMismatchError,
    SpaceMismatchError,
    UnknownEntityError,
    ZeroDenominatorError,
    error_code,
)
from probe_engine.spacetime_complex import RegionKind
from utils.eventLogger import EvaluationEventLogger, get_global_logger
from .parser import Declaration, Name, SpecAst
from .results import QueryRecord

# Failures that turn into per-declaration / per-query error records
ENGINE_ERRORS = (ProbeFrameworkError, ValueError, LookupError, ArithmeticError, TypeError, np.linalg.LinAlgError)


def error_text(exc: BaseException) -> str:
    return f"{error_code(exc)}: {exc}"


def _text(value) -> str:
    if isinstance(value, Name):
        return value.text
    if isinstance(value, float):
        return f"{value:g}"
    return str(value)


def _flag(decl: Declaration, name: str, default: bool) -> bool:
    value = decl.get(name)
    return default if value is None else _text(value) == "true"


def _real_array(value) -> np.ndarray:
    return np.array(value, dtype=np.float64)


def _complex_array(value) -> np.ndarray:
    return np.array(value, dtype=np.complex128)


class SpecEvaluator:
    """
    Builds the declarations of one spec and evaluates its queries.

    Attributes:
        cx: The complex every declaration is registered in
        failures: Declaration name -> "<code>: <message>" for rejected declarations
    """

    def __init__(self, ast: SpecAst, tolerance: Optional[float] = None):
        self.ast = ast
        self.tol = MEMBERSHIP_TOL if tolerance is None else float(tolerance)
        self.cx = SpacetimeComplex()
        self.spaces: dict[str, str] = {}
        self.atoms: dict[str, str] = {}
        self.regions: dict = {}
        self.gluings: dict = {}
        self.probes: dict = {}
        self.bcs: dict = {}
        self.queries: list[Declaration] = []
        self.failures: dict[str, str] = {}
        self._built = False

    # =========================================================================
    # BUILDING
    # =========================================================================

    def build(self) -> "SpecEvaluator":
        if self._built:
            return self
        for decl in self.ast.declarations:
            if decl.key == "query":
                self.queries.append(decl)
                continue
            try:
                getattr(self, f"_build_{decl.key}")(decl)
            except ENGINE_ERRORS as exc:
                self.failures[decl.name] = error_text(exc)
        self._built = True
        return self

    def _lookup(self, table: dict, value, what: str):
        name = _text(value)
        if name in self.failures:
            raise FailedDependencyError(f"{what} '{name}' could not be built ({self.failures[name]})")
        try:
            return table[name]
        except KeyError:
            raise UnknownEntityError(f"unknown {what} '{name}'") from None

    def _build_space(self, decl: Declaration) -> None:
        backend = _text(decl.get("backend"))
        if backend == "quantum":
            space = qm_space(int(decl.get("n")), label=decl.name)
        elif backend == "classical":
            space = stat_space(StateSet(decl.name, tuple(_text(s) for s in decl.get("states"))))
        else:
            space = generic_space(
                decl.name,
                _real_array(decl.get("gram")),
                cone=_text(decl.get("cone", "orthant")),
                generators=decl.get("generators"),
            )
        self.cx.add_space(space)
        self.spaces[decl.name] = space.space_id

    def _build_atom(self, decl: Declaration) -> None:
        space_id = self._lookup(self.spaces, decl.get("space"), "space")
        self.atoms[decl.name] = self.cx.make_atom(decl.name, space_id).atom_id

    def _build_region(self, decl: Declaration) -> None:
        if decl.has("slice"):
            atom_id = self._lookup(self.atoms, decl.get("slice"), "atom")
            mirror = _text(decl.get("mirror", ""))
            region = self.cx.slice(atom_id, mirror_label=mirror)
            if mirror:
                self.atoms[mirror] = region.boundary[1]
        else:
            atom_ids = [self._lookup(self.atoms, a, "atom") for a in decl.get("atoms")]
            region = self.cx.make_region(decl.name, atom_ids)
        self.regions[decl.name] = region

    def _build_glue(self, decl: Declaration) -> None:
        left, right = (self._lookup(self.regions, r, "region") for r in decl.get("regions"))
        composite, gluing = self.cx.glue(left, right, label=decl.name)
        self.regions[decl.name] = composite
        self.gluings[decl.name] = gluing

    def _build_probe(self, decl: Declaration) -> None:
        region = self._lookup(self.regions, decl.get("region"), "region")
        name = decl.name
        if decl.has("kraus"):
            ops = _complex_array(decl.get("kraus"))
            ops = ops[np.newaxis] if ops.ndim == 2 else ops
            probe = probe_from_kraus(self.cx, region, KrausSet(tuple(ops)), label=name)
        elif decl.has("unitary"):
            probe = null_probe_qm(self.cx, region, unitary=_complex_array(decl.get("unitary")), label=name)
        elif decl.has("hamiltonian"):
            probe = null_probe_qm(
                self.cx,
                region,
                hamiltonian=_complex_array(decl.get("hamiltonian")),
                duration=float(decl.get("duration", 1.0)),
                label=name,
            )
        elif decl.has("kernel"):
            probe = stat_probe(self.cx, region, _real_array(decl.get("kernel")), _flag(decl, "primitive", True), name)
        elif decl.has("tensor"):
            probe = make_probe(self.cx, region, _real_array(decl.get("tensor")), _flag(decl, "primitive", False), name)
        elif decl.has("null"):
            probe = self._null_probe(region, name)
        else:
            first, second = (self._lookup(self.probes, p, "probe") for p in decl.get("compose"))
            gluing = self._lookup(self.gluings, decl.get("glue"), "glue")
            if gluing.composite != region.region_id:
                raise RegionMismatchError(f"probe '{name}' composes over '{_text(decl.get('glue'))}' but lives on another region")
            probe = compose(first, second, gluing, self.cx).relabel(name)
        self.probes[name] = probe

    def _null_probe(self, region, name: str):
        if region.kind == RegionKind.SLICE:
            return slice_null_probe(self.cx, region).relabel(name)
        backends = {self.cx.space_of(a).backend for a in region.boundary}
        if backends == {"quantum"}:
            return null_probe_qm(self.cx, region, label=name)
        if backends == {"classical"}:
            return permissive_probe(self.cx, region).relabel(name)
        raise RegionMismatchError(
            f"region '{region.label}' has no built-in null-probe for backends {sorted(backends)}; declare its tensor"
        )

    def _build_bc(self, decl: Declaration) -> None:
        atom_id = self._lookup(self.atoms, decl.get("atom"), "atom")
        space = self.cx.space_of(atom_id)
        if decl.has("matrix"):
            if space.backend != "quantum":
                raise SpaceMismatchError(f"bc '{decl.name}': a matrix needs a quantum space, '{space.label}' is {space.backend}")
            vector = state_bc(space, _complex_array(decl.get("matrix")), tol=self.tol)
        elif decl.has("weights"):
            vector = distribution_bc(space, _real_array(decl.get("weights")))
        else:
            vector = space.vector(_real_array(decl.get("coords")))
        self.bcs[decl.name] = (atom_id, vector)

    # =========================================================================
    # QUERIES
    # =========================================================================

    def _assignment(self, names, notes: list[str]) -> BoundaryAssignment:
        values = {}
        owners = {}
        for entry in names or []:
            name = _text(entry)
            atom_id, vector = self._lookup(self.bcs, entry, "bc")
            if atom_id in values:
                raise DuplicateEntityError(f"bcs '{owners[atom_id]}' and '{name}' sit on the same atom")
            values[atom_id] = vector
            owners[atom_id] = name
            if vector.positive is False:
                notes.append(f"bc '{name}' is not positive semidefinite")
        return BoundaryAssignment(values)

    def evaluate_query(self, decl: Declaration) -> QueryRecord:
        """Evaluate one query declaration into a QueryRecord (never raises on engine errors)."""
        kind = _text(decl.get("kind"))
        notes: list[str] = []
        try:
            probe = self._lookup(self.probes, decl.get("probe"), "probe")
            b = self._assignment(decl.get("bcs"), notes)
            if kind == "value":
                result = value(probe, b)
            elif kind == "compatibility":
                result = compatibility(probe, b)
            elif kind == "cond_prob":
                general = self._lookup(self.probes, decl.get("given"), "probe")
                result = cond_prob_probe(
                    probe, general, b, cx=self.cx, check_hierarchy=_flag(decl, "check", False), tol=self.tol
                )
            elif kind == "bc_prob":
                given = self._assignment(decl.get("given"), notes)
                result = cond_prob_boundary(probe, b, given, self.cx, tol=self.tol)
            else:
                general = self._lookup(self.probes, decl.get("given"), "probe")
                result = expectation(probe, general, b)
        except ZeroDenominatorError as exc:
            return QueryRecord(decl.name, kind, exc.numerator, exc.denominator, None, error_text(exc), tuple(notes))
        except ENGINE_ERRORS as exc:
            return QueryRecord(decl.name, kind, error=error_text(exc), diagnostics=tuple(notes))
        return QueryRecord(
            decl.name,
            kind,
            result.numerator,
            result.denominator,
            result.quotient,
            None,
            tuple(notes) + tuple(result.diagnostics),
        )

    def _timed_query(self, decl: Declaration, logger: Optional[EvaluationEventLogger]):
        query_logger = logger.start_query(decl.name) if logger is not None else None
        if query_logger is not None:
            query_logger.log_event("query_started")
        record = self.evaluate_query(decl)
        if query_logger is not None:
            detail = error_code_of(record) if record.failed else f"{record.quotient:.17g}"
            query_logger.log_event("query_finished", detail)
            query_logger.save()
        return record

    def run_queries(
        self,
        names: Optional[Sequence[str]] = None,
        jobs: int = DEFAULT_JOBS,
        event_logger: Optional[EvaluationEventLogger] = None,
    ) -> list[QueryRecord]:
        """
        Evaluate queries, optionally only the named ones, in declaration order.

        Args:
            names: Query names to keep (None = all)
            jobs: Worker threads; results keep declaration order either way
            event_logger: Timing logger (falls back to the global one)

        Raises:
            UnknownEntityError: a requested name is not a declared query
        """
        self.build()
        selected = self.queries
        if names is not None:
            declared = {q.name for q in self.queries}
            unknown = [n for n in names if n not in declared]
            if unknown:
                raise UnknownEntityError(f"unknown query '{unknown[0]}'")
            wanted = set(names)
            selected = [q for q in self.queries if q.name in wanted]

        logger = event_logger if event_logger is not None else get_global_logger()
        if logger is not None:
            logger.log_evaluation_start()
        if jobs > 1 and len(selected) > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                records = list(pool.map(lambda q: self._timed_query(q, logger), selected))
        else:
            records = [self._timed_query(q, logger) for q in selected]
        if logger is not None:
            logger.log_evaluation_end()
        return records


def error_code_of(record: QueryRecord) -> str:
    return record.error.split(":", 1)[0] if record.error else ""


def eval_spec(
    ast: SpecAst,
    tolerance: Optional[float] = None,
    queries: Optional[Sequence[str]] = None,
    jobs: int = DEFAULT_JOBS,
    event_logger: Optional[EvaluationEventLogger] = None,
) -> list[QueryRecord]:
    """
    Evaluate a validated spec.

    Args:
        ast: Declarations from parse()
        tolerance: Membership / quotient-bound tolerance (default MEMBERSHIP_TOL)
        queries: Only evaluate these query names
        jobs: Worker threads for independent queries
        event_logger: Optional timing logger

    Returns:
        One QueryRecord per query, in declaration order
    """
    return SpecEvaluator(ast, tolerance).run_queries(queries, jobs=jobs, event_logger=event_logger)
