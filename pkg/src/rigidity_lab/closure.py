"""Rewrite engine over sets of strongly preserved distances.

A :class:`PreservedSet` starts from seed distances and grows by six rules:

========  ==========================================================
DOUBLE    r below conv gives 2r
MANY      r below conv gives j*r for an explicit j with j*r < conv
DIFF      r1 > r2 below conv gives the floor remainder r1 - k*r2
OY        r1 - r2 <= 2 r2 < r1 + r2 gives r1 - r2
BAR       r below 2/3 conv gives the critical lens distance r-bar
FRAC      periodic geodesic flow of period one: frac(n*r) below inj
========  ==========================================================

Every rule application is recorded as a :class:`DerivationStep`. A
:class:`DerivationCertificate` is a replayable list of steps from the seeds
down to a distance below epsilon. :func:`verify_certificate` rechecks every
precondition and recomputes every output.

Exact inputs are handled in exact arithmetic in Q(sqrt d). BAR outputs are
certified intervals. Preconditions on intervals must hold for every point of
the interval; an undecidable comparison raises :class:`RefinementError`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (BudgetExhaustedError, DiagnosticsError, FieldMismatchError,
                     ParameterError, PreconditionError, RationalityReport, RefinementError)
from .lens import rbar
from .manifolds import ManifoldModel, model_from_id
from .scalars import (INF, Exact, Interval, Scalar, compare, scalar_from_json,
                      scalar_to_json)

SCHEMA = "rigidity-lab/v1"
RULES = ("DOUBLE", "MANY", "DIFF", "OY", "BAR", "FRAC")
LEMMAS = {
    "DOUBLE": "Twice: doubling a strongly preserved distance below conv",
    "MANY": "Many: integer multiples below conv",
    "DIFF": "Difference: floor remainder of two strongly preserved distances",
    "OY": "oy: single difference under r1 - r2 <= 2 r2 < r1 + r2",
    "BAR": "bar: critical lens distance of a two-point homogeneous space",
    "FRAC": "Frac: fractional part of a multiple under a period-one geodesic flow",
}
REGULARITIES = ("surjective", "continuous")
DEFAULT_STEP_BUDGET = 10_000
DEFAULT_FRAC_CAP = 10**6
DEFAULT_BAR_TOL = 1e-10


def _lt(a, b) -> bool:
    return compare(a, b) < 0


def _positive(x) -> bool:
    return compare(x, 0) > 0


@dataclass(frozen=True)
class ClosureContext:
    """Facts about the space that rule preconditions may consult.

    ``model`` names the model space whose lenses back the BAR rule; it is
    only needed when ``two_point_homogeneous`` is set.
    """

    conv: object = INF
    inj: object = INF
    two_point_homogeneous: bool = False
    periodic_period_one: bool = False
    map_regularity: str = "surjective"
    model: str | None = None
    bar_tol: float = DEFAULT_BAR_TOL

    def __post_init__(self):
        if self.map_regularity not in REGULARITIES:
            raise ParameterError(
                f"map_regularity must be one of {REGULARITIES}, got {self.map_regularity!r}")
        for name in ("conv", "inj"):
            value = getattr(self, name)
            if value is not INF:
                if isinstance(value, (int, float, Fraction)):
                    value = Exact(Fraction(value))
                    object.__setattr__(self, name, value)
                if not _positive(value):
                    raise ParameterError(f"{name} must be positive")
        if self.conv is not INF and self.inj is not INF:
            try:
                too_big = compare(self.conv, self.inj * Fraction(1, 2)) > 0
            except RefinementError:
                # overlapping enclosures, e.g. conv = inj/2 = pi/2 on the unit sphere
                too_big = False
            if too_big:
                raise ParameterError("conv must not exceed inj / 2")
        if self.model is not None:
            M = model_from_id(self.model)
            want = M.conv
            if (want is INF) != (self.conv is INF) or (
                    want is not INF and abs(float(want) - float(self.conv)) > 1e-12 * float(want)):
                raise ParameterError(f"conv {self.conv} does not match model {M.id} ({want})")

    @classmethod
    def for_model(cls, M: ManifoldModel, map_regularity: str = "surjective",
                  periodic_period_one: bool = False, bar_tol: float = DEFAULT_BAR_TOL):
        def conv_scalar(radius):
            return INF if radius is INF else radius.to_scalar()
        return cls(conv_scalar(M.conv), conv_scalar(M.inj), M.two_point_homogeneous,
                   periodic_period_one, map_regularity, M.id, bar_tol)

    @property
    def bar_limit(self):
        return INF if self.conv is INF else self.conv * Fraction(2, 3)

    def to_json(self) -> dict:
        return {"conv": scalar_to_json(self.conv), "inj": scalar_to_json(self.inj),
                "two_point_homogeneous": self.two_point_homogeneous,
                "periodic_period_one": self.periodic_period_one,
                "map_regularity": self.map_regularity, "model": self.model,
                "bar_tol": self.bar_tol}

    @classmethod
    def from_json(cls, obj: dict) -> "ClosureContext":
        return cls(scalar_from_json(obj.get("conv", "inf")), scalar_from_json(obj.get("inj", "inf")),
                   bool(obj.get("two_point_homogeneous", False)),
                   bool(obj.get("periodic_period_one", False)),
                   obj.get("map_regularity", "surjective"), obj.get("model"),
                   float(obj.get("bar_tol", DEFAULT_BAR_TOL)))


@dataclass(frozen=True)
class Entry:
    value: Scalar
    origin: str  # "seed" or a rule name
    parents: tuple[int, ...] = ()
    step: "DerivationStep | None" = None


class PreservedSet:
    """Distances known to be strongly preserved, each with its provenance."""

    def __init__(self, ctx: ClosureContext, seeds):
        self.ctx = ctx
        self.entries: list[Entry] = []
        self._index: dict = {}
        for s in seeds:
            s = _as_scalar(s)
            if not _positive(s):
                raise PreconditionError(f"seed {s} is not positive")
            self._add(Entry(s, "seed"))

    def _add(self, entry: Entry) -> int:
        if entry.value in self._index:
            return self._index[entry.value]
        self._index[entry.value] = len(self.entries)
        self.entries.append(entry)
        return len(self.entries) - 1

    def __contains__(self, value) -> bool:
        return value in self._index

    def __len__(self) -> int:
        return len(self.entries)

    def index(self, value) -> int:
        return self._index[value]

    def values(self) -> list:
        return [e.value for e in self.entries]

    def record(self, step: "DerivationStep") -> int:
        parents = tuple(self._index[v] for v in step.inputs)
        return self._add(Entry(step.output, step.rule, parents, step))


@dataclass(frozen=True)
class DerivationStep:
    rule: str
    inputs: tuple
    output: Scalar
    lemma: str
    params: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"rule": self.rule, "inputs": [scalar_to_json(v) for v in self.inputs],
                "output": scalar_to_json(self.output), "lemma": self.lemma,
                "params": dict(self.params)}

    @classmethod
    def from_json(cls, obj: dict) -> "DerivationStep":
        return cls(obj["rule"], tuple(scalar_from_json(v) for v in obj["inputs"]),
                   scalar_from_json(obj["output"]), obj.get("lemma", LEMMAS.get(obj["rule"], "")),
                   dict(obj.get("params", {})))


@dataclass(frozen=True)
class Inapplicable:
    """A rule did not fire. ``zero`` marks a DIFF whose remainder vanished."""

    rule: str
    reason: str
    zero: bool = False

    def __bool__(self):
        return False


def _as_scalar(x):
    if isinstance(x, (Exact, Interval)):
        return x
    if isinstance(x, (int, Fraction)):
        return Exact(Fraction(x))
    raise TypeError(f"not a scalar: {x!r}")


def _float_down(q: Fraction) -> float:
    f = float(q)
    return math.nextafter(f, -math.inf) if Fraction(f) > q else f


def _float_up(q: Fraction) -> float:
    f = float(q)
    return math.nextafter(f, math.inf) if Fraction(f) < q else f


def _bar_enclosure(ctx: ClosureContext, r, tol: float) -> Interval:
    box = r.enclose()
    r_lo, r_hi = _float_down(box.lo), _float_up(box.hi)
    M = model_from_id(ctx.model)
    res = rbar(M, r_lo, tol=tol, r_hi=r_hi if r_hi > r_lo else None, strict=False)
    out = Interval(Fraction(res.lo), Fraction(res.hi))
    if not (out.lo > box.hi and out.hi < 2 * box.lo):
        raise DiagnosticsError(f"r-bar enclosure {out} escapes ({r}, 2*{r})")
    return out


def apply_rule(state: PreservedSet, rule: str, inputs, **params):
    """Apply ``rule`` to ``inputs`` and record the output in ``state``.

    Returns the :class:`DerivationStep`, or :class:`Inapplicable` with a reason.
    Parameters: ``j`` for MANY, ``n`` for FRAC, optional ``tol`` for BAR.
    """
    ctx = state.ctx
    inputs = tuple(_as_scalar(v) for v in inputs)
    step = _evaluate(ctx, state, rule, inputs, params)
    if isinstance(step, DerivationStep):
        state.record(step)
    return step


def _evaluate(ctx, state, rule, inputs, params):
    def no(reason, zero=False):
        return Inapplicable(rule, reason, zero)

    if rule not in RULES:
        raise ParameterError(f"unknown rule {rule!r}; expected one of {RULES}")
    arity = 2 if rule in ("DIFF", "OY") else 1
    if len(inputs) != arity:
        return no(f"{rule} takes {arity} input(s), got {len(inputs)}")
    for v in inputs:
        if v not in state:
            return no(f"{v} is not in the preserved set")
        if not _positive(v):
            return no(f"{v} is not positive")
        if not _lt(v, ctx.conv):
            return no(f"{LEMMAS[rule]}: input {v} is not below conv = {ctx.conv}")
    out_params: dict = {}
    try:
        if rule == "DOUBLE":
            out = inputs[0] * 2
        elif rule == "MANY":
            j = params.get("j")
            if not isinstance(j, int) or isinstance(j, bool) or j < 1:
                return no("MANY needs an integer multiplier j >= 1")
            out = inputs[0] * j
            if not _lt(out, ctx.conv):
                return no(f"{LEMMAS[rule]}: {j}*{inputs[0]} is not below conv = {ctx.conv}")
            out_params = {"j": j}
        elif rule == "DIFF":
            r1, r2 = inputs
            if not compare(r1, r2) > 0:
                return no(f"DIFF needs r1 > r2, got {r1} and {r2}")
            k = (r1 / r2).floor()
            out = r1 - r2 * k
            out_params = {"k": k}
            if compare(out, 0) == 0:
                return no(f"remainder of {r1} by {r2} is 0 (commensurable)", zero=True)
        elif rule == "OY":
            r1, r2 = inputs
            diff = r1 - r2
            if not (compare(diff, r2 * 2) <= 0 and _lt(r2 * 2, r1 + r2)):
                return no(f"{LEMMAS[rule]}: chain r1 - r2 <= 2 r2 < r1 + r2 fails")
            out = diff
        elif rule == "BAR":
            r = inputs[0]
            if not ctx.two_point_homogeneous:
                return no("BAR needs a two-point homogeneous space")
            if ctx.model is None:
                return no("BAR needs a model id for the r-bar oracle")
            if not _lt(r, ctx.bar_limit):
                return no(f"{LEMMAS[rule]}: {r} is not below 2/3 conv")
            tol = float(params.get("tol", ctx.bar_tol))
            out = _bar_enclosure(ctx, r, tol)
            out_params = {"tol": tol}
        else:  # FRAC
            r = inputs[0]
            n = params.get("n")
            if not ctx.periodic_period_one:
                return no("FRAC needs a periodic geodesic flow of period one")
            if not isinstance(r, Exact):
                return no("FRAC needs an exact input (irrationality of an interval is undecidable)")
            if r.is_rational:
                return no(f"FRAC needs an irrational input, {r} is rational")
            if not isinstance(n, int) or isinstance(n, bool) or n < 1:
                return no("FRAC needs an integer n >= 1")
            nr = r * n
            out = nr - nr.floor()
            if not _lt(out, ctx.inj):
                return no(f"frac({n}*{r}) = {out} is not below inj = {ctx.inj}")
            out_params = {"n": n}
    except FieldMismatchError as exc:
        return no(str(exc))
    return DerivationStep(rule, inputs, out, LEMMAS[rule], out_params)


@dataclass
class DerivationCertificate:
    seeds: list
    steps: list
    epsilon: Scalar
    achieved: Scalar
    context: ClosureContext
    strategy: str = ""

    @property
    def complete(self) -> bool:
        return _lt(self.achieved, self.epsilon)

    def outputs(self) -> list:
        return [s.output for s in self.steps]

    def to_json(self) -> dict:
        return {"schema": SCHEMA, "strategy": self.strategy,
                "seeds": [scalar_to_json(s) for s in self.seeds],
                "context": self.context.to_json(),
                "steps": [s.to_json() for s in self.steps],
                "epsilon": scalar_to_json(self.epsilon),
                "achieved": scalar_to_json(self.achieved),
                "achieved_float": float(self.achieved)}

    @classmethod
    def from_json(cls, obj: dict) -> "DerivationCertificate":
        if obj.get("schema", SCHEMA) != SCHEMA:
            raise ParameterError(f"unsupported certificate schema {obj.get('schema')!r}")
        return cls([scalar_from_json(s) for s in obj["seeds"]],
                   [DerivationStep.from_json(s) for s in obj["steps"]],
                   scalar_from_json(obj["epsilon"]), scalar_from_json(obj["achieved"]),
                   ClosureContext.from_json(obj.get("context", {})), obj.get("strategy", ""))


def _certificate(state: PreservedSet, target: int, eps, strategy: str) -> DerivationCertificate:
    """The steps on the provenance DAG below entry ``target``, in derivation order."""
    needed: set[int] = set()
    stack = [target]
    while stack:
        i = stack.pop()
        if i not in needed:
            needed.add(i)
            stack.extend(state.entries[i].parents)
    steps = [state.entries[i].step for i in sorted(needed) if state.entries[i].step is not None]
    seeds = [e.value for e in state.entries if e.origin == "seed"]
    return DerivationCertificate(seeds, steps, eps, state.entries[target].value, state.ctx, strategy)


def _smallest(state: PreservedSet) -> int:
    best = 0
    for i, e in enumerate(state.entries):
        if compare(e.value, state.entries[best].value) < 0:
            best = i
    return best


def _common_field(values) -> int:
    fields = {v.d for v in values if isinstance(v, Exact) and v.d != 1}
    if len(fields) > 1:
        raise FieldMismatchError(
            f"seeds lie in different quadratic fields Q(sqrt d) for d in {sorted(fields)}")
    return fields.pop() if fields else 1


def _require(result, what: str):
    if isinstance(result, Inapplicable):
        raise PreconditionError(f"{what}: {result.reason}")
    return result


def derive_to_epsilon(seeds, ctx: ClosureContext, eps, strategy: str = "A",
                      budget: int = DEFAULT_STEP_BUDGET,
                      frac_cap: int = DEFAULT_FRAC_CAP) -> DerivationCertificate:
    """Derive a strongly preserved distance below ``eps`` from ``seeds``.

    Strategies: ``A`` runs the Euclidean algorithm with DIFF on the two
    largest seeds; ``B`` alternates BAR and OY from the smallest seed and
    finishes with DIFF; ``C`` searches n with frac(n*r) < eps via FRAC;
    ``exhaustive`` applies every rule breadth first.

    Raises :class:`RationalityReport` when the seeds are commensurable (A) or
    all rational (C), and :class:`BudgetExhaustedError` when ``budget`` steps
    do not suffice. Both carry the partial certificate.
    """
    seeds = [_as_scalar(s) for s in seeds]
    if not seeds:
        raise PreconditionError("at least one seed is required")
    eps = _as_scalar(eps)
    if not _positive(eps):
        raise PreconditionError("epsilon must be positive")
    _common_field(seeds)
    state = PreservedSet(ctx, seeds)
    best = _smallest(state)
    if _lt(state.entries[best].value, eps):
        return _certificate(state, best, eps, strategy)
    runner = {"A": _strategy_a, "B": _strategy_b, "C": _strategy_c,
              "exhaustive": _strategy_exhaustive}.get(strategy)
    if runner is None:
        raise ParameterError(f"unknown strategy {strategy!r}")
    return runner(state, eps, budget, frac_cap)


def _strategy_a(state, eps, budget, _frac_cap):
    if len(state) < 2:
        raise PreconditionError("strategy A needs two seeds")
    order = sorted(range(len(state)), key=lambda i: float(state.entries[i].value), reverse=True)
    s_prev, s_cur = state.entries[order[0]].value, state.entries[order[1]].value
    for _ in range(budget):
        step = apply_rule(state, "DIFF", (s_prev, s_cur))
        if isinstance(step, Inapplicable):
            partial = _certificate(state, state.index(s_cur), eps, "A")
            if step.zero:
                raise RationalityReport(
                    f"seeds are commensurable: {s_prev} is an integer multiple of {s_cur}; "
                    "every derivable distance is a multiple of a common unit", partial)
            raise PreconditionError(f"strategy A stalled: {step.reason}")
        s_prev, s_cur = s_cur, step.output
        if _lt(s_cur, eps):
            return _certificate(state, state.index(s_cur), eps, "A")
    raise BudgetExhaustedError(f"no distance below {eps} within {budget} steps",
                               _certificate(state, state.index(s_cur), eps, "A"))


def bar_oy_chain(state: PreservedSet, l0, iterations: int) -> list:
    """The sequence l_0, l_1, ... with l_{i+1} = bar(l_i) - l_i (BAR then OY)."""
    seq = [_as_scalar(l0)]
    for _ in range(iterations):
        l = seq[-1]
        lbar = _require(apply_rule(state, "BAR", (l,)), "BAR").output
        nxt = _require(apply_rule(state, "OY", (lbar, l)), "OY").output
        if not _lt(nxt, l):
            raise DiagnosticsError(f"BAR/OY chain failed to decrease: {nxt} vs {l}")
        seq.append(nxt)
    return seq


def _euclid_finish(state, a, b, eps, budget):
    """Continue with DIFF from the pair (a, b); returns the index reaching eps or None."""
    for _ in range(budget):
        try:
            step = apply_rule(state, "DIFF", (a, b))
        except RefinementError:
            return None
        if isinstance(step, Inapplicable):
            return None
        a, b = b, step.output
        if _lt(b, eps):
            return state.index(b)
    return None


def _strategy_b(state, eps, budget, _frac_cap):
    ctx = state.ctx
    if not ctx.two_point_homogeneous or ctx.model is None:
        raise PreconditionError("strategy B needs a two-point homogeneous model context")
    l = state.entries[_smallest(state)].value
    if not _lt(l, ctx.bar_limit):
        raise PreconditionError(f"strategy B needs a seed below 2/3 conv; smallest is {l}")
    steps = 0
    while steps < budget:
        nxt = bar_oy_chain(state, l, 1)[-1]
        steps += 2
        if _lt(nxt, eps):
            return _certificate(state, state.index(nxt), eps, "B")
        hit = _euclid_finish(state, l, nxt, eps, min(64, budget - steps))
        if hit is not None:
            return _certificate(state, hit, eps, "B")
        l = nxt
    raise BudgetExhaustedError(f"no distance below {eps} within {budget} steps",
                               _certificate(state, _smallest(state), eps, "B"))


def _strategy_c(state, eps, budget, frac_cap):
    ctx = state.ctx
    if not ctx.periodic_period_one:
        raise PreconditionError("strategy C needs a periodic geodesic flow of period one")
    candidates = [e.value for e in state.entries
                  if isinstance(e.value, Exact) and _lt(e.value, ctx.conv)]
    irrational = [v for v in candidates if not v.is_rational]
    if not irrational:
        raise RationalityReport(
            "every seed below conv is rational: FRAC cannot fire and the derivable "
            "distances stay rational", _certificate(state, _smallest(state), eps, "C"))
    r = irrational[0]
    limit = eps if ctx.inj is INF or compare(eps, ctx.inj) <= 0 else ctx.inj
    lim_f = float(limit)
    rf = float(r)
    chunk = 1 << 16
    tried = 0
    for start in range(1, frac_cap + 1, chunk):
        n = np.arange(start, min(start + chunk, frac_cap + 1), dtype=np.float64)
        frac = np.mod(n * rf, 1.0)
        # float error in n*r is far below 1e-9 for n <= 1e6
        hits = np.flatnonzero((frac < lim_f + 1e-9) | (frac > 1 - 1e-9))
        for k in hits:
            if tried >= budget:
                break
            tried += 1
            step = apply_rule(state, "FRAC", (r,), n=int(n[k]))
            if isinstance(step, DerivationStep) and _lt(step.output, eps):
                return _certificate(state, state.index(step.output), eps, "C")
    raise BudgetExhaustedError(f"no n <= {frac_cap} gives frac(n*{r}) below {eps}",
                               _certificate(state, _smallest(state), eps, "C"))


_EXHAUSTIVE_MAX_SET = 400
_EXHAUSTIVE_MANY = 4
_EXHAUSTIVE_FRAC = 1000


def _strategy_exhaustive(state, eps, budget, _frac_cap):
    """Breadth-first closure with bounded fan-out.

    Each round applies DOUBLE, MANY (j <= 4), BAR, FRAC (n <= 1000) to every
    element and DIFF, OY to every ordered pair, stopping at the first output
    below eps, after ``budget`` successful steps, or once the set holds 400
    elements.
    """
    steps = 0
    seen_pairs: set = set()
    seen_single: set = set()
    while True:
        grew = False
        values = state.values()
        jobs = []
        for v in values:
            if v in seen_single:
                continue
            seen_single.add(v)
            jobs.append(("DOUBLE", (v,), {}))
            jobs.extend(("MANY", (v,), {"j": j}) for j in range(2, _EXHAUSTIVE_MANY + 1))
            jobs.append(("BAR", (v,), {}))
            jobs.extend(("FRAC", (v,), {"n": n}) for n in range(1, _EXHAUSTIVE_FRAC + 1))
        for a in values:
            for b in values:
                if a is not b and (a, b) not in seen_pairs:
                    seen_pairs.add((a, b))
                    jobs.append(("DIFF", (a, b), {}))
                    jobs.append(("OY", (a, b), {}))
        for rule, inputs, params in jobs:
            if rule == "FRAC" and not state.ctx.periodic_period_one:
                continue
            if rule == "BAR" and not state.ctx.two_point_homogeneous:
                continue
            try:
                step = apply_rule(state, rule, inputs, **params)
            except (RefinementError, DiagnosticsError, PreconditionError):
                continue
            if isinstance(step, Inapplicable):
                continue
            steps += 1
            grew = True
            if _lt(step.output, eps):
                return _certificate(state, state.index(step.output), eps, "exhaustive")
            if steps >= budget or len(state) >= _EXHAUSTIVE_MAX_SET:
                raise BudgetExhaustedError(
                    f"exhaustive search stopped after {steps} steps and {len(state)} elements",
                    _certificate(state, _smallest(state), eps, "exhaustive"))
        if not grew:
            raise BudgetExhaustedError(
                "exhaustive search reached a fixed point above epsilon",
                _certificate(state, _smallest(state), eps, "exhaustive"))


@dataclass
class VerificationReport:
    ok: bool
    citations: list = field(default_factory=list)
    problems: list = field(default_factory=list)

    def __bool__(self):
        return self.ok

    def to_json(self) -> dict:
        return {"schema": SCHEMA, "verified": self.ok, "citations": self.citations,
                "problems": self.problems}


def _same_output(rule, recorded, recomputed) -> bool:
    if isinstance(recorded, Exact) and isinstance(recomputed, Exact):
        return recorded == recomputed
    if rule == "BAR" and isinstance(recorded, Interval) and isinstance(recomputed, Interval):
        # a recomputed enclosure of r-bar inside the recorded one keeps it sound
        return recorded.lo <= recomputed.lo and recomputed.hi <= recorded.hi
    return recorded == recomputed


def verify_certificate(cert: DerivationCertificate,
                       ctx: ClosureContext | None = None) -> VerificationReport:
    """Replay ``cert`` from its seeds, rechecking every precondition and output."""
    ctx = ctx or cert.context
    report = VerificationReport(True)
    try:
        state = PreservedSet(ctx, cert.seeds)
    except (PreconditionError, TypeError) as exc:
        return VerificationReport(False, [], [f"seeds rejected: {exc}"])
    for k, step in enumerate(cert.steps):
        report.citations.append(f"step {k + 1} {step.rule}: {LEMMAS.get(step.rule, step.lemma)}")
        params = {key: step.params[key] for key in ("j", "n", "tol") if key in step.params}
        try:
            again = _evaluate(ctx, state, step.rule, tuple(step.inputs), params)
        except Exception as exc:  # noqa: BLE001 - any failure is a verification failure
            report.ok = False
            report.problems.append(f"step {k + 1} {step.rule}: replay raised {exc!r}")
            break
        if isinstance(again, Inapplicable):
            report.ok = False
            report.problems.append(
                f"step {k + 1} {step.rule} precondition fails: {again.reason}")
            break
        if not _same_output(step.rule, step.output, again.output):
            report.ok = False
            report.problems.append(
                f"step {k + 1} {step.rule}: recorded output {step.output} but replay gives "
                f"{again.output}")
            break
        state.record(step)
    if report.ok:
        if cert.achieved not in state:
            report.ok = False
            report.problems.append(f"achieved value {cert.achieved} was never derived")
        else:
            try:
                below = _lt(cert.achieved, cert.epsilon)
            except RefinementError as exc:
                below = False
                report.problems.append(str(exc))
            if not below:
                report.ok = False
                report.problems.append(f"achieved {cert.achieved} is not below {cert.epsilon}")
    return report
