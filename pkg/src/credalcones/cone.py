"""Finitely generated cones of desirable gambles.

An assessment is a finite set of nonzero gambles on one space.  Its natural
extension is the smallest coherent superset candidate: the strictly positive
span of the assessment together with all strictly positive gambles.  Since
the indicator atoms of the space generate every strictly positive gamble,
that extension is the finitely generated cone spanned by

    assessments (in given order), then one atom per value (value order),

and this generator order is fixed, so reports are reproducible.

Coherence is decided by a strictly positive expectation functional: the
natural extension is coherent exactly when some probability mass function
with all-positive mass gives every generator strictly positive expectation.
The decision is a single exact LP maximizing the worst margin; a failure is
certified by a vanishing nonnegative combination of the generators.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from random import Random
from typing import Iterable, Optional, Sequence

from .core import Gamble, RationalLike, Space, as_rational, indicator
from .lp import (
    LinearSystem,
    LpError,
    LpStatus,
    conic_membership,
    contains_zero,
)


@dataclass(frozen=True)
class CoherenceReport:
    """Outcome of the coherence LP.

    margin is the optimal worst expectation over all probability mass
    functions respecting the same floor; coherent iff margin > 0.  witness
    is the optimizing pmf (strictly positive when coherent).  certificate,
    present only when incoherent, is a nonzero nonnegative combination of
    the generators summing to the zero gamble.
    """

    coherent: bool
    margin: Fraction
    witness: Optional[tuple[Fraction, ...]] = None
    certificate: Optional[tuple[Fraction, ...]] = None

    def __bool__(self) -> bool:
        return self.coherent


@dataclass(frozen=True)
class MembershipCertificate:
    member: bool
    witness: Optional[tuple[Fraction, ...]] = None
    separator: Optional[tuple[Fraction, ...]] = None


@dataclass(frozen=True)
class SignReport:
    """Result of the nonpositive-gamble sweep; ok when nothing slipped in."""

    checked: int
    violation: Optional[Gamble] = None

    @property
    def ok(self) -> bool:
        return self.violation is None


class AssessmentCone:
    """The natural-extension cone of finitely many assessed gambles."""

    def __init__(self, space: Space, assessments: Iterable[Gamble] = ()):
        if space.size < 1:
            raise ValueError("space must have at least one configuration")
        self.space = space
        fitted = []
        for f in assessments:
            f = f.extend(space)
            if f.is_zero:
                raise ValueError("assessed gambles must be nonzero")
            fitted.append(f)
        self.assessments: tuple[Gamble, ...] = tuple(fitted)
        atoms = tuple(indicator(space.config_at(i), space) for i in range(space.size))
        self.generators: tuple[Gamble, ...] = self.assessments + atoms
        self._coherence: Optional[CoherenceReport] = None

    def __repr__(self) -> str:
        return f"AssessmentCone({self.space!r}, {len(self.assessments)} assessments)"

    # -- coherence ------------------------------------------------------------

    def is_coherent(self) -> CoherenceReport:
        """Coherence decision with witness or certificate; truthy iff coherent."""
        if self._coherence is None:
            self._coherence = self._decide_coherence()
        return self._coherence

    def _decide_coherence(self) -> CoherenceReport:
        size = self.space.size
        # variables: y_0..y_{size-1}, eps; maximize eps subject to
        # sum(y) = 1, y_x - eps >= 0, g.y - eps >= 0 for every generator
        lp = LinearSystem(size + 1)
        lp.maximize([0] * size + [1])
        lp.add_constraint([1] * size + [0], "==", 1)
        for x in range(size):
            row = [0] * (size + 1)
            row[x] = 1
            row[size] = -1
            lp.add_constraint(row, ">=", 0)
        for g in self.assessments:
            lp.add_constraint(list(g.table) + [-1], ">=", 0)
        out = lp.solve()
        if out.status is not LpStatus.OPTIMAL:
            raise LpError("coherence LP must have an optimum")
        margin = out.objective
        y = out.solution[:size]
        if margin > 0:
            self._verify_witness(y, margin)
            return CoherenceReport(coherent=True, margin=margin, witness=tuple(y))
        vanish = contains_zero([g.table for g in self.generators])
        if not vanish.exists:
            raise LpError("incoherence without a vanishing combination")
        return CoherenceReport(
            coherent=False, margin=margin, witness=tuple(y), certificate=vanish.combination
        )

    def _verify_witness(self, y: Sequence[Fraction], margin: Fraction) -> None:
        if sum(y) != 1 or any(v < margin for v in y):
            raise LpError("coherence witness failed verification")
        for g in self.generators:
            if sum(a * b for a, b in zip(y, g.table)) < margin:
                raise LpError("coherence witness failed verification")

    # -- membership -----------------------------------------------------------

    def member(self, f: Gamble) -> bool:
        return self.member_with_certificate(f).member

    def member_with_certificate(self, f: Gamble) -> MembershipCertificate:
        """Is f in the strictly positive span of the generators?

        The zero gamble is never a member: the span requires at least one
        strictly positive coefficient, and for a coherent cone no nonzero
        combination vanishes.  (For an incoherent cone the zero gamble is
        technically reachable; coherence is reported separately and this
        method keeps the convention member(0) == False.)
        """
        f = f.extend(self.space)
        if f.is_zero:
            return MembershipCertificate(member=False)
        res = conic_membership(f.table, [g.table for g in self.generators])
        return MembershipCertificate(
            member=res.member, witness=res.witness, separator=res.separator
        )

    def sign_diagnostics(self, rng: Optional[Random] = None, samples: int = 20) -> SignReport:
        """Sweep nonpositive gambles and insist none is a member.

        Every negated atom is checked, then `samples` random nonzero f <= 0.
        For a coherent cone no violation can exist; an incoherent cone
        typically betrays itself here (some assessed f <= 0 is a member).
        """
        rng = rng if rng is not None else Random(7)
        size = self.space.size
        probes = [-a for a in self.generators[len(self.assessments):]]
        for _ in range(samples):
            table = [Fraction(0)] * size
            while all(v == 0 for v in table):
                table = [
                    Fraction(-rng.randint(0, 2), rng.randint(1, 2)) for _ in range(size)
                ]
            probes.append(Gamble(self.space, tuple(table)))
        for checked, f in enumerate(probes, start=1):
            if self.member(f):
                return SignReport(checked=checked, violation=f)
        return SignReport(checked=len(probes))

    # -- previsions -----------------------------------------------------------

    def lower_prevision(self, f: Gamble) -> Fraction:
        """sup { m : f - m is desirable }, as a supremum over the closed span.

        The supremum need not be attained in the cone itself (f - m* can be
        the zero gamble or another boundary point); callers get the exact
        bound, not a membership claim.
        """
        f = f.extend(self.space)
        size = self.space.size
        n = len(self.generators)
        # variables: lambda_1..lambda_n >= 0, m free; rows: R lambda + m*1 = f
        lp = LinearSystem(n + 1)
        lp.maximize([0] * n + [1])
        for i in range(size):
            row = [g.table[i] for g in self.generators] + [1]
            lp.add_constraint(row, "==", f.table[i])
        for k in range(n):
            row = [0] * (n + 1)
            row[k] = 1
            lp.add_constraint(row, ">=", 0)
        out = lp.solve()
        if out.status is LpStatus.UNBOUNDED:
            raise LpError("unbounded lower prevision: the cone is incoherent")
        if out.status is not LpStatus.OPTIMAL:
            raise LpError("lower prevision LP is infeasible, which cannot happen")
        return out.objective

    def upper_prevision(self, f: Gamble) -> Fraction:
        return -self.lower_prevision(-f.extend(self.space))
