"""Credal networks under epistemic irrelevance.

A network attaches to every node s and every configuration of its parents a
local cone of desirable gambles on the node's values.  The global model is
the cone on the joint space spanned by all products

    indicator(parent config and non-parent-non-descendant config) * gamble,

one per local generator per configuration pair, enumerated in a fixed
order: nodes sorted, parent configurations lexicographic, then
non-parent-non-descendant configurations lexicographic, then the local
generator list (assessments first, atoms last).

Queries against the joint cone are answered by certificates that are always
re-verified against the actual generator list by exact substitution:

  * nonnegative nonzero targets are combined from full-configuration atom
    generators contributed by a leaf node;
  * a canonical strictly positive product mass function, built from the
    local coherence witnesses, rejects every target it scores negative
    (and proves no nonnegative combination of generators vanishes);
  * targets of the form indicator(x) * f with f local to one node are
    settled by a tiny LP in the local cone, whose witness or separating
    functional lifts exactly to the joint space;
  * anything else falls back to one exact LP over the generator columns.

Because every shortcut certificate is verified before use, the fallback is
also the safety net: if the generator list was tampered with, verification
fails and the LP answers from the ground truth.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Optional, Sequence

from .cone import AssessmentCone, CoherenceReport, MembershipCertificate
from .core import Configuration, Gamble, Space, VariableSpace, indicator
from .dag import Dag
from .lp import (
    LinearSystem,
    LpError,
    LpStatus,
    _primitive,
    conic_membership,
    contains_zero as _lp_contains_zero,
)

DEFAULT_GENERATOR_CAP = 100_000

_SEPARATOR_CACHE_LIMIT = 32


class NetworkError(ValueError):
    pass


class ZeroGambleError(NetworkError):
    """The zero gamble has no desirability status in joint-level queries."""


class GeneratorCapError(NetworkError):
    def __init__(self, count: int, cap: int):
        super().__init__(f"network would produce {count} generators, cap is {cap}")
        self.count = count
        self.cap = cap


class IncoherentLocalModel(NetworkError):
    def __init__(self, node: str, parent_config: Configuration, report: CoherenceReport):
        super().__init__(
            f"local model for node {node!r} given {parent_config!r} is incoherent"
        )
        self.node = node
        self.parent_config = parent_config
        self.report = report


def _dot(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


@dataclass(frozen=True)
class GeneratorInfo:
    """One joint generator and where it came from."""

    index: int
    node: str
    parent_index: int
    nnd_index: int
    local_index: int
    is_atom: bool
    flipped: bool
    table: tuple[Fraction, ...]
    support: tuple[tuple[int, Fraction], ...]


@dataclass(frozen=True)
class JointMembership:
    member: bool
    route: str
    witness: Optional[tuple[tuple[int, Fraction], ...]] = None
    separator: Optional[tuple[Fraction, ...]] = None


@dataclass(frozen=True)
class ZeroReport:
    exists: bool
    route: str
    combination: Optional[tuple[tuple[int, Fraction], ...]] = None


@dataclass(frozen=True)
class IrrelevanceCheck:
    node: str
    parent_config: Configuration
    irrelevant: tuple[str, ...]
    given: Configuration
    gamble: Gamble
    local_member: bool
    joint_member: bool

    @property
    def agree(self) -> bool:
        return self.local_member == self.joint_member


@dataclass(frozen=True)
class Violation:
    kind: str
    node: Optional[str] = None
    parent_values: tuple[str, ...] = ()
    irrelevant: tuple[str, ...] = ()
    given_values: tuple[str, ...] = ()
    gamble: tuple[Fraction, ...] = ()
    local_member: Optional[bool] = None
    joint_member: Optional[bool] = None
    detail: str = ""


@dataclass(frozen=True)
class VerificationReport:
    zero_free: bool
    atoms_checked: int
    negatives_checked: int
    irrelevance_checked: int
    violations: tuple[Violation, ...]
    budget_exhausted: bool = False
    # the positive span of the generator list is minimal by construction:
    # each generator is an observed-configuration indicator times a locally
    # desirable gamble, so any joint model honoring the local models and the
    # irrelevance requirements must contain every one of them
    minimal_by_construction: bool = True

    @property
    def ok(self) -> bool:
        return not self.violations and not self.budget_exhausted


class CredalNet:
    """A DAG plus one coherent local cone per (node, parent configuration).

    Local coherence is checked at construction; an incoherent slot raises
    IncoherentLocalModel immediately, so every built network carries a
    strictly positive coherence witness for each local model.
    """

    def __init__(
        self,
        dag: Dag,
        variables: Iterable[VariableSpace],
        assessments: Optional[Mapping[str, Sequence[Sequence[Gamble]]]] = None,
    ):
        report = dag.validate()
        if not report.acyclic:
            raise NetworkError(f"graph has a cycle: {' -> '.join(report.cycle)}")
        if not dag.nodes:
            raise NetworkError("a network needs at least one node")
        self.dag = dag
        by_node = {v.node: v for v in variables}
        if set(by_node) != set(dag.nodes):
            raise NetworkError("variables must cover exactly the graph's nodes")
        self.variables = {n: by_node[n] for n in dag.nodes}
        self.joint_space = Space(self.variables.values())

        self._node_space = {n: Space([self.variables[n]]) for n in dag.nodes}
        self._parent_space = {
            n: Space(self.variables[p] for p in dag.parents(n)) for n in dag.nodes
        }
        self._nnd_space = {
            n: Space(self.variables[m] for m in dag.non_parent_non_descendants(n))
            for n in dag.nodes
        }

        self.assessments: dict[tuple[str, int], tuple[Gamble, ...]] = {}
        given = dict(assessments) if assessments else {}
        unknown = set(given) - set(dag.nodes)
        if unknown:
            raise NetworkError(f"assessments for unknown nodes {sorted(unknown)}")
        for s in dag.nodes:
            per_parent = given.get(s)
            n_cfg = self._parent_space[s].size
            if per_parent is None:
                per_parent = [[] for _ in range(n_cfg)]
            if len(per_parent) != n_cfg:
                raise NetworkError(
                    f"node {s!r} needs one assessment list per parent "
                    f"configuration ({n_cfg}), got {len(per_parent)}"
                )
            for p_idx, gambles in enumerate(per_parent):
                self.assessments[(s, p_idx)] = tuple(
                    g.extend(self._node_space[s]) for g in gambles
                )

        self._cones: dict[tuple[str, int], AssessmentCone] = {}
        self._witness: dict[tuple[str, int], tuple[Fraction, ...]] = {}
        for s in dag.nodes:
            for p_idx in range(self._parent_space[s].size):
                cone = AssessmentCone(self._node_space[s], self.assessments[(s, p_idx)])
                rep = cone.is_coherent()
                if not rep.coherent:
                    raise IncoherentLocalModel(
                        s, self._parent_space[s].config_at(p_idx), rep
                    )
                self._cones[(s, p_idx)] = cone
                self._witness[(s, p_idx)] = rep.witness

    def node_space(self, node: str) -> Space:
        return self._node_space[node]

    def parent_space(self, node: str) -> Space:
        return self._parent_space[node]

    def nnd_space(self, node: str) -> Space:
        return self._nnd_space[node]

    def local_cone(self, node: str, parent_index: int) -> AssessmentCone:
        return self._cones[(node, parent_index)]

    def local_witness(self, node: str, parent_index: int) -> tuple[Fraction, ...]:
        """A strictly positive pmf on the node's values giving every local
        generator strictly positive expectation."""
        return self._witness[(node, parent_index)]

    def generator_count(self) -> int:
        total = 0
        for s in self.dag.nodes:
            locals_per_cfg = [
                len(self.assessments[(s, p)]) + len(self.variables[s].values)
                for p in range(self._parent_space[s].size)
            ]
            total += self._nnd_space[s].size * sum(locals_per_cfg)
        return total

    def build_joint(
        self,
        cap: int = DEFAULT_GENERATOR_CAP,
        mutate_flip: Optional[tuple[str, int, int]] = None,
    ) -> "JointModel":
        count = self.generator_count()
        if count > cap:
            raise GeneratorCapError(count, cap)
        return JointModel(self, mutate_flip=mutate_flip)


class JointModel:
    """The joint cone of a credal network, with certified query routes.

    mutate_flip=(node, parent_index, local_index) negates every joint
    product built from that local generator, leaving the reference local
    models untouched.  It exists so verification sweeps can prove they
    detect a corrupted joint model; see verify_requirements.
    """

    def __init__(self, net: CredalNet, mutate_flip: Optional[tuple[str, int, int]] = None):
        self.net = net
        self.space = net.joint_space
        size = self.space.size
        self._digits = [self.space.value_indices_at(j) for j in range(size)]
        node_pos = {n: k for k, n in enumerate(self.space.nodes)}

        if mutate_flip is not None:
            m_node, m_pidx, m_lidx = mutate_flip
            if m_node not in net.dag.nodes:
                raise NetworkError(f"mutation names unknown node {m_node!r}")
            if not 0 <= m_pidx < net.parent_space(m_node).size:
                raise NetworkError("mutation parent index out of range")
            n_local = len(net.assessments[(m_node, m_pidx)]) + len(
                net.variables[m_node].values
            )
            if not 0 <= m_lidx < n_local:
                raise NetworkError("mutation generator index out of range")
        self.mutate_flip = mutate_flip

        # parent/nnd configuration index of every joint configuration
        self._parent_idx_at: dict[str, list[int]] = {}
        self._nnd_idx_at: dict[str, list[int]] = {}
        for s in net.dag.nodes:
            for spc, store in (
                (net.parent_space(s), self._parent_idx_at),
                (net.nnd_space(s), self._nnd_idx_at),
            ):
                pos_stride = [
                    (node_pos[v.node], stride)
                    for v, stride in zip(spc.variables, spc._strides)
                ]
                store[s] = [
                    sum(self._digits[j][p] * st for p, st in pos_stride)
                    for j in range(size)
                ]

        leaves = net.dag.leaves()
        self._leaf = leaves[0]
        self._atom_gen_at: dict[int, int] = {}

        self.generators: list[GeneratorInfo] = []
        self._slot: dict[tuple[str, int, int, int], int] = {}
        for s in net.dag.nodes:
            p_at = self._parent_idx_at[s]
            n_at = self._nnd_idx_at[s]
            s_pos = node_pos[s]
            n_parent = net.parent_space(s).size
            n_nnd = net.nnd_space(s).size
            agree: dict[tuple[int, int], list[tuple[int, int]]] = {}
            for j in range(size):
                agree.setdefault((p_at[j], n_at[j]), []).append(
                    (j, self._digits[j][s_pos])
                )
            for p_idx in range(n_parent):
                n_assessed = len(net.assessments[(s, p_idx)])
                local_gens = net.local_cone(s, p_idx).generators
                for nnd_idx in range(n_nnd):
                    cells = agree[(p_idx, nnd_idx)]
                    for k, g in enumerate(local_gens):
                        flip = mutate_flip == (s, p_idx, k)
                        table = [Fraction(0)] * size
                        for j, v in cells:
                            table[j] = -g.table[v] if flip else g.table[v]
                        info = GeneratorInfo(
                            index=len(self.generators),
                            node=s,
                            parent_index=p_idx,
                            nnd_index=nnd_idx,
                            local_index=k,
                            is_atom=k >= n_assessed,
                            flipped=flip,
                            table=tuple(table),
                            support=tuple(
                                (j, table[j]) for j, _ in cells if table[j] != 0
                            ),
                        )
                        self.generators.append(info)
                        self._slot[(s, p_idx, nnd_idx, k)] = info.index
                        if s == self._leaf and info.is_atom:
                            self._atom_gen_at[info.support[0][0]] = info.index

        self.canonical_witness = self._build_canonical_witness()
        self._separators: list[tuple[Fraction, ...]] = []
        if self.canonical_witness is not None:
            self._separators.append(self.canonical_witness)
        self._local_memo: dict[tuple[str, int, tuple], MembershipCertificate] = {}
        self._product_sep_memo: dict[tuple[str, int, tuple], Optional[tuple]] = {}
        self._dedup: Optional[tuple[list[tuple[Fraction, ...]], list[int]]] = None

    # -- canonical product witness ---------------------------------------

    def _build_canonical_witness(self) -> Optional[tuple[Fraction, ...]]:
        """The product mass function of the local coherence witnesses.

        Strictly positive by construction; kept only if it scores every
        generator strictly positive, which certifies at once that no
        nonnegative combination of the generators vanishes.
        """
        net = self.net
        size = self.space.size
        node_pos = {n: k for k, n in enumerate(self.space.nodes)}
        y = []
        for j in range(size):
            mass = Fraction(1)
            for s in net.dag.nodes:
                w = net.local_witness(s, self._parent_idx_at[s][j])
                mass *= w[self._digits[j][node_pos[s]]]
            y.append(mass)
        for info in self.generators:
            if sum(y[j] * v for j, v in info.support) <= 0:
                return None
        return tuple(y)

    # -- verified certificate helpers -------------------------------------

    def _witness_matches(
        self, witness: dict[int, Fraction], target: Sequence[Fraction]
    ) -> bool:
        total = [Fraction(0)] * self.space.size
        for idx, coeff in witness.items():
            if coeff < 0:
                return False
            if coeff:
                for j, v in self.generators[idx].support:
                    total[j] += coeff * v
        return all(a == b for a, b in zip(total, target))

    def _separates_all_generators(self, y: Sequence[Fraction]) -> bool:
        return all(
            sum(y[j] * v for j, v in info.support) >= 0 for info in self.generators
        )

    def _cache_separator(self, y: tuple[Fraction, ...]) -> None:
        if y not in self._separators:
            self._separators.append(y)
            if len(self._separators) > _SEPARATOR_CACHE_LIMIT:
                # keep the canonical witness in front, evict the oldest rest
                del self._separators[1]

    @staticmethod
    def _pairs(witness: dict[int, Fraction]) -> tuple[tuple[int, Fraction], ...]:
        return tuple(sorted((i, c) for i, c in witness.items() if c != 0))

    # -- query routes ------------------------------------------------------

    def joint_member(self, f: Gamble) -> bool:
        """Is the nonzero gamble f desirable under the joint model?

        Unlike the certificate-level plumbing below, this public query
        refuses the zero gamble outright."""
        f = f.extend(self.space)
        if f.is_zero:
            raise ZeroGambleError("the zero gamble has no desirability status")
        return self.member_with_certificate(f).member

    def member(self, f: Gamble) -> bool:
        return self.member_with_certificate(f).member

    def member_with_certificate(self, f: Gamble) -> JointMembership:
        """Membership of f in the joint cone, with a verified certificate.

        The zero gamble is reported a non-member by the same convention as
        the local cones."""
        f = f.extend(self.space)
        if f.is_zero:
            return JointMembership(member=False, route="zero-convention")
        quick = self._quick_routes(f.table)
        if quick is not None:
            return quick
        return self._lp_membership(f.table)

    def _quick_routes(self, table: Sequence[Fraction]) -> Optional[JointMembership]:
        if all(v >= 0 for v in table):
            witness: dict[int, Fraction] = {}
            for j, v in enumerate(table):
                if v:
                    witness[self._atom_gen_at[j]] = v
            if self._witness_matches(witness, table):
                return JointMembership(
                    member=True, route="positive-span", witness=self._pairs(witness)
                )
        for y in self._separators:
            if _dot(y, table) < 0:
                return JointMembership(
                    member=False, route="cached-separator", separator=y
                )
        return None

    def _dedup_columns(self) -> tuple[list[tuple[Fraction, ...]], list[int]]:
        if self._dedup is None:
            first: dict[tuple[Fraction, ...], int] = {}
            columns: list[tuple[Fraction, ...]] = []
            owners: list[int] = []
            for info in self.generators:
                if info.table not in first:
                    first[info.table] = info.index
                    columns.append(info.table)
                    owners.append(info.index)
            self._dedup = (columns, owners)
        return self._dedup

    def _lp_membership(self, table: Sequence[Fraction]) -> JointMembership:
        columns, owners = self._dedup_columns()
        res = conic_membership(table, columns)
        if res.member:
            witness = {
                owners[k]: c for k, c in enumerate(res.witness) if c != 0
            }
            if not self._witness_matches(witness, table):
                raise NetworkError("LP witness failed joint verification")
            return JointMembership(
                member=True, route="exact-lp", witness=self._pairs(witness)
            )
        y = res.separator
        if not self._separates_all_generators(y) or _dot(y, table) >= 0:
            raise NetworkError("LP separator failed joint verification")
        self._cache_separator(y)
        return JointMembership(member=False, route="exact-lp", separator=y)

    def contains_zero(self) -> ZeroReport:
        """Does any nonzero nonnegative combination of generators vanish?

        The canonical product witness settles this without an LP whenever
        it verifies (always, for an untampered network of coherent locals).
        """
        if self.canonical_witness is not None:
            # every generator has strictly positive score, so a vanishing
            # combination would need all-zero coefficients
            return ZeroReport(exists=False, route="canonical-witness")
        columns, owners = self._dedup_columns()
        res = _lp_contains_zero(columns)
        if not res.exists:
            return ZeroReport(exists=False, route="exact-lp")
        combo = {owners[k]: c for k, c in enumerate(res.combination) if c != 0}
        if not self._witness_matches(combo, [Fraction(0)] * self.space.size):
            raise NetworkError("vanishing combination failed verification")
        return ZeroReport(exists=True, route="exact-lp", combination=self._pairs(combo))

    # -- structured queries --------------------------------------------------

    def _local_membership(
        self, node: str, parent_index: int, f: Gamble
    ) -> MembershipCertificate:
        key = (node, parent_index, f.table)
        if key not in self._local_memo:
            cone = self.net.local_cone(node, parent_index)
            self._local_memo[key] = cone.member_with_certificate(f)
        return self._local_memo[key]

    def structured_member(
        self,
        node: str,
        parent_config: Configuration,
        irrelevant: Sequence[str],
        given: Configuration,
        f: Gamble,
    ) -> JointMembership:
        """Membership of indicator(parent_config, given) * f in the joint
        cone, where f is a gamble on `node` and `irrelevant` is a subset of
        its non-parent-non-descendants with observed configuration `given`.

        Certificates are assembled from the local cone when possible (a
        local witness replicates over the unobserved non-parent-non-
        descendants; a local separating functional extends to a product
        mass function).  Both are verified against the actual generator
        list, so a tampered joint model falls through to the exact LP.
        """
        net = self.net
        nnd = net.dag.non_parent_non_descendants(node)
        extra = set(irrelevant) - set(nnd)
        if extra:
            raise NetworkError(
                f"{sorted(extra)} are not non-parent-non-descendants of {node!r}"
            )
        irrelevant = tuple(sorted(set(irrelevant)))
        if tuple(sorted(given.nodes)) != irrelevant:
            raise NetworkError("given configuration must cover exactly the irrelevant set")
        p_space = net.parent_space(node)
        if parent_config.space != p_space:
            raise NetworkError("parent configuration on the wrong space")
        f = f.extend(net.node_space(node))

        observed = parent_config.combine(given)
        target = indicator(observed, self.space) * f.extend(self.space)
        if target.is_zero:
            return JointMembership(member=False, route="zero-convention")

        quick = self._quick_routes(target.table)
        if quick is not None:
            return quick

        p_idx = p_space.index_of(parent_config)
        cert = self._local_membership(node, p_idx, f)
        if cert.member:
            assembled = self._assemble_local_witness(
                node, p_idx, irrelevant, given, cert.witness
            )
            if assembled is not None and self._witness_matches(assembled, target.table):
                return JointMembership(
                    member=True, route="local-assembly", witness=self._pairs(assembled)
                )
        else:
            y = self._product_separator(node, p_idx, f, cert.separator)
            if y is not None and _dot(y, target.table) < 0:
                return JointMembership(
                    member=False, route="product-separator", separator=y
                )
        return self._lp_membership(target.table)

    def _assemble_local_witness(
        self,
        node: str,
        parent_index: int,
        irrelevant: tuple[str, ...],
        given: Configuration,
        local_witness: Sequence[Fraction],
    ) -> Optional[dict[int, Fraction]]:
        """Replicate a local cone witness over every configuration of the
        unobserved non-parent-non-descendants."""
        net = self.net
        nnd_space = net.nnd_space(node)
        free_nodes = [n for n in nnd_space.nodes if n not in irrelevant]
        free_space = Space(net.variables[n] for n in free_nodes)
        witness: dict[int, Fraction] = {}
        for free_cfg in free_space.configurations():
            nnd_cfg = given.combine(free_cfg) if free_nodes else given
            if nnd_cfg.space != nnd_space:
                nnd_cfg = nnd_space.configuration(nnd_cfg.as_dict())
            nnd_idx = nnd_space.index_of(nnd_cfg)
            for k, coeff in enumerate(local_witness):
                if coeff:
                    idx = self._slot[(node, parent_index, nnd_idx, k)]
                    witness[idx] = witness.get(idx, Fraction(0)) + coeff
        return witness

    def _product_separator(
        self,
        node: str,
        parent_index: int,
        f: Gamble,
        local_separator: Sequence[Fraction],
    ) -> Optional[tuple[Fraction, ...]]:
        """A mass function scoring every generator nonnegative and the
        structured target negative: the network of local witnesses with the
        node's kernel at this parent slot replaced by the (normalized)
        local separating functional."""
        key = (node, parent_index, f.table)
        if key in self._product_sep_memo:
            return self._product_sep_memo[key]
        net = self.net
        total = sum(local_separator)
        if total <= 0 or any(v < 0 for v in local_separator):
            # a local separator is nonnegative (atoms are generators); a
            # tampered certificate is useless here
            self._product_sep_memo[key] = None
            return None
        kernel = tuple(v / total for v in local_separator)
        node_pos = {n: k for k, n in enumerate(self.space.nodes)}
        y = []
        for j in range(self.space.size):
            mass = Fraction(1)
            for s in net.dag.nodes:
                p_idx = self._parent_idx_at[s][j]
                digit = self._digits[j][node_pos[s]]
                if s == node and p_idx == parent_index:
                    mass *= kernel[digit]
                else:
                    mass *= net.local_witness(s, p_idx)[digit]
                if not mass:
                    break
            y.append(mass)
        result: Optional[tuple[Fraction, ...]] = _primitive(y)
        if not self._separates_all_generators(result):
            result = None
        else:
            self._cache_separator(result)
        self._product_sep_memo[key] = result
        return result

    def marginal_member(self, observed: Configuration, f: Gamble) -> bool:
        """Is f desirable once `observed` is seen?

        f lives on nodes disjoint from the observed ones; the query is
        membership of indicator(observed) * f in the joint cone.  When f
        concerns a single node and the observation covers its parents plus
        only non-parent-non-descendants, the structured route with its
        lifted local certificates applies; anything else goes through the
        generic verified routes.
        """
        overlap = set(f.space.nodes) & set(observed.nodes)
        if overlap:
            raise NetworkError(
                f"gamble scope overlaps observed nodes {sorted(overlap)}"
            )
        if f.is_zero:
            raise ZeroGambleError("the zero gamble has no desirability status")
        net = self.net
        nodes = f.space.nodes
        if len(nodes) == 1:
            s = nodes[0]
            parents = set(net.dag.parents(s))
            obs = set(observed.nodes)
            rest = tuple(sorted(obs - parents))
            if parents <= obs and set(rest) <= set(
                net.dag.non_parent_non_descendants(s)
            ):
                p_cfg = net.parent_space(s).configuration(
                    {n: observed.value_of(n) for n in parents}
                )
                given = Space(net.variables[n] for n in rest).configuration(
                    {n: observed.value_of(n) for n in rest}
                )
                return self.structured_member(s, p_cfg, rest, given, f).member
        target = indicator(observed, self.space) * f.extend(self.space)
        return self.member_with_certificate(target).member

    def condition(self, observed: Configuration) -> "ConditionedModel":
        """The joint model updated on an observed configuration.

        Gambles on the remaining nodes are judged after multiplying by the
        observation's indicator; observing the empty configuration changes
        nothing."""
        unknown = [n for n in observed.nodes if n not in self.net.variables]
        if unknown:
            raise NetworkError(f"observed nodes {unknown} are not in the network")
        return ConditionedModel(self, observed)

    # -- requirement checks ----------------------------------------------------

    def check_irrelevance(
        self,
        node: str,
        parent_config: Configuration,
        irrelevant: Sequence[str],
        given: Configuration,
        f: Gamble,
    ) -> IrrelevanceCheck:
        """Local desirability of f must coincide with joint desirability of
        indicator(parent_config, given) * f, for any observed configuration
        of any subset of the node's non-parent-non-descendants."""
        p_idx = self.net.parent_space(node).index_of(parent_config)
        f = f.extend(self.net.node_space(node))
        local = self._local_membership(node, p_idx, f).member
        joint = self.structured_member(node, parent_config, irrelevant, given, f).member
        return IrrelevanceCheck(
            node=node,
            parent_config=parent_config,
            irrelevant=tuple(sorted(set(irrelevant))),
            given=given,
            gamble=f,
            local_member=local,
            joint_member=joint,
        )

    def lower_prevision(self, f: Gamble) -> Fraction:
        """Largest m with f - m in the closure of the joint cone."""
        f = f.extend(self.space)
        columns, _ = self._dedup_columns()
        n = len(columns)
        size = self.space.size
        lp = LinearSystem(n + 1)
        lp.maximize([0] * n + [1])
        for i in range(size):
            lp.add_constraint([col[i] for col in columns] + [1], "==", f.table[i])
        for k in range(n):
            row = [0] * (n + 1)
            row[k] = 1
            lp.add_constraint(row, ">=", 0)
        out = lp.solve()
        if out.status is not LpStatus.OPTIMAL:
            raise LpError(f"joint lower prevision LP ended {out.status.value}")
        return out.objective

    def upper_prevision(self, f: Gamble) -> Fraction:
        return -self.lower_prevision(-f.extend(self.space))

    def _subsets_for_sweep(
        self, nnd: tuple[str, ...], rng: random.Random, cap: int
    ) -> list[tuple[str, ...]]:
        if len(nnd) <= 3:
            out = []
            for size in range(len(nnd) + 1):
                out.extend(combinations(nnd, size))
            return out
        chosen = {(), nnd}
        while len(chosen) < cap:
            chosen.add(tuple(n for n in nnd if rng.random() < 0.5))
        return sorted(chosen, key=lambda t: (len(t), t))

    def verify_requirements(
        self,
        rng: Optional[random.Random] = None,
        gambles_per_slot: int = 10,
        subset_cap: int = 8,
        max_checks: Optional[int] = None,
    ) -> VerificationReport:
        """Sweep the defining requirements of the joint model.

        Checks that no nonnegative combination of generators vanishes, that
        every full-configuration atom is desirable, that no nonpositive
        gamble is (negated atoms plus random draws), and that local and
        joint desirability coincide across nodes, parent configurations,
        subsets of non-parent-non-descendants and their configurations, for
        the local generators, their negations, and sampled gambles.
        Violations name the exact slot.

        max_checks caps the number of irrelevance checks (a deterministic
        budget); an interrupted sweep is reported as budget_exhausted."""
        rng = rng if rng is not None else random.Random(0)
        net = self.net
        violations: list[Violation] = []
        exhausted = False

        zero = self.contains_zero()
        if zero.exists:
            violations.append(
                Violation(
                    kind="vanishing-combination",
                    detail="a nonzero nonnegative combination of generators is zero",
                )
            )

        atoms_checked = 0
        for j in range(self.space.size):
            table = [Fraction(0)] * self.space.size
            table[j] = Fraction(1)
            res = self.member_with_certificate(Gamble(self.space, tuple(table)))
            atoms_checked += 1
            if not res.member:
                config = self.space.config_at(j)
                violations.append(
                    Violation(
                        kind="atom-membership",
                        given_values=config.values,
                        detail="full-configuration indicator is not desirable",
                    )
                )

        negatives_checked = 0
        negatives = []
        for j in range(self.space.size):
            table = [Fraction(0)] * self.space.size
            table[j] = Fraction(-1)
            negatives.append(tuple(table))
        for _ in range(gambles_per_slot):
            table = [Fraction(0)] * self.space.size
            while all(v == 0 for v in table):
                table = [
                    Fraction(-rng.randint(0, 2), rng.randint(1, 2))
                    for _ in range(self.space.size)
                ]
            negatives.append(tuple(table))
        for table in negatives:
            res = self.member_with_certificate(Gamble(self.space, table))
            negatives_checked += 1
            if res.member:
                violations.append(
                    Violation(
                        kind="sign-violation",
                        gamble=table,
                        detail="a nonpositive gamble is desirable",
                    )
                )

        checked = 0
        for s in net.dag.nodes:
            nnd = net.dag.non_parent_non_descendants(s)
            subsets = self._subsets_for_sweep(nnd, rng, subset_cap)
            p_space = net.parent_space(s)
            node_space = net.node_space(s)
            n_values = node_space.size
            for p_idx in range(p_space.size):
                p_cfg = p_space.config_at(p_idx)
                local_gens = net.local_cone(s, p_idx).generators
                gambles = list(local_gens) + [-g for g in local_gens]
                for _ in range(gambles_per_slot):
                    gambles.append(sample_gamble(rng, node_space))
                for f in gambles:
                    for irrelevant in subsets:
                        i_space = Space(net.variables[n] for n in irrelevant)
                        for given in i_space.configurations():
                            if max_checks is not None and checked >= max_checks:
                                exhausted = True
                                break
                            check = self.check_irrelevance(
                                s, p_cfg, irrelevant, given, f
                            )
                            checked += 1
                            if not check.agree:
                                violations.append(
                                    Violation(
                                        kind="irrelevance-mismatch",
                                        node=s,
                                        parent_values=p_cfg.values,
                                        irrelevant=irrelevant,
                                        given_values=given.values,
                                        gamble=f.table,
                                        local_member=check.local_member,
                                        joint_member=check.joint_member,
                                    )
                                )
                        if exhausted:
                            break
                    if exhausted:
                        break
                if exhausted:
                    break
            if exhausted:
                break
        return VerificationReport(
            zero_free=not zero.exists,
            atoms_checked=atoms_checked,
            negatives_checked=negatives_checked,
            irrelevance_checked=checked,
            violations=tuple(violations),
            budget_exhausted=exhausted,
        )


class ConditionedModel:
    """Membership queries against a joint model after an observation.

    A gamble on the unobserved nodes is desirable here exactly when its
    product with the observation's indicator is desirable jointly."""

    def __init__(self, joint: JointModel, observed: Configuration):
        self.joint = joint
        self.observed = observed
        seen = set(observed.nodes)
        self.space = Space(
            joint.net.variables[n] for n in joint.space.nodes if n not in seen
        )

    def __repr__(self) -> str:
        return f"ConditionedModel(observed={self.observed!r})"

    def member(self, f: Gamble) -> bool:
        return self.member_with_certificate(f).member

    def member_with_certificate(self, f: Gamble) -> JointMembership:
        overlap = set(f.space.nodes) & set(self.observed.nodes)
        if overlap:
            raise NetworkError(
                f"gamble scope overlaps observed nodes {sorted(overlap)}"
            )
        f = f.extend(self.space)
        if f.is_zero:
            raise ZeroGambleError("the zero gamble has no desirability status")
        joint = self.joint
        target = indicator(self.observed, joint.space) * f.extend(joint.space)
        return joint.member_with_certificate(target)


# -- samplers -------------------------------------------------------------


def sample_gamble(
    rng: random.Random, space: Space, magnitude: int = 3, max_denominator: int = 2
) -> Gamble:
    """A random nonzero gamble with small rational entries."""
    while True:
        table = tuple(
            Fraction(rng.randint(-magnitude, magnitude), rng.randint(1, max_denominator))
            for _ in range(space.size)
        )
        if any(v != 0 for v in table):
            return Gamble(space, table)


def sample_credal_net(
    rng: random.Random,
    max_nodes: int = 4,
    max_values: int = 3,
    max_assessments: int = 2,
    edge_probability: float = 0.5,
) -> CredalNet:
    """A random network with coherent local models.

    Assessments are rejection-sampled per slot: a slot that fails to be
    coherent after a few redraws falls back to fewer gambles, ending at the
    vacuous (always coherent) model.
    """
    n = rng.randint(1, max_nodes)
    names = [f"n{i}" for i in range(n)]
    variables = [
        VariableSpace(name, tuple(f"v{k}" for k in range(rng.randint(2, max_values))))
        for name in names
    ]
    order = names[:]
    rng.shuffle(order)
    rank = {v: i for i, v in enumerate(order)}
    edges = []
    for i, u in enumerate(names):
        for v in names[i + 1:]:
            if rng.random() < edge_probability:
                edges.append((u, v) if rank[u] < rank[v] else (v, u))
    dag = Dag(names, edges)

    by_node = {v.node: v for v in variables}
    assessments: dict[str, list[list[Gamble]]] = {}
    for s in names:
        node_space = Space([by_node[s]])
        parent_space = Space(by_node[p] for p in dag.parents(s))
        per_cfg: list[list[Gamble]] = []
        for _ in range(parent_space.size):
            want = rng.randint(0, max_assessments)
            chosen: list[Gamble] = []
            while want > 0:
                for _ in range(10):
                    candidate = chosen + [sample_gamble(rng, node_space)]
                    if AssessmentCone(node_space, candidate).is_coherent():
                        chosen = candidate
                        break
                want -= 1
            per_cfg.append(chosen)
        assessments[s] = per_cfg
    return CredalNet(dag, variables, assessments)
