"""Final-surface vibrational Hamiltonians in the truncated initial-surface basis.

Two independent construction routes are provided and cross-checked by tests:

* ``qp``     - H = 1/2 sum_k w_Bk (q_Bk^2 + p_Bk^2) with q_B/p_B built from
               the transformed position/momentum operators plus displacement.
* ``ladder`` - transform the creation operators directly,
               b_k^dag = 1/2 (J - J^-T) a + 1/2 (J + J^-T) a^dag + delta/sqrt(2),
               then H = sum_k w_Bk (b_k^dag b_k + 1/2).

Untruncated the two are algebraically identical; truncation makes them
differ near the cutoff boundary, which is precisely the error this package
studies.  The qp route is the default downstream; the ladder route also
emits the grouped second-quantized term list consumed by the qubit mapper.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fock
from .fock import FockSpace, ManyBodyOperator, embed, identity_operator
from .problem import ModeCutoffs, VibronicProblem, duschinsky_J, duschinsky_J_inv_T

#: Ladder-operator factor kinds in second-quantized terms.
CREATE = "create"
DESTROY = "destroy"

_COEFF_PRUNE = 1e-14


@dataclass(frozen=True)
class SecondQuantizedTerm:
    """coefficient * product of ladder factors, applied left to right.

    ``factors`` is a tuple of (kind, mode) pairs; the empty tuple is the
    identity term.  Factor order is preserved exactly as produced by the
    expansion (no commutation-based merging), so same-mode orderings like
    a a^dag and a^dag a stay distinct.
    """

    factors: tuple[tuple[str, int], ...]
    coefficient: float


@dataclass
class HamiltonianBuildReport:
    """Result of one Hamiltonian assembly."""

    route: str
    space: FockSpace
    hamiltonian: ManyBodyOperator
    term_count: int
    hermiticity_deviation: float


def build_qBpB(
    problem: VibronicProblem,
    space: FockSpace,
    representation: str = "sparse",
) -> tuple[list[ManyBodyOperator], list[ManyBodyOperator]]:
    """Final-surface position/momentum operators over the initial-surface space.

    q_Bk = sum_j J[k,j] q_Aj + delta_k,  p_Bk = sum_j J^-T[k,j] p_Aj.
    """
    j_mat = duschinsky_J(problem)
    j_inv_t = duschinsky_J_inv_T(problem)
    m = problem.n_modes
    if space.n_modes != m:
        raise ValueError(f"space has {space.n_modes} modes, problem has {m}")

    q_embedded = [
        embed(fock.position(space.cutoffs[j]), j, space, hermitian=True,
              representation=representation)
        for j in range(m)
    ]
    p_embedded = [
        embed(fock.momentum(space.cutoffs[j]), j, space, hermitian=True,
              representation=representation)
        for j in range(m)
    ]
    ident = identity_operator(space, representation=representation)

    q_b = []
    p_b = []
    for k in range(m):
        qk = ident.scale(problem.delta[k])
        pk = None
        for j in range(m):
            qk = qk + q_embedded[j].scale(j_mat[k, j])
            pj = p_embedded[j].scale(j_inv_t[k, j])
            pk = pj if pk is None else pk + pj
        qk.hermitian = True
        pk.hermitian = True
        q_b.append(qk)
        p_b.append(pk)
    return q_b, p_b


def _qp_term_count(problem: VibronicProblem) -> int:
    """Distinct monomials in the expanded qp-route H, before matrix assembly."""
    j_mat = duschinsky_J(problem)
    j_inv_t = duschinsky_J_inv_T(problem)
    delta = problem.delta
    m = problem.n_modes
    terms: dict[tuple, float] = {}

    def accumulate(key: tuple, coeff: float) -> None:
        terms[key] = terms.get(key, 0.0) + coeff

    for k in range(m):
        w = problem.omega_B[k]
        for i in range(m):
            for j in range(m):
                accumulate((("q", i), ("q", j)), 0.5 * w * j_mat[k, i] * j_mat[k, j])
                accumulate((("p", i), ("p", j)), 0.5 * w * j_inv_t[k, i] * j_inv_t[k, j])
            accumulate((("q", i),), w * delta[k] * j_mat[k, i])
        accumulate((), 0.5 * w * delta[k] ** 2)
    return sum(1 for c in terms.values() if abs(c) > _COEFF_PRUNE)


def build_harmonic_qp(problem: VibronicProblem, space: FockSpace) -> HamiltonianBuildReport:
    """Assemble H = 1/2 sum_k w_Bk (q_Bk^2 + p_Bk^2)."""
    q_b, p_b = build_qBpB(problem, space, representation="sparse")
    h = None
    for k in range(problem.n_modes):
        contrib = ((q_b[k] @ q_b[k]) + (p_b[k] @ p_b[k])).scale(0.5 * problem.omega_B[k])
        h = contrib if h is None else h + contrib
    h = h.with_representation("auto")
    h.hermitian = True
    return HamiltonianBuildReport(
        route="qp",
        space=space,
        hamiltonian=h,
        term_count=_qp_term_count(problem),
        hermiticity_deviation=h.hermiticity_deviation(),
    )


def ladder_terms(problem: VibronicProblem) -> list[SecondQuantizedTerm]:
    """Grouped second-quantized expansion of the ladder-route Hamiltonian.

    Expands sum_k w_Bk (b_k^dag b_k + 1/2) into products of initial-surface
    ladder operators; coefficients of identical ordered factor tuples are
    summed and near-zero results pruned.  The length of this list is the
    term-count observable for the quadratic scaling check.
    """
    j_mat = duschinsky_J(problem)
    j_inv_t = duschinsky_J_inv_T(problem)
    c_minus = 0.5 * (j_mat - j_inv_t)
    c_plus = 0.5 * (j_mat + j_inv_t)
    m = problem.n_modes

    terms: dict[tuple[tuple[str, int], ...], float] = {}

    def accumulate(factors: tuple[tuple[str, int], ...], coeff: float) -> None:
        terms[factors] = terms.get(factors, 0.0) + coeff

    for k in range(m):
        w = problem.omega_B[k]
        s = problem.delta[k] / math.sqrt(2)
        # b_k^dag = sum_i cm[k,i] a_i + cp[k,i] a_i^dag + s
        # b_k     = sum_j cm[k,j] a_j^dag + cp[k,j] a_j + s
        for i in range(m):
            for j in range(m):
                accumulate(((DESTROY, i), (CREATE, j)), w * c_minus[k, i] * c_minus[k, j])
                accumulate(((DESTROY, i), (DESTROY, j)), w * c_minus[k, i] * c_plus[k, j])
                accumulate(((CREATE, i), (CREATE, j)), w * c_plus[k, i] * c_minus[k, j])
                accumulate(((CREATE, i), (DESTROY, j)), w * c_plus[k, i] * c_plus[k, j])
        for i in range(m):
            accumulate(((DESTROY, i),), w * s * (c_minus[k, i] + c_plus[k, i]))
            accumulate(((CREATE, i),), w * s * (c_minus[k, i] + c_plus[k, i]))
        accumulate((), w * (s * s + 0.5))

    return [
        SecondQuantizedTerm(factors, coeff)
        for factors, coeff in terms.items()
        if abs(coeff) > _COEFF_PRUNE
    ]


def assemble_terms(
    terms: list[SecondQuantizedTerm], space: FockSpace
) -> ManyBodyOperator:
    """Turn a second-quantized term list into a concrete matrix operator."""
    single = {
        CREATE: [fock.creation(space.cutoffs[j]) for j in range(space.n_modes)],
        DESTROY: [fock.annihilation(space.cutoffs[j]) for j in range(space.n_modes)],
    }
    total = None
    for term in terms:
        op = identity_operator(space, representation="sparse").scale(term.coefficient)
        for kind, mode in term.factors:
            op = op @ embed(single[kind][mode], mode, space, representation="sparse")
        total = op if total is None else total + op
    if total is None:
        raise ValueError("empty term list")
    return total


def build_harmonic_ladder(problem: VibronicProblem, space: FockSpace) -> HamiltonianBuildReport:
    """Assemble H = sum_k w_Bk (b_k^dag b_k + 1/2) from the grouped term list."""
    terms = ladder_terms(problem)
    h = assemble_terms(terms, space).with_representation("auto")
    h.hermitian = True
    return HamiltonianBuildReport(
        route="ladder",
        space=space,
        hamiltonian=h,
        term_count=len(terms),
        hermiticity_deviation=h.hermiticity_deviation(),
    )


def build_b_dagger(problem: VibronicProblem, space: FockSpace) -> list[ManyBodyOperator]:
    """Transformed creation operators b_k^dag as many-body matrices."""
    j_mat = duschinsky_J(problem)
    j_inv_t = duschinsky_J_inv_T(problem)
    c_minus = 0.5 * (j_mat - j_inv_t)
    c_plus = 0.5 * (j_mat + j_inv_t)
    m = problem.n_modes

    a_ops = [embed(fock.annihilation(space.cutoffs[j]), j, space, representation="sparse")
             for j in range(m)]
    ad_ops = [embed(fock.creation(space.cutoffs[j]), j, space, representation="sparse")
              for j in range(m)]
    ident = identity_operator(space, representation="sparse")

    result = []
    for k in range(m):
        op = ident.scale(problem.delta[k] / math.sqrt(2))
        for j in range(m):
            op = op + a_ops[j].scale(c_minus[k, j]) + ad_ops[j].scale(c_plus[k, j])
        result.append(op)
    return result


def add_anharmonic(
    h0: ManyBodyOperator,
    problem: VibronicProblem,
    q_b: list[ManyBodyOperator],
) -> ManyBodyOperator:
    """H0 plus the force-constant monomials in final-surface coordinates.

    Each monomial is the ordered product of q_B operators symmetrized as
    (P + P^dag)/2: the coordinates commute exactly only in the untruncated
    algebra, and symmetrizing keeps H Hermitian at any cutoff.
    """
    if not problem.anharmonic:
        return h0
    space = h0.space
    h = h0
    for term in problem.anharmonic:
        if any(i < 0 or i >= len(q_b) for i in term.indices):
            raise IndexError(f"anharmonic term indices {term.indices} out of range")
        prod = q_b[term.indices[0]]
        for i in term.indices[1:]:
            prod = prod @ q_b[i]
        h = h + prod.symmetrized().scale(term.coefficient)
    h = h.with_representation("auto")
    h.hermitian = True
    return h


def build_hamiltonian(
    problem: VibronicProblem,
    cutoffs: ModeCutoffs,
    route: str = "qp",
    include_anharmonic: bool = True,
) -> HamiltonianBuildReport:
    """One-call builder: harmonic route plus optional anharmonic terms."""
    space = FockSpace.from_cutoffs(cutoffs)
    if route == "qp":
        report = build_harmonic_qp(problem, space)
    elif route == "ladder":
        report = build_harmonic_ladder(problem, space)
    else:
        raise ValueError(f"unknown route {route!r}, expected 'qp' or 'ladder'")

    if include_anharmonic and problem.anharmonic:
        q_b, _ = build_qBpB(problem, space, representation="sparse")
        h = add_anharmonic(report.hamiltonian.with_representation("sparse"), problem, q_b)
        report.hamiltonian = h.with_representation("auto")
        report.term_count += len(problem.anharmonic)
        report.hermiticity_deviation = report.hamiltonian.hermiticity_deviation()
    return report
