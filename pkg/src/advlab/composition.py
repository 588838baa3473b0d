"""Executable constructions for composing adversary certificates.

Lower side: the composed adversary matrix is the matrix composition of the
outer relational matrix with ``N`` copies of the inner ``Z`` block, read
back on composed input strings.  Upper side: the composed dual witness is
built from tensor products of outer and inner witness vectors.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import boolean_core as bc
from .boolean_core import BooleanFunction, Relation
from .linalg import MAX_DIM, eigvals, hat, kron_factor_first_fastest, composition_threshold_bits, matrix_composition, spectral_norm
from .programs import (
    DEFAULT_TOL,
    WITNESS_TOL,
    CertificateError,
    FunctionalAdversaryMatrix,
    FunctionalDualWitness,
    RelationalAdversaryMatrix,
    RelationalDualWitness,
    adv_primal_value,
    adv_rel_primal_value,
    check_functional_witness,
    check_relational_witness,
    efficient_verifiability_report,
    max_masked_norm,
    nsd_margins,
    solve_adv,
    solve_adv_rel,
)

DIRECT_GRAM_LIMIT = 200


@dataclass(frozen=True)
class BlockIndex:
    """Composed bit ``l = (p-1)m + q``: bit ``q`` of block ``p`` (all 1-indexed)."""

    l: int
    p: int
    q: int

    @classmethod
    def from_position(cls, l: int, m: int) -> "BlockIndex":
        if l < 1 or m < 1:
            raise bc.DomainError(f"invalid position {l} for block width {m}")
        p, q = divmod(l - 1, m)
        return cls(l, p + 1, q + 1)

    @classmethod
    def from_block(cls, p: int, q: int, m: int) -> "BlockIndex":
        if p < 1 or not 1 <= q <= m:
            raise bc.DomainError(f"invalid block position ({p}, {q}) for width {m}")
        return cls((p - 1) * m + q, p, q)


@dataclass
class Check:
    residual: float
    tolerance: float
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"residual": self.residual, "tolerance": self.tolerance, "pass": self.passed}
        if self.detail:
            out["detail"] = self.detail
        return out


@dataclass
class CompositionReport:
    lower_value: float | None = None
    upper_value: float | None = None
    direct_value: float | None = None
    checks: dict[str, Check] = field(default_factory=dict)
    values: dict[str, Any] = field(default_factory=dict)

    @property
    def verdict(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def add(self, name: str, residual: float, tolerance: float, passed: bool | None = None, **detail) -> Check:
        if passed is None:
            passed = residual <= tolerance
        check = Check(float(residual), float(tolerance), bool(passed), detail)
        self.checks[name] = check
        return check

    def to_json(self) -> dict:
        return {
            "lower_value": self.lower_value,
            "upper_value": self.upper_value,
            "direct_value": self.direct_value,
            "values": self.values,
            "checks": {k: c.to_json() for k, c in self.checks.items()},
            "verdict": "pass" if self.verdict else "fail",
        }


def composition_label_permutation(g: BooleanFunction, N: int) -> np.ndarray:
    """``perm[x]``: matrix-composition label of the composed input ``x``.

    Each factor orders ``g``'s 0-inputs ascending, then its 1-inputs; factor
    1 is the fastest-varying digit, matching block packing of inputs.
    """
    m = g.arity
    size = 1 << (N * m)
    if size > MAX_DIM:
        raise bc.SizeError(f"composed size {size} exceeds cap {MAX_DIM}")
    order = g.zeros() + g.ones()
    position = np.empty(1 << m, dtype=np.int64)
    position[order] = np.arange(1 << m)
    xs = np.arange(size)
    perm = np.zeros(size, dtype=np.int64)
    for p in range(N):
        perm += position[(xs >> (p * m)) & ((1 << m) - 1)] << (p * m)
    return perm


def _pull_back(C: np.ndarray, perm: np.ndarray) -> np.ndarray:
    return C[np.ix_(perm, perm)]


def compose_adversary_matrices(
    gamma_f: RelationalAdversaryMatrix, gamma_g: FunctionalAdversaryMatrix, tol: float = 1e-7
) -> RelationalAdversaryMatrix:
    """``Gamma_h``: matrix composition of ``Gamma_f`` with ``N`` copies of ``Z``."""
    N = gamma_f.f.arity
    bc._composed_arity(N, gamma_g.g.arity)
    Z = gamma_g.z_block
    C = matrix_composition(gamma_f.gamma, [Z] * N)
    gamma_h = _pull_back(C, composition_label_permutation(gamma_g.g, N))
    return RelationalAdversaryMatrix(bc.compose_relation(gamma_f.f, gamma_g.g), gamma_h, tol=tol)


def _label_difference(g: BooleanFunction, q: int) -> np.ndarray:
    order = g.zeros() + g.ones()
    D = bc.difference_matrix(g.arity, q)
    return D[np.ix_(order, order)]


def claim_sides(
    gamma_f: RelationalAdversaryMatrix, gamma_g: FunctionalAdversaryMatrix, p: int, q: int
) -> tuple[np.ndarray, np.ndarray]:
    """Both sides of the diagonal-replacement identity, in label space.

    Left uses ``hat(Gamma_g) o D_q`` in factor ``p``; right uses
    ``hat(Gamma_g o D_q)``.
    """
    N = gamma_f.f.arity
    g = gamma_g.g
    Z = gamma_g.z_block
    Zq = Z * bc.difference_matrix(g.arity, q)[np.ix_(g.zeros(), g.ones())]
    hat_g = hat(Z)
    left_factor = hat_g * _label_difference(g, q)
    right_factor = hat(Zq)
    labels = composition_threshold_bits([Z.shape] * N)
    outer = (gamma_f.gamma * bc.difference_matrix(N, p))[np.ix_(labels, labels)]
    left = outer * kron_factor_first_fastest([left_factor if k == p - 1 else hat_g for k in range(N)])
    right = outer * kron_factor_first_fastest([right_factor if k == p - 1 else hat_g for k in range(N)])
    return left, right


def verify_composed_lower(
    gamma_f: RelationalAdversaryMatrix,
    gamma_g: FunctionalAdversaryMatrix,
    item1_tol: float = 1e-6,
    nsd_tol: float = 1e-7,
    slack_tol: float = 1e-8,
    claim_tol: float = 1e-10,
    report: CompositionReport | None = None,
) -> CompositionReport:
    """Check the three items of the lower-bound construction plus the claim.

    Failures are recorded in the report, never raised.
    """
    report = report or CompositionReport()
    f, g = gamma_f.f, gamma_g.g
    N, m = f.arity, g.arity
    perm = composition_label_permutation(g, N)
    C = matrix_composition(gamma_f.gamma, [gamma_g.z_block] * N)
    gamma_h = _pull_back(C, perm)
    h = bc.compose_relation(f, g)

    norm_g = spectral_norm(gamma_g.gamma)
    w_f = eigvals(gamma_f.gamma)
    lam_f = float(w_f[0])
    lam_h = float(eigvals(gamma_h)[0])
    target = lam_f * norm_g**N
    scale = 1.0 + abs(target)
    # equality needs lambda_max(Gamma_f) = ||Gamma_f||; otherwise only the lower bound holds
    if lam_f >= -float(w_f[-1]) - item1_tol * (1.0 + abs(lam_f)):
        report.add("item1_lambda_max", abs(lam_h - target), item1_tol * scale, lambda_h=lam_h, product=target, mode="equality")
    else:
        report.add("item1_lambda_max", max(0.0, target - lam_h), item1_tol * scale, lambda_h=lam_h, product=target, mode="lower-bound")

    margins = nsd_margins(h, gamma_h)
    worst = max(margins.values())
    report.add("item2_nsd", max(worst, 0.0), nsd_tol, margins={str(a): v for a, v in margins.items()})

    slacks, claim_res, last_bit_res = {}, 0.0, 0.0
    masked_norms = []
    for p in range(1, N + 1):
        norm_fp = spectral_norm(gamma_f.gamma * bc.difference_matrix(N, p))
        for q in range(1, m + 1):
            idx = BlockIndex.from_block(p, q, m)
            Dl = bc.difference_matrix(N * m, idx.l)
            lhs = spectral_norm(gamma_h * Dl)
            masked_norms.append(lhs)
            bound = norm_fp * spectral_norm(gamma_g.gamma * bc.difference_matrix(m, q)) * norm_g ** (N - 1)
            slacks[str(idx.l)] = bound - lhs
            left, right = claim_sides(gamma_f, gamma_g, p, q)
            claim_res = max(claim_res, float(np.abs(left - right).max()))
            last_bit_res = max(last_bit_res, float(np.abs(_pull_back(left, perm) - gamma_h * Dl).max()))
    worst_slack = min(slacks.values())
    report.add("item3_masked_norms", max(0.0, -worst_slack), slack_tol, slacks=slacks)
    report.add("claim_diagonal", claim_res, claim_tol)
    report.add("masked_product_identity", last_bit_res, claim_tol)

    denom = max(masked_norms) if masked_norms else 0.0
    report.lower_value = lam_h / denom if lam_h > 0 and denom > 0 else 0.0
    report.values.update(
        {
            "lambda_max_h": lam_h,
            "lambda_max_f": lam_f,
            "norm_gamma_g": norm_g,
            "outer_ratio": adv_rel_primal_value(gamma_f),
            "inner_ratio": adv_primal_value(gamma_g),
        }
    )
    return report


def compose_dual_witnesses(w_f: RelationalDualWitness, w_g: FunctionalDualWitness, tol: float = WITNESS_TOL) -> RelationalDualWitness:
    """Witness for ``f o g^N`` from outer and inner witnesses.

    ``alpha_{x,l} = u^f_{x~,p} (x) u^g_{x_p,q}``, ``beta`` likewise with
    ``v``, and ``rho_{x,a} = sigma_{x~,a}``.
    """
    for name, cert in (("outer", check_relational_witness(w_f, tol)), ("inner", check_functional_witness(w_g, tol))):
        if not cert.valid:
            raise CertificateError(f"{name} witness is invalid: {cert.residuals}")
    f, g = w_f.f, w_g.g
    N, m = f.arity, g.arity
    bc._composed_arity(N, m)
    size = 1 << (N * m)
    xs = np.arange(size)
    tl = bc.tilde_map(g, N)
    blocks = np.stack([(xs >> (p * m)) & ((1 << m) - 1) for p in range(N)], axis=1)
    df, dg = w_f.dim, w_g.dim

    def combine(outer: np.ndarray, inner: np.ndarray) -> np.ndarray:
        out = np.empty((size, N * m, df * dg))
        for p in range(N):
            o = outer[tl, p, :]  # (size, df)
            i = inner[blocks[:, p]]  # (size, m, dg)
            out[:, p * m : (p + 1) * m, :] = (o[:, None, :, None] * i[:, :, None, :]).reshape(size, m, df * dg)
        return out

    alpha = combine(w_f.u, w_g.u)
    beta = combine(w_f.v, w_g.v)
    rho = w_f.sigma[tl].copy()
    return RelationalDualWitness(bc.compose_relation(f, g), alpha, beta, rho)


def functional_composition_check(f: BooleanFunction, g: BooleanFunction, tol: float = 1e-3, sdp_tol: float = DEFAULT_TOL) -> CompositionReport:
    """Compare ``ADV(f o g^N)`` with ``ADV(f) ADV(g)`` by three solves."""
    h = bc.compose_function(f, g)
    vf, vg, vh = (solve_adv(x, sdp_tol).value for x in (f, g, h))
    report = CompositionReport(direct_value=vh)
    product = vf * vg
    report.values.update({"adv_f": vf, "adv_g": vg, "adv_h": vh, "product": product})
    report.add("product_equality", abs(vh - product), tol * max(product, 1e-12) if product > 0 else tol)
    return report


def gram_dimension(f: Relation) -> int:
    return 2 * f.arity * f.size + len(bc.totalize(f).support())


def relational_composition_check(
    f: Relation,
    g: BooleanFunction,
    tol: float = 1e-2,
    direct: bool | None = None,
    order_slack: float = 1e-3,
    sdp_tol: float = DEFAULT_TOL,
    verifiability: bool = True,
) -> CompositionReport:
    """Three-route check of ``ADV_rel(f o g^N) = ADV_rel(f) ADV(g)``.

    ``direct=None`` runs the direct solve only when its Gram dimension is at
    most ``DIRECT_GRAM_LIMIT``.
    """
    f = bc.totalize(f)
    h = bc.compose_relation(f, g)
    timings = {}
    t0 = time.perf_counter()
    cert_f = solve_adv_rel(f, sdp_tol)
    cert_g = solve_adv(g, sdp_tol)
    timings["factor_solves"] = time.perf_counter() - t0

    report = CompositionReport()
    report.values.update({"adv_rel_f": cert_f.value, "adv_g": cert_g.value, "product": cert_f.value * cert_g.value})

    t0 = time.perf_counter()
    verify_composed_lower(cert_f.artifacts["primal"], cert_g.artifacts["primal"], report=report)
    timings["lower"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    composed = compose_dual_witnesses(cert_f.artifacts["witness"], cert_g.artifacts["witness"])
    upper = check_relational_witness(composed)
    timings["upper"] = time.perf_counter() - t0
    report.upper_value = upper.value
    in_res = cert_f.residuals["constraint"] + cert_g.residuals["constraint"]
    bound = 3 * in_res * (1 + cert_f.value + cert_g.value) + 1e-12
    report.add("upper_witness_residual", upper.residuals["constraint"], max(bound, WITNESS_TOL))
    report.add("upper_normalization", upper.residuals["normalization"], WITNESS_TOL)
    report.add(
        "upper_value_bound",
        max(0.0, upper.value - cert_f.value * cert_g.value),
        1e-9 * (1 + cert_f.value * cert_g.value),
    )

    if direct is None:
        direct = gram_dimension(h) <= DIRECT_GRAM_LIMIT
    if direct:
        t0 = time.perf_counter()
        cert_h = solve_adv_rel(h, sdp_tol)
        timings["direct"] = time.perf_counter() - t0
        report.direct_value = cert_h.value
        report.add("direct_witness_residual", cert_h.residuals["constraint"], WITNESS_TOL)

    lo, up = report.lower_value, report.upper_value
    scale = 1.0 + up
    report.add("lower_upper_agreement", abs(up - lo), tol * scale)
    report.add("lower_le_upper", max(0.0, lo - up), order_slack)
    if report.direct_value is not None:
        d = report.direct_value
        report.add("lower_direct_agreement", abs(d - lo), tol * scale)
        report.add("direct_upper_agreement", abs(up - d), tol * scale)
        report.add("lower_le_direct", max(0.0, lo - d), order_slack)
        report.add("direct_le_upper", max(0.0, d - up), order_slack)

    if verifiability:
        if direct:
            ver = efficient_verifiability_report(h, sdp_tol)
            ver["source"] = "direct solves on the composed relation"
        else:
            ver = efficient_verifiability_report(f, sdp_tol)
            ver["source"] = "outer relation; slice and relational values both scale by ADV(g)"
        ver["ratios"] = {str(a): r for a, r in ver["ratios"].items()}
        ver["slice_values"] = {str(a): r for a, r in ver["slice_values"].items()}
        report.values["verifiability"] = ver
    report.values["wall_time_s"] = timings
    return report
