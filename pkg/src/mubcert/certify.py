"""Certified bounds on measurement properties from an observed ASP.

Given the average success probability p of the 2^d -> 1 random access
code, four quantities of the measurement pair can be certified without
modeling the devices:

* a lower bound on the overlap entropy, ``2*log2(d*sqrt(d)*(2p-1))`` bits;
* a lower bound on the sum of effect norms,
  ``d - ((2+sqrt(2))/d) * (1 - sqrt(d^3*(2p-1)^2 - (d^2-1)))``;
* an upper bound on the maximal square-root-effect overlap,
  ``(2p-1) + (1/d)*sqrt(d*(d^2-1)*(1 - d*(2p-1)^2))``, obtained by
  Cauchy-Schwarz from the overlap sum constraints;
* an upper bound on the incompatibility robustness, evaluated by feeding
  the certified norm-sum and overlap extremes into
  ``[d^2(1+s)/2 - N^2/d] / [N^2 - d - (d-N)(d-N+1)]``;
* a state-independent lower bound on the outcome-entropy sum
  ``H(A) + H(B)``, equal to ``-2*log2`` of the overlap upper bound.

At the quantum optimum every bound reaches its exact MUB value.  All
entropies are in bits.  Uncertainties are first-order Gaussian (delta
method) with finite differences.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import (
    BelowThreshold,
    BoundInapplicableInWindow,
    DenominatorNonpositive,
    OutOfRange,
)
from .qrac import AspEstimate, quantum_optimum

# Bisection / finite-difference controls.
_BISECT_TOL = 1e-10
_FD_STEP_CAP = 1e-6


def _check_dim(d: int) -> None:
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")


def norm_sum_threshold(d: int) -> float:
    """Smallest ASP at which the norm-sum bound applies."""
    _check_dim(d)
    return 0.5 * (1.0 + math.sqrt((d * d - 1.0) / d**3))


def bound_overlap_entropy(p: float, d: int) -> float:
    """Certified lower bound on the overlap entropy, in bits.

    Applicable for p in (1/2, 1]; the raw value is clamped below at 0.
    """
    _check_dim(d)
    if not 0.5 < p <= 1.0:
        raise OutOfRange(f"ASP {p} outside (1/2, 1]")
    value = 2.0 * math.log2(d * math.sqrt(d) * (2.0 * p - 1.0))
    return max(value, 0.0)


def bound_norm_sum(p: float, d: int) -> float:
    """Certified lower bound on the sum of effect operator norms.

    Applicable once ``d^3*(2p-1)^2 >= d^2 - 1``; below that threshold the
    bound carries no information and BelowThreshold is raised.
    """
    _check_dim(d)
    if not 0.5 < p <= 1.0:
        raise OutOfRange(f"ASP {p} outside (1/2, 1]")
    disc = d**3 * (2.0 * p - 1.0) ** 2 - (d * d - 1.0)
    edge = (d * d - 1.0) * 1e-13  # rounding scale of the subtraction
    if disc < -edge:
        raise BelowThreshold(
            f"ASP {p} below norm-sum threshold {norm_sum_threshold(d):.6f}"
        )
    if disc < edge:
        disc = 0.0
    return d - ((2.0 + math.sqrt(2.0)) / d) * (1.0 - math.sqrt(disc))


def bound_max_sqrt_overlap(p: float, d: int) -> float:
    """Certified upper bound on ``max_ij ||sqrt(A_i) sqrt(B_j)||``.

    Applicable for p in (1/2, (1 + 1/sqrt(d))/2]; equals ``1/sqrt(d)`` at
    the quantum optimum.
    """
    _check_dim(d)
    u = 2.0 * p - 1.0
    if not (p > 0.5 and d * u * u <= 1.0 + 1e-14):
        raise OutOfRange(f"ASP {p} outside (1/2, quantum optimum] for d={d}")
    bracket = 1.0 - d * u * u
    # rounding of u near the optimum leaves a ~1e-16 residual that the
    # square root would amplify to ~1e-8; treat it as the exact boundary
    if bracket < 1e-14:
        bracket = 0.0
    return u + math.sqrt(d * (d * d - 1.0) * bracket) / d


def bound_entropic(p: float, d: int) -> float:
    """Certified lower bound on ``H(A) + H(B)`` over all states, in bits.

    Structural identity: this is ``-2*log2`` of the square-root-overlap
    bound, clamped to ``[0, log2 d]``.
    """
    value = -2.0 * math.log2(bound_max_sqrt_overlap(p, d))
    return min(max(value, 0.0), math.log2(d))


def bound_incompatibility(norm_lower: float, smax_upper: float, d: int) -> float:
    """Upper bound on the incompatibility robustness from certified extremes.

    Evaluated at the norm sum's certified lower bound and the overlap's
    certified upper bound (the conservative direction on the applicable
    range); capped at the trivial value 1.
    """
    _check_dim(d)
    n = norm_lower
    den = n * n - d - (d - n) * (d - n + 1.0)
    if den <= 0.0:
        raise DenominatorNonpositive(
            f"incompatibility bound undefined at norm lower bound {n:.6f}"
        )
    num = 0.5 * d * d * (1.0 + smax_upper) - n * n / d
    return min(num / den, 1.0)


def mub_incompat_value(d: int) -> float:
    """Incompatibility robustness of an exact MUB pair: (1 + 1/(sqrt(d)+1))/2."""
    _check_dim(d)
    return 0.5 * (1.0 + 1.0 / (math.sqrt(d) + 1.0))


# -- error propagation --------------------------------------------------------

def _bound_domain(bound_id: str, d: int) -> tuple[float, float, bool]:
    """(lower, upper, upper_edge_singular) of the applicability interval."""
    pq = quantum_optimum(d)
    if bound_id == "hs":
        return 0.5, 1.0, False
    if bound_id == "norm_sum":
        return norm_sum_threshold(d), 1.0, False
    if bound_id in ("smax", "entropic"):
        return 0.5, pq, True
    raise ValueError(f"unknown bound id {bound_id!r}; expected one of "
                     "'hs', 'norm_sum', 'smax', 'entropic'")


def _bound_function(bound_id: str):
    functions = {
        "hs": bound_overlap_entropy,
        "norm_sum": bound_norm_sum,
        "smax": bound_max_sqrt_overlap,
        "entropic": bound_entropic,
    }
    if bound_id not in functions:
        raise ValueError(f"unknown bound id {bound_id!r}; expected one of "
                         f"{sorted(functions)}")
    return functions[bound_id]


def propagate_error(bound_id: str, p: float, sigma: float, d: int) -> float:
    """One-sigma uncertainty |df/dp| * sigma of a bound, by finite differences.

    The step is ``min(sigma, 1e-6)``; central differences are used where
    the window stays inside the bound's applicability interval, one-sided
    differences at its edges.  At the quantum optimum itself (where the
    overlap and entropic bounds have a square-root singularity) the
    backward sigma-step difference ``|f(p) - f(p - sigma)|`` is returned.
    """
    if sigma < 0.0:
        raise ValueError("sigma must be nonnegative")
    f = _bound_function(bound_id)
    lo, hi, singular = _bound_domain(bound_id, d)
    if not lo < p <= hi:
        raise BoundInapplicableInWindow(
            f"bound {bound_id!r} not applicable at ASP {p} for d={d}"
        )
    if sigma == 0.0:
        return 0.0
    h = min(sigma, _FD_STEP_CAP)
    if singular and p >= hi - 1e-15:
        back = max(p - sigma, lo + (hi - lo) * 1e-9)
        return abs(f(p, d) - f(back, d))
    if p + h <= hi and p - h >= lo + (hi - lo) * 1e-12:
        return abs(f(p + h, d) - f(p - h, d)) / (2.0 * h) * sigma
    if p + h > hi:
        return abs(f(p, d) - f(p - h, d)) / h * sigma
    return abs(f(p + h, d) - f(p, d)) / h * sigma


# -- the full certificate -----------------------------------------------------

@dataclass
class BoundResult:
    """One certified bound: value and uncertainty, or the reason it is absent."""

    value: float | None
    sigma: float | None
    applicable: bool
    reason: str = "ok"

    def as_dict(self) -> dict | None:
        if not self.applicable:
            return None
        return {"value": self.value, "sigma": self.sigma}


@dataclass
class CertificateReport:
    """Observed ASP plus all certified bounds and their MUB reference values."""

    d: int
    asp: AspEstimate
    hs_lower: BoundResult
    norm_sum_lower: BoundResult
    smax_upper: BoundResult
    incompat_upper: BoundResult
    entropic_lower: BoundResult
    ideal_refs: dict
    warnings: list = field(default_factory=list)

    def applicability(self) -> dict:
        return {
            "hs": self.hs_lower.reason,
            "norm_sum": self.norm_sum_lower.reason,
            "smax": self.smax_upper.reason,
            "incompatibility": self.incompat_upper.reason,
            "entropic": self.entropic_lower.reason,
        }

    def as_dict(self) -> dict:
        return {
            "d": self.d,
            "asp": {"value": self.asp.value, "sigma": self.asp.sigma},
            "hs_lower": self.hs_lower.as_dict(),
            "norm_sum_lower": self.norm_sum_lower.as_dict(),
            "smax_upper": self.smax_upper.as_dict(),
            "incompat_upper": self.incompat_upper.as_dict(),
            "entropic_lower": self.entropic_lower.as_dict(),
            "ideal_refs": self.ideal_refs,
            "applicability": self.applicability(),
            "warnings": list(self.warnings),
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2)


def _inapplicable(reason: str) -> BoundResult:
    return BoundResult(value=None, sigma=None, applicable=False, reason=reason)


def full_certificate(asp: AspEstimate, d: int) -> CertificateReport:
    """Evaluate every certified bound at an observed ASP, with uncertainties.

    The ASP must lie in (1/2, quantum optimum]; a value above the optimum
    by at most three sigma is clamped to the optimum and flagged, anything
    further renders every bound inapplicable.  Inapplicability is reported
    in-band, never raised.
    """
    _check_dim(d)
    pq = quantum_optimum(d)
    ideal_refs = {
        "hs": 2.0 * math.log2(d),
        "norm": float(d),
        "eta": mub_incompat_value(d),
        "entropy": math.log2(d),
    }
    warnings: list[str] = []
    p = asp.value
    sigma = asp.sigma

    reason_all = None
    if p > pq:
        if p - pq <= 3.0 * sigma:
            warnings.append(
                f"ASP {p:.6g} above the quantum optimum {pq:.6g} within 3 sigma; "
                "clamped to the optimum"
            )
            p = pq
        else:
            reason_all = (
                f"ASP {p:.6g} exceeds the quantum optimum {pq:.6g} "
                "by more than 3 sigma"
            )
    if p <= 0.5:
        reason_all = f"ASP {p:.6g} at or below the classical midpoint 1/2"

    if reason_all is not None:
        absent = _inapplicable(reason_all)
        return CertificateReport(
            d=d, asp=asp,
            hs_lower=absent, norm_sum_lower=absent, smax_upper=absent,
            incompat_upper=absent, entropic_lower=absent,
            ideal_refs=ideal_refs, warnings=warnings,
        )

    def evaluate(bound_id: str) -> BoundResult:
        f = _bound_function(bound_id)
        try:
            value = f(p, d)
            err = propagate_error(bound_id, p, sigma, d)
        except (OutOfRange, BelowThreshold, BoundInapplicableInWindow) as exc:
            return _inapplicable(str(exc))
        return BoundResult(value=value, sigma=err, applicable=True)

    hs = evaluate("hs")
    if hs.applicable and hs.value == 0.0:
        warnings.append("overlap-entropy bound clamped to 0 bits")
    norm = evaluate("norm_sum")
    smax = evaluate("smax")
    entropic = evaluate("entropic")
    if entropic.applicable and entropic.value == 0.0:
        warnings.append("entropic bound clamped to 0 bits")

    if norm.applicable and smax.applicable:
        try:
            eta_value = bound_incompatibility(norm.value, smax.value, d)
        except DenominatorNonpositive as exc:
            eta = _inapplicable(str(exc))
        else:
            if eta_value >= 1.0:
                warnings.append("incompatibility bound capped at the trivial value 1")
            # uncertainty convention: the sqrt-overlap factor dominates the
            # chain, so its propagated error is reported for this bound
            eta = BoundResult(value=eta_value, sigma=smax.sigma, applicable=True)
    else:
        eta = _inapplicable(
            norm.reason if not norm.applicable else smax.reason
        )

    return CertificateReport(
        d=d, asp=asp,
        hs_lower=hs, norm_sum_lower=norm, smax_upper=smax,
        incompat_upper=eta, entropic_lower=entropic,
        ideal_refs=ideal_refs, warnings=warnings,
    )


def min_asp_for_nontrivial_eta(d: int) -> float:
    """Smallest ASP at which the incompatibility bound is informative (< 1).

    Found by bisection to 1e-10 between the norm-sum threshold and the
    quantum optimum; at the returned point the bound chain is applicable
    and strictly below the trivial cap, while just below it it is either
    inapplicable or trivial.
    """
    _check_dim(d)

    def nontrivial(p: float) -> bool:
        try:
            eta = bound_incompatibility(
                bound_norm_sum(p, d), bound_max_sqrt_overlap(p, d), d
            )
        except (BelowThreshold, OutOfRange, DenominatorNonpositive):
            return False
        return eta < 1.0

    lo = norm_sum_threshold(d)
    hi = quantum_optimum(d)
    if nontrivial(lo):
        return lo
    while hi - lo > _BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if nontrivial(mid):
            hi = mid
        else:
            lo = mid
    return hi


def report_table(report: CertificateReport) -> str:
    """Human-readable comparison of each bound to its ideal MUB value."""
    pq = quantum_optimum(report.d)
    rows = [
        ("overlap entropy", ">=", report.hs_lower, report.ideal_refs["hs"], "bits"),
        ("norm sum       ", ">=", report.norm_sum_lower, report.ideal_refs["norm"], ""),
        ("sqrt overlap   ", "<=", report.smax_upper, 1.0 / math.sqrt(report.d), ""),
        ("incompatibility", "<=", report.incompat_upper, report.ideal_refs["eta"], ""),
        ("entropy sum    ", ">=", report.entropic_lower, report.ideal_refs["entropy"], "bits"),
    ]
    lines = [
        f"certificate for d={report.d}, "
        f"ASP = {report.asp.value:.6g} +/- {report.asp.sigma:.3g} "
        f"(quantum optimum {pq:.6g})",
    ]
    for label, op, bound, ideal, unit in rows:
        if bound.applicable:
            lines.append(
                f"  {label} {op} {bound.value:<10.6g} +/- {bound.sigma:<10.3g} "
                f"(ideal MUB value {ideal:.6g}{' ' + unit if unit else ''})"
            )
        else:
            lines.append(f"  {label}    inapplicable: {bound.reason}")
    for w in report.warnings:
        lines.append(f"  note: {w}")
    return "\n".join(lines)
