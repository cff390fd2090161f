"""Self-checks of the analytic formulas against independent oracles.

Each suite returns a list of :class:`Check` records.  Reports contain no
timings or host data, so equal inputs give byte-identical JSON.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate, stats

from . import __version__
from .bimatrix import (
    bgb1_logpdf,
    bgb1_logpdf_series,
    bgb1_mass_m1,
    bgb2_mass_m1,
    det_moment,
    det_moment_mc,
    det_moment_quad_m1,
    inverse_pair_logpdf,
    inverse_pair_pdf_m1,
    joint_eig_logpdf,
    joint_eig_pdf_batch,
    sample_bgb1,
    sample_bgb2,
    sharded_bgb1,
    z_det_moment,
    z_pdf_m1,
)
from .distributions import batch_beta1_to_beta2, sample_cbeta1, sample_cbeta2
from .errors import DomainError
from .hermitian import random_unitary, conjugate_diag
from .matfun import BimatrixParams, TruncationPolicy, hyp_pfq
from .maxeig import maxeig_cdf_grid, rect_prob_quad_m1
from .mc import MCEstimate
from .partitions import enumerate_partitions, zonal_C
from .rng import make_rng

LEVEL = 0.01


@dataclass
class Check:
    name: str
    passed: bool
    measured: float
    target: float
    tolerance: float
    detail: dict = field(default_factory=dict)


def _rel(x: float, y: float) -> float:
    return abs(x - y) / max(abs(y), 1e-300)


def _within(name, measured, target, tol, relative=False, **detail) -> Check:
    err = _rel(measured, target) if relative else abs(measured - target)
    return Check(name, bool(err <= tol), float(measured), float(target), float(tol),
                 {"error": float(err), "reading": f"{measured:.6f}", **detail})


def _mc_check(name, est: MCEstimate, target: float, k: float = 3.0) -> Check:
    z = est.z_score(target)
    return Check(name, bool(z <= k), est.mean, float(target), k * est.std_error,
                 {"std_error": est.std_error, "z": float(z), "n": est.n})


def _pvalue_check(name, pvalue: float, **detail) -> Check:
    return Check(name, bool(pvalue >= LEVEL), float(pvalue), LEVEL, LEVEL, detail)


def random_unit_pair(m: int, rng, low: float = 0.05, high: float = 0.95):
    """Random ``0 < U < I`` matrices with eigenvalues in ``(low, high)``."""
    out = []
    for _ in range(2):
        w = rng.uniform(low, high, m)
        out.append(conjugate_diag(w, random_unitary(m, rng)))
    return out


# -- suites ---------------------------------------------------------------------------

def bgb1_normalization(p: BimatrixParams, seed: int, n: int) -> list[Check]:
    if p.m == 1:
        return [_within("bgb1.normalization.quadrature", bgb1_mass_m1(p), 1.0, 1e-6)]
    return eig_normalization(p, seed, n)


def bgb1_moments(p: BimatrixParams, seed: int, n: int) -> list[Check]:
    out = [_within("bgb1.moments.order_zero", det_moment(p, 0, 0).value, 1.0, 0.0)]
    series = det_moment(p, 1, 1)
    out.append(_mc_check("bgb1.moments.series_vs_mc", det_moment_mc(p, 1, 1, n, seed), series.value))
    if p.m == 1:
        out.append(_within("bgb1.moments.series_vs_quadrature", series.value, det_moment_quad_m1(p, 1, 1),
                           1e-5, relative=True))
    return out


def bgb1_marginals(p: BimatrixParams, seed: int, n: int) -> list[Check]:
    s = sample_bgb1(p, make_rng(seed), size=n)
    if p.m == 1:
        u1, u2 = s.first[:, 0, 0].real, s.second[:, 0, 0].real
        return [
            _pvalue_check("bgb1.marginals.u1_ks", stats.kstest(u1, stats.beta(p.a, p.c).cdf).pvalue),
            _pvalue_check("bgb1.marginals.u2_ks", stats.kstest(u2, stats.beta(p.b, p.c).cdf).pvalue),
        ]
    ref1 = sample_cbeta1(p.a, p.c, p.m, make_rng(seed, 1), size=n)
    ref2 = sample_cbeta1(p.b, p.c, p.m, make_rng(seed, 2), size=n)
    ld = lambda U: np.sum(np.log(np.linalg.eigvalsh(U)), axis=-1)
    return [
        _pvalue_check("bgb1.marginals.u1_logdet_ks", stats.ks_2samp(ld(s.first), ld(ref1)).pvalue),
        _pvalue_check("bgb1.marginals.u2_logdet_ks", stats.ks_2samp(ld(s.second), ld(ref2)).pvalue),
    ]


def bgb1_series(p: BimatrixParams, seed: int, n: int, points: int = 10) -> list[Check]:
    rng = make_rng(seed)
    worst = 0.0
    for _ in range(points):
        U1, U2 = random_unit_pair(p.m, rng, 0.05, 0.83)
        closed = bgb1_logpdf(U1, U2, p)
        ser = bgb1_logpdf_series(U1, U2, p).value
        worst = max(worst, abs(math.expm1(ser - closed)))
    return [_within("bgb1.series.mixture_vs_closed", worst, 0.0, 1e-8, points=points)]


def bgb2_normalization(p: BimatrixParams, seed: int, n: int) -> list[Check]:
    if p.m != 1:
        raise DomainError("bgb2 normalization check runs at m = 1")
    return [_within("bgb2.normalization.quadrature", bgb2_mass_m1(p), 1.0, 1e-6)]


def bgb2_pushforward(p: BimatrixParams, seed: int, n: int) -> list[Check]:
    s1 = sample_bgb1(p, make_rng(seed), size=n)
    s2 = sample_bgb2(p, make_rng(seed, 1), size=n)
    F1 = batch_beta1_to_beta2(s1.first)
    ld = lambda F: np.sum(np.log(np.linalg.eigvalsh(F)), axis=-1)
    return [_pvalue_check("bgb2.pushforward.logdet_ks", stats.ks_2samp(ld(F1), ld(s2.first)).pvalue)]


def hyp_determinant(p: BimatrixParams, seed: int, n: int) -> list[Check]:
    rng = make_rng(seed)
    worst = 0.0
    for a in (0.5, 2.0, 7.25):
        x = rng.uniform(-0.5, 0.5, p.m)
        got = hyp_pfq([a], [], x, TruncationPolicy(30, 1e-15)).value
        worst = max(worst, _rel(got, float(np.prod(1 - x)) ** (-a)))
    return [_within("hyp.determinant.1f0", worst, 0.0, 1e-8)]


def zonal_sum(p: BimatrixParams, seed: int, n: int) -> list[Check]:
    rng = make_rng(seed)
    worst = 0.0
    for _ in range(5):
        x = rng.uniform(0, 1, p.m)
        for t in range(9):
            total = sum(zonal_C(tau, x) for tau in enumerate_partitions(t, p.m))
            worst = max(worst, _rel(total, float(np.sum(x)) ** t))
    return [_within("zonal.sum_identity", worst, 0.0, 1e-10)]


def z_normalization(p: BimatrixParams, seed: int, n: int) -> list[Check]:
    if p.m != 1:
        raise DomainError("z normalization check runs at m = 1")
    mass, _ = integrate.quad(lambda z: float(z_pdf_m1(z, p)[0]), 0, 1, epsabs=1e-10, epsrel=1e-10, limit=200)
    return [_within("z.normalization.quadrature", mass, 1.0, 1e-5)]


def z_moments(p: BimatrixParams, seed: int, n: int) -> list[Check]:
    zero = z_det_moment(p, 0.0)
    out = [_within("z.moments.order_zero", zero.value, 1.0, 1e-6)]
    one = z_det_moment(p, 1.0)
    out.append(_within("z.moments.vs_det_moment", one.value, det_moment(p, 1, 1).value, 1e-6, relative=True))
    return out


def inverse_checks(p: BimatrixParams, seed: int, n: int) -> list[Check]:
    rng = make_rng(seed)
    worst = 0.0
    for _ in range(20):
        U1, U2 = random_unit_pair(p.m, rng)
        V1, V2 = np.linalg.inv(U1), np.linalg.inv(U2)
        lhs = inverse_pair_logpdf(V1, V2, p) + 2 * p.m * (np.linalg.slogdet(V1)[1] + np.linalg.slogdet(V2)[1])
        worst = max(worst, abs(lhs - bgb1_logpdf(U1, U2, p)))
    out = [_within("inverse.change_of_variables", worst, 0.0, 1e-10)]
    if p.m == 1:
        mass, _ = integrate.dblquad(lambda v, u: float(inverse_pair_pdf_m1(u, v, p)), 1, np.inf, 1, np.inf,
                                    epsabs=1e-10, epsrel=1e-10)
        out.append(_within("inverse.normalization.quadrature", mass, 1.0, 1e-5))
    return out


def eig_collapse(p: BimatrixParams, seed: int, n: int) -> list[Check]:
    if p.m != 1:
        raise DomainError("collapse check runs at m = 1")
    rng = make_rng(seed)
    worst = 0.0
    for _ in range(20):
        lam, dl = rng.uniform(0.05, 0.9, 2)
        got = joint_eig_logpdf([lam], [dl], p).value
        worst = max(worst, abs(math.expm1(got - bgb1_logpdf([[lam]], [[dl]], p))))
    return [_within("eig.collapse_m1", worst, 0.0, 1e-10)]


def eig_normalization(p: BimatrixParams, seed: int, n: int) -> list[Check]:
    """Mass of the joint eigenvalue density on the ordered region, by uniform
    sampling: ``vol * mean(f)`` with ``vol = 1/(m!)^2``."""
    rng = make_rng(seed)
    lam = -np.sort(-rng.uniform(size=(n, p.m)), axis=1)
    dl = -np.sort(-rng.uniform(size=(n, p.m)), axis=1)
    f = joint_eig_pdf_batch(lam, dl, p) / math.factorial(p.m) ** 2
    est = MCEstimate.from_values(f, seed)
    return [_mc_check("eig.normalization.mc", est, 1.0)]


def maxeig_oracle(p: BimatrixParams, seed: int, n: int) -> list[Check]:
    if p.m != 1:
        raise DomainError("the quadrature oracle runs at m = 1")
    grid = (0.3, 0.5, 0.8)
    est = maxeig_cdf_grid(p, grid, grid, n, seed)
    out = []
    for i, x in enumerate(grid):
        for j, y in enumerate(grid):
            out.append(_mc_check(f"maxeig.oracle.{x}_{y}", est[i][j], rect_prob_quad_m1(p, x, y)))
    corner = maxeig_cdf_grid(p, [1.0], [1.0], n, seed)[0][0]
    out.append(_within("maxeig.corner", corner.mean, 1.0, 0.0))
    return out


SUITES = {
    "bgb1": {"normalization": bgb1_normalization, "moments": bgb1_moments,
             "marginals": bgb1_marginals, "series": bgb1_series},
    "bgb2": {"normalization": bgb2_normalization, "pushforward": bgb2_pushforward},
    "hyp": {"determinant": hyp_determinant},
    "zonal": {"sum": zonal_sum},
    "z": {"normalization": z_normalization, "moments": z_moments},
    "inverse": {"density": inverse_checks},
    "eig": {"collapse": eig_collapse, "normalization": eig_normalization},
    "maxeig": {"oracle": maxeig_oracle},
}

DEFAULT_SUITES = {
    "bgb1": ("normalization", "moments", "marginals"),
}


def run_suites(target: str, suites, p: BimatrixParams, seed: int, n: int) -> dict:
    if target not in SUITES:
        raise DomainError(f"unknown verify target {target!r}; choose from {sorted(SUITES)}")
    names = list(suites) if suites else list(DEFAULT_SUITES.get(target, SUITES[target]))
    checks = []
    for name in names:
        if name not in SUITES[target]:
            raise DomainError(f"unknown suite {name!r} for {target}; choose from {sorted(SUITES[target])}")
        checks.extend(SUITES[target][name](p, seed, n))
    return {
        "version": __version__,
        "target": target,
        "suites": names,
        "params": {"a": p.a, "b": p.b, "c": p.c, "m": p.m},
        "seed": seed,
        "n": n,
        "passed": all(c.passed for c in checks),
        "checks": [asdict(c) for c in checks],
    }


def report_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"
