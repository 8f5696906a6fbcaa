"""Verification campaigns assembled from the numerical modules.

Every campaign returns a list of :class:`CheckRecord`; numerical aborts become
failed records instead of exceptions.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from . import limits as L
from . import rmatrix as rm
from . import structfn as sf
from . import surfaces as su
from .errors import EllipticError, PoleProximity
from .params import ModelParams
from .report import CheckRecord
from .sampling import DEFAULT_SEED, log_annulus_points, resampled
from .theta import DEFAULT_TRUNCATION, Truncation

IDENTITY_TOL = 1e-9
GL2_TOL = 1e-10
LOCUS_TOL = 1e-8
CONTROL_FLOOR = 1e-4
SCALING_TOL = 1e-4
POISSON_TOL = 1e-5


def _rng(seed, tag):
    # one independent stream per named check keeps records stable when others are added
    return np.random.default_rng([int(seed), *tag.encode()])


def _guarded(name, anchor, threshold, compute, bound="below", note=""):
    try:
        value, samples = compute()
    except (EllipticError, ArithmeticError, RuntimeError, np.linalg.LinAlgError) as exc:
        return CheckRecord.failure(name, anchor, threshold, exc)
    return CheckRecord.from_residual(name, anchor, value, threshold, samples, note, bound)


def _sampled(name, anchor, threshold, fn, seed, samples, points=1):
    def compute():
        pairs = resampled(fn, samples, _rng(seed, name), skip=(PoleProximity,), points=points)
        return max(v for _, v in pairs), samples

    return _guarded(name, anchor, threshold, compute)


# --- R-matrix identities -----------------------------------------------------------

def rmatrix_suite(params: ModelParams, samples=16, seed=DEFAULT_SEED, trunc: Truncation = DEFAULT_TRUNCATION,
                  max_m=4, antisymmetrizer=True):
    """All matrix identities at one parameter point."""
    records = []
    try:
        params.require_nomes()
    except EllipticError as exc:
        return [CheckRecord.failure("rmatrix.parameters", "admissible nomes", IDENTITY_TOL, exc)]

    def add(name, anchor, fn, points=1):
        records.append(_sampled(f"rmatrix.{name}", anchor, IDENTITY_TOL, fn, seed, samples, points))

    add("ybe", "Yang-Baxter equation",
        lambda lz, lw: rm.ybe_residual(params, trunc=trunc, log_z=lz, log_w=lw), points=2)
    add("unitarity", "unitarity R12(z) R21(1/z) = 1",
        lambda lz: rm.unitarity_residual(params, trunc=trunc, log_z=lz))
    records.append(_guarded("rmatrix.regularity", "regularity R(1) = P", IDENTITY_TOL,
                            lambda: (rm.regularity_residual(params, trunc), 1)))
    add("crossing", "crossing symmetry",
        lambda lz: rm.crossing_residual(params, trunc=trunc, log_z=lz))
    add("antisymmetry", "antisymmetry under z -> -z",
        lambda lz: rm.antisymmetry_residual(params, trunc=trunc, log_z=lz))
    add("quasi_periodicity", "quasi-periodicity under z -> -p^(1/2) z",
        lambda lz: rm.quasi_periodicity_residual(params, trunc=trunc, log_z=lz))
    add("inversion_transpose", "inverse/partial-transpose relation of Rhat",
        lambda lz: rm.inversion_transpose_residual(params, trunc=trunc, log_z=lz))
    add("rhat_unitarity", "Rhat unitarity with scalar U",
        lambda lz: rm.rhat_unitarity_residual(params, trunc=trunc, log_z=lz))
    add("u_factorization", "U(z) = tau_N(q^(1/2) z) tau_N(q^(1/2)/z)",
        lambda lz: rm.u_factorization_residual(params, trunc=trunc, log_z=lz))
    for m in range(-max_m, max_m + 1):
        if m == 0:
            continue
        for starred in (False, True):
            tag = f"rmatrix.intertwiner[m={m:+d},{'starred' if starred else 'plain'}]"
            records.append(_sampled(
                tag, "intertwining relation for G^m" + (" (starred)" if starred else ""), IDENTITY_TOL,
                lambda lx, m=m, st=starred: rm.intertwiner_residual(params, m, starred=st, trunc=trunc, log_x=lx),
                seed, samples))
    if params.N == 2:
        records.append(gl2_record(params, samples, seed, trunc))
        if antisymmetrizer:
            records.extend(antisymmetrizer_records(params, trunc))
    return records


def gl2_entry_difference(params, log_z, trunc=DEFAULT_TRUNCATION):
    """Entrywise relative difference between the generic builder and the explicit N = 2 matrix."""
    A = rm.build_Z(params, trunc=trunc, log_z=log_z)
    B = rm.explicit_gl2(params, trunc=trunc, log_z=log_z)
    scale = max(np.max(np.abs(B)), 1e-300)
    nz = np.abs(B) > 1e-13 * scale
    rel = np.abs(A - B)[nz] / np.abs(B)[nz]
    off = np.max(np.abs(A - B)[~nz]) / scale if np.any(~nz) else 0.0
    return float(max(np.max(rel), off))


def gl2_record(params, samples=16, seed=DEFAULT_SEED, trunc=DEFAULT_TRUNCATION):
    return _sampled("rmatrix.gl2_explicit", "explicit N = 2 elliptic R-matrix", GL2_TOL,
                    lambda lz: gl2_entry_difference(params, lz, trunc), seed, samples)


def antisymmetrizer_records(params, trunc=DEFAULT_TRUNCATION):
    out = [_guarded("rmatrix.antisymmetrizer", "R(-1/q) = 1 - P at N = 2", IDENTITY_TOL,
                    lambda: (rm.antisymmetrizer_check(params, trunc), 1))]
    try:
        diag = rm.antisymmetrizer_diagnostics(params, trunc)
    except EllipticError as exc:
        return out + [CheckRecord.failure("rmatrix.antisymmetrizer_diagnostics", "R near z = -1/q",
                                          IDENTITY_TOL, exc)]
    for label, value in sorted(diag.items()):
        if label == "R(-1/q) vs 1-P":
            continue
        out.append(CheckRecord.from_residual(f"rmatrix.antisymmetrizer_diagnostic[{label}]",
                                             "value of R at the antisymmetrizer point", value,
                                             IDENTITY_TOL, note="diagnostic"))
    return out


# --- structure functions -----------------------------------------------------------

def _rel(a, b):
    a, b = complex(a), complex(b)
    return abs(a - b) / max(abs(b), 1e-300)


def surface_params(m, n, q, c, N=2, root=0):
    sol = su.solve_surface(sf.SurfaceSpec(m, n), q, c, N)
    return ModelParams(N, q, c, sol.roots[root])


DEFAULT_F_POINTS = ((2, 0.4, 0.3, 0.09), (3, 0.35 * cmath.exp(0.2j), 0.7, 0.08 * cmath.exp(0.5j)))
Y_SURFACES = ((2, -1, -2.7), (3, -1, -2.2), (2, 3, 0.37), (-3, 2, 0.9), (1, 1, 0.4))


def structfn_suite(samples=16, seed=DEFAULT_SEED, trunc: Truncation = DEFAULT_TRUNCATION, q=0.4):
    records = []
    # F: product form vs theta form
    for N, qq, c, p in DEFAULT_F_POINTS:
        P = ModelParams.from_p(N, qq, c, p)
        for m in (-3, -2, -1, 1, 2, 3):
            for starred in (False, True):
                name = f"structfn.F_product_vs_theta[N={N},m={m:+d},{'starred' if starred else 'plain'}]"
                records.append(_sampled(
                    name, "F_m as U-product vs theta form", IDENTITY_TOL,
                    lambda lx, m=m, st=starred, P=P: _rel(
                        sf.calF(m, cmath.exp(lx), st, P, trunc),
                        sf.calF_theta(m, cmath.exp(lx), P, trunc, starred=st)),
                    seed, samples))
    # g^(k): series vs product inside the series' disk of convergence
    P = ModelParams.from_p(2, q, 0.3, 0.09)
    for k in (1, 2, 3):
        radius = abs(P.p) ** k

        def draw(lz, radius=radius):
            # |exp(lz)| <= 2 keeps |z| below 0.9 |p|^k, inside the convergence disk
            return 0.45 * radius * cmath.exp(lz)

        records.append(_sampled(
            f"structfn.g_series_vs_product[k={k}]", "g^(k) series form vs product form", IDENTITY_TOL,
            lambda lz, k=k, draw=draw: _rel(sf.g_k(k, draw(lz), False, P, trunc, "series"),
                                             sf.g_k(k, draw(lz), False, P, trunc, "product")),
            seed, samples))
        records.append(_sampled(
            f"structfn.g_series_times_product[k={k}]", "g^(k) series form times product form",
            IDENTITY_TOL,
            lambda lz, k=k, draw=draw: abs(sf.g_k(k, draw(lz), False, P, trunc, "series")
                                          * sf.g_k(k, draw(lz), False, P, trunc, "product") - 1.0),
            seed, samples))
    # Y as U-products vs the N = 2 g-factorization
    for m, n, c in Y_SURFACES:
        Pm = surface_params(m, n, q, c)
        spec = sf.SurfaceSpec(m, n)
        records.append(_sampled(
            f"structfn.Y_FF_vs_gg[m={m:+d},n={n:+d}]", "Y_mn from F vs from g_mn at N = 2", IDENTITY_TOL,
            lambda lx, spec=spec, Pm=Pm: _rel(sf.calY(spec, cmath.exp(lx), Pm, trunc),
                                              sf.calY_factored(spec, cmath.exp(lx), Pm, trunc)),
            seed, samples))
    # tilde-Y and the DVA structure function
    P21 = surface_params(2, -1, q, -2.7)
    records.append(_sampled(
        "structfn.tildeY_vs_dva", "tilde-Y_(2,-1) reduces to the DVA structure function", IDENTITY_TOL,
        lambda lx: _rel(sf.tildeY(2, cmath.exp(lx), False, P21, trunc),
                        sf.dva_ratio(cmath.exp(lx), P21, trunc)), seed, samples))
    Ps = surface_params(-1, 2, q, 0.8)
    records.append(_sampled(
        "structfn.tildeY_star_vs_dva", "starred tilde-Y on S_(-1,2) vs starred DVA ratio at 1/x",
        IDENTITY_TOL,
        lambda lx: _rel(sf.tildeY(2, cmath.exp(lx), True, Ps, trunc),
                        sf.dva_ratio(cmath.exp(-lx), Ps, trunc, starred=True)), seed, samples))
    records.append(surface_solver_record(q))
    return records


def surface_solver_record(q=0.4, N_values=(2, 3), cs=(-1.3, 0.25, 0.9), bound=4):
    """Relative surface residual on every root returned by the solver."""
    def compute():
        worst, count = 0.0, 0
        for N in N_values:
            for m in range(-bound, bound + 1):
                for n in range(-bound, bound + 1):
                    if m + n == 0:
                        continue
                    for c in cs:
                        for s in su.solve_surface(sf.SurfaceSpec(m, n), q, c, N):
                            P = ModelParams(N, q, c, s)
                            worst = max(worst, su.surface_identity_residual(sf.SurfaceSpec(m, n), P))
                            count += 1
        return worst, count

    return _guarded("surfaces.solver_identity", "s^m s*^n = q^-N on solver output",
                    su.MACHINE_SURFACE_TOL, compute)


# --- atlas -------------------------------------------------------------------------

def atlas_run(N, mmax, nmax, q, samples=32, seed=DEFAULT_SEED, trunc=DEFAULT_TRUNCATION, bound=12,
              delta=0.05, controls=True):
    """(records, lines): one summary record set plus one JSON-able line per locus."""
    loci = su.enumerate_atlas(N, mmax, nmax, bound)
    lines = []
    worst, worst_ctrl, verified, failures = 0.0, math.inf, 0, []
    for locus in loci:
        line = {"schema": 1, **locus.as_dict(), "q": _num(q)}
        if not locus.instantiable(q):
            line.update(status="not instantiable at this q", residual=None)
            lines.append(line)
            continue
        try:
            r = su.check_locus(locus, q, samples, trunc, seed)
        except EllipticError as exc:
            line.update(status=f"error: {type(exc).__name__}", residual=None)
            failures.append(locus)
            lines.append(line)
            continue
        verified += 1
        worst = max(worst, r)
        line.update(status="verified" if r < LOCUS_TOL else "failed", residual=r)
        if r >= LOCUS_TOL:
            failures.append(locus)
        if controls:
            try:
                ctrl = su.perturbed_residual(locus, q, delta, samples, trunc, seed)
            except EllipticError:
                ctrl = math.inf
            worst_ctrl = min(worst_ctrl, ctrl)
            line["control_residual"] = ctrl
        lines.append(line)
    tag = f"atlas[N={N},m<={mmax},n<={nmax}]"
    records = [CheckRecord(f"{tag}.loci", "abelianity loci Y_mn = 1", worst,
                           LOCUS_TOL, not failures and worst < LOCUS_TOL, verified,
                           f"{len(loci)} loci, {verified} instantiable")]
    if controls and verified:
        records.append(CheckRecord.from_residual(f"{tag}.negative_controls",
                                                 f"c shifted by {delta} breaks abelianity", worst_ctrl,
                                                 CONTROL_FLOOR, verified, bound="above"))
    return records, lines


def _num(v):
    v = complex(v)
    return v.real if v.imag == 0 else [v.real, v.imag]


def brute_force_span(m, lam):
    """sigma(k) = m + k(beta+1) reduced to 1..m hits every residue."""
    beta = su.bezout(lam, m).beta
    return len({(m + k * (beta + 1) - 1) % m + 1 for k in range(1, m + 1)}) == m


def localized_run(ms=(3, 5, 7), N=2, q=0.6, samples=32, seed=DEFAULT_SEED, trunc=DEFAULT_TRUNCATION):
    records, lines = [], []
    for m in ms:
        worst, accepted, ctrl = 0.0, 0, math.inf
        for lam in range(1, abs(m)):
            got = su.localized_center_params(m, N, lam)
            if isinstance(got, su.Rejection):
                lines.append({"schema": 1, "N": N, "m": m, "lambda": lam, "status": "rejected",
                              "reason": got.reason})
                try:
                    bad = su.localized_locus_unchecked(m, N, lam)
                    if bad.instantiable(q):
                        ctrl = min(ctrl, su.verify_localized_center(bad, q, samples, trunc, seed))
                except EllipticError:
                    pass
                continue
            try:
                r = su.verify_localized_center(got, q, samples, trunc, seed)
            except EllipticError as exc:
                records.append(CheckRecord.failure(f"localized[m={m},lambda={lam}]",
                                                   "localized center", LOCUS_TOL, exc))
                continue
            accepted += 1
            worst = max(worst, r)
            lines.append({"schema": 1, **got.as_dict(), "beta": got.beta, "q": _num(q),
                          "status": "verified" if r < LOCUS_TOL else "failed", "residual": r})
        records.append(CheckRecord.from_residual(f"localized[m={m}]", "localized center loci",
                                                 worst, LOCUS_TOL, accepted))
        if math.isfinite(ctrl):
            records.append(CheckRecord.from_residual(f"localized[m={m}].rejected_control",
                                                     "rejected lambda is not central", ctrl, 1e-3,
                                                     bound="above"))
    return records, lines


def span_record(mmax=99):
    def compute():
        bad, count = 0, 0
        for m in range(3, mmax + 1, 2):
            for lam in range(1, m):
                if math.gcd(lam, m) != 1:
                    continue
                count += 1
                bad += su.permutation_span_check(m, lam) != brute_force_span(m, lam)
        return float(bad), count

    return _guarded("localized.span_check_vs_brute_force", "cycle criterion of the permutation sigma",
                    0.5, compute)


# --- limits ------------------------------------------------------------------------

SCALING_Z = (0.3, 0.25 + 0.2j, -0.4 + 0.1j, 0.15j)
SCALING_ETAS = (0.5, 1.0, 2.0)
STAR_CS = (0.3, -0.4)


def _scaling_err(est, closed, z):
    scale = abs(z / (1 - z) ** 2)
    return abs(est - closed) / max(abs(closed), scale)


def scaling_records(kmax=4, mn_max=3, etas=SCALING_ETAS, zs=SCALING_Z, grid=L.DEFAULT_GRID):
    def gk(starred):
        def compute():
            worst, count = 0.0, 0
            for eta in etas:
                for k in range(1, kmax + 1):
                    for c in (STAR_CS if starred else (0.0,)):
                        for z in zs:
                            est = L.scaling_coeff_gk(k, eta, z, grid, c=c, starred=starred)
                            worst = max(worst, _scaling_err(est, L.scaling_closed_gk(k, eta, z, c, starred), z))
                            count += 1
            return worst, count
        return compute

    def gmn():
        worst, count = 0.0, 0
        for eta in etas:
            for m in range(-mn_max, mn_max + 1):
                for n in range(-mn_max, mn_max + 1):
                    if m == 0 or n == 0:
                        continue
                    c = L.scaling_surface_c(m, n, eta)
                    for z in zs:
                        est = L.scaling_coeff_gmn(m, n, c, eta, z, grid)
                        worst = max(worst, _scaling_err(est, L.scaling_closed_gmn(m, n, c, eta, z), z))
                        count += 1
        return worst, count

    return [
        _guarded("limits.scaling.g_k", "scaling limit of g^(k)", SCALING_TOL, gk(False)),
        _guarded("limits.scaling.g_star_k", "scaling limit of g*^(k)", SCALING_TOL, gk(True)),
        _guarded("limits.scaling.g_mn", "scaling limit of g_mn", SCALING_TOL, gmn),
    ]


def poisson_panel(case_tag=None, m=None, N=2):
    """Fixed set of Poisson cases; filtered by tag and m when given."""
    P = L.PoissonCase
    panel = [
        P("both_large", 2, 3, 1), P("both_large", 3, 2, 2), P("both_large", 2, 2, 1),
        P("both_large", 3, 3, 1), P("both_large", -2, -3, 2), P("both_large", -3, -2, -1),
        P("both_large", 4, 3, 1),
        P("n_unit_even", 2, 1, 2), P("n_unit_even", 3, 1, 2), P("n_unit_even", -3, 1, -2),
        P("n_unit_even", 4, -1, 2),
        P("n_unit_odd", 3, 1, 1), P("n_unit_odd", -3, 1, 1), P("n_unit_odd", 4, -1, 3),
        P("n_unit_odd", 2, 1, -1),
        P("n_unit_divisor", 4, 1, 1, u=4), P("n_unit_divisor", 3, 1, 1, u=4),
        P("n_unit_divisor", 4, 1, 1, u=2), P("n_unit_divisor", -3, 1, 1, u=2),
        P("m_unit", 1, 3, 2), P("m_unit", -1, 4, 1), P("m_unit", 1, -3, 1, N=3), P("m_unit", 1, 4, 1, u=2),
    ]
    if case_tag is not None and case_tag not in L.POISSON_TAGS:
        raise ValueError(f"unknown Poisson case {case_tag!r}")
    out = [c for c in panel if case_tag in (None, c.case_tag)]
    if m is not None:
        out = [c for c in out if c.m == m]
        if not out:
            out = _cases_for(case_tag, m, N)
    return out


def _cases_for(tag, m, N):
    """Build cases for an m outside the fixed panel."""
    P = L.PoissonCase
    made = []
    candidates = {
        "both_large": [dict(n=n, ell=l) for n in (2, 3) for l in (1, 2)],
        "n_unit_even": [dict(n=1, ell=2)],
        "n_unit_odd": [dict(n=1, ell=1)],
        "n_unit_divisor": [dict(n=1, ell=1, u=u) for u in range(2, abs(m) + 2)],
        "m_unit": [dict(n=n, ell=1) for n in (3, 4)],
    }
    for kw in candidates.get(tag or "n_unit_even", []):
        try:
            made.append(P(tag or "n_unit_even", m, N=N, **kw))
        except ValueError:
            continue
    return made[:2]


def _case_label(c):
    u = f",u={c.u}" if c.u is not None else ""
    return f"{c.case_tag}[m={c.m:+d},n={c.n:+d},l={c.ell:+d},N={c.N}{u}]"


def _poisson_points(case, q, points, seed, trunc):
    """Sample x, redrawing points where Y_mn or f_l sits on a pole."""
    rng = _rng(seed, _case_label(case))

    def probe(lx):
        x = cmath.exp(lx)
        L.poisson_f(case, x, case.N, q, trunc)
        L.poisson_fd_extrapolated(case, x, q, trunc=trunc)
        return x

    return [v for _, v in resampled(probe, points, rng, skip=(PoleProximity,))]


def _odd_case_direct(case, x, q):
    """The odd-case I(x) summed term by term from its floor prefactors."""
    N, k = case.N, case.k_sup
    x2 = complex(x) ** 2
    s = np.arange(0, 400)
    Q = complex(q) ** (2 * N)
    lam = x2 * Q ** s[1:]
    K = np.sum(lam / (1 - lam)) + 0.5 * x2 / (1 - x2)
    mid = x2 * complex(q) ** N * Q ** s
    K2 = np.sum(mid / (1 - mid))
    return (k // 2) * (k // 2 + 1) * K + ((k + 1) // 2) ** 2 * K2


def poisson_records(cases, q=0.6, points=8, seed=DEFAULT_SEED, trunc=DEFAULT_TRUNCATION):
    records = []
    for case in cases:
        label = _case_label(case)
        name = f"limits.poisson.{label}"
        try:
            xs = _poisson_points(case, q, points, seed, trunc)
        except (EllipticError, RuntimeError) as exc:
            records.append(CheckRecord.failure(f"{name}.closed_vs_oracle",
                                               "Poisson bracket f_l vs derivative of ln Y_mn", POISSON_TOL, exc))
            continue

        def worst_of(fn, xs=xs):
            return max(fn(x) for x in xs), len(xs)

        def closed_vs_oracle(x, case=case):
            return L.poisson_mismatch(L.poisson_f(case, x, case.N, q, trunc),
                                      L.poisson_fd_extrapolated(case, x, q, trunc=trunc))

        def closed_vs_analytic(x, case=case):
            ref = L.poisson_f_analytic(case, x, q, trunc)
            return abs(L.poisson_f(case, x, case.N, q, trunc) - ref) / max(1.0, abs(ref))

        def antisym(x, case=case):
            f = L.poisson_f(case, x, case.N, q, trunc)
            return abs(f + L.poisson_f(case, 1 / x, case.N, q, trunc)) / max(1.0, abs(f))

        records.append(_guarded(f"{name}.closed_vs_oracle", "Poisson bracket f_l vs derivative of ln Y_mn",
                                POISSON_TOL, lambda f=closed_vs_oracle: worst_of(f)))
        records.append(_guarded(f"{name}.closed_vs_chain_rule", "f_l vs chain-rule derivative through U",
                                IDENTITY_TOL, lambda f=closed_vs_analytic: worst_of(f)))
        records.append(_guarded(f"{name}.antisymmetry", "f_l(1/x) = -f_l(x)", 1e-12,
                                lambda f=antisym: worst_of(f)))
        if case.case_tag == "n_unit_odd":
            k = case.k_sup
            pre = L.poisson_prefactors(case)
            records.append(_guarded(
                f"{name}.floor_terms", "floor prefactors of the odd case", IDENTITY_TOL,
                lambda case=case: worst_of(lambda x: abs(L.poisson_I(case, x, case.N, q, trunc)
                                                         - _odd_case_direct(case, x, q))),
                note=f"k_sup = {k}, prefactors {pre[0]} and {pre[1]}"))
        if case.deforms_star:
            def fit(case=case, xs=xs):
                k, misfit = L.fit_m_unit_normalization(case, xs[:4], q, trunc)
                return max(abs(k - L.M_UNIT_NORMALIZATION), misfit), 4

            records.append(_guarded(f"{name}.normalization", "fitted m_unit normalization equals -1",
                                    1e-6, fit))
    return records


def poisson_table(cases, q=0.6, points=8, seed=DEFAULT_SEED, trunc=DEFAULT_TRUNCATION):
    """Rows (case, x, f closed form, f oracle, mismatch) on the same points the records use."""
    rows = []
    for case in cases:
        try:
            xs = _poisson_points(case, q, points, seed, trunc)
        except (EllipticError, RuntimeError):
            continue
        for x in xs:
            f = L.poisson_f(case, x, case.N, q, trunc)
            o = L.poisson_fd_extrapolated(case, x, q, trunc=trunc)
            rows.append((_case_label(case), complex(x), complex(f), complex(o), L.poisson_mismatch(f, o)))
    return rows


def limits_suite(case_tag=None, m=None, q=0.6, points=8, seed=DEFAULT_SEED, trunc=DEFAULT_TRUNCATION,
                 scaling=True):
    records = scaling_records() if scaling else []
    return records + poisson_records(poisson_panel(case_tag, m), q, points, seed, trunc)
