"""The verification suite: every closed form checked against its oracle at
seeded sample points, collected into a deterministic report."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import __version__
from .chart import CONVENTION, _spd_inverse, christoffel, riemann, structure_functions
from .maps import (SIGNS, harmonic_pair_residual, identity_beta_closed_form,
                   identity_beta_oracle, identity_map, identity_tension_candidates,
                   identity_tension_corrected, identity_tension_oracle, nabla_xi,
                   projection_beta_closed_form, projection_map, pullback_metric_jacobian,
                   pullback_metric_via_section, second_fundamental_form,
                   second_fundamental_form_in_frame, section_beta_closed_form,
                   section_harmonic_conditions, section_map,
                   section_pushforward, section_pushforward_claim,
                   section_tension_closed_form, tension_field)
from .para import admit, check_nijenhuis_vanishes
from .report import (CheckRecord, VerificationReport, adjudicate, bound, compare, exceeds)
from .sampling import base_points, bundle_points
from .tangent import (DENOMINATORS, LINES, TangentBundleGeometry, berger_metric_inverse_closed_form,
                      connection_closed_form, connection_oracle, mean_closed_form,
                      mean_connection, oracle_at, svk_closed_form, svk_connection, torsion)
from .zoo import SpecError, load_spec

__all__ = ["FORMULAS", "SUITES", "SUITE_FORMULAS", "run_suite"]

# Formula tags used in reports, with a one-line description each.
FORMULAS = {
    "lift-metric": "g_BS evaluated on horizontal and vertical lifts",
    "adapted-metric": "block matrix of g_BS in the adapted frame",
    "metric-inverse": "closed-form inverse of the adapted block matrix",
    "levi-civita": "closed-form Levi-Civita connection of g_BS in the adapted frame",
    "second-fundamental-form": "coordinate formula for beta(f)",
    "tension-field": "tau(f) as the metric trace of beta(f)",
    "projection-hessian": "beta of the projection TM -> (M, g)",
    "projection-hessian-second-metric": "beta of the projection TM -> (M, h)",
    "harmonic-pair": "g^{ij}(^h Gamma - Gamma)_{ij} = 0 criterion",
    "section-pushforward": "xi_* X = ^H X + ^V(nabla_X xi)",
    "section-hessian": "closed-form beta of a section",
    "section-tension": "closed-form tau of a section",
    "section-harmonicity": "two-condition harmonicity criterion for a section",
    "identity-tension-bs-to-s": "tau of I: (TM, g_BS) -> (TM, g_S)",
    "identity-tension-s-to-bs": "tau of I: (TM, g_S) -> (TM, g_BS)",
    "svk-definition": "projected connection V nabla V + H nabla H",
    "svk-connection": "closed-form projected connection",
    "mean-connection": "closed-form mean connection (projected minus half torsion)",
    "identity-hessian-mean": "beta of I: (TM, g_BS) -> (TM, mean connection)",
}

SUITES = ("admission", "metric", "connection", "maps", "all")
SUITE_FORMULAS = {
    "admission": (),
    "metric": ("lift-metric", "adapted-metric", "metric-inverse"),
    "connection": ("levi-civita", "svk-definition", "svk-connection", "mean-connection"),
    "maps": ("second-fundamental-form", "tension-field", "projection-hessian",
             "projection-hessian-second-metric", "harmonic-pair", "section-pushforward",
             "section-hessian", "section-tension", "section-harmonicity",
             "identity-tension-bs-to-s", "identity-tension-s-to-bs", "identity-hessian-mean"),
}
SUITE_FORMULAS["all"] = tuple(FORMULAS)

TOL = 1e-9
TOL_TIGHT = 1e-10
WITNESS = 1e-6
FLAT = 1e-12


@dataclass
class _Context:
    spec: object
    seed: int
    npoints: int
    xs: np.ndarray
    pts: np.ndarray
    flat: bool
    admitted: bool
    spec_deltas: tuple = (1.0,)

    @property
    def base(self):
        return self.spec.chart


def _tag(delta):
    return f"[delta={delta:g}]"


# ---------------------------------------------------------------------------
# admission

def _admission(ctx, strict):
    spec = ctx.spec
    report, ok = admit(spec.chart, spec.phi, ctx.xs, strict=strict)
    records = list(report.checks)
    if ok:
        records += check_nijenhuis_vanishes(spec.phi, ctx.xs[:10]).checks
    return records, ok


# ---------------------------------------------------------------------------
# metric

def _lift_vectors(ctx):
    rng = np.random.default_rng([ctx.seed, 2])
    n = ctx.base.dim
    return rng.normal(size=(ctx.npoints, n)), rng.normal(size=(ctx.npoints, n))


def _metric(ctx, tbg):
    t = _tag(tbg.delta)
    n, N = tbg.n, tbg.dim
    X, Y = _lift_vectors(ctx)
    lift = {k: ([], []) for k in LINES}
    block, coord, inv, eig, sasaki = [], [], [], [], []
    basis = np.eye(n)
    for p, x, y in zip(ctx.pts, X, Y):
        F = tbg.frame(p)
        Gc = tbg.metric_at(p)
        G = tbg.adapted_metric(p)
        for kind in LINES:
            a = F @ tbg.lift(kind[0], x)
            b = F @ tbg.lift(kind[1], y)
            lift[kind][0].append(a @ Gc @ b)
            lift[kind][1].append(tbg.defining_value(p, kind, x, y))
        M1 = np.zeros((N, N))
        for kind in LINES:
            rows = slice(0, n) if kind[0] == "H" else slice(n, N)
            cols = slice(0, n) if kind[1] == "H" else slice(n, N)
            M1[rows, cols] = [[tbg.defining_value(p, kind, ei, ej) for ej in basis]
                              for ei in basis]
        block.append((G, M1))
        coord.append((F.T @ Gc @ F, G))
        inv.append(berger_metric_inverse_closed_form(tbg, p) @ G - np.eye(N))
        eig.append(np.linalg.eigvalsh(Gc)[0])
        if tbg.delta == 0.0:
            g = tbg.base_data(p).g
            sasaki.append((G, np.block([[g, np.zeros((n, n))], [np.zeros((n, n)), g]])))
    npts = len(ctx.pts)
    out = [compare(f"metric.lift.{k}{t}", "lift-metric", lift[k][0], lift[k][1], npts, TOL, 0.0)
           for k in LINES]
    out += [
        compare(f"metric.adapted-block{t}", "adapted-metric", [b[0] for b in block],
                [b[1] for b in block], npts, TOL, 0.0),
        compare(f"metric.coordinate-form{t}", "adapted-metric", [c[0] for c in coord],
                [c[1] for c in coord], npts, TOL, 0.0),
        bound(f"metric.inverse{t}", "metric-inverse", inv, npts, TOL, where=ctx.pts),
        exceeds(f"metric.positive-definite{t}", "adapted-metric", [min(eig)], npts, 0.0,
                note="smallest eigenvalue of the coordinate metric"),
    ]
    if sasaki:
        out.append(compare(f"metric.sasaki-limit{t}", "adapted-metric", [s[0] for s in sasaki],
                           [s[1] for s in sasaki], npts, TOL, 0.0))
    return out


# ---------------------------------------------------------------------------
# connections

def _frame_derivative_of_metric(tbg, p):
    """dG[b, c, a] = E_a(G_bc) for the adapted metric matrix."""
    G1 = tbg.adapted_metric_jet(p, 1)
    return np.einsum("bcA,Aa->bca", G1.d1, tbg.frame(p))


def _compatibility(C, G, dG):
    """E_a(G_bc) - C^d_ab G_dc - C^d_ac G_bd as [a, b, c]."""
    return (dG.transpose(2, 0, 1) - np.einsum("dab,dc->abc", C, G)
            - np.einsum("dac,bd->abc", C, G))


def _structure_closed_form(tbg, p):
    d = tbg.base_data(p)
    n = tbg.n
    c = np.zeros((2 * n,) * 3)
    R0 = np.einsum("ijkh,k->hij", d.R, d.u)
    c[n:, :n, :n] = -R0
    c[n:, :n, n:] = d.gamma
    c[n:, n:, :n] = -d.gamma.transpose(0, 2, 1)
    return c


def _svk_torsion_closed_form(tbg, p):
    d = tbg.base_data(p)
    n = tbg.n
    T = np.zeros((2 * n,) * 3)
    H = d.shuffle()
    T[n:, :n, :n] = np.einsum("ijkh,k->hij", d.R, d.u)
    T[:n, n:, :n] = -0.5 * H.transpose(0, 2, 1)  # T(E_ibar, E_j) = -1/2 H[h, j, i]
    T[:n, :n, n:] = 0.5 * H  # antisymmetry: T(E_j, E_ibar)
    return T


def _connection(ctx, tbg):
    t = _tag(tbg.delta)
    n = tbg.n
    O = connection_oracle(tbg)
    acc = {k: [] for k in ("lc", "cf", "vv_cand", "tors", "compat", "struct", "struct_cf",
                            "svk", "svk_cf", "svk_off", "svk_compat", "svk_T", "svk_T_cf",
                            "mean", "mean_tors", "mean_hh", "mean_hv", "mean_ref",
                            "mean_lc", "mean_svk")}
    acc["vv_cand"] = {den: [] for den in DENOMINATORS}
    acc["mean_hh"] = {r: [] for r in ("projected", "levi-civita")}
    acc["mean_hv"] = {r: [] for r in ("levi-civita", "projected")}
    for p in ctx.pts:
        lc = oracle_at(tbg, p, O)
        c = structure_functions(tbg.adapted_frame, p)
        acc["lc"].append(lc)
        acc["cf"].append(connection_closed_form(tbg, p))
        for den in DENOMINATORS:
            acc["vv_cand"][den].append(connection_closed_form(tbg, p, den).line("VV"))
        acc["tors"].append(torsion(lc.coefficients, c))
        G = tbg.adapted_metric(p)
        dG = _frame_derivative_of_metric(tbg, p)
        acc["compat"].append(_compatibility(lc.coefficients, G, dG))
        acc["struct"].append(c)
        acc["struct_cf"].append(_structure_closed_form(tbg, p))
        sv = svk_connection(tbg, lc)
        acc["svk"].append(sv.coefficients)
        acc["svk_cf"].append(svk_closed_form(tbg, p).coefficients)
        acc["svk_off"].append(np.concatenate([sv.coefficients[n:, :, :n].ravel(),
                                              sv.coefficients[:n, :, n:].ravel()]))
        acc["svk_compat"].append(_compatibility(sv.coefficients, G, dG))
        acc["svk_T"].append(torsion(sv.coefficients, c))
        acc["svk_T_cf"].append(_svk_torsion_closed_form(tbg, p))
        mean = mean_connection(tbg, sv, c)
        acc["mean"].append(mean)
        acc["mean_tors"].append(torsion(mean.coefficients, c))
        for r in acc["mean_hh"]:
            acc["mean_hh"][r].append(mean_closed_form(tbg, p, hh=r).line("HH"))
        for r in acc["mean_hv"]:
            acc["mean_hv"][r].append(mean_closed_form(tbg, p, hv=r).line("HV"))
        acc["mean_ref"].append(mean_closed_form(tbg, p))
        acc["mean_lc"].append(mean.coefficients - lc.coefficients)
        acc["mean_svk"].append(mean.coefficients - sv.coefficients)
    npts = len(ctx.pts)
    out = []
    for line in ("HH", "VH", "HV"):
        out.append(compare(f"connection.levi-civita.{line}{t}", "levi-civita",
                           [c.line(line) for c in acc["lc"]],
                           [c.line(line) for c in acc["cf"]], npts, TOL, 0.0))
    out.append(adjudicate(f"connection.levi-civita.VV{t}", "levi-civita",
                          [c.line("VV") for c in acc["lc"]], acc["vv_cand"], npts, TOL,
                          "levi-civita.VV.denominator"))
    out += [
        bound(f"connection.oracle.torsion-free{t}", "levi-civita", acc["tors"], npts, TOL,
              note="torsion of the oracle connection in the adapted frame", where=ctx.pts),
        bound(f"connection.oracle.metric-compatible{t}", "levi-civita", acc["compat"], npts,
              TOL, note="nabla g_BS of the oracle connection", where=ctx.pts),
        compare(f"connection.adapted-frame.brackets{t}", "levi-civita", acc["struct"],
                acc["struct_cf"], npts, TOL, 0.0),
        bound(f"connection.svk.preserves-splitting{t}", "svk-definition", acc["svk_off"],
              npts, TOL),
        bound(f"connection.svk.metric-compatible{t}", "svk-definition", acc["svk_compat"],
              npts, TOL, where=ctx.pts),
        compare(f"connection.svk.closed-form{t}", "svk-connection", acc["svk"], acc["svk_cf"],
                npts, TOL, 0.0),
        compare(f"connection.svk.torsion{t}", "svk-connection", acc["svk_T"], acc["svk_T_cf"],
                npts, TOL, 0.0),
        bound(f"connection.mean.torsion-free{t}", "mean-connection", acc["mean_tors"], npts,
              TOL, where=ctx.pts),
        adjudicate(f"connection.mean.HH{t}", "mean-connection",
                   [m.line("HH") for m in acc["mean"]], acc["mean_hh"], npts, TOL,
                   "mean-connection.HH.reading"),
        adjudicate(f"connection.mean.HV{t}", "mean-connection",
                   [m.line("HV") for m in acc["mean"]], acc["mean_hv"], npts, TOL,
                   "mean-connection.HV.reading"),
    ]
    for line in ("VH", "VV"):
        out.append(compare(f"connection.mean.{line}{t}", "mean-connection",
                           [m.line(line) for m in acc["mean"]],
                           [m.line(line) for m in acc["mean_ref"]], npts, TOL, 0.0))
    if ctx.flat:
        out.append(bound(f"connection.mean.equals-levi-civita-when-flat{t}", "mean-connection",
                         acc["mean_lc"], npts, TOL_TIGHT))
        out.append(bound(f"connection.mean.equals-svk-when-flat{t}", "mean-connection",
                         acc["mean_svk"], npts, TOL_TIGHT))
    elif tbg.delta == max(ctx.spec_deltas):
        out.append(exceeds(f"connection.mean.differs-from-svk-when-curved{t}", "mean-connection",
                           acc["mean_svk"], npts, WITNESS))
    return out


# ---------------------------------------------------------------------------
# maps

def _maps_projection(ctx, tbg, O):
    t = _tag(tbg.delta)
    n = tbg.n
    pi = projection_map(tbg)
    h = ctx.spec.second_metric
    pi_h = projection_map(tbg, h) if h is not None else None
    rows = {k: [] for k in ("hess", "cf", "sym", "frame", "tau", "tau2", "h_hess", "h_cf",
                            "h_tau", "h_res")}
    for p in ctx.pts:
        coord = second_fundamental_form(pi, p)
        adapted = second_fundamental_form(pi, p, source_frame=tbg.adapted_frame)
        rows["hess"].append(adapted.components)
        rows["cf"].append(projection_beta_closed_form(tbg, p))
        rows["sym"].append(coord.asymmetry())
        direct = second_fundamental_form_in_frame(pi, p, tbg.adapted_frame, O.values(p))
        rows["frame"].append(direct.components - adapted.components)
        tau = tension_field(pi, p, coord).components
        rows["tau"].append(tau)
        Ginv = _spd_inverse(tbg.adapted_metric(p), p)
        rows["tau2"].append(np.einsum("ab,cab->c", Ginv, adapted.components) - tau)
        if pi_h is not None:
            rows["h_hess"].append(second_fundamental_form(pi_h, p,
                                                          source_frame=tbg.adapted_frame).components)
            rows["h_cf"].append(projection_beta_closed_form(tbg, p, h))
            rows["h_tau"].append(tension_field(pi_h, p).components)
            rows["h_res"].append(harmonic_pair_residual(ctx.base, h, p[:n]))
    npts = len(ctx.pts)
    out = [
        compare(f"maps.projection.hessian{t}", "projection-hessian", rows["hess"], rows["cf"],
                npts, TOL, 0.0),
        bound(f"maps.hessian.symmetry{t}", "second-fundamental-form", rows["sym"], npts, TOL,
              note="projection map, coordinate frame"),
        bound(f"maps.hessian.tensoriality{t}", "second-fundamental-form", rows["frame"], npts,
              TOL, note="coordinate Hessian moved to the adapted frame vs direct frame formula"),
        bound(f"maps.projection.harmonic{t}", "tension-field", rows["tau"], npts, TOL,
              where=ctx.pts),
        bound(f"maps.tension.trace-two-ways{t}", "tension-field", rows["tau2"], npts, 1e-12),
    ]
    hess = np.array(rows["hess"])
    if ctx.flat:
        out.append(bound(f"maps.projection.totally-geodesic-when-flat{t}", "projection-hessian",
                         hess, npts, TOL_TIGHT))
    elif tbg.delta == max(ctx.spec_deltas):
        out.append(exceeds(f"maps.projection.not-totally-geodesic-when-curved{t}",
                           "projection-hessian", hess[:, :, n:, :n], npts, WITNESS))
    if pi_h is not None:
        out += [
            compare(f"maps.projection-h.hessian{t}", "projection-hessian-second-metric",
                    rows["h_hess"], rows["h_cf"], npts, TOL, 0.0),
            compare(f"maps.projection-h.tension-equals-pair-residual{t}", "harmonic-pair",
                    rows["h_tau"], rows["h_res"], npts, TOL, 0.0),
        ]
    return out


def _maps_identity(ctx, tbg, O):
    t = _tag(tbg.delta)
    sas = tbg.sasaki()
    out = []
    npts = len(ctx.pts)
    for direction, src, dst, tag in (("BS->S", tbg, sas, "identity-tension-bs-to-s"),
                                     ("S->BS", sas, tbg, "identity-tension-s-to-bs")):
        oracle, cands, fixed = [], None, []
        for p in ctx.pts:
            oracle.append(identity_tension_oracle(src, dst, p))
            c = identity_tension_candidates(tbg, p, direction)
            if cands is None:
                cands = {k: [] for k in c}
            for k, v in c.items():
                cands[k].append(v)
            fixed.append(identity_tension_corrected(tbg, p, direction))
        key = direction.lower().replace("->", "-to-")
        out.append(adjudicate(f"maps.identity.{key}{t}", tag, oracle, cands, npts, TOL,
                              f"{tag}.reading"))
        out.append(compare(f"maps.identity.{key}.corrected{t}", tag, oracle, fixed, npts,
                           TOL, 0.0, note="oracle vs the corrected closed form"))
        if direction == "BS->S" and tbg.delta > 0:
            out.append(exceeds(f"maps.identity.{key}.not-harmonic{t}", tag, oracle, npts,
                               WITNESS, note="g_S is not harmonic with respect to g_BS"))
    beta_o, beta_c, trace = [], [], []
    for p in ctx.pts:
        b = identity_beta_oracle(tbg, p, O)
        beta_o.append(b)
        beta_c.append(identity_beta_closed_form(tbg, p))
        Ginv = _spd_inverse(tbg.adapted_metric(p), p)
        trace.append(np.einsum("ab,cab->c", Ginv, b))
    out += [
        compare(f"maps.identity-mean.hessian{t}", "identity-hessian-mean", beta_o, beta_c,
                npts, TOL, 0.0),
        bound(f"maps.identity-mean.harmonic{t}", "identity-hessian-mean", trace, npts, TOL),
    ]
    if ctx.flat:
        out.append(bound(f"maps.identity-mean.totally-geodesic-when-flat{t}",
                         "identity-hessian-mean", beta_o, npts, TOL_TIGHT))
    elif tbg.delta == max(ctx.spec_deltas):
        out.append(exceeds(f"maps.identity-mean.nonzero-when-curved{t}",
                           "identity-hessian-mean", beta_o, npts, WITNESS))
    return out


def _maps_sections(ctx, tbg):
    t = _tag(tbg.delta)
    n = tbg.n
    out = []
    npts = len(ctx.xs)
    for name, xi in sorted(ctx.spec.vector_fields.items()):
        f = section_map(tbg, xi)
        nxi = nabla_xi(tbg, xi)
        r = {k: [] for k in ("push", "claim", "pull", "pull_j", "gdev", "ndev", "bo", "to",
                             "harm_o", "harm_c")}
        sign_c = {f"{s:+g}/2": [] for s in SIGNS}
        den_c = {d: [] for d in DENOMINATORS}
        tsign_c = {f"{s:+g}": [] for s in SIGNS}
        tden_c = {d: [] for d in DENOMINATORS}
        for x in ctx.xs:
            r["push"].append(section_pushforward(tbg, f, x))
            r["claim"].append(section_pushforward_claim(tbg, xi, x))
            g1 = pullback_metric_via_section(tbg, xi, x)
            r["pull"].append(g1)
            r["pull_j"].append(pullback_metric_jacobian(tbg, f, x))
            r["gdev"].append(np.abs(g1 - ctx.base.metric_at(x)).max())
            r["ndev"].append(np.abs(nxi.values(x)).max())
            hess = second_fundamental_form(f, x, target_frame=tbg.adapted_frame)
            r["bo"].append(hess.components)
            tau = tension_field(f, x, hess).components
            r["to"].append(tau)
            for s in SIGNS:
                sign_c[f"{s:+g}/2"].append(section_beta_closed_form(tbg, xi, x, s)[:n])
                tsign_c[f"{s:+g}"].append(section_tension_closed_form(tbg, xi, x, s)[:n])
            for d in DENOMINATORS:
                den_c[d].append(section_beta_closed_form(tbg, xi, x, 1.0, d)[n:])
                tden_c[d].append(section_tension_closed_form(tbg, xi, x, 1.0, d)[n:])
            hor, ver = section_harmonic_conditions(tbg, xi, x)
            r["harm_o"].append(bool(np.abs(tau).max() <= TOL))
            r["harm_c"].append(bool(max(np.abs(hor).max(), np.abs(ver).max()) <= TOL))
        bo = np.array(r["bo"])
        to = np.array(r["to"])
        base_id = f"maps.section.{name}"
        parallel = max(r["ndev"]) <= TOL_TIGHT
        iso = max(r["gdev"]) <= TOL_TIGHT
        harm = ("yes" if all(r["harm_o"]) else "no" if not any(r["harm_o"]) else "mixed")
        out += [
            compare(f"{base_id}.pushforward{t}", "section-pushforward", r["push"], r["claim"],
                    npts, TOL, 0.0),
            compare(f"{base_id}.pullback{t}", "section-pushforward", r["pull"], r["pull_j"],
                    npts, TOL, 0.0, note="closed-form pullback vs Jacobian pullback"),
            CheckRecord(f"{base_id}.isometric-iff-parallel{t}", "section-pushforward", npts,
                        max(r["gdev"]), max(r["gdev"]), parallel == iso,
                        {"section.isometric-immersion": "yes" if iso else "no"},
                        f"max |g1 - g| = {max(r['gdev']):.3e}, max |nabla xi| = "
                        f"{max(r['ndev']):.3e}"),
            adjudicate(f"{base_id}.hessian.horizontal{t}", "section-hessian", bo[:, :n],
                       sign_c, npts, TOL, "section-hessian.horizontal-sign"),
            adjudicate(f"{base_id}.hessian.vertical{t}", "section-hessian", bo[:, n:],
                       den_c, npts, TOL, "section-hessian.A-denominator"),
            adjudicate(f"{base_id}.tension.horizontal{t}", "section-tension", to[:, :n],
                       tsign_c, npts, TOL, "section-tension.horizontal-sign"),
            adjudicate(f"{base_id}.tension.vertical{t}", "section-tension", to[:, n:],
                       tden_c, npts, TOL, "section-tension.A-denominator"),
            CheckRecord(f"{base_id}.harmonicity-criterion{t}", "section-harmonicity", npts,
                        0.0, 0.0, r["harm_o"] == r["harm_c"], {"section.harmonic": harm},
                        "criterion evaluated as printed; oracle decides harmonicity"),
        ]
        if parallel:
            out += [
                bound(f"{base_id}.parallel.totally-geodesic{t}", "section-hessian", bo, npts,
                      TOL_TIGHT),
                bound(f"{base_id}.parallel.harmonic{t}", "section-tension", to, npts, TOL_TIGHT),
            ]
    return out


def _maps_base(ctx):
    """Checks on the base alone: identity maps and the harmonic-pair criterion."""
    base = ctx.base
    xs = ctx.xs
    npts = len(xs)
    scaled = base.with_metric([[f"2*({e})" for e in row] for row in base.metric],
                              name=f"{base.name}:2g")
    same = identity_map(base, base)
    out = [
        bound("maps.identity-base.same-metric", "second-fundamental-form",
              [second_fundamental_form(same, x).components for x in xs], npts, TOL_TIGHT),
        bound("maps.identity-base.same-metric-harmonic", "tension-field",
              [tension_field(same, x).components for x in xs], npts, TOL_TIGHT),
        bound("maps.harmonic-pair.scaled-metric", "harmonic-pair",
              [harmonic_pair_residual(base, scaled, x) for x in xs], npts, TOL_TIGHT,
              note="h = 2 g"),
    ]
    h = ctx.spec.second_metric
    if h is not None:
        ident = identity_map(base, h)
        res = [harmonic_pair_residual(base, h, x) for x in xs]
        tau = [tension_field(ident, x).components for x in xs]
        diff = [christoffel(h).values(x) - christoffel(base).values(x) for x in xs]
        harmonic = "yes" if max(np.abs(res).max(axis=None), 0.0) <= TOL else "no"
        out += [
            compare("maps.harmonic-pair.second-metric", "harmonic-pair", res, tau, npts,
                    TOL_TIGHT, 0.0, verdicts={"harmonic-pair.h-harmonic-wrt-g": harmonic},
                    note="residual vs tension of the identity (M, g) -> (M, h)"),
            compare("maps.identity-base.second-metric", "second-fundamental-form",
                    [second_fundamental_form(ident, x).components for x in xs], diff, npts,
                    TOL, 0.0, note="beta of the identity equals the Christoffel difference"),
        ]
    return out


def _maps(ctx, tbg):
    O = connection_oracle(tbg)
    return _maps_projection(ctx, tbg, O) + _maps_identity(ctx, tbg, O) + _maps_sections(ctx, tbg)


# ---------------------------------------------------------------------------

def _stability(records, prefix, key, check_id, formula):
    """All positive-delta verdicts under ``key`` for ids starting with ``prefix`` agree."""
    vals = sorted({r.verdicts[key] for r in records
                   if r.check_id.startswith(prefix) and key in r.verdicts
                   and not r.check_id.endswith("[delta=0]")})
    ok = len(vals) == 1 and vals[0] not in ("none", "indistinguishable") \
        and not vals[0].startswith("ambiguous")
    verdict = vals[0] if len(vals) == 1 else "unstable: " + " | ".join(vals)
    n = sum(r.points for r in records if r.check_id.startswith(prefix))
    return CheckRecord(check_id, formula, n, 0.0, 0.0, ok, {key: verdict},
                       "verdict compared across every positive delta")


def run_suite(spec, suite="all", seed=42, npoints=100, deltas=None, strict=False):
    """Run a suite and return its VerificationReport.

    ``spec`` is a ManifoldSpec, a builtin name or a path.  ``deltas``
    defaults to the spec file's own list, or [1.0] when it has none.
    """
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    if not hasattr(spec, "chart"):
        spec = load_spec(spec)
    if spec.phi is None:
        raise SpecError(f"spec {spec.name!r} has no phi; only validation is possible")
    if npoints < 1:
        raise ValueError("npoints must be positive")
    deltas = list(deltas) if deltas else (list(spec.deltas) or [1.0])
    deltas = sorted({float(d) for d in deltas})
    if any(d < 0 for d in deltas):
        raise ValueError("delta must be non-negative")
    xs = base_points(spec.chart, npoints, seed)
    pts = bundle_points(spec.chart, npoints, seed)
    R = riemann(spec.chart)
    curv = float(max(np.abs(R.values(x)).max() for x in xs))
    ctx = _Context(spec, seed, npoints, xs, pts, curv <= FLAT, True, tuple(deltas))

    report = VerificationReport(spec_name=spec.name, suite=suite, seed=seed, npoints=npoints,
                                deltas=deltas, engine_version=__version__,
                                convention=CONVENTION)
    adm, ok = _admission(ctx, strict)
    ctx.admitted = ok
    report.admission = {"admitted": bool(ok), "max_curvature": float(curv),
                        "flat": bool(ctx.flat),
                        "checks": {r.check_id: bool(r.passed) for r in adm}}
    if suite in ("admission", "all"):
        report.extend(adm)
    else:
        report.extend([r for r in adm if not r.passed])

    parts = {"metric": (_metric,), "connection": (_connection,), "maps": (_maps,),
             "all": (_metric, _connection, _maps)}.get(suite, ())
    for delta in deltas:
        tbg = TangentBundleGeometry(spec.chart, spec.phi, delta, admitted=ok)
        for part in parts:
            report.extend(part(ctx, tbg))
    if suite in ("maps", "all"):
        report.extend(_maps_base(ctx))
    if suite in ("connection", "all") and any(d > 0 for d in deltas):
        report.extend([_stability(report.checks, "connection.levi-civita.VV",
                                  "levi-civita.VV.denominator",
                                  "connection.levi-civita.VV.stability", "levi-civita")])
    if not ok:
        for r in report.checks:
            if not r.check_id.startswith("admission") and not r.passed:
                r.note = (r.note + "; " if r.note else "") + "base is not anti-paraKahler"
    covered = {r.formula for r in report.checks}
    report.uncovered_formulas = [f for f in SUITE_FORMULAS[suite] if f not in covered]
    return report
