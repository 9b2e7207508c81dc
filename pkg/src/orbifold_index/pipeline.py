"""End-to-end verification of one scenario, producing a serializable report."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

import numpy as np

from .doubling import build_doubled_field, verify_double_index
from .errors import MismatchDetected, OrbifoldError
from .euler_satake import chi_orb, chi_orb_oracle, chi_underlying
from .exit_chain import ExitChain, compute_chain
from .inertia import (
    build_sectors,
    check_boundary_compatibility,
    check_double_commutation,
    chi_orb_inertia,
    verify_corollary,
)
from .scenario import Scenario
from .simplicial import boundary_presentation, double_complex, subdivide_presentation
from .vector_field import IndexSum, morse_counts, orbifold_index_sum, sigma_orb, winding_number_2d

ALL_CHECKS = ("main", "chi", "additivity", "morse", "winding", "double", "inertia", "corollary", "expected")


def rational(q: Fraction) -> dict[str, int]:
    q = Fraction(q)
    return {"num": q.numerator, "den": q.denominator}


def fmt(q: Fraction) -> str:
    return str(Fraction(q))


def _num(x: float) -> float:
    r = round(float(x), 10)
    return 0.0 if r == 0 else r


def _point(p) -> list[float]:
    return [_num(v) for v in p]


@dataclass
class VerificationReport:
    scenario: str
    dim: int
    order: int
    lhs: Fraction | None = None
    relative: Fraction | None = None
    chain_terms: list[Fraction] = field(default_factory=list)
    verdicts: dict[str, str] = field(default_factory=dict)
    errors: list[dict[str, str]] = field(default_factory=list)
    sections: dict[str, Any] = field(default_factory=dict)
    timing: float = 0.0

    @property
    def rhs(self) -> Fraction | None:
        if self.relative is None:
            return None
        return self.relative + sum(self.chain_terms, Fraction(0))

    @property
    def passed(self) -> bool:
        return "fail" not in self.verdicts.values()

    def to_json(self) -> dict[str, Any]:
        """JSON form; wall-clock timing is left out so reports are byte-stable."""
        return {
            "scenario": self.scenario,
            "dim": self.dim,
            "group_order": self.order,
            "lhs": None if self.lhs is None else rational(self.lhs),
            "rhs_terms": {
                "relative": None if self.relative is None else rational(self.relative),
                "chain": [rational(t) for t in self.chain_terms],
            },
            "rhs": None if self.rhs is None else rational(self.rhs),
            "verdicts": dict(self.verdicts),
            "passed": self.passed,
            "errors": list(self.errors),
            "sections": self.sections,
        }


class _Runner:
    def __init__(self, report: VerificationReport) -> None:
        self.report = report

    def run(self, name: str, fn: Callable[[], bool | None]) -> Any:
        try:
            ok = fn()
        except OrbifoldError as exc:
            self.report.verdicts[name] = "fail"
            entry = {"check": name, "code": exc.code, "message": str(exc)}
            if isinstance(exc, MismatchDetected):
                entry["label"] = exc.label
            self.report.errors.append(entry)
            return
        self.report.verdicts[name] = "skip" if ok is None else ("pass" if ok else "fail")


def _index_section(res: IndexSum) -> dict[str, Any]:
    return {
        "zeros": [
            {
                "location": _point(r.location),
                "isotropy": r.isotropy_order,
                "index": r.index,
                "orb_index": rational(r.orb_index),
                "morse_lambda": r.morse_lambda,
                "det_sign": r.det_sign,
                "degenerate": r.degenerate,
            }
            for r in res.records
        ],
        "orbits": [list(o) for o in res.orbits],
        "total": rational(res.total),
    }


def _chain_section(chain: ExitChain) -> dict[str, Any]:
    return {
        "levels": [
            {
                "level": lvl.level,
                "region_chi": lvl.region_chi,
                "gamma_chi": lvl.gamma_chi,
                "chi_term": rational(lvl.chi_term),
                "region_orbits": lvl.region_orbits,
                "gamma_orbits": lvl.gamma_orbits,
                "underlying": lvl.region_chi_underlying - lvl.gamma_chi_underlying,
            }
            for lvl in chain.levels
        ],
        "total": rational(chain.total),
    }


def run_verify(s: Scenario, checks: tuple[str, ...] | list[str] | None = None, grid_density: int = 8) -> VerificationReport:
    checks = tuple(checks) if checks is not None else tuple(s.checks or ALL_CHECKS)
    unknown = set(checks) - set(ALL_CHECKS)
    if unknown:
        raise ValueError(f"unknown checks {sorted(unknown)}; choose from {list(ALL_CHECKS)}")
    t0 = time.perf_counter()
    P, dom, F, tol = s.presentation, s.domain, s.field, s.tolerances
    rep = VerificationReport(s.name, s.dim, s.order)
    runner = _Runner(rep)
    state: dict[str, Any] = {}

    def main() -> bool:
        res = orbifold_index_sum(F, P, dom, grid_density, tol["newton"], tol["dedup"], tol["degenerate"], tol["field"])
        chain = compute_chain(F, P, dom, tol["newton"], tol["degenerate"], tol["field"])
        state["index"], state["chain"] = res, chain
        rep.lhs = res.total
        rep.relative = chi_orb(P) - chi_orb(boundary_presentation(P))
        rep.chain_terms = chain.chi_terms
        rep.sections["index"] = _index_section(res)
        rep.sections["chain"] = _chain_section(chain)
        return rep.lhs == rep.rhs

    runner.run("main", main)

    if "chi" in checks:
        def chi() -> bool:
            values = [chi_orb(P)]
            Q = P
            for _ in range(2):
                Q = subdivide_presentation(Q)
                values.append(chi_orb(Q))
            B = boundary_presentation(P)
            rep.sections["chi"] = {
                "chi_orb": rational(values[0]),
                "chi_orb_boundary": rational(chi_orb(B)),
                "chi_orb_relative": rational(values[0] - chi_orb(B)),
                "chi_underlying": chi_underlying(P),
                "chi_underlying_boundary": chi_underlying(B),
                "oracle": rational(chi_orb_oracle(P)),
                "subdivided": [rational(v) for v in values[1:]],
            }
            return len(set(values)) == 1 and values[0] == chi_orb_oracle(P)

        runner.run("chi", chi)

    if "additivity" in checks:
        def additivity() -> bool:
            d = chi_orb(double_complex(P))
            q, b = chi_orb(P), chi_orb(boundary_presentation(P))
            rep.sections["additivity"] = {"double": rational(d), "q": rational(q), "boundary": rational(b)}
            return d == 2 * q - b

        runner.run("additivity", additivity)

    res: IndexSum | None = state.get("index")
    if "morse" in checks:
        def morse() -> bool | None:
            if res is None or any(r.degenerate for r in res.records):
                return None
            counts = morse_counts(res)
            sig = sigma_orb(res)
            rep.sections["morse"] = {"counts": {str(k): rational(v) for k, v in counts.items()}, "sigma": rational(sig)}
            per_zero = all((-1) ** r.morse_lambda == r.det_sign for r in res.records)
            return per_zero and sig == res.total

        runner.run("morse", morse)

    if "winding" in checks:
        def winding() -> bool | None:
            if res is None or s.dim != 2:
                return None
            pts = [np.array(r.location) for r in res.records]
            rows = []
            ok = True
            for i, r in enumerate(res.records):
                others = [float(np.linalg.norm(pts[i] - q)) for j, q in enumerate(pts) if j != i]
                radius = min([0.1] + [d / 4 for d in others] + [dom.boundary_distance(pts[i]) / 2])
                w = winding_number_2d(F, pts[i], radius, tol_field=tol["field"])
                expected = r.index if r.degenerate else r.det_sign
                ok &= w == expected
                rows.append({"location": _point(r.location), "det_sign": r.det_sign, "winding": w})
            rep.sections["winding"] = rows
            return ok

        runner.run("winding", winding)

    if "double" in checks:
        def double() -> bool:
            Fd = s.double_field or F
            interior = res if s.double_field is None else None
            chain = state.get("chain") if s.double_field is None else None
            if interior is None:
                interior = orbifold_index_sum(Fd, P, dom, grid_density, tol["newton"], tol["dedup"],
                                              tol["degenerate"], tol["field"])
            if chain is None:
                chain = compute_chain(Fd, P, dom, tol["newton"], tol["degenerate"], tol["field"])
            D = build_doubled_field(Fd, P, dom, interior=interior, tol_degenerate=tol["degenerate"],
                                    tol_field=tol["field"])
            R = verify_double_index(D, P, interior, chain, grid_density, raise_on_mismatch=False)
            rep.sections["double"] = {
                "field": [str(c) for c in Fd.components] if s.double_field is not None else "scenario field",
                "epsilon": _num(R.collar.epsilon),
                "s": _num(R.collar.s),
                "boundary_zeros": [
                    {
                        "position": _point(z.position),
                        "isotropy": z.isotropy,
                        "zh_index": z.zh_index,
                        "region": z.region,
                        "x_index": z.x_index,
                        "jacobian_sign": z.jacobian_sign,
                        "oracle_index": z.oracle_index,
                    }
                    for z in R.zeros
                ],
                "interior": rational(R.interior),
                "boundary": rational(R.boundary_upstairs),
                "total": rational(R.total),
                "chi_orb_double": rational(R.chi_double),
                "j_plus": rational(R.j_plus),
                "j_minus": rational(R.j_minus),
                "indexstep2": [rational(v) for v in R.indexstep2],
                "checks": {k: ("pass" if v else "fail") for k, v in R.checks.items()},
            }
            return R.passed

        runner.run("double", double)

    if "inertia" in checks:
        def inertia() -> bool:
            sectors = build_sectors(P)
            value = chi_orb_inertia(P)
            compat = check_boundary_compatibility(P)
            d, q, b = check_double_commutation(P)
            rep.sections["inertia"] = {
                "sectors": [
                    {
                        "class_rep": sec.class_rep,
                        "class_size": sec.class_size,
                        "centralizer_order": sec.centralizer_order,
                        "chi_fixed": sec.chi_fixed,
                        "chi_orb": rational(sec.chi_orb_value),
                    }
                    for sec in sectors
                ],
                "chi_orb_inertia": rational(value),
                "chi_underlying": chi_underlying(P),
                "boundary_compatible": compat,
                "double_commutation": [rational(d), rational(q), rational(b)],
            }
            return compat and value == chi_underlying(P)

        runner.run("inertia", inertia)

    if "corollary" in checks:
        def corollary() -> bool:
            if res is None:
                raise MismatchDetected("corollary", "main pipeline did not produce zeros")
            R = verify_corollary(F, P, dom, res, state["chain"], tol["field"], raise_on_mismatch=False)
            rep.sections["corollary"] = {
                "sectors": [
                    {"class_rep": x.class_rep, "fixed_dim": x.fixed_dim, "zeros": [_point(z) for z in x.zeros],
                     "indices": x.indices, "total": rational(x.total)}
                    for x in R.sectors
                ],
                "lhs": rational(R.lhs),
                "relative_underlying": R.relative_underlying,
                "chain_underlying": R.chain_underlying,
                "rhs": R.rhs,
                "exit_correspondence": R.exit_agreement,
            }
            return R.passed

        runner.run("corollary", corollary)

    if "expected" in checks:
        def expected() -> bool | None:
            exp = s.expected
            if not exp:
                return None
            ok = True
            if "lhs" in exp:
                ok &= rep.lhs == Fraction(exp["lhs"])
            if "relative" in exp:
                ok &= rep.relative == Fraction(exp["relative"])
            if "chain" in exp:
                ok &= rep.chain_terms == [Fraction(v) for v in exp["chain"]]
            return ok

        runner.run("expected", expected)

    rep.timing = time.perf_counter() - t0
    return rep


def summary_table(rep: VerificationReport) -> str:
    lines = [f"scenario {rep.scenario}  (n={rep.dim}, |G|={rep.order})"]
    if rep.lhs is not None:
        lines.append(f"  {'Ind_orb(Y; Q)':<28}{fmt(rep.lhs)}")
    if rep.relative is not None:
        lines.append(f"  {'chi_orb(Q, dQ)':<28}{fmt(rep.relative)}")
        for i, t in enumerate(rep.chain_terms, start=1):
            lines.append(f"  {f'chi_orb(R-^{i}, Gamma^{i})':<28}{fmt(t)}")
        lines.append(f"  {'right-hand side':<28}{fmt(rep.rhs)}")
    lines.append(f"  {'check':<28}verdict")
    for name, verdict in rep.verdicts.items():
        lines.append(f"  {name:<28}{verdict}")
    for e in rep.errors:
        lines.append(f"  ! {e['check']}: [{e['code']}] {e['message']}")
    lines.append(f"  {'time':<28}{rep.timing:.2f}s")
    return "\n".join(lines)
