"""Seeded randomized campaigns for tight Riesz interpolation and Riesz-Arveson extension.

Every instance is built to interpolate in the big system: draw ``b`` in the
big system and put the lower elements strictly below it and the upper ones
strictly above it. The question is whether the small system still has an
interpolant. For C*-pairs the trace-preserving conditional expectation ``E``
gives one (``E(b)``), so any violation there points at a bug; for the
Namioka-Phelps family violations are expected.
"""
from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import sdp
from .cpmaps import ConditionalExpectation, ExtensionProblem, expectation_witness, kraus_map, riesz_arveson
from .linalg import DEFAULT_TOL, herm
from .opsys import OperatorSystem, amplify, amplify_element, make_full, make_linf, make_subsystem
from .riesz import InterpolationInstance, check_interpolant, interpolant, interpolate, interpolation_problem
from .standard import NP_LOWER, NP_UPPER, v_system

FAMILIES = ("diagonal-in-full", "block-diagonal-in-full", "linf-in-linf", "namioka-phelps")
C_STAR_FAMILIES = FAMILIES[:3]


class CampaignError(ValueError):
    pass


@dataclass(frozen=True)
class CampaignConfig:
    family: str
    count: int
    seed: int = 0
    nk: tuple[int, int] = (2, 2)
    level: int = 1
    dimension_cap: int = 4
    tol: float = DEFAULT_TOL
    riesz_arveson: bool = True
    workers: int = 1

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise CampaignError(f"unknown family {self.family!r}; choose from {', '.join(FAMILIES)}")
        if self.count < 0:
            raise CampaignError("count must be nonnegative")
        if self.level < 1:
            raise CampaignError("level must be positive")
        if self.dimension_cap < 2:
            raise CampaignError("dimension cap must be at least 2")
        n, k = self.nk
        if n < 1 or k < 1:
            raise CampaignError("n and k must be positive")
        object.__setattr__(self, "nk", (int(n), int(k)))

    @property
    def c_star(self) -> bool:
        return self.family in C_STAR_FAMILIES


def _num(x) -> float | str | None:
    if x is None:
        return None
    if isinstance(x, Fraction):
        return str(x)
    return float(f"{float(x):.6g}")


@dataclass
class InstanceRecord:
    index: int
    ambient: list[int]
    small_dim: int
    big_dim: int
    big_status: str
    small_status: str
    small_exact: bool
    violation: bool
    triaged: bool = False
    big_margin: float | str | None = None
    small_margin: float | str | None = None
    generator_replay: bool = True
    verdict_replay: bool = True
    expectation_replay: bool | None = None
    amplified_replay: bool | None = None
    ra_status: str | None = None
    ra_expectation_replay: bool | None = None
    note: str = ""


@dataclass
class CampaignReport:
    config: CampaignConfig
    records: list[InstanceRecord] = field(default_factory=list)
    runtime: float = 0.0

    @property
    def violations(self) -> list[int]:
        return [r.index for r in self.records if r.violation]

    @property
    def counts(self) -> dict[str, int]:
        rs = self.records
        return {
            "instances": len(rs),
            "big_feasible": sum(r.big_status == "feasible" for r in rs),
            "small_feasible": sum(r.small_status == "feasible" for r in rs),
            "small_infeasible": sum(r.small_status == "infeasible" for r in rs),
            "unknown": sum("unknown" in (r.big_status, r.small_status) for r in rs),
            "violations": sum(r.violation for r in rs),
            "generator_replay_failures": sum(not r.generator_replay for r in rs),
            "verdict_replay_failures": sum(not r.verdict_replay for r in rs),
            "expectation_replay_failures": sum(r.expectation_replay is False for r in rs),
            "amplification_failures": sum(r.amplified_replay is False for r in rs),
            "ra_checked": sum(r.ra_status is not None for r in rs),
            "ra_infeasible": sum(r.ra_status == "infeasible" for r in rs),
            "ra_unknown": sum(r.ra_status == "unknown" for r in rs),
            "ra_expectation_failures": sum(r.ra_expectation_replay is False for r in rs),
        }

    @property
    def ok(self) -> bool:
        """No surviving contradiction with the C*-pair predictions."""
        c = self.counts
        bad = c["generator_replay_failures"] + c["verdict_replay_failures"] + c["amplification_failures"]
        if self.config.c_star:
            bad += (c["violations"] + c["expectation_replay_failures"] + c["ra_infeasible"]
                    + c["ra_expectation_failures"])
        return bad == 0

    def to_dict(self) -> dict:
        cfg = asdict(self.config)
        cfg.pop("workers")
        cfg["nk"] = list(cfg["nk"])
        return {"config": cfg, "counts": self.counts, "violations": self.violations,
                "records": [asdict(r) for r in self.records]}

    def to_json(self) -> str:
        """Machine-readable form; excludes wall-clock time so equal seeds give equal bytes."""
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    def to_text(self) -> str:
        c, cfg = self.counts, self.config
        lines = [f"campaign {cfg.family}: {c['instances']} instances, (n,k)={cfg.nk}, level {cfg.level}, "
                 f"seed {cfg.seed}",
                 f"  interpolates in big: {c['big_feasible']}  in small: {c['small_feasible']}  "
                 f"provably not in small: {c['small_infeasible']}  unknown: {c['unknown']}",
                 f"  violations: {c['violations']}"
                 + (f" at {self.violations[:20]}" if self.violations else ""),
                 f"  witness replay failures: generator {c['generator_replay_failures']}, "
                 f"expectation {c['expectation_replay_failures']}, amplification {c['amplification_failures']}, "
                 f"verdict {c['verdict_replay_failures']}"]
        if c["ra_checked"]:
            lines.append(f"  Riesz-Arveson: {c['ra_checked']} checked, infeasible {c['ra_infeasible']}, "
                         f"unknown {c['ra_unknown']}, expectation replay failures {c['ra_expectation_failures']}")
        for r in self.records:
            if r.note:
                lines.append(f"  #{r.index}: {r.note}")
        lines.append(f"  status: {'ok' if self.ok else 'FAILED'}   runtime {self.runtime:.2f}s")
        return "\n".join(lines) + "\n"


# --- instance generation -------------------------------------------------------------------------


def _pair(cfg: CampaignConfig, rng: np.random.Generator) -> tuple[OperatorSystem, OperatorSystem]:
    cap = cfg.dimension_cap
    if cfg.family == "diagonal-in-full":
        d = int(rng.integers(2, cap + 1))
        big = make_full(d)
        small = make_subsystem(big, [np.diag(np.eye(d)[j]) for j in range(d)], label=f"D{d}")
    elif cfg.family == "block-diagonal-in-full":
        d = int(rng.integers(3, max(3, cap) + 1))
        while True:
            cuts = sorted(set(int(c) for c in rng.integers(1, d, size=int(rng.integers(1, d)))))
            blocks = np.diff([0, *cuts, d])
            if len(blocks) >= 2 and max(blocks) >= 2:
                break
        big = make_full(d)
        gens = []
        pos = 0
        for bl in blocks:
            for j in range(pos, pos + bl):
                for k in range(j, pos + bl):
                    e = np.zeros((d, d))
                    e[j, k] = e[k, j] = 1.0
                    gens.append(e)
                    if k > j:
                        f = np.zeros((d, d), dtype=complex)
                        f[j, k], f[k, j] = 1j, -1j
                        gens.append(f)
            pos += bl
        small = make_subsystem(big, gens, label="blocks" + "+".join(str(b) for b in blocks))
    elif cfg.family == "linf-in-linf":
        d = int(rng.integers(3, cap + 3))
        while True:
            labels = rng.integers(0, int(rng.integers(2, d)), size=d)
            if 2 <= len(set(labels.tolist())) < d:
                break
        big = make_linf(d)
        small = make_subsystem(big, [np.diag((labels == g).astype(float)) for g in sorted(set(labels.tolist()))],
                               label="partition" + "".join(str(int(v)) for v in labels))
    else:
        big = make_linf(4)
        small = v_system()
    return small, big


def _random_element(s: OperatorSystem, rng: np.random.Generator, scale: int = 4) -> np.ndarray:
    return s.element(rng.integers(-scale, scale + 1, size=s.dim).astype(float))


def _extreme_eig(m: np.ndarray, lowest: bool) -> float:
    if not np.any(m - np.diag(np.diag(m))) and not np.iscomplexobj(m):
        d = np.diag(m)
        return float(d.min() if lowest else d.max())
    ev = np.linalg.eigvalsh(m)
    return float(ev[0] if lowest else ev[-1])


def _data(small: OperatorSystem, big: OperatorSystem, nk, rng):
    """``(lower, upper, b, delta)`` with ``x_i + delta <= b <= y_j - delta``."""
    n, k = nk
    b = _random_element(big, rng)
    u = small.unit
    lower, upper, gaps = [], [], []
    for _ in range(n):
        r = _random_element(small, rng)
        g = float(rng.integers(1, 3))
        lower.append(herm(r + (_extreme_eig(b - r, True) - g) * u))
        gaps.append(g)
    for _ in range(k):
        r = _random_element(small, rng)
        g = float(rng.integers(1, 3))
        upper.append(herm(r + (_extreme_eig(b - r, False) + g) * u))
        gaps.append(g)
    return lower, upper, b, min(gaps)


def _np_classic(nk):
    n, k = nk
    lower = list(NP_LOWER) + [NP_LOWER[-1]] * max(0, n - 2)
    upper = list(NP_UPPER) + [NP_UPPER[-1]] * max(0, k - 2)
    return lower[:n], upper[:k], np.diag([1.5, 1.5, -0.5, -0.5]), 0.5


def _kraus_maps(small: OperatorSystem, nk, rng) -> list:
    """Maps ``phi_i = sum_j Ad K_ij`` and ``psi_j = sum_i Ad K_ij`` with equal sums."""
    n, k = nk
    dim = small.ambient.dim
    m = 1 + int(rng.integers(0, 2))
    # integer Kraus operators keep the sum identity exact in floating point
    pool = [[rng.integers(-2, 3, size=(m, dim)) + 1j * rng.integers(-2, 3, size=(m, dim)) for _ in range(k)]
            for _ in range(n)]
    lower = [kraus_map(small, [pool[i][j] for j in range(k)], f"phi{i}") for i in range(n)]
    upper = [kraus_map(small, [pool[i][j] for i in range(n)], f"psi{j}") for j in range(k)]
    maps = lower + upper
    # rescale by a power of two: exact, and keeps the solver margin comparable to tol
    top = max(float(np.max(np.abs(v))) for f in maps for v in f.values)
    scale = 2.0 ** -int(np.ceil(np.log2(max(top, 1.0))))
    return [f.scale(scale) for f in maps]


def evaluate_instance(cfg: CampaignConfig, index: int) -> InstanceRecord:
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, index]))
    small, big = _pair(cfg, rng)
    m = cfg.level
    if m > 1:
        small, big = amplify(small, m), amplify(big, m)
    if cfg.family == "namioka-phelps" and index == 0:
        lower, upper, b, gap = _np_classic(cfg.nk)
        if m > 1:
            lower = [amplify_element(x, m) for x in lower]
            upper = [amplify_element(y, m) for y in upper]
            b = amplify_element(b, m)
        note = "classic l^inf_4 data"
    else:
        # drawn natively at level m, not as amplified level-1 data
        lower, upper, b, gap = _data(small, big, cfg.nk, rng)
        note = ""
    inst_small = InterpolationInstance(small, tuple(lower), tuple(upper))
    inst_big = inst_small.in_system(big)

    vb = interpolate(inst_big, cfg.tol)
    vs = interpolate(inst_small, cfg.tol)
    triaged = False
    if vb.feasible and not vs.feasible and not vs.exact:
        vs = interpolate(inst_small, cfg.tol / 10)
        triaged = True
    rec = InstanceRecord(
        index=index, ambient=list(small.ambient.blocks), small_dim=small.dim, big_dim=big.dim,
        big_status=vb.status.value, small_status=vs.status.value, small_exact=vs.exact,
        violation=vb.feasible and vs.infeasible, triaged=triaged,
        big_margin=_num(vb.best_margin), small_margin=_num(vs.best_margin), note=note)
    rec.generator_replay = check_interpolant(inst_big, b, gap, cfg.tol)
    rec.verdict_replay = all(sdp.replay_check(interpolation_problem(i), v, cfg.tol)
                             for i, v in ((inst_big, vb), (inst_small, vs)) if v.feasible)
    if cfg.c_star:
        e = ConditionalExpectation(small)
        rec.expectation_replay = check_interpolant(inst_small, herm(e(b)), gap, cfg.tol)
    if m == 1 and vs.feasible:
        a = interpolant(inst_small, vs)
        rec.amplified_replay = check_interpolant(inst_small.amplified(2), amplify_element(a, 2),
                                                 float(vs.witness.delta), cfg.tol)
    if cfg.c_star and cfg.riesz_arveson:
        maps = _kraus_maps(small, cfg.nk, rng)
        n, k = cfg.nk
        res = riesz_arveson(small, big, n, k, maps, validate=False)
        if res.infeasible:
            res = riesz_arveson(small, big, n, k, maps, tol=1e-8, validate=False)
        rec.ra_status = res.status.value
        problem = ExtensionProblem(small, big, tuple(maps), sums=((tuple(range(n)), tuple(range(n, n + k))),))
        rec.ra_expectation_replay = expectation_witness(problem)[2]
    return rec


def run_campaign(cfg: CampaignConfig) -> CampaignReport:
    """Deterministic given the config; records come back in index order."""
    t0 = time.perf_counter()
    if cfg.workers > 1 and cfg.count > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            records = list(pool.map(evaluate_instance, [cfg] * cfg.count, range(cfg.count)))
    else:
        records = [evaluate_instance(cfg, i) for i in range(cfg.count)]
    return CampaignReport(cfg, records, time.perf_counter() - t0)
