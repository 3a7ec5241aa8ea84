"""Instance files: JSON descriptions of systems and problems, and their evaluation.

A file looks like::

    {"format": "tightriesz-instances", "version": 1,
     "systems": {"L4": {"kind": "linf", "n": 4},
                 "V": {"kind": "subsystem", "of": "L4",
                       "generators": [{"diag": [1, 0, 1, 0]}, {"diag": [0, 1, 0, 1]}, {"diag": [1, 0, 0, 1]}]}},
     "problems": [{"name": "ex", "kind": "interpolation", "system": "V",
                   "lower": [{"diag": [-3, 1, -1, -1]}], "upper": [{"diag": [2, 2, 4, 0]}],
                   "expect": "feasible"}]}

System kinds: ``linf``, ``full``, ``blocks``, ``subsystem``, ``explicit``,
``pullback``, ``generated`` and the quotient kinds ``pushout`` and
``quotient``. Problem kinds: ``interpolation`` (optionally against a ``big``
system, giving a TR record), ``extension``, ``cone`` and ``campaign``.
Unknown fields are rejected and errors name the offending field.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import sdp
from .campaign import CampaignConfig, CampaignError, run_campaign
from .cones import QuotientElement, quotient_closed_member, quotient_problem, quotient_strict_member
from .cpmaps import CP_TOL, CpMap, ExtensionProblem, MapError, coordinate_functional, kraus_map, solve_extension
from .linalg import DEFAULT_TOL, BlockShape
from .opsys import (
    OperatorSystem,
    QuotientSystem,
    SystemError_,
    generated_algebra,
    make_block_algebra,
    make_full,
    make_linf,
    make_subsystem,
    pullback,
    pushout_quotient,
    state_from_density,
    uniform_state,
)
from .riesz import InterpolationInstance, interpolation_problem, lemma_crosscheck, tr_instance_check
from .serialize import FormatError, check_keys, decode_matrix, decode_number, encode_matrix

FORMAT_NAME = "tightriesz-instances"
FORMAT_VERSION = 1
STATUSES = {s.value: s for s in sdp.Status}


# --- systems -------------------------------------------------------------------------------------


def _int(obj, path: str, lo: int = 1) -> int:
    if isinstance(obj, bool) or not isinstance(obj, int) or obj < lo:
        raise FormatError(path, f"expected an integer >= {lo}")
    return obj


def _list(obj, path: str, nonempty: bool = True) -> list:
    if not isinstance(obj, list) or (nonempty and not obj):
        raise FormatError(path, "expected a nonempty list" if nonempty else "expected a list")
    return obj


def _matrices(obj, path: str, hermitian: bool = True) -> list[np.ndarray]:
    return [decode_matrix(m, f"{path}[{i}]", hermitian) for i, m in enumerate(_list(obj, path))]


class _Systems:
    """Lazily resolved named systems; references are names or inline objects."""

    def __init__(self, specs: dict, path: str = "$.systems"):
        if not isinstance(specs, dict):
            raise FormatError(path, "expected an object of named systems")
        self.specs = specs
        self.path = path
        self.done: dict[str, Any] = {}
        self.active: set[str] = set()

    def get(self, ref, path: str):
        if isinstance(ref, str):
            if ref not in self.specs:
                raise FormatError(path, f"unknown system {ref!r}")
            if ref not in self.done:
                if ref in self.active:
                    raise FormatError(path, f"system {ref!r} refers to itself")
                self.active.add(ref)
                self.done[ref] = self.build(self.specs[ref], f"{self.path}.{ref}", ref)
                self.active.discard(ref)
            return self.done[ref]
        if isinstance(ref, dict):
            return self.build(ref, path, "")
        raise FormatError(path, "expected a system name or an inline system object")

    def operator_system(self, ref, path: str) -> OperatorSystem:
        s = self.get(ref, path)
        if not isinstance(s, OperatorSystem):
            raise FormatError(path, "expected an operator system, got a quotient")
        return s

    def quotient(self, ref, path: str) -> QuotientSystem:
        s = self.get(ref, path)
        if not isinstance(s, QuotientSystem):
            raise FormatError(path, "expected a quotient system")
        return s

    def build(self, spec, path: str, name: str):
        if not isinstance(spec, dict) or "kind" not in spec:
            raise FormatError(path, "system needs a \"kind\"")
        kind = spec["kind"]
        try:
            return self._build(kind, spec, path, name)
        except (SystemError_, ValueError) as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(path, str(exc)) from None

    def _build(self, kind: str, spec: dict, path: str, name: str):
        if kind == "linf":
            check_keys(spec, path, {"kind", "n"})
            return _relabel(make_linf(_int(spec["n"], path + ".n")), name)
        if kind == "full":
            check_keys(spec, path, {"kind", "d"})
            return _relabel(make_full(_int(spec["d"], path + ".d")), name)
        if kind == "blocks":
            check_keys(spec, path, {"kind", "blocks"})
            blocks = [_int(b, f"{path}.blocks[{i}]") for i, b in enumerate(_list(spec["blocks"], path + ".blocks"))]
            return make_block_algebra(BlockShape(tuple(blocks)), label=name)
        if kind == "subsystem":
            check_keys(spec, path, {"kind", "of", "generators"})
            amb = self.operator_system(spec["of"], path + ".of")
            gens = _matrices(spec["generators"], path + ".generators")
            return make_subsystem(amb, gens, label=name)
        if kind == "explicit":
            check_keys(spec, path, {"kind", "blocks", "basis"})
            blocks = [_int(b, f"{path}.blocks[{i}]") for i, b in enumerate(_list(spec["blocks"], path + ".blocks"))]
            return OperatorSystem(BlockShape(tuple(blocks)), tuple(_matrices(spec["basis"], path + ".basis")), name)
        if kind == "pullback":
            check_keys(spec, path, {"kind", "parts"})
            parts = []
            for i, part in enumerate(_list(spec["parts"], path + ".parts")):
                pp = f"{path}.parts[{i}]"
                check_keys(part, pp, {"system"}, {"density"})
                s = self.operator_system(part["system"], pp + ".system")
                w = state_from_density(s, decode_matrix(part["density"], pp + ".density")) if "density" in part \
                    else uniform_state(s)
                parts.append((s, w))
            return pullback(parts, label=name)[0]
        if kind == "generated":
            check_keys(spec, path, {"kind", "of"})
            return _relabel(generated_algebra(self.operator_system(spec["of"], path + ".of")), name)
        if kind == "pushout":
            check_keys(spec, path, {"kind", "parts"})
            parts = [self.operator_system(p, f"{path}.parts[{i}]")
                     for i, p in enumerate(_list(spec["parts"], path + ".parts"))]
            return pushout_quotient(parts, label=name)
        if kind == "quotient":
            check_keys(spec, path, {"kind", "of", "kernel"})
            s = self.operator_system(spec["of"], path + ".of")
            return QuotientSystem(s, tuple(_matrices(spec["kernel"], path + ".kernel")), label=name)
        raise FormatError(path + ".kind", f"unknown system kind {kind!r}")


def _relabel(s: OperatorSystem, name: str) -> OperatorSystem:
    return OperatorSystem(s.ambient, s.basis, name) if name else s


def system_to_dict(s: OperatorSystem | QuotientSystem) -> dict:
    """Self-contained ``explicit`` (or ``quotient``) form of a system."""
    if isinstance(s, QuotientSystem):
        return {"kind": "quotient", "of": system_to_dict(s.ambient_system),
                "kernel": [encode_matrix(j) for j in s.kernel_basis]}
    return {"kind": "explicit", "blocks": list(s.ambient.blocks), "basis": [encode_matrix(b) for b in s.basis]}


def system_from_dict(obj, path: str = "$"):
    return _Systems({}).get(obj, path)


# --- problems ------------------------------------------------------------------------------------


@dataclass(eq=False)
class Outcome:
    """Evaluation of one problem; ``to_dict`` is its report entry."""

    name: str
    kind: str
    statuses: dict[str, str]
    expect: Any = None
    replay: bool = True
    details: dict = field(default_factory=dict)

    @property
    def unknown(self) -> bool:
        return "unknown" in self.statuses.values()

    @property
    def met(self) -> bool | None:
        if self.expect is None:
            return None
        if isinstance(self.expect, dict):
            return all(self.statuses.get(k) == v for k, v in self.expect.items())
        return self.statuses.get("status") == self.expect

    def to_dict(self) -> dict:
        out = {"name": self.name, "kind": self.kind, **self.statuses, "replay": self.replay}
        if self.expect is not None:
            out["expect"] = self.expect
            out["met"] = self.met
        out.update(self.details)
        return out


def _expect_status(obj, path: str) -> str:
    if obj not in STATUSES:
        raise FormatError(path, f"expected one of {sorted(STATUSES)}")
    return obj


def _elements(obj, path: str) -> list[np.ndarray]:
    return _matrices(obj, path)


def _replayed(p: sdp.LmiProblem, v: sdp.FeasibilityVerdict, tol: float) -> bool:
    if v.status is sdp.Status.UNKNOWN:
        return True
    return sdp.replay_check(p, v, tol)


class Parsed:
    """A parsed instance file: a tolerance and a list of ready-to-run problem thunks."""

    def __init__(self, obj, tol: float | None = None):
        check_keys(obj, "$", {"format", "version"}, {"systems", "problems", "tolerance"})
        if obj["format"] != FORMAT_NAME:
            raise FormatError("$.format", f"expected {FORMAT_NAME!r}")
        if obj["version"] != FORMAT_VERSION:
            raise FormatError("$.version", f"unsupported version {obj['version']!r}; expected {FORMAT_VERSION}")
        file_tol = decode_number(obj["tolerance"], "$.tolerance") if "tolerance" in obj else None
        self.tol = tol if tol is not None else (file_tol if file_tol is not None else DEFAULT_TOL)
        if not self.tol > 0:
            raise FormatError("$.tolerance", "tolerance must be positive")
        self.systems = _Systems(obj.get("systems", {}))
        for name in self.systems.specs:
            self.systems.get(name, f"$.systems.{name}")
        self.problems = []
        names = set()
        for i, spec in enumerate(_list(obj.get("problems", []), "$.problems", nonempty=False)):
            path = f"$.problems[{i}]"
            if not isinstance(spec, dict) or "kind" not in spec:
                raise FormatError(path, "problem needs a \"kind\"")
            name = spec.get("name", f"problem{i}")
            if not isinstance(name, str) or name in names:
                raise FormatError(path + ".name", "problem names must be distinct strings")
            names.add(name)
            builder = getattr(self, f"_p_{spec['kind']}", None)
            if builder is None:
                raise FormatError(path + ".kind", f"unknown problem kind {spec['kind']!r}")
            try:
                self.problems.append(builder(spec, path, name))
            except (SystemError_, MapError, CampaignError, ValueError) as exc:
                if isinstance(exc, FormatError):
                    raise
                raise FormatError(path, str(exc)) from None

    def run(self) -> list[Outcome]:
        return [thunk() for thunk in self.problems]

    # each builder validates eagerly and returns a thunk

    def _p_interpolation(self, spec, path, name):
        check_keys(spec, path, {"kind", "system", "lower", "upper"}, {"name", "big", "expect"})
        s = self.systems.operator_system(spec["system"], path + ".system")
        lower = _elements(spec["lower"], path + ".lower")
        upper = _elements(spec["upper"], path + ".upper")
        inst = InterpolationInstance(s, tuple(lower), tuple(upper))
        tol = self.tol
        if "big" in spec:
            big = self.systems.operator_system(spec["big"], path + ".big")
            expect = spec.get("expect")
            if expect is not None:
                check_keys(expect, path + ".expect", set(), {"big", "small"})
                for k, v in expect.items():
                    _expect_status(v, f"{path}.expect.{k}")

            def run_tr():
                rec = tr_instance_check(s, big, inst.lower, inst.upper, tol)
                ok = (_replayed(interpolation_problem(inst.in_system(big)), rec.big, tol)
                      and _replayed(interpolation_problem(inst), rec.small, tol))
                return Outcome(name, "interpolation", {"big": rec.big.status.value, "small": rec.small.status.value},
                               expect, ok, {"violation": rec.violation, "big_verdict": rec.big.to_dict(),
                                            "small_verdict": rec.small.to_dict()})

            return run_tr
        expect = _expect_status(spec["expect"], path + ".expect") if "expect" in spec else None

        def run():
            p = interpolation_problem(inst)
            v = sdp.solve(p, tol)
            return Outcome(name, "interpolation", {"status": v.status.value}, expect, _replayed(p, v, tol),
                           {"verdict": v.to_dict()})

        return run

    def _map(self, spec, path: str, small: OperatorSystem) -> CpMap:
        if not isinstance(spec, dict) or len(spec) != 1:
            raise FormatError(path, "map must be one of {\"coordinate\": i}, {\"values\": [...]}, {\"kraus\": [...]}")
        (key, val), = spec.items()
        if key == "coordinate":
            i = _int(val, path + ".coordinate", 0)
            if i >= small.ambient.dim:
                raise FormatError(path + ".coordinate", "coordinate out of range")
            return coordinate_functional(small, i)
        if key == "values":
            vals = _matrices(val, path + ".values")
            if len(vals) != small.dim:
                raise FormatError(path + ".values", f"expected {small.dim} values, one per basis element")
            return CpMap(small, vals[0].shape[0], tuple(vals))
        if key == "kraus":
            return kraus_map(small, _matrices(val, path + ".kraus", hermitian=False))
        raise FormatError(path, f"unknown map form {key!r}")

    def _p_extension(self, spec, path, name):
        check_keys(spec, path, {"kind", "small", "big", "maps"}, {"name", "sums", "dominance", "expect"})
        small = self.systems.operator_system(spec["small"], path + ".small")
        big = self.systems.operator_system(spec["big"], path + ".big")
        maps = tuple(self._map(m, f"{path}.maps[{i}]", small)
                     for i, m in enumerate(_list(spec["maps"], path + ".maps")))
        sums = []
        for i, pair in enumerate(_list(spec.get("sums", []), path + ".sums", nonempty=False)):
            pp = f"{path}.sums[{i}]"
            if not isinstance(pair, list) or len(pair) != 2:
                raise FormatError(pp, "expected [left indices, right indices]")
            sums.append(tuple(tuple(_int(x, f"{pp}[{a}][{b}]", 0) for b, x in enumerate(_list(side, f"{pp}[{a}]")))
                              for a, side in enumerate(pair)))
        dom = []
        for i, pair in enumerate(_list(spec.get("dominance", []), path + ".dominance", nonempty=False)):
            pp = f"{path}.dominance[{i}]"
            if not isinstance(pair, list) or len(pair) != 2:
                raise FormatError(pp, "expected [i, j] meaning map i <= map j")
            dom.append(tuple(_int(x, f"{pp}[{a}]", 0) for a, x in enumerate(pair)))
        prob = ExtensionProblem(small, big, maps, tuple(sums), tuple(dom), label=name)
        expect = _expect_status(spec["expect"], path + ".expect") if "expect" in spec else None
        tol = max(self.tol, CP_TOL) if not prob.big.diagonal else self.tol

        def run():
            r = solve_extension(prob, tol)
            details = {"verdict": r.verdict.to_dict()}
            if r.extensions is not None:
                details["extensions"] = [[encode_matrix(v) for v in f.values] for f in r.extensions]
            return Outcome(name, "extension", {"status": r.status.value}, expect,
                           r.status is sdp.Status.UNKNOWN or r.replay(tol), details)

        return run

    def _p_cone(self, spec, path, name):
        check_keys(spec, path, {"kind", "cone"}, {"name", "quotient", "element", "level", "strict", "system",
                                                  "lower", "upper", "expect"})
        cone = spec["cone"]
        expect = _expect_status(spec["expect"], path + ".expect") if "expect" in spec else None
        tol = self.tol
        if cone == "quotient":
            check_keys(spec, path, {"kind", "cone", "quotient", "element"}, {"name", "level", "strict", "expect"})
            q = self.systems.quotient(spec["quotient"], path + ".quotient")
            level = _int(spec.get("level", 1), path + ".level")
            strict = spec.get("strict", True)
            if not isinstance(strict, bool):
                raise FormatError(path + ".strict", "expected true or false")
            e = QuotientElement(q, decode_matrix(spec["element"], path + ".element"), level)

            def run_q():
                member = quotient_strict_member if strict else quotient_closed_member
                v = member(e, tol)
                p = quotient_problem(e, strict=strict)
                return Outcome(name, "cone", {"status": v.status.value}, expect, _replayed(p, v, tol),
                               {"cone": "quotient", "verdict": v.to_dict()})

            return run_q
        if cone == "tuple":
            check_keys(spec, path, {"kind", "cone", "system", "lower", "upper"}, {"name", "expect"})
            s = self.systems.operator_system(spec["system"], path + ".system")
            lower = _elements(spec["lower"], path + ".lower")
            upper = _elements(spec["upper"], path + ".upper")
            InterpolationInstance(s, tuple(lower), tuple(upper))

            def run_t():
                cc = lemma_crosscheck(s, lower, upper, tol)
                inst = InterpolationInstance(s, tuple(lower), tuple(upper))
                ok = _replayed(interpolation_problem(inst), cc.interpolation, tol)
                return Outcome(name, "cone", {"status": cc.quotient.status.value,
                                              "interpolation": cc.interpolation.status.value}, expect, ok,
                               {"cone": "tuple", "match": cc.match, "verdict": cc.quotient.to_dict()})

            return run_t
        raise FormatError(path + ".cone", "expected \"quotient\" or \"tuple\"")

    def _p_campaign(self, spec, path, name):
        check_keys(spec, path, {"kind", "family", "count"}, {"name", "seed", "level", "nk", "dimension_cap", "expect"})
        nk = spec.get("nk", [2, 2])
        if not isinstance(nk, list) or len(nk) != 2:
            raise FormatError(path + ".nk", "expected [n, k]")
        cfg = CampaignConfig(
            family=spec["family"], count=_int(spec["count"], path + ".count", 0),
            seed=_int(spec.get("seed", 0), path + ".seed", 0), level=_int(spec.get("level", 1), path + ".level"),
            nk=(_int(nk[0], path + ".nk[0]"), _int(nk[1], path + ".nk[1]")),
            dimension_cap=_int(spec.get("dimension_cap", 4), path + ".dimension_cap", 2), tol=self.tol)
        expect = spec.get("expect")
        if expect is not None and expect not in ("ok", "violations"):
            raise FormatError(path + ".expect", "expected \"ok\" or \"violations\"")

        def run():
            rep = run_campaign(cfg)
            status = "violations" if rep.violations else "ok"
            if cfg.c_star and not rep.ok:
                status = "failed"
            return Outcome(name, "campaign", {"status": status}, expect, True,
                           {"counts": rep.counts, "violations": rep.violations})

        return run


def parse_text(text: str, tol: float | None = None) -> Parsed:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"line {exc.lineno} column {exc.colno}", exc.msg) from None
    return Parsed(obj, tol)


def load(path, tol: float | None = None) -> Parsed:
    return parse_text(Path(path).read_text(), tol)


def example_file() -> dict:
    """The Namioka-Phelps interpolation and extension examples as an instance file."""
    return {
        "format": FORMAT_NAME, "version": FORMAT_VERSION,
        "systems": {
            "L4": {"kind": "linf", "n": 4},
            "V": {"kind": "subsystem", "of": "L4",
                  "generators": [{"diag": [1, 0, 1, 0]}, {"diag": [0, 1, 0, 1]}, {"diag": [1, 0, 0, 1]}]},
        },
        "problems": [
            {"name": "interpolation in L4", "kind": "interpolation", "system": "L4",
             "lower": [{"diag": [-3, 1, -1, -1]}, {"diag": [1, -3, -1, -1]}],
             "upper": [{"diag": [2, 2, 4, 0]}, {"diag": [2, 2, 0, 4]}], "expect": "feasible"},
            {"name": "interpolation in V", "kind": "interpolation", "system": "V", "big": "L4",
             "lower": [{"diag": [-3, 1, -1, -1]}, {"diag": [1, -3, -1, -1]}],
             "upper": [{"diag": [2, 2, 4, 0]}, {"diag": [2, 2, 0, 4]}],
             "expect": {"big": "feasible", "small": "infeasible"}},
            {"name": "coordinate extensions", "kind": "extension", "small": "V", "big": "L4",
             "maps": [{"coordinate": i} for i in range(4)], "sums": [[[0, 1], [2, 3]]], "expect": "infeasible"},
        ],
    }
