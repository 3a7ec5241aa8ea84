import json
from fractions import Fraction

import numpy as np
import pytest

from tightriesz import sdp
from tightriesz.sdp import FarkasCertificate, LmiBuilder, Status, block, problem, solve, replay_check
from tightriesz.serialize import FormatError

from oracles import max_margin_vertices


def diag_problem(const, coeffs, strict=True, margin=None):
    """One 1x1 block per row: ``const_r + coeffs_r . x - delta margin_r >= 0``."""
    n = len(coeffs[0])
    margin = margin or [1] * len(const)
    blocks = [block(np.array([[c]], dtype=float), [np.array([[a]], dtype=float) for a in row],
                    np.array([[m]], dtype=float)) for c, row, m in zip(const, coeffs, margin)]
    return problem(n, blocks, strict=strict)


@pytest.mark.parametrize("seed", range(40))
def test_exact_margin_matches_vertex_enumeration(seed):
    rng = np.random.default_rng(seed)
    n = 1 + seed % 3
    r = n + 1 + rng.integers(0, 3)
    coeffs = rng.integers(-3, 4, size=(r, n)).tolist()
    if np.linalg.matrix_rank(np.array(coeffs)) < n:
        coeffs[:n] = np.eye(n, dtype=int).tolist()
    const = rng.integers(-4, 5, size=r).tolist()
    margin = rng.integers(1, 3, size=r).tolist()
    p = diag_problem(const, coeffs, strict=bool(seed % 2), margin=margin)
    v = solve(p)
    ref = max_margin_vertices(const, coeffs, margin)
    assert v.exact and v.best_margin == ref
    if p.strict:
        assert v.feasible == (ref > 0)
    else:
        assert v.feasible == (ref >= 0)
    assert replay_check(p, v)


def test_farkas_certificate_replays_and_rejects_tampering():
    # x > 1 and x < 0
    p = diag_problem([-1, 0], [[1], [-1]])
    v = solve(p)
    assert v.infeasible and isinstance(v.certificate, FarkasCertificate)
    assert v.best_margin == Fraction(-1, 2)
    assert replay_check(p, v)
    bad = sdp.FeasibilityVerdict(Status.INFEASIBLE, certificate=FarkasCertificate("margin", (Fraction(1), Fraction(0)), ()),
                                 exact=True)
    assert not replay_check(p, bad)


def test_inconsistent_equalities_exact():
    b = LmiBuilder()
    (x,) = b.new_vars(1)
    b.add_block(np.zeros((1, 1)), {x: np.ones((1, 1))})
    b.add_eq({x: 1}, 1)
    b.add_eq({x: 2}, 3)
    p = b.build()
    v = solve(p)
    assert v.infeasible and v.certificate.kind == "equality"
    assert replay_check(p, v)


def test_strict_vs_closed_and_unknown_band():
    # [[0, x], [x, 0]] >= delta I has best margin exactly 0 at x = 0
    p = problem(1, [block(np.zeros((2, 2)), [np.array([[0.0, 1.0], [1.0, 0.0]])])], strict=True)
    assert solve(p).status is Status.UNKNOWN
    closed = problem(1, p.blocks, strict=False)
    v = solve(closed)
    assert v.feasible and replay_check(closed, v)


def test_numeric_feasible_and_infeasible_certificates():
    # [[1, x], [x, 1]] > 0: feasible at x = 0 with margin 1
    p = problem(1, [block(np.eye(2), [np.array([[0.0, 1.0], [1.0, 0.0]])])])
    v = solve(p)
    assert v.feasible and replay_check(p, v)
    # [[x, 1], [1, -x]] has determinant -x^2 - 1 < 0: infeasible, dual certificate
    q = problem(1, [block(np.array([[0.0, 1.0], [1.0, 0.0]]), [np.diag([1.0, -1.0])])])
    w = solve(q)
    assert w.infeasible
    assert w.certificate is not None and replay_check(q, w)


def test_complex_block():
    # [[1, i x], [-i x, 1]] > delta I: best margin 1 at x = 0
    a = np.array([[0, 1j], [-1j, 0]])
    p = problem(1, [block(np.eye(2), [a])])
    v = solve(p)
    assert v.feasible and v.best_margin == pytest.approx(1.0, abs=1e-6)


def test_scaling_preserves_status():
    p = diag_problem([-1, 3], [[1], [-1]])
    for c in (0.25, 4.0):
        assert solve(p.scaled(c)).status is solve(p).status


def test_validation():
    with pytest.raises(sdp.ProblemError):
        block(np.eye(2), [np.eye(3)])
    with pytest.raises(sdp.ProblemError):
        block(np.eye(2), [], margin_unit=-np.eye(2))
    with pytest.raises(ValueError):
        solve(diag_problem([1], [[1]]), tol=0)


def test_serialization_round_trip(tmp_path):
    b = LmiBuilder()
    x, y = b.new_vars(2)
    b.add_block(np.array([[1, 0.5j], [-0.5j, 2]]), {x: np.eye(2), y: np.array([[0, 1], [1, 0]])})
    b.add_eq({x: 1, y: -1}, 0.5)
    p = b.build(strict=False, label="rt")
    path = tmp_path / "p.json"
    sdp.dump_problem(p, path)
    q = sdp.load_problem(path)
    assert q.num_vars == 2 and q.strict is False and q.label == "rt"
    assert np.allclose(q.blocks[0].constant, p.blocks[0].constant)
    assert np.allclose(q.eq_coeffs, p.eq_coeffs)
    obj = json.loads(path.read_text())
    obj["extra"] = 1
    with pytest.raises(FormatError, match="unknown field"):
        sdp.problem_from_dict(obj)
