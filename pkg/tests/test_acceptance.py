"""Acceptance gate: ten criteria, each printing one PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v -s`` (or ``-m acceptance``).
"""

import math
import time

import numpy as np
import pytest

from conftest import levelwise_max_norm, unit_disc
from jsrbound.bounds import (
    bochi_check,
    certify,
    omega_recursion_check,
    sigma_nu_closed,
    sigma_nu_exact,
    sweep,
)
from jsrbound.linalg import NormKind, eigen_spectral_radius, matrix_norm
from jsrbound.semigroup import MatrixSet, nilpotency_check, power_set_norm

pytestmark = pytest.mark.acceptance

KINDS = ["one", "inf", "two"]
MODES = ["exact", "closed"]
DIAG21 = MatrixSet([np.diag([2.0, 1.0])])


@pytest.fixture
def report(capsys):
    def _report(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[acceptance {number:>2}] {'PASS' if ok else 'FAIL'}  {title}: {detail}")
    return _report


def _rel_close(a, b, rel):
    return abs(a - b) <= rel * max(abs(a), abs(b))


def test_01_enclosure_suite(report):
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    violations, checked, count = [], 0, 0
    while count < 300:
        d = (2, 3, 4)[count % 3]
        S = MatrixSet([unit_disc(rng, (d, d))])
        if nilpotency_check(S):
            continue
        count += 1
        rho = eigen_spectral_radius(S[0])
        for kind in KINDS:
            for mode in MODES:
                seq = sweep(S, 12, kind, mode)
                assert not seq.failures
                for iv in seq:
                    checked += 1
                    if not iv.contains(rho, 1e-8):
                        violations.append((count, kind, mode, iv.n, iv.lower, rho, iv.upper))
    elapsed = time.perf_counter() - start
    ok = not violations and elapsed < 60
    report(1, "enclosure suite", ok,
           f"{checked} intervals, {len(violations)} violations, {elapsed:.1f} s (limit 60 s)")
    assert not violations, violations[:5]
    assert elapsed < 60


def test_02_exact_instance(report):
    exact = certify(DIAG21, 4, "inf", "exact")
    closed = certify(DIAG21, 4, "inf", "closed")
    want_e, want_c = 2 * 3 ** -0.75, 2 * 3 ** -1.5
    ok = (exact.upper == 2.0 and closed.upper == 2.0
          and abs(exact.lower - want_e) <= 1e-9 and abs(closed.lower - want_c) <= 1e-9)
    report(2, "exact instance diag(2,1), n=4", ok,
           f"upper={exact.upper!r}, exact lower={exact.lower!r} (want {want_e!r}), "
           f"closed lower={closed.lower!r} (want {want_c!r})")
    assert ok


def test_03_convergence_instance(report):
    start = time.perf_counter()
    iv = certify(DIAG21, 1024, "inf", "exact")
    elapsed = time.perf_counter() - start
    want = 2 * 3 ** (-11 / 1024)
    ok = (iv.params.sigma == 11 and abs(iv.lower - want) <= 1e-12 * want
          and iv.lower >= 1.97 and elapsed < 1.0)
    report(3, "convergence instance n=1024", ok,
           f"lower={iv.lower!r} (want {want!r}, >= 1.97), sigma={iv.params.sigma}, "
           f"{elapsed * 1000:.1f} ms (limit 1 s)")
    assert ok


def test_04_nilpotency(report):
    S = MatrixSet([[[0, 1], [0, 0]], [[0, 2], [0, 0]]])
    ivs = [certify(S, n, kind) for n in (1, 2, 3, 7) for kind in KINDS]
    norms = [power_set_norm(S, 2, kind) for kind in KINDS]
    ok = (nilpotency_check(S, 0.0) and all(iv.exact_zero for iv in ivs)
          and all(x == 0.0 for x in norms))
    report(4, "nilpotent pair", ok,
           f"nilpotent={nilpotency_check(S, 0.0)}, exact_zero in {sum(iv.exact_zero for iv in ivs)}"
           f"/{len(ivs)} intervals, ||S^2|| = {norms}")
    assert ok


def test_05_bochi_suite(report):
    rng = np.random.default_rng(105)
    failures, checked = [], 0
    for i in range(1000):
        d = (2, 3, 4)[i % 3]
        S = MatrixSet([unit_disc(rng, (d, d))])
        rho = eigen_spectral_radius(S[0])
        for kind in KINDS:
            rep = bochi_check(S, rho, kind)
            checked += 1
            assert rep.bochi == 2**d - 1
            if not rep:
                failures.append((i, kind, rep.lhs, rep.rhs))
    ok = not failures
    report(5, "Bochi inequality suite", ok, f"{checked} checks, {len(failures)} violations")
    assert ok, failures[:5]


def test_06_mode_dominance(report):
    start = time.perf_counter()
    bad = []
    for d in range(2, 11):
        for n in range(1, 10**4 + 1):
            se, ve = sigma_nu_exact(n, d)
            sc, vc = sigma_nu_closed(n, d)
            if se > sc * (1 + 1e-12) or ve > vc * (1 + 1e-12):
                bad.append((d, n, se, sc, ve, vc))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 5.0
    report(6, "mode dominance", ok,
           f"9 x 10^4 pairs, {len(bad)} violations, {elapsed:.2f} s (limit 5 s)")
    assert not bad, bad[:5]
    assert elapsed < 5.0


def test_07_pruned_equals_brute_force(report):
    rng = np.random.default_rng(107)
    mismatches, sizes = [], []
    for i in range(100):
        d = int(rng.integers(1, 4))
        r = int(rng.integers(1, 5))
        n_cap = 12 if r == 1 else int(math.log(10**5) / math.log(r) + 1e-9)
        n = int(rng.integers(1, n_cap + 1))
        assert r**n <= 10**5
        sizes.append(r**n)
        S = MatrixSet(unit_disc(rng, (r, d, d)))
        for kind in KINDS:
            a = power_set_norm(S, n, kind)
            b = levelwise_max_norm(S, n, kind)
            if a != b:
                mismatches.append((i, kind, a, b))
    ok = not mismatches
    report(7, "pruned vs brute force", ok,
           f"100 sets x 3 norms, largest r^n = {max(sizes)}, {len(mismatches)} mismatches")
    assert ok, mismatches[:5]


def test_08_scaling_equivariance(report):
    rng = np.random.default_rng(108)
    bad, checked = [], 0
    for i in range(100):
        d = int(rng.integers(2, 4))
        r = int(rng.integers(1, 4))
        n = int(rng.integers(1, 7))
        kind = KINDS[i % 3]
        mode = MODES[i % 2]
        S = MatrixSet(unit_disc(rng, (r, d, d)))
        base = certify(S, n, kind, mode)
        for c in (0.5, 3.0, 10.0):
            iv = certify(S.scaled(c), n, kind, mode)
            checked += 1
            if not (_rel_close(iv.upper, c * base.upper, 1e-9)
                    and _rel_close(iv.lower, c * base.lower, 1e-9)):
                bad.append((i, c, iv.lower, c * base.lower, iv.upper, c * base.upper))
    ok = not bad
    report(8, "scaling equivariance", ok, f"{checked} scaled intervals, {len(bad)} mismatches")
    assert ok, bad[:5]


def test_09_norm_equivalence_chain(report):
    rng = np.random.default_rng(109)
    bad = []
    for i in range(500):
        d = int(rng.integers(1, 7))
        a = unit_disc(rng, (d, d)) * 10.0 ** rng.uniform(-3, 3)
        m = matrix_norm(a, NormKind.MAX)
        t = matrix_norm(a, NormKind.TWO)
        if not (m <= t * (1 + 1e-9) and t <= d * m * (1 + 1e-9)):
            bad.append((i, d, m, t))
    ok = not bad
    report(9, "norm-equivalence chain", ok, f"500 matrices, {len(bad)} violations")
    assert ok, bad[:5]


def test_10_omega_recursion(report):
    rng = np.random.default_rng(110)
    bad, rows, count = [], 0, 0
    while count < 50:
        d = (2, 3)[count % 2]
        S = MatrixSet([unit_disc(rng, (d, d))])
        rho = eigen_spectral_radius(S[0])
        if rho <= 0.0:
            continue
        count += 1
        for kind in KINDS:
            rep = omega_recursion_check(S, rho, 2, kind)
            rows += len(rep.rows)
            bad += [(count, kind, row) for row in rep.rows if not row.holds]
    ok = not bad
    report(10, "omega recursion", ok, f"{rows} rows (k = 0..2), {len(bad)} violations")
    assert ok, bad[:5]
