from __future__ import annotations

import json
import math

import numpy as np
import pytest

from oracles import fourth_root_kernel_moments, rademacher_product_expectation, rademacher_symmetric_expectation
from wigprod.closedform import product_charpoly_coeffs
from wigprod.sampling import EnsembleSpec, EntryDistribution, parse_dist
from wigprod.verifier import (
    VerificationReport,
    run_mc,
    verify_hermite,
    verify_lemma1,
    verify_thm1_hermitised,
    verify_thm1_mixed,
    verify_thm2_kernel,
    verify_trivial_single,
    z_score,
)

RAD = EntryDistribution("rademacher")
CG = EntryDistribution("complex-gaussian")


def _spec(N, M, dist=RAD):
    return EnsembleSpec.uniform(N, M, dist)


def test_references_match_exact_enumeration():
    # the closed form is the exact rademacher average, not just an MC target
    for N, M in [(2, 1), (2, 2), (3, 1)]:
        ref = product_charpoly_coeffs(N, M).exact
        assert rademacher_product_expectation(N, M) == list(ref)
    assert rademacher_product_expectation(2, 2, mixed=True) == list(product_charpoly_coeffs(2, 2).exact)
    assert rademacher_symmetric_expectation(3) == [0, -3, 0, 1]
    kern = fourth_root_kernel_moments(2)
    assert [kern[v][v] for v in range(3)] == [2, 2, 1]
    assert all(kern[a][b] == 0 for a in range(3) for b in range(3) if a != b)


def test_degenerate_rademacher_constant_term():
    rep = verify_thm1_hermitised(_spec(1, 1), 2000, seed=1)
    rec0 = rep.records[0]
    assert rec0.est_re == -1.0 and rec0.se == 0.0 and rec0.z == 0.0
    assert rep.passed


def test_laguerre_case_complex_gaussian():
    rep = verify_thm1_hermitised(_spec(2, 1, CG), 50_000, seed=3)
    assert rep.passed, rep.to_json()
    assert [r.ref_re for r in rep.records] == [2.0, -4.0, 1.0]


def test_mixed_equals_hermitised_at_m1():
    a = verify_thm1_hermitised(_spec(3, 1, CG), 5000, seed=4)
    b = verify_thm1_mixed(_spec(3, 1, CG), 5000, seed=4)
    assert a.records == b.records


def test_mixed_distributions_reference():
    spec = EnsembleSpec(3, 2, (parse_dist("gaussian-r:1"), RAD))
    rep = verify_thm1_mixed(spec, 50_000, seed=5)
    assert rep.passed
    assert [r.ref_re for r in rep.records] == [float(c) for c in product_charpoly_coeffs(3, 2).exact]


def test_scaled_reference_uses_tau():
    spec = EnsembleSpec(1, 2, (EntryDistribution("rademacher", 4.0), EntryDistribution("rademacher", 9.0)))
    rep = verify_thm1_hermitised(spec, 2000, seed=0)
    assert rep.records[0].ref_re == -36.0 and rep.records[0].est_re == -36.0


def test_thm2_one_by_one():
    rep = verify_thm2_kernel(_spec(1, 1, CG), 20_000, seed=6)
    assert rep.passed
    refs = {tuple(r.index): r.ref_re for r in rep.records}
    assert refs[(0, 0)] == 1.0 and refs[(1, 1)] == 1.0 and refs[(0, 1)] == 0.0


def test_trivial_single_fourth_root():
    rep = verify_trivial_single(_spec(2, 3, EntryDistribution("complex-fourth-root")), 20_000, seed=7)
    assert rep.passed
    top = rep.records[-1]
    assert top.est_re == 1.0 and top.se == 0.0


def test_hermite_n1_and_small():
    rep = verify_hermite(1, 1.0, RAD, 5000, seed=1)
    assert rep.passed
    rep = verify_hermite(2, 1.0, RAD, 20_000, seed=2)
    assert rep.passed and [r.ref_re for r in rep.records] == [-1.0, 0.0, 1.0]


def test_lemma1_cases():
    p1, p2 = verify_lemma1(2, 1, CG, 20_000, seed=8)
    assert p1.passed and p2.passed
    lab = {json.dumps(r.index, sort_keys=True): r for r in p1.records}
    matched = lab[json.dumps({"K": [1], "Kt": [2], "L": [1], "Lt": [2]}, sort_keys=True)]
    assert matched.ref_re == 1.0
    un = lab[json.dumps({"K": [1], "Kt": [1], "L": [2], "Lt": [1]}, sort_keys=True)]
    assert un.ref_re == 0.0
    p1, p2 = verify_lemma1(3, 3, CG, 20_000, seed=9)
    assert p2.records[0].ref_re == math.factorial(3)


def test_lemma1_random_subset_mode():
    p1, _ = verify_lemma1(4, 2, RAD, 5000, seed=1, exhaustive=False, n_quadruples=50)
    refs = [r.ref_re for r in p1.records]
    assert refs.count(2.0) == 36  # every matched case is kept
    with pytest.raises(ValueError):
        verify_lemma1(6, 2, RAD, 5000, seed=1, exhaustive=True)


def test_fail_verdict_on_non_wigner_law():
    rep = verify_thm1_hermitised(_spec(2, 1, parse_dist("const:2")), 2000, seed=0)
    assert rep.verdict == "fail"
    assert math.isinf(rep.max_abs_z)


def test_inconclusive_on_tiny_sample():
    # rare large spikes: E|x|^2 = 1 but the SE of the constant term at S=1000 is near 1
    spiky = parse_dist("two-point:1:999:-1:0.001")
    rep = verify_thm1_hermitised(_spec(1, 1, spiky), 1000, seed=0)
    assert rep.verdict == "inconclusive"
    assert any("raise samples" in n for n in rep.notes)


def test_bonferroni_note_and_roundtrip():
    rep = verify_trivial_single(_spec(2, 1), 2000, seed=3)
    assert any("Bonferroni" in n for n in rep.notes)
    back = VerificationReport.from_dict(json.loads(rep.to_json()))
    assert back == rep


def test_min_samples():
    with pytest.raises(ValueError):
        verify_trivial_single(_spec(2, 1), 10, seed=0)


def test_z_score_edges():
    assert z_score(1.0, 1.0, 0.0) == 0.0
    assert math.isinf(z_score(1.1, 1.0, 0.0))
    assert z_score(1.5, 1.0, 0.25) == pytest.approx(2.0)


@pytest.mark.parametrize("workers", [2, 8])
def test_worker_count_does_not_change_report(workers):
    spec = _spec(3, 2, CG)
    a = verify_thm2_kernel(spec, 9000, seed=11, workers=1).to_dict(include_timing=False)
    b = verify_thm2_kernel(spec, 9000, seed=11, workers=workers).to_dict(include_timing=False)
    assert a == b


def test_run_mc_sample_count_not_multiple_of_chunk():
    acc = run_mc(lambda X: X[:, 0, 0, :1].reshape(len(X), 1), _spec(1, 1), 5001, seed=0)
    assert acc.count == 5001


def test_universality_cross_check():
    # rademacher and complex-gaussian share a reference, so their means must agree
    a = verify_thm1_hermitised(_spec(2, 2, RAD), 50_000, seed=12)
    b = verify_thm1_hermitised(_spec(2, 2, CG), 50_000, seed=13)
    for ra, rb in zip(a.records, b.records):
        se = math.hypot(ra.se, rb.se)
        assert abs(complex(ra.est_re, ra.est_im) - complex(rb.est_re, rb.est_im)) <= 5 * se + 1e-12
        assert ra.ref_re == rb.ref_re


def test_hermite_insensitive_to_diagonal_variance():
    a = verify_hermite(3, 1.0, EntryDistribution("real-gaussian"), 50_000, seed=14, diag_variance_factor=1.0)
    b = verify_hermite(3, 1.0, EntryDistribution("real-gaussian"), 50_000, seed=14, diag_variance_factor=2.0)
    assert a.passed and b.passed
    assert not np.allclose([r.est_re for r in a.records], [r.est_re for r in b.records], rtol=0, atol=0)
