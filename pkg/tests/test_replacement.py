import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from framekit.errors import (BlockTooLarge, DependentBlock, EpsilonOutOfRange, EpsilonTooLarge,
                             FormulaNegative, HypothesisViolated, UnknownBlock)
from framekit.frames import Frame, make_harmonic_frame, orthonormal_frame
from framekit.fusion import Subspace
from framekit.partition import Partition
from framekit.replacement import (bracket_lower, bracket_upper, certify_replacement,
                                  check_projection_residual, k1_limit, projection_residual_bound,
                                  replace_blocks, whiten_block, whitening_hypothesis_constant,
                                  whitening_instance, whitening_residual_bound)
from framekit.rip import riesz_bounds, rip_exhaustive
from framekit.verify import k1_limit_oracle, near_orthonormal_frame

seeds = st.integers(0, 2**32 - 1)


def exact_limit(eps: Fraction) -> int:
    head = 1 - 4 * eps / (1 - eps) ** 2
    return math.ceil(head ** 2 / (16 * eps ** 2 * (1 + eps) ** 6)) - 1


def test_k1_limit_reference_values():
    assert k1_limit(0.01) == 541 == exact_limit(Fraction(1, 100))
    assert k1_limit(0.001) == 61629 == exact_limit(Fraction(1, 1000))
    assert k1_limit_oracle(Fraction(1, 100)) == 541


@given(eps=st.fractions(Fraction(1, 10**4), Fraction(1, 10)))
def test_k1_limit_matches_exact_evaluation(eps):
    if 1 - 4 * eps / (1 - eps) ** 2 <= 0:
        return
    assert abs(k1_limit(float(eps)) - exact_limit(eps)) <= 1


def test_k1_limit_domain():
    for bad in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(EpsilonOutOfRange):
            k1_limit(bad)
    with pytest.raises(FormulaNegative):
        k1_limit(0.2)  # 4(0.2)/0.64 = 1.25 > 1


def test_bracket_at_zero_epsilon_is_exact():
    assert bracket_lower(0.0, 5) == 1.0 and bracket_upper(0.0, 5) == 1.0


def test_whitening_gives_orthonormal_basis_of_the_same_span():
    f = make_harmonic_frame(6, 7)
    w = whiten_block(f, (0, 1, 2))
    assert np.allclose(w.T @ w, np.eye(3), atol=1e-12)
    p = f.columns((0, 1, 2))
    assert np.allclose(w @ (w.T @ p), p, atol=1e-12)
    with pytest.raises(DependentBlock):
        whiten_block(Frame(np.array([[1.0, 2.0], [0.0, 0.0]])), (0, 1))


def test_replacing_an_orthonormal_frame_is_a_no_op():
    f = orthonormal_frame(6)
    part = Partition.contiguous(6, 2)
    rf = replace_blocks(f, part, [0, 1, 2])
    assert np.allclose(rf.frame.vectors, f.vectors, atol=1e-14)
    rep = certify_replacement(rf, 2, rip_exhaustive(f, 2))
    assert rep.holds is True
    assert rep.measured_lower == pytest.approx(1.0) and rep.measured_upper == pytest.approx(1.0)
    assert rep.k1_max is None


def test_replace_block_errors():
    f = make_harmonic_frame(6, 7)
    part = Partition.contiguous(7, 3)
    with pytest.raises(UnknownBlock):
        replace_blocks(f, part, [3])
    with pytest.raises(UnknownBlock):
        replace_blocks(f, part, [0, 0])
    with pytest.raises(BlockTooLarge):
        replace_blocks(f, part, [0], s=2)
    with pytest.raises(UnknownBlock):
        replace_blocks(f, Partition.contiguous(6, 3), [0])


@given(seed=seeds)
def test_replacement_bracket_on_near_orthonormal_frames(seed):
    rng = np.random.default_rng(seed)
    f = near_orthonormal_frame(10, 0.002, rng)
    rip = rip_exhaustive(f, 3)
    assert rip.epsilon_hat <= 0.02
    part = Partition.random(10, 3, rng)
    k1 = int(rng.integers(1, len(part) + 1))
    rep = certify_replacement(replace_blocks(f, part, range(k1), 3), 3, rip)
    assert rep.holds is True and not rep.vacuous
    assert rep.k1 == k1 <= rep.k1_max
    assert rep.theoretical_lower <= rep.measured_lower <= rep.measured_upper <= rep.theoretical_upper


def test_replacement_report_flags():
    f = make_harmonic_frame(6, 7)
    rip = rip_exhaustive(f, 3)  # epsilon 0.5: the lower constant is negative
    rf = replace_blocks(f, Partition.contiguous(7, 2), [0, 1])
    rep = certify_replacement(rf, 3, rip)
    assert rep.vacuous and rep.holds is None and rep.k1_max is None
    data = json.loads(json.dumps(rep.to_json()))
    for key in ("theoretical_lower", "theoretical_upper", "measured_lower", "measured_upper",
                "epsilon_input", "k1", "bracket_vacuous", "holds"):
        assert key in data
    with pytest.raises(EpsilonTooLarge):
        certify_replacement(rf, 3, rip, epsilon=1.0)
    with pytest.raises(ValueError):
        certify_replacement(rf, 4, rip)
    with pytest.raises(ValueError):
        certify_replacement(rf, 3, rip, samples=5)


def test_randomized_replacement_sweep():
    rng = np.random.default_rng(4)
    f = near_orthonormal_frame(12, 0.002, rng)
    rip = rip_exhaustive(f, 3)
    rf = replace_blocks(f, Partition.contiguous(12, 3), [0, 2], 3)
    a = certify_replacement(rf, 3, rip, samples=50, seed=1)
    b = certify_replacement(rf, 3, rip, samples=50, seed=1)
    full = certify_replacement(rf, 3, rip)
    assert a == b and a.method == "randomized" and a.subsets_checked == 50
    assert full.measured_lower <= a.measured_lower and a.measured_upper <= full.measured_upper


def test_forced_zero_epsilon_breaks_the_bracket():
    rng = np.random.default_rng(1)
    f = near_orthonormal_frame(8, 0.01, rng)
    rip = rip_exhaustive(f, 2)
    rf = replace_blocks(f, Partition.contiguous(8, 2), [0], 2)
    assert certify_replacement(rf, 2, rip, epsilon=0.0).holds is False


@given(seed=seeds, data=st.data())
def test_projection_residual_through_whitening(seed, data):
    f = make_harmonic_frame(8, 9)
    rng = np.random.default_rng(seed)
    block = tuple(sorted(int(i) for i in rng.choice(9, size=3, replace=False)))
    k = data.draw(st.integers(1, 3))
    sub_block = block[:k]
    eps = riesz_bounds(f, block).epsilon
    w1, w2, t = whitening_instance(f, block, sub_block)
    eps_h = whitening_hypothesis_constant(eps)
    c = check_projection_residual(w1, w2, t, eps_h, trials=20, seed=seed)
    assert c.hypothesis_constant <= eps_h + 1e-12
    assert c.holds
    assert c.sampled_residual_ratio <= c.worst_residual_ratio + 1e-12
    assert c.worst_residual_ratio <= whitening_residual_bound(eps) + 1e-10


def test_whitening_constants_agree():
    for eps in (0.01, 0.1, 0.5):
        e = whitening_hypothesis_constant(eps)
        assert projection_residual_bound(e) == pytest.approx(whitening_residual_bound(eps))


def test_projection_residual_by_hand():
    # T rotates a line by angle a: hypothesis constant |1 - e^{ia}|^2 = 4 sin^2(a/2),
    # and the residual of W2 against W1 is sin^2(a).
    a = 0.2
    rot = np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]])
    w1 = Subspace(np.array([[1.0], [0.0]]))
    w2 = Subspace(rot[:, :1])
    c = check_projection_residual(w1, w2, rot)
    assert c.hypothesis_constant == pytest.approx(4 * math.sin(a / 2) ** 2)
    assert c.worst_residual_ratio == pytest.approx(math.sin(a) ** 2)
    assert c.holds


def test_projection_residual_hypotheses():
    w1 = Subspace(np.array([[1.0], [0.0]]))
    w2 = Subspace(np.array([[0.0], [1.0]]))
    with pytest.raises(HypothesisViolated):
        check_projection_residual(w1, w2, np.eye(2))  # T(W1) != W2
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])
    with pytest.raises(HypothesisViolated):
        check_projection_residual(w1, w2, swap)  # ||phi - T phi||^2 = 2
    rot = np.array([[math.cos(0.2), -math.sin(0.2)], [math.sin(0.2), math.cos(0.2)]])
    with pytest.raises(HypothesisViolated):
        check_projection_residual(w1, Subspace(rot[:, :1]), rot, epsilon=1e-6)
    with pytest.raises(HypothesisViolated):
        check_projection_residual(w1, w2, np.eye(3))
