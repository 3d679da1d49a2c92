import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from framekit.errors import (AmbientMismatch, BlockTooLarge, DimensionMismatch, InvalidPartition,
                             TooFewSubspaces)
from framekit.frames import Frame, make_harmonic_frame, orthonormal_frame
from framekit.fusion import Subspace
from framekit.geometry import (certify_equi_isoclinic, certify_near_orthogonality,
                               check_correlation_bound, correlation_bound, isoclinic_parameter,
                               near_orthogonality, orthogonality_bound, pairwise_correlations,
                               principal_angles)
from framekit.partition import Partition
from framekit.rip import rip_exhaustive

from conftest import MB_VECTORS
from helpers import orth_basis

seeds = st.integers(0, 2**32 - 1)


def line(angle):
    return Subspace(np.array([[math.cos(angle)], [math.sin(angle)]]))


def rotated_plane(alpha):
    """span{cos a e1 + sin a e3, cos a e2 + sin a e4}: isoclinic to span{e1, e2}."""
    c, s = math.cos(alpha), math.sin(alpha)
    return Subspace(np.array([[c, 0], [0, c], [s, 0], [0, s]]))


E12 = Subspace(np.eye(4)[:, :2])


def test_two_lines():
    a = principal_angles(line(0.0), line(0.3))
    assert a.cosines == pytest.approx([math.cos(0.3)])
    assert a.angles == pytest.approx([0.3])
    iso = isoclinic_parameter(line(0.0), line(0.3))
    assert iso.lam == pytest.approx(math.cos(0.3) ** 2) and iso.spread == 0.0


@given(seed=seeds, n=st.integers(2, 8), data=st.data())
def test_principal_cosines_match_lapack(seed, n, data):
    rng = np.random.default_rng(seed)
    k1, k2 = data.draw(st.integers(1, n)), data.draw(st.integers(1, n))
    q1, q2 = orth_basis(rng, n, k1), orth_basis(rng, n, k2)
    got = principal_angles(Subspace(q1), Subspace(q2)).cosines
    ref = np.clip(np.linalg.svd(q1.T @ q2, compute_uv=False), 0, 1)
    assert got.shape == (min(k1, k2),)
    assert got == pytest.approx(ref, abs=1e-10)
    assert near_orthogonality(Subspace(q1), Subspace(q2)) == pytest.approx(ref[0], abs=1e-10)


def test_orthonormal_blocks_are_orthogonal():
    f = orthonormal_frame(4)
    a, b = Subspace(f.vectors[:, :2]), Subspace(f.vectors[:, 2:])
    assert np.all(principal_angles(a, b).cosines == 0.0)
    assert principal_angles(a, a).cosines == pytest.approx([1.0, 1.0])


def test_dimension_errors():
    with pytest.raises(AmbientMismatch):
        principal_angles(line(0.0), E12)
    with pytest.raises(DimensionMismatch):
        isoclinic_parameter(E12, Subspace(np.eye(4)[:, :1]))
    with pytest.raises(TooFewSubspaces):
        certify_equi_isoclinic([E12])
    with pytest.raises(DimensionMismatch):
        certify_equi_isoclinic([E12, Subspace(np.eye(4)[:, :3])])


def test_exactly_isoclinic_planes():
    alpha = 0.7
    iso = isoclinic_parameter(E12, rotated_plane(alpha))
    assert iso.lam == pytest.approx(math.cos(alpha) ** 2)
    rep = certify_equi_isoclinic([E12, rotated_plane(alpha)], epsilon=1e-6)
    assert rep.epsilon_required < 1e-7 and rep.holds_at(1e-6)
    assert rep.lambda_star == pytest.approx(math.cos(alpha) ** 2)


def test_non_isoclinic_planes():
    skew = Subspace(np.array([[1.0, 0], [0, math.cos(1.0)], [0, 0], [0, math.sin(1.0)]]))
    assert isoclinic_parameter(E12, skew).lam is None
    rep = certify_equi_isoclinic([E12, skew], epsilon=0.1)
    # squared cosines 1 and cos^2(1): half the gap is eps^2
    assert rep.epsilon_required == pytest.approx(math.sqrt((1 - math.cos(1.0) ** 2) / 2))
    assert not rep.holds_at(0.1)
    data = json.loads(json.dumps(rep.to_json()))
    assert data["holds"] is False and len(data["pairs"]) == 1


def test_bound_formulas():
    assert correlation_bound(0.1) == pytest.approx(0.21)
    assert orthogonality_bound(0.1) == pytest.approx(0.242)
    assert correlation_bound(0.0) == orthogonality_bound(0.0) == 0.0


@given(seed=seeds, data=st.data())
def test_correlation_bound_on_riesz_subsets(seed, data):
    f = make_harmonic_frame(8, 10)
    rng = np.random.default_rng(seed)
    size = data.draw(st.integers(2, 4))
    subset = tuple(int(i) for i in rng.choice(10, size=size, replace=False))
    cut = data.draw(st.integers(1, size - 1))
    c = check_correlation_bound(f, subset, [subset[:cut], subset[cut:]])
    assert c.holds and c.holds_orthogonality
    assert c.max_correlation <= c.bound + 1e-10 <= c.orthogonality_bound + 1e-10


def test_correlation_of_two_unit_vectors_by_hand():
    # two unit vectors with inner product c: eps = c/(1-c), bound 1/(1-c)^2 - 1 >= c
    f = Frame(MB_VECTORS)
    c = check_correlation_bound(f, (0, 1), [(0,), (1,)])
    assert c.max_correlation == pytest.approx(0.5)
    assert c.epsilon == pytest.approx(1.0)
    assert c.bound == pytest.approx(3.0)


def test_correlation_split_must_cover_subset():
    f = make_harmonic_frame(6, 7)
    with pytest.raises(InvalidPartition):
        check_correlation_bound(f, (0, 1, 2), [(0,), (1,)])
    with pytest.raises(InvalidPartition):
        check_correlation_bound(f, (0, 1), [(0, 1)])


def test_near_orthogonality_certificate():
    f = make_harmonic_frame(8, 10)
    rip = rip_exhaustive(f, 2)
    part = Partition(tuple((i,) for i in range(10)), 10)
    rep = certify_near_orthogonality(f, part, rip)
    assert rep.holds and rep.nearly_orthogonal and rep.correlation_holds
    assert rep.max_correlation <= rep.bound
    assert rep.isoclinic is not None
    assert rep.isoclinic.epsilon_required <= rep.bound
    assert len(rep.correlations) == 45
    data = json.loads(json.dumps(rep.to_json()))
    assert data["holds"] is True and "lambda_star" in data
    with pytest.raises(BlockTooLarge):
        certify_near_orthogonality(f, Partition.contiguous(10, 2), rip)


def test_pairwise_correlations_allow_unequal_dims():
    out = pairwise_correlations([E12, Subspace(np.eye(4)[:, 2:3]), Subspace(np.eye(4)[:, :1])])
    assert [(i, j) for i, j, _ in out] == [(0, 1), (0, 2), (1, 2)]
    assert [c for _, _, c in out] == pytest.approx([0.0, 1.0, 0.0])
