import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from framekit.errors import (CountTooSmall, DidNotConverge, DimensionMismatch, InvalidPartition,
                             NotSpanning)
from framekit.frames import (Frame, analysis_apply, canonical_parseval, frame_bounds,
                             frame_operator_apply, make_harmonic_frame,
                             make_random_unit_tight_frame, orthonormal_frame, reconstruct,
                             synthesis_apply)
from framekit.partition import Partition

from conftest import MB_GRAM, MB_VECTORS

seeds = st.integers(0, 2**32 - 1)


def test_mercedes_benz_bounds():
    b = frame_bounds(Frame(MB_VECTORS))
    assert abs(b.lower - 1.5) < 1e-12 and abs(b.upper - 1.5) < 1e-12
    assert b.tight_ratio == pytest.approx(1.0, abs=1e-12)


def test_real_harmonic_two_by_three_is_mercedes_benz():
    f = make_harmonic_frame(2, 3)
    assert np.allclose(f.gram, MB_GRAM, atol=1e-12)


def test_orthonormal_frame():
    for field in ("real", "complex"):
        f = orthonormal_frame(4, field)
        assert f.field == field
        assert (f.bounds.lower, f.bounds.upper) == (1.0, 1.0)


@given(n=st.integers(1, 10), extra=st.integers(0, 10), field=st.sampled_from(["real", "complex"]))
def test_harmonic_frames_are_unit_norm_tight(n, extra, field):
    f = make_harmonic_frame(n, n + extra, field)
    assert f.count == n + extra and f.dim == n
    assert np.max(np.abs(f.norms - 1)) < 1e-12
    assert abs(f.bounds.lower - f.count / n) < 1e-10 * f.count
    assert f.bounds.tight_ratio <= 1 + 1e-10


def test_harmonic_rejects_too_few_vectors():
    with pytest.raises(CountTooSmall):
        make_harmonic_frame(4, 3)
    with pytest.raises(ValueError):
        make_harmonic_frame(2, 3, field="quaternion")


@given(seed=seeds, n=st.integers(2, 5), extra=st.integers(0, 6))
def test_random_tight_frames(seed, n, extra):
    f = make_random_unit_tight_frame(n, n + extra, seed)
    assert f.bounds.tight_ratio <= 1 + 1e-8
    assert np.max(np.abs(f.norms - 1)) < 1e-8
    again = make_random_unit_tight_frame(n, n + extra, seed)
    assert np.array_equal(f.vectors, again.vectors)


@pytest.mark.parametrize("seed", [0, 240, 282])
def test_random_tight_frame_recovers_from_slow_or_stalled_starts(seed):
    # (2, 4) starts that converge slowly or stall at a non-tight fixed point
    f = make_random_unit_tight_frame(2, 4, seed)
    assert f.bounds.tight_ratio <= 1 + 1e-8
    assert np.max(np.abs(f.norms - 1)) < 1e-8


def test_random_tight_square_is_orthonormal():
    f = make_random_unit_tight_frame(4, 4, seed=9)
    assert np.allclose(f.gram, np.eye(4), atol=1e-9)


def test_random_tight_complex():
    f = make_random_unit_tight_frame(3, 7, seed=2, field="complex")
    assert f.field == "complex" and f.bounds.tight_ratio <= 1 + 1e-8


def test_random_tight_reports_best_iterate():
    with pytest.raises(DidNotConverge) as info:
        make_random_unit_tight_frame(4, 9, seed=3, iters=1)
    assert isinstance(info.value.best, Frame)
    with pytest.raises(CountTooSmall):
        make_random_unit_tight_frame(4, 3, seed=0)


@given(seed=seeds, complex_field=st.booleans())
def test_analysis_and_synthesis_are_adjoint(seed, complex_field):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((3, 5)) + (1j * rng.standard_normal((3, 5)) if complex_field else 0)
    f = Frame(v)
    x = rng.standard_normal(3)
    c = rng.standard_normal(5)
    assert np.vdot(c, analysis_apply(f, x)) == pytest.approx(np.vdot(synthesis_apply(f, c), x))
    assert np.allclose(frame_operator_apply(f, x), f.frame_operator @ x)
    assert np.allclose(reconstruct(f, analysis_apply(f, x)), x, atol=1e-10)


def test_canonical_parseval_has_unit_bounds(rng):
    f = Frame(rng.standard_normal((3, 7)))
    p = canonical_parseval(f)
    assert p.bounds.lower == pytest.approx(1.0, abs=1e-10)
    assert p.bounds.upper == pytest.approx(1.0, abs=1e-10)


def test_non_spanning_and_shape_errors():
    f = Frame(np.array([[1.0, 2.0], [0.0, 0.0]]))
    with pytest.raises(NotSpanning):
        reconstruct(f, [1.0, 1.0])
    with pytest.raises(NotSpanning):
        canonical_parseval(f)
    with pytest.raises(DimensionMismatch):
        analysis_apply(Frame(MB_VECTORS), [1.0, 2.0, 3.0])


def test_frame_is_read_only():
    v = MB_VECTORS.copy()
    f = Frame(v)
    v[0, 0] = 7.0
    assert f.vectors[0, 0] == 1.0
    with pytest.raises(ValueError):
        f.vectors[0, 0] = 2.0


@pytest.mark.parametrize("field", ["real", "complex"])
def test_json_round_trip(field, rng):
    v = rng.standard_normal((3, 4))
    if field == "complex":
        v = v + 1j * rng.standard_normal((3, 4))
    f = Frame(v)
    data = json.loads(json.dumps(f.to_json()))
    assert data["dim"] == 3 and data["field"] == field and len(data["vectors"]) == 4
    if field == "complex":
        assert data["vectors"][0][0] == [v[0, 0].real, v[0, 0].imag]
    else:
        assert data["vectors"][1] == list(v[:, 1])
    assert np.array_equal(Frame.from_json(data).vectors, f.vectors)


def test_partition_parsing_and_validation():
    p = Partition.parse("0,1,2;3,4;5", 6)
    assert p.blocks == ((0, 1, 2), (3, 4), (5,))
    assert p.max_block == 3 and len(p) == 3 and p[1] == (3, 4)
    assert Partition.parse(p.to_spec(), 6) == p
    assert Partition.contiguous(5, 2).blocks == ((0, 1), (2, 3), (4,))
    for bad, count in (("0,1;1", 2), ("0;1", 3), ("0,x", 2), ("0;;", 2), ("0,5", 2)):
        with pytest.raises(InvalidPartition):
            Partition.parse(bad, count)
    with pytest.raises(InvalidPartition):
        p.check_cap(2)
    with pytest.raises(InvalidPartition):
        Partition.contiguous(4, 0)


@given(seed=seeds, count=st.integers(1, 40), cap=st.integers(1, 5))
def test_random_partitions_respect_cap(seed, count, cap):
    p = Partition.random(count, cap, np.random.default_rng(seed))
    assert p.max_block <= cap
    assert sorted(i for b in p for i in b) == list(range(count))
