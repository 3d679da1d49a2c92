"""End-to-end certification suite.

Each check builds seeded instances, runs the library certificates on them and
returns a ``CheckResult``.  The CLI ``verify-all`` command and the acceptance
tests both drive this module, so the two can never disagree.

Config keys (all optional, but the mapping itself must not be empty):

``seed``
    base seed for every instance generator (default 0)
``checks``
    list of check names to run (default: all, in suite order)
``counts``
    mapping check name -> number of instances, overriding the defaults
``force_epsilon``
    replaces the measured epsilon in every epsilon-driven bracket.  Values
    outside the RIP setting 0 <= eps < 1, or too small to cover the measured
    data, make the affected checks fail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import FrameKitError
from .frames import (Frame, analysis_apply, make_harmonic_frame, make_random_unit_tight_frame,
                     orthonormal_frame, reconstruct)
from .fusion import (FusionFrame, Subspace, certify_near_tightness, check_local_global,
                     fusion_frame_from_partition, fusion_reconstruct, measure)
from .geometry import check_correlation_bound, orthogonality_bound, principal_angles
from .partition import Partition
from .replacement import (certify_replacement, check_projection_residual, k1_limit,
                          replace_blocks, whitening_hypothesis_constant, whitening_instance,
                          whitening_residual_bound)
from .rip import check_operator_power_bounds, riesz_bounds, rip_exhaustive, rip_randomized

# (dim, count, s) triples whose harmonic and random tight frames have RIP
# constant below 1.
RIP_CONFIGS = ((6, 7, 2), (6, 7, 3), (8, 9, 2), (8, 9, 3), (8, 10, 2),
               (10, 12, 2), (10, 12, 3), (12, 16, 2), (16, 20, 3), (14, 16, 4))

# Mercedes-Benz frame in R^2 and its hand-computed invariants.
MB_VECTORS = np.array([[1.0, -0.5, -0.5],
                       [0.0, math.sqrt(3) / 2, -math.sqrt(3) / 2]])
MB_FRAME_BOUND = 1.5
MB_PAIR_EIGS = (0.5, 1.5)  # Gram [[1, -1/2], [-1/2, 1]]
MB_EPSILON_S2 = 1.0        # max(1.5 - 1, 1/0.5 - 1)

EXACT_TOL = 1e-8
ORACLE_TOL = 1e-10
RECON_TOL = 1e-8
CORRELATION_SLACK = 1e-10
FUSION_SLACK = 1e-8


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    instances: int
    detail: str

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "instances": self.instances,
                "detail": self.detail}


class _Failure(Exception):
    """Raised inside a check to report the first failing clause."""


def _require(cond: bool, clause: str) -> None:
    if not cond:
        raise _Failure(clause)


# -- instance generators ----------------------------------------------------

def rip_frame_pool(seed: int):
    """[(label, frame, rip report)] for every RIP_CONFIGS entry, harmonic and
    random tight, keeping only frames with epsilon_hat < 1."""
    pool = []
    for n, m, s in RIP_CONFIGS:
        f = make_harmonic_frame(n, m)
        rip = rip_exhaustive(f, s)
        if rip.epsilon_hat < 1.0:
            pool.append((f"harmonic N={n} M={m} s={s}", f, rip))
        for attempt in range(20):
            frame_seed = seed * 1000 + n * 37 + m + attempt * 7919
            f = make_random_unit_tight_frame(n, m, seed=frame_seed)
            rip = rip_exhaustive(f, s)
            if rip.epsilon_hat < 1.0:
                pool.append((f"random-tight N={n} M={m} s={s} seed={frame_seed}", f, rip))
                break
    return pool


def near_orthonormal_frame(dim: int, noise: float, rng) -> Frame:
    """Unit-norm perturbation of a random orthonormal basis."""
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    v = q + noise * rng.standard_normal((dim, dim))
    return Frame(v / np.linalg.norm(v, axis=0))


def random_frame(rng, complex_field: bool = False) -> Frame:
    n = int(rng.integers(2, 9))
    m = int(rng.integers(n, 2 * n + 1))
    v = rng.standard_normal((n, m))
    if complex_field:
        v = v + 1j * rng.standard_normal((n, m))
    return Frame(v)


def _random_subset(rng, count: int, size: int) -> tuple[int, ...]:
    return tuple(sorted(int(i) for i in rng.choice(count, size=size, replace=False)))


def _random_split(rng, subset) -> list[tuple[int, ...]]:
    perm = [subset[int(i)] for i in rng.permutation(len(subset))]
    cut = int(rng.integers(1, len(subset)))
    return [tuple(sorted(perm[:cut])), tuple(sorted(perm[cut:]))]


def _eps(measured: float, forced: float | None) -> float:
    return measured if forced is None else forced


def _in_setting(eps: float) -> bool:
    return 0.0 <= eps < 1.0


# -- checks -------------------------------------------------------------------

def check_trivial_exactness(seed: int, count: int, forced: float | None, ctx) -> str:
    for n in range(1, count + 1):
        for field in ("real", "complex"):
            f = orthonormal_frame(n, field)
            tag = f"orthonormal N={n} {field}"
            s = min(2, n)
            rip = rip_exhaustive(f, s)
            _require(abs(rip.epsilon_hat) <= EXACT_TOL, f"{tag}: epsilon_hat {rip.epsilon_hat:.3e} != 0")
            part = Partition.contiguous(n, s)
            nt = certify_near_tightness(f, part, rip, forced)
            lo, hi = nt.measured
            _require(abs(lo - 1) <= EXACT_TOL and abs(hi - 1) <= EXACT_TOL,
                     f"{tag}: fusion bounds ({lo}, {hi}) != (1, 1)")
            _require(nt.holds, f"{tag}: fusion bounds outside the near-tight bracket")
            ff = fusion_frame_from_partition(f, part)
            for i in range(len(ff)):
                for j in range(len(ff)):
                    cos = principal_angles(ff.subspaces[i], ff.subspaces[j]).cosines
                    target = 1.0 if i == j else 0.0
                    _require(np.all(np.abs(cos - target) <= EXACT_TOL),
                             f"{tag}: principal cosines of blocks {i},{j} not all {target:g}")
            rf = replace_blocks(f, part, range(len(part)))
            _require(np.max(np.abs(rf.frame.vectors - f.vectors)) <= EXACT_TOL,
                     f"{tag}: replacement changed an orthonormal frame")
            rep = certify_replacement(rf, s, rip, forced)
            _require(rep.holds is True, f"{tag}: replacement bracket fails")
    return f"orthonormal frames N=1..{count}, real and complex"


def check_mercedes_benz(seed: int, count: int, forced: float | None, ctx) -> str:
    for tag, f in (("fixture", Frame(MB_VECTORS)), ("harmonic", make_harmonic_frame(2, 3))):
        b = f.bounds
        _require(abs(b.lower - MB_FRAME_BOUND) <= ORACLE_TOL and abs(b.upper - MB_FRAME_BOUND) <= ORACLE_TOL,
                 f"{tag}: frame bounds ({b.lower}, {b.upper}) != (1.5, 1.5)")
        for pair in ((0, 1), (0, 2), (1, 2)):
            rb = riesz_bounds(f, pair)
            _require(abs(rb.lambda_min - MB_PAIR_EIGS[0]) <= ORACLE_TOL
                     and abs(rb.lambda_max - MB_PAIR_EIGS[1]) <= ORACLE_TOL,
                     f"{tag}: pair {pair} Gram eigenvalues ({rb.lambda_min}, {rb.lambda_max}) != (0.5, 1.5)")
        rip = rip_exhaustive(f, 2)
        _require(abs(rip.epsilon_hat - MB_EPSILON_S2) <= ORACLE_TOL,
                 f"{tag}: epsilon_hat {rip.epsilon_hat!r} != 1")
        ff = fusion_frame_from_partition(f, Partition(((0,), (1,), (2,)), 3))
        err = float(np.max(np.abs(ff.fusion_operator - MB_FRAME_BOUND * np.eye(2))))
        _require(err <= ORACLE_TOL, f"{tag}: singleton fusion operator differs from 1.5 I by {err:.3e}")
    return "fixture and harmonic Mercedes-Benz frames"


def check_near_tight_fusion(seed: int, count: int, forced: float | None, ctx) -> str:
    pool = ctx.pool(seed)
    rng = np.random.default_rng([seed, 3])
    worst = math.inf
    for k in range(count):
        label, f, rip = pool[k % len(pool)]
        part = Partition.random(f.count, rip.s, rng)
        nt = certify_near_tightness(f, part, rip, forced, slack=FUSION_SLACK)
        eps = nt.epsilon_input
        tag = f"instance {k} ({label}, blocks {part.to_spec()})"
        _require(_in_setting(eps), f"{tag}: epsilon {eps:g} outside [0, 1)")
        _require(nt.holds, f"{tag}: fusion bounds [{nt.measured[0]:.12g}, {nt.measured[1]:.12g}] "
                           f"outside [{nt.theoretical[0]:.12g}, {nt.theoretical[1]:.12g}]")
        ratio = f.count / f.dim
        worst = min(worst, (nt.measured[0] - nt.theoretical[0]) / ratio,
                    (nt.theoretical[1] - nt.measured[1]) / ratio)
    return f"smallest relative margin {worst:.3e}"


def check_correlation(seed: int, count: int, forced: float | None, ctx) -> str:
    pool = ctx.pool(seed)
    rng = np.random.default_rng([seed, 4])
    worst = math.inf
    for k in range(count):
        label, f, rip = pool[k % len(pool)]
        subset = _random_subset(rng, f.count, rip.s)
        for way in range(2):
            split = _random_split(rng, subset)
            eps = _eps(riesz_bounds(f, subset).epsilon, forced)
            tag = f"instance {k}.{way} ({label}, split {split})"
            _require(_in_setting(eps), f"{tag}: epsilon {eps:g} outside [0, 1)")
            c = check_correlation_bound(f, subset, split, eps, CORRELATION_SLACK)
            _require(c.holds, f"{tag}: correlation {c.max_correlation:.12g} > 2e(1+e/2) = {c.bound:.12g}")
            _require(c.max_correlation <= orthogonality_bound(eps) + CORRELATION_SLACK,
                     f"{tag}: correlation {c.max_correlation:.12g} > 2e(1+e)^2")
            worst = min(worst, c.bound - c.max_correlation)
    return f"{2 * count} splits, smallest margin {worst:.3e}"


POWER_EXPONENTS = (0.5, -0.5, 1.0, -1.0, 2.0, -2.0)


def check_power_brackets(seed: int, count: int, forced: float | None, ctx) -> str:
    pool = ctx.pool(seed)
    rng = np.random.default_rng([seed, 5])
    for k in range(count):
        label, f, rip = pool[k % len(pool)]
        size = int(rng.integers(1, rip.s + 1))
        block = _random_subset(rng, f.count, size)
        bf = Frame(f.columns(block))
        eps = _eps(riesz_bounds(bf, range(size)).epsilon, forced)
        tag = f"block {k} ({label}, indices {block})"
        _require(_in_setting(eps), f"{tag}: epsilon {eps:g} outside [0, 1)")
        for c in check_operator_power_bounds(bf, eps, POWER_EXPONENTS):
            _require(c.holds, f"{tag}: S^{c.exponent:g} eigenvalues [{c.min_eig:.12g}, {c.max_eig:.12g}] "
                              f"outside [{c.lower:.12g}, {c.upper:.12g}]")
    return f"exponents {', '.join(f'{a:g}' for a in POWER_EXPONENTS)}"


def check_projection_residual_bound(seed: int, count: int, forced: float | None, ctx) -> str:
    pool = ctx.pool(seed)
    rng = np.random.default_rng([seed, 6])
    worst = 0.0
    for k in range(count):
        label, f, rip = pool[k % len(pool)]
        block = _random_subset(rng, f.count, rip.s)
        sub_block = _random_subset(rng, rip.s, int(rng.integers(1, rip.s + 1)))
        sub_block = tuple(block[i] for i in sub_block)
        eps = _eps(riesz_bounds(f, block).epsilon, forced)
        tag = f"block {k} ({label}, indices {block}, sub-block {sub_block})"
        _require(_in_setting(eps), f"{tag}: epsilon {eps:g} outside [0, 1)")
        w1, w2, t = whitening_instance(f, block, sub_block)
        eps_h = whitening_hypothesis_constant(eps)
        c = check_projection_residual(w1, w2, t, eps_h, seed=k)
        _require(c.holds, f"{tag}: residual {c.worst_residual_ratio:.12g} > 4e'/(1-e')^2 = {c.bound:.12g}")
        _require(c.worst_residual_ratio <= whitening_residual_bound(eps) + 1e-10,
                 f"{tag}: residual {c.worst_residual_ratio:.12g} > 4e(1+e)")
        worst = max(worst, c.worst_residual_ratio / c.bound if c.bound > 0 else 0.0)
    return f"largest residual / bound {worst:.3e}"


def k1_limit_oracle(epsilon: Fraction) -> int:
    """Exact rational evaluation of the K1 growth limit."""
    head = 1 - 4 * epsilon / (1 - epsilon) ** 2
    bound = head * head / (16 * epsilon ** 2 * (1 + epsilon) ** 6)
    return math.ceil(bound) - 1


def _three_figures(x: float) -> float:
    return float(f"{x:.3g}")


REPLACEMENT_NOISE = 0.002
REPLACEMENT_DIM = 12
REPLACEMENT_S = 3
REPLACEMENT_EPS_MAX = 0.02


def check_replacement(seed: int, count: int, forced: float | None, ctx) -> str:
    oracle = k1_limit_oracle(Fraction(1, 100))
    got = k1_limit(0.01)
    _require(_three_figures(got) == _three_figures(oracle),
             f"k1_limit(0.01) = {got}, exact evaluation gives {oracle}")
    rng = np.random.default_rng([seed, 7])
    worst = math.inf
    for k in range(count):
        f = near_orthonormal_frame(REPLACEMENT_DIM, REPLACEMENT_NOISE, rng)
        rip = rip_exhaustive(f, REPLACEMENT_S)
        tag = f"pipeline {k}"
        _require(rip.epsilon_hat <= REPLACEMENT_EPS_MAX,
                 f"{tag}: epsilon_hat {rip.epsilon_hat:.4g} above {REPLACEMENT_EPS_MAX}")
        eps = _eps(rip.epsilon_hat, forced)
        _require(0.0 < eps < 1.0, f"{tag}: epsilon {eps:g} outside (0, 1)")
        part = Partition.random(f.count, REPLACEMENT_S, rng)
        limit = k1_limit(eps)
        k1 = int(rng.integers(1, min(len(part), limit) + 1))
        ids = sorted(int(j) for j in rng.choice(len(part), size=k1, replace=False))
        rep = certify_replacement(replace_blocks(f, part, ids, REPLACEMENT_S), REPLACEMENT_S, rip, eps)
        _require(not rep.vacuous, f"{tag}: bracket is vacuous at epsilon {eps:g}, K1={k1}")
        _require(bool(rep.holds),
                 f"{tag}: K1={k1}, measured [{rep.measured_lower:.12g}, {rep.measured_upper:.12g}] "
                 f"outside [{rep.theoretical_lower:.12g}, {rep.theoretical_upper:.12g}]")
        worst = min(worst, rep.measured_lower - rep.theoretical_lower,
                    rep.theoretical_upper - rep.measured_upper)
    return f"k1_limit(0.01) = {got}; smallest margin {worst:.3e}"


def check_reconstruction(seed: int, count: int, forced: float | None, ctx) -> str:
    rng = np.random.default_rng([seed, 8])
    worst = 0.0
    for k in range(count):
        f = random_frame(rng, complex_field=bool(k % 2))
        x = rng.standard_normal(f.dim)
        if k % 2:
            x = x + 1j * rng.standard_normal(f.dim)
        err = np.linalg.norm(reconstruct(f, analysis_apply(f, x)) - x) / np.linalg.norm(x)
        _require(err <= RECON_TOL, f"frame instance {k}: relative error {err:.3e}")
        worst = max(worst, err)
        g = random_frame(rng)
        part = Partition.random(g.count, max(1, g.dim // 2), rng)
        ff = fusion_frame_from_partition(g, part, rng.uniform(0.5, 2.0, len(part)))
        y = rng.standard_normal(g.dim)
        err = np.linalg.norm(fusion_reconstruct(ff, measure(ff, y)) - y) / np.linalg.norm(y)
        _require(err <= RECON_TOL, f"fusion instance {k}: relative error {err:.3e}")
        worst = max(worst, err)
    return f"{count} frame + {count} fusion round trips, largest relative error {worst:.3e}"


def _orthogonal_decomposition(rng, n: int):
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    cuts = sorted(int(c) for c in rng.choice(np.arange(1, n), size=min(2, n - 1), replace=False))
    return [q[:, a:b] for a, b in zip([0, *cuts], [*cuts, n])]


def check_composition(seed: int, count: int, forced: float | None, ctx) -> str:
    rng = np.random.default_rng([seed, 9])
    for k in range(count):
        n = int(rng.integers(2, 7))
        subs, local = [], []
        for _ in range(int(rng.integers(2, 5))):
            d = int(rng.integers(1, n + 1))
            sub = Subspace.from_vectors(rng.standard_normal((n, d)))
            subs.append(sub)
            local.append(sub.basis @ rng.standard_normal((sub.dim, sub.dim + int(rng.integers(0, 3)))))
        # make sure the family spans
        sub = Subspace.from_vectors(np.eye(n))
        subs.append(sub)
        local.append(sub.basis @ rng.standard_normal((n, n + 1)))
        ff = FusionFrame(tuple(subs), tuple(rng.uniform(0.5, 2.0, len(subs))))
        c = check_local_global(ff, local)
        _require(c.holds, f"instance {k}: composed bounds {c.composed_bounds} outside [AC, BD] = {c.bracket}")
    n = 5
    subs = _orthogonal_decomposition(rng, n) + _orthogonal_decomposition(rng, n)
    ff = FusionFrame(tuple(Subspace(b) for b in subs), (1 / math.sqrt(2),) * len(subs))
    c = check_local_global(ff, [Subspace(b).basis for b in subs])
    lo, hi = c.composed_bounds
    _require(abs(lo - 1) <= EXACT_TOL and abs(hi - 1) <= EXACT_TOL,
             f"Parseval composition bounds ({lo}, {hi}) != (1, 1)")
    _require(abs(c.fusion_bounds[0] - 1) <= EXACT_TOL and abs(c.fusion_bounds[1] - 1) <= EXACT_TOL,
             f"two orthogonal decompositions weighted 1/sqrt(2): fusion bounds {c.fusion_bounds} != (1, 1)")
    return f"{count} random compositions plus the Parseval case"


def _consistency_frames(seed: int):
    rng = np.random.default_rng([seed, 10])
    yield "mercedes-benz", Frame(MB_VECTORS), 2
    for n, m, s in ((4, 6, 2), (6, 7, 3), (8, 10, 3), (10, 12, 4)):
        yield f"harmonic N={n} M={m}", make_harmonic_frame(n, m), s
        yield f"random-tight N={n} M={m}", make_random_unit_tight_frame(n, m, seed=seed + n), s
    while True:
        f = random_frame(rng, complex_field=bool(rng.integers(0, 2)))
        yield f"gaussian N={f.dim} M={f.count}", f, int(rng.integers(1, 5))


def check_consistency(seed: int, count: int, forced: float | None, ctx) -> str:
    done = 0
    for label, f, s in _consistency_frames(seed):
        if done >= count:
            break
        s = min(s, f.count)
        total = math.comb(f.count, s)
        if total > 10_000:
            continue
        ex = rip_exhaustive(f, s)
        rnd = rip_randomized(f, s, samples=total, seed=seed + done)
        _require(ex.epsilon_hat == rnd.epsilon_hat and ex.witness == rnd.witness,
                 f"{label} s={s}: exhaustive ({ex.epsilon_hat!r}, {ex.witness}) vs "
                 f"randomized ({rnd.epsilon_hat!r}, {rnd.witness})")
        done += 1
    return "epsilon_hat and witness identical bit for bit"


@dataclass(frozen=True)
class _Check:
    name: str
    run: Callable
    default_count: int


CHECKS = (
    _Check("trivial_exactness", check_trivial_exactness, 5),
    _Check("mercedes_benz", check_mercedes_benz, 1),
    _Check("near_tight_fusion_bounds", check_near_tight_fusion, 50),
    _Check("correlation_bound", check_correlation, 50),
    _Check("operator_power_brackets", check_power_brackets, 25),
    _Check("projection_residual_bound", check_projection_residual_bound, 25),
    _Check("replacement_bracket", check_replacement, 10),
    _Check("reconstruction_roundtrip", check_reconstruction, 100),
    _Check("local_global_composition", check_composition, 25),
    _Check("randomized_matches_exhaustive", check_consistency, 20),
)
CHECK_NAMES = tuple(c.name for c in CHECKS)
CONFIG_KEYS = ("seed", "checks", "counts", "force_epsilon")
DEFAULT_CONFIG = {"seed": 0}


class ConfigError(ValueError):
    pass


def resolve_config(config: dict) -> dict:
    """Validate a verify config and fill in defaults."""
    if not isinstance(config, dict) or not config:
        raise ConfigError("empty config")
    unknown = sorted(set(config) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    seed = config.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError("seed must be a non-negative integer")
    checks = config.get("checks", list(CHECK_NAMES))
    if not isinstance(checks, list) or not checks or any(c not in CHECK_NAMES for c in checks):
        raise ConfigError(f"checks must be a non-empty list drawn from: {', '.join(CHECK_NAMES)}")
    counts = {c.name: c.default_count for c in CHECKS}
    given = config.get("counts", {})
    if not isinstance(given, dict):
        raise ConfigError("counts must be a mapping")
    for name, n in given.items():
        if name not in counts or not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise ConfigError(f"bad count for {name!r}")
        counts[name] = n
    forced = config.get("force_epsilon")
    if forced is not None:
        if isinstance(forced, bool) or not isinstance(forced, (int, float)) or not math.isfinite(forced):
            raise ConfigError("force_epsilon must be a finite number")
        forced = float(forced)
    return {"seed": seed, "checks": [c for c in CHECK_NAMES if c in checks],
            "counts": {c: counts[c] for c in CHECK_NAMES if c in checks},
            "force_epsilon": forced}


class _Context:
    def __init__(self):
        self._pools = {}

    def pool(self, seed: int):
        if seed not in self._pools:
            self._pools[seed] = rip_frame_pool(seed)
        return self._pools[seed]


def run_check(name: str, seed: int = 0, count: int | None = None,
              force_epsilon: float | None = None, ctx: _Context | None = None) -> CheckResult:
    check = next(c for c in CHECKS if c.name == name)
    n = check.default_count if count is None else count
    ctx = ctx or _Context()
    try:
        detail = check.run(seed, n, force_epsilon, ctx)
        return CheckResult(name, True, n, detail)
    except _Failure as exc:
        return CheckResult(name, False, n, str(exc))
    except FrameKitError as exc:
        return CheckResult(name, False, n, f"{type(exc).__name__}: {exc}")


def run_suite(config: dict) -> list[CheckResult]:
    cfg = resolve_config(config)
    ctx = _Context()
    return [run_check(name, cfg["seed"], cfg["counts"][name], cfg["force_epsilon"], ctx)
            for name in cfg["checks"]]
