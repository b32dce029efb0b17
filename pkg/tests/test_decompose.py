"""Tests for the triangular-plus-quasinilpotent decomposition."""

import numpy as np
import pytest

from blocktri import (
    BlockTridiagOperator,
    decompose,
    diagonal_part,
    eigenvalues,
    make_schedule,
    match_distance,
    operator_norm,
    quasinilpotent_part_certificate,
    shift_matrix,
)
from helpers import random_complex, random_operator


def test_decompose_dense_27():
    rng = np.random.default_rng(61)
    t = random_complex(27, 27, rng)
    result = decompose(t)
    norm = operator_norm(t)
    assert result.schedule.sizes == (1, 2, 6, 18)
    assert result.residuals["unitarity"] < 1e-10
    assert result.residuals["triangularity"] == 0.0
    assert result.residuals["reconstruction"] < 1e-9 * norm
    # supports of delta and quasinil are disjoint, their sum is bitwise exact
    total = result.delta.array + result.quasinil.array
    assert np.array_equal(total, result.conjugated.array)
    assert match_distance(eigenvalues(result.conjugated), eigenvalues(t)) <= 1e-8 * norm


def test_decompose_block_contents():
    rng = np.random.default_rng(62)
    t = random_complex(27, 27, rng)
    result = decompose(t)
    sched = result.schedule
    delta = result.delta.array
    quasi = result.quasinil.array
    for n in range(1, sched.levels + 1):
        lo, hi = sched.block_bounds(n)
        block, coupling = result.delta_blocks[n - 1]
        assert np.array_equal(delta[lo:hi, lo:hi], block.array)
        # each diagonal block is upper triangular with nonincreasing moduli
        assert not np.tril(block.array, -1).any()
        mods = np.abs(np.diag(block.array))
        assert np.all(mods[:-1] >= mods[1:] - 1e-12)
        if n < sched.levels:
            lo2, hi2 = sched.block_bounds(n + 1)
            assert np.array_equal(delta[lo:hi, lo2:hi2], coupling.array)
            assert np.array_equal(quasi[lo2:hi2, lo:hi], result.q_blocks[n - 1].array)
        else:
            assert coupling is None


def test_decompose_provider_path_zero_lower():
    sched = make_schedule("single", 4)
    rng = np.random.default_rng(63)
    diag = [random_complex(k, k, rng) for k in sched.sizes]
    upper = [
        random_complex(sched.sizes[i], sched.sizes[i + 1], rng)
        for i in range(sched.levels - 1)
    ]
    op = BlockTridiagOperator.from_blocks(sched, diag, upper_blocks=upper)
    result = decompose(op)
    # zero lower couplings mean the quasinilpotent part vanishes identically
    assert np.count_nonzero(result.quasinil.array) == 0
    assert all(np.count_nonzero(b.array) == 0 for b in result.q_blocks)
    assert result.residuals["triangularity"] == 0.0
    assert result.residuals["reconstruction"] < 1e-9 * (1.0 + operator_norm(result.conjugated))


def test_decompose_provider_path_truncation():
    sched = make_schedule("pair", 3)
    op = random_operator(sched, np.random.default_rng(64))
    result = decompose(op, levels=2)
    assert result.schedule.sizes == (1, 4)
    assert result.conjugated.shape == (5, 5)


def test_decompose_dense_levels_contract():
    # odd sizes clip the last realized level; explicit levels demand full ones
    result = decompose(np.eye(10))
    assert result.schedule.sizes == (1, 2, 6, 1)
    with pytest.raises(ValueError):
        decompose(np.eye(10), levels=4)


def test_quasinilpotent_certificate_random():
    rng = np.random.default_rng(65)
    t = random_complex(27, 27, rng)
    result = decompose(t)
    cert = quasinilpotent_part_certificate(result)
    assert cert.verdict == "certified_quasinilpotent"
    for rec in cert.levels:
        assert rec.radius == 0.0
        assert rec.status == "ok"
    assert "first block subdiagonal" in cert.note
    with pytest.raises(ValueError):
        quasinilpotent_part_certificate(result, n_max=9)


def test_quasinilpotent_certificate_tail_norms():
    # lower couplings with operator norms 2^-1, 2^-2, 2^-3: after dropping the
    # first n the remaining norm must be 2^-(n+1)
    sched = make_schedule("single", 4)
    rng = np.random.default_rng(66)
    diag = [random_complex(k, k, rng) for k in sched.sizes]
    lower = []
    for i in range(sched.levels - 1):
        b = np.zeros((sched.sizes[i + 1], sched.sizes[i]), dtype=np.complex128)
        b[0, 0] = 2.0 ** (-(i + 1))
        lower.append(b)
    op = BlockTridiagOperator.from_blocks(sched, diag, lower_blocks=lower)
    result = decompose(op)
    cert = quasinilpotent_part_certificate(result)
    assert cert.verdict == "certified_quasinilpotent"
    norms = [operator_norm(b) for b in result.q_blocks]
    for i, value in enumerate(norms):
        assert value == pytest.approx(2.0 ** (-(i + 1)), rel=1e-12)
    assert operator_norm(result.quasinil) == pytest.approx(0.5, rel=1e-12)


def test_diagonal_part_reassembles_bitwise():
    rng = np.random.default_rng(67)
    t = random_complex(27, 27, rng)
    result = decompose(t)
    parts = diagonal_part(result)
    rebuilt = parts.strict_upper.array.copy()
    np.fill_diagonal(rebuilt, np.concatenate(parts.normal))
    assert np.array_equal(rebuilt, result.delta.array)
    assert np.array_equal(rebuilt + parts.quasinil.array, result.conjugated.array)
    assert not parts.zero_diagonal


def test_diagonal_part_zero_diagonal_flag():
    # nilpotent triangular diagonal blocks keep exactly zero diagonals
    sched = make_schedule("custom", sizes=(2, 3))
    rng = np.random.default_rng(68)
    diag = [shift_matrix(2).array, shift_matrix(3).array]
    lower = [random_complex(3, 2, rng)]
    op = BlockTridiagOperator.from_blocks(sched, diag, lower_blocks=lower)
    result = decompose(op)
    parts = diagonal_part(result)
    assert parts.zero_diagonal
    assert all(not d.any() for d in parts.normal)
    cert = quasinilpotent_part_certificate(result)
    assert cert.verdict == "certified_quasinilpotent"


def test_decompose_custom_start():
    rng = np.random.default_rng(69)
    t = random_complex(27, 27, rng)
    start = random_complex(1, 27, rng).ravel()
    result = decompose(t, start=start)
    assert result.residuals["reconstruction"] < 1e-9 * operator_norm(t)
