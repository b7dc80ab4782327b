from unittest.mock import patch

import pytest

from vartn.lib import errors, mpo, validation


def _corrupted_mpo(spec, D):
    good = mpo.full_hamiltonian_mpo(spec, mpo.fock_operators(spec, D))
    return good.with_core(0, good.cores[0] * 1.01)


@pytest.mark.parametrize(
    "suite",
    ["mpo_equivalence", "harmonic_spectrum", "interlacing", "compression_bound", "ladder_consistency", "fidelity_bound"],
)
def test_fast_suites_pass(suite):
    (result,) = validation.run_validation("fast", seed=0, suites=[suite])
    assert result.name == suite
    assert result.passed, result.detail


def test_truncation_bound_suite_passes():
    result = validation.check_truncation_bound("fast", seed=1)
    assert result.passed, result.detail


def test_gradient_suite_passes():
    result = validation.check_gradient("fast", seed=0)
    assert result.passed, result.detail


@patch("vartn.lib.validation.hamiltonian_mpo", side_effect=_corrupted_mpo)
def test_corrupted_mpo_is_detected(_):
    results = validation.run_validation("fast", suites=["mpo_equivalence", "harmonic_spectrum"])
    assert not any(r.passed for r in results)
    with pytest.raises(errors.InvariantViolation) as e:
        validation.assert_passed(results)
    assert e.value.invariant == "mpo_equivalence"


def test_raising_suite_counts_as_failed():
    def broken(level, seed):
        raise errors.ShapeMismatch("bad shapes")

    with patch.dict(validation.SUITES, {"interlacing": broken}):
        (result,) = validation.run_validation("fast", suites=["interlacing"])
    assert not result.passed
    assert "bad shapes" in result.detail


@pytest.mark.parametrize("kwargs", [{"level": "thorough"}, {"suites": ["astrology"]}])
def test_rejects_unknown_level_or_suite(kwargs):
    with pytest.raises(errors.ConfigError):
        validation.run_validation(**kwargs)


def test_assert_passed_accepts_passing_results():
    validation.assert_passed([validation.CheckResult("x", True, "")])
