import numpy as np
import pytest

from hiddenmem.classical import (
    ClassicalMemorylessModel,
    MarkovViolation,
    check_stochastic,
    classical_family,
    classical_joint,
    classical_predict,
    fit_classical,
    random_classical_model,
)
from hiddenmem.stats import witness_hidden_memory

FLIP = np.array([[0.0, 1.0], [1.0, 0.0]])
MIX = np.full((2, 2), 0.5)


@pytest.mark.parametrize("steps, outcomes, expected", [
    ((np.eye(2),) * 3, (0, 0, 0, 0), 1.0),
    ((np.eye(2),) * 3, (0, 0, 1, 0), 0.0),
    ((FLIP,) * 3, (0, 1, 0, 1), 1.0),
    ((FLIP,) * 3, (0, 0, 0, 0), 0.0),
])
def test_predict_deterministic(steps, outcomes, expected):
    model = ClassicalMemorylessModel(np.array([1.0, 0.0]), steps)
    assert classical_predict(model, outcomes) == expected


def test_predict_uniform_mixing():
    model = ClassicalMemorylessModel(np.array([0.5, 0.5]), (MIX, MIX))
    assert classical_predict(model, (1, 0, 1)) == pytest.approx(0.125)
    model4 = ClassicalMemorylessModel(np.array([1.0, 0.0]), (MIX, MIX, MIX))
    assert classical_predict(model4, (0, 1, 1, 0)) == pytest.approx(0.125)


def test_family_marginal():
    model = ClassicalMemorylessModel(np.array([0.5, 0.5]), (np.eye(2), np.eye(2), np.eye(2)))
    fam = classical_family(model)
    # pattern 1010 probes t1 and t3 only
    assert fam["1010"].probs[0, 0] == pytest.approx(0.5)
    assert fam["1010"].probs[0, 1] == 0.0


def test_joint_matches_predict(rng):
    model = random_classical_model(rng, n_times=4, d=3)
    joint = classical_joint(model)
    for idx in np.ndindex(*joint.shape):
        assert joint[idx] == pytest.approx(classical_predict(model, idx), abs=1e-15)


def test_stochastic_validation():
    with pytest.raises(ValueError, match="columns"):
        check_stochastic(np.array([[0.5, 0.5], [0.4, 0.5]]))
    with pytest.raises(ValueError, match="probability vector"):
        ClassicalMemorylessModel(np.array([0.7, 0.4]), (np.eye(2),))
    with pytest.raises(IndexError):
        classical_predict(ClassicalMemorylessModel(np.array([1.0, 0.0]), (np.eye(2),)), (0, 2))


def test_fit_round_trip(rng):
    for _ in range(20):
        model = random_classical_model(rng)
        fitted = fit_classical(classical_family(model)["1111"])
        assert isinstance(fitted, ClassicalMemorylessModel)
        assert np.max(np.abs(fitted.p1 - model.p1)) < 1e-10
        for a, b in zip(fitted.steps, model.steps):
            assert np.max(np.abs(a - b)) < 1e-10


def test_fit_recovers_bit_flip():
    model = ClassicalMemorylessModel(np.array([0.5, 0.5]), (FLIP, FLIP, FLIP))
    fitted = fit_classical(classical_family(model)["1111"])
    assert np.allclose(fitted.steps[1], FLIP)
    assert fitted.unreachable == ()


def test_unreachable_columns_are_uniform():
    model = ClassicalMemorylessModel(np.array([1.0, 0.0]), (np.eye(2), np.eye(2)))
    fitted = fit_classical(classical_family(model)["111"])
    assert set(fitted.unreachable) == {(0, 1), (1, 1)}
    assert np.allclose(fitted.steps[0][:, 1], 0.5)


def test_fit_rejects_non_markov():
    p = np.zeros((2, 2, 2))
    for x1 in range(2):
        for x2 in range(2):
            p[x1, x2, x1] = 0.25
    from hiddenmem.stats import JointDistribution
    result = fit_classical(JointDistribution(3, 0b111, 2, p))
    assert isinstance(result, MarkovViolation)
    assert result.check.worst == pytest.approx(1.0)


def test_fit_requires_full_pattern(fig2_family):
    with pytest.raises(ValueError, match="all-times"):
        fit_classical(fig2_family["1011"])


def test_fig2_full_table_fit_misses_sub_statistics(fig2_family):
    fitted = fit_classical(fig2_family["1111"])
    assert isinstance(fitted, ClassicalMemorylessModel)
    predicted = classical_family(fitted)
    gap = np.max(np.abs(predicted["1011"].probs - fig2_family["1011"].probs))
    assert gap == pytest.approx(0.25, abs=1e-12)
    assert witness_hidden_memory(predicted).verdict.value == "CONSISTENT_WITH_MEMORYLESS"
