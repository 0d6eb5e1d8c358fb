import numpy as np
import pytest

from hiddenmem import numerics as nx
from hiddenmem.gates import H
from hiddenmem.qrf import (
    Conclusion,
    FitConfig,
    MemorylessQuantumModel,
    StinespringParameterization,
    _leaf_probs,
    _leaf_probs_batch,
    certify,
    family_to_leaves,
    fit_memoryless,
    leaves_to_family,
    qrf_family,
    random_memoryless_model,
    superoperator,
    transition_matrix,
)
from hiddenmem.quantum import DilatedProcess, KrausChannel, all_pattern_statistics, apply_channel, random_channel


def test_identity_channels_are_deterministic():
    model = MemorylessQuantumModel(nx.projector(0, 2), (KrausChannel.identity(2),) * 3)
    fam = qrf_family(model)
    assert fam["1111"].probs[0, 0, 0, 0] == pytest.approx(1.0)
    assert fam["1010"].probs[0, 0] == pytest.approx(1.0)


def test_hadamard_model():
    model = MemorylessQuantumModel(nx.projector(0, 2), (KrausChannel.unitary(H),) * 2)
    fam = qrf_family(model)
    # probing every time dephases, so each later outcome is a fair coin
    assert np.allclose(fam["111"].probs[0], 0.25)
    # without the middle probe H.H = I brings the state back to |0>
    assert fam["101"].probs[0, 0] == pytest.approx(1.0)


def test_transition_matrix_is_diagonal_action(rng):
    ch = random_channel(rng, 3)
    t = transition_matrix(ch)
    for x in range(3):
        out = apply_channel(ch, nx.projector(x, 3))
        assert np.allclose(t[:, x], np.diag(out).real, atol=1e-12)
    assert np.allclose(t.sum(axis=0), 1.0)


def test_superoperator_matches_channel(rng):
    model = random_memoryless_model(rng, d=3, n_times=2)
    ch = model.channels[0]
    rho = model.rho1
    assert np.allclose((superoperator(ch) @ rho.ravel()).reshape(3, 3), apply_channel(ch, rho), atol=1e-12)


def test_matches_simulator_on_trivial_environment(rng):
    for _ in range(5):
        model = random_memoryless_model(rng, d=2, n_times=4)
        proc = DilatedProcess(2, 1, model.rho1, model.channels)
        sim = all_pattern_statistics(proc)
        fam = qrf_family(model)
        for mask in range(16):
            assert np.max(np.abs(sim[mask].probs - fam[mask].probs)) < 1e-12


def test_batched_leaves_match_single(rng):
    models = [random_memoryless_model(rng, d=2, n_times=3) for _ in range(4)]
    rho = np.stack([m.rho1 for m in models])
    sups = np.stack([[superoperator(c) for c in m.channels] for m in models])
    batch = _leaf_probs_batch(rho, sups)
    for b, m in enumerate(models):
        assert np.allclose(batch[b], _leaf_probs(m.rho1, [superoperator(c) for c in m.channels]), atol=1e-14)


def test_leaves_round_trip(rng):
    fam = qrf_family(random_memoryless_model(rng))
    back = leaves_to_family(family_to_leaves(fam), 4, 2)
    for mask in fam.table:
        assert np.array_equal(back[mask].probs, fam[mask].probs)


def test_parameterization_gives_valid_models(rng):
    param = StinespringParameterization(2, 4, 4)
    assert param.size == 92
    for _ in range(5):
        theta = rng.normal(size=param.size)
        model = param.model(theta)
        fam = qrf_family(model)
        assert np.allclose(family_to_leaves(fam), param.leaf_probs(theta[None])[0], atol=1e-12)


def test_fit_rejects_large_dimension():
    model = random_memoryless_model(np.random.default_rng(1), d=5, n_times=2)
    with pytest.raises(ValueError, match="d <= 4"):
        fit_memoryless(qrf_family(model))


def test_fit_config_validation():
    with pytest.raises(ValueError):
        FitConfig(n_starts=0)


def test_small_fit_is_deterministic():
    target = qrf_family(random_memoryless_model(np.random.default_rng(3), d=2, n_times=2))
    cfg = FitConfig(n_starts=2, seed=5)
    a, b = fit_memoryless(target, cfg), fit_memoryless(target, cfg)
    assert a.per_start_losses == b.per_start_losses
    assert a.residual < 1e-12
    assert a.best_start == int(np.argmin(a.per_start_losses))


def test_certify_small_memoryless_target():
    target = qrf_family(random_memoryless_model(np.random.default_rng(4), d=2, n_times=3))
    rep = certify(target, FitConfig(n_starts=2))
    assert rep.conclusion is Conclusion.MODEL_FOUND
    assert rep.to_dict()["conclusion"] == "MODEL_FOUND"
