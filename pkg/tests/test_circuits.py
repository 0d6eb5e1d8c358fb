import numpy as np
import pytest

from hiddenmem import numerics as nx
from hiddenmem.circuits import CIRCUITS, oracle_tables, pattern_mask, reset_system_channel
from hiddenmem.io import circuit_from_json, circuit_to_json
from hiddenmem.quantum import run_schedule, trace_states
from hiddenmem.stats import conditional_table

P0, P1 = nx.projector(0, 2), nx.projector(1, 2)
CORRELATED = np.kron(P0, P0) + np.kron(P1, P1)


@pytest.mark.parametrize("table", oracle_tables(), ids=lambda t: f"{t.circuit}-{t.pattern}-{t.kind}-{t.label}")
def test_oracle_tables(table):
    dist = run_schedule(CIRCUITS[table.circuit](), table.pattern)
    assert pattern_mask(table) == dist.pattern
    if table.kind == "joint":
        computed = dist.probs
    else:
        computed = conditional_table(dist, table.target)
    assert np.max(np.abs(computed - table.as_array())) < 1e-12


def test_reset_channel_keeps_environment():
    rho = np.kron(nx.projector(1, 2), nx.projector(1, 2))
    out = reset_system_channel().stacked()
    res = sum(k @ rho @ k.conj().T for k in out)
    assert np.allclose(res, np.kron(P0, P1))


def test_fig2_intermediate_states(fig2):
    full = trace_states(fig2, "1111")
    for x1 in (0, 1):
        for x2 in (0, 1):
            # before t3: system reset to |0>, environment carries x2
            assert np.allclose(full[2].before[(x1, x2)], 0.25 * np.kron(P0, nx.projector(x2, 2)), atol=1e-12)
            # before t4: environment scrambled and copied onto the system
            assert np.allclose(full[3].before[(x1, x2, 0)], 0.125 * CORRELATED, atol=1e-12)
    skip = trace_states(fig2, "1011")
    for x1 in (0, 1):
        h = nx.ket(0, 2) + (-1) ** x1 * nx.ket(1, 2)
        assert np.allclose(skip[2].before[(x1,)], 0.25 * np.kron(P0, h @ h.conj().T), atol=1e-12)
        px1 = nx.projector(x1, 2)
        assert np.allclose(skip[3].before[(x1, 0)], 0.5 * np.kron(px1, px1), atol=1e-12)


def test_fig3_intermediate_states(fig3):
    full = trace_states(fig3, "1111")
    assert np.allclose(full[0].before[()], 0.5 * CORRELATED, atol=1e-12)
    for x1 in (0, 1):
        px1 = nx.projector(x1, 2)
        assert np.allclose(full[0].after[(x1,)], 0.5 * np.kron(px1, px1), atol=1e-12)
        h = (nx.ket(0, 2) + (-1) ** x1 * nx.ket(1, 2)) / np.sqrt(2)
        assert np.allclose(full[1].before[(x1,)], 0.5 * np.kron(h @ h.conj().T, px1), atol=1e-12)
        for x2 in (0, 1):
            phi3 = full[2].before[(x1, x2)]
            assert np.allclose(phi3, 0.125 * np.kron(P0, np.eye(2)), atol=1e-12)
            assert np.allclose(full[3].before[(x1, x2, 0)], 0.125 * CORRELATED, atol=1e-12)
    skip = trace_states(fig3, "1011")
    for x1 in (0, 1):
        assert np.allclose(skip[2].before[(x1,)], 0.5 * np.kron(P0, P0), atol=1e-12)
        assert np.allclose(skip[3].before[(x1, 0)], 0.5 * np.kron(P0, P0), atol=1e-12)


def test_fig3_environment_at_t3_depends_on_probe(fig3):
    probed = trace_states(fig3, "1110")[2].before[(0, 0)]
    skipped = trace_states(fig3, "1010")[2].before[(0,)]
    env_probed = nx.partial_trace(probed, 2, 2, keep_first=False)
    env_skipped = nx.partial_trace(skipped, 2, 2, keep_first=False)
    assert np.allclose(env_probed / np.trace(env_probed), np.eye(2) / 2, atol=1e-12)
    assert np.allclose(env_skipped / np.trace(env_skipped), P0, atol=1e-12)


def test_unprobed_times_leave_states_untouched(fig2):
    rec = trace_states(fig2, "1011")[1]
    assert not rec.measured
    for key in rec.before:
        assert np.array_equal(rec.before[key], rec.after[key])


@pytest.mark.parametrize("name", sorted(CIRCUITS))
def test_circuit_json_round_trip(name):
    proc = CIRCUITS[name]()
    back = circuit_from_json(circuit_to_json(proc))
    for bits in ("1111", "1011", "0110"):
        assert np.array_equal(run_schedule(back, bits).probs, run_schedule(proc, bits).probs)
