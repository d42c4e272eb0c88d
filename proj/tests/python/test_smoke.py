"""End-to-end smoke tests for the Python bindings."""

import numpy as np
import pytest

import gecko


def solved_pulse(eps=1e-3):
    spec = gecko.model_preset("tfim1_h2zero")
    target = gecko.gate_target("CZ")
    cfg = gecko.RestoreConfig()
    cfg.epsilon = eps
    for seed in range(1, 9):
        start = gecko.random_pulse(spec, 4, 1.0, 3.0, seed)
        try:
            return spec, target, gecko.restore(spec, start, target, cfg)
        except gecko.RestoreFailedError:
            continue
    pytest.fail("no seed solved the toy problem")


def test_presets_targets_and_unitaries():
    spec = gecko.model_preset("tfim1_h2zero")
    assert spec.qubits() == 2
    assert spec.channels() == 1
    target = gecko.gate_target("CZ")
    assert np.allclose(np.diag(target.matrix), [1, 1j, 1j, 1])

    pulse = gecko.PulseParams(np.zeros((4, 1)), dt=1.0)
    assert pulse.segments() == 4 and pulse.duration() == 4.0
    u = gecko.pulse_unitary(spec, pulse)
    assert u.shape == (4, 4)
    assert np.allclose(u @ u.conj().T, np.eye(4), atol=1e-12)
    assert 0.0 <= gecko.fidelity(spec, pulse, target) <= 1.0


def test_kernel_geometry():
    spec, target, pulse = solved_pulse()
    jac = gecko.pulse_jacobian(spec, pulse)
    assert jac.entries.shape == (15, 4)
    kern = gecko.kernel_basis(jac)
    assert kern.basis.shape[0] == 4
    assert kern.dimension() >= 1
    assert kern.rank + kern.dimension() == 4
    # Kernel directions leave the unitary unchanged to first order.
    assert np.linalg.norm(jac.entries @ kern.basis) < 1e-8


def test_smoothing_run_descends_quality():
    spec, target, pulse = solved_pulse()
    refined = gecko.refine_pulse(pulse, 2)
    smooth = gecko.QualitySpec.smooth()
    q0 = gecko.quality_value(spec, refined, target, smooth)

    cfg = gecko.GeckoConfig()
    cfg.epsilon = 1e-3
    cfg.step_size = 0.02
    cfg.max_iters = 8
    trace = gecko.gecko_run(spec, refined, target, smooth, cfg)

    q1 = gecko.quality_value(spec, trace.pulse, target, smooth)
    assert q1 < q0
    assert gecko.fidelity(spec, trace.pulse, target) > 1 - 1e-3
    assert len(trace.records) >= 1
    assert trace.records[-1].iter == len(trace.records)
    assert isinstance(trace.status, gecko.GeckoStatus)


def test_pulse_file_roundtrip(tmp_path):
    spec, target, pulse = solved_pulse()
    f = gecko.fidelity(spec, pulse, target)
    meta = gecko.PulseMetadata()
    meta.fidelity = f
    meta.seed = 7
    file = gecko.PulseFile(spec, pulse, target, meta)

    path = str(tmp_path / "pulse.json")
    gecko.save_pulse(path, file)
    back = gecko.load_pulse(path)
    assert np.array_equal(back.pulse.phi, pulse.phi)
    assert back.pulse.dt == pulse.dt
    assert back.metadata.seed == 7
    assert abs(gecko.fidelity(back.spec, back.pulse, back.target) -
               back.metadata.fidelity) < 1e-12


def test_dst_and_filters():
    x = np.sin(np.pi * np.arange(1, 9) / 9.0)
    coeffs = gecko.dst1_forward(x)
    assert abs(coeffs[0] - 1.0) < 1e-12
    assert np.allclose(gecko.dst1_inverse(coeffs), x, atol=1e-12)
    params = gecko.FilterParams()
    params.cutoff = gecko.dst1_frequency(4, 8, 1.0)
    spec = gecko.make_filter("lowpass", params, 8, 1.0)
    assert spec.weights.shape == (8,)
    assert abs(spec.weights[3] - 0.5) < 1e-12


def test_errors_are_typed():
    with pytest.raises(gecko.InputError):
        gecko.model_preset("nope")
    with pytest.raises(gecko.GeckoError):
        gecko.gate_target("nope")
    spec = gecko.model_preset("tfim1_h2zero")
    target = gecko.gate_target("CZ")
    low = gecko.PulseParams(np.zeros((4, 1)))
    cfg = gecko.GeckoConfig()
    cfg.epsilon = 1e-7
    with pytest.raises(gecko.InputError):
        gecko.gecko_run(spec, low, target, gecko.QualitySpec.smooth(), cfg)
