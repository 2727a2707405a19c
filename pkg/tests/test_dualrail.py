import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from klmcluster.dualrail import (CutoffError, DualRailQubit, FockError, LeakageError, beamsplitter,
                                 correspondence_suite, count_probabilities, decode, encode, fock, logical_matrix,
                                 phase_shifter, photodetect, superposition, vacuum)
from klmcluster.rng import RngStream
from klmcluster.simcore import xrot_matrix

Q = DualRailQubit(0, 1)
angle = st.floats(-2 * math.pi, 2 * math.pi, allow_nan=False)


@st.composite
def fock_states(draw, modes=3, cutoff=2, max_photons=2):
    # random superposition with at most ``max_photons`` photons in total so
    # any beamsplitter output stays under the cutoff
    occs = [o for o in np.ndindex(*(cutoff + 1,) * modes) if sum(o) <= max_photons]
    chosen = draw(st.lists(st.sampled_from(occs), min_size=1, max_size=6, unique=True))
    amps = {o: complex(draw(st.floats(-1, 1)), draw(st.floats(-1, 1))) for o in chosen}
    if sum(abs(a) for a in amps.values()) < 1e-3:
        amps[chosen[0]] = 1
    return superposition(modes, amps, cutoff)


def test_encode_examples():
    assert encode((1, 0), Q, vacuum(2)).amplitudes == {(0, 1): 1}
    assert encode((0, 1), Q, vacuum(2)).amplitudes == {(1, 0): 1}
    s = encode((2**-0.5, 2**-0.5), Q, vacuum(2))
    assert count_probabilities(s, 0) == pytest.approx({0: 0.5, 1: 0.5})
    with pytest.raises(FockError):
        encode((1, 1), Q, vacuum(2))
    with pytest.raises(FockError):
        encode((1, 0), Q, fock((1, 0)))
    with pytest.raises(FockError):
        DualRailQubit(1, 1)


def test_cutoff_validation():
    with pytest.raises(CutoffError):
        fock((3, 0))
    with pytest.raises(CutoffError):
        beamsplitter(fock((2, 2)), 0, 1, 0.4)
    # at theta = 0 nothing moves, so no violation
    assert beamsplitter(fock((2, 2)), 0, 1, 0.0).amplitudes == {(2, 2): 1}


def test_phase_shifter_examples():
    s = superposition(2, {(2, 0): 1, (0, 1): 1})
    out = phase_shifter(s, 0, 0.3)
    assert out.amplitude((2, 0)) == pytest.approx(2**-0.5 * cmath.exp(0.6j))
    assert out.amplitude((0, 1)) == pytest.approx(2**-0.5)
    assert phase_shifter(s, 0, 0.0).amplitudes == s.amplitudes


def test_beamsplitter_examples():
    out = beamsplitter(fock((1, 0)), 0, 1, math.pi / 2)
    assert out.amplitude((0, 1)) == pytest.approx(1j)
    assert abs(out.amplitude((1, 0))) < 1e-15
    # two photons on a balanced splitter bunch: no |1,1> term
    hom = beamsplitter(fock((1, 1)), 0, 1, math.pi / 4)
    assert abs(hom.amplitude((1, 1))) < 1e-15
    assert hom.amplitude((2, 0)) == pytest.approx(1j / math.sqrt(2))
    with pytest.raises(FockError):
        beamsplitter(fock((1, 0)), 0, 0, 0.1)


@pytest.mark.parametrize("theta", [math.pi / 8, math.pi / 4, 1.0])
def test_beamsplitter_is_x_rotation(theta):
    m = logical_matrix(lambda f: beamsplitter(f, Q.mode_a, Q.mode_b, theta))
    assert np.abs(m - xrot_matrix(-2 * theta)).max() < 1e-12


@given(angle)
@settings(max_examples=30, deadline=None)
def test_phase_shifter_is_z_rotation(phi):
    m = logical_matrix(lambda f: phase_shifter(f, Q.mode_a, phi))
    assert np.abs(m - np.diag([1, cmath.exp(1j * phi)])).max() < 1e-12


@given(fock_states(), angle, st.sampled_from([(0, 1), (1, 2), (2, 0)]))
@settings(max_examples=60, deadline=None)
def test_unitarity_and_number_conservation(s, theta, modes):
    before = s.photon_number_weights()
    for out in (beamsplitter(s, *modes, theta), phase_shifter(s, modes[0], theta)):
        assert out.norm == pytest.approx(1, abs=1e-12)
        after = out.photon_number_weights()
        for n, w in before.items():
            assert after.get(n, 0.0) == pytest.approx(w, abs=1e-12)


@given(fock_states(), angle)
@settings(max_examples=40, deadline=None)
def test_beamsplitter_inverse(s, theta):
    back = beamsplitter(beamsplitter(s, 0, 2, theta), 0, 2, -theta)
    for occ in set(back.amplitudes) | set(s.amplitudes):
        assert abs(back.amplitude(occ) - s.amplitude(occ)) < 1e-12


@given(st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi), st.lists(angle, min_size=1, max_size=6))
@settings(max_examples=40, deadline=None)
def test_rail_only_circuits_never_leak(t, ph, thetas):
    c0, c1 = math.cos(t / 2), cmath.exp(1j * ph) * math.sin(t / 2)
    s = encode((c0, c1), DualRailQubit(1, 2), vacuum(3))
    for i, th in enumerate(thetas):
        s = beamsplitter(s, 1, 2, th) if i % 2 else phase_shifter(s, 2, th)
    a, b = decode(s, DualRailQubit(1, 2))
    assert abs(a) ** 2 + abs(b) ** 2 == pytest.approx(1, abs=1e-12)


def test_decode_round_trip_and_leakage():
    rng = np.random.default_rng(3)
    for _ in range(20):
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        v /= np.linalg.norm(v)
        got = decode(encode(tuple(v), Q, vacuum(2)), Q)
        assert np.allclose(got, v, atol=1e-12)
    with pytest.raises(LeakageError) as e:
        decode(fock((2, 0)), Q)
    assert e.value.leaked == pytest.approx(1)


def test_photodetection():
    s = encode((1, 0), Q, vacuum(2))
    count, post = photodetect(s, Q.mode_b, RngStream(1))
    assert count == 1 and post.amplitudes == s.amplitudes
    half = encode((2**-0.5, 2**-0.5), Q, vacuum(2))
    rng = RngStream(2)
    counts = [photodetect(half, Q.mode_a, rng)[0] for _ in range(4000)]
    assert abs(np.mean(counts) - 0.5) < 4 * 0.5 / math.sqrt(4000)
    # both rails together always see exactly one photon
    for seed in range(20):
        r = RngStream(seed)
        na, post = photodetect(half, Q.mode_a, r)
        nb, _ = photodetect(post, Q.mode_b, r)
        assert na + nb == 1


def test_photodetector_resolves_two_photons():
    s = superposition(2, {(2, 0): 1, (1, 0): 1})
    assert count_probabilities(s, 0) == pytest.approx({1: 0.5, 2: 0.5})


def test_correspondence_suite_passes():
    checks = correspondence_suite(RngStream(0).angles(20))
    assert [c.name for c in checks] == ["phase_shifter_is_z_rotation", "beamsplitter_is_x_rotation_2theta",
                                        "unitarity", "photon_number_conservation", "beamsplitter_inverse"]
    assert all(c.passed for c in checks)
