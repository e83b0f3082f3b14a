import math

import numpy as np
import pytest

from gausschain.channels import (
    ChannelChain,
    GaussianChannel,
    GaussianState,
    apply_chain,
    apply_channel,
    channel_is_physical,
    compose,
    compose_chain,
    extract_displacements,
    identity_channel,
    state_is_physical,
    vacuum,
)
from gausschain.ebreak import channel_is_eb
from gausschain.errors import ValidationError
from gausschain.sampling import random_channel, random_state
from gausschain.stations import phase_insensitive, phase_sensitive_amp, pure_loss, rotation_channel


def test_state_physicality_spot_cases():
    ok, min_eig = state_is_physical(0.5 * np.eye(2))
    assert ok and abs(min_eig) < 1e-14  # vacuum saturates the uncertainty relation
    ok, _ = state_is_physical(0.25 * np.eye(2))
    assert not ok
    ok, _ = state_is_physical(np.diag([1.0, 0.25]))
    assert ok


def test_state_constructor_rejects_unphysical():
    with pytest.raises(ValidationError):
        GaussianState(0.25 * np.eye(2))
    with pytest.raises(ValidationError):
        GaussianState(np.array([[0.5, 0.1], [0.0, 0.5]]))


def test_channel_physicality_spot_cases():
    ok, _ = channel_is_physical(np.eye(2), np.zeros((2, 2)))
    assert ok
    ok, min_eig = channel_is_physical(math.sqrt(2) * np.eye(2), 0.5 * np.eye(2))
    assert ok and abs(min_eig) < 1e-12  # quantum-limited amplifier sits on the boundary
    ok, _ = channel_is_physical(math.sqrt(2) * np.eye(2), 0.4 * np.eye(2))
    assert not ok
    with pytest.raises(ValidationError):
        GaussianChannel(math.sqrt(2) * np.eye(2), None, 0.4 * np.eye(2))


def test_channel_arrays_are_immutable():
    ch = pure_loss(0.5)
    with pytest.raises(ValueError):
        ch.transfer[0, 0] = 2.0


def test_compose_pure_losses():
    total = compose(pure_loss(0.5), pure_loss(0.5))
    np.testing.assert_allclose(total.transfer, 0.5 * np.eye(2), atol=1e-15)
    np.testing.assert_allclose(total.noise, 0.375 * np.eye(2), atol=1e-15)


def test_identity_is_neutral(rng):
    ch = random_channel(rng, 1)
    for composed in (compose(ch, identity_channel(1)), compose(identity_channel(1), ch)):
        np.testing.assert_allclose(composed.transfer, ch.transfer, atol=1e-15)
        np.testing.assert_allclose(composed.noise, ch.noise, atol=1e-15)


def test_rotation_commutes_with_phase_insensitive():
    pic = phase_insensitive(1.7, 0.2)
    rot = rotation_channel(0.6)
    left = compose(rot, pic)
    right = compose(pic, rot)
    np.testing.assert_allclose(left.transfer, right.transfer, atol=1e-14)
    np.testing.assert_allclose(left.noise, right.noise, atol=1e-14)


def test_compose_rejects_mode_mismatch():
    with pytest.raises(ValidationError):
        compose(pure_loss(0.5, n=1), pure_loss(0.5, n=2))


def test_compose_chain_single_link(rng):
    ch = random_channel(rng, 1)
    total = compose_chain([ch])
    assert total is ch or np.array_equal(total.transfer, ch.transfer)


def test_compose_chain_three_losses():
    total = compose_chain([pure_loss(0.9), pure_loss(0.8), pure_loss(0.7)])
    want = pure_loss(0.9 * 0.8 * 0.7)
    np.testing.assert_allclose(total.transfer, want.transfer, rtol=1e-12)
    np.testing.assert_allclose(total.noise, want.noise, rtol=1e-12)


def test_compose_chain_matches_closed_form_squeezer_chain():
    from gausschain.relay import PsaChainSpec, psa_chain_params

    total = compose_chain([pure_loss(0.6), phase_sensitive_amp(2.0), pure_loss(0.5)])
    params = psa_chain_params(PsaChainSpec([0.6, 0.5], [2.0]))
    np.testing.assert_allclose(total.transfer, params.transfer, rtol=1e-12)
    np.testing.assert_allclose(total.noise, params.noise, atol=1e-14)


def test_compose_associativity(rng):
    for _ in range(30):
        a, b, c = (random_channel(rng, 1, with_shift=True) for _ in range(3))
        left = compose(compose(a, b), c)
        right = compose(a, compose(b, c))
        np.testing.assert_allclose(left.transfer, right.transfer, atol=1e-12)
        np.testing.assert_allclose(left.shift, right.shift, atol=1e-12)
        np.testing.assert_allclose(left.noise, right.noise, atol=1e-12)


def test_physicality_closure(rng):
    for n in (1, 2):
        for _ in range(250):
            a = random_channel(rng, n)
            b = random_channel(rng, n)
            assert compose(a, b).physicality_margin() >= -1e-10


def test_apply_identity_and_loss_on_vacuum():
    out = apply_channel(identity_channel(1), vacuum(1))
    np.testing.assert_allclose(out.cov, 0.5 * np.eye(2))
    out = apply_channel(pure_loss(0.25), vacuum(1))
    np.testing.assert_allclose(out.cov, 0.5 * np.eye(2), atol=1e-15)


def test_apply_affine_map():
    state = GaussianState(2.0 * np.eye(2), [4.0, 0.0])
    out = apply_channel(pure_loss(0.5), state)
    np.testing.assert_allclose(out.cov, 1.25 * np.eye(2), atol=1e-15)
    np.testing.assert_allclose(out.mean, [math.sqrt(0.5) * 4.0, 0.0], atol=1e-15)


def test_apply_rejects_mode_mismatch():
    with pytest.raises(ValidationError):
        apply_channel(pure_loss(0.5, n=2), vacuum(1))


def test_apply_preserves_physicality(rng):
    for _ in range(50):
        ch = random_channel(rng, 1, with_shift=True)
        st = random_state(rng, 1)
        out = apply_channel(ch, st)  # constructor re-validates
        assert state_is_physical(out.cov)[0]


def test_extract_displacements_trivial(rng):
    links = [random_channel(rng, 1) for _ in range(3)]
    extracted, total_shift = extract_displacements(links)
    assert np.array_equal(total_shift, np.zeros(2))
    for old, new in zip(links, extracted):
        assert np.array_equal(old.transfer, new.transfer)
        assert np.array_equal(old.noise, new.noise)


def test_extract_displacements_identity_transfer():
    a = GaussianChannel(np.eye(2), [1.0, 0.0], np.zeros((2, 2)))
    b = GaussianChannel(np.eye(2), [0.0, 1.0], np.zeros((2, 2)))
    _, total_shift = extract_displacements([a, b])
    np.testing.assert_allclose(total_shift, [1.0, 1.0])


def test_extract_displacements_composes_bitwise_identically(rng):
    for _ in range(20):
        links = [random_channel(rng, 1, with_shift=True) for _ in range(3)]
        extracted, _ = extract_displacements(links)
        total_a = compose_chain(links)
        total_b = compose_chain(extracted)
        assert np.array_equal(total_a.transfer, total_b.transfer)
        assert np.array_equal(total_a.shift, total_b.shift)
        assert np.array_equal(total_a.noise, total_b.noise)


def test_extract_displacements_equivalent_on_states(rng):
    links = [random_channel(rng, 1, with_shift=True) for _ in range(3)]
    extracted, _ = extract_displacements(links)
    for _ in range(20):
        probe = random_state(rng, 1)
        a = apply_chain(links, probe)
        b = apply_chain(extracted, probe)
        assert np.max(np.abs(a.cov - b.cov)) <= 1e-12
        assert np.max(np.abs(a.mean - b.mean)) <= 1e-12


def test_eb_flag_survives_composition(rng):
    # a chain containing a breaking link composes to a breaking channel
    breaking = phase_insensitive(0.6, 0.9)  # noise above min(1, gain)
    assert channel_is_eb(breaking).eb
    found = 0
    while found < 20:
        ch = random_channel(rng, 1)
        if np.linalg.det(ch.transfer) <= 0:
            continue
        found += 1
        for chain in ([ch, breaking], [breaking, ch]):
            assert channel_is_eb(compose_chain(chain)).eb


def test_channel_chain_validation(rng):
    with pytest.raises(ValidationError):
        ChannelChain([])
    with pytest.raises(ValidationError):
        ChannelChain([pure_loss(0.5, n=1), pure_loss(0.5, n=2)])
