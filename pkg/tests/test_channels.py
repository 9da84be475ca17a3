import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import assert_dm, dm_from_seed, seeds, unitary_from_seed
from qinstr import channels as ch
from qinstr.gates import rx, rz
from qinstr.linalg import X, dag, kron
from qinstr.qstate import pure_state

EXCITED = pure_state("1")
PHI_PLUS = np.outer(*(2 * [np.array([1, 0, 0, 1.0])]))


def _constructors():
    return [
        ch.identity_channel(),
        ch.amplitude_damping(0.0),
        ch.amplitude_damping(0.37),
        ch.amplitude_damping(1.0),
        ch.decoherence_channel(1 / 20e-6, 1 / 10e-6, 65e-9),
        ch.decoherence_channel(0.0, 0.0, 1.0),
        ch.unitary_channel(unitary_from_seed(3)),
    ]


class TestAmplitudeDamping:
    def test_zero_is_identity(self):
        m = dm_from_seed(1)
        assert np.allclose(ch.apply(ch.amplitude_damping(0), m), m)

    def test_full(self):
        assert np.allclose(ch.apply(ch.amplitude_damping(1), EXCITED), pure_state("0"))

    def test_three_quarters(self):
        assert np.allclose(ch.apply(ch.amplitude_damping(0.75), EXCITED), np.diag([0.75, 0.25]))

    def test_range(self):
        with pytest.raises(ch.ChannelError):
            ch.amplitude_damping(1.2)
        with pytest.raises(ch.ChannelError):
            ch.amplitude_damping(-0.1)

    @given(seeds, st.floats(0, 1), st.floats(-np.pi, np.pi))
    def test_z_rotation_covariance(self, seed, p, phi):
        m, u, a = dm_from_seed(seed), rz(phi), ch.amplitude_damping(p)
        lhs = ch.apply(a, u @ m @ dag(u))
        rhs = u @ ch.apply(a, m) @ dag(u)
        assert np.max(np.abs(lhs - rhs)) < 1e-11


class TestDecoherence:
    def test_zero_time(self):
        c = ch.decoherence_channel(1e5, 2e5, 0.0)
        m = dm_from_seed(4)
        assert np.allclose(ch.apply(c, m), m, atol=1e-15)

    def test_six_kraus(self):
        assert len(ch.decoherence_channel(1.0, 1.0, 0.1).kraus) == 6

    def test_population_decay(self):
        c = ch.decoherence_channel(1.0, 0.0, np.log(4))
        assert ch.apply(c, EXCITED)[1, 1].real == pytest.approx(0.25, abs=1e-14)

    def test_coherence_decay(self):
        # the dephasing Kraus family scales the off-diagonal by exp(-gamma_phi t)
        c = ch.decoherence_channel(0.0, 1.0, np.log(4))
        plus = pure_state("+")
        ratio = np.trace(X @ ch.apply(c, plus)).real / np.trace(X @ plus).real
        assert ratio == pytest.approx(0.25, abs=1e-14)

    def test_combined_coherence(self):
        g1, gp, t = 3.0, 2.0, 0.4
        out = ch.apply(ch.decoherence_channel(g1, gp, t), pure_state("+"))
        assert abs(out[0, 1]) == pytest.approx(0.5 * np.exp(-g1 * t / 2 - gp * t), abs=1e-14)

    def test_negative(self):
        with pytest.raises(ch.ChannelError):
            ch.decoherence_channel(-1.0, 0.0, 1.0)
        with pytest.raises(ch.ChannelError):
            ch.decoherence_channel(1.0, 0.0, -1.0)


class TestComposition:
    def test_identity_neutral(self, rng):
        a = ch.amplitude_damping(0.4)
        c = ch.compose(a, ch.identity_channel())
        for _ in range(20):
            m = dm_from_seed(rng.integers(2**31))
            assert np.allclose(ch.apply(c, m), ch.apply(a, m), atol=1e-14)

    def test_damping_closure(self, rng):
        d = 0.3
        a = ch.amplitude_damping(np.sin(d) ** 2)
        two = ch.compose(a, a)
        target = ch.amplitude_damping(1 - np.cos(d) ** 4)
        for _ in range(20):
            m = dm_from_seed(rng.integers(2**31))
            assert np.max(np.abs(ch.apply(two, m) - ch.apply(target, m))) < 1e-12

    def test_power(self):
        d = np.pi / 8
        p = 1 - np.cos(d) ** 16
        assert p == pytest.approx(0.7182619, abs=1e-7)
        c8 = ch.power(ch.amplitude_damping(np.sin(d) ** 2), 8)
        assert np.max(np.abs(ch.choi(c8) - ch.choi(ch.amplitude_damping(p)))) < 1e-12
        assert len(c8.kraus) == 2

    def test_dim_mismatch(self):
        with pytest.raises(ch.ChannelError):
            ch.compose(ch.identity_channel(2), ch.identity_channel(4))
        with pytest.raises(ch.ChannelError):
            ch.apply(ch.identity_channel(2), np.eye(3) / 3)

    def test_tensor_and_lift(self):
        a = ch.amplitude_damping(0.3)
        m = kron(dm_from_seed(1), dm_from_seed(2))
        lifted = ch.apply(a, m, qubit=1)
        assert np.allclose(lifted, ch.apply(ch.tensor(ch.identity_channel(), a), m))
        assert np.allclose(lifted, kron(dm_from_seed(1), ch.apply(a, dm_from_seed(2))))

    @given(seeds, seeds, st.floats(-3, 3))
    def test_linear(self, s1, s2, w):
        c = ch.decoherence_channel(2.0, 1.0, 0.3)
        a, b = dm_from_seed(s1), dm_from_seed(s2)
        assert np.allclose(ch.apply(c, a + w * b), ch.apply(c, a) + w * ch.apply(c, b), atol=1e-12)

    @given(seeds)
    def test_apply_keeps_dm(self, seed):
        m = dm_from_seed(seed, 4)
        out = ch.apply(ch.decoherence_channel(1e4, 3e4, 2e-5), m, qubit=0)
        assert_dm(out, 1e-10)


class TestRepresentations:
    def test_identity_choi(self):
        assert np.allclose(ch.choi(ch.identity_channel()), PHI_PLUS)

    def test_full_damping_choi(self):
        j = ch.choi(ch.amplitude_damping(1.0))
        w = np.linalg.eigvalsh(j)
        assert w[0] > -1e-12
        assert np.sum(w > 1e-12) == 2

    def test_unitary_choi_rank_one(self):
        w = np.linalg.eigvalsh(ch.choi(ch.unitary_channel(unitary_from_seed(9))))
        assert np.sum(w > 1e-10) == 1

    @pytest.mark.parametrize("c", _constructors(), ids=range(7))
    def test_constructors_cptp(self, c):
        rep = ch.is_cptp(c)
        assert rep.ok and rep.tp_residual < 1e-10

    def test_not_cptp(self):
        bad = ch.KrausChannel((1.1 * np.eye(2),), 2)
        assert not ch.is_cptp(bad)

    @given(seeds)
    def test_superop_choi_round_trip(self, seed):
        c = ch.decoherence_channel(*np.random.default_rng(seed).uniform(0, 5, size=3))
        s = ch.superop(c)
        j = ch.choi_from_superop(s, 2)
        assert np.allclose(j, ch.choi(c), atol=1e-12)
        assert np.allclose(ch.superop_from_choi(j, 2), s, atol=1e-12)
        m = dm_from_seed(seed)
        assert np.allclose(ch.apply_superop(s, m), ch.apply(c, m), atol=1e-12)

    def test_kraus_from_choi(self):
        c = ch.decoherence_channel(1.0, 2.0, 0.3)
        back = ch.kraus_from_choi(ch.choi(c))
        assert len(back.kraus) <= 4
        assert np.allclose(ch.choi(back), ch.choi(c), atol=1e-12)

    def test_chi_identity(self):
        assert np.allclose(ch.chi_matrix(ch.identity_channel()), np.diag([1, 0, 0, 0]), atol=1e-15)

    def test_chi_x_rotation(self):
        chi = ch.chi_matrix(ch.unitary_channel(rx(np.pi)))
        ref = np.zeros((4, 4))
        ref[1, 1] = 1
        assert np.allclose(chi, ref, atol=1e-15)

    @given(seeds)
    def test_chi_round_trip(self, seed):
        j = ch.choi(ch.unitary_channel(unitary_from_seed(seed)))
        chi = ch.chi_from_choi(j)
        assert np.trace(chi).real == pytest.approx(1.0)
        assert np.allclose(ch.choi_from_chi(chi), j, atol=1e-12)

    def test_json(self):
        obj = ch.amplitude_damping(0.2).to_json()
        assert obj["dim"] == 2 and len(obj["kraus"]) == 2
