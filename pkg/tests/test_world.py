import dataclasses

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import crc8_table, even_parity
from wsnais.world import (Behavior, BehaviorMode, Credential, Node, Packet, PacketKind, Position,
                          Role, WorldState, centroid, crc8_atm, drain_energy, make_credential,
                          nodes_within, position_at, step_world, verify_credential)

ids = st.integers(0, (1 << 18) - 1)


def node(i, role=Role.FRIEND, pos=(0.5, 0.5), energy=100.0, **kw):
    return Node(i, role, Position(*pos), energy, make_credential(i), **kw)


class TestCrc:
    def test_standard_check_value(self):
        # the catalogued check value of CRC-8/ATM
        assert crc8_table(b"123456789") == 0xF4
        assert crc8_atm(b"123456789") == 0xF4

    @given(st.binary(max_size=16))
    def test_matches_table_oracle(self, data):
        assert crc8_atm(data) == crc8_table(data)


class TestCredential:
    def test_parity_examples(self):
        assert make_credential(0b11).parity_bit == 0
        assert make_credential(0b111).parity_bit == 1
        # 0b101 has an even popcount, so its parity bit is 0
        assert make_credential(0b101).parity_bit == 0

    def test_zero_id(self):
        c = make_credential(0)
        assert (c.parity_bit, c.crc8) == (0, crc8_table(bytes(3))) == (0, 0)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            make_credential(1 << 18)
        with pytest.raises(ValueError):
            make_credential(-1)

    def test_frame_is_19_bits(self):
        c = make_credential((1 << 18) - 1)
        assert c.frame() < 1 << 19
        assert Credential.from_frame(c.frame(), c.crc8) == c

    def test_flipped_parity_fails(self):
        c = make_credential(12345)
        assert verify_credential(c)
        assert not verify_credential(dataclasses.replace(c, parity_bit=c.parity_bit ^ 1))

    def test_crc_corruption_only_caught_in_crc_mode(self):
        c = make_credential(777)
        bad = dataclasses.replace(c, crc8=c.crc8 ^ 0xFF)
        assert crc8_table((777).to_bytes(3, "big")) != bad.crc8
        assert verify_credential(bad, crc_mode=False)
        assert not verify_credential(bad, crc_mode=True)

    def test_exhaustive_low_ids(self):
        for i in range(1 << 10):
            c = make_credential(i)
            assert c.parity_bit == even_parity(i)
            assert verify_credential(c, False) and verify_credential(c, True)

    @given(ids, st.booleans())
    def test_round_trip(self, i, crc_mode):
        assert verify_credential(make_credential(i), crc_mode)

    @given(ids, st.integers(0, 18))
    def test_single_bit_flip_detected(self, i, bit):
        c = make_credential(i)
        bad = Credential.from_frame(c.frame() ^ (1 << bit), c.crc8)
        assert not verify_credential(bad)

    def test_malformed_is_false_not_error(self):
        assert not verify_credential(Credential(1 << 18, 1, 0))
        assert not verify_credential(Credential(3, 2, 0))


class TestEnergy:
    @pytest.mark.parametrize("e, amount, out", [(10, 3, 7), (2, 5, 0), (0, 0, 0)])
    def test_examples(self, e, amount, out):
        n = node(1, energy=float(e))
        after = drain_energy(n, amount)
        assert after.energy == out
        assert dataclasses.replace(after, energy=n.energy) == n

    def test_negative_amount(self):
        with pytest.raises(ValueError):
            drain_energy(node(1), -1.0)

    @given(st.floats(0, 1e6), st.lists(st.floats(0, 1e6), max_size=30))
    def test_never_negative(self, e0, amounts):
        n = node(1, energy=e0)
        for a in amounts:
            n = drain_energy(n, a)
            assert n.energy >= 0

    def test_node_rejects_negative_energy(self):
        with pytest.raises(ValueError):
            node(1, energy=-0.1)


class TestTypes:
    def test_position_finite(self):
        with pytest.raises(ValueError):
            Position(float("nan"), 0.0)

    def test_packet_tag_rules(self):
        with pytest.raises(ValueError):
            Packet(0, 1, PacketKind.HONEYPOT)
        with pytest.raises(ValueError):
            Packet(0, 1, PacketKind.REAL, "hp-1")

    def test_forward_needs_dst(self):
        with pytest.raises(ValueError):
            Behavior(BehaviorMode.FORWARD)

    def test_decoy_needs_shadow(self):
        with pytest.raises(ValueError):
            node(3, role=Role.DECOY)

    def test_world_keys_match_ids(self):
        with pytest.raises(ValueError):
            WorldState({1: node(2)})


class TestStep:
    def test_empty_world(self):
        s = WorldState({})
        step_world(s)
        assert s.tick == 1 and s.nodes == {}

    def test_two_point_trajectory(self):
        n = node(1, trajectory=(Position(0.1, 0.1), Position(0.2, 0.3)))
        s = WorldState({1: n})
        step_world(s)
        assert s.nodes[1].position == Position(0.2, 0.3)
        step_world(s)
        assert s.nodes[1].position == Position(0.2, 0.3)  # holds last point

    def test_energy_untouched(self):
        s = WorldState({1: node(1, energy=5.0), 2: node(2, energy=0.0)})
        step_world(s)
        assert [n.energy for n in s.nodes.values()] == [5.0, 0.0]

    def _scripted(self, seed):
        s = WorldState({
            0: node(0, Role.BASE_STATION),
            1: node(1, Role.UNKNOWN, behavior=Behavior(BehaviorMode.FORWARD, 2, 2),
                    trajectory=(Position(0, 0), Position(0.1, 0.1), Position(0.2, 0.2))),
            2: node(2, Role.HOSTILE),
        }, rng_seed=seed)
        s.send(Packet(0, 1, PacketKind.HONEYPOT, s.new_tag()))
        return s

    def test_replay_determinism(self):
        a, b = self._scripted(9), self._scripted(9)
        for _ in range(4):
            step_world(a)
            step_world(b)
            assert a.snapshot() == b.snapshot()

    def test_forward_after_delay(self):
        s = self._scripted(0)
        step_world(s)
        assert not [e for e in s.event_log if e.kind == "forward"]
        step_world(s)
        fwd = [e for e in s.event_log if e.kind == "forward"]
        assert len(fwd) == 1 and fwd[0].tick == 2 and fwd[0].data["dst"] == 2
        assert fwd[0].data["tag"] == "hp-000001"

    def test_drained_node_forwards_nothing(self):
        s = self._scripted(0)
        s.nodes[1] = drain_energy(s.nodes[1], 1e9)
        step_world(s)
        step_world(s)
        assert [e.kind for e in s.event_log if e.node_id == 1] == ["drop"]

    def test_event_log_ordered(self):
        s = self._scripted(3)
        for _ in range(5):
            step_world(s)
        ticks = [e.tick for e in s.event_log]
        assert ticks == sorted(ticks)

    def test_send_unknown_dst(self):
        with pytest.raises(KeyError):
            WorldState({}).send(Packet(0, 5))


def test_helpers():
    s = WorldState({1: node(1, pos=(0, 0)), 2: node(2, pos=(1, 0)), 3: node(3, Role.UNKNOWN,
                                                                          pos=(0.1, 0))})
    assert centroid([Position(0, 0), Position(1, 1)]) == Position(0.5, 0.5)
    assert nodes_within(s, Position(0, 0), 0.2) == [1, 3]
    assert nodes_within(s, Position(0, 0), 0.2, [Role.FRIEND]) == [1]
    assert position_at(s.nodes[1], 7) == Position(0, 0)
    assert s.ids(Role.UNKNOWN) == [3] and s.next_id() == 4
