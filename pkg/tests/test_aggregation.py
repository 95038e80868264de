import pytest

from aedt.aggregation import (
    CycleConfig,
    OverloadMode,
    OverloadPolicy,
    TransferOutcome,
    TransferRequest,
    TransferStatus,
    refresh_network,
    submit_transfer,
    transfer_delay,
)
from aedt.energy import DrainPolicy
from aedt.models import NodeState, Packet, Path

WAIT = OverloadPolicy(OverloadMode.WAIT)
PRIORITIZE = OverloadPolicy(OverloadMode.PRIORITIZE)


def _request(transmitter, count, at, first_seq=0, priorities=None):
    priorities = priorities or [0] * count
    packets = tuple(
        Packet(seq=first_seq + i, source=transmitter, created_at=at, size=1024, priority=p)
        for i, p in enumerate(priorities)
    )
    return TransferRequest(transmitter, packets, at)


def _seqs(packets):
    return sorted(p.seq for p in packets)


@pytest.fixture
def cycle(pair, cycle_config, log):
    return refresh_network(pair, cycle_config, None, log, 0.0)


class TestSubmitTransfer:
    def test_accept_under_budget(self, pair, table, cycle, cycle_config, log):
        assert cycle.parent == 0
        outcome = submit_transfer(_request(1, 6, 0.1), WAIT, pair, table, cycle, cycle_config, log, 0.1)

        assert outcome.status is TransferStatus.DELIVERED
        assert len(outcome.delivered) == 6
        assert outcome.path_used.hops == (1, 0)
        assert cycle.parent_budget == 4
        assert pair.node(0).e_avail == pytest.approx(99.0)
        assert pair.node(1).e_avail == pytest.approx(50.0 - 1.0 - 0.01 * 0.01)

    def test_relays_sleep_after_transfer(self, pair, table, cycle, cycle_config, log):
        submit_transfer(_request(1, 2, 0.1), WAIT, pair, table, cycle, cycle_config, log, 0.1)
        assert pair.awake_ids() == [0]
        assert pair.node(1).state is NodeState.SLEEP

    def test_overload_wait_defers_everything(self, pair, table, cycle, cycle_config, log):
        submit_transfer(_request(1, 6, 0.1), WAIT, pair, table, cycle, cycle_config, log, 0.1)
        outcome = submit_transfer(_request(1, 7, 0.2, first_seq=6), WAIT, pair, table, cycle, cycle_config, log, 0.2)

        assert outcome.delivered == ()
        assert len(outcome.deferred) == 7
        assert outcome.decision.accepted == 4 and outcome.decision.excess == 3
        assert cycle.parent_budget == 4
        assert [r.deferrals for r in cycle.deferred] == [1]

    def test_waiting_request_delivers_after_refresh(self, pair, table, cycle, cycle_config, log):
        submit_transfer(_request(1, 6, 0.1), WAIT, pair, table, cycle, cycle_config, log, 0.1)
        submit_transfer(_request(1, 7, 0.2, first_seq=6), WAIT, pair, table, cycle, cycle_config, log, 0.2)

        nxt = refresh_network(pair, cycle_config, cycle, log, 1.0)
        assert nxt.index == 1
        assert nxt.parent_budget == 10
        [waiting] = nxt.resubmit
        outcome = submit_transfer(waiting, WAIT, pair, table, nxt, cycle_config, log, 1.0)

        assert _seqs(outcome.delivered) == list(range(6, 13))
        assert transfer_delay(waiting, outcome, 0.01, 1.0) == pytest.approx(1.01)

    def test_overload_prioritize_sends_most_important(self, pair, table, cycle, cycle_config, log):
        submit_transfer(_request(1, 6, 0.1), PRIORITIZE, pair, table, cycle, cycle_config, log, 0.1)
        request = _request(1, 7, 0.2, first_seq=6, priorities=[3, 0, 2, 1, 0, 3, 1])
        outcome = submit_transfer(request, PRIORITIZE, pair, table, cycle, cycle_config, log, 0.2)

        assert _seqs(outcome.delivered) == [7, 9, 10, 12]
        assert _seqs(outcome.dropped) == [6, 8, 11]
        assert outcome.deferred == ()
        assert outcome.status is TransferStatus.PARTIAL
        assert cycle.parent_budget == 0

        ranked = sorted(request.packets, key=lambda p: (p.priority, p.seq))
        assert set(outcome.delivered) == set(ranked[:4])

    def test_prioritize_spill_defers_excess(self, pair, table, cycle, cycle_config, log):
        spill = OverloadPolicy(OverloadMode.PRIORITIZE, spill=True)
        submit_transfer(_request(1, 6, 0.1), spill, pair, table, cycle, cycle_config, log, 0.1)
        outcome = submit_transfer(_request(1, 7, 0.2, first_seq=6), spill, pair, table, cycle, cycle_config, log, 0.2)

        assert len(outcome.delivered) == 4
        assert len(outcome.deferred) == 3
        assert outcome.dropped == ()
        [carried] = cycle.deferred
        assert _seqs(carried.packets) == _seqs(outcome.deferred)

    def test_packet_groups_partition_request(self, pair, table, cycle, cycle_config, log):
        for mode in (WAIT, PRIORITIZE):
            request = _request(1, 12, 0.3)
            outcome = submit_transfer(request, mode, pair, table, cycle, cycle_config, log, 0.3)
            groups = outcome.delivered + outcome.deferred + outcome.dropped + outcome.undeliverable
            assert _seqs(groups) == _seqs(request.packets)

    def test_zero_hop_transfer_drains_parent_once(self, pair, table, cycle, cycle_config, log):
        outcome = submit_transfer(_request(0, 3, 0.5), WAIT, pair, table, cycle, cycle_config, log, 0.5)
        assert outcome.path_used is None
        assert outcome.hops == 0
        assert pair.node(0).e_avail == pytest.approx(99.0)
        assert transfer_delay(outcome.request, outcome, 0.01, 1.0) == 0.0

    def test_dead_transmitter(self, pair, table, cycle, cycle_config, log):
        pair.node(1).e_avail = 0.0
        outcome = submit_transfer(_request(1, 2, 0.1), WAIT, pair, table, cycle, cycle_config, log, 0.1)
        assert outcome.status is TransferStatus.UNDELIVERABLE
        assert outcome.reason == "transmitter_dead"

    def test_no_path_is_undeliverable(self, line3, table, cycle_config, log):
        state = refresh_network(line3, cycle_config, None, log, 0.0)
        assert state.parent == 0
        line3.node(1).e_avail = 0.0
        outcome = submit_transfer(_request(2, 2, 0.1), WAIT, line3, table, state, cycle_config, log, 0.1)
        assert len(outcome.undeliverable) == 2
        assert outcome.reason == "no_path"

    def test_multi_hop_drains_intermediates(self, line3, table, cycle_config, log):
        state = refresh_network(line3, cycle_config, None, log, 0.0)
        outcome = submit_transfer(_request(2, 1, 0.1), WAIT, line3, table, state, cycle_config, log, 0.1)
        assert outcome.path_used.hops == (2, 1, 0)
        assert line3.node(0).e_avail == pytest.approx(4.0)
        awake_cost = 0.01 * 2 * 0.01
        assert line3.node(1).e_avail == pytest.approx(4.0 - awake_cost)
        assert line3.node(2).e_avail == pytest.approx(4.0 - awake_cost)
        assert line3.awake_ids() == [0]


class TestRefreshNetwork:
    def test_same_energies_same_parent(self, pair, cycle_config, log):
        first = refresh_network(pair, cycle_config, None, log, 0.0)
        second = refresh_network(pair, cycle_config, first, log, 1.0)
        assert first.parent == second.parent == 0
        assert second.index == 1

    def test_drained_parent_is_replaced(self, pair, cycle_config, log):
        first = refresh_network(pair, cycle_config, None, log, 0.0)
        pair.node(0).e_avail = 10.0
        second = refresh_network(pair, cycle_config, first, log, 1.0)
        assert second.parent == 1
        assert pair.awake_ids() == [1]

    def test_parent_cycle_drain(self, pair, log):
        config = CycleConfig(drain_policy=DrainPolicy(parent_cycle_drain=2.0))
        first = refresh_network(pair, config, None, log, 0.0)
        refresh_network(pair, config, first, log, 1.0)
        assert pair.node(0).e_avail == pytest.approx(98.0)

    def test_no_sleep_keeps_everyone_awake_and_charges_alpha(self, pair, log):
        config = CycleConfig(sleep_enabled=False, drain_policy=DrainPolicy(alpha=0.5))
        first = refresh_network(pair, config, None, log, 0.0)
        assert pair.awake_ids() == [0, 1]
        refresh_network(pair, config, first, log, 2.0)
        assert pair.node(1).e_avail == pytest.approx(49.0)
        assert pair.node(0).e_avail == pytest.approx(100.0)

    def test_budget_follows_interval(self, pair, log):
        state = refresh_network(pair, CycleConfig(refresh_interval=0.5), None, log, 0.0)
        assert state.parent_budget == 5


class TestTransferDelay:
    def _delivered(self, request, hops):
        path = Path(tuple(range(hops, -1, -1)))
        return TransferOutcome(request, delivered=request.packets, path_used=path)

    def test_linear_hop_model(self):
        request = _request(3, 2, 5.0)
        assert transfer_delay(request, self._delivered(request, 3), 0.01, 1.0) == pytest.approx(0.03)

    def test_deferral_adds_refresh_interval(self):
        waited = TransferRequest(3, _request(3, 2, 5.0).packets, 5.0, deferrals=1)
        assert transfer_delay(waited, self._delivered(waited, 3), 0.01, 1.0) == pytest.approx(1.03)

    def test_immediate_beats_deferred(self):
        request = _request(1, 1, 2.0)
        waited = TransferRequest(1, request.packets, 2.0, deferrals=1)
        immediate = transfer_delay(request, self._delivered(request, 2), 0.01, 1.0)
        later = transfer_delay(waited, self._delivered(waited, 2), 0.01, 1.0)
        assert immediate < later

    def test_nothing_delivered(self):
        request = _request(1, 1, 2.0)
        assert transfer_delay(request, TransferOutcome(request, deferred=request.packets), 0.01, 1.0) is None

    def test_refresh_interval_is_required(self):
        request = _request(3, 2, 5.0)
        with pytest.raises(TypeError):
            transfer_delay(request, self._delivered(request, 3), 0.01)


class TestChannelTiming:
    @pytest.fixture
    def slow(self):
        return CycleConfig(bandwidth_bps=1024.0)

    def test_budgets_carry_bandwidth(self, pair, slow, log):
        state = refresh_network(pair, slow, None, log, 0.0)
        assert {b.bandwidth_b for b in state.budgets.values()} == {1024.0}

    def test_delivered_packets_are_timed(self, pair, table, slow, log):
        state = refresh_network(pair, slow, None, log, 0.0)
        outcome = submit_transfer(_request(1, 4, 0.1), WAIT, pair, table, state, slow, log, 0.1)

        # 1024 bits at 1024 bit/s, 10 m from the parent
        assert [(t.t_i, t.d_i) for t in outcome.timings] == [(1.0, 10.0)] * 4
        assert outcome.airtime == 4.0
        assert outcome.utilization == pytest.approx(0.4)
        assert state.utilization() == pytest.approx(0.4)
        assert state.rtcc() == pytest.approx(1024.0)

    def test_waiting_packets_use_no_channel(self, pair, table, slow, log):
        state = refresh_network(pair, slow, None, log, 0.0)
        outcome = submit_transfer(_request(1, 11, 0.1), WAIT, pair, table, state, slow, log, 0.1)
        assert outcome.timings == ()
        assert state.rtcc() is None

    def test_zero_hop_transfer_is_untimed(self, pair, table, slow, log):
        state = refresh_network(pair, slow, None, log, 0.0)
        outcome = submit_transfer(_request(0, 3, 0.5), WAIT, pair, table, state, slow, log, 0.5)
        assert outcome.airtime == 0.0
        assert state.timings == {}


class TestTransferRequest:
    def test_needs_packets(self):
        with pytest.raises(ValueError):
            TransferRequest(1, (), 0.0)

    def test_packets_share_source(self):
        with pytest.raises(ValueError, match="do not originate"):
            TransferRequest(1, (Packet(0, 2, 0.0, 1024),), 0.0)
