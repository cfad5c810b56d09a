"""Block log mechanics: signing, pooling, proposing, voting, verification."""

import dataclasses
import hashlib
import itertools
import random
from decimal import Decimal

import pytest

from tdrledger import commands as cmd
from tdrledger.canonical import ZERO_DIGEST, canonicalize, loads_canonical, sha256_hex
from tdrledger.crypto import generate_keypair, verify_signature
from tdrledger.docstore import DocStore
from tdrledger.errors import RegistryError
from tdrledger.ledger import (
    POLICY_EQUIVOCATE,
    POLICY_SILENT,
    Block,
    ChainState,
    TransactionPool,
    ValidatorSet,
    ValidatorSim,
    apply_block,
    collect_votes,
    produce_block,
    sign_transaction,
    tx_root_of,
    valid_votes,
    verify_chain,
)
from tdrledger.state import RegistryState

DEPARTMENTS = ["planning", "revenue", "survey"]


def prefixed(*parts: bytes) -> bytes:
    return b"".join(len(p).to_bytes(4, "big") + p for p in parts)


class Net:
    """A single-process four-validator network over one registry state."""

    def __init__(self, tmp_path, policies=None):
        rng = random.Random(42)
        self.admin = generate_keypair(rng)
        self.vkeys = [generate_keypair(rng) for _ in range(4)]
        self.validators = ValidatorSet(
            tuple((f"v{i + 1}", kp.public_hex) for i, kp in enumerate(self.vkeys))
        )
        policies = policies or {}
        self.sims = [
            ValidatorSim(f"v{i + 1}", kp, policies.get(f"v{i + 1}", "honest"))
            for i, kp in enumerate(self.vkeys)
        ]
        self.docstore = DocStore(tmp_path / "docs")
        self.params = {
            "departments": DEPARTMENTS,
            "sending_zones": ["SZ-A"],
            "receiving_zones": ["RZ-A"],
            "application_prefix": "APP-",
            "admin": {
                "user_id": "admin",
                "address": self.admin.address,
                "public_key": self.admin.public_hex,
            },
        }
        self.state = ChainState(RegistryState(self.params, self.docstore))
        self.pool = TransactionPool()
        self.head = None
        self.lines: list[bytes] = []
        self.clock = itertools.count(1_700_000_000)

    def sign(self, keypair, command, nonce=None):
        if nonce is None:
            nonce = self.state.registry.next_nonce(keypair.address) + sum(
                1 for t in self.pool.pending.values() if t.sender == keypair.address
            )
        return sign_transaction(keypair, nonce, command, next(self.clock))

    def submit(self, keypair, command):
        tx = self.sign(keypair, command)
        self.pool.add(tx, self.state)
        return tx

    def mine(self):
        height = self.state.head_height + 1
        proposer = self.validators.proposer_for(height)
        block = produce_block(self.pool.ordered(), proposer, self.head, self.state,
                              proposer, next(self.clock))
        result = collect_votes(block, self.validators, self.sims)
        assert result.committed, f"only {result.tally} votes"
        block.commit_votes = result.votes
        receipts = apply_block(self.state, block, self.validators)
        self.lines.append(block.to_line())
        self.pool.remove([t.tx_id for t in block.transactions])
        self.head = block
        return block, receipts

    def bind_citizen(self, seed=9):
        citizen = generate_keypair(random.Random(seed))
        self.submit(self.admin, cmd.BindAccount(f"U-{seed:06d}", citizen.address,
                                                citizen.public_hex))
        self.mine()
        return citizen


@pytest.fixture
def net(tmp_path):
    return Net(tmp_path)


class TestTransactionHashing:
    def test_tx_id_matches_independent_hash(self):
        keypair = generate_keypair(random.Random(5))
        command = cmd.CreateNotice("N-1", "SZ-A", "cid:" + "a" * 64)
        tx = sign_transaction(keypair, 3, command, 1234)
        blob = prefixed(keypair.address.encode(), b"3",
                        canonicalize(command.to_payload()), b"1234")
        assert tx.tx_id == hashlib.sha256(blob).hexdigest()
        assert verify_signature(keypair.public_hex, blob, tx.signature)

    def test_any_field_change_changes_tx_id(self):
        keypair = generate_keypair(random.Random(5))
        command = cmd.BurnDrc(7)
        base = sign_transaction(keypair, 1, command, 50)
        assert sign_transaction(keypair, 2, command, 50).tx_id != base.tx_id
        assert sign_transaction(keypair, 1, command, 51).tx_id != base.tx_id
        assert sign_transaction(keypair, 1, cmd.BurnDrc(8), 50).tx_id != base.tx_id

    def test_record_round_trip(self):
        keypair = generate_keypair(random.Random(5))
        tx = sign_transaction(keypair, 1, cmd.UtilizeDrc(3, Decimal("1.5"), "RZ-A"), 9)
        clone = type(tx).from_record(loads_canonical(canonicalize(tx.to_record())))
        assert clone == tx


class TestBlockHashing:
    def test_block_hash_matches_independent_hash(self):
        empty_root = sha256_hex(b"")
        block = Block(height=0, parent_hash=ZERO_DIGEST, tx_root=empty_root,
                      transactions=[], proposer="v1", timestamp=77)
        blob = prefixed(b"0", bytes.fromhex(ZERO_DIGEST), bytes.fromhex(empty_root),
                        b"v1", b"77")
        assert block.hash_hex() == hashlib.sha256(blob).hexdigest()

    def test_tx_root_of_empty(self):
        assert tx_root_of([]) == hashlib.sha256(b"").hexdigest()

    def test_tx_root_is_hash_of_concatenated_ids(self):
        keypair = generate_keypair(random.Random(5))
        txs = [sign_transaction(keypair, n, cmd.BurnDrc(n), 50) for n in (1, 2)]
        joined = b"".join(bytes.fromhex(t.tx_id) for t in txs)
        assert tx_root_of(txs) == hashlib.sha256(joined).hexdigest()

    def test_block_record_round_trip_preserves_hash(self, net):
        net.submit(net.admin, cmd.CreateNotice("N-1", "SZ-A", "cid:" + "a" * 64))
        block, _ = net.mine()
        clone = Block.from_record(loads_canonical(block.to_line()))
        assert clone.hash_hex() == block.hash_hex()
        assert len(clone.commit_votes) == len(block.commit_votes)


class TestPool:
    def test_unknown_sender(self, net):
        stranger = generate_keypair(random.Random(77))
        tx = sign_transaction(stranger, 1, cmd.BurnDrc(1), 5)
        with pytest.raises(RegistryError) as caught:
            net.pool.add(tx, net.state)
        assert caught.value.code == "UnknownSender"

    def test_bad_signature(self, net):
        tx = net.sign(net.admin, cmd.BurnDrc(1))
        forged = dataclasses.replace(tx, signature=bytes(64))
        with pytest.raises(RegistryError) as caught:
            net.pool.add(forged, net.state)
        assert caught.value.code == "BadSignature"

    def test_duplicate_submission(self, net):
        tx = net.submit(net.admin, cmd.BurnDrc(1))
        with pytest.raises(RegistryError) as caught:
            net.pool.add(tx, net.state)
        assert caught.value.code == "DuplicateTx"

    def test_committed_tx_refused_again(self, net):
        tx = net.submit(net.admin, cmd.CreateNotice("N-1", "SZ-A", "cid:" + "a" * 64))
        net.mine()
        with pytest.raises(RegistryError) as caught:
            net.pool.add(tx, net.state)
        assert caught.value.code == "DuplicateTx"

    def test_nonce_gap(self, net):
        tx = net.sign(net.admin, cmd.BurnDrc(1), nonce=5)
        with pytest.raises(RegistryError) as caught:
            net.pool.add(tx, net.state)
        assert caught.value.code == "NonceGap"

    def test_consecutive_pending_nonces_accepted(self, net):
        first = net.submit(net.admin, cmd.BurnDrc(1))
        second = net.submit(net.admin, cmd.BurnDrc(2))
        assert (first.nonce, second.nonce) == (1, 2)
        assert len(net.pool) == 2

    def test_prune_drops_stale_nonces(self, net):
        stale = net.sign(net.admin, cmd.BurnDrc(1), nonce=1)
        net.submit(net.admin, cmd.CreateNotice("N-1", "SZ-A", "cid:" + "a" * 64))
        net.mine()
        net.pool.pending[stale.tx_id] = stale
        net.pool.prune_stale(net.state)
        assert len(net.pool) == 0


class TestProduceBlock:
    def test_wrong_proposer_refused(self, net):
        with pytest.raises(RegistryError) as caught:
            produce_block([], "v3", None, net.state, "v1", 1)
        assert caught.value.code == "WrongProposer"

    def test_stale_nonce_excluded_not_fatal(self, net):
        stale = net.sign(net.admin, cmd.BurnDrc(1), nonce=1)
        net.submit(net.admin, cmd.CreateNotice("N-1", "SZ-A", "cid:" + "a" * 64))
        net.mine()
        good = net.sign(net.admin, cmd.CreateNotice("N-2", "SZ-A", "cid:" + "a" * 64))
        block = produce_block([stale, good], "v2", net.head, net.state, "v2", 1)
        assert [t.tx_id for t in block.transactions] == [good.tx_id]

    def test_forged_signature_excluded(self, net):
        good = net.sign(net.admin, cmd.CreateNotice("N-1", "SZ-A", "cid:" + "a" * 64))
        forged = dataclasses.replace(
            net.sign(net.admin, cmd.BurnDrc(1), nonce=2), signature=bytes(64))
        block = produce_block([good, forged], "v1", None, net.state, "v1", 1)
        assert [t.tx_id for t in block.transactions] == [good.tx_id]


class TestValidatorSet:
    def test_quorum_arithmetic(self, net):
        assert net.validators.n == 4
        assert net.validators.f == 1
        assert net.validators.quorum == 3

    def test_single_node_set(self):
        solo = ValidatorSet((("v1", "00"),))
        assert (solo.f, solo.quorum) == (0, 1)

    def test_round_robin_rotation(self, net):
        order = [net.validators.proposer_for(h) for h in range(6)]
        assert order == ["v1", "v2", "v3", "v4", "v1", "v2"]
        assert net.validators.proposer_for(0, round_offset=2) == "v3"


class TestVoting:
    def block(self, net):
        return produce_block([], "v1", None, net.state, "v1", 1)

    def test_all_honest_commits_with_four_votes(self, net):
        result = collect_votes(self.block(net), net.validators, net.sims)
        assert result.committed and result.tally == 4

    def test_silent_validator_returns_nothing(self, net):
        sim = ValidatorSim("v2", net.vkeys[1], POLICY_SILENT)
        assert sim.vote(self.block(net)) == []

    def test_equivocator_signs_two_rival_hashes(self, net):
        sim = ValidatorSim("v2", net.vkeys[1], POLICY_EQUIVOCATE)
        votes = sim.vote(self.block(net))
        assert len(votes) == 2
        assert votes[0].block_hash != votes[1].block_hash

    def test_only_matching_equivocation_vote_counts(self, net):
        block = self.block(net)
        sim = ValidatorSim("v2", net.vkeys[1], POLICY_EQUIVOCATE)
        good = valid_votes(sim.vote(block), block.hash_hex(), net.validators)
        assert len(good) == 1

    def test_one_silent_still_commits(self, tmp_path):
        net = Net(tmp_path, policies={"v2": "silent"})
        result = collect_votes(produce_block([], "v1", None, net.state, "v1", 1),
                               net.validators, net.sims)
        assert result.committed and result.tally == 3

    def test_two_silent_misses_quorum(self, tmp_path):
        net = Net(tmp_path, policies={"v2": "silent", "v3": "silent"})
        result = collect_votes(produce_block([], "v1", None, net.state, "v1", 1),
                               net.validators, net.sims)
        assert not result.committed and result.tally == 2
        assert result.status == "NotCommitted"

    def test_duplicate_votes_count_once(self, net):
        block = self.block(net)
        votes = net.sims[0].vote(block) * 3
        assert len(valid_votes(votes, block.hash_hex(), net.validators)) == 1


class TestApplyBlock:
    def test_quorum_required(self, net):
        block = produce_block([], "v1", None, net.state, "v1", 1)
        result = collect_votes(block, net.validators, net.sims)
        block.commit_votes = result.votes[:2]
        with pytest.raises(RegistryError) as caught:
            apply_block(net.state, block, net.validators)
        assert caught.value.code == "NotCommitted"

    def test_must_extend_head(self, net):
        block, _ = net.mine()
        with pytest.raises(RegistryError) as caught:
            apply_block(net.state, block, net.validators)
        assert caught.value.code == "WrongParent"

    def test_failed_command_consumes_nonce_and_block_commits(self, net):
        citizen = net.bind_citizen()
        net.submit(citizen, cmd.CreateNotice("N-1", "SZ-A", "cid:" + "a" * 64))
        _, receipts = net.mine()
        assert receipts[0]["status"] == "failed"
        assert receipts[0]["error"] == "NotAdmin"
        assert net.state.registry.next_nonce(citizen.address) == 2
        follow = net.submit(citizen, cmd.TransferToken(citizen.address,
                                                       net.admin.address, 1))
        assert follow.nonce == 2

    def test_mixed_block_applies_every_receipt(self, net):
        citizen = net.bind_citizen()
        net.submit(citizen, cmd.CreateNotice("N-X", "SZ-A", "cid:" + "a" * 64))
        net.submit(net.admin, cmd.CreateNotice("N-1", "SZ-A", "cid:" + "a" * 64))
        _, receipts = net.mine()
        statuses = {r["status"] for r in receipts}
        assert statuses == {"failed", "applied"}


class TestVerifyChain:
    def build_chain(self, net, blocks=4):
        net.submit(net.admin, cmd.CreateNotice("N-1", "SZ-A", "cid:" + "a" * 64))
        net.mine()
        for i in range(blocks - 1):
            net.submit(net.admin, cmd.CreateNotice(f"N-{i + 2}", "SZ-A", "cid:" + "a" * 64))
            net.mine()
        return net.lines

    def test_clean_chain_replays_to_live_digest(self, net):
        lines = self.build_chain(net)
        state, violation = verify_chain(lines, net.params, net.validators, net.docstore)
        assert violation is None
        assert state.state_digest() == net.state.state_digest()

    def test_byte_flip_detected(self, net):
        lines = self.build_chain(net)
        line = bytearray(lines[2])
        line[40] ^= 0x01
        lines[2] = bytes(line)
        state, violation = verify_chain(lines, net.params, net.validators, net.docstore)
        assert state is None
        assert violation is not None and violation.height <= 2

    def test_swapped_blocks_detected(self, net):
        lines = self.build_chain(net)
        lines[1], lines[2] = lines[2], lines[1]
        _, violation = verify_chain(lines, net.params, net.validators, net.docstore)
        assert violation.height == 1
        assert violation.code == "BrokenLink"

    def test_truncating_votes_breaks_quorum(self, net):
        lines = self.build_chain(net)
        record = loads_canonical(lines[3])
        record["commit_votes"] = record["commit_votes"][:2]
        lines[3] = canonicalize(record)
        _, violation = verify_chain(lines, net.params, net.validators, net.docstore)
        assert violation.height == 3
        assert violation.code == "BadQuorum"

    def test_duplicated_vote_detected(self, net):
        lines = self.build_chain(net)
        record = loads_canonical(lines[3])
        record["commit_votes"] = record["commit_votes"][:3]
        record["commit_votes"].append(record["commit_votes"][0])
        lines[3] = canonicalize(record)
        _, violation = verify_chain(lines, net.params, net.validators, net.docstore)
        assert violation.height == 3
        assert violation.code == "BadQuorum"

    def test_vote_reassigned_to_other_validator_detected(self, net):
        lines = self.build_chain(net)
        record = loads_canonical(lines[3])
        present = {v["validator_id"] for v in record["commit_votes"]}
        missing = ({"v1", "v2", "v3", "v4"} - present).pop() if len(present) < 4 else None
        if missing is None:
            record["commit_votes"] = record["commit_votes"][:3]
            missing = ({"v1", "v2", "v3", "v4"}
                       - {v["validator_id"] for v in record["commit_votes"]}).pop()
        record["commit_votes"][0]["validator_id"] = missing
        lines[3] = canonicalize(record)
        _, violation = verify_chain(lines, net.params, net.validators, net.docstore)
        assert violation.height == 3
        assert violation.code == "BadQuorum"

    def test_equivocating_validator_leaves_clean_chain(self, tmp_path):
        net = Net(tmp_path, policies={"v4": "equivocate"})
        lines = self.build_chain(net)
        _, violation = verify_chain(lines, net.params, net.validators, net.docstore)
        assert violation is None

    def test_digest_moves_with_every_block(self, net):
        digests = {net.state.state_digest()}
        self.build_chain(net)
        digests.add(net.state.state_digest())
        net.submit(net.admin, cmd.CreateNotice("N-99", "SZ-A", "cid:" + "a" * 64))
        net.mine()
        digests.add(net.state.state_digest())
        assert len(digests) == 3
