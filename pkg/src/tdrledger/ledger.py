"""Append-only, hash-chained block log with vote-quorum commits.

A fixed validator set (default 4, tolerating f = floor((n-1)/3) faults)
takes turns proposing blocks round-robin.  A block commits once 2f+1
distinct validators sign its hash; committed transactions are applied to
the registry state machine in block order.  Consensus is a single
propose+vote round per height - a proposal that misses quorum is reported
NotCommitted and re-proposed by the next validator in rotation.

Chain persistence is one newline-delimited file: each line the canonical
serialization of a block (hex digests, base64 signatures), so any byte
flip anywhere is caught by verify_chain.
"""

from __future__ import annotations

import base64
from dataclasses import dataclass, field

from . import commands as cmd
from .canonical import ZERO_DIGEST, canonicalize, length_prefixed, loads_canonical, sha256_hex
from .crypto import KeyPair, verify_signature
from .errors import err
from .state import RegistryState

POLICY_HONEST = "honest"
POLICY_SILENT = "silent"
POLICY_EQUIVOCATE = "equivocate"
POLICIES = (POLICY_HONEST, POLICY_SILENT, POLICY_EQUIVOCATE)


# -- transactions ------------------------------------------------------------

def transaction_payload(sender: str, nonce: int, command: cmd.Command,
                        timestamp: int) -> bytes:
    return length_prefixed(
        sender.encode(),
        str(nonce).encode(),
        canonicalize(command.to_payload()),
        str(timestamp).encode(),
    )


@dataclass(frozen=True)
class SignedTransaction:
    sender: str
    nonce: int
    command: cmd.Command
    timestamp: int
    signature: bytes
    tx_id: str

    def payload(self) -> bytes:
        return transaction_payload(self.sender, self.nonce, self.command, self.timestamp)

    def to_record(self) -> dict:
        return {
            "tx_id": self.tx_id,
            "sender": self.sender,
            "nonce": self.nonce,
            "command": self.command.to_payload(),
            "signature": base64.b64encode(self.signature).decode("ascii"),
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_record(cls, record: dict) -> "SignedTransaction":
        return cls(
            sender=record["sender"],
            nonce=record["nonce"],
            command=cmd.from_payload(record["command"]),
            timestamp=record["timestamp"],
            signature=base64.b64decode(record["signature"]),
            tx_id=record["tx_id"],
        )


def sign_transaction(keypair: KeyPair, nonce: int, command: cmd.Command,
                     timestamp: int) -> SignedTransaction:
    sender = keypair.address
    payload = transaction_payload(sender, nonce, command, timestamp)
    return SignedTransaction(
        sender=sender,
        nonce=nonce,
        command=command,
        timestamp=timestamp,
        signature=keypair.sign(payload),
        tx_id=sha256_hex(payload),
    )


# -- blocks -------------------------------------------------------------------

@dataclass(frozen=True)
class Vote:
    validator_id: str
    signature: bytes
    block_hash: str


def tx_root_of(transactions: list[SignedTransaction]) -> str:
    return sha256_hex(b"".join(bytes.fromhex(tx.tx_id) for tx in transactions))


@dataclass
class Block:
    height: int
    parent_hash: str
    tx_root: str
    transactions: list[SignedTransaction]
    proposer: str
    timestamp: int
    commit_votes: list[Vote] = field(default_factory=list)

    def hash_hex(self) -> str:
        return sha256_hex(length_prefixed(
            str(self.height).encode(),
            bytes.fromhex(self.parent_hash),
            bytes.fromhex(self.tx_root),
            self.proposer.encode(),
            str(self.timestamp).encode(),
        ))

    def to_record(self) -> dict:
        return {
            "height": self.height,
            "parent_hash": self.parent_hash,
            "tx_root": self.tx_root,
            "proposer": self.proposer,
            "timestamp": self.timestamp,
            "transactions": [tx.to_record() for tx in self.transactions],
            "commit_votes": [
                {"validator_id": v.validator_id,
                 "signature": base64.b64encode(v.signature).decode("ascii")}
                for v in sorted(self.commit_votes, key=lambda v: v.validator_id)
            ],
        }

    def to_line(self) -> bytes:
        return canonicalize(self.to_record())

    @classmethod
    def from_record(cls, record: dict) -> "Block":
        block = cls(
            height=record["height"],
            parent_hash=record["parent_hash"],
            tx_root=record["tx_root"],
            transactions=[SignedTransaction.from_record(t) for t in record["transactions"]],
            proposer=record["proposer"],
            timestamp=record["timestamp"],
        )
        block.commit_votes = [
            Vote(validator_id=v["validator_id"],
                 signature=base64.b64decode(v["signature"]),
                 block_hash=block.hash_hex())
            for v in record["commit_votes"]
        ]
        return block


# -- validators ----------------------------------------------------------------

@dataclass(frozen=True)
class ValidatorSet:
    validators: tuple  # of (validator_id, public_key_hex)

    @property
    def n(self) -> int:
        return len(self.validators)

    @property
    def f(self) -> int:
        return (self.n - 1) // 3

    @property
    def quorum(self) -> int:
        return 2 * self.f + 1

    def proposer_for(self, height: int, round_offset: int = 0) -> str:
        return self.validators[(height + round_offset) % self.n][0]

    def public_key(self, validator_id: str) -> str | None:
        for vid, key in self.validators:
            if vid == validator_id:
                return key
        return None


class ValidatorSim:
    """In-process validator: signs block hashes according to its policy."""

    def __init__(self, validator_id: str, keypair: KeyPair, policy: str = POLICY_HONEST):
        if policy not in POLICIES:
            raise err("ConfigInvalid", f"unknown validator policy {policy!r}")
        self.validator_id = validator_id
        self.keypair = keypair
        self.policy = policy

    def vote(self, block: Block) -> list[Vote]:
        if self.policy == POLICY_SILENT:
            return []
        block_hash = block.hash_hex()
        votes = [Vote(self.validator_id, self.keypair.sign(bytes.fromhex(block_hash)),
                      block_hash)]
        if self.policy == POLICY_EQUIVOCATE:
            rival = replace_timestamp(block, block.timestamp + 1)
            rival_hash = rival.hash_hex()
            votes.append(Vote(self.validator_id,
                              self.keypair.sign(bytes.fromhex(rival_hash)), rival_hash))
        return votes


def replace_timestamp(block: Block, timestamp: int) -> Block:
    return Block(
        height=block.height,
        parent_hash=block.parent_hash,
        tx_root=block.tx_root,
        transactions=list(block.transactions),
        proposer=block.proposer,
        timestamp=timestamp,
    )


# -- chain state -----------------------------------------------------------------

class ChainState:
    def __init__(self, registry: RegistryState):
        self.registry = registry
        self.head_height = -1
        self.head_hash = ZERO_DIGEST

    def state_digest(self) -> str:
        return sha256_hex(canonicalize({
            "head_height": self.head_height,
            "head_hash": self.head_hash,
            "registry": self.registry.snapshot(),
        }))


# -- pending pool -------------------------------------------------------------------

class TransactionPool:
    def __init__(self):
        self.pending: dict[str, SignedTransaction] = {}

    def add(self, tx: SignedTransaction, state: ChainState) -> str:
        registry = state.registry
        public_key = registry.accounts.public_key(tx.sender)
        if public_key is None or not registry.accounts.is_active(tx.sender):
            raise err("UnknownSender", f"{tx.sender} is not an active account")
        payload = tx.payload()
        if tx.tx_id != sha256_hex(payload) or not verify_signature(
                public_key, payload, tx.signature):
            raise err("BadSignature", f"tx {tx.tx_id} signature invalid")
        if tx.tx_id in self.pending or tx.tx_id in registry.receipts:
            raise err("DuplicateTx", f"tx {tx.tx_id} already submitted")
        expected = registry.next_nonce(tx.sender) + sum(
            1 for p in self.pending.values() if p.sender == tx.sender)
        if tx.nonce != expected:
            raise err("NonceGap", f"nonce {tx.nonce}, expected {expected}")
        self.pending[tx.tx_id] = tx
        return tx.tx_id

    def ordered(self) -> list[SignedTransaction]:
        return sorted(self.pending.values(),
                      key=lambda t: (t.sender, t.nonce, t.timestamp, t.tx_id))

    def remove(self, tx_ids):
        for tx_id in tx_ids:
            self.pending.pop(tx_id, None)

    def prune_stale(self, state: ChainState):
        stale = [t.tx_id for t in self.pending.values()
                 if t.nonce <= state.registry.account_nonces.get(t.sender, 0)]
        self.remove(stale)

    def __len__(self):
        return len(self.pending)


# -- block production, voting, application ---------------------------------------------

def produce_block(pending: list[SignedTransaction], proposer: str, parent: Block | None,
                  state: ChainState, expected_proposer: str, timestamp: int) -> Block:
    """Builds an uncommitted block from the valid prefix of the pending pool.
    Invalid pending transactions (stale nonce, bad signature) are excluded,
    never aborted on."""
    if proposer != expected_proposer:
        raise err("WrongProposer", f"{proposer} proposed, expected {expected_proposer}")
    height = 0 if parent is None else parent.height + 1
    parent_hash = ZERO_DIGEST if parent is None else parent.hash_hex()
    registry = state.registry
    next_nonces: dict[str, int] = {}
    included: list[SignedTransaction] = []
    ordered = sorted(pending, key=lambda t: (t.sender, t.nonce, t.timestamp, t.tx_id))
    for tx in ordered:
        expected = next_nonces.get(tx.sender, registry.next_nonce(tx.sender))
        if tx.nonce != expected:
            continue
        public_key = registry.accounts.public_key(tx.sender)
        if public_key is None or not verify_signature(public_key, tx.payload(), tx.signature):
            continue
        included.append(tx)
        next_nonces[tx.sender] = expected + 1
    return Block(
        height=height,
        parent_hash=parent_hash,
        tx_root=tx_root_of(included),
        transactions=included,
        proposer=proposer,
        timestamp=timestamp,
    )


@dataclass
class CommitResult:
    committed: bool
    votes: list[Vote]
    tally: int
    quorum: int

    @property
    def status(self) -> str:
        return "Committed" if self.committed else "NotCommitted"


def valid_votes(votes, block_hash: str, validators: ValidatorSet) -> list[Vote]:
    seen = set()
    good = []
    for vote in votes:
        if vote.validator_id in seen:
            continue
        key = validators.public_key(vote.validator_id)
        if key is None or vote.block_hash != block_hash:
            continue
        if not verify_signature(key, bytes.fromhex(block_hash), vote.signature):
            continue
        seen.add(vote.validator_id)
        good.append(vote)
    return good


def collect_votes(block: Block, validators: ValidatorSet,
                  sims: list[ValidatorSim]) -> CommitResult:
    block_hash = block.hash_hex()
    cast = []
    for sim in sims:
        cast.extend(sim.vote(block))
    good = valid_votes(cast, block_hash, validators)
    committed = len(good) >= validators.quorum
    return CommitResult(committed=committed, votes=good, tally=len(good),
                        quorum=validators.quorum)


def apply_block(state: ChainState, block: Block, validators: ValidatorSet) -> list[dict]:
    """Applies a committed block to the chain state; every transaction gets a
    receipt and advances its sender's nonce even when its command fails."""
    block_hash = block.hash_hex()
    if len(valid_votes(block.commit_votes, block_hash, validators)) < validators.quorum:
        raise err("NotCommitted", f"block {block.height} lacks quorum votes")
    if block.parent_hash != state.head_hash or block.height != state.head_height + 1:
        raise err("WrongParent",
                  f"block {block.height} does not extend head {state.head_height}")
    receipts = []
    for index, tx in enumerate(block.transactions):
        receipts.append(state.registry.apply_transaction(tx, block.height, index))
    state.head_height = block.height
    state.head_hash = block_hash
    return receipts


# -- full-chain verification ------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    height: int
    code: str
    detail: str


def verify_chain(lines: list[bytes], genesis_params: dict, validators: ValidatorSet,
                 docstore) -> tuple[ChainState | None, Violation | None]:
    """Checks hash linkage, quorum signatures, transaction signatures and
    deterministic replay.  Returns (state, None) when clean, else
    (None, first violation)."""
    state = ChainState(RegistryState(genesis_params, docstore))
    for i, line in enumerate(lines):
        try:
            record = loads_canonical(line)
            block = Block.from_record(record)
        except Exception as broken:
            return None, Violation(i, "BrokenLink", f"unreadable block record: {broken}")
        try:
            if block.height != i:
                return None, Violation(i, "BrokenLink",
                                       f"height {block.height} at position {i}")
            if block.parent_hash != state.head_hash:
                return None, Violation(i, "BrokenLink", "parent hash does not match head")
            if block.tx_root != tx_root_of(block.transactions):
                return None, Violation(i, "BrokenLink", "tx_root mismatch")
            block_hash = block.hash_hex()
            votes = block.commit_votes
            distinct = {v.validator_id for v in votes}
            if (len(valid_votes(votes, block_hash, validators)) != len(votes)
                    or len(distinct) != len(votes)):
                return None, Violation(i, "BadQuorum", "invalid or duplicate commit vote")
            if len(votes) < validators.quorum:
                return None, Violation(i, "BadQuorum",
                                       f"{len(votes)} votes < quorum {validators.quorum}")
            for index, tx in enumerate(block.transactions):
                payload = tx.payload()
                if tx.tx_id != sha256_hex(payload):
                    return None, Violation(i, "BadTxSignature",
                                           f"tx id mismatch for {tx.tx_id}")
                public_key = state.registry.accounts.public_key(tx.sender)
                if public_key is None:
                    return None, Violation(i, "ReplayMismatch",
                                           f"unknown sender {tx.sender}")
                if not verify_signature(public_key, payload, tx.signature):
                    return None, Violation(i, "BadTxSignature",
                                           f"signature invalid for {tx.tx_id}")
                if tx.nonce != state.registry.next_nonce(tx.sender):
                    return None, Violation(i, "ReplayMismatch",
                                           f"nonce out of sequence for {tx.tx_id}")
                state.registry.apply_transaction(tx, block.height, index)
        except Exception as broken:
            # corrupt field values (non-hex ids, wrong types) must surface as
            # a violation, never crash the auditor
            return None, Violation(i, "BrokenLink", f"malformed block record: {broken}")
        state.head_height = block.height
        state.head_hash = block_hash
    return state, None
