"""Single-process node: wires the ledger, registry state and identity plane.

The on-chain side (blocks, registry) is rebuilt from chain.log on every open,
so the block file is the only source of truth for ledger state. Off-chain
stores (users, vault, documents, outbox) persist as their own files and are
reconciled against committed receipts through post-commit hooks.
"""

from __future__ import annotations

import json
import os
import random
import threading
import time
from typing import Callable, Optional

from . import commands as cmd
from .canonical import loads_canonical
from .config import Config
from .crypto import KdfParams, KeyPair, generate_keypair
from .docstore import DocStore
from .errors import err
from .identity import EkycProvider, IdentityService, Outbox, Vault
from .ledger import (
    Block,
    ChainState,
    TransactionPool,
    ValidatorSet,
    ValidatorSim,
    apply_block,
    collect_votes,
    produce_block,
    sign_transaction,
    verify_chain,
)
from .state import RegistryState

GENESIS_FILE = "genesis.json"
CHAIN_FILE = "chain.log"
USERS_FILE = "users.json"
VAULT_FILE = "vault.json"
VALIDATORS_FILE = "validators.json"
OUTBOX_FILE = "outbox.jsonl"
EKYC_FILE = "ekyc.json"
DOCS_DIR = "docs"


def default_clock() -> int:
    return int(time.time())


def _rng_for(config: Config):
    seed = config.seed_value()
    return random.Random(seed) if seed is not None else random.SystemRandom()


def init_store(config: Config, clock: Optional[Callable[[], int]] = None,
               rng=None) -> dict:
    """Creates the data directory, bootstrap admin, validator keys and genesis
    parameters. Refuses to touch a directory that already holds a chain."""
    clock = clock or default_clock
    rng = rng if rng is not None else _rng_for(config)
    data_dir = config.data_dir
    genesis_path = os.path.join(data_dir, GENESIS_FILE)
    if os.path.exists(genesis_path):
        raise err("AlreadyInitialized", f"{genesis_path} already exists")
    os.makedirs(data_dir, exist_ok=True)
    os.makedirs(os.path.join(data_dir, DOCS_DIR), exist_ok=True)

    if len(config.admin_password) < config.min_password_len:
        raise err("WeakPassword",
                  f"admin password must be at least {config.min_password_len} characters")

    kdf = KdfParams(n=config.scrypt_n, r=config.scrypt_r, p=config.scrypt_p)
    outbox = Outbox(os.path.join(data_dir, OUTBOX_FILE), clock)
    vault = Vault(os.path.join(data_dir, VAULT_FILE))
    chain_id = rng.randbytes(8).hex()
    provider = EkycProvider(key=chain_id, path=os.path.join(data_dir, EKYC_FILE))
    identity = IdentityService(
        os.path.join(data_dir, USERS_FILE), vault, provider, outbox, clock, rng,
        kdf=kdf, otp_ttl=config.otp_ttl_seconds, min_password_len=config.min_password_len)
    admin = identity.create_admin(config.admin_user_id, config.admin_password,
                                  {"role": "registry administrator"})

    seeds: dict[str, str] = {}
    validators: list[list[str]] = []
    for i in range(config.validator_count):
        vid = f"v{i + 1}"
        keypair = generate_keypair(rng)
        seeds[vid] = keypair.seed.hex()
        validators.append([vid, keypair.public_hex])

    with open(os.path.join(data_dir, VALIDATORS_FILE), "w", encoding="utf-8") as fh:
        json.dump({"seeds": seeds}, fh, indent=1, sort_keys=True)

    genesis = {
        "chain_id": chain_id,
        "created_at": clock(),
        "departments": list(config.departments),
        "sending_zones": list(config.sending_zones),
        "receiving_zones": list(config.receiving_zones),
        "application_prefix": config.application_prefix,
        "admin": {
            "user_id": admin["user_id"],
            "address": admin["address"],
            "public_key": admin["public_key"],
        },
        "validators": validators,
    }
    with open(genesis_path, "w", encoding="utf-8") as fh:
        json.dump(genesis, fh, indent=1, sort_keys=True)
    open(os.path.join(data_dir, CHAIN_FILE), "a", encoding="utf-8").close()
    return genesis


class Engine:
    """One opened node over a data directory."""

    def __init__(self, config: Config, clock: Optional[Callable[[], int]] = None,
                 rng=None):
        self.config = config
        self.clock = clock or default_clock
        self.rng = rng if rng is not None else _rng_for(config)
        data_dir = config.data_dir
        genesis_path = os.path.join(data_dir, GENESIS_FILE)
        if not os.path.exists(genesis_path):
            raise err("NotInitialized", f"no store at {data_dir}; run init first")
        with open(genesis_path, encoding="utf-8") as fh:
            self.genesis = json.load(fh)

        self.chain_path = os.path.join(data_dir, CHAIN_FILE)
        self.docstore = DocStore(os.path.join(data_dir, DOCS_DIR))
        self.outbox = Outbox(os.path.join(data_dir, OUTBOX_FILE), self.clock)
        self.vault = Vault(os.path.join(data_dir, VAULT_FILE))
        provider = EkycProvider(
            key=self.genesis["chain_id"],
            path=os.path.join(data_dir, EKYC_FILE))
        if config.ekyc_profiles:
            with open(config.ekyc_profiles, encoding="utf-8") as fh:
                for national_id, profile in json.load(fh).items():
                    provider.seed_profile(national_id, profile)
        self.identity = IdentityService(
            os.path.join(data_dir, USERS_FILE), self.vault, provider, self.outbox,
            self.clock, self.rng,
            kdf=KdfParams(n=config.scrypt_n, r=config.scrypt_r, p=config.scrypt_p),
            otp_ttl=config.otp_ttl_seconds,
            min_password_len=config.min_password_len)

        self.validator_set = ValidatorSet(tuple(
            (vid, key) for vid, key in self.genesis["validators"]))
        with open(os.path.join(data_dir, VALIDATORS_FILE), encoding="utf-8") as fh:
            seeds = json.load(fh)["seeds"]
        policies = config.policy_map()
        self.validators = [
            ValidatorSim(vid, KeyPair(bytes.fromhex(seeds[vid])),
                         policies.get(vid, "honest"))
            for vid, _ in self.genesis["validators"]
        ]

        self._lock = threading.RLock()
        self.pool = TransactionPool()
        self.state = ChainState(RegistryState(self.genesis_params(), self.docstore))
        self.head_block: Optional[Block] = None
        self._replay()
        if self.head_block is None:
            # a fresh store starts at height 0 with an empty, voted block
            self.mine(allow_empty=True)

    # -- store plumbing -------------------------------------------------

    def genesis_params(self) -> dict:
        return {
            "departments": self.genesis["departments"],
            "sending_zones": self.genesis["sending_zones"],
            "receiving_zones": self.genesis["receiving_zones"],
            "application_prefix": self.genesis["application_prefix"],
            "admin": self.genesis["admin"],
        }

    def chain_lines(self) -> list[bytes]:
        if not os.path.exists(self.chain_path):
            return []
        with open(self.chain_path, "rb") as fh:
            return [line.rstrip(b"\n") for line in fh if line.strip()]

    def _replay(self) -> None:
        lines = self.chain_lines()
        state, violation = verify_chain(lines, self.genesis_params(),
                                        self.validator_set, self.docstore)
        if violation is not None:
            raise err("StoreCorrupt",
                      f"block {violation.height}: {violation.code}: {violation.detail}")
        self.state = state
        if lines:
            self.head_block = Block.from_record(loads_canonical(lines[-1]))
        else:
            self.head_block = None

    def _append_block(self, block: Block) -> None:
        with open(self.chain_path, "ab") as fh:
            fh.write(block.to_line() + b"\n")
            fh.flush()
            os.fsync(fh.fileno())

    # -- transaction intake ----------------------------------------------

    def signer_for(self, user_id: str, password: str) -> KeyPair:
        keypair, user = self.identity.get_signer(user_id, password)
        if user.get("address") != keypair.address:
            raise err("RecoveryPending",
                      f"key for {user_id} awaits an ownership rebind on chain")
        return keypair

    def submit(self, user_id: str, password: str, command: cmd.Command) -> dict:
        """Signs and enqueues one command; returns the pending tx envelope."""
        with self._lock:
            keypair = self.signer_for(user_id, password)
            sender = keypair.address
            nonce = self.state.registry.next_nonce(sender) + sum(
                1 for t in self.pool.pending.values() if t.sender == sender)
            tx = sign_transaction(keypair, nonce, command, self.clock())
            self.pool.add(tx, self.state)
            return {"tx_id": tx.tx_id, "sender": sender, "nonce": nonce,
                    "kind": command.kind, "status": "pending"}

    def submit_admin(self, password: str, command: cmd.Command) -> dict:
        return self.submit(self.genesis["admin"]["user_id"], password, command)

    def submit_and_mine(self, user_id: str, password: str, command: cmd.Command) -> dict:
        """CLI path: one command becomes its own committed block."""
        pending = self.submit(user_id, password, command)
        mined = self.mine()
        receipt = self.state.registry.receipts.get(pending["tx_id"])
        return {"tx_id": pending["tx_id"], "block": {
            "height": mined["height"], "block_hash": mined["block_hash"]},
            "receipt": receipt}

    # -- block production --------------------------------------------------

    def mine(self, allow_empty: bool = False) -> dict:
        """Runs propose+vote rounds until a block commits, applies it, then
        reconciles off-chain stores from the receipts."""
        with self._lock:
            self.pool.prune_stale(self.state)
            if not self.pool.pending and not allow_empty:
                return {"status": "Empty", "height": self.state.head_height}
            height = self.state.head_height + 1
            sims = {sim.validator_id: sim for sim in self.validators}
            attempts = []
            for round_offset in range(self.validator_set.n):
                proposer = self.validator_set.proposer_for(height, round_offset)
                block = produce_block(
                    self.pool.ordered(), proposer, self.head_block, self.state,
                    proposer, self.clock())
                commit = collect_votes(block, self.validator_set, [
                    sims[vid] for vid, _ in self.genesis["validators"]])
                attempts.append({"round": round_offset, "proposer": proposer,
                                 "status": commit.status, "tally": commit.tally})
                if not commit.committed:
                    continue
                block.commit_votes = commit.votes
                receipts = apply_block(self.state, block, self.validator_set)
                self._append_block(block)
                self.head_block = block
                self.pool.remove([tx.tx_id for tx in block.transactions])
                self.pool.prune_stale(self.state)
                self._post_commit(block, receipts)
                return {
                    "status": "Committed",
                    "height": block.height,
                    "block_hash": block.hash_hex(),
                    "proposer": proposer,
                    "round": round_offset,
                    "votes": commit.tally,
                    "quorum": commit.quorum,
                    "tx_count": len(block.transactions),
                    "receipts": receipts,
                    "attempts": attempts,
                }
            raise err("NotCommitted",
                      f"no proposal reached quorum after {self.validator_set.n} rounds")

    def _post_commit(self, block: Block, receipts: list[dict]) -> None:
        """Mirrors committed results into the off-chain identity plane."""
        by_tx = {tx.tx_id: tx for tx in block.transactions}
        for receipt in receipts:
            if receipt["status"] != "applied":
                continue
            command = by_tx[receipt["tx_id"]].command
            if isinstance(command, cmd.BindAccount):
                self.identity.mark_active(command.user_id, block.height)
            elif isinstance(command, cmd.RecoverAccount):
                self.identity.apply_recovery(command.user_id, command.new_address)
                self.identity.notify(command.user_id, "account recovered",
                                     f"holdings now follow address {command.new_address}")
            elif isinstance(command, cmd.IssueDrc):
                user_id = self.identity_user_for(receipt["result"]["owner"])
                if user_id is not None:
                    self.identity.notify(
                        user_id, "certificate issued",
                        f"token {receipt['result']['token_id']} covers application "
                        f"{command.application_id}")
            elif isinstance(command, cmd.VerifyStep) and command.decision != "APPROVE":
                app = self.state.registry.applications.get(command.application_id)
                user_id = self.identity_user_for(app["applicant"])
                if user_id is not None:
                    self.identity.notify(
                        user_id, f"application {command.application_id} update",
                        f"decision {command.decision}: {command.remarks}")

    def identity_user_for(self, address: str) -> Optional[str]:
        return self.state.registry.accounts.user_of(address)

    # -- onboarding conveniences ------------------------------------------

    def approve_user(self, caller_id: str, password: str, user_id: str) -> dict:
        """An admin accepts a KYC-complete registration: binds it on chain."""
        user = self.identity.require_pending_admin(user_id)
        command = cmd.BindAccount(user_id=user_id, address=user["address"],
                                  public_key=user["public_key"])
        return self.submit(caller_id, password, command)

    def recover_user(self, caller_id: str, password: str, user_id: str) -> dict:
        recovery = self.identity.pending_recovery(user_id)
        if recovery is None:
            raise err("NoRecovery", f"no validated reset is waiting for {user_id}")
        command = cmd.RecoverAccount(user_id=user_id,
                                     new_address=recovery["new_address"],
                                     new_public_key=recovery["new_public_key"])
        return self.submit(caller_id, password, command)

    # -- queries ------------------------------------------------------------

    def height(self) -> int:
        return self.state.head_height

    def block_at(self, height: int) -> dict:
        lines = self.chain_lines()
        if height < 0 or height >= len(lines):
            raise err("NotFound", f"no block at height {height}")
        return Block.from_record(loads_canonical(lines[height])).to_record()

    def receipt_of(self, tx_id: str) -> dict:
        receipt = self.state.registry.receipts.get(tx_id)
        if receipt is None:
            if tx_id in self.pool.pending:
                return {"tx_id": tx_id, "status": "pending"}
            raise err("NotFound", f"no receipt for {tx_id}")
        return receipt

    def verify(self) -> dict:
        lines = self.chain_lines()
        state, violation = verify_chain(lines, self.genesis_params(),
                                        self.validator_set, self.docstore)
        report = {"blocks": len(lines), "ok": violation is None}
        if violation is not None:
            report["violation"] = {"height": violation.height, "code": violation.code,
                                   "detail": violation.detail}
        else:
            report["state_digest"] = state.state_digest()
            report["live_digest"] = self.state.state_digest()
            report["ok"] = report["state_digest"] == report["live_digest"]
        return report

    def state_digest(self) -> str:
        return self.state.state_digest()
