"""Shared drivers for the test suite: deterministic clocks, citizen
onboarding shortcuts, and outbox scraping."""

from __future__ import annotations

import itertools
import random
import re

from tdrledger import commands as cmd
from tdrledger import verhoeff
from tdrledger.config import Config
from tdrledger.engine import Engine, init_store

ADMIN_PW = "admin-secret-1"
CITIZEN_PW = "citizen-pass-1"


def make_clock(start: int = 1_700_000_000):
    counter = itertools.count(start)
    return lambda: next(counter)


def national_id(i: int) -> str:
    body = f"{i:011d}"
    return body + verhoeff.check_digit(body)


def light_config(tmp_path, **overrides) -> Config:
    values = {
        "data_dir": str(tmp_path / "store"),
        "scrypt_n": 256,
        "admin_password": ADMIN_PW,
        "rng_seed": "1234",
        "block_interval_seconds": 0,
    }
    values.update(overrides)
    return Config(**values).validate()


def fresh_engine(tmp_path, **overrides) -> Engine:
    config = light_config(tmp_path, **overrides)
    init_store(config, clock=make_clock(), rng=random.Random(99))
    return Engine(config, clock=make_clock(1_700_500_000), rng=random.Random(100))


def otp_for(engine: Engine, challenge_id: str) -> str:
    """Reads the one-time code for a challenge out of the notification log."""
    for entry in reversed(engine.outbox.entries()):
        match = re.search(rf"code (\d{{6}}) for request {challenge_id}", entry["body"])
        if match:
            return match.group(1)
    raise AssertionError(f"no code delivered for challenge {challenge_id}")


def register_citizen(engine: Engine, serial: int, details: dict | None = None,
                     password: str = CITIZEN_PW) -> dict:
    """register + eKYC; leaves the user PENDING_ADMIN."""
    reg = engine.identity.register(details or {"name": f"citizen {serial}"},
                                   national_id(serial))
    otp = otp_for(engine, reg["challenge_id"])
    return engine.identity.complete_ekyc(reg["challenge_id"], otp, password)


def activate_citizen(engine: Engine, serial: int, details: dict | None = None,
                     password: str = CITIZEN_PW) -> dict:
    """Full onboarding: returns the ACTIVE user record (with address)."""
    user = register_citizen(engine, serial, details, password)
    engine.approve_user("admin", ADMIN_PW, user["user_id"])
    engine.mine()
    return engine.identity.get_user(user["user_id"])


def grant_officer(engine: Engine, address: str, department: str) -> None:
    engine.submit("admin", ADMIN_PW,
                  cmd.GrantRole(subject=address, role="OFFICER",
                                sub_department=department))
    engine.mine()


def make_admin_officer(engine: Engine) -> str:
    """Grants the bootstrap admin an OFFICER role in every department."""
    address = engine.genesis["admin"]["address"]
    for department in engine.genesis["departments"]:
        grant_officer(engine, address, department)
    return address


def applied(engine: Engine, pending: dict) -> dict:
    """Mines and returns the receipt for a just-submitted transaction."""
    engine.mine()
    receipt = engine.state.registry.receipts[pending["tx_id"]]
    assert receipt["status"] == "applied", receipt
    return receipt
