"""Off-chain identity plane: user store, key vault, mock eKYC, notifications.

Raw national ids live only inside the vault file (custodial store keyed by a
16-digit reference id). The user store and every on-chain record carry at most
a salted SHA-256 digest of the id, so serialized state can be scanned for
leaks. OTP delivery is simulated through an append-only outbox file.
"""

from __future__ import annotations

import json
import os
import threading
from typing import Callable, Optional

from . import verhoeff
from .canonical import length_prefixed, sha256_hex
from .crypto import KdfParams, KeyPair, decrypt_seed, encrypt_seed, generate_keypair
from .errors import err

STATUS_PENDING_KYC = "PENDING_KYC"
STATUS_PENDING_ADMIN = "PENDING_ADMIN"
STATUS_ACTIVE = "ACTIVE"
STATUS_REJECTED = "REJECTED"

_NID_DOMAIN = b"national-id"
_OTP_DOMAIN = b"otp"


def national_id_digest(national_id: str) -> str:
    """Stable digest stored in place of the raw id outside the vault."""
    return sha256_hex(length_prefixed(_NID_DOMAIN, national_id.encode()))


def _atomic_write(path: str, payload: dict) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
    os.replace(tmp, path)


class Outbox:
    """Append-only notification log standing in for SMS/email gateways."""

    def __init__(self, path: str, clock: Callable[[], int]):
        self.path = path
        self.clock = clock
        self._lock = threading.Lock()

    def send(self, channel: str, to: str, subject: str, body: str) -> dict:
        entry = {
            "at": self.clock(),
            "channel": channel,
            "to": to,
            "subject": subject,
            "body": body,
        }
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")
        return entry

    def entries(self) -> list[dict]:
        if not os.path.exists(self.path):
            return []
        with open(self.path, encoding="utf-8") as fh:
            return [json.loads(line) for line in fh if line.strip()]


class EkycProvider:
    """Deterministic stand-in for the national eKYC gateway.

    The gateway is an external service, so its in-flight challenges must
    outlive any one node process; given a path they persist on disk (the CLI
    opens a fresh process per command). OTPs are the first six decimal digits
    found in a keyed digest of the challenge id, so tests can read them from
    the outbox without any network.
    """

    def __init__(self, key: str = "ekyc-mock", path: Optional[str] = None):
        self.key = key
        self.path = path
        self.profiles: dict[str, dict] = {}
        self._serial = 0
        self._challenges: dict[str, str] = {}
        if path is not None and os.path.exists(path):
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
            self._serial = data.get("serial", 0)
            self._challenges = data.get("challenges", {})

    def _save(self) -> None:
        if self.path is not None:
            _atomic_write(self.path, {"serial": self._serial,
                                      "challenges": self._challenges})

    def seed_profile(self, national_id: str, profile: dict) -> None:
        self.profiles[national_id] = dict(profile)

    def start(self, national_id: str) -> tuple[str, str]:
        self._serial += 1
        challenge_id = sha256_hex(
            length_prefixed(self.key.encode(), str(self._serial).encode(), national_id.encode())
        )[:16]
        self._challenges[challenge_id] = national_id
        self._save()
        return challenge_id, self.otp_for(challenge_id)

    def otp_for(self, challenge_id: str) -> str:
        digest = sha256_hex(length_prefixed(_OTP_DOMAIN, self.key.encode(), challenge_id.encode()))
        digits = "".join(ch for ch in digest if ch.isdigit())
        return (digits + "000000")[:6]

    def resolve(self, challenge_id: str) -> tuple[Optional[str], Optional[dict]]:
        """Raw national id and registry profile behind a live challenge."""
        national_id = self._challenges.get(challenge_id)
        if national_id is None:
            return None, None
        return national_id, self.profiles.get(national_id)

    def drop(self, challenge_id: str) -> None:
        self._challenges.pop(challenge_id, None)
        self._save()


class Vault:
    """Custodial store: reference id -> encrypted signing seed + raw national id."""

    def __init__(self, path: str):
        self.path = path
        self._lock = threading.Lock()
        self._records: dict[str, dict] = {}
        if os.path.exists(path):
            with open(path, encoding="utf-8") as fh:
                self._records = json.load(fh).get("records", {})

    def _save(self) -> None:
        _atomic_write(self.path, {"records": self._records})

    def has(self, reference_id: str) -> bool:
        return reference_id in self._records

    def put(
        self,
        reference_id: str,
        national_id: str,
        keypair: KeyPair,
        password: str,
        kdf: KdfParams,
        rng,
        created_at: int,
    ) -> None:
        salt, box = encrypt_seed(keypair.seed, password, kdf, rng)
        record = {
            "national_id": national_id,
            "salt": salt.hex(),
            "box": box.hex(),
            "kdf": {"n": kdf.n, "r": kdf.r, "p": kdf.p},
            "address": keypair.address,
            "public_key": keypair.public_hex,
            "created_at": created_at,
        }
        with self._lock:
            self._records[reference_id] = record
            self._save()

    def open(self, reference_id: str, password: str) -> KeyPair:
        record = self._records.get(reference_id)
        if record is None:
            raise err("NoSuchUser", f"no vault record {reference_id}")
        kdf = KdfParams(**record["kdf"])
        seed = decrypt_seed(bytes.fromhex(record["box"]), password, bytes.fromhex(record["salt"]), kdf)
        return KeyPair(seed)

    def national_id_of(self, reference_id: str) -> str:
        record = self._records.get(reference_id)
        if record is None:
            raise err("NoSuchUser", f"no vault record {reference_id}")
        return record["national_id"]


class IdentityService:
    """Registration, eKYC completion, signing, and key recovery."""

    def __init__(
        self,
        store_path: str,
        vault: Vault,
        provider: EkycProvider,
        outbox: Outbox,
        clock: Callable[[], int],
        rng,
        kdf: KdfParams = KdfParams(),
        otp_ttl: int = 600,
        min_password_len: int = 8,
    ):
        self.store_path = store_path
        self.vault = vault
        self.provider = provider
        self.outbox = outbox
        self.clock = clock
        self.rng = rng
        self.kdf = kdf
        self.otp_ttl = otp_ttl
        self.min_password_len = min_password_len
        self._lock = threading.RLock()
        self._seq = 0
        self._users: dict[str, dict] = {}
        self._challenges: dict[str, dict] = {}
        self._recoveries: dict[str, dict] = {}
        if os.path.exists(store_path):
            with open(store_path, encoding="utf-8") as fh:
                data = json.load(fh)
            self._seq = data.get("seq", 0)
            self._users = data.get("users", {})
            self._challenges = data.get("challenges", {})
            self._recoveries = data.get("recoveries", {})

    def _save(self) -> None:
        _atomic_write(
            self.store_path,
            {
                "seq": self._seq,
                "users": self._users,
                "challenges": self._challenges,
                "recoveries": self._recoveries,
            },
        )

    # -- lookups ------------------------------------------------------

    def get_user(self, user_id: str) -> dict:
        user = self._users.get(user_id)
        if user is None:
            raise err("NoSuchUser", f"unknown user {user_id}")
        return user

    def list_users(self, status: Optional[str] = None) -> list[dict]:
        rows = sorted(self._users.values(), key=lambda u: u["user_id"])
        if status is not None:
            rows = [u for u in rows if u["status"] == status]
        return rows

    def user_view(self, user_id: str) -> dict:
        user = dict(self.get_user(user_id))
        user.pop("profile_digest", None)
        return user

    def _find_by_digest(self, digest: str) -> Optional[dict]:
        for user in self._users.values():
            if user.get("national_id_digest") == digest and user["status"] != STATUS_REJECTED:
                return user
        return None

    def _challenge_live(self, record: dict) -> bool:
        return not record["consumed"] and self.clock() <= record["expires_at"]

    def _has_live_register_challenge(self, user_id: str) -> bool:
        for record in self._challenges.values():
            if record["subject"] == user_id and record["kind"] == "register":
                if self._challenge_live(record):
                    return True
        return False

    # -- registration -------------------------------------------------

    def register(self, details: dict, national_id: str) -> dict:
        """Open a registration: validates the id, starts an OTP challenge."""
        if len(national_id) != 12 or not verhoeff.validate(national_id):
            raise err("InvalidNationalId", "national id must be 12 digits with a valid check digit")
        digest = national_id_digest(national_id)
        with self._lock:
            existing = self._find_by_digest(digest)
            if existing is not None:
                stale_stub = (
                    existing["status"] == STATUS_PENDING_KYC
                    and not self._has_live_register_challenge(existing["user_id"])
                )
                if not stale_stub:
                    raise err("DuplicateNationalId", "an account for this national id already exists")
                user_id = existing["user_id"]
            else:
                self._seq += 1
                user_id = f"U-{self._seq:06d}"
            challenge_id, otp = self.provider.start(national_id)
            now = self.clock()
            self._users[user_id] = {
                "user_id": user_id,
                "status": STATUS_PENDING_KYC,
                "details": dict(details),
                "national_id_digest": digest,
                "registered_at": now,
            }
            self._challenges[challenge_id] = {
                "challenge_id": challenge_id,
                "subject": user_id,
                "kind": "register",
                "otp": otp,
                "expires_at": now + self.otp_ttl,
                "consumed": False,
            }
            self._save()
        to = details.get("phone", user_id)
        self.outbox.send("sms", to, "verification code", f"code {otp} for request {challenge_id}")
        return {"user_id": user_id, "challenge_id": challenge_id, "status": STATUS_PENDING_KYC}

    def _take_challenge(self, challenge_id: str, otp: str) -> dict:
        record = self._challenges.get(challenge_id)
        if record is None or record["consumed"] or self.clock() > record["expires_at"]:
            raise err("Expired", "challenge is not live")
        if otp != record["otp"]:
            raise err("BadOtp", "one-time code does not match")
        return record

    def complete_ekyc(self, challenge_id: str, otp: str, password: str) -> dict:
        """Verify the OTP, cross-check details, then lock a keypair in the vault."""
        with self._lock:
            record = self._take_challenge(challenge_id, otp)
            if record["kind"] != "register":
                raise err("Expired", "challenge is not a registration challenge")
            if len(password) < self.min_password_len:
                raise err("WeakPassword", f"password must be at least {self.min_password_len} characters")
            user = self.get_user(record["subject"])
            national_id, profile = self.provider.resolve(challenge_id)
            if national_id is None:
                raise err("Expired", "challenge is not live")
            record["consumed"] = True
            self.provider.drop(challenge_id)
            if profile is not None:
                for key, expected in profile.items():
                    supplied = user["details"].get(key)
                    if supplied is not None and str(supplied).strip() != str(expected).strip():
                        del self._users[user["user_id"]]
                        self._save()
                        raise err("DetailMismatch", f"field {key} does not match the registry")
            keypair = generate_keypair(self.rng)
            reference_id = self._new_reference_id()
            self.vault.put(reference_id, national_id, keypair, password, self.kdf, self.rng, self.clock())
            user.update(
                {
                    "status": STATUS_PENDING_ADMIN,
                    "reference_id": reference_id,
                    "address": keypair.address,
                    "public_key": keypair.public_hex,
                    "kyc_verified_at": self.clock(),
                }
            )
            self._save()
            return dict(user)

    def _new_reference_id(self) -> str:
        while True:
            value = "".join(str(self.rng.randrange(10)) for _ in range(16))
            if not self.vault.has(value):
                return value

    # -- signing ------------------------------------------------------

    def get_signer(self, user_id: str, password: str) -> tuple[KeyPair, dict]:
        user = self.get_user(user_id)
        if user["status"] != STATUS_ACTIVE:
            raise err("NotActive", f"user {user_id} is {user['status']}")
        keypair = self.vault.open(user["reference_id"], password)
        return keypair, user

    # -- recovery -----------------------------------------------------

    def request_reset(self, user_id: str) -> dict:
        user = self.get_user(user_id)
        if user["status"] != STATUS_ACTIVE:
            raise err("NotActive", f"user {user_id} is {user['status']}")
        national_id = self.vault.national_id_of(user["reference_id"])
        with self._lock:
            challenge_id, otp = self.provider.start(national_id)
            self._challenges[challenge_id] = {
                "challenge_id": challenge_id,
                "subject": user_id,
                "kind": "reset",
                "otp": otp,
                "expires_at": self.clock() + self.otp_ttl,
                "consumed": False,
            }
            self._save()
        to = user["details"].get("phone", user_id)
        self.outbox.send("sms", to, "reset code", f"code {otp} for request {challenge_id}")
        return {"user_id": user_id, "challenge_id": challenge_id}

    def reset_password(self, challenge_id: str, otp: str, new_password: str) -> dict:
        """Rotate the keypair under a fresh password; queues an ownership rebind."""
        with self._lock:
            record = self._take_challenge(challenge_id, otp)
            if record["kind"] != "reset":
                raise err("Expired", "challenge is not a reset challenge")
            if len(new_password) < self.min_password_len:
                raise err("WeakPassword", f"password must be at least {self.min_password_len} characters")
            record["consumed"] = True
            self.provider.drop(challenge_id)
            user = self.get_user(record["subject"])
            national_id = self.vault.national_id_of(user["reference_id"])
            keypair = generate_keypair(self.rng)
            self.vault.put(
                user["reference_id"], national_id, keypair, new_password, self.kdf, self.rng, self.clock()
            )
            old_address = user["address"]
            user["public_key"] = keypair.public_hex
            self._recoveries[user["user_id"]] = {
                "user_id": user["user_id"],
                "old_address": old_address,
                "new_address": keypair.address,
                "new_public_key": keypair.public_hex,
                "requested_at": self.clock(),
                "consumed": False,
            }
            self._save()
            return dict(self._recoveries[user["user_id"]])

    def pending_recovery(self, user_id: str) -> Optional[dict]:
        record = self._recoveries.get(user_id)
        if record is None or record["consumed"]:
            return None
        return record

    def apply_recovery(self, user_id: str, new_address: str) -> None:
        """Post-commit hook: the chain now maps the user to the new address."""
        with self._lock:
            user = self.get_user(user_id)
            user["address"] = new_address
            record = self._recoveries.get(user_id)
            if record is not None:
                record["consumed"] = True
            self._save()

    # -- admin hooks --------------------------------------------------

    def require_pending_admin(self, user_id: str) -> dict:
        user = self.get_user(user_id)
        if user["status"] != STATUS_PENDING_ADMIN:
            raise err("WrongStatus", f"user {user_id} is {user['status']}, not awaiting approval")
        return user

    def mark_active(self, user_id: str, height: int) -> None:
        """Post-commit hook once the account binding is on chain."""
        with self._lock:
            user = self.get_user(user_id)
            user["status"] = STATUS_ACTIVE
            user["bound_at_height"] = height
            self._save()
        to = user["details"].get("email", user_id)
        self.outbox.send("email", to, "account approved", f"user {user_id} can now transact")

    def mark_rejected(self, user_id: str) -> None:
        with self._lock:
            user = self.get_user(user_id)
            if user["status"] not in (STATUS_PENDING_ADMIN, STATUS_PENDING_KYC):
                raise err("WrongStatus", f"user {user_id} is {user['status']}")
            user["status"] = STATUS_REJECTED
            self._save()
        to = user["details"].get("email", user_id)
        self.outbox.send("email", to, "account rejected", f"registration for {user_id} was declined")

    def create_admin(self, user_id: str, password: str, details: dict) -> dict:
        """Bootstrap account used once at chain genesis."""
        with self._lock:
            if user_id in self._users:
                return self._users[user_id]
            keypair = generate_keypair(self.rng)
            reference_id = self._new_reference_id()
            self.vault.put(reference_id, "", keypair, password, self.kdf, self.rng, self.clock())
            self._users[user_id] = {
                "user_id": user_id,
                "status": STATUS_ACTIVE,
                "details": dict(details),
                "national_id_digest": "",
                "reference_id": reference_id,
                "address": keypair.address,
                "public_key": keypair.public_hex,
                "registered_at": self.clock(),
            }
            self._save()
            return dict(self._users[user_id])

    def notify(self, user_id: str, subject: str, body: str) -> None:
        user = self._users.get(user_id)
        to = user["details"].get("email", user_id) if user else user_id
        self.outbox.send("email", to, subject, body)
