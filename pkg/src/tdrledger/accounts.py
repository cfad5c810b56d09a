"""On-ledger account bindings: user_id <-> address with registered keys.

Only bound, active addresses may send transactions.  Recovery rebinds a user
to a new address and deactivates the old one; the token registry rewrites
ownership in the same command so assets follow the user, not the key.
"""

from __future__ import annotations

from .errors import err


class AccountRegistry:
    def __init__(self):
        self.accounts: dict[str, dict] = {}   # address -> {user_id, public_key, active}
        self.by_user: dict[str, str] = {}     # user_id -> current address

    def seed(self, user_id: str, address: str, public_key: str):
        self.accounts[address] = {"user_id": user_id, "public_key": public_key, "active": True}
        self.by_user[user_id] = address

    def bind(self, user_id: str, address: str, public_key: str, height: int):
        if user_id in self.by_user:
            raise err("AlreadyBound", f"{user_id} already bound")
        if address in self.accounts:
            raise err("AddressInUse", f"{address} already bound")
        self.accounts[address] = {
            "user_id": user_id,
            "public_key": public_key,
            "active": True,
            "bound_at": height,
        }
        self.by_user[user_id] = address

    def rebind(self, user_id: str, new_address: str, new_public_key: str, height: int) -> str:
        old_address = self.by_user.get(user_id)
        if old_address is None:
            raise err("UnknownSubject", f"{user_id} has no binding")
        if new_address in self.accounts:
            raise err("AddressInUse", f"{new_address} already bound")
        self.accounts[old_address]["active"] = False
        self.accounts[new_address] = {
            "user_id": user_id,
            "public_key": new_public_key,
            "active": True,
            "bound_at": height,
        }
        self.by_user[user_id] = new_address
        return old_address

    def is_active(self, address: str) -> bool:
        record = self.accounts.get(address)
        return bool(record and record["active"])

    def public_key(self, address: str) -> str | None:
        record = self.accounts.get(address)
        return record["public_key"] if record else None

    def user_of(self, address: str) -> str | None:
        record = self.accounts.get(address)
        return record["user_id"] if record else None

    def address_of(self, user_id: str) -> str | None:
        return self.by_user.get(user_id)

    def snapshot(self) -> dict:
        return {
            "accounts": {
                addr: dict(sorted(rec.items())) for addr, rec in self.accounts.items()
            },
            "by_user": dict(self.by_user),
        }
