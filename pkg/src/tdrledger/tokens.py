"""Non-fungible token registry for Development Rights Certificates.

ERC721-shaped semantics on a permissioned network: admin-gated mint from a
verified application, owner/operator transfer between registered accounts,
officer-approved FAR utilization in receiving zones, and admin burn once the
FAR balance hits zero.  Token ids come from a monotonic counter starting at
1 and are never reused; the drc_id <-> token_id maps stay exact inverses
over live tokens and drop the pair on burn.  Every mutation appends to an
immutable provenance log.
"""

from __future__ import annotations

from decimal import Decimal

from .canonical import format_decimal, length_prefixed, sha256_hex
from .errors import err

FLAG_ELIGIBLE_FOR_BURN = "EligibleForBurn"


class TokenRegistry:
    def __init__(self, receiving_zones: list[str]):
        self.receiving_zones = list(receiving_zones)
        self.counter = 0
        self.tokens: dict[int, dict] = {}        # token_id -> TokenRecord
        self.drcs: dict[str, dict] = {}          # drc_id -> DRC
        self.token_id_by_drc: dict[str, int] = {}
        self.drc_id_by_token: dict[int, str] = {}
        self.approvals: dict[int, str] = {}      # token_id -> approved operator
        self.events: dict[int, list] = {}        # token_id -> provenance log
        self.issued_applications: dict[str, int] = {}

    # -- mint --------------------------------------------------------------

    def mint(self, application_id: str, applicant: str, claimed_far: Decimal,
             sending_zone: str, uri: str, lands: dict, tx_id: str, height: int) -> dict:
        if application_id in self.issued_applications:
            raise err("AlreadyIssued", f"{application_id} already has a token")
        drc_id = sha256_hex(length_prefixed(application_id.encode(), str(height).encode()))
        self.counter += 1
        token_id = self.counter
        self.drcs[drc_id] = {
            "drc_id": drc_id,
            "far_available": claimed_far,
            "claimed_far": claimed_far,
            "land_count": len(lands),
            "owner": applicant,
            "lands": lands,
            "sending_zone": sending_zone,
            "issued_against": application_id,
            "utilizations": [],
        }
        self.tokens[token_id] = {
            "token_id": token_id,
            "drc_id": drc_id,
            "owner": applicant,
            "uri": uri,
            "issuer_signature": tx_id,
            "burned": False,
        }
        self.token_id_by_drc[drc_id] = token_id
        self.drc_id_by_token[token_id] = drc_id
        self.issued_applications[application_id] = token_id
        self.events[token_id] = [{
            "kind": "mint",
            "token_id": token_id,
            "drc_id": drc_id,
            "owner": applicant,
            "uri": uri,
            "tx_id": tx_id,
            "height": height,
        }]
        return self.tokens[token_id]

    # -- reads ---------------------------------------------------------------

    def _record(self, token_id: int) -> dict:
        record = self.tokens.get(token_id)
        if record is None:
            raise err("NoSuchToken", f"no token {token_id}")
        return record

    def _live(self, token_id: int) -> dict:
        record = self._record(token_id)
        if record["burned"]:
            raise err("Burned", f"token {token_id} is burned")
        return record

    def owner_of(self, token_id: int) -> str:
        return self._live(token_id)["owner"]

    def token_uri(self, token_id: int) -> str:
        return self._record(token_id)["uri"]

    def drc_of(self, token_id: int) -> dict:
        return self.drcs[self._record(token_id)["drc_id"]]

    def provenance(self, token_id: int) -> list[dict]:
        if token_id not in self.events:
            raise err("NoSuchToken", f"no token {token_id}")
        return list(self.events[token_id])

    # -- mutations -------------------------------------------------------------

    def approve(self, caller: str, token_id: int, operator: str):
        record = self._live(token_id)
        if caller != record["owner"]:
            raise err("NotOwner", f"{caller} does not own token {token_id}")
        self.approvals[token_id] = operator

    def transfer(self, caller: str, from_address: str, to_address: str,
                 token_id: int, recipient_known: bool, tx_id: str, height: int) -> dict:
        record = self._live(token_id)
        owner = record["owner"]
        if from_address != owner:
            raise err("NotOwner", f"{from_address} does not own token {token_id}")
        if caller != owner and self.approvals.get(token_id) != caller:
            raise err("NotOwner", f"{caller} is neither owner nor approved")
        if not recipient_known:
            raise err("UnknownRecipient", f"{to_address} is not a registered account")
        record["owner"] = to_address
        self.drcs[record["drc_id"]]["owner"] = to_address
        self.approvals.pop(token_id, None)
        self.events[token_id].append({
            "kind": "transfer",
            "token_id": token_id,
            "from": from_address,
            "to": to_address,
            "tx_id": tx_id,
            "height": height,
        })
        return record

    def utilize(self, officer: str, token_id: int, far_used: Decimal,
                receiving_zone: str, tx_id: str, height: int) -> dict:
        record = self._live(token_id)
        if receiving_zone not in self.receiving_zones:
            raise err("UnknownZone", f"{receiving_zone!r} is not a receiving zone")
        drc = self.drcs[record["drc_id"]]
        if far_used <= 0:
            raise err("InsufficientFar", "utilization must be positive")
        if far_used > drc["far_available"]:
            raise err("InsufficientFar",
                      f"{format_decimal(far_used)} exceeds {format_decimal(drc['far_available'])}")
        drc["far_available"] -= far_used
        utilization = {
            "token_id": token_id,
            "far_used": far_used,
            "receiving_zone": receiving_zone,
            "approved_by": officer,
            "height": height,
        }
        drc["utilizations"].append(utilization)
        self.events[token_id].append({
            "kind": "utilize",
            "token_id": token_id,
            "far_used": far_used,
            "receiving_zone": receiving_zone,
            "approved_by": officer,
            "tx_id": tx_id,
            "height": height,
        })
        return utilization

    def eligible_for_burn(self, token_id: int) -> bool:
        record = self.tokens.get(token_id)
        if record is None or record["burned"]:
            return False
        return self.drcs[record["drc_id"]]["far_available"] == 0

    def burn(self, token_id: int, tx_id: str, height: int) -> dict:
        record = self._live(token_id)
        drc = self.drcs[record["drc_id"]]
        if drc["far_available"] != 0:
            raise err("NotFullyUtilized",
                      f"{format_decimal(drc['far_available'])} FAR still available")
        record["burned"] = True
        del self.token_id_by_drc[record["drc_id"]]
        del self.drc_id_by_token[token_id]
        self.approvals.pop(token_id, None)
        self.events[token_id].append({
            "kind": "burn",
            "token_id": token_id,
            "drc_id": record["drc_id"],
            "tx_id": tx_id,
            "height": height,
        })
        return {"token_id": token_id, "drc_id": record["drc_id"], "burned": True}

    def rewrite_owner(self, old_address: str, new_address: str, tx_id: str,
                      height: int) -> list[int]:
        """Recovery support: every live token owned by old_address moves to
        new_address in one step, each with a provenance entry."""
        moved = []
        for token_id, record in self.tokens.items():
            if record["burned"] or record["owner"] != old_address:
                continue
            record["owner"] = new_address
            self.drcs[record["drc_id"]]["owner"] = new_address
            self.approvals.pop(token_id, None)
            self.events[token_id].append({
                "kind": "recover",
                "token_id": token_id,
                "from": old_address,
                "to": new_address,
                "tx_id": tx_id,
                "height": height,
            })
            moved.append(token_id)
        return sorted(moved)

    def tokens_owned_by(self, address: str) -> list[int]:
        return sorted(tid for tid, rec in self.tokens.items()
                      if not rec["burned"] and rec["owner"] == address)

    def list_tokens(self, owner: str | None = None, eligible: bool | None = None) -> list[dict]:
        rows = []
        for token_id in sorted(self.tokens):
            record = self.tokens[token_id]
            if owner and (record["burned"] or record["owner"] != owner):
                continue
            if eligible is not None and self.eligible_for_burn(token_id) != eligible:
                continue
            rows.append(self.describe(token_id))
        return rows

    def describe(self, token_id: int) -> dict:
        record = self._record(token_id)
        drc = self.drcs[record["drc_id"]]
        return {
            **record,
            "far_available": drc["far_available"],
            "claimed_far": drc["claimed_far"],
            "land_count": drc["land_count"],
            "lands": drc["lands"],
            "sending_zone": drc["sending_zone"],
            "issued_against": drc["issued_against"],
            "approved_operator": self.approvals.get(token_id),
            "eligible_for_burn": self.eligible_for_burn(token_id),
        }

    def snapshot(self) -> dict:
        return {
            "counter": self.counter,
            "tokens": {str(tid): dict(sorted(rec.items())) for tid, rec in self.tokens.items()},
            "drcs": {
                drc_id: {
                    **{k: v for k, v in drc.items() if k != "utilizations"},
                    "utilizations": [dict(sorted(u.items())) for u in drc["utilizations"]],
                }
                for drc_id, drc in self.drcs.items()
            },
            "token_id_by_drc": dict(self.token_id_by_drc),
            "drc_id_by_token": {str(tid): did for tid, did in self.drc_id_by_token.items()},
            "approvals": {str(tid): op for tid, op in self.approvals.items()},
            "events": {str(tid): [dict(sorted(e.items())) for e in evs]
                       for tid, evs in self.events.items()},
            "issued_applications": dict(self.issued_applications),
        }
