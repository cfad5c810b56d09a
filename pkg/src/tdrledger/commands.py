"""State-transition commands carried inside signed transactions.

Each command is a small frozen dataclass with a ``kind`` tag.  ``to_payload``
produces the dict that gets canonicalized into the transaction payload (and
therefore into tx_id and the signature); ``from_payload`` restores it.  FAR
quantities travel as Decimal so payload bytes are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from decimal import Decimal
from typing import ClassVar, Optional

from .canonical import as_decimal
from .errors import err

ROLE_ADMIN = "ADMIN"
ROLE_OFFICER = "OFFICER"
ROLE_USER = "USER"
ROLES = (ROLE_ADMIN, ROLE_OFFICER, ROLE_USER)

DECISION_APPROVE = "APPROVE"
DECISION_REJECT = "REJECT"
DECISION_SEND_BACK = "SEND_BACK"
DECISIONS = (DECISION_APPROVE, DECISION_REJECT, DECISION_SEND_BACK)


@dataclass(frozen=True)
class Command:
    kind: ClassVar[str] = ""

    def to_payload(self) -> dict:
        payload = {"kind": self.kind}
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            payload[f.name] = value
        return payload


@dataclass(frozen=True)
class GrantRole(Command):
    kind: ClassVar[str] = "grant_role"
    subject: str
    role: str
    sub_department: Optional[str] = None


@dataclass(frozen=True)
class RevokeRole(Command):
    kind: ClassVar[str] = "revoke_role"
    subject: str
    role: str


@dataclass(frozen=True)
class BindAccount(Command):
    """Activates an onboarded user on the ledger: user_id -> address."""

    kind: ClassVar[str] = "bind_account"
    user_id: str
    address: str
    public_key: str


@dataclass(frozen=True)
class RecoverAccount(Command):
    """Rebinds a user to a fresh key and rewrites their token ownership."""

    kind: ClassVar[str] = "recover_account"
    user_id: str
    new_address: str
    new_public_key: str


@dataclass(frozen=True)
class CreateNotice(Command):
    kind: ClassVar[str] = "create_notice"
    notice_id: str
    sending_zone: str
    land_description_uri: str


@dataclass(frozen=True)
class SubmitApplication(Command):
    kind: ClassVar[str] = "submit_application"
    notice_id: str
    land_details_uri: str
    claimed_far: Decimal


@dataclass(frozen=True)
class VerifyStep(Command):
    kind: ClassVar[str] = "verify_step"
    application_id: str
    decision: str
    remarks: str = ""


@dataclass(frozen=True)
class ResubmitApplication(Command):
    kind: ClassVar[str] = "resubmit_application"
    application_id: str
    land_details_uri: str


@dataclass(frozen=True)
class IssueDrc(Command):
    """lands: ordered list of {"plot_id": str, "area": Decimal, "zone": str}."""

    kind: ClassVar[str] = "issue_drc"
    application_id: str
    lands: tuple

    def to_payload(self) -> dict:
        return {
            "kind": self.kind,
            "application_id": self.application_id,
            "lands": [dict(land) for land in self.lands],
        }


@dataclass(frozen=True)
class ApproveTransfer(Command):
    kind: ClassVar[str] = "approve_transfer"
    token_id: int
    operator: str


@dataclass(frozen=True)
class TransferToken(Command):
    kind: ClassVar[str] = "transfer_token"
    from_address: str
    to_address: str
    token_id: int


@dataclass(frozen=True)
class UtilizeDrc(Command):
    kind: ClassVar[str] = "utilize_drc"
    token_id: int
    far_used: Decimal
    receiving_zone: str


@dataclass(frozen=True)
class BurnDrc(Command):
    kind: ClassVar[str] = "burn_drc"
    token_id: int


COMMAND_KINDS = {
    cls.kind: cls
    for cls in (
        GrantRole,
        RevokeRole,
        BindAccount,
        RecoverAccount,
        CreateNotice,
        SubmitApplication,
        VerifyStep,
        ResubmitApplication,
        IssueDrc,
        ApproveTransfer,
        TransferToken,
        UtilizeDrc,
        BurnDrc,
    )
}


def normalize_land(land: dict) -> dict:
    try:
        return {
            "plot_id": str(land["plot_id"]),
            "area": as_decimal(land["area"]),
            "zone": str(land["zone"]),
        }
    except KeyError as missing:
        raise err("UnsupportedValue", f"land record missing {missing}")


def from_payload(payload: dict) -> Command:
    kind = payload.get("kind")
    cls = COMMAND_KINDS.get(kind)
    if cls is None:
        raise err("UnknownCommand", f"unknown command kind: {kind!r}")
    data = {k: v for k, v in payload.items() if k != "kind"}
    try:
        if cls is SubmitApplication:
            data["claimed_far"] = as_decimal(data["claimed_far"])
        elif cls is UtilizeDrc:
            data["far_used"] = as_decimal(data["far_used"])
        elif cls is IssueDrc:
            data["lands"] = tuple(normalize_land(land) for land in data["lands"])
        return cls(**data)
    except (TypeError, KeyError) as exc:
        raise err("UnknownCommand", f"malformed {kind} payload: {exc}")
