"""Deterministic registry state machine.

One RegistryState composes the account bindings, role assignments,
application lifecycle and token registry, and applies committed commands in
block order.  A failed command consumes the sender's nonce and leaves a
failure receipt instead of aborting its block, so replaying the same block
sequence always reproduces the same state, receipts included.
"""

from __future__ import annotations

from .accounts import AccountRegistry
from .applications import STATUS_VERIFIED, ApplicationRegistry
from .canonical import canonicalize, length_prefixed, sha256_hex
from .commands import (
    ApproveTransfer,
    BindAccount,
    BurnDrc,
    Command,
    CreateNotice,
    GrantRole,
    IssueDrc,
    RecoverAccount,
    ResubmitApplication,
    RevokeRole,
    ROLE_ADMIN,
    ROLE_OFFICER,
    SubmitApplication,
    TransferToken,
    UtilizeDrc,
    VerifyStep,
)
from .errors import RegistryError, err
from .roles import RoleRegistry
from .tokens import TokenRegistry


def derive_drc_id(application_id: str, height: int) -> str:
    return sha256_hex(length_prefixed(application_id.encode(), str(height).encode()))


class RegistryState:
    def __init__(self, params: dict, docstore):
        """params: genesis-fixed machine parameters (departments, zones,
        application prefix, admin identity); docstore: content resolver used
        for document preconditions and issuance snapshots."""
        self.params = params
        self.docstore = docstore
        self.accounts = AccountRegistry()
        self.roles = RoleRegistry(params["departments"])
        self.applications = ApplicationRegistry(
            params["departments"], params["sending_zones"],
            params.get("application_prefix", "APP-"),
        )
        self.tokens = TokenRegistry(params["receiving_zones"])
        self.account_nonces: dict[str, int] = {}
        self.receipts: dict[str, dict] = {}
        admin = params["admin"]
        self.accounts.seed(admin["user_id"], admin["address"], admin["public_key"])
        self.roles.assignments[(admin["address"], ROLE_ADMIN, "")] = {
            "granted_by": admin["address"],
            "granted_at": 0,
        }

    # -- transaction application -------------------------------------------

    def next_nonce(self, sender: str) -> int:
        return self.account_nonces.get(sender, 0) + 1

    def apply_transaction(self, tx, height: int, index: int) -> dict:
        if tx.nonce != self.next_nonce(tx.sender):
            raise err("NonceGap",
                      f"tx {tx.tx_id} nonce {tx.nonce}, expected {self.next_nonce(tx.sender)}")
        self.account_nonces[tx.sender] = tx.nonce
        receipt = {"tx_id": tx.tx_id, "height": height, "index": index}
        try:
            result = self.dispatch(tx.sender, tx.command, tx.tx_id, height)
            receipt["status"] = "applied"
            receipt["result"] = result
        except RegistryError as failure:
            receipt["status"] = "failed"
            receipt["error"] = failure.code
            receipt["detail"] = str(failure)
        self.receipts[tx.tx_id] = receipt
        return receipt

    def dispatch(self, sender: str, command: Command, tx_id: str, height: int) -> dict:
        handler = self._HANDLERS.get(type(command))
        if handler is None:
            raise err("UnknownCommand", f"no handler for {command.kind}")
        return handler(self, sender, command, tx_id, height)

    # -- command handlers -----------------------------------------------------

    def _grant_role(self, sender, cmd: GrantRole, tx_id, height):
        self.roles.require_admin(sender)
        if cmd.subject not in self.accounts.accounts:
            raise err("UnknownSubject", f"{cmd.subject} is not a registered account")
        self.roles.grant(sender, cmd.subject, cmd.role, cmd.sub_department, height)
        return {"subject": cmd.subject, "role": cmd.role}

    def _revoke_role(self, sender, cmd: RevokeRole, tx_id, height):
        self.roles.revoke(sender, cmd.subject, cmd.role)
        return {"subject": cmd.subject, "role": cmd.role}

    def _bind_account(self, sender, cmd: BindAccount, tx_id, height):
        self.roles.require_admin(sender)
        self.accounts.bind(cmd.user_id, cmd.address, cmd.public_key, height)
        return {"user_id": cmd.user_id, "address": cmd.address}

    def _recover_account(self, sender, cmd: RecoverAccount, tx_id, height):
        self.roles.require_admin(sender)
        old_address = self.accounts.rebind(
            cmd.user_id, cmd.new_address, cmd.new_public_key, height)
        moved = self.tokens.rewrite_owner(old_address, cmd.new_address, tx_id, height)
        return {
            "user_id": cmd.user_id,
            "old_address": old_address,
            "new_address": cmd.new_address,
            "moved_tokens": moved,
        }

    def _create_notice(self, sender, cmd: CreateNotice, tx_id, height):
        self.roles.require_admin(sender)
        notice = self.applications.create_notice(
            sender, cmd.notice_id, cmd.sending_zone, cmd.land_description_uri, height)
        return {"notice_id": notice["notice_id"], "sending_zone": notice["sending_zone"]}

    def _submit_application(self, sender, cmd: SubmitApplication, tx_id, height):
        if not self.accounts.is_active(sender):
            raise err("NotOnboarded", f"{sender} is not an onboarded account")
        if not self.docstore.has(cmd.land_details_uri):
            raise err("UnknownDocument", f"{cmd.land_details_uri} not in document store")
        app = self.applications.submit(
            sender, cmd.notice_id, cmd.land_details_uri, cmd.claimed_far, height)
        return {"application_id": app["application_id"], "status": app["status"]}

    def _verify_step(self, sender, cmd: VerifyStep, tx_id, height):
        department = self.applications.pending_department(cmd.application_id)
        if not self.roles.has_role(sender, ROLE_OFFICER):
            raise err("NotOfficer", f"{sender} holds no OFFICER role")
        if not self.roles.has_role(sender, ROLE_OFFICER, department):
            raise err("WrongDepartment", f"{department} decision pending, not {sender}'s")
        app = self.applications.record_decision(
            cmd.application_id, sender, cmd.decision, cmd.remarks, tx_id, height)
        return {
            "application_id": app["application_id"],
            "decision": cmd.decision,
            "status": app["status"],
        }

    def _resubmit(self, sender, cmd: ResubmitApplication, tx_id, height):
        app = self.applications.get(cmd.application_id)
        if sender != app["applicant"]:
            raise err("NotApplicant", f"{sender} did not file {cmd.application_id}")
        if app["status"] != "SENT_BACK_FOR_CORRECTION":
            raise err("NotSentBack", f"{cmd.application_id} is {app['status']}")
        if not self.docstore.has(cmd.land_details_uri):
            raise err("UnknownDocument", f"{cmd.land_details_uri} not in document store")
        app = self.applications.resubmit(sender, cmd.application_id, cmd.land_details_uri)
        return {"application_id": app["application_id"], "status": app["status"]}

    def _issue_drc(self, sender, cmd: IssueDrc, tx_id, height):
        self.roles.require_admin(sender)
        app = self.applications.get(cmd.application_id)
        if app["status"] != STATUS_VERIFIED:
            raise err("NotVerified", f"{cmd.application_id} is {app['status']}")
        if cmd.application_id in self.tokens.issued_applications:
            raise err("AlreadyIssued", f"{cmd.application_id} already has a token")
        notice = self.applications.get_notice(app["notice_id"])
        drc_id = derive_drc_id(cmd.application_id, height)
        lands = {str(i + 1): dict(land) for i, land in enumerate(cmd.lands)}
        document = {
            "drcId": drc_id,
            "farAvailable": app["claimed_far"],
            "landCount": len(lands),
            "owner": app["applicant"],
            "lands": lands,
        }
        uri = self.docstore.put(document)
        record = self.tokens.mint(
            cmd.application_id, app["applicant"], app["claimed_far"],
            notice["sending_zone"], uri, lands, tx_id, height)
        # mint must match the freshly derived id, or the cross-check failed
        assert record["drc_id"] == drc_id
        self.applications.mark_issued(cmd.application_id)
        return {
            "token_id": record["token_id"],
            "drc_id": drc_id,
            "uri": uri,
            "application_id": cmd.application_id,
            "owner": app["applicant"],
        }

    def _approve_transfer(self, sender, cmd: ApproveTransfer, tx_id, height):
        self.tokens.approve(sender, cmd.token_id, cmd.operator)
        return {"token_id": cmd.token_id, "operator": cmd.operator}

    def _transfer_token(self, sender, cmd: TransferToken, tx_id, height):
        record = self.tokens.transfer(
            sender, cmd.from_address, cmd.to_address, cmd.token_id,
            recipient_known=self.accounts.is_active(cmd.to_address),
            tx_id=tx_id, height=height)
        return {"token_id": cmd.token_id, "owner": record["owner"]}

    def _utilize_drc(self, sender, cmd: UtilizeDrc, tx_id, height):
        if not self.roles.has_role(sender, ROLE_OFFICER):
            raise err("NotOfficer", f"{sender} holds no OFFICER role")
        self.tokens.utilize(sender, cmd.token_id, cmd.far_used, cmd.receiving_zone,
                            tx_id, height)
        drc = self.tokens.drc_of(cmd.token_id)
        return {
            "token_id": cmd.token_id,
            "far_available": drc["far_available"],
            "eligible_for_burn": self.tokens.eligible_for_burn(cmd.token_id),
        }

    def _burn_drc(self, sender, cmd: BurnDrc, tx_id, height):
        self.roles.require_admin(sender)
        return self.tokens.burn(cmd.token_id, tx_id, height)

    _HANDLERS = {
        GrantRole: _grant_role,
        RevokeRole: _revoke_role,
        BindAccount: _bind_account,
        RecoverAccount: _recover_account,
        CreateNotice: _create_notice,
        SubmitApplication: _submit_application,
        VerifyStep: _verify_step,
        ResubmitApplication: _resubmit,
        IssueDrc: _issue_drc,
        ApproveTransfer: _approve_transfer,
        TransferToken: _transfer_token,
        UtilizeDrc: _utilize_drc,
        BurnDrc: _burn_drc,
    }

    # -- serialization ---------------------------------------------------------

    def snapshot(self) -> dict:
        return {
            "account_nonces": dict(self.account_nonces),
            "accounts": self.accounts.snapshot(),
            "roles": self.roles.snapshot(),
            "applications": self.applications.snapshot(),
            "tokens": self.tokens.snapshot(),
            "receipts": {txid: dict(sorted(r.items()))
                         for txid, r in self.receipts.items()},
        }

    def serialize(self) -> bytes:
        return canonicalize(self.snapshot())
