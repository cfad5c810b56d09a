"""REST/JSON service over a single node.

Every mutating endpoint carries credentials (user_id + password in the body,
or an X-Admin-Token header from POST /admin/token), signs through the vault,
and returns the pending tx_id; receipts become queryable once the containing
block commits. Reads are unauthenticated. FAR quantities travel as strings
in minimal fixed-point form.
"""

from __future__ import annotations

import threading
from contextlib import asynccontextmanager
from decimal import Decimal
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import commands as cmd
from .canonical import as_decimal, format_decimal
from .commands import ROLE_ADMIN
from .engine import Engine
from .errors import RegistryError, err

_NOT_FOUND_CODES = {"NotFound", "NoSuchToken", "NoSuchUser", "UnknownNotice"}


def jsonable(value):
    """Recursively converts engine values into JSON-safe structures."""
    if isinstance(value, Decimal):
        return format_decimal(value)
    if isinstance(value, bytes):
        return value.hex()
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    return value


def _status_for(code: str, method: str) -> int:
    if code == "BadPassword":
        return 401
    if code == "MissingCredentials":
        return 401
    if code in _NOT_FOUND_CODES and method == "GET":
        return 404
    if code == "NotFound":
        return 404
    return 400


def _field(payload: dict, name: str, default=None, required: bool = True):
    if name in payload:
        return payload[name]
    if required and default is None:
        raise err("MissingField", f"body field {name!r} is required")
    return default


class AdminSessions:
    """In-memory bearer tokens for admin consoles."""

    def __init__(self, rng):
        self.rng = rng
        self._tokens: dict[str, tuple[str, str]] = {}
        self._lock = threading.Lock()

    def issue(self, user_id: str, password: str) -> str:
        token = self.rng.randbytes(16).hex()
        with self._lock:
            self._tokens[token] = (user_id, password)
        return token

    def resolve(self, token: str) -> tuple[str, str]:
        with self._lock:
            entry = self._tokens.get(token)
        if entry is None:
            raise err("MissingCredentials", "unknown or expired admin token")
        return entry


def create_app(engine: Engine) -> FastAPI:
    stop_timer = threading.Event()

    def _producer():
        interval = engine.config.block_interval_seconds
        while not stop_timer.wait(interval):
            try:
                engine.mine()
            except RegistryError:
                # a failed round is re-attempted on the next tick
                pass

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        if engine.config.block_interval_seconds > 0:
            threading.Thread(target=_producer, daemon=True,
                             name="block-producer").start()
        yield
        stop_timer.set()

    app = FastAPI(title="development-rights registry", docs_url=None,
                  redoc_url=None, lifespan=lifespan)
    if engine.config.cors_origins:
        # lets a statically served browser portal on another origin call in
        from fastapi.middleware.cors import CORSMiddleware
        app.add_middleware(CORSMiddleware, allow_origins=engine.config.cors_origins,
                           allow_methods=["*"], allow_headers=["*"])
    sessions = AdminSessions(engine.rng)

    def credentials(request: Request, payload: dict) -> tuple[str, str]:
        token = request.headers.get("x-admin-token")
        if token:
            return sessions.resolve(token)
        user_id = payload.get("user_id")
        password = payload.get("password")
        if not user_id or not password:
            raise err("MissingCredentials", "user_id + password or X-Admin-Token required")
        return user_id, password

    def document_uri(payload: dict, doc_key: str, uri_key: str) -> str:
        """Accepts an inline document (stored server-side) or a known uri."""
        if uri_key in payload:
            return payload[uri_key]
        if doc_key in payload:
            return engine.docstore.put(payload[doc_key])
        raise err("MissingField", f"provide {doc_key!r} or {uri_key!r}")

    @app.exception_handler(RegistryError)
    async def registry_error(request: Request, exc: RegistryError):
        return JSONResponse(status_code=_status_for(exc.code, request.method),
                            content={"error": exc.code, "detail": str(exc)})

    # -- node metadata -----------------------------------------------------

    @app.get("/meta")
    async def meta():
        """Public chain parameters a client needs to render workflows.

        Read from genesis, not the config file: these are chain-defining
        and frozen at init time.
        """
        return {
            "departments": list(engine.genesis["departments"]),
            "sending_zones": list(engine.genesis["sending_zones"]),
            "receiving_zones": list(engine.genesis["receiving_zones"]),
            "block_interval_seconds": engine.config.block_interval_seconds,
        }

    # -- admin sessions ---------------------------------------------------

    @app.post("/admin/token")
    async def admin_token(request: Request):
        payload = await request.json()
        user_id = _field(payload, "user_id")
        password = _field(payload, "password")
        keypair = engine.signer_for(user_id, password)
        if not engine.state.registry.roles.has_role(keypair.address, ROLE_ADMIN):
            raise err("NotAdmin", f"{user_id} does not hold the ADMIN role")
        return {"token": sessions.issue(user_id, password)}

    # -- users --------------------------------------------------------------

    @app.post("/users")
    async def register_user(request: Request):
        payload = await request.json()
        national_id = _field(payload, "national_id")
        details = payload.get("details", {})
        return jsonable(engine.identity.register(details, national_id))

    @app.post("/users/kyc")
    async def complete_kyc(request: Request):
        payload = await request.json()
        return jsonable(engine.identity.complete_ekyc(
            _field(payload, "challenge_id"), _field(payload, "otp"),
            _field(payload, "password")))

    @app.post("/users/{user_id}/approve")
    async def approve_user(user_id: str, request: Request):
        payload = await request.json()
        caller, password = credentials(request, payload)
        return jsonable(engine.approve_user(caller, password, user_id))

    @app.post("/users/{user_id}/reset")
    async def reset_user(user_id: str, request: Request):
        payload = await request.json()
        if "otp" not in payload:
            return jsonable(engine.identity.request_reset(user_id))
        result = engine.identity.reset_password(
            _field(payload, "challenge_id"), _field(payload, "otp"),
            _field(payload, "new_password"))
        if result["user_id"] != user_id:
            raise err("WrongUser", "challenge belongs to a different user")
        return jsonable(result)

    @app.post("/users/{user_id}/recover")
    async def recover_user(user_id: str, request: Request):
        payload = await request.json()
        caller, password = credentials(request, payload)
        return jsonable(engine.recover_user(caller, password, user_id))

    @app.get("/users/{user_id}")
    async def get_user(user_id: str):
        user = engine.identity.user_view(user_id)
        address = user.get("address")
        if address and engine.state.registry.accounts.is_active(address):
            user["roles"] = [a for a in engine.state.registry.roles.list_assignments()
                             if a["subject"] == address]
            user["tokens"] = engine.state.registry.tokens.tokens_owned_by(address)
        return jsonable(user)

    @app.get("/users")
    async def list_users(status: Optional[str] = None):
        return jsonable(engine.identity.list_users(status))

    # -- roles ----------------------------------------------------------------

    @app.post("/roles/grant")
    async def grant_role(request: Request):
        payload = await request.json()
        caller, password = credentials(request, payload)
        subject = _resolve_address(_field(payload, "subject"))
        command = cmd.GrantRole(subject=subject, role=_field(payload, "role"),
                                sub_department=payload.get("sub_department"))
        return jsonable(engine.submit(caller, password, command))

    @app.post("/roles/revoke")
    async def revoke_role(request: Request):
        payload = await request.json()
        caller, password = credentials(request, payload)
        subject = _resolve_address(_field(payload, "subject"))
        command = cmd.RevokeRole(subject=subject, role=_field(payload, "role"))
        return jsonable(engine.submit(caller, password, command))

    @app.get("/roles")
    async def list_roles():
        return jsonable(engine.state.registry.roles.list_assignments())

    def _resolve_address(subject: str) -> str:
        """Accepts a ledger address or a user id."""
        if len(subject) == 64 and all(c in "0123456789abcdef" for c in subject):
            return subject
        user = engine.identity.get_user(subject)
        address = user.get("address")
        if not address:
            raise err("WrongStatus", f"user {subject} has no ledger address yet")
        return address

    # -- notices ---------------------------------------------------------------

    @app.post("/notices")
    async def create_notice(request: Request):
        payload = await request.json()
        caller, password = credentials(request, payload)
        uri = document_uri(payload, "land_description", "land_description_uri")
        command = cmd.CreateNotice(notice_id=_field(payload, "notice_id"),
                                   sending_zone=_field(payload, "sending_zone"),
                                   land_description_uri=uri)
        return jsonable(engine.submit(caller, password, command))

    @app.get("/notices")
    async def list_notices():
        notices = engine.state.registry.applications.notices
        return jsonable([notices[k] for k in sorted(notices)])

    # -- applications ------------------------------------------------------------

    @app.post("/applications")
    async def submit_application(request: Request):
        payload = await request.json()
        caller, password = credentials(request, payload)
        uri = document_uri(payload, "land_details", "land_details_uri")
        command = cmd.SubmitApplication(
            notice_id=_field(payload, "notice_id"),
            land_details_uri=uri,
            claimed_far=as_decimal(_field(payload, "claimed_far")))
        return jsonable(engine.submit(caller, password, command))

    @app.post("/applications/{application_id}/verify")
    async def verify_application(application_id: str, request: Request):
        payload = await request.json()
        caller, password = credentials(request, payload)
        command = cmd.VerifyStep(application_id=application_id,
                                 decision=_field(payload, "decision"),
                                 remarks=payload.get("remarks", ""))
        return jsonable(engine.submit(caller, password, command))

    @app.post("/applications/{application_id}/resubmit")
    async def resubmit_application(application_id: str, request: Request):
        payload = await request.json()
        caller, password = credentials(request, payload)
        uri = document_uri(payload, "land_details", "land_details_uri")
        command = cmd.ResubmitApplication(application_id=application_id,
                                          land_details_uri=uri)
        return jsonable(engine.submit(caller, password, command))

    @app.get("/applications/{application_id}")
    async def get_application(application_id: str):
        app_record = dict(engine.state.registry.applications.get(application_id))
        if app_record["status"] == "SUBMITTED":
            app_record["pending_department"] = (
                engine.state.registry.applications.pending_department(application_id))
        return jsonable(app_record)

    @app.get("/applications")
    async def list_applications(status: Optional[str] = None,
                                applicant: Optional[str] = None,
                                department: Optional[str] = None):
        return jsonable(engine.state.registry.applications.list_applications(
            status, applicant, department))

    # -- certificates -------------------------------------------------------------

    @app.post("/drcs")
    async def issue_drc(request: Request):
        payload = await request.json()
        caller, password = credentials(request, payload)
        lands = tuple(cmd.normalize_land(land) for land in _field(payload, "lands"))
        command = cmd.IssueDrc(application_id=_field(payload, "application_id"),
                               lands=lands)
        return jsonable(engine.submit(caller, password, command))

    @app.post("/drcs/{token_id}/transfer")
    async def transfer_drc(token_id: int, request: Request):
        payload = await request.json()
        caller, password = credentials(request, payload)
        to_address = payload.get("to_address")
        if not to_address:
            to_address = _resolve_address(_field(payload, "to_user_id"))
        from_address = payload.get("from_address",
                                   engine.state.registry.tokens.owner_of(token_id))
        command = cmd.TransferToken(from_address=from_address, to_address=to_address,
                                    token_id=token_id)
        return jsonable(engine.submit(caller, password, command))

    @app.post("/drcs/{token_id}/utilize")
    async def utilize_drc(token_id: int, request: Request):
        payload = await request.json()
        caller, password = credentials(request, payload)
        command = cmd.UtilizeDrc(token_id=token_id,
                                 far_used=as_decimal(_field(payload, "far_used")),
                                 receiving_zone=_field(payload, "receiving_zone"))
        return jsonable(engine.submit(caller, password, command))

    @app.post("/drcs/{token_id}/burn")
    async def burn_drc(token_id: int, request: Request):
        payload = await request.json()
        caller, password = credentials(request, payload)
        command = cmd.BurnDrc(token_id=token_id)
        return jsonable(engine.submit(caller, password, command))

    @app.post("/drcs/{token_id}/approve")
    async def approve_operator(token_id: int, request: Request):
        payload = await request.json()
        caller, password = credentials(request, payload)
        operator = payload.get("operator")
        if not operator:
            operator = _resolve_address(_field(payload, "operator_user_id"))
        command = cmd.ApproveTransfer(token_id=token_id, operator=operator)
        return jsonable(engine.submit(caller, password, command))

    @app.get("/drcs/{token_id}")
    async def get_drc(token_id: int):
        description = engine.state.registry.tokens.describe(token_id)
        description["document"] = engine.docstore.get(description["uri"])
        return jsonable(description)

    @app.get("/drcs/{token_id}/provenance")
    async def drc_provenance(token_id: int):
        return jsonable(engine.state.registry.tokens.provenance(token_id))

    @app.get("/drcs")
    async def list_drcs(owner: Optional[str] = None, eligible: Optional[bool] = None):
        return jsonable(engine.state.registry.tokens.list_tokens(owner, eligible))

    # -- documents -----------------------------------------------------------------

    @app.post("/docs")
    async def put_document(request: Request):
        payload = await request.json()
        return {"uri": engine.docstore.put(_field(payload, "document"))}

    @app.get("/docs/{uri}")
    async def get_document(uri: str):
        return jsonable({"uri": uri, "document": engine.docstore.get(uri)})

    # -- chain ------------------------------------------------------------------------

    @app.get("/chain/height")
    async def chain_height():
        return {"height": engine.height(), "head_hash": engine.state.head_hash}

    @app.get("/chain/blocks/{height}")
    async def chain_block(height: int):
        return jsonable(engine.block_at(height))

    @app.post("/chain/mine")
    async def chain_mine(request: Request):
        if engine.config.block_interval_seconds != 0:
            raise err("MineDisabled", "mine-now is available only when the interval is 0")
        body = await request.body()
        allow_empty = False
        if body:
            payload = await request.json()
            allow_empty = bool(payload.get("allow_empty", False))
        return jsonable(engine.mine(allow_empty=allow_empty))

    @app.get("/chain/receipts/{tx_id}")
    async def chain_receipt(tx_id: str):
        return jsonable(engine.receipt_of(tx_id))

    @app.get("/chain/verify")
    async def chain_verify():
        return jsonable(engine.verify())

    @app.get("/chain/state-digest")
    async def chain_state_digest():
        return {"state_digest": engine.state_digest(), "height": engine.height()}

    # -- notifications (mock gateway visibility) -----------------------------------------

    @app.get("/outbox")
    async def outbox(to: Optional[str] = None):
        entries = engine.outbox.entries()
        if to is not None:
            entries = [e for e in entries if e["to"] == to]
        return jsonable(entries)

    return app
