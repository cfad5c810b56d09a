"""Operator command line: mirrors the REST families plus chain audit verbs.

Every mutating subcommand signs as the given user, commits the transaction in
its own block, prints the receipt, and exits nonzero if the command failed on
chain. Output is JSON: indented by default, compact with --json.
"""

from __future__ import annotations

import functools
import json
import sys

import click

from . import commands as cmd
from .api import create_app, jsonable
from .canonical import as_decimal
from .config import load_config
from .engine import Engine, init_store
from .errors import RegistryError


def _emit(ctx, value):
    compact = ctx.obj["json"]
    text = json.dumps(jsonable(value), sort_keys=compact) if compact else \
        json.dumps(jsonable(value), indent=2)
    click.echo(text)


def _fail(code: str, detail: str):
    click.echo(f"{code}: {detail}", err=True)
    sys.exit(1)


def _engine(ctx) -> Engine:
    if ctx.obj.get("engine") is None:
        ctx.obj["engine"] = Engine(ctx.obj["config"])
    return ctx.obj["engine"]


def _mutate(ctx, user_id: str, password: str, command) -> None:
    """Submit, mine, print the receipt; nonzero exit on a failed command."""
    engine = _engine(ctx)
    outcome = engine.submit_and_mine(user_id, password, command)
    _emit(ctx, outcome)
    receipt = outcome["receipt"]
    if receipt is None or receipt["status"] != "applied":
        code = receipt["error"] if receipt else "NotCommitted"
        _fail(code, receipt.get("detail", "") if receipt else "transaction not committed")


def _load_doc(path: str | None, inline: str | None, file_flag: str, json_flag: str):
    if inline is not None:
        return json.loads(inline)
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    _fail("MissingField", f"provide {file_flag} or {json_flag}")


user_opt = click.option("--user", "-u", "user_id", required=True,
                        help="acting user id")
password_opt = click.option("--password", "-p", required=True,
                            help="vault password of the acting user")


@click.group()
@click.option("--config", "config_path", default=None, envvar="TDR_CONFIG",
              help="path to a key=value config file")
@click.option("--data-dir", default=None, help="override the data directory")
@click.option("--json", "compact", is_flag=True, help="compact machine output")
@click.pass_context
def main(ctx, config_path, data_dir, compact):
    """Development-rights registry node and operator tools."""
    overrides = {"data_dir": data_dir} if data_dir else None
    try:
        config = load_config(config_path, overrides=overrides)
    except RegistryError as bad:
        _fail(bad.code, str(bad))
    ctx.obj = {"config": config, "json": compact, "engine": None}


def _wrap(fn):
    """Route RegistryError to stderr + exit 1 for every subcommand."""

    @functools.wraps(fn)
    def inner(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except RegistryError as bad:
            _fail(bad.code, str(bad))
    return inner


# -- store lifecycle ---------------------------------------------------------


@main.command()
@click.option("--admin-password", default=None,
              help="bootstrap admin vault password (overrides config)")
@click.pass_context
@_wrap
def init(ctx, admin_password):
    """Create the data directory, genesis parameters and block 0."""
    config = ctx.obj["config"]
    if admin_password:
        config.admin_password = admin_password
    genesis = init_store(config)
    Engine(config)  # commits the empty genesis block
    _emit(ctx, {"initialized": True, "chain_id": genesis["chain_id"],
                "data_dir": config.data_dir})


@main.command()
@click.pass_context
@_wrap
def serve(ctx):
    """Run the REST service (background producer when interval > 0)."""
    import uvicorn

    config = ctx.obj["config"]
    engine = Engine(config)
    uvicorn.run(create_app(engine), host=config.api_host, port=config.api_port,
                log_level="warning")


# -- chain --------------------------------------------------------------------


@main.group()
def chain():
    """Block log inspection and audit."""


@chain.command("height")
@click.pass_context
@_wrap
def chain_height(ctx):
    engine = _engine(ctx)
    _emit(ctx, {"height": engine.height(), "head_hash": engine.state.head_hash})


@chain.command("show")
@click.argument("height", type=int)
@click.pass_context
@_wrap
def chain_show(ctx, height):
    _emit(ctx, _engine(ctx).block_at(height))


@chain.command("verify")
@click.pass_context
@_wrap
def chain_verify(ctx):
    """Full audit: linkage, votes, signatures, deterministic replay."""
    report = _engine(ctx).verify()
    _emit(ctx, report)
    if not report["ok"]:
        violation = report.get("violation", {})
        _fail(violation.get("code", "StoreCorrupt"), violation.get("detail", ""))


@chain.command("replay")
@click.pass_context
@_wrap
def chain_replay(ctx):
    """Rebuild state from the block file alone and print its digest."""
    engine = _engine(ctx)
    _emit(ctx, {"blocks": engine.height() + 1,
                "state_digest": engine.state_digest()})


@chain.command("mine")
@click.option("--allow-empty", is_flag=True)
@click.pass_context
@_wrap
def chain_mine(ctx, allow_empty):
    _emit(ctx, _engine(ctx).mine(allow_empty=allow_empty))


@chain.command("receipt")
@click.argument("tx_id")
@click.pass_context
@_wrap
def chain_receipt(ctx, tx_id):
    _emit(ctx, _engine(ctx).receipt_of(tx_id))


# -- roles ----------------------------------------------------------------------


@main.group()
def roles():
    """Role assignments on the ledger."""


def _subject_address(engine: Engine, subject: str) -> str:
    if len(subject) == 64 and all(c in "0123456789abcdef" for c in subject):
        return subject
    user = engine.identity.get_user(subject)
    address = user.get("address")
    if not address:
        _fail("WrongStatus", f"user {subject} has no ledger address yet")
    return address


@roles.command("grant")
@click.argument("subject")
@click.argument("role")
@click.option("--department", default=None, help="required for OFFICER grants")
@user_opt
@password_opt
@click.pass_context
@_wrap
def roles_grant(ctx, subject, role, department, user_id, password):
    engine = _engine(ctx)
    command = cmd.GrantRole(subject=_subject_address(engine, subject), role=role,
                            sub_department=department)
    _mutate(ctx, user_id, password, command)


@roles.command("revoke")
@click.argument("subject")
@click.argument("role")
@user_opt
@password_opt
@click.pass_context
@_wrap
def roles_revoke(ctx, subject, role, user_id, password):
    engine = _engine(ctx)
    command = cmd.RevokeRole(subject=_subject_address(engine, subject), role=role)
    _mutate(ctx, user_id, password, command)


@roles.command("list")
@click.pass_context
@_wrap
def roles_list(ctx):
    _emit(ctx, _engine(ctx).state.registry.roles.list_assignments())


# -- users ------------------------------------------------------------------------


@main.group()
def user():
    """Onboarding, eKYC, recovery."""


@user.command("register")
@click.option("--national-id", required=True)
@click.option("--detail", "details", multiple=True,
              help="profile field as key=value; repeatable")
@click.pass_context
@_wrap
def user_register(ctx, national_id, details):
    profile = {}
    for item in details:
        if "=" not in item:
            _fail("ConfigInvalid", f"--detail expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        profile[key] = value
    _emit(ctx, _engine(ctx).identity.register(profile, national_id))


@user.command("kyc")
@click.option("--challenge", "challenge_id", required=True)
@click.option("--otp", required=True)
@click.option("--password", required=True, help="vault password to set")
@click.pass_context
@_wrap
def user_kyc(ctx, challenge_id, otp, password):
    _emit(ctx, _engine(ctx).identity.complete_ekyc(challenge_id, otp, password))


@user.command("approve")
@click.argument("target_user_id")
@user_opt
@password_opt
@click.pass_context
@_wrap
def user_approve(ctx, target_user_id, user_id, password):
    engine = _engine(ctx)
    outcome = engine.approve_user(user_id, password, target_user_id)
    mined = engine.mine()
    receipt = engine.state.registry.receipts.get(outcome["tx_id"])
    _emit(ctx, {"tx_id": outcome["tx_id"], "height": mined["height"],
                "receipt": receipt})
    if receipt is None or receipt["status"] != "applied":
        _fail(receipt["error"] if receipt else "NotCommitted",
              receipt.get("detail", "") if receipt else "")


@user.command("reset-request")
@click.argument("target_user_id")
@click.pass_context
@_wrap
def user_reset_request(ctx, target_user_id):
    _emit(ctx, _engine(ctx).identity.request_reset(target_user_id))


@user.command("reset")
@click.option("--challenge", "challenge_id", required=True)
@click.option("--otp", required=True)
@click.option("--new-password", required=True)
@click.pass_context
@_wrap
def user_reset(ctx, challenge_id, otp, new_password):
    _emit(ctx, _engine(ctx).identity.reset_password(challenge_id, otp, new_password))


@user.command("recover")
@click.argument("target_user_id")
@user_opt
@password_opt
@click.pass_context
@_wrap
def user_recover(ctx, target_user_id, user_id, password):
    engine = _engine(ctx)
    outcome = engine.recover_user(user_id, password, target_user_id)
    mined = engine.mine()
    receipt = engine.state.registry.receipts.get(outcome["tx_id"])
    _emit(ctx, {"tx_id": outcome["tx_id"], "height": mined["height"],
                "receipt": receipt})
    if receipt is None or receipt["status"] != "applied":
        _fail(receipt["error"] if receipt else "NotCommitted",
              receipt.get("detail", "") if receipt else "")


@user.command("show")
@click.argument("target_user_id")
@click.pass_context
@_wrap
def user_show(ctx, target_user_id):
    _emit(ctx, _engine(ctx).identity.user_view(target_user_id))


@user.command("list")
@click.option("--status", default=None)
@click.pass_context
@_wrap
def user_list(ctx, status):
    _emit(ctx, _engine(ctx).identity.list_users(status))


# -- notices -------------------------------------------------------------------------


@main.group()
def notice():
    """Acquisition notices."""


@notice.command("create")
@click.option("--id", "notice_id", required=True)
@click.option("--zone", "sending_zone", required=True)
@click.option("--description-file", default=None)
@click.option("--description-json", default=None)
@user_opt
@password_opt
@click.pass_context
@_wrap
def notice_create(ctx, notice_id, sending_zone, description_file, description_json,
                  user_id, password):
    engine = _engine(ctx)
    document = _load_doc(description_file, description_json, "--description-file", "--description-json")
    uri = engine.docstore.put(document)
    command = cmd.CreateNotice(notice_id=notice_id, sending_zone=sending_zone,
                               land_description_uri=uri)
    _mutate(ctx, user_id, password, command)


@notice.command("list")
@click.pass_context
@_wrap
def notice_list(ctx):
    notices = _engine(ctx).state.registry.applications.notices
    _emit(ctx, [notices[k] for k in sorted(notices)])


# -- applications -----------------------------------------------------------------------


@main.group()
def app():
    """TDR applications and verification."""


@app.command("submit")
@click.option("--notice", "notice_id", required=True)
@click.option("--far", "claimed_far", required=True)
@click.option("--details-file", default=None)
@click.option("--details-json", default=None)
@user_opt
@password_opt
@click.pass_context
@_wrap
def app_submit(ctx, notice_id, claimed_far, details_file, details_json,
               user_id, password):
    engine = _engine(ctx)
    document = _load_doc(details_file, details_json, "--details-file", "--details-json")
    uri = engine.docstore.put(document)
    command = cmd.SubmitApplication(notice_id=notice_id, land_details_uri=uri,
                                    claimed_far=as_decimal(claimed_far))
    _mutate(ctx, user_id, password, command)


@app.command("verify")
@click.argument("application_id")
@click.option("--decision", required=True,
              type=click.Choice(["APPROVE", "REJECT", "SEND_BACK"]))
@click.option("--remarks", default="")
@user_opt
@password_opt
@click.pass_context
@_wrap
def app_verify(ctx, application_id, decision, remarks, user_id, password):
    command = cmd.VerifyStep(application_id=application_id, decision=decision,
                             remarks=remarks)
    _mutate(ctx, user_id, password, command)


@app.command("resubmit")
@click.argument("application_id")
@click.option("--details-file", default=None)
@click.option("--details-json", default=None)
@user_opt
@password_opt
@click.pass_context
@_wrap
def app_resubmit(ctx, application_id, details_file, details_json, user_id, password):
    engine = _engine(ctx)
    document = _load_doc(details_file, details_json, "--details-file", "--details-json")
    uri = engine.docstore.put(document)
    command = cmd.ResubmitApplication(application_id=application_id,
                                      land_details_uri=uri)
    _mutate(ctx, user_id, password, command)


@app.command("show")
@click.argument("application_id")
@click.pass_context
@_wrap
def app_show(ctx, application_id):
    _emit(ctx, _engine(ctx).state.registry.applications.get(application_id))


@app.command("list")
@click.option("--status", default=None)
@click.option("--applicant", default=None)
@click.option("--department", default=None)
@click.pass_context
@_wrap
def app_list(ctx, status, applicant, department):
    _emit(ctx, _engine(ctx).state.registry.applications.list_applications(
        status, applicant, department))


# -- certificates ---------------------------------------------------------------------------


@main.group()
def drc():
    """Development-rights certificates (tokens)."""


@drc.command("issue")
@click.option("--application", "application_id", required=True)
@click.option("--lands-file", default=None)
@click.option("--lands-json", default=None)
@user_opt
@password_opt
@click.pass_context
@_wrap
def drc_issue(ctx, application_id, lands_file, lands_json, user_id, password):
    lands = tuple(cmd.normalize_land(land)
                  for land in _load_doc(lands_file, lands_json, "--lands-file", "--lands-json"))
    command = cmd.IssueDrc(application_id=application_id, lands=lands)
    _mutate(ctx, user_id, password, command)


@drc.command("transfer")
@click.argument("token_id", type=int)
@click.option("--to-user", default=None)
@click.option("--to-address", default=None)
@click.option("--from-address", default=None,
              help="defaults to the token's current owner")
@user_opt
@password_opt
@click.pass_context
@_wrap
def drc_transfer(ctx, token_id, to_user, to_address, from_address, user_id, password):
    engine = _engine(ctx)
    if to_address is None:
        if to_user is None:
            _fail("MissingField", "provide --to-user or --to-address")
        to_address = _subject_address(engine, to_user)
    if from_address is None:
        from_address = engine.state.registry.tokens.owner_of(token_id)
    command = cmd.TransferToken(from_address=from_address, to_address=to_address,
                                token_id=token_id)
    _mutate(ctx, user_id, password, command)


@drc.command("utilize")
@click.argument("token_id", type=int)
@click.option("--far", "far_used", required=True)
@click.option("--zone", "receiving_zone", required=True)
@user_opt
@password_opt
@click.pass_context
@_wrap
def drc_utilize(ctx, token_id, far_used, receiving_zone, user_id, password):
    command = cmd.UtilizeDrc(token_id=token_id, far_used=as_decimal(far_used),
                             receiving_zone=receiving_zone)
    _mutate(ctx, user_id, password, command)


@drc.command("burn")
@click.argument("token_id", type=int)
@user_opt
@password_opt
@click.pass_context
@_wrap
def drc_burn(ctx, token_id, user_id, password):
    _mutate(ctx, user_id, password, cmd.BurnDrc(token_id=token_id))


@drc.command("approve")
@click.argument("token_id", type=int)
@click.option("--operator", default=None, help="ledger address")
@click.option("--operator-user", default=None, help="user id to resolve")
@user_opt
@password_opt
@click.pass_context
@_wrap
def drc_approve(ctx, token_id, operator, operator_user, user_id, password):
    engine = _engine(ctx)
    if operator is None:
        if operator_user is None:
            _fail("MissingField", "provide --operator or --operator-user")
        operator = _subject_address(engine, operator_user)
    _mutate(ctx, user_id, password,
            cmd.ApproveTransfer(token_id=token_id, operator=operator))


@drc.command("show")
@click.argument("token_id", type=int)
@click.pass_context
@_wrap
def drc_show(ctx, token_id):
    engine = _engine(ctx)
    description = engine.state.registry.tokens.describe(token_id)
    description["document"] = engine.docstore.get(description["uri"])
    _emit(ctx, description)


@drc.command("provenance")
@click.argument("token_id", type=int)
@click.pass_context
@_wrap
def drc_provenance(ctx, token_id):
    _emit(ctx, _engine(ctx).state.registry.tokens.provenance(token_id))


@drc.command("list")
@click.option("--owner", default=None)
@click.option("--eligible", default=None, type=bool)
@click.pass_context
@_wrap
def drc_list(ctx, owner, eligible):
    _emit(ctx, _engine(ctx).state.registry.tokens.list_tokens(owner, eligible))


# -- documents ----------------------------------------------------------------------------


@main.group()
def doc():
    """Content-addressed document store."""


@doc.command("put")
@click.option("--file", "path", default=None)
@click.option("--json", "inline", default=None)
@click.pass_context
@_wrap
def doc_put(ctx, path, inline):
    document = _load_doc(path, inline, "--file", "--json")
    _emit(ctx, {"uri": _engine(ctx).docstore.put(document)})


@doc.command("get")
@click.argument("uri")
@click.pass_context
@_wrap
def doc_get(ctx, uri):
    _emit(ctx, {"uri": uri, "document": _engine(ctx).docstore.get(uri)})


if __name__ == "__main__":
    main()
