"""Acquisition notices and the TDR application lifecycle.

An application cites an open notice, then walks an ordered department
pipeline.  Each officer decision appends a signed verification record.
APPROVE advances to the next department (the last one yields VERIFIED);
REJECT is terminal; SEND_BACK parks the application until the applicant
resubmits, at which point verification resumes at the department that sent
it back - earlier approvals are kept.
"""

from __future__ import annotations

from decimal import Decimal

from .commands import DECISION_APPROVE, DECISION_REJECT, DECISION_SEND_BACK, DECISIONS
from .errors import err

STATUS_SUBMITTED = "SUBMITTED"
STATUS_SENT_BACK = "SENT_BACK_FOR_CORRECTION"
STATUS_REJECTED = "REJECTED"
STATUS_VERIFIED = "VERIFIED"
STATUS_DRC_ISSUED = "DRC_ISSUED"
TERMINAL_STATUSES = (STATUS_REJECTED, STATUS_DRC_ISSUED)


class ApplicationRegistry:
    def __init__(self, departments: list[str], sending_zones: list[str],
                 application_prefix: str = "APP-"):
        self.departments = list(departments)
        self.sending_zones = list(sending_zones)
        self.prefix = application_prefix
        self.notices: dict[str, dict] = {}
        self.applications: dict[str, dict] = {}
        self.sequence = 0

    # -- notices ---------------------------------------------------------

    def create_notice(self, issued_by: str, notice_id: str, sending_zone: str,
                      land_description_uri: str, height: int) -> dict:
        if notice_id in self.notices:
            raise err("DuplicateNotice", f"notice {notice_id} exists")
        if sending_zone not in self.sending_zones:
            raise err("UnknownZone", f"{sending_zone!r} is not a sending zone")
        notice = {
            "notice_id": notice_id,
            "sending_zone": sending_zone,
            "land_description_uri": land_description_uri,
            "issued_by": issued_by,
            "issued_at": height,
            "open": True,
        }
        self.notices[notice_id] = notice
        return notice

    def get_notice(self, notice_id: str) -> dict:
        notice = self.notices.get(notice_id)
        if notice is None:
            raise err("UnknownNotice", f"no notice {notice_id}")
        return notice

    # -- applications ----------------------------------------------------

    def submit(self, applicant: str, notice_id: str, land_details_uri: str,
               claimed_far: Decimal, height: int) -> dict:
        notice = self.notices.get(notice_id)
        if notice is None:
            raise err("UnknownNotice", f"no notice {notice_id}")
        if not notice["open"]:
            raise err("NoticeClosed", f"notice {notice_id} is closed")
        if claimed_far <= 0:
            raise err("ZeroFar", "claimed FAR must be positive")
        for app in self.applications.values():
            if (app["applicant"] == applicant and app["notice_id"] == notice_id
                    and app["status"] not in TERMINAL_STATUSES):
                raise err("DuplicateApplication",
                          f"live application {app['application_id']} against {notice_id}")
        self.sequence += 1
        application_id = f"{self.prefix}{self.sequence:06d}"
        app = {
            "application_id": application_id,
            "applicant": applicant,
            "notice_id": notice_id,
            "land_details_uri": land_details_uri,
            "claimed_far": claimed_far,
            "status": STATUS_SUBMITTED,
            "verification_trail": [],
            "next_department_index": 0,
            "submitted_at": height,
        }
        self.applications[application_id] = app
        return app

    def get(self, application_id: str) -> dict:
        app = self.applications.get(application_id)
        if app is None:
            raise err("NotFound", f"no application {application_id}")
        return app

    def pending_department(self, application_id: str) -> str:
        """Department whose decision the application is waiting on."""
        app = self.get(application_id)
        if app["status"] in TERMINAL_STATUSES:
            raise err("TerminalState", f"{application_id} is {app['status']}")
        if app["status"] != STATUS_SUBMITTED:
            raise err("NotPending", f"{application_id} is {app['status']}")
        return self.departments[app["next_department_index"]]

    def record_decision(self, application_id: str, officer: str, decision: str,
                        remarks: str, tx_id: str, height: int) -> dict:
        app = self.get(application_id)
        department = self.pending_department(application_id)
        if decision not in DECISIONS:
            raise err("UnknownDecision", f"unknown decision {decision!r}")
        app["verification_trail"].append({
            "officer": officer,
            "sub_department": department,
            "decision": decision,
            "remarks": remarks,
            "tx_id": tx_id,
            "height": height,
        })
        if decision == DECISION_APPROVE:
            app["next_department_index"] += 1
            if app["next_department_index"] == len(self.departments):
                app["status"] = STATUS_VERIFIED
        elif decision == DECISION_REJECT:
            app["status"] = STATUS_REJECTED
        elif decision == DECISION_SEND_BACK:
            # index stays at this department; resubmission resumes here
            app["status"] = STATUS_SENT_BACK
        return app

    def resubmit(self, caller: str, application_id: str, land_details_uri: str) -> dict:
        app = self.get(application_id)
        if caller != app["applicant"]:
            raise err("NotApplicant", f"{caller} did not file {application_id}")
        if app["status"] != STATUS_SENT_BACK:
            raise err("NotSentBack", f"{application_id} is {app['status']}")
        app["land_details_uri"] = land_details_uri
        app["status"] = STATUS_SUBMITTED
        return app

    def mark_issued(self, application_id: str):
        app = self.get(application_id)
        if app["status"] != STATUS_VERIFIED:
            raise err("NotVerified", f"{application_id} is {app['status']}")
        app["status"] = STATUS_DRC_ISSUED

    def list_applications(self, status: str | None = None, applicant: str | None = None,
                          department: str | None = None) -> list[dict]:
        rows = []
        for app in self.applications.values():
            if status and app["status"] != status:
                continue
            if applicant and app["applicant"] != applicant:
                continue
            if department:
                if app["status"] != STATUS_SUBMITTED:
                    continue
                if self.departments[app["next_department_index"]] != department:
                    continue
            rows.append(app)
        return sorted(rows, key=lambda a: a["application_id"])

    def snapshot(self) -> dict:
        return {
            "sequence": self.sequence,
            "notices": {nid: dict(sorted(n.items())) for nid, n in self.notices.items()},
            "applications": {
                aid: {
                    **{k: v for k, v in app.items() if k != "verification_trail"},
                    "verification_trail": [dict(sorted(r.items()))
                                           for r in app["verification_trail"]],
                }
                for aid, app in self.applications.items()
            },
        }
