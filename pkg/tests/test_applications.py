"""Application pipeline: notices, submission, multi-department verification."""

from decimal import Decimal

import pytest

from tdrledger.applications import ApplicationRegistry
from tdrledger.errors import RegistryError

DEPTS = ["planning", "revenue", "survey"]
ZONES = ["SZ-A", "SZ-B"]


@pytest.fixture
def registry():
    reg = ApplicationRegistry(DEPTS, ZONES)
    reg.create_notice("admin", "N-1", "SZ-A", "cid:" + "a" * 64, 1)
    return reg


def submit(reg, applicant="alice", notice="N-1", far="2.5"):
    return reg.submit(applicant, notice, "cid:" + "b" * 64, Decimal(far), 2)


class TestNotices:
    def test_duplicate_notice(self, registry):
        with pytest.raises(RegistryError) as caught:
            registry.create_notice("admin", "N-1", "SZ-A", "cid:" + "c" * 64, 3)
        assert caught.value.code == "DuplicateNotice"

    def test_unknown_sending_zone(self, registry):
        with pytest.raises(RegistryError) as caught:
            registry.create_notice("admin", "N-2", "RZ-A", "cid:" + "c" * 64, 3)
        assert caught.value.code == "UnknownZone"

    def test_get_notice(self, registry):
        assert registry.get_notice("N-1")["sending_zone"] == "SZ-A"
        with pytest.raises(RegistryError):
            registry.get_notice("N-9")


class TestSubmission:
    def test_ids_are_sequential_with_prefix(self, registry):
        a = submit(registry, "alice")
        b = submit(registry, "bob")
        assert a["application_id"] == "APP-000001"
        assert b["application_id"] == "APP-000002"

    def test_unknown_notice(self, registry):
        with pytest.raises(RegistryError) as caught:
            submit(registry, notice="N-404")
        assert caught.value.code == "UnknownNotice"

    def test_zero_or_negative_far(self, registry):
        for far in ("0", "-1"):
            with pytest.raises(RegistryError) as caught:
                submit(registry, far=far)
            assert caught.value.code == "ZeroFar"

    def test_second_live_application_rejected(self, registry):
        submit(registry, "alice")
        with pytest.raises(RegistryError) as caught:
            submit(registry, "alice")
        assert caught.value.code == "DuplicateApplication"

    def test_reapply_allowed_after_rejection(self, registry):
        app = submit(registry, "alice")
        registry.record_decision(app["application_id"], "off", "REJECT", "no", "t1", 3)
        assert submit(registry, "alice")["status"] == "SUBMITTED"


class TestVerification:
    def test_three_approvals_in_order_verify(self, registry):
        app_id = submit(registry)["application_id"]
        for i, dept in enumerate(DEPTS):
            assert registry.pending_department(app_id) == dept
            registry.record_decision(app_id, f"off-{i}", "APPROVE", "", f"t{i}", 3 + i)
        assert registry.get(app_id)["status"] == "VERIFIED"
        trail = registry.get(app_id)["verification_trail"]
        assert [t["sub_department"] for t in trail] == DEPTS

    def test_reject_is_terminal(self, registry):
        app_id = submit(registry)["application_id"]
        registry.record_decision(app_id, "off", "REJECT", "bad survey", "t1", 3)
        assert registry.get(app_id)["status"] == "REJECTED"
        with pytest.raises(RegistryError) as caught:
            registry.pending_department(app_id)
        assert caught.value.code == "TerminalState"

    def test_send_back_and_resubmit_preserve_earlier_approvals(self, registry):
        app_id = submit(registry)["application_id"]
        registry.record_decision(app_id, "o1", "APPROVE", "", "t1", 3)
        registry.record_decision(app_id, "o2", "SEND_BACK", "fix the map", "t2", 4)
        assert registry.get(app_id)["status"] == "SENT_BACK_FOR_CORRECTION"
        registry.resubmit("alice", app_id, "cid:" + "d" * 64)
        app = registry.get(app_id)
        assert app["status"] == "SUBMITTED"
        assert app["land_details_uri"] == "cid:" + "d" * 64
        # resumes at the department that sent it back, not at the start
        assert registry.pending_department(app_id) == "revenue"
        assert len(app["verification_trail"]) == 2

    def test_resubmit_guards(self, registry):
        app_id = submit(registry)["application_id"]
        with pytest.raises(RegistryError) as caught:
            registry.resubmit("alice", app_id, "cid:" + "d" * 64)
        assert caught.value.code == "NotSentBack"
        registry.record_decision(app_id, "o1", "SEND_BACK", "", "t1", 3)
        with pytest.raises(RegistryError) as caught:
            registry.resubmit("mallory", app_id, "cid:" + "d" * 64)
        assert caught.value.code == "NotApplicant"

    def test_decision_while_sent_back_rejected(self, registry):
        app_id = submit(registry)["application_id"]
        registry.record_decision(app_id, "o1", "SEND_BACK", "", "t1", 3)
        with pytest.raises(RegistryError) as caught:
            registry.pending_department(app_id)
        assert caught.value.code == "NotPending"

    def test_unknown_decision(self, registry):
        app_id = submit(registry)["application_id"]
        with pytest.raises(RegistryError) as caught:
            registry.record_decision(app_id, "o1", "MAYBE", "", "t1", 3)
        assert caught.value.code == "UnknownDecision"

    def test_trail_records_officer_decision_remarks(self, registry):
        app_id = submit(registry)["application_id"]
        registry.record_decision(app_id, "o1", "APPROVE", "all good", "t1", 3)
        entry = registry.get(app_id)["verification_trail"][0]
        assert entry["officer"] == "o1"
        assert entry["decision"] == "APPROVE"
        assert entry["remarks"] == "all good"
        assert entry["tx_id"] == "t1"


class TestIssuance:
    def test_mark_issued_requires_verified(self, registry):
        app_id = submit(registry)["application_id"]
        with pytest.raises(RegistryError) as caught:
            registry.mark_issued(app_id)
        assert caught.value.code == "NotVerified"
        for i, _ in enumerate(DEPTS):
            registry.record_decision(app_id, "o", "APPROVE", "", f"t{i}", 3)
        registry.mark_issued(app_id)
        assert registry.get(app_id)["status"] == "DRC_ISSUED"

    def test_issued_is_terminal(self, registry):
        app_id = submit(registry)["application_id"]
        for i, _ in enumerate(DEPTS):
            registry.record_decision(app_id, "o", "APPROVE", "", f"t{i}", 3)
        registry.mark_issued(app_id)
        with pytest.raises(RegistryError) as caught:
            registry.pending_department(app_id)
        assert caught.value.code == "TerminalState"


class TestListing:
    def test_filters(self, registry):
        a = submit(registry, "alice")["application_id"]
        b = submit(registry, "bob")["application_id"]
        registry.record_decision(b, "o", "REJECT", "", "t1", 3)
        assert [x["application_id"] for x in
                registry.list_applications(status="SUBMITTED")] == [a]
        assert [x["application_id"] for x in
                registry.list_applications(applicant="bob")] == [b]
        assert [x["application_id"] for x in
                registry.list_applications(department="planning")] == [a]
        assert registry.list_applications(department="revenue") == []
