"""Role-based access control: ADMIN, OFFICER (per department), USER.

Grants and revocations are themselves ledger commands, so every privilege
change is signed and auditable.  The registry refuses to drop the last
ADMIN; officer assignments always name a department from the configured
verification pipeline.
"""

from __future__ import annotations

from .commands import ROLE_ADMIN, ROLE_OFFICER, ROLES
from .errors import err


class RoleRegistry:
    def __init__(self, departments: list[str]):
        self.departments = list(departments)
        # key (subject, role, department or "") -> {granted_by, granted_at}
        self.assignments: dict[tuple[str, str, str], dict] = {}

    def require_admin(self, caller: str):
        if not self.has_role(caller, ROLE_ADMIN):
            raise err("NotAdmin", f"{caller} lacks {ROLE_ADMIN}")

    def grant(self, caller: str, subject: str, role: str, sub_department: str | None,
              granted_at: int):
        self.require_admin(caller)
        if role not in ROLES:
            raise err("UnknownRole", f"unknown role {role!r}")
        department = ""
        if role == ROLE_OFFICER:
            if not sub_department:
                raise err("MissingDepartment", "OFFICER grant needs a department")
            if sub_department not in self.departments:
                raise err("UnknownDepartment", f"{sub_department!r} not in pipeline")
            department = sub_department
        elif sub_department:
            raise err("UnknownDepartment", f"{role} takes no department")
        key = (subject, role, department)
        if key in self.assignments:
            return  # re-grant is a no-op
        self.assignments[key] = {"granted_by": caller, "granted_at": granted_at}

    def revoke(self, caller: str, subject: str, role: str):
        self.require_admin(caller)
        keys = [k for k in self.assignments if k[0] == subject and k[1] == role]
        if not keys:
            raise err("NoSuchAssignment", f"{subject} has no {role}")
        if role == ROLE_ADMIN and self.admin_count() == 1:
            raise err("LastAdmin", "cannot revoke the last ADMIN")
        for key in keys:
            del self.assignments[key]

    def has_role(self, subject: str, role: str, sub_department: str | None = None) -> bool:
        if role == ROLE_OFFICER and sub_department is None:
            return any(k[0] == subject and k[1] == role for k in self.assignments)
        return (subject, role, sub_department or "") in self.assignments

    def admin_count(self) -> int:
        return sum(1 for k in self.assignments if k[1] == ROLE_ADMIN)

    def list_assignments(self) -> list[dict]:
        rows = []
        for (subject, role, department), meta in sorted(self.assignments.items()):
            rows.append({
                "subject": subject,
                "role": role,
                "sub_department": department or None,
                "granted_by": meta["granted_by"],
                "granted_at": meta["granted_at"],
            })
        return rows

    def snapshot(self) -> dict:
        return {
            "|".join(key): dict(sorted(meta.items()))
            for key, meta in self.assignments.items()
        }
